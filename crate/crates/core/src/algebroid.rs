//! Lie algebroids on a chart given by an anchor frame and structure
//! functions, their morphisms, A-connections, and the algebroid `D(E)`.
//!
//! A section of a rank-`r` algebroid is an `r`-tuple of polynomials in the
//! frame `e_1..e_r`. The bracket is extended from the frame by the Leibniz
//! rule:
//!
//! `[V, W]^g = sum V^a W^b c^g_ab + a(V)(W^g) - a(W)(V^g)`.
//!
//! Frame checks suffice for the axioms. Once the anchor is a morphism on
//! frame pairs, the Jacobiator is C-infinity-trilinear and vanishes when it
//! vanishes on frame triples; antisymmetry on the frame is stored
//! structurally.

use std::collections::BTreeMap;
use std::fmt;

use crate::actions::{AlgebroidAction, LieAlgebraAction};
use crate::bundle::{Connection, DerivativeOp, EndField, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::{bracket, Chart, VectorField};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::{Field, MatrixPoly, Poly};

/// How an algebroid was constructed. Transforms that need to undo a
/// construction look here.
#[derive(Clone, PartialEq, Debug)]
pub enum Provenance {
    Abstract,
    Tangent,
    Doe(TrivialBundle),
    Trivial(Connection),
    ActionAlgebra(Box<LieAlgebraAction>),
    ActionFibered(Box<AlgebroidAction>),
}

#[derive(Clone, PartialEq, Debug)]
pub struct LieAlgebroid {
    base: Chart,
    rank: usize,
    anchor: Vec<VectorField>,
    structure: Vec<Poly>,
    provenance: Provenance,
    certified: bool,
}

/// Structure functions keyed by zero-based `(a, b, g)`, meaning
/// `c^g_ab`. Entries for `a > b` are filled in by antisymmetry.
pub type StructureTable = BTreeMap<(usize, usize, usize), Poly>;

impl LieAlgebroid {
    pub fn new(base: &Chart, anchor: Vec<VectorField>, structure: &StructureTable) -> Result<Self> {
        Self::with_provenance(base, anchor, structure, Provenance::Abstract)
    }

    pub(crate) fn with_provenance(
        base: &Chart,
        anchor: Vec<VectorField>,
        table: &StructureTable,
        provenance: Provenance,
    ) -> Result<Self> {
        let r = anchor.len();
        for x in &anchor {
            if x.chart().dim() != base.dim() {
                return Err(Error::chart("anchor field is not on the algebroid base"));
            }
        }
        let mut structure = vec![base.zero(); r * r * r];
        let idx = |a: usize, b: usize, g: usize| (a * r + b) * r + g;
        for (&(a, b, g), p) in table {
            if a >= r || b >= r || g >= r {
                return Err(Error::dim(format!(
                    "structure index ({}, {}, {}) out of range for rank {r}",
                    a + 1,
                    b + 1,
                    g + 1
                )));
            }
            base.check_poly(p)?;
            if p.is_zero() {
                continue;
            }
            if a == b {
                return Err(Error::descriptor("structure", format!("c({0},{0},{1}) must vanish", a + 1, g + 1)));
            }
            let (lo, hi, val) = if a < b { (a, b, p.clone()) } else { (b, a, -p) };
            let slot = &mut structure[idx(lo, hi, g)];
            if !slot.is_zero() && *slot != val {
                return Err(Error::descriptor(
                    "structure",
                    format!("entries ({0},{1},{2}) and ({1},{0},{2}) are not antisymmetric", a + 1, b + 1, g + 1),
                ));
            }
            *slot = val.clone();
            structure[idx(hi, lo, g)] = -val;
        }
        let mut out = LieAlgebroid { base: base.clone(), rank: r, anchor, structure, provenance, certified: false };
        out.certified = out.check_axioms().passed();
        Ok(out)
    }

    /// A Lie algebra: an algebroid over a point.
    pub fn lie_algebra(dim: usize, constants: &StructureTable, field: Field) -> Result<Self> {
        let point = Chart::point(field);
        LieAlgebroid::new(&point, vec![VectorField::zero(&point); dim], constants)
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn anchor_frame(&self) -> &[VectorField] {
        &self.anchor
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// `c^g_ab`, zero-based.
    pub fn structure(&self, a: usize, b: usize, g: usize) -> &Poly {
        &self.structure[(a * self.rank + b) * self.rank + g]
    }

    /// Nonzero structure functions with `a < b`.
    pub fn structure_table(&self) -> StructureTable {
        let r = self.rank;
        let mut t = StructureTable::new();
        for a in 0..r {
            for b in a + 1..r {
                for g in 0..r {
                    let p = self.structure(a, b, g);
                    if !p.is_zero() {
                        t.insert((a, b, g), p.clone());
                    }
                }
            }
        }
        t
    }

    /// The frame section `e_a` as a tuple.
    pub fn frame(&self, a: usize) -> Vec<Poly> {
        let mut v = vec![self.base.zero(); self.rank];
        v[a] = self.base.one();
        v
    }

    fn check_section(&self, v: &[Poly]) -> Result<()> {
        if v.len() != self.rank {
            return Err(Error::dim(format!("{} components for an algebroid of rank {}", v.len(), self.rank)));
        }
        v.iter().try_for_each(|p| self.base.check_poly(p))
    }

    /// `a(V) = sum V^a a(e_a)`.
    pub fn anchor_of(&self, v: &[Poly]) -> VectorField {
        v.iter()
            .zip(&self.anchor)
            .filter(|(c, _)| !c.is_zero())
            .fold(VectorField::zero(&self.base), |acc, (c, x)| &acc + &x.scale(c))
    }

    pub fn bracket_sections(&self, v: &[Poly], w: &[Poly]) -> Result<Vec<Poly>> {
        self.check_section(v)?;
        self.check_section(w)?;
        Ok(self.bracket_unchecked(v, w))
    }

    pub(crate) fn bracket_unchecked(&self, v: &[Poly], w: &[Poly]) -> Vec<Poly> {
        let r = self.rank;
        let av = self.anchor_of(v);
        let aw = self.anchor_of(w);
        let mut out: Vec<Poly> = (0..r).map(|g| av.apply(&w[g]) - aw.apply(&v[g])).collect();
        for a in 0..r {
            if v[a].is_zero() {
                continue;
            }
            for b in 0..r {
                if a == b || w[b].is_zero() {
                    continue;
                }
                let vw = &v[a] * &w[b];
                for (g, slot) in out.iter_mut().enumerate() {
                    let c = self.structure(a, b, g);
                    if !c.is_zero() {
                        *slot = &*slot + &(&vw * c);
                    }
                }
            }
        }
        out
    }

    fn witness(&self, label: String) -> Witness {
        Witness::new(label, self.base.names())
    }

    /// Antisymmetry, anchor morphism and Jacobi on the frame, each reported
    /// with its first failure.
    pub fn check_axioms(&self) -> Report {
        let r = self.rank;
        let mut report = Report::new("lie algebroid");

        let mut anti = CheckResult::pass("antisymmetry");
        'anti: for a in 0..r {
            for b in a..r {
                for g in 0..r {
                    let res = self.structure(a, b, g) + self.structure(b, a, g);
                    if !res.is_zero() {
                        let w = self.witness(format!("c({0},{1},{2}) + c({1},{0},{2})", a + 1, b + 1, g + 1));
                        anti = CheckResult::fail("antisymmetry", w.residual([res]));
                        break 'anti;
                    }
                }
            }
        }
        report.push(anti);

        let mut anchor = CheckResult::pass("anchor-morphism");
        'anchor: for a in 0..r {
            for b in a + 1..r {
                let lhs = self.anchor_of(&self.bracket_unchecked(&self.frame(a), &self.frame(b)));
                let rhs = bracket(&self.anchor[a], &self.anchor[b]);
                let res = &lhs - &rhs;
                if !res.is_zero() {
                    let w = self
                        .witness(format!("a([e{0},e{1}]) - [a(e{0}),a(e{1})]", a + 1, b + 1))
                        .residual(res.components().to_vec());
                    anchor = CheckResult::fail("anchor-morphism", w);
                    break 'anchor;
                }
            }
        }
        report.push(anchor);

        let mut jacobi = CheckResult::pass("jacobi");
        'jacobi: for a in 0..r {
            for b in a + 1..r {
                for g in b + 1..r {
                    let res = self.jacobiator(&self.frame(a), &self.frame(b), &self.frame(g));
                    if res.iter().any(|p| !p.is_zero()) {
                        let w = self.witness(format!("J(e{}, e{}, e{})", a + 1, b + 1, g + 1)).residual(res);
                        jacobi = CheckResult::fail("jacobi", w);
                        break 'jacobi;
                    }
                }
            }
        }
        report.push(jacobi);
        report
    }

    /// `[[U,V],W] + [[V,W],U] + [[W,U],V]`.
    pub fn jacobiator(&self, u: &[Poly], v: &[Poly], w: &[Poly]) -> Vec<Poly> {
        let t1 = self.bracket_unchecked(&self.bracket_unchecked(u, v), w);
        let t2 = self.bracket_unchecked(&self.bracket_unchecked(v, w), u);
        let t3 = self.bracket_unchecked(&self.bracket_unchecked(w, u), v);
        t1.into_iter().zip(t2).zip(t3).map(|((a, b), c)| a + b + c).collect()
    }

    /// True when the anchor frame spans every coordinate direction with
    /// constant coefficients, a sufficient test for transitivity.
    pub fn has_coordinate_anchor_frame(&self) -> bool {
        (0..self.base.dim()).all(|i| self.anchor.contains(&VectorField::coordinate(&self.base, i)))
    }
}

impl fmt::Display for LieAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lie algebroid of rank {} over {}", self.rank, self.base)
    }
}

/// `TM` with the coordinate frame, identity anchor and zero structure.
pub fn tangent_algebroid(chart: &Chart) -> LieAlgebroid {
    let anchor = (0..chart.dim()).map(|i| VectorField::coordinate(chart, i)).collect();
    LieAlgebroid::with_provenance(chart, anchor, &StructureTable::new(), Provenance::Tangent)
        .expect("coordinate frame is well formed")
}

/// Index of the frame element `(0, E_ab)` of `D(E)`.
pub fn doe_index(bundle: &TrivialBundle, a: usize, b: usize) -> usize {
    bundle.base_dim() + a * bundle.rank() + b
}

fn end_structure(bundle: &TrivialBundle, table: &mut StructureTable) {
    let k = bundle.rank();
    let one = bundle.base().one();
    // [E_ab, E_cd] = d_bc E_ad - d_da E_cb
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    let (p, q) = (doe_index(bundle, a, b), doe_index(bundle, c, d));
                    if p >= q {
                        continue;
                    }
                    let mut add = |g: usize, s: &Poly| {
                        let e = table.entry((p, q, g)).or_insert_with(|| bundle.base().zero());
                        *e = &*e + s;
                    };
                    if b == c {
                        add(doe_index(bundle, a, d), &one);
                    }
                    if d == a {
                        add(doe_index(bundle, c, b), &-&one);
                    }
                }
            }
        }
    }
    table.retain(|_, p| !p.is_zero());
}

fn doe_anchor(bundle: &TrivialBundle) -> Vec<VectorField> {
    let base = bundle.base();
    let n = base.dim();
    (0..n + bundle.rank() * bundle.rank())
        .map(|i| if i < n { VectorField::coordinate(base, i) } else { VectorField::zero(base) })
        .collect()
}

/// `D(E)` for a trivial bundle, in the frame `(d_i, 0)` followed by
/// `(0, E_ab)` in row-major order.
pub fn doe_algebroid(bundle: &TrivialBundle) -> LieAlgebroid {
    let mut table = StructureTable::new();
    end_structure(bundle, &mut table);
    LieAlgebroid::with_provenance(bundle.base(), doe_anchor(bundle), &table, Provenance::Doe(bundle.clone()))
        .expect("D(E) frame is well formed")
}

/// Coordinates of a derivative endomorphism in the `D(E)` frame.
pub fn doe_section(d: &DerivativeOp) -> Vec<Poly> {
    let mut v: Vec<Poly> = d.anchor().components().to_vec();
    v.extend(d.matrix().entries().iter().cloned());
    v
}

/// The derivative endomorphism with the given `D(E)` coordinates.
pub fn doe_operator(bundle: &TrivialBundle, v: &[Poly]) -> Result<DerivativeOp> {
    let n = bundle.base_dim();
    let k = bundle.rank();
    if v.len() != n + k * k {
        return Err(Error::dim(format!("{} coordinates for D(E) of rank {}", v.len(), n + k * k)));
    }
    let anchor = VectorField::new(bundle.base(), v[..n].to_vec())?;
    let m = MatrixPoly::from_fn(k, k, n, |a, b| v[n + a * k + b].clone());
    DerivativeOp::new(bundle, anchor, m)
}

/// `TM + End(E)` with the bracket twisted by a flat connection:
/// `[(X,u),(Y,v)] = ([X,Y], nabla_X v - nabla_Y u + [u,v])`.
pub fn trivial_algebroid(connection: &Connection) -> Result<LieAlgebroid> {
    let bundle = connection.bundle();
    for ((i, j), r) in connection.curvature_components() {
        if !r.is_zero() {
            let w = Witness::new(format!("R(d{}, d{})", i + 1, j + 1), bundle.base().names())
                .residual(r.into_matrix().entries().to_vec());
            return Err(Error::NotFlat(Box::new(w)));
        }
    }
    let k = bundle.rank();
    let n = bundle.base_dim();
    let mut table = StructureTable::new();
    end_structure(bundle, &mut table);
    for (i, g) in connection.gamma().iter().enumerate() {
        for a in 0..k {
            for b in 0..k {
                let e = MatrixPoly::unit(k, n, a, b);
                let c = g.commutator(&e);
                for x in 0..k {
                    for y in 0..k {
                        let p = c.get(x, y);
                        if !p.is_zero() {
                            table.insert((i, doe_index(bundle, a, b), doe_index(bundle, x, y)), p.clone());
                        }
                    }
                }
            }
        }
    }
    LieAlgebroid::with_provenance(bundle.base(), doe_anchor(bundle), &table, Provenance::Trivial(connection.clone()))
}

/// A base-preserving morphism; column `a` of `matrix` is `phi(e_a)` in the
/// target frame.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebroidMorphism {
    source: LieAlgebroid,
    target: LieAlgebroid,
    matrix: MatrixPoly,
}

impl AlgebroidMorphism {
    pub fn new(source: &LieAlgebroid, target: &LieAlgebroid, matrix: MatrixPoly) -> Result<Self> {
        if source.base.dim() != target.base.dim() {
            return Err(Error::chart("morphisms must preserve the base"));
        }
        if matrix.rows() != target.rank || matrix.cols() != source.rank {
            return Err(Error::dim(format!(
                "{}x{} morphism matrix for ranks {} -> {}",
                matrix.rows(),
                matrix.cols(),
                source.rank,
                target.rank
            )));
        }
        matrix.entries().iter().try_for_each(|p| source.base.check_poly(p))?;
        Ok(AlgebroidMorphism { source: source.clone(), target: target.clone(), matrix })
    }

    pub fn identity(a: &LieAlgebroid) -> Self {
        AlgebroidMorphism { source: a.clone(), target: a.clone(), matrix: MatrixPoly::identity(a.rank, a.base.dim()) }
    }

    pub fn source(&self) -> &LieAlgebroid {
        &self.source
    }

    pub fn target(&self) -> &LieAlgebroid {
        &self.target
    }

    pub fn matrix(&self) -> &MatrixPoly {
        &self.matrix
    }

    pub fn map_section(&self, v: &[Poly]) -> Vec<Poly> {
        self.matrix.apply(v)
    }

    pub fn check(&self) -> Report {
        let mut report = Report::new("algebroid morphism");
        for (name, a) in [("source-certified", &self.source), ("target-certified", &self.target)] {
            if a.certified {
                report.push(CheckResult::pass(name));
            } else {
                report.push(CheckResult::error(name, "algebroid fails its axioms"));
            }
        }
        let names = self.source.base.names();

        let mut anchor = CheckResult::pass("anchor");
        for a in 0..self.source.rank {
            let lhs = self.target.anchor_of(&self.matrix.column(a));
            let res = &lhs - &self.source.anchor[a];
            if !res.is_zero() {
                let w =
                    Witness::new(format!("a'(phi(e{0})) - a(e{0})", a + 1), names).residual(res.components().to_vec());
                anchor = CheckResult::fail("anchor", w);
                break;
            }
        }
        report.push(anchor);

        let mut brackets = CheckResult::pass("bracket");
        'outer: for a in 0..self.source.rank {
            for b in a + 1..self.source.rank {
                let (ea, eb) = (self.source.frame(a), self.source.frame(b));
                let lhs = self.map_section(&self.source.bracket_unchecked(&ea, &eb));
                let rhs = self.target.bracket_unchecked(&self.map_section(&ea), &self.map_section(&eb));
                let res: Vec<Poly> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
                if res.iter().any(|p| !p.is_zero()) {
                    let w = Witness::new(format!("phi([e{0},e{1}]) - [phi(e{0}),phi(e{1})]", a + 1, b + 1), names)
                        .residual(res);
                    brackets = CheckResult::fail("bracket", w);
                    break 'outer;
                }
            }
        }
        report.push(brackets);
        report
    }
}

/// Checks the anchor and bracket conditions of a morphism.
pub fn check_morphism(phi: &AlgebroidMorphism) -> Report {
    phi.check()
}

/// A connection seen as a candidate morphism `TM -> D(E)`,
/// `d_i -> (d_i, Gamma_i)`. It is a morphism exactly when it is flat.
pub fn connection_morphism(connection: &Connection) -> AlgebroidMorphism {
    let bundle = connection.bundle();
    let base = bundle.base();
    let doe = doe_algebroid(bundle);
    let tm = tangent_algebroid(base);
    let n = base.dim();
    let mut m = MatrixPoly::zeros(doe.rank, n, n);
    for i in 0..n {
        let d = connection.covariant(&VectorField::coordinate(base, i)).expect("same base");
        for (row, p) in doe_section(&d).into_iter().enumerate() {
            m.set(row, i, p);
        }
    }
    AlgebroidMorphism::new(&tm, &doe, m).expect("shapes agree")
}

/// The isomorphism from the trivial algebroid of a flat connection to
/// `D(E)`, `(X, u) -> nabla_X + u`.
pub fn trivial_to_doe(connection: &Connection) -> Result<AlgebroidMorphism> {
    let source = trivial_algebroid(connection)?;
    let bundle = connection.bundle();
    let doe = doe_algebroid(bundle);
    let n = bundle.base_dim();
    let mut m = MatrixPoly::identity(doe.rank, n);
    for (i, g) in connection.gamma().iter().enumerate() {
        for a in 0..bundle.rank() {
            for b in 0..bundle.rank() {
                m.set(doe_index(bundle, a, b), i, g.get(a, b).clone());
            }
        }
    }
    AlgebroidMorphism::new(&source, &doe, m)
}

/// An anchor-compatible assignment `e_a -> D_a` of derivative
/// endomorphisms, extended C-infinity-linearly.
#[derive(Clone, PartialEq, Debug)]
pub struct AConnection {
    algebroid: LieAlgebroid,
    bundle: TrivialBundle,
    ops: Vec<DerivativeOp>,
}

impl AConnection {
    pub fn new(algebroid: &LieAlgebroid, bundle: &TrivialBundle, ops: Vec<DerivativeOp>) -> Result<Self> {
        if bundle.base_dim() != algebroid.base.dim() {
            return Err(Error::chart("bundle and algebroid have different bases"));
        }
        if ops.len() != algebroid.rank {
            return Err(Error::dim(format!("{} operators for an algebroid of rank {}", ops.len(), algebroid.rank)));
        }
        for (a, d) in ops.iter().enumerate() {
            bundle.check_same(d.bundle())?;
            let res = d.anchor() - &algebroid.anchor[a];
            if !res.is_zero() {
                let w = Witness::new(format!("anchor(D{0}) - a(e{0})", a + 1), algebroid.base.names())
                    .residual(res.components().to_vec());
                return Err(Error::AnchorMismatch(Box::new(w)));
            }
        }
        Ok(AConnection { algebroid: algebroid.clone(), bundle: bundle.clone(), ops })
    }

    pub fn algebroid(&self) -> &LieAlgebroid {
        &self.algebroid
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn ops(&self) -> &[DerivativeOp] {
        &self.ops
    }

    /// `D_V = sum V^a D_a`.
    pub fn apply_section(&self, v: &[Poly]) -> DerivativeOp {
        v.iter()
            .zip(&self.ops)
            .filter(|(c, _)| !c.is_zero())
            .fold(DerivativeOp::zero(&self.bundle), |acc, (c, d)| acc.add(&d.scale(c)))
    }

    /// `R(e_a, e_b) = D_[e_a,e_b] - [D_a, D_b]`.
    pub fn curvature(&self, a: usize, b: usize) -> Result<EndField> {
        let r = self.algebroid.rank;
        if a >= r || b >= r {
            return Err(Error::dim("frame index out of range"));
        }
        let br = self.algebroid.bracket_unchecked(&self.algebroid.frame(a), &self.algebroid.frame(b));
        let diff = self.apply_section(&br).sub(&self.ops[a].commutator_unchecked(&self.ops[b]));
        if !diff.anchor().is_zero() {
            let w = Witness::new(format!("anchor of R(e{}, e{})", a + 1, b + 1), self.algebroid.base.names())
                .residual(diff.anchor().components().to_vec());
            return Err(Error::AnchorMismatch(Box::new(w)));
        }
        EndField::new(&self.bundle, diff.matrix().clone())
    }

    /// Flatness on all frame pairs; flat A-connections are representations.
    pub fn check_flat(&self) -> Report {
        let mut report = Report::new("A-connection curvature");
        let names = self.algebroid.base.names();
        let mut check = CheckResult::pass("flatness");
        'outer: for a in 0..self.algebroid.rank {
            for b in a + 1..self.algebroid.rank {
                let label = format!("R(e{}, e{})", a + 1, b + 1);
                match self.curvature(a, b) {
                    Ok(r) if r.is_zero() => {}
                    Ok(r) => {
                        let w = Witness::new(label, names).residual(r.into_matrix().entries().to_vec());
                        check = CheckResult::fail("flatness", w);
                        break 'outer;
                    }
                    Err(Error::AnchorMismatch(w)) => {
                        check = CheckResult::fail("flatness", *w);
                        break 'outer;
                    }
                    Err(e) => {
                        check = CheckResult::error("flatness", e.to_string());
                        break 'outer;
                    }
                }
            }
        }
        report.push(check);
        report
    }
}

pub fn aconnection_curvature(c: &AConnection, a: usize, b: usize) -> Result<EndField> {
    c.curvature(a, b)
}
