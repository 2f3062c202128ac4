//! Trivial vector bundles `E = M x R^k` over a polynomial chart, their
//! derivative endomorphisms, connections and linear vector fields.
//!
//! A derivative endomorphism is stored in the flat-trivialization
//! decomposition `D = X + u`: it acts on a section componentwise as
//! `D(psi)^a = X(psi^a) + sum_b u^a_b psi^b`. The Leibniz rule
//! `D(f psi) = f D(psi) + X(f) psi` then holds by construction, and every
//! identity between such operators becomes a polynomial identity.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{bracket, Chart, VectorField};
use crate::ring::{Field, MatrixPoly, Poly, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TrivialBundle {
    base: Chart,
    rank: usize,
}

impl TrivialBundle {
    pub fn new(base: &Chart, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::dim("bundle rank must be at least 1"));
        }
        Ok(TrivialBundle { base: base.clone(), rank })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn field(&self) -> Field {
        self.base.field()
    }

    /// The total space as a chart: base coordinates followed by fiber
    /// coordinates `v1..vk` (another prefix is chosen on a name clash).
    pub fn total_chart(&self) -> Chart {
        let prefix = ["v", "w", "u", "z", "fib"]
            .into_iter()
            .find(|p| (1..=self.rank).all(|a| !self.base.names().contains(&format!("{p}{a}"))))
            .expect("no free fiber coordinate prefix");
        let fiber = Chart::standard(prefix, self.rank, self.base.field());
        self.base.product(&fiber).expect("fiber names are fresh")
    }

    pub fn check_same(&self, other: &TrivialBundle) -> Result<()> {
        if self.rank != other.rank || self.base.dim() != other.base.dim() {
            return Err(Error::chart(format!(
                "bundle of rank {} over {} vs rank {} over {}",
                self.rank, self.base, other.rank, other.base
            )));
        }
        Ok(())
    }

    fn check_matrix(&self, m: &MatrixPoly) -> Result<()> {
        if m.rows() != self.rank || m.cols() != self.rank {
            return Err(Error::dim(format!("{}x{} matrix on a bundle of rank {}", m.rows(), m.cols(), self.rank)));
        }
        for p in m.entries() {
            self.base.check_poly(p)?;
        }
        Ok(())
    }

    pub fn identity_end(&self) -> MatrixPoly {
        MatrixPoly::identity(self.rank, self.base_dim())
    }

    pub fn zero_end(&self) -> MatrixPoly {
        MatrixPoly::zeros(self.rank, self.rank, self.base_dim())
    }
}

/// A section `psi`, given by its `k` component functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Section {
    bundle: TrivialBundle,
    components: Vec<Poly>,
}

impl Section {
    pub fn new(bundle: &TrivialBundle, components: Vec<Poly>) -> Result<Self> {
        if components.len() != bundle.rank {
            return Err(Error::dim(format!("{} components for a bundle of rank {}", components.len(), bundle.rank)));
        }
        for c in &components {
            bundle.base.check_poly(c)?;
        }
        Ok(Section { bundle: bundle.clone(), components })
    }

    pub fn parse(bundle: &TrivialBundle, comps: &[&str]) -> Result<Self> {
        let components = comps.iter().map(|s| bundle.base.parse(s)).collect::<Result<_>>()?;
        Section::new(bundle, components)
    }

    pub fn zero(bundle: &TrivialBundle) -> Self {
        Section { bundle: bundle.clone(), components: vec![bundle.base.zero(); bundle.rank] }
    }

    /// The constant frame section `e_b`.
    pub fn frame(bundle: &TrivialBundle, b: usize) -> Self {
        let mut s = Section::zero(bundle);
        s.components[b] = bundle.base.one();
        s
    }

    pub(crate) fn from_parts(bundle: &TrivialBundle, components: Vec<Poly>) -> Self {
        debug_assert_eq!(components.len(), bundle.rank);
        Section { bundle: bundle.clone(), components }
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, f: &Poly) -> Section {
        Section::from_parts(&self.bundle, self.components.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &Section) -> Section {
        Section::from_parts(&self.bundle, self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Section) -> Section {
        Section::from_parts(&self.bundle, self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect())
    }

    pub fn text(&self) -> Vec<String> {
        self.components.iter().map(|c| self.bundle.base.print(c)).collect()
    }
}

/// A field of endomorphisms `u in Gamma End(E)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EndField {
    bundle: TrivialBundle,
    matrix: MatrixPoly,
}

impl EndField {
    pub fn new(bundle: &TrivialBundle, matrix: MatrixPoly) -> Result<Self> {
        bundle.check_matrix(&matrix)?;
        Ok(EndField { bundle: bundle.clone(), matrix })
    }

    pub fn matrix(&self) -> &MatrixPoly {
        &self.matrix
    }

    pub fn into_matrix(self) -> MatrixPoly {
        self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// True when the field equals `f * Id` for the given function.
    pub fn is_scalar(&self, f: &Poly) -> bool {
        self.matrix == MatrixPoly::diagonal(self.bundle.rank, f)
    }
}

/// A derivative endomorphism `D = X + u` of the sections of a trivial
/// bundle, with anchor `X = D_M`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DerivativeOp {
    bundle: TrivialBundle,
    anchor: VectorField,
    matrix: MatrixPoly,
}

impl DerivativeOp {
    pub fn new(bundle: &TrivialBundle, anchor: VectorField, matrix: MatrixPoly) -> Result<Self> {
        if anchor.chart().dim() != bundle.base_dim() {
            return Err(Error::chart("anchor field is not on the bundle base"));
        }
        bundle.check_matrix(&matrix)?;
        Ok(DerivativeOp { bundle: bundle.clone(), anchor, matrix })
    }

    pub fn zero(bundle: &TrivialBundle) -> Self {
        DerivativeOp { bundle: bundle.clone(), anchor: VectorField::zero(&bundle.base), matrix: bundle.zero_end() }
    }

    /// An order-zero operator `psi -> u psi`.
    pub fn endomorphism(bundle: &TrivialBundle, matrix: MatrixPoly) -> Result<Self> {
        DerivativeOp::new(bundle, VectorField::zero(&bundle.base), matrix)
    }

    /// `X` acting componentwise, i.e. `(X, 0)`.
    pub fn flat(bundle: &TrivialBundle, anchor: VectorField) -> Result<Self> {
        DerivativeOp::new(bundle, anchor, bundle.zero_end())
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn anchor(&self) -> &VectorField {
        &self.anchor
    }

    pub fn matrix(&self) -> &MatrixPoly {
        &self.matrix
    }

    pub fn end_part(&self) -> EndField {
        EndField { bundle: self.bundle.clone(), matrix: self.matrix.clone() }
    }

    /// Differential order: 0 exactly when the anchor vanishes.
    pub fn order(&self) -> u32 {
        if self.anchor.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.anchor.is_zero() && self.matrix.is_zero()
    }

    /// `D(psi)^a = X(psi^a) + sum_b u^a_b psi^b`.
    pub fn apply(&self, psi: &Section) -> Result<Section> {
        self.bundle.check_same(&psi.bundle)?;
        Ok(self.apply_unchecked(psi))
    }

    pub(crate) fn apply_unchecked(&self, psi: &Section) -> Section {
        let mult = self.matrix.apply(&psi.components);
        Section::from_parts(
            &self.bundle,
            psi.components.iter().zip(mult).map(|(c, m)| self.anchor.apply(c) + m).collect(),
        )
    }

    /// The operator commutator `[D, f] = D o f - f o D`, computed by acting
    /// on the frame: column `b` is `D(f e_b) - f D(e_b)`.
    pub fn symbol_check(&self, f: &Poly) -> Result<EndField> {
        self.bundle.base.check_poly(f)?;
        let k = self.bundle.rank;
        let mut m = self.bundle.zero_end();
        for b in 0..k {
            let e = Section::frame(&self.bundle, b);
            let lhs = self.apply_unchecked(&e.scale(f));
            let rhs = self.apply_unchecked(&e).scale(f);
            for (a, p) in lhs.sub(&rhs).components.into_iter().enumerate() {
                m.set(a, b, p);
            }
        }
        Ok(EndField { bundle: self.bundle.clone(), matrix: m })
    }

    /// `D(f psi) - f D(psi) - X(f) psi`, which vanishes for every derivative
    /// endomorphism.
    pub fn leibniz_defect(&self, f: &Poly, psi: &Section) -> Result<Section> {
        let lhs = self.apply(&psi.scale(f))?;
        let rhs = self.apply(psi)?.scale(f).add(&psi.scale(&self.anchor.apply(f)));
        Ok(lhs.sub(&rhs))
    }

    /// Closed form of `D1 o D2 - D2 o D1`:
    /// `([X1, X2], X1(u2) - X2(u1) + [u1, u2])`.
    pub fn commutator(&self, other: &DerivativeOp) -> Result<DerivativeOp> {
        self.bundle.check_same(&other.bundle)?;
        Ok(self.commutator_unchecked(other))
    }

    pub(crate) fn commutator_unchecked(&self, other: &DerivativeOp) -> DerivativeOp {
        let anchor = bracket(&self.anchor, &other.anchor);
        let matrix = other.matrix.map(|p| self.anchor.apply(p)) - self.matrix.map(|p| other.anchor.apply(p))
            + self.matrix.commutator(&other.matrix);
        DerivativeOp { bundle: self.bundle.clone(), anchor, matrix }
    }

    /// `f D = (f X, f u)`.
    pub fn scale(&self, f: &Poly) -> DerivativeOp {
        DerivativeOp { bundle: self.bundle.clone(), anchor: self.anchor.scale(f), matrix: self.matrix.scale(f) }
    }

    pub fn scale_scalar(&self, c: &Scalar) -> DerivativeOp {
        DerivativeOp {
            bundle: self.bundle.clone(),
            anchor: self.anchor.scale_scalar(c),
            matrix: self.matrix.scale_scalar(c),
        }
    }

    pub fn add(&self, other: &DerivativeOp) -> DerivativeOp {
        DerivativeOp {
            bundle: self.bundle.clone(),
            anchor: &self.anchor + &other.anchor,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &DerivativeOp) -> DerivativeOp {
        DerivativeOp {
            bundle: self.bundle.clone(),
            anchor: &self.anchor - &other.anchor,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn neg(&self) -> DerivativeOp {
        DerivativeOp { bundle: self.bundle.clone(), anchor: -&self.anchor, matrix: -&self.matrix }
    }

    /// The linear vector field `(X, -u)` on the total space, inverse to
    /// [`LinearVectorField::lie_derivation`].
    pub fn linear_field(&self) -> LinearVectorField {
        LinearVectorField { bundle: self.bundle.clone(), base_field: self.anchor.clone(), matrix: -&self.matrix }
    }
}

impl fmt::Display for DerivativeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .matrix
            .row_vecs()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|p| self.bundle.base.print(p)).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "(anchor {}, matrix [{}])", self.anchor, rows.join(", "))
    }
}

/// `[D1, D2]` with bundle checking.
pub fn commutator(d1: &DerivativeOp, d2: &DerivativeOp) -> Result<DerivativeOp> {
    d1.commutator(d2)
}

/// A linear connection `nabla_X = X + sum_i X^i Gamma_i` on a trivial
/// bundle.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Connection {
    bundle: TrivialBundle,
    gamma: Vec<MatrixPoly>,
}

impl Connection {
    pub fn new(bundle: &TrivialBundle, gamma: Vec<MatrixPoly>) -> Result<Self> {
        if gamma.len() != bundle.base_dim() {
            return Err(Error::dim(format!(
                "{} connection matrices over a base of dimension {}",
                gamma.len(),
                bundle.base_dim()
            )));
        }
        for g in &gamma {
            bundle.check_matrix(g)?;
        }
        Ok(Connection { bundle: bundle.clone(), gamma })
    }

    /// The flat connection `d` of the trivialization.
    pub fn trivial(bundle: &TrivialBundle) -> Self {
        Connection { bundle: bundle.clone(), gamma: vec![bundle.zero_end(); bundle.base_dim()] }
    }

    /// A rank-one connection `d + alpha` from a 1-form.
    pub fn from_one_form(bundle: &TrivialBundle, alpha: &[Poly]) -> Result<Self> {
        if bundle.rank != 1 {
            return Err(Error::dim("a 1-form defines a connection only on a line bundle"));
        }
        let gamma = alpha.iter().map(|a| MatrixPoly::diagonal(1, a)).collect();
        Connection::new(bundle, gamma)
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn gamma(&self) -> &[MatrixPoly] {
        &self.gamma
    }

    /// `sum_i X^i Gamma_i`.
    pub fn potential(&self, x: &VectorField) -> MatrixPoly {
        x.components().iter().zip(&self.gamma).fold(self.bundle.zero_end(), |acc, (c, g)| acc + g.scale(c))
    }

    fn check_field(&self, x: &VectorField) -> Result<()> {
        if x.chart().dim() != self.bundle.base_dim() {
            return Err(Error::chart("vector field is not on the connection's base"));
        }
        Ok(())
    }

    /// The covariant derivation `nabla_X`.
    pub fn covariant(&self, x: &VectorField) -> Result<DerivativeOp> {
        self.check_field(x)?;
        Ok(DerivativeOp { bundle: self.bundle.clone(), anchor: x.clone(), matrix: self.potential(x) })
    }

    /// `R(X1, X2) = nabla_[X1,X2] - [nabla_X1, nabla_X2]`, an order-zero
    /// operator.
    pub fn curvature(&self, x1: &VectorField, x2: &VectorField) -> Result<EndField> {
        let lhs = self.covariant(&bracket(x1, x2))?;
        let rhs = self.covariant(x1)?.commutator_unchecked(&self.covariant(x2)?);
        let diff = lhs.sub(&rhs);
        debug_assert!(diff.anchor.is_zero());
        Ok(EndField { bundle: self.bundle.clone(), matrix: diff.matrix })
    }

    /// Curvature on coordinate fields, `R(d_i, d_j)` for `i < j`.
    pub fn curvature_components(&self) -> Vec<((usize, usize), EndField)> {
        let base = &self.bundle.base;
        let n = base.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let r = self
                    .curvature(&VectorField::coordinate(base, i), &VectorField::coordinate(base, j))
                    .expect("coordinate fields live on the base");
                out.push(((i, j), r));
            }
        }
        out
    }

    pub fn is_flat(&self) -> bool {
        self.curvature_components().iter().all(|(_, r)| r.is_zero())
    }

    /// Splits `D = nabla_X + u'` with `X` the anchor of `D`.
    pub fn decompose(&self, d: &DerivativeOp) -> Result<(VectorField, EndField)> {
        self.bundle.check_same(&d.bundle)?;
        let u = &d.matrix - &self.potential(&d.anchor);
        Ok((d.anchor.clone(), EndField { bundle: self.bundle.clone(), matrix: u }))
    }

    pub fn reconstruct(&self, x: &VectorField, u: &EndField) -> Result<DerivativeOp> {
        let cov = self.covariant(x)?;
        Ok(DerivativeOp { matrix: &cov.matrix + &u.matrix, ..cov })
    }

    /// The induced connection on `End(E)`: `X(u) + [sum X^i Gamma_i, u]`.
    pub fn covariant_end(&self, x: &VectorField, u: &MatrixPoly) -> MatrixPoly {
        u.map(|p| x.apply(p)) + self.potential(x).commutator(u)
    }

    /// The bracket of `D1 = nabla_X1 + u1` and `D2 = nabla_X2 + u2` written
    /// in the connection splitting:
    /// `nabla_[X1,X2] + nabla_X1 u2 - nabla_X2 u1 + [u1, u2] - R(X1, X2)`.
    pub fn split_bracket(&self, d1: &DerivativeOp, d2: &DerivativeOp) -> Result<DerivativeOp> {
        let (x1, u1) = self.decompose(d1)?;
        let (x2, u2) = self.decompose(d2)?;
        let r = self.curvature(&x1, &x2)?;
        let twisted = self.covariant_end(&x1, &u2.matrix) - self.covariant_end(&x2, &u1.matrix)
            + u1.matrix.commutator(&u2.matrix)
            - r.matrix;
        let u = EndField { bundle: self.bundle.clone(), matrix: twisted };
        self.reconstruct(&bracket(&x1, &x2), &u)
    }
}

/// A linear vector field on the total space,
/// `(x, v) -> (X_M(x), B(x) v)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinearVectorField {
    bundle: TrivialBundle,
    base_field: VectorField,
    matrix: MatrixPoly,
}

impl LinearVectorField {
    pub fn new(bundle: &TrivialBundle, base_field: VectorField, matrix: MatrixPoly) -> Result<Self> {
        if base_field.chart().dim() != bundle.base_dim() {
            return Err(Error::chart("base field is not on the bundle base"));
        }
        bundle.check_matrix(&matrix)?;
        Ok(LinearVectorField { bundle: bundle.clone(), base_field, matrix })
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn base_field(&self) -> &VectorField {
        &self.base_field
    }

    pub fn matrix(&self) -> &MatrixPoly {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.base_field.is_zero() && self.matrix.is_zero()
    }

    /// The field as an ordinary vector field on the total chart.
    pub fn to_total_field(&self) -> VectorField {
        let total = self.bundle.total_chart();
        let n = self.bundle.base_dim();
        let k = self.bundle.rank;
        let mut comps: Vec<Poly> = self.base_field.components().iter().map(|c| c.extend(k)).collect();
        for a in 0..k {
            let c = (0..k).fold(total.zero(), |acc, b| acc + self.matrix.get(a, b).extend(k) * total.var(n + b));
            comps.push(c);
        }
        VectorField::new(&total, comps).expect("components built on the total chart")
    }

    /// Recovers a linear field from a total-space field, failing when the
    /// base part depends on the fiber or the fiber part is not linear in
    /// the fiber coordinates.
    pub fn from_total_field(bundle: &TrivialBundle, y: &VectorField) -> Result<Self> {
        let n = bundle.base_dim();
        let k = bundle.rank;
        if y.chart().dim() != n + k {
            return Err(Error::chart("field is not on the bundle's total space"));
        }
        let not_linear = || Error::descriptor("field", "not a linear vector field");
        let base: Vec<Poly> =
            y.components()[..n].iter().map(|c| c.truncate_vars(n).ok_or_else(not_linear)).collect::<Result<_>>()?;
        let mut m = bundle.zero_end();
        let total = bundle.total_chart();
        for a in 0..k {
            let comp = &y.components()[n + a];
            let mut rebuilt = total.zero();
            for b in 0..k {
                let coeff = comp.partial(n + b);
                let c = coeff.truncate_vars(n).ok_or_else(not_linear)?;
                rebuilt = rebuilt + c.extend(k) * total.var(n + b);
                m.set(a, b, c);
            }
            if rebuilt != *comp {
                return Err(not_linear());
            }
        }
        LinearVectorField::new(bundle, VectorField::new(bundle.base(), base)?, m)
    }

    /// The Lie derivation `D_X(psi) = T psi(X_M) - X(psi)`, i.e. `(X_M, -B)`.
    pub fn lie_derivation(&self) -> DerivativeOp {
        DerivativeOp { bundle: self.bundle.clone(), anchor: self.base_field.clone(), matrix: -&self.matrix }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(n: usize, k: usize, field: Field) -> TrivialBundle {
        TrivialBundle::new(&Chart::standard("x", n, field), k).unwrap()
    }

    fn op(e: &TrivialBundle, anchor: &[&str], rows: &[&[&str]]) -> DerivativeOp {
        let base = e.base();
        let m = MatrixPoly::from_rows(
            rows.iter().map(|r| r.iter().map(|s| base.parse(s).unwrap()).collect()).collect(),
            base.dim(),
        )
        .unwrap();
        DerivativeOp::new(e, VectorField::parse(base, anchor).unwrap(), m).unwrap()
    }

    #[test]
    fn apply_examples() {
        let e = bundle(1, 2, Field::Rational);
        let d = op(&e, &["1"], &[&["0", "0"], &["0", "0"]]);
        let psi = Section::parse(&e, &["x1^2", "0"]).unwrap();
        assert_eq!(d.apply(&psi).unwrap(), Section::parse(&e, &["2*x1", "0"]).unwrap());
        let id = op(&e, &["0"], &[&["1", "0"], &["0", "1"]]);
        assert_eq!(id.apply(&psi).unwrap(), psi);
        let l = bundle(1, 1, Field::Rational);
        let d = op(&l, &["1"], &[&["1"]]);
        let psi = Section::parse(&l, &["x1"]).unwrap();
        assert_eq!(d.apply(&psi).unwrap(), Section::parse(&l, &["1 + x1"]).unwrap());
        assert!(d.apply(&Section::zero(&e)).is_err());
    }

    #[test]
    fn symbol_is_scalar() {
        let e = bundle(2, 2, Field::Rational);
        let base = e.base();
        let d = op(&e, &["1", "0"], &[&["x2", "1"], &["x1^2", "0"]]);
        assert!(d.symbol_check(&base.var(0)).unwrap().is_scalar(&base.one()));
        assert!(d.symbol_check(&base.constant(Scalar::from_int(5))).unwrap().is_zero());
        let d = op(&e, &["x2", "0"], &[&["x1", "0"], &["0", "x2"]]);
        assert!(d.symbol_check(&base.var(0)).unwrap().is_scalar(&base.var(1)));
    }

    #[test]
    fn commutator_examples() {
        let e = bundle(1, 1, Field::Rational);
        let d1 = op(&e, &["1"], &[&["0"]]);
        let d2 = op(&e, &["0"], &[&["x1"]]);
        assert!(d1.commutator(&d1).unwrap().is_zero());
        assert_eq!(d1.commutator(&d2).unwrap(), op(&e, &["0"], &[&["1"]]));
        let e2 = bundle(1, 2, Field::Rational);
        let u1 = op(&e2, &["0"], &[&["0", "1"], &["0", "0"]]);
        let u2 = op(&e2, &["0"], &[&["0", "0"], &["1", "0"]]);
        let c = u1.commutator(&u2).unwrap();
        assert_eq!(c.matrix(), &u1.matrix().commutator(u2.matrix()));
        assert_eq!(c.order(), 0);
    }

    #[test]
    fn covariant_examples() {
        let e = bundle(2, 1, Field::Gaussian);
        let base = e.base();
        let flat = Connection::trivial(&e);
        let x = VectorField::parse(base, &["x2", "1"]).unwrap();
        assert_eq!(flat.covariant(&x).unwrap(), DerivativeOp::flat(&e, x.clone()).unwrap());
        let pq = Connection::from_one_form(&e, &[base.zero(), base.parse("i*x1").unwrap()]).unwrap();
        let d2 = VectorField::coordinate(base, 1);
        assert_eq!(pq.covariant(&d2).unwrap(), op(&e, &["0", "1"], &[&["i*x1"]]));
        assert!(pq.covariant(&VectorField::zero(base)).unwrap().is_zero());
    }

    #[test]
    fn curvature_examples() {
        let e = bundle(2, 1, Field::Gaussian);
        let base = e.base();
        let d1 = VectorField::coordinate(base, 0);
        let d2 = VectorField::coordinate(base, 1);
        assert!(Connection::trivial(&e).curvature(&d1, &d2).unwrap().is_zero());
        let pq = Connection::from_one_form(&e, &[base.zero(), base.parse("i*x1").unwrap()]).unwrap();
        let r = pq.curvature(&d1, &d2).unwrap();
        assert!(r.is_scalar(&base.parse("-i").unwrap()));
        assert!(pq.curvature(&d1, &d1).unwrap().is_zero());
        assert!(!pq.is_flat());
    }

    #[test]
    fn decompose_examples() {
        let e = bundle(2, 2, Field::Rational);
        let base = e.base();
        let d = op(&e, &["x1", "1"], &[&["x2", "1"], &["0", "x1^2"]]);
        let flat = Connection::trivial(&e);
        let (x, u) = flat.decompose(&d).unwrap();
        assert_eq!((&x, u.matrix()), (d.anchor(), d.matrix()));
        let g1 = MatrixPoly::from_rows(vec![vec![base.var(1), base.one()], vec![base.zero(), base.zero()]], 2).unwrap();
        let nabla = Connection::new(&e, vec![g1, MatrixPoly::identity(2, 2)]).unwrap();
        let cov = nabla.covariant(&x).unwrap();
        let (_, u0) = nabla.decompose(&cov).unwrap();
        assert!(u0.is_zero());
        let (x, u) = nabla.decompose(&d).unwrap();
        assert_eq!(u.matrix(), &(d.matrix() - &nabla.potential(&x)));
        assert_eq!(nabla.reconstruct(&x, &u).unwrap(), d);
    }

    #[test]
    fn lie_derivation_examples() {
        let e = bundle(1, 2, Field::Rational);
        let base = e.base();
        let xm = VectorField::coordinate(base, 0);
        let horiz = LinearVectorField::new(&e, xm.clone(), e.zero_end()).unwrap();
        assert_eq!(horiz.lie_derivation(), DerivativeOp::flat(&e, xm.clone()).unwrap());
        let b = MatrixPoly::from_rows(vec![vec![base.var(0), base.one()], vec![base.zero(), base.zero()]], 1).unwrap();
        let vert = LinearVectorField::new(&e, VectorField::zero(base), b.clone()).unwrap();
        // on a constant section, T psi(X_M) = 0 and the fiber part gives -B psi
        let e0 = Section::frame(&e, 0);
        assert_eq!(vert.lie_derivation().apply(&e0).unwrap().components(), (-&b).apply(e0.components()).as_slice());
        let d = op(&e, &["1"], &[&["1", "0"], &["0", "1"]]);
        let lf = d.linear_field();
        assert_eq!(lf.matrix(), &(-&e.identity_end()));
        assert_eq!(lf.lie_derivation(), d);
        assert!(DerivativeOp::zero(&e).linear_field().is_zero());
    }

    #[test]
    fn total_field_round_trip() {
        let e = bundle(2, 2, Field::Rational);
        let d = op(&e, &["x2", "x1^2"], &[&["x1", "1"], &["x2^2", "0"]]);
        let lf = d.linear_field();
        let y = lf.to_total_field();
        assert_eq!(LinearVectorField::from_total_field(&e, &y).unwrap(), lf);
        let total = e.total_chart();
        let nonlinear = VectorField::parse(&total, &["0", "0", "v1^2", "0"]).unwrap();
        assert!(LinearVectorField::from_total_field(&e, &nonlinear).is_err());
    }
}
