//! Pseudo-linear endomorphisms, twisted derivations of the algebra
//! `A(E) = C(M) + Gamma E`, and the equivalences relating them to
//! derivative endomorphisms and semi-linear isomorphisms.
//!
//! Operators are finite sums of atoms `psi -> c(x) (d^m psi)(phi(x))` with a
//! polynomial matrix coefficient, a multi-index and an affine pullback.
//! This class is closed under sums and composition, so commutators of
//! derivative endomorphisms and semi-linear isomorphisms stay inside it.
//! Identities are verified by evaluation on monomials and monomial multiples
//! of frame sections; in this class an operator of order `r` that kills all
//! monomials of degree at most `r` is zero, so the default bound leaves a
//! wide margin.
//!
//! Polynomial modules are torsion free, so the torsion caveat attached to
//! twisted derivations never applies here.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::bundle::{DerivativeOp, Section, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, Chart, VectorField};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::{MatrixPoly, Poly, Scalar};

/// `psi -> coeff(x) * (d^deriv psi)(pullback(x))`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Atom {
    coeff: MatrixPoly,
    deriv: Vec<u32>,
    pullback: AffineMap,
}

impl Atom {
    pub fn coeff(&self) -> &MatrixPoly {
        &self.coeff
    }

    pub fn deriv(&self) -> &[u32] {
        &self.deriv
    }

    pub fn pullback(&self) -> &AffineMap {
        &self.pullback
    }

    pub fn order(&self) -> u32 {
        self.deriv.iter().sum()
    }

    fn key_cmp(&self, other: &Atom) -> Ordering {
        fn flat(a: &AffineMap) -> Vec<(&num_rational::BigRational, &num_rational::BigRational)> {
            a.linear().iter().flatten().chain(a.shift()).map(|s| (s.re(), s.im())).collect()
        }
        self.deriv.cmp(&other.deriv).then_with(|| flat(&self.pullback).cmp(&flat(&other.pullback)))
    }
}

fn diff_multi(p: &Poly, m: &[u32]) -> Poly {
    let mut out = p.clone();
    for (i, &e) in m.iter().enumerate() {
        for _ in 0..e {
            if out.is_zero() {
                return out;
            }
            out = out.partial(i);
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// All multi-indices `j <= m` componentwise.
fn sub_indices(m: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &e in m {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=e).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// A finite sum of atoms acting on `cols`-tuples of polynomials and
/// producing `rows`-tuples. Functions are the case `rows = cols = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffDiffOperator {
    chart: Chart,
    rows: usize,
    cols: usize,
    atoms: Vec<Atom>,
}

impl AffDiffOperator {
    pub fn zero(chart: &Chart, rows: usize, cols: usize) -> Self {
        AffDiffOperator { chart: chart.clone(), rows, cols, atoms: Vec::new() }
    }

    pub fn atom(chart: &Chart, coeff: MatrixPoly, deriv: Vec<u32>, pullback: AffineMap) -> Result<Self> {
        let n = chart.dim();
        if deriv.len() != n || pullback.dim() != n {
            return Err(Error::dim("atom data does not match the chart dimension"));
        }
        pullback.inverse()?;
        coeff.entries().iter().try_for_each(|p| chart.check_poly(p))?;
        let (rows, cols) = (coeff.rows(), coeff.cols());
        Ok(AffDiffOperator::from_atoms(chart, rows, cols, vec![Atom { coeff, deriv, pullback }]))
    }

    fn from_atoms(chart: &Chart, rows: usize, cols: usize, atoms: Vec<Atom>) -> Self {
        let mut op = AffDiffOperator { chart: chart.clone(), rows, cols, atoms };
        op.normalize();
        op
    }

    fn normalize(&mut self) {
        let mut atoms = std::mem::take(&mut self.atoms);
        atoms.sort_by(Atom::key_cmp);
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.key_cmp(&a) == Ordering::Equal => last.coeff = &last.coeff + &a.coeff,
                _ => merged.push(a),
            }
        }
        merged.retain(|a| !a.coeff.is_zero());
        self.atoms = merged;
    }

    /// Multiplication by a matrix of functions.
    pub fn multiplication(chart: &Chart, m: MatrixPoly) -> Result<Self> {
        AffDiffOperator::atom(chart, m, vec![0; chart.dim()], AffineMap::identity(chart.dim()))
    }

    pub fn identity(chart: &Chart, k: usize) -> Self {
        AffDiffOperator::multiplication(chart, MatrixPoly::identity(k, chart.dim())).expect("identity is well formed")
    }

    /// `psi -> psi o phi` componentwise.
    pub fn pullback(chart: &Chart, k: usize, phi: &AffineMap) -> Result<Self> {
        AffDiffOperator::atom(chart, MatrixPoly::identity(k, chart.dim()), vec![0; chart.dim()], phi.clone())
    }

    /// A vector field acting componentwise on `k`-tuples.
    pub fn vector_field(x: &VectorField, k: usize) -> Self {
        let chart = x.chart();
        let n = chart.dim();
        let atoms = x
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut deriv = vec![0; n];
                deriv[i] = 1;
                Atom { coeff: MatrixPoly::diagonal(k, c), deriv, pullback: AffineMap::identity(n) }
            })
            .collect();
        AffDiffOperator::from_atoms(chart, k, k, atoms)
    }

    pub fn from_derivative_op(d: &DerivativeOp) -> Self {
        let chart = d.bundle().base();
        let k = d.bundle().rank();
        let mult = AffDiffOperator::multiplication(chart, d.matrix().clone()).expect("same chart");
        AffDiffOperator::vector_field(d.anchor(), k).add(&mult)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.atoms.iter().map(Atom::order).max().unwrap_or(0)
    }

    pub fn add(&self, other: &AffDiffOperator) -> AffDiffOperator {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "operator shape mismatch");
        let atoms = self.atoms.iter().chain(&other.atoms).cloned().collect();
        AffDiffOperator::from_atoms(&self.chart, self.rows, self.cols, atoms)
    }

    pub fn neg(&self) -> AffDiffOperator {
        let atoms = self.atoms.iter().map(|a| Atom { coeff: -&a.coeff, ..a.clone() }).collect();
        AffDiffOperator { atoms, ..self.clone() }
    }

    pub fn sub(&self, other: &AffDiffOperator) -> AffDiffOperator {
        self.add(&other.neg())
    }

    /// `m o self` for a matrix of functions `m`.
    pub fn left_mul(&self, m: &MatrixPoly) -> AffDiffOperator {
        let atoms = self.atoms.iter().map(|a| Atom { coeff: m * &a.coeff, ..a.clone() }).collect();
        AffDiffOperator::from_atoms(&self.chart, m.rows(), self.cols, atoms)
    }

    pub fn scale(&self, f: &Poly) -> AffDiffOperator {
        self.left_mul(&MatrixPoly::diagonal(self.rows, f))
    }

    /// `self o other`, expanded with the Leibniz and chain rules.
    pub fn compose(&self, other: &AffDiffOperator) -> AffDiffOperator {
        assert_eq!(self.cols, other.rows, "operator composition shape mismatch");
        let n = self.chart.dim();
        let mut atoms = Vec::new();
        for a1 in &self.atoms {
            for a2 in &other.atoms {
                let lin = a2.pullback.linear();
                let phi = a2.pullback.compose(&a1.pullback);
                for j in sub_indices(&a1.deriv) {
                    let binom: i64 = a1.deriv.iter().zip(&j).map(|(&m, &k)| binomial(m, k)).product();
                    let dc = a2.coeff.map(|p| a1.pullback.pullback(&diff_multi(p, &j)));
                    if dc.is_zero() {
                        continue;
                    }
                    // d^(m1 - j) (h o phi2) = sum s_q (d^q h) o phi2
                    let mut chain: BTreeMap<Vec<u32>, Scalar> = BTreeMap::new();
                    chain.insert(vec![0; n], Scalar::from_int(binom));
                    for (i, (&m, &k)) in a1.deriv.iter().zip(&j).enumerate() {
                        for _ in 0..m - k {
                            let mut next = BTreeMap::new();
                            for (q, s) in &chain {
                                for (l, row) in lin.iter().enumerate() {
                                    if row[i].is_zero() {
                                        continue;
                                    }
                                    let mut q2 = q.clone();
                                    q2[l] += 1;
                                    let e = next.entry(q2).or_insert_with(Scalar::zero);
                                    *e = &*e + &(s * &row[i]);
                                }
                            }
                            chain = next;
                        }
                    }
                    let base = &a1.coeff * &dc;
                    for (q, s) in chain {
                        if s.is_zero() {
                            continue;
                        }
                        let deriv = a2.deriv.iter().zip(&q).map(|(a, b)| a + b).collect();
                        atoms.push(Atom { coeff: base.scale_scalar(&s), deriv, pullback: phi.clone() });
                    }
                }
            }
        }
        AffDiffOperator::from_atoms(&self.chart, self.rows, other.cols, atoms)
    }

    /// `self o other - other o self`.
    pub fn commutator(&self, other: &AffDiffOperator) -> AffDiffOperator {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn apply(&self, psi: &[Poly]) -> Vec<Poly> {
        assert_eq!(psi.len(), self.cols, "operator applied to a tuple of the wrong length");
        let mut out = vec![self.chart.zero(); self.rows];
        for a in &self.atoms {
            let moved: Vec<Poly> = psi.iter().map(|p| a.pullback.pullback(&diff_multi(p, &a.deriv))).collect();
            for (o, v) in out.iter_mut().zip(a.coeff.apply(&moved)) {
                *o = &*o + &v;
            }
        }
        out
    }

    pub fn apply_fn(&self, f: &Poly) -> Poly {
        assert_eq!((self.rows, self.cols), (1, 1), "not an operator on functions");
        self.apply(std::slice::from_ref(f)).pop().expect("one row")
    }

    pub fn apply_section(&self, psi: &Section) -> Result<Section> {
        if psi.components().len() != self.cols || self.rows != self.cols {
            return Err(Error::dim("operator and section ranks differ"));
        }
        Ok(Section::from_parts(psi.bundle(), self.apply(psi.components())))
    }

    /// The affine map `phi` when the operator is `psi -> psi o phi`.
    pub fn as_pullback(&self) -> Option<&AffineMap> {
        match self.atoms.as_slice() {
            [a] if a.order() == 0 && a.coeff.is_identity() => Some(&a.pullback),
            _ => None,
        }
    }

    /// `(g, phi)` when the operator is `psi -> g(x) psi(phi(x))`.
    pub fn as_gauge_pullback(&self) -> Option<(&MatrixPoly, &AffineMap)> {
        match self.atoms.as_slice() {
            [a] if a.order() == 0 => Some((&a.coeff, &a.pullback)),
            _ => None,
        }
    }

    /// A single order-zero atom with a unimodular coefficient is bijective
    /// with inverse in the same class.
    pub fn is_structurally_invertible(&self) -> bool {
        self.rows == self.cols && self.as_gauge_pullback().is_some_and(|(g, _)| g.inverse_if_unimodular().is_ok())
    }

    /// The inverse of a structurally invertible operator.
    pub fn inverse(&self) -> Result<AffDiffOperator> {
        let (g, phi) =
            self.as_gauge_pullback().ok_or(Error::NonInvertibleFiberData("operator has derivative terms".into()))?;
        let ginv = g.inverse_if_unimodular()?;
        let phinv = phi.inverse()?;
        // psi = g(x) chi(phi x)  =>  chi(y) = g^-1(phinv y) psi(phinv y)
        let coeff = ginv.map(|p| phinv.pullback(p));
        AffDiffOperator::atom(&self.chart, coeff, vec![0; self.chart.dim()], phinv)
    }

    pub fn text(&self) -> String {
        let names = self.chart.names();
        if self.atoms.is_empty() {
            return "0".into();
        }
        self.atoms
            .iter()
            .map(|a| {
                let coeff: Vec<String> = a.coeff.entries().iter().map(|p| p.to_text(names)).collect();
                let d: Vec<String> = a
                    .deriv
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("d{}", names[i]) } else { format!("d{}^{e}", names[i]) })
                    .collect();
                let pb = if a.pullback.is_identity() { String::new() } else { " o phi".into() };
                format!("[{}]*{}{}", coeff.join(", "), if d.is_empty() { "id".into() } else { d.join("*") }, pb)
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for AffDiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// An element `(f, psi)` of `A(E)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraElement {
    pub f: Poly,
    pub psi: Section,
}

impl AlgebraElement {
    pub fn new(f: Poly, psi: Section) -> Result<Self> {
        psi.bundle().base().check_poly(&f)?;
        Ok(AlgebraElement { f, psi })
    }

    pub fn function(bundle: &TrivialBundle, f: Poly) -> Self {
        AlgebraElement { f, psi: Section::zero(bundle) }
    }

    pub fn section(psi: Section) -> Self {
        AlgebraElement { f: psi.bundle().base().zero(), psi }
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.psi.is_zero()
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { f: &self.f - &other.f, psi: self.psi.sub(&other.psi) }
    }

    fn residual(&self) -> Vec<Poly> {
        std::iter::once(self.f.clone()).chain(self.psi.components().iter().cloned()).collect()
    }

    fn text(&self) -> String {
        let base = self.psi.bundle().base();
        format!("({}, [{}])", base.print(&self.f), self.psi.text().join(", "))
    }
}

/// `(f, psi)(g, phi) = (fg, f phi + g psi)`.
pub fn algebra_product(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.psi.bundle().check_same(b.psi.bundle())?;
    Ok(product(a, b))
}

fn product(a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
    AlgebraElement { f: &a.f * &b.f, psi: b.psi.scale(&a.f).add(&a.psi.scale(&b.f)) }
}

/// A block-diagonal endomorphism `(f, psi) -> (u_fn(f), u_sec(psi))` of
/// `A(E)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraOperator {
    pub on_functions: AffDiffOperator,
    pub on_sections: AffDiffOperator,
}

impl AlgebraOperator {
    pub fn new(on_functions: AffDiffOperator, on_sections: AffDiffOperator) -> Result<Self> {
        if (on_functions.rows, on_functions.cols) != (1, 1) || on_sections.rows != on_sections.cols {
            return Err(Error::dim("algebra operator blocks have the wrong shape"));
        }
        Ok(AlgebraOperator { on_functions, on_sections })
    }

    pub fn identity(bundle: &TrivialBundle) -> Self {
        let chart = bundle.base();
        AlgebraOperator {
            on_functions: AffDiffOperator::identity(chart, 1),
            on_sections: AffDiffOperator::identity(chart, bundle.rank()),
        }
    }

    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            f: self.on_functions.apply_fn(&a.f),
            psi: Section::from_parts(a.psi.bundle(), self.on_sections.apply(a.psi.components())),
        }
    }
}

/// Test elements: monomials `x^m` and monomial multiples `x^m e_b`.
fn monomials(chart: &Chart, bound: u32) -> Vec<Poly> {
    let mut v = Poly::monomials_up_to(chart.dim(), bound);
    v.sort_by_key(|p| p.degree());
    v
}

fn deg(p: &Poly) -> u32 {
    p.degree().unwrap_or(0)
}

/// Checks `U(ab) = U(a) b + alpha(a) U(b)` on pairs `(f, g)`, `(f, g e_b)`
/// and `(e_a, e_b)`. Pairs are taken with the function first: when `alpha`
/// vanishes on sections, the reversed order `(g e_b, f)` would force `U` to
/// be C(M)-linear on sections.
pub fn is_twisted_derivation(
    bundle: &TrivialBundle,
    u: &AlgebraOperator,
    alpha: &AlgebraOperator,
    bound: u32,
) -> Report {
    let mut report = Report::new("twisted derivation of A(E)");
    let chart = bundle.base();
    let mono = monomials(chart, bound);
    let k = bundle.rank();
    let mut pairs: Vec<(AlgebraElement, AlgebraElement)> = Vec::new();
    for f in &mono {
        for g in mono.iter().filter(|g| deg(f) + deg(g) <= bound) {
            pairs.push((AlgebraElement::function(bundle, f.clone()), AlgebraElement::function(bundle, g.clone())));
            for b in 0..k {
                let psi = Section::frame(bundle, b).scale(g);
                pairs.push((AlgebraElement::function(bundle, f.clone()), AlgebraElement::section(psi)));
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            pairs.push((
                AlgebraElement::section(Section::frame(bundle, a)),
                AlgebraElement::section(Section::frame(bundle, b)),
            ));
        }
    }
    let mut check = CheckResult::pass("twisted-leibniz");
    for (a, b) in &pairs {
        let lhs = u.apply(&product(a, b));
        let rhs1 = product(&u.apply(a), b);
        let rhs2 = product(&alpha.apply(a), &u.apply(b));
        let res = lhs.sub(&rhs1).sub(&rhs2);
        if !res.is_zero() {
            let w = Witness::new("U(ab) - U(a)b - alpha(a)U(b) as (function, section)", chart.names())
                .input("a", a.text())
                .input("b", b.text())
                .residual(res.residual());
            check = CheckResult::fail("twisted-leibniz", w);
            break;
        }
    }
    report.push(check);
    report
}

/// Checks `D(fg) = D(f) g + alpha(f) D(g)` on monomial pairs.
pub fn is_twisted_derivation_of_functions(d: &AffDiffOperator, alpha: &AffDiffOperator, bound: u32) -> Report {
    let chart = d.chart();
    let mut report = Report::new("twisted derivation of C(M)");
    let mono = monomials(chart, bound);
    let mut check = CheckResult::pass("twisted-leibniz");
    'outer: for f in &mono {
        for g in mono.iter().filter(|g| deg(f) + deg(g) <= bound) {
            let res = d.apply_fn(&(f * g)) - d.apply_fn(f) * g - alpha.apply_fn(f) * d.apply_fn(g);
            if !res.is_zero() {
                let w = Witness::new("D(fg) - D(f)g - alpha(f)D(g)", chart.names())
                    .poly_input("f", f)
                    .poly_input("g", g)
                    .residual([res]);
                check = CheckResult::fail("twisted-leibniz", w);
                break 'outer;
            }
        }
    }
    report.push(check);
    report
}

/// Checks that `a` is multiplicative on monomial pairs and fixes 1.
pub fn is_algebra_morphism_of_functions(a: &AffDiffOperator, bound: u32) -> Report {
    let chart = a.chart();
    let mut report = Report::new("algebra morphism of C(M)");
    let mono = monomials(chart, bound);
    let mut check = CheckResult::pass("multiplicative");
    let unit = a.apply_fn(&chart.one()) - chart.one();
    if !unit.is_zero() {
        let w = Witness::new("a(1) - 1", chart.names()).residual([unit]);
        check = CheckResult::fail("multiplicative", w);
    } else {
        'outer: for f in &mono {
            for g in mono.iter().filter(|g| deg(f) + deg(g) <= bound) {
                let res = a.apply_fn(&(f * g)) - a.apply_fn(f) * a.apply_fn(g);
                if !res.is_zero() {
                    let w = Witness::new("a(fg) - a(f)a(g)", chart.names())
                        .poly_input("f", f)
                        .poly_input("g", g)
                        .residual([res]);
                    check = CheckResult::fail("multiplicative", w);
                    break 'outer;
                }
            }
        }
    }
    report.push(check);
    report
}

/// Checks that `a` is multiplicative on `A(E)` for pairs `(f, g)`,
/// `(f, g e_b)` and `(e_a, e_b)`.
pub fn is_algebra_morphism(bundle: &TrivialBundle, a: &AlgebraOperator, bound: u32) -> Report {
    let chart = bundle.base();
    let mut report = Report::new("algebra morphism of A(E)");
    let mono = monomials(chart, bound);
    let k = bundle.rank();
    let unit = AlgebraElement::function(bundle, chart.one());
    let mut pairs = vec![(unit.clone(), unit)];
    for f in &mono {
        for g in mono.iter().filter(|g| deg(f) + deg(g) <= bound) {
            pairs.push((AlgebraElement::function(bundle, f.clone()), AlgebraElement::function(bundle, g.clone())));
            for b in 0..k {
                let psi = Section::frame(bundle, b).scale(g);
                pairs.push((AlgebraElement::function(bundle, f.clone()), AlgebraElement::section(psi)));
            }
        }
    }
    let mut check = CheckResult::pass("multiplicative");
    for (x, y) in &pairs {
        let res = a.apply(&product(x, y)).sub(&product(&a.apply(x), &a.apply(y)));
        if !res.is_zero() {
            let w = Witness::new("a(xy) - a(x)a(y) as (function, section)", chart.names())
                .input("x", x.text())
                .input("y", y.text())
                .residual(res.residual());
            check = CheckResult::fail("multiplicative", w);
            break;
        }
    }
    report.push(check);
    report
}

/// Which special classes a pseudo-linear operator belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Classification {
    pub pseudo_linear: bool,
    /// `u^M` is the identity.
    pub derivative: bool,
    /// `u_M = 0` and `u` is bijective.
    pub semilinear: bool,
}

/// Checks `u(f psi) = u^M(f) u(psi) + u_M(f) psi` for monomials `f` and
/// monomial multiples of frame sections, and classifies `u`.
pub fn is_pseudo_linear(
    bundle: &TrivialBundle,
    u: &AffDiffOperator,
    u_up: &AffDiffOperator,
    u_down: &AffDiffOperator,
    bound: u32,
) -> (Report, Classification) {
    let chart = bundle.base();
    let mut report = Report::new("pseudo-linear endomorphism");
    let mono = monomials(chart, bound);
    let mut check = CheckResult::pass("pseudo-linearity");
    'outer: for f in &mono {
        let uf = u_up.apply_fn(f);
        let df = u_down.apply_fn(f);
        for g in mono.iter().filter(|g| deg(f) + deg(g) <= bound) {
            for b in 0..bundle.rank() {
                let psi = Section::frame(bundle, b).scale(g);
                let lhs = u.apply(psi.scale(f).components());
                let upsi = u.apply(psi.components());
                let res: Vec<Poly> =
                    lhs.iter().zip(&upsi).zip(psi.components()).map(|((l, v), p)| l - &(&uf * v) - &df * p).collect();
                if res.iter().any(|p| !p.is_zero()) {
                    let w = Witness::new("u(f psi) - u^M(f)u(psi) - u_M(f)psi", chart.names())
                        .poly_input("f", f)
                        .input("psi", format!("[{}]", psi.text().join(", ")))
                        .residual(res);
                    check = CheckResult::fail("pseudo-linearity", w);
                    break 'outer;
                }
            }
        }
    }
    let pseudo_linear = check.passed();
    report.push(check);
    let up_is_identity = mono.iter().all(|f| u_up.apply_fn(f) == *f);
    let down_is_zero = mono.iter().all(|f| u_down.apply_fn(f).is_zero());
    let class = Classification {
        pseudo_linear,
        derivative: pseudo_linear && up_is_identity,
        semilinear: pseudo_linear && down_is_zero && u.is_structurally_invertible(),
    };
    if pseudo_linear {
        let mut kinds = Vec::new();
        if class.derivative {
            kinds.push("derivative endomorphism");
        }
        if class.semilinear {
            kinds.push("semi-linear isomorphism");
        }
        if kinds.is_empty() {
            kinds.push("general");
        }
        report.checks[0].detail = Some(format!("classified: {}", kinds.join(", ")));
    }
    (report, class)
}

/// Outcome of evaluating both sides of one equivalence.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    pub name: &'static str,
    pub left: bool,
    pub right: bool,
    pub left_witness: Option<Witness>,
    pub right_witness: Option<Witness>,
}

impl Equivalence {
    pub fn agrees(&self) -> bool {
        self.left == self.right
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropAReport {
    /// `u_M + u` twisted derivation w.r.t. `u^M` iff conditions (i), (ii).
    pub twisted: Equivalence,
    /// Present when `u^M` is the identity: derivation iff derivative
    /// endomorphism.
    pub derivation: Option<Equivalence>,
    /// Present when `u^M` and `u` are bijective: automorphism iff
    /// semi-linear.
    pub automorphism: Option<Equivalence>,
    pub report: Report,
}

impl PropAReport {
    pub fn all_agree(&self) -> bool {
        self.twisted.agrees()
            && self.derivation.as_ref().is_none_or(Equivalence::agrees)
            && self.automorphism.as_ref().is_none_or(Equivalence::agrees)
    }
}

fn combine(reports: &[&Report]) -> (bool, Option<Witness>) {
    let ok = reports.iter().all(|r| r.passed());
    (ok, reports.iter().find_map(|r| r.first_witness().cloned()))
}

fn equivalence(name: &'static str, left: &[&Report], right: &[&Report]) -> Equivalence {
    let (l, lw) = combine(left);
    let (r, rw) = combine(right);
    Equivalence { name, left: l, right: r, left_witness: lw, right_witness: rw }
}

/// Evaluates both sides of the three characterizations for the triple
/// `(u^M, u_M, u)` and reports whether each pair of sides agrees.
pub fn check_prop_a(
    bundle: &TrivialBundle,
    u_up: &AffDiffOperator,
    u_down: &AffDiffOperator,
    u: &AffDiffOperator,
    bound: u32,
) -> Result<PropAReport> {
    let chart = bundle.base();
    let k = bundle.rank();
    let zero_sec = AffDiffOperator::zero(chart, k, k);
    let zero_fn = AffDiffOperator::zero(chart, 1, 1);
    let big_u = AlgebraOperator::new(u_down.clone(), u.clone())?;
    let alpha = AlgebraOperator::new(u_up.clone(), zero_sec.clone())?;

    let (pl, _) = is_pseudo_linear(bundle, u, u_up, u_down, bound);
    let left = is_twisted_derivation(bundle, &big_u, &alpha, bound);
    let cond_i = is_twisted_derivation_of_functions(u_down, u_up, bound);
    let twisted = equivalence("twisted derivation", &[&left], &[&cond_i, &pl]);

    let mono = monomials(chart, bound);
    let derivation = if mono.iter().all(|f| u_up.apply_fn(f) == *f) {
        let left = is_twisted_derivation(bundle, &big_u, &AlgebraOperator::identity(bundle), bound);
        let id = AffDiffOperator::identity(chart, 1);
        let cond_i = is_twisted_derivation_of_functions(u_down, &id, bound);
        Some(equivalence("derivation", &[&left], &[&cond_i, &pl]))
    } else {
        None
    };

    let automorphism = if u_up.is_structurally_invertible() && u.is_structurally_invertible() {
        let a = AlgebraOperator::new(u_up.clone(), u.clone())?;
        let left = is_algebra_morphism(bundle, &a, bound);
        let cond_i = is_algebra_morphism_of_functions(u_up, bound);
        let (semi, _) = is_pseudo_linear(bundle, u, u_up, &zero_fn, bound);
        Some(equivalence("automorphism", &[&left], &[&cond_i, &semi]))
    } else {
        None
    };

    let mut report = Report::new("pseudo-linear characterizations");
    for eq in std::iter::once(&twisted).chain(derivation.as_ref()).chain(automorphism.as_ref()) {
        let verdict = match (eq.left, eq.right) {
            (true, true) => "both sides hold",
            (false, false) => "both sides fail",
            _ => "sides disagree",
        };
        let check = if eq.agrees() {
            CheckResult::pass(eq.name).with_detail(verdict)
        } else {
            let w = eq.left_witness.clone().or_else(|| eq.right_witness.clone());
            match w {
                Some(w) => CheckResult::fail(eq.name, w).with_detail(verdict),
                None => CheckResult::error(eq.name, verdict),
            }
        };
        report.push(check);
    }
    Ok(PropAReport { twisted, derivation, automorphism, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Field;

    fn line(n: usize) -> TrivialBundle {
        TrivialBundle::new(&Chart::standard("x", n, Field::Rational), 1).unwrap()
    }

    fn scaling(n: usize, c: i64) -> AffineMap {
        let mut m = crate::ring::linalg::identity(n);
        m[0][0] = Scalar::from_int(c);
        AffineMap::linear_map(m).unwrap()
    }

    #[test]
    fn composition_matches_sequential_application() {
        let e = line(2);
        let c = e.base().clone();
        let d = AffDiffOperator::vector_field(&VectorField::parse(&c, &["x2", "x1^2"]).unwrap(), 1);
        let phi = AffineMap::new(
            vec![vec![Scalar::from_int(1), Scalar::from_int(2)], vec![Scalar::zero(), Scalar::from_int(-1)]],
            vec![Scalar::from_int(3), Scalar::ratio(1, 2)],
        )
        .unwrap();
        let mu = AffDiffOperator::pullback(&c, 1, &phi).unwrap().scale(&c.parse("1 + x1").unwrap());
        let dd = d.compose(&d);
        for (a, b) in [(&d, &mu), (&mu, &d), (&dd, &mu)] {
            let comp = a.compose(b);
            for p in monomials(&c, 4) {
                assert_eq!(comp.apply_fn(&p), a.apply_fn(&b.apply_fn(&p)));
            }
        }
    }

    #[test]
    fn algebra_product_examples() {
        let e = TrivialBundle::new(&Chart::standard("x", 2, Field::Rational), 1).unwrap();
        let c = e.base();
        let psi = Section::parse(&e, &["x1 + 1"]).unwrap();
        let phi = Section::parse(&e, &["x2^2"]).unwrap();
        let a = AlgebraElement::new(c.parse("x1").unwrap(), psi.clone()).unwrap();
        let b = AlgebraElement::new(c.parse("x2").unwrap(), phi.clone()).unwrap();
        let one = AlgebraElement::function(&e, c.one());
        assert_eq!(algebra_product(&one, &a).unwrap(), a);
        let zero =
            algebra_product(&AlgebraElement::section(psi.clone()), &AlgebraElement::section(phi.clone())).unwrap();
        assert!(zero.is_zero());
        let ab = algebra_product(&a, &b).unwrap();
        assert_eq!(ab.f, c.parse("x1*x2").unwrap());
        assert_eq!(ab.psi, phi.scale(&a.f).add(&psi.scale(&b.f)));
        assert_eq!(ab, algebra_product(&b, &a).unwrap());
    }

    #[test]
    fn twisted_derivation_examples() {
        let e = line(1);
        let c = e.base().clone();
        let x = VectorField::coordinate(&c, 0);
        let d = DerivativeOp::flat(&e, x.clone()).unwrap();
        let u = AlgebraOperator::new(AffDiffOperator::vector_field(&x, 1), AffDiffOperator::from_derivative_op(&d))
            .unwrap();
        assert!(is_twisted_derivation(&e, &u, &AlgebraOperator::identity(&e), 6).passed());
        // U(f) = f(x) - f(-x) is a twisted derivation for alpha(f) = f(-x)
        let refl = AffDiffOperator::pullback(&c, 1, &scaling(1, -1)).unwrap();
        let diff = AffDiffOperator::identity(&c, 1).sub(&refl);
        assert!(is_twisted_derivation_of_functions(&diff, &refl, 6).passed());
        let mult = AffDiffOperator::multiplication(&c, MatrixPoly::diagonal(1, &c.var(0))).unwrap();
        let report = is_twisted_derivation_of_functions(&mult, &AffDiffOperator::identity(&c, 1), 6);
        let w = report.first_witness().unwrap();
        assert_eq!(w.inputs, vec![("f".into(), "1".into()), ("g".into(), "1".into())]);
        assert_eq!(w.residual_text(), vec!["-1*x1"]);
    }

    #[test]
    fn pseudo_linear_examples() {
        let e = TrivialBundle::new(&Chart::standard("x", 2, Field::Rational), 2).unwrap();
        let c = e.base().clone();
        let x = VectorField::parse(&c, &["x2", "1"]).unwrap();
        let d = DerivativeOp::new(&e, x.clone(), MatrixPoly::unit(2, 2, 0, 1).scale(&c.var(0))).unwrap();
        let u = AffDiffOperator::from_derivative_op(&d);
        let id = AffDiffOperator::identity(&c, 1);
        let (r, class) = is_pseudo_linear(&e, &u, &id, &AffDiffOperator::vector_field(&x, 1), 4);
        assert!(r.passed() && class.derivative && !class.semilinear);

        let phi = AffineMap::translation(vec![Scalar::from_int(1), Scalar::from_int(-2)]);
        let g = MatrixPoly::from_rows(vec![vec![c.one(), c.var(1)], vec![c.zero(), c.one()]], 2).unwrap();
        let mu = AffDiffOperator::pullback(&c, 2, &phi).unwrap().left_mul(&g);
        let mu_up = AffDiffOperator::pullback(&c, 1, &phi).unwrap();
        let (r, class) = is_pseudo_linear(&e, &mu, &mu_up, &AffDiffOperator::zero(&c, 1, 1), 4);
        assert!(r.passed() && class.semilinear && !class.derivative);

        let comp = mu.compose(&u);
        let down = mu_up.compose(&AffDiffOperator::vector_field(&x, 1));
        let (r, class) = is_pseudo_linear(&e, &comp, &mu_up, &down, 4);
        assert!(!r.passed() && !class.pseudo_linear);
        assert!(r.first_witness().unwrap().is_nonzero());
    }

    #[test]
    fn non_closure_under_commutators() {
        let e = line(1);
        let c = e.base().clone();
        let d = AffDiffOperator::vector_field(&VectorField::coordinate(&c, 0), 1);
        let mu = AffDiffOperator::pullback(&c, 1, &scaling(1, 2)).unwrap();
        let comm = d.commutator(&mu);
        // forced candidates: comm(1) = 0, comm(x) = 1
        let down = comm.clone();
        let x = AffDiffOperator::multiplication(&c, MatrixPoly::diagonal(1, &c.var(0))).unwrap();
        let up = comm.compose(&x).sub(&x.compose(&comm));
        let (r, _) = is_pseudo_linear(&e, &comm, &up, &down, 4);
        assert!(!r.passed());
        assert_eq!(r.first_witness().unwrap().residual_text(), vec!["-1*x1^2"]);
    }

    #[test]
    fn inverse_and_structure() {
        let c = Chart::standard("x", 2, Field::Rational);
        let phi = AffineMap::new(
            vec![vec![Scalar::from_int(2), Scalar::from_int(1)], vec![Scalar::from_int(1), Scalar::from_int(1)]],
            vec![Scalar::from_int(1), Scalar::zero()],
        )
        .unwrap();
        let g = MatrixPoly::from_rows(vec![vec![c.one(), c.var(0)], vec![c.zero(), c.one()]], 2).unwrap();
        let mu = AffDiffOperator::pullback(&c, 2, &phi).unwrap().left_mul(&g);
        assert!(mu.is_structurally_invertible());
        let inv = mu.inverse().unwrap();
        assert_eq!(mu.compose(&inv), AffDiffOperator::identity(&c, 2));
        assert_eq!(inv.compose(&mu), AffDiffOperator::identity(&c, 2));
        assert_eq!(AffDiffOperator::pullback(&c, 1, &phi).unwrap().as_pullback(), Some(&phi));
    }

    #[test]
    fn prop_a_instances() {
        let e = line(2);
        let c = e.base().clone();
        let x = VectorField::parse(&c, &["x2", "x1"]).unwrap();
        let d = DerivativeOp::new(&e, x.clone(), MatrixPoly::diagonal(1, &c.var(1))).unwrap();
        let id = AffDiffOperator::identity(&c, 1);
        let r =
            check_prop_a(&e, &id, &AffDiffOperator::vector_field(&x, 1), &AffDiffOperator::from_derivative_op(&d), 4)
                .unwrap();
        assert!(r.all_agree() && r.twisted.left && r.derivation.as_ref().unwrap().left);

        let phi = AffineMap::translation(vec![Scalar::from_int(1), Scalar::zero()]);
        let up = AffDiffOperator::pullback(&c, 1, &phi).unwrap();
        let mu = up.scale(&c.constant(Scalar::from_int(3)));
        let r = check_prop_a(&e, &up, &AffDiffOperator::zero(&c, 1, 1), &mu, 4).unwrap();
        assert!(r.all_agree() && r.automorphism.as_ref().unwrap().left);

        let bad = mu.compose(&AffDiffOperator::from_derivative_op(&d));
        let down = up.compose(&AffDiffOperator::vector_field(&x, 1));
        let r = check_prop_a(&e, &up, &down, &bad, 4).unwrap();
        assert!(r.all_agree() && !r.twisted.left && !r.twisted.right);
        assert!(r.twisted.left_witness.as_ref().unwrap().is_nonzero());
        assert!(r.twisted.right_witness.as_ref().unwrap().is_nonzero());
    }
}
