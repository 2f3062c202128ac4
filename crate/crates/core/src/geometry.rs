//! Charts, polynomial vector fields, fibered products and affine maps.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::linalg::{self, ScalarMatrix};
use crate::ring::{parse_poly, Field, Poly, Scalar};

/// A global coordinate chart `R^n` with named coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Chart {
    names: Arc<[String]>,
    field: Field,
}

impl Chart {
    pub fn new(names: Vec<String>, field: Field) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            let valid = !n.is_empty()
                && n != "i"
                && n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::chart(format!("invalid coordinate name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::chart(format!("duplicate coordinate name `{n}`")));
            }
        }
        Ok(Chart { names: names.into(), field })
    }

    /// Coordinates `{prefix}1 .. {prefix}n`.
    pub fn standard(prefix: &str, n: usize, field: Field) -> Self {
        Chart::new((1..=n).map(|i| format!("{prefix}{i}")).collect(), field).unwrap()
    }

    /// The zero-dimensional chart of a point.
    pub fn point(field: Field) -> Self {
        Chart::new(Vec::new(), field).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn with_field(&self, field: Field) -> Chart {
        Chart { names: self.names.clone(), field }
    }

    pub fn var(&self, i: usize) -> Poly {
        Poly::var(self.dim(), i)
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.dim())
    }

    pub fn one(&self) -> Poly {
        Poly::one(self.dim())
    }

    pub fn constant(&self, c: Scalar) -> Poly {
        Poly::constant(self.dim(), c)
    }

    pub fn parse(&self, text: &str) -> Result<Poly> {
        parse_poly(text, &self.names, self.field)
    }

    pub fn print(&self, p: &Poly) -> String {
        p.to_text(&self.names)
    }

    /// Checks that `p` lives on this chart and uses only admissible scalars.
    pub fn check_poly(&self, p: &Poly) -> Result<()> {
        if p.nvars() != self.dim() {
            return Err(Error::chart(format!(
                "polynomial in {} variables on a chart of dimension {}",
                p.nvars(),
                self.dim()
            )));
        }
        if self.field == Field::Rational && p.field() == Field::Gaussian {
            return Err(Error::FieldMismatch("gaussian coefficient over the rational field".into()));
        }
        Ok(())
    }

    /// Product chart with this chart's coordinates first.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let names: Vec<String> = self.names.iter().chain(other.names.iter()).cloned().collect();
        Chart::new(names, self.field.join(other.field))
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R^{}({}; {})", self.dim(), self.names.join(", "), self.field)
    }
}

/// A polynomial vector field `sum_i X^i d/dx_i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VectorField {
    chart: Chart,
    components: Vec<Poly>,
}

impl VectorField {
    pub fn new(chart: &Chart, components: Vec<Poly>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::dim(format!(
                "{} components for a chart of dimension {}",
                components.len(),
                chart.dim()
            )));
        }
        for c in &components {
            chart.check_poly(c)?;
        }
        Ok(VectorField { chart: chart.clone(), components })
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField { chart: chart.clone(), components: vec![chart.zero(); chart.dim()] }
    }

    /// The coordinate field `d/dx_i`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.components[i] = chart.one();
        v
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<Self> {
        let components = comps.iter().map(|s| chart.parse(s)).collect::<Result<_>>()?;
        VectorField::new(chart, components)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, f: &Poly) -> VectorField {
        VectorField { chart: self.chart.clone(), components: self.components.iter().map(|c| c * f).collect() }
    }

    pub fn scale_scalar(&self, c: &Scalar) -> VectorField {
        VectorField { chart: self.chart.clone(), components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    /// `X(f) = sum_i X^i df/dx_i`. Panics on a chart mismatch; see
    /// [`apply_vf`] for the checked form.
    pub fn apply(&self, f: &Poly) -> Poly {
        assert_eq!(f.nvars(), self.chart.dim(), "vector field applied across charts");
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(self.chart.zero(), |acc, (i, c)| acc + c * &f.partial(i))
    }

    pub fn text(&self) -> Vec<String> {
        self.components.iter().map(|c| self.chart.print(c)).collect()
    }

    /// Re-expresses a base field on a larger chart whose first coordinates
    /// are this chart's; the new components are zero.
    pub fn lift_to(&self, total: &Chart) -> VectorField {
        let n = self.chart.dim();
        let extra = total.dim() - n;
        let mut components: Vec<Poly> = self.components.iter().map(|c| c.extend(extra)).collect();
        components.extend((0..extra).map(|_| total.zero()));
        VectorField { chart: total.clone(), components }
    }

    fn same_chart(&self, other: &VectorField) -> Result<()> {
        if self.chart.dim() != other.chart.dim() {
            return Err(Error::chart(format!("{} vs {}", self.chart, other.chart)));
        }
        Ok(())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.text().join(", "))
    }
}

impl<'a> Add<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().zip(&rhs.components).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().zip(&rhs.components).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        VectorField { chart: self.chart.clone(), components: self.components.iter().map(|c| -c).collect() }
    }
}

/// `X(f)`, checking that `f` lives on the field's chart.
pub fn apply_vf(x: &VectorField, f: &Poly) -> Result<Poly> {
    x.chart.check_poly(f)?;
    Ok(x.apply(f))
}

/// `[X, Y]^j = X(Y^j) - Y(X^j)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    x.same_chart(y)?;
    Ok(bracket(x, y))
}

pub(crate) fn bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField {
        chart: x.chart.clone(),
        components: x.components.iter().zip(&y.components).map(|(xj, yj)| x.apply(yj) - y.apply(xj)).collect(),
    }
}

/// A globally trivial fibered manifold `F = M x N` with projection onto
/// the base coordinates, which come first in the total chart.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FiberedChart {
    base: Chart,
    fiber: Chart,
    total: Chart,
}

impl FiberedChart {
    pub fn new(base: &Chart, fiber: &Chart) -> Result<Self> {
        if let Some(n) = base.names().iter().find(|n| fiber.names().contains(n)) {
            return Err(Error::chart(format!("base and fiber share coordinate `{n}`")));
        }
        let total = base.product(fiber)?;
        let fiber = fiber.with_field(total.field());
        Ok(FiberedChart { base: base.with_field(total.field()), fiber, total })
    }

    /// The identity fibration `M -> M`.
    pub fn identity(base: &Chart) -> Self {
        FiberedChart::new(base, &Chart::point(base.field())).unwrap()
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn fiber(&self) -> &Chart {
        &self.fiber
    }

    pub fn total(&self) -> &Chart {
        &self.total
    }

    /// `f o phi` for a base function `f`.
    pub fn pullback(&self, f: &Poly) -> Poly {
        f.extend(self.fiber.dim())
    }

    pub fn is_basic(&self, f: &Poly) -> bool {
        let n = self.base.dim();
        f.depends_only_on(|i| i < n)
    }
}

/// True when the base components of `x` depend only on base coordinates and
/// coincide with `x_base`.
pub fn is_projectable(fibered: &FiberedChart, x: &VectorField, x_base: &VectorField) -> Result<bool> {
    if x.chart.dim() != fibered.total.dim() || x_base.chart.dim() != fibered.base.dim() {
        return Err(Error::chart("projectability check across charts"));
    }
    let n = fibered.base.dim();
    Ok((0..n).all(|i| {
        let c = &x.components[i];
        fibered.is_basic(c) && *c == fibered.pullback(&x_base.components[i])
    }))
}

/// An affine map `x -> A x + b` of `R^n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineMap {
    linear: ScalarMatrix,
    shift: Vec<Scalar>,
}

impl AffineMap {
    pub fn new(linear: ScalarMatrix, shift: Vec<Scalar>) -> Result<Self> {
        let n = shift.len();
        if linear.len() != n || linear.iter().any(|r| r.len() != n) {
            return Err(Error::dim(format!("affine map needs an {n}x{n} matrix")));
        }
        Ok(AffineMap { linear, shift })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap { linear: linalg::identity(n), shift: vec![Scalar::zero(); n] }
    }

    pub fn translation(shift: Vec<Scalar>) -> Self {
        AffineMap { linear: linalg::identity(shift.len()), shift }
    }

    pub fn linear_map(linear: ScalarMatrix) -> Result<Self> {
        let n = linear.len();
        AffineMap::new(linear, vec![Scalar::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn linear(&self) -> &ScalarMatrix {
        &self.linear
    }

    pub fn shift(&self) -> &[Scalar] {
        &self.shift
    }

    pub fn is_identity(&self) -> bool {
        self.linear == linalg::identity(self.dim()) && self.shift.iter().all(Scalar::is_zero)
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = linalg::invert(&self.linear).ok_or(Error::SingularMap)?;
        let shift = linalg::mat_vec(&inv, &self.shift).into_iter().map(|s| -s).collect();
        Ok(AffineMap { linear: inv, shift })
    }

    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        assert_eq!(self.dim(), other.dim());
        let linear = linalg::mat_mul(&self.linear, &other.linear);
        let shift =
            linalg::mat_vec(&self.linear, &other.shift).into_iter().zip(&self.shift).map(|(a, b)| a + b).collect();
        AffineMap { linear, shift }
    }

    pub fn apply_point(&self, x: &[Scalar]) -> Vec<Scalar> {
        linalg::mat_vec(&self.linear, x).into_iter().zip(&self.shift).map(|(a, b)| a + b).collect()
    }

    /// Coordinate images `(A x + b)_i` as polynomials in `nvars >= dim`
    /// variables whose first `dim` are the map's coordinates.
    pub fn images(&self, nvars: usize) -> Vec<Poly> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n).fold(Poly::constant(nvars, self.shift[i].clone()), |acc, j| {
                    acc + Poly::var(nvars, j).scale(&self.linear[i][j])
                })
            })
            .collect()
    }

    /// `f o phi`, where `f` may depend on trailing variables that the map
    /// leaves fixed.
    pub fn pullback(&self, f: &Poly) -> Poly {
        let nvars = f.nvars();
        assert!(nvars >= self.dim());
        let mut args = self.images(nvars);
        args.extend((self.dim()..nvars).map(|i| Poly::var(nvars, i)));
        f.substitute(&args)
    }
}

/// `f o phi` for an affine `phi`, checking dimensions.
pub fn compose_affine(f: &Poly, phi: &AffineMap) -> Result<Poly> {
    if f.nvars() != phi.dim() {
        return Err(Error::dim(format!(
            "polynomial in {} variables composed with a map of R^{}",
            f.nvars(),
            phi.dim()
        )));
    }
    Ok(phi.pullback(f))
}

/// `f o phi^{-1}`.
pub fn compose_affine_inverse(f: &Poly, phi: &AffineMap) -> Result<Poly> {
    compose_affine(f, &phi.inverse()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Chart {
        Chart::standard("x", 2, Field::Rational)
    }

    #[test]
    fn vector_field_application() {
        let c = r2();
        let d1 = VectorField::coordinate(&c, 0);
        assert_eq!(apply_vf(&d1, &c.parse("x1^2").unwrap()).unwrap(), c.parse("2*x1").unwrap());
        let x = VectorField::parse(&c, &["x2", "0"]).unwrap();
        assert!(apply_vf(&x, &c.one()).unwrap().is_zero());
        assert_eq!(apply_vf(&x, &c.parse("x1*x2").unwrap()).unwrap(), c.parse("x2^2").unwrap());
        let other = Chart::standard("x", 3, Field::Rational);
        assert!(apply_vf(&x, &other.one()).is_err());
    }

    #[test]
    fn bracket_examples() {
        let c = r2();
        let d1 = VectorField::coordinate(&c, 0);
        let e = VectorField::parse(&c, &["x1", "0"]).unwrap();
        assert_eq!(lie_bracket(&d1, &e).unwrap(), d1);
        assert!(lie_bracket(&e, &e).unwrap().is_zero());
        let a = VectorField::parse(&c, &["x2", "0"]).unwrap();
        let b = VectorField::parse(&c, &["0", "x1"]).unwrap();
        assert_eq!(lie_bracket(&a, &b).unwrap(), VectorField::parse(&c, &["-x1", "x2"]).unwrap());
    }

    #[test]
    fn projectability_examples() {
        let base = Chart::standard("x", 1, Field::Rational);
        let fiber = Chart::standard("y", 1, Field::Rational);
        let f = FiberedChart::new(&base, &fiber).unwrap();
        let t = f.total();
        let d = VectorField::coordinate(&base, 0);
        let x = VectorField::parse(t, &["1", "y1"]).unwrap();
        assert!(is_projectable(&f, &x, &d).unwrap());
        let x = VectorField::parse(t, &["y1", "0"]).unwrap();
        assert!(!is_projectable(&f, &x, &VectorField::zero(&base)).unwrap());
        let x = VectorField::parse(t, &["x1", "1"]).unwrap();
        let xb = VectorField::parse(&base, &["x1"]).unwrap();
        assert!(is_projectable(&f, &x, &xb).unwrap());
    }

    #[test]
    fn fibered_chart_rejects_shared_names() {
        let base = Chart::standard("x", 2, Field::Rational);
        assert!(FiberedChart::new(&base, &base).is_err());
    }

    #[test]
    fn affine_composition_examples() {
        let c = r2();
        let x1 = c.var(0);
        let tr = AffineMap::translation(vec![Scalar::from_int(3), Scalar::from_int(-1)]);
        assert_eq!(compose_affine(&x1, &tr).unwrap(), c.parse("x1 + 3").unwrap());
        let f = c.parse("x1^2*x2 - 7").unwrap();
        assert_eq!(compose_affine(&f, &AffineMap::identity(2)).unwrap(), f);
        let swap =
            AffineMap::linear_map(vec![vec![Scalar::zero(), Scalar::one()], vec![Scalar::one(), Scalar::zero()]])
                .unwrap();
        let g = c.parse("x1*x2").unwrap();
        assert_eq!(compose_affine(&g, &swap).unwrap(), g);
        let singular = AffineMap::linear_map(vec![vec![Scalar::zero(); 2]; 2]).unwrap();
        assert!(matches!(compose_affine_inverse(&g, &singular), Err(Error::SingularMap)));
    }

    #[test]
    fn affine_inverse_and_composition() {
        let a = AffineMap::new(
            vec![vec![Scalar::from_int(2), Scalar::one()], vec![Scalar::zero(), Scalar::one()]],
            vec![Scalar::from_int(1), Scalar::ratio(1, 2)],
        )
        .unwrap();
        let inv = a.inverse().unwrap();
        assert!(a.compose(&inv).is_identity());
        assert!(inv.compose(&a).is_identity());
        let p = vec![Scalar::from_int(4), Scalar::from_int(-3)];
        assert_eq!(inv.apply_point(&a.apply_point(&p)), p);
    }
}
