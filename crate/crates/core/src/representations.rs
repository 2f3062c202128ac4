//! Derivative representations of Lie algebras and algebroids, their
//! counterparts as representations of action algebroids, and
//! prequantization of a symplectic chart.

use crate::actions::{action_algebroid_algebra, action_algebroid_fibered, AlgebroidAction, LieAlgebraAction};
use crate::algebroid::{AConnection, LieAlgebroid, Provenance};
use crate::bundle::{Connection, DerivativeOp, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::{Chart, VectorField};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::linalg::{self, ScalarMatrix};
use crate::ring::{Field, MatrixPoly, Poly, Scalar};

fn check_ops(bundle: &TrivialBundle, ops: &[DerivativeOp], expected: usize) -> Result<()> {
    if ops.len() != expected {
        return Err(Error::dim(format!("{} operators for {expected} generators", ops.len())));
    }
    ops.iter().try_for_each(|d| bundle.check_same(d.bundle()))
}

/// Shared check: anchors match the given fields and the operators close
/// under commutators with the given structure functions.
fn morphism_report(
    subject: &str,
    ops: &[DerivativeOp],
    fields: &[VectorField],
    structure: impl Fn(usize, usize, usize) -> Poly,
    names: &[String],
) -> Report {
    let mut report = Report::new(subject);
    let mut anchor = CheckResult::pass("anchor");
    for (a, (d, x)) in ops.iter().zip(fields).enumerate() {
        let res = d.anchor() - x;
        if !res.is_zero() {
            let w = Witness::new(format!("anchor(rho{0}) - X{0}", a + 1), names).residual(res.components().to_vec());
            anchor = CheckResult::fail("anchor", w);
            break;
        }
    }
    report.push(anchor);
    let mut brackets = CheckResult::pass("bracket");
    let r = ops.len();
    'outer: for a in 0..r {
        for b in a + 1..r {
            let lhs = ops[a].commutator_unchecked(&ops[b]);
            let rhs = (0..r).fold(DerivativeOp::zero(ops[a].bundle()), |acc, g| {
                let c = structure(a, b, g);
                if c.is_zero() {
                    acc
                } else {
                    acc.add(&ops[g].scale(&c))
                }
            });
            let res = lhs.sub(&rhs);
            if !res.is_zero() {
                let mut residual = res.anchor().components().to_vec();
                residual.extend(res.matrix().entries().iter().cloned());
                let w = Witness::new(
                    format!("[rho{0},rho{1}] - sum c(g,{0},{1}) rho_g (anchor, matrix)", a + 1, b + 1),
                    names,
                )
                .input("a", (a + 1).to_string())
                .input("b", (b + 1).to_string())
                .residual(residual);
                brackets = CheckResult::fail("bracket", w);
                break 'outer;
            }
        }
    }
    report.push(brackets);
    report
}

/// A Lie algebra morphism `g -> Gamma D(E)` given on a basis.
#[derive(Clone, PartialEq, Debug)]
pub struct DerivativeRep {
    action: LieAlgebraAction,
    bundle: TrivialBundle,
    ops: Vec<DerivativeOp>,
}

impl DerivativeRep {
    pub fn new(action: &LieAlgebraAction, bundle: &TrivialBundle, ops: Vec<DerivativeOp>) -> Result<Self> {
        if bundle.base_dim() != action.chart().dim() {
            return Err(Error::chart("bundle base is not the acted-on chart"));
        }
        check_ops(bundle, &ops, action.dim())?;
        Ok(DerivativeRep { action: action.clone(), bundle: bundle.clone(), ops })
    }

    pub fn action(&self) -> &LieAlgebraAction {
        &self.action
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn ops(&self) -> &[DerivativeOp] {
        &self.ops
    }

    pub fn check(&self) -> Report {
        let act = &self.action;
        let mut report = act.check();
        report.subject = "derivative representation".into();
        report.extend(morphism_report(
            "derivative representation",
            &self.ops,
            act.fundamental(),
            |a, b, g| {
                let c = act.algebra().structure(a, b, g).as_constant().expect("constant structure");
                self.bundle.base().constant(c)
            },
            self.bundle.base().names(),
        ));
        report
    }
}

pub fn check_drep(rho: &DerivativeRep) -> Report {
    rho.check()
}

/// A flat A-connection.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebroidRep {
    connection: AConnection,
}

impl AlgebroidRep {
    pub fn new(connection: AConnection) -> Result<Self> {
        let report = connection.check_flat();
        if !report.passed() {
            return Err(Error::CheckFailed(Box::new(report)));
        }
        Ok(AlgebroidRep { connection })
    }

    pub fn connection(&self) -> &AConnection {
        &self.connection
    }

    pub fn algebroid(&self) -> &LieAlgebroid {
        self.connection.algebroid()
    }

    pub fn check(&self) -> Report {
        self.connection.check_flat()
    }
}

fn require_passed(report: Report) -> Result<()> {
    if report.passed() {
        Ok(())
    } else {
        Err(Error::CheckFailed(Box::new(report)))
    }
}

/// `sigma(V)(m) = rho(V(m))(m)` on `g x M`; on the constant frame this is
/// `e_a -> rho_a`.
pub fn drep_to_rep(rho: &DerivativeRep) -> Result<AlgebroidRep> {
    require_passed(rho.check())?;
    let algebroid = action_algebroid_algebra(&rho.action)?;
    AlgebroidRep::new(AConnection::new(&algebroid, &rho.bundle, rho.ops.clone())?)
}

/// `rho(X) = sigma(constant section X)`.
pub fn rep_to_drep(sigma: &AlgebroidRep) -> Result<DerivativeRep> {
    let Provenance::ActionAlgebra(act) = sigma.algebroid().provenance() else {
        return Err(Error::NotActionAlgebroid);
    };
    let c = &sigma.connection;
    DerivativeRep::new(act, c.bundle(), c.ops().to_vec())
}

/// A derivative representation of an algebroid `A` acting on `F`: frame
/// elements go to derivative endomorphisms of `E -> F` with anchors
/// `(e_a)_F`, extended by `rho(f X) = (f o phi) rho(X)`.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebroidDerivativeRep {
    action: AlgebroidAction,
    bundle: TrivialBundle,
    ops: Vec<DerivativeOp>,
}

impl AlgebroidDerivativeRep {
    pub fn new(action: &AlgebroidAction, bundle: &TrivialBundle, ops: Vec<DerivativeOp>) -> Result<Self> {
        if bundle.base_dim() != action.fibered().total().dim() {
            return Err(Error::chart("bundle base is not the total chart of the action"));
        }
        check_ops(bundle, &ops, action.algebroid().rank())?;
        Ok(AlgebroidDerivativeRep { action: action.clone(), bundle: bundle.clone(), ops })
    }

    pub fn action(&self) -> &AlgebroidAction {
        &self.action
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn ops(&self) -> &[DerivativeOp] {
        &self.ops
    }

    /// `rho(X)` for a section `X` of `A`.
    pub fn apply_section(&self, v: &[Poly]) -> DerivativeOp {
        let f = self.action.fibered();
        v.iter().zip(&self.ops).fold(DerivativeOp::zero(&self.bundle), |acc, (c, d)| acc.add(&d.scale(&f.pullback(c))))
    }

    pub fn check(&self) -> Report {
        let act = &self.action;
        let mut report = act.check();
        report.subject = "algebroid derivative representation".into();
        let f = act.fibered();
        report.extend(morphism_report(
            "algebroid derivative representation",
            &self.ops,
            act.lifted(),
            |a, b, g| f.pullback(act.algebroid().structure(a, b, g)),
            self.bundle.base().names(),
        ));
        report
    }
}

pub fn check_algebroid_drep(rho: &AlgebroidDerivativeRep) -> Report {
    rho.check()
}

/// `sigma(h (x) X)(p) = h(p) rho(X)(p)` on `A x_M F`.
pub fn drepoid_to_rep(rho: &AlgebroidDerivativeRep) -> Result<AlgebroidRep> {
    require_passed(rho.check())?;
    let algebroid = action_algebroid_fibered(&rho.action)?;
    AlgebroidRep::new(AConnection::new(&algebroid, &rho.bundle, rho.ops.clone())?)
}

/// `rho(X)(p) = sigma(X o phi)(p)`.
pub fn rep_to_drepoid(sigma: &AlgebroidRep) -> Result<AlgebroidDerivativeRep> {
    let Provenance::ActionFibered(act) = sigma.algebroid().provenance() else {
        return Err(Error::NotActionAlgebroid);
    };
    let c = &sigma.connection;
    AlgebroidDerivativeRep::new(act, c.bundle(), c.ops().to_vec())
}

/// A constant symplectic form `omega = sum_{i<j} W_ij dx_i ^ dx_j` with
/// `W` antisymmetric and invertible.
#[derive(Clone, PartialEq, Debug)]
pub struct SymplecticForm {
    chart: Chart,
    matrix: ScalarMatrix,
    /// `(W^T)^-1`, so that `X_f = (W^T)^-1 grad f`.
    sharp: ScalarMatrix,
}

impl SymplecticForm {
    pub fn new(chart: &Chart, matrix: ScalarMatrix) -> Result<Self> {
        let n = chart.dim();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::DegenerateForm);
        }
        for i in 0..n {
            for j in 0..n {
                if !(&matrix[i][j] + &matrix[j][i]).is_zero() {
                    return Err(Error::DegenerateForm);
                }
            }
        }
        let sharp = linalg::invert(&linalg::transpose(&matrix)).ok_or(Error::DegenerateForm)?;
        Ok(SymplecticForm { chart: chart.clone(), matrix, sharp })
    }

    /// `dx ^ dy` on a two-dimensional chart.
    pub fn standard_plane(chart: &Chart) -> Result<Self> {
        let (z, o) = (Scalar::zero(), Scalar::one());
        SymplecticForm::new(chart, vec![vec![z.clone(), o.clone()], vec![-&o, z]])
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn matrix(&self) -> &ScalarMatrix {
        &self.matrix
    }

    /// The component `omega(d_i, d_j)`.
    pub fn component(&self, i: usize, j: usize) -> &Scalar {
        &self.matrix[i][j]
    }

    /// The unique `X_f` with `i_{X_f} omega = df`.
    pub fn hamiltonian_vf(&self, f: &Poly) -> Result<VectorField> {
        self.chart.check_poly(f)?;
        let n = self.chart.dim();
        let grad: Vec<Poly> = (0..n).map(|j| f.partial(j)).collect();
        let comps = (0..n)
            .map(|i| {
                (0..n).fold(self.chart.zero(), |acc, j| {
                    let s = &self.sharp[i][j];
                    if s.is_zero() {
                        acc
                    } else {
                        acc + grad[j].scale(s)
                    }
                })
            })
            .collect();
        VectorField::new(&self.chart, comps)
    }

    /// `{f, g} = X_f(g)`.
    pub fn poisson(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        self.chart.check_poly(g)?;
        Ok(self.hamiltonian_vf(f)?.apply(g))
    }
}

pub fn hamiltonian_vf(omega: &SymplecticForm, f: &Poly) -> Result<VectorField> {
    omega.hamiltonian_vf(f)
}

pub fn poisson(omega: &SymplecticForm, f: &Poly, g: &Poly) -> Result<Poly> {
    omega.poisson(f, g)
}

/// A verified prequantum line bundle: `nabla = d + alpha` with curvature
/// `-i omega`, equivalently `d alpha = i omega`.
#[derive(Clone, PartialEq, Debug)]
pub struct Prequantization {
    form: SymplecticForm,
    connection: Connection,
}

impl Prequantization {
    pub fn new(form: &SymplecticForm, alpha: &[Poly]) -> Result<Self> {
        let chart = form.chart.with_field(Field::Gaussian);
        let bundle = TrivialBundle::new(&chart, 1)?;
        if alpha.len() != chart.dim() {
            return Err(Error::dim(format!(
                "1-form with {} components on a chart of dimension {}",
                alpha.len(),
                chart.dim()
            )));
        }
        let connection = Connection::from_one_form(&bundle, alpha)?;
        let minus_i = -&Scalar::i();
        for ((i, j), r) in connection.curvature_components() {
            let expected = chart.constant(&minus_i * form.component(i, j));
            let res = r.matrix().get(0, 0) - &expected;
            if !res.is_zero() {
                let w = Witness::new(format!("R(d{0}, d{1}) + i*omega(d{0}, d{1})", i + 1, j + 1), chart.names())
                    .residual([res]);
                return Err(Error::CurvatureMismatch(Box::new(w)));
            }
        }
        Ok(Prequantization { form: form.clone(), connection })
    }

    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn bundle(&self) -> &TrivialBundle {
        self.connection.bundle()
    }

    fn lift(&self, f: &Poly) -> Poly {
        Poly::from_terms(f.nvars(), f.terms().map(|(m, c)| (m.clone(), c.clone())))
    }

    /// `delta(f) = nabla_{X_f} + i f`.
    pub fn delta(&self, f: &Poly) -> Result<DerivativeOp> {
        let x = self.form.hamiltonian_vf(f)?;
        let x = VectorField::new(self.bundle().base(), x.components().to_vec())?;
        let cov = self.connection.covariant(&x)?;
        let shift = MatrixPoly::diagonal(1, &self.lift(f).scale(&Scalar::i()));
        DerivativeOp::new(self.bundle(), x, cov.matrix() + &shift)
    }
}

/// `delta(f)` for the connection `d + alpha`, after verifying its curvature.
pub fn prequantize(omega: &SymplecticForm, alpha: &[Poly], f: &Poly) -> Result<DerivativeOp> {
    Prequantization::new(omega, alpha)?.delta(f)
}

/// `rho = delta o J` for a bracket-preserving moment map `J`.
pub fn hamiltonian_action_rep(act: &LieAlgebraAction, moment: &[Poly], pq: &Prequantization) -> Result<DerivativeRep> {
    let form = pq.form();
    let chart = form.chart();
    if act.chart().dim() != chart.dim() {
        return Err(Error::chart("action and symplectic form live on different charts"));
    }
    if moment.len() != act.dim() {
        return Err(Error::dim(format!(
            "{} moment components for an algebra of dimension {}",
            moment.len(),
            act.dim()
        )));
    }
    let names = chart.names();
    for (a, j) in moment.iter().enumerate() {
        let res = &form.hamiltonian_vf(j)? - &act.fundamental()[a];
        if !res.is_zero() {
            let w = Witness::new(format!("X_J(e{0}) - X{0}", a + 1), names)
                .poly_input("J", j)
                .residual(res.components().to_vec());
            return Err(Error::MomentMapMismatch(Box::new(w)));
        }
    }
    let d = act.dim();
    for a in 0..d {
        for b in a + 1..d {
            let lhs = form.poisson(&moment[a], &moment[b])?;
            let rhs = (0..d).fold(chart.zero(), |acc, g| acc + &act.constant(a, b, g) * &moment[g]);
            let res = lhs - rhs;
            if !res.is_zero() {
                let w =
                    Witness::new(format!("{{J(e{0}),J(e{1})}} - J([e{0},e{1}])", a + 1, b + 1), names).residual([res]);
                return Err(Error::PoissonBracketMismatch(Box::new(w)));
            }
        }
    }
    let ops = moment.iter().map(|j| pq.delta(j)).collect::<Result<Vec<_>>>()?;
    DerivativeRep::new(act, pq.bundle(), ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{tangent_algebroid, StructureTable};
    use crate::geometry::FiberedChart;

    fn plane() -> Chart {
        Chart::new(vec!["x".into(), "y".into()], Field::Gaussian).unwrap()
    }

    fn pq() -> Prequantization {
        let c = plane();
        let form = SymplecticForm::standard_plane(&c).unwrap();
        Prequantization::new(&form, &[c.zero(), c.parse("i*x").unwrap()]).unwrap()
    }

    #[test]
    fn hamiltonian_fields() {
        let c = plane();
        let form = SymplecticForm::standard_plane(&c).unwrap();
        let x = c.parse("x").unwrap();
        let y = c.parse("y").unwrap();
        assert_eq!(form.hamiltonian_vf(&x).unwrap(), VectorField::parse(&c, &["0", "-1"]).unwrap());
        assert_eq!(form.hamiltonian_vf(&y).unwrap(), VectorField::coordinate(&c, 0));
        assert!(form.hamiltonian_vf(&c.parse("7").unwrap()).unwrap().is_zero());
        assert_eq!(form.poisson(&x, &y).unwrap(), c.parse("-1").unwrap());
        let degenerate = vec![vec![Scalar::zero(); 2]; 2];
        assert!(matches!(SymplecticForm::new(&c, degenerate), Err(Error::DegenerateForm)));
    }

    #[test]
    fn prequantization_examples() {
        let pq = pq();
        let c = pq.bundle().base().clone();
        let dx = pq.delta(&c.parse("x").unwrap()).unwrap();
        assert_eq!(dx.anchor(), &VectorField::parse(&c, &["0", "-1"]).unwrap());
        assert!(dx.matrix().is_zero());
        assert!(pq.delta(&c.zero()).unwrap().is_zero());
        let dy = pq.delta(&c.parse("y").unwrap()).unwrap();
        assert_eq!(dy.anchor(), &VectorField::coordinate(&c, 0));
        assert_eq!(dy.matrix().get(0, 0), &c.parse("i*y").unwrap());
        let br = dx.commutator(&dy).unwrap();
        assert_eq!(br, pq.delta(&c.parse("-1").unwrap()).unwrap());
        assert_eq!(br.matrix().get(0, 0), &c.parse("-i").unwrap());
    }

    #[test]
    fn wrong_curvature_is_rejected() {
        let c = plane();
        let form = SymplecticForm::standard_plane(&c).unwrap();
        let err = Prequantization::new(&form, &[c.zero(), c.parse("x").unwrap()]).unwrap_err();
        let Error::CurvatureMismatch(w) = err else { panic!("expected a curvature mismatch") };
        assert!(w.is_nonzero());
    }

    fn heisenberg_action(chart: &Chart) -> LieAlgebraAction {
        let mut t = StructureTable::new();
        t.insert((0, 1, 2), Poly::int(0, 1));
        let h = LieAlgebroid::lie_algebra(3, &t, Field::Rational).unwrap();
        let fields =
            vec![VectorField::coordinate(chart, 0), VectorField::coordinate(chart, 1), VectorField::zero(chart)];
        LieAlgebraAction::new(&h, chart, fields).unwrap()
    }

    #[test]
    fn moment_maps() {
        let pq = pq();
        let c = pq.form().chart().clone();
        let act = heisenberg_action(&c);
        let j = |s: [&str; 3]| s.iter().map(|t| c.parse(t).unwrap()).collect::<Vec<_>>();
        let rho = hamiltonian_action_rep(&act, &j(["y", "-x", "-1"]), &pq).unwrap();
        assert!(rho.check().passed());
        assert!(hamiltonian_action_rep(&act, &j(["y + 3", "-x", "-1"]), &pq).unwrap().check().passed());
        assert!(matches!(
            hamiltonian_action_rep(&act, &j(["y", "-x", "2"]), &pq),
            Err(Error::PoissonBracketMismatch(_))
        ));
        assert!(matches!(hamiltonian_action_rep(&act, &j(["x", "-x", "-1"]), &pq), Err(Error::MomentMapMismatch(_))));
        let abelian = LieAlgebroid::lie_algebra(2, &StructureTable::new(), Field::Rational).unwrap();
        let tr = LieAlgebraAction::new(&abelian, &c, act.fundamental()[..2].to_vec()).unwrap();
        assert!(matches!(
            hamiltonian_action_rep(&tr, &j(["y", "-x", "0"])[..2], &pq),
            Err(Error::PoissonBracketMismatch(_))
        ));
        let zero = LieAlgebroid::lie_algebra(0, &StructureTable::new(), Field::Rational).unwrap();
        let none = LieAlgebraAction::new(&zero, &c, vec![]).unwrap();
        assert!(hamiltonian_action_rep(&none, &[], &pq).unwrap().ops().is_empty());
    }

    fn so3_rep(twist: bool) -> DerivativeRep {
        let chart = Chart::standard("x", 3, Field::Rational);
        let mut t = StructureTable::new();
        for (a, b, g) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            t.insert((a, b, g), Poly::int(0, -1));
        }
        let so3 = LieAlgebroid::lie_algebra(3, &t, Field::Rational).unwrap();
        let fields = vec![
            VectorField::parse(&chart, &["0", "-x3", "x2"]).unwrap(),
            VectorField::parse(&chart, &["x3", "0", "-x1"]).unwrap(),
            VectorField::parse(&chart, &["-x2", "x1", "0"]).unwrap(),
        ];
        let act = LieAlgebraAction::new(&so3, &chart, fields.clone()).unwrap();
        let e = TrivialBundle::new(&chart, 1).unwrap();
        let mut ops: Vec<_> = fields.into_iter().map(|x| DerivativeOp::flat(&e, x).unwrap()).collect();
        if twist {
            ops[0] = DerivativeOp::new(&e, ops[0].anchor().clone(), MatrixPoly::diagonal(1, &chart.var(0))).unwrap();
        }
        DerivativeRep::new(&act, &e, ops).unwrap()
    }

    #[test]
    fn derivative_reps_and_round_trip() {
        let rho = so3_rep(false);
        assert!(rho.check().passed());
        let sigma = drep_to_rep(&rho).unwrap();
        assert!(sigma.check().passed());
        assert_eq!(rep_to_drep(&sigma).unwrap(), rho);
        let bad = so3_rep(true);
        let report = bad.check();
        assert!(!report.passed());
        assert!(report.first_witness().unwrap().is_nonzero());
        assert!(matches!(drep_to_rep(&bad), Err(Error::CheckFailed(_))));
    }

    #[test]
    fn zero_algebra_round_trip() {
        let chart = Chart::standard("x", 1, Field::Rational);
        let zero = LieAlgebroid::lie_algebra(0, &StructureTable::new(), Field::Rational).unwrap();
        let act = LieAlgebraAction::new(&zero, &chart, vec![]).unwrap();
        let rho = DerivativeRep::new(&act, &TrivialBundle::new(&chart, 2).unwrap(), vec![]).unwrap();
        let sigma = drep_to_rep(&rho).unwrap();
        assert!(sigma.connection().ops().is_empty());
        assert_eq!(rep_to_drep(&sigma).unwrap(), rho);
    }

    #[test]
    fn algebroid_drep_round_trip() {
        let base = Chart::standard("x", 2, Field::Rational);
        let fiber = Chart::standard("y", 2, Field::Rational);
        let f = FiberedChart::new(&base, &fiber).unwrap();
        let total = f.total().clone();
        let lifted = vec![VectorField::coordinate(&total, 0), VectorField::coordinate(&total, 1)];
        let act = AlgebroidAction::new(&tangent_algebroid(&base), &f, lifted.clone()).unwrap();
        let e = TrivialBundle::new(&total, 1).unwrap();
        let ops = lifted.into_iter().map(|x| DerivativeOp::flat(&e, x).unwrap()).collect();
        let rho = AlgebroidDerivativeRep::new(&act, &e, ops).unwrap();
        assert!(rho.check().passed());
        let sigma = drepoid_to_rep(&rho).unwrap();
        assert_eq!(rep_to_drepoid(&sigma).unwrap(), rho);
        assert!(matches!(rep_to_drep(&sigma), Err(Error::NotActionAlgebroid)));
    }
}
