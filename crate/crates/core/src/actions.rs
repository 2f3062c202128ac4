//! Infinitesimal actions of Lie algebras on a chart and of Lie algebroids
//! on fibered charts, with the associated action algebroids.

use crate::algebroid::{LieAlgebroid, Provenance, StructureTable};
use crate::error::{Error, Result};
use crate::geometry::{bracket, is_projectable, Chart, FiberedChart, VectorField};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::Poly;

/// A Lie algebra `g` acting on `M` through fundamental fields
/// `X_a = (e_a)_M`.
#[derive(Clone, PartialEq, Debug)]
pub struct LieAlgebraAction {
    algebra: LieAlgebroid,
    chart: Chart,
    fundamental: Vec<VectorField>,
}

impl LieAlgebraAction {
    pub fn new(algebra: &LieAlgebroid, chart: &Chart, fundamental: Vec<VectorField>) -> Result<Self> {
        if algebra.base().dim() != 0 {
            return Err(Error::dim("a Lie algebra must live over a point"));
        }
        if fundamental.len() != algebra.rank() {
            return Err(Error::dim(format!(
                "{} fundamental fields for an algebra of dimension {}",
                fundamental.len(),
                algebra.rank()
            )));
        }
        if fundamental.iter().any(|x| x.chart().dim() != chart.dim()) {
            return Err(Error::chart("fundamental field is not on the acted-on chart"));
        }
        Ok(LieAlgebraAction { algebra: algebra.clone(), chart: chart.clone(), fundamental })
    }

    pub fn algebra(&self) -> &LieAlgebroid {
        &self.algebra
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn fundamental(&self) -> &[VectorField] {
        &self.fundamental
    }

    pub fn dim(&self) -> usize {
        self.fundamental.len()
    }

    /// The structure constant `c^g_ab` as a constant on the acted-on chart.
    pub fn constant(&self, a: usize, b: usize, g: usize) -> Poly {
        let c = self.algebra.structure(a, b, g).as_constant().expect("structure constants over a point");
        self.chart.constant(c)
    }

    /// `V_M = sum V^a X_a` for a map `V: M -> g`.
    pub fn fundamental_of(&self, v: &[Poly]) -> VectorField {
        v.iter().zip(&self.fundamental).fold(VectorField::zero(&self.chart), |acc, (c, x)| &acc + &x.scale(c))
    }

    /// `[X_a, X_b] = sum c^g_ab X_g` on basis pairs.
    pub fn check(&self) -> Report {
        let mut report = Report::new("Lie algebra action");
        report.push(certified_check(&self.algebra));
        let d = self.dim();
        let mut check = CheckResult::pass("bracket-preservation");
        'outer: for a in 0..d {
            for b in a + 1..d {
                let lhs = bracket(&self.fundamental[a], &self.fundamental[b]);
                let rhs = (0..d).fold(VectorField::zero(&self.chart), |acc, g| {
                    &acc + &self.fundamental[g].scale(&self.constant(a, b, g))
                });
                let res = &lhs - &rhs;
                if !res.is_zero() {
                    let w =
                        Witness::new(format!("[X{0},X{1}] - sum c(g,{0},{1}) X_g", a + 1, b + 1), self.chart.names())
                            .residual(res.components().to_vec());
                    check = CheckResult::fail("bracket-preservation", w);
                    break 'outer;
                }
            }
        }
        report.push(check);
        report
    }

    /// The same action seen as an algebroid over a point acting on
    /// `F = point x M`.
    pub fn as_algebroid_action(&self) -> AlgebroidAction {
        let fibered = FiberedChart::new(self.algebra.base(), &self.chart).expect("point base shares no names");
        AlgebroidAction { algebroid: self.algebra.clone(), fibered, lifted: self.fundamental.clone() }
    }
}

fn certified_check(a: &LieAlgebroid) -> CheckResult {
    if a.is_certified() {
        CheckResult::pass("algebroid-certified")
    } else {
        match a.check_axioms().first_witness() {
            Some(w) => CheckResult::fail("algebroid-certified", w.clone()),
            None => CheckResult::error("algebroid-certified", "algebroid fails its axioms"),
        }
    }
}

pub fn check_algebra_action(act: &LieAlgebraAction) -> Report {
    act.check()
}

/// `g x M` with anchor `e_a -> X_a` and the constant structure of `g`. The
/// bracket of maps `V, W: M -> g` is `V_M(W) - W_M(V) + [V, W]` pointwise.
pub fn action_algebroid_algebra(act: &LieAlgebraAction) -> Result<LieAlgebroid> {
    let report = act.check();
    if !report.passed() {
        return Err(Error::CheckFailed(Box::new(report)));
    }
    let d = act.dim();
    let mut table = StructureTable::new();
    for a in 0..d {
        for b in a + 1..d {
            for g in 0..d {
                let c = act.constant(a, b, g);
                if !c.is_zero() {
                    table.insert((a, b, g), c);
                }
            }
        }
    }
    LieAlgebroid::with_provenance(
        act.chart(),
        act.fundamental.clone(),
        &table,
        Provenance::ActionAlgebra(Box::new(act.clone())),
    )
}

/// An algebroid `A -> M` acting on a fibered chart `F -> M` through lifts
/// `(e_a)_F`, extended to sections by `(f X)_F = (f o phi) X_F`.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebroidAction {
    algebroid: LieAlgebroid,
    fibered: FiberedChart,
    lifted: Vec<VectorField>,
}

impl AlgebroidAction {
    pub fn new(algebroid: &LieAlgebroid, fibered: &FiberedChart, lifted: Vec<VectorField>) -> Result<Self> {
        if fibered.base().dim() != algebroid.base().dim() {
            return Err(Error::chart("fibered chart does not lie over the algebroid base"));
        }
        if lifted.len() != algebroid.rank() {
            return Err(Error::dim(format!(
                "{} lifted fields for an algebroid of rank {}",
                lifted.len(),
                algebroid.rank()
            )));
        }
        if lifted.iter().any(|x| x.chart().dim() != fibered.total().dim()) {
            return Err(Error::chart("lifted field is not on the total chart"));
        }
        Ok(AlgebroidAction { algebroid: algebroid.clone(), fibered: fibered.clone(), lifted })
    }

    pub fn algebroid(&self) -> &LieAlgebroid {
        &self.algebroid
    }

    pub fn fibered(&self) -> &FiberedChart {
        &self.fibered
    }

    pub fn lifted(&self) -> &[VectorField] {
        &self.lifted
    }

    /// `X_F` for a section `X` of `A`.
    pub fn lift_section(&self, v: &[Poly]) -> VectorField {
        v.iter()
            .zip(&self.lifted)
            .fold(VectorField::zero(self.fibered.total()), |acc, (c, y)| &acc + &y.scale(&self.fibered.pullback(c)))
    }

    /// Projectability of each lift and
    /// `[(e_a)_F, (e_b)_F] = sum (c^g_ab o phi) (e_g)_F`.
    pub fn check(&self) -> Report {
        let mut report = Report::new("algebroid action");
        report.push(certified_check(&self.algebroid));
        let total = self.fibered.total();
        let r = self.algebroid.rank();

        let mut proj = CheckResult::pass("projectable");
        for (a, y) in self.lifted.iter().enumerate() {
            let base_field = &self.algebroid.anchor_frame()[a];
            if !is_projectable(&self.fibered, y, base_field).expect("charts validated") {
                let lifted_anchor = base_field.lift_to(total);
                let n = self.fibered.base().dim();
                let res = (y - &lifted_anchor).components()[..n].to_vec();
                let w = Witness::new(format!("base part of (e{0})_F - a(e{0})", a + 1), total.names()).residual(res);
                proj = CheckResult::fail("projectable", w);
                break;
            }
        }
        report.push(proj);

        let mut brackets = CheckResult::pass("bracket-preservation");
        'outer: for a in 0..r {
            for b in a + 1..r {
                let lhs = bracket(&self.lifted[a], &self.lifted[b]);
                let rhs = (0..r).fold(VectorField::zero(total), |acc, g| {
                    &acc + &self.lifted[g].scale(&self.fibered.pullback(self.algebroid.structure(a, b, g)))
                });
                let res = &lhs - &rhs;
                if !res.is_zero() {
                    let w = Witness::new(
                        format!("[(e{0})_F,(e{1})_F] - sum (c(g,{0},{1}) o phi) (e_g)_F", a + 1, b + 1),
                        total.names(),
                    )
                    .residual(res.components().to_vec());
                    brackets = CheckResult::fail("bracket-preservation", w);
                    break 'outer;
                }
            }
        }
        report.push(brackets);
        report
    }
}

pub fn check_algebroid_action(act: &AlgebroidAction) -> Report {
    act.check()
}

/// `A x_M F`: the pullback `phi*A` over the total chart with anchor
/// `h (x) X -> h X_F` and structure functions `c o phi`.
pub fn action_algebroid_fibered(act: &AlgebroidAction) -> Result<LieAlgebroid> {
    let report = act.check();
    if !report.passed() {
        return Err(Error::CheckFailed(Box::new(report)));
    }
    let table: StructureTable =
        act.algebroid.structure_table().into_iter().map(|(k, p)| (k, act.fibered.pullback(&p))).collect();
    LieAlgebroid::with_provenance(
        act.fibered.total(),
        act.lifted.clone(),
        &table,
        Provenance::ActionFibered(Box::new(act.clone())),
    )
}
