use std::collections::BTreeMap;

use crate::actions::LieAlgebraAction;
use crate::algebroid::LieAlgebroid;
use crate::bundle::{DerivativeOp, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::ring::{linalg, DualPoly, MatrixPoly, Poly, Scalar, ScalarMatrix};

use super::automorphism::BundleAutomorphism;

/// The first-order family `A = I + eps A1`, `b = eps b1`,
/// `g(x) = I + eps B(x)` with `eps^2 = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualAutomorphismFamily {
    bundle: TrivialBundle,
    a1: ScalarMatrix,
    b1: Vec<Scalar>,
    b: MatrixPoly,
}

impl DualAutomorphismFamily {
    pub fn new(bundle: &TrivialBundle, a1: ScalarMatrix, b1: Vec<Scalar>, b: MatrixPoly) -> Result<Self> {
        let n = bundle.base_dim();
        if a1.len() != n || a1.iter().any(|r| r.len() != n) || b1.len() != n {
            return Err(Error::dim("affine data does not match the base dimension"));
        }
        if (b.rows(), b.cols(), b.nvars()) != (bundle.rank(), bundle.rank(), n) {
            return Err(Error::dim("fiber generator does not match the bundle"));
        }
        b.entries().iter().try_for_each(|p| bundle.base().check_poly(p))?;
        Ok(DualAutomorphismFamily { bundle: bundle.clone(), a1, b1, b })
    }

    pub fn identity(bundle: &TrivialBundle) -> Self {
        let n = bundle.base_dim();
        DualAutomorphismFamily {
            bundle: bundle.clone(),
            a1: vec![vec![Scalar::zero(); n]; n],
            b1: vec![Scalar::zero(); n],
            b: bundle.zero_end(),
        }
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn a1(&self) -> &ScalarMatrix {
        &self.a1
    }

    pub fn b1(&self) -> &[Scalar] {
        &self.b1
    }

    pub fn fiber_generator(&self) -> &MatrixPoly {
        &self.b
    }

    /// The value at `eps = 0`, always the identity.
    pub fn at_zero(&self) -> BundleAutomorphism {
        BundleAutomorphism::identity(&self.bundle)
    }

    /// The base field `X_M = A1 x + b1` of the family.
    pub fn base_field(&self) -> VectorField {
        let chart = self.bundle.base();
        let n = chart.dim();
        let comps = (0..n)
            .map(|i| (0..n).fold(chart.constant(self.b1[i].clone()), |acc, j| acc + chart.var(j).scale(&self.a1[i][j])))
            .collect();
        VectorField::new(chart, comps).expect("built on the base chart")
    }

    /// `(nu_eps . psi)(x) = g(phi_eps^-1 x) psi(phi_eps^-1 x)` over the dual
    /// numbers; `phi_eps^-1 x = x - eps (A1 x + b1)` to first order.
    pub fn act_dual(&self, psi: &[Poly]) -> Vec<DualPoly> {
        let chart = self.bundle.base();
        let n = chart.dim();
        let x = self.base_field();
        let args: Vec<DualPoly> = (0..n).map(|i| DualPoly::new(chart.var(i), -x.component(i).clone())).collect();
        let moved: Vec<DualPoly> = psi.iter().map(|p| DualPoly::eval(p, &args)).collect();
        let k = self.bundle.rank();
        (0..k)
            .map(|a| {
                (0..k).fold(DualPoly::constant(chart.zero()), |acc, c| {
                    let delta = if a == c { chart.one() } else { chart.zero() };
                    let g = DualPoly::constant(delta) + DualPoly::eps(n) * DualPoly::eval(self.b.get(a, c), &args);
                    acc + g * moved[c].clone()
                })
            })
            .collect()
    }
}

/// The eps-coefficient of `psi -> nu_eps . psi` as a derivative
/// endomorphism `D(psi) = B psi - X_M(psi)`. This is the negative of the
/// Lie derivation of the linear field `(X_M, B)`.
pub fn differentiate_family(fam: &DualAutomorphismFamily) -> DerivativeOp {
    let bundle = &fam.bundle;
    let chart = bundle.base();
    let n = chart.dim();
    let k = bundle.rank();
    // frame sections give B, coordinate multiples of e1 give the base part
    let mut m = bundle.zero_end();
    for c in 0..k {
        let mut e = vec![chart.zero(); k];
        e[c] = chart.one();
        for (a, v) in fam.act_dual(&e).into_iter().enumerate() {
            m.set(a, c, v.a1);
        }
    }
    let anchor: Vec<Poly> = (0..n)
        .map(|i| {
            let mut psi = vec![chart.zero(); k];
            psi[0] = chart.var(i);
            let out = fam.act_dual(&psi).swap_remove(0).a1;
            out - m.get(0, 0) * &chart.var(i)
        })
        .collect();
    let anchor = VectorField::new(chart, anchor).expect("base chart");
    DerivativeOp::new(bundle, anchor, m).expect("shapes match the bundle")
}

/// Differentiates one family per generator of an affine action. The
/// generators `(A1, b1)` must span a Lie algebra under
/// `[(A, a), (B, b)] = (AB - BA, Ab - Ba)`; the fundamental fields are the
/// eps-coefficient base fields `-(A1 x + b1)`, which then satisfy
/// `[Y_a, Y_b] = Y_[a,b]`.
pub fn infinitesimal_action(families: &[DualAutomorphismFamily]) -> Result<LieAlgebraAction> {
    let first = families.first().ok_or_else(|| Error::descriptor("families", "at least one family is required"))?;
    let chart = first.bundle.base();
    let n = chart.dim();
    let d = families.len();
    if families.iter().any(|f| f.bundle.base() != chart) {
        return Err(Error::chart("families live on different bases"));
    }
    let flat = |a: &ScalarMatrix, b: &[Scalar]| -> Vec<Scalar> { a.iter().flatten().chain(b).cloned().collect() };
    let vecs: Vec<Vec<Scalar>> = families.iter().map(|f| flat(&f.a1, &f.b1)).collect();
    let len = n * n + n;
    let columns = |skip: Option<usize>| -> ScalarMatrix {
        (0..len).map(|r| (0..d).filter(|&c| Some(c) != skip).map(|c| vecs[c][r].clone()).collect()).collect()
    };
    for a in 0..d {
        if vecs[a].iter().all(Scalar::is_zero) || (d > 1 && linalg::solve(&columns(Some(a)), &vecs[a]).is_some()) {
            return Err(Error::descriptor("families", "generators are linearly dependent"));
        }
    }
    let basis = columns(None);
    let mut table = BTreeMap::new();
    for a in 0..d {
        for b in a + 1..d {
            let (fa, fb) = (&families[a], &families[b]);
            let comm: ScalarMatrix = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n).fold(Scalar::zero(), |acc, l| {
                                &(&acc + &(&fa.a1[i][l] * &fb.a1[l][j])) - &(&fb.a1[i][l] * &fa.a1[l][j])
                            })
                        })
                        .collect()
                })
                .collect();
            let shift: Vec<Scalar> = (0..n)
                .map(|i| {
                    (0..n).fold(Scalar::zero(), |acc, l| {
                        &(&acc + &(&fa.a1[i][l] * &fb.b1[l])) - &(&fb.a1[i][l] * &fa.b1[l])
                    })
                })
                .collect();
            let coeffs = linalg::solve(&basis, &flat(&comm, &shift))
                .ok_or_else(|| Error::descriptor("families", "generators are not closed under brackets"))?;
            for (g, c) in coeffs.into_iter().enumerate() {
                if !c.is_zero() {
                    table.insert((a, b, g), Poly::constant(0, c));
                }
            }
        }
    }
    let algebra = LieAlgebroid::lie_algebra(d, &table, chart.field())?;
    let fundamental = families.iter().map(|f| f.base_field().scale_scalar(&Scalar::from_int(-1))).collect();
    LieAlgebraAction::new(&algebra, chart, fundamental)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::action_algebroid_algebra;
    use crate::geometry::Chart;
    use crate::ring::Field;

    fn bundle(n: usize, k: usize) -> TrivialBundle {
        TrivialBundle::new(&Chart::standard("x", n, Field::Rational), k).unwrap()
    }

    fn zeros(n: usize) -> ScalarMatrix {
        vec![vec![Scalar::zero(); n]; n]
    }

    #[test]
    fn identity_family_gives_zero() {
        let e = bundle(2, 2);
        let fam = DualAutomorphismFamily::identity(&e);
        assert!(fam.at_zero().is_identity());
        assert!(differentiate_family(&fam).is_zero());
    }

    #[test]
    fn pure_gauge_and_translation() {
        let e = bundle(2, 2);
        let c = e.base();
        let b =
            MatrixPoly::from_rows(vec![vec![c.constant(Scalar::from_int(2)), c.one()], vec![c.zero(), c.zero()]], 2)
                .unwrap();
        let d = differentiate_family(
            &DualAutomorphismFamily::new(&e, zeros(2), vec![Scalar::zero(); 2], b.clone()).unwrap(),
        );
        assert!(d.anchor().is_zero());
        assert_eq!(d.matrix(), &b);

        let t = DualAutomorphismFamily::new(&e, zeros(2), vec![Scalar::one(), Scalar::zero()], e.zero_end()).unwrap();
        let d = differentiate_family(&t);
        assert_eq!(d.anchor(), &VectorField::parse(c, &["-1", "0"]).unwrap());
        assert!(d.matrix().is_zero());
    }

    #[test]
    fn general_family_matches_dual_evaluation_and_lie_derivation() {
        let e = bundle(2, 2);
        let c = e.base();
        let a1 = vec![vec![Scalar::from_int(1), Scalar::from_int(2)], vec![Scalar::from_int(-1), Scalar::zero()]];
        let b = MatrixPoly::from_rows(
            vec![vec![c.parse("x1*x2").unwrap(), c.one()], vec![c.parse("x2^2").unwrap(), c.zero()]],
            2,
        )
        .unwrap();
        let fam = DualAutomorphismFamily::new(&e, a1, vec![Scalar::ratio(1, 3), Scalar::one()], b.clone()).unwrap();
        let d = differentiate_family(&fam);
        let psi = vec![c.parse("x1^3 + x2").unwrap(), c.parse("x1*x2 - 4").unwrap()];
        let expect: Vec<Poly> = fam.act_dual(&psi).into_iter().map(|v| v.a1).collect();
        let out = d.apply(&crate::bundle::Section::new(&e, psi).unwrap()).unwrap();
        assert_eq!(out.components(), expect.as_slice());
        let lvf = crate::bundle::LinearVectorField::new(&e, fam.base_field(), b).unwrap();
        assert_eq!(d, lvf.lie_derivation().neg());
    }

    #[test]
    fn rotations_give_an_action() {
        let e = bundle(3, 1);
        let gen = |i: usize| {
            let mut a = zeros(3);
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            a[k][j] = Scalar::from_int(1);
            a[j][k] = Scalar::from_int(-1);
            DualAutomorphismFamily::new(&e, a, vec![Scalar::zero(); 3], e.zero_end()).unwrap()
        };
        let fams: Vec<_> = (0..3).map(gen).collect();
        let act = infinitesimal_action(&fams).unwrap();
        assert!(act.check().passed());
        assert!(action_algebroid_algebra(&act).unwrap().check_axioms().passed());
        let dup = vec![fams[0].clone(), fams[0].clone()];
        assert!(infinitesimal_action(&dup).is_err());
    }

    #[test]
    fn affine_generators_close() {
        let e = bundle(1, 1);
        let dil =
            DualAutomorphismFamily::new(&e, vec![vec![Scalar::one()]], vec![Scalar::zero()], e.zero_end()).unwrap();
        let tr = DualAutomorphismFamily::new(&e, zeros(1), vec![Scalar::one()], e.zero_end()).unwrap();
        let act = infinitesimal_action(&[dil, tr]).unwrap();
        assert!(act.check().passed());
        assert_eq!(act.algebra().structure(0, 1, 1).as_constant(), Some(Scalar::one()));
    }
}
