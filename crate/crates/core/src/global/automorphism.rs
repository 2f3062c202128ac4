use crate::bundle::{Section, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::AffineMap;
use crate::pseudolinear::{is_algebra_morphism_of_functions, AffDiffOperator};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::{MatrixPoly, Poly, Scalar};

use super::group::{FPGroup, Word};

/// `nu(x, v) = (phi(x), g(x) v)` with `phi` affine and `det g` a nonzero
/// constant, so the inverse is again of this form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BundleAutomorphism {
    bundle: TrivialBundle,
    base_map: AffineMap,
    fiber: MatrixPoly,
    fiber_inv: MatrixPoly,
}

impl BundleAutomorphism {
    pub fn new(bundle: &TrivialBundle, base_map: AffineMap, fiber: MatrixPoly) -> Result<Self> {
        if base_map.dim() != bundle.base_dim() {
            return Err(Error::dim("base map dimension differs from the base"));
        }
        if fiber.rows() != bundle.rank() || fiber.cols() != bundle.rank() || fiber.nvars() != bundle.base_dim() {
            return Err(Error::dim("fiber matrix shape differs from the bundle"));
        }
        fiber.entries().iter().try_for_each(|p| bundle.base().check_poly(p))?;
        base_map.inverse()?;
        let fiber_inv = fiber.inverse_if_unimodular().map_err(|e| Error::NonInvertibleFiberData(e.to_string()))?;
        Ok(BundleAutomorphism { bundle: bundle.clone(), base_map, fiber, fiber_inv })
    }

    pub fn identity(bundle: &TrivialBundle) -> Self {
        let n = bundle.base_dim();
        BundleAutomorphism::new(bundle, AffineMap::identity(n), bundle.identity_end()).expect("identity")
    }

    pub fn translation(bundle: &TrivialBundle, shift: Vec<Scalar>) -> Result<Self> {
        BundleAutomorphism::new(bundle, AffineMap::translation(shift), bundle.identity_end())
    }

    /// A base-preserving automorphism `v -> g(x) v`.
    pub fn gauge(bundle: &TrivialBundle, g: MatrixPoly) -> Result<Self> {
        BundleAutomorphism::new(bundle, AffineMap::identity(bundle.base_dim()), g)
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn base_map(&self) -> &AffineMap {
        &self.base_map
    }

    pub fn fiber(&self) -> &MatrixPoly {
        &self.fiber
    }

    pub fn is_identity(&self) -> bool {
        self.base_map.is_identity() && self.fiber.is_identity()
    }

    /// `self o other`: `(phi1 phi2 x, g1(phi2 x) g2(x))`.
    pub fn compose(&self, other: &BundleAutomorphism) -> Result<BundleAutomorphism> {
        self.bundle.check_same(&other.bundle)?;
        let phi = self.base_map.compose(&other.base_map);
        let g = &self.fiber.map(|p| other.base_map.pullback(p)) * &other.fiber;
        BundleAutomorphism::new(&self.bundle, phi, g)
    }

    pub fn inverse(&self) -> BundleAutomorphism {
        let phinv = self.base_map.inverse().expect("invertible by construction");
        let g = self.fiber_inv.map(|p| phinv.pullback(p));
        BundleAutomorphism::new(&self.bundle, phinv, g).expect("inverse of an automorphism")
    }

    /// `(nu . psi)(x) = g(phi^-1 x) psi(phi^-1 x)`.
    pub fn act_on_section(&self, psi: &Section) -> Result<Section> {
        self.bundle.check_same(psi.bundle())?;
        let phinv = self.base_map.inverse()?;
        let moved: Vec<Poly> = psi.components().iter().map(|p| phinv.pullback(p)).collect();
        let g = self.fiber.map(|p| phinv.pullback(p));
        Ok(Section::from_parts(&self.bundle, g.apply(&moved)))
    }

    /// The induced semi-linear map `mu` with `mu^M(f) = f o phi^-1`.
    pub fn induced(&self) -> SemiLinearIso {
        let chart = self.bundle.base();
        let phinv = self.base_map.inverse().expect("invertible by construction");
        let g = self.fiber.map(|p| phinv.pullback(p));
        let op = AffDiffOperator::atom(chart, g, vec![0; chart.dim()], phinv.clone()).expect("well formed atom");
        let base = AffDiffOperator::pullback(chart, 1, &phinv).expect("well formed pullback");
        SemiLinearIso { bundle: self.bundle.clone(), op, base }
    }

    /// Residual of `self - id`: the base components `phi(x) - x` followed
    /// by the entries of `g - I`.
    pub fn identity_defect(&self) -> Vec<Poly> {
        let n = self.bundle.base_dim();
        let base = self.bundle.base();
        let images = self.base_map.images(n);
        let mut out: Vec<Poly> = images.into_iter().enumerate().map(|(i, p)| p - base.var(i)).collect();
        out.extend((&self.fiber - &self.bundle.identity_end()).entries().iter().cloned());
        out
    }
}

/// A map on sections together with its ring map on functions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SemiLinearIso {
    bundle: TrivialBundle,
    op: AffDiffOperator,
    base: AffDiffOperator,
}

impl SemiLinearIso {
    pub fn new(bundle: &TrivialBundle, op: AffDiffOperator, base: AffDiffOperator) -> Result<Self> {
        let k = bundle.rank();
        if (op.rows(), op.cols()) != (k, k) || (base.rows(), base.cols()) != (1, 1) {
            return Err(Error::dim("operator shapes do not match the bundle"));
        }
        if op.chart() != bundle.base() || base.chart() != bundle.base() {
            return Err(Error::chart("operators are not on the bundle base"));
        }
        Ok(SemiLinearIso { bundle: bundle.clone(), op, base })
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn op(&self) -> &AffDiffOperator {
        &self.op
    }

    pub fn base(&self) -> &AffDiffOperator {
        &self.base
    }

    pub fn apply(&self, psi: &Section) -> Result<Section> {
        self.op.apply_section(psi)
    }

    pub fn apply_fn(&self, f: &Poly) -> Poly {
        self.base.apply_fn(f)
    }

    /// `self o other`.
    pub fn compose(&self, other: &SemiLinearIso) -> Result<SemiLinearIso> {
        self.bundle.check_same(&other.bundle)?;
        SemiLinearIso::new(&self.bundle, self.op.compose(&other.op), self.base.compose(&other.base))
    }

    /// Images of the frame sections as the columns of a matrix.
    pub fn frame_images(&self) -> MatrixPoly {
        let k = self.bundle.rank();
        let cols: Vec<Vec<Poly>> =
            (0..k).map(|b| self.op.apply(Section::frame(&self.bundle, b).components())).collect();
        MatrixPoly::from_fn(k, k, self.bundle.base_dim(), |a, b| cols[b][a].clone())
    }
}

/// Checks `mu(f psi) = mu^M(f) mu(psi)` on monomials `f` and frame
/// sections, and that `mu^M` is a ring morphism.
pub fn check_semilinear(mu: &SemiLinearIso, bound: u32) -> Report {
    let bundle = &mu.bundle;
    let chart = bundle.base();
    let mut report = Report::new("semi-linear isomorphism");
    let mut check = CheckResult::pass("semi-linearity");
    'outer: for f in Poly::monomials_up_to(chart.dim(), bound) {
        let mf = mu.apply_fn(&f);
        for b in 0..bundle.rank() {
            let e = Section::frame(bundle, b);
            let lhs = mu.op.apply(e.scale(&f).components());
            let rhs = mu.op.apply(e.components());
            let res: Vec<Poly> = lhs.iter().zip(&rhs).map(|(l, r)| l - &(&mf * r)).collect();
            if res.iter().any(|p| !p.is_zero()) {
                let w = Witness::new("mu(f e) - mu^M(f) mu(e)", chart.names())
                    .poly_input("f", &f)
                    .input("e", format!("e{}", b + 1))
                    .residual(res);
                check = CheckResult::fail("semi-linearity", w);
                break 'outer;
            }
        }
    }
    report.push(check);
    let ring = is_algebra_morphism_of_functions(&mu.base, bound);
    for c in ring.checks {
        report.push(CheckResult { name: "ring-morphism".into(), ..c });
    }
    report
}

/// Rebuilds `nu` from `mu`, given as the images of the frame sections
/// (columns of `frame_images`) and `mu^M`, which must be a pullback by an
/// affine map.
pub fn automorphism_from_semilinear(
    bundle: &TrivialBundle,
    frame_images: &MatrixPoly,
    base: &AffDiffOperator,
) -> Result<BundleAutomorphism> {
    let psi = base.as_pullback().ok_or(Error::NonAffineBaseMap)?;
    if base.rows() != 1 || base.cols() != 1 {
        return Err(Error::NonAffineBaseMap);
    }
    // mu^M f = f o phi^-1, so phi = psi^-1; G(x) = g(phi^-1 x) gives g = G o phi
    let phi = psi.inverse().map_err(|_| Error::NonAffineBaseMap)?;
    let g = frame_images.map(|p| phi.pullback(p));
    BundleAutomorphism::new(bundle, phi, g)
}

impl SemiLinearIso {
    pub fn to_automorphism(&self) -> Result<BundleAutomorphism> {
        automorphism_from_semilinear(&self.bundle, &self.frame_images(), &self.base)
    }
}

/// A group acting on `E` by automorphisms, one per generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SemiLinearRepresentation {
    group: FPGroup,
    assignment: Vec<BundleAutomorphism>,
}

impl SemiLinearRepresentation {
    pub fn new(group: &FPGroup, assignment: Vec<BundleAutomorphism>) -> Result<Self> {
        if assignment.len() != group.rank() {
            return Err(Error::descriptor("assignment", "one automorphism per generator is required"));
        }
        if let Some(first) = assignment.first() {
            assignment.iter().try_for_each(|a| first.bundle.check_same(&a.bundle))?;
        }
        Ok(SemiLinearRepresentation { group: group.clone(), assignment })
    }

    pub fn group(&self) -> &FPGroup {
        &self.group
    }

    pub fn assignment(&self) -> &[BundleAutomorphism] {
        &self.assignment
    }

    /// The automorphism of a word, composed as written.
    pub fn evaluate(&self, bundle: &TrivialBundle, w: &Word) -> BundleAutomorphism {
        w.letters().iter().fold(BundleAutomorphism::identity(bundle), |acc, l| {
            let a = &self.assignment[l.generator];
            let a = if l.inverse { a.inverse() } else { a.clone() };
            acc.compose(&a).expect("same bundle")
        })
    }

    fn bundle(&self) -> Option<&TrivialBundle> {
        self.assignment.first().map(|a| &a.bundle)
    }

    /// Fiber matrix of the action groupoid element `(w, m)`.
    pub fn groupoid_matrix(&self, w: &Word, point: &[Scalar]) -> Option<Vec<Vec<Scalar>>> {
        let bundle = self.bundle()?;
        let nu = self.evaluate(bundle, w);
        Some(nu.fiber.row_vecs().iter().map(|r| r.iter().map(|p| p.eval(point)).collect()).collect())
    }

    /// Fails with the first relator that does not act as the identity.
    pub fn require_relators(&self) -> Result<()> {
        let Some(bundle) = self.bundle() else { return Ok(()) };
        for r in self.group.relators() {
            let nu = self.evaluate(bundle, r);
            if !nu.is_identity() {
                let word = self.group.word_text(r);
                let w = Witness::new(format!("nu({word}) - id"), bundle.base().names()).residual(nu.identity_defect());
                return Err(Error::RelatorFailure { word, witness: Box::new(w) });
            }
        }
        Ok(())
    }
}

/// Checks that each generator covers the given base action and that every
/// relator acts as the identity automorphism.
pub fn check_semilinear_rep(rep: &SemiLinearRepresentation, action: &[AffineMap]) -> Report {
    let mut report = Report::new("semi-linear representation");
    if action.len() != rep.group.rank() {
        report.push(CheckResult::error("base-action", "one affine map per generator is required"));
        return report;
    }
    let Some(bundle) = rep.bundle().cloned() else {
        report.push(CheckResult::pass("relators").with_detail("no generators"));
        return report;
    };
    let names = bundle.base().names().to_vec();
    let mut base = CheckResult::pass("base-action");
    for (i, (nu, phi)) in rep.assignment.iter().zip(action).enumerate() {
        if nu.base_map != *phi {
            let n = bundle.base_dim();
            let res = nu.base_map.images(n).into_iter().zip(phi.images(n)).map(|(a, b)| a - b);
            let w = Witness::new("nu_M(x) - g_M(x)", &names)
                .input("generator", rep.group.generators()[i].clone())
                .residual(res);
            base = CheckResult::fail("base-action", w);
            break;
        }
    }
    report.push(base);
    let rel = match rep.require_relators() {
        Ok(()) => CheckResult::pass("relators"),
        Err(Error::RelatorFailure { word, witness }) => {
            CheckResult::fail("relators", *witness).with_detail(format!("relator `{word}`"))
        }
        Err(e) => CheckResult::error("relators", e.to_string()),
    };
    report.push(rel);
    report
}

/// An element `(g, m)` of the action groupoid `G x| M`, with `g` a word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupoidElement {
    pub word: Word,
    pub point: Vec<Scalar>,
}

/// The action groupoid of a group acting on `M` by affine maps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ActionGroupoid {
    group: FPGroup,
    action: Vec<AffineMap>,
    dim: usize,
}

impl ActionGroupoid {
    pub fn new(group: &FPGroup, action: Vec<AffineMap>, dim: usize) -> Result<Self> {
        if action.len() != group.rank() || action.iter().any(|a| a.dim() != dim) {
            return Err(Error::descriptor("action", "one affine map of the base dimension per generator"));
        }
        action.iter().try_for_each(|a| a.inverse().map(drop))?;
        Ok(ActionGroupoid { group: group.clone(), action, dim })
    }

    pub fn group(&self) -> &FPGroup {
        &self.group
    }

    pub fn base_map(&self, w: &Word) -> AffineMap {
        w.letters().iter().fold(AffineMap::identity(self.dim), |acc, l| {
            let a = &self.action[l.generator];
            acc.compose(&if l.inverse { a.inverse().expect("checked") } else { a.clone() })
        })
    }

    pub fn element(&self, word: Word, point: Vec<Scalar>) -> Result<GroupoidElement> {
        if point.len() != self.dim {
            return Err(Error::dim("point dimension differs from the base"));
        }
        Ok(GroupoidElement { word, point })
    }

    pub fn unit(&self, point: Vec<Scalar>) -> Result<GroupoidElement> {
        self.element(Word::identity(), point)
    }

    pub fn source(&self, e: &GroupoidElement) -> Vec<Scalar> {
        e.point.clone()
    }

    pub fn target(&self, e: &GroupoidElement) -> Vec<Scalar> {
        self.base_map(&e.word).apply_point(&e.point)
    }

    /// `(g1, m1)(g2, m2) = (g1 g2, m2)`, defined when `m1 = g2_M(m2)`.
    pub fn product(&self, a: &GroupoidElement, b: &GroupoidElement) -> Result<GroupoidElement> {
        if a.point != self.target(b) {
            return Err(Error::NotComposable);
        }
        Ok(GroupoidElement { word: a.word.concat(&b.word), point: b.point.clone() })
    }

    pub fn inverse(&self, e: &GroupoidElement) -> GroupoidElement {
        GroupoidElement { word: e.word.inverse(), point: self.target(e) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::ring::Field;

    fn bundle(n: usize, k: usize) -> TrivialBundle {
        TrivialBundle::new(&Chart::standard("x", n, Field::Rational), k).unwrap()
    }

    fn int(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn act_on_section_examples() {
        let e = bundle(2, 1);
        let psi = Section::parse(&e, &["x1"]).unwrap();
        assert_eq!(BundleAutomorphism::identity(&e).act_on_section(&psi).unwrap(), psi);
        let t = BundleAutomorphism::translation(&e, vec![int(3), int(0)]).unwrap();
        assert_eq!(t.act_on_section(&psi).unwrap(), Section::parse(&e, &["x1 - 3"]).unwrap());
        let c = e.base().constant(int(5));
        let s = BundleAutomorphism::gauge(&e, MatrixPoly::diagonal(1, &c)).unwrap();
        assert_eq!(s.act_on_section(&psi).unwrap(), psi.scale(&c));
    }

    #[test]
    fn rejects_non_unimodular_fiber() {
        let e = bundle(1, 1);
        let g = MatrixPoly::diagonal(1, &e.base().var(0));
        assert!(matches!(BundleAutomorphism::gauge(&e, g), Err(Error::NonInvertibleFiberData(_))));
    }

    fn sample(e: &TrivialBundle) -> BundleAutomorphism {
        let c = e.base();
        let phi = AffineMap::new(vec![vec![int(1), int(1)], vec![int(0), int(2)]], vec![int(1), Scalar::ratio(-1, 2)])
            .unwrap();
        let g = MatrixPoly::from_rows(
            vec![vec![c.one(), c.parse("x1*x2").unwrap()], vec![c.zero(), c.constant(int(-1))]],
            2,
        )
        .unwrap();
        BundleAutomorphism::new(e, phi, g).unwrap()
    }

    #[test]
    fn round_trips_and_composition() {
        let e = bundle(2, 2);
        let nu = sample(&e);
        let mu = nu.induced();
        assert!(check_semilinear(&mu, 4).passed());
        assert_eq!(mu.to_automorphism().unwrap(), nu);
        assert_eq!(automorphism_from_semilinear(&e, &mu.frame_images(), mu.base()).unwrap().induced(), mu);
        let id = BundleAutomorphism::identity(&e);
        assert_eq!(id.induced().to_automorphism().unwrap(), id);
        assert!(nu.compose(&nu.inverse()).unwrap().is_identity());
        let nu2 = BundleAutomorphism::translation(&e, vec![int(0), int(4)]).unwrap();
        let both = nu.compose(&nu2).unwrap();
        assert_eq!(both.induced(), mu.compose(&nu2.induced()).unwrap());
        let psi = Section::parse(&e, &["x1^2", "x2 + 1"]).unwrap();
        assert_eq!(both.act_on_section(&psi).unwrap(), nu.act_on_section(&nu2.act_on_section(&psi).unwrap()).unwrap());
    }

    #[test]
    fn derivative_term_breaks_semilinearity() {
        let e = bundle(2, 1);
        let c = e.base();
        let mu = BundleAutomorphism::identity(&e).induced();
        let d = AffDiffOperator::vector_field(&crate::geometry::VectorField::coordinate(c, 0), 1);
        let bad = SemiLinearIso::new(&e, mu.op().add(&d), mu.base().clone()).unwrap();
        let r = check_semilinear(&bad, 3);
        assert!(!r.passed());
        let w = r.first_witness().unwrap();
        assert_eq!(w.inputs[0], ("f".into(), "1*x1".into()));
        assert_eq!(w.residual_text(), vec!["1"]);
        let not_affine = AffDiffOperator::identity(c, 1).scale(&c.var(0));
        assert!(matches!(
            automorphism_from_semilinear(&e, &e.identity_end(), &not_affine),
            Err(Error::NonAffineBaseMap)
        ));
    }

    #[test]
    fn z2_translations() {
        let e = bundle(2, 2);
        let c = e.base();
        let g = FPGroup::new(&["a", "b"], &["a b a^-1 b^-1"]).unwrap();
        let action = vec![AffineMap::translation(vec![int(1), int(0)]), AffineMap::translation(vec![int(0), int(1)])];
        let plain: Vec<_> =
            action.iter().map(|a| BundleAutomorphism::new(&e, a.clone(), e.identity_end()).unwrap()).collect();
        let rep = SemiLinearRepresentation::new(&g, plain).unwrap();
        assert!(check_semilinear_rep(&rep, &action).passed());

        let ga = MatrixPoly::from_rows(vec![vec![c.one(), c.one()], vec![c.zero(), c.one()]], 2).unwrap();
        let gb = MatrixPoly::from_rows(vec![vec![c.one(), c.zero()], vec![c.one(), c.one()]], 2).unwrap();
        let twisted = vec![
            BundleAutomorphism::new(&e, action[0].clone(), ga).unwrap(),
            BundleAutomorphism::new(&e, action[1].clone(), gb).unwrap(),
        ];
        let rep = SemiLinearRepresentation::new(&g, twisted).unwrap();
        let r = check_semilinear_rep(&rep, &action);
        assert!(!r.passed());
        assert!(r.first_witness().unwrap().is_nonzero());
        assert!(matches!(rep.require_relators(), Err(Error::RelatorFailure { .. })));
    }

    #[test]
    fn reflection_of_order_two() {
        let e = bundle(2, 1);
        let g = FPGroup::new(&["s"], &["s^2"]).unwrap();
        let refl = AffineMap::linear_map(vec![vec![int(-1), int(0)], vec![int(0), int(-1)]]).unwrap();
        let rep = SemiLinearRepresentation::new(
            &g,
            vec![BundleAutomorphism::new(&e, refl.clone(), e.identity_end()).unwrap()],
        )
        .unwrap();
        assert!(check_semilinear_rep(&rep, &[refl]).passed());
        let m = rep.groupoid_matrix(&g.parse_word("s").unwrap(), &[int(1), int(2)]).unwrap();
        assert_eq!(m, vec![vec![int(1)]]);
    }

    #[test]
    fn action_groupoid_laws() {
        let g = FPGroup::free(&["a"]).unwrap();
        let gr = ActionGroupoid::new(&g, vec![AffineMap::new(vec![vec![int(2)]], vec![int(1)]).unwrap()], 1).unwrap();
        let a = gr.element(g.parse_word("a").unwrap(), vec![int(3)]).unwrap();
        assert_eq!(gr.target(&a), vec![int(7)]);
        let u = gr.unit(vec![int(7)]).unwrap();
        assert_eq!(gr.product(&u, &a).unwrap(), a);
        assert!(matches!(gr.product(&a, &a), Err(Error::NotComposable)));
        let inv = gr.inverse(&a);
        assert_eq!(inv.point, vec![int(7)]);
        assert_eq!(gr.product(&inv, &a).unwrap(), gr.unit(vec![int(3)]).unwrap());
        let b = gr.element(g.parse_word("a").unwrap(), vec![int(7)]).unwrap();
        let c = gr.element(g.parse_word("a^-1").unwrap(), vec![int(15)]).unwrap();
        let left = gr.product(&gr.product(&c, &b).unwrap(), &a).unwrap();
        let right = gr.product(&c, &gr.product(&b, &a).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}
