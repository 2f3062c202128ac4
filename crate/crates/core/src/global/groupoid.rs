use crate::bundle::{Section, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, FiberedChart};
use crate::report::{CheckResult, Report, Witness};
use crate::ring::{MatrixPoly, Poly};

use super::group::{FPGroup, Word};

/// `S(x, y) = (A x + b, T(x) y + t(x))` on a product `M x N`, with `det T`
/// a nonzero constant.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiberedMap {
    base: AffineMap,
    t_matrix: MatrixPoly,
    t_shift: Vec<Poly>,
}

impl FiberedMap {
    pub fn new(fibered: &FiberedChart, base: AffineMap, t_matrix: MatrixPoly, t_shift: Vec<Poly>) -> Result<Self> {
        let (n, m) = (fibered.base().dim(), fibered.fiber().dim());
        if base.dim() != n || (t_matrix.rows(), t_matrix.cols(), t_matrix.nvars()) != (m, m, n) || t_shift.len() != m {
            return Err(Error::dim("fibered map data does not match the fibered chart"));
        }
        t_shift.iter().chain(t_matrix.entries()).try_for_each(|p| fibered.base().check_poly(p))?;
        base.inverse()?;
        t_matrix.inverse_if_unimodular().map_err(|e| Error::NonInvertibleFiberData(e.to_string()))?;
        Ok(FiberedMap { base, t_matrix, t_shift })
    }

    pub fn identity(fibered: &FiberedChart) -> Self {
        let (n, m) = (fibered.base().dim(), fibered.fiber().dim());
        FiberedMap {
            base: AffineMap::identity(n),
            t_matrix: MatrixPoly::identity(m, n),
            t_shift: vec![Poly::zero(n); m],
        }
    }

    /// A lift with `T = I`, `t = 0`.
    pub fn trivial_lift(fibered: &FiberedChart, base: AffineMap) -> Result<Self> {
        let id = FiberedMap::identity(fibered);
        FiberedMap::new(fibered, base, id.t_matrix, id.t_shift)
    }

    pub fn base(&self) -> &AffineMap {
        &self.base
    }

    pub fn t_matrix(&self) -> &MatrixPoly {
        &self.t_matrix
    }

    pub fn t_shift(&self) -> &[Poly] {
        &self.t_shift
    }

    pub fn is_identity(&self) -> bool {
        self.base.is_identity() && self.t_matrix.is_identity() && self.t_shift.iter().all(Poly::is_zero)
    }

    /// `self o other`.
    pub fn compose(&self, other: &FiberedMap) -> FiberedMap {
        let t1 = self.t_matrix.map(|p| other.base.pullback(p));
        let s1: Vec<Poly> = self.t_shift.iter().map(|p| other.base.pullback(p)).collect();
        let shift = t1.apply(&other.t_shift).into_iter().zip(s1).map(|(a, b)| a + b).collect();
        FiberedMap { base: self.base.compose(&other.base), t_matrix: &t1 * &other.t_matrix, t_shift: shift }
    }

    pub fn inverse(&self) -> FiberedMap {
        let phinv = self.base.inverse().expect("checked on construction");
        let tinv = self.t_matrix.inverse_if_unimodular().expect("checked on construction").map(|p| phinv.pullback(p));
        let moved: Vec<Poly> = self.t_shift.iter().map(|p| phinv.pullback(p)).collect();
        let shift = tinv.apply(&moved).into_iter().map(|p| -p).collect();
        FiberedMap { base: phinv, t_matrix: tinv, t_shift: shift }
    }

    /// Components of `S` as polynomials on the total chart.
    pub fn images(&self, fibered: &FiberedChart) -> Vec<Poly> {
        let (n, m) = (fibered.base().dim(), fibered.fiber().dim());
        let total = fibered.total();
        let mut out = self.base.images(n + m);
        for a in 0..m {
            let c = (0..m)
                .fold(self.t_shift[a].extend(m), |acc, b| acc + self.t_matrix.get(a, b).extend(m) * total.var(n + b));
            out.push(c);
        }
        out
    }

    /// `S(p) - p` on the total chart.
    pub fn identity_defect(&self, fibered: &FiberedChart) -> Vec<Poly> {
        let total = fibered.total();
        self.images(fibered).into_iter().enumerate().map(|(i, p)| p - total.var(i)).collect()
    }
}

fn evaluate_word<T: Clone>(w: &Word, id: T, gens: &[T], inv: impl Fn(&T) -> T, compose: impl Fn(&T, &T) -> T) -> T {
    w.letters().iter().fold(id, |acc, l| {
        let g = &gens[l.generator];
        compose(&acc, &if l.inverse { inv(g) } else { g.clone() })
    })
}

/// A group acting on `F = M x N` by fibered maps over an affine action.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupoidActionModel {
    group: FPGroup,
    fibered: FiberedChart,
    lifts: Vec<FiberedMap>,
}

impl GroupoidActionModel {
    pub fn new(group: &FPGroup, fibered: &FiberedChart, lifts: Vec<FiberedMap>) -> Result<Self> {
        if lifts.len() != group.rank() {
            return Err(Error::descriptor("lift", "one fibered map per generator is required"));
        }
        Ok(GroupoidActionModel { group: group.clone(), fibered: fibered.clone(), lifts })
    }

    pub fn group(&self) -> &FPGroup {
        &self.group
    }

    pub fn fibered(&self) -> &FiberedChart {
        &self.fibered
    }

    pub fn lifts(&self) -> &[FiberedMap] {
        &self.lifts
    }

    pub fn base_action(&self) -> Vec<AffineMap> {
        self.lifts.iter().map(|l| l.base.clone()).collect()
    }

    pub fn evaluate(&self, w: &Word) -> FiberedMap {
        evaluate_word(w, FiberedMap::identity(&self.fibered), &self.lifts, FiberedMap::inverse, FiberedMap::compose)
    }

    fn relator_failure(&self) -> Option<(String, Witness)> {
        for r in self.group.relators() {
            let s = self.evaluate(r);
            if !s.is_identity() {
                let word = self.group.word_text(r);
                let w = Witness::new(format!("S({word})(p) - p"), self.fibered.total().names())
                    .residual(s.identity_defect(&self.fibered));
                return Some((word, w));
            }
        }
        None
    }
}

/// Checks that relators act as the identity on `F` and that evaluation is
/// multiplicative on words of length at most two.
pub fn check_groupoid_action(model: &GroupoidActionModel) -> Report {
    let mut report = Report::new("groupoid action");
    let rel = match model.relator_failure() {
        None => CheckResult::pass("relators"),
        Some((word, w)) => CheckResult::fail("relators", w).with_detail(format!("relator `{word}`")),
    };
    report.push(rel);
    let words = model.group.words_up_to(2);
    let mut comp = CheckResult::pass("composition");
    'outer: for a in &words {
        for b in &words {
            let lhs = model.evaluate(&a.concat(b));
            let rhs = model.evaluate(a).compose(&model.evaluate(b));
            if lhs != rhs {
                let res = lhs.images(&model.fibered).into_iter().zip(rhs.images(&model.fibered)).map(|(x, y)| x - y);
                let w = Witness::new("S(ab)(p) - S(a)(S(b)(p))", model.fibered.total().names())
                    .input("a", model.group.word_text(a))
                    .input("b", model.group.word_text(b))
                    .residual(res);
                comp = CheckResult::fail("composition", w);
                break 'outer;
            }
        }
    }
    if model.fibered.fiber().dim() == 0 && comp.passed() {
        comp = comp.with_detail("fiber is a point: the action on F is the base action itself");
    }
    report.push(comp);
    report
}

/// A representation of the action groupoid `G x| F` on a trivial bundle
/// over the total chart of `F`: `rho_g(p)` is the fiber map from `p` to
/// `S(g) p`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupoidRepModel {
    action: GroupoidActionModel,
    bundle: TrivialBundle,
    rho: Vec<MatrixPoly>,
}

/// The pair `(S(w), rho_w)` for a word.
#[derive(Clone, PartialEq, Eq, Debug)]
struct Cocycle {
    map: FiberedMap,
    rho: MatrixPoly,
}

impl GroupoidRepModel {
    pub fn new(action: &GroupoidActionModel, rank: usize, rho: Vec<MatrixPoly>) -> Result<Self> {
        let bundle = TrivialBundle::new(action.fibered.total(), rank)?;
        if rho.len() != action.group.rank() {
            return Err(Error::descriptor("rho", "one matrix field per generator is required"));
        }
        for r in &rho {
            if (r.rows(), r.cols(), r.nvars()) != (rank, rank, bundle.base_dim()) {
                return Err(Error::dim("rho has the wrong shape"));
            }
            r.entries().iter().try_for_each(|p| bundle.base().check_poly(p))?;
            r.inverse_if_unimodular().map_err(|e| Error::NonInvertibleFiberData(e.to_string()))?;
        }
        Ok(GroupoidRepModel { action: action.clone(), bundle, rho })
    }

    pub fn action(&self) -> &GroupoidActionModel {
        &self.action
    }

    pub fn bundle(&self) -> &TrivialBundle {
        &self.bundle
    }

    pub fn rho(&self) -> &[MatrixPoly] {
        &self.rho
    }

    fn pull(&self, m: &MatrixPoly, s: &FiberedMap) -> MatrixPoly {
        m.substitute(&s.images(&self.action.fibered))
    }

    fn generator(&self, g: usize) -> Cocycle {
        Cocycle { map: self.action.lifts[g].clone(), rho: self.rho[g].clone() }
    }

    /// `rho_{ab}(p) = rho_a(S(b) p) rho_b(p)`.
    fn compose(&self, a: &Cocycle, b: &Cocycle) -> Cocycle {
        Cocycle { map: a.map.compose(&b.map), rho: &self.pull(&a.rho, &b.map) * &b.rho }
    }

    /// `rho_{a^-1}(p) = rho_a(S(a^-1) p)^-1`.
    fn inverse(&self, a: &Cocycle) -> Cocycle {
        let inv = a.map.inverse();
        let rho = self.pull(&a.rho, &inv).inverse_if_unimodular().expect("unimodular on construction");
        Cocycle { map: inv, rho }
    }

    fn evaluate(&self, w: &Word) -> Cocycle {
        let id = Cocycle { map: FiberedMap::identity(&self.action.fibered), rho: self.bundle.identity_end() };
        let gens: Vec<Cocycle> = (0..self.rho.len()).map(|g| self.generator(g)).collect();
        evaluate_word(w, id, &gens, |c| self.inverse(c), |a, b| self.compose(a, b))
    }

    /// `rho_w` as a matrix field on the total chart.
    pub fn rho_word(&self, w: &Word) -> MatrixPoly {
        self.evaluate(w).rho
    }

    pub fn map_word(&self, w: &Word) -> FiberedMap {
        self.evaluate(w).map
    }
}

/// Checks the underlying action, that relators map to the identity, and
/// the cocycle law on consecutive splittings of each relator.
pub fn check_groupoid_rep(rep: &GroupoidRepModel) -> Report {
    let mut report = check_groupoid_action(&rep.action);
    report.subject = "groupoid representation".into();
    let names = rep.bundle.base().names().to_vec();
    let mut rel = CheckResult::pass("rho-relators");
    for r in rep.action.group.relators() {
        let c = rep.evaluate(r);
        if !c.rho.is_identity() {
            let word = rep.action.group.word_text(r);
            let w = Witness::new(format!("rho({word})(p) - I"), &names)
                .residual((&c.rho - &rep.bundle.identity_end()).entries().iter().cloned());
            rel = CheckResult::fail("rho-relators", w).with_detail(format!("relator `{word}`"));
            break;
        }
    }
    report.push(rel);
    let mut cocycle = CheckResult::pass("cocycle");
    'outer: for r in rep.action.group.relators() {
        let letters = r.letters();
        for i in 1..letters.len() {
            let a = Word::from_letters(letters[..i].iter().copied());
            let b = Word::from_letters(letters[i..].iter().copied());
            let (ca, cb) = (rep.evaluate(&a), rep.evaluate(&b));
            let whole = rep.evaluate(r);
            let split = rep.compose(&ca, &cb);
            if whole.rho != split.rho {
                let w = Witness::new("rho_ab(p) - rho_a(S(b)p) rho_b(p)", &names)
                    .input("a", rep.action.group.word_text(&a))
                    .input("b", rep.action.group.word_text(&b))
                    .residual((&whole.rho - &split.rho).entries().iter().cloned());
                cocycle = CheckResult::fail("cocycle", w);
                break 'outer;
            }
        }
    }
    report.push(cocycle);
    report
}

/// The action of the constant bisection `g` on sections:
/// `(g . psi)(p) = rho(g, S(g^-1) p) psi(S(g^-1) p)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BisectionMap {
    bundle: TrivialBundle,
    coeff: MatrixPoly,
    pullback: Vec<Poly>,
}

impl BisectionMap {
    pub fn coeff(&self) -> &MatrixPoly {
        &self.coeff
    }

    pub fn apply(&self, psi: &Section) -> Result<Section> {
        self.bundle.check_same(psi.bundle())?;
        let moved: Vec<Poly> = psi.components().iter().map(|p| p.substitute(&self.pullback)).collect();
        Ok(Section::from_parts(&self.bundle, self.coeff.apply(&moved)))
    }

    /// The base part `f -> f o S(g^-1)`.
    pub fn apply_fn(&self, f: &Poly) -> Poly {
        f.substitute(&self.pullback)
    }
}

/// Builds the section map of a word, failing when the representation
/// itself does not check.
pub fn bisection_semilinear(rep: &GroupoidRepModel, w: &Word) -> Result<BisectionMap> {
    let report = check_groupoid_rep(rep);
    if !report.passed() {
        return Err(Error::CheckFailed(Box::new(report)));
    }
    Ok(bisection_unchecked(rep, w))
}

fn bisection_unchecked(rep: &GroupoidRepModel, w: &Word) -> BisectionMap {
    let c = rep.evaluate(w);
    let inv = c.map.inverse();
    BisectionMap {
        bundle: rep.bundle.clone(),
        coeff: rep.pull(&c.rho, &inv),
        pullback: inv.images(&rep.action.fibered),
    }
}

/// Checks semi-linearity of each word's map on monomials times frame
/// sections, and `(ab) . psi = a . (b . psi)` on frame sections and their
/// monomial multiples, over all words of length at most `max_len`.
pub fn check_bisections(rep: &GroupoidRepModel, max_len: usize, bound: u32) -> Report {
    let mut report = Report::new("bisection action");
    let e = &rep.bundle;
    let names = e.base().names().to_vec();
    let words = rep.action.group.words_up_to(max_len);
    let maps: Vec<BisectionMap> = words.iter().map(|w| bisection_unchecked(rep, w)).collect();
    let monomials = Poly::monomials_up_to(e.base_dim(), bound);
    let mut semi = CheckResult::pass("semi-linearity");
    'outer: for (w, m) in words.iter().zip(&maps) {
        for f in &monomials {
            for b in 0..e.rank() {
                let psi = Section::frame(e, b);
                let lhs = m.apply(&psi.scale(f)).expect("same bundle");
                let rhs = m.apply(&psi).expect("same bundle").scale(&m.apply_fn(f));
                let res = lhs.sub(&rhs);
                if !res.is_zero() {
                    let wit = Witness::new("g.(f psi) - f(S(g^-1)p) g.psi", &names)
                        .input("g", rep.action.group.word_text(w))
                        .poly_input("f", f)
                        .input("psi", format!("e{}", b + 1))
                        .residual(res.components().to_vec());
                    semi = CheckResult::fail("semi-linearity", wit);
                    break 'outer;
                }
            }
        }
    }
    report.push(semi);
    let tests: Vec<Section> = (0..e.rank())
        .flat_map(|b| monomials.iter().filter(|f| f.degree().unwrap_or(0) <= 1).map(move |f| (b, f.clone())))
        .map(|(b, f)| Section::frame(e, b).scale(&f))
        .collect();
    let mut mult = CheckResult::pass("multiplicativity");
    let short: Vec<usize> = (0..words.len()).filter(|&i| words[i].len() <= max_len.div_ceil(2).max(1)).collect();
    'outer2: for &i in &short {
        for (j, wj) in words.iter().enumerate() {
            let ab = words[i].concat(wj);
            if ab.len() > max_len {
                continue;
            }
            let k = words.iter().position(|w| *w == ab).expect("enumerated");
            for psi in &tests {
                let lhs = maps[k].apply(psi).expect("same bundle");
                let rhs = maps[i].apply(&maps[j].apply(psi).expect("same bundle")).expect("same bundle");
                let res = lhs.sub(&rhs);
                if !res.is_zero() {
                    let wit = Witness::new("(ab).psi - a.(b.psi)", &names)
                        .input("a", rep.action.group.word_text(&words[i]))
                        .input("b", rep.action.group.word_text(wj))
                        .input("psi", format!("[{}]", psi.text().join(", ")))
                        .residual(res.components().to_vec());
                    mult = CheckResult::fail("multiplicativity", wit);
                    break 'outer2;
                }
            }
        }
    }
    report.push(mult);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Chart;
    use crate::global::automorphism::BundleAutomorphism;
    use crate::ring::{Field, Scalar};

    fn int(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    fn fibered(n: usize, m: usize) -> FiberedChart {
        FiberedChart::new(&Chart::standard("x", n, Field::Rational), &Chart::standard("y", m, Field::Rational)).unwrap()
    }

    fn reflection(n: usize) -> AffineMap {
        let mut a = crate::ring::linalg::identity(n);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = int(-1);
        }
        AffineMap::linear_map(a).unwrap()
    }

    pub(crate) fn order_two_model() -> GroupoidRepModel {
        let f = fibered(2, 1);
        let base = f.base();
        let g = FPGroup::new(&["s"], &["s^2"]).unwrap();
        let lift = FiberedMap::new(&f, reflection(2), MatrixPoly::identity(1, 2), vec![base.parse("x1 + x2").unwrap()])
            .unwrap();
        let action = GroupoidActionModel::new(&g, &f, vec![lift]).unwrap();
        let total = f.total();
        let q = total.parse("x1^2 + 2*y1 + x1 + x2").unwrap();
        let rho =
            MatrixPoly::from_rows(vec![vec![total.constant(int(-1)), total.zero()], vec![q, total.one()]], 3).unwrap();
        GroupoidRepModel::new(&action, 2, vec![rho]).unwrap()
    }

    #[test]
    fn fibered_map_algebra() {
        let f = fibered(1, 2);
        let b = f.base();
        let t = MatrixPoly::from_rows(vec![vec![b.one(), b.var(0)], vec![b.zero(), b.one()]], 1).unwrap();
        let s = FiberedMap::new(&f, AffineMap::translation(vec![int(2)]), t, vec![b.parse("x1^2").unwrap(), b.one()])
            .unwrap();
        assert!(s.compose(&s.inverse()).is_identity());
        assert!(s.inverse().compose(&s).is_identity());
        let ss = s.compose(&s);
        let direct: Vec<Poly> = s.images(&f).iter().map(|p| p.substitute(&s.images(&f))).collect();
        assert_eq!(ss.images(&f), direct);
    }

    #[test]
    fn action_examples() {
        let f = fibered(2, 1);
        let g = FPGroup::new(&["s"], &["s^2"]).unwrap();
        let trivial =
            GroupoidActionModel::new(&g, &f, vec![FiberedMap::trivial_lift(&f, reflection(2)).unwrap()]).unwrap();
        assert!(check_groupoid_action(&trivial).passed());

        let f1 = fibered(1, 1);
        let z = FPGroup::free(&["a"]).unwrap();
        let lift = FiberedMap::new(
            &f1,
            AffineMap::translation(vec![int(1)]),
            MatrixPoly::identity(1, 1),
            vec![f1.base().var(0)],
        )
        .unwrap();
        assert!(check_groupoid_action(&GroupoidActionModel::new(&z, &f1, vec![lift]).unwrap()).passed());

        let bad = FiberedMap::new(&f, reflection(2), MatrixPoly::identity(1, 2), vec![f.base().one()]).unwrap();
        let r = check_groupoid_action(&GroupoidActionModel::new(&g, &f, vec![bad]).unwrap());
        assert!(!r.passed());
        assert_eq!(r.first_witness().unwrap().residual_text(), vec!["0", "0", "2"]);

        let point = FiberedChart::identity(&Chart::standard("x", 2, Field::Rational));
        let r = check_groupoid_action(
            &GroupoidActionModel::new(&g, &point, vec![FiberedMap::trivial_lift(&point, reflection(2)).unwrap()])
                .unwrap(),
        );
        assert!(r.passed() && r.checks[1].detail.is_some());
    }

    #[test]
    fn order_two_representation() {
        let rep = order_two_model();
        assert!(check_groupoid_rep(&rep).passed());
        assert!(check_bisections(&rep, 3, 3).passed());
        let g = rep.action().group();
        let id = bisection_semilinear(&rep, &Word::identity()).unwrap();
        let psi = Section::parse(rep.bundle(), &["y1", "x1*x2"]).unwrap();
        assert_eq!(id.apply(&psi).unwrap(), psi);
        let s = bisection_semilinear(&rep, &g.parse_word("s").unwrap()).unwrap();
        assert_eq!(s.apply(&s.apply(&psi).unwrap()).unwrap(), psi);
    }

    #[test]
    fn broken_cocycle_fails() {
        let good = order_two_model();
        let total = good.action().fibered().total().clone();
        let rho =
            MatrixPoly::from_rows(vec![vec![total.one(), total.zero()], vec![total.var(2), total.one()]], 3).unwrap();
        let rep = GroupoidRepModel::new(good.action(), 2, vec![rho]).unwrap();
        let r = check_groupoid_rep(&rep);
        assert!(!r.passed());
        assert!(r.first_witness().unwrap().is_nonzero());
        assert!(matches!(bisection_semilinear(&rep, &Word::identity()), Err(Error::CheckFailed(_))));
    }

    #[test]
    fn trivial_rep_is_a_pullback() {
        let f = fibered(1, 1);
        let z = FPGroup::free(&["a"]).unwrap();
        let action = GroupoidActionModel::new(
            &z,
            &f,
            vec![FiberedMap::trivial_lift(&f, AffineMap::translation(vec![int(3)])).unwrap()],
        )
        .unwrap();
        let rep = GroupoidRepModel::new(&action, 1, vec![MatrixPoly::identity(1, 2)]).unwrap();
        let m = bisection_semilinear(&rep, &z.parse_word("a").unwrap()).unwrap();
        let nu = BundleAutomorphism::translation(rep.bundle(), vec![int(3), int(0)]).unwrap();
        let psi = Section::parse(rep.bundle(), &["x1^2*y1 + y1"]).unwrap();
        assert_eq!(m.apply(&psi).unwrap(), nu.act_on_section(&psi).unwrap());
    }
}
