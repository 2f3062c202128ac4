use derivo::algebroid::{doe_algebroid, doe_section};
use derivo::bundle::LinearVectorField;
use derivo::descriptor::{Config, DerivativeOpDesc, Document};
use derivo::geometry::{lie_bracket, Chart};
use derivo::global::BundleAutomorphism;
use derivo::random::{self, PolyShape};
use derivo::ring::{Field, Poly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SHAPE: PolyShape = PolyShape { max_degree: 3, max_terms: 3, coeff_range: 3 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_polynomials_parse_back(seed: u64, n in 1usize..4) {
        let chart = Chart::standard("x", n, Field::Rational);
        let p = random::poly(&mut rng(seed), &chart, SHAPE);
        prop_assert_eq!(chart.parse(&chart.print(&p)).unwrap(), p);
    }

    #[test]
    fn partials_obey_leibniz(seed: u64, n in 1usize..4) {
        let chart = Chart::standard("x", n, Field::Rational);
        let mut r = rng(seed);
        let f = random::poly(&mut r, &chart, SHAPE);
        let g = random::poly(&mut r, &chart, SHAPE);
        for i in 0..n {
            prop_assert_eq!((&f * &g).partial(i), &f.partial(i) * &g + &f * &g.partial(i));
        }
    }

    #[test]
    fn commutator_is_antisymmetric(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 3, 3);
        let d1 = random::derivative_op(&mut r, &e, SHAPE);
        let d2 = random::derivative_op(&mut r, &e, SHAPE);
        prop_assert_eq!(d1.commutator(&d2).unwrap(), d2.commutator(&d1).unwrap().neg());
        prop_assert!(d1.commutator(&d1).unwrap().is_zero());
    }

    #[test]
    fn vector_field_bracket_matches_composition(seed: u64) {
        let mut r = rng(seed);
        let chart = Chart::standard("x", 2, Field::Rational);
        let x = random::vector_field(&mut r, &chart, SHAPE);
        let y = random::vector_field(&mut r, &chart, SHAPE);
        let f = random::poly(&mut r, &chart, SHAPE);
        let br = lie_bracket(&x, &y).unwrap();
        prop_assert_eq!(br.apply(&f), x.apply(&y.apply(&f)) - y.apply(&x.apply(&f)));
    }

    #[test]
    fn doe_bracket_is_antisymmetric(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 2, 2);
        let alg = doe_algebroid(&e);
        let v = doe_section(&random::derivative_op(&mut r, &e, SHAPE));
        let w = doe_section(&random::derivative_op(&mut r, &e, SHAPE));
        let vw = alg.bracket_sections(&v, &w).unwrap();
        let wv: Vec<Poly> = alg.bracket_sections(&w, &v).unwrap().into_iter().map(|p| -p).collect();
        prop_assert_eq!(vw, wv);
    }

    #[test]
    fn automorphisms_form_a_group(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 2, 3);
        let nu = random::automorphism(&mut r, &e, PolyShape::new(2, 2));
        prop_assert!(nu.compose(&nu.inverse()).unwrap().is_identity());
        prop_assert!(nu.inverse().compose(&nu).unwrap().is_identity());
        prop_assert_eq!(BundleAutomorphism::identity(&e).compose(&nu).unwrap(), nu);
    }

    #[test]
    fn automorphism_action_is_linear(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 2, 2);
        let nu = random::automorphism(&mut r, &e, PolyShape::new(1, 2));
        let a = random::section(&mut r, &e, SHAPE);
        let b = random::section(&mut r, &e, SHAPE);
        let lhs = nu.act_on_section(&a.add(&b)).unwrap();
        let rhs = nu.act_on_section(&a).unwrap().add(&nu.act_on_section(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_fields_round_trip(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 2, 2);
        let d = random::derivative_op(&mut r, &e, SHAPE);
        let l = d.linear_field();
        prop_assert_eq!(LinearVectorField::from_total_field(&e, &l.to_total_field()).unwrap().lie_derivation(), d);
    }

    #[test]
    fn operator_documents_round_trip(seed: u64) {
        let mut r = rng(seed);
        let e = random::bundle(&mut r, 3, 2);
        let d = random::derivative_op(&mut r, &e, SHAPE);
        let doc = Document::new("derivative-op", Config::default(), DerivativeOpDesc::from_op(&d));
        let back = Document::parse(&doc.to_text()).unwrap();
        prop_assert_eq!(back.body::<DerivativeOpDesc>().unwrap().build(&back.config).unwrap(), d);
    }
}
