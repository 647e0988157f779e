//! Randomized structural properties.

use nlpearson::bernstein::BernsteinDescriptor;
use nlpearson::pearson::{make_family, FamilySpec, PolynomialSystem};
use nlpearson::relaxation::RelaxationEvaluator;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn relaxation_is_a_decreasing_probability(a in 0.15f64..0.95, t in 0.01f64..5.0, l in 0.0f64..8.0, dl in 0.01f64..2.0) {
        let ev = RelaxationEvaluator::new(BernsteinDescriptor::stable(a).unwrap());
        let (e1, e2) = (ev.eigenfunction(t, l).unwrap(), ev.eigenfunction(t, l + dl).unwrap());
        prop_assert!(e1 > 0.0 && e1 <= 1.0 + 1e-12);
        prop_assert!(e2 < e1);
    }

    #[test]
    fn tempered_exponent_is_increasing_and_subadditive(a in 0.1f64..0.95, th in 0.1f64..3.0, x in 0.0f64..20.0, y in 0.0f64..20.0) {
        let d = BernsteinDescriptor::tempered_stable(a, th).unwrap();
        let (px, py, pxy) = (d.eval_phi(x).unwrap(), d.eval_phi(y).unwrap(), d.eval_phi(x + y).unwrap());
        prop_assert!(pxy >= px.max(py) - 1e-12);
        prop_assert!(pxy <= px + py + 1e-12);
    }

    #[test]
    fn jacobi_polynomials_are_eigenfunctions(a in -0.9f64..4.0, b in -0.9f64..4.0, theta in 0.2f64..3.0) {
        let f = make_family(FamilySpec::Jacobi { theta, a, b }).unwrap();
        let ps = PolynomialSystem::new(&f, 8).unwrap();
        for n in 0..=8 {
            let q = ps.polynomial(n).unwrap();
            let lam = ps.eigenvalue(n).unwrap();
            let r = f.generator_poly(&q).add(&q.scale(lam));
            let scale = q.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs())) * lam.max(1.0);
            prop_assert!(r.coeffs().iter().all(|c| c.abs() <= 1e-10 * scale));
        }
    }

    #[test]
    fn cir_quantile_inverts_the_cdf(a in 0.2f64..4.0, b in 0.2f64..6.0, u in 0.001f64..0.999) {
        let f = make_family(FamilySpec::Cir { theta: 1.0, a, b }).unwrap();
        let x = f.quantile(u);
        prop_assert!((f.cdf(x) - u).abs() < 1e-8);
    }
}
