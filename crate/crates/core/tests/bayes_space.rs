//! Algebraic invariants of the Bayes-space inner product.

use proptest::prelude::*;

use bayesproj::bayes::{self, BayesElement, GaussianMeasure};
use bayesproj::QuadratureSpec;

fn poly(c: [f64; 4]) -> BayesElement {
    BayesElement::univariate(move |x| c[0] * x + c[1] * x * x + c[2] * x.powi(3) + c[3] * x.powi(4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_bilinear_and_symmetric(
        a in prop::array::uniform4(-1.0f64..1.0),
        b in prop::array::uniform4(-1.0f64..1.0),
        s in -3.0f64..3.0,
        mean in -2.0f64..2.0,
        var in 0.2f64..3.0,
    ) {
        let nu = GaussianMeasure::univariate(mean, var).unwrap();
        let spec = QuadratureSpec::gauss_hermite(12);
        let (p, q) = (poly(a), poly(b));
        let pq = bayes::inner_product(&p, &q, &nu, &spec).unwrap();
        let qp = bayes::inner_product(&q, &p, &nu, &spec).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-9 * pq.abs().max(1.0));
        let sp = bayes::inner_product(&p.scale(s), &q, &nu, &spec).unwrap();
        prop_assert!((sp - s * pq).abs() <= 1e-9 * sp.abs().max(1.0));
        let sum = bayes::inner_product(&p.add(&q).unwrap(), &q, &nu, &spec).unwrap();
        let qq = bayes::inner_product(&q, &q, &nu, &spec).unwrap();
        prop_assert!((sum - pq - qq).abs() <= 1e-9 * sum.abs().max(1.0));
        prop_assert!(bayes::information(&p, &nu, &spec).unwrap() >= 0.0);
    }

    #[test]
    fn constants_are_the_zero_element(c in -50.0f64..50.0, a in prop::array::uniform4(-1.0f64..1.0)) {
        let nu = GaussianMeasure::standard(1);
        let spec = QuadratureSpec::gauss_hermite(12);
        let p = poly(a);
        let shifted = p.offset(c);
        prop_assert!(shifted.equivalent(&p, &nu));
        let d = bayes::divergence(&shifted, &p, &nu, &spec).unwrap();
        prop_assert!(d.abs() < 1e-9);
    }
}
