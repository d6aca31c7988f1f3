//! Stein-type identities for the standard normal measure.
//!
//! For smooth `f`, `E[H_n(xi) f(xi)] = E[f^(n)(xi)]` and its one-step form
//! `E[H_{n+1} f] = E[H_n f']`. The multivariate statement replaces `H_n` by a
//! product of per-coordinate Hermite polynomials and the derivative by the
//! matching mixed partial. These checks return both sides so callers can
//! compare them at whatever tolerance suits the integrand.

use nalgebra::DVector;

use crate::error::Result;
use crate::hermite::hermite_poly;
use crate::quadrature::{gauss_hermite_rule, standard_normal_rule, QuadratureSpec};

/// A scalar function with derivatives of every order.
pub trait SmoothFunction {
    fn value(&self, xi: f64) -> f64;
    fn derivative(&self, order: usize, xi: f64) -> f64;
}

/// Univariate polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `xi^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self { coeffs: vec![0.0] };
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Self { coeffs }
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.differentiate())
    }
}

impl SmoothFunction for Polynomial {
    fn value(&self, xi: f64) -> f64 {
        self.eval(xi)
    }

    fn derivative(&self, order: usize, xi: f64) -> f64 {
        self.nth_derivative(order).eval(xi)
    }
}

/// Wraps a plain closure and supplies derivatives by nested central
/// differences. Adequate for low orders on well-scaled functions.
pub struct FiniteDifference<F> {
    f: F,
    step: f64,
}

impl<F: Fn(f64) -> f64> FiniteDifference<F> {
    pub fn new(f: F, step: f64) -> Self {
        Self { f, step }
    }

    fn nth(&self, order: usize, xi: f64) -> f64 {
        if order == 0 {
            return (self.f)(xi);
        }
        let h = self.step;
        (self.nth(order - 1, xi + h) - self.nth(order - 1, xi - h)) / (2.0 * h)
    }
}

impl<F: Fn(f64) -> f64> SmoothFunction for FiniteDifference<F> {
    fn value(&self, xi: f64) -> f64 {
        (self.f)(xi)
    }

    fn derivative(&self, order: usize, xi: f64) -> f64 {
        self.nth(order, xi)
    }
}

fn standard_1d(spec: &QuadratureSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_hermite_rule(spec.nodes_per_dim)
}

/// `(E[H_n f], E[f^(n)])` under `N(0, 1)`.
pub fn stein_check(f: &dyn SmoothFunction, n: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let (xs, ws) = standard_1d(spec)?;
    let lhs = xs.iter().zip(&ws).map(|(&x, w)| w * hermite_poly(n, x) * f.value(x)).sum();
    let rhs = xs.iter().zip(&ws).map(|(&x, w)| w * f.derivative(n, x)).sum();
    Ok((lhs, rhs))
}

/// `(E[H_{n+1} f], E[H_n f'])` under `N(0, 1)`.
pub fn stein_step_check(f: &dyn SmoothFunction, n: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let (xs, ws) = standard_1d(spec)?;
    let lhs = xs.iter().zip(&ws).map(|(&x, w)| w * hermite_poly(n + 1, x) * f.value(x)).sum();
    let rhs = xs.iter().zip(&ws).map(|(&x, w)| w * hermite_poly(n, x) * f.derivative(1, x)).sum();
    Ok((lhs, rhs))
}

/// Multivariate polynomial as a sum of `coeff * prod_i xi_i^{powers_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPolynomial {
    dim: usize,
    terms: Vec<(f64, Vec<usize>)>,
}

impl MultiPolynomial {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<usize>)>) -> Self {
        assert!(terms.iter().all(|(_, p)| p.len() == dim), "term arity must match dimension");
        Self { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, xi: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, powers)| c * powers.iter().enumerate().map(|(i, &k)| xi[i].powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Mixed partial derivative with `orders[i]` derivatives in coordinate `i`.
    pub fn partial(&self, orders: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(c, powers)| {
                let mut coeff = *c;
                let mut out = powers.clone();
                for (i, &o) in orders.iter().enumerate() {
                    if o > powers[i] {
                        return None;
                    }
                    coeff *= ((powers[i] - o + 1)..=powers[i]).map(|k| k as f64).product::<f64>();
                    out[i] = powers[i] - o;
                }
                Some((coeff, out))
            })
            .collect();
        Self { dim: self.dim, terms }
    }
}

/// `(E[prod_i H_{o_i}(xi_i) f], E[∂^o f])` under `N(0, I)`.
pub fn stein_check_nd(f: &MultiPolynomial, orders: &[usize], spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let rule = standard_normal_rule(f.dim(), spec.nodes_per_dim)?;
    let df = f.partial(orders);
    let lhs = rule.expect(|xi| {
        orders.iter().enumerate().map(|(i, &o)| hermite_poly(o, xi[i])).product::<f64>() * f.eval(xi)
    })?;
    let rhs = rule.expect(|xi| df.eval(xi))?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::gauss_hermite(10)
    }

    #[test]
    fn odd_cases_vanish() {
        let (l, r) = stein_check(&Polynomial::monomial(2), 1, &spec()).unwrap();
        assert!(l.abs() < 1e-12 && r.abs() < 1e-12);
        let (l, r) = stein_check(&Polynomial::monomial(3), 2, &spec()).unwrap();
        assert!(l.abs() < 1e-12 && r.abs() < 1e-12);
    }

    #[test]
    fn quartic_second_order() {
        let (l, r) = stein_check(&Polynomial::monomial(4), 2, &spec()).unwrap();
        assert!((l - 12.0).abs() < 1e-10);
        assert!((r - 12.0).abs() < 1e-10);
    }

    #[test]
    fn one_step_form() {
        let f = Polynomial::new(vec![0.5, -1.0, 2.0, 0.0, 0.25, -0.1, 0.05]);
        for n in 0..4 {
            let (l, r) = stein_step_check(&f, n, &spec()).unwrap();
            assert!((l - r).abs() < 1e-8, "n={n}: {l} vs {r}");
        }
    }

    #[test]
    fn finite_difference_wrapper_tracks_exact_derivatives() {
        let fd = FiniteDifference::new(|x: f64| x.sin() + 0.3 * x * x, 1e-3);
        let (l, r) = stein_check(&fd, 1, &QuadratureSpec::gauss_hermite(30)).unwrap();
        assert!((l - r).abs() < 1e-5);
    }

    #[test]
    fn bivariate_mixed_orders() {
        let f = MultiPolynomial::new(
            2,
            vec![(1.0, vec![2, 2]), (-0.5, vec![3, 1]), (2.0, vec![1, 0]), (0.7, vec![0, 4])],
        );
        for orders in [[1, 0], [0, 1], [1, 1], [2, 0], [2, 1], [2, 2]] {
            let (l, r) = stein_check_nd(&f, &orders, &spec()).unwrap();
            assert!((l - r).abs() < 1e-8, "{orders:?}: {l} vs {r}");
        }
    }
}
