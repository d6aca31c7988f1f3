//! Exponentiated Hermite bases.
//!
//! Under a Gaussian measure `N(mean, sd^2)` the elements
//! `h_n = exp(-H_n(xi) / sqrt(n!))` with `xi = (x - mean) / sd` are
//! orthonormal, because the probabilists' Hermite polynomials satisfy
//! `E[H_m H_n] = n! δ_mn` and each has zero mean for `n >= 1`.

use nalgebra::{DMatrix, DVector};

use crate::bayes::{self, BayesElement, GaussianMeasure};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, QuadratureSpec};
use crate::variational::{BasisSet, Coordinates};

/// Probabilists' Hermite polynomial `H_n(xi)` via
/// `H_{n+1} = xi H_n - n H_{n-1}`.
pub fn hermite_poly(n: usize, xi: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, xi);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = xi * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `n!` in floating point; beyond 20 it is accumulated in log space.
pub fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n).map(|k| k as f64).product()
    } else {
        (1..=n).map(|k| (k as f64).ln()).sum::<f64>().exp()
    }
}

/// `phi` of the normalized 1D Hermite element of order `n` and its first two
/// derivatives in `xi`.
fn hermite_exponent(n: usize, xi: f64) -> (f64, f64, f64) {
    let scale = factorial(n).sqrt().recip();
    let value = hermite_poly(n, xi) * scale;
    let d1 = if n >= 1 { n as f64 * hermite_poly(n - 1, xi) * scale } else { 0.0 };
    let d2 = if n >= 2 { (n * (n - 1)) as f64 * hermite_poly(n - 2, xi) * scale } else { 0.0 };
    (value, d1, d2)
}

/// One-dimensional basis `h_1..h_M` orthonormal under its measure.
#[derive(Clone, Debug)]
pub struct HermiteBasis1D {
    order: usize,
    measure: GaussianMeasure,
}

impl HermiteBasis1D {
    pub fn new(order: usize, measure: GaussianMeasure) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("a Hermite basis needs at least one function".into()));
        }
        if measure.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: measure.dim() });
        }
        Ok(Self { order, measure })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn measure(&self) -> &GaussianMeasure {
        &self.measure
    }

    /// Same order, new measure.
    pub fn rebase(&self, measure: GaussianMeasure) -> Result<Self> {
        Self::new(self.order, measure)
    }

    /// `h_n` for `1 <= n <= M`.
    pub fn element(&self, n: usize) -> Result<BayesElement> {
        if n == 0 || n > self.order {
            return Err(Error::IndexOutOfRange { index: n, max: self.order });
        }
        let (m, s) = (self.measure.mean()[0], self.measure.std_dev());
        Ok(BayesElement::univariate(move |x| hermite_exponent(n, (x - m) / s).0)
            .with_gradient(move |x| DVector::from_element(1, hermite_exponent(n, (x[0] - m) / s).1 / s))
            .with_hessian(move |x| DMatrix::from_element(1, 1, hermite_exponent(n, (x[0] - m) / s).2 / (s * s))))
    }

    pub fn elements(&self) -> Vec<BayesElement> {
        (1..=self.order).map(|n| self.element(n).expect("index in range")).collect()
    }

    pub fn basis_set(&self) -> BasisSet {
        BasisSet::new(self.elements(), Some(self.measure.clone()))
    }

    /// `alpha_n = <h_n, p>` under the basis measure.
    pub fn coordinates(&self, p: &BayesElement, spec: &QuadratureSpec) -> Result<Coordinates> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
        }
        let rule = quadrature::gaussian_rule(&self.measure, spec)?;
        let alpha = self
            .elements()
            .iter()
            .map(|h| bayes::inner_product_on(&rule, h, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Coordinates::from_vec(alpha))
    }

    /// Derivative route `alpha_n = sd^n E[d^n phi / dx^n] / sqrt(n!)`, where
    /// `nth_derivative(n, x)` returns the `n`-th derivative of `phi`.
    pub fn coordinates_from_derivatives<D>(&self, nth_derivative: D, spec: &QuadratureSpec) -> Result<Coordinates>
    where
        D: Fn(usize, f64) -> f64,
    {
        let s = self.measure.std_dev();
        let rule = quadrature::gaussian_rule(&self.measure, spec)?;
        let alpha = (1..=self.order)
            .map(|n| {
                let e = rule.expect(|x| nth_derivative(n, x[0]))?;
                Ok(s.powi(n as i32) * e / factorial(n).sqrt())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Coordinates::from_vec(alpha))
    }

    /// `⊕_n alpha_n · h_n`.
    pub fn reconstruct(&self, alpha: &Coordinates) -> Result<BayesElement> {
        if alpha.len() != self.order {
            return Err(Error::DimensionMismatch { expected: self.order, got: alpha.len() });
        }
        let a: Vec<f64> = alpha.as_slice().to_vec();
        let (m, s) = (self.measure.mean()[0], self.measure.std_dev());
        let parts = move |x: f64| {
            let xi = (x - m) / s;
            a.iter().enumerate().fold((0.0, 0.0, 0.0), |acc, (k, &c)| {
                let (v, d1, d2) = hermite_exponent(k + 1, xi);
                (acc.0 + c * v, acc.1 + c * d1 / s, acc.2 + c * d2 / (s * s))
            })
        };
        let (p1, p2, p3) = (parts.clone(), parts.clone(), parts);
        Ok(BayesElement::univariate(move |x| p1(x).0)
            .with_gradient(move |x| DVector::from_element(1, p2(x[0]).1))
            .with_hessian(move |x| DMatrix::from_element(1, 1, p3(x[0]).2)))
    }
}

/// Largest per-dimension order accepted by [`HermiteBasisND`].
pub const MAX_ND_ORDER: usize = 3;
/// Largest dimension accepted by [`HermiteBasisND`].
pub const MAX_ND_DIM: usize = 3;

/// Tensor-product Hermite basis on `R^N` with the constant combination
/// removed, giving `(M + 1)^N - 1` elements in Kronecker order (first
/// coordinate varying slowest).
#[derive(Clone, Debug)]
pub struct HermiteBasisND {
    order: usize,
    measure: GaussianMeasure,
    multi_indices: Vec<Vec<usize>>,
}

impl HermiteBasisND {
    pub fn new(order: usize, measure: GaussianMeasure) -> Result<Self> {
        let dim = measure.dim();
        if order == 0 {
            return Err(Error::InvalidArgument("a Hermite basis needs order at least one".into()));
        }
        if order > MAX_ND_ORDER || dim > MAX_ND_DIM {
            return Err(Error::CapExceeded(format!(
                "multivariate Hermite basis limited to M <= {MAX_ND_ORDER}, N <= {MAX_ND_DIM} (got M = {order}, N = {dim})"
            )));
        }
        let total = (order + 1).pow(dim as u32);
        let multi_indices = (1..total)
            .map(|mut flat| {
                let mut idx = vec![0; dim];
                for slot in idx.iter_mut().rev() {
                    *slot = flat % (order + 1);
                    flat /= order + 1;
                }
                idx
            })
            .collect();
        Ok(Self { order, measure, multi_indices })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn len(&self) -> usize {
        self.multi_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multi_indices.is_empty()
    }

    pub fn measure(&self) -> &GaussianMeasure {
        &self.measure
    }

    /// Per-coordinate orders of each element, in basis order.
    pub fn multi_indices(&self) -> &[Vec<usize>] {
        &self.multi_indices
    }

    pub fn rebase(&self, measure: GaussianMeasure) -> Result<Self> {
        Self::new(self.order, measure)
    }

    /// Element `k` (0-based position in Kronecker order).
    pub fn element(&self, k: usize) -> Result<BayesElement> {
        let idx = self
            .multi_indices
            .get(k)
            .ok_or(Error::IndexOutOfRange { index: k, max: self.len().saturating_sub(1) })?
            .clone();
        let dim = self.dim();
        let mean = self.measure.mean().clone();
        let l_inv = linalg::lower_inverse(self.measure.cholesky());
        // value, gradient and Hessian in xi
        let local = move |xi: &DVector<f64>| {
            let parts: Vec<(f64, f64, f64)> = idx.iter().enumerate().map(|(i, &o)| hermite_exponent(o, xi[i])).collect();
            let prod_except = |skip: &[usize]| -> f64 {
                parts.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, p)| p.0).product()
            };
            let value = prod_except(&[]);
            let grad = DVector::from_fn(dim, |j, _| parts[j].1 * prod_except(&[j]));
            let hess = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    parts[i].2 * prod_except(&[i])
                } else {
                    parts[i].1 * parts[j].1 * prod_except(&[i, j])
                }
            });
            (value, grad, hess)
        };
        let whiten = {
            let (mean, l_inv) = (mean.clone(), l_inv.clone());
            move |x: &DVector<f64>| &l_inv * (x - &mean)
        };
        let (f1, f2, f3) = (local.clone(), local.clone(), local);
        let (w1, w2, w3) = (whiten.clone(), whiten.clone(), whiten);
        let (li2, li3) = (l_inv.clone(), l_inv);
        Ok(BayesElement::new(dim, move |x| f1(&w1(x)).0)
            .with_gradient(move |x| li2.transpose() * f2(&w2(x)).1)
            .with_hessian(move |x| li3.transpose() * f3(&w3(x)).2 * &li3))
    }

    pub fn elements(&self) -> Vec<BayesElement> {
        (0..self.len()).map(|k| self.element(k).expect("index in range")).collect()
    }

    pub fn basis_set(&self) -> BasisSet {
        BasisSet::new(self.elements(), Some(self.measure.clone()))
    }

    pub fn coordinates(&self, p: &BayesElement, spec: &QuadratureSpec) -> Result<Coordinates> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        let rule = quadrature::gaussian_rule(&self.measure, spec)?;
        let alpha = self
            .elements()
            .iter()
            .map(|h| bayes::inner_product_on(&rule, h, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Coordinates::from_vec(alpha))
    }

    pub fn reconstruct(&self, alpha: &Coordinates) -> Result<BayesElement> {
        self.basis_set().combine(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational;

    #[test]
    fn polynomial_values() {
        assert_eq!(hermite_poly(0, 0.37), 1.0);
        assert_eq!(hermite_poly(2, 2.0), 3.0);
        assert_eq!(hermite_poly(4, 1.0), -2.0);
        let x: f64 = 0.8;
        assert!((hermite_poly(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-14);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        let f21 = factorial(21);
        assert!((f21 / 51_090_942_171_709_440_000.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_order_elements_under_standard_measure() {
        let basis = HermiteBasis1D::new(2, GaussianMeasure::standard(1)).unwrap();
        let b1 = basis.element(1).unwrap();
        let b2 = basis.element(2).unwrap();
        for x in [-1.5, 0.0, 0.3, 2.0] {
            assert!((b1.phi1(x) - x).abs() < 1e-15);
            assert!((b2.phi1(x) - (x * x - 1.0) / 2f64.sqrt()).abs() < 1e-14);
        }
        assert!(basis.element(0).is_err());
        assert!(basis.element(3).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let nu = GaussianMeasure::univariate(1.5, 2.5).unwrap();
        let basis = HermiteBasis1D::new(5, nu).unwrap();
        for h in basis.elements() {
            assert!(h.derivative_mismatch(&DVector::from_element(1, 0.7)) < 1e-5);
        }
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        let nd = HermiteBasisND::new(2, GaussianMeasure::new(DVector::from_vec(vec![0.2, -0.4]), cov).unwrap()).unwrap();
        for h in nd.elements() {
            assert!(h.derivative_mismatch(&DVector::from_vec(vec![0.5, 0.1])) < 1e-5);
        }
    }

    #[test]
    fn gram_is_identity_1d() {
        let nu = GaussianMeasure::univariate(-2.0, 0.3).unwrap();
        let basis = HermiteBasis1D::new(6, nu.clone()).unwrap();
        let g = variational::gram(&basis.basis_set(), &nu, &QuadratureSpec::gauss_hermite(40)).unwrap();
        assert!((g - DMatrix::identity(6, 6)).amax() < 1e-8);
    }

    #[test]
    fn kronecker_order_for_two_dims() {
        let nu = GaussianMeasure::standard(2);
        let basis = HermiteBasisND::new(1, nu).unwrap();
        assert_eq!(basis.multi_indices(), &[vec![0, 1], vec![1, 0], vec![1, 1]]);
        let x = DVector::from_vec(vec![0.7, -1.3]);
        let e = basis.elements();
        assert!((e[0].phi(&x) - x[1]).abs() < 1e-15);
        assert!((e[1].phi(&x) - x[0]).abs() < 1e-15);
        assert!((e[2].phi(&x) - x[0] * x[1]).abs() < 1e-15);
        assert_eq!(HermiteBasisND::new(2, GaussianMeasure::standard(2)).unwrap().len(), 8);
        assert!(matches!(HermiteBasisND::new(2, GaussianMeasure::standard(4)), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn gaussian_coordinates_closed_form() {
        let basis = HermiteBasis1D::new(4, GaussianMeasure::standard(1)).unwrap();
        let spec = QuadratureSpec::gauss_hermite(20);
        let (mu, var) = (1.3, 0.6);
        let alpha = basis.coordinates(&BayesElement::normal(mu, var), &spec).unwrap();
        let expected = [-mu / var, 1.0 / (2f64.sqrt() * var), 0.0, 0.0];
        for (a, e) in alpha.as_slice().iter().zip(expected) {
            assert!((a - e).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_route_matches_inner_products() {
        let nu = GaussianMeasure::univariate(0.5, 1.7).unwrap();
        let basis = HermiteBasis1D::new(4, nu).unwrap();
        let spec = QuadratureSpec::gauss_hermite(30);
        // phi = x^4 / 4 + sin(x)
        let p = BayesElement::univariate(|x| 0.25 * x.powi(4) + x.sin());
        let deriv = |n: usize, x: f64| match n {
            1 => x.powi(3) + x.cos(),
            2 => 3.0 * x * x - x.sin(),
            3 => 6.0 * x - x.cos(),
            4 => 6.0 + x.sin(),
            _ => unreachable!(),
        };
        let a = basis.coordinates(&p, &spec).unwrap();
        let b = basis.coordinates_from_derivatives(deriv, &spec).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() <= 1e-5 * y.abs().max(1.0));
        }
    }

    #[test]
    fn reconstruct_round_trip() {
        let nu = GaussianMeasure::univariate(3.0, 4.0).unwrap();
        let basis = HermiteBasis1D::new(5, nu).unwrap();
        let alpha = Coordinates::from_vec(vec![0.3, 1.2, -0.4, 0.05, 0.2]);
        let p = basis.reconstruct(&alpha).unwrap();
        let back = basis.coordinates(&p, &QuadratureSpec::gauss_hermite(30)).unwrap();
        assert!((back.vector() - alpha.vector()).amax() < 1e-8);
        let zero = basis.reconstruct(&Coordinates::zeros(5)).unwrap();
        assert_eq!(zero.phi1(1.7), 0.0);
    }
}
