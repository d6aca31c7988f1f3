//! Bayes-space elements and their vector-space algebra.
//!
//! An element `p = c exp(-phi)` is stored through its negative log `phi`; the
//! constant `c` is never tracked because two elements whose `phi` differ by a
//! constant are the same vector. Addition composes `phi` by summation, scalar
//! multiplication scales it, and the zero vector is any constant function.
//!
//! Inner products are covariances of log-densities under a measure, so they
//! are blind to the additive constants as well.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, QuadratureSpec, Rule};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A member of B², represented by its negative log `phi`.
#[derive(Clone)]
pub struct BayesElement {
    dim: usize,
    phi: ScalarFn,
    grad: Option<GradientFn>,
    hess: Option<HessianFn>,
}

impl fmt::Debug for BayesElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BayesElement")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

/// Finite-difference step `eps^(1/3) * max(1, |x|)`.
fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

impl BayesElement {
    pub fn new<F>(dim: usize, phi: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        assert!(dim > 0, "Bayes-space elements need a positive dimension");
        Self { dim, phi: Arc::new(phi), grad: None, hess: None }
    }

    /// One-dimensional element from a scalar `phi`.
    pub fn univariate<F>(phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, move |x: &DVector<f64>| phi(x[0]))
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian<H>(mut self, hess: H) -> Self
    where
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(hess));
        self
    }

    /// The zero vector (`phi = 0`).
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_| 0.0)
            .with_gradient(move |_| DVector::zeros(dim))
            .with_hessian(move |_| DMatrix::zeros(dim, dim))
    }

    /// `exp(-1/2 (x - mean)^T info (x - mean))`; `info` may be indefinite.
    pub fn quadratic(mean: DVector<f64>, info: DMatrix<f64>) -> Self {
        let dim = mean.len();
        let (m1, i1) = (mean.clone(), info.clone());
        let (m2, i2) = (mean, info.clone());
        Self::new(dim, move |x| {
            let d = x - &m1;
            0.5 * d.dot(&(&i1 * &d))
        })
        .with_gradient(move |x| &i2 * (x - &m2))
        .with_hessian(move |_| info.clone())
    }

    /// Gaussian `N(mean, cov)` as an element (unnormalized).
    pub fn gaussian(mean: DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        let cov = linalg::checked_symmetric(cov, 1e-12)?;
        let info = linalg::spd_inverse(&cov)?;
        Ok(Self::quadratic(mean, info))
    }

    /// Univariate Gaussian `N(mean, var)`.
    pub fn normal(mean: f64, var: f64) -> Self {
        assert!(var > 0.0, "variance must be positive");
        Self::quadratic(DVector::from_element(1, mean), DMatrix::from_element(1, 1, 1.0 / var))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, x: &DVector<f64>) -> f64 {
        (self.phi)(x)
    }

    /// Convenience evaluation for one-dimensional elements.
    pub fn phi1(&self, x: f64) -> f64 {
        (self.phi)(&DVector::from_element(1, x))
    }

    /// `ln p(x)` up to the irrelevant constant, i.e. `-phi(x)`.
    pub fn ln(&self, x: &DVector<f64>) -> f64 {
        -(self.phi)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.hess.is_some()
    }

    /// Gradient of `phi`; central differences when no analytic callback.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        fd_gradient(&*self.phi, x)
    }

    /// Hessian of `phi`; central differences of the gradient when no
    /// analytic callback.
    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        if let Some(h) = &self.hess {
            return h(x);
        }
        let n = self.dim;
        let mut hess = DMatrix::<f64>::zeros(n, n);
        if self.grad.is_some() {
            for j in 0..n {
                let h = fd_step(x[j]);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let col = (self.gradient(&xp) - self.gradient(&xm)) / (2.0 * h);
                hess.set_column(j, &col);
            }
        } else {
            // Second differences of phi with a step suited to them.
            let step = |v: f64| f64::EPSILON.powf(0.25) * v.abs().max(1.0);
            let f0 = self.phi(x);
            for i in 0..n {
                let hi = step(x[i]);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += hi;
                xm[i] -= hi;
                hess[(i, i)] = (self.phi(&xp) - 2.0 * f0 + self.phi(&xm)) / (hi * hi);
                for j in (i + 1)..n {
                    let hj = step(x[j]);
                    let eval = |si: f64, sj: f64| {
                        let mut y = x.clone();
                        y[i] += si * hi;
                        y[j] += sj * hj;
                        self.phi(&y)
                    };
                    let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                        / (4.0 * hi * hj);
                    hess[(i, j)] = v;
                    hess[(j, i)] = v;
                }
            }
        }
        linalg::symmetrize(&hess)
    }

    /// Largest relative disagreement between the analytic derivatives (when
    /// present) and central differences of `phi` at `x`.
    pub fn derivative_mismatch(&self, x: &DVector<f64>) -> f64 {
        let mut worst = 0.0_f64;
        if let Some(g) = &self.grad {
            let fd = fd_gradient(&*self.phi, x);
            let an = g(x);
            worst = worst.max((&an - &fd).amax() / an.amax().max(1.0));
        }
        if let Some(h) = &self.hess {
            let an = h(x);
            let fd = match &self.grad {
                Some(g) => {
                    let n = self.dim;
                    let mut m = DMatrix::zeros(n, n);
                    for j in 0..n {
                        let s = fd_step(x[j]);
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[j] += s;
                        xm[j] -= s;
                        m.set_column(j, &((g(&xp) - g(&xm)) / (2.0 * s)));
                    }
                    m
                }
                None => Self::new(self.dim, {
                    let phi = self.phi.clone();
                    move |y| phi(y)
                })
                .hessian(x),
            };
            worst = worst.max((&an - &fd).amax() / an.amax().max(1.0));
        }
        worst
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    /// Vector addition `p ⊕ q`: pointwise product, i.e. `phi_p + phi_q`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let (a, b) = (self.phi.clone(), other.phi.clone());
        let mut out = Self::new(self.dim, move |x| a(x) + b(x));
        if let (Some(ga), Some(gb)) = (self.grad.clone(), other.grad.clone()) {
            out.grad = Some(Arc::new(move |x| ga(x) + gb(x)));
        }
        if let (Some(ha), Some(hb)) = (self.hess.clone(), other.hess.clone()) {
            out.hess = Some(Arc::new(move |x| ha(x) + hb(x)));
        }
        Ok(out)
    }

    /// Scalar multiplication `a · p`: powering, i.e. `a * phi`.
    pub fn scale(&self, a: f64) -> Self {
        let phi = self.phi.clone();
        let mut out = Self::new(self.dim, move |x| a * phi(x));
        if let Some(g) = self.grad.clone() {
            out.grad = Some(Arc::new(move |x| g(x) * a));
        }
        if let Some(h) = self.hess.clone() {
            out.hess = Some(Arc::new(move |x| h(x) * a));
        }
        out
    }

    /// Vector subtraction `p ⊖ q = p ⊕ (-1)·q`.
    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// The same vector with `c` added to `phi` (a different normalization).
    pub fn offset(&self, c: f64) -> Self {
        let phi = self.phi.clone();
        Self { dim: self.dim, phi: Arc::new(move |x| phi(x) + c), grad: self.grad.clone(), hess: self.hess.clone() }
    }

    /// Element whose log is `weight(x) * ln p(x)` for a state-dependent
    /// weight, written `weight · p` with a function-valued coefficient.
    pub fn weighted_by<W>(&self, weight: W) -> Self
    where
        W: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        let phi = self.phi.clone();
        Self::new(self.dim, move |x| weight(x) * phi(x))
    }

    /// Equality up to the additive constant in `phi`.
    ///
    /// Draws 64 points from `nu` (fixed seed) and requires the standard
    /// deviation of `phi_p - phi_q` to be below `1e-8 (1 + mean |phi|)`.
    pub fn equivalent(&self, other: &Self, nu: &GaussianMeasure) -> bool {
        if self.dim != other.dim || self.dim != nu.dim() {
            return false;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut diffs = Vec::with_capacity(64);
        let mut magnitude = 0.0;
        for _ in 0..64 {
            let xi = DVector::from_fn(self.dim, |_, _| StandardNormal.sample(&mut rng));
            let x = nu.transform(&xi);
            let (a, b) = (self.phi(&x), other.phi(&x));
            if !a.is_finite() || !b.is_finite() {
                return false;
            }
            magnitude += 0.5 * (a.abs() + b.abs());
            diffs.push(a - b);
        }
        magnitude /= 64.0;
        let mean = diffs.iter().sum::<f64>() / 64.0;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 64.0;
        var.sqrt() < 1e-8 * (1.0 + magnitude)
    }
}

fn fd_gradient(phi: &(dyn Fn(&DVector<f64>) -> f64 + Send + Sync), x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (phi(&xp) - phi(&xm)) / (2.0 * h);
    }
    g
}

/// A Gaussian measure `N(mean, covariance)` with its cached Cholesky factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    cholesky: DMatrix<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: covariance.nrows() });
        }
        let covariance = linalg::checked_symmetric(&covariance, 1e-12)?;
        let cholesky = linalg::cholesky_lower(&covariance)?;
        Ok(Self { mean, covariance, cholesky })
    }

    pub fn univariate(mean: f64, var: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(DVector::zeros(dim), DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    /// Measure from information form `N(mean, info^-1)`.
    pub fn from_information(mean: DVector<f64>, info: &DMatrix<f64>) -> Result<Self> {
        let cov = linalg::spd_inverse(&linalg::checked_symmetric(info, 1e-9)?)?;
        Self::new(mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Lower-triangular `L` with `L L^T = covariance`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.cholesky
    }

    /// Standard deviation of a one-dimensional measure.
    pub fn std_dev(&self) -> f64 {
        self.cholesky[(0, 0)]
    }

    /// Reparameterization `x = mean + L xi`.
    pub fn transform(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.mean + &self.cholesky * xi
    }

    /// Whitening `xi = L^-1 (x - mean)`.
    pub fn whiten(&self, x: &DVector<f64>) -> DVector<f64> {
        linalg::forward_substitute(&self.cholesky, &(x - &self.mean))
    }

    /// The measure as a Bayes-space element.
    pub fn to_element(&self) -> BayesElement {
        let info = linalg::spd_inverse(&self.covariance).expect("covariance is SPD");
        BayesElement::quadratic(self.mean.clone(), info)
    }

    /// Normalized density value.
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        let xi = self.whiten(x);
        let log_det: f64 = (0..self.dim()).map(|i| self.cholesky[(i, i)].ln()).sum();
        let n = self.dim() as f64;
        (-0.5 * xi.norm_squared() - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()).exp()
    }
}

/// A normalized element: `density(x) = exp(log_normalizer - phi(x))`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub element: BayesElement,
    /// `ln c` with `c^-1 = ∫ exp(-phi)`.
    pub log_normalizer: f64,
}

impl Normalized {
    pub fn normalizing_constant(&self) -> f64 {
        self.log_normalizer.exp()
    }

    pub fn density(&self, x: &DVector<f64>) -> f64 {
        (self.log_normalizer - self.element.phi(x)).exp()
    }

    pub fn density1(&self, x: f64) -> f64 {
        (self.log_normalizer - self.element.phi1(x)).exp()
    }

    /// `ln` of the normalized density.
    pub fn ln_density(&self, x: &DVector<f64>) -> f64 {
        self.log_normalizer - self.element.phi(x)
    }
}

/// Normalization operator: integrates `exp(-phi)` on the spec's grid.
///
/// Fails with [`Error::NotNormalizable`] when the integral is not finite or
/// when the integrand has not decayed at the grid boundary, which signals
/// mass escaping to infinity.
pub fn normalize(p: &BayesElement, spec: &QuadratureSpec) -> Result<Normalized> {
    let log_integral = quadrature::log_integral(p, spec)?;
    Ok(Normalized { element: p.clone(), log_normalizer: -log_integral })
}

/// Inner product `E_nu[ln p ln q] - E_nu[ln p] E_nu[ln q]`.
pub fn inner_product(p: &BayesElement, q: &BayesElement, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<f64> {
    check_measure_dim(p, nu.dim())?;
    check_measure_dim(q, nu.dim())?;
    let rule = quadrature::gaussian_rule(nu, spec)?;
    inner_product_on(&rule, p, q)
}

/// Inner product under an already constructed rule.
pub fn inner_product_on(rule: &Rule, p: &BayesElement, q: &BayesElement) -> Result<f64> {
    let a = rule.values(|x| p.phi(x))?;
    let b = rule.values(|x| q.phi(x))?;
    Ok(rule.covariance(&a, &b))
}

/// Information `I(p) = <p, p> / 2`.
pub fn information(p: &BayesElement, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<f64> {
    Ok(0.5 * inner_product(p, p, nu, spec)?)
}

/// Divergence `I(p ⊖ q)`.
pub fn divergence(p: &BayesElement, q: &BayesElement, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<f64> {
    let d = p.subtract(q)?;
    information(&d, nu, spec)
}

/// Divergence under an already constructed rule.
pub fn divergence_on(rule: &Rule, p: &BayesElement, q: &BayesElement) -> Result<f64> {
    let a = rule.values(|x| p.phi(x) - q.phi(x))?;
    Ok(0.5 * rule.covariance(&a, &a))
}

/// Stochastic partial derivative by central differences:
/// `(1 / 2 step) · (p(θ + step) ⊖ p(θ - step))`.
pub fn stochastic_derivative<F>(family: F, theta: f64, step: f64) -> Result<BayesElement>
where
    F: Fn(f64) -> Result<BayesElement>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let plus = family(theta + step)?;
    let minus = family(theta - step)?;
    Ok(plus.subtract(&minus)?.scale(0.5 / step))
}

fn check_measure_dim(p: &BayesElement, dim: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gh() -> QuadratureSpec {
        QuadratureSpec::gauss_hermite(20)
    }

    fn std1() -> GaussianMeasure {
        GaussianMeasure::standard(1)
    }

    #[test]
    fn sum_of_standard_normals_halves_variance() {
        let p = BayesElement::normal(0.0, 1.0);
        let sum = p.add(&p).unwrap();
        assert!(sum.equivalent(&BayesElement::normal(0.0, 0.5), &std1()));
    }

    #[test]
    fn zero_is_additive_identity_and_inverse_cancels() {
        let p = BayesElement::normal(1.5, 2.0);
        let zero = BayesElement::zero(1);
        assert!(p.add(&zero).unwrap().equivalent(&p, &std1()));
        assert!(p.scale(-1.0).add(&p).unwrap().equivalent(&zero, &std1()));
        assert!(p.scale(0.0).equivalent(&zero, &std1()));
        assert!(p.subtract(&p).unwrap().equivalent(&zero, &std1()));
    }

    #[test]
    fn powering_a_gaussian_halves_its_variance() {
        let p = BayesElement::normal(3.0, 4.0);
        assert!(p.scale(2.0).equivalent(&BayesElement::normal(3.0, 2.0), &std1()));
    }

    #[test]
    fn subtraction_of_gaussians() {
        let d = BayesElement::normal(0.0, 1.0).subtract(&BayesElement::normal(0.0, 2.0)).unwrap();
        // x^2/2 - x^2/4 = x^2/4
        for x in [-2.0, 0.3, 1.7] {
            assert!((d.phi1(x) - x * x / 4.0).abs() < 1e-14);
        }
        assert!(d.equivalent(&BayesElement::normal(0.0, 2.0), &std1()));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = BayesElement::zero(1);
        let b = BayesElement::zero(2);
        assert_eq!(a.add(&b).unwrap_err(), Error::DimensionMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn constant_offset_is_equivalent() {
        let p = BayesElement::normal(1.0, 3.0);
        assert!(p.offset(42.0).equivalent(&p, &std1()));
        assert!(!p.equivalent(&BayesElement::normal(1.1, 3.0), &std1()));
    }

    #[test]
    fn normalizes_standard_normal() {
        let p = BayesElement::univariate(|x| 0.5 * x * x);
        let spec = QuadratureSpec::grid(4001, vec![(-12.0, 12.0)]);
        let n = normalize(&p, &spec).unwrap();
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((n.normalizing_constant() - expected).abs() < 1e-12);
    }

    #[test]
    fn exponential_ramp_is_not_normalizable() {
        let b1 = BayesElement::univariate(|x| -x);
        let spec = QuadratureSpec::grid(2001, vec![(-10.0, 10.0)]);
        assert!(matches!(normalize(&b1, &spec), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn inner_product_with_zero_vanishes() {
        let p = BayesElement::normal(0.7, 1.3);
        let v = inner_product(&p, &BayesElement::zero(1), &std1(), &gh()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn gaussian_inner_product_closed_form() {
        let p = BayesElement::normal(1.0, 2.0);
        let v = inner_product(&p, &p, &std1(), &gh()).unwrap();
        assert!((v - 0.375).abs() < 1e-12);
        assert!((information(&p, &std1(), &gh()).unwrap() - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_symmetric_and_zero_on_self() {
        let p = BayesElement::normal(0.5, 1.5);
        let q = BayesElement::normal(-0.2, 0.7);
        let nu = std1();
        assert!(divergence(&p, &p, &nu, &gh()).unwrap().abs() < 1e-15);
        let a = divergence(&p, &q, &nu, &gh()).unwrap();
        let b = divergence(&q, &p, &nu, &gh()).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn stochastic_derivative_of_location_family() {
        let theta = 0.8;
        let d = stochastic_derivative(|t| Ok(BayesElement::normal(t, 1.0)), theta, 1e-3).unwrap();
        // d/dmu of (x - mu)^2 / 2 is -(x - mu)
        let expected = BayesElement::univariate(move |x| -(x - theta));
        assert!(d.equivalent(&expected, &std1()));
    }

    #[test]
    fn stochastic_derivative_of_constant_and_linear_families() {
        let p = BayesElement::normal(0.3, 0.9);
        let q = p.clone();
        let d = stochastic_derivative(move |_| Ok(q.clone()), 1.0, 1e-2).unwrap();
        assert!(d.equivalent(&BayesElement::zero(1), &std1()));
        let q = p.clone();
        let d = stochastic_derivative(move |t| Ok(q.scale(t)), 2.0, 1e-2).unwrap();
        assert!(d.equivalent(&p, &std1()));
    }

    #[test]
    fn finite_difference_derivatives_match_analytic() {
        let p = BayesElement::univariate(|x| x.powi(4) / 4.0 + x.sin())
            .with_gradient(|x| DVector::from_element(1, x[0].powi(3) + x[0].cos()))
            .with_hessian(|x| DMatrix::from_element(1, 1, 3.0 * x[0] * x[0] - x[0].sin()));
        for x in [-1.5, 0.2, 2.5] {
            assert!(p.derivative_mismatch(&DVector::from_element(1, x)) < 1e-5);
        }
        let bare = BayesElement::new(2, |x| x[0] * x[0] * x[1] + x[1].exp());
        let x = DVector::from_vec(vec![0.4, -0.3]);
        let h = bare.hessian(&x);
        let exact = DMatrix::from_row_slice(2, 2, &[2.0 * x[1], 2.0 * x[0], 2.0 * x[0], x[1].exp()]);
        assert!((h - exact).amax() < 1e-5);
    }
}
