//! Subspace projection and KL minimization by iterative projection.
//!
//! Coordinates of an approximation live in a finite [`BasisSet`]. Projection
//! solves the Gram system `<b, b> alpha = <b, p>` under a measure. The KL
//! functional `KL(q || p)` with `q = normalize(⊕ alpha_m b_m)` has gradient
//! `-<b, p ⊖ q>_q` and a Hessian whose leading term is the Gram matrix under
//! `q`; replacing the Hessian by that term and the measure by the current
//! estimate turns Newton's method into repeated projection.

use nalgebra::{DMatrix, DVector};

use crate::bayes::{self, BayesElement, GaussianMeasure, Normalized};
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianBasis, GaussianCoordinates, IndefGaussian};
use crate::hermite::HermiteBasis1D;
use crate::linalg;
use crate::quadrature::{self, QuadratureSpec, Rule};

/// Fourier coefficients of an element in a subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Coordinates(DVector<f64>);

impl Coordinates {
    pub fn new(alpha: DVector<f64>) -> Result<Self> {
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("coordinates must be finite".into()));
        }
        Ok(Self(alpha))
    }

    pub fn from_vec(alpha: Vec<f64>) -> Self {
        Self(DVector::from_vec(alpha))
    }

    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// Measure under which inner products are evaluated.
#[derive(Clone, Debug)]
pub enum Measure {
    Gaussian(GaussianMeasure),
    /// A normalized non-Gaussian density, integrated on a grid.
    Density(Normalized),
}

impl Measure {
    pub fn rule(&self, spec: &QuadratureSpec) -> Result<Rule> {
        match self {
            Measure::Gaussian(g) => quadrature::gaussian_rule(g, spec),
            Measure::Density(d) => quadrature::density_rule(&d.element, spec),
        }
    }
}

/// An ordered list of elements, optionally tagged with the measure they were
/// built to be orthonormal against.
#[derive(Clone, Debug)]
pub struct BasisSet {
    elements: Vec<BayesElement>,
    measure: Option<GaussianMeasure>,
}

impl BasisSet {
    pub fn new(elements: Vec<BayesElement>, measure: Option<GaussianMeasure>) -> Self {
        assert!(!elements.is_empty(), "a basis needs at least one element");
        let dim = elements[0].dim();
        assert!(elements.iter().all(|e| e.dim() == dim), "basis elements must share a dimension");
        Self { elements, measure }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn elements(&self) -> &[BayesElement] {
        &self.elements
    }

    pub fn measure(&self) -> Option<&GaussianMeasure> {
        self.measure.as_ref()
    }

    /// `⊕_m alpha_m · b_m`.
    pub fn combine(&self, alpha: &Coordinates) -> Result<BayesElement> {
        if alpha.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: alpha.len() });
        }
        let dim = self.dim();
        let a = alpha.vector().clone();
        let parts = self.elements.clone();
        let (a1, p1) = (a.clone(), parts.clone());
        let mut out = BayesElement::new(dim, move |x| p1.iter().zip(a1.iter()).map(|(b, c)| c * b.phi(x)).sum());
        if self.elements.iter().all(|b| b.has_gradient()) {
            let (a2, p2) = (a.clone(), parts.clone());
            out = out.with_gradient(move |x| {
                p2.iter().zip(a2.iter()).fold(DVector::zeros(dim), |acc, (b, c)| acc + b.gradient(x) * *c)
            });
        }
        if self.elements.iter().all(|b| b.has_hessian()) {
            out = out.with_hessian(move |x| {
                parts.iter().zip(a.iter()).fold(DMatrix::zeros(dim, dim), |acc, (b, c)| acc + b.hessian(x) * *c)
            });
        }
        Ok(out)
    }

    fn sampled(&self, rule: &Rule) -> Result<Vec<Vec<f64>>> {
        self.elements.iter().map(|b| rule.values(|x| b.phi(x))).collect()
    }
}

/// Gram matrix `<b_m, b_n>` under a prepared rule.
pub fn gram_on(rule: &Rule, basis: &BasisSet) -> Result<DMatrix<f64>> {
    let vals = basis.sampled(rule)?;
    let m = basis.len();
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = rule.covariance(&vals[i], &vals[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

pub fn gram(basis: &BasisSet, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    gram_on(&quadrature::gaussian_rule(nu, spec)?, basis)
}

/// `<b, p>` under a prepared rule.
pub fn inner_products_on(rule: &Rule, basis: &BasisSet, p: &BayesElement) -> Result<DVector<f64>> {
    let target = rule.values(|x| p.phi(x))?;
    let vals = basis.sampled(rule)?;
    Ok(DVector::from_iterator(basis.len(), vals.iter().map(|v| rule.covariance(v, &target))))
}

pub fn inner_products(
    basis: &BasisSet,
    p: &BayesElement,
    nu: &GaussianMeasure,
    spec: &QuadratureSpec,
) -> Result<DVector<f64>> {
    inner_products_on(&quadrature::gaussian_rule(nu, spec)?, basis, p)
}

/// Projection coordinates `<b, b>^-1 <b, p>` under a prepared rule.
pub fn project_on(rule: &Rule, p: &BayesElement, basis: &BasisSet) -> Result<Coordinates> {
    let g = gram_on(rule, basis)?;
    let c = inner_products_on(rule, basis, p)?;
    Coordinates::new(linalg::gram_solve(&g, &c)?)
}

pub fn project(p: &BayesElement, basis: &BasisSet, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<Coordinates> {
    project_on(&quadrature::gaussian_rule(nu, spec)?, p, basis)
}

/// Applies the projection kernel `Q = b> <b, b>^-1 <b` to `p`.
pub fn kernel_apply(basis: &BasisSet, nu: &GaussianMeasure, p: &BayesElement, spec: &QuadratureSpec) -> Result<BayesElement> {
    let rule = quadrature::gaussian_rule(nu, spec)?;
    let g = gram_on(&rule, basis)?;
    let m = basis.len();
    let mut kernel = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut e = DVector::zeros(m);
        e[j] = 1.0;
        kernel.set_column(j, &linalg::gram_solve(&g, &e)?);
    }
    let c = inner_products_on(&rule, basis, p)?;
    let weights = kernel * c;
    let elements = basis.elements().to_vec();
    Ok(BayesElement::new(basis.dim(), move |x| {
        elements.iter().zip(weights.iter()).map(|(b, w)| w * b.phi(x)).sum()
    }))
}

/// `KL(q || p)` with both densities normalized on the spec's grid.
pub fn kl(q: &BayesElement, p: &BayesElement, spec: &QuadratureSpec) -> Result<f64> {
    let rule = quadrature::density_rule(q, spec)?;
    let ln_zq = quadrature::log_integral(q, spec)?;
    let ln_zp = quadrature::log_integral(p, spec)?;
    let diff = rule.values(|x| p.phi(x) - q.phi(x))?;
    Ok(rule.mean(&diff) + ln_zp - ln_zq)
}

/// KL value, gradient and both Hessian forms in coordinates.
#[derive(Clone, Debug)]
pub struct KlDerivatives {
    pub value: f64,
    pub gradient: DVector<f64>,
    /// Gram plus correction with the product elements `b_mn`.
    pub hessian: DMatrix<f64>,
    /// `(1 - KL) G - <b_n, (d ln q / d alpha_m) · (p ⊖ q)>`.
    pub hessian_fisher_form: DMatrix<f64>,
    /// Gram matrix under `q`.
    pub gram: DMatrix<f64>,
}

/// Evaluates KL and its coordinate derivatives at `alpha`, with
/// `q = normalize(⊕ alpha_m b_m)` integrated on the spec's grid.
pub fn kl_derivatives(alpha: &Coordinates, basis: &BasisSet, p: &BayesElement, spec: &QuadratureSpec) -> Result<KlDerivatives> {
    let q = basis.combine(alpha)?;
    let rule = quadrature::density_rule(&q, spec)?;
    let ln_zq = quadrature::log_integral(&q, spec)?;
    let ln_zp = quadrature::log_integral(p, spec)?;
    let m = basis.len();
    // ln b_m = -phi_m; the log-ratio uses normalized densities
    let ln_b: Vec<Vec<f64>> = basis
        .sampled(&rule)?
        .into_iter()
        .map(|v| v.into_iter().map(|x| -x).collect())
        .collect();
    let ln_ratio = rule.values(|x| (q.phi(x) + ln_zq) - (p.phi(x) + ln_zp))?;
    let value = -rule.mean(&ln_ratio);
    let means: Vec<f64> = ln_b.iter().map(|v| rule.mean(v)).collect();
    let gradient = DVector::from_iterator(m, ln_b.iter().map(|v| -rule.covariance(v, &ln_ratio)));
    let mut g = DMatrix::zeros(m, m);
    let mut h = DMatrix::zeros(m, m);
    let mut h8 = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = rule.covariance(&ln_b[i], &ln_b[j]);
        }
    }
    for i in 0..m {
        let score: Vec<f64> = ln_b[i].iter().map(|v| v - means[i]).collect();
        let weighted: Vec<f64> = score.iter().zip(&ln_ratio).map(|(s, r)| s * r).collect();
        for j in 0..m {
            let mixed: Vec<f64> = ln_b[i]
                .iter()
                .zip(&ln_b[j])
                .map(|(a, b)| -a * b + means[j] * a + means[i] * b)
                .collect();
            h[(i, j)] = g[(i, j)] + rule.covariance(&mixed, &ln_ratio);
            h8[(i, j)] = (1.0 - value) * g[(i, j)] - rule.covariance(&ln_b[j], &weighted);
        }
    }
    Ok(KlDerivatives { value, gradient, hessian: linalg::symmetrize(&h), hessian_fisher_form: h8, gram: g })
}

/// `-<b, p ⊖ q>_q`.
pub fn kl_gradient(alpha: &Coordinates, basis: &BasisSet, p: &BayesElement, spec: &QuadratureSpec) -> Result<DVector<f64>> {
    Ok(kl_derivatives(alpha, basis, p, spec)?.gradient)
}

pub fn kl_hessian(alpha: &Coordinates, basis: &BasisSet, p: &BayesElement, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    Ok(kl_derivatives(alpha, basis, p, spec)?.hessian)
}

/// Derivative of `<p, q>_nu` with respect to coordinate `index` of the
/// measure `nu = normalize(⊕ alpha_m b_m)`:
/// `<p, s_n · q>_nu - E_nu[ln q] <b_n, p>_nu` with `s_n = ln b_n - E_nu[ln b_n]`.
pub fn measure_derivative_ip(
    p: &BayesElement,
    q: &BayesElement,
    basis: &BasisSet,
    alpha: &Coordinates,
    index: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if index >= basis.len() {
        return Err(Error::IndexOutOfRange { index, max: basis.len() - 1 });
    }
    let rule = quadrature::density_rule(&basis.combine(alpha)?, spec)?;
    let b = &basis.elements()[index];
    let ln_b = rule.values(|x| -b.phi(x))?;
    let mean_b = rule.mean(&ln_b);
    let ln_p = rule.values(|x| -p.phi(x))?;
    let ln_q = rule.values(|x| -q.phi(x))?;
    let scaled_q: Vec<f64> = ln_b.iter().zip(&ln_q).map(|(s, v)| (s - mean_b) * v).collect();
    Ok(rule.covariance(&ln_p, &scaled_q) - rule.mean(&ln_q) * rule.covariance(&ln_b, &ln_p))
}

/// `<p, q>_nu` with `nu = normalize(⊕ alpha_m b_m)` on the spec's grid.
pub fn inner_product_under_coordinates(
    p: &BayesElement,
    q: &BayesElement,
    basis: &BasisSet,
    alpha: &Coordinates,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let rule = quadrature::density_rule(&basis.combine(alpha)?, spec)?;
    bayes::inner_product_on(&rule, p, q)
}

/// Fisher information `J^T <b, b> J` for a parameterization with Jacobian
/// `J = d alpha / d theta`.
pub fn fim(basis: &BasisSet, nu: &GaussianMeasure, jacobian: &DMatrix<f64>, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    if jacobian.nrows() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), got: jacobian.nrows() });
    }
    if jacobian.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("Jacobian must be finite".into()));
    }
    let g = gram(basis, nu, spec)?;
    Ok(jacobian.transpose() * g * jacobian)
}

/// Covariance of the scores `d ln q / d alpha` under `q` itself, with the
/// scores taken by central differences of the grid-normalized log density.
pub fn score_covariance(basis: &BasisSet, alpha: &Coordinates, spec: &QuadratureSpec, step: f64) -> Result<DMatrix<f64>> {
    let q = basis.combine(alpha)?;
    let rule = quadrature::density_rule(&q, spec)?;
    let m = basis.len();
    let mut scores = Vec::with_capacity(m);
    for k in 0..m {
        let shifted = |sign: f64| -> Result<Vec<f64>> {
            let mut a = alpha.vector().clone();
            a[k] += sign * step;
            let e = basis.combine(&Coordinates::new(a)?)?;
            let ln_z = quadrature::log_integral(&e, spec)?;
            rule.values(|x| -e.phi(x) - ln_z)
        };
        let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
        scores.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * step)).collect::<Vec<_>>());
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rule.covariance(&scores[i], &scores[j])))
}

/// Approximating subspace for [`iterate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subspace {
    /// One-dimensional Hermite basis with `order` functions, coordinates by
    /// inner products.
    Hermite { order: usize },
    /// The Gaussian subspace in any dimension, coordinates from expected
    /// derivatives.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// Gram-matrix (Fisher) step: plain projection under the current measure.
    Projection,
    /// Full Newton step with the exact KL Hessian on the KL grid.
    Newton,
}

#[derive(Clone, Debug)]
pub struct IterateOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub quadrature: QuadratureSpec,
    /// KL grid points per dimension; defaults to 2001 in 1D, 101 otherwise.
    pub kl_grid_points: Option<usize>,
    pub step: StepRule,
    /// Location of a singularity of `phi` in 1D; measures too close to it
    /// switch from Gauss-Hermite to a grid that excludes it.
    pub pole: Option<f64>,
    /// In 1D, integrate expectations on a grid of `quadrature.nodes_per_dim`
    /// points over `mean ± window sd` of each measure (cut off at `pole`).
    pub window: Option<f64>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 50,
            quadrature: QuadratureSpec::gauss_hermite(20),
            kl_grid_points: None,
            step: StepRule::Projection,
            pole: None,
            window: None,
        }
    }
}

impl IterateOptions {
    fn spec_for(&self, measure: &GaussianMeasure) -> QuadratureSpec {
        if let (Some(w), 1) = (self.window, measure.dim()) {
            return QuadratureSpec::window(measure, w, self.pole, self.quadrature.nodes_per_dim);
        }
        match self.pole {
            Some(pole) if measure.dim() == 1 => {
                let grid_nodes = self.kl_grid_points.unwrap_or(2001);
                QuadratureSpec::avoiding_pole(measure, pole, self.quadrature.nodes_per_dim, grid_nodes)
            }
            _ => self.quadrature.clone(),
        }
    }

    fn kl_spec(&self, initial: &GaussianMeasure) -> QuadratureSpec {
        let n = initial.dim();
        let points = self.kl_grid_points.unwrap_or(if n == 1 { 2001 } else { 101 });
        let bounds = (0..n)
            .map(|i| {
                let s = initial.covariance()[(i, i)].sqrt();
                (initial.mean()[i] - 8.0 * s, initial.mean()[i] + 8.0 * s)
            })
            .collect();
        QuadratureSpec::grid(points, bounds)
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Coordinates of the new estimate in the basis built around `basis_measure`.
    pub coordinates: Coordinates,
    pub basis_measure: GaussianMeasure,
    pub estimate: BayesElement,
    /// Measure for the next iteration.
    pub measure: GaussianMeasure,
    pub kl: f64,
    /// `I(p ⊖ estimate)` under `basis_measure`.
    pub divergence: f64,
    /// `I(p ⊖ previous estimate)` under `basis_measure`.
    pub divergence_before: f64,
    pub step_norm: f64,
    pub kl_increased: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Failed(Error),
}

#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub initial_kl: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    /// Grid on which all KL values were computed.
    pub kl_grid: QuadratureSpec,
}

impl IterationTrace {
    pub fn kl_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.kl).collect()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// True when some step increased the KL value.
    pub fn non_monotone(&self) -> bool {
        self.records.iter().any(|r| r.kl_increased)
    }

    pub fn final_measure(&self) -> Option<&GaussianMeasure> {
        self.records.last().map(|r| &r.measure)
    }
}

/// Basis around the current measure, with the coordinate rule it uses.
enum StepBasis {
    Hermite(HermiteBasis1D),
    Gaussian(GaussianBasis),
}

impl StepBasis {
    fn build(subspace: Subspace, measure: &GaussianMeasure) -> Result<Self> {
        match subspace {
            Subspace::Hermite { order } => {
                if measure.dim() != 1 {
                    return Err(Error::InvalidArgument("Hermite iteration is one-dimensional".into()));
                }
                if order < 2 {
                    return Err(Error::InvalidArgument("Hermite iteration needs at least two functions".into()));
                }
                Ok(Self::Hermite(HermiteBasis1D::new(order, measure.clone())?))
            }
            Subspace::Gaussian => Ok(Self::Gaussian(GaussianBasis::new(measure.clone())?)),
        }
    }

    fn basis_set(&self) -> BasisSet {
        match self {
            Self::Hermite(b) => b.basis_set(),
            Self::Gaussian(b) => b.basis_set(),
        }
    }

    fn measure(&self) -> &GaussianMeasure {
        match self {
            Self::Hermite(b) => b.measure(),
            Self::Gaussian(b) => b.measure(),
        }
    }

    /// Coordinates of `p` in this basis.
    fn coordinates(&self, p: &BayesElement, spec: &QuadratureSpec) -> Result<Coordinates> {
        match self {
            Self::Hermite(b) => b.coordinates(p, spec),
            Self::Gaussian(_) => Ok(gaussian::gaussian_coordinates(p, self.measure(), spec)?.to_coordinates()),
        }
    }

    /// Gaussian part of an estimate with coordinates `alpha`; for the Hermite
    /// basis this keeps the first two coordinates, which coincide with the
    /// Gaussian-basis coordinates in 1D.
    fn gaussian_part(&self, alpha: &Coordinates) -> Result<IndefGaussian> {
        let n = self.measure().dim();
        let head = Coordinates::from_vec(alpha.as_slice()[..n * (n + 3) / 2].to_vec());
        let split = GaussianCoordinates::from_coordinates(&head, n)?;
        IndefGaussian::from_coordinates(&split, self.measure())
    }
}

/// Iterative projection of `p` onto `subspace`, starting from `initial`.
///
/// Failures after the first step end the run and are recorded in the trace's
/// termination; invalid arguments are returned as errors.
pub fn iterate(p: &BayesElement, subspace: Subspace, initial: &GaussianMeasure, opts: &IterateOptions) -> Result<IterationTrace> {
    if p.dim() != initial.dim() {
        return Err(Error::DimensionMismatch { expected: initial.dim(), got: p.dim() });
    }
    StepBasis::build(subspace, initial)?;
    let kl_grid = opts.kl_spec(initial);
    let initial_kl = kl(&initial.to_element(), p, &kl_grid)?;
    let mut trace = IterationTrace { initial_kl, records: Vec::new(), termination: Termination::MaxIterations, kl_grid };
    let mut measure = initial.clone();
    let mut previous = initial.to_element();
    let mut previous_kl = initial_kl;
    for iteration in 1..=opts.max_iters {
        match iterate_step(p, subspace, &measure, &previous, opts, &trace.kl_grid) {
            Ok(mut record) => {
                record.iteration = iteration;
                record.kl_increased = record.kl > previous_kl + 1e-12 * previous_kl.abs().max(1.0);
                previous_kl = record.kl;
                measure = record.measure.clone();
                previous = record.estimate.clone();
                let done = record.step_norm < opts.tol;
                trace.records.push(record);
                if done {
                    trace.termination = Termination::Converged;
                    break;
                }
            }
            Err(e) => {
                trace.termination = Termination::Failed(e);
                break;
            }
        }
    }
    Ok(trace)
}

fn iterate_step(
    p: &BayesElement,
    subspace: Subspace,
    measure: &GaussianMeasure,
    previous: &BayesElement,
    opts: &IterateOptions,
    kl_grid: &QuadratureSpec,
) -> Result<IterationRecord> {
    let spec = opts.spec_for(measure);
    let basis = StepBasis::build(subspace, measure)?;
    let set = basis.basis_set();
    let previous_alpha = basis.coordinates(previous, &spec)?;
    let alpha = match opts.step {
        StepRule::Projection => basis.coordinates(p, &spec)?,
        StepRule::Newton => {
            let d = kl_derivatives(&previous_alpha, &set, p, kl_grid)?;
            let delta = d
                .hessian
                .clone()
                .lu()
                .solve(&d.gradient)
                .ok_or(Error::SingularInformation { condition: linalg::condition_number(&d.hessian) })?;
            Coordinates::new(previous_alpha.vector() - delta)?
        }
    };
    let estimate = set.combine(&alpha)?;
    let next = basis.gaussian_part(&alpha)?.to_measure()?;
    let kl_value = kl(&estimate, p, kl_grid)?;
    let rule = quadrature::gaussian_rule(measure, &spec)?;
    let divergence = bayes::divergence_on(&rule, p, &estimate)?;
    let divergence_before = bayes::divergence_on(&rule, p, previous)?;
    Ok(IterationRecord {
        iteration: 0,
        step_norm: alpha.distance(&previous_alpha),
        coordinates: alpha,
        basis_measure: measure.clone(),
        estimate,
        measure: next,
        kl: kl_value,
        divergence,
        divergence_before,
        kl_increased: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std1() -> GaussianMeasure {
        GaussianMeasure::standard(1)
    }

    #[test]
    fn gram_of_non_orthogonal_pair() {
        let b1 = BayesElement::univariate(|x| x);
        let b2 = BayesElement::univariate(|x| x + x * x);
        let basis = BasisSet::new(vec![b1, b2], None);
        let g = gram(&basis, &std1(), &QuadratureSpec::gauss_hermite(10)).unwrap();
        assert!((g[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((g[(1, 1)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn projection_recovers_members() {
        let b1 = BayesElement::univariate(|x| x);
        let b2 = BayesElement::univariate(|x| x + x * x);
        let basis = BasisSet::new(vec![b1, b2], None);
        let alpha = Coordinates::from_vec(vec![0.7, -0.2]);
        let p = basis.combine(&alpha).unwrap().offset(3.0);
        let got = project(&p, &basis, &std1(), &QuadratureSpec::gauss_hermite(10)).unwrap();
        assert!(got.distance(&alpha) < 1e-12);
    }

    #[test]
    fn residual_is_orthogonal() {
        let nu = GaussianMeasure::univariate(1.0, 0.5).unwrap();
        let basis = HermiteBasis1D::new(3, nu.clone()).unwrap().basis_set();
        let p = BayesElement::univariate(|x| x.powi(4) / 4.0 + x.cos());
        let spec = QuadratureSpec::gauss_hermite(20);
        let alpha = project(&p, &basis, &nu, &spec).unwrap();
        let residual = p.subtract(&basis.combine(&alpha).unwrap()).unwrap();
        assert!(inner_products(&basis, &residual, &nu, &spec).unwrap().amax() < 1e-10);
    }

    #[test]
    fn kernel_matches_projection() {
        let nu = GaussianMeasure::univariate(0.0, 2.0).unwrap();
        let basis = HermiteBasis1D::new(4, nu.clone()).unwrap().basis_set();
        let p = BayesElement::univariate(|x| (x - 0.3).powi(2) + 0.1 * x.powi(5).atan());
        let spec = QuadratureSpec::gauss_hermite(20);
        let via_kernel = kernel_apply(&basis, &nu, &p, &spec).unwrap();
        let via_coords = basis.combine(&project(&p, &basis, &nu, &spec).unwrap()).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert!((via_kernel.phi1(x) - via_coords.phi1(x)).abs() < 1e-8);
        }
        let zero = kernel_apply(&basis, &nu, &BayesElement::zero(1), &spec).unwrap();
        assert!(zero.phi1(1.2).abs() < 1e-14);
    }

    #[test]
    fn gaussian_kl_closed_form() {
        let spec = QuadratureSpec::grid(4001, vec![(-20.0, 20.0)]);
        let q = BayesElement::normal(0.0, 1.0);
        let p = BayesElement::normal(0.0, 2.0);
        let v = kl(&q, &p, &spec).unwrap();
        assert!((v - 0.5 * (0.5 + 2f64.ln() - 1.0)).abs() < 1e-9);
        assert!(kl(&q, &q, &spec).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hessian_equals_gram_when_target_is_in_span() {
        let nu = GaussianMeasure::univariate(0.5, 1.0).unwrap();
        let basis = HermiteBasis1D::new(2, nu).unwrap().basis_set();
        let alpha = Coordinates::from_vec(vec![0.2, 0.9]);
        let p = basis.combine(&alpha).unwrap();
        let spec = QuadratureSpec::grid(2001, vec![(-8.0, 9.0)]);
        let d = kl_derivatives(&alpha, &basis, &p, &spec).unwrap();
        assert!(d.gradient.amax() < 1e-12);
        assert!((&d.hessian - &d.gram).amax() < 1e-12);
        assert!((&d.hessian_fisher_form - &d.gram).amax() < 1e-10);
    }

    #[test]
    fn fim_reduces_to_gram() {
        let nu = GaussianMeasure::univariate(1.0, 2.0).unwrap();
        let basis = HermiteBasis1D::new(3, nu.clone()).unwrap().basis_set();
        let spec = QuadratureSpec::gauss_hermite(20);
        let g = gram(&basis, &nu, &spec).unwrap();
        assert!((fim(&basis, &nu, &DMatrix::identity(3, 3), &spec).unwrap() - g).amax() < 1e-14);
        assert_eq!(fim(&basis, &nu, &DMatrix::zeros(3, 2), &spec).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn member_converges_in_one_step() {
        let p = BayesElement::normal(2.0, 0.5);
        let trace = iterate(&p, Subspace::Hermite { order: 2 }, &std1(), &IterateOptions::default()).unwrap();
        let first = &trace.records[0];
        assert!((first.measure.mean()[0] - 2.0).abs() < 1e-10);
        assert!((first.measure.covariance()[(0, 0)] - 0.5).abs() < 1e-10);
        assert!(trace.converged());
        assert!(trace.records.len() <= 2);
    }

    #[test]
    fn route_identity_for_fisher_step() {
        // alpha + G^-1 <b, p ⊖ q> equals G^-1 <b, p>
        let nu = GaussianMeasure::univariate(0.0, 1.5).unwrap();
        let basis = BasisSet::new(
            vec![BayesElement::univariate(|x| x), BayesElement::univariate(|x| x * x + 0.3 * x)],
            None,
        );
        let spec = QuadratureSpec::gauss_hermite(20);
        let p = BayesElement::univariate(|x| 0.5 * (x - 1.0).powi(2) + 0.1 * x.powi(4));
        let alpha = Coordinates::from_vec(vec![0.4, 0.3]);
        let q = basis.combine(&alpha).unwrap();
        let g = gram(&basis, &nu, &spec).unwrap();
        let residual = inner_products(&basis, &p.subtract(&q).unwrap(), &nu, &spec).unwrap();
        let a = alpha.vector() + linalg::gram_solve(&g, &residual).unwrap();
        let b = project(&p, &basis, &nu, &spec).unwrap();
        assert!((a - b.vector()).amax() < 1e-10);
    }
}
