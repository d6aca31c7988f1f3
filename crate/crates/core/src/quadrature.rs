//! Numerical expectations.
//!
//! Every expectation in the crate reduces to a weighted node set ([`Rule`]).
//! Gaussian measures use tensor-product Gauss-Hermite rules through the
//! reparameterization `x = mean + L xi`; non-Gaussian measures and the
//! normalization operator use truncated trapezoid grids.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::bayes::{BayesElement, GaussianMeasure};
use crate::error::{Error, Result};
use crate::hermite::hermite_poly;

pub mod stein;

/// Upper bound on the number of nodes in a tensor-product rule.
pub const MAX_TENSOR_NODES: usize = 1 << 20;

/// Largest supported Gauss-Hermite order.
pub const MAX_GAUSS_HERMITE_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussHermite,
    Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub kind: QuadratureKind,
    pub nodes_per_dim: usize,
    /// Per-dimension integration interval for grid rules. When absent a grid
    /// rule over a Gaussian measure spans `mean ± 8 sd` in every direction.
    pub grid_bounds: Option<Vec<(f64, f64)>>,
    /// Largest integrand value, relative to the peak, tolerated on the grid
    /// boundary before an element is declared not normalizable.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::gauss_hermite(20)
    }
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes_per_dim: usize) -> Self {
        Self { kind: QuadratureKind::GaussHermite, nodes_per_dim, grid_bounds: None, tolerance: 1e-6 }
    }

    pub fn grid(nodes_per_dim: usize, bounds: Vec<(f64, f64)>) -> Self {
        Self { kind: QuadratureKind::Grid, nodes_per_dim, grid_bounds: Some(bounds), tolerance: 1e-6 }
    }

    /// Grid rule whose bounds follow the measure (`mean ± 8 sd`).
    pub fn grid_unbounded(nodes_per_dim: usize) -> Self {
        Self { kind: QuadratureKind::Grid, nodes_per_dim, grid_bounds: None, tolerance: 1e-6 }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Picks Gauss-Hermite when the measure keeps at least six standard
    /// deviations between its mean and `pole`, and a grid over
    /// `mean ± 8 sd` (excluding the pole side beyond it) otherwise.
    pub fn avoiding_pole(nu: &GaussianMeasure, pole: f64, gh_nodes: usize, grid_nodes: usize) -> Self {
        assert_eq!(nu.dim(), 1, "pole avoidance is defined for univariate measures");
        if (nu.mean()[0] - pole).abs() >= 6.0 * nu.std_dev() {
            return Self::gauss_hermite(gh_nodes);
        }
        Self::window(nu, 8.0, Some(pole), grid_nodes)
    }

    /// Grid over `mean ± half_width sd` of a univariate measure. A pole inside
    /// the window cuts it off on the far side, `1e-3 sd` short of the pole.
    pub fn window(nu: &GaussianMeasure, half_width: f64, pole: Option<f64>, grid_nodes: usize) -> Self {
        assert_eq!(nu.dim(), 1, "windowed grids are defined for univariate measures");
        let (m, s) = (nu.mean()[0], nu.std_dev());
        let (mut lo, mut hi) = (m - half_width * s, m + half_width * s);
        if let Some(pole) = pole {
            let gap = 1e-3 * s;
            if pole >= lo && pole <= hi {
                if m >= pole {
                    lo = pole + gap;
                } else {
                    hi = pole - gap;
                }
            }
        }
        Self::grid(grid_nodes, vec![(lo, hi)])
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.nodes_per_dim == 0 {
            return Err(Error::InvalidQuadrature("nodes_per_dim must be positive".into()));
        }
        if self.kind == QuadratureKind::GaussHermite && self.nodes_per_dim > MAX_GAUSS_HERMITE_NODES {
            return Err(Error::InvalidQuadrature(format!(
                "Gauss-Hermite order {} exceeds {}",
                self.nodes_per_dim, MAX_GAUSS_HERMITE_NODES
            )));
        }
        if self.kind == QuadratureKind::Grid && self.nodes_per_dim < 2 {
            return Err(Error::InvalidQuadrature("grid rules need at least two nodes".into()));
        }
        if let Some(bounds) = &self.grid_bounds {
            if bounds.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: bounds.len() });
            }
            for &(a, b) in bounds {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidQuadrature(format!("bad grid interval ({a}, {b})")));
                }
            }
        }
        let total = (self.nodes_per_dim as f64).powi(dim as i32);
        if total > MAX_TENSOR_NODES as f64 {
            return Err(Error::CapExceeded(format!(
                "{}^{} tensor nodes exceed the cap of {}",
                self.nodes_per_dim, dim, MAX_TENSOR_NODES
            )));
        }
        Ok(())
    }
}

/// A weighted node set whose weights sum to one.
#[derive(Clone, Debug)]
pub struct Rule {
    pub points: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// Evaluates `f` at every node, failing on the first non-finite value
    /// at a node with positive weight.
    pub fn values<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&DVector<f64>) -> f64,
    {
        let mut out = Vec::with_capacity(self.len());
        for (x, &w) in self.points.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                if w == 0.0 {
                    out.push(0.0);
                    continue;
                }
                return Err(Error::EvaluationFailure { location: x.iter().copied().collect() });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted covariance of two sampled functions, computed from centered
    /// values.
    pub fn covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (self.mean(a), self.mean(b));
        self.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - ma) * (y - mb)).sum()
    }

    pub fn expect<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&DVector<f64>) -> f64,
    {
        Ok(self.mean(&self.values(f)?))
    }

    /// Expectation of a vector-valued function.
    pub fn expect_vector<F>(&self, dim: usize, f: F) -> Result<DVector<f64>>
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        let mut acc = DVector::zeros(dim);
        for (x, &w) in self.points.iter().zip(&self.weights) {
            let v = f(x);
            if v.iter().any(|e| !e.is_finite()) {
                return Err(Error::EvaluationFailure { location: x.iter().copied().collect() });
            }
            acc += v * w;
        }
        Ok(acc)
    }

    /// Expectation of a matrix-valued function.
    pub fn expect_matrix<F>(&self, rows: usize, cols: usize, f: F) -> Result<DMatrix<f64>>
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64>,
    {
        let mut acc = DMatrix::zeros(rows, cols);
        for (x, &w) in self.points.iter().zip(&self.weights) {
            let v = f(x);
            if v.iter().any(|e| !e.is_finite()) {
                return Err(Error::EvaluationFailure { location: x.iter().copied().collect() });
            }
            acc += v * w;
        }
        Ok(acc)
    }
}

type GhTable = Arc<(Vec<f64>, Vec<f64>)>;

fn gh_cache() -> &'static Mutex<HashMap<usize, GhTable>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, GhTable>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Orthonormal probabilists' Hermite values `psi_0..=psi_n` at `x`.
fn orthonormal_hermite(n: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n + 1);
    psi.push(1.0);
    if n >= 1 {
        psi.push(x);
    }
    for k in 1..n {
        let next = (x * psi[k] - (k as f64).sqrt() * psi[k - 1]) / ((k + 1) as f64).sqrt();
        psi.push(next);
    }
    psi
}

/// Gauss-Hermite nodes and weights for the standard normal density
/// (probabilists' convention: weights sum to one).
///
/// Nodes come from the Golub-Welsch eigenproblem and are polished by Newton
/// steps on the orthonormal recurrence; weights are Christoffel numbers.
pub fn gauss_hermite_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_GAUSS_HERMITE_NODES {
        return Err(Error::InvalidQuadrature(format!(
            "Gauss-Hermite order must be in 1..={MAX_GAUSS_HERMITE_NODES}, got {n}"
        )));
    }
    if let Some(t) = gh_cache().lock().expect("cache lock").get(&n) {
        return Ok((t.0.clone(), t.1.clone()));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigen().eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let psi = orthonormal_hermite(n, *x);
            let deriv = (n as f64).sqrt() * psi[n - 1];
            if deriv != 0.0 {
                *x -= psi[n] / deriv;
            }
        }
    }
    // exact symmetry about zero
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let psi = orthonormal_hermite(n - 1, x);
            1.0 / psi.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..n / 2 {
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    gh_cache()
        .lock()
        .expect("cache lock")
        .insert(n, Arc::new((nodes.clone(), weights.clone())));
    Ok((nodes, weights))
}

/// Calls `visit` with every multi-index of an `n^dim` tensor grid, the last
/// index varying fastest.
fn for_each_multi_index(dim: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; dim];
    loop {
        visit(&idx);
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Tensor-product Gauss-Hermite rule for `N(0, I_dim)`.
pub fn standard_normal_rule(dim: usize, nodes_per_dim: usize) -> Result<Rule> {
    let spec = QuadratureSpec::gauss_hermite(nodes_per_dim);
    spec.validate(dim)?;
    let (xs, ws) = gauss_hermite_rule(nodes_per_dim)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for_each_multi_index(dim, nodes_per_dim, |idx| {
        points.push(DVector::from_iterator(dim, idx.iter().map(|&i| xs[i])));
        weights.push(idx.iter().map(|&i| ws[i]).product());
    });
    Ok(Rule { points, weights })
}

fn grid_axes(bounds: &[(f64, f64)], n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    bounds
        .iter()
        .map(|&(a, b)| {
            let h = (b - a) / (n - 1) as f64;
            let xs: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
            let ws: Vec<f64> =
                (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
            (xs, ws)
        })
        .collect()
}

/// Unnormalized trapezoid grid: nodes, cell weights and a boundary flag.
fn trapezoid_grid(bounds: &[(f64, f64)], n: usize) -> (Vec<DVector<f64>>, Vec<f64>, Vec<bool>) {
    let dim = bounds.len();
    let axes = grid_axes(bounds, n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut boundary = Vec::new();
    for_each_multi_index(dim, n, |idx| {
        points.push(DVector::from_iterator(dim, idx.iter().enumerate().map(|(d, &i)| axes[d].0[i])));
        weights.push(idx.iter().enumerate().map(|(d, &i)| axes[d].1[i]).product());
        boundary.push(idx.iter().any(|&i| i == 0 || i == n - 1));
    });
    (points, weights, boundary)
}

/// Rule for expectations under a Gaussian measure.
pub fn gaussian_rule(nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<Rule> {
    let dim = nu.dim();
    spec.validate(dim)?;
    match spec.kind {
        QuadratureKind::GaussHermite => {
            let std = standard_normal_rule(dim, spec.nodes_per_dim)?;
            let points = std.points.iter().map(|xi| nu.transform(xi)).collect();
            Ok(Rule { points, weights: std.weights })
        }
        QuadratureKind::Grid => {
            let bounds = match &spec.grid_bounds {
                Some(b) => b.clone(),
                None => (0..dim)
                    .map(|i| {
                        let s = nu.covariance()[(i, i)].sqrt();
                        (nu.mean()[i] - 8.0 * s, nu.mean()[i] + 8.0 * s)
                    })
                    .collect(),
            };
            let (points, cells, _) = trapezoid_grid(&bounds, spec.nodes_per_dim);
            let mut weights: Vec<f64> =
                points.iter().zip(&cells).map(|(x, c)| c * nu.density(x)).collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::InvalidQuadrature("grid carries no measure mass".into()));
            }
            weights.iter_mut().for_each(|w| *w /= total);
            Ok(Rule { points, weights })
        }
    }
}

struct GridDensity {
    points: Vec<DVector<f64>>,
    /// `cell * exp(-(phi - phi_min))`
    scaled: Vec<f64>,
    phi_min: f64,
}

fn grid_density(p: &BayesElement, spec: &QuadratureSpec) -> Result<GridDensity> {
    let dim = p.dim();
    spec.validate(dim)?;
    if spec.kind != QuadratureKind::Grid {
        return Err(Error::InvalidQuadrature("normalization requires a grid rule".into()));
    }
    let bounds = spec
        .grid_bounds
        .as_ref()
        .ok_or_else(|| Error::InvalidQuadrature("normalization requires grid bounds".into()))?;
    let (points, cells, boundary) = trapezoid_grid(bounds, spec.nodes_per_dim);
    let phis: Vec<f64> = points.iter().map(|x| p.phi(x)).collect();
    if phis.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::NotNormalizable("phi is undefined or unbounded below on the grid".into()));
    }
    let phi_min = phis.iter().copied().fold(f64::INFINITY, f64::min);
    if !phi_min.is_finite() {
        return Err(Error::NotNormalizable("exp(-phi) vanishes on the whole grid".into()));
    }
    let mut scaled = Vec::with_capacity(points.len());
    for ((phi, cell), on_edge) in phis.iter().zip(&cells).zip(&boundary) {
        let rel = (-(phi - phi_min)).exp();
        if *on_edge && rel > spec.tolerance {
            return Err(Error::NotNormalizable(format!(
                "integrand has not decayed at the grid boundary (relative value {rel:.3e})"
            )));
        }
        scaled.push(cell * rel);
    }
    Ok(GridDensity { points, scaled, phi_min })
}

/// `ln ∫ exp(-phi)` on the spec's grid.
pub fn log_integral(p: &BayesElement, spec: &QuadratureSpec) -> Result<f64> {
    let g = grid_density(p, spec)?;
    let total: f64 = g.scaled.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::NotNormalizable("integral is not finite and positive".into()));
    }
    Ok(total.ln() - g.phi_min)
}

/// Rule for expectations under the normalized density of `p` on a grid.
pub fn density_rule(p: &BayesElement, spec: &QuadratureSpec) -> Result<Rule> {
    let g = grid_density(p, spec)?;
    let total: f64 = g.scaled.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::NotNormalizable("integral is not finite and positive".into()));
    }
    let weights = g.scaled.iter().map(|w| w / total).collect();
    Ok(Rule { points: g.points, weights })
}

/// `E_nu[f]` by the rule the spec selects.
pub fn expect<F>(f: F, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    gaussian_rule(nu, spec)?.expect(f)
}

/// `E_nu[H_n((x - mean) / sd) f(x)]` for a univariate measure.
pub fn expect_hermite_weighted<F>(n: usize, f: F, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (m, s) = (nu.mean()[0], nu.std_dev());
    expect(|x| hermite_poly(n, (x[0] - m) / s) * f(x[0]), nu, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_rule() {
        let (x, w) = gauss_hermite_rule(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(w, vec![1.0]);
    }

    #[test]
    fn order_out_of_range() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_hermite_rule(65).is_err());
        assert!(gauss_hermite_rule(64).is_ok());
    }

    fn moment(x: &[f64], w: &[f64], k: i32) -> f64 {
        x.iter().zip(w).map(|(x, w)| w * x.powi(k)).sum()
    }

    #[test]
    fn reproduces_standard_normal_moments() {
        // E[xi^(2k)] = (2k - 1)!!
        let double_factorial = |k: i32| (1..=k).map(|j| (2 * j - 1) as f64).product::<f64>();
        for n in [2usize, 3, 5, 10, 20, 40, 64] {
            let (x, w) = gauss_hermite_rule(n).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for deg in 1..(2 * n as i32).min(24) {
                let m = moment(&x, &w, deg);
                let exact = if deg % 2 == 1 { 0.0 } else { double_factorial(deg / 2) };
                let scale: f64 = x.iter().zip(&w).map(|(x, w)| w * x.abs().powi(deg)).sum();
                assert!((m - exact).abs() <= 1e-10 * scale.max(1.0), "n={n} deg={deg}: {m} vs {exact}");
            }
        }
    }

    #[test]
    fn third_hermite_norm() {
        let (x, w) = gauss_hermite_rule(10).unwrap();
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * hermite_poly(3, *x).powi(2)).sum();
        assert!((v - 6.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_rule_identity_covariance() {
        for dim in 1..=4 {
            let rule = standard_normal_rule(dim, 6).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let v = rule.expect(|x| x[i] * x[j]).unwrap();
                    let exact = if i == j { 1.0 } else { 0.0 };
                    assert!((v - exact).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn expectation_of_constant_and_outer_product() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let mean = DVector::from_vec(vec![1.0, -2.0]);
        let nu = GaussianMeasure::new(mean.clone(), cov.clone()).unwrap();
        let spec = QuadratureSpec::gauss_hermite(5);
        assert!((expect(|_| 1.0, &nu, &spec).unwrap() - 1.0).abs() < 1e-14);
        let rule = gaussian_rule(&nu, &spec).unwrap();
        let sigma = rule
            .expect_matrix(2, 2, |x| {
                let d = x - &mean;
                &d * d.transpose()
            })
            .unwrap();
        assert!((sigma - cov).amax() < 1e-12);
    }

    #[test]
    fn non_finite_integrand_reports_location() {
        let nu = GaussianMeasure::standard(1);
        let err = expect(|x| if x[0] > 1.0 { f64::NAN } else { 0.0 }, &nu, &QuadratureSpec::gauss_hermite(4));
        match err {
            Err(Error::EvaluationFailure { location }) => assert!(location[0] > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let nu = GaussianMeasure::standard(7);
        assert!(matches!(gaussian_rule(&nu, &QuadratureSpec::gauss_hermite(10)), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn invariant_to_choice_of_square_root() {
        // Two factors with F F^T = Sigma: Cholesky and Cholesky times a rotation.
        let cov = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.8]);
        let mean = DVector::from_vec(vec![0.3, -0.1]);
        let nu = GaussianMeasure::new(mean.clone(), cov).unwrap();
        let l = nu.cholesky().clone();
        let t: f64 = 0.7;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let f2 = &l * rot;
        let poly = |x: &DVector<f64>| x[0].powi(3) * x[1] + x[1].powi(4) - 2.0 * x[0] * x[1] + 1.0;
        let std = standard_normal_rule(2, 6).unwrap();
        let a = gaussian_rule(&nu, &QuadratureSpec::gauss_hermite(6)).unwrap().expect(poly).unwrap();
        let b = std.expect(|xi| poly(&(&mean + &f2 * xi))).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn grid_rule_matches_gauss_hermite_for_gaussian() {
        let nu = GaussianMeasure::univariate(2.0, 0.5).unwrap();
        let gh = expect(|x| (x[0]).powi(4), &nu, &QuadratureSpec::gauss_hermite(10)).unwrap();
        let grid = expect(|x| (x[0]).powi(4), &nu, &QuadratureSpec::grid_unbounded(4001)).unwrap();
        assert!((gh - grid).abs() < 1e-9 * gh);
    }

    #[test]
    fn pole_avoidance_switches_rule() {
        let far = GaussianMeasure::univariate(20.0, 9.0).unwrap();
        assert_eq!(QuadratureSpec::avoiding_pole(&far, 0.0, 20, 2001).kind, QuadratureKind::GaussHermite);
        let near = GaussianMeasure::univariate(5.0, 4.0).unwrap();
        let spec = QuadratureSpec::avoiding_pole(&near, 0.0, 20, 2001);
        assert_eq!(spec.kind, QuadratureKind::Grid);
        assert!(spec.grid_bounds.unwrap()[0].0 > 0.0);
    }
}
