//! One-dimensional stereo-depth posterior and the projection experiments
//! built on it.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bayes::{self, BayesElement, GaussianMeasure};
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianCoordinates, IndefGaussian};
use crate::hermite::HermiteBasis1D;
use crate::quadrature::{self, QuadratureSpec};
use crate::variational::{self, Coordinates, IterateOptions, IterationTrace, Subspace, Termination};

/// Depth at which the measurement model is singular.
pub const POLE: f64 = 0.0;

/// Half-width, in standard deviations, of the integration window. `phi`
/// grows like `1/x^2` at the pole, so its moments under a Gaussian only
/// exist on a window that keeps clear of it.
pub const WINDOW_SD: f64 = 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct StereoConfig {
    pub prior_mean: f64,
    pub prior_var: f64,
    pub focal: f64,
    pub baseline: f64,
    pub meas_var: f64,
    /// Depth used to simulate the measurement.
    pub true_depth: f64,
    pub seed: u64,
    /// Fixed measurement; when absent it is simulated from `seed`.
    pub z: Option<f64>,
    /// Grid nodes for expectations under a measure.
    pub nodes: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// Largest Hermite order (sweep) or the richer order (iterate comparison).
    pub basis: usize,
    pub grid_points: usize,
}

impl Default for StereoConfig {
    fn default() -> Self {
        Self {
            prior_mean: 20.0,
            prior_var: 9.0,
            focal: 400.0,
            baseline: 0.1,
            meas_var: 0.09,
            true_depth: 22.0,
            seed: 1,
            z: None,
            nodes: 2001,
            max_iters: 10,
            tol: 0.0,
            basis: 6,
            grid_points: 2001,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

impl StereoConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.prior_mean, self.prior_var, self.focal, self.baseline, self.meas_var, self.true_depth, self.tol];
        if finite.iter().any(|v| !v.is_finite()) || self.z.is_some_and(|z| !z.is_finite()) {
            return Err(invalid("parameters must be finite".into()));
        }
        if self.prior_var <= 0.0 || self.meas_var <= 0.0 {
            return Err(invalid("variances must be positive".into()));
        }
        if self.focal <= 0.0 || self.baseline <= 0.0 {
            return Err(invalid("focal length and baseline must be positive".into()));
        }
        if self.prior_mean <= POLE || self.true_depth <= POLE {
            return Err(invalid("depths must be positive".into()));
        }
        if !(11..=100_001).contains(&self.nodes) {
            return Err(invalid("nodes must lie in 11..=100001".into()));
        }
        if !(2..=12).contains(&self.basis) {
            return Err(invalid("basis must lie in 2..=12".into()));
        }
        if self.max_iters == 0 || self.max_iters > 1000 {
            return Err(invalid("max_iters must lie in 1..=1000".into()));
        }
        if self.tol < 0.0 {
            return Err(invalid("tol must be non-negative".into()));
        }
        if !(11..=100_001).contains(&self.grid_points) {
            return Err(invalid("grid_points must lie in 11..=100001".into()));
        }
        Ok(())
    }

    pub fn prior(&self) -> Result<GaussianMeasure> {
        GaussianMeasure::univariate(self.prior_mean, self.prior_var)
    }

    /// The measurement: the override if set, otherwise `fb / true_depth`
    /// plus seeded noise.
    pub fn measurement(&self) -> f64 {
        self.z.unwrap_or_else(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let noise = Normal::new(0.0, self.meas_var.sqrt()).expect("validated variance");
            self.focal * self.baseline / self.true_depth + noise.sample(&mut rng)
        })
    }

    /// Unnormalized posterior `exp(-phi)` with analytic derivatives.
    pub fn posterior(&self, z: f64) -> BayesElement {
        let (m, v, fb, r) = (self.prior_mean, self.prior_var, self.focal * self.baseline, self.meas_var);
        BayesElement::univariate(move |x| (x - m).powi(2) / (2.0 * v) + (z - fb / x).powi(2) / (2.0 * r))
            .with_gradient(move |x| {
                let u = x[0];
                DVector::from_element(1, (u - m) / v + (z - fb / u) * fb / (u * u * r))
            })
            .with_hessian(move |x| {
                let u = x[0];
                let h = 1.0 / v + (fb * fb / u.powi(4) - 2.0 * (z - fb / u) * fb / u.powi(3)) / r;
                nalgebra::DMatrix::from_element(1, 1, h)
            })
    }

    /// Quadrature for expectations under `nu`: a grid over `mean ± 6 sd`
    /// that stops short of the pole.
    pub fn spec_for(&self, nu: &GaussianMeasure) -> QuadratureSpec {
        QuadratureSpec::window(nu, WINDOW_SD, Some(POLE), self.nodes)
    }

    /// Density grid: `grid_points` nodes over prior mean ± 8 sd.
    pub fn density_grid(&self) -> Vec<f64> {
        let s = self.prior_var.sqrt();
        let (lo, hi) = (self.prior_mean - 8.0 * s, self.prior_mean + 8.0 * s);
        let n = self.grid_points;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn kl_spec(&self) -> QuadratureSpec {
        let g = self.density_grid();
        QuadratureSpec::grid(self.grid_points, vec![(g[0], g[g.len() - 1])])
    }

    fn iterate_options(&self) -> IterateOptions {
        IterateOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            quadrature: QuadratureSpec::grid_unbounded(self.nodes),
            kl_grid_points: Some(self.grid_points),
            pole: Some(POLE),
            window: Some(WINDOW_SD),
            ..IterateOptions::default()
        }
    }
}

/// Normalized density of `p` sampled on an evenly spaced grid (trapezoid
/// rule). Fails when the density is not negligible at either end.
pub fn grid_density(p: &BayesElement, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(Error::InvalidQuadrature("density grid needs two points".into()));
    }
    let mut logs = Vec::with_capacity(xs.len());
    for &x in xs {
        let phi = p.phi1(x);
        if phi.is_nan() || phi == f64::NEG_INFINITY {
            return Err(Error::EvaluationFailure { location: vec![x] });
        }
        logs.push(-phi);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::NotNormalizable("density vanishes on the whole grid".into()));
    }
    let mut dens: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let edge = dens[0].max(dens[dens.len() - 1]);
    if edge > 1e-6 {
        return Err(Error::NotNormalizable(format!("relative density {edge:.3e} at the grid boundary")));
    }
    let h = xs[1] - xs[0];
    let area = h * (dens.iter().sum::<f64>() - 0.5 * (dens[0] + dens[dens.len() - 1]));
    dens.iter_mut().for_each(|d| *d /= area);
    Ok(dens)
}

/// Trapezoid integral of sampled values on an evenly spaced grid.
pub fn grid_integral(xs: &[f64], values: &[f64]) -> f64 {
    let h = xs[1] - xs[0];
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[values.len() - 1]))
}

/// Gaussian projection of `p` under `nu` from inner products with the two
/// leading Hermite functions.
pub fn gaussian_projection(p: &BayesElement, nu: &GaussianMeasure, spec: &QuadratureSpec) -> Result<(Coordinates, IndefGaussian)> {
    let alpha = HermiteBasis1D::new(2, nu.clone())?.coordinates(p, spec)?;
    let g = IndefGaussian::from_coordinates(&GaussianCoordinates::from_coordinates(&alpha, 1)?, nu)?;
    Ok((alpha, g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionPanel {
    pub measure_mean: f64,
    pub measure_var: f64,
    pub mean: f64,
    pub var: f64,
    pub positive_definite: bool,
    pub kl: f64,
    /// `I(p ⊖ q)` under the panel's measure.
    pub divergence: f64,
}

/// Named density columns over a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl DensityTable {
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, columns: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push((name.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

#[derive(Clone, Debug)]
pub struct StereoProjectOutput {
    pub z: f64,
    pub panels: Vec<ProjectionPanel>,
    pub densities: DensityTable,
}

/// Measures of the two projection panels: the prior and `N(24, 4)`.
pub fn project_measures(cfg: &StereoConfig) -> Result<[GaussianMeasure; 2]> {
    Ok([cfg.prior()?, GaussianMeasure::univariate(24.0, 4.0)?])
}

pub fn run_stereo_project(cfg: &StereoConfig) -> Result<StereoProjectOutput> {
    cfg.validate()?;
    let z = cfg.measurement();
    let p = cfg.posterior(z);
    let xs = cfg.density_grid();
    let kl_spec = cfg.kl_spec();
    let mut densities = DensityTable::new(xs.clone());
    densities.push("prior", grid_density(&cfg.prior()?.to_element(), &xs)?);
    densities.push("posterior", grid_density(&p, &xs)?);
    let mut panels = Vec::new();
    for (k, nu) in project_measures(cfg)?.iter().enumerate() {
        let spec = cfg.spec_for(nu);
        let (_, g) = gaussian_projection(&p, nu, &spec)?;
        let q = g.to_measure()?;
        let qe = q.to_element();
        let rule = quadrature::gaussian_rule(nu, &spec)?;
        panels.push(ProjectionPanel {
            measure_mean: nu.mean()[0],
            measure_var: nu.covariance()[(0, 0)],
            mean: q.mean()[0],
            var: q.covariance()[(0, 0)],
            positive_definite: g.is_positive_definite(),
            kl: variational::kl(&qe, &p, &kl_spec)?,
            divergence: bayes::divergence_on(&rule, &p, &qe)?,
        });
        densities.push(format!("projection_{}", k + 1), grid_density(&qe, &xs)?);
    }
    Ok(StereoProjectOutput { z, panels, densities })
}

/// Per-iteration scalars of an iterative projection.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRow {
    pub iteration: usize,
    pub mean: f64,
    pub var: f64,
    pub kl: f64,
    pub divergence: f64,
    pub step_norm: f64,
}

#[derive(Clone, Debug)]
pub struct IterationSeries {
    pub order: usize,
    pub initial_kl: f64,
    pub rows: Vec<IterationRow>,
    pub termination: Termination,
}

impl IterationSeries {
    fn from_trace(order: usize, trace: &IterationTrace) -> Self {
        let rows = trace
            .records
            .iter()
            .map(|r| IterationRow {
                iteration: r.iteration,
                mean: r.measure.mean()[0],
                var: r.measure.covariance()[(0, 0)],
                kl: r.kl,
                divergence: r.divergence,
                step_norm: r.step_norm,
            })
            .collect();
        Self { order, initial_kl: trace.initial_kl, rows, termination: trace.termination.clone() }
    }

    pub fn kl_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.kl).collect()
    }

    pub fn final_kl(&self) -> Option<f64> {
        self.rows.last().map(|r| r.kl)
    }

    /// First iteration from which every later KL value stays within `rel` of
    /// the final one.
    pub fn plateau_iteration(&self, rel: f64) -> Option<usize> {
        let last = self.final_kl()?;
        let mut first = self.rows.len();
        for (i, r) in self.rows.iter().enumerate().rev() {
            if (r.kl - last).abs() <= rel * last.abs() {
                first = i;
            } else {
                break;
            }
        }
        self.rows.get(first).map(|r| r.iteration)
    }
}

#[derive(Clone, Debug)]
pub struct StereoIterateOutput {
    pub z: f64,
    pub series: IterationSeries,
    /// Prior, posterior and each iterate's estimate on the density grid.
    pub densities: DensityTable,
}

/// Iterative projection onto the Hermite subspace of `order`, started at the
/// prior (or at `initial` when given).
pub fn stereo_iteration(cfg: &StereoConfig, order: usize, initial: Option<&GaussianMeasure>) -> Result<(f64, IterationTrace)> {
    cfg.validate()?;
    let z = cfg.measurement();
    let p = cfg.posterior(z);
    let start = match initial {
        Some(m) => m.clone(),
        None => cfg.prior()?,
    };
    let trace = variational::iterate(&p, Subspace::Hermite { order }, &start, &cfg.iterate_options())?;
    Ok((z, trace))
}

pub fn run_stereo_iterate(cfg: &StereoConfig) -> Result<StereoIterateOutput> {
    let (z, trace) = stereo_iteration(cfg, 2, None)?;
    if let Termination::Failed(e) = &trace.termination {
        return Err(e.clone());
    }
    let xs = cfg.density_grid();
    let mut densities = DensityTable::new(xs.clone());
    densities.push("prior", grid_density(&cfg.prior()?.to_element(), &xs)?);
    densities.push("posterior", grid_density(&cfg.posterior(z), &xs)?);
    for r in &trace.records {
        densities.push(format!("iter_{}", r.iteration), grid_density(&r.estimate, &xs)?);
    }
    Ok(StereoIterateOutput { z, series: IterationSeries::from_trace(2, &trace), densities })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub order: usize,
    pub divergence: f64,
    /// KL to the posterior when the estimate is normalizable on the grid.
    pub kl: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct HermiteSweepOutput {
    pub z: f64,
    pub rows: Vec<SweepRow>,
    /// Largest difference between the order-2 Hermite and Gaussian-basis
    /// coordinates.
    pub gaussian_route_gap: f64,
    pub densities: DensityTable,
}

/// Projection of the posterior onto Hermite bases of order 2..=`cfg.basis`
/// under the prior.
pub fn run_hermite_sweep(cfg: &StereoConfig) -> Result<HermiteSweepOutput> {
    cfg.validate()?;
    let z = cfg.measurement();
    let p = cfg.posterior(z);
    hermite_sweep_of(cfg, &p, z)
}

/// Sweep of an arbitrary univariate target, for checks with known answers.
pub fn hermite_sweep_of(cfg: &StereoConfig, p: &BayesElement, z: f64) -> Result<HermiteSweepOutput> {
    let nu = cfg.prior()?;
    let spec = cfg.spec_for(&nu);
    let rule = quadrature::gaussian_rule(&nu, &spec)?;
    let xs = cfg.density_grid();
    let kl_spec = cfg.kl_spec();
    let mut densities = DensityTable::new(xs.clone());
    densities.push("posterior", grid_density(p, &xs)?);
    let full = HermiteBasis1D::new(cfg.basis, nu.clone())?.coordinates(p, &spec)?;
    let mut rows = Vec::new();
    for order in 2..=cfg.basis {
        let basis = HermiteBasis1D::new(order, nu.clone())?;
        let alpha = Coordinates::from_vec(full.as_slice()[..order].to_vec());
        let q = basis.reconstruct(&alpha)?;
        let divergence = bayes::divergence_on(&rule, p, &q)?;
        let kl = match grid_density(&q, &xs) {
            Ok(d) => {
                densities.push(format!("order_{order}"), d);
                Some(variational::kl(&q, p, &kl_spec)?)
            }
            Err(Error::NotNormalizable(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push(SweepRow { order, divergence, kl });
    }
    let via_derivatives = gaussian::gaussian_coordinates(p, &nu, &spec)?.to_coordinates();
    let gaussian_route_gap = via_derivatives
        .as_slice()
        .iter()
        .zip(&full.as_slice()[..2])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(HermiteSweepOutput { z, rows, gaussian_route_gap, densities })
}

#[derive(Clone, Debug)]
pub struct HermiteIterateOutput {
    pub z: f64,
    pub series: Vec<IterationSeries>,
}

/// Iterative projection with order 2 and order `cfg.basis` (4 by default in
/// the CLI), each updating the measure with the Gaussian part.
pub fn run_hermite_iterate(cfg: &StereoConfig, orders: &[usize]) -> Result<HermiteIterateOutput> {
    let mut series = Vec::new();
    let mut z = f64::NAN;
    for &order in orders {
        let (zz, trace) = stereo_iteration(cfg, order, None)?;
        z = zz;
        if let Termination::Failed(e) = &trace.termination {
            return Err(e.clone());
        }
        series.push(IterationSeries::from_trace(order, &trace));
    }
    Ok(HermiteIterateOutput { z, series })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_is_seeded() {
        let cfg = StereoConfig::default();
        assert_eq!(cfg.measurement(), cfg.measurement());
        let other = StereoConfig { seed: 2, ..cfg.clone() };
        assert_ne!(cfg.measurement(), other.measurement());
        assert_eq!(StereoConfig { z: Some(1.5), ..cfg }.measurement(), 1.5);
    }

    #[test]
    fn posterior_derivatives_match_differences() {
        let p = StereoConfig::default().posterior(1.9);
        for x in [5.0, 18.0, 30.0] {
            assert!(p.derivative_mismatch(&DVector::from_element(1, x)) < 1e-5);
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let out = run_stereo_project(&StereoConfig::default()).unwrap();
        for (name, col) in &out.densities.columns {
            let area = grid_integral(&out.densities.x, col);
            assert!((area - 1.0).abs() < 1e-12, "{name}: {area}");
        }
    }

    #[test]
    fn closer_measure_gives_smaller_kl() {
        // a measurement placing the posterior near the second measure
        let cfg = StereoConfig { z: Some(1.6), ..StereoConfig::default() };
        let out = run_stereo_project(&cfg).unwrap();
        assert!(out.panels[1].kl < out.panels[0].kl, "{:?}", out.panels);
    }

    #[test]
    fn single_iteration_matches_first_panel() {
        let cfg = StereoConfig { max_iters: 1, ..StereoConfig::default() };
        let panel = &run_stereo_project(&cfg).unwrap().panels[0];
        let it = run_stereo_iterate(&cfg).unwrap();
        let row = &it.series.rows[0];
        assert!((row.mean - panel.mean).abs() < 1e-12 && (row.var - panel.var).abs() < 1e-12);
    }

    #[test]
    fn starting_at_the_fixed_point_converges_at_once() {
        let cfg = StereoConfig { max_iters: 40, ..StereoConfig::default() };
        let (_, trace) = stereo_iteration(&cfg, 2, None).unwrap();
        let fixed = trace.final_measure().unwrap().clone();
        let cfg = StereoConfig { tol: 1e-6, ..cfg };
        let (_, again) = stereo_iteration(&cfg, 2, Some(&fixed)).unwrap();
        assert!(again.converged() && again.records.len() <= 2, "{}", again.records.len());
    }

    #[test]
    fn uninformative_measurement_returns_prior() {
        let cfg = StereoConfig { meas_var: 1e12, ..StereoConfig::default() };
        let out = run_stereo_project(&cfg).unwrap();
        for panel in &out.panels {
            // the 6 sd window trims the measure's fourth moment by ~3e-6
            assert!((panel.mean - 20.0).abs() < 1e-5 && (panel.var - 9.0).abs() < 1e-4, "{panel:?}");
        }
    }

    #[test]
    fn gaussian_target_is_captured_at_order_two() {
        let cfg = StereoConfig::default();
        let p = BayesElement::normal(21.0, 5.0);
        let out = hermite_sweep_of(&cfg, &p, f64::NAN).unwrap();
        assert!(out.rows[0].divergence < 1e-8);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            StereoConfig { prior_var: 0.0, ..StereoConfig::default() },
            StereoConfig { nodes: 1, ..StereoConfig::default() },
            StereoConfig { basis: 1, ..StereoConfig::default() },
            StereoConfig { tol: -1.0, ..StereoConfig::default() },
            StereoConfig { z: Some(f64::NAN), ..StereoConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))), "{cfg:?}");
        }
    }
}
