//! Synthetic one-dimensional SLAM chain: poses along a line, landmarks seen
//! by range from a fixed lateral offset.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gvi::factor::{Factor, FactorGraph};
use crate::gvi::solver::{self, GaussianState, GviOptions, GviTermination, GviTrace, MarginalRoute};

#[derive(Clone, Debug, PartialEq)]
pub struct SlamConfig {
    pub poses: usize,
    pub landmarks: usize,
    /// Nominal distance travelled between poses.
    pub step: f64,
    pub prior_var: f64,
    pub odom_var: f64,
    pub range_var: f64,
    /// Lateral offset between the robot's line and the landmarks.
    pub offset: f64,
    /// Landmarks are observed from poses within this distance along the line.
    pub visibility: f64,
    /// Replace range factors with linear relative-position factors.
    pub linear: bool,
    pub seed: u64,
    pub trials: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub nodes: usize,
    /// Initial variances are the dead-reckoning variances times this factor.
    pub init_inflation: f64,
}

impl Default for SlamConfig {
    fn default() -> Self {
        Self {
            poses: 20,
            landmarks: 5,
            step: 1.0,
            prior_var: 0.01,
            odom_var: 0.01,
            range_var: 0.01,
            offset: 2.0,
            visibility: 6.0,
            linear: false,
            seed: 1,
            trials: 500,
            max_iters: 10,
            tol: 1e-6,
            nodes: 10,
            init_inflation: 10.0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl SlamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=200).contains(&self.poses) {
            return Err(invalid("poses must lie in 2..=200"));
        }
        if self.landmarks > 50 {
            return Err(invalid("landmarks must be at most 50"));
        }
        let positive = [self.step, self.prior_var, self.odom_var, self.range_var, self.offset, self.visibility, self.init_inflation];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("step, variances, offset, visibility and inflation must be positive"));
        }
        if !(1..=100_000).contains(&self.trials) {
            return Err(invalid("trials must lie in 1..=100000"));
        }
        if !(1..=1000).contains(&self.max_iters) {
            return Err(invalid("max_iters must lie in 1..=1000"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(invalid("tol must be non-negative"));
        }
        if !(2..=30).contains(&self.nodes) {
            return Err(invalid("nodes must lie in 2..=30"));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.poses + self.landmarks
    }

    pub fn gvi_options(&self, route: MarginalRoute) -> GviOptions {
        GviOptions { max_iters: self.max_iters, tol: self.tol, nodes_per_dim: self.nodes, damping: 1.0, route }
    }
}

/// One sampled problem: ground truth, factor graph and initial estimate.
#[derive(Clone, Debug)]
pub struct SlamProblem {
    pub truth: DVector<f64>,
    pub graph: FactorGraph,
    pub init: GaussianState,
}

/// Samples a problem with the trial's own random stream.
pub fn generate(cfg: &SlamConfig, trial: u64) -> Result<SlamProblem> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let n = cfg.num_vars();
    let (np, nl) = (cfg.poses, cfg.landmarks);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise = |var: f64| var.sqrt() * unit.sample(&mut rng);

    let mut truth: DVector<f64> = DVector::zeros(n);
    for t in 1..np {
        truth[t] = truth[t - 1] + cfg.step;
    }
    let span = truth[np - 1];
    // landmarks evenly spread along the path with a random jitter
    let mut jitter = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    jitter.set_stream(trial);
    for j in 0..nl {
        let base = span * (j as f64 + 0.5) / nl as f64;
        truth[np + j] = base + jitter.random_range(-0.25..0.25) * span / nl as f64;
    }

    let mut graph = FactorGraph::new(n);
    let prior_mean = truth[0] + noise(cfg.prior_var);
    graph.push(Factor::prior(0, prior_mean, cfg.prior_var)?)?;
    let mut odom = Vec::with_capacity(np - 1);
    for t in 0..np - 1 {
        let u = truth[t + 1] - truth[t] + noise(cfg.odom_var);
        odom.push(u);
        graph.push(Factor::odometry(t, t + 1, u, cfg.odom_var)?)?;
    }
    let mut sightings: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nl];
    for t in 0..np {
        for j in 0..nl {
            let l = np + j;
            let d = truth[l] - truth[t];
            if d.abs() > cfg.visibility {
                continue;
            }
            if cfg.linear {
                let m = d + noise(cfg.range_var);
                sightings[j].push((t, m));
                graph.push(Factor::odometry(t, l, m, cfg.range_var)?)?;
            } else {
                let r = (d * d + cfg.offset * cfg.offset).sqrt() + noise(cfg.range_var);
                sightings[j].push((t, r));
                graph.push(Factor::range(t, l, r, cfg.range_var, cfg.offset)?)?;
            }
        }
    }
    if let Some(j) = sightings.iter().position(|s| s.is_empty()) {
        return Err(invalid(format!("landmark {j} is never observed; increase visibility")));
    }
    graph.validate()?;

    // dead reckoning for poses
    let mut mean: DVector<f64> = DVector::zeros(n);
    let mut var = vec![0.0; n];
    mean[0] = prior_mean;
    var[0] = cfg.prior_var;
    for t in 1..np {
        mean[t] = mean[t - 1] + odom[t - 1];
        var[t] = var[t - 1] + cfg.odom_var;
    }
    for (j, seen) in sightings.iter().enumerate() {
        let l = np + j;
        mean[l] = if cfg.linear {
            seen.iter().map(|&(t, m)| mean[t] + m).sum::<f64>() / seen.len() as f64
        } else {
            locate_landmark(seen, &mean, cfg.offset, span, cfg.visibility)
        };
        let worst_pose = seen.iter().map(|&(t, _)| var[t]).fold(0.0, f64::max);
        var[l] = worst_pose + cfg.range_var;
    }
    let inflated: Vec<f64> = var.iter().map(|v| v * cfg.init_inflation).collect();
    let init = GaussianState::diagonal(&graph, mean, &inflated)?;
    Ok(SlamProblem { truth, graph, init })
}

/// Least-squares landmark position against dead-reckoned poses, by a dense
/// search along the line followed by ternary-search refinement.
fn locate_landmark(seen: &[(usize, f64)], poses: &DVector<f64>, offset: f64, span: f64, reach: f64) -> f64 {
    let cost = |l: f64| -> f64 {
        seen.iter().map(|&(t, r)| (r - ((l - poses[t]).powi(2) + offset * offset).sqrt()).powi(2)).sum()
    };
    let (lo, hi) = (-reach, span + reach);
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let mut best = lo;
    for i in 0..=steps {
        let l = lo + h * i as f64;
        if cost(l) < cost(best) {
            best = l;
        }
    }
    let (mut a, mut b) = (best - h, best + h);
    for _ in 0..60 {
        let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
        if cost(m1) < cost(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}

/// Per-variable estimate, standard deviation and error against truth.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableReport {
    pub index: usize,
    pub is_landmark: bool,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
}

impl VariableReport {
    pub fn error(&self) -> f64 {
        self.mean - self.truth
    }

    pub fn within(&self, k: f64) -> bool {
        self.error().abs() <= k * self.sd
    }
}

fn report(cfg: &SlamConfig, truth: &DVector<f64>, state: &GaussianState) -> Result<Vec<VariableReport>> {
    let cov = state.covariance()?;
    Ok((0..truth.len())
        .map(|i| VariableReport {
            index: i,
            is_landmark: i >= cfg.poses,
            truth: truth[i],
            mean: state.mean[i],
            sd: cov[(i, i)].sqrt(),
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub esgvi: GviTrace,
    pub esgvi_report: Vec<VariableReport>,
}

fn final_or_err(trace: &GviTrace) -> Result<&GaussianState> {
    if let GviTermination::Failed(e) = &trace.termination {
        return Err(e.clone());
    }
    trace.final_state().ok_or_else(|| invalid("no iterations were run"))
}

pub fn run_trial(cfg: &SlamConfig, trial: u64) -> Result<TrialOutcome> {
    let problem = generate(cfg, trial)?;
    let esgvi = solver::gvi_sparse_solve(&problem.graph, &problem.init, &cfg.gvi_options(MarginalRoute::SelectedInverse))?;
    let esgvi_report = report(cfg, &problem.truth, final_or_err(&esgvi)?)?;
    Ok(TrialOutcome { esgvi, esgvi_report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    /// Fraction of all per-variable errors inside the reported 3 sd envelope.
    pub containment: f64,
    pub converged_trials: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub seconds: f64,
}

pub fn monte_carlo(cfg: &SlamConfig) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let (mut inside, mut total, mut converged, mut max_it, mut sum_it) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for trial in 0..cfg.trials as u64 {
        let out = run_trial(cfg, trial)?;
        inside += out.esgvi_report.iter().filter(|r| r.within(3.0)).count();
        total += out.esgvi_report.len();
        if out.esgvi.converged() {
            converged += 1;
        }
        max_it = max_it.max(out.esgvi.iterations());
        sum_it += out.esgvi.iterations();
    }
    Ok(MonteCarloSummary {
        trials: cfg.trials,
        containment: inside as f64 / total as f64,
        converged_trials: converged,
        max_iterations: max_it,
        mean_iterations: sum_it as f64 / cfg.trials as f64,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug)]
pub struct GviDemoOutput {
    pub problem: SlamProblem,
    pub esgvi: GviTrace,
    pub esgvi_dense: GviTrace,
    pub map: GviTrace,
    /// Largest per-iteration difference in mean or information between the
    /// sparse and dense marginal routes.
    pub route_gap: f64,
    pub esgvi_report: Vec<VariableReport>,
    pub map_report: Vec<VariableReport>,
    pub monte_carlo: Option<MonteCarloSummary>,
}

/// Largest per-iteration difference between two traces; infinite when their
/// lengths differ.
pub fn trace_gap(a: &GviTrace, b: &GviTrace) -> f64 {
    if a.records.len() != b.records.len() {
        return f64::INFINITY;
    }
    a.records
        .iter()
        .zip(&b.records)
        .map(|(x, y)| {
            let dm = (&x.state.mean - &y.state.mean).amax();
            let di = (x.state.info.to_dense() - y.state.info.to_dense()).amax();
            dm.max(di)
        })
        .fold(0.0, f64::max)
}

/// Runs trial 0 with both marginal routes and the point-evaluation baseline;
/// adds a Monte Carlo summary when more than one trial is requested.
pub fn run_gvi_demo(cfg: &SlamConfig) -> Result<GviDemoOutput> {
    let problem = generate(cfg, 0)?;
    let esgvi = solver::gvi_sparse_solve(&problem.graph, &problem.init, &cfg.gvi_options(MarginalRoute::SelectedInverse))?;
    let esgvi_dense = solver::gvi_sparse_solve(&problem.graph, &problem.init, &cfg.gvi_options(MarginalRoute::Dense))?;
    let map = solver::map_newton_solve(&problem.graph, &problem.init, &cfg.gvi_options(MarginalRoute::SelectedInverse))?;
    let esgvi_report = report(cfg, &problem.truth, final_or_err(&esgvi)?)?;
    let map_report = report(cfg, &problem.truth, final_or_err(&map)?)?;
    let route_gap = trace_gap(&esgvi, &esgvi_dense);
    let monte_carlo = if cfg.trials > 1 { Some(monte_carlo(cfg)?) } else { None };
    Ok(GviDemoOutput { problem, esgvi, esgvi_dense, map, route_gap, esgvi_report, map_report, monte_carlo })
}
