use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bayes::{BayesElement, GaussianMeasure};
use crate::error::{Error, Result};
use crate::gvi::factor::{Factor, FactorGraph};
use crate::gvi::sparse::{Pattern, SparseLdl, SparseSymmetric};
use crate::linalg;
use crate::quadrature::{self, QuadratureSpec};

/// Largest factor arity for per-factor quadrature.
pub const MAX_FACTOR_ARITY: usize = 4;

/// Joint Gaussian estimate in information form on a fixed sparsity pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub info: SparseSymmetric,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, info: SparseSymmetric) -> Result<Self> {
        if mean.len() != info.dim() {
            return Err(Error::DimensionMismatch { expected: info.dim(), got: mean.len() });
        }
        Ok(Self { mean, info })
    }

    /// State with a full (dense) pattern.
    pub fn dense(mean: DVector<f64>, info: &DMatrix<f64>) -> Result<Self> {
        let pattern = Arc::new(Pattern::dense(mean.len()));
        Self::new(mean, SparseSymmetric::from_dense(info, pattern)?)
    }

    /// State on the graph's pattern with a diagonal information matrix.
    pub fn diagonal(graph: &FactorGraph, mean: DVector<f64>, variances: &[f64]) -> Result<Self> {
        let pattern = Arc::new(Pattern::from_graph(graph));
        let mut info = SparseSymmetric::zeros(pattern);
        if variances.len() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: variances.len() });
        }
        for (i, &v) in variances.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("variance {i} must be positive")));
            }
            info.add(i, i, 1.0 / v)?;
        }
        Self::new(mean, info)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        linalg::spd_inverse(&self.info.to_dense())
    }

    pub fn to_measure(&self) -> Result<GaussianMeasure> {
        GaussianMeasure::from_information(self.mean.clone(), &self.info.to_dense())
    }
}

/// Expected gradient and Hessian of one factor under its marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorExpectation {
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Mean and covariance of the variables a factor touches.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// `E[grad phi_k]`, `E[hess phi_k]` under the factor's marginal, using a
/// quadrature of the factor's own dimension.
pub fn factor_expectations(factor: &Factor, marginal: &Marginal, spec: &QuadratureSpec) -> Result<FactorExpectation> {
    let k = factor.arity();
    if k > MAX_FACTOR_ARITY {
        return Err(Error::CapExceeded(format!("factor arity {k} exceeds {MAX_FACTOR_ARITY}")));
    }
    let measure = GaussianMeasure::new(marginal.mean.clone(), marginal.covariance.clone())?;
    let rule = quadrature::gaussian_rule(&measure, spec)?;
    let gradient = rule.expect_vector(k, |x| factor.gradient(x))?;
    let hessian = rule.expect_matrix(k, k, |x| factor.hessian(x))?;
    Ok(FactorExpectation { gradient, hessian: linalg::symmetrize(&hessian) })
}

/// `g = sum_k P_k^T g_k`, `H = sum_k P_k^T H_k P_k` on `pattern`.
pub fn assemble(
    graph: &FactorGraph,
    pattern: &Arc<Pattern>,
    parts: &[FactorExpectation],
) -> Result<(DVector<f64>, SparseSymmetric)> {
    if parts.len() != graph.factors().len() {
        return Err(Error::DimensionMismatch { expected: graph.factors().len(), got: parts.len() });
    }
    let n = graph.num_vars();
    let mut g = DVector::zeros(n);
    let mut h = SparseSymmetric::zeros(pattern.clone());
    for (f, part) in graph.factors().iter().zip(parts) {
        let idx = f.indices();
        if part.gradient.len() != idx.len() {
            return Err(Error::DimensionMismatch { expected: idx.len(), got: part.gradient.len() });
        }
        for (a, &i) in idx.iter().enumerate() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, max: n - 1 });
            }
            g[i] += part.gradient[a];
            for (b, &j) in idx.iter().enumerate() {
                if j <= i {
                    h.add(i, j, part.hessian[(a, b)])?;
                }
            }
        }
    }
    Ok((g, h))
}

/// How marginal covariance blocks are extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalRoute {
    /// Sparse LDL^T plus selected inverse on the filled pattern.
    SelectedInverse,
    /// Full dense inverse.
    Dense,
}

/// Marginal of every factor's variables under the state.
pub fn marginals_for_factors(state: &GaussianState, graph: &FactorGraph, route: MarginalRoute) -> Result<Vec<Marginal>> {
    let lookup: Box<dyn Fn(usize, usize) -> f64> = match route {
        MarginalRoute::SelectedInverse => {
            let sel = SparseLdl::factor(&state.info)?.selected_inverse();
            Box::new(move |i, j| sel.get(i, j))
        }
        MarginalRoute::Dense => {
            let dense = state.info.to_dense();
            linalg::cholesky_lower(&dense)?;
            let inv = linalg::spd_inverse(&dense)?;
            Box::new(move |i, j| inv[(i, j)])
        }
    };
    Ok(graph
        .factors()
        .iter()
        .map(|f| {
            let idx = f.indices();
            Marginal {
                mean: f.restrict(&state.mean),
                covariance: DMatrix::from_fn(idx.len(), idx.len(), |a, b| lookup(idx[a], idx[b])),
            }
        })
        .collect())
}

/// One dense Gaussian update on a joint element:
/// `info+ = E[hess phi]`, `info+ delta = -E[grad phi]`.
pub fn gvi_step_dense(p: &BayesElement, state: &GaussianState, spec: &QuadratureSpec) -> Result<GaussianState> {
    let n = state.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    let measure = state.to_measure()?;
    let rule = quadrature::gaussian_rule(&measure, spec)?;
    let g = rule.expect_vector(n, |x| p.gradient(x))?;
    let h = linalg::symmetrize(&rule.expect_matrix(n, n, |x| p.hessian(x))?);
    let l = linalg::cholesky_lower(&h)?;
    let delta = -linalg::back_substitute_transpose(&l, &linalg::forward_substitute(&l, &g));
    let info = SparseSymmetric::from_dense(&h, state.info.pattern().clone())
        .or_else(|_| SparseSymmetric::from_dense(&h, Arc::new(Pattern::dense(n))))?;
    GaussianState::new(&state.mean + delta, info)
}

#[derive(Clone, Debug)]
pub struct GviOptions {
    pub max_iters: usize,
    /// Convergence threshold on `||delta mean||`.
    pub tol: f64,
    pub nodes_per_dim: usize,
    /// Step scaling in `(0, 1]` applied to the mean update only.
    pub damping: f64,
    pub route: MarginalRoute,
}

impl Default for GviOptions {
    fn default() -> Self {
        Self { max_iters: 10, tol: 1e-8, nodes_per_dim: 10, damping: 1.0, route: MarginalRoute::SelectedInverse }
    }
}

#[derive(Clone, Debug)]
pub struct GviRecord {
    pub iteration: usize,
    pub state: GaussianState,
    pub step_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GviTermination {
    Converged,
    MaxIterations,
    Failed(Error),
}

#[derive(Clone, Debug)]
pub struct GviTrace {
    pub records: Vec<GviRecord>,
    pub termination: GviTermination,
    pub damped: bool,
}

impl GviTrace {
    pub fn final_state(&self) -> Option<&GaussianState> {
        self.records.last().map(|r| &r.state)
    }

    pub fn converged(&self) -> bool {
        self.termination == GviTermination::Converged
    }

    /// Iterations taken until convergence, if it converged.
    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

fn solve_info(info: &SparseSymmetric, rhs: &DVector<f64>, route: MarginalRoute) -> Result<DVector<f64>> {
    match route {
        MarginalRoute::SelectedInverse => Ok(SparseLdl::factor(info)?.solve(rhs)),
        MarginalRoute::Dense => linalg::spd_solve(&info.to_dense(), rhs),
    }
}

/// One sparse update: marginals, per-factor expectations, assembly, solve.
pub fn gvi_sparse_step(graph: &FactorGraph, state: &GaussianState, opts: &GviOptions) -> Result<(GaussianState, f64)> {
    let spec = QuadratureSpec::gauss_hermite(opts.nodes_per_dim);
    let marginals = marginals_for_factors(state, graph, opts.route)?;
    let parts = graph
        .factors()
        .iter()
        .zip(&marginals)
        .map(|(f, m)| factor_expectations(f, m, &spec))
        .collect::<Result<Vec<_>>>()?;
    let (g, h) = assemble(graph, state.info.pattern(), &parts)?;
    let delta = -solve_info(&h, &g, opts.route)? * opts.damping;
    let norm = delta.norm();
    Ok((GaussianState::new(&state.mean + delta, h)?, norm))
}

/// Exactly sparse Gaussian variational inference on a factor graph.
pub fn gvi_sparse_solve(graph: &FactorGraph, init: &GaussianState, opts: &GviOptions) -> Result<GviTrace> {
    validate_run(graph, init, opts)?;
    run_loop(opts, init, |s| gvi_sparse_step(graph, s, opts))
}

/// Point-evaluation baseline: the same loop with expectations replaced by
/// gradient and Hessian at the current mean (Newton's method on `phi`).
pub fn map_newton_solve(graph: &FactorGraph, init: &GaussianState, opts: &GviOptions) -> Result<GviTrace> {
    validate_run(graph, init, opts)?;
    run_loop(opts, init, |s| {
        let parts: Vec<FactorExpectation> = graph
            .factors()
            .iter()
            .map(|f| {
                let x = f.restrict(&s.mean);
                FactorExpectation { gradient: f.gradient(&x), hessian: linalg::symmetrize(&f.hessian(&x)) }
            })
            .collect();
        let (g, h) = assemble(graph, s.info.pattern(), &parts)?;
        let delta = -solve_info(&h, &g, opts.route)? * opts.damping;
        let norm = delta.norm();
        Ok((GaussianState::new(&s.mean + delta, h)?, norm))
    })
}

fn validate_run(graph: &FactorGraph, init: &GaussianState, opts: &GviOptions) -> Result<()> {
    graph.validate()?;
    if init.dim() != graph.num_vars() {
        return Err(Error::DimensionMismatch { expected: graph.num_vars(), got: init.dim() });
    }
    if !Pattern::from_graph(graph).is_subset_of(init.info.pattern()) {
        return Err(Error::InvalidArgument("initial pattern does not cover the graph's pattern".into()));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }
    Ok(())
}

fn run_loop<F>(opts: &GviOptions, init: &GaussianState, mut step: F) -> Result<GviTrace>
where
    F: FnMut(&GaussianState) -> Result<(GaussianState, f64)>,
{
    let mut trace = GviTrace { records: Vec::new(), termination: GviTermination::MaxIterations, damped: opts.damping < 1.0 };
    let mut state = init.clone();
    for iteration in 1..=opts.max_iters {
        match step(&state) {
            Ok((next, step_norm)) => {
                state = next.clone();
                trace.records.push(GviRecord { iteration, state: next, step_norm });
                if step_norm < opts.tol {
                    trace.termination = GviTermination::Converged;
                    break;
                }
            }
            Err(e) => {
                trace.termination = GviTermination::Failed(e);
                break;
            }
        }
    }
    Ok(trace)
}

/// Projection of the joint element onto the Gaussian subspace of a fixed
/// measure, as `(E[grad phi], E[hess phi])` with a joint quadrature.
pub fn joint_projection(graph: &FactorGraph, measure: &GaussianMeasure, spec: &QuadratureSpec) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let p = graph.joint_element();
    let n = graph.num_vars();
    let rule = quadrature::gaussian_rule(measure, spec)?;
    let g = rule.expect_vector(n, |x| p.gradient(x))?;
    let h = rule.expect_matrix(n, n, |x| p.hessian(x))?;
    Ok((g, linalg::symmetrize(&h)))
}

/// The same projection accumulated factor by factor from marginals of the
/// fixed measure.
pub fn accumulated_projection(
    graph: &FactorGraph,
    measure: &GaussianMeasure,
    spec: &QuadratureSpec,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let parts = graph
        .factors()
        .iter()
        .map(|f| {
            let idx = f.indices();
            let marginal = Marginal {
                mean: f.restrict(measure.mean()),
                covariance: DMatrix::from_fn(idx.len(), idx.len(), |a, b| measure.covariance()[(idx[a], idx[b])]),
            };
            factor_expectations(f, &marginal, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let (g, h) = assemble(graph, &Arc::new(Pattern::from_graph(graph)), &parts)?;
    Ok((g, h.to_dense()))
}
