use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bayes::BayesElement;
use crate::error::{Error, Result};

/// Closed set of built-in factor types plus registered custom ones.
///
/// All built-ins are squared residuals `r(x)^2 / (2 var)` over scalar
/// variables.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorKind {
    /// `x - mean`.
    Prior { mean: f64, var: f64 },
    /// `x_j - x_i - delta` for indices `i < j`.
    Odometry { delta: f64, var: f64 },
    /// `range - sqrt((x_j - x_i)^2 + offset^2)`.
    Range { range: f64, var: f64, offset: f64 },
    /// `z - focal * baseline / x`.
    Stereo { z: f64, var: f64, focal: f64, baseline: f64 },
    /// `x_i x_j - value`.
    Product { value: f64, var: f64 },
    /// A factor built by a [`FactorRegistry`] entry.
    Custom { id: String, params: Vec<f64> },
}

impl FactorKind {
    pub fn name(&self) -> String {
        match self {
            FactorKind::Prior { .. } => "prior".into(),
            FactorKind::Odometry { .. } => "odom".into(),
            FactorKind::Range { .. } => "range".into(),
            FactorKind::Stereo { .. } => "stereo".into(),
            FactorKind::Product { .. } => "product".into(),
            FactorKind::Custom { id, .. } => format!("custom:{id}"),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            FactorKind::Prior { mean, var } => vec![*mean, *var],
            FactorKind::Odometry { delta, var } => vec![*delta, *var],
            FactorKind::Range { range, var, offset } => vec![*range, *var, *offset],
            FactorKind::Stereo { z, var, focal, baseline } => vec![*z, *var, *focal, *baseline],
            FactorKind::Product { value, var } => vec![*value, *var],
            FactorKind::Custom { params, .. } => params.clone(),
        }
    }
}

type LocalScalar = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type LocalVector = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type LocalMatrix = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// One term `phi_k(P_k x)` of a factor graph's negative log density.
#[derive(Clone)]
pub struct Factor {
    kind: FactorKind,
    indices: Vec<usize>,
    phi: LocalScalar,
    grad: LocalVector,
    hess: LocalMatrix,
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factor").field("kind", &self.kind).field("indices", &self.indices).finish()
    }
}

fn check_var(var: f64) -> Result<()> {
    if var > 0.0 && var.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("variance must be positive and finite, got {var}")))
    }
}

fn check_indices(indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("a factor needs at least one variable".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("factor indices must be strictly increasing, got {indices:?}")));
    }
    Ok(())
}

impl Factor {
    /// A factor from local callbacks. `grad` and `hess` act on the local
    /// vector `x_k = P_k x`.
    pub fn new<F, G, H>(kind: FactorKind, indices: Vec<usize>, phi: F, grad: G, hess: H) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        check_indices(&indices)?;
        Ok(Self { kind, indices, phi: Arc::new(phi), grad: Arc::new(grad), hess: Arc::new(hess) })
    }

    pub fn prior(index: usize, mean: f64, var: f64) -> Result<Self> {
        check_var(var)?;
        Self::new(
            FactorKind::Prior { mean, var },
            vec![index],
            move |x| (x[0] - mean).powi(2) / (2.0 * var),
            move |x| DVector::from_element(1, (x[0] - mean) / var),
            move |_| DMatrix::from_element(1, 1, 1.0 / var),
        )
    }

    pub fn odometry(from: usize, to: usize, delta: f64, var: f64) -> Result<Self> {
        check_var(var)?;
        if from >= to {
            return Err(Error::InvalidArgument(format!("odometry needs from < to, got {from} -> {to}")));
        }
        Self::new(
            FactorKind::Odometry { delta, var },
            vec![from, to],
            move |x| (x[1] - x[0] - delta).powi(2) / (2.0 * var),
            move |x| {
                let r = (x[1] - x[0] - delta) / var;
                DVector::from_vec(vec![-r, r])
            },
            move |_| DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]) / var,
        )
    }

    /// Range between two scalar positions observed with a fixed lateral
    /// offset; symmetric in the two variables.
    pub fn range(a: usize, b: usize, range: f64, var: f64, offset: f64) -> Result<Self> {
        check_var(var)?;
        if !(offset > 0.0) {
            return Err(Error::InvalidArgument(format!("range offset must be positive, got {offset}")));
        }
        let h2 = offset * offset;
        let parts = move |x: &DVector<f64>| {
            let d = x[1] - x[0];
            let f = (d * d + h2).sqrt();
            let r = range - f;
            let df = d / f;
            let d2f = h2 / (f * f * f);
            (r, df, d2f)
        };
        let (p1, p2, p3) = (parts, parts, parts);
        Self::new(
            FactorKind::Range { range, var, offset },
            vec![a.min(b), a.max(b)],
            move |x| p1(x).0.powi(2) / (2.0 * var),
            move |x| {
                let (r, df, _) = p2(x);
                let g = -r * df / var;
                DVector::from_vec(vec![-g, g])
            },
            move |x| {
                let (r, df, d2f) = p3(x);
                let c = (df * df - r * d2f) / var;
                DMatrix::from_row_slice(2, 2, &[c, -c, -c, c])
            },
        )
    }

    /// Stereo disparity measurement of depth `x`: `z = focal * baseline / x`.
    pub fn stereo(index: usize, z: f64, var: f64, focal: f64, baseline: f64) -> Result<Self> {
        check_var(var)?;
        let fb = focal * baseline;
        Self::new(
            FactorKind::Stereo { z, var, focal, baseline },
            vec![index],
            move |x| (z - fb / x[0]).powi(2) / (2.0 * var),
            move |x| {
                let u = x[0];
                DVector::from_element(1, (z - fb / u) * fb / (u * u * var))
            },
            move |x| {
                let u = x[0];
                let h = (fb * fb / u.powi(4) - 2.0 * (z - fb / u) * fb / u.powi(3)) / var;
                DMatrix::from_element(1, 1, h)
            },
        )
    }

    /// Bilinear constraint `x_i x_j ≈ value`.
    pub fn product(a: usize, b: usize, value: f64, var: f64) -> Result<Self> {
        check_var(var)?;
        if a >= b {
            return Err(Error::InvalidArgument(format!("product factor needs a < b, got {a}, {b}")));
        }
        Self::new(
            FactorKind::Product { value, var },
            vec![a, b],
            move |x| (x[0] * x[1] - value).powi(2) / (2.0 * var),
            move |x| {
                let r = (x[0] * x[1] - value) / var;
                DVector::from_vec(vec![r * x[1], r * x[0]])
            },
            move |x| {
                let r = x[0] * x[1] - value;
                DMatrix::from_row_slice(2, 2, &[x[1] * x[1], r + x[0] * x[1], r + x[0] * x[1], x[0] * x[0]]) / var
            },
        )
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn arity(&self) -> usize {
        self.indices.len()
    }

    pub fn phi(&self, local: &DVector<f64>) -> f64 {
        (self.phi)(local)
    }

    pub fn gradient(&self, local: &DVector<f64>) -> DVector<f64> {
        (self.grad)(local)
    }

    pub fn hessian(&self, local: &DVector<f64>) -> DMatrix<f64> {
        (self.hess)(local)
    }

    /// `P_k x`.
    pub fn restrict(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.arity(), self.indices.iter().map(|&i| x[i]))
    }
}

/// Constructor for a custom factor from its indices and parameters.
pub type CustomBuilder = Arc<dyn Fn(Vec<usize>, &[f64]) -> Result<Factor> + Send + Sync>;

#[derive(Clone)]
struct RegistryEntry {
    arity: usize,
    param_count: usize,
    build: CustomBuilder,
}

/// Named custom factor types known to the text parser.
#[derive(Clone, Default)]
pub struct FactorRegistry {
    entries: BTreeMap<String, RegistryEntry>,
}

impl fmt::Debug for FactorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.entries.keys()).finish()
    }
}

impl FactorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<B>(&mut self, id: &str, arity: usize, param_count: usize, build: B)
    where
        B: Fn(Vec<usize>, &[f64]) -> Result<Factor> + Send + Sync + 'static,
    {
        self.entries.insert(id.to_string(), RegistryEntry { arity, param_count, build: Arc::new(build) });
    }

    /// `(arity, parameter count)` of a registered type.
    pub fn shape(&self, id: &str) -> Option<(usize, usize)> {
        self.entries.get(id).map(|e| (e.arity, e.param_count))
    }

    pub fn build(&self, id: &str, indices: Vec<usize>, params: &[f64]) -> Result<Factor> {
        let entry = self
            .entries
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown custom factor '{id}'")))?;
        if indices.len() != entry.arity || params.len() != entry.param_count {
            return Err(Error::InvalidArgument(format!(
                "custom factor '{id}' takes {} indices and {} parameters",
                entry.arity, entry.param_count
            )));
        }
        let mut factor = (entry.build)(indices, params)?;
        factor.kind = FactorKind::Custom { id: id.to_string(), params: params.to_vec() };
        Ok(factor)
    }
}

/// A sum of factors over `num_vars` scalar variables.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    num_vars: usize,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, factors: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn push(&mut self, factor: Factor) -> Result<()> {
        if let Some(&bad) = factor.indices().iter().find(|&&i| i >= self.num_vars) {
            return Err(Error::IndexOutOfRange { index: bad, max: self.num_vars.saturating_sub(1) });
        }
        self.factors.push(factor);
        Ok(())
    }

    /// Checks that every variable appears in some factor.
    pub fn validate(&self) -> Result<()> {
        let covered: BTreeSet<usize> = self.factors.iter().flat_map(|f| f.indices().iter().copied()).collect();
        if let Some(missing) = (0..self.num_vars).find(|i| !covered.contains(i)) {
            return Err(Error::InvalidArgument(format!("variable {missing} is not touched by any factor")));
        }
        Ok(())
    }

    /// Joint `phi = sum_k phi_k(P_k x)` with assembled derivatives.
    pub fn joint_element(&self) -> BayesElement {
        let n = self.num_vars;
        let (f1, f2, f3) = (self.factors.clone(), self.factors.clone(), self.factors.clone());
        BayesElement::new(n, move |x| f1.iter().map(|f| f.phi(&f.restrict(x))).sum())
            .with_gradient(move |x| {
                let mut g = DVector::zeros(n);
                for f in &f2 {
                    let gk = f.gradient(&f.restrict(x));
                    for (a, &i) in f.indices().iter().enumerate() {
                        g[i] += gk[a];
                    }
                }
                g
            })
            .with_hessian(move |x| {
                let mut h = DMatrix::zeros(n, n);
                for f in &f3 {
                    let hk = f.hessian(&f.restrict(x));
                    for (a, &i) in f.indices().iter().enumerate() {
                        for (b, &j) in f.indices().iter().enumerate() {
                            h[(i, j)] += hk[(a, b)];
                        }
                    }
                }
                h
            })
    }
}
