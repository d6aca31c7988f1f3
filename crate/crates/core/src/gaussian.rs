//! The indefinite-Gaussian subspace.
//!
//! Under a Gaussian measure with Cholesky factor `L`, the elements whose
//! exponents are the whitened coordinates `xi = L^-1 (x - mean)` and the
//! scaled half-vectorized outer product `W vech(xi xi^T)` form an orthonormal
//! basis for exponentiated quadratics. `W = sqrt(D^T D / 2)` with `D` the
//! duplication matrix.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::bayes::{BayesElement, GaussianMeasure};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, QuadratureSpec};
use crate::variational::{BasisSet, Coordinates};

/// Column-stacking vectorization.
pub fn vec_of(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_of`] for an `rows x cols` matrix.
pub fn unvec(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Half-vectorization: the lower triangle stacked column by column.
pub fn vech(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            out.push(a[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

/// Symmetric matrix from its half-vectorization.
pub fn unvech(v: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    if v.len() != n * (n + 1) / 2 {
        return Err(Error::DimensionMismatch { expected: n * (n + 1) / 2, got: v.len() });
    }
    let mut a = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            a[(i, j)] = v[k];
            a[(j, i)] = v[k];
            k += 1;
        }
    }
    Ok(a)
}

/// Position of `(i, j)` with `i >= j` in [`vech`] order.
pub fn vech_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * n - j * (j + 1) / 2 + i
}

/// Kronecker product.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Duplication matrix, its pseudoinverse and `sqrt(D^T D / 2)` for one
/// dimension.
#[derive(Clone, Debug)]
pub struct DuplicationOps {
    pub dim: usize,
    pub duplication: DMatrix<f64>,
    pub pseudo_inverse: DMatrix<f64>,
    pub sqrt_half_dtd: DMatrix<f64>,
    sqrt_half_dtd_inv: DMatrix<f64>,
}

/// Largest dimension for which duplication operators are built.
pub const MAX_DUPLICATION_DIM: usize = 64;

fn duplication_cache() -> &'static Mutex<HashMap<usize, Arc<DuplicationOps>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DuplicationOps>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl DuplicationOps {
    /// Builds (or fetches from the per-dimension cache) the operators.
    pub fn build(dim: usize) -> Result<Arc<Self>> {
        if dim == 0 || dim > MAX_DUPLICATION_DIM {
            return Err(Error::InvalidArgument(format!(
                "duplication operators need 1 <= N <= {MAX_DUPLICATION_DIM}, got {dim}"
            )));
        }
        if let Some(ops) = duplication_cache().lock().expect("cache lock").get(&dim) {
            return Ok(ops.clone());
        }
        let n2 = dim * dim;
        let nh = dim * (dim + 1) / 2;
        let mut d = DMatrix::zeros(n2, nh);
        for j in 0..dim {
            for i in 0..dim {
                d[(j * dim + i, vech_index(dim, i, j))] = 1.0;
            }
        }
        // D^T D, accumulated row by row (each row of D is sparse)
        let mut dtd = DMatrix::<f64>::zeros(nh, nh);
        for r in 0..n2 {
            let nz: Vec<usize> = (0..nh).filter(|&c| d[(r, c)] != 0.0).collect();
            for &a in &nz {
                for &b in &nz {
                    dtd[(a, b)] += d[(r, a)] * d[(r, b)];
                }
            }
        }
        let is_diagonal = (0..nh).all(|a| (0..nh).all(|b| a == b || dtd[(a, b)] == 0.0));
        let half = &dtd * 0.5;
        let (dtd_inv, sqrt_half, sqrt_half_inv) = if is_diagonal {
            let diag = dtd.diagonal();
            (
                DMatrix::from_diagonal(&diag.map(|v| 1.0 / v)),
                DMatrix::from_diagonal(&half.diagonal().map(f64::sqrt)),
                DMatrix::from_diagonal(&half.diagonal().map(|v| 1.0 / v.sqrt())),
            )
        } else {
            let s = linalg::symmetric_sqrt(&half);
            (linalg::spd_inverse(&dtd)?, s.clone(), linalg::spd_inverse(&s)?)
        };
        let pseudo_inverse = dtd_inv * d.transpose();
        let ops = Arc::new(Self {
            dim,
            duplication: d,
            pseudo_inverse,
            sqrt_half_dtd: sqrt_half,
            sqrt_half_dtd_inv: sqrt_half_inv,
        });
        duplication_cache().lock().expect("cache lock").insert(dim, ops.clone());
        Ok(ops)
    }

    /// `W vech(a)`.
    pub fn weighted_vech(&self, a: &DMatrix<f64>) -> DVector<f64> {
        &self.sqrt_half_dtd * vech(a)
    }

    /// Inverse of [`weighted_vech`](Self::weighted_vech).
    pub fn unweighted_unvech(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        unvech(&(&self.sqrt_half_dtd_inv * v), self.dim)
    }

    /// Diagonal weights of `W` in vech order.
    fn weight(&self, k: usize) -> f64 {
        self.sqrt_half_dtd[(k, k)]
    }
}

/// Orthonormal basis of the Gaussian subspace under a given measure:
/// `N` first-order elements followed by `N(N+1)/2` second-order elements.
#[derive(Clone, Debug)]
pub struct GaussianBasis {
    measure: GaussianMeasure,
    whitening: DMatrix<f64>,
    ops: Arc<DuplicationOps>,
}

impl GaussianBasis {
    pub fn new(measure: GaussianMeasure) -> Result<Self> {
        let ops = DuplicationOps::build(measure.dim())?;
        let whitening = linalg::lower_inverse(measure.cholesky());
        Ok(Self { measure, whitening, ops })
    }

    pub fn measure(&self) -> &GaussianMeasure {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn len(&self) -> usize {
        let n = self.dim();
        n * (n + 3) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duplication(&self) -> &DuplicationOps {
        &self.ops
    }

    /// First-order element `i`: exponent `xi_i`.
    pub fn first_order(&self, i: usize) -> Result<BayesElement> {
        let n = self.dim();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, max: n - 1 });
        }
        let row: DVector<f64> = self.whitening.row(i).transpose();
        let mean = self.measure.mean().clone();
        let r1 = row.clone();
        Ok(BayesElement::new(n, move |x| r1.dot(&(x - &mean)))
            .with_gradient(move |_| row.clone())
            .with_hessian(move |_| DMatrix::zeros(n, n)))
    }

    /// Second-order element `k` in vech order: exponent `w_k xi_i xi_j`.
    pub fn second_order(&self, k: usize) -> Result<BayesElement> {
        let n = self.dim();
        let nh = n * (n + 1) / 2;
        if k >= nh {
            return Err(Error::IndexOutOfRange { index: k, max: nh - 1 });
        }
        let (i, j) = (0..n)
            .flat_map(|j| (j..n).map(move |i| (i, j)))
            .nth(k)
            .expect("vech position exists");
        let w = self.ops.weight(k);
        let li: DVector<f64> = self.whitening.row(i).transpose();
        let lj: DVector<f64> = self.whitening.row(j).transpose();
        let mean = self.measure.mean().clone();
        let (li1, lj1, m1) = (li.clone(), lj.clone(), mean.clone());
        let (li2, lj2) = (li.clone(), lj.clone());
        let hess = (&li * lj.transpose() + &lj * li.transpose()) * w;
        Ok(BayesElement::new(n, move |x| {
            let d = x - &m1;
            w * li1.dot(&d) * lj1.dot(&d)
        })
        .with_gradient(move |x| {
            let d = x - &mean;
            (&li2 * lj2.dot(&d) + &lj2 * li2.dot(&d)) * w
        })
        .with_hessian(move |_| hess.clone()))
    }

    pub fn elements(&self) -> Vec<BayesElement> {
        let n = self.dim();
        let mut out: Vec<BayesElement> = (0..n).map(|i| self.first_order(i).expect("in range")).collect();
        out.extend((0..n * (n + 1) / 2).map(|k| self.second_order(k).expect("in range")));
        out
    }

    pub fn basis_set(&self) -> BasisSet {
        BasisSet::new(self.elements(), Some(self.measure.clone()))
    }

    pub fn rebase(&self, measure: GaussianMeasure) -> Result<Self> {
        Self::new(measure)
    }
}

/// Coordinates in a [`GaussianBasis`], split by order.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCoordinates {
    pub first: DVector<f64>,
    pub second: DVector<f64>,
}

impl GaussianCoordinates {
    pub fn to_coordinates(&self) -> Coordinates {
        let mut v: Vec<f64> = self.first.iter().copied().collect();
        v.extend(self.second.iter().copied());
        Coordinates::from_vec(v)
    }

    pub fn from_coordinates(alpha: &Coordinates, dim: usize) -> Result<Self> {
        let expected = dim * (dim + 3) / 2;
        if alpha.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: alpha.len() });
        }
        let v = alpha.vector();
        Ok(Self { first: v.rows(0, dim).into_owned(), second: v.rows(dim, expected - dim).into_owned() })
    }

    /// `(alpha_1^T alpha_1 + alpha_2^T alpha_2) / 2`.
    pub fn information(&self) -> f64 {
        0.5 * (self.first.norm_squared() + self.second.norm_squared())
    }
}

/// `E[grad phi]` and `E[hess phi]` under `measure`.
pub fn derivative_expectations(
    p: &BayesElement,
    measure: &GaussianMeasure,
    spec: &QuadratureSpec,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = measure.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    let rule = quadrature::gaussian_rule(measure, spec)?;
    let g = rule.expect_vector(n, |x| p.gradient(x))?;
    let h = rule.expect_matrix(n, n, |x| p.hessian(x))?;
    Ok((g, linalg::symmetrize(&h)))
}

/// Coordinates of `p` in the Gaussian basis of `measure`, from expected
/// derivatives: `alpha_1 = L^T E[grad]`, `alpha_2 = W vech(L^T E[hess] L)`.
pub fn gaussian_coordinates(
    p: &BayesElement,
    measure: &GaussianMeasure,
    spec: &QuadratureSpec,
) -> Result<GaussianCoordinates> {
    let (g, h) = derivative_expectations(p, measure, spec)?;
    coordinates_from_expectations(&g, &h, measure)
}

pub fn coordinates_from_expectations(
    expected_gradient: &DVector<f64>,
    expected_hessian: &DMatrix<f64>,
    measure: &GaussianMeasure,
) -> Result<GaussianCoordinates> {
    let ops = DuplicationOps::build(measure.dim())?;
    let l = measure.cholesky();
    let first = l.transpose() * expected_gradient;
    let second = ops.weighted_vech(&(l.transpose() * expected_hessian * l));
    Ok(GaussianCoordinates { first, second })
}

/// An exponentiated quadratic `exp(-(x - mean)^T info (x - mean) / 2)` whose
/// information matrix may be indefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct IndefGaussian {
    mean: DVector<f64>,
    info: DMatrix<f64>,
    positive_definite: bool,
}

impl IndefGaussian {
    pub fn new(mean: DVector<f64>, info: DMatrix<f64>) -> Result<Self> {
        if info.nrows() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: info.nrows() });
        }
        let info = linalg::checked_symmetric(&info, 1e-12)?;
        let positive_definite = linalg::cholesky_lower(&info).is_ok();
        Ok(Self { mean, info, positive_definite })
    }

    /// Reconstruction from Gaussian-basis coordinates:
    /// `S = unvech(W^-1 alpha_2)`, `mean = mu - L S^-1 alpha_1`,
    /// `info = L^-T S L^-1`.
    pub fn from_coordinates(alpha: &GaussianCoordinates, measure: &GaussianMeasure) -> Result<Self> {
        let ops = DuplicationOps::build(measure.dim())?;
        let s = ops.unweighted_unvech(&alpha.second)?;
        let cond = linalg::condition_number(&s);
        if !(cond <= 1e12) {
            return Err(Error::SingularInformation { condition: cond });
        }
        let l = measure.cholesky();
        let shift = s.clone().lu().solve(&alpha.first).ok_or(Error::SingularInformation { condition: cond })?;
        let mean = measure.mean() - l * shift;
        let l_inv = linalg::lower_inverse(l);
        let info = l_inv.transpose() * s * l_inv;
        Self::new(mean, linalg::symmetrize(&info))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn info(&self) -> &DMatrix<f64> {
        &self.info
    }

    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    pub fn to_element(&self) -> BayesElement {
        BayesElement::quadratic(self.mean.clone(), self.info.clone())
    }

    /// The corresponding Gaussian measure, when the information is SPD.
    pub fn to_measure(&self) -> Result<GaussianMeasure> {
        if !self.positive_definite {
            return Err(Error::MeasureInvalid("information matrix is not positive definite".into()));
        }
        GaussianMeasure::from_information(self.mean.clone(), &self.info)
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        Ok(self.to_measure()?.covariance().clone())
    }

    pub fn coordinates(&self, measure: &GaussianMeasure) -> Result<GaussianCoordinates> {
        let g = &self.info * (measure.mean() - &self.mean);
        coordinates_from_expectations(&g, &self.info, measure)
    }
}

/// Projection onto the Gaussian subspace of `measure`:
/// `info = E[hess phi]`, `info (mean - mu) = -E[grad phi]`.
pub fn project_to_gaussian(
    p: &BayesElement,
    measure: &GaussianMeasure,
    spec: &QuadratureSpec,
) -> Result<IndefGaussian> {
    let (g, h) = derivative_expectations(p, measure, spec)?;
    projection_from_expectations(&g, &h, measure.mean())
}

/// Gaussian projection from expected derivatives around `mu`.
pub fn projection_from_expectations(
    expected_gradient: &DVector<f64>,
    expected_hessian: &DMatrix<f64>,
    mu: &DVector<f64>,
) -> Result<IndefGaussian> {
    let cond = linalg::condition_number(expected_hessian);
    if !(cond <= 1e12) {
        return Err(Error::SingularInformation { condition: cond });
    }
    let step = match linalg::spd_solve(expected_hessian, expected_gradient) {
        Ok(s) => s,
        Err(_) => expected_hessian
            .clone()
            .lu()
            .solve(expected_gradient)
            .ok_or(Error::SingularInformation { condition: cond })?,
    };
    IndefGaussian::new(mu - step, expected_hessian.clone())
}

/// Information of a Gaussian under `measure`, in natural-parameter quadratic
/// form with blocks built from Kronecker products.
pub fn gaussian_information(g: &IndefGaussian, measure: &GaussianMeasure) -> Result<f64> {
    if !g.is_positive_definite() {
        return Err(Error::NotPositiveDefinite { minor: first_failing_minor(g.info()) });
    }
    let n = g.dim();
    if measure.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: measure.dim() });
    }
    let sigma = measure.covariance();
    let mu = measure.mean();
    let eye = DMatrix::<f64>::identity(n, n);
    let mu_col = DMatrix::from_column_slice(n, 1, mu.as_slice());
    // (mu^T ⊗ 1) is n x n^2
    let mu_t_kron = kron(&mu_col.transpose(), &eye);
    let mu_kron = kron(&mu_col, &eye);
    let top_right = -(sigma * &mu_t_kron);
    let bottom_left = -(&mu_kron * sigma);
    let bottom_right = kron(sigma, sigma) * 0.5 + &mu_kron * sigma * &mu_t_kron;
    let dim = n + n * n;
    let mut block = DMatrix::zeros(dim, dim);
    block.view_mut((0, 0), (n, n)).copy_from(sigma);
    block.view_mut((0, n), (n, n * n)).copy_from(&top_right);
    block.view_mut((n, 0), (n * n, n)).copy_from(&bottom_left);
    block.view_mut((n, n), (n * n, n * n)).copy_from(&bottom_right);
    let eta1 = g.info() * g.mean();
    let eta2 = vec_of(g.info());
    let mut eta = DVector::zeros(dim);
    eta.rows_mut(0, n).copy_from(&eta1);
    eta.rows_mut(n, n * n).copy_from(&eta2);
    Ok(0.5 * eta.dot(&(block * &eta)))
}

/// Information of a Gaussian under `measure` from its mean offset and trace
/// terms.
pub fn gaussian_information_trace(g: &IndefGaussian, measure: &GaussianMeasure) -> f64 {
    let sigma = measure.covariance();
    let d = measure.mean() - g.mean();
    let s = g.info();
    let quad = d.dot(&(s * sigma * s * &d));
    let tr = (s * sigma * s * sigma).trace();
    0.5 * (quad + 0.5 * tr)
}

/// Information of a Gaussian under `measure` from its basis coordinates.
pub fn gaussian_information_coordinates(g: &IndefGaussian, measure: &GaussianMeasure) -> Result<f64> {
    Ok(g.coordinates(measure)?.information())
}

fn first_failing_minor(a: &DMatrix<f64>) -> usize {
    match linalg::cholesky_lower(a) {
        Err(Error::NotPositiveDefinite { minor }) => minor,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational;

    #[test]
    fn duplication_two_by_two() {
        let ops = DuplicationOps::build(2).unwrap();
        let d = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(ops.duplication, d);
        let dp = DMatrix::from_row_slice(3, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((&ops.pseudo_inverse - dp).amax() < 1e-15);
        let w = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5f64.sqrt(), 1.0, 0.5f64.sqrt()]));
        assert!((&ops.sqrt_half_dtd - w).amax() < 1e-15);
    }

    #[test]
    fn duplication_scalar() {
        let ops = DuplicationOps::build(1).unwrap();
        assert_eq!(ops.duplication[(0, 0)], 1.0);
        assert_eq!(ops.pseudo_inverse[(0, 0)], 1.0);
        assert!(DuplicationOps::build(0).is_err());
        assert!(DuplicationOps::build(65).is_err());
    }

    #[test]
    fn vech_round_trip() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let v = vech(&a);
        assert_eq!(v.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unvech(&v, 3).unwrap(), a);
        let ops = DuplicationOps::build(3).unwrap();
        assert_eq!(&ops.duplication * v, vec_of(&a));
        assert_eq!(vech_index(3, 2, 1), 4);
    }

    #[test]
    fn standard_scalar_basis() {
        let basis = GaussianBasis::new(GaussianMeasure::standard(1)).unwrap();
        let e = basis.elements();
        assert_eq!(e.len(), 2);
        assert!((e[0].phi1(1.3) - 1.3).abs() < 1e-15);
        assert!((e[1].phi1(1.3) - 1.69 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal() {
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.4, 0.1, 0.4, 1.0, -0.2, 0.1, -0.2, 0.7]);
        let nu = GaussianMeasure::new(DVector::from_vec(vec![0.5, -1.0, 2.0]), cov).unwrap();
        let basis = GaussianBasis::new(nu.clone()).unwrap();
        assert_eq!(basis.len(), 9);
        let g = variational::gram(&basis.basis_set(), &nu, &QuadratureSpec::gauss_hermite(4)).unwrap();
        assert!((g - DMatrix::identity(9, 9)).amax() < 1e-10);
        for e in basis.elements() {
            assert!(e.derivative_mismatch(&DVector::from_vec(vec![0.1, 0.2, 0.3])) < 1e-5);
        }
    }

    #[test]
    fn coordinates_of_measure_itself() {
        let nu = GaussianMeasure::univariate(2.0, 3.0).unwrap();
        let c = gaussian_coordinates(&nu.to_element(), &nu, &QuadratureSpec::gauss_hermite(6)).unwrap();
        assert!(c.first[0].abs() < 1e-12);
        assert!((c.second[0] - 0.5f64.sqrt()).abs() < 1e-12);
        let z = gaussian_coordinates(&BayesElement::zero(1), &nu, &QuadratureSpec::gauss_hermite(6)).unwrap();
        assert_eq!(z.first[0], 0.0);
        assert_eq!(z.second[0], 0.0);
    }

    #[test]
    fn coordinates_match_inner_products() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 0.8]);
        let nu = GaussianMeasure::new(DVector::from_vec(vec![0.2, 0.1]), cov).unwrap();
        let p = BayesElement::new(2, |x| 0.3 * x[0].powi(4) + x[0] * x[1].powi(2) + (0.5 * x[1]).cos());
        let spec = QuadratureSpec::gauss_hermite(12);
        let by_derivatives = gaussian_coordinates(&p, &nu, &spec).unwrap().to_coordinates();
        let basis = GaussianBasis::new(nu.clone()).unwrap();
        let by_inner = variational::inner_products(&basis.basis_set(), &p, &nu, &spec).unwrap();
        assert!((by_derivatives.vector() - by_inner).amax() < 1e-6);
    }

    #[test]
    fn reconstruction_round_trip() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.5, -0.2, -0.2, 0.9]);
        let nu = GaussianMeasure::new(DVector::from_vec(vec![1.0, 0.0]), cov).unwrap();
        let info = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = IndefGaussian::new(DVector::from_vec(vec![0.3, -0.7]), info).unwrap();
        let alpha = g.coordinates(&nu).unwrap();
        let back = IndefGaussian::from_coordinates(&alpha, &nu).unwrap();
        assert!((back.mean() - g.mean()).amax() < 1e-12);
        assert!((back.info() - g.info()).amax() < 1e-12);
    }

    #[test]
    fn projection_of_gaussian_is_fixed_point() {
        let nu = GaussianMeasure::univariate(0.0, 4.0).unwrap();
        let p = BayesElement::normal(3.0, 0.5);
        let spec = QuadratureSpec::gauss_hermite(8);
        let g = project_to_gaussian(&p, &nu, &spec).unwrap();
        assert!((g.mean()[0] - 3.0).abs() < 1e-12);
        assert!((g.info()[(0, 0)] - 2.0).abs() < 1e-12);
        let again = project_to_gaussian(&g.to_element(), &nu, &spec).unwrap();
        assert!((again.mean() - g.mean()).amax() < 1e-12);
        assert!((again.info() - g.info()).amax() < 1e-12);
    }

    #[test]
    fn singular_information_is_rejected() {
        let nu = GaussianMeasure::standard(1);
        let p = BayesElement::univariate(|x| x);
        assert!(matches!(
            project_to_gaussian(&p, &nu, &QuadratureSpec::gauss_hermite(5)),
            Err(Error::SingularInformation { .. })
        ));
    }

    #[test]
    fn information_routes_and_limits() {
        let nu = GaussianMeasure::standard(1);
        let g = IndefGaussian::new(DVector::from_element(1, 0.0), DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!((gaussian_information(&g, &nu).unwrap() - 0.25).abs() < 1e-14);
        let (mu, var) = (1.5, 0.7);
        let g = IndefGaussian::new(DVector::from_element(1, mu), DMatrix::from_element(1, 1, 1.0 / var)).unwrap();
        let closed = (1.0 + 2.0 * mu * mu) / (4.0 * var * var);
        assert!((gaussian_information(&g, &nu).unwrap() - closed).abs() < 1e-12);
        assert!((gaussian_information_trace(&g, &nu) - closed).abs() < 1e-12);
        assert!((gaussian_information_coordinates(&g, &nu).unwrap() - closed).abs() < 1e-12);
        let broad = IndefGaussian::new(DVector::from_element(1, mu), DMatrix::from_element(1, 1, 1e-8)).unwrap();
        assert!(gaussian_information(&broad, &nu).unwrap() < 1e-14);
        let indefinite = IndefGaussian::new(DVector::from_element(1, 0.0), DMatrix::from_element(1, 1, -1.0)).unwrap();
        assert!(!indefinite.is_positive_definite());
        assert!(gaussian_information(&indefinite, &nu).is_err());
        assert!(indefinite.to_measure().is_err());
    }
}
