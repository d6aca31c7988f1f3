//! Small dense linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest absolute entry of `a - a^T`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `(a + a^T) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Checks symmetry to `tol` relative to the largest entry and returns the
/// symmetrized matrix.
pub fn checked_symmetric(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let scale = a.amax().max(1.0);
    let asym = asymmetry(a);
    if asym > tol * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(symmetrize(a))
}

/// Lower Cholesky factor `L` with `L L^T = a`.
///
/// Reports the first leading minor (1-based) whose pivot is not strictly
/// positive.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { minor: j + 1 });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solves `L^T x = y` for lower-triangular `L`.
pub fn back_substitute_transpose(l: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = y.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let l = cholesky_lower(a)?;
    Ok(back_substitute_transpose(&l, &forward_substitute(&l, b)))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let l = cholesky_lower(a)?;
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        let col = back_substitute_transpose(&l, &forward_substitute(&l, &e));
        inv.set_column(j, &col);
    }
    Ok(symmetrize(&inv))
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        inv.set_column(j, &forward_substitute(l, &e));
    }
    inv
}

/// Ratio of largest to smallest absolute eigenvalue of a symmetric matrix.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let eig = symmetrize(a).symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `g x = b` for a symmetric Gram-type matrix.
///
/// Cholesky first; on failure a symmetric eigen-solve with eigenvalues floored
/// at `1e-12 * max eigenvalue`. More than one floored eigenvalue is reported as
/// a singular Gram matrix.
pub fn gram_solve(g: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Ok(x) = spd_solve(g, b) {
        return Ok(x);
    }
    let eig = symmetrize(g).symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-12 * max;
    let mut floored = 0;
    let mut inv_vals = DVector::<f64>::zeros(eig.eigenvalues.len());
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        if v <= floor {
            floored += 1;
            inv_vals[k] = 1.0 / floor.max(f64::MIN_POSITIVE);
        } else {
            inv_vals[k] = 1.0 / v;
        }
    }
    if floored > 1 || max == 0.0 {
        return Err(Error::SingularGram { floored });
    }
    let q = &eig.eigenvectors;
    let coeffs = q.transpose() * b;
    Ok(q * coeffs.component_mul(&inv_vals))
}

/// Symmetric principal square root via eigendecomposition.
pub fn symmetric_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetrize(a).symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reports_failing_minor() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        assert_eq!(cholesky_lower(&a), Err(Error::NotPositiveDefinite { minor: 3 }));
    }

    #[test]
    fn spd_inverse_matches_identity() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let inv = spd_inverse(&a).unwrap();
        let eye = &a * &inv;
        assert!((eye - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn gram_solve_rejects_rank_deficient() {
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        assert!(matches!(gram_solve(&g, &b), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn symmetric_sqrt_squares_back() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = symmetric_sqrt(&a);
        assert!((&r * &r - a).amax() < 1e-13);
    }
}
