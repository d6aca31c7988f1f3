//! Symmetric sparse storage, LDL^T factorization on a symbolic fill pattern,
//! and the selected inverse.
//!
//! The selected inverse computes the entries of `A^-1` on the filled pattern
//! of `L` only, sweeping columns from last to first:
//!
//! ```text
//! S_ij = -sum_{k in col(j)} L_kj S_ik            (i in col(j))
//! S_jj = 1 / d_j - sum_{k in col(j)} L_kj S_kj
//! ```
//!
//! For a chain (tridiagonal pattern) this is the familiar backward sweep over
//! neighbouring blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gvi::factor::FactorGraph;

/// Lower-triangular sparsity pattern (diagonal included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    n: usize,
    /// Strictly-lower rows of each column, ascending.
    columns: Vec<Vec<usize>>,
}

impl Pattern {
    /// Pattern of `sum_k P_k^T H_k P_k`: every index pair within a factor.
    pub fn from_graph(graph: &FactorGraph) -> Self {
        let n = graph.num_vars();
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for f in graph.factors() {
            for &i in f.indices() {
                for &j in f.indices() {
                    if i > j {
                        cols[j].insert(i);
                    }
                }
            }
        }
        Self { n, columns: cols.into_iter().map(|c| c.into_iter().collect()).collect() }
    }

    pub fn dense(n: usize) -> Self {
        Self { n, columns: (0..n).map(|j| ((j + 1)..n).collect()).collect() }
    }

    pub fn diagonal(n: usize) -> Self {
        Self { n, columns: vec![Vec::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        i == j || self.columns[j].binary_search(&i).is_ok()
    }

    /// Number of stored entries in the lower triangle.
    pub fn nnz(&self) -> usize {
        self.n + self.columns.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        self.n == other.n && (0..self.n).all(|j| self.columns[j].iter().all(|&i| other.contains(i, j)))
    }

    /// Entries `(i, j)` with `i >= j`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |j| std::iter::once((j, j)).chain(self.columns[j].iter().map(move |&i| (i, j))))
    }

    /// Elimination-tree parents of the filled pattern.
    pub fn elimination_tree(&self) -> Vec<Option<usize>> {
        self.symbolic_fill().columns.iter().map(|c| c.first().copied()).collect()
    }

    /// Pattern of the Cholesky factor: column `j` is its own rows merged with
    /// the rows of every elimination-tree child, minus `j`.
    pub fn symbolic_fill(&self) -> Pattern {
        let n = self.n;
        let mut filled: Vec<BTreeSet<usize>> = self.columns.iter().map(|c| c.iter().copied().collect()).collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for c in std::mem::take(&mut children[j]) {
                let inherited: Vec<usize> = filled[c].iter().copied().filter(|&r| r > j).collect();
                filled[j].extend(inherited);
            }
            if let Some(&parent) = filled[j].iter().next() {
                children[parent].push(j);
            }
        }
        Pattern { n, columns: filled.into_iter().map(|c| c.into_iter().collect()).collect() }
    }
}

/// Symmetric matrix stored on a fixed pattern (lower triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    pattern: Arc<Pattern>,
    values: BTreeMap<(usize, usize), f64>,
}

impl SparseSymmetric {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = pattern.entries().map(|e| (e, 0.0)).collect();
        Self { pattern, values }
    }

    /// Copies the pattern entries of a dense symmetric matrix; entries
    /// outside the pattern must be zero.
    pub fn from_dense(a: &DMatrix<f64>, pattern: Arc<Pattern>) -> Result<Self> {
        let n = pattern.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        for j in 0..n {
            for i in j..n {
                if !pattern.contains(i, j) && a[(i, j)] != 0.0 {
                    return Err(Error::InvalidArgument(format!("entry ({i}, {j}) lies outside the sparsity pattern")));
                }
            }
        }
        let values = pattern.entries().map(|(i, j)| ((i, j), 0.5 * (a[(i, j)] + a[(j, i)]))).collect();
        Ok(Self { pattern, values })
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i >= j { (i, j) } else { (j, i) };
        self.values.get(&key).copied().unwrap_or(0.0)
    }

    /// Adds `v` to entry `(i, j)` (and its mirror); fails outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let key = if i >= j { (i, j) } else { (j, i) };
        match self.values.get_mut(&key) {
            Some(slot) => {
                *slot += v;
                Ok(())
            }
            None => Err(Error::InvalidArgument(format!("entry ({i}, {j}) lies outside the sparsity pattern"))),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for (&(i, j), &v) in &self.values {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim());
        for (&(i, j), &v) in &self.values {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }
}

/// `A = L D L^T` with unit-diagonal `L` stored on the filled pattern.
#[derive(Clone, Debug)]
pub struct SparseLdl {
    fill: Pattern,
    /// Column `j` holds `L_ij` for the rows in `fill.columns[j]`.
    lower: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

impl SparseLdl {
    /// Factorizes; a non-positive pivot is reported as the failing leading
    /// minor (1-based).
    pub fn factor(a: &SparseSymmetric) -> Result<Self> {
        let fill = a.pattern().symbolic_fill();
        let n = fill.dim();
        // for each row, the columns k < i with L_ik structurally nonzero
        let mut row_structure: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for &i in &fill.columns[j] {
                row_structure[i].push(j);
            }
        }
        let mut lower: Vec<Vec<f64>> = fill.columns.iter().map(|c| vec![0.0; c.len()]).collect();
        let mut diag = vec![0.0; n];
        let lookup = |lower: &Vec<Vec<f64>>, i: usize, k: usize| -> f64 {
            match fill.columns[k].binary_search(&i) {
                Ok(pos) => lower[k][pos],
                Err(_) => 0.0,
            }
        };
        for j in 0..n {
            let mut d = a.get(j, j);
            for &k in &row_structure[j] {
                let l = lookup(&lower, j, k);
                d -= l * l * diag[k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { minor: j + 1 });
            }
            diag[j] = d;
            for (pos, &i) in fill.columns[j].iter().enumerate() {
                let mut s = a.get(i, j);
                // shared columns k < j of rows i and j
                for &k in &row_structure[j] {
                    let lik = lookup(&lower, i, k);
                    if lik != 0.0 {
                        s -= lik * lookup(&lower, j, k) * diag[k];
                    }
                }
                lower[j][pos] = s / d;
            }
        }
        Ok(Self { fill, lower, diag })
    }

    pub fn fill(&self) -> &Pattern {
        &self.fill
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.diag.len();
        let mut y = b.clone();
        for j in 0..n {
            let yj = y[j];
            for (pos, &i) in self.fill.columns[j].iter().enumerate() {
                y[i] -= self.lower[j][pos] * yj;
            }
        }
        for j in 0..n {
            y[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for (pos, &i) in self.fill.columns[j].iter().enumerate() {
                s -= self.lower[j][pos] * y[i];
            }
            y[j] = s;
        }
        y
    }

    /// Entries of `A^-1` on the filled pattern.
    pub fn selected_inverse(&self) -> SparseSymmetric {
        let n = self.diag.len();
        let mut s: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let key = |i: usize, j: usize| if i >= j { (i, j) } else { (j, i) };
        for j in (0..n).rev() {
            let rows = &self.fill.columns[j];
            let l = &self.lower[j];
            for &i in rows.iter().rev() {
                let v: f64 = rows.iter().zip(l).map(|(&k, &lkj)| lkj * s[&key(i, k)]).sum();
                s.insert((i, j), -v);
            }
            let v: f64 = rows.iter().zip(l).map(|(&k, &lkj)| lkj * s[&(k, j)]).sum();
            s.insert((j, j), 1.0 / self.diag[j] - v);
        }
        SparseSymmetric { pattern: Arc::new(self.fill.clone()), values: s }
    }
}
