//! Sparse `L D U` factorization for matrices with symmetric sparsity pattern.
//!
//! Rows are eliminated in a fill-reducing order without pivoting. The pattern
//! of row `k` of `L` (equivalently column `k` of `U`) is the elimination-tree
//! reach of the nonzeros left of the diagonal, so `L` and `Uᵀ` share one index
//! structure. Diagonally dominant and positive-definite stiffness blocks never
//! need pivoting; a vanishing pivot is reported with the original dof index.

use alloc::vec;
use alloc::vec::Vec;

use super::ordering::nested_dissection;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseLu {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// Column `j` of `L` (rows `> j`) and row `j` of `U` (columns `> j`).
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_val: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseLu {
    /// Factors `a` after a nested-dissection ordering of its graph.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let adj: Vec<Vec<usize>> =
            (0..a.rows()).map(|r| a.row(r).0.iter().copied().filter(|&c| c != r).collect()).collect();
        Self::factor_with_order(a, nested_dissection(&adj))
    }

    /// Factors with a caller-supplied ordering (`perm[new] = old`).
    pub fn factor_with_order(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || perm.len() != n {
            return Err(Error::Dimension { expected: n, got: a.cols().max(perm.len()) });
        }
        let mut pinv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        let at = a.transpose();

        // Elimination tree of the permuted pattern.
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for &c in a.row(perm[k]).0 {
                let mut i = pinv[c];
                while i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == usize::MAX {
                        parent[i] = k;
                        break;
                    }
                    i = next;
                }
            }
        }

        // Symbolic pass: column counts of L.
        let mut flag = vec![usize::MAX; n];
        let mut stack = vec![0usize; n];
        let mut counts = vec![0usize; n];
        for k in 0..n {
            let top = ereach(a, &perm, &pinv, &parent, k, &mut flag, &mut stack);
            for &j in &stack[top..] {
                counts[j] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut l_val = vec![0.0; nnz];
        let mut u_val = vec![0.0; nnz];
        let mut fill = col_ptr.clone();
        let mut diag = vec![0.0; n];

        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        flag.iter_mut().for_each(|f| *f = usize::MAX);
        for k in 0..n {
            let top = ereach(a, &perm, &pinv, &parent, k, &mut flag, &mut stack);
            let mut dk = 0.0;
            // Row k of P A Pᵀ left of the diagonal goes to z, column k above it to y.
            let (cols, vals) = a.row(perm[k]);
            for (&c, &v) in cols.iter().zip(vals) {
                let i = pinv[c];
                if i < k {
                    z[i] += v;
                } else if i == k {
                    dk += v;
                }
            }
            let (cols, vals) = at.row(perm[k]);
            for (&c, &v) in cols.iter().zip(vals) {
                let i = pinv[c];
                if i < k {
                    y[i] += v;
                }
            }
            for &j in &stack[top..] {
                let (yj, zj) = (y[j], z[j]);
                y[j] = 0.0;
                z[j] = 0.0;
                for p in col_ptr[j]..fill[j] {
                    let i = row_idx[p];
                    y[i] -= l_val[p] * yj;
                    z[i] -= u_val[p] * zj;
                }
                let lkj = zj / diag[j];
                dk -= lkj * yj;
                let p = fill[j];
                row_idx[p] = k;
                l_val[p] = lkj;
                u_val[p] = yj / diag[j];
                fill[j] += 1;
            }
            if !(dk.abs() > 1e-14 * scale) {
                return Err(Error::SingularPivot { dof: perm[k], pivot: dk });
            }
            diag[k] = dk;
        }
        Ok(Self { n, perm, col_ptr, row_idx, l_val, u_val, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored off-diagonal entries of `L`.
    pub fn fill(&self) -> usize {
        self.row_idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut w: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for j in 0..n {
            let wj = w[j];
            if wj != 0.0 {
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    w[self.row_idx[p]] -= self.l_val[p] * wj;
                }
            }
        }
        for j in 0..n {
            w[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let mut s = w[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                s -= self.u_val[p] * w[self.row_idx[p]];
            }
            w[j] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &old) in self.perm.iter().enumerate() {
            x[old] = w[i];
        }
        x
    }
}

/// Nonzero pattern of row `k` of `L`, in topological order, as `stack[top..]`.
fn ereach(
    a: &CsrMatrix,
    perm: &[usize],
    pinv: &[usize],
    parent: &[usize],
    k: usize,
    flag: &mut [usize],
    stack: &mut [usize],
) -> usize {
    let n = stack.len();
    let mut top = n;
    flag[k] = k;
    for &c in a.row(perm[k]).0 {
        let mut i = pinv[c];
        if i >= k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
