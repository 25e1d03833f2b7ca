use alloc::vec;
use alloc::vec::Vec;

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut count = vec![0usize; rows + 1];
        for &(r, _, _) in triplets {
            count[r + 1] += 1;
        }
        for r in 0..rows {
            count[r + 1] += count[r];
        }
        let mut next = count.clone();
        let mut cols_tmp = vec![0usize; triplets.len()];
        let mut vals_tmp = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols_tmp[next[r]] = c;
            vals_tmp[next[r]] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..rows {
            order.clear();
            order.extend(count[r]..count[r + 1]);
            order.sort_unstable_by_key(|&p| cols_tmp[p]);
            for &p in &order {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == cols_tmp[p] {
                    *values.last_mut().unwrap() += vals_tmp[p];
                } else {
                    col_idx.push(cols_tmp[p]);
                    values.push(vals_tmp[p]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    /// `(row, col, value)` for every stored entry, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<(usize, usize, f64)> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t)
    }

    /// Submatrix on the given rows and columns; `col_map[c]` is the new
    /// column of old column `c`, or `usize::MAX` to drop it.
    pub fn select(&self, rows: &[usize], col_map: &[usize], new_cols: usize) -> Self {
        let mut t = Vec::new();
        for (nr, &r) in rows.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if col_map[c] != usize::MAX {
                    t.push((nr, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), new_cols, &t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_rc − a_cr|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets().fold(0.0, |m, (r, c, v)| m.max((v - self.get(c, r)).abs()))
    }

    /// True when `(r, c)` stored implies `(c, r)` stored.
    pub fn is_structurally_symmetric(&self) -> bool {
        self.rows == self.cols && self.triplets().all(|(r, c, _)| self.row(c).0.binary_search(&r).is_ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, -1.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 2), 4.0);
        assert_eq!(a.row(0).0, &[0, 2]);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![6.0, -1.0]);
        let t = a.transpose();
        assert_eq!(t.get(2, 0), 4.0);
        assert_eq!(t.rows(), 3);
    }
}
