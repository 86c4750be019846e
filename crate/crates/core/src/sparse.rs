//! Compressed sparse row matrices for the symmetric relation matrices.
//!
//! Both triangles are stored so that row access is direct; operations that
//! should produce symmetric output rebuild the lower triangle from the upper
//! one, which keeps symmetry exact rather than approximate.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows below this count are processed sequentially.
const PAR_ROWS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        CsrMatrix {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            dim,
            indptr,
            indices,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` entries; duplicates are summed
    /// in input order and explicit zeros dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: i.max(j) + 1,
                });
            }
            rows[i].push((j, v));
        }
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by_key(|&(j, _)| j);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
                for (j, v) in r {
                    match merged.last_mut() {
                        Some((lj, lv)) if *lj == j => *lv += v,
                        _ => merged.push((j, v)),
                    }
                }
                merged.retain(|&(_, v)| v != 0.0);
                merged
            })
            .collect();
        Ok(Self::from_rows(dim, rows))
    }

    /// Symmetric matrix from upper-triangle entries (`row <= col`).
    pub fn from_upper_triplets(dim: usize, upper: &[(usize, usize, f64)]) -> Result<Self> {
        let mut all = Vec::with_capacity(upper.len() * 2);
        for &(i, j, v) in upper {
            if i > j {
                return Err(Error::Format(format!("entry ({i},{j}) is below the diagonal")));
            }
            all.push((i, j, v));
            if i != j {
                all.push((j, i, v));
            }
        }
        Self::from_triplets(dim, &all)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(n, rows))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Upper-triangle entries `(i, j, v)` with `i <= j`, row-major.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .filter(move |(&j, _)| j >= i)
                .map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Rebuilds the lower triangle from the upper triangle.
    pub fn mirror_upper(&self) -> Self {
        let upper: Vec<_> = self.upper_triplets().collect();
        Self::from_upper_triplets(self.dim, &upper).expect("upper triplets are in range")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn map_entries(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for p in out.indptr[i]..out.indptr[i + 1] {
                out.values[p] = f(i, out.indices[p], out.values[p]);
            }
        }
        out
    }

    /// Drops entries with `|v| < tolerance`. A tolerance of 0 keeps everything.
    pub fn prune(&self, tolerance: f64) -> Self {
        if tolerance <= 0.0 {
            return self.clone();
        }
        let rows = (0..self.dim)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .filter(|(_, v)| v.abs() >= tolerance)
                    .map(|(&j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    fn check_dim(&self, other_dim: usize) -> Result<()> {
        if self.dim == other_dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other_dim,
            })
        }
    }

    pub fn add(&self, other: &CsrMatrix) -> Result<Self> {
        self.check_dim(other.dim)?;
        let rows = (0..self.dim)
            .map(|i| {
                let (ac, av) = self.row(i);
                let (bc, bv) = other.row(i);
                let mut out = Vec::with_capacity(ac.len().max(bc.len()));
                let (mut p, mut q) = (0, 0);
                while p < ac.len() || q < bc.len() {
                    if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                        out.push((ac[p], av[p]));
                        p += 1;
                    } else if p == ac.len() || bc[q] < ac[p] {
                        out.push((bc[q], bv[q]));
                        q += 1;
                    } else {
                        out.push((ac[p], av[p] + bv[q]));
                        p += 1;
                        q += 1;
                    }
                }
                out
            })
            .collect();
        Ok(Self::from_rows(self.dim, rows))
    }

    /// `y = A x`. Each row is reduced in column order, so the result does not
    /// depend on the thread count.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let row_dot = |i: usize| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<f64>()
        };
        Ok(if self.dim >= PAR_ROWS {
            (0..self.dim).into_par_iter().map(row_dot).collect()
        } else {
            (0..self.dim).map(row_dot).collect()
        })
    }

    /// Sparse product `A B` with a dense per-row accumulator. Contributions to
    /// each output entry are added in increasing order of the inner index.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        self.check_dim(other.dim)?;
        let n = self.dim;
        let row_product = |acc: &mut (Vec<f64>, Vec<bool>, Vec<usize>), i: usize| {
            let (dense, mark, touched) = acc;
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &b) in bc.iter().zip(bv) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    dense[j] += a * b;
                }
            }
            touched.sort_unstable();
            let row: Vec<(usize, f64)> = touched
                .iter()
                .filter_map(|&j| {
                    let v = dense[j];
                    dense[j] = 0.0;
                    mark[j] = false;
                    (v != 0.0).then_some((j, v))
                })
                .collect();
            touched.clear();
            row
        };
        let init = || (vec![0.0; n], vec![false; n], Vec::new());
        let rows: Vec<Vec<(usize, f64)>> = if n >= PAR_ROWS {
            (0..n).into_par_iter().map_init(init, row_product).collect()
        } else {
            let mut acc = init();
            (0..n).map(|i| row_product(&mut acc, i)).collect()
        };
        Ok(Self::from_rows(n, rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(3, &[(0, 1, 1.0), (0, 1, 2.0), (2, 2, 0.0), (1, 0, 3.0)]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.nnz(), 2);
        assert!(CsrMatrix::from_triplets(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn upper_round_trip() {
        let m = CsrMatrix::from_upper_triplets(3, &[(0, 1, 0.5), (1, 2, 0.25), (1, 1, 2.0)]).unwrap();
        assert_eq!(m.get(2, 1), 0.25);
        assert_eq!(m.max_asymmetry(), 0.0);
        let up: Vec<_> = m.upper_triplets().collect();
        assert_eq!(up, vec![(0, 1, 0.5), (1, 1, 2.0), (1, 2, 0.25)]);
        assert!(CsrMatrix::from_upper_triplets(3, &[(2, 1, 1.0)]).is_err());
    }

    #[test]
    fn product_of_path() {
        let n = CsrMatrix::from_dense(&dense(&[&[0.0, 0.5, 0.0], &[0.5, 0.0, 0.5], &[0.0, 0.5, 0.0]])).unwrap();
        let sq = n.matmul(&n).unwrap();
        let expect = dense(&[&[0.25, 0.0, 0.25], &[0.0, 0.5, 0.0], &[0.25, 0.0, 0.25]]);
        assert_eq!(sq.to_dense(), expect);
        assert_eq!(sq.add(&n).unwrap().get(1, 1), 0.5);
    }

    #[test]
    fn prune_keeps_large() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1e-9), (0, 1, 1.0)]).unwrap();
        assert_eq!(m.prune(1e-6).nnz(), 1);
        assert_eq!(m.prune(0.0).nnz(), 2);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(prop_oneof![3 => Just(0.0), 1 => 0.0f64..2.0], n * n)
            .prop_map(move |v| DMatrix::from_vec(n, n, v))
    }

    proptest! {
        #[test]
        fn matmul_matches_dense(a in arb_matrix(7), b in arb_matrix(7)) {
            let sa = CsrMatrix::from_dense(&a).unwrap();
            let sb = CsrMatrix::from_dense(&b).unwrap();
            let got = sa.matmul(&sb).unwrap().to_dense();
            let want = &a * &b;
            prop_assert!((got - want).amax() < 1e-12);
        }

        #[test]
        fn matvec_matches_dense(a in arb_matrix(6), x in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let sa = CsrMatrix::from_dense(&a).unwrap();
            let got = sa.matvec(&x).unwrap();
            let want = &a * nalgebra::DVector::from_vec(x.clone());
            for i in 0..6 {
                prop_assert!((got[i] - want[i]).abs() < 1e-12);
            }
        }
    }
}
