//! Dense linear algebra over a prime field, used for exactness checks.

use super::SparseMatrix;

#[derive(Clone, Copy, Debug)]
pub struct Field {
    pub p: u64,
}

impl Field {
    pub fn new(p: u64) -> Self {
        Field { p }
    }

    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    fn inv(&self, a: u64) -> u64 {
        let (mut base, mut exp, mut acc) = (a % self.p, self.p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = (acc as u128 * base as u128 % self.p as u128) as u64;
            }
            base = (base as u128 * base as u128 % self.p as u128) as u64;
            exp >>= 1;
        }
        acc
    }

    pub fn dense(&self, m: &SparseMatrix) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; m.cols()]; m.rows()];
        for (r, c, v) in m.triplets() {
            out[r][c] = self.reduce(v);
        }
        out
    }

    /// Row echelon form in place; returns pivot columns.
    fn echelon(&self, a: &mut [Vec<u64>]) -> Vec<usize> {
        let p = self.p as u128;
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(k) = (r..rows).find(|&k| a[k][c] != 0) else { continue };
            a.swap(r, k);
            let inv = self.inv(a[r][c]);
            for x in a[r].iter_mut() {
                *x = (*x as u128 * inv as u128 % p) as u64;
            }
            let pivot_row = a[r].clone();
            for (k, row) in a.iter_mut().enumerate() {
                if k != r && row[c] != 0 {
                    let f = row[c] as u128;
                    for (x, &y) in row.iter_mut().zip(&pivot_row) {
                        if y != 0 {
                            *x = ((*x as u128 + p * p - f * y as u128) % p) as u64;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, a: &[Vec<u64>]) -> usize {
        let mut a = a.to_vec();
        self.echelon(&mut a).len()
    }

    /// Basis of the kernel, as column vectors.
    pub fn kernel(&self, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
        let mut a = a.to_vec();
        let pivots = self.echelon(&mut a);
        let mut is_pivot = vec![false; cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = (self.p - a[r][free]) % self.p;
            }
            out.push(v);
        }
        out
    }

    /// Product of a matrix with each of the given column vectors.
    pub fn apply(&self, a: &[Vec<u64>], vectors: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let p = self.p as u128;
        vectors
            .iter()
            .map(|v| {
                a.iter()
                    .map(|row| (row.iter().zip(v).map(|(&x, &y)| x as u128 * y as u128 % p).sum::<u128>() % p) as u64)
                    .collect()
            })
            .collect()
    }

    /// Rank of the span of column vectors (each of length `dim`).
    pub fn span_rank(&self, vectors: &[Vec<u64>], dim: usize) -> usize {
        if vectors.is_empty() || dim == 0 {
            return 0;
        }
        // Store vectors as rows.
        self.rank(vectors)
    }

    /// Columns of a matrix as vectors.
    pub fn columns(&self, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
        (0..cols).map(|c| a.iter().map(|row| row[c]).collect()).collect()
    }
}
