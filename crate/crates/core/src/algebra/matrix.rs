use std::collections::BTreeMap;

/// Integer matrix stored column-wise as sorted (row, value) lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: (0..n).map(|k| vec![(k, 1)]).collect() }
    }

    /// Builds from (row, col, value) triplets; repeated positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); cols];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            *acc[c].entry(r).or_insert(0) += v;
        }
        SparseMatrix {
            rows,
            cols: acc.into_iter().map(|m| m.into_iter().filter(|&(_, v)| v != 0).collect()).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v)));
        SparseMatrix::from_triplets(nrows, ncols, trip)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.cols[c]
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.cols[c].binary_search_by_key(&r, |&(k, _)| k).map_or(0, |k| self.cols[c][k].1)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.cols.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix::from_triplets(self.cols(), self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; self.cols()]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// Rows as sorted (col, value) lists.
    pub fn row_lists(&self) -> Vec<Vec<(usize, i64)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (r, c, v) in self.triplets() {
            out[r].push((c, v));
        }
        out
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols(), other.rows, "dimension mismatch in product");
        let mut cols = Vec::with_capacity(other.cols());
        for col in &other.cols {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(k, v) in col {
                for &(r, w) in &self.cols[k] {
                    *acc.entry(r).or_insert(0) += v * w;
                }
            }
            cols.push(acc.into_iter().filter(|&(_, v)| v != 0).collect());
        }
        SparseMatrix { rows: self.rows, cols }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.cols()), (other.rows, other.cols()));
        SparseMatrix::from_triplets(self.rows, self.cols(), self.triplets().chain(other.triplets()))
    }

    pub fn scale(&self, k: i64) -> SparseMatrix {
        SparseMatrix::from_triplets(self.rows, self.cols(), self.triplets().map(|(r, c, v)| (r, c, v * k)))
    }

    /// Sub-matrix on the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut row_pos = vec![usize::MAX; self.rows];
        for (k, &r) in rows.iter().enumerate() {
            row_pos[r] = k;
        }
        let trip = cols.iter().enumerate().flat_map(|(k, &c)| {
            let row_pos = &row_pos;
            self.cols[c].iter().filter_map(move |&(r, v)| (row_pos[r] != usize::MAX).then_some((row_pos[r], k, v)))
        });
        SparseMatrix::from_triplets(rows.len(), cols.len(), trip)
    }
}
