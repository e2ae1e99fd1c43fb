use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive};
#[cfg(test)]
use num_traits::Zero;

use super::SparseMatrix;

/// Invariant factors of an integer matrix, as a divisibility chain.
///
/// Unit pivots are eliminated sparsely first; the remaining core goes
/// through a dense reduction in i128, redone with big integers on overflow.
pub fn invariant_factors(m: &SparseMatrix) -> Vec<BigUint> {
    let (units, core) = eliminate_units(m);
    let mut out = vec![BigUint::one(); units];
    if !core.is_empty() {
        let core128: Vec<Vec<i128>> = core.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
        let diag: Vec<BigUint> = match dense_snf(core128, false) {
            Some(res) => res.diagonal.iter().map(|v| BigUint::from(v.unsigned_abs())).collect(),
            None => {
                let big: Vec<Vec<BigInt>> = core.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
                dense_snf(big, false)
                    .expect("big integers never overflow")
                    .diagonal
                    .iter()
                    .map(|v| v.abs().to_biguint().unwrap())
                    .collect()
            }
        };
        out.extend(diag);
    }
    out
}

/// Rank over the integers.
pub fn rank(m: &SparseMatrix) -> usize {
    invariant_factors(m).len()
}

/// Full decomposition U * M * V = D with unimodular U, V.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub factors: Vec<BigUint>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
}

/// Dense Smith normal form with transforms; intended for small matrices.
pub fn smith_normal_form(m: &[Vec<i64>]) -> SnfDecomposition {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let res = dense_snf(big, true).expect("big integers never overflow");
    let mut d = res.matrix;
    // Normalise signs so the diagonal is non-negative.
    let mut v = res.v.unwrap();
    for k in 0..rows.min(cols) {
        if d[k][k].is_negative() {
            d[k][k] = -d[k][k].clone();
            for row in v.iter_mut() {
                row[k] = -row[k].clone();
            }
        }
    }
    SnfDecomposition {
        factors: res.diagonal.iter().map(|x| x.abs().to_biguint().unwrap()).collect(),
        u: res.u.unwrap(),
        v,
        d,
    }
}

struct DenseResult<T> {
    diagonal: Vec<T>,
    matrix: Vec<Vec<T>>,
    u: Option<Vec<Vec<T>>>,
    v: Option<Vec<Vec<T>>>,
}

trait SnfInt: Clone + Integer + Signed + CheckedMul + CheckedSub + CheckedAdd {}
impl<T: Clone + Integer + Signed + CheckedMul + CheckedSub + CheckedAdd> SnfInt for T {}

fn identity<T: SnfInt>(n: usize) -> Vec<Vec<T>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

/// row_a -= q * row_b on every matrix in `mats`, checked.
fn row_axpy<T: SnfInt>(mat: &mut [Vec<T>], a: usize, b: usize, q: &T) -> Option<()> {
    let (ra, rb) = if a < b {
        let (x, y) = mat.split_at_mut(b);
        (&mut x[a], &y[0])
    } else {
        let (x, y) = mat.split_at_mut(a);
        (&mut y[0], &x[b])
    };
    for (x, y) in ra.iter_mut().zip(rb.iter()) {
        if !y.is_zero() {
            *x = x.checked_sub(&y.checked_mul(q)?)?;
        }
    }
    Some(())
}

fn col_axpy<T: SnfInt>(mat: &mut [Vec<T>], a: usize, b: usize, q: &T) -> Option<()> {
    for row in mat.iter_mut() {
        if !row[b].is_zero() {
            row[a] = row[a].checked_sub(&row[b].checked_mul(q)?)?;
        }
    }
    Some(())
}

fn dense_snf<T: SnfInt>(mut a: Vec<Vec<T>>, track: bool) -> Option<DenseResult<T>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut u = track.then(|| identity::<T>(rows));
    let mut v = track.then(|| identity::<T>(cols));
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest non-zero entry of the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        if let Some(u) = u.as_mut() {
            u.swap(t, pi);
        }
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        if let Some(v) = v.as_mut() {
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    row_axpy(&mut a, i, t, &q)?;
                    if let Some(u) = u.as_mut() {
                        row_axpy(u, i, t, &q)?;
                    }
                    dirty |= !a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    col_axpy(&mut a, j, t, &q)?;
                    if let Some(v) = v.as_mut() {
                        col_axpy(v, j, t, &q)?;
                    }
                    dirty |= !a[t][j].is_zero();
                }
            }
            if dirty {
                // Move the smallest remainder in row/column t to the pivot.
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    a.swap(t, best.0);
                    if let Some(u) = u.as_mut() {
                        u.swap(t, best.0);
                    }
                } else if best.1 != t {
                    for row in a.iter_mut() {
                        row.swap(t, best.1);
                    }
                    if let Some(v) = v.as_mut() {
                        for row in v.iter_mut() {
                            row.swap(t, best.1);
                        }
                    }
                }
                continue;
            }
            // Row and column are clear; enforce divisibility of the block.
            let mut bad = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a[i][j].is_zero() && !a[i][j].is_multiple_of(&a[t][t]) {
                        bad = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let minus_one = T::zero() - T::one();
                    row_axpy(&mut a, t, i, &minus_one)?;
                    if let Some(u) = u.as_mut() {
                        row_axpy(u, t, i, &minus_one)?;
                    }
                }
                None => break,
            }
        }
        diagonal.push(a[t][t].clone());
        t += 1;
    }
    Some(DenseResult { diagonal, matrix: a, u, v })
}

/// Eliminates unit pivots sparsely. Returns the number of unit pivots and
/// the remaining dense core (rows x cols of what is left).
fn eliminate_units(m: &SparseMatrix) -> (usize, Vec<Vec<i64>>) {
    let mut rows: Vec<Option<Vec<(usize, i64)>>> = m.row_lists().into_iter().map(Some).collect();
    let ncols = m.cols();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row.as_ref().unwrap() {
            col_rows[c].push(r);
        }
    }
    let mut col_alive = vec![true; ncols];
    let mut units = 0usize;

    let entry = |row: &[(usize, i64)], c: usize| row.binary_search_by_key(&c, |&(k, _)| k).ok().map(|k| row[k].1);

    'passes: loop {
        let mut order: Vec<usize> = (0..ncols).filter(|&c| col_alive[c]).collect();
        if order.is_empty() {
            break;
        }
        order.sort_by_key(|&c| col_rows[c].len());
        let mut progress = false;
        for c in order {
            if !col_alive[c] {
                continue;
            }
            // Refresh the row list of column c.
            let mut live: Vec<usize> = col_rows[c]
                .iter()
                .copied()
                .filter(|&r| rows[r].as_ref().is_some_and(|row| entry(row, c).is_some()))
                .collect();
            live.sort_unstable();
            live.dedup();
            col_rows[c] = live.clone();
            if live.is_empty() {
                col_alive[c] = false;
                continue;
            }
            let pivot = live
                .iter()
                .copied()
                .filter(|&r| entry(rows[r].as_ref().unwrap(), c).is_some_and(|v| v.abs() == 1))
                .min_by_key(|&r| rows[r].as_ref().unwrap().len());
            let Some(p) = pivot else { continue };
            let prow = rows[p].clone().unwrap();
            let pv = entry(&prow, c).unwrap();
            let mut ok = true;
            for &r in &live {
                if r == p {
                    continue;
                }
                let row = rows[r].as_ref().unwrap();
                let f = entry(row, c).unwrap() * pv;
                match sub_scaled(row, &prow, f) {
                    Some(new_row) => {
                        for &(k, _) in &new_row {
                            if entry(row, k).is_none() {
                                col_rows[k].push(r);
                            }
                        }
                        rows[r] = Some(new_row);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                // Leave the rest to the dense stage.
                break 'passes;
            }
            rows[p] = None;
            col_alive[c] = false;
            units += 1;
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let alive_rows: Vec<usize> =
        (0..rows.len()).filter(|&r| rows[r].as_ref().is_some_and(|row| !row.is_empty())).collect();
    let mut alive_cols: Vec<usize> = alive_rows
        .iter()
        .flat_map(|&r| rows[r].as_ref().unwrap().iter().map(|&(c, _)| c))
        .collect();
    alive_cols.sort_unstable();
    alive_cols.dedup();
    let mut col_pos = vec![usize::MAX; ncols];
    for (k, &c) in alive_cols.iter().enumerate() {
        col_pos[c] = k;
    }
    let core = alive_rows
        .iter()
        .map(|&r| {
            let mut dense = vec![0i64; alive_cols.len()];
            for &(c, v) in rows[r].as_ref().unwrap() {
                dense[col_pos[c]] = v;
            }
            dense
        })
        .collect();
    (units, core)
}

/// row - f * pivot, merging sorted lists; None on overflow.
fn sub_scaled(row: &[(usize, i64)], pivot: &[(usize, i64)], f: i64) -> Option<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j >= pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i >= row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i]);
            i += 1;
        } else if take_piv {
            out.push((pivot[j].0, pivot[j].1.checked_mul(f)?.checked_neg()?));
            j += 1;
        } else {
            let v = row[i].1.checked_sub(pivot[j].1.checked_mul(f)?)?;
            if v != 0 {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

/// Converts a factor list to u64 where possible (for display and tests).
pub fn factors_u64(f: &[BigUint]) -> Vec<u64> {
    f.iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let n = a.len();
        let m = b.first().map_or(0, Vec::len);
        let k = b.len();
        (0..n)
            .map(|i| (0..m).map(|j| (0..k).fold(BigInt::zero(), |s, t| s + &a[i][t] * &b[t][j])).collect())
            .collect()
    }

    #[test]
    fn triangle_incidence_has_factors_1_1_2() {
        let m = SparseMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert_eq!(factors_u64(&invariant_factors(&m)), vec![1, 1, 2]);
        let snf = smith_normal_form(&m.to_dense());
        assert_eq!(factors_u64(&snf.factors), vec![1, 1, 2]);
    }

    #[test]
    fn trivial_cases() {
        assert!(invariant_factors(&SparseMatrix::zeros(3, 4)).is_empty());
        assert_eq!(factors_u64(&invariant_factors(&SparseMatrix::identity(3))), vec![1, 1, 1]);
    }

    #[test]
    fn transforms_diagonalise() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let snf = smith_normal_form(&m);
        assert_eq!(factors_u64(&snf.factors), vec![2, 6, 12]);
        let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        assert_eq!(mul(&mul(&snf.u, &big), &snf.v), snf.d);
    }

    #[test]
    fn non_unit_core_goes_dense() {
        let m = SparseMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(factors_u64(&invariant_factors(&m)), vec![1, 6]);
    }
}
