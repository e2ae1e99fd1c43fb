use std::collections::HashMap;

use super::SparseMatrix;
use crate::model::{GradedChainComplex, SimplicialComplex};

/// Simplicial chain complex with faces oriented by increasing vertex order.
/// With `reduced`, the empty face sits in degree -1.
pub fn simplicial_chain_complex(k: &SimplicialComplex, reduced: bool) -> GradedChainComplex<Vec<usize>> {
    let mut c = GradedChainComplex::new(-1);
    for f in &k.faces {
        if f.is_empty() && !reduced {
            continue;
        }
        c.bases.entry(f.len() as i64 - 1).or_insert_with(Vec::new).push(f.clone());
    }
    let index: HashMap<Vec<usize>, usize> =
        c.bases.values().flat_map(|b| b.iter().enumerate().map(|(j, f)| (f.clone(), j))).collect();
    let degrees: Vec<i64> = c.bases.keys().copied().collect();
    for d in degrees {
        if !c.bases.contains_key(&(d - 1)) {
            continue;
        }
        let src = &c.bases[&d];
        let mut trip = Vec::new();
        for (col, f) in src.iter().enumerate() {
            for i in 0..f.len() {
                let mut g = f.clone();
                g.remove(i);
                let sign = if i % 2 == 0 { 1 } else { -1 };
                trip.push((index[&g], col, sign));
            }
        }
        let m = SparseMatrix::from_triplets(c.bases[&(d - 1)].len(), src.len(), trip);
        c.differentials.insert(d, m);
    }
    c
}
