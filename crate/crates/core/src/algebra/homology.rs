use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use super::snf::invariant_factors;
use crate::error::Error;
use crate::model::{GradedChainComplex, Group, HomologyResult};

/// Homology of a (co)chain complex with integer coefficients.
pub fn homology<L: Clone + Sync>(c: &GradedChainComplex<L>) -> Result<HomologyResult, Error> {
    c.check().map_err(Error::Algebra)?;
    Ok(homology_unchecked(c))
}

/// Homology without the d^2 = 0 check.
pub fn homology_unchecked<L: Clone + Sync>(c: &GradedChainComplex<L>) -> HomologyResult {
    let dir = c.direction as i64;
    let keys: Vec<i64> = c.differentials.keys().copied().collect();
    let factors: BTreeMap<i64, Vec<BigUint>> =
        keys.par_iter().map(|&k| (k, invariant_factors(&c.differentials[&k]))).collect();
    let mut out = HomologyResult::default();
    for (&k, basis) in &c.bases {
        let outgoing = factors.get(&k).map_or(0, Vec::len);
        let incoming = factors.get(&(k - dir));
        let rank_in = incoming.map_or(0, Vec::len);
        let torsion: Vec<BigUint> =
            incoming.map_or_else(Vec::new, |f| f.iter().filter(|x| !x.is_one()).cloned().collect());
        let betti = basis.len() - outgoing - rank_in;
        out.insert(k, Group { betti, torsion });
    }
    out
}

/// Euler characteristic from ranks of chain groups.
pub fn euler_characteristic<L: Clone>(c: &GradedChainComplex<L>) -> i64 {
    c.bases.iter().map(|(k, b)| if k % 2 == 0 { b.len() as i64 } else { -(b.len() as i64) }).sum()
}
