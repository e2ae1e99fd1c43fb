//! Brute-force Khovanov cochain complex over all enhanced states. Shares
//! nothing with the cube functors beyond PD parsing.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{homology, SparseMatrix};
use crate::error::{Error, Result};
use crate::model::{GradedChainComplex, Group, HomologyResult, PdCode};

/// State bits plus a sign per circle (bit set = x_-), circles in the
/// canonical order of [`Resolution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EnhancedState {
    pub state: u64,
    pub minus: u64,
}

/// (h, q) of an enhanced state with weight |u| and circle signs.
pub fn gradings(weight: usize, plus: usize, minus: usize, n_plus: usize, n_minus: usize) -> (i64, i64) {
    let h = weight as i64 - n_minus as i64;
    let q = n_plus as i64 - 2 * n_minus as i64 + weight as i64 + plus as i64 - minus as i64;
    (h, q)
}

/// Circles of one resolution: each circle is named by its smallest slot.
#[derive(Clone, Debug)]
pub struct Resolution {
    /// Smallest slot of each circle, ascending.
    pub keys: Vec<usize>,
    /// Circle of each slot.
    pub circle_of_slot: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Resolves a PD code at state u. Smoothing 0 joins positions (a,d),(b,c);
/// smoothing 1 joins (a,b),(c,d).
pub fn resolve(pd: &PdCode, u: u64) -> Resolution {
    let n = pd.crossings.len();
    if n == 0 {
        return Resolution { keys: vec![0], circle_of_slot: vec![] };
    }
    let mut parent: Vec<usize> = (0..4 * n).collect();
    let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    let mut first: HashMap<u32, usize> = HashMap::new();
    for (x, t) in pd.crossings.iter().enumerate() {
        for (s, &arc) in t.iter().enumerate() {
            match first.get(&arc) {
                Some(&o) => union(o, 4 * x + s, &mut parent),
                None => {
                    first.insert(arc, 4 * x + s);
                }
            }
        }
        let b = 4 * x;
        if (u >> x) & 1 == 0 {
            union(b, b + 3, &mut parent);
            union(b + 1, b + 2, &mut parent);
        } else {
            union(b, b + 1, &mut parent);
            union(b + 2, b + 3, &mut parent);
        }
    }
    let roots: Vec<usize> = (0..4 * n).map(|s| find(&mut parent, s)).collect();
    let mut keys: Vec<usize> = roots.clone();
    keys.sort_unstable();
    keys.dedup();
    let circle_of_slot = roots.iter().map(|r| keys.binary_search(r).unwrap()).collect();
    Resolution { keys, circle_of_slot }
}

/// Khovanov homology in every grading i for one quantum grading j.
pub type Bigraded = BTreeMap<i64, HomologyResult>;

/// The cochain complex of quantum grading j, graded by i = |u| - n_-.
pub fn khovanov_complex(pd: &PdCode, j: i64, max_crossings: usize) -> Result<GradedChainComplex<EnhancedState>> {
    let n = pd.crossings.len();
    if n > max_crossings {
        return Err(Error::Guard(format!("{n} crossings exceeds the limit of {max_crossings}")));
    }
    let (np, nm) = (pd.n_plus, pd.n_minus);
    let res: Vec<Resolution> = (0..1u64 << n).into_par_iter().map(|u| resolve(pd, u)).collect();
    let mut c = GradedChainComplex::new(1);
    for w in 0..=n {
        let mut basis = Vec::new();
        for u in (0..1u64 << n).filter(|u| u.count_ones() as usize == w) {
            let k = res[u as usize].keys.len();
            // #plus - #minus must equal j - (n+ - 2n- + |u|).
            let t = j - (np as i64 - 2 * nm as i64 + w as i64);
            if (t + k as i64) % 2 != 0 || t.abs() > k as i64 {
                continue;
            }
            let minus_count = ((k as i64 - t) / 2) as u32;
            for m in 0..1u64 << k {
                if m.count_ones() == minus_count {
                    basis.push(EnhancedState { state: u, minus: m });
                }
            }
        }
        if !basis.is_empty() {
            c.bases.insert(w as i64 - nm as i64, basis);
        }
    }
    let index: HashMap<EnhancedState, usize> =
        c.bases.values().flat_map(|b| b.iter().enumerate().map(|(k, &g)| (g, k))).collect();
    let degrees: Vec<i64> = c.bases.keys().copied().collect();
    for h in degrees {
        let (Some(src), Some(tgt)) = (c.bases.get(&h), c.bases.get(&(h + 1))) else { continue };
        let trip: Vec<(usize, usize, i64)> = src
            .par_iter()
            .enumerate()
            .flat_map_iter(|(col, g)| {
                let mut out = Vec::new();
                for x in (0..n).filter(|&x| (g.state >> x) & 1 == 0) {
                    let v = g.state | (1 << x);
                    let sign = if (g.state & ((1u64 << x) - 1)).count_ones().is_multiple_of(2) { 1 } else { -1 };
                    for (m, coeff) in edge_map(&res[g.state as usize], &res[v as usize], x, g.minus) {
                        if let Some(&row) = index.get(&EnhancedState { state: v, minus: m }) {
                            out.push((row, col, sign * coeff));
                        }
                    }
                }
                out
            })
            .collect();
        c.differentials.insert(h, SparseMatrix::from_triplets(tgt.len(), src.len(), trip));
    }
    Ok(c)
}

/// Frobenius multiplication or comultiplication along the 0 → 1 change at
/// crossing x. Returns target minus-masks with coefficients.
fn edge_map(a: &Resolution, b: &Resolution, x: usize, minus: u64) -> Vec<(u64, i64)> {
    let slots = [4 * x, 4 * x + 1, 4 * x + 2, 4 * x + 3];
    let src: Vec<usize> = {
        let mut v: Vec<usize> = slots.iter().map(|&s| a.circle_of_slot[s]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let tgt: Vec<usize> = {
        let mut v: Vec<usize> = slots.iter().map(|&s| b.circle_of_slot[s]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    // Untouched circles carry their sign across by key.
    let mut base = 0u64;
    for (k, key) in a.keys.iter().enumerate() {
        if src.contains(&k) {
            continue;
        }
        if (minus >> k) & 1 == 1 {
            let t = b.circle_of_slot[*key];
            base |= 1 << t;
        }
    }
    let sgn = |k: usize| (minus >> k) & 1 == 1;
    match (src.len(), tgt.len()) {
        (2, 1) => {
            // m(1⊗1)=1, m(1⊗x)=m(x⊗1)=x, m(x⊗x)=0.
            let count = src.iter().filter(|&&k| sgn(k)).count();
            match count {
                0 => vec![(base, 1)],
                1 => vec![(base | 1 << tgt[0], 1)],
                _ => vec![],
            }
        }
        (1, 2) => {
            // Δ(1)=1⊗x+x⊗1, Δ(x)=x⊗x.
            if sgn(src[0]) {
                vec![(base | 1 << tgt[0] | 1 << tgt[1], 1)]
            } else {
                vec![(base | 1 << tgt[0], 1), (base | 1 << tgt[1], 1)]
            }
        }
        _ => unreachable!("a smoothing change always merges or splits"),
    }
}

/// Kh^{*, j}: cohomology of the grading-j cochain complex, keyed by i.
pub fn khovanov_homology_at(pd: &PdCode, j: i64, max_crossings: usize) -> Result<HomologyResult> {
    homology(&khovanov_complex(pd, j, max_crossings)?)
}

/// All quantum gradings that carry generators.
pub fn quantum_range(pd: &PdCode) -> Vec<i64> {
    let n = pd.crossings.len();
    let (np, nm) = (pd.n_plus as i64, pd.n_minus as i64);
    let mut js: Vec<i64> = (0..1u64 << n)
        .flat_map(|u| {
            let k = resolve(pd, u).keys.len() as i64;
            let base = np - 2 * nm + u.count_ones() as i64;
            (0..=k).map(move |m| base + k - 2 * m)
        })
        .collect();
    js.sort_unstable();
    js.dedup();
    js
}

/// Kh^{i,j} for every j (keyed by j, then i).
pub fn khovanov_homology(pd: &PdCode, max_crossings: usize) -> Result<Bigraded> {
    if pd.crossings.len() > max_crossings {
        return Err(Error::Guard(format!("{} crossings exceeds the limit of {max_crossings}", pd.crossings.len())));
    }
    quantum_range(pd)
        .into_par_iter()
        .map(|j| khovanov_homology_at(pd, j, max_crossings).map(|h| (j, h)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().filter(|(_, h)| !h.is_zero()).collect())
}

/// j_max = q(1, x_+).
pub fn j_max(pd: &PdCode) -> i64 {
    let n = pd.crossings.len();
    let top = resolve(pd, if n == 0 { 0 } else { (1u64 << n) - 1 });
    gradings(n, top.keys.len(), 0, pd.n_plus, pd.n_minus).1
}

pub fn j_almax(pd: &PdCode) -> i64 {
    j_max(pd) - 2
}

/// Kauffman bracket by state sum, as A-exponent → coefficient, with
/// ⟨O⟩ = 1 and δ = -A² - A⁻².
pub fn kauffman_bracket(pd: &PdCode) -> BTreeMap<i64, i64> {
    let n = pd.crossings.len();
    let mut out: BTreeMap<i64, i64> = BTreeMap::new();
    for u in 0..1u64 << n {
        let loops = resolve(pd, u).keys.len();
        let ones = u.count_ones() as i64;
        // δ^(loops-1) expanded binomially.
        let mut poly: BTreeMap<i64, i64> = BTreeMap::from([(n as i64 - 2 * ones, 1)]);
        for _ in 1..loops {
            let mut next = BTreeMap::new();
            for (&e, &c) in &poly {
                *next.entry(e + 2).or_insert(0) -= c;
                *next.entry(e - 2).or_insert(0) -= c;
            }
            poly = next;
        }
        for (e, c) in poly {
            *out.entry(e).or_insert(0) += c;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Unnormalised Jones polynomial (q-exponent → coefficient) from the
/// bracket: χ(q) = (-1)^{n-} q^{n+ - 2n-} (q + q⁻¹) ⟨D⟩|_{A^{-2} = -q} · A^{-n}.
pub fn jones_from_bracket(pd: &PdCode) -> BTreeMap<i64, i64> {
    let n = pd.crossings.len() as i64;
    let shift = pd.n_plus as i64 - 2 * pd.n_minus as i64;
    let sign = if pd.n_minus.is_multiple_of(2) { 1 } else { -1 };
    let mut out: BTreeMap<i64, i64> = BTreeMap::new();
    for (m, c) in kauffman_bracket(pd) {
        let e = (n - m) / 2;
        let c = c * sign * if e % 2 == 0 { 1 } else { -1 };
        for d in [-1, 1] {
            *out.entry(shift + e + d).or_insert(0) += c;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Graded Euler characteristic Σ (-1)^i rank Kh^{i,j} q^j.
pub fn graded_euler(kh: &Bigraded) -> BTreeMap<i64, i64> {
    let mut out: BTreeMap<i64, i64> = BTreeMap::new();
    for (&j, h) in kh {
        let chi = h.euler_characteristic();
        if chi != 0 {
            out.insert(j, chi);
        }
    }
    out
}

/// Number of enhanced states of u with q = j, per state bits.
pub fn census(pd: &PdCode, j: i64) -> Vec<usize> {
    let n = pd.crossings.len();
    let (np, nm) = (pd.n_plus as i64, pd.n_minus as i64);
    (0..1u64 << n)
        .map(|u| {
            let k = resolve(pd, u).keys.len() as i64;
            let t = j - (np - 2 * nm + u.count_ones() as i64);
            if (t + k) % 2 != 0 || t.abs() > k {
                0
            } else {
                binomial(k as u64, ((k - t) / 2) as u64) as usize
            }
        })
        .collect()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// First degree where two homology results differ.
pub fn first_difference(a: &HomologyResult, b: &HomologyResult) -> Option<(i64, Group, Group)> {
    let keys: std::collections::BTreeSet<i64> = a.groups.keys().chain(b.groups.keys()).copied().collect();
    keys.into_iter().find_map(|k| {
        let (x, y) = (a.get(k), b.get(k));
        (x != y).then_some((k, x, y))
    })
}

/// Oracle Kh^{*, j_almax} against the cohomology of the dualized C_*(F)
/// and C_*(M), plus the enhancement census. This is the only place where
/// the oracle meets the cube functors.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    pub j_almax: i64,
    pub oracle: BTreeMap<i64, String>,
    pub f: BTreeMap<i64, String>,
    pub m: BTreeMap<i64, String>,
    pub agree_f: bool,
    pub agree_m: bool,
    /// Generators per state match |Z(u)|, 1 or 0 as Φ(u) is 0, 1 or more.
    pub census: bool,
    /// First degree where F and the oracle differ: (i, oracle, F).
    pub first_difference: Option<(i64, String, String)>,
}

impl AgreementReport {
    pub fn ok(&self) -> bool {
        self.agree_f && self.agree_m && self.census
    }
}

fn table(h: &HomologyResult) -> BTreeMap<i64, String> {
    h.groups.iter().filter(|(_, g)| !g.is_zero()).map(|(k, g)| (*k, g.to_string())).collect()
}

/// Cohomology of a cube complex reindexed to i = k - n_-.
pub fn functor_cohomology<L: Clone + Sync>(c: &GradedChainComplex<L>, n_minus: usize) -> Result<HomologyResult> {
    Ok(homology(&c.dual())?.shifted(-(n_minus as i64)))
}

pub fn almost_extreme_agreement(pd: &PdCode, max_crossings: usize) -> Result<AgreementReport> {
    use crate::functors::{build_f_complex, build_m_complex};
    use crate::statecube::CubeIndex;
    let j = j_almax(pd);
    let oracle = khovanov_homology_at(pd, j, max_crossings)?;
    let cube = CubeIndex::build(&crate::ingest::resolve_all_ones(pd)?)?;
    let f = functor_cohomology(&build_f_complex(&cube), pd.n_minus)?;
    let m = functor_cohomology(&build_m_complex(&cube), pd.n_minus)?;
    let counts = census(pd, j);
    let census_ok = cube.states().all(|r| {
        let expect = match r.phi {
            0 => r.circles.len(),
            1 => 1,
            _ => 0,
        };
        counts[r.state.bits as usize] == expect
    });
    let norm = |h: &HomologyResult| table(h);
    let first_difference = first_difference(&oracle, &f).map(|(k, a, b)| (k, a.to_string(), b.to_string()));
    Ok(AgreementReport {
        j_almax: j,
        agree_f: norm(&oracle) == norm(&f),
        agree_m: norm(&oracle) == norm(&m),
        census: census_ok,
        oracle: norm(&oracle),
        f: norm(&f),
        m: norm(&m),
        first_difference,
    })
}
