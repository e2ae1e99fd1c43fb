//! Subposets X, X^e, Y and Z^b of the cube, the cofibre partition of
//! C_*(M), the three skein sequences and the simplification moves.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use serde::Serialize;

use crate::algebra::modp::Field;
use crate::algebra::{homology, SparseMatrix};
use crate::configs::{detect_configs, ConfigIndex};
use crate::error::{Error, Result};
use crate::functors::{
    build_f_complex, build_gamma, build_m_complex, subposet_chain_complex, GeneratorLabel,
};
use crate::model::{full_mask, ChordDiagram, GradedChainComplex, PdCode, State};
use crate::statecube::{restricted, surger, CubeIndex};

/// Primes used for the exactness checks.
pub const LES_PRIMES: [u64; 2] = [2, 3];

// Smoothing.

/// Position of the chord with user-facing index `chord`.
fn position(d: &ChordDiagram, chord: usize) -> Result<usize> {
    d.chord_position(chord).ok_or(Error::NoSuchChord(chord))
}

/// D[c = value] keeping the endpoints of c on their circles, so that
/// circles stay comparable with those of D by content.
fn smooth_marked(d: &ChordDiagram, pos: usize, value: u8) -> Result<ChordDiagram> {
    let mut out = if value == 0 { surger(d, pos)? } else { d.clone() };
    out.chords.remove(pos);
    out.writhe = None;
    Ok(out)
}

/// Drops endpoints that no chord uses and renumbers the rest.
fn drop_orphans(d: &ChordDiagram) -> ChordDiagram {
    let mut used = vec![false; d.endpoint_names.len()];
    for c in &d.chords {
        used[c.ends[0]] = true;
        used[c.ends[1]] = true;
    }
    let mut new_id = vec![usize::MAX; used.len()];
    let mut names = Vec::new();
    for (p, &u) in used.iter().enumerate() {
        if u {
            new_id[p] = names.len();
            names.push(d.endpoint_names[p].clone());
        }
    }
    let mut out = d.clone();
    out.endpoint_names = names;
    out.circles = d.circles.iter().map(|c| c.iter().filter(|&&p| used[p]).map(|&p| new_id[p]).collect()).collect();
    for c in out.chords.iter_mut() {
        c.ends = c.ends.map(|p| new_id[p]);
        c.distinguished = new_id[c.distinguished];
    }
    out
}

/// D[c = value] for a chord diagram: value 1 deletes the chord, value 0
/// surgers along it and then deletes it.
pub fn smooth_cd(d: &ChordDiagram, chord: usize, value: u8) -> Result<ChordDiagram> {
    if value > 1 {
        return Err(Error::Invalid(format!("smoothing value must be 0 or 1, got {value}")));
    }
    Ok(drop_orphans(&smooth_marked(d, position(d, chord)?, value)?))
}

/// A smoothed PD code. Components left without crossings cannot be
/// written in PD form and are counted separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothedPd {
    pub pd: PdCode,
    pub free_loops: usize,
}

/// D[c = value] for a PD code, crossing c being 1-based. Components keep
/// the orientation of their first strand; arcs are renumbered.
pub fn smooth_pd(pd: &PdCode, crossing: usize, value: u8) -> Result<SmoothedPd> {
    let n = pd.crossings.len();
    if crossing == 0 || crossing > n {
        return Err(Error::NoSuchChord(crossing));
    }
    if value > 1 {
        return Err(Error::Invalid(format!("smoothing value must be 0 or 1, got {value}")));
    }
    let x = pd.crossings[crossing - 1];
    let mut parent: HashMap<u32, u32> = HashMap::new();
    fn find(parent: &mut HashMap<u32, u32>, a: u32) -> u32 {
        let p = *parent.get(&a).unwrap_or(&a);
        if p == a {
            a
        } else {
            let r = find(parent, p);
            parent.insert(a, r);
            r
        }
    }
    let pairs = if value == 0 { [(x[0], x[3]), (x[1], x[2])] } else { [(x[0], x[1]), (x[2], x[3])] };
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra.max(rb), ra.min(rb));
        }
    }
    // Original direction of every slot: under-strand a → c, over-strand
    // entering at b exactly when the crossing is positive.
    let incoming = |xi: usize, s: usize| match s {
        0 => true,
        2 => false,
        1 => pd.signs[xi] > 0,
        _ => pd.signs[xi] < 0,
    };
    let kept: Vec<usize> = (0..n).filter(|&k| k != crossing - 1).collect();
    let crossings: Vec<[u32; 4]> =
        kept.iter().map(|&k| pd.crossings[k].map(|a| find(&mut parent, a))).collect();
    let mut loops: HashSet<u32> = x.iter().map(|&a| find(&mut parent, a)).collect();
    for c in &crossings {
        for a in c {
            loops.remove(a);
        }
    }
    let m = crossings.len();
    let mut slots: HashMap<u32, Vec<usize>> = HashMap::new();
    for (k, c) in crossings.iter().enumerate() {
        for (s, &a) in c.iter().enumerate() {
            slots.entry(a).or_default().push(4 * k + s);
        }
    }
    let mut partner = vec![0usize; 4 * m];
    for v in slots.values() {
        if v.len() != 2 {
            return Err(Error::Trace("smoothing produced an inconsistent arc".into()));
        }
        partner[v[0]] = v[1];
        partner[v[1]] = v[0];
    }
    let opposite = |s: usize| s - s % 4 + (s % 4 + 2) % 4;
    let mut label = vec![0u32; 4 * m];
    let mut enters = vec![false; 4 * m];
    let mut visited = vec![false; 4 * m];
    let mut next = 1u32;
    for start in 0..4 * m {
        if visited[start] {
            continue;
        }
        let e0 = if incoming(kept[start / 4], start % 4) { start } else { opposite(start) };
        // The arc into e0 takes the first label, so labels rise along travel.
        label[e0] = next;
        label[partner[e0]] = next;
        next += 1;
        let mut e = e0;
        loop {
            visited[e] = true;
            enters[e] = true;
            let out = opposite(e);
            visited[out] = true;
            let into = partner[out];
            if into == e0 {
                break;
            }
            label[out] = next;
            label[into] = next;
            next += 1;
            e = into;
        }
    }
    let tuples: Vec<[u32; 4]> = (0..m)
        .map(|k| {
            let l = [label[4 * k], label[4 * k + 1], label[4 * k + 2], label[4 * k + 3]];
            if enters[4 * k] {
                l
            } else {
                [l[2], l[3], l[0], l[1]]
            }
        })
        .collect();
    Ok(SmoothedPd { pd: crate::ingest::pd_from_crossings(tuples)?, free_loops: loops.len() })
}

// Subposets.

/// Which subposet of the cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum SubposetKind {
    X,
    /// X^e for a monochord e (chord index).
    #[serde(rename = "X^e")]
    XEdge { chord: usize },
    Y,
    /// Z^b for the parallel class of bichord b (chord index).
    #[serde(rename = "Z^b")]
    Z { class: usize },
}

impl std::fmt::Display for SubposetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubposetKind::X => write!(f, "X"),
            SubposetKind::XEdge { chord } => write!(f, "X^{chord}"),
            SubposetKind::Y => write!(f, "Y"),
            SubposetKind::Z { class } => write!(f, "Z^{class}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Subposet {
    pub kind: SubposetKind,
    /// Members in increasing bit order.
    pub members: Vec<State>,
}

fn zero_mask(cube: &CubeIndex, u: State) -> u64 {
    !u.bits & full_mask(cube.n)
}

/// Membership predicate of a subposet, on state bits.
fn predicate(cube: &CubeIndex, kind: SubposetKind) -> Result<Box<dyn Fn(State, u32) -> bool + Sync + '_>> {
    let ix = ConfigIndex::new(&cube.d1);
    Ok(match kind {
        SubposetKind::X => Box::new(|_, phi| phi == 0),
        SubposetKind::XEdge { chord } => {
            let e = position(&cube.d1, chord)?;
            if ix.mono >> e & 1 == 0 {
                return Err(Error::ChordKind { chord, found: "bichord", expected: "monochord" });
            }
            Box::new(move |u: State, phi| phi == 0 && u.get(e) == 0)
        }
        SubposetKind::Y => Box::new(move |u: State, phi| phi == 1 && ix.has_altpair(zero_mask(cube, u))),
        SubposetKind::Z { class } => {
            let b = cube.d1.chord_position(class).ok_or(Error::UnknownClass(class))?;
            if ix.bi >> b & 1 == 0 {
                return Err(Error::UnknownClass(class));
            }
            let cls = ix.class[b];
            Box::new(move |u: State, phi| phi == 1 && zero_mask(cube, u) & cls != 0)
        }
    })
}

pub fn build_subposet(cube: &CubeIndex, kind: SubposetKind) -> Result<Subposet> {
    let member = predicate(cube, kind)?;
    let members = cube.states().filter(|r| member(r.state, r.phi)).map(|r| r.state).collect();
    Ok(Subposet { kind, members })
}

/// One generator per member, ±1 on internal cube edges, graded by |u|.
pub fn subposet_complex(cube: &CubeIndex, s: &Subposet) -> GradedChainComplex<State> {
    let set: HashSet<u64> = s.members.iter().map(|u| u.bits).collect();
    subposet_chain_complex(cube, |r| set.contains(&r.state.bits))
}

/// Every subposet appearing in the cofibre sequence: X, X^e for each
/// monochord, Y, and Z^b for each parallel class (named by its least index).
pub fn all_subposet_kinds(cube: &CubeIndex) -> Vec<SubposetKind> {
    let ix = ConfigIndex::new(&cube.d1);
    let name = |i: usize| cube.d1.chords[i].index;
    let mut out = vec![SubposetKind::X];
    out.extend((0..ix.n).filter(|&i| ix.mono >> i & 1 == 1).map(|i| SubposetKind::XEdge { chord: name(i) }));
    out.push(SubposetKind::Y);
    let mut seen = 0u64;
    for b in (0..ix.n).filter(|&i| ix.bi >> i & 1 == 1) {
        if seen >> b & 1 == 0 {
            seen |= ix.class[b];
            let least = (0..ix.n).filter(|&i| ix.class[b] >> i & 1 == 1).map(name).min().unwrap();
            out.push(SubposetKind::Z { class: least });
        }
    }
    out
}

// Complex comparison and exactness.

/// The complex spanned by the basis elements satisfying `keep`, with the
/// induced blocks of the differential.
fn block<L: Clone>(c: &GradedChainComplex<L>, keep: impl Fn(&L) -> bool) -> GradedChainComplex<L> {
    let mut out = GradedChainComplex::new(c.direction);
    let mut picked: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (&k, b) in &c.bases {
        let idx: Vec<usize> = (0..b.len()).filter(|&j| keep(&b[j])).collect();
        if !idx.is_empty() {
            out.bases.insert(k, idx.iter().map(|&j| b[j].clone()).collect());
            picked.insert(k, idx);
        }
    }
    for (&k, cols) in &picked {
        let t = k + c.direction as i64;
        if let Some(rows) = picked.get(&t) {
            out.differentials.insert(k, c.differential(k).select(rows, cols));
        }
    }
    out
}

/// Whether x ↦ sign(x)·map(x) is an isomorphism of complexes from `a`
/// onto `b`, raising degrees by `shift`.
fn isomorphic_via<L, M>(
    a: &GradedChainComplex<L>,
    b: &GradedChainComplex<M>,
    map: impl Fn(&L) -> M,
    sign: impl Fn(&L) -> i64,
    shift: i64,
) -> bool
where
    L: Clone,
    M: Clone + Hash + Eq,
{
    let bi = b.basis_index();
    let degrees: std::collections::BTreeSet<i64> =
        a.bases.keys().copied().chain(b.bases.keys().map(|k| k - shift)).collect();
    for &k in &degrees {
        if a.rank(k) != b.rank(k + shift) {
            return false;
        }
        let Some(basis) = a.bases.get(&k) else { continue };
        let mut seen = vec![false; basis.len()];
        for l in basis {
            match bi.get(&map(l)) {
                Some(&(d, j)) if d == k + shift && !seen[j] => seen[j] = true,
                _ => return false,
            }
        }
    }
    for &k in &degrees {
        let t = k + a.direction as i64;
        let (Some(src), Some(tgt)) = (a.bases.get(&k), a.bases.get(&t)) else { continue };
        let trip = a.differential(k).triplets().map(|(r, c, v)| {
            (bi[&map(&tgt[r])].1, bi[&map(&src[c])].1, v * sign(&tgt[r]) * sign(&src[c]))
        }).collect::<Vec<_>>();
        let m = SparseMatrix::from_triplets(tgt.len(), src.len(), trip);
        if m != b.differential(k + shift) {
            return false;
        }
    }
    true
}

/// Exactness of the long exact sequence of a subcomplex S ⊂ C and its
/// quotient Q = C/S over one prime field.
#[derive(Clone, Debug, Serialize)]
pub struct LesReport {
    pub prime: u64,
    /// S is closed under the differential.
    pub subcomplex: bool,
    pub exact: bool,
    /// dim H_k(S), H_k(C), H_k(Q) per degree.
    pub dims: BTreeMap<i64, [usize; 3]>,
    pub failures: Vec<String>,
}

fn dense_block(f: &Field, m: &SparseMatrix, rows: &[usize], cols: &[usize]) -> Vec<Vec<u64>> {
    f.dense(&m.select(rows, cols))
}

fn rank_of(f: &Field, a: &[Vec<u64>]) -> usize {
    if a.is_empty() || a[0].is_empty() {
        0
    } else {
        f.rank(a)
    }
}

/// Kernel vectors of a (rows × cols) block; an empty block has full kernel.
fn kernel_of(f: &Field, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    if a.is_empty() {
        (0..cols).map(|j| (0..cols).map(|i| (i == j) as u64).collect()).collect()
    } else {
        f.kernel(a, cols)
    }
}

/// rank of the span of `vectors` together with the columns of `b`, minus rank b.
fn rank_modulo(f: &Field, vectors: &[Vec<u64>], b: &[Vec<u64>], dim: usize) -> usize {
    let cols = b.first().map_or(0, Vec::len);
    let bcols = if b.is_empty() { Vec::new() } else { f.columns(b, cols) };
    let mut all = bcols.clone();
    all.extend(vectors.iter().cloned());
    f.span_rank(&all, dim) - f.span_rank(&bcols, dim)
}

pub fn les_exactness<L: Clone>(c: &GradedChainComplex<L>, in_sub: impl Fn(&L) -> bool, prime: u64) -> LesReport {
    assert_eq!(c.direction, -1, "exactness is checked on chain complexes");
    let f = Field::new(prime);
    let mut rep = LesReport { prime, subcomplex: true, exact: true, dims: BTreeMap::new(), failures: Vec::new() };
    let split = |k: i64| -> (Vec<usize>, Vec<usize>) {
        let b = c.bases.get(&k).map_or(&[][..], Vec::as_slice);
        (0..b.len()).partition(|&j| in_sub(&b[j]))
    };
    let (lo, hi) = match (c.bases.keys().next(), c.bases.keys().last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return rep,
    };
    // Per degree: ranks of i_*, p_*, δ_k (out of H_k(Q)) and the homology dims.
    let mut ri = BTreeMap::new();
    let mut rp = BTreeMap::new();
    let mut rd = BTreeMap::new();
    for k in lo - 1..=hi + 1 {
        let (s, q) = split(k);
        let (s1, q1) = split(k - 1);
        let (s_up, q_up) = split(k + 1);
        let all: Vec<usize> = (0..c.rank(k)).collect();
        let all1: Vec<usize> = (0..c.rank(k - 1)).collect();
        let all_up: Vec<usize> = (0..c.rank(k + 1)).collect();
        let d = c.differential(k);
        let d_up = c.differential(k + 1);
        if !d.select(&q1, &s).is_zero() {
            rep.subcomplex = false;
            rep.failures.push(format!("subcomplex not closed out of degree {k}"));
        }
        let ds = dense_block(&f, &d, &s1, &s);
        let dq = dense_block(&f, &d, &q1, &q);
        let dc = dense_block(&f, &d, &all1, &all);
        let dsq = dense_block(&f, &d, &s1, &q);
        let ds_up = dense_block(&f, &d_up, &s, &s_up);
        let dq_up = dense_block(&f, &d_up, &q, &q_up);
        let dc_up = dense_block(&f, &d_up, &all, &all_up);
        let zs = kernel_of(&f, &ds, s.len());
        let zq = kernel_of(&f, &dq, q.len());
        let zc = kernel_of(&f, &dc, all.len());
        let h = |z: usize, b: &[Vec<u64>]| z - rank_of(&f, b);
        rep.dims.insert(k, [h(zs.len(), &ds_up), h(zc.len(), &dc_up), h(zq.len(), &dq_up)]);
        let embed: Vec<Vec<u64>> = zs
            .iter()
            .map(|z| {
                let mut v = vec![0u64; all.len()];
                for (t, &j) in s.iter().enumerate() {
                    v[j] = z[t];
                }
                v
            })
            .collect();
        ri.insert(k, rank_modulo(&f, &embed, &dc_up, all.len()));
        let proj: Vec<Vec<u64>> = zc.iter().map(|z| q.iter().map(|&j| z[j]).collect()).collect();
        rp.insert(k, rank_modulo(&f, &proj, &dq_up, q.len()));
        let conn = if dsq.is_empty() { Vec::new() } else { f.apply(&dsq, &zq) };
        rd.insert(k, rank_modulo(&f, &conn, &ds, s1.len()));
    }
    for k in lo - 1..=hi + 1 {
        let [hs, hc, hq] = rep.dims[&k];
        let din = rd.get(&(k + 1)).copied().unwrap_or(0);
        let checks = [
            ("H(S)", din + ri[&k], hs),
            ("H(C)", ri[&k] + rp[&k], hc),
            ("H(Q)", rp[&k] + rd[&k], hq),
        ];
        for (node, sum, dim) in checks {
            if sum != dim {
                rep.exact = false;
                rep.failures.push(format!("not exact at {node} in degree {k} over F_{prime}: {sum} != {dim}"));
            }
        }
    }
    rep.dims.retain(|_, v| v.iter().any(|&x| x > 0));
    rep
}

// Cofibre partition.

#[derive(Clone, Debug, Serialize)]
pub struct CofibreReport {
    /// Every M generator lies in exactly one piece.
    pub partition: bool,
    pub partition_witness: Option<State>,
    /// The Φ = 1 part is a subcomplex splitting as Y ⊕ ⊕_b Z^b.
    pub phi_one_blocks: bool,
    /// The quotient splits as copies of X indexed by circles of D(1) plus
    /// X^e per monochord.
    pub quotient_blocks: bool,
    pub les: Vec<LesReport>,
    /// Homology of every subposet complex.
    pub subposets: BTreeMap<String, String>,
    pub m_homology: String,
}

impl CofibreReport {
    pub fn ok(&self) -> bool {
        self.partition && self.phi_one_blocks && self.quotient_blocks && self.les.iter().all(|l| l.exact && l.subcomplex)
    }
}

fn hstring<L: Clone + Sync>(c: &GradedChainComplex<L>) -> Result<String> {
    Ok(homology(c)?.to_string())
}

pub fn verify_cofibre_partition(cube: &CubeIndex) -> Result<CofibreReport> {
    let m = build_m_complex(cube);
    let kinds = all_subposet_kinds(cube);
    let mut posets: Vec<(SubposetKind, HashSet<u64>, GradedChainComplex<State>)> = Vec::new();
    for &kind in &kinds {
        let s = build_subposet(cube, kind)?;
        let cx = subposet_complex(cube, &s);
        posets.push((kind, s.members.iter().map(|u| u.bits).collect(), cx));
    }
    let ix = ConfigIndex::new(&cube.d1);
    let in_kind = |kind: SubposetKind, bits: u64| posets.iter().any(|(k, set, _)| *k == kind && set.contains(&bits));
    // Piece of each generator.
    let piece = |l: &GeneratorLabel| -> Vec<SubposetKind> {
        match *l {
            GeneratorLabel::Component { state, .. } => {
                if in_kind(SubposetKind::X, state.bits) { vec![SubposetKind::X] } else { vec![] }
            }
            GeneratorLabel::Edge { state, chord } => {
                let kind = SubposetKind::XEdge { chord: cube.d1.chords[chord].index };
                if in_kind(kind, state.bits) { vec![kind] } else { vec![] }
            }
            GeneratorLabel::Plus { state } => posets
                .iter()
                .filter(|(k, set, _)| matches!(k, SubposetKind::Y | SubposetKind::Z { .. }) && set.contains(&state.bits))
                .map(|(k, _, _)| *k)
                .collect(),
            GeneratorLabel::Circle { .. } => vec![],
        }
    };
    let mut partition = true;
    let mut witness = None;
    for l in m.bases.values().flatten() {
        if piece(l).len() != 1 {
            partition = false;
            witness.get_or_insert(l.state());
        }
    }
    // Conversely, every member of X^e, Y, Z^b carries exactly one generator.
    let gens: HashSet<GeneratorLabel> = m.bases.values().flatten().copied().collect();
    for (kind, set, _) in &posets {
        for &bits in set {
            let state = State::new(cube.n, bits);
            let ok = match *kind {
                SubposetKind::X => (0..cube.top_circles).all(|c| gens.contains(&GeneratorLabel::Component { state, component: c })),
                SubposetKind::XEdge { chord } => {
                    let e = position(&cube.d1, chord)?;
                    gens.contains(&GeneratorLabel::Edge { state, chord: e })
                }
                _ => gens.contains(&GeneratorLabel::Plus { state }),
            };
            if !ok {
                partition = false;
                witness.get_or_insert(state);
            }
        }
    }
    let is_plus = |l: &GeneratorLabel| matches!(l, GeneratorLabel::Plus { .. });
    let sub = block(&m, is_plus);
    let quot = block(&m, |l| !is_plus(l));
    let mut phi_one_blocks = true;
    let mut quotient_blocks = true;
    let mut sub_total = 0;
    let mut quot_total = 0;
    for (kind, _, cx) in &posets {
        match *kind {
            SubposetKind::Y | SubposetKind::Z { .. } => {
                let piece_block = block(&sub, |l| piece(l).first() == Some(kind));
                sub_total += piece_block.total_rank();
                phi_one_blocks &= isomorphic_via(cx, &piece_block, |&u| GeneratorLabel::Plus { state: u }, |_| 1, 0);
            }
            SubposetKind::X => {
                for c in 0..cube.top_circles {
                    let piece_block = block(&quot, |l| matches!(l, GeneratorLabel::Component { component, .. } if *component == c));
                    quot_total += piece_block.total_rank();
                    quotient_blocks &= isomorphic_via(
                        cx,
                        &piece_block,
                        |&u| GeneratorLabel::Component { state: u, component: c },
                        |_| 1,
                        0,
                    );
                }
            }
            SubposetKind::XEdge { chord } => {
                let e = position(&cube.d1, chord)?;
                let piece_block = block(&quot, |l| matches!(l, GeneratorLabel::Edge { chord, .. } if *chord == e));
                quot_total += piece_block.total_rank();
                quotient_blocks &=
                    isomorphic_via(cx, &piece_block, |&u| GeneratorLabel::Edge { state: u, chord: e }, |_| 1, 0);
            }
        }
    }
    // The blocks must exhaust both parts, so no differential runs between them.
    phi_one_blocks &= sub_total == sub.total_rank() && block_diagonal(&sub, |l| piece(l).first().copied());
    quotient_blocks &= quot_total == quot.total_rank()
        && block_diagonal(&quot, |l| match *l {
            GeneratorLabel::Component { component, .. } => Some((0, component)),
            GeneratorLabel::Edge { chord, .. } => Some((1, chord)),
            _ => None,
        });
    let _ = ix;
    let les = LES_PRIMES.iter().map(|&p| les_exactness(&m, is_plus, p)).collect();
    let mut subposets = BTreeMap::new();
    for (kind, _, cx) in &posets {
        subposets.insert(kind.to_string(), hstring(cx)?);
    }
    Ok(CofibreReport {
        partition,
        partition_witness: witness,
        phi_one_blocks,
        quotient_blocks,
        les,
        subposets,
        m_homology: hstring(&m)?,
    })
}

/// No differential entry joins generators with different keys.
fn block_diagonal<L: Clone, K: PartialEq>(c: &GradedChainComplex<L>, key: impl Fn(&L) -> K) -> bool {
    c.differentials.iter().all(|(&k, d)| {
        let src = &c.bases[&k];
        let Some(tgt) = c.bases.get(&(k + c.direction as i64)) else { return d.is_zero() };
        d.triplets().all(|(r, col, _)| key(&tgt[r]) == key(&src[col]))
    })
}

// Skein sequences.

/// Which skein sequence along a chord a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SkeinKind {
    /// M_{D[a=1]} → M_{D[a=0]} → M_D for a monochord a.
    Monochord,
    /// M_{D[a=1]} → X_{D[a=0]} → M_D for a bichord a.
    Bichord,
    /// X_{D[a=1]} → X_{D[a=0]} → X_D for a monochord a.
    X,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkeinReport {
    pub chord: usize,
    pub kind: SkeinKind,
    /// The middle complex is isomorphic to the u_a = 0 part.
    pub embedding: bool,
    /// The u_a = 1 part is isomorphic to the left complex raised by one.
    pub quotient: bool,
    pub les: Vec<LesReport>,
    pub left: String,
    pub middle: String,
    pub total: String,
}

impl SkeinReport {
    pub fn ok(&self) -> bool {
        self.embedding && self.quotient && self.les.iter().all(|l| l.exact && l.subcomplex)
    }
}

/// Inserts bit `value` at position `a`.
fn insert_bit(u: State, a: usize, value: u8) -> State {
    let low = u.bits & ((1u64 << a) - 1);
    let high = (u.bits >> a) << (a + 1);
    State::new(u.n as usize + 1, low | high | (value as u64) << a)
}

/// ε(u) = (-1)^{#{j > a : u_j = 1}}.
fn twist(u: State, a: usize) -> i64 {
    if (u.bits >> (a + 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Translates a generator of D[a=v] (marked) to D.
fn lift_label(l: &GeneratorLabel, a: usize, value: u8) -> GeneratorLabel {
    let chord_up = |j: usize| if j >= a { j + 1 } else { j };
    match *l {
        GeneratorLabel::Circle { state, circle } => GeneratorLabel::Circle { state: insert_bit(state, a, value), circle },
        GeneratorLabel::Plus { state } => GeneratorLabel::Plus { state: insert_bit(state, a, value) },
        GeneratorLabel::Component { state, component } => {
            GeneratorLabel::Component { state: insert_bit(state, a, value), component }
        }
        GeneratorLabel::Edge { state, chord } => GeneratorLabel::Edge { state: insert_bit(state, a, value), chord: chord_up(chord) },
    }
}

/// Eligible sequences for one chord position.
pub fn skein_kinds(d1: &ChordDiagram, pos: usize) -> Vec<SkeinKind> {
    if d1.is_monochord(pos) {
        vec![SkeinKind::Monochord, SkeinKind::X]
    } else {
        vec![SkeinKind::Bichord]
    }
}

/// Checks one skein sequence along the chord with index `chord`.
pub fn verify_skein(cube: &CubeIndex, chord: usize, kind: SkeinKind) -> Result<SkeinReport> {
    let a = position(&cube.d1, chord)?;
    let mono = cube.d1.is_monochord(a);
    match (kind, mono) {
        (SkeinKind::Bichord, true) => {
            return Err(Error::ChordKind { chord, found: "monochord", expected: "bichord" });
        }
        (SkeinKind::Monochord | SkeinKind::X, false) => {
            return Err(Error::ChordKind { chord, found: "bichord", expected: "monochord" });
        }
        _ => {}
    }
    let d0 = smooth_marked(&cube.d1, a, 0)?;
    let d1 = smooth_marked(&cube.d1, a, 1)?;
    let cube0 = CubeIndex::build(&d0)?;
    let cube1 = CubeIndex::build(&d1)?;
    let on = |u: State| u.get(a) == 1;
    let les_of = |c: &GradedChainComplex<GeneratorLabel>| -> Vec<LesReport> {
        LES_PRIMES.iter().map(|&p| les_exactness(c, |l| !on(l.state()), p)).collect()
    };
    match kind {
        SkeinKind::X => {
            let total = subposet_chain_complex(cube, |r| r.phi == 0);
            let middle = subposet_chain_complex(&cube0, |r| r.phi == 0);
            let left = subposet_chain_complex(&cube1, |r| r.phi == 0);
            let sub = block(&total, |&u| !on(u));
            let quot = block(&total, |&u| on(u));
            let embedding = isomorphic_via(&middle, &sub, |&u| insert_bit(u, a, 0), |_| 1, 0);
            let quotient = isomorphic_via(&left, &quot, |&u| insert_bit(u, a, 1), |&u| twist(insert_bit(u, a, 1), a), 1);
            let les = LES_PRIMES.iter().map(|&p| les_exactness(&total, |&u| !on(u), p)).collect();
            Ok(SkeinReport {
                chord,
                kind,
                embedding,
                quotient,
                les,
                left: hstring(&left)?,
                middle: hstring(&middle)?,
                total: hstring(&total)?,
            })
        }
        SkeinKind::Bichord => {
            let total = build_m_complex(cube);
            let middle = subposet_chain_complex(&cube0, |r| r.phi == 0);
            let left = build_m_complex(&cube1);
            let sub = block(&total, |l| !on(l.state()));
            let quot = block(&total, |l| on(l.state()));
            let embedding =
                isomorphic_via(&middle, &sub, |&u| GeneratorLabel::Plus { state: insert_bit(u, a, 0) }, |_| 1, 0);
            let quotient = isomorphic_via(&left, &quot, |l| lift_label(l, a, 1), |l| twist(lift_label(l, a, 1).state(), a), 1);
            Ok(SkeinReport {
                chord,
                kind,
                embedding,
                quotient,
                les: les_of(&total),
                left: hstring(&left)?,
                middle: hstring(&middle)?,
                total: hstring(&total)?,
            })
        }
        SkeinKind::Monochord => {
            let total = build_m_complex(cube);
            let middle = build_m_complex(&cube0);
            let left = build_m_complex(&cube1);
            let quot = block(&total, |l| on(l.state()));
            let quotient = isomorphic_via(&left, &quot, |l| lift_label(l, a, 1), |l| twist(lift_label(l, a, 1).state(), a), 1);
            let embedding = monochord_embedding(cube, &cube0, a, &total, &middle)?;
            Ok(SkeinReport {
                chord,
                kind,
                embedding,
                quotient,
                les: les_of(&total),
                left: hstring(&left)?,
                middle: hstring(&middle)?,
                total: hstring(&total)?,
            })
        }
    }
}

/// Circle of D(u) matching circle z of D[a=0](u') by content.
fn match_circle(cube: &CubeIndex, cube0: &CubeIndex, u0: State, z: usize, u: State) -> usize {
    let r0 = cube0.resolve(u0);
    let r = cube.resolve(u);
    match r0.circles[z].first() {
        Some(&p) => r.circle_of[p] as usize,
        None => {
            let rank = r0.circles[..z].iter().filter(|c| c.is_empty()).count();
            (0..r.circles.len()).filter(|&k| r.circles[k].is_empty()).nth(rank).expect("empty circles match")
        }
    }
}

/// φ = γ_D⁻¹ ∘ ι ∘ γ_{D[a=0]} from M_{D[a=0]} to the u_a = 0 part of M_D,
/// where ι identifies the F generators by circle content. Checks that φ
/// is a chain map with a two-sided inverse.
fn monochord_embedding(
    cube: &CubeIndex,
    cube0: &CubeIndex,
    a: usize,
    total: &GradedChainComplex<GeneratorLabel>,
    middle: &GradedChainComplex<GeneratorLabel>,
) -> Result<bool> {
    let f = build_f_complex(cube);
    let f0 = build_f_complex(cube0);
    let g = build_gamma(cube, &f, total)?;
    let g0 = build_gamma(cube0, &f0, middle)?;
    let fi = f.basis_index();
    let mi = total.basis_index();
    let is_sub = |l: &GeneratorLabel| l.state().get(a) == 0;
    let sub = block(total, is_sub);
    let mut phi: BTreeMap<i64, SparseMatrix> = BTreeMap::new();
    let mut inv: BTreeMap<i64, SparseMatrix> = BTreeMap::new();
    let degrees: std::collections::BTreeSet<i64> = sub.bases.keys().chain(middle.bases.keys()).copied().collect();
    for &k in &degrees {
        let f0b = f0.bases.get(&k).map_or(&[][..], Vec::as_slice);
        if f0b.len() != sub.rank(k) {
            return Ok(false);
        }
        // ι: F_{D[a=0]} → F_D restricted to u_a = 0, as a matrix into the full F_D basis.
        let mut trip = Vec::new();
        for (col, l) in f0b.iter().enumerate() {
            let target = match *l {
                GeneratorLabel::Circle { state, circle } => {
                    let u = insert_bit(state, a, 0);
                    GeneratorLabel::Circle { state: u, circle: match_circle(cube, cube0, state, circle, u) }
                }
                other => lift_label(&other, a, 0),
            };
            match fi.get(&target) {
                Some(&(d, row)) if d == k => trip.push((row, col, 1)),
                _ => return Ok(false),
            }
        }
        let iota = SparseMatrix::from_triplets(f.rank(k), f0b.len(), trip);
        let sub_rows: Vec<usize> = sub.bases.get(&k).map_or(Vec::new(), |b| b.iter().map(|l| mi[l].1).collect());
        let all_f: Vec<usize> = (0..f.rank(k)).collect();
        let g_inv = g.inverse.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(total.rank(k), f.rank(k)));
        let g_fwd = g.forward.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(f.rank(k), total.rank(k)));
        let g0_fwd = g0.forward.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(f0b.len(), middle.rank(k)));
        let g0_inv = g0.inverse.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(middle.rank(k), f0b.len()));
        let p = g_inv.select(&sub_rows, &all_f).mul(&iota).mul(&g0_fwd);
        let q = g0_inv.mul(&iota.transpose()).mul(&g_fwd.select(&all_f, &sub_rows));
        if p.mul(&q) != SparseMatrix::identity(sub_rows.len()) || q.mul(&p) != SparseMatrix::identity(middle.rank(k)) {
            return Ok(false);
        }
        phi.insert(k, p);
        inv.insert(k, q);
    }
    for &k in &degrees {
        if !(degrees.contains(&(k - 1))) {
            continue;
        }
        let lhs = phi[&(k - 1)].mul(&middle.differential(k));
        let rhs = sub.differential(k).mul(&phi[&k]);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every eligible skein sequence of every chord.
pub fn verify_all_skeins(cube: &CubeIndex) -> Result<Vec<SkeinReport>> {
    let mut out = Vec::new();
    for pos in 0..cube.n {
        for kind in skein_kinds(&cube.d1, pos) {
            out.push(verify_skein(cube, cube.d1.chords[pos].index, kind)?);
        }
    }
    Ok(out)
}

// Simplification.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveLemma {
    /// Two equivalent bichords: M_D ≃ Σ M_{D[a=1]}.
    EquivalentBichords,
    /// A 2-free monochord with 2-free monochords on both sides: M_D ≃ Σ M_{D[a=1]}.
    NestedMonochords,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Move {
    pub lemma: MoveLemma,
    /// The chord removed (set to 1).
    pub chord: usize,
    /// The equivalent partner, for bichord moves.
    pub partner: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Simplified {
    pub diagram: ChordDiagram,
    pub suspensions: usize,
    pub moves: Vec<Move>,
}

/// Applies both moves until neither applies. Each move deletes one chord
/// and adds one suspension.
pub fn simplify(d: &ChordDiagram) -> Result<Simplified> {
    let mut cur = d.clone();
    let mut moves = Vec::new();
    loop {
        let rep = detect_configs(&cur);
        let mv = if let Some(&[a, b]) = rep.equivalent_bichords.first() {
            Move { lemma: MoveLemma::EquivalentBichords, chord: b, partner: Some(a) }
        } else if let Some(&a) = rep.nested_monochords.first() {
            Move { lemma: MoveLemma::NestedMonochords, chord: a, partner: None }
        } else {
            break;
        };
        cur = smooth_cd(&cur, mv.chord, 1)?;
        moves.push(mv);
    }
    Ok(Simplified { diagram: cur, suspensions: moves.len(), moves })
}

/// Checks H(M_D) = H(M_{simplified}) raised by the suspension count.
pub fn simplification_sound(d: &ChordDiagram) -> Result<bool> {
    let s = simplify(d)?;
    let before = homology(&build_m_complex(&CubeIndex::build(d)?))?;
    let after = homology(&build_m_complex(&CubeIndex::build(&s.diagram)?))?;
    Ok(before == after.shifted(s.suspensions as i64))
}

/// The diagram D(1)_u with the chords labelled 0 in u.
pub fn restricted_diagram(cube: &CubeIndex, u: State) -> ChordDiagram {
    restricted(&cube.d1, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_chord_diagram, parse_pd, resolve_all_ones};

    fn trefoil() -> CubeIndex {
        let d = resolve_all_ones(&parse_pd("PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]").unwrap()).unwrap();
        CubeIndex::build(&d).unwrap()
    }

    #[test]
    fn trefoil_subposets() {
        // D(1) is three circles joined in a triangle by three bichords.
        let cube = trefoil();
        let x = build_subposet(&cube, SubposetKind::X).unwrap();
        assert_eq!(x.members, vec![State::ones(3)]);
        assert!(build_subposet(&cube, SubposetKind::Y).unwrap().members.is_empty());
        let kinds = all_subposet_kinds(&cube);
        assert_eq!(kinds.len(), 5);
        let mut z: Vec<State> = kinds
            .iter()
            .filter(|k| matches!(k, SubposetKind::Z { .. }))
            .flat_map(|&k| build_subposet(&cube, k).unwrap().members)
            .collect();
        z.sort();
        let phi_one: Vec<State> = cube.states().filter(|r| r.phi == 1).map(|r| r.state).collect();
        assert_eq!(z, phi_one);
    }

    #[test]
    fn trefoil_cofibre_and_skein() {
        let cube = trefoil();
        let rep = verify_cofibre_partition(&cube).unwrap();
        assert!(rep.ok(), "{rep:?}");
        for r in verify_all_skeins(&cube).unwrap() {
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let cube = trefoil();
        assert!(matches!(verify_skein(&cube, 1, SkeinKind::Monochord), Err(Error::ChordKind { .. })));
        assert!(matches!(build_subposet(&cube, SubposetKind::Z { class: 9 }), Err(Error::UnknownClass(9))));
    }

    #[test]
    fn smoothing_chord_diagrams() {
        let d = parse_chord_diagram("circle z: a1 b1 a2 b2\nchord 1: a1 a2\nchord 2: b1 b2").unwrap();
        let one = smooth_cd(&d, 1, 1).unwrap();
        assert_eq!(one.chords.len(), 1);
        assert_eq!(one.circles, vec![vec![0, 1]]);
        let zero = smooth_cd(&d, 1, 0).unwrap();
        assert_eq!(zero.circles.len(), 2);
        assert!(!zero.is_monochord(0));
    }

    #[test]
    fn smoothing_a_kink() {
        let pd = parse_pd("PD[X[1,2,2,1]]").unwrap();
        let s0 = smooth_pd(&pd, 1, 0).unwrap();
        let s1 = smooth_pd(&pd, 1, 1).unwrap();
        assert!(s0.pd.is_empty() && s1.pd.is_empty());
        assert_eq!(s0.free_loops + s1.free_loops, 3);
    }

    #[test]
    fn equivalent_bichords_simplify() {
        // Left trefoil: two circles joined by three parallel bichords.
        let d = resolve_all_ones(&parse_pd("PD[X[2,3,4,1],X[3,5,6,4],X[5,2,1,6]]").unwrap()).unwrap();
        let s = simplify(&d).unwrap();
        assert_eq!(s.suspensions, 2);
        assert_eq!(s.diagram.chords.len(), 1);
        assert!(simplification_sound(&d).unwrap());
    }
}
