//! Chord configurations of D(1) and the Φ classifier built on them.

use serde::Serialize;

use crate::model::{ChordDiagram, State};
use crate::statecube::{restricted, CubeIndex};

/// Coarse value of Φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiBucket {
    Zero,
    One,
    More,
}

impl PhiBucket {
    pub fn of(phi: u32) -> PhiBucket {
        match phi {
            0 => PhiBucket::Zero,
            1 => PhiBucket::One,
            _ => PhiBucket::More,
        }
    }
}

/// Freeness of one monochord.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonochordFreeness {
    pub chord: usize,
    pub two_free: bool,
    pub three_free: bool,
    pub free: bool,
    /// Bichords b for which this monochord is b-free.
    pub b_free: Vec<usize>,
}

/// Configurations present in a chord diagram. Witnesses use chord indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigReport {
    pub one_adequate: bool,
    pub bichord: bool,
    pub alternating_pair: bool,
    pub alternating_triple: bool,
    pub mixed_alternating_pair: bool,
    pub two_non_parallel_bichords: bool,
    pub alternating_pair_and_bichord: bool,
    pub two_disjoint_alternating_pairs: bool,
    pub bichords: Vec<usize>,
    pub monochords: Vec<usize>,
    pub alternating_pairs: Vec<[usize; 2]>,
    /// (a, b, c): parallel bichords a, b and monochord c.
    pub alternating_triples: Vec<[usize; 3]>,
    /// (a, b, c, d): the only alternating pairs are ab, bc, cd.
    pub mixed_alternating_pairs: Vec<[usize; 4]>,
    pub non_parallel_bichords_witness: Option<[usize; 2]>,
    pub alternating_pair_and_bichord_witness: Option<[usize; 3]>,
    pub disjoint_alternating_pairs_witness: Option<[usize; 4]>,
    pub freeness: Vec<MonochordFreeness>,
    pub nested_monochords: Vec<usize>,
    pub parallel_classes: Vec<Vec<usize>>,
    pub equivalent_bichords: Vec<[usize; 2]>,
    /// For each monochord e, the bichords with an endpoint in its half-disk.
    pub half_disks: Vec<(usize, Vec<usize>)>,
}

/// Pairwise chord relations of a diagram, indexed by chord position, for
/// fast queries restricted to a chord subset (a bitmask of positions).
#[derive(Clone, Debug)]
pub struct ConfigIndex {
    pub n: usize,
    pub mono: u64,
    pub bi: u64,
    /// Unordered circle pair of each chord.
    pub circles: Vec<(usize, usize)>,
    /// alt[a]: monochords forming an alternating pair with a.
    pub alt: Vec<u64>,
    /// class[a]: bichords parallel to a (including a).
    pub class: Vec<u64>,
    /// Masks of alternating pairs.
    pub pairs: Vec<u64>,
    /// Masks of alternating triples, with the triple (a, b, c).
    pub triples: Vec<(u64, [usize; 3])>,
    /// Masks of mixed alternating pairs, with the path (a, b, c, d).
    pub mixed: Vec<(u64, [usize; 4])>,
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

fn iter_bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

/// Whether position x lies strictly inside the arc from p to q (p < q).
fn inside(p: usize, q: usize, x: usize) -> bool {
    p < x && x < q
}

impl ConfigIndex {
    pub fn new(d: &ChordDiagram) -> ConfigIndex {
        let n = d.chords.len();
        assert!(n <= 64, "at most 64 chords");
        let circle_of = d.circle_of();
        let pos = d.positions();
        let circles: Vec<(usize, usize)> = d
            .chords
            .iter()
            .map(|c| {
                let (x, y) = (circle_of[c.ends[0]], circle_of[c.ends[1]]);
                (x.min(y), x.max(y))
            })
            .collect();
        let mut mono = 0;
        let mut bi = 0;
        for (i, &(x, y)) in circles.iter().enumerate() {
            if x == y {
                mono |= bit(i);
            } else {
                bi |= bit(i);
            }
        }
        // Sorted positions of a monochord's endpoints on its circle.
        let span = |i: usize| {
            let [p, q] = d.chords[i].ends;
            (pos[p].min(pos[q]), pos[p].max(pos[q]))
        };
        // Position on circle z of the endpoint of bichord b lying there.
        let end_on = |b: usize, z: usize| {
            let e = d.chords[b].ends.into_iter().find(|&p| circle_of[p] == z).unwrap();
            pos[e]
        };
        let mut alt = vec![0u64; n];
        let mut pairs = Vec::new();
        for a in iter_bits(mono) {
            for b in iter_bits(mono) {
                if b <= a || circles[a] != circles[b] {
                    continue;
                }
                let (p, q) = span(a);
                let (r, s) = span(b);
                if inside(p, q, r) != inside(p, q, s) {
                    alt[a] |= bit(b);
                    alt[b] |= bit(a);
                    pairs.push(bit(a) | bit(b));
                }
            }
        }
        let mut class = vec![0u64; n];
        for a in iter_bits(bi) {
            for b in iter_bits(bi) {
                if circles[a] == circles[b] {
                    class[a] |= bit(b);
                }
            }
        }
        let mut triples = Vec::new();
        for a in iter_bits(bi) {
            for b in iter_bits(class[a]) {
                if b <= a {
                    continue;
                }
                for c in iter_bits(mono) {
                    let z = circles[c].0;
                    if z != circles[a].0 && z != circles[a].1 {
                        continue;
                    }
                    let (p, q) = span(c);
                    if inside(p, q, end_on(a, z)) != inside(p, q, end_on(b, z)) {
                        triples.push((bit(a) | bit(b) | bit(c), [a, b, c]));
                    }
                }
            }
        }
        // Induced paths a-b-c-d in the alternating-pair graph.
        let mut mixed = Vec::new();
        for b in iter_bits(mono) {
            for c in iter_bits(alt[b]) {
                for a in iter_bits(alt[b] & !bit(c) & !alt[c]) {
                    for dd in iter_bits(alt[c] & !bit(b) & !alt[b] & !alt[a] & !bit(a)) {
                        if a < dd {
                            mixed.push((bit(a) | bit(b) | bit(c) | bit(dd), [a, b, c, dd]));
                        }
                    }
                }
            }
        }
        ConfigIndex { n, mono, bi, circles, alt, class, pairs, triples, mixed }
    }

    pub fn has_bichord(&self, m: u64) -> bool {
        self.bi & m != 0
    }

    pub fn altpair_witness(&self, m: u64) -> Option<[usize; 2]> {
        iter_bits(self.mono & m).find_map(|a| {
            let b = self.alt[a] & m;
            (b != 0).then(|| [a, b.trailing_zeros() as usize])
        })
    }

    pub fn has_altpair(&self, m: u64) -> bool {
        self.altpair_witness(m).is_some()
    }

    pub fn non_parallel_witness(&self, m: u64) -> Option<[usize; 2]> {
        let a = iter_bits(self.bi & m).next()?;
        let b = iter_bits(self.bi & m & !self.class[a]).next()?;
        Some([a, b])
    }

    /// Two alternating pairs with no alternation between them. Pairs that
    /// share no chord but cross-alternate in a 4-cycle leave Φ = 1.
    pub fn disjoint_pairs_witness(&self, m: u64) -> Option<[usize; 4]> {
        let active: Vec<u64> = self.pairs.iter().copied().filter(|&p| p & m == p).collect();
        let reach = |p: u64| iter_bits(p).fold(0u64, |acc, a| acc | self.alt[a]);
        for (k, &p) in active.iter().enumerate() {
            if let Some(&q) = active[k + 1..].iter().find(|&&q| q & p == 0 && reach(p) & q == 0) {
                let mut w: Vec<usize> = iter_bits(p).chain(iter_bits(q)).collect();
                w[..2].sort_unstable();
                w[2..].sort_unstable();
                return Some([w[0], w[1], w[2], w[3]]);
            }
        }
        None
    }

    /// Classification by the configuration criteria on the chords in m.
    pub fn classify(&self, m: u64) -> PhiBucket {
        let bichord = self.has_bichord(m);
        let altpair = self.has_altpair(m);
        if !bichord && !altpair {
            return PhiBucket::Zero;
        }
        let more = self.non_parallel_witness(m).is_some()
            || (bichord && altpair)
            || self.triples.iter().any(|&(t, _)| t & m == t)
            || self.disjoint_pairs_witness(m).is_some()
            || self.mixed.iter().any(|&(t, _)| t & m == t);
        if more {
            PhiBucket::More
        } else {
            PhiBucket::One
        }
    }

    /// Monochord a is b-free for bichord b.
    pub fn is_b_free(&self, a: usize, b: usize) -> bool {
        !self.triples.iter().any(|&(_, [x, y, c])| c == a && (x == b || y == b))
    }

    pub fn is_two_free(&self, a: usize) -> bool {
        self.alt[a] == 0
    }

    pub fn is_three_free(&self, a: usize) -> bool {
        !self.triples.iter().any(|&(_, [_, _, c])| c == a)
    }
}

/// All configurations of d, with witnesses by chord index.
pub fn detect_configs(d: &ChordDiagram) -> ConfigReport {
    let ix = ConfigIndex::new(d);
    let all = crate::model::full_mask(ix.n);
    let name = |i: usize| d.chords[i].index;
    let sorted2 = |a: usize, b: usize| {
        let (x, y) = (name(a), name(b));
        [x.min(y), x.max(y)]
    };
    let mut alternating_pairs: Vec<[usize; 2]> =
        ix.pairs.iter().map(|&p| { let v: Vec<usize> = iter_bits(p).collect(); sorted2(v[0], v[1]) }).collect();
    alternating_pairs.sort_unstable();
    let mut alternating_triples: Vec<[usize; 3]> = ix
        .triples
        .iter()
        .map(|&(_, [a, b, c])| {
            let [x, y] = sorted2(a, b);
            [x, y, name(c)]
        })
        .collect();
    alternating_triples.sort_unstable();
    let mut mixed_alternating_pairs: Vec<[usize; 4]> = ix
        .mixed
        .iter()
        .map(|&(_, p)| {
            let q = p.map(name);
            let r = [q[3], q[2], q[1], q[0]];
            q.min(r)
        })
        .collect();
    mixed_alternating_pairs.sort_unstable();
    let bichords: Vec<usize> = iter_bits(ix.bi).map(name).collect();
    let monochords: Vec<usize> = iter_bits(ix.mono).map(name).collect();
    let altpair = ix.altpair_witness(all);
    let alternating_pair_and_bichord_witness = match (altpair, iter_bits(ix.bi).next()) {
        (Some([a, b]), Some(c)) => {
            let [x, y] = sorted2(a, b);
            Some([x, y, name(c)])
        }
        _ => None,
    };
    let freeness: Vec<MonochordFreeness> = iter_bits(ix.mono)
        .map(|a| {
            let two_free = ix.is_two_free(a);
            let three_free = ix.is_three_free(a);
            MonochordFreeness {
                chord: name(a),
                two_free,
                three_free,
                free: two_free && three_free,
                b_free: iter_bits(ix.bi).filter(|&b| ix.is_b_free(a, b)).map(name).collect(),
            }
        })
        .collect();
    let mut parallel_classes: Vec<Vec<usize>> = Vec::new();
    let mut seen = 0u64;
    for a in iter_bits(ix.bi) {
        if seen & bit(a) == 0 {
            seen |= ix.class[a];
            parallel_classes.push(iter_bits(ix.class[a]).map(name).collect());
        }
    }
    let mut equivalent_bichords = Vec::new();
    for a in iter_bits(ix.bi) {
        for b in iter_bits(ix.class[a]) {
            if b > a && !ix.triples.iter().any(|&(_, [x, y, _])| (x, y) == (a, b) || (x, y) == (b, a)) {
                equivalent_bichords.push(sorted2(a, b));
            }
        }
    }
    equivalent_bichords.sort_unstable();
    ConfigReport {
        one_adequate: ix.mono == 0,
        bichord: ix.bi != 0,
        alternating_pair: altpair.is_some(),
        alternating_triple: !ix.triples.is_empty(),
        mixed_alternating_pair: !ix.mixed.is_empty(),
        two_non_parallel_bichords: ix.non_parallel_witness(all).is_some(),
        alternating_pair_and_bichord: alternating_pair_and_bichord_witness.is_some(),
        two_disjoint_alternating_pairs: ix.disjoint_pairs_witness(all).is_some(),
        bichords,
        monochords,
        alternating_pairs,
        alternating_triples,
        mixed_alternating_pairs,
        non_parallel_bichords_witness: ix.non_parallel_witness(all).map(|[a, b]| sorted2(a, b)),
        alternating_pair_and_bichord_witness,
        disjoint_alternating_pairs_witness: ix.disjoint_pairs_witness(all).map(|w| w.map(name)),
        freeness,
        nested_monochords: nested_monochords(d, &ix).into_iter().map(name).collect(),
        parallel_classes,
        equivalent_bichords,
        half_disks: iter_bits(ix.mono).map(|e| (name(e), half_disk(d, e).into_iter().map(name).collect())).collect(),
    }
}

/// The two arcs of circle z cut by monochord e, as endpoint lists.
fn arcs(d: &ChordDiagram, e: usize) -> (Vec<usize>, Vec<usize>) {
    let circle_of = d.circle_of();
    let pos = d.positions();
    let [p, q] = d.chords[e].ends;
    let z = &d.circles[circle_of[p]];
    let (lo, hi) = (pos[p].min(pos[q]), pos[p].max(pos[q]));
    let inner = z[lo + 1..hi].to_vec();
    let outer = z[hi + 1..].iter().chain(&z[..lo]).copied().collect();
    (inner, outer)
}

/// Positions of 2-free monochords a such that both arcs of a contain a
/// 2-free monochord.
fn nested_monochords(d: &ChordDiagram, ix: &ConfigIndex) -> Vec<usize> {
    let chord_at = chord_of_endpoint(d);
    let two_free = |c: usize| ix.mono & bit(c) != 0 && ix.is_two_free(c);
    iter_bits(ix.mono)
        .filter(|&a| two_free(a))
        .filter(|&a| {
            let (x, y) = arcs(d, a);
            let has = |arc: &[usize]| {
                arc.iter().any(|&p| chord_at[p] != a && chord_at[p] != usize::MAX && two_free(chord_at[p]))
            };
            has(&x) && has(&y)
        })
        .collect()
}

fn chord_of_endpoint(d: &ChordDiagram) -> Vec<usize> {
    let mut out = vec![usize::MAX; d.endpoint_names.len()];
    for (i, c) in d.chords.iter().enumerate() {
        out[c.ends[0]] = i;
        out[c.ends[1]] = i;
    }
    out
}

/// Bichords (positions) with an endpoint in the half-disk of monochord e:
/// the arc of e free of other monochord endpoints, or the arc minimising
/// the count when both or neither qualify.
pub fn half_disk(d: &ChordDiagram, e: usize) -> Vec<usize> {
    let chord_at = chord_of_endpoint(d);
    let circle_of = d.circle_of();
    // Endpoints without a chord (left behind by smoothing) count as neither kind.
    let is_mono = |c: usize| {
        c != usize::MAX && {
            let [p, q] = d.chords[c].ends;
            circle_of[p] == circle_of[q]
        }
    };
    let (x, y) = arcs(d, e);
    let bichords = |arc: &[usize]| {
        let mut v: Vec<usize> =
            arc.iter().map(|&p| chord_at[p]).filter(|&c| c != usize::MAX && !is_mono(c)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let clean = |arc: &[usize]| arc.iter().all(|&p| !is_mono(chord_at[p]));
    let (bx, by) = (bichords(&x), bichords(&y));
    match (clean(&x), clean(&y)) {
        (true, false) => bx,
        (false, true) => by,
        _ => {
            if bx.len() <= by.len() {
                bx
            } else {
                by
            }
        }
    }
}

/// Φ bucket of u from the configurations of D(1)_u alone.
pub fn classify_phi_by_configs(cube: &CubeIndex, u: State) -> PhiBucket {
    let d = restricted(&cube.d1, u);
    ConfigIndex::new(&d).classify(crate::model::full_mask(d.chords.len()))
}

pub fn is_1_adequate(d: &ChordDiagram) -> bool {
    (0..d.chords.len()).all(|i| !d.is_monochord(i))
}

pub fn has_alternating_pair(d: &ChordDiagram) -> bool {
    let ix = ConfigIndex::new(d);
    ix.has_altpair(crate::model::full_mask(ix.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_chord_diagram;

    fn cd(s: &str) -> ChordDiagram {
        parse_chord_diagram(s).unwrap()
    }

    #[test]
    fn interleaved_monochords_alternate() {
        let d = cd("circle z: a1 b1 a2 b2\nchord 1: a1 a2\nchord 2: b1 b2");
        let r = detect_configs(&d);
        assert!(r.alternating_pair);
        assert_eq!(r.alternating_pairs, vec![[1, 2]]);
        assert!(has_alternating_pair(&d));
        assert!(!is_1_adequate(&d));
    }

    #[test]
    fn nested_monochords_do_not_alternate() {
        let d = cd("circle z: a1 a2 b1 b2\nchord 1: a1 a2\nchord 2: b1 b2");
        assert!(!has_alternating_pair(&d));
        assert!(detect_configs(&d).freeness.iter().all(|f| f.two_free));
    }

    #[test]
    fn alternating_triple_detected() {
        let d = cd("circle z: a1 c1 b1 c2\ncircle w: b2 a2\nchord 1: a1 a2\nchord 2: b1 b2\nchord 3: c1 c2");
        let r = detect_configs(&d);
        assert_eq!(r.alternating_triples, vec![[1, 2, 3]]);
        assert!(r.equivalent_bichords.is_empty());
        assert_eq!(r.parallel_classes, vec![vec![1, 2]]);
        assert_eq!(r.freeness[0].b_free, Vec::<usize>::new());
    }

    #[test]
    fn parallel_without_separator_is_equivalent() {
        let d = cd("circle z: a1 b1 c1 c2\ncircle w: b2 a2\nchord 1: a1 a2\nchord 2: b1 b2\nchord 3: c1 c2");
        let r = detect_configs(&d);
        assert!(r.alternating_triples.is_empty());
        assert_eq!(r.equivalent_bichords, vec![[1, 2]]);
        assert_eq!(r.freeness[0].b_free, vec![1, 2]);
    }

    #[test]
    fn path_of_four_is_mixed() {
        // Chords on one circle with alternation graph the path 1-2-3-4.
        let d = cd("circle z: p1 q1 p2 r1 q2 s1 r2 s2\nchord 1: p1 p2\nchord 2: q1 q2\nchord 3: r1 r2\nchord 4: s1 s2");
        let r = detect_configs(&d);
        assert_eq!(r.alternating_pairs, vec![[1, 2], [2, 3], [3, 4]]);
        assert_eq!(r.mixed_alternating_pairs, vec![[1, 2, 3, 4]]);
        // 2 alternates with 3, so {1,2} and {3,4} are not disjoint.
        assert_eq!(r.disjoint_alternating_pairs_witness, None);
    }

    #[test]
    fn trefoil_classification() {
        use crate::ingest::{parse_pd, resolve_all_ones};
        let d = resolve_all_ones(&parse_pd("PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]").unwrap()).unwrap();
        let cube = CubeIndex::build(&d).unwrap();
        assert_eq!(classify_phi_by_configs(&cube, State::from_bits(&[0, 1, 1])), PhiBucket::One);
        assert_eq!(classify_phi_by_configs(&cube, State::zeros(3)), PhiBucket::More);
        assert_eq!(classify_phi_by_configs(&cube, State::ones(3)), PhiBucket::Zero);
        assert!(is_1_adequate(&d));
        for r in cube.states() {
            assert_eq!(classify_phi_by_configs(&cube, r.state), PhiBucket::of(r.phi));
        }
    }

    #[test]
    fn nested_and_half_disk() {
        let d = cd("circle z: a1 a2 x1 b1 b2 y1 c1 c2\ncircle w: y2 x2\n\
                    chord 1: a1 a2\nchord 2: b1 b2\nchord 3: c1 c2\nchord 4: x1 x2\nchord 5: y1 y2");
        let r = detect_configs(&d);
        assert!(r.nested_monochords.is_empty());
        let d = cd("circle z: a1 b1 b2 a2 c1 c2\nchord 1: a1 a2\nchord 2: b1 b2\nchord 3: c1 c2");
        assert_eq!(detect_configs(&d).nested_monochords, vec![1]);
        let d = cd("circle z: e1 x1 e2 y1\ncircle w: y2 x2\nchord 1: e1 e2\nchord 2: x1 x2\nchord 3: y1 y2");
        assert_eq!(half_disk(&d, 0).len(), 1);
    }
}
