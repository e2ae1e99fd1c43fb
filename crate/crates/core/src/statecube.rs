//! The cube of resolutions: D(u), Φ(u) and G(u) for every state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{full_mask, ChordDiagram, ResolvedState, State};

/// Result of one surgery on bare circle data.
struct Surgery {
    circles: Vec<Vec<usize>>,
    merged: bool,
}

/// Surgery along a chord with endpoints p, q. Untouched circles keep their
/// relative order; the new circle(s) are appended.
fn surger_circles(circles: &[Vec<usize>], circle_of: &[u32], p: usize, q: usize) -> Surgery {
    let (cp, cq) = (circle_of[p] as usize, circle_of[q] as usize);
    let rotate = |c: &[usize], start: usize| -> Vec<usize> {
        let k = c.iter().position(|&x| x == start).expect("endpoint on its circle");
        let mut v = c[k..].to_vec();
        v.extend_from_slice(&c[..k]);
        v
    };
    let mut out: Vec<Vec<usize>> = circles
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != cp && k != cq)
        .map(|(_, c)| c.clone())
        .collect();
    if cp != cq {
        let mut merged = rotate(&circles[cp], p);
        merged.extend(rotate(&circles[cq], q));
        out.push(merged);
        Surgery { circles: out, merged: true }
    } else {
        let r = rotate(&circles[cp], p);
        let k = r.iter().position(|&x| x == q).unwrap();
        out.push(r[..k].to_vec());
        out.push(r[k..].to_vec());
        Surgery { circles: out, merged: false }
    }
}

fn circle_index(circles: &[Vec<usize>], endpoints: usize) -> Vec<u32> {
    let mut out = vec![u32::MAX; endpoints];
    for (c, circle) in circles.iter().enumerate() {
        for &p in circle {
            out[p] = c as u32;
        }
    }
    out
}

/// Surgery along the 1-chord at position i: the chord becomes a 0-chord.
pub fn surger(d: &ChordDiagram, i: usize) -> Result<ChordDiagram> {
    let chord = d.chords.get(i).ok_or(Error::NoSuchChord(i))?;
    if chord.label == 0 {
        return Err(Error::AlreadyZero(chord.index));
    }
    let circle_of = circle_index(&d.circles, d.endpoint_names.len());
    let s = surger_circles(&d.circles, &circle_of, chord.ends[0], chord.ends[1]);
    let mut out = d.clone();
    let (cp, cq) = (circle_of[chord.ends[0]] as usize, circle_of[chord.ends[1]] as usize);
    let mut names: Vec<String> =
        d.circle_names.iter().enumerate().filter(|&(k, _)| k != cp && k != cq).map(|(_, n)| n.clone()).collect();
    if s.merged {
        names.push(format!("{}+{}", d.circle_names[cp], d.circle_names[cq]));
    } else {
        names.push(format!("{}.1", d.circle_names[cp]));
        names.push(format!("{}.2", d.circle_names[cp]));
    }
    out.circles = s.circles;
    out.circle_names = names;
    out.chords[i].label = 0;
    Ok(out)
}

/// D(1) with only the chords labelled 0 in u; other endpoints are dropped.
pub fn restricted(d1: &ChordDiagram, u: State) -> ChordDiagram {
    let keep: Vec<bool> = (0..d1.chords.len()).map(|i| u.get(i) == 0).collect();
    let mut drop = vec![false; d1.endpoint_names.len()];
    for (c, &k) in d1.chords.iter().zip(&keep) {
        if !k {
            drop[c.ends[0]] = true;
            drop[c.ends[1]] = true;
        }
    }
    let mut out = d1.clone();
    out.circles = d1.circles.iter().map(|c| c.iter().copied().filter(|&p| !drop[p]).collect()).collect();
    out.chords = d1.chords.iter().zip(&keep).filter(|(_, &k)| k).map(|(c, _)| c.clone()).collect();
    out
}

/// Union-find component labels, numbered by first appearance.
pub(crate) fn components(num_circles: usize, edges: impl Iterator<Item = (usize, usize)>) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..num_circles).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; num_circles];
    let mut out = vec![0; num_circles];
    let mut next = 0;
    for (c, slot) in out.iter_mut().enumerate() {
        let r = find(&mut parent, c);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        *slot = label[r];
    }
    (out, next)
}

/// Memoised cube of resolved states, indexed by state bits.
pub struct CubeIndex {
    pub d1: ChordDiagram,
    pub n: usize,
    pub top_circles: usize,
    states: Vec<ResolvedState>,
}

impl CubeIndex {
    /// Resolves all 2^n states, one weight level at a time.
    pub fn build(d1: &ChordDiagram) -> Result<CubeIndex> {
        let n = d1.chords.len();
        if n > 24 {
            return Err(Error::Guard(format!("{n} chords is too many for a full cube")));
        }
        let mut d1 = d1.clone();
        for c in d1.chords.iter_mut() {
            c.label = 1;
        }
        let endpoints = d1.endpoint_names.len();
        let size = 1usize << n;
        let mut by_weight: Vec<Vec<u64>> = vec![Vec::new(); n + 1];
        for bits in 0..size as u64 {
            by_weight[bits.count_ones() as usize].push(bits);
        }
        let mut slots: Vec<Option<ResolvedState>> = (0..size).map(|_| None).collect();
        let top = State::ones(n);
        let top_circle_of = circle_index(&d1.circles, endpoints);
        slots[top.bits as usize] = Some(finish(&d1, top, d1.circles.clone(), top_circle_of, 0));
        for w in (0..n).rev() {
            let level: Vec<(u64, ResolvedState)> = by_weight[w]
                .par_iter()
                .map(|&bits| {
                    let i = (!bits & full_mask(n)).trailing_zeros() as usize;
                    let parent = slots[(bits | (1 << i)) as usize].as_ref().unwrap();
                    let [p, q] = d1.chords[i].ends;
                    let s = surger_circles(&parent.circles, &parent.circle_of, p, q);
                    let phi = parent.phi + s.merged as u32;
                    let circle_of = circle_index(&s.circles, endpoints);
                    (bits, finish(&d1, State::new(n, bits), s.circles, circle_of, phi))
                })
                .collect();
            for (bits, r) in level {
                slots[bits as usize] = Some(r);
            }
        }
        let top_circles = d1.circles.len();
        Ok(CubeIndex { d1, n, top_circles, states: slots.into_iter().map(Option::unwrap).collect() })
    }

    pub fn resolve(&self, u: State) -> &ResolvedState {
        &self.states[u.bits as usize]
    }

    pub fn states(&self) -> impl Iterator<Item = &ResolvedState> {
        self.states.iter()
    }

    /// States of weight k, in increasing bit order.
    pub fn states_of_weight(&self, k: usize) -> impl Iterator<Item = &ResolvedState> {
        self.states.iter().filter(move |r| r.state.weight() == k)
    }

    /// The circle of D(1) a circle of D(u) descends from. Only meaningful
    /// when phi(u) = 0, where every circle descends from exactly one.
    pub fn origin_circle(&self, r: &ResolvedState, circle: usize) -> usize {
        let top = self.resolve(State::ones(self.n));
        match r.circles[circle].first() {
            Some(&p) => top.circle_of[p] as usize,
            None => {
                let rank = r.circles[..circle].iter().filter(|c| c.is_empty()).count();
                top.circles.iter().enumerate().filter(|(_, c)| c.is_empty()).nth(rank).map(|(k, _)| k).unwrap()
            }
        }
    }

    /// Position in D(v) of every untouched circle of D(u) for the edge
    /// u >_i v, plus the circles of O_i(u) and O_i(v).
    pub fn edge_circles(&self, u: State, i: usize) -> EdgeCircles {
        let ru = self.resolve(u);
        let rv = self.resolve(u.with(i, 0));
        let [p, q] = self.d1.chords[i].ends;
        let (cp, cq) = (ru.circle_of[p] as usize, ru.circle_of[q] as usize);
        let mut source: Vec<usize> = vec![cp];
        if cq != cp {
            source.push(cq);
        }
        // D(v) may come from another parent, so match circles by content.
        let empties_v: Vec<usize> = (0..rv.circles.len()).filter(|&k| rv.circles[k].is_empty()).collect();
        let mut empty_rank = 0;
        let map: Vec<usize> = (0..ru.circles.len())
            .map(|k| {
                if source.contains(&k) {
                    usize::MAX
                } else if let Some(&x) = ru.circles[k].first() {
                    rv.circle_of[x] as usize
                } else {
                    empty_rank += 1;
                    empties_v[empty_rank - 1]
                }
            })
            .collect();
        let mut target = vec![rv.circle_of[p] as usize];
        if rv.circle_of[q] != rv.circle_of[p] {
            target.push(rv.circle_of[q] as usize);
        }
        EdgeCircles { map, source, target }
    }
}

/// Circle correspondence along one cube edge.
#[derive(Clone, Debug)]
pub struct EdgeCircles {
    /// Image of each circle not in `source` (usize::MAX for those in it).
    pub map: Vec<usize>,
    /// O_i(u): circles of D(u) touched by the surgery.
    pub source: Vec<usize>,
    /// O_i(v): circles of D(v) produced by the surgery.
    pub target: Vec<usize>,
}

fn finish(d1: &ChordDiagram, state: State, circles: Vec<Vec<usize>>, circle_of: Vec<u32>, phi: u32) -> ResolvedState {
    let (components, num_components) = if phi <= 1 {
        let edges = d1
            .chords
            .iter()
            .enumerate()
            .filter(|&(i, _)| state.get(i) == 0)
            .map(|(_, c)| (circle_of[c.ends[0]] as usize, circle_of[c.ends[1]] as usize));
        let (c, k) = components(circles.len(), edges);
        (Some(c), k)
    } else {
        (None, 0)
    };
    ResolvedState { state, circles, circle_of, phi, components, num_components }
}

/// Compares circle lists up to order of circles and rotation within each.
fn same_circles(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    let norm = |cs: &[Vec<usize>]| {
        let mut v: Vec<Vec<usize>> = cs
            .iter()
            .map(|c| match c.iter().enumerate().min_by_key(|&(_, &x)| x) {
                Some((k, _)) => {
                    let mut r = c[k..].to_vec();
                    r.extend_from_slice(&c[..k]);
                    r
                }
                None => Vec::new(),
            })
            .collect();
        v.sort();
        v
    };
    norm(a) == norm(b)
}

/// Checks that every descending chain from 1 to u yields the same D(u) and
/// merge count. All chains are walked when n <= `exhaustive_up_to`;
/// otherwise `samples` pseudo-random chains per state are walked, together
/// with the local check over all parents of every state.
pub fn phi_chain_independence_check(cube: &CubeIndex, exhaustive_up_to: usize, samples: usize) -> bool {
    let n = cube.n;
    let d1 = &cube.d1;
    let endpoints = d1.endpoint_names.len();
    let walk = |order: &[usize]| -> (Vec<Vec<usize>>, u32) {
        let mut circles = d1.circles.clone();
        let mut phi = 0;
        for &i in order {
            let circle_of = circle_index(&circles, endpoints);
            let [p, q] = d1.chords[i].ends;
            let s = surger_circles(&circles, &circle_of, p, q);
            phi += s.merged as u32;
            circles = s.circles;
        }
        (circles, phi)
    };
    let agree = |r: &ResolvedState, order: &[usize]| {
        let (c, phi) = walk(order);
        phi == r.phi && same_circles(&c, &r.circles)
    };
    let local_ok = cube.states.par_iter().all(|r| {
        r.state.zero_set().into_iter().all(|i| {
            let parent = cube.resolve(r.state.with(i, 1));
            let [p, q] = d1.chords[i].ends;
            let s = surger_circles(&parent.circles, &parent.circle_of, p, q);
            parent.phi + s.merged as u32 == r.phi && same_circles(&s.circles, &r.circles)
        })
    });
    if !local_ok {
        return false;
    }
    if n <= exhaustive_up_to {
        cube.states.par_iter().all(|r| {
            let zeros = r.state.zero_set();
            permutations(&zeros).all(|order| agree(r, &order))
        })
    } else {
        cube.states.par_iter().all(|r| {
            let zeros = r.state.zero_set();
            let mut seed = r.state.bits.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
            (0..samples).all(|_| {
                let mut order = zeros.clone();
                for k in (1..order.len()).rev() {
                    seed ^= seed << 13;
                    seed ^= seed >> 7;
                    seed ^= seed << 17;
                    order.swap(k, (seed % (k as u64 + 1)) as usize);
                }
                agree(r, &order)
            })
        })
    }
}

/// Lexicographic permutations of a small slice.
fn permutations(items: &[usize]) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = items.to_vec();
    cur.sort_unstable();
    let mut first = true;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        if first {
            first = false;
            return Some(cur.clone());
        }
        let n = cur.len();
        if n < 2 {
            done = true;
            return None;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            done = true;
            return None;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        Some(cur.clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_chord_diagram, parse_pd, resolve_all_ones};

    fn trefoil() -> ChordDiagram {
        resolve_all_ones(&parse_pd("PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]").unwrap()).unwrap()
    }

    #[test]
    fn smallest_merge() {
        let d = parse_chord_diagram("circle A: a1\ncircle B: a2\nchord 1: a1 a2").unwrap();
        let s = surger(&d, 0).unwrap();
        assert_eq!(s.num_circles(), 1);
        assert_eq!(s.chords[0].label, 0);
        assert!(s.is_monochord(0));
        assert!(matches!(surger(&s, 0), Err(Error::AlreadyZero(1))));
    }

    #[test]
    fn smallest_split() {
        let d = parse_chord_diagram("circle A: a1 b1 a2 b2\nchord 1: a1 a2\nchord 2: b1 b2").unwrap();
        let s = surger(&d, 0).unwrap();
        let names: Vec<Vec<&str>> =
            s.circles.iter().map(|c| c.iter().map(|&p| s.endpoint_names[p].as_str()).collect()).collect();
        assert_eq!(names, vec![vec!["a1", "b1"], vec!["a2", "b2"]]);
        assert!(!s.is_monochord(1));
    }

    #[test]
    fn trefoil_two_surgeries_leave_one_circle() {
        let d = trefoil();
        let s = surger(&surger(&d, 0).unwrap(), 1).unwrap();
        assert_eq!(s.num_circles(), 1);
    }

    #[test]
    fn trefoil_phi_values() {
        let cube = CubeIndex::build(&trefoil()).unwrap();
        for r in cube.states() {
            let w = r.state.weight();
            let expected = match w {
                3 => 0,
                2 => 1,
                _ => 2,
            };
            assert_eq!(r.phi, expected, "state {}", r.state);
            assert_eq!(r.circles.len() as i64, 3 + 3 - w as i64 - 2 * r.phi as i64);
        }
        assert!(phi_chain_independence_check(&cube, 8, 2));
    }

    #[test]
    fn hopf_phi_values() {
        let d = parse_chord_diagram("circle A: a1 b1\ncircle B: b2 a2\nchord 1: a1 a2\nchord 2: b1 b2").unwrap();
        let cube = CubeIndex::build(&d).unwrap();
        assert_eq!(cube.resolve(State::from_bits(&[0, 1])).phi, 1);
        assert_eq!(cube.resolve(State::from_bits(&[0, 0])).phi, 1);
        assert_eq!(cube.resolve(State::from_bits(&[0, 0])).circles.len(), 2);
    }

    #[test]
    fn restriction_filters_chords() {
        let d = trefoil();
        assert_eq!(restricted(&d, State::ones(3)).num_chords(), 0);
        assert_eq!(restricted(&d, State::zeros(3)), d);
        let r = restricted(&d, State::from_bits(&[0, 1, 1]));
        assert_eq!(r.num_chords(), 1);
        assert!(!r.is_monochord(0));
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(&[0, 1, 2]).count(), 6);
        assert_eq!(permutations(&[]).count(), 1);
    }
}
