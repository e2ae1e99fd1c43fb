//! Shared domain types.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

/// Planar diagram code with per-crossing signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdCode {
    pub crossings: Vec<[u32; 4]>,
    /// +1 or -1 per crossing, in crossing order.
    pub signs: Vec<i8>,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl PdCode {
    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }
}

impl fmt::Display for PdCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PD[")?;
        for (k, x) in self.crossings.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "X[{},{},{},{}]", x[0], x[1], x[2], x[3])?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chord {
    /// User-facing chord (crossing) label.
    pub index: usize,
    pub ends: [usize; 2],
    /// 1 for a 1-chord, 0 for a 0-chord.
    pub label: u8,
    /// The endpoint the chord points towards.
    pub distinguished: usize,
}

impl Chord {
    pub fn other_end(&self, p: usize) -> usize {
        if self.ends[0] == p {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

/// Circles as cyclic endpoint sequences plus labeled chords.
///
/// Circle orders must be coherent: every chord attaches to the same side of
/// the circles it touches when each circle is read in its listed direction.
/// Planar diagrams always admit such orders and surgery preserves them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordDiagram {
    pub endpoint_names: Vec<String>,
    pub circle_names: Vec<String>,
    pub circles: Vec<Vec<usize>>,
    /// Chord position in this vector is the cube coordinate.
    pub chords: Vec<Chord>,
    /// Optional (n_plus, n_minus) metadata.
    pub writhe: Option<(usize, usize)>,
}

impl ChordDiagram {
    pub fn num_chords(&self) -> usize {
        self.chords.len()
    }

    pub fn num_circles(&self) -> usize {
        self.circles.len()
    }

    /// Circle index of every endpoint (usize::MAX if absent).
    pub fn circle_of(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.endpoint_names.len()];
        for (c, circle) in self.circles.iter().enumerate() {
            for &p in circle {
                if p < out.len() {
                    out[p] = c;
                }
            }
        }
        out
    }

    /// Position of every endpoint along its circle.
    pub fn positions(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.endpoint_names.len()];
        for circle in &self.circles {
            for (k, &p) in circle.iter().enumerate() {
                if p < out.len() {
                    out[p] = k;
                }
            }
        }
        out
    }

    pub fn is_monochord(&self, chord: usize) -> bool {
        let circ = self.circle_of();
        let [p, q] = self.chords[chord].ends;
        circ[p] == circ[q]
    }

    pub fn chord_position(&self, index: usize) -> Option<usize> {
        self.chords.iter().position(|c| c.index == index)
    }

    /// The quantum grading offset n_plus - 2 n_minus, when known.
    pub fn writhe_shift(&self) -> Option<i64> {
        self.writhe.map(|(p, m)| p as i64 - 2 * m as i64)
    }

    /// Structural equality up to renaming chords, endpoints and circles,
    /// rotating circles, and one global reflection.
    pub fn isomorphic(&self, other: &ChordDiagram) -> bool {
        isomorphic_impl(self, other)
    }
}

/// Searches for a chord bijection and per-circle rotations matching the two
/// diagrams, allowing one global reflection.
fn isomorphic_impl(a: &ChordDiagram, b: &ChordDiagram) -> bool {
    if a.circles.len() != b.circles.len() || a.chords.len() != b.chords.len() {
        return false;
    }
    let seq = |d: &ChordDiagram, reverse: bool| -> Vec<Vec<usize>> {
        let mut chord_of = vec![usize::MAX; d.endpoint_names.len()];
        for (k, c) in d.chords.iter().enumerate() {
            chord_of[c.ends[0]] = k;
            chord_of[c.ends[1]] = k;
        }
        d.circles
            .iter()
            .map(|c| {
                let mut s: Vec<usize> = c.iter().map(|&p| chord_of[p]).collect();
                if reverse {
                    s.reverse();
                }
                s
            })
            .collect()
    };
    let sa = seq(a, false);
    for reverse in [false, true] {
        let sb = seq(b, reverse);
        let mut map = vec![usize::MAX; a.chords.len()];
        let mut inv = vec![usize::MAX; b.chords.len()];
        let mut used = vec![false; sb.len()];
        if match_circles(a, b, &sa, &sb, 0, &mut map, &mut inv, &mut used) {
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn match_circles(
    a: &ChordDiagram,
    b: &ChordDiagram,
    sa: &[Vec<usize>],
    sb: &[Vec<usize>],
    k: usize,
    map: &mut Vec<usize>,
    inv: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if k == sa.len() {
        return true;
    }
    let ca = &sa[k];
    for j in 0..sb.len() {
        if used[j] || sb[j].len() != ca.len() {
            continue;
        }
        for r in 0..ca.len().max(1) {
            let mut added = Vec::new();
            let mut ok = true;
            for (t, &x) in ca.iter().enumerate() {
                let y = sb[j][(t + r) % ca.len()];
                if a.chords[x].label != b.chords[y].label {
                    ok = false;
                    break;
                }
                if map[x] == usize::MAX && inv[y] == usize::MAX {
                    map[x] = y;
                    inv[y] = x;
                    added.push(x);
                } else if map[x] != y {
                    ok = false;
                    break;
                }
            }
            if ok {
                used[j] = true;
                if match_circles(a, b, sa, sb, k + 1, map, inv, used) {
                    return true;
                }
                used[j] = false;
            }
            for x in added {
                inv[map[x]] = usize::MAX;
                map[x] = usize::MAX;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    DanglingEndpoint,
    EndpointMultiplicity,
    DegenerateChord,
    DuplicateChordIndex,
    SharedEndpoint,
    UnusedEndpoint,
    BadDistinguished,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::DanglingEndpoint => "dangling endpoint",
            ViolationKind::EndpointMultiplicity => "endpoint multiplicity",
            ViolationKind::DegenerateChord => "degenerate chord",
            ViolationKind::DuplicateChordIndex => "duplicate chord index",
            ViolationKind::SharedEndpoint => "shared endpoint",
            ViolationKind::UnusedEndpoint => "unused endpoint",
            ViolationKind::BadDistinguished => "bad distinguished endpoint",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.detail)
    }
}

/// Lists every broken invariant of a chord diagram.
pub fn validate(d: &ChordDiagram) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |kind, detail: String| out.push(Violation { kind, detail });
    let n_end = d.endpoint_names.len();
    let name = |p: usize| d.endpoint_names.get(p).cloned().unwrap_or_else(|| format!("#{p}"));

    let mut seen = vec![0usize; n_end];
    for circle in &d.circles {
        for &p in circle {
            if p >= n_end {
                v(ViolationKind::DanglingEndpoint, format!("circle lists unknown endpoint {}", name(p)));
            } else {
                seen[p] += 1;
            }
        }
    }
    for (p, &count) in seen.iter().enumerate() {
        if count > 1 {
            v(ViolationKind::EndpointMultiplicity, format!("{} lies on {} circle positions", name(p), count));
        }
    }
    let mut used = vec![0usize; n_end];
    let mut indices = HashSet::new();
    for c in &d.chords {
        if !indices.insert(c.index) {
            v(ViolationKind::DuplicateChordIndex, format!("chord {}", c.index));
        }
        if c.ends[0] == c.ends[1] {
            v(ViolationKind::DegenerateChord, format!("chord {} has equal endpoints", c.index));
        }
        for &p in &c.ends {
            if p >= n_end || seen[p] == 0 {
                v(ViolationKind::DanglingEndpoint, format!("chord {} uses endpoint {} on no circle", c.index, name(p)));
            }
            if p < n_end {
                used[p] += 1;
            }
        }
        if !c.ends.contains(&c.distinguished) {
            v(ViolationKind::BadDistinguished, format!("chord {}", c.index));
        }
    }
    for p in 0..n_end {
        if used[p] > 1 {
            v(ViolationKind::SharedEndpoint, format!("{} belongs to {} chords", name(p), used[p]));
        }
        if used[p] == 0 && seen[p] > 0 {
            v(ViolationKind::UnusedEndpoint, format!("{} belongs to no chord", name(p)));
        }
    }
    out
}

/// A vertex of the cube: bit i is the label of chord i. Serializes as
/// its bit string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub n: u8,
    pub bits: u64,
}

impl State {
    pub fn new(n: usize, bits: u64) -> State {
        debug_assert!(n <= 64);
        State { n: n as u8, bits }
    }

    pub fn ones(n: usize) -> State {
        State::new(n, full_mask(n))
    }

    pub fn zeros(n: usize) -> State {
        State::new(n, 0)
    }

    pub fn from_bits(bits: &[u8]) -> State {
        let mut b = 0u64;
        for (i, &x) in bits.iter().enumerate() {
            if x != 0 {
                b |= 1 << i;
            }
        }
        State::new(bits.len(), b)
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn with(&self, i: usize, value: u8) -> State {
        let bits = if value == 0 { self.bits & !(1 << i) } else { self.bits | (1 << i) };
        State { n: self.n, bits }
    }

    /// Coordinates with label 0.
    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.get(i) == 0).collect()
    }

    /// Number of ones strictly before coordinate i.
    pub fn ones_before(&self, i: usize) -> usize {
        (self.bits & ((1u64 << i) - 1)).count_ones() as usize
    }

    /// The cube sign of the edge leaving this state along coordinate i.
    pub fn edge_sign(&self, i: usize) -> i64 {
        if self.ones_before(i).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// u >_i v for every i with u_i = 1.
    pub fn lower_neighbours(&self) -> impl Iterator<Item = (usize, State)> + '_ {
        (0..self.len()).filter(move |&i| self.get(i) == 1).map(move |i| (i, self.with(i, 0)))
    }

    pub fn bits_vec(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A resolved cube vertex. Circles of D(u) are stored directly; the chords
/// are those of D(1) with labels read from the state.
#[derive(Clone, Debug)]
pub struct ResolvedState {
    pub state: State,
    pub circles: Vec<Vec<usize>>,
    /// Circle of every endpoint.
    pub circle_of: Vec<u32>,
    pub phi: u32,
    /// Component of G(u) for every circle; only filled when phi <= 1.
    pub components: Option<Vec<usize>>,
    pub num_components: usize,
}

impl ResolvedState {
    pub fn zero_chords(&self) -> Vec<usize> {
        self.state.zero_set()
    }

    pub fn one_chords(&self) -> Vec<usize> {
        (0..self.state.len()).filter(|&i| self.state.get(i) == 1).collect()
    }

    /// D(u) as a stand-alone chord diagram.
    pub fn diagram(&self, d1: &ChordDiagram) -> ChordDiagram {
        let mut d = d1.clone();
        d.circles = self.circles.clone();
        d.circle_names = (0..self.circles.len()).map(|k| format!("z{}", k + 1)).collect();
        for (i, c) in d.chords.iter_mut().enumerate() {
            c.label = self.state.get(i);
        }
        d
    }

    /// Cardinality of the ladybug set (only meaningful when phi = 1).
    pub fn ladybug_size(&self, circles_at_top: usize) -> usize {
        if self.num_components == circles_at_top {
            2
        } else {
            1
        }
    }
}

/// Free integer modules per degree with differentials between them.
///
/// `direction` is -1 for a chain complex and +1 for a cochain complex; the
/// differential stored under key k maps degree k to degree k + direction.
#[derive(Clone, Debug)]
pub struct GradedChainComplex<L> {
    pub direction: i32,
    pub bases: BTreeMap<i64, Vec<L>>,
    pub differentials: BTreeMap<i64, crate::algebra::SparseMatrix>,
}

impl<L: Clone> GradedChainComplex<L> {
    pub fn new(direction: i32) -> Self {
        GradedChainComplex { direction, bases: BTreeMap::new(), differentials: BTreeMap::new() }
    }

    pub fn rank(&self, k: i64) -> usize {
        self.bases.get(&k).map_or(0, Vec::len)
    }

    pub fn total_rank(&self) -> usize {
        self.bases.values().map(Vec::len).sum()
    }

    /// Differential out of degree k, or a zero matrix of the right shape.
    pub fn differential(&self, k: i64) -> crate::algebra::SparseMatrix {
        let target = k + self.direction as i64;
        self.differentials
            .get(&k)
            .cloned()
            .unwrap_or_else(|| crate::algebra::SparseMatrix::zeros(self.rank(target), self.rank(k)))
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.bases.keys().copied().collect()
    }

    /// The dual complex: same bases, transposed differentials, reversed direction.
    pub fn dual(&self) -> Self {
        let mut out = GradedChainComplex::new(-self.direction);
        out.bases = self.bases.clone();
        for (&k, m) in &self.differentials {
            out.differentials.insert(k + self.direction as i64, m.transpose());
        }
        out
    }

    /// Renumbers every degree by adding `shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        let mut out = GradedChainComplex::new(self.direction);
        out.bases = self.bases.iter().map(|(k, b)| (k + shift, b.clone())).collect();
        out.differentials = self.differentials.iter().map(|(k, m)| (k + shift, m.clone())).collect();
        out
    }

    pub fn relabel<M: Clone>(&self, mut f: impl FnMut(&L) -> M) -> GradedChainComplex<M> {
        GradedChainComplex {
            direction: self.direction,
            bases: self.bases.iter().map(|(k, b)| (*k, b.iter().map(&mut f).collect())).collect(),
            differentials: self.differentials.clone(),
        }
    }

    /// Checks dimensions and that consecutive differentials compose to zero.
    pub fn check(&self) -> Result<(), String> {
        for (&k, m) in &self.differentials {
            let t = k + self.direction as i64;
            if m.rows() != self.rank(t) || m.cols() != self.rank(k) {
                return Err(format!(
                    "differential out of degree {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    self.rank(t),
                    self.rank(k)
                ));
            }
            if let Some(next) = self.differentials.get(&t) {
                if !next.mul(m).is_zero() {
                    return Err(format!("d^2 != 0 starting in degree {k}"));
                }
            }
        }
        Ok(())
    }

    pub fn basis_index(&self) -> HashMap<L, (i64, usize)>
    where
        L: std::hash::Hash + Eq,
    {
        let mut out = HashMap::new();
        for (&k, b) in &self.bases {
            for (j, l) in b.iter().enumerate() {
                out.insert(l.clone(), (k, j));
            }
        }
        out
    }
}

/// Finite downward-closed family of vertex sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub vertices: Vec<usize>,
    /// Sorted faces, each a sorted vertex list; includes the empty face.
    pub faces: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    pub fn from_faces(vertices: Vec<usize>, mut faces: Vec<Vec<usize>>) -> Self {
        for f in faces.iter_mut() {
            f.sort_unstable();
            f.dedup();
        }
        faces.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        faces.dedup();
        SimplicialComplex { vertices, faces }
    }

    /// Builds the complex generated by the given maximal faces.
    pub fn from_facets(vertices: Vec<usize>, facets: &[Vec<usize>]) -> Self {
        let mut all = HashSet::new();
        for f in facets {
            let f: Vec<usize> = {
                let mut f = f.clone();
                f.sort_unstable();
                f.dedup();
                f
            };
            for mask in 0u64..(1u64 << f.len()) {
                let sub: Vec<usize> =
                    (0..f.len()).filter(|&k| (mask >> k) & 1 == 1).map(|k| f[k]).collect();
                all.insert(sub);
            }
        }
        all.insert(Vec::new());
        SimplicialComplex::from_faces(vertices, all.into_iter().collect())
    }

    pub fn dimension(&self) -> i64 {
        self.faces.iter().map(|f| f.len() as i64 - 1).max().unwrap_or(-1)
    }

    pub fn is_downward_closed(&self) -> bool {
        let set: HashSet<&Vec<usize>> = self.faces.iter().collect();
        if !set.contains(&Vec::new()) {
            return false;
        }
        self.faces.iter().all(|f| {
            (0..f.len()).all(|k| {
                let mut g = f.clone();
                g.remove(k);
                set.contains(&g)
            })
        })
    }
}

/// One homology group: free rank plus torsion in invariant-factor form.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Group {
    pub betti: usize,
    pub torsion: Vec<BigUint>,
}

impl Group {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.betti == 1 {
            parts.push("Z".to_string());
        } else if self.betti > 1 {
            parts.push(format!("Z^{}", self.betti));
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// Homology per degree; degrees with the zero group are omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomologyResult {
    pub groups: BTreeMap<i64, Group>,
}

impl HomologyResult {
    pub fn get(&self, k: i64) -> Group {
        self.groups.get(&k).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, k: i64, g: Group) {
        if !g.is_zero() {
            self.groups.insert(k, g);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.groups.values().all(|g| g.torsion.is_empty())
    }

    pub fn total_betti(&self) -> usize {
        self.groups.values().map(|g| g.betti).sum()
    }

    pub fn shifted(&self, shift: i64) -> HomologyResult {
        HomologyResult { groups: self.groups.iter().map(|(k, g)| (k + shift, g.clone())).collect() }
    }

    /// Euler characteristic from free ranks.
    pub fn euler_characteristic(&self) -> i64 {
        self.groups.iter().map(|(k, g)| if k % 2 == 0 { g.betti as i64 } else { -(g.betti as i64) }).sum()
    }
}

impl fmt::Display for HomologyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.groups.iter().map(|(k, g)| format!("H{k}={g}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}
