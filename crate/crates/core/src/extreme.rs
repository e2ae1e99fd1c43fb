//! Lando graphs, independence complexes and the extreme grading.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::algebra::{homology, simplicial_chain_complex};
use crate::configs::ConfigIndex;
use crate::error::{Error, Result};
use crate::model::{full_mask, ChordDiagram, Group, HomologyResult, SimplicialComplex, State};
use crate::statecube::CubeIndex;

/// A simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertices: Vec<usize>,
    /// Edges (a, b) with a < b, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Graph {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        Graph { vertices, edges }
    }

    /// The cycle on n vertices (n >= 3).
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycles need at least three vertices");
        Graph::new((0..n).collect(), (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// The path with n edges.
    pub fn path(n: usize) -> Graph {
        Graph::new((0..=n).collect(), (0..n).map(|i| (i, i + 1)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_cycle(&self) -> bool {
        let n = self.vertices.len();
        n >= 3 && self.edges.len() == n && self.vertices.iter().all(|&v| self.degree(v) == 2) && self.components().len() == 1
    }

    pub fn is_path(&self) -> bool {
        let n = self.vertices.len();
        n >= 1
            && self.edges.len() + 1 == n
            && self.components().len() == 1
            && self.vertices.iter().all(|&v| self.degree(v) <= 2)
    }

    /// Vertex sets of the connected components, in vertex order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let pos: BTreeMap<usize, usize> = self.vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let (comp, count) = crate::statecube::components(
            self.vertices.len(),
            self.edges.iter().map(|&(a, b)| (pos[&a], pos[&b])),
        );
        let mut out = vec![Vec::new(); count];
        for (k, &v) in self.vertices.iter().enumerate() {
            out[comp[k]].push(v);
        }
        out
    }

    pub fn induced(&self, vertices: &[usize]) -> Graph {
        Graph::new(
            vertices.to_vec(),
            self.edges.iter().copied().filter(|(a, b)| vertices.contains(a) && vertices.contains(b)),
        )
    }
}

/// Vertices are the monochords (by chord index), edges the alternating pairs.
pub fn lando_graph(d: &ChordDiagram) -> Graph {
    let ix = ConfigIndex::new(d);
    let name = |i: usize| d.chords[i].index;
    let vertices: Vec<usize> = (0..ix.n).filter(|&i| ix.mono >> i & 1 == 1).map(name).collect();
    let edges = ix.pairs.iter().map(|&p| {
        let a = p.trailing_zeros() as usize;
        let b = 63 - p.leading_zeros() as usize;
        (name(a), name(b))
    });
    Graph::new(vertices, edges)
}

/// All independent sets, refusing graphs above `max_vertices`.
pub fn independence_complex(g: &Graph, max_vertices: usize) -> Result<SimplicialComplex> {
    let n = g.vertices.len();
    if n > max_vertices || n > 63 {
        return Err(Error::Guard(format!("{n} vertices exceeds the independence-complex limit of {max_vertices}")));
    }
    let pos: BTreeMap<usize, usize> = g.vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut adj = vec![0u64; n];
    for &(a, b) in &g.edges {
        adj[pos[&a]] |= 1 << pos[&b];
        adj[pos[&b]] |= 1 << pos[&a];
    }
    let mut faces = Vec::new();
    // Depth-first extension by increasing vertex position.
    let mut stack: Vec<(u64, usize)> = vec![(0, 0)];
    while let Some((set, from)) = stack.pop() {
        faces.push((0..n).filter(|&k| set >> k & 1 == 1).map(|k| g.vertices[k]).collect());
        let blocked = (0..n).filter(|&k| set >> k & 1 == 1).fold(0u64, |m, k| m | adj[k]);
        for k in from..n {
            if blocked >> k & 1 == 0 {
                stack.push((set | 1 << k, k + 1));
            }
        }
    }
    Ok(SimplicialComplex::from_faces(g.vertices.clone(), faces))
}

/// Reduced homology of a simplicial complex.
pub fn reduced_homology(k: &SimplicialComplex) -> Result<HomologyResult> {
    homology(&simplicial_chain_complex(k, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cycle,
    Path,
}

/// Reduced homology predicted by the case formulas for I(C_n) and I(L_n).
pub fn reference_homotopy(family: Family, n: usize) -> HomologyResult {
    let mut h = HomologyResult::default();
    let sphere = |h: &mut HomologyResult, dim: i64, count: usize| h.insert(dim, Group { betti: count, torsion: vec![] });
    match family {
        Family::Cycle => match n % 3 {
            0 => sphere(&mut h, n as i64 / 3 - 1, 2),
            1 => sphere(&mut h, (n as i64 - 1) / 3 - 1, 1),
            _ => sphere(&mut h, (n as i64 + 1) / 3 - 1, 1),
        },
        Family::Path => {
            if !n.is_multiple_of(3) {
                sphere(&mut h, n as i64 / 3, 1)
            }
        }
    }
    h
}

/// Whether {u : Φ(u) = 0} equals the states whose zero sets are faces of
/// the given complex (faces named by chord index).
pub fn dual_subposet_check(cube: &CubeIndex, complex: &SimplicialComplex) -> bool {
    let n = cube.n;
    let mut from_faces: Vec<u64> = Vec::new();
    for f in &complex.faces {
        let mut zeros = 0u64;
        for &c in f {
            match cube.d1.chord_position(c) {
                Some(p) => zeros |= 1 << p,
                None => return false,
            }
        }
        from_faces.push(!zeros & full_mask(n));
    }
    from_faces.sort_unstable();
    let mut x: Vec<u64> = cube.states().filter(|r| r.phi == 0).map(|r| r.state.bits).collect();
    x.sort_unstable();
    from_faces == x
}

/// The state whose zero set is the given face.
pub fn face_state(cube: &CubeIndex, face: &[usize]) -> Option<State> {
    let mut bits = full_mask(cube.n);
    for &c in face {
        bits &= !(1 << cube.d1.chord_position(c)?);
    }
    Some(State::new(cube.n, bits))
}

fn prime_powers(mut m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut q = 1;
            while m.is_multiple_of(p) {
                m /= p;
                q *= p;
            }
            out.push((p, q));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, m));
    }
    out
}

/// Invariant factors of a direct sum of cyclic groups of the given orders.
pub fn canonical_torsion(orders: &[BigUint]) -> Vec<BigUint> {
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for o in orders {
        let o = o.to_u64().expect("torsion orders fit in 64 bits");
        for (p, q) in prime_powers(o) {
            by_prime.entry(p).or_default().push(q);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![BigUint::one(); len];
    for qs in by_prime.values_mut() {
        qs.sort_unstable_by(|a, b| b.cmp(a));
        for (k, &q) in qs.iter().enumerate() {
            out[len - 1 - k] *= BigUint::from(q);
        }
    }
    out
}

/// Cyclic summands (0 = infinite order) of a group.
fn summands(g: &Group) -> Vec<BigUint> {
    let mut v = vec![BigUint::from(0u32); g.betti];
    v.extend(g.torsion.iter().cloned());
    v
}

fn group_from(summands: Vec<BigUint>) -> Group {
    let zero = BigUint::from(0u32);
    let betti = summands.iter().filter(|s| **s == zero).count();
    let torsion: Vec<BigUint> = summands.into_iter().filter(|s| *s != zero && !s.is_one()).collect();
    Group { betti, torsion: canonical_torsion(&torsion) }
}

/// Reduced homology of a join from the reduced homology of its factors:
/// H̃_{n+1}(A*B) = ⊕_{i+j=n} H̃_i(A)⊗H̃_j(B) ⊕ ⊕_{i+j=n-1} Tor(H̃_i(A), H̃_j(B)).
pub fn join_homology(a: &HomologyResult, b: &HomologyResult) -> HomologyResult {
    let zero = BigUint::from(0u32);
    let mut acc: BTreeMap<i64, Vec<BigUint>> = BTreeMap::new();
    for (&i, ga) in &a.groups {
        for (&j, gb) in &b.groups {
            for x in summands(ga) {
                for y in summands(gb) {
                    let tensor = match (x == zero, y == zero) {
                        (true, true) => Some(zero.clone()),
                        (true, false) => Some(y.clone()),
                        (false, true) => Some(x.clone()),
                        (false, false) => Some(x.gcd(&y)),
                    };
                    if let Some(t) = tensor {
                        acc.entry(i + j + 1).or_default().push(t);
                    }
                    if x != zero && y != zero {
                        acc.entry(i + j + 2).or_default().push(x.gcd(&y));
                    }
                }
            }
        }
    }
    let mut out = HomologyResult::default();
    for (k, s) in acc {
        out.insert(k, group_from(s));
    }
    out
}

/// Comparison of oracle Kh^{i, j_max} with H̃_{p-i-1}(I_D).
#[derive(Clone, Debug, Serialize)]
pub struct ExtremeReport {
    pub j_max: i64,
    pub p: usize,
    pub lando: Graph,
    pub agree: bool,
    pub khovanov: BTreeMap<i64, String>,
    pub independence: BTreeMap<i64, String>,
}

/// Checks Kh^{i, j_max}(D) ≅ H̃_{p-i-1}(I_D) with p = n_+.
pub fn extreme_grading_check(
    pd: &crate::model::PdCode,
    max_crossings: usize,
    max_vertices: usize,
) -> Result<ExtremeReport> {
    let d = crate::ingest::resolve_all_ones(pd)?;
    let lando = lando_graph(&d);
    let ind = reduced_homology(&independence_complex(&lando, max_vertices)?)?;
    let j = crate::oracle::j_max(pd);
    let kh = crate::oracle::khovanov_homology_at(pd, j, max_crossings)?;
    let p = pd.n_plus as i64;
    // Reindex H̃_m(I_D) to i = p - m - 1.
    let predicted = HomologyResult { groups: ind.groups.iter().map(|(m, g)| (p - m - 1, g.clone())).collect() };
    Ok(ExtremeReport {
        j_max: j,
        p: pd.n_plus,
        lando,
        agree: predicted == kh,
        khovanov: kh.groups.iter().map(|(k, g)| (*k, g.to_string())).collect(),
        independence: ind.groups.iter().map(|(k, g)| (*k, g.to_string())).collect(),
    })
}

/// Outcome of the join check for a disconnected Lando graph.
#[derive(Clone, Debug, Serialize)]
pub struct JoinReport {
    pub parts: usize,
    pub direct: String,
    pub via_join: String,
    pub agree: bool,
}

/// Compares H̃(I_G) with the iterated join of the component complexes.
/// Returns None when the graph is connected.
pub fn join_check(g: &Graph, max_vertices: usize) -> Result<Option<JoinReport>> {
    let parts = g.components();
    if parts.len() < 2 {
        return Ok(None);
    }
    let direct = reduced_homology(&independence_complex(g, max_vertices)?)?;
    let mut acc = HomologyResult::default();
    acc.insert(-1, Group { betti: 1, torsion: vec![] });
    for p in &parts {
        let h = reduced_homology(&independence_complex(&g.induced(p), max_vertices)?)?;
        acc = join_homology(&acc, &h);
    }
    Ok(Some(JoinReport { parts: parts.len(), direct: direct.to_string(), via_join: acc.to_string(), agree: direct == acc }))
}

/// Reduced homology concentrated as a single ℤ, if it is one.
pub fn single_sphere(h: &HomologyResult) -> Option<i64> {
    let mut nonzero = h.groups.iter().filter(|(_, g)| !g.is_zero());
    let (&k, g) = nonzero.next()?;
    (nonzero.next().is_none() && g.betti == 1 && g.torsion.is_empty()).then_some(k)
}

/// Sphere duality between I_D and X_D.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    /// k when H̃(I_D) is that of S^k.
    pub sphere: Option<i64>,
    /// Chain-level homology of the X_D totalization.
    pub extreme: String,
    /// None when I_D is not a homology sphere.
    pub agree: Option<bool>,
}

/// If H̃(I_D) is that of S^k, the X_D totalization must carry a single ℤ in
/// chain degree n - k - 1 (realization degree n - k - 2 after the unit shift).
pub fn sphere_duality_check(cube: &CubeIndex, max_vertices: usize) -> Result<DualityReport> {
    let lando = lando_graph(&cube.d1);
    let ind = reduced_homology(&independence_complex(&lando, max_vertices)?)?;
    let x = homology(&crate::functors::build_extreme_complex(cube))?;
    let sphere = single_sphere(&ind);
    let agree = sphere.map(|k| single_sphere(&x) == Some(cube.n as i64 - k - 1));
    Ok(DualityReport { sphere, extreme: x.to_string(), agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_chord_diagram;

    #[test]
    fn empty_graph_gives_full_simplex() {
        let g = Graph::new(vec![1, 2, 3], []);
        let k = independence_complex(&g, 24).unwrap();
        assert_eq!(k.faces.len(), 8);
        assert_eq!(k.dimension(), 2);
        assert!(reduced_homology(&k).unwrap().is_zero());
    }

    #[test]
    fn small_cycles_and_paths() {
        let c5 = reduced_homology(&independence_complex(&Graph::cycle(5), 24).unwrap()).unwrap();
        assert_eq!(c5.to_string(), "H1=Z");
        let c6 = reduced_homology(&independence_complex(&Graph::cycle(6), 24).unwrap()).unwrap();
        assert_eq!(c6.to_string(), "H1=Z^2");
        let l3 = reduced_homology(&independence_complex(&Graph::path(3), 24).unwrap()).unwrap();
        assert!(l3.is_zero());
        assert_eq!(reference_homotopy(Family::Path, 4).to_string(), "H1=Z");
        assert_eq!(reference_homotopy(Family::Cycle, 6).to_string(), "H1=Z^2");
        assert!(reference_homotopy(Family::Path, 3).is_zero());
    }

    #[test]
    fn guard_is_enforced() {
        assert!(matches!(independence_complex(&Graph::cycle(10), 9), Err(Error::Guard(_))));
    }

    #[test]
    fn lando_graph_of_alternating_pair() {
        let d = parse_chord_diagram("circle z: a1 b1 a2 b2\nchord 1: a1 a2\nchord 2: b1 b2").unwrap();
        assert_eq!(lando_graph(&d), Graph::new(vec![1, 2], [(1, 2)]));
        let cube = CubeIndex::build(&d).unwrap();
        let k = independence_complex(&lando_graph(&d), 24).unwrap();
        assert!(dual_subposet_check(&cube, &k));
    }

    #[test]
    fn torsion_normal_form() {
        let t = canonical_torsion(&[BigUint::from(6u32), BigUint::from(4u32)]);
        assert_eq!(t, vec![BigUint::from(2u32), BigUint::from(12u32)]);
    }

    #[test]
    fn join_of_spheres() {
        // S^0 * S^0 = S^1.
        let s0 = reference_homotopy(Family::Path, 1);
        assert_eq!(join_homology(&s0, &s0).to_string(), "H1=Z");
        // The empty complex is the unit of the join.
        let mut empty = HomologyResult::default();
        empty.insert(-1, Group { betti: 1, torsion: vec![] });
        assert_eq!(join_homology(&empty, &s0), s0);
    }
}
