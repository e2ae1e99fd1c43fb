//! Chain complexes of the cube functors F and M at the almost-extreme
//! grading, the extreme indicator complex, the chain isomorphism γ and the
//! semi-simplicial export Λ.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::SparseMatrix;
use crate::error::{Error, Result};
use crate::model::{GradedChainComplex, ResolvedState, State};
use crate::statecube::CubeIndex;

/// Chain degree of a generator minus the dimension of the simplex it
/// represents in the geometric realization.
pub const REALIZATION_SHIFT: i64 = 1;

/// Basis element of C_*(F) or C_*(M). States are stored as bit masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorLabel {
    /// x_z^+ for circle z of D(u), Φ(u) = 0.
    Circle { state: State, circle: usize },
    /// x_+ of a state with Φ(u) = 1.
    Plus { state: State },
    /// Component of G(u), named by the circle of D(1) it descends from.
    Component { state: State, component: usize },
    /// 0-chord of G(u), by chord position.
    Edge { state: State, chord: usize },
}

impl GeneratorLabel {
    pub fn state(&self) -> State {
        match *self {
            GeneratorLabel::Circle { state, .. }
            | GeneratorLabel::Plus { state }
            | GeneratorLabel::Component { state, .. }
            | GeneratorLabel::Edge { state, .. } => state,
        }
    }
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorLabel::Circle { state, circle } => write!(f, "z{circle}@{state}"),
            GeneratorLabel::Plus { state } => write!(f, "+@{state}"),
            GeneratorLabel::Component { state, component } => write!(f, "C{component}@{state}"),
            GeneratorLabel::Edge { state, chord } => write!(f, "e{chord}@{state}"),
        }
    }
}

/// Which functor to totalize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FunctorKind {
    F,
    M,
}

/// Image of one generator along one cube edge: (source, target, multiplicity).
type EdgeImage = Vec<(GeneratorLabel, GeneratorLabel, i64)>;

/// Circles of G(u) reachable from `start` without crossing chord `skip`.
fn reach(cube: &CubeIndex, r: &ResolvedState, start: usize, skip: usize) -> Vec<bool> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); r.circles.len()];
    for j in r.zero_chords() {
        if j == skip {
            continue;
        }
        let [p, q] = cube.d1.chords[j].ends;
        let (a, b) = (r.circle_of[p] as usize, r.circle_of[q] as usize);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; r.circles.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// e_+ for the 0-chord e of a Φ = 0 state: membership flag per circle.
pub fn e_plus(cube: &CubeIndex, r: &ResolvedState, e: usize) -> Vec<bool> {
    let c = &cube.d1.chords[e];
    reach(cube, r, r.circle_of[c.distinguished] as usize, e)
}

/// e_+ of every 0-chord of every Φ = 0 state, as sorted circle lists.
pub fn orient_edges(cube: &CubeIndex) -> BTreeMap<(State, usize), Vec<usize>> {
    cube.states()
        .filter(|r| r.phi == 0)
        .flat_map(|r| {
            r.zero_chords().into_iter().map(move |e| {
                let plus = e_plus(cube, r, e);
                ((r.state, e), (0..plus.len()).filter(|&z| plus[z]).collect())
            })
        })
        .collect()
}

/// Component id (origin circle) of every circle of a Φ = 0 state.
fn origins(cube: &CubeIndex, r: &ResolvedState) -> Vec<usize> {
    (0..r.circles.len()).map(|z| cube.origin_circle(r, z)).collect()
}

pub fn generators(kind: FunctorKind, cube: &CubeIndex, r: &ResolvedState) -> Vec<GeneratorLabel> {
    let state = r.state;
    match (r.phi, kind) {
        (0, FunctorKind::F) => (0..r.circles.len()).map(|circle| GeneratorLabel::Circle { state, circle }).collect(),
        (0, FunctorKind::M) => (0..cube.top_circles)
            .map(|component| GeneratorLabel::Component { state, component })
            .chain(r.zero_chords().into_iter().map(|chord| GeneratorLabel::Edge { state, chord }))
            .collect(),
        (1, _) => vec![GeneratorLabel::Plus { state }],
        _ => Vec::new(),
    }
}

/// Span cardinalities of the edge u > v = u - e_i (unsigned).
pub fn edge_image(kind: FunctorKind, cube: &CubeIndex, u: State, i: usize) -> EdgeImage {
    let ru = cube.resolve(u);
    let v = u.with(i, 0);
    let rv = cube.resolve(v);
    let plus_v = GeneratorLabel::Plus { state: v };
    match (ru.phi, rv.phi) {
        (1, 1) => vec![(GeneratorLabel::Plus { state: u }, plus_v, 1)],
        (0, 0) => {
            let ec = cube.edge_circles(u, i);
            match kind {
                FunctorKind::F => {
                    let mut out = Vec::new();
                    for z in 0..ru.circles.len() {
                        let src = GeneratorLabel::Circle { state: u, circle: z };
                        if ec.source.contains(&z) {
                            for &t in &ec.target {
                                out.push((src, GeneratorLabel::Circle { state: v, circle: t }, 1));
                            }
                        } else {
                            out.push((src, GeneratorLabel::Circle { state: v, circle: ec.map[z] }, 1));
                        }
                    }
                    out
                }
                FunctorKind::M => {
                    let comps = (0..cube.top_circles).map(|c| {
                        (
                            GeneratorLabel::Component { state: u, component: c },
                            GeneratorLabel::Component { state: v, component: c },
                            1,
                        )
                    });
                    let edges = ru.zero_chords().into_iter().map(|e| {
                        (GeneratorLabel::Edge { state: u, chord: e }, GeneratorLabel::Edge { state: v, chord: e }, 1)
                    });
                    comps.chain(edges).collect()
                }
            }
        }
        (0, 1) => {
            let ec = cube.edge_circles(u, i);
            match kind {
                FunctorKind::F => ec
                    .source
                    .iter()
                    .map(|&z| (GeneratorLabel::Circle { state: u, circle: z }, plus_v, 1))
                    .collect(),
                FunctorKind::M => {
                    let ladybug = rv.ladybug_size(cube.top_circles) as i64;
                    let org = origins(cube, ru);
                    let mut touched: Vec<usize> = ec.source.iter().map(|&z| org[z]).collect();
                    touched.sort_unstable();
                    touched.dedup();
                    let mut out: EdgeImage = touched
                        .into_iter()
                        .map(|c| (GeneratorLabel::Component { state: u, component: c }, plus_v, ladybug))
                        .collect();
                    for e in ru.zero_chords() {
                        let plus = e_plus(cube, ru, e);
                        let k = ec.source.iter().filter(|&&z| plus[z]).count() as i64;
                        if k > 0 {
                            out.push((GeneratorLabel::Edge { state: u, chord: e }, plus_v, k));
                        }
                    }
                    out
                }
            }
        }
        _ => Vec::new(),
    }
}

/// Totalization over all states with the given generators and edge images.
fn assemble<G, E>(cube: &CubeIndex, gens: G, image: E) -> GradedChainComplex<GeneratorLabel>
where
    G: Fn(&ResolvedState) -> Vec<GeneratorLabel> + Sync,
    E: Fn(State, usize) -> EdgeImage + Sync,
{
    let n = cube.n;
    let mut c = GradedChainComplex::new(-1);
    for k in 0..=n {
        let basis: Vec<GeneratorLabel> = cube.states_of_weight(k).flat_map(&gens).collect();
        if !basis.is_empty() {
            c.bases.insert(k as i64, basis);
        }
    }
    let index: HashMap<GeneratorLabel, usize> =
        c.bases.values().flat_map(|b| b.iter().enumerate().map(|(j, &l)| (l, j))).collect();
    for k in 1..=n as i64 {
        let (Some(src), Some(tgt)) = (c.bases.get(&k), c.bases.get(&(k - 1))) else { continue };
        let mut states: Vec<State> = src.iter().map(GeneratorLabel::state).collect();
        states.dedup();
        let trip: Vec<(usize, usize, i64)> = states
            .par_iter()
            .flat_map_iter(|&u| {
                let mut out = Vec::new();
                for i in (0..n).filter(|&i| u.get(i) == 1) {
                    let sign = u.edge_sign(i);
                    for (s, t, m) in image(u, i) {
                        out.push((index[&t], index[&s], sign * m));
                    }
                }
                out
            })
            .collect();
        c.differentials.insert(k, SparseMatrix::from_triplets(tgt.len(), src.len(), trip));
    }
    c
}

/// C_*(F) at the almost-extreme grading, graded by |u|.
pub fn build_f_complex(cube: &CubeIndex) -> GradedChainComplex<GeneratorLabel> {
    assemble(cube, |r| generators(FunctorKind::F, cube, r), |u, i| edge_image(FunctorKind::F, cube, u, i))
}

/// C_*(M) at the almost-extreme grading, graded by |u|.
pub fn build_m_complex(cube: &CubeIndex) -> GradedChainComplex<GeneratorLabel> {
    assemble(cube, |r| generators(FunctorKind::M, cube, r), |u, i| edge_image(FunctorKind::M, cube, u, i))
}

pub fn build_complex(kind: FunctorKind, cube: &CubeIndex) -> GradedChainComplex<GeneratorLabel> {
    match kind {
        FunctorKind::F => build_f_complex(cube),
        FunctorKind::M => build_m_complex(cube),
    }
}

/// Degreewise matrices of γ: C(M) → C(F) and of its explicit inverse.
#[derive(Clone, Debug)]
pub struct Gamma {
    pub forward: BTreeMap<i64, SparseMatrix>,
    pub inverse: BTreeMap<i64, SparseMatrix>,
}

pub fn build_gamma(
    cube: &CubeIndex,
    f: &GradedChainComplex<GeneratorLabel>,
    m: &GradedChainComplex<GeneratorLabel>,
) -> Result<Gamma> {
    let fi = f.basis_index();
    let mi = m.basis_index();
    let mut forward = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for (&k, fb) in &f.bases {
        let mb = m.bases.get(&k).map_or(&[][..], Vec::as_slice);
        if mb.len() != fb.len() {
            return Err(Error::Algebra(format!("degree {k}: rank F = {}, rank M = {}", fb.len(), mb.len())));
        }
        let mut fwd = Vec::new();
        let mut inv = Vec::new();
        let mut states: Vec<State> = fb.iter().map(GeneratorLabel::state).collect();
        states.dedup();
        for u in states {
            let r = cube.resolve(u);
            if r.phi == 1 {
                let p = GeneratorLabel::Plus { state: u };
                fwd.push((fi[&p].1, mi[&p].1, 1));
                inv.push((mi[&p].1, fi[&p].1, 1));
                continue;
            }
            let org = origins(cube, r);
            let zs = r.zero_chords();
            let plus: HashMap<usize, Vec<bool>> = zs.iter().map(|&e| (e, e_plus(cube, r, e))).collect();
            let col_m = |l: GeneratorLabel| mi[&l].1;
            let row_f = |z: usize| fi[&GeneratorLabel::Circle { state: u, circle: z }].1;
            for c in 0..cube.top_circles {
                let cm = col_m(GeneratorLabel::Component { state: u, component: c });
                for z in (0..r.circles.len()).filter(|&z| org[z] == c) {
                    fwd.push((row_f(z), cm, 1));
                }
            }
            for &e in &zs {
                let em = col_m(GeneratorLabel::Edge { state: u, chord: e });
                for z in (0..r.circles.len()).filter(|&z| plus[&e][z]) {
                    fwd.push((row_f(z), em, 1));
                }
            }
            for z in 0..r.circles.len() {
                let zf = row_f(z);
                let mut bar = 0;
                for &e in &zs {
                    let [p, q] = cube.d1.chords[e].ends;
                    if r.circle_of[p] as usize != z && r.circle_of[q] as usize != z {
                        continue;
                    }
                    let em = col_m(GeneratorLabel::Edge { state: u, chord: e });
                    if plus[&e][z] {
                        inv.push((em, zf, 1));
                        bar += 1;
                    } else {
                        inv.push((em, zf, -1));
                    }
                }
                let cm = col_m(GeneratorLabel::Component { state: u, component: org[z] });
                inv.push((cm, zf, 1 - bar));
            }
        }
        forward.insert(k, SparseMatrix::from_triplets(fb.len(), mb.len(), fwd));
        inverse.insert(k, SparseMatrix::from_triplets(mb.len(), fb.len(), inv));
    }
    Ok(Gamma { forward, inverse })
}

/// Outcome of the γ checks in every degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GammaReport {
    pub chain_map: bool,
    pub left_inverse: bool,
    pub right_inverse: bool,
    pub failures: Vec<String>,
}

impl GammaReport {
    pub fn ok(&self) -> bool {
        self.chain_map && self.left_inverse && self.right_inverse
    }
}

/// Checks γ∘∂_M = ∂_F∘γ and both inverse identities degreewise.
pub fn check_gamma(
    g: &Gamma,
    f: &GradedChainComplex<GeneratorLabel>,
    m: &GradedChainComplex<GeneratorLabel>,
) -> GammaReport {
    let mut rep = GammaReport { chain_map: true, left_inverse: true, right_inverse: true, failures: Vec::new() };
    let square = |k: i64, mat: &BTreeMap<i64, SparseMatrix>| {
        mat.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(f.rank(k), m.rank(k)))
    };
    for &k in f.bases.keys() {
        let gk = square(k, &g.forward);
        let hk = g.inverse.get(&k).cloned().unwrap_or_else(|| SparseMatrix::zeros(m.rank(k), f.rank(k)));
        if gk.mul(&hk) != SparseMatrix::identity(f.rank(k)) {
            rep.right_inverse = false;
            rep.failures.push(format!("γγ⁻¹ ≠ id in degree {k}"));
        }
        if hk.mul(&gk) != SparseMatrix::identity(m.rank(k)) {
            rep.left_inverse = false;
            rep.failures.push(format!("γ⁻¹γ ≠ id in degree {k}"));
        }
        if f.rank(k - 1) > 0 || m.rank(k - 1) > 0 {
            let lhs = square(k - 1, &g.forward).mul(&m.differential(k));
            let rhs = f.differential(k).mul(&gk);
            if lhs != rhs {
                rep.chain_map = false;
                rep.failures.push(format!("γ∂ ≠ ∂γ out of degree {k}"));
            }
        }
    }
    rep
}

/// Generic subposet totalization: one generator per member state, ±1 on
/// internal cube edges.
pub fn subposet_chain_complex(cube: &CubeIndex, member: impl Fn(&ResolvedState) -> bool + Sync) -> GradedChainComplex<State> {
    let n = cube.n;
    let mut c = GradedChainComplex::new(-1);
    for k in 0..=n {
        let basis: Vec<State> = cube.states_of_weight(k).filter(|r| member(r)).map(|r| r.state).collect();
        if !basis.is_empty() {
            c.bases.insert(k as i64, basis);
        }
    }
    let index: HashMap<State, usize> =
        c.bases.values().flat_map(|b| b.iter().enumerate().map(|(j, &s)| (s, j))).collect();
    for k in 1..=n as i64 {
        let (Some(src), Some(tgt)) = (c.bases.get(&k), c.bases.get(&(k - 1))) else { continue };
        let mut trip = Vec::new();
        for (col, &u) in src.iter().enumerate() {
            for i in (0..n).filter(|&i| u.get(i) == 1) {
                if let Some(&row) = index.get(&u.with(i, 0)) {
                    trip.push((row, col, u.edge_sign(i)));
                }
            }
        }
        c.differentials.insert(k, SparseMatrix::from_triplets(tgt.len(), src.len(), trip));
    }
    c
}

/// Indicator complex of X_D = {Φ = 0} at the extreme grading.
pub fn build_extreme_complex(cube: &CubeIndex) -> GradedChainComplex<State> {
    subposet_chain_complex(cube, |r| r.phi == 0)
}

/// A pointed semi-simplicial set Λ: simplices of dimension k are the
/// generators at cube weight k + 1; faces are indices into the previous
/// dimension, None for the basepoint.
#[derive(Clone, Debug, Serialize)]
pub struct SemiSimplicial {
    pub simplices: BTreeMap<i64, Vec<GeneratorLabel>>,
    /// faces[k][s][λ] = image of simplex s of dimension k under d_λ.
    pub faces: BTreeMap<i64, Vec<Vec<Option<usize>>>>,
}

impl SemiSimplicial {
    /// Reduced normalized chain complex: ∂ = Σ (-1)^λ d_λ, basepoint dropped.
    pub fn chain_complex(&self) -> GradedChainComplex<GeneratorLabel> {
        let mut c = GradedChainComplex::new(-1);
        c.bases = self.simplices.clone();
        for (&k, faces) in &self.faces {
            if k == 0 && !self.simplices.contains_key(&-1) {
                continue;
            }
            let Some(tgt) = self.simplices.get(&(k - 1)) else { continue };
            let trip = faces.iter().enumerate().flat_map(|(s, fs)| {
                fs.iter().enumerate().filter_map(move |(l, t)| t.map(|t| (t, s, if l % 2 == 0 { 1 } else { -1 })))
            });
            c.differentials.insert(k, SparseMatrix::from_triplets(tgt.len(), faces.len(), trip));
        }
        c
    }

    /// Checks the simplicial identities d_i d_j = d_{j-1} d_i for i < j.
    pub fn check_identities(&self) -> bool {
        self.faces.iter().all(|(&k, faces)| {
            let Some(lower) = self.faces.get(&(k - 1)) else { return true };
            faces.iter().all(|fs| {
                (0..fs.len()).all(|j| {
                    (0..j).all(|i| {
                        let a = fs[j].and_then(|t| lower[t][i]);
                        let b = fs[i].and_then(|t| lower[t][j - 1]);
                        a == b
                    })
                })
            })
        })
    }
}

/// Witness that an edge span is not free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NotFree {
    pub state: State,
    pub chord: usize,
    pub generator: GeneratorLabel,
    pub total_multiplicity: i64,
}

/// Λ(F) when every edge span has injective source (each generator maps to
/// at most one target with multiplicity one).
pub fn factor_through_pointed(kind: FunctorKind, cube: &CubeIndex) -> std::result::Result<SemiSimplicial, NotFree> {
    let n = cube.n;
    let mut simplices: BTreeMap<i64, Vec<GeneratorLabel>> = BTreeMap::new();
    for k in 0..=n {
        let gens: Vec<GeneratorLabel> = cube.states_of_weight(k).flat_map(|r| generators(kind, cube, r)).collect();
        if !gens.is_empty() {
            simplices.insert(k as i64 - 1, gens);
        }
    }
    let index: HashMap<GeneratorLabel, usize> =
        simplices.values().flat_map(|b| b.iter().enumerate().map(|(j, &l)| (l, j))).collect();
    let mut faces = BTreeMap::new();
    for (&k, gens) in &simplices {
        if k < 0 {
            continue;
        }
        let mut out = Vec::with_capacity(gens.len());
        for &g in gens {
            let u = g.state();
            let mut fs = vec![None; k as usize + 1];
            for i in (0..n).filter(|&i| u.get(i) == 1) {
                let lambda = u.ones_before(i);
                let img: Vec<(GeneratorLabel, i64)> =
                    edge_image(kind, cube, u, i).into_iter().filter(|(s, _, _)| *s == g).map(|(_, t, m)| (t, m)).collect();
                let total: i64 = img.iter().map(|&(_, m)| m).sum();
                if total > 1 || img.len() > 1 {
                    return Err(NotFree { state: u, chord: i, generator: g, total_multiplicity: total });
                }
                fs[lambda] = img.first().map(|(t, _)| index[t]);
            }
            out.push(fs);
        }
        faces.insert(k, out);
    }
    Ok(SemiSimplicial { simplices, faces })
}

/// Whether Λ exists, satisfies the simplicial identities, and its
/// normalized chain complex equals C_*(kind) lowered by one degree.
/// None when the functor does not factor through pointed sets.
pub fn lambda_matches(kind: FunctorKind, cube: &CubeIndex) -> Option<bool> {
    let lam = factor_through_pointed(kind, cube).ok()?;
    let a = lam.chain_complex();
    let b = build_complex(kind, cube).shifted(-REALIZATION_SHIFT);
    Some(
        lam.check_identities()
            && a.bases == b.bases
            && a.bases.keys().all(|&k| a.differential(k) == b.differential(k)),
    )
}
