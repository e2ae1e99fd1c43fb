mod common;

use almax::decomp::smooth_cd;
use almax::extreme::{
    canonical_torsion, dual_subposet_check, extreme_grading_check, independence_complex, join_check, join_homology,
    lando_graph, reduced_homology, reference_homotopy, single_sphere, sphere_duality_check, Family, Graph,
};
use almax::statecube::CubeIndex;
use almax::ChordDiagram;
use num_bigint::BigUint;
use proptest::prelude::*;

fn ind(g: &Graph) -> almax::HomologyResult {
    reduced_homology(&independence_complex(g, 24).unwrap()).unwrap()
}

#[test]
fn extreme_grading_matches_the_independence_complex_on_the_corpus() {
    for name in common::pd_names() {
        let r = extreme_grading_check(&common::pd(&name), 14, 24).unwrap();
        assert!(r.agree, "{name}: Kh {:?} vs I_D {:?}", r.khovanov, r.independence);
    }
}

#[test]
fn cycles_and_paths_match_the_reference_formulas() {
    for n in 3..=15 {
        assert_eq!(ind(&Graph::cycle(n)), reference_homotopy(Family::Cycle, n), "C_{n}");
    }
    for n in 0..=15 {
        assert_eq!(ind(&Graph::path(n)), reference_homotopy(Family::Path, n), "L_{n}");
    }
}

#[test]
fn reference_formulas_by_hand() {
    // C_3 is three points, C_4 two disjoint edges, L_2 a point plus an edge.
    assert_eq!(reference_homotopy(Family::Cycle, 3).to_string(), "H0=Z^2");
    assert_eq!(reference_homotopy(Family::Cycle, 4).to_string(), "H0=Z");
    assert_eq!(reference_homotopy(Family::Cycle, 5).to_string(), "H1=Z");
    assert_eq!(reference_homotopy(Family::Path, 2).to_string(), "H0=Z");
    assert!(reference_homotopy(Family::Path, 3).is_zero());
}

/// Whether the graph is isomorphic to C_n or L_n (relabelled vertices).
fn shape(g: &Graph) -> Option<(Family, usize)> {
    if g.is_cycle() {
        Some((Family::Cycle, g.vertices.len()))
    } else if g.is_path() {
        Some((Family::Path, g.edges.len()))
    } else {
        None
    }
}

/// Chords along the Lando cycle, so that neighbours alternate.
fn cycle_order(g: &Graph) -> Vec<usize> {
    let mut order = vec![g.vertices[0]];
    while order.len() < g.vertices.len() {
        let last = *order.last().unwrap();
        let next = g
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == last { Some(b) } else if b == last { Some(a) } else { None })
            .find(|v| !order.contains(v))
            .unwrap();
        order.push(next);
    }
    order
}

fn smooth_all(d: &ChordDiagram, chords: &[usize]) -> ChordDiagram {
    chords.iter().fold(d.clone(), |acc, &c| smooth_cd(&acc, c, 0).unwrap())
}

#[test]
fn torus_knot_lando_graphs() {
    for q in [3usize, 4, 5] {
        let d = common::top(&format!("t3_{q}"));
        let g = lando_graph(&d);
        assert_eq!(shape(&g), Some((Family::Cycle, 2 * q)), "T(3,{q})");
        let order = cycle_order(&g);
        for k in 0..order.len() {
            let at = |o: usize| order[(k + o) % order.len()];
            let one = lando_graph(&smooth_all(&d, &[at(0)]));
            assert_eq!(shape(&one), Some((Family::Path, 2 * q - 4)), "T(3,{q}) [{}=0]", at(0));
            let two = lando_graph(&smooth_all(&d, &[at(0), at(1)]));
            assert_eq!(shape(&two), Some((Family::Cycle, 2 * q - 2)), "T(3,{q}) two");
            let three = lando_graph(&smooth_all(&d, &[at(0), at(1), at(2)]));
            assert_eq!(shape(&three), Some((Family::Path, 2 * q - 6)), "T(3,{q}) three");
        }
    }
}

#[test]
fn independence_complex_faces_are_the_phi_zero_states() {
    let mut ds: Vec<ChordDiagram> = common::pd_names().iter().map(|n| common::top(n)).collect();
    ds.extend(common::cd_names().iter().filter(|n| !n.ends_with("n4")).map(|n| common::cd(n)));
    for d in &ds {
        let cube = CubeIndex::build(d).unwrap();
        let k = independence_complex(&lando_graph(d), 24).unwrap();
        assert!(dual_subposet_check(&cube, &k));
    }
}

#[test]
fn sphere_duality_on_the_corpus() {
    let mut checked = 0;
    for name in common::pd_names() {
        let cube = CubeIndex::build(&common::top(&name)).unwrap();
        let r = sphere_duality_check(&cube, 24).unwrap();
        assert_ne!(r.agree, Some(false), "{name}: {r:?}");
        checked += usize::from(r.agree.is_some());
    }
    assert!(checked >= 3);
}

#[test]
fn single_sphere_detection() {
    assert_eq!(single_sphere(&ind(&Graph::cycle(5))), Some(1));
    assert_eq!(single_sphere(&ind(&Graph::cycle(6))), None);
    assert_eq!(single_sphere(&ind(&Graph::path(3))), None);
}

#[test]
fn torsion_is_put_in_invariant_factor_form() {
    let b = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
    assert_eq!(canonical_torsion(&b(&[2, 3])), b(&[6]));
    assert_eq!(canonical_torsion(&b(&[2, 4])), b(&[2, 4]));
    assert_eq!(canonical_torsion(&b(&[6, 10])), b(&[2, 30]));
    assert_eq!(canonical_torsion(&b(&[12, 18, 8])), b(&[2, 12, 72]));
    assert!(canonical_torsion(&[]).is_empty());
}

#[test]
fn independence_guard() {
    assert!(independence_complex(&Graph::cycle(30), 24).is_err());
}

fn graph() -> impl Strategy<Value = Graph> {
    (2usize..9).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |es| {
            Graph::new((0..n).collect(), es.into_iter().filter(|(a, b)| a != b))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn join_formula_matches_direct_computation(a in graph(), b in graph()) {
        let shift = a.vertices.len();
        let union = Graph::new(
            (0..shift + b.vertices.len()).collect(),
            a.edges.iter().copied().chain(b.edges.iter().map(|&(x, y)| (x + shift, y + shift))),
        );
        let direct = ind(&union);
        prop_assert_eq!(&join_homology(&ind(&a), &ind(&b)), &direct);
        if let Some(r) = join_check(&union, 24).unwrap() {
            prop_assert!(r.agree, "{:?}", r);
        }
    }

    #[test]
    fn independence_complex_is_closed_and_independent(g in graph()) {
        let k = independence_complex(&g, 24).unwrap();
        for f in &k.faces {
            for &(a, b) in &g.edges {
                prop_assert!(!(f.contains(&a) && f.contains(&b)));
            }
        }
        let n = g.vertices.len();
        let independent = (0u32..1 << n)
            .filter(|s| g.edges.iter().all(|&(a, b)| s >> a & 1 == 0 || s >> b & 1 == 0))
            .count();
        prop_assert_eq!(k.faces.len(), independent);
    }
}
