mod common;

use almax::algebra::homology;
use almax::configs::detect_configs;
use almax::decomp::{
    all_subposet_kinds, build_subposet, les_exactness, restricted_diagram, simplification_sound, simplify, smooth_cd,
    smooth_pd, subposet_complex, verify_all_skeins, verify_cofibre_partition, verify_skein, SkeinKind, SubposetKind,
};
use almax::functors::{build_m_complex, subposet_chain_complex};
use almax::ingest::resolve_all_ones;
use almax::oracle::resolve;
use almax::statecube::{restricted, CubeIndex};
use almax::{ChordDiagram, Error, HomologyResult, State};
use proptest::prelude::*;

fn corpus_up_to(n: usize) -> Vec<(String, ChordDiagram)> {
    let mut v: Vec<(String, ChordDiagram)> = common::pd_names().into_iter().map(|s| (s.clone(), common::top(&s))).collect();
    v.extend(common::cd_names().into_iter().map(|s| (s.clone(), common::cd(&s))));
    v.retain(|(_, d)| d.chords.len() <= n);
    v
}

fn m_homology(d: &ChordDiagram) -> HomologyResult {
    homology(&build_m_complex(&CubeIndex::build(d).unwrap())).unwrap()
}

fn x_homology(d: &ChordDiagram) -> HomologyResult {
    homology(&subposet_chain_complex(&CubeIndex::build(d).unwrap(), |r| r.phi == 0)).unwrap()
}

fn direct_sum(parts: impl IntoIterator<Item = HomologyResult>) -> HomologyResult {
    let mut out = HomologyResult::default();
    for h in parts {
        for (k, g) in h.groups {
            let mut acc = out.get(k);
            acc.betti += g.betti;
            acc.torsion.extend(g.torsion);
            acc.torsion.sort();
            out.insert(k, acc);
        }
    }
    out
}

#[test]
fn cofibre_and_skein_sequences_are_exact_on_the_corpus() {
    let ds = corpus_up_to(10);
    assert!(ds.iter().any(|(n, _)| n == "t3_5"));
    for (name, d) in ds {
        let cube = CubeIndex::build(&d).unwrap();
        let c = verify_cofibre_partition(&cube).unwrap();
        assert!(c.ok(), "{name}: {c:?}");
        let skeins = verify_all_skeins(&cube).unwrap();
        let monos = (0..cube.n).filter(|&p| d.is_monochord(p)).count();
        assert_eq!(skeins.len(), cube.n + monos, "{name}");
        for r in skeins {
            assert!(r.ok(), "{name}: {r:?}");
        }
    }
}

#[test]
fn skein_euler_characteristics_add_up() {
    for (name, d) in corpus_up_to(9) {
        for c in &d.chords {
            let (d0, d1) = (smooth_cd(&d, c.index, 0).unwrap(), smooth_cd(&d, c.index, 1).unwrap());
            let chi = |h: HomologyResult| h.euler_characteristic();
            let pos = d.chord_position(c.index).unwrap();
            let middle = if d.is_monochord(pos) { chi(m_homology(&d0)) } else { chi(x_homology(&d0)) };
            assert_eq!(chi(m_homology(&d)), middle - chi(m_homology(&d1)), "{name} chord {}", c.index);
            if d.is_monochord(pos) {
                assert_eq!(chi(x_homology(&d)), chi(x_homology(&d0)) - chi(x_homology(&d1)), "{name} X {}", c.index);
            }
        }
    }
}

#[test]
fn subposets_cover_the_expected_states() {
    for (name, d) in corpus_up_to(10) {
        let cube = CubeIndex::build(&d).unwrap();
        let mut plus: Vec<u64> = Vec::new();
        for kind in all_subposet_kinds(&cube) {
            let s = build_subposet(&cube, kind).unwrap();
            assert_eq!(subposet_complex(&cube, &s).check(), Ok(()), "{name} {kind}");
            if matches!(kind, SubposetKind::Y | SubposetKind::Z { .. }) {
                plus.extend(s.members.iter().map(|u| u.bits));
            }
        }
        plus.sort_unstable();
        let mut phi_one: Vec<u64> = cube.states().filter(|r| r.phi == 1).map(|r| r.state.bits).collect();
        phi_one.sort_unstable();
        // Each Φ = 1 state holds an alternating pair or bichords of one class.
        assert_eq!(plus, phi_one, "{name}");
    }
}

fn two_free(d: &ChordDiagram) -> Vec<usize> {
    detect_configs(d).freeness.iter().filter(|f| f.two_free).map(|f| f.chord).collect()
}

#[test]
fn two_free_monochords_make_most_subposets_acyclic() {
    let mut checked = 0;
    for (name, d) in corpus_up_to(12) {
        let free = two_free(&d);
        let Some(&a) = free.first() else { continue };
        checked += 1;
        let cube = CubeIndex::build(&d).unwrap();
        let acyclic = |kind| {
            let h = homology(&subposet_complex(&cube, &build_subposet(&cube, kind).unwrap())).unwrap();
            assert!(h.is_zero(), "{name} {kind}: {h}");
        };
        acyclic(SubposetKind::X);
        acyclic(SubposetKind::Y);
        for e in detect_configs(&d).monochords.into_iter().filter(|&e| e != a || free.len() > 1) {
            acyclic(SubposetKind::XEdge { chord: e });
        }
        for f in detect_configs(&d).freeness.iter().filter(|f| f.chord == a) {
            for &b in &f.b_free {
                let class = *detect_configs(&d).parallel_classes.iter().find(|c| c.contains(&b)).unwrap().first().unwrap();
                acyclic(SubposetKind::Z { class });
            }
        }
    }
    assert!(checked >= 4, "{checked}");
}

#[test]
fn two_two_free_monochords_leave_only_the_bichord_pieces() {
    let mut checked = 0;
    for (name, d) in corpus_up_to(12) {
        if two_free(&d).len() < 2 {
            continue;
        }
        checked += 1;
        let cube = CubeIndex::build(&d).unwrap();
        let zs = all_subposet_kinds(&cube).into_iter().filter(|k| matches!(k, SubposetKind::Z { .. }));
        let sum = direct_sum(zs.map(|k| homology(&subposet_complex(&cube, &build_subposet(&cube, k).unwrap())).unwrap()));
        assert_eq!(m_homology(&d), sum, "{name}");
    }
    assert!(checked >= 1);
}

#[test]
fn simplification_preserves_homology_up_to_suspension() {
    for (name, d) in corpus_up_to(12) {
        assert!(simplification_sound(&d).unwrap(), "{name}");
        let s = simplify(&d).unwrap();
        assert_eq!(s.diagram.chords.len() + s.suspensions, d.chords.len(), "{name}");
        let rep = detect_configs(&s.diagram);
        assert!(rep.equivalent_bichords.is_empty() && rep.nested_monochords.is_empty(), "{name}");
    }
}

#[test]
fn pd_smoothing_commutes_with_chord_smoothing() {
    for name in common::pd_names() {
        let pd = common::pd(&name);
        let top = resolve_all_ones(&pd).unwrap();
        for c in 1..=pd.len() {
            for v in [0u8, 1] {
                let s = smooth_pd(&pd, c, v).unwrap();
                let cd = smooth_cd(&top, c, v).unwrap();
                assert_eq!(cd.chords.len(), s.pd.len(), "{name} {c}={v}");
                let cube = CubeIndex::build(&cd).unwrap();
                for r in cube.states() {
                    let traced = if s.pd.is_empty() { 0 } else { resolve(&s.pd, r.state.bits).keys.len() };
                    assert_eq!(r.circles.len(), traced + s.free_loops, "{name} {c}={v} at {}", r.state);
                }
            }
        }
    }
}

#[test]
fn restricted_diagram_keeps_the_zero_chords() {
    let cube = CubeIndex::build(&common::top("t3_4")).unwrap();
    for r in cube.states().step_by(17) {
        let d = restricted_diagram(&cube, r.state);
        assert_eq!(d, restricted(&cube.d1, r.state));
        assert_eq!(d.chords.len(), r.state.zero_set().len());
    }
}

#[test]
fn les_of_a_split_complex_is_exact() {
    let cube = CubeIndex::build(&common::cd("one_monochord_k3")).unwrap();
    let m = build_m_complex(&cube);
    for p in [2, 3, 5] {
        let r = les_exactness(&m, |l| l.state().get(0) == 0, p);
        assert!(r.exact && r.subcomplex, "{r:?}");
    }
    // The top vertex alone is not a subcomplex of a descending complex.
    let top = State::ones(cube.n);
    let r = les_exactness(&m, |l| l.state() == top, 2);
    assert!(!r.subcomplex);
}

#[test]
fn decomposition_errors() {
    let cube = CubeIndex::build(&common::top("trefoil_right")).unwrap();
    assert!(matches!(verify_skein(&cube, 1, SkeinKind::Monochord), Err(Error::ChordKind { .. })));
    assert!(matches!(verify_skein(&cube, 9, SkeinKind::Bichord), Err(Error::NoSuchChord(9))));
    assert!(matches!(build_subposet(&cube, SubposetKind::XEdge { chord: 1 }), Err(Error::ChordKind { .. })));
    assert!(matches!(build_subposet(&cube, SubposetKind::Z { class: 42 }), Err(Error::UnknownClass(42))));
    assert!(smooth_cd(&cube.d1, 1, 2).is_err());
    assert!(smooth_pd(&common::pd("trefoil_right"), 4, 0).is_err());
}

fn braid() -> impl Strategy<Value = (usize, Vec<i32>)> {
    (2usize..5).prop_flat_map(|s| {
        let gen = (1..s as i32).prop_flat_map(|k| prop_oneof![Just(k), Just(-k)]);
        (Just(s), prop::collection::vec(gen, 1..7))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn random_braid_sequences_are_exact((s, word) in braid()) {
        let d = resolve_all_ones(&common::braid_closure(s, &word)).unwrap();
        let cube = CubeIndex::build(&d).unwrap();
        let c = verify_cofibre_partition(&cube).unwrap();
        prop_assert!(c.ok(), "{:?}", c);
        for r in verify_all_skeins(&cube).unwrap() {
            prop_assert!(r.ok(), "{:?}", r);
        }
        prop_assert!(simplification_sound(&d).unwrap());
    }
}
