mod common;

use almax::algebra::{homology, SparseMatrix};
use almax::model::{validate, ViolationKind};
use almax::{GradedChainComplex, State};
use proptest::prelude::*;

fn kinds(d: &almax::ChordDiagram) -> Vec<ViolationKind> {
    validate(d).into_iter().map(|v| v.kind).collect()
}

#[test]
fn validation_reports_each_broken_invariant() {
    let good = common::top("trefoil_right");
    assert!(validate(&good).is_empty());

    let mut d = good.clone();
    d.chords[1].index = d.chords[0].index;
    assert_eq!(kinds(&d), vec![ViolationKind::DuplicateChordIndex]);

    let mut d = good.clone();
    d.chords[0].ends[1] = d.chords[0].ends[0];
    assert!(kinds(&d).contains(&ViolationKind::DegenerateChord));

    let mut d = good.clone();
    d.chords[0].distinguished = d.chords[1].ends[0];
    assert_eq!(kinds(&d), vec![ViolationKind::BadDistinguished]);

    let mut d = good.clone();
    let p = d.circles[0][0];
    d.circles[1].push(p);
    assert!(kinds(&d).contains(&ViolationKind::EndpointMultiplicity));

    let mut d = good.clone();
    d.chords.pop();
    assert_eq!(kinds(&d), vec![ViolationKind::UnusedEndpoint; 2]);

    let mut d = good;
    d.circles[0].remove(0);
    assert!(kinds(&d).contains(&ViolationKind::DanglingEndpoint));
}

/// 0 ← Z ←2− Z in degrees 0 and 1.
fn multiplication_by_two(direction: i32) -> GradedChainComplex<u8> {
    let mut c = GradedChainComplex::new(direction);
    c.bases.insert(0, vec![0]);
    c.bases.insert(1, vec![1]);
    let (from, _) = if direction < 0 { (1, 0) } else { (0, 1) };
    c.differentials.insert(from, SparseMatrix::from_triplets(1, 1, [(0, 0, 2)]));
    c
}

#[test]
fn duals_and_shifts() {
    let c = multiplication_by_two(-1);
    assert_eq!(homology(&c).unwrap().to_string(), "H0=Z/2");
    let d = c.dual();
    assert_eq!(d.direction, 1);
    assert_eq!(homology(&d).unwrap().to_string(), "H1=Z/2");
    assert_eq!(d.dual().differentials, c.differentials);
    let s = c.shifted(3);
    assert_eq!(homology(&s).unwrap(), homology(&c).unwrap().shifted(3));
    assert_eq!(s.shifted(-3).bases, c.bases);
}

#[test]
fn malformed_complexes_are_caught() {
    let mut c = multiplication_by_two(-1);
    c.differentials.insert(1, SparseMatrix::from_triplets(2, 1, [(0, 0, 1)]));
    assert!(c.check().is_err());
}

proptest! {
    #[test]
    fn state_from_bits_round_trips(bits in prop::collection::vec(0u8..2, 0..40)) {
        let u = State::from_bits(&bits);
        prop_assert_eq!(u.bits_vec(), bits.clone());
        let s: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
        prop_assert_eq!(u.to_string(), s);
    }
}
