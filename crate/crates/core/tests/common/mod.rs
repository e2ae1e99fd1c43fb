#![allow(dead_code)]

use std::path::PathBuf;

use almax::ingest::{parse_chord_diagram, parse_pd, resolve_all_ones};
use almax::{ChordDiagram, PdCode};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn pd(name: &str) -> PdCode {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.pd"))).unwrap();
    parse_pd(&text).unwrap()
}

pub fn cd(name: &str) -> ChordDiagram {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.cd"))).unwrap();
    parse_chord_diagram(&text).unwrap()
}

pub fn top(name: &str) -> ChordDiagram {
    resolve_all_ones(&pd(name)).unwrap()
}

/// Every PD file in the corpus, sorted by name.
pub fn pd_names() -> Vec<String> {
    names("pd")
}

pub fn cd_names() -> Vec<String> {
    names("cd")
}

fn names(ext: &str) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == ext).then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    v.sort();
    v
}

/// Braid closure: k > 0 is s_k, k < 0 its inverse; strands are 1-based.
pub fn braid_closure(strands: usize, word: &[i32]) -> PdCode {
    let mut labels: Vec<u32> = (1..=strands as u32).collect();
    let initial = labels.clone();
    let mut next = strands as u32 + 1;
    let mut crossings: Vec<[u32; 4]> = Vec::new();
    for &g in word {
        let k = g.unsigned_abs() as usize - 1;
        let (x, y) = (labels[k], labels[k + 1]);
        let (x2, y2) = (next, next + 1);
        next += 2;
        crossings.push(if g > 0 { [x, y, x2, y2] } else { [y, x2, y2, x] });
        labels[k] = y2;
        labels[k + 1] = x2;
    }
    let close = |a: u32| labels.iter().position(|&l| l == a).map_or(a, |p| initial[p]);
    let crossings = crossings.into_iter().map(|c| c.map(close)).collect();
    almax::ingest::pd_from_crossings(crossings).unwrap()
}
