//! Parsers for PD codes and chord-diagram files, and the all-ones tracer.
//!
//! PD convention: `X[a,b,c,d]` starts at the incoming under-strand `a`, so
//! `c` is the outgoing under-strand and `b`, `d` carry the over-strand. A
//! crossing is positive when the over-strand enters at `b`. The 0-smoothing
//! joins `(a,d)` and `(b,c)`, the 1-smoothing joins `(a,b)` and `(c,d)`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{validate, Chord, ChordDiagram, PdCode};

struct Cursor<'a> {
    chars: Vec<(usize, usize, char)>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    /// Tokenises away whitespace and `#` comments, keeping positions.
    fn new(src: &'a str) -> Self {
        let mut chars = Vec::new();
        for (ln, line) in src.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for (col, ch) in line.chars().enumerate() {
                if !ch.is_whitespace() {
                    chars.push((ln + 1, col + 1, ch));
                }
            }
        }
        Cursor { chars, pos: 0, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn here(&self) -> (usize, usize) {
        self.chars.get(self.pos).or(self.chars.last()).map_or((1, 1), |c| (c.0, c.1))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        Error::Syntax { line, column, message: message.into() }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{ch}'")))
        }
    }

    fn number(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a positive integer"));
        }
        let s: String = self.chars[start..self.pos].iter().map(|c| c.2).collect();
        let v: u32 = s.parse().map_err(|_| self.err("integer out of range"))?;
        if v == 0 {
            self.pos = start;
            return Err(self.err("arc labels must be positive"));
        }
        Ok(v)
    }
}

/// Parses `PD[X[a,b,c,d],...]` and computes crossing signs.
pub fn parse_pd(text: &str) -> Result<PdCode> {
    let mut cur = Cursor::new(text);
    cur.expect('P')?;
    cur.expect('D')?;
    cur.expect('[')?;
    let mut crossings = Vec::new();
    if cur.peek() != Some(']') {
        loop {
            cur.expect('X')?;
            cur.expect('[')?;
            let mut x = [0u32; 4];
            for (k, slot) in x.iter_mut().enumerate() {
                if k > 0 {
                    cur.expect(',')?;
                }
                *slot = cur.number()?;
            }
            cur.expect(']')?;
            crossings.push(x);
            match cur.peek() {
                Some(',') => cur.pos += 1,
                _ => break,
            }
        }
    }
    cur.expect(']')?;
    if cur.peek().is_some() {
        return Err(cur.err("trailing input"));
    }
    pd_from_crossings(crossings)
}

/// Builds a PD code from crossing tuples, checking arcs and orienting strands.
pub fn pd_from_crossings(crossings: Vec<[u32; 4]>) -> Result<PdCode> {
    let mut occ: HashMap<u32, Vec<usize>> = HashMap::new();
    for (x, tuple) in crossings.iter().enumerate() {
        for (s, &arc) in tuple.iter().enumerate() {
            occ.entry(arc).or_default().push(4 * x + s);
        }
    }
    let mut arcs: Vec<_> = occ.iter().collect();
    arcs.sort();
    for (&arc, slots) in &arcs {
        if slots.len() != 2 {
            return Err(Error::ArcMultiplicity(arc));
        }
    }
    let partner = arc_partners(&crossings, &occ);
    let signs = orient(&crossings, &partner)?;
    let n_plus = signs.iter().filter(|&&s| s > 0).count();
    let n_minus = signs.len() - n_plus;
    Ok(PdCode { crossings, signs, n_plus, n_minus })
}

/// For each slot 4x+s, the slot at the other end of its arc.
fn arc_partners(crossings: &[[u32; 4]], occ: &HashMap<u32, Vec<usize>>) -> Vec<usize> {
    let mut partner = vec![0; 4 * crossings.len()];
    for slots in occ.values() {
        partner[slots[0]] = slots[1];
        partner[slots[1]] = slots[0];
    }
    partner
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Dir {
    Unknown,
    In,
    Out,
}

/// Propagates strand orientation from the under-strands and returns signs.
fn orient(crossings: &[[u32; 4]], partner: &[usize]) -> Result<Vec<i8>> {
    let n = crossings.len();
    let mut dir = vec![Dir::Unknown; 4 * n];
    let mut queue = VecDeque::new();
    let set = |dir: &mut Vec<Dir>, queue: &mut VecDeque<usize>, slot: usize, d: Dir| -> Result<()> {
        match dir[slot] {
            Dir::Unknown => {
                dir[slot] = d;
                queue.push_back(slot);
                Ok(())
            }
            old if old == d => Ok(()),
            _ => Err(Error::Trace(format!(
                "orientation conflict at crossing {}, position {}",
                slot / 4 + 1,
                slot % 4 + 1
            ))),
        }
    };
    for x in 0..n {
        set(&mut dir, &mut queue, 4 * x, Dir::In)?;
        set(&mut dir, &mut queue, 4 * x + 2, Dir::Out)?;
    }
    loop {
        while let Some(slot) = queue.pop_front() {
            let flip = |d: Dir| if d == Dir::In { Dir::Out } else { Dir::In };
            let d = dir[slot];
            // The strand continues straight through the crossing...
            let opposite = slot - slot % 4 + (slot % 4 + 2) % 4;
            set(&mut dir, &mut queue, opposite, flip(d))?;
            // ...and the arc leaving one crossing enters the next.
            set(&mut dir, &mut queue, partner[slot], flip(d))?;
        }
        // Components that only pass over: orient them along increasing labels.
        let Some(slot) = (0..4 * n).find(|&s| dir[s] == Dir::Unknown) else { break };
        let x = slot / 4;
        let (b, d) = (crossings[x][1], crossings[x][3]);
        let in_slot = if b == d.wrapping_add(1) { 4 * x + 3 } else if d == b.wrapping_add(1) { 4 * x + 1 } else { 4 * x + 3 };
        set(&mut dir, &mut queue, in_slot, Dir::In)?;
    }
    Ok((0..n).map(|x| if dir[4 * x + 1] == Dir::In { 1 } else { -1 }).collect())
}

/// Traces the all-ones resolution into a chord diagram with coherent
/// circle orders. Chord i joins endpoints `x{i}a` (on the arc through
/// positions a,b) and `x{i}b` (on the arc through c,d).
pub fn resolve_all_ones(pd: &PdCode) -> Result<ChordDiagram> {
    let n = pd.crossings.len();
    if n == 0 {
        return Ok(ChordDiagram {
            endpoint_names: vec![],
            circle_names: vec!["z1".into()],
            circles: vec![vec![]],
            chords: vec![],
            writhe: Some((0, 0)),
        });
    }
    let mut occ: HashMap<u32, Vec<usize>> = HashMap::new();
    for (x, tuple) in pd.crossings.iter().enumerate() {
        for (s, &arc) in tuple.iter().enumerate() {
            occ.entry(arc).or_default().push(4 * x + s);
        }
    }
    let partner = arc_partners(&pd.crossings, &occ);
    let mut visited = vec![false; 4 * n];
    // (endpoint, side) sequences per circle; side true = right of travel.
    let mut traced: Vec<Vec<(usize, bool)>> = Vec::new();
    for start in 0..4 * n {
        if visited[start] {
            continue;
        }
        let mut seq = Vec::new();
        let mut slot = start;
        loop {
            if visited[slot] {
                return Err(Error::Trace(format!("circle revisits crossing {}", slot / 4 + 1)));
            }
            let exit = slot ^ 1;
            visited[slot] = true;
            visited[exit] = true;
            let x = slot / 4;
            let endpoint = 2 * x + (slot % 4) / 2;
            seq.push((endpoint, slot % 2 == 0));
            slot = partner[exit];
            if slot == start {
                break;
            }
        }
        traced.push(seq);
    }
    // Orient circles so that every chord meets both of its circles on the same side.
    let mut circle_of = vec![0usize; 2 * n];
    let mut side = vec![false; 2 * n];
    for (c, seq) in traced.iter().enumerate() {
        for &(p, s) in seq {
            circle_of[p] = c;
            side[p] = s;
        }
    }
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); traced.len()];
    for x in 0..n {
        let (p, q) = (2 * x, 2 * x + 1);
        let need = side[p] != side[q];
        if circle_of[p] == circle_of[q] {
            if need {
                return Err(Error::Trace(format!("crossing {} attaches to both sides of one circle", x + 1)));
            }
            continue;
        }
        adj[circle_of[p]].push((circle_of[q], need));
        adj[circle_of[q]].push((circle_of[p], need));
    }
    let mut flip: Vec<Option<bool>> = vec![None; traced.len()];
    for root in 0..traced.len() {
        if flip[root].is_some() {
            continue;
        }
        flip[root] = Some(false);
        let mut queue = VecDeque::from([root]);
        while let Some(c) = queue.pop_front() {
            let fc = flip[c].unwrap();
            for &(d, need) in &adj[c] {
                let want = fc ^ need;
                match flip[d] {
                    None => {
                        flip[d] = Some(want);
                        queue.push_back(d);
                    }
                    Some(f) if f != want => {
                        return Err(Error::Trace("circles admit no coherent orientation".into()));
                    }
                    _ => {}
                }
            }
        }
    }
    let circles: Vec<Vec<usize>> = traced
        .iter()
        .zip(&flip)
        .map(|(seq, f)| {
            let mut v: Vec<usize> = seq.iter().map(|&(p, _)| p).collect();
            if f.unwrap() {
                v.reverse();
            }
            v
        })
        .collect();
    let endpoint_names = (0..n).flat_map(|x| [format!("x{}a", x + 1), format!("x{}b", x + 1)]).collect();
    let chords = (0..n)
        .map(|x| Chord { index: x + 1, ends: [2 * x, 2 * x + 1], label: 1, distinguished: 2 * x })
        .collect();
    Ok(ChordDiagram {
        endpoint_names,
        circle_names: (0..circles.len()).map(|k| format!("z{}", k + 1)).collect(),
        circles,
        chords,
        writhe: Some((pd.n_plus, pd.n_minus)),
    })
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_.+-'".contains(c))
}

/// Parses the line-based chord-diagram format. All chords get label 1.
pub fn parse_chord_diagram(text: &str) -> Result<ChordDiagram> {
    let mut circle_names = Vec::new();
    let mut circle_tokens: Vec<Vec<String>> = Vec::new();
    let mut chord_lines: Vec<(usize, String, String)> = Vec::new();
    let mut writhe = None;
    let syntax = |line: usize, column: usize, message: &str| Error::Syntax { line, column, message: message.into() };
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        let Some(colon) = content.find(':') else {
            return Err(syntax(line_no, indent, "expected ':'"));
        };
        let head: Vec<&str> = content[..colon].split_whitespace().collect();
        let body: Vec<&str> = content[colon + 1..].split_whitespace().collect();
        let body_col = colon + 2;
        match head.as_slice() {
            ["circle", name] if is_name(name) => {
                if let Some(bad) = body.iter().find(|t| !is_name(t)) {
                    return Err(syntax(line_no, body_col, &format!("bad endpoint name '{bad}'")));
                }
                circle_names.push(name.to_string());
                circle_tokens.push(body.iter().map(|s| s.to_string()).collect());
            }
            ["chord", idx] => {
                let idx: usize = idx.parse().map_err(|_| syntax(line_no, indent, "chord index must be an integer"))?;
                if body.len() != 2 || !body.iter().all(|t| is_name(t)) {
                    return Err(syntax(line_no, body_col, "a chord needs exactly two endpoint names"));
                }
                chord_lines.push((idx, body[0].to_string(), body[1].to_string()));
            }
            ["writhe"] => {
                let nums: Option<Vec<usize>> = body.iter().map(|t| t.parse().ok()).collect();
                match nums.as_deref() {
                    Some([p, m]) => writhe = Some((*p, *m)),
                    _ => return Err(syntax(line_no, body_col, "writhe needs two non-negative integers")),
                }
            }
            _ => return Err(syntax(line_no, indent, "expected 'circle NAME:', 'chord IDX:' or 'writhe:'")),
        }
    }
    // Endpoint ids follow chord order, then any leftovers in circle order.
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut endpoint_names: Vec<String> = Vec::new();
    let mut intern = |name: &str, ids: &mut HashMap<String, usize>| -> usize {
        *ids.entry(name.to_string()).or_insert_with(|| {
            endpoint_names.push(name.to_string());
            endpoint_names.len() - 1
        })
    };
    let mut raw_chords = Vec::new();
    for (idx, p, q) in &chord_lines {
        let a = intern(p, &mut ids);
        let b = intern(q, &mut ids);
        raw_chords.push((*idx, a, b));
    }
    let mut circles = Vec::new();
    for toks in &circle_tokens {
        circles.push(toks.iter().map(|t| intern(t, &mut ids)).collect::<Vec<_>>());
    }
    let chords = raw_chords
        .into_iter()
        .map(|(index, a, b)| {
            let distinguished = if endpoint_names[a] <= endpoint_names[b] { a } else { b };
            Chord { index, ends: [a, b], label: 1, distinguished }
        })
        .collect();
    let d = ChordDiagram { endpoint_names, circle_names, circles, chords, writhe };
    let violations = validate(&d);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Invalid(msg.join("; ")));
    }
    Ok(d)
}

/// Serialises a chord diagram in the format read by [`parse_chord_diagram`].
pub fn write_chord_diagram(d: &ChordDiagram) -> String {
    let mut out = String::new();
    if let Some((p, m)) = d.writhe {
        let _ = writeln!(out, "writhe: {p} {m}");
    }
    for (name, circle) in d.circle_names.iter().zip(&d.circles) {
        let names: Vec<&str> = circle.iter().map(|&p| d.endpoint_names[p].as_str()).collect();
        let _ = writeln!(out, "circle {name}: {}", names.join(" "));
    }
    for c in &d.chords {
        let _ = writeln!(out, "chord {}: {} {}", c.index, d.endpoint_names[c.ends[0]], d.endpoint_names[c.ends[1]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL: &str = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]";

    #[test]
    fn trefoil_is_positive() {
        let pd = parse_pd(TREFOIL).unwrap();
        assert_eq!(pd.len(), 3);
        assert_eq!((pd.n_plus, pd.n_minus), (3, 0));
    }

    #[test]
    fn hopf_has_two_crossings() {
        let pd = parse_pd("PD[X[1,3,2,4],X[3,1,4,2]]").unwrap();
        assert_eq!(pd.len(), 2);
        assert_eq!(pd.n_plus + pd.n_minus, 2);
        assert!(pd.n_plus == 2 || pd.n_minus == 2);
    }

    #[test]
    fn kinks_are_accepted() {
        let pos = parse_pd("PD[X[1,2,2,1]]").unwrap();
        assert_eq!((pos.n_plus, pos.n_minus), (1, 0));
        let d = resolve_all_ones(&pos).unwrap();
        assert_eq!((d.num_circles(), d.num_chords()), (1, 1));
        assert!(d.is_monochord(0));
        let neg = parse_pd("PD[X[2,2,1,1]]").unwrap();
        assert_eq!((neg.n_plus, neg.n_minus), (0, 1));
        let d = resolve_all_ones(&neg).unwrap();
        assert_eq!((d.num_circles(), d.num_chords()), (2, 1));
        assert!(!d.is_monochord(0));
    }

    #[test]
    fn empty_pd_is_one_circle() {
        let d = resolve_all_ones(&parse_pd("PD[]").unwrap()).unwrap();
        assert_eq!((d.num_circles(), d.num_chords()), (1, 0));
    }

    #[test]
    fn whitespace_and_comments() {
        let pd = parse_pd("# trefoil\nPD[ X[1, 4,2,5],\n X[3,6,4,1], # middle\n X[5,2,6,3] ]\n").unwrap();
        assert_eq!(pd.len(), 3);
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_pd("PD[X[1,2,2]]") {
            Err(Error::Syntax { line: 1, column: 11, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pd("PD[X[1,2,3,4]]"), Err(Error::ArcMultiplicity(_))));
    }

    #[test]
    fn trefoil_resolution_is_a_triangle() {
        let d = resolve_all_ones(&parse_pd(TREFOIL).unwrap()).unwrap();
        assert_eq!(d.num_circles(), 3);
        assert!((0..3).all(|i| !d.is_monochord(i)));
        let circ = d.circle_of();
        let mut pairs: Vec<(usize, usize)> = d
            .chords
            .iter()
            .map(|c| {
                let (a, b) = (circ[c.ends[0]], circ[c.ends[1]]);
                (a.min(b), a.max(b))
            })
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 3);
        let text = "circle A: p1 q2\ncircle B: q1 p3\ncircle C: p2 q3\nchord 1: p1 q1\nchord 2: p2 q2\nchord 3: p3 q3\n";
        assert!(parse_chord_diagram(text).unwrap().isomorphic(&d));
    }

    #[test]
    fn chord_diagram_round_trip() {
        let d = resolve_all_ones(&parse_pd(TREFOIL).unwrap()).unwrap();
        assert_eq!(parse_chord_diagram(&write_chord_diagram(&d)).unwrap(), d);
        let one = parse_chord_diagram("circle A: a1 a2\nchord 1: a1 a2").unwrap();
        assert_eq!((one.num_circles(), one.num_chords()), (1, 1));
        assert!(one.is_monochord(0));
    }

    #[test]
    fn invalid_chord_diagrams_are_rejected() {
        assert!(matches!(parse_chord_diagram("circle A: a1\nchord 1: a1 a2"), Err(Error::Invalid(_))));
        assert!(matches!(parse_chord_diagram("circle A a1"), Err(Error::Syntax { .. })));
    }
}
