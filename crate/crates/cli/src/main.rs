use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use almax::algebra::homology;
use almax::configs::{detect_configs, has_alternating_pair, is_1_adequate, ConfigIndex, PhiBucket};
use almax::decomp::{
    all_subposet_kinds, build_subposet, simplification_sound, simplify, skein_kinds, verify_all_skeins,
    verify_cofibre_partition, verify_skein, SkeinKind,
};
use almax::extreme::{
    dual_subposet_check, extreme_grading_check, independence_complex, join_check, lando_graph, reduced_homology,
    reference_homotopy, sphere_duality_check, Family,
};
use almax::functors::{
    build_extreme_complex, build_f_complex, build_gamma, build_m_complex, check_gamma, lambda_matches, FunctorKind,
};
use almax::ingest::{parse_chord_diagram, parse_pd, resolve_all_ones, write_chord_diagram};
use almax::model::{full_mask, validate, Group};
use almax::oracle::{almost_extreme_agreement, functor_cohomology, khovanov_homology, khovanov_homology_at};
use almax::statecube::{phi_chain_independence_check, CubeIndex};
use almax::{ChordDiagram, HomologyResult, PdCode};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "almax", version, about = "Extreme and almost-extreme Khovanov homology through cube functors")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Largest crossing count the brute-force oracle accepts.
    #[arg(long, global = true, default_value_t = 14)]
    max_crossings: usize,
    /// Largest Lando graph whose independence complex is enumerated.
    #[arg(long, global = true, default_value_t = 24)]
    max_independence_vertices: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctorArg {
    #[value(name = "F")]
    F,
    #[value(name = "M")]
    M,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SkeinArg {
    Monochord,
    Bichord,
    X,
}

#[derive(Subcommand)]
enum Command {
    /// Chord configurations of D(1).
    Classify { file: PathBuf },
    /// Homology at one quantum grading.
    Homology {
        file: PathBuf,
        /// almax, max, or j=<int>.
        #[arg(long, default_value = "almax")]
        grading: String,
        #[arg(long, value_enum, default_value_t = FunctorArg::Both)]
        functor: FunctorArg,
    },
    /// Lando graph, independence complex and the extreme grading.
    Extreme { file: PathBuf },
    /// Subposet homologies and the cofibre partition.
    Decompose { file: PathBuf },
    /// Skein sequences along one chord.
    Skein {
        file: PathBuf,
        #[arg(long)]
        chord: usize,
        /// Restrict to one sequence; default is every eligible one.
        #[arg(long, value_enum)]
        kind: Option<SkeinArg>,
    },
    /// Simplification moves to a fixpoint.
    Simplify {
        file: PathBuf,
        /// Also compare homology before and after.
        #[arg(long)]
        check: bool,
    },
    /// Runs the property suite on one diagram or a directory.
    Verify {
        file: Option<PathBuf>,
        /// Verify every .pd and .cd file in a directory.
        #[arg(long)]
        all: Option<PathBuf>,
        /// Chord bound for the structural-sequence and simplification checks.
        #[arg(long, default_value_t = 10)]
        max_structural: usize,
        /// Chord bound for the exhaustive classifier check.
        #[arg(long, default_value_t = 12)]
        max_classifier: usize,
    },
    /// Brute-force Khovanov homology.
    Oracle {
        file: PathBuf,
        /// A quantum grading or "all".
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        j: String,
    },
}

enum Failure {
    Input(String),
    Guard(String),
    /// Output is still printed; the exit code reports the failed check.
    Verification(Value),
}

impl From<almax::Error> for Failure {
    fn from(e: almax::Error) -> Failure {
        match e {
            almax::Error::Guard(m) => Failure::Guard(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Out = Result<Value, Failure>;

enum Input {
    Pd(PdCode),
    Cd(ChordDiagram),
}

struct Loaded {
    name: String,
    input: Input,
    top: ChordDiagram,
}

impl Loaded {
    fn pd(&self) -> Result<&PdCode, Failure> {
        match &self.input {
            Input::Pd(pd) => Ok(pd),
            Input::Cd(_) => Err(Failure::Input(format!("{}: this command needs a PD code", self.name))),
        }
    }

    fn n_minus(&self) -> Option<usize> {
        match &self.input {
            Input::Pd(pd) => Some(pd.n_minus),
            Input::Cd(d) => d.writhe.map(|w| w.1),
        }
    }

    /// j_max from the writhe, when known.
    fn j_max(&self) -> Option<i64> {
        let shift = match &self.input {
            Input::Pd(pd) => pd.n_plus as i64 - 2 * pd.n_minus as i64,
            Input::Cd(d) => d.writhe_shift()?,
        };
        Some(shift + self.top.chords.len() as i64 + self.top.circles.len() as i64)
    }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let name = path.display().to_string();
    let is_pd = path.extension().is_some_and(|e| e == "pd") || text.trim_start().starts_with("PD[");
    let wrap = |e: almax::Error| Failure::Input(format!("{name}: {e}"));
    if is_pd {
        let pd = parse_pd(&text).map_err(wrap)?;
        let top = resolve_all_ones(&pd).map_err(wrap)?;
        Ok(Loaded { name, input: Input::Pd(pd), top })
    } else {
        let d = parse_chord_diagram(&text).map_err(wrap)?;
        let violations = validate(&d);
        if let Some(v) = violations.first() {
            return Err(Failure::Input(format!("{name}: {} ({})", v.kind.as_str(), v.detail)));
        }
        Ok(Loaded { name, top: d.clone(), input: Input::Cd(d) })
    }
}

fn header(command: &str, l: &Loaded) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("input".into(), json!(l.name));
    m.insert("chords".into(), json!(l.top.chords.len()));
    m.insert("circles".into(), json!(l.top.circles.len()));
    if let Input::Pd(pd) = &l.input {
        m.insert("n_plus".into(), json!(pd.n_plus));
        m.insert("n_minus".into(), json!(pd.n_minus));
    }
    m
}

fn group_json(g: &Group) -> (usize, Vec<String>) {
    (g.betti, g.torsion.iter().map(|t| t.to_string()).collect())
}

/// Rows {degree-key, j, betti, torsion} of the nonzero groups.
fn rows(h: &HomologyResult, key: &str, j: Option<i64>, extra: &[(&str, Value)]) -> Vec<Value> {
    h.groups
        .iter()
        .filter(|(_, g)| !g.is_zero())
        .map(|(k, g)| {
            let (betti, torsion) = group_json(g);
            let mut m = Map::new();
            for (name, v) in extra {
                m.insert((*name).into(), v.clone());
            }
            m.insert(key.into(), json!(k));
            m.insert("j".into(), json!(j));
            m.insert("betti".into(), json!(betti));
            m.insert("torsion".into(), json!(torsion));
            Value::Object(m)
        })
        .collect()
}

fn build_cube(top: &ChordDiagram) -> Result<CubeIndex, Failure> {
    Ok(CubeIndex::build(top)?)
}

fn classify(l: &Loaded) -> Out {
    let mut m = header("classify", l);
    let report = serde_json::to_value(detect_configs(&l.top)).expect("serializable");
    if let Value::Object(fields) = report {
        m.extend(fields);
    }
    Ok(Value::Object(m))
}

fn homology_cmd(l: &Loaded, g: &Global, grading: &str, functor: FunctorArg) -> Out {
    let mut m = header("homology", l);
    m.insert("grading".into(), json!(grading));
    let shift = l.n_minus();
    let reindex = |h: HomologyResult| h.shifted(-(shift.unwrap_or(0) as i64));
    let key = if shift.is_some() { "i" } else { "k" };
    if shift.is_none() {
        m.insert("note".into(), json!("writhe unknown: degrees are cube weights k and j is omitted"));
    }
    let mut all_rows = Vec::new();
    match grading {
        "almax" => {
            let cube = build_cube(&l.top)?;
            let j = l.j_max().map(|j| j - 2);
            m.insert("j".into(), json!(j));
            let kinds: &[FunctorKind] = match functor {
                FunctorArg::F => &[FunctorKind::F],
                FunctorArg::M => &[FunctorKind::M],
                FunctorArg::Both => &[FunctorKind::F, FunctorKind::M],
            };
            let mut results = Vec::new();
            for &kind in kinds {
                let c = match kind {
                    FunctorKind::F => build_f_complex(&cube),
                    FunctorKind::M => build_m_complex(&cube),
                };
                let h = functor_cohomology(&c, shift.unwrap_or(0))?;
                let name = if kind == FunctorKind::F { "F" } else { "M" };
                all_rows.extend(rows(&h, key, j, &[("functor", json!(name))]));
                results.push(h);
            }
            if results.len() == 2 {
                m.insert("agree".into(), json!(results[0] == results[1]));
            }
        }
        "max" => {
            let cube = build_cube(&l.top)?;
            let j = l.j_max();
            m.insert("j".into(), json!(j));
            let h = reindex(homology(&build_extreme_complex(&cube).dual())?);
            all_rows.extend(rows(&h, key, j, &[("functor", json!("X"))]));
        }
        other => {
            let j: i64 = other
                .strip_prefix("j=")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Failure::Input(format!("--grading must be almax, max or j=<int>, got {other}")))?;
            let pd = l.pd()?;
            m.insert("j".into(), json!(j));
            let h = khovanov_homology_at(pd, j, g.max_crossings)?;
            all_rows.extend(rows(&h, "i", Some(j), &[("functor", json!("oracle"))]));
        }
    }
    m.insert("rows".into(), Value::Array(all_rows));
    Ok(Value::Object(m))
}

fn oracle_cmd(l: &Loaded, g: &Global, j: &str) -> Out {
    let pd = l.pd()?;
    let mut m = header("oracle", l);
    let mut all_rows = Vec::new();
    if j == "all" {
        for (j, h) in khovanov_homology(pd, g.max_crossings)? {
            all_rows.extend(rows(&h, "i", Some(j), &[]));
        }
    } else {
        let j: i64 = j.parse().map_err(|_| Failure::Input(format!("--j must be an integer or all, got {j}")))?;
        all_rows.extend(rows(&khovanov_homology_at(pd, j, g.max_crossings)?, "i", Some(j), &[]));
    }
    m.insert("rows".into(), Value::Array(all_rows));
    Ok(Value::Object(m))
}

fn homology_table(h: &HomologyResult) -> Value {
    Value::Array(
        h.groups
            .iter()
            .map(|(k, g)| {
                let (betti, torsion) = group_json(g);
                json!({"degree": k, "betti": betti, "torsion": torsion})
            })
            .collect(),
    )
}

fn extreme_cmd(l: &Loaded, g: &Global) -> Out {
    let mut m = header("extreme", l);
    let graph = lando_graph(&l.top);
    let k = independence_complex(&graph, g.max_independence_vertices)?;
    let h = reduced_homology(&k)?;
    let family = if graph.is_cycle() {
        Some((Family::Cycle, graph.vertices.len()))
    } else if graph.is_path() && !graph.edges.is_empty() {
        Some((Family::Path, graph.edges.len()))
    } else {
        None
    };
    m.insert("lando_graph".into(), serde_json::to_value(&graph).expect("serializable"));
    m.insert(
        "independence_complex".into(),
        json!({"faces": k.faces.len(), "dimension": k.dimension(), "reduced_homology": homology_table(&h)}),
    );
    m.insert(
        "reference".into(),
        match family {
            Some((f, n)) => {
                let r = reference_homotopy(f, n);
                json!({"family": f, "n": n, "reduced_homology": homology_table(&r), "matches": r == h})
            }
            None => Value::Null,
        },
    );
    let cube = build_cube(&l.top)?;
    m.insert("dual_subposet".into(), json!(dual_subposet_check(&cube, &k)));
    m.insert(
        "sphere_duality".into(),
        serde_json::to_value(sphere_duality_check(&cube, g.max_independence_vertices)?).expect("serializable"),
    );
    m.insert(
        "join".into(),
        serde_json::to_value(join_check(&graph, g.max_independence_vertices)?).expect("serializable"),
    );
    if let Input::Pd(pd) = &l.input {
        let r = extreme_grading_check(pd, g.max_crossings, g.max_independence_vertices)?;
        m.insert("extreme_grading".into(), serde_json::to_value(&r).expect("serializable"));
    }
    Ok(Value::Object(m))
}

fn decompose_cmd(l: &Loaded) -> Out {
    let mut m = header("decompose", l);
    let cube = build_cube(&l.top)?;
    let mut members = Map::new();
    for kind in all_subposet_kinds(&cube) {
        members.insert(kind.to_string(), json!(build_subposet(&cube, kind)?.members.len()));
    }
    m.insert("subposet_sizes".into(), Value::Object(members));
    let report = verify_cofibre_partition(&cube)?;
    let ok = report.ok();
    m.insert("ok".into(), json!(ok));
    m.insert("cofibre".into(), serde_json::to_value(&report).expect("serializable"));
    let out = Value::Object(m);
    if ok {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn skein_cmd(l: &Loaded, chord: usize, kind: Option<SkeinArg>) -> Out {
    let mut m = header("skein", l);
    let cube = build_cube(&l.top)?;
    let pos = cube.d1.chord_position(chord).ok_or(almax::Error::NoSuchChord(chord))?;
    let kinds = match kind {
        Some(SkeinArg::Monochord) => vec![SkeinKind::Monochord],
        Some(SkeinArg::Bichord) => vec![SkeinKind::Bichord],
        Some(SkeinArg::X) => vec![SkeinKind::X],
        None => skein_kinds(&cube.d1, pos),
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for k in kinds {
        let r = verify_skein(&cube, chord, k)?;
        ok &= r.ok();
        reports.push(serde_json::to_value(&r).expect("serializable"));
    }
    m.insert("chord".into(), json!(chord));
    m.insert("ok".into(), json!(ok));
    m.insert("sequences".into(), Value::Array(reports));
    let out = Value::Object(m);
    if ok {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn simplify_cmd(l: &Loaded, check: bool) -> Out {
    let mut m = header("simplify", l);
    let s = simplify(&l.top)?;
    m.insert("suspensions".into(), json!(s.suspensions));
    m.insert("moves".into(), serde_json::to_value(&s.moves).expect("serializable"));
    m.insert("chords_after".into(), json!(s.diagram.chords.len()));
    m.insert("diagram".into(), json!(write_chord_diagram(&s.diagram)));
    if check {
        let sound = simplification_sound(&l.top)?;
        m.insert("sound".into(), json!(sound));
        if !sound {
            return Err(Failure::Verification(Value::Object(m)));
        }
    }
    Ok(Value::Object(m))
}

/// Runs every applicable check; None marks a skipped check.
fn verify_one(l: &Loaded, g: &Global, max_structural: usize, max_classifier: usize) -> Result<Value, Failure> {
    let mut checks: Map<String, Value> = Map::new();
    let mut put = |name: &str, v: Option<bool>| {
        checks.insert(name.into(), json!(v));
    };
    let n = l.top.chords.len();
    let cube = build_cube(&l.top)?;
    let f = build_f_complex(&cube);
    let mc = build_m_complex(&cube);
    put("d_squared", Some(f.check().is_ok() && mc.check().is_ok()));
    put("gamma", Some(build_gamma(&cube, &f, &mc).map(|gm| check_gamma(&gm, &f, &mc).ok()).unwrap_or(false)));
    put(
        "classifier",
        (n <= max_classifier).then(|| {
            let ix = ConfigIndex::new(&cube.d1);
            cube.states().all(|r| ix.classify(!r.state.bits & full_mask(n)) == PhiBucket::of(r.phi))
        }),
    );
    put("phi_chain_independence", Some(phi_chain_independence_check(&cube, 8, 4)));
    if let Input::Pd(pd) = &l.input {
        if pd.len() <= g.max_crossings {
            let r = almost_extreme_agreement(pd, g.max_crossings)?;
            put("oracle_agreement", Some(r.agree_f && r.agree_m));
            put("census", Some(r.census));
            let graph = lando_graph(&l.top);
            put(
                "extreme_grading",
                (graph.vertices.len() <= g.max_independence_vertices)
                    .then(|| extreme_grading_check(pd, g.max_crossings, g.max_independence_vertices).map(|r| r.agree))
                    .transpose()?,
            );
        } else {
            put("oracle_agreement", None);
            put("census", None);
            put("extreme_grading", None);
        }
    }
    let graph = lando_graph(&l.top);
    if graph.vertices.len() <= g.max_independence_vertices {
        let k = independence_complex(&graph, g.max_independence_vertices)?;
        put("dual_subposet", Some(dual_subposet_check(&cube, &k)));
        put("sphere_duality", Some(sphere_duality_check(&cube, g.max_independence_vertices)?.agree != Some(false)));
        put("join", Some(join_check(&graph, g.max_independence_vertices)?.is_none_or(|r| r.agree)));
    }
    let adequate = is_1_adequate(&l.top);
    let altpair = has_alternating_pair(&l.top);
    let lf = lambda_matches(FunctorKind::F, &cube);
    let lm = lambda_matches(FunctorKind::M, &cube);
    put(
        "factorization",
        Some(lf.is_some() == adequate && lm.is_some() == !altpair && lf != Some(false) && lm != Some(false)),
    );
    if !altpair && !adequate {
        put("torsion_free", Some(homology(&mc)?.is_torsion_free()));
    }
    if n <= max_structural {
        put("cofibre", Some(verify_cofibre_partition(&cube)?.ok()));
        put("skein", Some(verify_all_skeins(&cube)?.iter().all(|r| r.ok())));
        put("simplification", Some(simplification_sound(&l.top)?));
    } else {
        put("cofibre", None);
        put("skein", None);
        put("simplification", None);
    }
    let ok = checks.values().all(|v| *v != json!(false));
    let mut m = header("verify", l);
    m.insert("ok".into(), json!(ok));
    m.insert("checks".into(), Value::Object(checks));
    Ok(Value::Object(m))
}

fn verify_cmd(g: &Global, file: Option<&Path>, all: Option<&Path>, max_structural: usize, max_classifier: usize) -> Out {
    let mut paths: Vec<PathBuf> = Vec::new();
    if let Some(f) = file {
        paths.push(f.to_path_buf());
    }
    if let Some(dir) = all {
        let entries = std::fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "pd" || e == "cd"))
            .collect();
        found.sort();
        paths.extend(found);
    }
    if paths.is_empty() {
        return Err(Failure::Input("verify needs a file or --all <dir>".into()));
    }
    let mut results = Vec::new();
    let mut ok = true;
    for p in &paths {
        let l = load(p)?;
        let r = verify_one(&l, g, max_structural, max_classifier)?;
        ok &= r["ok"] == json!(true);
        results.push(r);
    }
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "ok": ok,
        "diagrams": results,
    });
    if ok {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.replace('\t', " ").replace('\n', "\\n"),
        other => other.to_string(),
    }
}

/// Tab-separated rendering: a header plus one line per row for tables,
/// key/value lines otherwise.
fn tsv(v: &Value) -> String {
    let mut out = format!("schema_version\t{SCHEMA_VERSION}\n");
    let Value::Object(m) = v else { return out + &scalar(v) + "\n" };
    let table = m.get("rows").or_else(|| m.get("diagrams"));
    for (k, val) in m {
        if k == "schema_version" || Some(val) == table {
            continue;
        }
        out += &format!("{k}\t{}\n", scalar(val));
    }
    if let Some(Value::Array(rows)) = table {
        if let Some(Value::Object(first)) = rows.first() {
            let cols: Vec<&String> = first.keys().filter(|c| c.as_str() != "schema_version").collect();
            out += &cols.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("\t");
            out += "\n";
            for r in rows {
                let line: Vec<String> = cols.iter().map(|c| scalar(&r[c.as_str()])).collect();
                out += &line.join("\t");
                out += "\n";
            }
        }
    }
    out
}

fn emit(v: &Value, format: Format) {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(v).expect("serializable") + "\n",
        Format::Tsv => tsv(v),
    };
    // A closed pipe downstream is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(cli: &Cli) -> Out {
    let g = &cli.global;
    match &cli.command {
        Command::Classify { file } => classify(&load(file)?),
        Command::Homology { file, grading, functor } => homology_cmd(&load(file)?, g, grading, *functor),
        Command::Extreme { file } => extreme_cmd(&load(file)?, g),
        Command::Decompose { file } => decompose_cmd(&load(file)?),
        Command::Skein { file, chord, kind } => skein_cmd(&load(file)?, *chord, *kind),
        Command::Simplify { file, check } => simplify_cmd(&load(file)?, *check),
        Command::Verify { file, all, max_structural, max_classifier } => {
            verify_cmd(g, file.as_deref(), all.as_deref(), *max_structural, *max_classifier)
        }
        Command::Oracle { file, j } => oracle_cmd(&load(file)?, g, j),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(&cli) {
        Ok(v) => {
            emit(&v, cli.global.format);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(v)) => {
            emit(&v, cli.global.format);
            eprintln!("error: verification failed");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Guard(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
