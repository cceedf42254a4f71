use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use geoclass::equivalence::atlas::{AtlasClass, ATLAS_MAX};
use geoclass::equivalence::{
    classify, decide, partition_inner, partition_outer, AtlasReport, ClassificationReport, DecideOptions,
    EquivalenceVerdict, Relation,
};
use geoclass::lens::{check_path_lemma, lens_adjacency, lens_grid, lens_iso, LensParams, PathLemmaReport};
use geoclass::moves::{apply, MoveSpec};
use geoclass::structure::{k_temperature, to_dot};
use geoclass::{AbelianGroupInvariants, Graph};

/// Exit status for errors; 0, 1 and 2 carry verdicts.
const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "geoclass", version, about = "Invariants and equivalence decisions for finite directed graphs")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "GEOCLASS_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Component poset, temperatures, K-theory and conditions of one graph.
    Invariants { graph: PathBuf },
    /// Decide an equivalence between two graphs. Exit 0 yes, 1 no, 2 unknown.
    Decide {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Rel::Me)]
        relation: Rel,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Enumerate simple graphs and count their equivalence classes.
    Atlas {
        #[arg(long, default_value_t = 4)]
        max_vertices: usize,
        #[arg(long, value_enum, default_value_t = AtlasRel::Both)]
        relation: AtlasRel,
        /// Allow five-vertex runs.
        #[arg(long)]
        long: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Replay a move script on a graph, printing invariants after each step.
    Moves { graph: PathBuf, script: PathBuf },
    /// Lens space graph for the weights `m`, or the class grid over all weights.
    Lens {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: u64,
        #[arg(long, value_delimiter = ',')]
        m: Vec<u64>,
        /// Label every admissible weight vector by isomorphism class.
        #[arg(long)]
        grid: bool,
    },
    /// Decide stable isomorphism of two lens space graphs.
    LensIso {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        other: Vec<u64>,
    },
}

#[derive(clap::Args, Clone, Copy)]
struct SearchArgs {
    /// Entry bound of the fallback matrix search.
    #[arg(long, default_value_t = 2)]
    bound: i64,
    /// Candidate budget of the fallback matrix search.
    #[arg(long, default_value_t = 10_000_000)]
    cap: u64,
    /// Disable the table of known stably isomorphic pairs.
    #[arg(long)]
    no_lookup: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
    Dot,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rel {
    Me,
    Ce,
    Stable,
}

impl From<Rel> for Relation {
    fn from(r: Rel) -> Relation {
        match r {
            Rel::Me => Relation::Me,
            Rel::Ce => Relation::Ce,
            Rel::Stable => Relation::Stable,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AtlasRel {
    Inner,
    Outer,
    Both,
    /// Inner and outer classes plus move, Cuntz move and stable classes.
    Full,
}

/// Effective settings of a run, echoed at the top of every output. The
/// thread count is left out of JSON so that output does not depend on it.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    inputs: Vec<String>,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    relation: Option<String>,
    search_bound: i64,
    search_cap: u64,
    lookup: bool,
    max_vertices: usize,
    long: bool,
    #[serde(skip)]
    threads: usize,
}

impl RunConfig {
    fn new(cli: &Cli) -> RunConfig {
        let defaults = DecideOptions::default();
        let mut c = RunConfig {
            command: "",
            inputs: Vec::new(),
            format: cli.format,
            relation: None,
            search_bound: defaults.search_bound,
            search_cap: defaults.search_cap,
            lookup: defaults.lookup,
            max_vertices: 4,
            long: false,
            threads: cli.threads,
        };
        let path = |p: &Path| p.display().to_string();
        match &cli.command {
            Command::Invariants { graph } => {
                c.command = "invariants";
                c.inputs = vec![path(graph)];
            }
            Command::Decide { left, right, relation, search } => {
                c.command = "decide";
                c.inputs = vec![path(left), path(right)];
                c.relation = Some(Relation::from(*relation).to_string());
                c.set_search(search);
            }
            Command::Atlas { max_vertices, relation, long, search } => {
                c.command = "atlas";
                c.max_vertices = *max_vertices;
                c.long = *long;
                c.relation = serde_json::to_value(relation).ok().and_then(|v| v.as_str().map(str::to_string));
                c.set_search(search);
            }
            Command::Moves { graph, script } => {
                c.command = "moves";
                c.inputs = vec![path(graph), path(script)];
            }
            Command::Lens { n, r, m, grid } => {
                c.command = if *grid { "lens-grid" } else { "lens" };
                c.inputs = vec![lens_input(*n, *r, m)];
            }
            Command::LensIso { n, r, m, other } => {
                c.command = "lens-iso";
                c.inputs = vec![lens_input(*n, *r, m), lens_input(*n, *r, other)];
                c.relation = Some(Relation::Stable.to_string());
            }
        }
        c
    }

    fn set_search(&mut self, s: &SearchArgs) {
        self.search_bound = s.bound;
        self.search_cap = s.cap;
        self.lookup = !s.no_lookup;
    }

    fn decide_options(&self, relation: Relation) -> DecideOptions {
        DecideOptions { relation, search_bound: self.search_bound, search_cap: self.search_cap, lookup: self.lookup }
    }

    /// `key=value` pairs for text, CSV and DOT headers.
    fn summary(&self) -> String {
        let Value::Object(map) = serde_json::to_value(self).expect("config serializes") else { unreachable!() };
        let mut parts: Vec<String> = map
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                Value::Array(a) => {
                    let items: Vec<String> =
                        a.iter().map(|x| x.as_str().map(str::to_string).unwrap_or(x.to_string())).collect();
                    format!("{k}=[{}]", items.join(" "))
                }
                other => format!("{k}={other}"),
            })
            .collect();
        parts.push(match self.threads {
            0 => "threads=auto".to_string(),
            t => format!("threads={t}"),
        });
        parts.join(" ")
    }
}

fn lens_input(n: Option<usize>, r: u64, m: &[u64]) -> String {
    let m: Vec<String> = m.iter().map(u64::to_string).collect();
    match n {
        Some(n) => format!("n={n} r={r} m={}", m.join(",")),
        None => format!("r={r} m={}", m.join(",")),
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Outcome = Result<(String, u8), Failure>;

fn read_graph(p: &Path) -> Result<Graph, Failure> {
    let text = std::fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
    Graph::parse(&text).map_err(|e| Failure(format!("{}: {e}", p.display())))
}

fn json_out(cfg: &RunConfig, result: &impl Serialize) -> Result<String, Failure> {
    let doc = serde_json::json!({ "config": cfg, "result": result });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn header(cfg: &RunConfig, prefix: &str) -> String {
    format!("{prefix} geoclass {}\n{prefix} config: {}\n", cfg.command, cfg.summary())
}

fn unsupported(cfg: &RunConfig) -> Failure {
    let f = serde_json::to_value(cfg.format).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    Failure(format!("format {f} is not available for {}", cfg.command))
}

fn join<T: std::fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

#[derive(Serialize)]
struct InvariantsReport {
    graph: Graph,
    vertices: usize,
    edges: u64,
    components: Vec<Vec<usize>>,
    transition_states: Vec<usize>,
    hasse: Vec<(usize, usize)>,
    tau: Vec<i8>,
    k_temperatures: Vec<String>,
    k0: AbelianGroupInvariants,
    k0_torsion_order: String,
    condition_k: bool,
    condition_l: bool,
    condition_h: bool,
    bowen_franks: AbelianGroupInvariants,
    det_sign: i8,
}

fn invariants(g: &Graph) -> InvariantsReport {
    let kt = k_temperature(g);
    let k0 = g.k0();
    InvariantsReport {
        vertices: g.n(),
        edges: g.edge_count(),
        components: kt.poset().components.clone(),
        transition_states: kt.poset().transition_states.clone(),
        hasse: kt.poset().hasse(),
        tau: kt.tau().to_vec(),
        k_temperatures: kt.labels().iter().map(|l| l.to_string()).collect(),
        k0_torsion_order: k0.torsion_order().to_string(),
        k0,
        condition_k: g.condition_k(),
        condition_l: g.condition_l(),
        condition_h: g.condition_h(),
        bowen_franks: g.bowen_franks(),
        det_sign: g.det_sign(),
        graph: g.clone(),
    }
}

fn cmd_invariants(cfg: &RunConfig, path: &Path) -> Outcome {
    let g = read_graph(path)?;
    let out = match cfg.format {
        Format::Json => json_out(cfg, &invariants(&g))?,
        Format::Dot => header(cfg, "//") + &to_dot(&k_temperature(&g)),
        Format::Csv => return Err(unsupported(cfg)),
        Format::Text => {
            let r = invariants(&g);
            let comps: Vec<String> = r.components.iter().map(|c| format!("{{{}}}", join(c, ","))).collect();
            let hasse: Vec<String> = r.hasse.iter().map(|(a, b)| format!("{a}->{b}")).collect();
            let mut s = header(cfg, "#");
            let _ = writeln!(s, "vertices: {}, edges: {}", r.vertices, r.edges);
            let _ = writeln!(s, "components: {}", if comps.is_empty() { "none".into() } else { comps.join(" ") });
            let _ = writeln!(
                s,
                "transition states: {}",
                if r.transition_states.is_empty() { "none".into() } else { join(&r.transition_states, " ") }
            );
            let _ = writeln!(s, "hasse: {}", if hasse.is_empty() { "none".into() } else { hasse.join(" ") });
            let _ = writeln!(s, "tau: ({})", join(&r.tau, ", "));
            let _ = writeln!(s, "K-temperatures: ({})", r.k_temperatures.join(", "));
            let _ = writeln!(s, "K0 = cok((B•)^T): {} (torsion order {})", r.k0, r.k0_torsion_order);
            let _ = writeln!(s, "conditions: K={} L={} H={}", r.condition_k, r.condition_l, r.condition_h);
            let _ = writeln!(s, "Bowen-Franks cok(I - A): {}", r.bowen_franks);
            let _ = writeln!(s, "sign det(I - A): {}", r.det_sign);
            s
        }
    };
    Ok((out, 0))
}

fn render_verdict(s: &mut String, v: &EquivalenceVerdict) {
    let _ = writeln!(s, "verdict: {:?}", v.verdict);
    let _ = writeln!(s, "rule: {}", v.rule);
    if let Some(d) = &v.distinguisher {
        let _ = writeln!(s, "distinguisher: {}", d.invariant);
        let _ = writeln!(s, "  left:  {}", d.left);
        let _ = writeln!(s, "  right: {}", d.right);
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(s, "witness: U * BE * V = BF (verified: {})", w.verify());
        let _ = writeln!(s, "  U  = {}", w.u);
        let _ = writeln!(s, "  V  = {}", w.v);
        let _ = writeln!(s, "  BE = {}", w.be);
        let _ = writeln!(s, "  BF = {}", w.bf);
    }
    if let Some((l, r)) = &v.moves {
        let _ = writeln!(s, "moves left:  {}", if l.is_empty() { "none".into() } else { join(l, "; ") });
        let _ = writeln!(s, "moves right: {}", if r.is_empty() { "none".into() } else { join(r, "; ") });
    }
    if let Some(n) = &v.note {
        let _ = writeln!(s, "note: {n}");
    }
}

fn verdict_out(cfg: &RunConfig, v: &EquivalenceVerdict) -> Outcome {
    let code = v.verdict.exit_code() as u8;
    let out = match cfg.format {
        Format::Json => json_out(cfg, v)?,
        Format::Text => {
            let mut s = header(cfg, "#");
            render_verdict(&mut s, v);
            s
        }
        _ => return Err(unsupported(cfg)),
    };
    Ok((out, code))
}

fn cmd_decide(cfg: &RunConfig, left: &Path, right: &Path, relation: Relation) -> Outcome {
    let (ge, gf) = (read_graph(left)?, read_graph(right)?);
    let v = decide(&ge, &gf, &cfg.decide_options(relation))?;
    verdict_out(cfg, &v)
}

#[derive(Serialize)]
struct AtlasRow {
    m: usize,
    graphs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    me: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ce: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stable: Option<usize>,
}

#[derive(Serialize)]
struct AtlasOutput {
    rows: Vec<AtlasRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner: Option<AtlasReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outer: Option<AtlasReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ClassificationReport>,
}

fn cmd_atlas(cfg: &RunConfig, relation: AtlasRel) -> Outcome {
    let max = cfg.max_vertices;
    if max == 0 || max > ATLAS_MAX {
        return Err(Failure(format!("--max-vertices must lie in 1..={ATLAS_MAX}")));
    }
    if max > 4 && !cfg.long {
        return Err(Failure(format!("--max-vertices {max} exceeds 4; pass --long to run it")));
    }
    let start = Instant::now();
    let want_inner = relation != AtlasRel::Outer;
    let want_outer = relation != AtlasRel::Inner;
    let mut out = AtlasOutput { rows: Vec::new(), inner: None, outer: None, classification: None };
    for m in 1..=max {
        let inner = if want_inner { Some(partition_inner(m)?) } else { None };
        let outer = if want_outer { Some(partition_outer(m)?) } else { None };
        let class =
            if relation == AtlasRel::Full { Some(classify(m, &cfg.decide_options(Relation::Me))?) } else { None };
        let graphs = inner.as_ref().or(outer.as_ref()).map(|r| r.graph_count).unwrap_or_default();
        out.rows.push(AtlasRow {
            m,
            graphs,
            inner: inner.as_ref().map(|r| r.class_count),
            outer: outer.as_ref().map(|r| r.class_count),
            me: class.as_ref().map(|c| c.me),
            ce: class.as_ref().map(|c| c.ce),
            stable: class.as_ref().map(|c| c.stable),
        });
        (out.inner, out.outer, out.classification) = (inner, outer, class);
    }
    let elapsed = start.elapsed();
    let reports: Vec<&AtlasReport> = [&out.inner, &out.outer].into_iter().flatten().collect();
    let text = match cfg.format {
        Format::Json => json_out(cfg, &out)?,
        Format::Dot => return Err(unsupported(cfg)),
        Format::Csv => {
            let mut s = header(cfg, "#");
            s += &atlas_table_csv(&out.rows)?;
            s.push('\n');
            s += &atlas_classes_csv(&reports)?;
            s
        }
        Format::Text => {
            let mut s = header(cfg, "#");
            let cols = table_columns(&out.rows);
            let _ = writeln!(s, "{}", cols.iter().map(|(h, _)| format!("{h:>8}")).collect::<String>());
            for row in &out.rows {
                let _ = writeln!(
                    s,
                    "{}",
                    cols.iter().map(|(_, f)| format!("{:>8}", f(row).unwrap_or_default())).collect::<String>()
                );
            }
            for rep in &reports {
                let _ =
                    writeln!(s, "\n{} classes of {}-vertex simple graphs: {}", rep.relation, rep.m, rep.class_count);
                for (i, c) in rep.classes.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "  {i:>4}  size {:>4}  K0 {}  K-temperatures ({})  rep {}",
                        c.size,
                        c.k0,
                        c.k_temperatures.join(", "),
                        rows_of(c)
                    );
                }
            }
            if let Some(c) = &out.classification {
                let _ = writeln!(
                    s,
                    "\nsplit outer classes: {} (lookup merges {}, unresolved pairs {})",
                    c.split.len(),
                    c.lookup_merges,
                    c.unresolved.len()
                );
                for u in &c.unresolved {
                    let _ = writeln!(
                        s,
                        "  unresolved {}: {:?} vs {:?}: {}",
                        u.relation,
                        u.left.rows(),
                        u.right.rows(),
                        u.note
                    );
                }
            }
            let _ = writeln!(s, "# elapsed: {elapsed:.2?}");
            s
        }
    };
    Ok((text, 0))
}

type Column = (&'static str, fn(&AtlasRow) -> Option<usize>);

fn table_columns(rows: &[AtlasRow]) -> Vec<Column> {
    let all: [Column; 7] = [
        ("M", |r| Some(r.m)),
        ("graphs", |r| Some(r.graphs)),
        ("inner", |r| r.inner),
        ("outer", |r| r.outer),
        ("ME", |r| r.me),
        ("CE", |r| r.ce),
        ("stable", |r| r.stable),
    ];
    all.into_iter().filter(|(_, f)| rows.first().and_then(f).is_some()).collect()
}

fn atlas_table_csv(rows: &[AtlasRow]) -> Result<String, Failure> {
    let cols = table_columns(rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cols.iter().map(|(h, _)| *h))?;
    for row in rows {
        w.write_record(cols.iter().map(|(_, f)| f(row).unwrap_or_default().to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?)
}

fn rows_of(c: &AtlasClass) -> String {
    c.representative.rows().iter().map(|r| join(r, "")).collect::<Vec<_>>().join("/")
}

fn atlas_classes_csv(reports: &[&AtlasReport]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["relation", "M", "class", "size", "k0", "k_temperatures", "representative"])?;
    for rep in reports {
        for (i, c) in rep.classes.iter().enumerate() {
            w.write_record([
                rep.relation.clone(),
                rep.m.to_string(),
                i.to_string(),
                c.size.to_string(),
                c.k0.clone(),
                c.k_temperatures.join(" "),
                rows_of(c),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?)
}

#[derive(Serialize)]
struct Snapshot {
    step: usize,
    #[serde(rename = "move", skip_serializing_if = "Option::is_none")]
    mv: Option<MoveSpec>,
    vertices: usize,
    edges: u64,
    tau: Vec<i8>,
    k_temperatures: Vec<String>,
    k0: String,
}

#[derive(Serialize)]
struct MovesOutput {
    steps: Vec<Snapshot>,
    graph: Graph,
}

fn snapshot(step: usize, mv: Option<MoveSpec>, g: &Graph) -> Snapshot {
    let kt = k_temperature(g);
    Snapshot {
        step,
        mv,
        vertices: g.n(),
        edges: g.edge_count(),
        tau: kt.tau().to_vec(),
        k_temperatures: kt.labels().iter().map(|l| l.to_string()).collect(),
        k0: g.k0().to_string(),
    }
}

fn cmd_moves(cfg: &RunConfig, graph: &Path, script: &Path) -> Outcome {
    let mut g = read_graph(graph)?;
    let text = std::fs::read_to_string(script).map_err(|e| Failure(format!("{}: {e}", script.display())))?;
    let moves = MoveSpec::parse_script(&text).map_err(|e| Failure(format!("{}: {e}", script.display())))?;
    let mut steps = vec![snapshot(0, None, &g)];
    for (i, mv) in moves.into_iter().enumerate() {
        g = apply(&g, &mv).map_err(|e| Failure(format!("step {}: {e}", i + 1)))?;
        steps.push(snapshot(i + 1, Some(mv), &g));
    }
    let out = match cfg.format {
        Format::Json => json_out(cfg, &MovesOutput { steps, graph: g })?,
        Format::Dot => header(cfg, "//") + &to_dot(&k_temperature(&g)),
        Format::Csv => return Err(unsupported(cfg)),
        Format::Text => {
            let mut s = header(cfg, "#");
            for st in &steps {
                let mv = st.mv.as_ref().map(|m| m.to_string()).unwrap_or_else(|| "start".into());
                let _ = writeln!(
                    s,
                    "# {:>3} {:<20} n={} edges={} tau=({}) K-temp=({}) K0={}",
                    st.step,
                    mv,
                    st.vertices,
                    st.edges,
                    join(&st.tau, ","),
                    st.k_temperatures.join(", "),
                    st.k0
                );
            }
            s + &g.to_text()
        }
    };
    Ok((out, 0))
}

fn lens_params(n: Option<usize>, r: u64, m: &[u64]) -> Result<LensParams, Failure> {
    Ok(LensParams::new(n.unwrap_or(m.len()), r, m.to_vec())?)
}

#[derive(Serialize)]
struct LensOutput {
    params: LensParams,
    adjacency: Graph,
    k0: AbelianGroupInvariants,
    torsion_order: String,
    path_lemma: PathLemmaReport,
}

#[derive(Serialize)]
struct GridRow {
    m: Vec<u64>,
    class: usize,
}

fn cmd_lens(cfg: &RunConfig, n: Option<usize>, r: u64, m: &[u64], grid: bool) -> Outcome {
    if grid {
        let n = n.or((!m.is_empty()).then_some(m.len())).ok_or(Failure("--grid needs --n".into()))?;
        let rows: Vec<GridRow> =
            lens_grid(n, r)?.into_iter().map(|(p, class)| GridRow { m: p.m().to_vec(), class }).collect();
        let out = match cfg.format {
            Format::Json => json_out(cfg, &rows)?,
            Format::Dot => return Err(unsupported(cfg)),
            Format::Text | Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let mut head: Vec<String> = (1..=n).map(|i| format!("m{i}")).collect();
                head.push("class".into());
                w.write_record(&head)?;
                for row in &rows {
                    let mut rec: Vec<String> = row.m.iter().map(u64::to_string).collect();
                    rec.push(row.class.to_string());
                    w.write_record(&rec)?;
                }
                header(cfg, "#") + &String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?
            }
        };
        return Ok((out, 0));
    }
    let p = lens_params(n, r, m)?;
    let adjacency = lens_adjacency(&p)?;
    let k0 = adjacency.k0();
    let report = LensOutput {
        torsion_order: k0.torsion_order().to_string(),
        k0,
        path_lemma: check_path_lemma(&p),
        adjacency,
        params: p,
    };
    let out = match cfg.format {
        Format::Json => json_out(cfg, &report)?,
        Format::Text => {
            let mut s = header(cfg, "#");
            let _ = writeln!(s, "# K0 = cok((B•)^T): {}", report.k0);
            let _ = writeln!(
                s,
                "# torsion order: {} (r^(n-1) = {})",
                report.torsion_order,
                (r as u128).pow(report.params.n() as u32 - 1)
            );
            let pl = &report.path_lemma;
            let three = pl.three_step.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(s, "# path counts: 1-step {} 2-step {} 3-step {}", pl.one_step, pl.two_step, three);
            for f in &pl.failures {
                let _ = writeln!(s, "#   {f}");
            }
            s + &report.adjacency.to_text()
        }
        Format::Dot => header(cfg, "//") + &to_dot(&k_temperature(&report.adjacency)),
        Format::Csv => return Err(unsupported(cfg)),
    };
    Ok((out, 0))
}

fn cmd_lens_iso(cfg: &RunConfig, n: Option<usize>, r: u64, m: &[u64], other: &[u64]) -> Outcome {
    let (a, b) = (lens_params(n, r, m)?, lens_params(n, r, other)?);
    let v = lens_iso(&a, &b)?;
    verdict_out(cfg, &v)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = RunConfig::new(cli);
    match &cli.command {
        Command::Invariants { graph } => cmd_invariants(&cfg, graph),
        Command::Decide { left, right, relation, .. } => cmd_decide(&cfg, left, right, (*relation).into()),
        Command::Atlas { relation, .. } => cmd_atlas(&cfg, *relation),
        Command::Moves { graph, script } => cmd_moves(&cfg, graph, script),
        Command::Lens { n, r, m, grid } => cmd_lens(&cfg, *n, *r, m, *grid),
        Command::LensIso { n, r, m, other } => cmd_lens_iso(&cfg, *n, *r, m, other),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    match run(&cli) {
        Ok((out, code)) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::from(code)
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
