use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use topocode::crypto_protocols::{diff_transcripts, run_protocol, Material, ProtocolId};
use topocode::graph_core::{
    are_isomorphic, count_spanning_trees, nonisomorphic_trees, split_complete_even, split_complete_odd, ColoredGraph,
    Graph, TreeCountKind,
};
use topocode::group_algebra::{
    build_graphic_group, graphic_group_laws, group_compound, multiple_join_init, GroupIndex, JoinTranscript, Window,
};
use topocode::labeling_engine::{parse_budget, search, twin_shift, verify, ConstraintSpec, SearchConfig, SearchOutcome};
use topocode::string_algebra::{
    add, build_shift_group, complement, partition_strings, reverse, self_breed, sub, DigitString, GroupMode,
    PartitionMode, Ring,
};
use topocode::tables::{table1, table2};
use topocode::topcode::{pronbs_solve, string_from_topcode, topcode_from_graph, PermIndex, PronbsBounds, TopcodeMatrix};
use topocode::{Error, Exec};

const DEFAULT_PLAINTEXT: &str = "topological coding";

#[derive(Parser)]
#[command(name = "topocode", version, about = "Topological coding toolkit")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Digit-string algebra.
    #[command(subcommand)]
    String(StringCmd),
    /// Graph constructions and counts.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// W-constraint labelings.
    #[command(subcommand)]
    Label(LabelCmd),
    /// Topcode matrices and strings.
    #[command(subcommand)]
    Topcode(TopcodeCmd),
    /// Every-zero graphic groups.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Protocol simulations and transcripts.
    #[command(subcommand)]
    Proto(ProtoCmd),
    /// Reference tables.
    #[command(subcommand)]
    Tables(TablesCmd),
}

#[derive(Args)]
struct Seed {
    /// Seed for every random choice (falls back to TOPOCODE_SEED).
    #[arg(long, env = "TOPOCODE_SEED")]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum RingArg {
    Mod10,
    Mod9,
}

impl From<RingArg> for Ring {
    fn from(r: RingArg) -> Self {
        match r {
            RingArg::Mod10 => Ring::Mod10,
            RingArg::Mod9 => Ring::Mod9,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sum,
    Product,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupModeArg {
    AddSub,
    SubAdd,
}

#[derive(Subcommand)]
enum StringCmd {
    /// Digit-wise sum
    Add(BinArgs),
    /// Digit-wise difference
    Sub(BinArgs),
    /// Complement every digit
    Complement(UnArgs),
    /// Reverse the string
    Reverse(UnArgs),
    /// Element `i ⊕ j ⊖ zero` of the shift group generated from a seed string.
    Group {
        #[arg(long)]
        base: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        zero: usize,
        #[arg(long, value_enum, default_value = "add-sub")]
        mode: GroupModeArg,
    },
    /// Partition strings of an integer
    Partition {
        #[arg(long)]
        target: u64,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Self-breeding counts with seeded samples.
    Breed {
        /// Comma-separated strings.
        #[arg(long)]
        strings: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 5)]
        limit: usize,
        #[command(flatten)]
        seed: Seed,
    },
}

#[derive(Args)]
struct BinArgs {
    a: String,
    b: String,
    #[arg(long, value_enum, default_value = "mod10")]
    ring: RingArg,
}

#[derive(Args)]
struct UnArgs {
    s: String,
    #[arg(long, value_enum, default_value = "mod10")]
    ring: RingArg,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Split K_{2m} (or K_{2m+1} with --odd) into spanning trees.
    Split {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        odd: bool,
    },
    /// Count spanning trees by enumeration.
    Count {
        #[arg(long, conflicts_with = "bipartite")]
        complete: Option<usize>,
        /// `a,b`
        #[arg(long)]
        bipartite: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Non-isomorphic trees on n vertices.
    Trees {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
    },
    /// Render a JSON graph as DOT.
    Dot {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Test two JSON graphs for isomorphism
    Iso {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Subcommand)]
enum LabelCmd {
    /// Check a coloring against a constraint spec
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        spec: String,
    },
    /// Backtracking search for a labeling
    Search {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        spec: String,
        /// Node budget per branch, e.g. 500k or 2m.
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        sequential: bool,
    },
    /// Twin odd-graceful labeling of a set-ordered odd-graceful tree.
    Twin {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Row,
    Column,
}

#[derive(Subcommand)]
enum TopcodeCmd {
    /// Topcode matrix of a colored JSON graph
    FromGraph {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Read a Topcode matrix as a digit string
    String {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "row", conflicts_with = "sequence")]
        order: OrderArg,
        /// Explicit 0-based read order over the 3q cells, comma separated.
        #[arg(long)]
        sequence: Option<String>,
    },
    /// Rebuild graceful base colorings from a number string
    Pronbs {
        #[arg(long)]
        string: String,
        #[arg(long, default_value_t = 4)]
        max_q: usize,
        #[arg(long, default_value_t = 6)]
        max_color: i64,
        #[arg(long, default_value_t = 3)]
        max_k: i64,
        #[arg(long, default_value_t = 2)]
        max_d: i64,
        #[arg(long)]
        set_ordered: bool,
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct WindowArgs {
    /// Single modulus for vertices and edges.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    m: Option<u64>,
    #[arg(long, requires = "q")]
    p: Option<u64>,
    #[arg(long, requires = "p")]
    q: Option<u64>,
}

impl WindowArgs {
    fn window(&self) -> Result<Window, Error> {
        match (self.m, self.p, self.q) {
            (Some(m), _, _) => Ok(Window::Single { m }),
            (None, Some(p), Some(q)) => Ok(Window::Pair { p, q }),
            _ => Err(Error::InvalidParam("give --m or both --p and --q".into())),
        }
    }
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Materialize one group element
    Element {
        #[arg(long)]
        base: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        /// `t` or `(s,k)`.
        #[arg(long)]
        index: String,
    },
    /// Check the every-zero group laws
    Laws {
        #[arg(long)]
        base: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Graphic, matrix and string views of one group
    Compound {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        m: u64,
    },
    /// Grow a network by MULTIPLE-JOIN from a host graph.
    Join {
        #[arg(long)]
        host: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value = "0")]
        zero: String,
        /// Number of new vertices; each attaches to the previous two.
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[command(flatten)]
        seed: Seed,
    },
    /// Re-execute a MULTIPLE-JOIN transcript.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProtoCmd {
    /// List protocol ids
    List,
    /// Run a protocol and print its transcript
    Run {
        #[arg(long, value_parser = parse_id)]
        id: ProtocolId,
        #[command(flatten)]
        seed: Seed,
        #[arg(long, conflicts_with = "plaintext_file")]
        plaintext: Option<String>,
        #[arg(long)]
        plaintext_file: Option<PathBuf>,
        /// Replace one key component by its canonical corruption.
        #[arg(long)]
        corrupt: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the protocol a transcript names and compare line by line.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long, conflicts_with = "plaintext_file")]
        plaintext: Option<String>,
        #[arg(long)]
        plaintext_file: Option<PathBuf>,
    },
    /// Compare two transcripts line by line
    Diff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichTable {
    Table1,
    Table2,
}

#[derive(Subcommand)]
enum TablesCmd {
    /// Recompute a reference table
    Reproduce {
        #[arg(long, value_enum)]
        which: WhichTable,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// A failed operation: message on stderr, exit status 1.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(format!("json: {e}"))
    }
}

type Out = Result<String, Failure>;

fn json<T: Serialize>(v: &T) -> Out {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", p.display())))
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::Auto
    }
}

/// Run `f` on a worker; `None` when the wall-clock limit passes first.
fn with_timeout<T: Send + 'static>(secs: Option<f64>, f: impl FnOnce() -> T + Send + 'static) -> Result<Option<T>, Failure> {
    let Some(secs) = secs else { return Ok(Some(f())) };
    if !(secs > 0.0 && secs.is_finite()) {
        return Err(Failure("--timeout must be a positive number of seconds".into()));
    }
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(f());
    });
    Ok(rx.recv_timeout(Duration::from_secs_f64(secs)).ok())
}

fn plaintext(text: Option<String>, file: Option<PathBuf>) -> Result<Vec<u8>, Failure> {
    match (text, file) {
        (_, Some(p)) => Ok(fs::read(p)?),
        (Some(t), None) => Ok(t.into_bytes()),
        (None, None) => Ok(DEFAULT_PLAINTEXT.as_bytes().to_vec()),
    }
}

fn run_string(cmd: StringCmd) -> Out {
    match cmd {
        StringCmd::Add(b) => {
            let r = b.ring.into();
            Ok(format!("{}\n", add(&DigitString::parse(&b.a, r)?, &DigitString::parse(&b.b, r)?)?))
        }
        StringCmd::Sub(b) => {
            let r = b.ring.into();
            Ok(format!("{}\n", sub(&DigitString::parse(&b.a, r)?, &DigitString::parse(&b.b, r)?)?))
        }
        StringCmd::Complement(u) => Ok(format!("{}\n", complement(&DigitString::parse(&u.s, u.ring.into())?))),
        StringCmd::Reverse(u) => Ok(format!("{}\n", reverse(&DigitString::parse(&u.s, u.ring.into())?))),
        StringCmd::Group { base, k, m, i, j, zero, mode } => {
            let g = build_shift_group(&DigitString::parse(&base, Ring::Mod10)?, k, m, None, None)?;
            let mode = match mode {
                GroupModeArg::AddSub => GroupMode::AddSub,
                GroupModeArg::SubAdd => GroupMode::SubAdd,
            };
            Ok(format!("{}\n", g.compute(i, j, zero, mode)?))
        }
        StringCmd::Partition { target, mode, limit } => {
            let mode = match mode {
                ModeArg::Sum => PartitionMode::Sum,
                ModeArg::Product => PartitionMode::Product,
            };
            let mut out = String::new();
            for (spec, s) in partition_strings(target, mode, Some(limit))? {
                let parts: Vec<String> = spec.parts.iter().map(u64::to_string).collect();
                out += &format!("{} {}\n", parts.join(","), s);
            }
            Ok(out)
        }
        StringCmd::Breed { strings, depth, limit, seed } => {
            let set = strings
                .split(',')
                .map(|s| DigitString::parse(s.trim(), Ring::Mod10))
                .collect::<Result<Vec<_>, _>>()?;
            json(&self_breed(&set, depth, limit, seed.seed)?)
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), Failure> {
    let (a, b) = s.split_once(',').ok_or_else(|| Failure(format!("expected a,b but got {s:?}")))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| Failure(format!("{x:?}: {e}")));
    Ok((p(a)?, p(b)?))
}

fn run_graph(cmd: GraphCmd) -> Out {
    match cmd {
        GraphCmd::Split { m, odd: false } => json(&split_complete_even(m)?),
        GraphCmd::Split { m, odd: true } => json(&split_complete_odd(m)?),
        GraphCmd::Count { complete, bipartite, sequential } => {
            let kind = match (complete, bipartite) {
                (Some(n), None) => TreeCountKind::Complete(n),
                (None, Some(ab)) => {
                    let (a, b) = parse_pair(&ab)?;
                    TreeCountKind::Bipartite(a, b)
                }
                _ => return Err(Failure("give --complete or --bipartite".into())),
            };
            let c = count_spanning_trees(kind, 0, exec(sequential))?;
            json(&serde_json::json!({ "count": c.count, "formula": c.formula }))
        }
        GraphCmd::Trees { n, list } => {
            let trees = nonisomorphic_trees(n)?;
            if list {
                json(&trees)
            } else {
                Ok(format!("{}\n", trees.len()))
            }
        }
        GraphCmd::Dot { graph } => {
            let g: ColoredGraph = match read_json::<ColoredGraph>(&graph) {
                Ok(g) => g,
                Err(_) => {
                    let g: Graph = read_json(&graph)?;
                    let n = g.n();
                    ColoredGraph::new(g, (0..n as i64).collect(), None)?
                }
            };
            Ok(g.graph.to_dot(Some(&g.vcolors), g.ecolors.as_deref()))
        }
        GraphCmd::Iso { a, b } => {
            let (a, b): (Graph, Graph) = (read_json(&a)?, read_json(&b)?);
            Ok(format!("{}\n", are_isomorphic(&a, &b)?))
        }
    }
}

#[derive(Serialize)]
struct SearchReport {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    coloring: Option<ColoredGraph>,
}

fn run_label(cmd: LabelCmd) -> Out {
    match cmd {
        LabelCmd::Verify { graph, spec } => {
            let g: ColoredGraph = read_json(&graph)?;
            let spec: ConstraintSpec = spec.parse()?;
            let rep = verify(&g, &spec)?;
            let text = json(&rep)?;
            if rep.pass {
                Ok(text)
            } else {
                print!("{text}");
                Err(Failure("coloring violates the constraint".into()))
            }
        }
        LabelCmd::Search { graph, spec, budget, timeout, sequential } => {
            let g: Graph = read_json(&graph)?;
            let spec: ConstraintSpec = spec.parse()?;
            let mut cfg = SearchConfig { exec: exec(sequential), ..SearchConfig::default() };
            if let Some(b) = budget {
                cfg.budget = parse_budget(&b)?;
            }
            let report = match with_timeout(timeout, move || search(&g, &spec, &cfg))? {
                None => SearchReport { status: "timeout", coloring: None },
                Some(r) => match r? {
                    SearchOutcome::Found(c) => SearchReport { status: "found", coloring: Some(c) },
                    SearchOutcome::Exhausted => SearchReport { status: "exhausted", coloring: None },
                    SearchOutcome::BudgetExhausted => SearchReport { status: "budget-exhausted", coloring: None },
                },
            };
            let text = json(&report)?;
            if report.coloring.is_some() {
                Ok(text)
            } else {
                print!("{text}");
                Err(Failure(format!("no labeling found ({})", report.status)))
            }
        }
        LabelCmd::Twin { graph } => json(&twin_shift(&read_json(&graph)?)?),
    }
}

fn run_topcode(cmd: TopcodeCmd) -> Out {
    match cmd {
        TopcodeCmd::FromGraph { graph } => {
            let g: ColoredGraph = read_json(&graph)?;
            json(&topcode_from_graph(&g, None)?)
        }
        TopcodeCmd::String { matrix, order, sequence } => {
            let t: TopcodeMatrix = read_json(&matrix)?;
            let perm = match sequence {
                Some(s) => PermIndex::from_sequence(
                    s.split(',')
                        .map(|x| x.trim().parse::<usize>().map_err(|e| Failure(format!("{x:?}: {e}"))))
                        .collect::<Result<_, _>>()?,
                )?,
                None => match order {
                    OrderArg::Row => PermIndex::row_major(t.q()),
                    OrderArg::Column => PermIndex::column_major(t.q()),
                },
            };
            Ok(format!("{}\n", string_from_topcode(&t, &perm)?))
        }
        TopcodeCmd::Pronbs { string, max_q, max_color, max_k, max_d, set_ordered, timeout, sequential } => {
            let s = DigitString::parse(&string, Ring::Mod10)?;
            let bounds = PronbsBounds { max_q, max_color, max_k, max_d, set_ordered };
            let ex = exec(sequential);
            match with_timeout(timeout, move || pronbs_solve(&s, &bounds, ex))? {
                None => {
                    print!("{}", json(&serde_json::json!({ "status": "timeout" }))?);
                    Err(Failure("PRONBS timed out".into()))
                }
                Some(r) => {
                    let c = r?;
                    let status = if c.is_empty() { "exhausted" } else { "found" };
                    json(&serde_json::json!({ "status": status, "candidates": c }))
                }
            }
        }
    }
}

fn run_group(cmd: GroupCmd) -> Out {
    match cmd {
        GroupCmd::Element { base, window, index } => {
            let g = build_graphic_group(&read_json(&base)?, window.window()?)?;
            let i: GroupIndex = index.parse()?;
            json(&g.element(i)?)
        }
        GroupCmd::Laws { base, window } => {
            let g = build_graphic_group(&read_json(&base)?, window.window()?)?;
            let rep = graphic_group_laws(&g)?;
            let text = json(&rep)?;
            if rep.all() {
                Ok(text)
            } else {
                print!("{text}");
                Err(Failure("group laws fail".into()))
            }
        }
        GroupCmd::Compound { base, m } => {
            let g: ColoredGraph = read_json(&base)?;
            let c = group_compound(&g, m, &PermIndex::row_major(g.graph.q()))?;
            let strings: Vec<String> = c.strings.iter().map(ToString::to_string).collect();
            json(&serde_json::json!({ "order": c.order(), "strings": strings, "index_law": c.verify_index_law()? }))
        }
        GroupCmd::Join { host, window, zero, steps, seed } => {
            let host: Graph = read_json(&host)?;
            let zero: GroupIndex = zero.parse()?;
            let mut t = multiple_join_init(&host, window.window()?, zero, seed.seed)?;
            let mut cur = t.initial.clone();
            for _ in 0..steps {
                let n = cur.host.n();
                let attach: Vec<usize> = if n >= 2 { vec![n - 2, n - 1] } else { vec![n - 1] };
                cur = t.grow(&cur, &attach, zero)?;
            }
            json(&t)
        }
        GroupCmd::Replay { transcript } => {
            let t: JoinTranscript = read_json(&transcript)?;
            let g = t.replay()?;
            if !g.verify() {
                return Err(Failure("replayed network violates its group coloring".into()));
            }
            json(&g)
        }
    }
}

fn parse_id(s: &str) -> Result<ProtocolId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `(id, seed)` from a transcript's closing line.
fn transcript_header(text: &str) -> Result<(ProtocolId, u64), Failure> {
    let last = text.lines().last().ok_or_else(|| Failure("empty transcript".into()))?;
    let v: serde_json::Value = serde_json::from_str(last)?;
    let id: ProtocolId = v["actor"].as_str().unwrap_or_default().parse()?;
    let seed = v["action"]
        .as_str()
        .and_then(|a| a.rsplit_once("seed="))
        .and_then(|(_, s)| s.parse().ok())
        .ok_or_else(|| Failure("transcript has no seed".into()))?;
    Ok((id, seed))
}

fn run_proto(cmd: ProtoCmd) -> Out {
    match cmd {
        ProtoCmd::List => Ok(ProtocolId::ALL.iter().map(|p| format!("{p}\n")).collect()),
        ProtoCmd::Run { id, seed, plaintext: pt, plaintext_file, corrupt, out } => {
            let mut m = Material::generate(id, seed.seed, &plaintext(pt, plaintext_file)?, None)?;
            if let Some(c) = corrupt {
                m = m.corrupt(&c)?;
            }
            let run = run_protocol(id, &m, seed.seed);
            let lines = run.transcript.to_json_lines();
            if let Some(p) = out {
                fs::write(p, &lines)?;
            }
            if run.transcript.verdict {
                Ok(lines)
            } else {
                print!("{lines}");
                Err(Failure(format!(
                    "failed at {}: {}",
                    run.transcript.failed_step.unwrap_or_default(),
                    run.transcript.reason.unwrap_or_default()
                )))
            }
        }
        ProtoCmd::Replay { transcript, plaintext: pt, plaintext_file } => {
            let old = fs::read_to_string(&transcript)?;
            let (id, seed) = transcript_header(&old)?;
            let m = Material::generate(id, seed, &plaintext(pt, plaintext_file)?, None)?;
            let new = run_protocol(id, &m, seed).transcript.to_json_lines();
            let d = diff_transcripts(&old, &new);
            if d.is_empty() {
                Ok(format!("replay identical: {id} seed={seed}\n"))
            } else {
                Err(Failure(format!("replay differs at lines {d:?}")))
            }
        }
        ProtoCmd::Diff { a, b } => {
            let d = diff_transcripts(&fs::read_to_string(a)?, &fs::read_to_string(b)?);
            if d.is_empty() {
                Ok("identical\n".into())
            } else {
                Err(Failure(format!("transcripts differ at lines {d:?}")))
            }
        }
    }
}

fn run_tables(cmd: TablesCmd) -> Out {
    let TablesCmd::Reproduce { which, out, json: as_json } = cmd;
    let t = match which {
        WhichTable::Table1 => table1(),
        WhichTable::Table2 => table2(),
    };
    for n in &t.notes {
        eprintln!("note: {n}");
    }
    let text = if as_json { json(&t)? } else { t.render() };
    match out {
        Some(p) => {
            fs::write(&p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.verb {
        Verb::String(c) => run_string(c),
        Verb::Graph(c) => run_graph(c),
        Verb::Label(c) => run_label(c),
        Verb::Topcode(c) => run_topcode(c),
        Verb::Group(c) => run_group(c),
        Verb::Proto(c) => run_proto(c),
        Verb::Tables(c) => run_tables(c),
    };
    match res {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
