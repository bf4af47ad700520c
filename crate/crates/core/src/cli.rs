//! The `fink` command line.
//!
//! Every run prints one JSON document `{command, inputs, result}` (or
//! `{command, inputs, error}`), plus `stats` when `--stats` is given. Without
//! `--stats` the output depends only on the inputs, whatever `--workers` is.

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::block::BlockSeq;
use crate::dense::{closure_search, density_check, lemma4_witness, FamilyOracle};
use crate::dsl::ColoringExpr;
use crate::error::Error;
use crate::fin::{CombPair, FinFn};
use crate::selftest;
use crate::theorem::{derive_membership, find_mono, finite_gowers_holds, gowers_number, GowersInstance, SearchMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fink", version, about = "Exact combinatorics for FIN_k block sequences")]
struct Cli {
    /// Worker threads for search subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write the document to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Include timing and node counts (not reproducible).
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BlockArgs {
    #[arg(long)]
    k: u32,
    /// Comma-separated FinFn literals, e.g. "[[0,1]],[[1,1]]".
    #[arg(long, conflicts_with = "std", required_unless_present = "std")]
    gens: Option<String>,
    /// Use the first N standard generators e_0..e_{N-1} instead of --gens.
    #[arg(long = "std")]
    std: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FamilyArgs {
    /// Built-in family: all, empty, even-weight, k-at-min.
    #[arg(long, conflicts_with = "coloring", required_unless_present = "coloring")]
    family: Option<String>,
    /// Coloring expression; the family is the class of --color under it mod --r.
    #[arg(long, requires_all = ["r", "color"])]
    coloring: Option<String>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    color: Option<u32>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", rename_all_fields = "kebab-case")]
enum Command {
    /// Enumerate ⟨B⟩ in canonical order.
    Span {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Θ_B(code).
    Encode {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[arg(long)]
        code: String,
    },
    /// The code of an element of ⟨B⟩.
    Decode {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[arg(long)]
        elem: String,
    },
    /// T_B p for p ∈ ⟨TB⟩.
    Lift {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[arg(long)]
        elem: String,
    },
    /// Bounded density check over length-L block subsequences.
    Density {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        #[serde(flatten)]
        family: FamilyArgs,
        #[arg(long = "L")]
        len: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Pair-splitting witness (p, q) with T^i p + T^j q ∈ F.
    Lemma4 {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        #[serde(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        i: u32,
        #[arg(long)]
        j: u32,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// First length-L block subsequence over which F is (i,j)-closed.
    ClosureSearch {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        #[serde(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        i: u32,
        #[arg(long)]
        j: u32,
        #[arg(long = "L")]
        len: usize,
    },
    /// Derivation trace of p ∈ ⟨B⟩ inside F.
    Derive {
        #[command(flatten)]
        #[serde(flatten)]
        block: BlockArgs,
        #[command(flatten)]
        #[serde(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        elem: String,
        /// Skip checking B ⊆ F and the Comb_k closures.
        #[arg(long)]
        assume_closed: bool,
    },
    /// Decide a finite Gowers instance over FIN_k([n]).
    FiniteGowers {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "pruned")]
        mode: String,
        /// Color increasing d-tuples instead of elements.
        #[arg(long)]
        tuples: bool,
        #[arg(long, default_value_t = 1 << 32)]
        cap: u64,
    },
    /// Least n ≤ n-max for which the finite instance holds.
    GowersNumber {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        tuples: bool,
    },
    /// First block sequence in FIN_k([n]) with a monochromatic span.
    FindMono {
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// Parse a coloring expression and print its canonical form.
    ParseColoring { expr: String },
    /// Run the seeded property suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Only suites whose name contains this text.
        #[arg(long)]
        only: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Span { .. } => "span",
            Command::Encode { .. } => "encode",
            Command::Decode { .. } => "decode",
            Command::Lift { .. } => "lift",
            Command::Density { .. } => "density",
            Command::Lemma4 { .. } => "lemma4",
            Command::ClosureSearch { .. } => "closure-search",
            Command::Derive { .. } => "derive",
            Command::FiniteGowers { .. } => "finite-gowers",
            Command::GowersNumber { .. } => "gowers-number",
            Command::FindMono { .. } => "find-mono",
            Command::ParseColoring { .. } => "parse-coloring",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn parse_fin(text: &str) -> crate::Result<FinFn> {
    text.trim().parse()
}

impl BlockArgs {
    fn build(&self) -> crate::Result<BlockSeq> {
        match (&self.gens, self.std) {
            (_, Some(n)) => BlockSeq::standard(n, self.k),
            (Some(text), None) => {
                let elems: Vec<FinFn> = serde_json::from_str(&format!("[{text}]"))
                    .map_err(|e| Error::Literal(format!("--gens: {e}")))?;
                BlockSeq::new(elems, self.k)
            }
            (None, None) => Err(Error::Invalid("one of --gens or --std is required".into())),
        }
    }
}

impl FamilyArgs {
    fn build(&self, k: u32) -> crate::Result<FamilyOracle> {
        match (&self.family, &self.coloring) {
            (Some(name), _) => FamilyOracle::builtin(name, k),
            (None, Some(text)) => {
                let expr = ColoringExpr::parse(text)?;
                let r = self.r.ok_or_else(|| Error::Invalid("--coloring needs --r".into()))?;
                let color = self.color.ok_or_else(|| Error::Invalid("--coloring needs --color".into()))?;
                if r == 0 || color >= r {
                    return Err(Error::Invalid(format!("need 0 ≤ color < r, got color {color}, r {r}")));
                }
                let description = format!("{{p : ({expr}) mod {r} = {color}}}");
                Ok(FamilyOracle::new(description, move |p| expr.color(p, r).is_ok_and(|c| c == color)))
            }
            (None, None) => Err(Error::Invalid("one of --family or --coloring is required".into())),
        }
    }
}

/// A finished command: the `result` field and an optional node count.
struct Outcome {
    result: Value,
    nodes: Option<u64>,
    exit: i32,
}

impl Outcome {
    fn ok(result: impl Serialize) -> crate::Result<Self> {
        Ok(Outcome { result: to_value(result), nodes: None, exit: EXIT_OK })
    }
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("output types serialize")
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CapExceeded(_) | Error::Exhausted(_) | Error::BudgetExhausted(_) => EXIT_INCONCLUSIVE,
        Error::Verification(_) => EXIT_VERIFICATION,
        _ => EXIT_USAGE,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match exit_code(err) {
        EXIT_INCONCLUSIVE => "inconclusive",
        EXIT_VERIFICATION => "verification",
        _ => "invalid-input",
    }
}

fn dispatch(command: &Command) -> crate::Result<Outcome> {
    match command {
        Command::Span { block, cap } => {
            let b = block.build()?;
            let size = b.span_len();
            if size > u128::from(*cap) {
                return Err(Error::CapExceeded(*cap));
            }
            Outcome::ok(json!({ "block": b, "size": size as u64, "elements": b.span() }))
        }
        Command::Encode { block, code } => {
            let b = block.build()?;
            let code = parse_fin(code)?;
            Outcome::ok(json!({ "code": code, "element": b.encode(&code)? }))
        }
        Command::Decode { block, elem } => {
            let b = block.build()?;
            let p = parse_fin(elem)?;
            Outcome::ok(json!({ "element": p, "code": b.decode(&p)? }))
        }
        Command::Lift { block, elem } => {
            let b = block.build()?;
            let p = parse_fin(elem)?;
            Outcome::ok(json!({ "element": p, "lift": b.lift(&p)? }))
        }
        Command::Density { block, family, len, d, cap } => {
            let b = block.build()?;
            let f = family.build(b.k())?;
            let report = density_check(&f, &b, *len, *d, *cap)?;
            let nodes = report.subsequences_checked;
            Ok(Outcome { result: to_value(report), nodes: Some(nodes), exit: EXIT_OK })
        }
        Command::Lemma4 { block, family, i, j, budget } => {
            let c = block.build()?;
            let f = family.build(c.k())?;
            let w = lemma4_witness(&f, &c, CombPair::new(*i, *j, c.k())?, *budget)?;
            let nodes = w.candidates_scanned;
            Ok(Outcome { result: to_value(w), nodes: Some(nodes), exit: EXIT_OK })
        }
        Command::ClosureSearch { block, family, i, j, len } => {
            let b = block.build()?;
            let f = family.build(b.k())?;
            let c = closure_search(&f, &b, CombPair::new(*i, *j, b.k())?, *len)?;
            Outcome::ok(json!({ "subsequence": c }))
        }
        Command::Derive { block, family, elem, assume_closed } => {
            let b = block.build()?;
            let f = family.build(b.k())?;
            let p = parse_fin(elem)?;
            let trace = derive_membership(&f, &b, &p, !assume_closed)?;
            trace.replay(&b)?;
            Outcome::ok(trace)
        }
        Command::FiniteGowers { k, d, r, n, mode, tuples, cap } => {
            let inst = GowersInstance { k: *k, d: *d, r: *r, n: *n, tuples: *tuples };
            let out = finite_gowers_holds(&inst, mode.parse::<SearchMode>()?, *cap)?;
            let nodes = out.nodes_visited;
            Ok(Outcome { result: to_value(out), nodes: Some(nodes), exit: EXIT_OK })
        }
        Command::GowersNumber { k, d, r, n_max, tuples } => {
            let g = gowers_number(*k, *d, *r, *n_max, *tuples)?;
            let nodes = g.nodes_visited;
            let result = match g.least {
                Some(n) => json!({ "value": n, "n_max": g.n_max, "next_checked": g.next_checked }),
                None => json!({ "value": null, "n_max": g.n_max, "unknown_beyond": g.n_max }),
            };
            Ok(Outcome { result, nodes: Some(nodes), exit: EXIT_OK })
        }
        Command::FindMono { coloring, r, k, d, n } => {
            let expr = ColoringExpr::parse(coloring)?;
            let found = find_mono(&expr, *r, *k, *d, *n)?;
            Outcome::ok(match found {
                Some((b, color)) => json!({ "found": true, "block": b, "color": color }),
                None => json!({ "found": false }),
            })
        }
        Command::ParseColoring { expr } => {
            let e = ColoringExpr::parse(expr)?;
            Outcome::ok(json!({ "canonical": e.to_string(), "ast": e.tree() }))
        }
        Command::Selftest { seed, cases, only } => {
            let report = selftest::run(*seed, *cases, only.as_deref());
            let exit = if report.passed { EXIT_OK } else { EXIT_VERIFICATION };
            Ok(Outcome { result: to_value(report), nodes: None, exit })
        }
    }
}

/// The parsed flags of the subcommand, without the global ones.
fn inputs(command: &Command) -> Value {
    match to_value(command) {
        Value::Object(mut tagged) => tagged.remove(command.name()).unwrap_or(Value::Null),
        other => other,
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code together with the text that was (or would be) printed.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    if cli.workers == 0 {
        return (EXIT_USAGE, "error: --workers must be at least 1\n".into());
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(pool) => pool,
        Err(e) => return (EXIT_USAGE, format!("error: cannot start worker pool: {e}\n")),
    };

    let started = Instant::now();
    let outcome = pool.install(|| dispatch(&cli.command));
    let elapsed_ms = started.elapsed().as_millis() as u64;

    let mut doc = json!({ "command": cli.command.name(), "inputs": inputs(&cli.command) });
    let (exit, nodes) = match outcome {
        Ok(o) => {
            doc["result"] = o.result;
            (o.exit, o.nodes)
        }
        Err(e) => {
            log::debug!("{} failed: {e}", cli.command.name());
            doc["error"] = json!({ "kind": error_kind(&e), "message": e.to_string() });
            (exit_code(&e), None)
        }
    };
    if cli.stats {
        doc["stats"] = json!({ "elapsed_ms": elapsed_ms, "nodes_visited": nodes });
    }
    let mut text = serde_json::to_string(&doc).expect("JSON values serialize");
    text.push('\n');

    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &text) {
            return (EXIT_USAGE, format!("error: cannot write {}: {e}\n", path.display()));
        }
        return (exit, String::new());
    }
    (exit, text)
}
