//! The `zslab` command line.
//!
//! Exit status: 0 on success, 1 when a verification or claim check fails,
//! 2 on usage and parse errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::engine;
use crate::enumeration::{self, RunOptions, DESK_SCALE_MAX_N};
use crate::extremal::{self, FamilyInstance};
use crate::report::VerificationReport;
use crate::separability::{self, is_long, mult_stats, Decomposition};
use crate::zn::ZnSeq;
use crate::Error;

pub const OUTPUT_SCHEMA: &str = "zslab/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "zslab", version, about = "Zero-sum sequences in Z_n: checks, splits, families, sweeps")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Sequence literal, e.g. "n=4: 0^3 1^3".
    #[arg(conflicts_with = "input", required_unless_present = "input")]
    pub seq: Option<String>,

    /// File with one sequence per line.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero-sum verdicts, multiplicity profile and split for a sequence.
    Check(Input),
    /// Find a split α ∪ β of the sequence up to an affine map.
    Decompose {
        #[command(flatten)]
        input: Input,
        /// Use the constructive route (long n-zero-free sequences only).
        #[arg(long)]
        proof: bool,
        /// Prefer the split with mult(1) <= mult(0).
        #[arg(long)]
        normalize: bool,
    },
    /// Run an exhaustive sweep and write its report.
    Verify {
        #[arg(value_enum)]
        task: VerifyTask,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Number of shards to split the sweep into.
        #[arg(long, default_value_t = 1)]
        shards: usize,
        /// Run only this shard (0-based) and emit a partial report.
        #[arg(long)]
        shard: Option<usize>,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "ZSLAB_JOBS", default_value_t = 0)]
        jobs: usize,
        /// Allow n above the desk-scale limit.
        #[arg(long)]
        allow_large: bool,
    },
    /// Emit a member of a named family.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        /// Confirm the family's claims with the engine.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTask {
    Characterization,
    Multiplicities,
    Gnk,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    EqualityUv,
    MinMaxMult,
    Boundary,
    GnkLower,
}

/// What a command produced: text, a JSON result, and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub status: i32,
}

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub status: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            status: EXIT_USAGE,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Consistency(_) => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        CliError {
            message: e.to_string(),
            status,
        }
    }
}

fn read_inputs(input: &Input) -> Result<Vec<ZnSeq>, CliError> {
    if let Some(s) = &input.seq {
        return Ok(vec![s.parse()?]);
    }
    let path = input.input.as_ref().expect("clap enforces one input source");
    let body = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let seqs = body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect::<Result<Vec<ZnSeq>, _>>()?;
    if seqs.is_empty() {
        return Err(CliError::usage(format!("{} holds no sequences", path.display())));
    }
    Ok(seqs)
}

#[derive(Serialize)]
struct SplitRecord<'a> {
    map: MapRecord,
    alpha: &'a ZnSeq,
    beta: &'a ZnSeq,
    l_alpha: usize,
    l_one_minus_beta: usize,
    verified: bool,
}

#[derive(Serialize)]
struct MapRecord {
    a: usize,
    b: usize,
}

fn split_record<'a>(d: &'a Decomposition, original: &ZnSeq) -> SplitRecord<'a> {
    let (la, lb) = d.costs();
    SplitRecord {
        map: MapRecord {
            a: d.map.a(),
            b: d.map.b(),
        },
        alpha: &d.alpha,
        beta: &d.beta,
        l_alpha: la,
        l_one_minus_beta: lb,
        verified: d.validate(original).is_ok(),
    }
}

fn split_text(d: &Decomposition) -> String {
    let (la, lb) = d.costs();
    format!(
        "map {}\n  alpha: {}\n  beta:  {}\n  L(alpha) = {la} < {n}, L(1-beta) = {lb} < {n}",
        d.map,
        d.alpha,
        d.beta,
        n = d.modulus()
    )
}

fn check_one(s: &ZnSeq) -> (String, Value) {
    let n = s.modulus();
    let nzs = engine::n_zero_sum_witness(s);
    let zs = engine::shortest_zero_subsequence(s);
    let stats = mult_stats(s);
    let mut text = String::new();
    let _ = writeln!(text, "{s}");
    let _ = writeln!(text, "  length {}", s.len());
    match &nzs {
        None => {
            let _ = writeln!(text, "  n-zero-free: true");
        }
        Some(w) => {
            let _ = writeln!(text, "  n-zero-free: false (witness {})", w.subsequence);
        }
    }
    match &zs {
        None => {
            let _ = writeln!(text, "  zero-free: true");
        }
        Some(w) => {
            let _ = writeln!(text, "  zero-free: false (witness {})", w.subsequence);
        }
    }
    let _ = writeln!(
        text,
        "  u={} v={} top1={} top2sum={} k={}",
        stats.u, stats.v, stats.top1, stats.top2sum, stats.k
    );
    let mut separability = Value::Null;
    if is_long(s.len(), n) {
        match separability::is_separable(s) {
            Some(d) => {
                let _ = writeln!(text, "  separable: true");
                for line in split_text(&d).lines() {
                    let _ = writeln!(text, "  {line}");
                }
                separability = json!({"separable": true, "split": split_record(&d, s)});
            }
            None => {
                let _ = writeln!(text, "  separable: false");
                separability = json!({"separable": false});
            }
        }
    }
    let json = json!({
        "seq": s,
        "length": s.len(),
        "n_zero_free": nzs.is_none(),
        "n_zero_sum_witness": nzs.map(|w| w.subsequence),
        "zero_free": zs.is_none(),
        "zero_sum_witness": zs.map(|w| w.subsequence),
        "mult_stats": stats,
        "separability": separability,
    });
    (text, json)
}

fn cmd_check(input: &Input) -> Result<Outcome, CliError> {
    let seqs = read_inputs(input)?;
    let (texts, results): (Vec<String>, Vec<Value>) = seqs.iter().map(check_one).unzip();
    Ok(Outcome {
        text: texts.join("\n"),
        json: json!({"results": results}),
        status: EXIT_OK,
    })
}

fn cmd_decompose(input: &Input, proof: bool, normalize: bool) -> Result<Outcome, CliError> {
    let seqs = read_inputs(input)?;
    let mut texts = Vec::new();
    let mut results = Vec::new();
    for s in &seqs {
        let found = if proof {
            Some(separability::decompose_via_proof(s)?)
        } else {
            separability::is_separable(s)
        };
        let found = found.map(|d| if normalize { d.normalized() } else { d });
        match &found {
            Some(d) => {
                texts.push(format!("{s}\n{}", split_text(d)));
                results.push(json!({"seq": s, "separable": true, "split": split_record(d, s)}));
            }
            None => {
                texts.push(format!("{s}\nnot separable (searched the full affine orbit)"));
                results.push(json!({"seq": s, "separable": false}));
            }
        }
    }
    Ok(Outcome {
        text: texts.join("\n"),
        json: json!({"route": if proof { "constructive" } else { "orbit-search" }, "results": results}),
        status: EXIT_OK,
    })
}

fn require_k(k: Option<usize>, what: &str) -> Result<usize, CliError> {
    k.ok_or_else(|| CliError::usage(format!("{what} needs --k")))
}

pub fn run_verify(
    task: VerifyTask,
    n: usize,
    k: Option<usize>,
    opts: &RunOptions,
) -> Result<VerificationReport, CliError> {
    let report = match task {
        VerifyTask::Characterization => enumeration::verify_characterization(n, opts)?,
        VerifyTask::Multiplicities => {
            enumeration::min_multiplicities(n, require_k(k, "multiplicities")?, opts)?
        }
        VerifyTask::Gnk => enumeration::verify_gnk(n, opts)?,
        VerifyTask::Boundary => enumeration::boundary_survey(n, opts)?,
    };
    Ok(report)
}

fn cmd_gen(
    family: FamilyArg,
    n: usize,
    k: Option<usize>,
    p: Option<usize>,
    q: Option<usize>,
    check: bool,
) -> Result<Outcome, CliError> {
    let need = |x: Option<usize>, flag: &str| {
        x.ok_or_else(|| CliError::usage(format!("family {family:?} needs --{flag}")))
    };
    let inst: FamilyInstance = match family {
        FamilyArg::EqualityUv => {
            extremal::gen_equality_uv(n, need(k, "k")?, need(p, "p")?, need(q, "q")?)?
        }
        FamilyArg::MinMaxMult => extremal::gen_min_max_mult(n, need(k, "k")?)?,
        FamilyArg::Boundary => extremal::gen_boundary_counterexample(n)?,
        FamilyArg::GnkLower => extremal::gen_gnk_lower_bound(n, need(k, "k")?)?,
    };
    let mut text = format!("{}\n", inst.seq);
    let mut status = EXIT_OK;
    let mut checks = Value::Null;
    if check {
        let results = inst.check_claims();
        for c in &results {
            let _ = writeln!(
                text,
                "  [{}] {}: claimed {}, observed {}",
                if c.pass { "ok" } else { "FAIL" },
                c.claim,
                c.expected,
                c.observed
            );
        }
        if results.iter().any(|c| !c.pass) {
            status = EXIT_FAILED;
        }
        checks = serde_json::to_value(&results).expect("serializable");
    }
    Ok(Outcome {
        text,
        json: json!({"instance": inst, "checks": checks}),
        status,
    })
}

/// Execute a parsed command.
pub fn execute(cfg: &CliConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Check(input) => cmd_check(input),
        Command::Decompose {
            input,
            proof,
            normalize,
        } => cmd_decompose(input, *proof, *normalize),
        Command::Verify {
            task,
            n,
            k,
            shards,
            shard,
            jobs,
            allow_large,
        } => {
            if *n > DESK_SCALE_MAX_N && !allow_large {
                return Err(CliError::usage(format!(
                    "n = {n} exceeds the exhaustive limit {DESK_SCALE_MAX_N}; pass --allow-large to run anyway"
                )));
            }
            let opts = RunOptions {
                shards: *shards,
                only_shard: *shard,
                jobs: *jobs,
            };
            let report = run_verify(*task, *n, *k, &opts)?;
            let status = if report.shard.is_some() || report.passed() {
                EXIT_OK
            } else {
                EXIT_FAILED
            };
            Ok(Outcome {
                text: report.to_text(),
                json: json!({"report": report}),
                status,
            })
        }
        Command::Gen {
            family,
            n,
            k,
            p,
            q,
            check,
        } => cmd_gen(*family, *n, *k, *p, *q, *check),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check(_) => "check",
        Command::Decompose { .. } => "decompose",
        Command::Verify { .. } => "verify",
        Command::Gen { .. } => "gen",
    }
}

/// Render an outcome in the requested format.
pub fn render(cfg: &CliConfig, outcome: &Outcome) -> String {
    match cfg.format {
        Format::Text => {
            let mut t = outcome.text.clone();
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
        Format::Json => {
            let mut envelope = json!({
                "schema": OUTPUT_SCHEMA,
                "command": command_name(&cfg.command),
                "status": outcome.status,
            });
            if let (Value::Object(env), Value::Object(body)) = (&mut envelope, &outcome.json) {
                env.extend(body.clone());
            }
            let mut s = serde_json::to_string_pretty(&envelope).expect("serializable");
            s.push('\n');
            s
        }
    }
}

/// Parse arguments, run, print, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.status;
        }
    };
    let rendered = render(&cfg, &outcome);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{rendered}"),
    }
    outcome.status
}
