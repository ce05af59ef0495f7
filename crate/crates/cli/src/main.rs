//! `multiflag`: classification of arm configurations, word enumeration,
//! sampling, chart conversion, prolongation and verification suites.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on unreadable
//! or invalid input, 3 when a request exceeds the supported depth.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiflag::classify::{
    classify, ekr_to_rvt_words, enumerate_ekr, enumerate_words, ClassReport, Letter, RvtWord, DEFAULT_CLASSIFY_TOL,
};
use multiflag::hyperspherical::{hs_forward, hs_inverse, HsPoint};
use multiflag::linalg::DEFAULT_REL_TOL;
use multiflag::prolongation::{prolong_config, FiberDirection, DEFAULT_PUSHFORWARD_TOL};
use multiflag::sampler::{sample_with_stats, SampleSpec, DEFAULT_MARGIN};
use multiflag::verify::{self, SuiteReport};
use multiflag::{ArmConfig, ConfigFile, Error};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DEPTH: u8 = 3;
const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "multiflag", version, about = "Special multi-flags of articulated arms: RVT and EKR classes")]
struct Cli {
    /// Output format of the report.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Chart {
    Hyperspherical,
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    FlagRanks,
    Cauchy,
    Strata,
    Prolongation,
    Hyperspherical,
    Roundtrip,
    Covering,
    Identities,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// RVT word, EKR code and per-level residuals of configurations in a file.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissible RVT words of length k up to the given depth.
    Enumerate {
        k: usize,
        #[arg(default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decomposition of the EKR classes of length k into RVT classes.
    Table {
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Configurations drawn inside an RVT class.
    Sample {
        #[arg(long)]
        word: String,
        #[arg(long)]
        m: usize,
        /// Arm length; must equal the word length when given.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, env = "MULTIFLAG_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Converts between ambient points and hyperspherical angles.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        to: Chart,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Appends a link along a unit direction of the rank-(m+1) distribution.
    Prolong {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated unit vector with m+1 components.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a verification suite over sampled configurations.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    suite: Suite,
    /// Restrict to one dimension parameter (default: 2 and 3).
    #[arg(long)]
    m: Option<usize>,
    /// Arm length, or largest arm length for suites that sweep k.
    #[arg(long)]
    k: Option<usize>,
    /// Samples per case.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, env = "MULTIFLAG_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Classification tolerance or relative rank tolerance, depending on the suite.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Single word for the strata suite.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Report printed by every command.
#[derive(Debug, Serialize)]
struct CliReport {
    command: String,
    inputs_digest: String,
    status: &'static str,
    exit_code: u8,
    results: Value,
}

/// Output of a command before rendering.
struct Outcome {
    lines: Vec<String>,
    results: Value,
    exit: u8,
    /// Data file written to `--out` (or stdout) instead of the report lines.
    artifact: Option<String>,
}

impl Outcome {
    fn new(lines: Vec<String>, results: Value) -> Self {
        Self { lines, results, exit: 0, artifact: None }
    }
}

/// Failure of a command with its exit status.
struct Failure {
    exit: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::DepthExceeded(_) => EXIT_DEPTH,
            Error::Parse(_)
            | Error::DimensionTooSmall(_)
            | Error::ArmTooShort(_)
            | Error::BadLinkLength { .. }
            | Error::LengthMismatch { .. }
            | Error::PointDimension { .. }
            | Error::NonUnitSegment { .. }
            | Error::NonUnitDirection(_)
            | Error::DimensionMismatch { .. } => EXIT_INPUT,
            _ => EXIT_FAIL,
        };
        Self { exit, message: e.to_string() }
    }
}

fn input_error(message: String) -> Failure {
    Failure { exit: EXIT_INPUT, message }
}

fn read_input(path: &PathBuf, digest: &mut Sha256) -> Result<String, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    digest.update(text.as_bytes());
    Ok(text)
}

/// One configuration object or an array of them.
fn parse_configs(text: &str) -> Result<Vec<ArmConfig>, Failure> {
    let value: Value = serde_json::from_str(text).map_err(|e| input_error(format!("malformed JSON: {e}")))?;
    let files: Vec<ConfigFile> = match value {
        Value::Array(_) => serde_json::from_value(value),
        _ => serde_json::from_value(value).map(|f| vec![f]),
    }
    .map_err(|e| input_error(format!("invalid configuration: {e}")))?;
    files
        .into_iter()
        .map(|f| ArmConfig::from_file(f, multiflag::geometry::DEFAULT_LINK_TOL).map_err(Failure::from))
        .collect()
}

fn parse_word(text: &str) -> Result<RvtWord, Failure> {
    let word = RvtWord::parse(text)?;
    if !word.is_admissible() {
        return Err(input_error(format!("{text} is not an admissible RVT word")));
    }
    Ok(word)
}

fn configs_json(configs: &[ArmConfig]) -> String {
    let files: Vec<ConfigFile> = configs.iter().map(ArmConfig::to_file).collect();
    let text = if files.len() == 1 { serde_json::to_string_pretty(&files[0]) } else { serde_json::to_string_pretty(&files) };
    text.expect("plain numbers serialize") + "\n"
}

fn letter_text(l: &Letter) -> String {
    match l {
        Letter::R => "R".into(),
        Letter::V => "V".into(),
        Letter::T => "T".into(),
        Letter::Sub(s) => format!("T{{{}}}", s.iter().map(|d| d.to_string()).collect::<String>()),
    }
}

fn class_lines(report: &ClassReport) -> Vec<String> {
    let ekr = report.ekr.as_ref().map_or("-".to_string(), ToString::to_string);
    let mut lines = vec![format!("{} / {ekr}", report.word)];
    if !report.levels.is_empty() {
        lines.push(format!("{:>5}  {:<7} {:>12}  anchors (index@level: residual)", "level", "letter", "vertical"));
    }
    for lv in &report.levels {
        let anchors: Vec<String> =
            lv.anchors.iter().map(|(idx, p, r)| format!("{idx}@{p}: {r:.3e}")).collect();
        let anchors = if anchors.is_empty() { "-".to_string() } else { anchors.join(", ") };
        lines.push(format!("{:>5}  {:<7} {:>12.3e}  {anchors}", lv.level, letter_text(&lv.letter), lv.vertical_residual));
    }
    lines
}

fn class_json(report: &ClassReport) -> Value {
    json!({
        "word": report.word.to_string(),
        "canonical": report.word.canonical(),
        "ekr": report.ekr.as_ref().map(ToString::to_string),
        "tol": report.tol,
        "levels": report.levels.iter().map(|lv| json!({
            "level": lv.level,
            "letter": letter_text(&lv.letter),
            "vertical_residual": lv.vertical_residual,
            "anchors": lv.anchors.iter().map(|(idx, p, r)| json!({"index": idx, "level": p, "residual": r})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_classify(input: &PathBuf, tol: f64, digest: &mut Sha256) -> Result<Outcome, Failure> {
    let configs = parse_configs(&read_input(input, digest)?)?;
    let mut lines = Vec::new();
    let mut results = Vec::new();
    for c in &configs {
        let report = classify(c, tol)?;
        lines.extend(class_lines(&report));
        results.push(class_json(&report));
    }
    Ok(Outcome::new(lines, Value::Array(results)))
}

fn cmd_enumerate(k: usize, depth: usize) -> Result<Outcome, Failure> {
    let words = enumerate_words(k, depth)?;
    let lines: Vec<String> = words.iter().map(ToString::to_string).collect();
    Ok(Outcome::new(lines.clone(), json!({"k": k, "depth": depth, "count": words.len(), "words": lines})))
}

fn cmd_table(k: usize) -> Result<Outcome, Failure> {
    let depth = if k <= 4 { 2 } else { 1 };
    let mut lines = vec![format!("{:<width$} | RVT classes", "EKR", width = k.max(3))];
    let mut rows = Vec::new();
    for code in enumerate_ekr(k, depth) {
        let words: Vec<String> = ekr_to_rvt_words(&code, k)?.iter().map(ToString::to_string).collect();
        lines.push(format!("{:<width$} | {}", code.to_string(), words.join(", "), width = k.max(3)));
        rows.push(json!({"ekr": code.to_string(), "rvt": words}));
    }
    Ok(Outcome::new(lines, json!({"k": k, "rows": rows})))
}

fn cmd_sample(
    word: &str,
    m: usize,
    k: Option<usize>,
    count: usize,
    seed: u64,
    margin: f64,
) -> Result<Outcome, Failure> {
    let word = parse_word(word)?;
    let mut spec = SampleSpec::new(word.clone(), m, seed, count).with_margin(margin);
    if let Some(k) = k {
        spec.k = k;
    }
    let (configs, stats) = sample_with_stats(&spec)?;
    let line = format!(
        "{count} configurations of class {word} (m={m}, seed={seed}), segment acceptance {:.3}",
        stats.acceptance()
    );
    let results = json!({
        "word": word.to_string(), "m": m, "k": spec.k, "seed": seed, "margin": margin, "count": count,
        "draws": stats.draws, "accepted": stats.accepted,
    });
    let mut out = Outcome::new(vec![line], results);
    out.artifact = Some(configs_json(&configs));
    Ok(out)
}

fn cmd_convert(input: &PathBuf, to: Chart, digest: &mut Sha256) -> Result<Outcome, Failure> {
    let text = read_input(input, digest)?;
    let (artifact, line) = match to {
        Chart::Hyperspherical => {
            let configs = parse_configs(&text)?;
            let points = configs.iter().map(hs_inverse).collect::<multiflag::Result<Vec<_>>>()?;
            let files: Vec<_> = points.iter().map(HsPoint::to_file).collect();
            let json = if files.len() == 1 { serde_json::to_string_pretty(&files[0]) } else { serde_json::to_string_pretty(&files) };
            (json.expect("plain numbers serialize") + "\n", format!("{} configurations to hyperspherical angles", files.len()))
        }
        Chart::Ambient => {
            let value: Value = serde_json::from_str(&text).map_err(|e| input_error(format!("malformed JSON: {e}")))?;
            let items = match value {
                Value::Array(items) => items,
                v => vec![v],
            };
            let mut configs = Vec::new();
            for item in items {
                let file = serde_json::from_value(item).map_err(|e| input_error(format!("invalid chart point: {e}")))?;
                configs.push(hs_forward(&HsPoint::from_file(file)?)?);
            }
            (configs_json(&configs), format!("{} chart points to ambient coordinates", configs.len()))
        }
    };
    let mut out = Outcome::new(vec![line], json!({"to": format!("{to:?}").to_lowercase()}));
    out.artifact = Some(artifact);
    Ok(out)
}

fn cmd_prolong(input: &PathBuf, direction: &str, digest: &mut Sha256) -> Result<Outcome, Failure> {
    let configs = parse_configs(&read_input(input, digest)?)?;
    let coeffs = direction
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| input_error(format!("invalid direction {direction:?}: {e}")))?;
    let d = FiberDirection::new(coeffs)?;
    let longer = configs.iter().map(|c| prolong_config(c, &d)).collect::<multiflag::Result<Vec<_>>>()?;
    let line = format!("{} configurations prolonged to k = {}", longer.len(), longer.first().map_or(0, ArmConfig::k));
    let mut out = Outcome::new(vec![line], json!({"direction": d.coeffs()}));
    out.artifact = Some(configs_json(&longer));
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let ms: Vec<usize> = a.m.map_or(vec![2, 3], |m| vec![m]);
    let ks: Vec<usize> = a.k.map_or((1..=4).collect(), |k| vec![k]);
    let n = |default: usize| a.count.unwrap_or(default);
    let report: SuiteReport = match a.suite {
        Suite::FlagRanks => verify::flag_ranks(&ms, &ks, n(100), a.seed, a.tol.unwrap_or(DEFAULT_REL_TOL))?,
        Suite::Cauchy => verify::cauchy(&ms, &ks, n(100), a.seed, a.tol.unwrap_or(DEFAULT_REL_TOL))?,
        Suite::Prolongation => verify::prolongation(&ms, &ks, n(200), a.seed, a.tol.unwrap_or(DEFAULT_PUSHFORWARD_TOL))?,
        Suite::Hyperspherical => verify::hyperspherical(&ms, &ks, n(200), a.seed)?,
        Suite::Strata => match &a.word {
            Some(w) => verify::strata_word(&parse_word(w)?, &ms, n(50), a.seed, a.tol.unwrap_or(DEFAULT_REL_TOL))?,
            None => verify::strata(&ms, a.k.unwrap_or(6), n(50), a.seed, a.tol.unwrap_or(DEFAULT_REL_TOL))?,
        },
        Suite::Roundtrip => verify::roundtrip(
            &ms,
            a.k.unwrap_or(6),
            true,
            n(100),
            a.seed,
            a.tol.unwrap_or(DEFAULT_CLASSIFY_TOL),
            a.margin,
        )?,
        Suite::Covering => verify::covering(n(1000), a.seed, a.tol.unwrap_or(DEFAULT_CLASSIFY_TOL))?,
        Suite::Identities => verify::identities(&ms, a.k.unwrap_or(5), a.k.unwrap_or(5))?,
    };
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let mut lines = vec![format!("{} {verdict}: {} checks, {} failures", report.suite, report.checks, report.failures)];
    lines.extend(report.lines.iter().cloned());
    lines.extend(report.messages.iter().map(|m| format!("failure: {m}")));
    let mut out = Outcome::new(lines, serde_json::to_value(&report).expect("report serializes"));
    if !report.passed() {
        out.exit = EXIT_FAIL;
    }
    Ok(out)
}

fn command_echo(args: &[String]) -> String {
    args.iter().skip(1).map(String::as_str).collect::<Vec<_>>().join(" ")
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { exit: EXIT_FAIL, message: format!("cannot write {}: {e}", path.display()) })
}

/// Everything `main` needs to print and write.
struct Rendered {
    report: CliReport,
    lines: Vec<String>,
    /// Data file and its destination; `None` means stdout.
    artifact: Option<(Option<PathBuf>, String)>,
    /// Destination for a copy of the report.
    report_out: Option<PathBuf>,
}

fn run(cli: &Cli, echo: &str) -> Rendered {
    let mut digest = Sha256::new();
    digest.update(echo.as_bytes());
    let (outcome, artifact_out, report_out) = match &cli.command {
        Command::Classify { input, tol, out } => (cmd_classify(input, *tol, &mut digest), None, out.clone()),
        Command::Enumerate { k, depth, out } => (cmd_enumerate(*k, *depth), None, out.clone()),
        Command::Table { k, out } => (cmd_table(*k), None, out.clone()),
        Command::Sample { word, m, k, count, seed, margin, out } => {
            (cmd_sample(word, *m, *k, *count, *seed, *margin), out.clone(), None)
        }
        Command::Convert { input, to, out } => (cmd_convert(input, *to, &mut digest), out.clone(), None),
        Command::Prolong { input, direction, out } => (cmd_prolong(input, direction, &mut digest), out.clone(), None),
        Command::Verify(a) => (cmd_verify(a), None, a.out.clone()),
    };
    let inputs_digest: String = digest.finalize().iter().map(|b| format!("{b:02x}")).collect();
    match outcome {
        Ok(o) => {
            let status = if o.exit == 0 { "ok" } else { "fail" };
            let report = CliReport { command: echo.to_string(), inputs_digest, status, exit_code: o.exit, results: o.results };
            Rendered { report, lines: o.lines, artifact: o.artifact.map(|a| (artifact_out, a)), report_out }
        }
        Err(f) => {
            let report = CliReport {
                command: echo.to_string(),
                inputs_digest,
                status: "error",
                exit_code: f.exit,
                results: json!({"error": f.message}),
            };
            Rendered { report, lines: vec![format!("error: {}", f.message)], artifact: None, report_out }
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let echo = command_echo(&args);
    let Rendered { report, lines, artifact, report_out } = run(&cli, &echo);
    let mut exit = report.exit_code;
    let rendered = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => lines.iter().map(|l| format!("{l}\n")).collect(),
    };
    match artifact {
        // Data goes to stdout when no file is named; the report then goes to stderr.
        Some((None, data)) => {
            print!("{data}");
            eprint!("{rendered}");
        }
        Some((Some(path), data)) => {
            if let Err(f) = write_file(&path, &data) {
                eprintln!("error: {}", f.message);
                exit = f.exit;
            }
            print!("{rendered}");
        }
        None => {
            if report.exit_code == EXIT_INPUT || report.exit_code == EXIT_DEPTH || report.status == "error" {
                eprint!("{rendered}");
            } else {
                print!("{rendered}");
            }
            if let Some(path) = report_out {
                if let Err(f) = write_file(&path, &rendered) {
                    eprintln!("error: {}", f.message);
                    exit = f.exit;
                }
            }
        }
    }
    ExitCode::from(exit)
}
