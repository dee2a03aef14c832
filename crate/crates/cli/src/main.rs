mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qraclab::compression::{build_scheme, exact_output_distribution, simulate, trace_csv};
use qraclab::harness::{self, csv_field, csv_float, FailureManifest, SuiteConfig, SuiteKind, SCHEMA_VERSION};
use qraclab::info::{entropy_chain, qubit_lower_bound, ClassicalChannel};
use qraclab::minimax::{solve_worstcase, GameSolution};
use qraclab::pgm::{build_pgm, PgmMode};
use qraclab::rac::{build_rac, validate_rac};
use qraclab::{decoding, Ensemble, Error, Qrac};

use config::ConfigFile;

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qraclab", version, about = "Quantum random access code verification suites")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The two-bits-into-one-qubit worked example.
    #[command(name = "demo-2to1")]
    Demo2to1,
    /// Run a verification suite; exit status 0 iff every check passes.
    Suite {
        #[arg(long, value_parser = parse_kind)]
        kind: Option<SuiteKind>,
    },
    /// Build and validate a classical RAC from a quantum code.
    Convert,
    /// Compress a classical channel's output and check the error exactly.
    Compress,
    /// Solve for a worst-case measurement.
    Minimax,
    /// Qubit lower bound and the entropy chain behind it.
    Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Success probability for `bounds` without a code.
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "c-newman", global = true)]
    c_newman: Option<f64>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit timestamps and timings so identical inputs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random priors per code.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Random codes per corpus.
    #[arg(long, global = true)]
    codes: Option<usize>,
    #[arg(long = "max-iters", global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    ensembles: Option<usize>,
    #[arg(long, global = true)]
    runs: Option<u64>,
    /// standard | identity[:N] | tensor:K | random[:N:M] | path to a code JSON file.
    #[arg(long, global = true)]
    code: Option<String>,
    /// Channel table as CSV (one row per input) or JSON.
    #[arg(long, global = true)]
    channel: Option<PathBuf>,
    /// Channel input used for the Monte Carlo run of `compress`.
    #[arg(long, global = true)]
    input: Option<usize>,
}

fn parse_kind(s: &str) -> Result<SuiteKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flags, then config file, then (for the seed) `QRACLAB_SEED`.
struct Settings {
    flags: Common,
    file: ConfigFile,
}

impl Settings {
    fn new(flags: Common) -> Result<Self, String> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self { flags, file })
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key),
        }
    }

    fn seed(&self) -> Result<u64, String> {
        if let Some(s) = self.pick(self.flags.seed, "seed")? {
            return Ok(s);
        }
        match std::env::var("QRACLAB_SEED") {
            Ok(v) => v.trim().parse().map_err(|e| format!("QRACLAB_SEED: {e}")),
            Err(_) => Ok(0),
        }
    }

    fn format(&self) -> Result<Format, String> {
        if let Some(f) = self.flags.format {
            return Ok(f);
        }
        match self.file.get::<String>("format")?.as_deref() {
            None | Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(format!("config key format: unknown format {other:?}")),
        }
    }

    fn out(&self) -> Result<Option<PathBuf>, String> {
        Ok(self.flags.out.clone().or(self.file.get::<PathBuf>("out")?))
    }

    fn deterministic(&self) -> Result<bool, String> {
        Ok(self.flags.deterministic || self.file.get::<bool>("deterministic")?.unwrap_or(false))
    }

    fn suite_config(&self) -> Result<SuiteConfig, String> {
        let d = SuiteConfig::default();
        let f = &self.flags;
        Ok(SuiteConfig {
            n: self.pick(f.n, "n")?.unwrap_or(d.n),
            m: self.pick(f.m, "m")?.unwrap_or(d.m),
            eta: self.pick(f.eta, "eta")?.unwrap_or(d.eta),
            eps: self.pick(f.eps, "eps")?.unwrap_or(d.eps),
            seed: self.seed()?,
            c_newman: self.pick(f.c_newman, "c-newman")?.unwrap_or(d.c_newman),
            seeds: self.pick(f.seeds, "seeds")?.unwrap_or(d.seeds),
            codes: self.pick(f.codes, "codes")?.unwrap_or(d.codes),
            max_iters: self.pick(f.max_iters, "max-iters")?.unwrap_or(d.max_iters),
            ensembles: self.pick(f.ensembles, "ensembles")?.unwrap_or(d.ensembles),
            runs: self.pick(f.runs, "runs")?.unwrap_or(d.runs),
        })
    }

    fn code(&self, default: &str) -> Result<Qrac, String> {
        let code_arg = self
            .pick(self.flags.code.clone(), "code")?
            .unwrap_or_else(|| default.to_string());
        let n = self.pick(self.flags.n, "n")?;
        let m = self.pick(self.flags.m, "m")?;
        let parts: Vec<&str> = code_arg.split(':').collect();
        let num = |s: &str| s.parse::<usize>().map_err(|e| format!("code {code_arg:?}: {e}"));
        let r = match parts.as_slice() {
            ["standard"] => Ok(Qrac::standard_2to1()),
            ["identity"] => Qrac::identity_encoding(n.unwrap_or(3)),
            ["identity", k] => Qrac::identity_encoding(num(k)?),
            ["tensor", k] => Qrac::standard_2to1().tensor_power(num(k)?),
            ["random"] => Qrac::random(n.unwrap_or(3), m.unwrap_or(2), self.seed()?),
            ["random", a, b] => Qrac::random(num(a)?, num(b)?, self.seed()?),
            _ => {
                let text = std::fs::read_to_string(&code_arg).map_err(|e| format!("code {code_arg:?}: {e}"))?;
                Qrac::from_json(&text)
            }
        };
        r.map_err(|e| e.to_string())
    }

    fn channel(&self) -> Result<ClassicalChannel, String> {
        let Some(path) = self.pick(self.flags.channel.clone(), "channel")? else {
            return ClassicalChannel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).map_err(|e| e.to_string());
        };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let r = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(Error::from)
        } else {
            ClassicalChannel::from_csv(&text)
        };
        r.map_err(|e| e.to_string())
    }
}

struct Outcome {
    json: Value,
    csv: String,
    passed: bool,
    failed_checks: Vec<harness::Check>,
}

fn now_unix() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn key_value_csv(rows: &[(&str, f64)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{},{}\n", csv_field(k), csv_float(*v)));
    }
    out
}

fn run_demo() -> Result<Outcome, String> {
    let d = harness::demo_2to1().map_err(|e| e.to_string())?;
    let mut rows = vec![
        ("p_qrac", d.p_qrac),
        ("worst_case_p", d.worst_case_p),
        ("p_pgm", d.p_pgm),
        ("expected_dh", d.expected_dh),
        ("bound", d.bound),
    ];
    let labels = ["per_bit[1]", "per_bit[2]"];
    for (l, v) in labels.iter().zip(&d.per_bit) {
        rows.push((l, *v));
    }
    Ok(Outcome {
        csv: key_value_csv(&rows),
        passed: d.passed,
        failed_checks: d.checks.iter().filter(|c| !c.passed).cloned().collect(),
        json: serde_json::to_value(&d).map_err(|e| e.to_string())?,
    })
}

fn run_suite(s: &Settings, kind: Option<SuiteKind>) -> Result<Outcome, String> {
    let kind = match kind {
        Some(k) => k,
        None => match s.file.get::<String>("kind")? {
            Some(k) => parse_kind(&k)?,
            None => SuiteKind::All,
        },
    };
    let cfg = s.suite_config()?;
    let report = harness::run_suite(kind, &cfg).map_err(|e| e.to_string())?;
    Ok(Outcome {
        csv: report.to_csv(),
        passed: report.passed,
        failed_checks: report.failed_checks().cloned().collect(),
        json: serde_json::to_value(&report).map_err(|e| e.to_string())?,
    })
}

fn run_convert(s: &Settings) -> Result<Outcome, String> {
    let code = s.code("standard")?;
    let cfg = s.suite_config()?;
    let book = build_rac(&code, cfg.eta, cfg.seed, cfg.c_newman).map_err(|e| e.to_string())?;
    let v = validate_rac(&book, &code).map_err(|e| e.to_string())?;
    let codebook: Value = serde_json::from_str(&book.to_json().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let checks = vec![
        harness::Check::ge("convert/min_success", v.min_success, v.floor, v.tolerance),
        harness::Check::le(
            "convert/total_message_bits",
            v.total_message_bits as f64,
            v.message_bits_bound,
            0.0,
        ),
    ];
    Ok(Outcome {
        csv: v.to_csv(),
        passed: v.ok && v.length_ok,
        failed_checks: checks.iter().filter(|c| !c.passed).cloned().collect(),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "convert",
            "code": {"n": code.n(), "m": code.m(), "p": code.claimed_p()},
            "ok": v.ok && v.length_ok,
            "checks": checks,
            "validation": v,
            "codebook": codebook,
        }),
    })
}

fn run_compress(s: &Settings) -> Result<Outcome, String> {
    let ch = s.channel()?;
    let eta = s.pick(s.flags.eta, "eta")?.unwrap_or(0.1);
    let seed = s.seed()?;
    let runs = s.pick(s.flags.runs, "runs")?.unwrap_or(10_000);
    let x = s.pick(s.flags.input, "input")?.unwrap_or(0);
    let scheme = build_scheme(&ch, eta).map_err(|e| e.to_string())?;
    let exact = (0..ch.in_size())
        .map(|x| exact_output_distribution(&scheme, x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let trace = simulate(&scheme, x, runs, seed).map_err(|e| e.to_string())?;
    let mut histogram = vec![0u64; ch.out_size()];
    for r in &trace {
        histogram[r.output_y] += 1;
    }
    let expected = 1.0 / scheme.ratio[x];
    let rate = trace.iter().filter(|r| r.sent_index == Some(1)).count() as f64 / runs as f64;
    let checks: Vec<harness::Check> = exact
        .iter()
        .enumerate()
        .map(|(x, d)| harness::Check::le(format!("compress/tv_error[{x}]"), d.tv_error, eta, 0.0))
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(Outcome {
        csv: trace_csv(&trace),
        passed,
        failed_checks: checks.iter().filter(|c| !c.passed).cloned().collect(),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "compress",
            "scheme": scheme,
            "exact": exact,
            "checks": checks,
            "monte_carlo": {
                "input": x,
                "runs": runs,
                "seed": seed,
                "first_draw_acceptance": rate,
                "expected_acceptance": expected,
                "histogram": histogram,
            },
        }),
    })
}

fn minimax_outcome(sol: &GameSolution) -> Result<Outcome, String> {
    let mut csv = String::from("iteration,argmax_x,worst_value\n");
    for (t, (x, v)) in sol.prior_trace.iter().zip(&sol.value_trace).enumerate() {
        csv.push_str(&format!("{},{},{}\n", t + 1, x, csv_float(*v)));
    }
    let json: Value = serde_json::from_str(&sol.to_json().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let check = harness::Check::le("minimax/worst_x_value", sol.worst_x_value, sol.target, 0.0);
    Ok(Outcome {
        csv,
        passed: sol.converged,
        failed_checks: if sol.converged { Vec::new() } else { vec![check] },
        json: json!({"schema_version": SCHEMA_VERSION, "command": "minimax", "solution": json}),
    })
}

fn run_minimax(s: &Settings) -> Result<Outcome, String> {
    let code = s.code("standard")?;
    let cfg = s.suite_config()?;
    match solve_worstcase(&code, cfg.eps, cfg.max_iters, cfg.seed) {
        Ok(sol) => minimax_outcome(&sol),
        Err(Error::NotConverged(sol)) => minimax_outcome(&sol),
        Err(e) => Err(e.to_string()),
    }
}

fn run_bounds(s: &Settings) -> Result<Outcome, String> {
    let has_code = s.pick(s.flags.code.clone(), "code")?.is_some();
    if !has_code {
        let n = s.pick(s.flags.n, "n")?.unwrap_or(2);
        let p = s
            .pick(s.flags.p, "p")?
            .unwrap_or_else(|| (std::f64::consts::PI / 8.0).cos().powi(2));
        let b = qubit_lower_bound(n, p).map_err(|e| e.to_string())?;
        return Ok(Outcome {
            csv: key_value_csv(&[("n", n as f64), ("p", p), ("bound", b.bound), ("nayak", b.nayak)]),
            passed: true,
            failed_checks: Vec::new(),
            json: json!({"schema_version": SCHEMA_VERSION, "command": "bounds", "n": n, "p": p, "lower_bound": b}),
        });
    }
    let code = s.code("standard")?;
    let p = code.claimed_p();
    let b = qubit_lower_bound(code.n(), p).map_err(|e| e.to_string())?;
    let chain = entropy_chain(&code).map_err(|e| e.to_string())?;
    let pg = build_pgm(&Ensemble::uniform(&code), PgmMode::Full).map_err(|e| e.to_string())?;
    let nayak = decoding::nayak_identification_check(&code, pg.full_table().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let checks = vec![
        harness::Check::ge("bounds/qubits_vs_lower_bound", code.m() as f64, b.bound, decoding::TOL_BOUND),
        harness::Check::le("bounds/identification_sum", nayak.lhs, nayak.rhs, nayak.tolerance),
        harness::Check::holds("bounds/entropy_chain", chain.ok()),
    ];
    let rows = [
        ("n", code.n() as f64),
        ("m", code.m() as f64),
        ("p", p),
        ("bound", b.bound),
        ("nayak", b.nayak),
        ("h_x_given_y", chain.h_x_given_y),
        ("h_x_given_yd", chain.h_x_given_yd),
        ("mutual_information", chain.mutual_information),
        ("identification_sum", nayak.lhs),
    ];
    Ok(Outcome {
        csv: key_value_csv(&rows),
        passed: checks.iter().all(|c| c.passed),
        failed_checks: checks.iter().filter(|c| !c.passed).cloned().collect(),
        json: json!({
            "schema_version": SCHEMA_VERSION,
            "command": "bounds",
            "code": {"n": code.n(), "m": code.m(), "p": p},
            "lower_bound": b,
            "entropy_chain": chain,
            "identification": nayak,
            "checks": checks,
        }),
    })
}

fn with_path_ext(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn emit(s: &Settings, command: &str, mut outcome: Outcome, started: Instant, both: bool) -> Result<ExitCode, String> {
    if !s.deterministic()? {
        if let Value::Object(map) = &mut outcome.json {
            map.insert("timestamp".into(), Value::String(now_unix()));
            map.insert("elapsed_seconds".into(), json!(started.elapsed().as_secs_f64()));
        }
    }
    let json_text = serde_json::to_string_pretty(&outcome.json).map_err(|e| e.to_string())? + "\n";
    let format = s.format()?;
    let out = s.out()?;
    let (primary, other, other_ext) = match format {
        Format::Json => (&json_text, &outcome.csv, "csv"),
        Format::Csv => (&outcome.csv, &json_text, "json"),
    };
    write_or_print(out.as_deref(), primary)?;
    if both {
        if let Some(p) = &out {
            write_or_print(Some(&with_path_ext(p, other_ext)), other)?;
        }
    }
    if outcome.passed {
        return Ok(ExitCode::SUCCESS);
    }
    let manifest = FailureManifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        error: None,
        failed_checks: outcome.failed_checks,
    };
    write_manifest(out.as_deref(), &manifest);
    Ok(ExitCode::from(EXIT_CHECKS_FAILED))
}

fn write_manifest(out: Option<&Path>, manifest: &FailureManifest) {
    let text = manifest.to_json().unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}\n"));
    eprint!("{text}");
    if let Some(p) = out {
        let _ = std::fs::write(with_path_ext(p, "failure.json"), &text);
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Demo2to1 => "demo-2to1",
        Command::Suite { .. } => "suite",
        Command::Convert => "convert",
        Command::Compress => "compress",
        Command::Minimax => "minimax",
        Command::Bounds => "bounds",
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let started = Instant::now();
    let name = command_name(&cli.command);
    let s = Settings::new(cli.common)?;
    if let Some(j) = s.pick(s.flags.jobs, "jobs")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let outcome = match cli.command {
        Command::Demo2to1 => run_demo()?,
        Command::Suite { kind } => run_suite(&s, kind)?,
        Command::Convert => run_convert(&s)?,
        Command::Compress => run_compress(&s)?,
        Command::Minimax => run_minimax(&s)?,
        Command::Bounds => run_bounds(&s)?,
    };
    let both = matches!(name, "suite" | "convert");
    emit(&s, name, outcome, started, both)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let name = command_name(&cli.command);
    let out = cli.common.out.clone();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            write_manifest(out.as_deref(), &FailureManifest::from_error(name, &e));
            ExitCode::from(EXIT_ERROR)
        }
    }
}
