//! `quartic-sos` command line: sum-of-squares certificates, verification,
//! moment-cone decomposition, negativity witnesses and Gram data dumps.
//!
//! Exit codes: 0 success, 1 negative verdict (not nonnegative, failed
//! verification), 2 usage or input error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use quartic_sos::cone::{decompose_with, AtomicMeasure};
use quartic_sos::gram::frame;
use quartic_sos::pipeline::{sos_representation, verify, AnalysisReport, SosCertificate, Verdict};
use quartic_sos::sdp::{find_gram, negativity_witness_with, GramResult, SdpOptions};
use quartic_sos::{Error, SymMatrix, TernaryQuartic};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "quartic-sos", version, about = "Sum-of-squares certificates for ternary quartics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input JSON given directly on the command line.
    #[arg(long, global = true, conflicts_with = "input")]
    pub inline: Option<String>,

    /// Read input JSON from a file (stdin is used when neither flag is given).
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Base numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,

    /// Random objectives tried in the rank-3 search.
    #[arg(long, global = true, default_value_t = 20)]
    pub trials: usize,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sum-of-squares certificate, or a point where the quartic is negative.
    Sos,
    /// Check a certificate: input {"polynomial": ..., "certificate": ...}.
    Verify,
    /// Split a moment-cone matrix {"dim": 6, "upper": [...]} into atoms.
    Decompose,
    /// Negativity witness from an infeasibility certificate.
    Witness,
    /// The particular Gram matrix A0 and the constraint values b.
    GramDump,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyInput {
    polynomial: TernaryQuartic,
    certificate: SosCertificate,
}

#[derive(Debug, Serialize)]
struct WitnessOutput {
    /// Point with `p < 0`, absent when a PSD Gram matrix exists.
    witness: Option<[f64; 3]>,
    value: Option<f64>,
    violation: Option<f64>,
    gram: Option<SymMatrix>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::NotInCone { .. }
            | Error::NotPsd { .. }
            | Error::NegativeWeight(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

struct Output {
    code: u8,
    json: String,
    text: String,
}

fn read_input(cli: &Cli, stdin: &mut dyn Read) -> Result<String, Failure> {
    if let Some(s) = &cli.inline {
        return Ok(s.clone());
    }
    if let Some(path) = &cli.input {
        return fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())));
    }
    let mut s = String::new();
    stdin.read_to_string(&mut s).map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
    Ok(s)
}

fn parse<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, Failure> {
    serde_json::from_str(s).map_err(|e| Failure::Usage(format!("invalid input JSON: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize") + "\n"
}

fn fmt_point(p: &[f64; 3]) -> String {
    format!("({:.6}, {:.6}, {:.6})", p[0], p[1], p[2])
}

fn sos_text(r: &AnalysisReport) -> String {
    match (&r.verdict, &r.certificate, &r.witness) {
        (Verdict::Sos(n), Some(c), _) => {
            let mut s = format!("sum of {n} squares (residual {:.3e}, sigma4/sigma1 {:.3e})\n", c.residual, c.rank_ratio);
            for (i, q) in c.squares.iter().enumerate() {
                s.push_str(&format!("q{} = {q:.6}\n", i + 1));
            }
            s
        }
        (_, _, Some(w)) => format!("not nonnegative: p{} = {:.6e}\n", fmt_point(&w.point), w.value),
        _ => String::from("no result\n"),
    }
}

fn measure_text(m: &AtomicMeasure) -> String {
    let mut s = format!("{} atoms\n", m.len());
    for a in &m.atoms {
        s.push_str(&format!("rho = {:.6e}, point = {}\n", a.rho, fmt_point(&a.point)));
    }
    s
}

fn matrix_text(a: &SymMatrix) -> String {
    a.to_rows()
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:>12.6}")).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Output, Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let opts = SdpOptions { tol: cli.tol, trials: cli.trials, seed: cli.seed, ..SdpOptions::default() };
    let tol = opts.tolerances();
    let raw = read_input(cli, stdin)?;
    match cli.command {
        Command::Sos => {
            let p: TernaryQuartic = parse(&raw)?;
            let r = sos_representation(&p, &opts)?;
            let code = if matches!(r.verdict, Verdict::Sos(_)) { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(Output { code, text: sos_text(&r), json: to_json(&r) })
        }
        Command::Verify => {
            let input: VerifyInput = parse(&raw)?;
            let r = verify(&input.polynomial, &input.certificate, tol.reconstruction().max(cli.tol));
            let text = format!(
                "{}: gap {:.3e} (squares {:.3e}, gram {:.3e}), gram min eigenvalue {:.3e}\n",
                if r.pass { "pass" } else { "fail" },
                r.gap,
                r.squares_gap,
                r.gram_gap,
                r.gram_min_eigenvalue
            );
            let code = if r.pass { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(Output { code, text, json: to_json(&r) })
        }
        Command::Decompose => {
            let a: SymMatrix = parse(&raw)?;
            let m = decompose_with(&a, &tol)?;
            Ok(Output { code: EXIT_OK, text: measure_text(&m), json: to_json(&m) })
        }
        Command::Witness => {
            let p: TernaryQuartic = parse(&raw)?;
            match find_gram(&p, &opts)? {
                GramResult::Gram(g) => {
                    let text = format!("a PSD Gram matrix exists; no witness\n{}\n", matrix_text(&g));
                    let out = WitnessOutput { witness: None, value: None, violation: None, gram: Some(g) };
                    Ok(Output { code: EXIT_OK, text, json: to_json(&out) })
                }
                GramResult::Certificate(c) => {
                    let w = negativity_witness_with(&c, &p, &tol)?;
                    let value = p.evaluate(w[0], w[1], w[2]);
                    let text = format!("not nonnegative: p{} = {value:.6e} (tr(A0 C) = {:.6e})\n", fmt_point(&w), c.violation);
                    let out = WitnessOutput { witness: Some(w), value: Some(value), violation: Some(c.violation), gram: None };
                    Ok(Output { code: EXIT_NEGATIVE, text, json: to_json(&out) })
                }
            }
        }
        Command::GramDump => {
            let p: TernaryQuartic = parse(&raw)?;
            let f = frame(&p);
            let text = format!("A0 =\n{}\nb = {:?}\n", matrix_text(&f.a0), f.b);
            Ok(Output { code: EXIT_OK, text, json: to_json(&f) })
        }
    }
}

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdin) {
        Ok(out) => {
            let body = match cli.format {
                Format::Json => out.json,
                Format::Text => out.text,
            };
            let _ = stdout.write_all(body.as_bytes());
            out.code
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(stderr, "numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}
