//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a check or computed bound fails, 2 on
//! usage errors (bad flags, unreadable or invalid input). JSON output is a
//! pure function of the arguments (and the input file); wall-clock timings
//! are only included with `--timings`.
//!
//! Hash seeds are hex strings of the seed's integer value; seed bit `k` is
//! the coefficient of `2^k`, and bit-strings are written most-significant bit
//! first, so `T[j, i] = seed[j − i + n_in − 1]`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use veriloop_core::hashing::tag_length;
use veriloop_core::protocol::{key_length, KeyLengthParams};

use crate::error::Error;
use crate::harness::{run_check, summarize, CheckConfig, CheckName, CheckReport, CheckSummary, Profile};
use crate::simulate::{simulate, SimulateOptions, SimulateReport};
use crate::{state_file, SCHEMA};

const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "veriloop", version, about = "Error-verification security analysis on classical-quantum states")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    output: Format,
    /// Include per-trial wall-clock times (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the two-bit verification counterexample exactly.
    Counterexample,
    /// Run a randomized check suite.
    Check {
        /// lemma1, lemma2, lemma3, chain_rule, lhl or collision.
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fix instance sizes as N_A,N_B,EVE (default: vary with the instance index).
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize, usize)>,
        /// independent, copied, noisy-copy(P) or adversarial-parity (default: cycle through all).
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
        /// ε_sec for lemma3 (default: cycle through 1/2, 1/4, 1/16).
        #[arg(long)]
        eps_sec: Option<f64>,
    },
    /// Final key length ⌊H_min − 2 log₂(1/ε_sec)⌋ − |H| − 1.
    Keylen {
        #[arg(long)]
        hmin: f64,
        #[arg(long)]
        eps_sec: f64,
        #[arg(long, conflicts_with = "eps_cor", required_unless_present = "eps_cor")]
        tag_bits: Option<u32>,
        /// Derive |H| = ⌈log₂(1/ε_cor)⌉ instead of giving it directly.
        #[arg(long)]
        eps_cor: Option<f64>,
    },
    /// Run verification (and optionally privacy amplification) on a state file.
    Simulate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        hash_seed: String,
        #[arg(long)]
        out_bits: usize,
        #[arg(long)]
        pa_bits: Option<usize>,
        /// Fixed PA seed; without it PA is averaged over the Toeplitz family.
        #[arg(long, requires = "pa_bits")]
        pa_seed: Option<String>,
        /// Also report the secrecy distance of the virtual no-abort state including V.
        #[arg(long)]
        unconditioned: bool,
    },
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> =
        s.split(',').map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, e] => Ok((a, b, e)),
        [n, e] => Ok((n, n, e)),
        _ => Err("expected N_A,N_B,EVE or N,EVE".into()),
    }
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a run produced: exit status plus the two output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Outcome { status: 2, stdout: String::new(), stderr: message }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct CounterexampleBody {
    d_no_verification: f64,
    pr_keys_differ: f64,
    #[serde(rename = "trace_distance_with_V")]
    trace_distance_with_v: f64,
    #[serde(rename = "secrecy_V0")]
    secrecy_v0: f64,
    lemma2_rhs: f64,
    naive_rhs: f64,
    checks: CounterexampleChecks,
    pass: bool,
}

#[derive(Serialize)]
struct CounterexampleChecks {
    values_match: bool,
    lemma2_holds: bool,
    naive_bound_violated: bool,
}

#[derive(Serialize)]
struct CheckBody {
    name: CheckName,
    seed: u64,
    trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dims: Option<(usize, usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Profile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_sec: Option<f64>,
    summary: CheckSummary,
    pass: bool,
    reports: Vec<CheckReport>,
}

#[derive(Serialize)]
struct KeylenBody {
    hmin: f64,
    eps_sec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_cor: Option<f64>,
    tag_bits: u32,
    base_length: i64,
    /// `null` when no key can be generated.
    key_length: Option<u32>,
    pass: bool,
}

#[derive(Serialize)]
struct SimulateBody {
    state: String,
    #[serde(flatten)]
    report: SimulateReport,
}

fn render<T: Serialize>(format: Format, command: &str, body: T, text: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Json => {
            let env = Envelope { schema: SCHEMA, command, body };
            serde_json::to_string_pretty(&env).expect("reports always serialize") + "\n"
        }
        Format::Text => text(&body),
    }
}

fn fail(e: Error) -> Outcome {
    let status = if e.is_usage() || matches!(e, Error::Core(veriloop_core::Error::OutOfRange(_))) { 2 } else { 1 };
    Outcome { status, stdout: String::new(), stderr: format!("error: {e}\n") }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome::usage(rendered)
            } else {
                Outcome { status: 0, stdout: rendered, stderr: String::new() }
            };
        }
    };
    let format = cli.output;
    match cli.command {
        Command::Counterexample => counterexample(format),
        Command::Check { name, trials, seed, dims, profile, eps_sec } => {
            let check = match name.parse::<CheckName>() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let config = CheckConfig { dims, profile, eps_sec };
            check_command(format, cli.timings, check, seed, trials, config)
        }
        Command::Keylen { hmin, eps_sec, tag_bits, eps_cor } => keylen(format, hmin, eps_sec, tag_bits, eps_cor),
        Command::Simulate { state, hash_seed, out_bits, pa_bits, pa_seed, unconditioned } => {
            let opts = SimulateOptions { hash_seed, out_bits, pa_bits, pa_seed, unconditioned };
            simulate_command(format, state, &opts)
        }
    }
}

fn counterexample(format: Format) -> Outcome {
    let r = match veriloop_core::counterexample::run() {
        Ok(r) => r,
        Err(e) => return fail(e.into()),
    };
    let close = |x: f64, y: f64| (x - y).abs() <= EXACT_TOLERANCE;
    let checks = CounterexampleChecks {
        values_match: close(r.d_no_verification, 0.0)
            && close(r.pr_keys_differ, 0.0)
            && close(r.trace_distance_with_v, 0.25)
            && close(r.secrecy_v0, 0.25),
        lemma2_holds: r.lemma2_holds(EXACT_TOLERANCE),
        naive_bound_violated: r.naive_bound_violated(EXACT_TOLERANCE),
    };
    let pass = checks.values_match && checks.lemma2_holds && checks.naive_bound_violated;
    let body = CounterexampleBody {
        d_no_verification: r.d_no_verification,
        pr_keys_differ: r.pr_keys_differ,
        trace_distance_with_v: r.trace_distance_with_v,
        secrecy_v0: r.secrecy_v0,
        lemma2_rhs: r.lemma2_rhs,
        naive_rhs: r.naive_rhs(),
        checks,
        pass,
    };
    let stdout = render(format, "counterexample", body, |b| {
        format!(
            "d(K_A E|E) without verification  {}\n\
             Pr[K_A != K_B]                    {}\n\
             distance to ideal with V          {}\n\
             d(K_A E|E) on V=0                 {}\n\
             separation bound (with V)         {}  {}\n\
             naive bound (ignoring V)          {}  {}\n",
            b.d_no_verification,
            b.pr_keys_differ,
            b.trace_distance_with_v,
            b.secrecy_v0,
            b.lemma2_rhs,
            if b.checks.lemma2_holds { "holds" } else { "VIOLATED" },
            b.naive_rhs,
            if b.checks.naive_bound_violated { "violated" } else { "holds" },
        )
    });
    Outcome { status: if pass { 0 } else { 1 }, stdout, stderr: String::new() }
}

fn check_command(format: Format, timings: bool, check: CheckName, seed: u64, trials: u64, config: CheckConfig) -> Outcome {
    let mut reports = match run_check(check, seed, trials, &config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if !timings {
        for r in &mut reports {
            r.runtime_ms = None;
        }
    }
    let summary = summarize(check, &reports);
    let pass = summary.failed == 0;
    let body = CheckBody {
        name: check,
        seed,
        trials,
        dims: config.dims,
        profile: config.profile,
        eps_sec: config.eps_sec,
        summary,
        pass,
        reports,
    };
    let stdout = render(format, "check", body, |b| {
        let mut out = format!("{} seed={} trials={}: {} passed, {} failed", b.name, b.seed, b.trials, b.summary.passed, b.summary.failed);
        if let Some(v) = b.summary.naive_bound_violations {
            let _ = write!(out, ", naive bound violated on {v}");
        }
        if let Some(v) = b.summary.infeasible {
            let _ = write!(out, ", {v} without a positive key length");
        }
        out.push('\n');
        for r in b.reports.iter().filter(|r| !r.pass) {
            let _ = writeln!(
                out,
                "FAIL #{} {} n={} eve={}: lhs {} > rhs {}",
                r.instance.instance_index, r.instance.profile, r.instance.n_bits_a, r.instance.eve_alphabet, r.lhs, r.rhs
            );
        }
        out
    });
    Outcome { status: if pass { 0 } else { 1 }, stdout, stderr: String::new() }
}

fn keylen(format: Format, hmin: f64, eps_sec: f64, tag_bits: Option<u32>, eps_cor: Option<f64>) -> Outcome {
    let tag_bits = match (tag_bits, eps_cor) {
        (Some(t), _) => t,
        (None, Some(eps)) => match tag_length(eps) {
            Ok(t) => t,
            Err(e) => return fail(e.into()),
        },
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let params = KeyLengthParams { hmin_bound: hmin, eps_sec, tag_bits };
    let base_length = match params.base_length() {
        Ok(l) => l,
        Err(e) => return fail(e.into()),
    };
    let key_length = key_length(&params).ok();
    let pass = key_length.is_some();
    let body = KeylenBody { hmin, eps_sec, eps_cor, tag_bits, base_length, key_length, pass };
    let stdout = render(format, "keylen", body, |b| match b.key_length {
        Some(k) => format!("l = {}, |H| = {}, key length = {}\n", b.base_length, b.tag_bits, k),
        None => format!("l = {}, |H| = {}: no positive key length\n", b.base_length, b.tag_bits),
    });
    Outcome { status: if pass { 0 } else { 1 }, stdout, stderr: String::new() }
}

fn simulate_command(format: Format, path: PathBuf, opts: &SimulateOptions) -> Outcome {
    let report = match state_file::load(&path).and_then(|rho| simulate(&rho, opts)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let body = SimulateBody { state: path.display().to_string(), report };
    let stdout = render(format, "simulate", body, |b| {
        let r = &b.report;
        let fmt_h = |h: Option<f64>| h.map_or("n/a (quantum Eve)".to_owned(), |h| h.to_string());
        let mut out = format!(
            "Pr[V=0]                  {}\n\
             H_min(A|E)               {}\n\
             H_min(A|E,H,V)           {}\n\
             key bits                 {}\n\
             Pr[K_A != K_B]           {}\n\
             distance to ideal        {}\n\
             d(K_A E|E) on V=0        {}\n",
            r.pr_continue,
            fmt_h(r.hmin_a_given_e),
            fmt_h(r.hmin_a_given_ehv),
            r.key_bits,
            r.pr_keys_differ,
            r.distance_to_ideal,
            r.secrecy_v0,
        );
        if let Some(d) = r.secrecy_virtual {
            let _ = writeln!(out, "d(K_A E V|E V), virtual  {d}");
        }
        out
    });
    Outcome { status: 0, stdout, stderr: String::new() }
}
