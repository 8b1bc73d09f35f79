//! Command-line front end. Every command writes to the given sink so that
//! output can be compared byte for byte.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::choice::Sampler;
use crate::circuit::{parse_duration, FaultEvent};
use crate::codes::CodeKind;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_gamma, surface_row_span_audit, verify_ft_exhaustive, Family, FtVerdict, RateParams};
use crate::protocol::{Engine, Schedule};
use crate::rates::{gamma_approx, gamma_exact, gamma_nonft_upper};
use crate::timing::{recovery_time, Scheme, TimingModel};

#[derive(Parser, Debug)]
#[command(name = "erasurenet", version, about = "Erasure correction across chips: protocols, FT checks and rates")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Catastrophic-rate sweep over the recovery time, as CSV.
    Rates(RatesArgs),
    /// Exhaustive fault-tolerance check, as a JSON report.
    Verify(VerifyArgs),
    /// One run with a fixed fault schedule; prints the trace as JSON lines.
    Simulate(SimulateArgs),
    /// Time constants and recovery times.
    Timing(TimingArgs),
    /// Row/column span audit of the planar code.
    AuditSurface(AuditArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct TimingOverrides {
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_2q: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_meas: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_xfer: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_ncx: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_sq: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_scx: Option<f64>,
    #[arg(long, value_parser = parse_duration_arg)]
    pub t_nscx: Option<f64>,
}

impl TimingOverrides {
    fn apply(&self, mut t: TimingModel) -> Result<TimingModel> {
        t.t_2q = self.t_2q.unwrap_or(t.t_2q);
        t.t_meas = self.t_meas.unwrap_or(t.t_meas);
        t.t_xfer = self.t_xfer.unwrap_or(t.t_xfer);
        t.t_ncx = self.t_ncx.unwrap_or(t.t_ncx);
        t.t_sq_override = self.t_sq.or(t.t_sq_override);
        t.t_scx_override = self.t_scx.or(t.t_scx_override);
        t.t_nscx_override = self.t_nscx.or(t.t_nscx_override);
        t.validate()?;
        Ok(t)
    }
}

fn parse_duration_arg(s: &str) -> std::result::Result<f64, String> {
    parse_duration(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Add Monte Carlo columns for the configured protocol.
    #[arg(long)]
    pub monte_carlo: bool,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, env = "ERASURENET_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub timing: TimingOverrides,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub protocol: Scheme,
    #[arg(long)]
    pub code: CodeKind,
    #[arg(long)]
    pub faults: usize,
    /// Count only scenarios with an input erasure and a preparation restart.
    #[arg(long)]
    pub input_plus_prep: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub timing: TimingOverrides,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub protocol: Scheme,
    #[arg(long)]
    pub code: CodeKind,
    /// Erased input qubits, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub initial: Vec<usize>,
    /// Chip events as CHIP@TIME, e.g. A@50us or 3@120us (chip index 1-based).
    #[arg(long, value_delimiter = ',')]
    pub event: Vec<String>,
    #[arg(long, env = "ERASURENET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the executed circuit in dump format.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub timing: TimingOverrides,
}

#[derive(Args, Debug)]
pub struct TimingArgs {
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub timing: TimingOverrides,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub faults: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub timing: TimingOverrides,
}

/// Parses `args`, runs the command and returns the exit code: 0 ok,
/// 1 verification failed, 2 usage or input error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buf));
    if let Err(e) = out.write_all(&buf) {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Rates(a) => cmd_rates(&a, out).map(|_| true),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out).map(|_| true),
        Command::Timing(a) => cmd_timing(&a, out).map(|_| true),
        Command::AuditSurface(a) => cmd_audit_surface(&a, out),
    }
}

fn write_or_print(path: &Option<PathBuf>, body: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn json(value: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Microseconds to nanosecond resolution, trailing zeros dropped.
fn pretty_us(x: f64) -> String {
    let s = format!("{:.3}", x * 1e6);
    format!("{} us", s.trim_end_matches('0').trim_end_matches('.'))
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

/// Recovery times of the four protocol/code cells.
const CELLS: [(Scheme, CodeKind); 4] = [
    (Scheme::ErasureFlag, CodeKind::FourQubit),
    (Scheme::ErasureFlag, CodeKind::Steane),
    (Scheme::Knill, CodeKind::FourQubit),
    (Scheme::Knill, CodeKind::Steane),
];

pub fn cmd_rates(a: &RatesArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.lambda = a.lambda.unwrap_or(cfg.lambda);
    cfg.trials = a.trials.unwrap_or(cfg.trials);
    cfg.seed = a.seed.or(cfg.seed);
    cfg.monte_carlo |= a.monte_carlo;
    let timing = a.timing.apply(cfg.timing_model())?;
    cfg.timing = timing.into();
    cfg.validate()?;
    let lambda = cfg.lambda;

    let mut rows: Vec<(f64, String)> = cfg.sweep.values()?.into_iter().map(|t| (t, String::new())).collect();
    for (scheme, code) in CELLS {
        rows.push((recovery_time(code, scheme, &timing)?, format!("{scheme}/{code}")));
    }

    let ft_verified = if cfg.monte_carlo {
        let code = cfg.code.build()?;
        cfg.scheme != Scheme::Nonft
            && verify_ft_exhaustive(cfg.scheme, &code, &timing, code.d - 1, Family::All)?.verdict == FtVerdict::Pass
    } else {
        false
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "tau_s",
        "marker",
        "gamma_unencoded",
        "gamma_exact_412",
        "gamma_exact_713",
        "gamma_approx_412",
        "gamma_approx_713",
        "gamma_nonft_upper_713",
        "lifetime_412_hours",
        "lifetime_713_days",
    ];
    if cfg.monte_carlo {
        header.extend(["mc_gamma", "mc_ci_low", "mc_ci_high"]);
    }
    w.write_record(&header)?;
    for (tau, marker) in rows {
        let g412 = gamma_exact(4, 2, lambda, tau)?;
        let g713 = gamma_exact(7, 3, lambda, tau)?;
        let mut rec = vec![
            sci(tau),
            marker,
            sci(lambda),
            sci(g412),
            sci(g713),
            sci(gamma_approx(4, 2, lambda, tau)?),
            sci(gamma_approx(7, 3, lambda, tau)?),
            sci(gamma_nonft_upper(lambda, tau)?),
            sci(crate::rates::hours(g412)),
            sci(crate::rates::days(g713)),
        ];
        if cfg.monte_carlo {
            if tau > 0.0 {
                let r = estimate_gamma(&RateParams {
                    scheme: cfg.scheme,
                    code: cfg.code,
                    lambda,
                    timing,
                    trials: cfg.trials,
                    seed: cfg.seed.unwrap_or(0),
                    tau_max: Some(tau),
                    ft_verified,
                })?;
                rec.extend([sci(r.gamma_hat), sci(r.ci_low), sci(r.ci_high)]);
            } else {
                rec.extend([sci(0.0), sci(0.0), sci(0.0)]);
            }
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let body = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let path = a.out.clone().or(cfg.output.csv.clone());
    write_or_print(&path, &body, out)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let timing = a.timing.apply(TimingModel::default())?;
    let code = a.code.build()?;
    let family = if a.input_plus_prep { Family::InputPlusPrep } else { Family::All };
    let report = verify_ft_exhaustive(a.protocol, &code, &timing, a.faults, family)?;
    write_or_print(&a.out, &json(&report)?, out)?;
    Ok(report.verdict == FtVerdict::Pass)
}

fn parse_event(s: &str, engine: &Engine) -> Result<FaultEvent> {
    let (chip, time) = s.split_once('@').ok_or_else(|| Error::Parse(format!("event {s:?} is not CHIP@TIME")))?;
    let chip = match chip.trim() {
        "A" | "a" if engine.n_chips() > engine.code().n => engine.code().n,
        c => {
            let digits = c.trim_start_matches(['D', 'd', 'C', 'c']);
            let i: usize = digits.parse().map_err(|_| Error::Parse(format!("bad chip {c:?}")))?;
            if i == 0 || i > engine.code().n {
                return Err(Error::Parse(format!("chip {c:?} out of range")));
            }
            i - 1
        }
    };
    Ok(FaultEvent { time: parse_duration(time)?, chip, location: None })
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let timing = a.timing.apply(TimingModel::default())?;
    let mut engine = Engine::new(a.protocol, a.code.build()?, timing)?;
    let n = engine.code().n;
    let initial: BTreeSet<usize> = a
        .initial
        .iter()
        .map(|&q| if q >= 1 && q <= n { Ok(q - 1) } else { Err(Error::IndexOutOfRange { index: q, n }) })
        .collect::<Result<_>>()?;
    let events = a.event.iter().map(|e| parse_event(e, &engine)).collect::<Result<Vec<_>>>()?;
    let mut sched = Schedule::new(events, engine.n_chips())?;
    engine.set_record(true);
    let outcome = engine.run(&initial, &mut sched, &mut Sampler::new(a.seed))?;
    out.write_all(outcome.trace_json_lines()?.as_bytes())?;
    if let (Some(p), Some(c)) = (&a.dump, &outcome.circuit) {
        std::fs::write(p, c.dump())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TimingCell {
    scheme: Scheme,
    code: CodeKind,
    formula_s: f64,
    engine_worst_s: f64,
    faults: usize,
}

#[derive(Serialize)]
struct TimingReport {
    t_sq_s: f64,
    t_scx_s: f64,
    t_nscx_s: f64,
    cells: Vec<TimingCell>,
}

/// Formula values next to the longest execution found by exhaustive
/// enumeration with d−1 faults.
pub fn cmd_timing(a: &TimingArgs, out: &mut dyn Write) -> Result<()> {
    let t = a.timing.apply(TimingModel::default())?;
    let mut cells = Vec::new();
    for (scheme, kind) in CELLS {
        let code = kind.build()?;
        let r = verify_ft_exhaustive(scheme, &code, &t, code.d - 1, Family::All)?;
        cells.push(TimingCell {
            scheme,
            code: kind,
            formula_s: recovery_time(kind, scheme, &t)?,
            engine_worst_s: r.worst_elapsed,
            faults: code.d - 1,
        });
    }
    let report = TimingReport { t_sq_s: t.t_sq(), t_scx_s: t.t_scx(), t_nscx_s: t.t_nscx(), cells };
    if a.json {
        out.write_all(json(&report)?.as_bytes())?;
        return Ok(());
    }
    writeln!(out, "t_SQ   {}", pretty_us(report.t_sq_s))?;
    writeln!(out, "t_SCX  {}", pretty_us(report.t_scx_s))?;
    writeln!(out, "t_NSCX {}", pretty_us(report.t_nscx_s))?;
    writeln!(out, "{:<14}{:<8}{:>14}{:>14}", "protocol", "code", "formula", "engine")?;
    for c in &report.cells {
        writeln!(
            out,
            "{:<14}{:<8}{:>14}{:>14}",
            c.scheme.name(),
            c.code.name(),
            pretty_us(c.formula_s),
            pretty_us(c.engine_worst_s)
        )?;
    }
    Ok(())
}

pub fn cmd_audit_surface(a: &AuditArgs, out: &mut dyn Write) -> Result<bool> {
    let timing = a.timing.apply(TimingModel::default())?;
    let report = surface_row_span_audit(a.d, &timing, a.faults)?;
    write_or_print(&a.out, &json(&report)?, out)?;
    Ok(report.violations == 0 && report.logical_failures == 0)
}
