//! Exhaustive fault-tolerance verification and stratified estimation of the
//! catastrophic rate.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choice::{derive_seed, Enumerator, Sampler};
use crate::circuit::FaultEvent;
use crate::codes::{CodeKind, StabilizerCode};
use crate::cre::CreProcess;
use crate::error::{Error, Result};
use crate::protocol::{Engine, Enumerated, ProtocolOutcome, Schedule, TraceEvent};
use crate::rates::{gamma_exact, gamma_nonft_upper, poisson_pmf, poisson_tail};
use crate::timing::{recovery_time, Scheme, TimingModel};

/// Replayable failing scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtFailure {
    pub initial: Vec<usize>,
    pub choices: Vec<usize>,
    pub residual: String,
    pub restarts: usize,
    pub trace: Vec<TraceEvent>,
    pub dump: Option<String>,
}

/// Scenarios to count toward the verdict.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    #[default]
    All,
    /// At least one input erasure and at least one preparation restart.
    InputPlusPrep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FtVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtReport {
    pub scheme: Scheme,
    pub code: String,
    pub max_faults: usize,
    pub family: Family,
    pub out_of_guarantee: bool,
    pub scenarios: u64,
    pub failure_count: u64,
    /// First failures in enumeration order, with full traces.
    pub failures: Vec<FtFailure>,
    pub worst_elapsed: f64,
    pub max_restarts: usize,
    pub audit_points: u64,
    pub audit_violations: u64,
    pub verdict: FtVerdict,
}

/// Failures kept with a trace.
pub const KEPT_FAILURES: usize = 8;

#[derive(Default)]
struct Tally {
    scenarios: u64,
    failures: Vec<(Vec<usize>, Vec<usize>)>,
    failure_count: u64,
    worst_elapsed: f64,
    max_restarts: usize,
    audit_points: u64,
    audit_violations: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.scenarios += other.scenarios;
        self.failure_count += other.failure_count;
        let room = KEPT_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        self.worst_elapsed = self.worst_elapsed.max(other.worst_elapsed);
        self.max_restarts = self.max_restarts.max(other.max_restarts);
        self.audit_points += other.audit_points;
        self.audit_violations += other.audit_violations;
        self
    }
}

/// Rows and columns spanned by each audit point never exceed the faults
/// seen so far. Returns (points, violations); codes without a grid give
/// (0, 0).
pub fn audit_outcome(code: &StabilizerCode, out: &ProtocolOutcome) -> (u64, u64) {
    let mut points = 0;
    let mut bad = 0;
    for a in &out.audit {
        let Some((rows, cols)) = code.rows_and_columns(a.support) else {
            return (0, 0);
        };
        points += 1;
        if rows.len() > a.faults || cols.len() > a.faults {
            bad += 1;
        }
    }
    (points, bad)
}

fn counts(family: Family, initial: &BTreeSet<usize>, out: &ProtocolOutcome) -> bool {
    match family {
        Family::All => true,
        Family::InputPlusPrep => !initial.is_empty() && out.restarts > 0,
    }
}

fn enumerate_subset(engine: &mut Engine, initial: &BTreeSet<usize>, budget: usize, family: Family) -> Result<Tally> {
    let mut tally = Tally::default();
    let mut chooser = Enumerator::new();
    loop {
        let mut faults = Enumerated { budget };
        let out = engine.run(initial, &mut faults, &mut chooser)?;
        if counts(family, initial, &out) {
            tally.scenarios += 1;
            tally.worst_elapsed = tally.worst_elapsed.max(out.elapsed);
            tally.max_restarts = tally.max_restarts.max(out.restarts);
            let (p, v) = audit_outcome(engine.code(), &out);
            tally.audit_points += p;
            tally.audit_violations += v;
            if !out.is_success() {
                tally.failure_count += 1;
                if tally.failures.len() < KEPT_FAILURES {
                    tally.failures.push((initial.iter().copied().collect(), chooser.path()));
                }
            }
        }
        if !chooser.advance() {
            return Ok(tally);
        }
    }
}

/// Replays one scenario with full recording.
pub fn replay(engine: &mut Engine, initial: &[usize], choices: &[usize], budget: usize) -> Result<ProtocolOutcome> {
    engine.set_record(true);
    let initial: BTreeSet<usize> = initial.iter().copied().collect();
    engine.run(&initial, &mut Enumerated { budget }, &mut Enumerator::replay(choices))
}

/// Every placement of up to `max_faults` chip hits: `s1` input erasures on
/// data qubits and `max_faults − s1` hits anywhere in the execution, with
/// every Pauli and discard branch. With no input erasures a detection-step
/// hit is the trigger.
pub fn verify_ft_exhaustive(
    scheme: Scheme,
    code: &StabilizerCode,
    timing: &TimingModel,
    max_faults: usize,
    family: Family,
) -> Result<FtReport> {
    Engine::new(scheme, code.clone(), *timing)?;
    let tasks: Vec<BTreeSet<usize>> =
        (0..=max_faults).flat_map(|s1| (0..code.n).combinations(s1).map(|c| c.into_iter().collect())).collect();
    let tallies: Vec<Result<Tally>> = tasks
        .par_iter()
        .map(|initial| {
            let mut engine = Engine::new(scheme, code.clone(), *timing)?;
            engine.set_record(false);
            enumerate_subset(&mut engine, initial, max_faults - initial.len(), family)
        })
        .collect();
    let mut tally = Tally::default();
    for t in tallies {
        tally = tally.merge(t?);
    }
    let mut engine = Engine::new(scheme, code.clone(), *timing)?;
    let mut failures = Vec::new();
    for (initial, choices) in &tally.failures {
        let out = replay(&mut engine, initial, choices, max_faults - initial.len())?;
        failures.push(FtFailure {
            initial: initial.clone(),
            choices: choices.clone(),
            residual: out.residual.clone(),
            restarts: out.restarts,
            dump: out.circuit.as_ref().map(|c| c.dump()),
            trace: out.trace,
        });
    }
    let verdict = if tally.failure_count == 0 && tally.audit_violations == 0 { FtVerdict::Pass } else { FtVerdict::Fail };
    Ok(FtReport {
        scheme,
        code: code.label.clone(),
        max_faults,
        family,
        out_of_guarantee: max_faults + 1 > code.d,
        scenarios: tally.scenarios,
        failure_count: tally.failure_count,
        failures,
        worst_elapsed: tally.worst_elapsed,
        max_restarts: tally.max_restarts,
        audit_points: tally.audit_points,
        audit_violations: tally.audit_violations,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceAudit {
    pub d: usize,
    pub max_faults: usize,
    pub scenarios: u64,
    pub logical_failures: u64,
    pub audit_points: u64,
    pub violations: u64,
    pub failures: Vec<FtFailure>,
}

/// Row/column span audit of the erasure-flag engine on the planar code,
/// over every scenario with up to `max_faults` hits.
pub fn surface_row_span_audit(d: usize, timing: &TimingModel, max_faults: usize) -> Result<SurfaceAudit> {
    let code = CodeKind::Surface(d).build()?;
    let r = verify_ft_exhaustive(Scheme::ErasureFlag, &code, timing, max_faults, Family::All)?;
    Ok(SurfaceAudit {
        d,
        max_faults,
        scenarios: r.scenarios,
        logical_failures: r.failure_count,
        audit_points: r.audit_points,
        violations: r.audit_violations,
        failures: r.failures,
    })
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub scheme: Scheme,
    pub code: CodeKind,
    pub lambda: f64,
    pub timing: TimingModel,
    pub trials: u64,
    pub seed: u64,
    /// Worst-case window; the closed-form recovery time when absent.
    pub tau_max: Option<f64>,
    /// Strata with at most d−2 extra events are known to succeed.
    pub ft_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub k: u32,
    pub weight: f64,
    pub trials: u64,
    pub failures: u64,
    pub f_k: f64,
    pub f_low: f64,
    pub f_high: f64,
    pub exact: bool,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub scheme: Scheme,
    pub code: String,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub tau_max: f64,
    pub n_chips: usize,
    pub seed: u64,
    pub gamma_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tail_weight: f64,
    pub strata: Vec<Stratum>,
    pub gamma_exact: f64,
    pub gamma_nonft_upper: f64,
}

/// One trial: a trigger on a uniform data chip at time zero plus `k` extra
/// events at uniform times in `[0, tau)` on uniform chips.
pub fn stratum_trial(engine: &mut Engine, proc: &CreProcess, tau: f64, k: u32, seed: u64) -> Result<ProtocolOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let trigger = rng.gen_range(0..engine.code().n);
    let mut events: Vec<FaultEvent> = (0..k)
        .map(|_| FaultEvent { time: rng.gen_range(0.0..tau), chip: rng.gen_range(0..proc.n_chips), location: None })
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.chip.cmp(&b.chip)));
    let mut sched = Schedule::new(events, proc.n_chips)?;
    let mut chooser = Sampler::new(derive_seed(seed, &[1]));
    engine.run(&BTreeSet::from([trigger]), &mut sched, &mut chooser)
}

/// Stratified estimate Γ̂ = nλ Σ_k w_k f_k over k = 0..=d+1 extra events,
/// w_k Poisson with mean (chips)·λ·τ_max. The tail beyond d+1 is added to
/// the upper bound.
pub fn estimate_gamma(params: &RateParams) -> Result<RateResult> {
    if params.trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let code = params.code.build()?;
    let tau = match params.tau_max {
        Some(t) => t,
        None => recovery_time(params.code, params.scheme, &params.timing)?,
    };
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("tau_max must be positive, got {tau}")));
    }
    let engine = Engine::new(params.scheme, code.clone(), params.timing)?;
    let proc = CreProcess::new(params.lambda, engine.n_chips())?;
    let mean = proc.total_rate() * tau;
    let (n, d) = (code.n, code.d);
    let trigger_rate = n as f64 * params.lambda;
    let mut strata = Vec::new();
    for k in 0..=(d as u32 + 1) {
        let weight = poisson_pmf(k, mean);
        let exact = params.ft_verified && (k as usize) + 2 <= d;
        let (trials, failures) = if exact {
            (0, 0)
        } else {
            let fails: Result<Vec<bool>> = (0..params.trials)
                .into_par_iter()
                .map_init(
                    || {
                        let mut e = Engine::new(params.scheme, code.clone(), params.timing).expect("validated");
                        e.set_record(false);
                        e
                    },
                    |e, i| Ok(!stratum_trial(e, &proc, tau, k, derive_seed(params.seed, &[k as u64, i]))?.is_success()),
                )
                .collect();
            (params.trials, fails?.iter().filter(|&&f| f).count() as u64)
        };
        let (f_k, f_low, f_high) = if exact {
            (0.0, 0.0, 0.0)
        } else {
            let (lo, hi) = wilson_interval(failures, trials);
            (failures as f64 / trials as f64, lo, hi)
        };
        strata.push(Stratum { k, weight, trials, failures, f_k, f_low, f_high, exact, contribution: trigger_rate * weight * f_k });
    }
    let tail_weight = poisson_tail(d as u32 + 2, mean);
    let gamma_hat = strata.iter().map(|s| s.contribution).sum();
    let ci_low = trigger_rate * strata.iter().map(|s| s.weight * s.f_low).sum::<f64>();
    let ci_high = trigger_rate * (strata.iter().map(|s| s.weight * s.f_high).sum::<f64>() + tail_weight);
    Ok(RateResult {
        scheme: params.scheme,
        code: code.label.clone(),
        n,
        d,
        lambda: params.lambda,
        tau_max: tau,
        n_chips: proc.n_chips,
        seed: params.seed,
        gamma_hat,
        ci_low,
        ci_high,
        tail_weight,
        strata,
        gamma_exact: gamma_exact(n, d, params.lambda, tau)?,
        gamma_nonft_upper: gamma_nonft_upper(params.lambda, tau)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::four_qubit_code;

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn four_qubit_flag_single_fault() {
        let t = TimingModel::default();
        let r = verify_ft_exhaustive(Scheme::ErasureFlag, &four_qubit_code(), &t, 1, Family::All).unwrap();
        assert_eq!(r.verdict, FtVerdict::Pass, "{:?}", r.failures.first());
        // Input or detection-step hit on each data qubit with four Paulis, an
        // ancilla hit at detection, and the quiet run.
        assert_eq!(r.scenarios, 2 * 4 * 4 + 2);
        assert!(!r.out_of_guarantee);
    }

    #[test]
    fn four_qubit_two_faults_is_out_of_guarantee() {
        let t = TimingModel::default();
        let r = verify_ft_exhaustive(Scheme::ErasureFlag, &four_qubit_code(), &t, 2, Family::All).unwrap();
        assert!(r.out_of_guarantee);
        assert_eq!(r.verdict, FtVerdict::Fail);
        let f = &r.failures[0];
        let mut e = Engine::new(Scheme::ErasureFlag, four_qubit_code(), t).unwrap();
        let again = replay(&mut e, &f.initial, &f.choices, 2 - f.initial.len()).unwrap();
        assert!(!again.is_success());
        assert!(f.dump.is_some());
    }

    #[test]
    fn stratified_estimate_is_reproducible() {
        let p = RateParams {
            scheme: Scheme::ErasureFlag,
            code: CodeKind::FourQubit,
            lambda: 0.1,
            timing: TimingModel::default(),
            trials: 200,
            seed: 9,
            tau_max: None,
            ft_verified: true,
        };
        let a = estimate_gamma(&p).unwrap();
        assert_eq!(a, estimate_gamma(&p).unwrap());
        assert!(a.strata[0].exact && a.strata[0].contribution == 0.0);
        assert!(a.ci_low <= a.gamma_hat && a.gamma_hat <= a.ci_high);
        let sum: f64 = a.strata.iter().map(|s| s.contribution).sum();
        assert_eq!(sum, a.gamma_hat);
    }
}
