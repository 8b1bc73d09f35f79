//! Shared runtime for protocol state machines: fault sources, step
//! execution against a Pauli frame, traces and outcomes.

pub mod erasure_flag;
pub mod knill;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::choice::{Chooser, Stream};
use crate::circuit::{Circuit, FaultEvent, Gate, Qubit};
use crate::codes::{ErasureFlagSet, ErrorClass, StabilizerCode};
use crate::error::{Error, Result};
use crate::frame::PauliFrame;
use crate::pauli::{self, PauliOp};

pub use erasure_flag::{run_erasure_flag, run_nonft_steane, FlagEngine};
pub use knill::{run_knill, KnillEngine};

use crate::timing::{Scheme, TimingModel};

/// Decides which chips a step's window is hit by.
pub trait FaultSource {
    fn hits(&mut self, step: usize, start: f64, end: f64, n_chips: usize, chooser: &mut dyn Chooser) -> Vec<usize>;
}

pub struct NoFaults;

impl FaultSource for NoFaults {
    fn hits(&mut self, _: usize, _: f64, _: f64, _: usize, _: &mut dyn Chooser) -> Vec<usize> {
        Vec::new()
    }
}

/// Fixed list of events. An event with a `location` fires on that executed
/// step; otherwise on the step whose window `[start, end)` contains its
/// time. Events past the end of the run never fire.
#[derive(Clone, Debug)]
pub struct Schedule {
    events: Vec<FaultEvent>,
    fired: Vec<bool>,
}

impl Schedule {
    pub fn new(events: Vec<FaultEvent>, n_chips: usize) -> Result<Self> {
        for e in &events {
            if !(e.time >= 0.0 && e.time.is_finite()) {
                return Err(Error::Parameter(format!("fault time {} must be finite and non-negative", e.time)));
            }
            if e.chip >= n_chips {
                return Err(Error::Parameter(format!("fault on chip {} but only {n_chips} chips", e.chip)));
            }
        }
        let fired = vec![false; events.len()];
        Ok(Self { events, fired })
    }

    pub fn fired(&self) -> usize {
        self.fired.iter().filter(|&&f| f).count()
    }
}

impl FaultSource for Schedule {
    fn hits(&mut self, step: usize, start: f64, end: f64, _: usize, _: &mut dyn Chooser) -> Vec<usize> {
        let mut out = Vec::new();
        for (e, fired) in self.events.iter().zip(self.fired.iter_mut()) {
            if *fired {
                continue;
            }
            let lands = match e.location {
                Some(loc) => loc == step,
                None => end > start && e.time >= start && e.time < end,
            };
            if lands {
                *fired = true;
                if !out.contains(&e.chip) {
                    out.push(e.chip);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Offers every chip subset (in increasing chip order) at every step of
/// positive duration, up to `budget` hits in total.
#[derive(Clone, Debug)]
pub struct Enumerated {
    pub budget: usize,
}

impl FaultSource for Enumerated {
    fn hits(&mut self, _: usize, start: f64, end: f64, n_chips: usize, chooser: &mut dyn Chooser) -> Vec<usize> {
        let mut out = Vec::new();
        if end <= start {
            return out;
        }
        let mut next = 0;
        while self.budget > 0 && next < n_chips {
            let c = chooser.choose(Stream::Erasure, 1 + n_chips - next);
            if c == 0 {
                break;
            }
            let chip = next + c - 1;
            out.push(chip);
            self.budget -= 1;
            next = chip + 1;
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    LogicalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Fault { step: usize, time: f64, chips: Vec<String>, erased: Vec<String>, bad: bool },
    Erasure { qubit: String, pauli: String },
    FlagSet { factors: Vec<Vec<String>> },
    Select { checks: Vec<String>, fallback: bool },
    Measurement { check: String, outcome: bool },
    Abort { s: usize, discard: String },
    Overflow { s: usize },
    Restart { restarts: usize },
    Readout { block: String, operator: String, flip: bool },
    Correction { pauli: String, inconsistent: bool },
    Verdict { verdict: Verdict, residual: String, class: ErrorClass, elapsed: f64 },
}

/// Snapshot before a stabilizer measurement: support of the flag set and
/// chip hits so far (trigger included).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub support: u64,
    pub faults: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub verdict: Verdict,
    pub residual_class: ErrorClass,
    pub residual: String,
    pub elapsed: f64,
    pub faults_seen: usize,
    pub restarts: usize,
    pub overflowed: bool,
    pub syndrome_inconsistent: bool,
    pub logical_erased: bool,
    pub audit: Vec<AuditPoint>,
    pub trace: Vec<TraceEvent>,
    #[serde(skip)]
    pub circuit: Option<Circuit>,
}

impl ProtocolOutcome {
    pub fn is_success(&self) -> bool {
        self.verdict == Verdict::Success
    }

    pub fn trace_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Any of the three protocols behind one interface.
pub enum Engine {
    Flag(FlagEngine),
    Nonft(FlagEngine),
    Knill(KnillEngine),
}

impl Engine {
    pub fn new(scheme: Scheme, code: StabilizerCode, timing: TimingModel) -> Result<Self> {
        Ok(match scheme {
            Scheme::ErasureFlag => Engine::Flag(FlagEngine::new(code, timing)?),
            Scheme::Nonft => Engine::Nonft(FlagEngine::new(code, timing)?),
            Scheme::Knill => Engine::Knill(KnillEngine::new(code, timing)?),
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Engine::Flag(_) => Scheme::ErasureFlag,
            Engine::Nonft(_) => Scheme::Nonft,
            Engine::Knill(_) => Scheme::Knill,
        }
    }

    pub fn code(&self) -> &StabilizerCode {
        match self {
            Engine::Flag(e) | Engine::Nonft(e) => &e.code,
            Engine::Knill(e) => &e.code,
        }
    }

    /// Data chips plus the ancilla chip for the measurement-based schemes.
    pub fn n_chips(&self) -> usize {
        match self {
            Engine::Flag(e) | Engine::Nonft(e) => e.code.n + 1,
            Engine::Knill(e) => e.code.n,
        }
    }

    pub fn set_record(&mut self, record: bool) {
        match self {
            Engine::Flag(e) | Engine::Nonft(e) => e.record = record,
            Engine::Knill(e) => e.record = record,
        }
    }

    pub fn run(
        &mut self,
        initial: &BTreeSet<usize>,
        faults: &mut dyn FaultSource,
        chooser: &mut dyn Chooser,
    ) -> Result<ProtocolOutcome> {
        match self {
            Engine::Flag(e) => e.run(initial, faults, chooser),
            Engine::Nonft(e) => e.run_nonft(initial, faults, chooser),
            Engine::Knill(e) => e.run(initial, faults, chooser),
        }
    }
}

/// Member of `E` whose syndrome on `checks` equals `bits`; the first in
/// expansion order.
pub fn decode_within_flag_set(flag: &ErasureFlagSet, checks: &[PauliOp], bits: &[bool]) -> Result<PauliOp> {
    if checks.len() != bits.len() {
        return Err(Error::Dimension { expected: checks.len(), actual: bits.len() });
    }
    let want = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
    flag.expand()
        .into_iter()
        .find(|m| pauli::syndrome_mask(m, checks) == want)
        .ok_or(Error::SyndromeInconsistent)
}

pub(crate) struct StepResult {
    pub index: usize,
    pub hits: Vec<usize>,
    pub erased: BTreeSet<usize>,
    pub flips: Vec<bool>,
}

/// Execution state shared by the protocols: the executed circuit, the error
/// frame over every qubit, the clock and the trace.
pub(crate) struct Exec<'a> {
    pub circuit: Circuit,
    pub frame: PauliFrame,
    pub clock: f64,
    pub faults: &'a mut dyn FaultSource,
    pub chooser: &'a mut dyn Chooser,
    pub trace: Vec<TraceEvent>,
    pub faults_seen: usize,
    pub record: bool,
}

impl<'a> Exec<'a> {
    pub fn new(
        chips: Vec<String>,
        qubits: Vec<Qubit>,
        faults: &'a mut dyn FaultSource,
        chooser: &'a mut dyn Chooser,
        record: bool,
    ) -> Result<Self> {
        let n = qubits.len();
        Ok(Self {
            circuit: Circuit::new(chips, qubits)?,
            frame: PauliFrame::new(n),
            clock: 0.0,
            faults,
            chooser,
            trace: Vec::new(),
            faults_seen: 0,
            record,
        })
    }

    pub fn n_chips(&self) -> usize {
        self.circuit.chips.len()
    }

    pub fn label(&self, q: usize) -> String {
        self.circuit.qubits[q].label.clone()
    }

    pub fn log(&mut self, e: impl FnOnce(&Self) -> TraceEvent) {
        if self.record {
            let ev = e(self);
            self.trace.push(ev);
        }
    }

    /// Runs one step: asks the fault source for hits in its window, then
    /// propagates the frame through the ops. Erasure Paulis are left to the
    /// caller, which injects them after the step.
    pub fn step(&mut self, gates: &[(Gate, f64)]) -> Result<StepResult> {
        let ops = gates.iter().map(|&(g, d)| self.circuit.op(g, d)).collect();
        self.circuit.push_step(ops)?;
        let index = self.circuit.steps.len() - 1;
        let duration = self.circuit.steps[index].duration();
        let (start, end) = (self.clock, self.clock + duration);
        let n_chips = self.n_chips();
        let hits = self.faults.hits(index, start, end, n_chips, &mut *self.chooser);
        let mut flips = Vec::new();
        for &(g, _) in gates {
            if let Some(f) = self.frame.apply(&g) {
                flips.push(f);
            }
        }
        self.clock = end;
        let erased = if hits.is_empty() { BTreeSet::new() } else { self.circuit.erased_by(index, &hits) };
        self.faults_seen += hits.len();
        Ok(StepResult { index, hits, erased, flips })
    }

    /// Leaves a uniformly random Pauli on `q`.
    pub fn erase(&mut self, q: usize) -> PauliOp {
        let n = self.circuit.num_qubits();
        let p = crate::choice::erasure_to_pauli(n, q, &mut *self.chooser);
        self.frame.inject(&p).expect("same width");
        self.log(|ex| TraceEvent::Erasure { qubit: ex.label(q), pauli: p.to_string() });
        p
    }

    pub fn log_fault(&mut self, r: &StepResult, bad: bool) {
        let start = self.circuit.step_windows()[r.index].0;
        self.log(|ex| TraceEvent::Fault {
            step: r.index,
            time: start,
            chips: r.hits.iter().map(|&c| ex.circuit.chips[c].clone()).collect(),
            erased: r.erased.iter().map(|&q| ex.label(q)).collect(),
            bad,
        });
    }
}

/// Memo of minimal check subsets keyed by the flag set's pair products.
#[derive(Default)]
pub(crate) struct SubsetCache {
    map: HashMap<Vec<PauliOp>, Option<Vec<usize>>>,
}

impl SubsetCache {
    pub fn get(&mut self, code: &StabilizerCode, flag: &ErasureFlagSet) -> Result<Option<Vec<usize>>> {
        let key = flag.pair_products();
        if let Some(v) = self.map.get(&key) {
            return Ok(v.clone());
        }
        let v = match crate::codes::minimal_check_indices(code, flag) {
            Ok(v) => Some(v),
            Err(Error::UncorrectableFlagSet) => None,
            Err(e) => return Err(e),
        };
        self.map.insert(key, v.clone());
        Ok(v)
    }
}

pub(crate) fn verdict_for(class: ErrorClass) -> Verdict {
    if class == ErrorClass::Trivial {
        Verdict::Success
    } else {
        Verdict::LogicalFailure
    }
}
