//! Adaptive erasure-flag error correction with a single shared ancilla
//! chip, and the fixed-order baseline it improves on.

use std::collections::BTreeSet;

use crate::choice::{Chooser, Stream};
use crate::circuit::{Gate, Qubit};
use crate::codes::{ErasureFlagSet, StabilizerCode};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;
use crate::timing::TimingModel;

use super::{
    decode_within_flag_set, verdict_for, AuditPoint, Exec, FaultSource, ProtocolOutcome, StepResult, SubsetCache,
    TraceEvent,
};

/// Data qubit i on chip i, the ancilla (index n) on chip n.
pub fn flag_layout(n: usize) -> (Vec<String>, Vec<Qubit>) {
    let mut chips: Vec<String> = (1..=n).map(|i| format!("D{i}")).collect();
    chips.push("A".into());
    let mut qubits: Vec<Qubit> = (0..n).map(|i| Qubit { label: format!("d{}", i + 1), chip: i }).collect();
    qubits.push(Qubit { label: "a".into(), chip: n });
    (chips, qubits)
}

/// Gates measuring `check` through the ancilla `a`, with durations.
pub fn measurement_gates(check: &PauliOp, a: usize, timing: &TimingModel) -> Result<Vec<(Gate, f64)>> {
    let x_type = check.is_x_type();
    if !x_type && !check.is_z_type() {
        return Err(Error::Unsupported(format!("mixed-type stabilizer {check}")));
    }
    let mut gates = vec![(Gate::PrepPlus { qubit: a }, timing.t_sq())];
    for q in check.support_qubits() {
        let g = if x_type { Gate::CX { control: a, target: q } } else { Gate::CZ { a, b: q } };
        gates.push((g, timing.t_nscx()));
    }
    gates.push((Gate::MeasX { qubit: a }, timing.t_sq()));
    Ok(gates)
}

/// Standalone circuit measuring one stabilizer, on the standard layout.
pub fn build_measurement_circuit(check: &PauliOp, timing: &TimingModel) -> Result<crate::circuit::Circuit> {
    let n = check.n();
    let (chips, qubits) = flag_layout(n);
    let mut c = crate::circuit::Circuit::new(chips, qubits)?;
    for g in measurement_gates(&check.embed(n + 1, 0), n, timing)? {
        c.push(&[g])?;
    }
    Ok(c)
}

/// Data-side residue of an ancilla discarded after the gates on `completed`.
pub fn discard_entangled_ancilla(n: usize, x_type: bool, completed: &[usize]) -> PauliOp {
    if x_type {
        PauliOp::x_on(n, completed)
    } else {
        PauliOp::z_on(n, completed)
    }
}

/// Fixed measurement order of the baseline: for the seven-qubit code the
/// plaquettes {3,4,6,7}, {1,2,3,4}, {2,3,5,6}, X before Z; otherwise
/// generator order.
pub fn nonft_order(code: &StabilizerCode) -> Vec<PauliOp> {
    if code.generators == crate::codes::steane_code().generators {
        [2, 5, 0, 3, 1, 4].iter().map(|&i| code.generators[i]).collect()
    } else {
        code.generators.clone()
    }
}

enum Meas {
    Clean(bool),
    Aborted,
    Disturbed,
}

/// Reusable engine: holds the code, timing and a cache of minimal check
/// subsets shared across runs.
pub struct FlagEngine {
    pub code: StabilizerCode,
    pub timing: TimingModel,
    /// Keep a full trace in outcomes.
    pub record: bool,
    cache: SubsetCache,
}

impl FlagEngine {
    pub fn new(code: StabilizerCode, timing: TimingModel) -> Result<Self> {
        code.validate()?;
        if let Some(g) = code.generators.iter().find(|g| !g.is_x_type() && !g.is_z_type()) {
            return Err(Error::Unsupported(format!("mixed-type stabilizer {g}")));
        }
        timing.validate()?;
        Ok(Self { code, timing, record: true, cache: SubsetCache::default() })
    }

    fn check_initial(&self, initial: &BTreeSet<usize>) -> Result<()> {
        match initial.iter().find(|&&q| q >= self.code.n) {
            Some(&q) => Err(Error::IndexOutOfRange { index: q, n: self.code.n }),
            None => Ok(()),
        }
    }

    pub fn run(
        &mut self,
        initial: &BTreeSet<usize>,
        faults: &mut dyn FaultSource,
        chooser: &mut dyn Chooser,
    ) -> Result<ProtocolOutcome> {
        self.check_initial(initial)?;
        let n = self.code.n;
        let (chips, qubits) = flag_layout(n);
        let ex = Exec::new(chips, qubits, faults, chooser, self.record)?;
        let run = FlagRun {
            code: &self.code,
            timing: &self.timing,
            cache: &mut self.cache,
            ex,
            flag: ErasureFlagSet::new(n),
            s: 0,
            t: self.code.d - 1,
            restarts: 0,
            overflowed: false,
            inconsistent: false,
            late: Vec::new(),
            audit: Vec::new(),
        };
        run.execute(initial)
    }

    pub fn run_nonft(
        &mut self,
        initial: &BTreeSet<usize>,
        faults: &mut dyn FaultSource,
        chooser: &mut dyn Chooser,
    ) -> Result<ProtocolOutcome> {
        self.check_initial(initial)?;
        let n = self.code.n;
        let (chips, qubits) = flag_layout(n);
        let mut ex = Exec::new(chips, qubits, faults, chooser, self.record)?;
        let mut naive = ErasureFlagSet::new(n);
        for &q in initial {
            ex.erase(q);
            naive.push_erased_qubit(q)?;
        }
        ex.faults_seen += initial.len();
        let r = ex.step(&[(Gate::Detect, self.timing.t_sq())])?;
        erase_hit_qubits(&mut ex, &r, &mut naive, false)?;
        if naive.is_trivial() {
            return finish(&self.code, ex, 0, false, false, Vec::new());
        }
        let order = nonft_order(&self.code);
        let mut bits = Vec::with_capacity(order.len());
        let mut audit = Vec::new();
        for check in &order {
            audit.push(AuditPoint { support: naive.support(), faults: ex.faults_seen });
            let mut bit = false;
            for g in measurement_gates(&check.embed(n + 1, 0), n, &self.timing)? {
                let r = ex.step(&[g])?;
                if let Some(&f) = r.flips.first() {
                    bit = f;
                }
                erase_hit_qubits(&mut ex, &r, &mut naive, true)?;
            }
            ex.log(|_| TraceEvent::Measurement { check: check.to_string(), outcome: bit });
            bits.push(bit);
        }
        let (correction, inconsistent) = match decode_within_flag_set(&naive, &order, &bits) {
            Ok(c) => (c, false),
            Err(Error::SyndromeInconsistent) => (PauliOp::identity(n), true),
            Err(e) => return Err(e),
        };
        ex.frame.inject(&correction.embed(n + 1, 0))?;
        ex.log(|_| TraceEvent::Correction { pauli: correction.to_string(), inconsistent });
        finish(&self.code, ex, 0, false, inconsistent, audit)
    }
}

/// Erasure Paulis for every qubit erased in `r`; data qubits also get a flag
/// factor. With `ancilla_too` false the ancilla is left alone.
fn erase_hit_qubits(ex: &mut Exec, r: &StepResult, flag: &mut ErasureFlagSet, ancilla_too: bool) -> Result<()> {
    if r.hits.is_empty() {
        return Ok(());
    }
    ex.log_fault(r, false);
    let n = flag.n();
    for &q in &r.erased {
        if q < n {
            ex.erase(q);
            flag.push_erased_qubit(q)?;
        } else if ancilla_too {
            ex.erase(q);
        }
    }
    Ok(())
}

fn finish(
    code: &StabilizerCode,
    mut ex: Exec,
    restarts: usize,
    overflowed: bool,
    inconsistent: bool,
    audit: Vec<AuditPoint>,
) -> Result<ProtocolOutcome> {
    let residual = ex.frame.op().slice(0, code.n);
    let class = code.classify(&residual)?;
    let verdict = verdict_for(class);
    let elapsed = ex.clock;
    ex.log(|_| TraceEvent::Verdict { verdict, residual: residual.to_string(), class, elapsed });
    Ok(ProtocolOutcome {
        verdict,
        residual_class: class,
        residual: residual.to_string(),
        elapsed,
        faults_seen: ex.faults_seen,
        restarts,
        overflowed,
        syndrome_inconsistent: inconsistent,
        logical_erased: false,
        audit,
        trace: std::mem::take(&mut ex.trace),
        circuit: ex.record.then_some(ex.circuit),
    })
}

struct FlagRun<'e, 'a> {
    code: &'e StabilizerCode,
    timing: &'e TimingModel,
    cache: &'e mut SubsetCache,
    ex: Exec<'a>,
    flag: ErasureFlagSet,
    s: usize,
    t: usize,
    restarts: usize,
    overflowed: bool,
    inconsistent: bool,
    late: Vec<(PauliOp, bool)>,
    audit: Vec<AuditPoint>,
}

impl FlagRun<'_, '_> {
    fn n(&self) -> usize {
        self.code.n
    }

    fn log_flag(&mut self) {
        let factors = self.flag.render();
        self.ex.log(|_| TraceEvent::FlagSet { factors });
    }

    fn execute(mut self, initial: &BTreeSet<usize>) -> Result<ProtocolOutcome> {
        for &q in initial {
            self.ex.erase(q);
            self.flag.push_erased_qubit(q)?;
        }
        self.ex.faults_seen += initial.len();
        let r = self.ex.step(&[(Gate::Detect, self.timing.t_sq())])?;
        erase_hit_qubits(&mut self.ex, &r, &mut self.flag, false)?;
        self.log_flag();

        'select: loop {
            if self.flag.is_trivial() {
                break;
            }
            let (checks, fallback) = match self.cache.get(self.code, &self.flag)? {
                Some(idx) => (idx.iter().map(|&i| self.code.generators[i]).collect::<Vec<_>>(), false),
                None => (self.code.generators.clone(), true),
            };
            self.ex.log(|_| TraceEvent::Select { checks: checks.iter().map(ToString::to_string).collect(), fallback });
            for check in checks {
                self.audit.push(AuditPoint { support: self.flag.support(), faults: self.ex.faults_seen });
                match self.measure(&check)? {
                    Meas::Clean(bit) => {
                        self.ex.log(|_| TraceEvent::Measurement { check: check.to_string(), outcome: bit });
                        if self.overflowed {
                            self.late.push((check, bit));
                        } else {
                            self.fold(&check, bit);
                        }
                    }
                    Meas::Aborted | Meas::Disturbed => {
                        self.restarts += 1;
                        let restarts = self.restarts;
                        self.ex.log(|_| TraceEvent::Restart { restarts });
                        self.log_flag();
                        continue 'select;
                    }
                }
            }
            break;
        }

        if self.overflowed {
            let (checks, bits): (Vec<PauliOp>, Vec<bool>) = self.late.iter().copied().unzip();
            let n = self.n();
            let correction = match decode_within_flag_set(&self.flag, &checks, &bits) {
                Ok(c) => c,
                Err(Error::SyndromeInconsistent) => {
                    self.inconsistent = true;
                    PauliOp::identity(n)
                }
                Err(e) => return Err(e),
            };
            self.ex.frame.inject(&correction.embed(n + 1, 0))?;
            let inconsistent = self.inconsistent;
            self.ex.log(|_| TraceEvent::Correction { pauli: correction.to_string(), inconsistent });
        }
        finish(self.code, self.ex, self.restarts, self.overflowed, self.inconsistent, self.audit)
    }

    /// Narrows the flag set to members consistent with `bit` and corrects by
    /// one of them.
    fn fold(&mut self, check: &PauliOp, bit: bool) {
        let n = self.n();
        let matching: Vec<PauliOp> =
            self.flag.expand().into_iter().filter(|e| !e.commutes_unchecked(check) == bit).collect();
        let Some(&r) = matching.first() else {
            self.inconsistent = true;
            return;
        };
        self.ex.frame.inject(&r.embed(n + 1, 0)).expect("same width");
        self.flag = ErasureFlagSet::from_members(n, matching.iter().map(|e| *e * r)).expect("same width");
        if !r.is_identity() {
            self.ex.log(|_| TraceEvent::Correction { pauli: r.to_string(), inconsistent: false });
        }
        self.log_flag();
    }

    /// Replaces `chips` during one detection-length step. Data chips hit in
    /// the meantime join the flag set.
    fn replace(&mut self, chips: &BTreeSet<usize>) -> Result<()> {
        let gates: Vec<(Gate, f64)> =
            chips.iter().map(|&chip| (Gate::ReplaceChip { chip }, self.timing.t_sq())).collect();
        let r = self.ex.step(&gates)?;
        erase_hit_qubits(&mut self.ex, &r, &mut self.flag, false)
    }

    fn measure(&mut self, check: &PauliOp) -> Result<Meas> {
        let n = self.n();
        let a = n;
        let x_type = check.is_x_type();
        let gates = measurement_gates(&check.embed(n + 1, 0), a, self.timing)?;
        let mut completed = Vec::new();
        let mut hit_chips = BTreeSet::new();
        let mut disturbed = false;
        let mut bit = false;
        for (g, dur) in gates {
            let r = self.ex.step(&[(g, dur)])?;
            if let Some(&f) = r.flips.first() {
                bit = f;
            }
            let data_partner = g.qubits().into_iter().find(|&q| q != a);
            if r.hits.is_empty() {
                completed.extend(data_partner);
                continue;
            }
            hit_chips.extend(r.hits.iter().copied());
            // Every op here touches the ancilla, so a hit on any chip of the
            // op reaches it.
            let op_chips: Vec<usize> = g.qubits().iter().map(|&q| self.ex.circuit.qubits[q].chip).collect();
            let s_new = r.hits.iter().filter(|c| op_chips.contains(c)).count();
            self.ex.log_fault(&r, s_new > 0);

            if self.overflowed || (s_new > 0 && self.s + s_new > self.t) {
                if !self.overflowed {
                    self.overflowed = true;
                    self.s += s_new;
                    let s = self.s;
                    self.ex.log(|_| TraceEvent::Overflow { s });
                }
                for &q in &r.erased {
                    self.ex.erase(q);
                    if q < n {
                        self.flag.push_erased_qubit(q)?;
                    }
                }
                continue;
            }

            if s_new > 0 {
                self.s += s_new;
                let c = discard_entangled_ancilla(n, x_type, &completed);
                let left = !c.is_identity() && self.ex.chooser.choose(Stream::Measurement, 2) == 1;
                if left {
                    self.ex.frame.inject(&c.embed(n + 1, 0))?;
                }
                for &q in r.erased.iter().filter(|&&q| q < n) {
                    self.ex.erase(q);
                    self.flag.push_erased_qubit(q)?;
                }
                self.flag.push_factor([c])?;
                let (s, discard) = (self.s, c.to_string());
                self.ex.log(|_| TraceEvent::Abort { s, discard });
                self.replace(&hit_chips)?;
                return Ok(Meas::Aborted);
            }

            for &q in &r.erased {
                self.ex.erase(q);
                self.flag.push_erased_qubit(q)?;
            }
            disturbed = true;
            completed.extend(data_partner);
        }
        if !hit_chips.is_empty() {
            self.replace(&hit_chips)?;
        }
        if disturbed && !self.overflowed {
            return Ok(Meas::Disturbed);
        }
        Ok(Meas::Clean(bit))
    }
}

pub fn run_erasure_flag(
    code: &StabilizerCode,
    initial: &BTreeSet<usize>,
    faults: &mut dyn FaultSource,
    timing: &TimingModel,
    chooser: &mut dyn Chooser,
) -> Result<ProtocolOutcome> {
    FlagEngine::new(code.clone(), *timing)?.run(initial, faults, chooser)
}

pub fn run_nonft_steane(
    initial: &BTreeSet<usize>,
    faults: &mut dyn FaultSource,
    timing: &TimingModel,
    chooser: &mut dyn Chooser,
) -> Result<ProtocolOutcome> {
    FlagEngine::new(crate::codes::steane_code(), *timing)?.run_nonft(initial, faults, chooser)
}
