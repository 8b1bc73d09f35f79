//! Teleportation-based erasure correction: the input block is teleported
//! through an encoded Bell pair, reading logical X and Z on intact qubits
//! only.

use std::collections::BTreeSet;

use crate::choice::Chooser;
use crate::circuit::{Circuit, Gate, Qubit};
use crate::codes::{ErrorClass, StabilizerCode};
use crate::error::{Error, Result};
use crate::pauli::{self, Pauli, PauliOp};
use crate::timing::TimingModel;

use super::{verdict_for, Exec, FaultSource, ProtocolOutcome, StepResult, TraceEvent, Verdict};

/// Clifford encoder: Hadamards on `hadamards`, then CX layers of
/// `(control, target)` pairs. Qubits start in |0>.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoder {
    pub hadamards: Vec<usize>,
    pub layers: Vec<Vec<(usize, usize)>>,
}

fn zero_based(h: &[usize], layers: &[&[(usize, usize)]]) -> Encoder {
    Encoder {
        hadamards: h.iter().map(|q| q - 1).collect(),
        layers: layers.iter().map(|l| l.iter().map(|&(c, t)| (c - 1, t - 1)).collect()).collect(),
    }
}

fn is_steane(code: &StabilizerCode) -> bool {
    code.generators == crate::codes::steane_code().generators
}

fn is_four_qubit(code: &StabilizerCode) -> bool {
    code.generators == crate::codes::four_qubit_code().generators
}

/// Encoder for |0_L>.
pub fn logical_zero_encoder(code: &StabilizerCode) -> Result<Encoder> {
    if is_steane(code) {
        Ok(zero_based(
            &[1, 5, 7],
            &[&[(1, 2), (5, 3), (7, 6)], &[(1, 3), (5, 6), (7, 4)], &[(1, 4), (5, 2), (7, 3)]],
        ))
    } else if is_four_qubit(code) {
        Ok(zero_based(&[1], &[&[(1, 2)], &[(2, 3)], &[(3, 4)]]))
    } else {
        Err(Error::Unsupported(format!("no encoder for {}", code.label)))
    }
}

/// Encoder for the state that transversal H maps to |+_L>. For the
/// seven-qubit code that is |0_L>; for the four-qubit code it is two Bell
/// pairs on (1,2) and (3,4).
pub fn bell_partner_encoder(code: &StabilizerCode) -> Result<Encoder> {
    if is_four_qubit(code) {
        Ok(zero_based(&[1, 3], &[&[(1, 2), (3, 4)]]))
    } else {
        logical_zero_encoder(code)
    }
}

/// |0_L> preparation as a standalone circuit, qubit i on chip i.
pub fn prep_logical_zero_circuit(code: &StabilizerCode, timing: &TimingModel) -> Result<Circuit> {
    let enc = logical_zero_encoder(code)?;
    let n = code.n;
    let chips = (1..=n).map(|i| format!("C{i}")).collect();
    let qubits = (0..n).map(|i| Qubit { label: format!("q{}", i + 1), chip: i }).collect();
    let mut c = Circuit::new(chips, qubits)?;
    c.push(&(0..n).map(|q| (Gate::PrepZero { qubit: q }, timing.t_sq())).collect::<Vec<_>>())?;
    c.push(&enc.hadamards.iter().map(|&q| (Gate::H { qubit: q }, timing.t_sq())).collect::<Vec<_>>())?;
    for layer in &enc.layers {
        c.push(&layer.iter().map(|&(ct, t)| (Gate::CX { control: ct, target: t }, timing.t_nscx())).collect::<Vec<_>>())?;
    }
    Ok(c)
}

/// Lowest-weight member of `logical · <gens>` with no support on `erased`,
/// using only the given generators. Ties go to fewer generators, then to
/// the smaller combination mask.
pub fn intact_representative(logical: &PauliOp, gens: &[PauliOp], erased: &BTreeSet<usize>) -> Result<PauliOp> {
    if gens.len() > 24 {
        return Err(Error::Unsupported("too many generators".into()));
    }
    let mask = erased.iter().fold(0u64, |m, &q| m | 1 << q);
    let mut best: Option<(usize, u32, u64, PauliOp)> = None;
    for combo in 0u64..(1 << gens.len()) {
        let cand = *logical * pauli::combine(logical.n(), gens, combo);
        if cand.support() & mask != 0 {
            continue;
        }
        let key = (cand.weight(), combo.count_ones(), combo, cand);
        if best.as_ref().is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
            best = Some(key);
        }
    }
    best.map(|b| b.3).ok_or(Error::LogicalErased)
}

/// Intact representative of the logical X (`x = true`) or Z class, built
/// from same-type generators so it can be read from single-qubit outcomes.
pub fn intact_logical_representative(code: &StabilizerCode, x: bool, erased: &BTreeSet<usize>) -> Result<PauliOp> {
    let (logical, gens): (PauliOp, Vec<PauliOp>) = if x {
        (code.logical_x[0], code.generators.iter().copied().filter(PauliOp::is_x_type).collect())
    } else {
        (code.logical_z[0], code.generators.iter().copied().filter(PauliOp::is_z_type).collect())
    };
    intact_representative(&logical, &gens, erased)
}

/// Chip i holds qubit i of the black (input), blue and orange (output)
/// blocks: indices i, n+i and 2n+i.
pub fn knill_layout(n: usize) -> (Vec<String>, Vec<Qubit>) {
    let chips = (1..=n).map(|i| format!("C{i}")).collect();
    let mut qubits = Vec::with_capacity(3 * n);
    for prefix in ["k", "u", "o"] {
        for i in 0..n {
            qubits.push(Qubit { label: format!("{prefix}{}", i + 1), chip: i });
        }
    }
    (chips, qubits)
}

pub struct KnillEngine {
    pub code: StabilizerCode,
    pub timing: TimingModel,
    pub record: bool,
    zero: Encoder,
    partner: Encoder,
}

#[derive(Default)]
struct Erased {
    black: BTreeSet<usize>,
    blue: BTreeSet<usize>,
    orange: BTreeSet<usize>,
}

impl KnillEngine {
    pub fn new(code: StabilizerCode, timing: TimingModel) -> Result<Self> {
        code.validate()?;
        timing.validate()?;
        let zero = logical_zero_encoder(&code)?;
        let partner = bell_partner_encoder(&code)?;
        if 3 * code.n > pauli::MAX_QUBITS {
            return Err(Error::Unsupported(format!("{} qubits", 3 * code.n)));
        }
        Ok(Self { code, timing, record: true, zero, partner })
    }

    fn prep_steps(&self) -> Vec<Vec<(Gate, f64)>> {
        let n = self.code.n;
        let (sq, nscx) = (self.timing.t_sq(), self.timing.t_nscx());
        let blue = |q: usize| n + q;
        let orange = |q: usize| 2 * n + q;
        let mut steps = vec![(n..3 * n).map(|q| (Gate::PrepZero { qubit: q }, sq)).collect::<Vec<_>>()];
        let mut h: Vec<(Gate, f64)> = self.partner.hadamards.iter().map(|&q| (Gate::H { qubit: blue(q) }, sq)).collect();
        h.extend(self.zero.hadamards.iter().map(|&q| (Gate::H { qubit: orange(q) }, sq)));
        steps.push(h);
        let depth = self.zero.layers.len().max(self.partner.layers.len());
        for l in 0..depth {
            let mut layer = Vec::new();
            for &(c, t) in self.partner.layers.get(l).into_iter().flatten() {
                layer.push((Gate::CX { control: blue(c), target: blue(t) }, nscx));
            }
            for &(c, t) in self.zero.layers.get(l).into_iter().flatten() {
                layer.push((Gate::CX { control: orange(c), target: orange(t) }, nscx));
            }
            steps.push(layer);
        }
        steps
    }

    pub fn run(
        &mut self,
        initial: &BTreeSet<usize>,
        faults: &mut dyn FaultSource,
        chooser: &mut dyn Chooser,
    ) -> Result<ProtocolOutcome> {
        let n = self.code.n;
        if let Some(&q) = initial.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, n });
        }
        let (sq, scx) = (self.timing.t_sq(), self.timing.t_scx());
        let (chips, qubits) = knill_layout(n);
        let mut ex = Exec::new(chips, qubits, faults, chooser, self.record)?;
        let mut erased = Erased::default();
        for &q in initial {
            ex.erase(q);
            erased.black.insert(q);
        }
        ex.faults_seen += initial.len();

        let r = ex.step(&[(Gate::Detect, sq)])?;
        hit_black(&mut ex, &r, &mut erased, n);
        if erased.black.is_empty() {
            return self.finish(ex, 0, None, &erased);
        }

        let mut restarts = 0;
        'prep: loop {
            for gates in self.prep_steps() {
                let r = ex.step(&gates)?;
                if !r.hits.is_empty() {
                    hit_black(&mut ex, &r, &mut erased, n);
                    restarts += 1;
                    ex.log(|_| TraceEvent::Restart { restarts });
                    continue 'prep;
                }
            }
            break;
        }

        let bell: Vec<Vec<(Gate, f64)>> = vec![
            (0..n).map(|q| (Gate::H { qubit: n + q }, sq)).collect(),
            (0..n).map(|q| (Gate::CX { control: n + q, target: 2 * n + q }, scx)).collect(),
            (0..n).map(|q| (Gate::CX { control: q, target: n + q }, scx)).collect(),
        ];
        for gates in bell {
            let r = ex.step(&gates)?;
            if !r.hits.is_empty() {
                ex.log_fault(&r, false);
                for &chip in &r.hits {
                    for (block, set) in [(0, &mut erased.black), (1, &mut erased.blue), (2, &mut erased.orange)] {
                        ex.erase(block * n + chip);
                        set.insert(chip);
                    }
                }
            }
        }
        let mx = ex.step(&(0..n).map(|q| (Gate::MeasX { qubit: q }, 0.0)).collect::<Vec<_>>())?;
        let mz = ex.step(&(0..n).map(|q| (Gate::MeasZ { qubit: n + q }, 0.0)).collect::<Vec<_>>())?;

        let lost: BTreeSet<usize> = erased.black.union(&erased.blue).copied().collect();
        let reps = intact_logical_representative(&self.code, true, &lost)
            .and_then(|x| Ok((x, intact_logical_representative(&self.code, false, &lost)?)));
        let (rx, rz) = match reps {
            Ok(r) => r,
            Err(Error::LogicalErased) => return self.finish(ex, restarts, Some(true), &erased),
            Err(e) => return Err(e),
        };
        let parity = |rep: &PauliOp, flips: &[bool]| rep.support_qubits().iter().fold(false, |acc, &q| acc ^ flips[q]);
        let x_flip = parity(&rx, &mx.flips);
        let z_flip = parity(&rz, &mz.flips);
        ex.log(|_| TraceEvent::Readout { block: "black".into(), operator: rx.to_string(), flip: x_flip });
        ex.log(|_| TraceEvent::Readout { block: "blue".into(), operator: rz.to_string(), flip: z_flip });
        let mut correction = PauliOp::identity(n);
        if x_flip {
            correction *= self.code.logical_z[0];
        }
        if z_flip {
            correction *= self.code.logical_x[0];
        }
        ex.frame.inject(&correction.embed(3 * n, 2 * n))?;
        ex.log(|_| TraceEvent::Correction { pauli: correction.to_string(), inconsistent: false });
        self.finish(ex, restarts, Some(false), &erased)
    }

    /// `teleported` is None when nothing triggered the cycle, Some(true) when
    /// a logical readout was impossible.
    fn finish(&self, mut ex: Exec, restarts: usize, teleported: Option<bool>, erased: &Erased) -> Result<ProtocolOutcome> {
        let n = self.code.n;
        let logical_erased = teleported == Some(true);
        let out_block = if teleported.is_some() { 2 * n } else { 0 };
        let pending = if teleported.is_some() { &erased.orange } else { &erased.black };
        let residual = ex.frame.op().slice(out_block, n);
        let class = if logical_erased { ErrorClass::Logical } else { ideal_erasure_class(&self.code, &residual, pending)? };
        let verdict = if logical_erased { Verdict::LogicalFailure } else { verdict_for(class) };
        let elapsed = ex.clock;
        ex.log(|_| TraceEvent::Verdict { verdict, residual: residual.to_string(), class, elapsed });
        Ok(ProtocolOutcome {
            verdict,
            residual_class: class,
            residual: residual.to_string(),
            elapsed,
            faults_seen: ex.faults_seen,
            restarts,
            overflowed: false,
            syndrome_inconsistent: false,
            logical_erased,
            audit: Vec::new(),
            trace: std::mem::take(&mut ex.trace),
            circuit: ex.record.then_some(ex.circuit),
        })
    }
}

fn hit_black(ex: &mut Exec, r: &StepResult, erased: &mut Erased, _n: usize) {
    if r.hits.is_empty() {
        return;
    }
    ex.log_fault(r, false);
    for &chip in &r.hits {
        ex.erase(chip);
        erased.black.insert(chip);
    }
}

/// Class of `residual` after an ideal decoder removes the erasures on
/// `pending`: the first Pauli supported there with matching syndrome.
pub fn ideal_erasure_class(code: &StabilizerCode, residual: &PauliOp, pending: &BTreeSet<usize>) -> Result<ErrorClass> {
    let syn = pauli::syndrome_mask(residual, &code.generators);
    let qs: Vec<usize> = pending.iter().copied().collect();
    if qs.len() > 8 {
        return Err(Error::Unsupported(format!("{} pending erasures", qs.len())));
    }
    for code_word in 0u32..(1 << (2 * qs.len())) {
        let mut c = PauliOp::identity(code.n);
        for (i, &q) in qs.iter().enumerate() {
            c.set(q, Pauli::ALL[(code_word >> (2 * i) & 3) as usize]);
        }
        if pauli::syndrome_mask(&c, &code.generators) == syn {
            return code.classify(&(*residual * c));
        }
    }
    Ok(ErrorClass::Detectable)
}

pub fn run_knill(
    code: &StabilizerCode,
    initial: &BTreeSet<usize>,
    faults: &mut dyn FaultSource,
    timing: &TimingModel,
    chooser: &mut dyn Chooser,
) -> Result<ProtocolOutcome> {
    KnillEngine::new(code.clone(), *timing)?.run(initial, faults, chooser)
}
