//! Pauli-frame propagation through Clifford circuits.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;

/// Phaseless Pauli error carried through a circuit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self { n, x: 0, z: 0 }
    }

    pub fn from_op(p: &PauliOp) -> Self {
        Self { n: p.n(), x: p.x_bits(), z: p.z_bits() }
    }

    pub fn op(&self) -> PauliOp {
        PauliOp::from_bits(self.n, self.x, self.z).expect("frame bits fit")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inject(&mut self, p: &PauliOp) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, actual: p.n() });
        }
        self.x ^= p.x_bits();
        self.z ^= p.z_bits();
        Ok(())
    }

    pub fn clear(&mut self, q: usize) {
        self.x &= !(1 << q);
        self.z &= !(1 << q);
    }

    fn xb(&self, q: usize) -> u64 {
        self.x >> q & 1
    }

    fn zb(&self, q: usize) -> u64 {
        self.z >> q & 1
    }

    /// Conjugates the frame through `gate`. Measurements return whether the
    /// outcome is flipped; the measured qubit is then cleared.
    pub fn apply(&mut self, gate: &Gate) -> Option<bool> {
        match *gate {
            Gate::Detect | Gate::ReplaceChip { .. } => None,
            Gate::PrepPlus { qubit } | Gate::PrepZero { qubit } => {
                self.clear(qubit);
                None
            }
            Gate::H { qubit } => {
                let (x, z) = (self.xb(qubit), self.zb(qubit));
                self.x = (self.x & !(1 << qubit)) | z << qubit;
                self.z = (self.z & !(1 << qubit)) | x << qubit;
                None
            }
            Gate::CX { control, target } => {
                self.x ^= self.xb(control) << target;
                self.z ^= self.zb(target) << control;
                None
            }
            Gate::CZ { a, b } => {
                let (xa, xb) = (self.xb(a), self.xb(b));
                self.z ^= xa << b;
                self.z ^= xb << a;
                None
            }
            Gate::MeasX { qubit } => {
                let flip = self.zb(qubit) == 1;
                self.clear(qubit);
                Some(flip)
            }
            Gate::MeasZ { qubit } => {
                let flip = self.xb(qubit) == 1;
                self.clear(qubit);
                Some(flip)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameRun {
    /// One entry per measurement, in circuit order.
    pub flips: Vec<bool>,
    pub frame: PauliOp,
}

/// Runs `circuit` with `injections[i] = (s, P)` applied just before step `s`
/// (`s == steps.len()` applies at the end).
pub fn run_pauli_frame(circuit: &Circuit, injections: &[(usize, PauliOp)]) -> Result<FrameRun> {
    let n = circuit.num_qubits();
    let mut frame = PauliFrame::new(n);
    for &(s, _) in injections {
        if s > circuit.steps.len() {
            return Err(Error::IndexOutOfRange { index: s, n: circuit.steps.len() + 1 });
        }
    }
    let mut flips = Vec::new();
    for s in 0..=circuit.steps.len() {
        for (_, p) in injections.iter().filter(|(at, _)| *at == s) {
            frame.inject(p)?;
        }
        if let Some(step) = circuit.steps.get(s) {
            for op in &step.ops {
                if let Some(f) = frame.apply(&op.gate) {
                    flips.push(f);
                }
            }
        }
    }
    Ok(FrameRun { flips, frame: frame.op() })
}
