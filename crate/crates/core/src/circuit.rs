//! Step-structured circuits over qubits living on chips, with a text dump
//! that parses back.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// Erasure-detection window; touches no qubit.
    Detect,
    PrepPlus { qubit: usize },
    PrepZero { qubit: usize },
    H { qubit: usize },
    CX { control: usize, target: usize },
    CZ { a: usize, b: usize },
    MeasX { qubit: usize },
    MeasZ { qubit: usize },
    ReplaceChip { chip: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Detect | Gate::ReplaceChip { .. } => vec![],
            Gate::PrepPlus { qubit }
            | Gate::PrepZero { qubit }
            | Gate::H { qubit }
            | Gate::MeasX { qubit }
            | Gate::MeasZ { qubit } => vec![qubit],
            Gate::CX { control, target } => vec![control, target],
            Gate::CZ { a, b } => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::CX { .. } | Gate::CZ { .. })
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::MeasX { .. } | Gate::MeasZ { .. })
    }

    fn mnemonic(&self) -> &'static str {
        match self {
            Gate::Detect => "DETECT",
            Gate::PrepPlus { .. } => "PREPX",
            Gate::PrepZero { .. } => "PREPZ",
            Gate::H { .. } => "H",
            Gate::CX { .. } => "CX",
            Gate::CZ { .. } => "CZ",
            Gate::MeasX { .. } => "MX",
            Gate::MeasZ { .. } => "MZ",
            Gate::ReplaceChip { .. } => "REPLACE",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Op {
    pub gate: Gate,
    /// Seconds.
    pub duration: f64,
    pub inter_chip: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub ops: Vec<Op>,
}

impl Step {
    pub fn duration(&self) -> f64 {
        self.ops.iter().map(|o| o.duration).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qubit {
    pub label: String,
    pub chip: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: Vec<Qubit>,
    pub chips: Vec<String>,
    pub steps: Vec<Step>,
}

/// A chip-level erasure: at a time, or pinned to a step index.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub time: f64,
    pub chip: usize,
    pub location: Option<usize>,
}

impl Circuit {
    pub fn new(chips: Vec<String>, qubits: Vec<Qubit>) -> Result<Self> {
        let mut labels = BTreeSet::new();
        for q in &qubits {
            if q.chip >= chips.len() {
                return Err(Error::IndexOutOfRange { index: q.chip, n: chips.len() });
            }
            if !valid_label(&q.label) || !labels.insert(q.label.clone()) {
                return Err(Error::Parameter(format!("bad or duplicate qubit label {:?}", q.label)));
            }
        }
        if let Some(c) = chips.iter().find(|c| !valid_label(c)) {
            return Err(Error::Parameter(format!("bad chip label {c:?}")));
        }
        Ok(Self { qubits, chips, steps: Vec::new() })
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// Builds an op, marking two-qubit gates that straddle chips.
    pub fn op(&self, gate: Gate, duration: f64) -> Op {
        let qs = gate.qubits();
        let inter_chip = gate.is_two_qubit() && self.qubits[qs[0]].chip != self.qubits[qs[1]].chip;
        Op { gate, duration, inter_chip }
    }

    pub fn push_step(&mut self, ops: Vec<Op>) -> Result<()> {
        let mut used = BTreeSet::new();
        for op in &ops {
            if !(op.duration >= 0.0 && op.duration.is_finite()) {
                return Err(Error::Parameter(format!("op duration {}", op.duration)));
            }
            if let Gate::ReplaceChip { chip } = op.gate {
                if chip >= self.chips.len() {
                    return Err(Error::IndexOutOfRange { index: chip, n: self.chips.len() });
                }
            }
            for q in op.gate.qubits() {
                if q >= self.qubits.len() {
                    return Err(Error::IndexOutOfRange { index: q, n: self.qubits.len() });
                }
                if !used.insert(q) {
                    return Err(Error::Parameter(format!("qubit {} used twice in one step", self.qubits[q].label)));
                }
            }
        }
        self.steps.push(Step { ops });
        Ok(())
    }

    /// Convenience for a step built from `(gate, duration)` pairs.
    pub fn push(&mut self, gates: &[(Gate, f64)]) -> Result<()> {
        let ops = gates.iter().map(|&(g, d)| self.op(g, d)).collect();
        self.push_step(ops)
    }

    pub fn duration(&self) -> f64 {
        self.steps.iter().map(Step::duration).sum()
    }

    /// `(start, end)` of each step.
    pub fn step_windows(&self) -> Vec<(f64, f64)> {
        let mut t = 0.0;
        self.steps
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration();
                (start, t)
            })
            .collect()
    }

    pub fn qubits_on_chip(&self, chip: usize) -> Vec<usize> {
        (0..self.qubits.len()).filter(|&q| self.qubits[q].chip == chip).collect()
    }

    /// Qubits erased when `chips` fail during step `step`: everything on
    /// those chips, plus the partner of any two-qubit gate in that step that
    /// touches one of them.
    pub fn erased_by(&self, step: usize, chips: &[usize]) -> BTreeSet<usize> {
        let hit: BTreeSet<usize> = chips.iter().copied().collect();
        let mut out: BTreeSet<usize> =
            (0..self.qubits.len()).filter(|&q| hit.contains(&self.qubits[q].chip)).collect();
        if let Some(s) = self.steps.get(step) {
            for op in &s.ops {
                let qs = op.gate.qubits();
                if op.gate.is_two_qubit() && qs.iter().any(|q| out.contains(q)) {
                    out.extend(qs);
                }
            }
        }
        out
    }

    /// Step index in which `time` falls; a time on a boundary belongs to the
    /// later step. Zero-duration steps are never selected.
    pub fn step_at(&self, time: f64) -> Option<usize> {
        self.step_windows()
            .iter()
            .position(|&(s, e)| e > s && time >= s && time < e)
    }

    pub fn dump(&self) -> String {
        let mut out = String::from("# qubits");
        for q in &self.qubits {
            let _ = write!(out, " {}@{}", q.label, self.chips[q.chip]);
        }
        out.push('\n');
        for step in &self.steps {
            for (i, op) in step.ops.iter().enumerate() {
                if i > 0 {
                    out.push_str("| ");
                }
                out.push_str(op.gate.mnemonic());
                let qs = op.gate.qubits();
                for &q in &qs {
                    out.push(' ');
                    out.push_str(&self.qubits[q].label);
                }
                let chips: Vec<&str> = match op.gate {
                    Gate::ReplaceChip { chip } => vec![&self.chips[chip]],
                    _ => qs.iter().map(|&q| self.chips[self.qubits[q].chip].as_str()).collect(),
                };
                if !chips.is_empty() {
                    let _ = write!(out, " chip={}", chips.join(","));
                }
                let _ = writeln!(out, " t={}", format_duration(op.duration));
            }
            if step.ops.is_empty() {
                out.push_str("NOP\n");
            }
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit dump".into()))?;
        let header = header
            .strip_prefix("# qubits")
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let mut chips: Vec<String> = Vec::new();
        let mut qubits = Vec::new();
        for tok in header.split_whitespace() {
            let (label, chip) = tok
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("bad qubit token {tok:?}")))?;
            let idx = chips.iter().position(|c| c == chip).unwrap_or_else(|| {
                chips.push(chip.to_string());
                chips.len() - 1
            });
            qubits.push(Qubit { label: label.to_string(), chip: idx });
        }
        let mut circuit = Circuit::new(chips, qubits)?;
        let mut pending: Option<Vec<Op>> = None;
        for line in lines {
            let (parallel, body) = match line.strip_prefix("| ") {
                Some(rest) => (true, rest),
                None => (false, line),
            };
            if !parallel {
                if let Some(ops) = pending.take() {
                    circuit.push_step(ops)?;
                }
            } else if pending.is_none() {
                return Err(Error::Parse("parallel op without a preceding step".into()));
            }
            let ops = pending.get_or_insert_with(Vec::new);
            if body.trim() == "NOP" {
                continue;
            }
            ops.push(circuit.parse_op(body)?);
        }
        if let Some(ops) = pending {
            circuit.push_step(ops)?;
        }
        Ok(circuit)
    }

    fn parse_op(&self, body: &str) -> Result<Op> {
        let bad = || Error::Parse(format!("bad op line {body:?}"));
        let mut toks = body.split_whitespace();
        let name = toks.next().ok_or_else(bad)?;
        let mut qs = Vec::new();
        let mut chip_field = None;
        let mut duration = None;
        for tok in toks {
            if let Some(c) = tok.strip_prefix("chip=") {
                chip_field = Some(c);
            } else if let Some(t) = tok.strip_prefix("t=") {
                duration = Some(parse_duration(t)?);
            } else {
                let q = self
                    .qubits
                    .iter()
                    .position(|q| q.label == tok)
                    .ok_or_else(|| Error::Parse(format!("unknown qubit {tok:?}")))?;
                qs.push(q);
            }
        }
        let one = |qs: &[usize]| if qs.len() == 1 { Ok(qs[0]) } else { Err(bad()) };
        let two = |qs: &[usize]| if qs.len() == 2 { Ok((qs[0], qs[1])) } else { Err(bad()) };
        let gate = match name {
            "DETECT" => Gate::Detect,
            "PREPX" => Gate::PrepPlus { qubit: one(&qs)? },
            "PREPZ" => Gate::PrepZero { qubit: one(&qs)? },
            "H" => Gate::H { qubit: one(&qs)? },
            "CX" => {
                let (control, target) = two(&qs)?;
                Gate::CX { control, target }
            }
            "CZ" => {
                let (a, b) = two(&qs)?;
                Gate::CZ { a, b }
            }
            "MX" => Gate::MeasX { qubit: one(&qs)? },
            "MZ" => Gate::MeasZ { qubit: one(&qs)? },
            "REPLACE" => {
                let label = chip_field.ok_or_else(bad)?;
                let chip = self
                    .chips
                    .iter()
                    .position(|c| c == label)
                    .ok_or_else(|| Error::Parse(format!("unknown chip {label:?}")))?;
                Gate::ReplaceChip { chip }
            }
            _ => return Err(Error::Parse(format!("unknown gate {name:?}"))),
        };
        Ok(self.op(gate, duration.ok_or_else(bad)?))
    }
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Microseconds with as many digits as needed.
pub fn format_duration(seconds: f64) -> String {
    format!("{}us", seconds * 1e6)
}

/// Accepts a number with one of the suffixes s, ms, us, μs, ns.
pub fn parse_duration(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, scale) = if let Some(v) = s.strip_suffix("ns") {
        (v, 1e9)
    } else if let Some(v) = s.strip_suffix("us").or_else(|| s.strip_suffix("μs")).or_else(|| s.strip_suffix("µs")) {
        (v, 1e6)
    } else if let Some(v) = s.strip_suffix("ms") {
        (v, 1e3)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1.0)
    } else {
        return Err(Error::Parse(format!("duration {s:?} needs a unit (s, ms, us, ns)")));
    };
    let value: f64 = num.trim().parse().map_err(|_| Error::Parse(format!("bad duration {s:?}")))?;
    if !(value >= 0.0 && value.is_finite()) {
        return Err(Error::Parse(format!("duration {s:?} must be finite and non-negative")));
    }
    Ok(value / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let chips = vec!["D1".into(), "D2".into(), "A".into()];
        let qubits = vec![
            Qubit { label: "d1".into(), chip: 0 },
            Qubit { label: "d2".into(), chip: 1 },
            Qubit { label: "a".into(), chip: 2 },
        ];
        let mut c = Circuit::new(chips, qubits).unwrap();
        c.push(&[(Gate::Detect, 6e-6)]).unwrap();
        c.push(&[(Gate::PrepPlus { qubit: 2 }, 6e-6), (Gate::H { qubit: 0 }, 1e-6)]).unwrap();
        c.push(&[(Gate::CZ { a: 2, b: 0 }, 39e-6)]).unwrap();
        c.push(&[(Gate::CX { control: 2, target: 1 }, 39e-6)]).unwrap();
        c.push(&[(Gate::MeasX { qubit: 2 }, 6e-6), (Gate::ReplaceChip { chip: 0 }, 0.0)]).unwrap();
        c
    }

    #[test]
    fn durations_and_windows() {
        let c = sample();
        assert!((c.duration() - 96e-6).abs() < 1e-15);
        let w = c.step_windows();
        assert_eq!(w.len(), 5);
        assert!((w[2].0 - 12e-6).abs() < 1e-15);
        assert_eq!(c.step_at(13e-6), Some(2));
        assert_eq!(c.step_at(12e-6), Some(2));
        assert_eq!(c.step_at(1.0), None);
    }

    #[test]
    fn inter_chip_flag() {
        let c = sample();
        assert!(c.steps[2].ops[0].inter_chip);
        assert!(!c.steps[1].ops[0].inter_chip);
    }

    #[test]
    fn dump_format_and_round_trip() {
        let c = sample();
        let text = c.dump();
        assert!(text.starts_with("# qubits d1@D1 d2@D2 a@A\n"));
        assert!(text.contains("CZ a d1 chip=A,D1 t=39us"));
        assert!(text.contains("| H d1 chip=D1 t=1us"));
        let back = Circuit::parse_dump(&text).unwrap();
        assert_eq!(back.qubits, c.qubits);
        assert_eq!(back.steps.len(), c.steps.len());
        for (a, b) in back.steps.iter().zip(&c.steps) {
            assert_eq!(a.ops.len(), b.ops.len());
            for (x, y) in a.ops.iter().zip(&b.ops) {
                assert_eq!(x.gate, y.gate);
                assert_eq!(x.inter_chip, y.inter_chip);
                assert!((x.duration - y.duration).abs() <= 1e-18);
            }
        }
        assert_eq!(back.dump(), text);
    }

    #[test]
    fn rejects_malformed_dumps() {
        assert!(Circuit::parse_dump("").is_err());
        assert!(Circuit::parse_dump("# qubits a@A\nFOO a t=1us\n").is_err());
        assert!(Circuit::parse_dump("# qubits a@A\nH b t=1us\n").is_err());
        assert!(Circuit::parse_dump("# qubits a@A\nH a\n").is_err());
        assert!(Circuit::parse_dump("# qubits a@A\n| H a t=1us\n").is_err());
    }

    #[test]
    fn rejects_reused_qubit_in_step() {
        let mut c = sample();
        assert!(c.push(&[(Gate::H { qubit: 0 }, 1e-6), (Gate::MeasZ { qubit: 0 }, 1e-6)]).is_err());
        assert!(c.push(&[(Gate::H { qubit: 9 }, 1e-6)]).is_err());
    }

    #[test]
    fn erasure_spreads_to_gate_partner() {
        let c = sample();
        let e = c.erased_by(2, &[2]);
        assert_eq!(e.into_iter().collect::<Vec<_>>(), vec![0, 2]);
        let e = c.erased_by(1, &[2]);
        assert_eq!(e.into_iter().collect::<Vec<_>>(), vec![2]);
        let e = c.erased_by(3, &[1]);
        assert_eq!(e.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn duration_parsing() {
        assert_eq!(parse_duration("39us").unwrap(), 39e-6);
        assert_eq!(parse_duration("100ns").unwrap(), 100e-9);
        assert_eq!(parse_duration("2 ms").unwrap(), 2e-3);
        assert_eq!(parse_duration("6μs").unwrap(), 6e-6);
        assert!(parse_duration("5").is_err());
        assert!(parse_duration("-1us").is_err());
    }
}
