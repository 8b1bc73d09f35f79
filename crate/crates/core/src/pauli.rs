//! Phaseless Pauli operators in binary symplectic form.
//!
//! - x bit i set: X component on qubit i
//! - z bit i set: Z component on qubit i
//! - both set: Y
//!
//! Phases are dropped everywhere. Syndromes, group membership and decoder
//! success only ever depend on commutation relations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2;

pub const MAX_QUBITS: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// An n-qubit Pauli operator with the phase discarded, n ≤ 64.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliOp {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits are supported");
        Self { n: n as u8, x: 0, z: 0 }
    }

    pub fn from_bits(n: usize, x: u64, z: u64) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Parameter(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
        }
        let valid = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if (x | z) & !valid != 0 {
            return Err(Error::Parameter("support bits beyond qubit count".into()));
        }
        Ok(Self { n: n as u8, x, z })
    }

    /// Single-qubit Pauli `p` on `qubit` (0-based).
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        let (x, z) = p.bits();
        let mut op = Self::identity(n);
        op.x = (x as u64) << qubit;
        op.z = (z as u64) << qubit;
        op
    }

    /// X on every listed qubit (0-based).
    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut op = Self::identity(n);
        for &q in qubits {
            assert!(q < n);
            op.x |= 1 << q;
        }
        op
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut op = Self::identity(n);
        for &q in qubits {
            assert!(q < n);
            op.z |= 1 << q;
        }
        op
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn support_qubits(&self) -> Vec<usize> {
        (0..self.n()).filter(|&q| self.support() >> q & 1 == 1).collect()
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_x_type(&self) -> bool {
        self.z == 0
    }

    pub fn is_z_type(&self) -> bool {
        self.x == 0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x = (self.x & !(1 << qubit)) | ((x as u64) << qubit);
        self.z = (self.z & !(1 << qubit)) | ((z as u64) << qubit);
    }

    /// Clears the component on `qubit`.
    pub fn clear(&mut self, qubit: usize) {
        self.set(qubit, Pauli::I);
    }

    pub fn packed(&self) -> u128 {
        gf2::pack(self.x, self.z)
    }

    fn check_dim(&self, other: &PauliOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n(), actual: other.n() });
        }
        Ok(())
    }

    /// Symplectic commutation test.
    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliOp) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Product with the phase dropped.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_dim(other)?;
        Ok(*self * *other)
    }

    /// Embeds into a register of `n` qubits, shifting qubit i to i + offset.
    pub fn embed(&self, n: usize, offset: usize) -> PauliOp {
        assert!(offset + self.n() <= n && n <= MAX_QUBITS);
        PauliOp { n: n as u8, x: self.x << offset, z: self.z << offset }
    }

    /// The `len`-qubit slice starting at `offset`.
    pub fn slice(&self, offset: usize, len: usize) -> PauliOp {
        assert!(offset + len <= self.n());
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        PauliOp { n: len as u8, x: (self.x >> offset) & mask, z: (self.z >> offset) & mask }
    }

    /// Parses support-indexed form such as `X1Z3` or `Y2`, 1-based. `I` is the
    /// identity.
    pub fn parse(n: usize, s: &str) -> Result<PauliOp> {
        let mut op = PauliOp::identity(n);
        let s = s.trim();
        if s == "I" || s.is_empty() {
            return Ok(op);
        }
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let p = match c {
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Parse(format!("unexpected '{c}' in Pauli '{s}'"))),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let idx: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("missing qubit index in Pauli '{s}'")))?;
            if idx == 0 || idx > n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
            let prev = op.get(idx - 1);
            let (px, pz) = prev.bits();
            let (cx, cz) = p.bits();
            op.set(idx - 1, Pauli::from_bits(px ^ cx, pz ^ cz));
        }
        Ok(op)
    }
}

impl std::ops::Mul for PauliOp {
    type Output = PauliOp;

    fn mul(self, rhs: PauliOp) -> PauliOp {
        debug_assert_eq!(self.n, rhs.n);
        PauliOp { n: self.n, x: self.x ^ rhs.x, z: self.z ^ rhs.z }
    }
}

impl std::ops::MulAssign for PauliOp {
    fn mul_assign(&mut self, rhs: PauliOp) {
        *self = *self * rhs;
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        for q in 0..self.n() {
            match self.get(q) {
                Pauli::I => {}
                p => write!(f, "{:?}{}", p, q + 1)?,
            }
        }
        Ok(())
    }
}

/// Bit i is set iff `e` anticommutes with `checks[i]`.
pub fn syndrome(e: &PauliOp, checks: &[PauliOp]) -> Result<Vec<bool>> {
    checks.iter().map(|c| e.commutes(c).map(|comm| !comm)).collect()
}

/// Same as [`syndrome`], packed into a word (at most 64 checks).
pub(crate) fn syndrome_mask(e: &PauliOp, checks: &[PauliOp]) -> u64 {
    checks
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, c)| acc | ((!e.commutes_unchecked(c) as u64) << i))
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Whether `p` is a product of a subset of `generators`.
pub fn in_group(p: &PauliOp, generators: &[PauliOp]) -> Result<bool> {
    for g in generators {
        p.check_dim(g)?;
    }
    if generators.len() > 64 {
        return Err(Error::Unsupported("more than 64 generators".into()));
    }
    let rows: Vec<u128> = generators.iter().map(PauliOp::packed).collect();
    Ok(gf2::solve(&rows, p.packed(), u128::MAX).is_some())
}

/// Product of the generators selected by `combo`.
pub fn combine(n: usize, generators: &[PauliOp], combo: u64) -> PauliOp {
    generators
        .iter()
        .enumerate()
        .filter(|(i, _)| combo >> i & 1 == 1)
        .fold(PauliOp::identity(n), |acc, (_, g)| acc * *g)
}
