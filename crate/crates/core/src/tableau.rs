//! Aaronson–Gottesman stabilizer tableau, used as an independent check on
//! the Pauli-frame simulator.

use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOp, MAX_QUBITS};

/// Rows `0..n` are destabilizers, `n..2n` stabilizers, `2n` is scratch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

fn g(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

impl Tableau {
    /// |0...0>
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        let mut x = vec![0u64; 2 * n + 1];
        let mut z = vec![0u64; 2 * n + 1];
        for i in 0..n {
            x[i] = 1 << i;
            z[n + i] = 1 << i;
        }
        Self { n, x, z, r: vec![false; 2 * n + 1] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut phase = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for q in 0..self.n {
            phase += g(self.x[i] >> q & 1, self.z[i] >> q & 1, self.x[h] >> q & 1, self.z[h] >> q & 1);
        }
        self.r[h] = phase.rem_euclid(4) == 2;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    pub fn h(&mut self, q: usize) {
        for i in 0..2 * self.n {
            let (xb, zb) = (self.x[i] >> q & 1, self.z[i] >> q & 1);
            self.r[i] ^= xb & zb == 1;
            self.x[i] = (self.x[i] & !(1 << q)) | zb << q;
            self.z[i] = (self.z[i] & !(1 << q)) | xb << q;
        }
    }

    pub fn s(&mut self, q: usize) {
        for i in 0..2 * self.n {
            let (xb, zb) = (self.x[i] >> q & 1, self.z[i] >> q & 1);
            self.r[i] ^= xb & zb == 1;
            self.z[i] ^= xb << q;
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for i in 0..2 * self.n {
            let (xc, zc) = (self.x[i] >> c & 1, self.z[i] >> c & 1);
            let (xt, zt) = (self.x[i] >> t & 1, self.z[i] >> t & 1);
            self.r[i] ^= xc & zt & (xt ^ zc ^ 1) == 1;
            self.x[i] ^= xc << t;
            self.z[i] ^= zt << c;
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    pub fn apply_pauli(&mut self, p: &PauliOp) {
        for i in 0..2 * self.n {
            let anti = ((self.x[i] & p.z_bits()) ^ (self.z[i] & p.x_bits())).count_ones() & 1 == 1;
            self.r[i] ^= anti;
        }
    }

    /// Measures Z on `q`, using `coin` for a random outcome. Returns the
    /// outcome bit and whether it was determined by the state.
    pub fn measure_z(&mut self, q: usize, coin: bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.x[i] >> q & 1 == 1) {
            for i in 0..2 * n {
                if i != p && self.x[i] >> q & 1 == 1 {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            self.x[p] = 0;
            self.z[p] = 1 << q;
            self.r[p] = coin;
            (coin, false)
        } else {
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = false;
            for i in 0..n {
                if self.x[i] >> q & 1 == 1 {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], true)
        }
    }

    pub fn measure_x(&mut self, q: usize, coin: bool) -> (bool, bool) {
        self.h(q);
        let out = self.measure_z(q, coin);
        self.h(q);
        out
    }

    pub fn reset_z(&mut self, q: usize, coin: bool) {
        if self.measure_z(q, coin).0 {
            self.apply_pauli(&PauliOp::single(self.n, q, Pauli::X));
        }
    }

    pub fn reset_x(&mut self, q: usize, coin: bool) {
        self.reset_z(q, coin);
        self.h(q);
    }

    pub fn stabilizers(&self) -> Vec<PauliOp> {
        (self.n..2 * self.n)
            .map(|i| PauliOp::from_bits(self.n, self.x[i], self.z[i]).expect("row fits"))
            .collect()
    }

    fn row_op(&self, i: usize) -> PauliOp {
        PauliOp::from_bits(self.n, self.x[i], self.z[i]).expect("row fits")
    }

    /// `Some(bit)` if the state is an eigenstate of `p` with eigenvalue
    /// (-1)^bit, `None` if `p` has a random outcome.
    pub fn expectation(&mut self, p: &PauliOp) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|i| !self.row_op(i).commutes_unchecked(p)) {
            return None;
        }
        let s = 2 * n;
        self.x[s] = 0;
        self.z[s] = 0;
        self.r[s] = false;
        for i in 0..n {
            if !self.row_op(i).commutes_unchecked(p) {
                self.rowsum(s, i + n);
            }
        }
        debug_assert_eq!((self.x[s], self.z[s]), (p.x_bits(), p.z_bits()));
        Some(self.r[s])
    }

    fn apply_gate(&mut self, gate: &Gate, coin: bool) -> Option<(bool, bool)> {
        match *gate {
            Gate::Detect | Gate::ReplaceChip { .. } => None,
            Gate::PrepZero { qubit } => {
                self.reset_z(qubit, coin);
                None
            }
            Gate::PrepPlus { qubit } => {
                self.reset_x(qubit, coin);
                None
            }
            Gate::H { qubit } => {
                self.h(qubit);
                None
            }
            Gate::CX { control, target } => {
                self.cx(control, target);
                None
            }
            Gate::CZ { a, b } => {
                self.cz(a, b);
                None
            }
            Gate::MeasX { qubit } => Some(self.measure_x(qubit, coin)),
            Gate::MeasZ { qubit } => Some(self.measure_z(qubit, coin)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauRun {
    pub flips: Vec<bool>,
    /// Measurements whose outcome was random in the reference run.
    pub random: Vec<bool>,
    /// An operator equivalent to the residual error, up to stabilizers of
    /// the final state.
    pub frame: PauliOp,
    pub stabilizers: Vec<PauliOp>,
}

/// Runs an error-free reference and an injected copy of `circuit` side by
/// side from |0...0>, with the same random outcomes. Injections follow the
/// convention of [`crate::frame::run_pauli_frame`]. After a flipped
/// measurement the noisy copy is corrected back onto the reference branch.
pub fn run_tableau<R: Rng>(circuit: &Circuit, injections: &[(usize, PauliOp)], rng: &mut R) -> Result<TableauRun> {
    let n = circuit.num_qubits();
    if n > MAX_QUBITS {
        return Err(Error::Unsupported(format!("{n} qubits")));
    }
    let mut reference = Tableau::new(n);
    let mut noisy = Tableau::new(n);
    let mut flips = Vec::new();
    let mut random = Vec::new();
    for s in 0..=circuit.steps.len() {
        for (_, p) in injections.iter().filter(|(at, _)| *at == s) {
            if p.n() != n {
                return Err(Error::Dimension { expected: n, actual: p.n() });
            }
            noisy.apply_pauli(p);
        }
        let Some(step) = circuit.steps.get(s) else { continue };
        for op in &step.ops {
            let coin = rng.gen::<bool>();
            let a = reference.apply_gate(&op.gate, coin);
            let b = noisy.apply_gate(&op.gate, coin);
            if let (Some((ra, det)), Some((rb, _))) = (a, b) {
                let flip = ra != rb;
                flips.push(flip);
                random.push(!det);
                if flip {
                    let (q, fix) = match op.gate {
                        Gate::MeasX { qubit } => (qubit, Pauli::Z),
                        Gate::MeasZ { qubit } => (qubit, Pauli::X),
                        _ => unreachable!(),
                    };
                    noisy.apply_pauli(&PauliOp::single(n, q, fix));
                }
            }
        }
    }
    debug_assert_eq!((&reference.x[..2 * n], &reference.z[..2 * n]), (&noisy.x[..2 * n], &noisy.z[..2 * n]));
    let mut frame = PauliOp::identity(n);
    for i in 0..n {
        if reference.r[n + i] != noisy.r[n + i] {
            frame *= reference.row_op(i);
        }
    }
    Ok(TableauRun { flips, random, frame, stabilizers: reference.stabilizers() })
}
