#![allow(dead_code)]

use erasurenet::circuit::{Circuit, Gate, Qubit};
use erasurenet::frame::run_pauli_frame;
use erasurenet::pauli::{Pauli, PauliOp};
use erasurenet::tableau::run_tableau;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn register(n: usize, chips: usize) -> Circuit {
    let chip_names = (0..chips).map(|c| format!("C{c}")).collect();
    let qubits = (0..n).map(|q| Qubit { label: format!("q{q}"), chip: q % chips }).collect();
    Circuit::new(chip_names, qubits).unwrap()
}

fn random_clifford(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            let mut qs: Vec<usize> = (0..n).collect();
            qs.shuffle(rng);
            match rng.gen_range(0..3) {
                0 => Gate::H { qubit: qs[0] },
                1 if n > 1 => Gate::CX { control: qs[0], target: qs[1] },
                _ if n > 1 => Gate::CZ { a: qs[0], b: qs[1] },
                _ => Gate::H { qubit: qs[0] },
            }
        })
        .collect()
}

/// Blocks of: preparation in a random basis per qubit, a random Clifford
/// and its inverse, then measurement in the preparation basis. Every
/// measurement is deterministic in the error-free run.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize) -> Circuit {
    let mut c = register(n, 1 + rng.gen_range(0..n));
    for _ in 0..rng.gen_range(1..=3) {
        let plus: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        c.push(
            &(0..n)
                .map(|q| (if plus[q] { Gate::PrepPlus { qubit: q } } else { Gate::PrepZero { qubit: q } }, 1.0))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let len = rng.gen_range(1..=3 * n);
        let u = random_clifford(rng, n, len);
        for g in u.iter().chain(u.iter().rev()) {
            c.push(&[(*g, 1.0)]).unwrap();
        }
        c.push(
            &(0..n)
                .map(|q| (if plus[q] { Gate::MeasX { qubit: q } } else { Gate::MeasZ { qubit: q } }, 1.0))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        if rng.gen() {
            let len = rng.gen_range(1..=2 * n);
            let v = random_clifford(rng, n, len);
            for g in v {
                c.push(&[(g, 1.0)]).unwrap();
            }
        }
    }
    c
}

pub fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliOp {
    let mut p = PauliOp::identity(n);
    for q in 0..n {
        if rng.gen_bool(0.3) {
            p.set(q, Pauli::ALL[rng.gen_range(0..4)]);
        }
    }
    p
}

/// Scenarios where the two simulators disagree on flips or on the residual
/// modulo the final stabilizer group, and scenarios with any flip.
pub fn oracle_discrepancies(scenarios: usize, seed: u64) -> (usize, usize) {
    let mut bad = 0;
    let mut flipped = 0;
    for i in 0..scenarios {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let n = rng.gen_range(1..=10);
        let c = random_circuit(&mut rng, n);
        let k = rng.gen_range(1..=3);
        let inj: Vec<(usize, PauliOp)> =
            (0..k).map(|_| (rng.gen_range(0..=c.steps.len()), random_pauli(&mut rng, n))).collect();
        let f = run_pauli_frame(&c, &inj).unwrap();
        let t = run_tableau(&c, &inj, &mut rng).unwrap();
        let diff = f.frame * t.frame;
        let same_frame = t.stabilizers.iter().all(|s| s.commutes(&diff).unwrap());
        if f.flips != t.flips || t.random.iter().any(|&r| r) || !same_frame {
            bad += 1;
        }
        flipped += usize::from(f.flips.iter().any(|&b| b));
    }
    (bad, flipped)
}
