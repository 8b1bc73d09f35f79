//! Sources of nondeterminism: seeded sampling, or exhaustive enumeration by
//! replaying choice prefixes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliOp};

/// Which independent random stream a decision draws from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stream {
    /// Fault placement and the Pauli left on a replaced qubit.
    Erasure,
    /// Outcome-like branches, such as the state left behind by a discarded
    /// ancilla.
    Measurement,
}

pub trait Chooser {
    /// Picks an index in `0..n`; `n ≥ 1`.
    fn choose(&mut self, stream: Stream, n: usize) -> usize;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices into a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019))))
}

#[derive(Clone, Debug)]
pub struct Sampler {
    erasure: ChaCha8Rng,
    measurement: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            erasure: ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0])),
            measurement: ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1])),
        }
    }
}

impl Chooser for Sampler {
    fn choose(&mut self, stream: Stream, n: usize) -> usize {
        assert!(n >= 1);
        let rng = match stream {
            Stream::Erasure => &mut self.erasure,
            Stream::Measurement => &mut self.measurement,
        };
        rng.gen_range(0..n)
    }
}

/// Depth-first enumeration of every choice sequence. Each run replays the
/// current prefix, then takes option 0 at every new decision point.
#[derive(Clone, Debug, Default)]
pub struct Enumerator {
    path: Vec<(usize, usize)>,
    pos: usize,
    done: bool,
}

impl Enumerator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replays a recorded path, then defaults to option 0.
    pub fn replay(choices: &[usize]) -> Self {
        Self { path: choices.iter().map(|&c| (c, usize::MAX)).collect(), pos: 0, done: false }
    }

    /// Choices taken in the most recent run.
    pub fn path(&self) -> Vec<usize> {
        self.path[..self.pos].iter().map(|&(c, _)| c).collect()
    }

    /// Moves to the next unexplored sequence. Returns false when the tree is
    /// exhausted.
    pub fn advance(&mut self) -> bool {
        self.path.truncate(self.pos);
        self.pos = 0;
        while let Some((c, n)) = self.path.pop() {
            if c + 1 < n {
                self.path.push((c + 1, n));
                return true;
            }
        }
        self.done = true;
        false
    }

    pub fn is_done(&self) -> bool {
        self.done
    }
}

impl Chooser for Enumerator {
    fn choose(&mut self, _stream: Stream, n: usize) -> usize {
        assert!(n >= 1);
        let c = if let Some(entry) = self.path.get_mut(self.pos) {
            if entry.1 == usize::MAX {
                entry.1 = n;
            }
            assert_eq!(entry.1, n, "replayed run diverged from its prefix");
            entry.0
        } else {
            self.path.push((0, n));
            0
        };
        self.pos += 1;
        c
    }
}

/// Uniform Pauli left on a replaced qubit.
pub fn erasure_to_pauli(n: usize, qubit: usize, chooser: &mut dyn Chooser) -> PauliOp {
    PauliOp::single(n, qubit, Pauli::ALL[chooser.choose(Stream::Erasure, 4)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerator_visits_every_leaf_once() {
        let mut e = Enumerator::new();
        let mut seen = Vec::new();
        loop {
            let a = e.choose(Stream::Erasure, 3);
            let leaf = if a == 1 { (a, e.choose(Stream::Measurement, 2)) } else { (a, 9) };
            seen.push(leaf);
            if !e.advance() {
                break;
            }
        }
        assert_eq!(seen, vec![(0, 9), (1, 0), (1, 1), (2, 9)]);
        assert!(e.is_done());
    }

    #[test]
    fn erasure_enumeration_has_four_branches() {
        let mut e = Enumerator::new();
        let mut ops = Vec::new();
        loop {
            ops.push(erasure_to_pauli(3, 1, &mut e).to_string());
            if !e.advance() {
                break;
            }
        }
        assert_eq!(ops, vec!["I", "X2", "Y2", "Z2"]);
    }

    #[test]
    fn replay_reproduces_path() {
        let mut e = Enumerator::replay(&[2, 1]);
        assert_eq!(e.choose(Stream::Erasure, 4), 2);
        assert_eq!(e.choose(Stream::Erasure, 4), 1);
        assert_eq!(e.choose(Stream::Erasure, 4), 0);
        assert_eq!(e.path(), vec![2, 1, 0]);
    }

    #[test]
    fn sampler_is_seed_deterministic_and_streams_independent() {
        let draw = |seed| {
            let mut s = Sampler::new(seed);
            (0..32).map(|_| s.choose(Stream::Erasure, 4)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..10 {
            b.choose(Stream::Measurement, 2);
        }
        for _ in 0..32 {
            assert_eq!(a.choose(Stream::Erasure, 4), b.choose(Stream::Erasure, 4));
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
    }
}
