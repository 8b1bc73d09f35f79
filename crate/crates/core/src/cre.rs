//! Poisson arrivals of chip-level cosmic-ray events.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::FaultEvent;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreProcess {
    /// Per-chip rate, s⁻¹.
    pub lambda: f64,
    pub n_chips: usize,
}

impl CreProcess {
    pub fn new(lambda: f64, n_chips: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda, n_chips })
    }

    pub fn total_rate(&self) -> f64 {
        self.lambda * self.n_chips as f64
    }
}

fn exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// Independent per-chip arrivals in `[0, window)`, merged and time-sorted.
pub fn sample_cre_times(proc: &CreProcess, window: f64, seed: u64) -> Result<Vec<FaultEvent>> {
    if !(window >= 0.0 && window.is_finite()) {
        return Err(Error::Parameter(format!("window must be non-negative, got {window}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    for chip in 0..proc.n_chips {
        let mut t = exponential(&mut rng, proc.lambda);
        while t < window {
            events.push(FaultEvent { time: t, chip, location: None });
            t += exponential(&mut rng, proc.lambda);
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.chip.cmp(&b.chip)));
    Ok(events)
}
