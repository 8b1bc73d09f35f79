use std::collections::BTreeSet;

use erasurenet::choice::{erasure_to_pauli, Sampler};
use erasurenet::codes::four_qubit_code;
use erasurenet::cre::{sample_cre_times, CreProcess};
use erasurenet::pauli::Pauli;
use erasurenet::protocol::{KnillEngine, Schedule};
use erasurenet::timing::TimingModel;
use statrs::distribution::{ChiSquared, ContinuousCDF, Exp};

fn chi2_p(observed: &[u64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn erasure_paulis_are_uniform() {
    let mut s = Sampler::new(42);
    let mut counts = [0u64; 4];
    let draws = 40_000;
    for _ in 0..draws {
        let p = erasure_to_pauli(1, 0, &mut s).get(0);
        counts[Pauli::ALL.iter().position(|&q| q == p).unwrap()] += 1;
    }
    let p = chi2_p(&counts, &[draws as f64 / 4.0; 4]);
    assert!(p > 1e-3, "chi2 p = {p}, counts {counts:?}");
}

#[test]
fn event_counts_have_poisson_mean() {
    let proc = CreProcess::new(3.0, 5).unwrap();
    let window = 2.0;
    let runs = 4_000;
    let total: usize = (0..runs).map(|i| sample_cre_times(&proc, window, i).unwrap().len()).sum();
    let mean = total as f64 / runs as f64;
    let want = 30.0;
    // Standard error of the mean is sqrt(30 / 4000) ≈ 0.087.
    assert!((mean - want).abs() < 0.4, "{mean}");
}

#[test]
fn inter_arrival_times_are_exponential() {
    let proc = CreProcess::new(2.0, 1).unwrap();
    let ev = sample_cre_times(&proc, 5_000.0, 7).unwrap();
    let mut gaps: Vec<f64> = ev.windows(2).map(|w| w[1].time - w[0].time).collect();
    gaps.sort_by(f64::total_cmp);
    let exp = Exp::new(2.0).unwrap();
    let n = gaps.len() as f64;
    let d = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let f = exp.cdf(g);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // Kolmogorov critical value at the 0.1% level.
    assert!(d < 1.95 / n.sqrt(), "KS D = {d}, n = {n}");
}

#[test]
fn knill_restarts_are_geometric() {
    let t = TimingModel::default();
    let code = four_qubit_code();
    let prep = 2.0 * t.t_sq() + 3.0 * t.t_nscx();
    // Chosen so that a preparation attempt survives with probability 1/2.
    let lambda = std::f64::consts::LN_2 / (4.0 * prep);
    let proc = CreProcess::new(lambda, 4).unwrap();
    let mut engine = KnillEngine::new(code, t).unwrap();
    engine.record = false;
    let runs = 4_000;
    let mut hist = [0u64; 6];
    for i in 0..runs {
        // Only events after detection count toward preparation.
        let events: Vec<_> = sample_cre_times(&proc, 1.0, 1_000 + i)
            .unwrap()
            .into_iter()
            .map(|mut e| {
                e.time += t.t_sq();
                e
            })
            .collect();
        let mut sched = Schedule::new(events, 4).unwrap();
        let out = engine.run(&BTreeSet::from([0]), &mut sched, &mut Sampler::new(i)).unwrap();
        hist[out.restarts.min(5)] += 1;
    }
    let mut expected: Vec<f64> = (0..5).map(|k| runs as f64 * 0.5f64.powi(k + 1)).collect();
    expected.push(runs as f64 * 0.5f64.powi(5));
    let p = chi2_p(&hist, &expected);
    assert!(p > 1e-3, "chi2 p = {p}, hist {hist:?}");
}
