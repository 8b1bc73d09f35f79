//! Closed-form catastrophic-event rates.

use crate::error::{Error, Result};

/// P[N ≥ m] for N ~ Poisson(x), without cancellation at small x.
pub fn poisson_tail(m: u32, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x > m as f64 + 30.0 {
        let mut term = (-x).exp();
        let mut lower = term;
        for k in 1..m {
            term *= x / k as f64;
            lower += term;
        }
        return (1.0 - lower).max(0.0);
    }
    // e^{-x} x^m / m!, then the ascending series.
    let mut term = (-x + m as f64 * x.ln() - ln_factorial(m)).exp();
    let mut sum = 0.0;
    let mut k = m;
    loop {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if term < sum * 1e-17 && (k as f64) > x {
            break;
        }
    }
    sum.min(1.0)
}

/// P[N = k] for N ~ Poisson(x).
pub fn poisson_pmf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-x + k as f64 * x.ln() - ln_factorial(k)).exp()
}

pub fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn check(n: usize, d: usize, lambda: f64, tau: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::Parameter(format!("n must be ≥ 1, got {n}")));
    }
    if d < 2 {
        return Err(Error::Parameter(format!("d must be ≥ 2, got {d}")));
    }
    check_rate(lambda, tau)
}

fn check_rate(lambda: f64, tau: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("tau must be non-negative, got {tau}")));
    }
    Ok(())
}

/// nλ · P[at least d−1 further CREs among n+1 chips within τ].
pub fn gamma_exact(n: usize, d: usize, lambda: f64, tau: f64) -> Result<f64> {
    check(n, d, lambda, tau)?;
    let x = (n as f64 + 1.0) * lambda * tau;
    Ok(n as f64 * lambda * poisson_tail(d as u32 - 1, x))
}

/// Leading-order term nλ[(n+1)λτ]^{d−1}/(d−1)!, valid for nλτ ≪ 1.
pub fn gamma_approx(n: usize, d: usize, lambda: f64, tau: f64) -> Result<f64> {
    check(n, d, lambda, tau)?;
    let x = (n as f64 + 1.0) * lambda * tau;
    let m = d as u32 - 1;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(n as f64 * lambda * (m as f64 * x.ln() - ln_factorial(m)).exp())
}

/// 6λ[1 − exp(−λτ/6)] for the fixed six-measurement Steane circuit.
pub fn gamma_nonft_upper(lambda: f64, tau: f64) -> Result<f64> {
    check_rate(lambda, tau)?;
    Ok(-6.0 * lambda * (-lambda * tau / 6.0).exp_m1())
}

pub fn hours(rate: f64) -> f64 {
    1.0 / rate / 3600.0
}

pub fn days(rate: f64) -> f64 {
    1.0 / rate / 86400.0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation of the closed form, as written.
    fn naive(n: usize, d: usize, lambda: f64, tau: f64) -> f64 {
        let x = (n as f64 + 1.0) * lambda * tau;
        let mut s = 0.0;
        let mut term = 1.0;
        for k in 0..=(d - 2) {
            if k > 0 {
                term *= x / k as f64;
            }
            s += term;
        }
        n as f64 * lambda * (1.0 - (-x).exp() * s)
    }

    #[test]
    fn zero_window_gives_zero() {
        assert_eq!(gamma_exact(4, 2, 0.1, 0.0).unwrap(), 0.0);
        assert_eq!(gamma_approx(7, 3, 0.1, 0.0).unwrap(), 0.0);
        assert_eq!(gamma_nonft_upper(0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_naive_formula_where_stable() {
        for &(n, d) in &[(4, 2), (7, 3), (9, 3), (9, 5)] {
            for &tau in &[1e-2, 0.1, 1.0, 10.0, 100.0] {
                let a = gamma_exact(n, d, 0.1, tau).unwrap();
                let b = naive(n, d, 0.1, tau);
                assert!((a - b).abs() <= 1e-9 * b + 1e-14 * n as f64 * 0.1, "{n} {d} {tau}: {a} {b}");
            }
        }
    }

    #[test]
    fn marker_lifetimes() {
        let g4 = gamma_exact(4, 2, 0.1, 264e-6).unwrap();
        let g7 = gamma_exact(7, 3, 0.1, 1014e-6).unwrap();
        assert!((4.9..=5.5).contains(&hours(g4)), "{}", hours(g4));
        assert!((48.0..=55.0).contains(&days(g7)), "{}", days(g7));
        let g270 = gamma_exact(4, 2, 0.1, 270e-6).unwrap();
        assert!((g270 - 5.40e-5).abs() < 0.01e-5);
        assert!((days(gamma_exact(7, 3, 0.1, 1000e-6).unwrap()) - 51.7).abs() < 0.1);
    }

    #[test]
    fn approx_is_leading_order() {
        for &(n, d) in &[(4usize, 2usize), (7, 3)] {
            let tau = 1e-3 / ((n as f64 + 1.0) * 0.1);
            let e = gamma_exact(n, d, 0.1, tau).unwrap();
            let a = gamma_approx(n, d, 0.1, tau).unwrap();
            assert!(((a - e) / e).abs() < 1e-3);
        }
        let (n, l, t) = (4.0, 0.1, 1e-4);
        assert!((gamma_approx(4, 2, l, t).unwrap() - n * (n + 1.0) * l * l * t).abs() < 1e-18);
    }

    #[test]
    fn nonft_bound_values() {
        let g = gamma_nonft_upper(0.1, 1e-3).unwrap();
        assert!((g - 0.6 * (1.0 - (-1e-4f64 / 6.0).exp())).abs() < 1e-9 * g);
        assert!((g - 1.0e-5).abs() < 0.01e-5);
        assert!((gamma_nonft_upper(0.1, 1e6).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn monotonicity() {
        let taus = [0.0, 1e-6, 1e-4, 1e-2, 1.0];
        for w in taus.windows(2) {
            assert!(gamma_exact(7, 3, 0.1, w[0]).unwrap() <= gamma_exact(7, 3, 0.1, w[1]).unwrap());
        }
        assert!(gamma_exact(7, 3, 0.1, 1e-3).unwrap() <= gamma_exact(7, 3, 0.2, 1e-3).unwrap());
        assert!(gamma_exact(7, 3, 0.1, 1e-3).unwrap() <= gamma_exact(9, 3, 0.1, 1e-3).unwrap());
        assert!(gamma_exact(7, 4, 0.1, 1e-3).unwrap() <= gamma_exact(7, 3, 0.1, 1e-3).unwrap());
    }

    #[test]
    fn domain_errors() {
        assert!(gamma_exact(0, 2, 0.1, 1.0).is_err());
        assert!(gamma_exact(4, 1, 0.1, 1.0).is_err());
        assert!(gamma_exact(4, 2, 0.0, 1.0).is_err());
        assert!(gamma_exact(4, 2, 0.1, -1.0).is_err());
        assert!(gamma_nonft_upper(-0.1, 1.0).is_err());
    }

    #[test]
    fn poisson_helpers() {
        let x = 2.5;
        let total: f64 = (0..60).map(|k| poisson_pmf(k, x)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for m in 0..8 {
            let tail: f64 = (m..80).map(|k| poisson_pmf(k, x)).sum();
            assert!((poisson_tail(m, x) - tail).abs() < 1e-12);
        }
        assert!((poisson_tail(2, 1e-8) - 0.5e-16).abs() < 1e-24);
        assert!((poisson_tail(3, 100.0) - 1.0).abs() < 1e-12);
    }
}
