// SPDX-License-Identifier: Apache-2.0

//! Closed-form planning: conclusive probability, expected known bits, restart
//! probability, the angle that hits a target, and the smallest substring
//! count that keeps the angle in a feasible window.

mod figures;
mod tables;

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};
use crate::linalg::Theta;

pub use figures::{fig_data, PlanFigure};
pub use tables::{check_tables, table_generator, CellCheck, Table, TableId, TableRow};

/// Largest substring count the planner considers.
pub const MAX_K: usize = 64;

/// `sin^2(theta) / 2`.
pub fn conclusive_probability(theta: Theta) -> f64 {
    0.5 * theta.radians().sin().powi(2)
}

/// `N p^k`.
pub fn expected_known_bits(n: usize, p: f64, k: usize) -> f64 {
    n as f64 * p.powi(k as i32)
}

/// `(1 - p^k)^N`, evaluated as `exp(N ln(1 - p^k))`.
pub fn failure_probability(n: usize, p: f64, k: usize) -> f64 {
    (n as f64 * (-p.powi(k as i32)).ln_1p()).exp()
}

/// Angle for which `N p^k` equals `nbar`.
pub fn solve_theta(n: usize, k: usize, nbar: f64) -> Result<Theta> {
    if n == 0 || k == 0 {
        return Err(Error::Domain("N and k must be at least 1".into()));
    }
    if nbar.is_nan() || nbar <= 0.0 {
        return Err(Error::Domain(format!("target {nbar} must be positive")));
    }
    let p = (nbar / n as f64).powf(1.0 / k as f64);
    if p >= 0.5 {
        return Err(Error::Infeasible(format!(
            "target exceeds p≤1/2 bound: (nbar/N)^(1/k) = {p:.6} but p = sin²θ/2 < 1/2 for θ in (0, π/2)"
        )));
    }
    Theta::new((2.0 * p).sqrt().asin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub n_items: usize,
    pub k: usize,
    pub theta: Theta,
    pub p: f64,
    pub n_bar: f64,
    pub p0: f64,
}

impl PlanResult {
    pub fn new(n_items: usize, k: usize, theta: Theta) -> Self {
        let p = conclusive_probability(theta);
        Self {
            n_items,
            k,
            theta,
            p,
            n_bar: expected_known_bits(n_items, p, k),
            p0: failure_probability(n_items, p, k),
        }
    }
}

// Absorbs rounding when the solved angle lands exactly on a window edge.
const WINDOW_TOL: f64 = 1e-12;

/// Smallest `k` whose solved angle lies in `[theta_min, theta_max]`.
/// `theta_max` is normally pi/4.
pub fn plan_min_k_within(n: usize, nbar: f64, theta_min: f64, theta_max: f64) -> Result<PlanResult> {
    if !(theta_min > 0.0 && theta_min <= theta_max) {
        return Err(Error::Domain(format!(
            "theta window [{theta_min}, {theta_max}] is empty or not positive"
        )));
    }
    for k in 1..=MAX_K {
        if let Ok(theta) = solve_theta(n, k, nbar) {
            let t = theta.radians();
            if t >= theta_min - WINDOW_TOL && t <= theta_max + WINDOW_TOL {
                return Ok(PlanResult::new(n, k, theta));
            }
            if t > theta_max + WINDOW_TOL {
                break;
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no k ≤ {MAX_K} puts θ in [{theta_min}, {theta_max:.6}] for N = {n}, nbar = {nbar}"
    )))
}

/// [`plan_min_k_within`] with the default pi/4 ceiling.
pub fn plan_min_k(n: usize, nbar: f64, theta_min: f64) -> Result<PlanResult> {
    if theta_min > FRAC_PI_4 {
        return Err(Error::Domain(format!("theta_min {theta_min} exceeds π/4")));
    }
    plan_min_k_within(n, nbar, theta_min, FRAC_PI_4)
}

/// Largest `k` whose restart probability stays at or below `max_p0`, i.e. the
/// fewest known bits that still make a restart unlikely.
pub fn choose_k_for_p(n: usize, p: f64, max_p0: f64) -> Option<usize> {
    (1..=MAX_K)
        .take_while(|&k| failure_probability(n, p, k) <= max_p0)
        .last()
}

/// Distribution of Alice's known-bit count, truncated once the cumulative
/// mass reaches `1 - 1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownCountDistribution {
    pub binomial: Vec<f64>,
    pub poisson: Vec<f64>,
}

const TRUNCATION: f64 = 1e-12;

pub fn known_count_distribution(n: usize, p: f64, k: usize) -> KnownCountDistribution {
    let q = p.powi(k as i32);
    let lambda = n as f64 * q;
    let (ln_q, ln_1mq) = (q.ln(), (-q).ln_1p());
    let binomial = truncated(n, |i| {
        (ln_binomial(n as u64, i as u64) + i as f64 * ln_q + (n - i) as f64 * ln_1mq).exp()
    });
    let poisson = truncated(usize::MAX, |i| {
        (i as f64 * lambda.ln() - lambda - ln_factorial(i as u64)).exp()
    });
    KnownCountDistribution { binomial, poisson }
}

fn truncated(max: usize, pmf: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut mass = 0.0;
    let mut i = 0;
    while mass < 1.0 - TRUNCATION && i <= max {
        let v = pmf(i);
        mass += v;
        out.push(v);
        i += 1;
    }
    out
}

/// Total-variation distance between two truncated mass functions.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn theta(t: f64) -> Theta {
        Theta::new(t).unwrap()
    }

    #[test]
    fn conclusive_probability_examples() {
        assert!((conclusive_probability(theta(FRAC_PI_4)) - 0.25).abs() < 1e-15);
        assert!((conclusive_probability(theta(0.354)) - 0.06).abs() < 5e-4);
        assert!(conclusive_probability(theta(1e-9)) < 1e-17);
    }

    #[test]
    fn expected_bits_and_failure() {
        assert!((expected_known_bits(1000, 0.15, 3) - 3.375).abs() < 1e-12);
        assert!((expected_known_bits(50_000, 0.15, 5) - 3.79).abs() < 0.01);
        assert_eq!(expected_known_bits(40, 0.2, 1), 40.0 * 0.2);
        assert!((failure_probability(1000, 0.15, 3) - 0.034).abs() < 5e-4);
        let p0 = failure_probability(1_000_000, 0.15, 6);
        assert!(p0 > 1e-5 && p0 < 1.2e-5);
        assert!((failure_probability(100, 0.05, 1) - 0.95f64.powi(100)).abs() < 1e-15);
    }

    #[test]
    fn solve_theta_examples() {
        assert!((solve_theta(100, 1, 3.0).unwrap().radians() - 0.247).abs() < 5e-4);
        assert!((solve_theta(1000, 1, 5.0).unwrap().radians() - 0.100).abs() < 5e-4);
        assert!((solve_theta(12, 1, 3.0).unwrap().radians() - FRAC_PI_4).abs() < 1e-12);
        let err = solve_theta(10, 1, 9.0).unwrap_err().to_string();
        assert!(err.contains("target exceeds p≤1/2 bound"), "{err}");
        assert!(solve_theta(10, 1, 0.0).is_err());
    }

    #[test]
    fn plan_examples() {
        let r = plan_min_k(10_000, 3.0, 0.2).unwrap();
        assert_eq!(r.k, 3);
        assert!((r.theta.radians() - 0.375).abs() < 5e-4);
        let r = plan_min_k(1_000_000, 3.0, 0.2).unwrap();
        assert_eq!(r.k, 4);
        assert!((r.theta.radians() - 0.293).abs() < 5e-4);
        let r = plan_min_k(12, 3.0, 0.2).unwrap();
        assert_eq!(r.k, 1);
        assert!((r.theta.radians() - FRAC_PI_4).abs() < 1e-12);
        assert!(plan_min_k(10, 9.0, 0.2).is_err());
        assert!(plan_min_k(1000, 3.0, 1.0).is_err());
    }

    #[test]
    fn plan_brute_force_minimality() {
        for &n in &[20usize, 100, 1000, 5000, 30_000, 1_000_000, 10_000_000] {
            for &nbar in &[1.0, 3.0, 5.0] {
                for &tmin in &[0.05, 0.2, 0.3, 0.5] {
                    let brute = (1..=MAX_K).find(|&k| {
                        solve_theta(n, k, nbar)
                            .map(|t| t.radians() >= tmin - WINDOW_TOL && t.radians() <= FRAC_PI_4 + WINDOW_TOL)
                            .unwrap_or(false)
                    });
                    match plan_min_k(n, nbar, tmin) {
                        Ok(r) => {
                            assert_eq!(Some(r.k), brute);
                            assert!(r.theta.radians() >= tmin - WINDOW_TOL);
                            assert!(r.theta.radians() <= FRAC_PI_4 + WINDOW_TOL);
                        }
                        Err(_) => assert_eq!(brute, None, "n={n} nbar={nbar} tmin={tmin}"),
                    }
                }
            }
        }
    }

    #[test]
    fn lifted_ceiling() {
        // nbar/N = 0.4 needs theta above pi/4.
        assert!(plan_min_k(10, 4.0, 0.2).is_err());
        let r = plan_min_k_within(10, 4.0, 0.2, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(r.k, 1);
        assert!(r.theta.radians() > FRAC_PI_4);
    }

    #[test]
    fn k_choice_for_fixed_p() {
        let ks: Vec<_> = [1000, 5000, 10_000, 50_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| choose_k_for_p(n, 0.15, 0.1).unwrap())
            .collect();
        assert_eq!(ks, vec![3, 4, 4, 5, 5, 6]);
    }

    #[test]
    fn distribution_identities() {
        let d = known_count_distribution(1000, 0.15, 3);
        assert!((d.binomial[0] - failure_probability(1000, 0.15, 3)).abs() < 1e-15);
        assert!(total_variation(&d.binomial, &d.poisson) < 0.01);
        let b = known_count_distribution(1, 0.3, 2);
        assert_eq!(b.binomial.len(), 2);
        assert!((b.binomial[1] - 0.09).abs() < 1e-12);
        assert!((b.binomial[0] - 0.91).abs() < 1e-12);
        let total: f64 = d.binomial.iter().sum();
        assert!((total - 1.0).abs() < 1e-11);
    }

    #[test]
    fn monotonicity() {
        let (n, k) = (5000, 3);
        let mut prev_nbar = 0.0;
        let mut prev_p0 = 1.0;
        for i in 1..100 {
            let p = conclusive_probability(theta(i as f64 * 0.0157));
            let nbar = expected_known_bits(n, p, k);
            let p0 = failure_probability(n, p, k);
            assert!(nbar > prev_nbar && p0 <= prev_p0);
            prev_nbar = nbar;
            prev_p0 = p0;
        }
        let p = 0.2;
        for k in 1..10 {
            assert!(expected_known_bits(n, p, k + 1) < expected_known_bits(n, p, k));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn solve_round_trip(n in 1usize..10_000_000, k in 1usize..12, frac in 0.001f64..0.999) {
            // Keep the target strictly feasible: nbar = N (frac/2)^k.
            let nbar = n as f64 * (0.5 * frac).powi(k as i32);
            prop_assume!(nbar > 1e-300);
            let t = solve_theta(n, k, nbar).unwrap();
            let back = expected_known_bits(n, conclusive_probability(t), k);
            prop_assert!((back - nbar).abs() <= 1e-9 * nbar.max(1.0), "{} vs {}", back, nbar);
        }
    }
}
