// SPDX-License-Identifier: Apache-2.0

//! Goodness-of-fit helpers for the statistical checks.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Minimum expected count per chi-square bin; sparser bins are merged.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of `observed` counts against `probs` (same
/// support; any probability mass missing from `probs` is ignored). Adjacent
/// bins are merged left to right until each expects at least
/// [`MIN_EXPECTED`]; a short trailing bin joins its neighbour.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len(), "observed/probs length mismatch");
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        o += obs as f64;
        e += p * n;
        if e >= MIN_EXPECTED {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let statistic: f64 = bins
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).expect("dof > 0").sf(statistic)
    };
    ChiSquareResult { statistic, dof, p_value }
}

/// Two-sided p-value of a standard-normal score.
pub fn two_sided_p(z: f64) -> f64 {
    2.0 * Normal::standard().sf(z.abs())
}

/// Score of `successes` out of `trials` against probability `p`.
pub fn binomial_z(successes: u64, trials: u64, p: f64) -> f64 {
    let t = trials as f64;
    (successes as f64 - t * p) / (t * p * (1.0 - p)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_has_zero_statistic() {
        let r = chi_square_gof(&[25, 50, 25], &[0.25, 0.5, 0.25]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_statistic() {
        // (60-50)^2/50 + (40-50)^2/50 = 4, 1 dof.
        let r = chi_square_gof(&[60, 40], &[0.5, 0.5]);
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.0455).abs() < 1e-4);
    }

    #[test]
    fn sparse_bins_merge() {
        let r = chi_square_gof(&[1, 2, 97], &[0.01, 0.02, 0.97]);
        assert_eq!(r.dof, 0);
    }

    #[test]
    fn normal_tail() {
        assert!((two_sided_p(1.959964) - 0.05).abs() < 1e-6);
        assert_eq!(binomial_z(50, 100, 0.5), 0.0);
    }
}
