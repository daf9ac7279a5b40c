// SPDX-License-Identifier: Apache-2.0

//! Joint attacks on a whole final bit: Alice holds the `k` raw qubits that
//! XOR into it and tries to learn their parity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::{AttackKind, AttackReport};
use crate::error::{Error, Result};
use crate::linalg::{carrier_state, fidelity, tensor, trace_distance, CarrierLabel, DensityMatrix, StateVector, Theta};
use crate::par::{chunked_trials, Parallelism};
use crate::rng::RandomStream;

/// Largest `k` for which the `2^k`-dimensional mixtures are built.
pub const MAX_PARITY_K: usize = 10;

const ZERO_EIGEN: f64 = 1e-12;

/// Uniform mixtures of the even- and odd-parity product states, with bit 0
/// carried by `|0>` and bit 1 by `|0'>`.
#[derive(Debug, Clone)]
pub struct ParityPair {
    pub k: usize,
    pub rho_even: DensityMatrix,
    pub rho_odd: DensityMatrix,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if k > MAX_PARITY_K {
        return Err(Error::Capacity {
            what: "parity block length k",
            value: k,
            limit: MAX_PARITY_K,
        });
    }
    Ok(())
}

/// Product state for the bit string `bits` (bit `q` is qubit `q`, most
/// significant qubit first).
fn product_state(bits: usize, k: usize, qubits: &[StateVector; 2]) -> StateVector {
    let factors: Vec<StateVector> = (0..k)
        .map(|q| qubits[(bits >> (k - 1 - q)) & 1].clone())
        .collect();
    tensor(&factors).expect("k within capacity")
}

fn letter_states(theta: Theta) -> [StateVector; 2] {
    [carrier_state(CarrierLabel::K0, theta), carrier_state(CarrierLabel::K0P, theta)]
}

/// Product states of one parity class, in increasing bit-string order.
fn class_states(theta: Theta, k: usize, parity: u32) -> Vec<StateVector> {
    let qubits = letter_states(theta);
    (0..1usize << k)
        .filter(|b| b.count_ones() % 2 == parity)
        .map(|b| product_state(b, k, &qubits))
        .collect()
}

pub fn parity_mixtures(theta: Theta, k: usize) -> Result<ParityPair> {
    check_k(k)?;
    let build = |parity| {
        let states = class_states(theta, k, parity);
        let w = 1.0 / states.len() as f64;
        let parts: Vec<(f64, &StateVector)> = states.iter().map(|s| (w, s)).collect();
        DensityMatrix::mixture(&parts)
    };
    Ok(ParityPair {
        k,
        rho_even: build(0)?,
        rho_odd: build(1)?,
    })
}

/// Minimum-error probability of guessing the parity.
pub fn helstrom_guess(theta: Theta, k: usize) -> f64 {
    0.5 + 0.5 * theta.radians().sin().powi(k as i32)
}

/// `1/2 + 1/2 D(rho_even, rho_odd)` from the constructed mixtures.
pub fn helstrom_numeric(theta: Theta, k: usize) -> Result<f64> {
    let pair = parity_mixtures(theta, k)?;
    Ok(0.5 + 0.5 * trace_distance(&pair.rho_even, &pair.rho_odd)?)
}

/// Upper bound `1 - F(rho_even, rho_odd)` on unambiguously identifying the
/// parity of one final bit.
///
/// Both mixtures are `A A^dagger` with `A` the weighted class states as
/// columns, so `F = ||A_even^dagger A_odd||_1`. This avoids square roots of
/// the nearly singular mixtures at small angles.
pub fn joint_usd_bound(theta: Theta, k: usize) -> Result<f64> {
    check_k(k)?;
    let c = theta.radians().cos();
    let half = 1usize << (k - 1);
    let even: Vec<usize> = (0..1usize << k).filter(|b| b.count_ones() % 2 == 0).collect();
    let odd: Vec<usize> = (0..1usize << k).filter(|b| b.count_ones() % 2 == 1).collect();
    // <x|y> for product states is cos(theta)^(differing positions).
    let gram = DMatrix::<f64>::from_fn(half, half, |r, col| {
        c.powi((even[r] ^ odd[col]).count_ones() as i32) / half as f64
    });
    let f: f64 = gram.singular_values().iter().sum();
    Ok(1.0 - f.clamp(0.0, 1.0))
}

/// Per-bit bound evaluated through the general density-matrix fidelity.
fn joint_usd_numeric(theta: Theta, k: usize) -> Result<f64> {
    let pair = parity_mixtures(theta, k)?;
    Ok(1.0 - fidelity(&pair.rho_even, &pair.rho_odd)?)
}

pub fn joint_usd_report(theta: Theta, k: usize, n_items: Option<usize>) -> Result<AttackReport> {
    let bound = joint_usd_bound(theta, k)?;
    let numeric = if k <= 6 { Some(joint_usd_numeric(theta, k)?) } else { None };
    Ok(AttackReport {
        n_items,
        numeric_check: numeric,
        ..AttackReport::analytic_only(AttackKind::JointUsd, theta.radians(), k, "per_bit_success_bound", bound)
    })
}

/// Probability, for each `k`-bit string, that the Helstrom measurement names
/// its parity correctly. The measurement projects onto the positive part of
/// `rho_even - rho_odd`; the null space is split evenly.
fn helstrom_success_table(theta: Theta, k: usize) -> Result<Vec<f64>> {
    let pair = parity_mixtures(theta, k)?;
    let diff = pair.rho_even.entries() - pair.rho_odd.entries();
    let eig = SymmetricEigen::new(diff);
    let qubits = letter_states(theta);
    let table = (0..1usize << k)
        .map(|b| {
            let psi = nalgebra::DVector::from_column_slice(product_state(b, k, &qubits).amps());
            let mut p_even = 0.0;
            for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
                let w: f64 = eig.eigenvectors.column(i).dotc(&psi).norm_sqr();
                if lambda > ZERO_EIGEN {
                    p_even += w;
                } else if lambda.abs() <= ZERO_EIGEN {
                    p_even += 0.5 * w;
                }
            }
            if b.count_ones() % 2 == 0 {
                p_even
            } else {
                1.0 - p_even
            }
        })
        .collect();
    Ok(table)
}

/// Helstrom measurement on uniformly random `k`-bit strings: analytic guess
/// probability, trace-distance cross-check and Monte Carlo success rate.
pub fn alice_joint_helstrom(theta: Theta, k: usize, trials: u64, seed: u64, mode: Parallelism) -> Result<AttackReport> {
    let analytic = helstrom_guess(theta, k);
    let numeric = helstrom_numeric(theta, k)?;
    let table = helstrom_success_table(theta, k)?;
    let wins: u64 = chunked_trials(trials, seed, mode, |rng: &mut RandomStream, len| {
        (0..len)
            .filter(|_| {
                let b = rng.random_range(0..table.len());
                rng.random::<f64>() < table[b]
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    let (estimate, sigma) = if trials > 0 {
        let t = trials as f64;
        (Some(wins as f64 / t), Some((analytic * (1.0 - analytic) / t).sqrt()))
    } else {
        (None, None)
    };
    Ok(AttackReport {
        numeric_check: Some(numeric),
        estimate,
        sigma,
        trials,
        seed: Some(seed),
        ..AttackReport::analytic_only(AttackKind::Helstrom, theta.radians(), k, "guess_probability", analytic)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_entry_norm, Complex64};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn theta(t: f64) -> Theta {
        Theta::new(t).unwrap()
    }

    fn grid() -> Vec<f64> {
        (1..=20).map(|i| FRAC_PI_2 * i as f64 / 21.0).collect()
    }

    /// `[(r0 + r1)^{(x)k} +- (r0 - r1)^{(x)k}] / 2^k`.
    fn closed_form(t: f64, k: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let [a, b] = letter_states(theta(t));
        let r0 = a.to_density().entries().clone();
        let r1 = b.to_density().entries().clone();
        let (sum, dif) = (&r0 + &r1, &r0 - &r1);
        let (mut s, mut d) = (sum.clone(), dif.clone());
        for _ in 1..k {
            s = s.kronecker(&sum);
            d = d.kronecker(&dif);
        }
        let scale = Complex64::new(0.5f64.powi(k as i32), 0.0);
        ((&s + &d) * scale, (&s - &d) * scale)
    }

    #[test]
    fn single_bit_classes() {
        let p = parity_mixtures(theta(0.6), 1).unwrap();
        let [a, b] = letter_states(theta(0.6));
        assert!(p.rho_even.max_abs_diff(&a.to_density()) < 1e-15);
        assert!(p.rho_odd.max_abs_diff(&b.to_density()) < 1e-15);
    }

    #[test]
    fn enumeration_matches_closed_form() {
        for k in 1..=5 {
            for t in [0.2, FRAC_PI_4, 1.3] {
                let p = parity_mixtures(theta(t), k).unwrap();
                let (e, o) = closed_form(t, k);
                assert!(max_entry_norm(&(p.rho_even.entries() - e)) < 1e-12);
                assert!(max_entry_norm(&(p.rho_odd.entries() - o)) < 1e-12);
            }
        }
    }

    #[test]
    fn k2_trace_and_rank() {
        let p = parity_mixtures(theta(FRAC_PI_4), 2).unwrap();
        for rho in [&p.rho_even, &p.rho_odd] {
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert_eq!(rho.rank(1e-9), 2);
        }
    }

    #[test]
    fn capacity() {
        assert!(matches!(parity_mixtures(theta(0.5), 11), Err(Error::Capacity { .. })));
        assert!(matches!(joint_usd_bound(theta(0.5), 11), Err(Error::Capacity { .. })));
        assert!(parity_mixtures(theta(0.5), 0).is_err());
    }

    #[test]
    fn helstrom_identity() {
        for k in 1..=8 {
            for t in grid() {
                let d = helstrom_numeric(theta(t), k).unwrap();
                assert!((d - helstrom_guess(theta(t), k)).abs() < 1e-9, "k={k} t={t}");
            }
        }
        let p = parity_mixtures(theta(FRAC_PI_4), 3).unwrap();
        let d = trace_distance(&p.rho_even, &p.rho_odd).unwrap();
        assert!((d - 0.35355).abs() < 5e-6);
    }

    #[test]
    fn helstrom_examples() {
        assert!((helstrom_guess(theta(FRAC_PI_4), 1) - 0.85355).abs() < 5e-6);
        assert!((helstrom_guess(theta(FRAC_PI_4), 2) - 0.75).abs() < 1e-12);
        assert!(helstrom_guess(theta(0.05), 10) - 0.5 < 1e-12);
        assert!(helstrom_guess(theta(FRAC_PI_2 - 1e-9), 1) > 1.0 - 1e-12);
    }

    /// Gram-matrix bound agrees with the density-matrix fidelity route.
    #[test]
    fn bound_matches_density_fidelity() {
        for k in 1..=5 {
            for t in [0.5, FRAC_PI_4, 1.2] {
                let a = joint_usd_bound(theta(t), k).unwrap();
                let b = joint_usd_numeric(theta(t), k).unwrap();
                assert!((a - b).abs() < 1e-6, "k={k} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn single_bit_bound_is_individual_usd() {
        for t in grid() {
            let b = joint_usd_bound(theta(t), 1).unwrap();
            assert!((b - (1.0 - t.cos())).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_values_and_ordering() {
        let expect = [0.29289, 0.29289, 0.11612, 0.11612, 0.04983, 0.04983, 0.02220, 0.02220];
        for (k, e) in (1..=8).zip(expect) {
            let b = joint_usd_bound(theta(FRAC_PI_4), k).unwrap();
            assert!((b - e).abs() < 5e-5, "k={k}: {b}");
        }
        for t in grid() {
            for k in 1..=8 {
                let b = joint_usd_bound(theta(t), k).unwrap();
                assert!(b + 1e-12 >= (1.0 - t.cos()).powi(k as i32));
            }
        }
        for k in 1..=8 {
            assert!(joint_usd_bound(theta(0.2), k).unwrap() <= joint_usd_bound(theta(FRAC_PI_4), k).unwrap());
        }
    }

    #[test]
    fn bound_is_non_increasing_in_k() {
        for t in [0.2, FRAC_PI_4] {
            for k in 1..8 {
                let a = joint_usd_bound(theta(t), k).unwrap();
                let b = joint_usd_bound(theta(t), k + 1).unwrap();
                assert!(b <= a + 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_theta() {
        for k in 1..=6 {
            let mut prev = (0.0, 0.0);
            for t in grid() {
                let cur = (joint_usd_bound(theta(t), k).unwrap(), helstrom_guess(theta(t), k));
                assert!(cur.0 + 1e-12 >= prev.0 && cur.1 + 1e-12 >= prev.1);
                prev = cur;
            }
        }
    }

    #[test]
    fn helstrom_monte_carlo() {
        let r = alice_joint_helstrom(theta(0.9), 3, 400_000, 4, Parallelism::Auto).unwrap();
        assert!(r.within_sigmas(4.0), "{r:?}");
        let table = helstrom_success_table(theta(0.9), 3).unwrap();
        let mean = table.iter().sum::<f64>() / table.len() as f64;
        assert!((mean - helstrom_guess(theta(0.9), 3)).abs() < 1e-9);
    }
}
