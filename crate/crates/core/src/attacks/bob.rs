// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{AttackKind, AttackReport};
use crate::linalg::{attack_state, AttackState, Basis, Theta};
use crate::par::{chunked_trials, Parallelism};
use crate::protocol::{sift, SiftResult};
use crate::rng::RandomStream;

/// The two (state, announced letter) pairs Bob alternates between.
///
/// `|0''>` announced as 1 and `|1''>` announced as 0 make Alice's result
/// conclusive with probability `cos^2(theta/2)`; the swapped announcements
/// make it inconclusive with that probability.
fn strategies(want_conclusive: bool) -> [(AttackState, u8); 2] {
    if want_conclusive {
        [(AttackState::A0PP, 1), (AttackState::A1PP, 0)]
    } else {
        [(AttackState::A0PP, 0), (AttackState::A1PP, 1)]
    }
}

/// Born probability of outcome 1 for each strategy and basis.
fn outcome_one(theta: Theta, want_conclusive: bool) -> [[f64; 2]; 2] {
    strategies(want_conclusive).map(|(state, _)| {
        let psi = attack_state(state, theta);
        Basis::ALL.map(|b| {
            let [_, second] = b.vectors(theta);
            second.inner(&psi).expect("qubit dims").norm_sqr()
        })
    })
}

/// Exact probabilities `[P(conclusive, bit 0), P(conclusive, bit 1)]` with
/// the strategy and Alice's basis each chosen uniformly.
pub fn bob_branch_weights(theta: Theta, want_conclusive: bool) -> [f64; 2] {
    let p1 = outcome_one(theta, want_conclusive);
    let mut w = [0.0; 2];
    for (si, (_, letter)) in strategies(want_conclusive).into_iter().enumerate() {
        for basis in Basis::ALL {
            let p = p1[si][basis.bit() as usize];
            for (outcome, prob) in [(0u8, 1.0 - p), (1u8, p)] {
                if let SiftResult::Conclusive(bit) = sift(basis, outcome, letter) {
                    w[bit as usize] += 0.25 * prob;
                }
            }
        }
    }
    w
}

#[derive(Default, Clone, Copy)]
struct Counts {
    conclusive: u64,
    bit0: u64,
}

/// Alice measures the attack states honestly and sifts against Bob's
/// announcement. Reports the conclusive rate and, among conclusive results,
/// the fraction whose inferred bit is 0.
pub fn bob_conclusiveness_attack(
    theta: Theta,
    want_conclusive: bool,
    trials: u64,
    seed: u64,
    mode: Parallelism,
) -> AttackReport {
    let plan = strategies(want_conclusive);
    let p1 = outcome_one(theta, want_conclusive);
    let counts = chunked_trials(trials, seed, mode, |rng: &mut RandomStream, len| {
        let mut c = Counts::default();
        for _ in 0..len {
            let si = usize::from(rng.random_bool(0.5));
            let basis = Basis::from_bit(u8::from(rng.random_bool(0.5)));
            let outcome = u8::from(rng.random::<f64>() < p1[si][basis.bit() as usize]);
            if let SiftResult::Conclusive(bit) = sift(basis, outcome, plan[si].1) {
                c.conclusive += 1;
                c.bit0 += u64::from(bit == 0);
            }
        }
        c
    });
    let total = counts.iter().fold(Counts::default(), |a, c| Counts {
        conclusive: a.conclusive + c.conclusive,
        bit0: a.bit0 + c.bit0,
    });
    let half = theta.radians() / 2.0;
    let (kind, metric, analytic) = if want_conclusive {
        (AttackKind::BobConclusive, "conclusive_rate", half.cos().powi(2))
    } else {
        (AttackKind::BobInconclusive, "conclusive_rate", half.sin().powi(2))
    };
    let mut report = AttackReport::analytic_only(kind, theta.radians(), 1, metric, analytic);
    let w = bob_branch_weights(theta, want_conclusive);
    report.numeric_check = Some(w[0] + w[1]);
    report.trials = trials;
    report.seed = Some(seed);
    if trials > 0 {
        let t = trials as f64;
        report.estimate = Some(total.conclusive as f64 / t);
        report.sigma = Some((analytic * (1.0 - analytic) / t).sqrt());
    }
    if total.conclusive > 0 {
        let c = total.conclusive as f64;
        report.conditional_bit0 = Some(total.bit0 as f64 / c);
        report.conditional_sigma = Some((0.25 / c).sqrt());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn theta(t: f64) -> Theta {
        Theta::new(t).unwrap()
    }

    #[test]
    fn branch_weights_are_equal_and_sum_to_rate() {
        for i in 1..50 {
            let t = theta(i as f64 * 0.031);
            for want in [true, false] {
                let [w0, w1] = bob_branch_weights(t, want);
                assert!((w0 - w1).abs() < 1e-15);
                let h = t.radians() / 2.0;
                let rate = if want { h.cos().powi(2) } else { h.sin().powi(2) };
                assert!((w0 + w1 - rate).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rates_at_quarter_pi() {
        let r = bob_conclusiveness_attack(theta(FRAC_PI_4), true, 200_000, 3, Parallelism::Auto);
        assert!((r.analytic - 0.85355).abs() < 5e-6);
        assert!(r.within_sigmas(4.0), "{r:?}");
        let c = r.conditional_bit0.unwrap();
        assert!((c - 0.5).abs() < 4.0 * r.conditional_sigma.unwrap());
        let r = bob_conclusiveness_attack(theta(FRAC_PI_4), false, 200_000, 3, Parallelism::Auto);
        assert!((r.analytic - 0.14645).abs() < 5e-6);
        assert!(r.within_sigmas(4.0), "{r:?}");
    }

    #[test]
    fn modes_agree() {
        let a = bob_conclusiveness_attack(theta(0.4), true, 150_000, 8, Parallelism::Sequential);
        let b = bob_conclusiveness_attack(theta(0.4), true, 150_000, 8, Parallelism::Auto);
        assert_eq!(a, b);
    }
}
