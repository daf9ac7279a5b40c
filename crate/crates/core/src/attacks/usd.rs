// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use rand::Rng;

use super::{AttackKind, AttackReport};
use crate::error::{Error, Result};
use crate::linalg::{carrier_state, max_entry_norm, Basis, CarrierLabel, CarrierSet, Complex64, StateVector, Theta};
use crate::par::{chunked_trials, Parallelism};
use crate::planner::conclusive_probability;
use crate::protocol::sift;
use crate::rng::RandomStream;

/// Optimal equal-prior unambiguous discrimination of `|0>` and `|0'>`.
///
/// `e0 = |1'><1'| / (1 + cos)` fires only on `|0>`, `e1 = |1><1| / (1 + cos)`
/// only on `|0'>`; each succeeds with probability `1 - cos(theta)`.
#[derive(Debug, Clone)]
pub struct UsdPovm {
    pub e0: DMatrix<Complex64>,
    pub e1: DMatrix<Complex64>,
    pub e_fail: DMatrix<Complex64>,
    detectors: [StateVector; 2],
    weight: f64,
}

pub fn usd_povm(theta: Theta) -> UsdPovm {
    let weight = 1.0 / (1.0 + theta.radians().cos());
    let d0 = carrier_state(CarrierLabel::K1P, theta);
    let d1 = carrier_state(CarrierLabel::K1, theta);
    let e0 = d0.to_density().entries() * Complex64::new(weight, 0.0);
    let e1 = d1.to_density().entries() * Complex64::new(weight, 0.0);
    let e_fail = DMatrix::<Complex64>::identity(2, 2) - &e0 - &e1;
    UsdPovm {
        e0,
        e1,
        e_fail,
        detectors: [d0, d1],
        weight,
    }
}

impl UsdPovm {
    /// `[P(identify |0>), P(identify |0'>), P(fail)]` for input `psi`,
    /// evaluated through the rank-one form so that exact orthogonality
    /// gives exactly zero.
    pub fn outcome_probabilities(&self, psi: &StateVector) -> Result<[f64; 3]> {
        let p0 = self.weight * self.detectors[0].inner(psi)?.norm_sqr();
        let p1 = self.weight * self.detectors[1].inner(psi)?.norm_sqr();
        Ok([p0, p1, (1.0 - p0 - p1).max(0.0)])
    }

    /// Largest deviation of `e0 + e1 + e_fail` from the identity.
    pub fn completeness_error(&self) -> f64 {
        max_entry_norm(&(&self.e0 + &self.e1 + &self.e_fail - DMatrix::<Complex64>::identity(2, 2)))
    }
}

fn check_counts(n_items: usize, k: usize) -> Result<()> {
    if n_items == 0 || k == 0 {
        return Err(Error::Domain("N and k must be at least 1".into()));
    }
    Ok(())
}

/// Tallies of final bits (`k` raw bits each) fully read by Alice.
#[derive(Default, Clone, Copy)]
struct Tally {
    finals: u64,
    successes: u64,
    wrong: u64,
}

#[allow(clippy::too_many_arguments)]
fn tally_report(
    kind: AttackKind,
    theta: Theta,
    k: usize,
    n_items: usize,
    per_bit: f64,
    raw_trials: u64,
    seed: u64,
    tallies: Vec<Tally>,
) -> AttackReport {
    let total = tallies.iter().fold(Tally::default(), |a, t| Tally {
        finals: a.finals + t.finals,
        successes: a.successes + t.successes,
        wrong: a.wrong + t.wrong,
    });
    let q = per_bit.powi(k as i32);
    let n = n_items as f64;
    let (estimate, sigma) = if total.finals > 0 {
        let f = total.finals as f64;
        (
            Some(n * total.successes as f64 / f),
            Some(n * (q * (1.0 - q) / f).sqrt()),
        )
    } else {
        (None, None)
    };
    AttackReport {
        n_items: Some(n_items),
        estimate,
        sigma,
        trials: raw_trials,
        seed: Some(seed),
        wrong_identifications: Some(total.wrong),
        ..AttackReport::analytic_only(kind, theta.radians(), k, "expected_known_bits", n * q)
    }
}

/// Alice reads each raw bit with the USD measurement. `raw_trials` raw bits
/// are grouped into `raw_trials / k` final bits.
pub fn alice_individual_usd(
    n_items: usize,
    theta: Theta,
    k: usize,
    raw_trials: u64,
    seed: u64,
    mode: Parallelism,
) -> Result<AttackReport> {
    check_counts(n_items, k)?;
    let povm = usd_povm(theta);
    let inputs = [carrier_state(CarrierLabel::K0, theta), carrier_state(CarrierLabel::K0P, theta)];
    let probs = [povm.outcome_probabilities(&inputs[0])?, povm.outcome_probabilities(&inputs[1])?];
    let finals = raw_trials / k as u64;
    let tallies = chunked_trials(finals, seed, mode, |rng: &mut RandomStream, len| {
        let mut t = Tally::default();
        for _ in 0..len {
            let mut all = true;
            for _ in 0..k {
                let sent = usize::from(rng.random_bool(0.5));
                let [p0, p1, _] = probs[sent];
                let u = rng.random::<f64>();
                let identified = if u < p0 {
                    Some(0)
                } else if u < p0 + p1 {
                    Some(1)
                } else {
                    None
                };
                match identified {
                    Some(id) if id != sent => {
                        t.wrong += 1;
                        all = false;
                    }
                    Some(_) => {}
                    None => all = false,
                }
            }
            t.finals += 1;
            t.successes += u64::from(all);
        }
        t
    });
    let per_bit = 1.0 - theta.radians().cos();
    Ok(tally_report(AttackKind::IndividualUsd, theta, k, n_items, per_bit, raw_trials, seed, tallies))
}

/// Honest baseline: random-basis measurement plus sifting.
pub fn alice_honest(
    n_items: usize,
    theta: Theta,
    k: usize,
    raw_trials: u64,
    seed: u64,
    mode: Parallelism,
) -> Result<AttackReport> {
    check_counts(n_items, k)?;
    let carriers = CarrierSet::new(theta);
    let finals = raw_trials / k as u64;
    let tallies = chunked_trials(finals, seed, mode, |rng: &mut RandomStream, len| {
        let mut t = Tally::default();
        for _ in 0..len {
            let mut all = true;
            for _ in 0..k {
                let label = CarrierLabel::ALL[rng.random_range(0..4usize)];
                let basis = if rng.random_bool(0.5) { Basis::BP } else { Basis::B };
                let outcome = carriers.measure(label, basis, rng);
                match sift(basis, outcome, label.declaration_letter()).bit() {
                    Some(b) if b != label.coded_bit() => {
                        t.wrong += 1;
                        all = false;
                    }
                    Some(_) => {}
                    None => all = false,
                }
            }
            t.finals += 1;
            t.successes += u64::from(all);
        }
        t
    });
    let per_bit = conclusive_probability(theta);
    Ok(tally_report(AttackKind::Honest, theta, k, n_items, per_bit, raw_trials, seed, tallies))
}
