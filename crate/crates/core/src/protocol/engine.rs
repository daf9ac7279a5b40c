// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{SessionConfig, PHOTON_CAP};
use super::keys::{xor_compress, FinalKey, RawKey};
use super::sift::{sift, SiftResult};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{Basis, CarrierLabel, CarrierSet, Theta};
use crate::rng::{stream, RandomStream, SeedTriple};

/// Everything that happened to one photon. Fields after `received` are
/// `None` for lost photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub index: u64,
    pub label: CarrierLabel,
    pub received: bool,
    pub basis: Basis,
    pub outcome: Option<u8>,
    pub declaration: Option<u8>,
    pub sift: Option<SiftResult>,
}

/// Bob's source: i.i.d. uniform carrier labels.
pub fn bob_prepare(count: usize, rng: &mut RandomStream) -> Vec<CarrierLabel> {
    (0..count)
        .map(|_| CarrierLabel::ALL[rng.random_range(0..4usize)])
        .collect()
}

/// Alice's uniformly random basis choices.
pub fn alice_choose_bases(count: usize, rng: &mut RandomStream) -> Vec<Basis> {
    (0..count)
        .map(|_| if rng.random_bool(0.5) { Basis::BP } else { Basis::B })
        .collect()
}

fn survives(loss: f64, rng: &mut RandomStream) -> bool {
    rng.random::<f64>() >= loss
}

/// Independent loss with probability `loss` per photon. Returns received flags.
pub fn channel_transmit(labels: &[CarrierLabel], loss: f64, rng: &mut RandomStream) -> Vec<bool> {
    labels.iter().map(|_| survives(loss, rng)).collect()
}

/// The simulated quantum channel plus Alice's detector. Draws, in order per
/// photon: the loss decision, then (if received) the Born outcome, then (if
/// noise is enabled) the flip decision. Results are therefore independent of
/// how photons are grouped into batches.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    carriers: CarrierSet,
    loss: f64,
    noise: f64,
    rng: RandomStream,
}

impl QuantumChannel {
    pub fn new(theta: Theta, loss: f64, noise: f64, seed: u64) -> Self {
        Self {
            carriers: CarrierSet::new(theta),
            loss,
            noise,
            rng: stream(seed),
        }
    }

    /// `None` if the photon is lost, otherwise Alice's outcome.
    pub fn propagate(&mut self, label: CarrierLabel, basis: Basis) -> Option<u8> {
        if !survives(self.loss, &mut self.rng) {
            return None;
        }
        let mut outcome = self.carriers.measure(label, basis, &mut self.rng);
        if self.noise > 0.0 && self.rng.random_bool(self.noise) {
            outcome ^= 1;
        }
        Some(outcome)
    }
}

/// Result of key distribution, including any restarts.
#[derive(Debug, Clone)]
pub struct KeyDistribution {
    /// Records of the final attempt, up to and including the last retained photon.
    pub records: Vec<PhotonRecord>,
    pub raw: RawKey,
    pub final_key: FinalKey,
    pub photons_sent: u64,
    pub photons_received: u64,
    pub conclusive_count: u64,
    /// Number of restarts performed.
    pub restarted: u32,
    /// Whether Alice ended with at least one known final-key bit.
    pub success: bool,
    /// Seeds of the attempt that produced the keys.
    pub seeds_used: SeedTriple,
}

struct Attempt {
    records: Vec<PhotonRecord>,
    raw: RawKey,
    photons_sent: u64,
    conclusive: u64,
}

fn distribute_once(config: &SessionConfig, seeds: SeedTriple) -> Result<Attempt> {
    let params = &config.params;
    let target = params.raw_len();
    let batch = config.batch();
    let mut source = stream(seeds.source);
    let mut alice = stream(seeds.measurement);
    let mut channel = QuantumChannel::new(params.theta, params.loss, config.noise, seeds.channel);

    let mut records = Vec::with_capacity(target);
    let mut bits = Vec::with_capacity(target);
    let mut alice_mask = Vec::with_capacity(target);
    let mut alice_bits = Vec::with_capacity(target);
    let mut sent = 0u64;
    let mut conclusive = 0u64;

    'rounds: loop {
        let labels = bob_prepare(batch, &mut source);
        let bases = alice_choose_bases(batch, &mut alice);
        for (label, basis) in labels.into_iter().zip(bases) {
            if sent >= PHOTON_CAP {
                return Err(Error::PhotonBudget(PHOTON_CAP));
            }
            let index = sent;
            sent += 1;
            let Some(outcome) = channel.propagate(label, basis) else {
                records.push(PhotonRecord {
                    index,
                    label,
                    received: false,
                    basis,
                    outcome: None,
                    declaration: None,
                    sift: None,
                });
                continue;
            };
            let declaration = label.declaration_letter();
            let result = sift(basis, outcome, declaration);
            bits.push(label.coded_bit());
            alice_mask.push(result.is_conclusive());
            alice_bits.push(result.bit().unwrap_or(0));
            conclusive += u64::from(result.is_conclusive());
            records.push(PhotonRecord {
                index,
                label,
                received: true,
                basis,
                outcome: Some(outcome),
                declaration: Some(declaration),
                sift: Some(result),
            });
            if bits.len() == target {
                break 'rounds;
            }
        }
    }

    Ok(Attempt {
        records,
        raw: RawKey {
            bits: BitString::from_bits(bits),
            alice_mask,
            alice_bits: BitString::from_bits(alice_bits),
        },
        photons_sent: sent,
        conclusive,
    })
}

/// Runs preparation through XOR compression, restarting with fresh derived
/// seeds while Alice knows no final-key bit, up to `max_restarts` times.
pub fn run_key_distribution(config: &SessionConfig) -> Result<KeyDistribution> {
    config.validate()?;
    let params = &config.params;
    let mut attempt = 0;
    loop {
        let seeds = config.seeds.for_attempt(attempt);
        let a = distribute_once(config, seeds)?;
        let final_key = xor_compress(&a.raw, params.k, params.n_items)?;
        let success = final_key.known_count() > 0;
        if success || attempt >= config.max_restarts {
            return Ok(KeyDistribution {
                records: a.records,
                photons_received: a.raw.len() as u64,
                raw: a.raw,
                final_key,
                photons_sent: a.photons_sent,
                conclusive_count: a.conclusive,
                restarted: attempt,
                success,
                seeds_used: seeds,
            });
        }
        attempt += 1;
    }
}
