// SPDX-License-Identifier: Apache-2.0

//! Alice's and Bob's session state machines.
//!
//! Phase order: HELLO, then (PHOTON_BATCH_REQ, MEASURE_SUBMIT, OUTCOME_BATCH)
//! until the raw key is complete, DECLARATION, SIFT_ACK, then either SHIFT
//! and CIPHERTEXT or, if Alice knows no final-key bit, a fresh
//! PHOTON_BATCH_REQ that restarts distribution with the next attempt's seeds.
//! Step 3's loss announcement is implicit: Bob simulates the channel, so the
//! arrival flags already travel inside OUTCOME_BATCH.

use std::io::{Read, Write};

use super::frame::{read_frame, write_frame, ErrorCode, Message, WireError};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{Basis, Theta};
use crate::protocol::{
    alice_choose_bases, bob_prepare, choose_known_index, encrypt_database, shift_for, sift, xor_compress,
    Database, FinalKey, QuantumChannel, QueryExchange, RawKey, Role, SeedEcho, SessionConfig, SessionParams,
    SessionReport, PHOTON_CAP,
};
use crate::rng::{derive_seed, stream, SeedTriple};

/// Photons Alice requests per batch.
pub const WIRE_BATCH: u32 = 4096;

/// Largest batch Bob accepts in one request.
const MAX_BATCH: u32 = 1 << 20;

/// Sees every frame an endpoint sends, before it is written.
pub trait FrameObserver {
    fn on_send(&mut self, from: Role, msg: &Message);
}

pub struct NoAudit;

impl FrameObserver for NoAudit {
    fn on_send(&mut self, _: Role, _: &Message) {}
}

struct Link<'a, S> {
    role: Role,
    stream: &'a mut S,
    observer: &'a mut dyn FrameObserver,
}

impl<S: Read + Write> Link<'_, S> {
    fn send(&mut self, msg: &Message) -> Result<()> {
        self.observer.on_send(self.role, msg);
        write_frame(self.stream, msg)?;
        Ok(())
    }

    /// Reads the next frame, turning a peer ERROR into `WireError::Peer` and
    /// answering undecodable frames with a decode error.
    fn recv(&mut self) -> Result<Message> {
        match read_frame(self.stream) {
            Ok(Message::Error { code, message }) => Err(WireError::Peer { code, message }.into()),
            Ok(m) => Ok(m),
            Err(e @ (WireError::Malformed { .. } | WireError::UnknownType(_) | WireError::Oversize(_))) => {
                let _ = self.send(&Message::error(ErrorCode::Decode, e.to_string()));
                Err(e.into())
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Reports a phase violation to the peer and returns it as an error.
    fn phase(&mut self, expected: &'static str, got: &Message) -> Error {
        let e = WireError::Phase {
            expected,
            got: got.name(),
        };
        let _ = self.send(&Message::error(ErrorCode::Phase, e.to_string()));
        e.into()
    }

    fn abort(&mut self, code: ErrorCode, err: Error) -> Error {
        let _ = self.send(&Message::error(code, err.to_string()));
        err
    }
}

/// Bob's side of a finished session.
#[derive(Debug, Clone)]
pub struct BobSession {
    pub report: SessionReport,
    /// Bob's raw key of the final attempt.
    pub raw_key: BitString,
    /// Bob's full final key.
    pub final_key: BitString,
}

/// Alice's side of a finished session. Alice never sees Bob's key bits, only
/// her own mask and inferred values.
#[derive(Debug, Clone)]
pub struct AliceSession {
    pub report: SessionReport,
    pub raw_mask: Vec<bool>,
    pub raw_bits: BitString,
    pub final_mask: Vec<bool>,
    pub final_bits: BitString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceConfig {
    /// Seed of Alice's measurement stream before restart derivation.
    pub measurement_seed: u64,
    pub max_restarts: u32,
    pub batch: u32,
}

impl AliceConfig {
    pub fn new(measurement_seed: u64) -> Self {
        Self {
            measurement_seed,
            max_restarts: 20,
            batch: WIRE_BATCH,
        }
    }

    /// Alice's half of an in-process configuration.
    pub fn from_session(config: &SessionConfig) -> Self {
        Self {
            measurement_seed: config.seeds.measurement,
            max_restarts: config.max_restarts,
            batch: WIRE_BATCH,
        }
    }
}

pub fn run_bob_endpoint<S: Read + Write>(config: &SessionConfig, database: &Database, io: &mut S) -> Result<BobSession> {
    run_bob_endpoint_observed(config, database, io, &mut NoAudit)
}

pub fn run_bob_endpoint_observed<S: Read + Write>(
    config: &SessionConfig,
    database: &Database,
    io: &mut S,
    observer: &mut dyn FrameObserver,
) -> Result<BobSession> {
    config.validate()?;
    let params = config.params;
    let n = params.n_items;
    if database.len() != n {
        return Err(Error::Domain(format!("database has {} items, expected {n}", database.len())));
    }
    let mut link = Link {
        role: Role::Bob,
        stream: io,
        observer,
    };
    link.send(&Message::Hello {
        theta: params.theta.radians(),
        n_items: n as u32,
        k: params.k as u32,
        loss: params.loss,
    })?;

    let target = params.raw_len();
    let mut report = SessionReport {
        role: Role::Bob,
        params,
        channel_noise: Some(config.noise),
        seeds: SeedEcho {
            source: Some(config.seeds.source),
            channel: Some(config.seeds.channel),
            measurement: None,
        },
        max_restarts: config.max_restarts,
        photons_sent: 0,
        photons_received: 0,
        conclusive_count: 0,
        known_final_count: None,
        restarted: 0,
        error_estimate: None,
        query: None,
        success: false,
        failure: None,
    };
    let mut pending = None;
    let mut attempt = 0u32;
    loop {
        let seeds = config.seeds.for_attempt(attempt);
        let mut source = stream(seeds.source);
        let mut channel = QuantumChannel::new(params.theta, params.loss, config.noise, seeds.channel);
        let mut bits = Vec::with_capacity(target);
        let mut sent = 0u64;

        while bits.len() < target {
            let count = match pending.take().map_or_else(|| link.recv(), Ok)? {
                Message::PhotonBatchReq { count } if (1..=MAX_BATCH).contains(&count) => count as usize,
                Message::PhotonBatchReq { .. } => {
                    let e = Error::Domain(format!("batch size outside 1..={MAX_BATCH}"));
                    return Err(link.abort(ErrorCode::InvalidParams, e));
                }
                other => return Err(link.phase("PHOTON_BATCH_REQ", &other)),
            };
            let labels = bob_prepare(count, &mut source);
            let bases = match link.recv()? {
                Message::MeasureSubmit { bases } if bases.len() == count => bases,
                Message::MeasureSubmit { .. } => {
                    let e = Error::Domain("basis count differs from the requested batch".into());
                    return Err(link.abort(ErrorCode::InvalidParams, e));
                }
                other => return Err(link.phase("MEASURE_SUBMIT", &other)),
            };
            let mut received = Vec::with_capacity(count);
            let mut outcomes = Vec::with_capacity(count);
            for (label, primed) in labels.into_iter().zip(bases) {
                if bits.len() == target {
                    break;
                }
                if sent >= PHOTON_CAP {
                    return Err(link.abort(ErrorCode::Internal, Error::PhotonBudget(PHOTON_CAP)));
                }
                sent += 1;
                match channel.propagate(label, Basis::from_bit(u8::from(primed))) {
                    Some(outcome) => {
                        received.push(true);
                        outcomes.push(outcome == 1);
                        bits.push(label);
                    }
                    None => {
                        received.push(false);
                        outcomes.push(false);
                    }
                }
            }
            link.send(&Message::OutcomeBatch { received, outcomes })?;
        }

        link.send(&Message::Declaration {
            letters: bits.iter().map(|l| l.declaration_letter() == 1).collect(),
        })?;
        let conclusive = match link.recv()? {
            Message::SiftAck { conclusive } => conclusive,
            other => return Err(link.phase("SIFT_ACK", &other)),
        };
        let raw = RawKey {
            bits: BitString::from_bits(bits.iter().map(|l| l.coded_bit()).collect()),
            alice_mask: vec![false; target],
            alice_bits: BitString::zeros(target),
        };
        let final_key = xor_compress(&raw, params.k, n)?;
        report.photons_sent = sent;
        report.photons_received = target as u64;
        report.conclusive_count = conclusive;
        report.restarted = attempt;

        match link.recv() {
            Ok(Message::Shift { s }) if (s as usize) < n => {
                let s = s as usize;
                let ciphertext = encrypt_database(&final_key.bits, database, s)?;
                link.send(&Message::Ciphertext {
                    bits: ciphertext.iter().map(|b| b == 1).collect(),
                })?;
                report.query = Some(QueryExchange {
                    target_index: None,
                    known_index: None,
                    shift: s,
                    ciphertext,
                    retrieved_bit: None,
                });
                report.success = true;
                return Ok(BobSession {
                    report,
                    raw_key: raw.bits,
                    final_key: final_key.bits,
                });
            }
            Ok(Message::Shift { .. }) => {
                let e = Error::Domain(format!("shift outside 0..{n}"));
                return Err(link.abort(ErrorCode::InvalidParams, e));
            }
            Ok(m @ Message::PhotonBatchReq { .. }) if attempt < config.max_restarts => {
                pending = Some(m);
                attempt += 1;
            }
            Ok(other) => return Err(link.phase("SHIFT", &other)),
            Err(Error::Wire(WireError::Peer { code, message })) if code == ErrorCode::RestartsExhausted as u8 => {
                report.failure = Some(message);
                return Ok(BobSession {
                    report,
                    raw_key: raw.bits,
                    final_key: final_key.bits,
                });
            }
            Err(e) => return Err(e),
        }
    }
}

fn hello_params(msg: Message) -> std::result::Result<SessionParams, (ErrorCode, Error)> {
    let Message::Hello { theta, n_items, k, loss } = msg else {
        return Err((
            ErrorCode::Phase,
            WireError::Phase {
                expected: "HELLO",
                got: msg.name(),
            }
            .into(),
        ));
    };
    let invalid = |e: Error| (ErrorCode::InvalidParams, e);
    let params = SessionParams {
        n_items: n_items as usize,
        k: k as usize,
        theta: Theta::new(theta).map_err(invalid)?,
        loss,
    };
    params.validate().map_err(invalid)?;
    Ok(params)
}

pub fn run_alice_endpoint<S: Read + Write>(config: &AliceConfig, target_index: usize, io: &mut S) -> Result<AliceSession> {
    run_alice_endpoint_observed(config, target_index, io, &mut NoAudit)
}

pub fn run_alice_endpoint_observed<S: Read + Write>(
    config: &AliceConfig,
    target_index: usize,
    io: &mut S,
    observer: &mut dyn FrameObserver,
) -> Result<AliceSession> {
    let mut link = Link {
        role: Role::Alice,
        stream: io,
        observer,
    };
    let params = match hello_params(link.recv()?) {
        Ok(p) => p,
        Err((code, e)) => return Err(link.abort(code, e)),
    };
    let n = params.n_items;
    if target_index >= n {
        let e = Error::Domain(format!("item {target_index} out of range for N = {n}"));
        return Err(link.abort(ErrorCode::InvalidParams, e));
    }
    if config.batch == 0 || config.batch > MAX_BATCH {
        let e = Error::Domain(format!("batch size outside 1..={MAX_BATCH}"));
        return Err(link.abort(ErrorCode::InvalidParams, e));
    }
    let target = params.raw_len();
    let base = SeedTriple {
        source: 0,
        channel: 0,
        measurement: config.measurement_seed,
    };
    let mut report = SessionReport {
        role: Role::Alice,
        params,
        channel_noise: None,
        seeds: SeedEcho {
            source: None,
            channel: None,
            measurement: Some(config.measurement_seed),
        },
        max_restarts: config.max_restarts,
        photons_sent: 0,
        photons_received: 0,
        conclusive_count: 0,
        known_final_count: None,
        restarted: 0,
        error_estimate: None,
        query: None,
        success: false,
        failure: None,
    };

    let mut attempt = 0u32;
    loop {
        let measurement = base.for_attempt(attempt).measurement;
        let mut rng = stream(measurement);
        let mut kept_bases = Vec::with_capacity(target);
        let mut kept_outcomes = Vec::with_capacity(target);
        let mut sent = 0u64;
        while kept_bases.len() < target {
            link.send(&Message::PhotonBatchReq { count: config.batch })?;
            let bases = alice_choose_bases(config.batch as usize, &mut rng);
            link.send(&Message::MeasureSubmit {
                bases: bases.iter().map(|&b| b == Basis::BP).collect(),
            })?;
            let (received, outcomes) = match link.recv()? {
                Message::OutcomeBatch { received, outcomes } if received.len() <= bases.len() => (received, outcomes),
                Message::OutcomeBatch { .. } => {
                    let e = Error::Domain("outcome batch longer than the request".into());
                    return Err(link.abort(ErrorCode::InvalidParams, e));
                }
                other => return Err(link.phase("OUTCOME_BATCH", &other)),
            };
            let short = received.len() < bases.len();
            sent += received.len() as u64;
            for ((arrived, outcome), basis) in received.into_iter().zip(outcomes).zip(bases) {
                if arrived {
                    kept_bases.push(basis);
                    kept_outcomes.push(u8::from(outcome));
                }
            }
            if kept_bases.len() > target || (short && kept_bases.len() < target) {
                let e = Error::Domain("outcome batches do not complete the raw key".into());
                return Err(link.abort(ErrorCode::InvalidParams, e));
            }
        }

        let letters = match link.recv()? {
            Message::Declaration { letters } if letters.len() == target => letters,
            Message::Declaration { .. } => {
                let e = Error::Domain("declaration count differs from the raw key length".into());
                return Err(link.abort(ErrorCode::InvalidParams, e));
            }
            other => return Err(link.phase("DECLARATION", &other)),
        };
        let results: Vec<_> = kept_bases
            .iter()
            .zip(&kept_outcomes)
            .zip(&letters)
            .map(|((&b, &o), &d)| sift(b, o, u8::from(d)))
            .collect();
        let conclusive = results.iter().filter(|r| r.is_conclusive()).count() as u64;
        link.send(&Message::SiftAck { conclusive })?;

        let raw = RawKey {
            bits: BitString::zeros(target),
            alice_mask: results.iter().map(|r| r.is_conclusive()).collect(),
            alice_bits: BitString::from_bits(results.iter().map(|r| r.bit().unwrap_or(0)).collect()),
        };
        let final_key: FinalKey = xor_compress(&raw, params.k, n)?;
        report.photons_sent = sent;
        report.photons_received = target as u64;
        report.conclusive_count = conclusive;
        report.known_final_count = Some(final_key.known_count() as u64);
        report.restarted = attempt;
        let session = |report| AliceSession {
            report,
            raw_mask: raw.alice_mask.clone(),
            raw_bits: raw.alice_bits.clone(),
            final_mask: final_key.alice_mask.clone(),
            final_bits: final_key.alice_bits.clone(),
        };

        if final_key.known_count() == 0 {
            if attempt >= config.max_restarts {
                let msg = "no known final-key bit after all restarts".to_owned();
                link.send(&Message::error(ErrorCode::RestartsExhausted, msg.clone()))?;
                report.failure = Some(msg);
                return Ok(session(report));
            }
            attempt += 1;
            continue;
        }

        let mut qrng = stream(derive_seed(measurement, crate::protocol::QUERY_STREAM));
        let j = choose_known_index(&final_key, &mut qrng)?;
        let s = shift_for(j, target_index, n);
        link.send(&Message::Shift { s: s as u32 })?;
        let ciphertext = match link.recv()? {
            Message::Ciphertext { bits } if bits.len() == n => BitString::from_bits(bits.into_iter().map(u8::from).collect()),
            Message::Ciphertext { .. } => {
                let e = Error::Domain("ciphertext length differs from N".into());
                return Err(link.abort(ErrorCode::InvalidParams, e));
            }
            other => return Err(link.phase("CIPHERTEXT", &other)),
        };
        let retrieved = ciphertext[target_index] ^ final_key.alice_bits[j];
        report.query = Some(QueryExchange {
            target_index: Some(target_index),
            known_index: Some(j),
            shift: s,
            ciphertext,
            retrieved_bit: Some(retrieved),
        });
        report.success = true;
        return Ok(session(report));
    }
}
