// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::config::{SessionConfig, SessionParams};
use super::database::Database;
use super::engine::{run_key_distribution, KeyDistribution};
use super::keys::FinalKey;
use super::query::{estimate_error_rate, oblivious_query, ErrorEstimate, QueryExchange};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::rng::{derive_seed, stream, RandomStream, SeedTriple};

/// Label of Alice's post-distribution stream (j choice, error sampling),
/// derived from her measurement seed.
pub(crate) const QUERY_STREAM: u64 = 0x51_5545_5259;

pub(crate) fn query_stream(seeds: &SeedTriple) -> RandomStream {
    stream(derive_seed(seeds.measurement, QUERY_STREAM))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    InProcess,
    Bob,
    Alice,
}

/// Seeds known to the reporting party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEcho {
    pub source: Option<u64>,
    pub channel: Option<u64>,
    pub measurement: Option<u64>,
}

impl From<SeedTriple> for SeedEcho {
    fn from(s: SeedTriple) -> Self {
        Self {
            source: Some(s.source),
            channel: Some(s.channel),
            measurement: Some(s.measurement),
        }
    }
}

/// Transcript of one session from one party's point of view. Counts refer to
/// the final attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub role: Role,
    pub params: SessionParams,
    pub channel_noise: Option<f64>,
    pub seeds: SeedEcho,
    pub max_restarts: u32,
    pub photons_sent: u64,
    pub photons_received: u64,
    pub conclusive_count: u64,
    /// Alice-known final-key bits; Bob never learns this.
    pub known_final_count: Option<u64>,
    pub restarted: u32,
    pub error_estimate: Option<ErrorEstimate>,
    pub query: Option<QueryExchange>,
    pub success: bool,
    pub failure: Option<String>,
}

impl SessionReport {
    /// Pretty-printed JSON with fields in declaration order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn retrieved_bit(&self) -> Option<u8> {
        self.query.as_ref().and_then(|q| q.retrieved_bit)
    }

    /// Fields visible to both parties: parameters, counts that cross the
    /// wire, the shift and the ciphertext.
    pub fn public_view(&self) -> PublicView {
        PublicView {
            params: self.params,
            photons_sent: self.photons_sent,
            photons_received: self.photons_received,
            conclusive_count: self.conclusive_count,
            restarted: self.restarted,
            shift: self.query.as_ref().map(|q| q.shift),
            ciphertext: self.query.as_ref().map(|q| q.ciphertext.to_string()),
            success: self.success,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicView {
    pub params: SessionParams,
    pub photons_sent: u64,
    pub photons_received: u64,
    pub conclusive_count: u64,
    pub restarted: u32,
    pub shift: Option<usize>,
    pub ciphertext: Option<String>,
    pub success: bool,
}

impl KeyDistribution {
    pub fn report(&self, config: &SessionConfig) -> SessionReport {
        SessionReport {
            role: Role::InProcess,
            params: config.params,
            channel_noise: Some(config.noise),
            seeds: config.seeds.into(),
            max_restarts: config.max_restarts,
            photons_sent: self.photons_sent,
            photons_received: self.photons_received,
            conclusive_count: self.conclusive_count,
            known_final_count: Some(self.final_key.known_count() as u64),
            restarted: self.restarted,
            error_estimate: None,
            query: None,
            success: self.success,
            failure: (!self.success).then(|| "no known final-key bit after all restarts".to_owned()),
        }
    }
}

/// A complete in-process session: report plus the keys behind it.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub report: SessionReport,
    pub distribution: KeyDistribution,
    /// Final key after any error-estimation consumption.
    pub final_key: FinalKey,
}

/// Runs key distribution, the optional error-rate check, and the query for
/// item `target_index`.
pub fn run_session(config: &SessionConfig, database: &Database, target_index: usize) -> Result<SessionOutcome> {
    config.validate()?;
    let n = config.params.n_items;
    if database.len() != n {
        return Err(Error::Domain(format!("database has {} items, expected {n}", database.len())));
    }
    if target_index >= n {
        return Err(Error::Domain(format!("item {target_index} out of range for N = {n}")));
    }
    let kd = run_key_distribution(config)?;
    let mut report = kd.report(config);
    let mut final_key = kd.final_key.clone();
    if !kd.success {
        return Ok(SessionOutcome {
            report,
            distribution: kd,
            final_key,
        });
    }

    let mut rng = query_stream(&kd.seeds_used);
    if let Some(fraction) = config.error_sample {
        let bob = kd.final_key.clone();
        match estimate_error_rate(&mut final_key, &bob, fraction, &mut rng) {
            Ok(est) => {
                let rate = est.rate;
                report.error_estimate = Some(est);
                if let Some(rate) = rate.filter(|&r| r > config.error_threshold) {
                    report.success = false;
                    report.failure = Some(
                        Error::ErrorRateTooHigh {
                            rate,
                            threshold: config.error_threshold,
                        }
                        .to_string(),
                    );
                    return Ok(SessionOutcome {
                        report,
                        distribution: kd,
                        final_key,
                    });
                }
            }
            Err(Error::InsufficientKey { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    report.query = Some(oblivious_query(&final_key, database, target_index, &mut rng)?);
    Ok(SessionOutcome {
        report,
        distribution: kd,
        final_key,
    })
}

/// Runs independent sessions, in parallel when enabled. Results keep input order.
pub fn run_sessions(
    jobs: &[(SessionConfig, Database, usize)],
    mode: Parallelism,
) -> Vec<Result<SessionOutcome>> {
    par::map(jobs, mode, |(cfg, db, i)| run_session(cfg, db, *i))
}
