// SPDX-License-Identifier: Apache-2.0

//! The honest two-party protocol: photon preparation, lossy transmission,
//! random-basis measurement, letter declaration, sifting, XOR compression of
//! the raw key, and the shifted one-time-pad query.

mod config;
mod database;
mod engine;
mod keys;
mod query;
mod report;
mod sift;

pub use config::{SessionConfig, SessionParams, PHOTON_CAP};
pub use database::Database;
pub use engine::{
    alice_choose_bases, bob_prepare, channel_transmit, run_key_distribution, KeyDistribution,
    PhotonRecord, QuantumChannel,
};
pub use keys::{xor_compress, FinalKey, RawKey};
pub use query::{
    choose_known_index, encrypt_database, estimate_error_rate, oblivious_query, shift_for,
    ErrorEstimate, QueryExchange,
};
pub(crate) use report::QUERY_STREAM;
pub use report::{run_session, run_sessions, PublicView, Role, SeedEcho, SessionOutcome, SessionReport};
pub use sift::{sift, SiftResult};
