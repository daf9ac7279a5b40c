// SPDX-License-Identifier: Apache-2.0

//! Two-process mode: a length-prefixed frame protocol between Alice's and
//! Bob's endpoints over any reliable ordered byte stream.
//!
//! The quantum channel lives on Bob's side. Alice submits her basis choices
//! and Bob's channel simulator returns the loss flags and Born outcomes, so
//! the wire mode reproduces the in-process statistics exactly but is not a
//! security boundary.

mod endpoint;
mod frame;

pub use endpoint::{
    run_alice_endpoint, run_alice_endpoint_observed, run_bob_endpoint, run_bob_endpoint_observed, AliceConfig,
    AliceSession, BobSession, FrameObserver, NoAudit, WIRE_BATCH,
};
pub use frame::{
    decode_frame, encode_frame, read_frame, write_frame, ErrorCode, Message, WireError, MAX_FRAME_LEN,
};
