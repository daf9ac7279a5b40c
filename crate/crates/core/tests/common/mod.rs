// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::os::unix::net::UnixStream;
use std::thread;

use qpq::protocol::{run_session, Database, SessionConfig, SessionOutcome};
use qpq::wire::{run_alice_endpoint, run_bob_endpoint, AliceConfig, AliceSession, BobSession};
use qpq::Result;

/// Runs Bob and Alice on the two ends of a socket pair.
pub fn two_process(config: &SessionConfig, db: &Database, item: usize) -> (Result<BobSession>, Result<AliceSession>) {
    let (mut a, mut b) = UnixStream::pair().expect("socket pair");
    let (cfg, db) = (config.clone(), db.clone());
    let bob = thread::spawn(move || run_bob_endpoint(&cfg, &db, &mut b));
    let alice = run_alice_endpoint(&AliceConfig::from_session(config), item, &mut a);
    (bob.join().expect("bob thread"), alice)
}

/// Differences between a two-process run and the in-process run of the
/// same configuration; empty when they agree on keys, query and public fields.
pub fn wire_mismatches(config: &SessionConfig, db: &Database, item: usize) -> Vec<String> {
    let reference: SessionOutcome = run_session(config, db, item).expect("in-process session");
    let (bob, alice) = two_process(config, db, item);
    let (bob, alice) = (bob.expect("bob endpoint"), alice.expect("alice endpoint"));
    let kd = &reference.distribution;
    let mut out = Vec::new();
    let mut check = |what: &str, ok: bool| {
        if !ok {
            out.push(what.to_owned());
        }
    };
    check("bob raw key", bob.raw_key == kd.raw.bits);
    check("bob final key", bob.final_key == kd.final_key.bits);
    check("alice raw mask", alice.raw_mask == kd.raw.alice_mask);
    check("alice raw bits", alice.raw_bits == kd.raw.alice_bits);
    check("alice final mask", alice.final_mask == kd.final_key.alice_mask);
    check("alice final bits", alice.final_bits == kd.final_key.alice_bits);
    check("retrieved bit", alice.report.retrieved_bit() == reference.report.retrieved_bit());
    check(
        "known index",
        alice.report.query.as_ref().and_then(|q| q.known_index)
            == reference.report.query.as_ref().and_then(|q| q.known_index),
    );
    check("bob public view", bob.report.public_view() == reference.report.public_view());
    check("alice public view", alice.report.public_view() == reference.report.public_view());
    check(
        "known final count",
        alice.report.known_final_count == reference.report.known_final_count,
    );
    out
}
