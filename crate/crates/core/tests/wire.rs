// SPDX-License-Identifier: Apache-2.0

mod common;

use std::net::{TcpListener, TcpStream};
use std::os::unix::net::UnixStream;
use std::thread;

use qpq::bits::BitString;
use qpq::linalg::Theta;
use qpq::protocol::{Database, Role, SessionConfig};
use qpq::wire::{
    read_frame, run_alice_endpoint, run_alice_endpoint_observed, run_bob_endpoint, run_bob_endpoint_observed,
    write_frame, AliceConfig, ErrorCode, FrameObserver, Message, WireError,
};
use qpq::Error;

use common::{two_process, wire_mismatches};

fn theta(t: f64) -> Theta {
    Theta::new(t).unwrap()
}

#[test]
fn matches_in_process_across_parameters() {
    let cases = [
        (1000, 2, 0.337, 0.0, 7),
        (50, 1, 0.6, 0.5, 3),
        (64, 3, 0.7, 0.2, 11),
        (5000, 1, 0.2, 0.0, 2),
    ];
    for (n, k, t, loss, seed) in cases {
        let cfg = SessionConfig::new(n, k, theta(t), seed).with_loss(loss);
        let db = Database::random(n, seed);
        let bad = wire_mismatches(&cfg, &db, (seed as usize * 13) % n);
        assert!(bad.is_empty(), "N={n} k={k}: {bad:?}");
    }
}

#[test]
fn noisy_channel_matches_too() {
    let cfg = SessionConfig::new(300, 1, theta(0.785), 5).with_noise(0.05);
    let db = Database::random(300, 5);
    assert!(wire_mismatches(&cfg, &db, 17).is_empty());
}

#[test]
fn restarts_match() {
    // p^k is small, so most first attempts leave Alice with nothing.
    let mut restarted = 0;
    for seed in 0..12 {
        let cfg = SessionConfig::new(20, 2, theta(0.5), seed);
        let db = Database::random(20, seed);
        let bad = wire_mismatches(&cfg, &db, 3);
        assert!(bad.is_empty(), "seed {seed}: {bad:?}");
        let (_, alice) = two_process(&cfg, &db, 3);
        restarted += alice.unwrap().report.restarted;
    }
    assert!(restarted > 0);
}

#[test]
fn exhausted_restarts_end_both_sides() {
    let cfg = SessionConfig::new(4, 4, theta(0.3), 1).with_max_restarts(3);
    let db = Database::random(4, 1);
    assert!(wire_mismatches(&cfg, &db, 0).is_empty());
    let (bob, alice) = two_process(&cfg, &db, 0);
    let (bob, alice) = (bob.unwrap(), alice.unwrap());
    assert!(!bob.report.success && !alice.report.success);
    assert_eq!(alice.report.restarted, 3);
    assert!(bob.report.query.is_none());
}

#[test]
fn retrieves_over_tcp() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let cfg = SessionConfig::new(1000, 2, theta(0.337), 7);
    let db = Database::random(1000, 7);
    let (c, d) = (cfg.clone(), db.clone());
    let bob = thread::spawn(move || {
        let (mut conn, _) = listener.accept().unwrap();
        run_bob_endpoint(&c, &d, &mut conn)
    });
    let mut conn = TcpStream::connect(addr).unwrap();
    let alice = run_alice_endpoint(&AliceConfig::from_session(&cfg), 42, &mut conn).unwrap();
    let bob = bob.join().unwrap().unwrap();
    assert_eq!(alice.report.retrieved_bit(), Some(db.bit(42)));
    assert_eq!(bob.report.public_view(), alice.report.public_view());
    assert_eq!(bob.report.retrieved_bit(), None);
}

/// Records the tag of every frame each side sends and checks that payloads
/// never carry more than the protocol allows.
#[derive(Default)]
struct Audit {
    frames: Vec<(Role, Message)>,
}

impl FrameObserver for Audit {
    fn on_send(&mut self, from: Role, msg: &Message) {
        self.frames.push((from, msg.clone()));
    }
}

#[test]
fn frames_leak_nothing_private() {
    let cfg = SessionConfig::new(200, 2, theta(0.6), 21).with_loss(0.3);
    let db = Database::random(200, 21);
    let item = 123;
    let (mut a, mut b) = UnixStream::pair().unwrap();
    let (c, d) = (cfg.clone(), db.clone());
    let bob = thread::spawn(move || {
        let mut audit = Audit::default();
        let s = run_bob_endpoint_observed(&c, &d, &mut b, &mut audit).unwrap();
        (s, audit)
    });
    let mut alice_audit = Audit::default();
    let alice = run_alice_endpoint_observed(&AliceConfig::from_session(&cfg), item, &mut a, &mut alice_audit).unwrap();
    let (bob, bob_audit) = bob.join().unwrap();

    // Bob's frames: no labels or coded bits, only letters and outcomes.
    for (role, m) in &bob_audit.frames {
        assert_eq!(*role, Role::Bob);
        match m {
            Message::Hello { .. } | Message::OutcomeBatch { .. } | Message::Ciphertext { .. } => {}
            Message::Declaration { letters } => assert_eq!(letters.len(), 400),
            other => panic!("Bob sent {}", other.name()),
        }
    }
    // The declaration is exactly the letter sequence, which is independent
    // of the coded bits Bob keeps.
    let coded = &bob.raw_key;
    let letters: Vec<bool> = bob_audit
        .frames
        .iter()
        .find_map(|(_, m)| match m {
            Message::Declaration { letters } => Some(letters.clone()),
            _ => None,
        })
        .unwrap();
    assert_ne!(BitString::from_bits(letters.iter().map(|&b| u8::from(b)).collect()), *coded);

    // Alice's frames: no target index, no mask positions.
    let known = alice.report.known_final_count.unwrap();
    for (role, m) in &alice_audit.frames {
        assert_eq!(*role, Role::Alice);
        match m {
            Message::PhotonBatchReq { .. } | Message::MeasureSubmit { .. } => {}
            Message::SiftAck { conclusive } => assert_eq!(*conclusive, alice.report.conclusive_count),
            Message::Shift { s } => {
                let j = alice.report.query.as_ref().unwrap().known_index.unwrap();
                assert_eq!(*s as usize, (j + 200 - item) % 200);
            }
            other => panic!("Alice sent {}", other.name()),
        }
    }
    assert!(known >= 1);
}

fn expect_error_reply(io: &mut UnixStream) -> u8 {
    match read_frame(io).unwrap() {
        Message::Error { code, .. } => code,
        other => panic!("expected ERROR, got {}", other.name()),
    }
}

#[test]
fn zero_angle_hello_is_rejected() {
    let (mut a, mut b) = UnixStream::pair().unwrap();
    let alice = thread::spawn(move || run_alice_endpoint(&AliceConfig::new(1), 0, &mut a));
    write_frame(
        &mut b,
        &Message::Hello {
            theta: 0.0,
            n_items: 10,
            k: 1,
            loss: 0.0,
        },
    )
    .unwrap();
    assert_eq!(expect_error_reply(&mut b), ErrorCode::InvalidParams as u8);
    assert!(alice.join().unwrap().is_err());
}

#[test]
fn bob_aborts_on_peer_error() {
    let (mut a, mut b) = UnixStream::pair().unwrap();
    let cfg = SessionConfig::new(10, 1, theta(0.5), 1);
    let db = Database::random(10, 1);
    let bob = thread::spawn(move || run_bob_endpoint(&cfg, &db, &mut b));
    assert!(matches!(read_frame(&mut a).unwrap(), Message::Hello { .. }));
    write_frame(&mut a, &Message::error(ErrorCode::InvalidParams, "no")).unwrap();
    let err = bob.join().unwrap().unwrap_err();
    assert!(matches!(err, Error::Wire(WireError::Peer { code: 2, .. })), "{err}");
}

#[test]
fn out_of_order_frame_is_a_phase_error() {
    let (mut a, mut b) = UnixStream::pair().unwrap();
    let cfg = SessionConfig::new(10, 1, theta(0.5), 1);
    let db = Database::random(10, 1);
    let bob = thread::spawn(move || run_bob_endpoint(&cfg, &db, &mut b));
    read_frame(&mut a).unwrap();
    write_frame(&mut a, &Message::Shift { s: 0 }).unwrap();
    assert_eq!(expect_error_reply(&mut a), ErrorCode::Phase as u8);
    assert!(matches!(
        bob.join().unwrap().unwrap_err(),
        Error::Wire(WireError::Phase { expected: "PHOTON_BATCH_REQ", got: "SHIFT" })
    ));

    let (mut a, mut b) = UnixStream::pair().unwrap();
    let alice = thread::spawn(move || run_alice_endpoint(&AliceConfig::new(1), 0, &mut a));
    write_frame(&mut b, &Message::SiftAck { conclusive: 0 }).unwrap();
    assert_eq!(expect_error_reply(&mut b), ErrorCode::Phase as u8);
    assert!(alice.join().unwrap().is_err());
}

#[test]
fn disconnect_is_clean() {
    let (a, mut b) = UnixStream::pair().unwrap();
    drop(a);
    let cfg = SessionConfig::new(10, 1, theta(0.5), 1);
    let err = run_bob_endpoint(&cfg, &Database::random(10, 1), &mut b).unwrap_err();
    assert!(matches!(err, Error::Wire(WireError::Disconnected) | Error::Wire(WireError::Io(_))), "{err}");
}
