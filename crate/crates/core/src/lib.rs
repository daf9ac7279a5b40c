// SPDX-License-Identifier: Apache-2.0

//! Simulator and analysis toolkit for a QKD-based quantum private query
//! protocol with a tunable carrier angle.
//!
//! Bob (the database owner) sends qubits from the four states `|0>`, `|1>`,
//! `|0'>`, `|1'>` with `<0|0'> = cos(theta)`. Alice (the user) measures in a
//! random basis and, after Bob names the letter of each photon, learns the
//! coded bit with probability `sin^2(theta) / 2`. XOR compression of `k`
//! raw substrings leaves her a few known positions of an `N`-bit key, which
//! she uses to query one database item through a shifted one-time pad.
//!
//! * [`linalg`] exact qubit states and distance measures
//! * [`protocol`] the honest session engine
//! * [`planner`] closed-form parameter planning and table regeneration
//! * [`attacks`] dishonest-party models
//! * [`wire`] the two-process frame protocol
//! * [`cli`] the `qpq` command

pub mod attacks;
pub mod bits;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod par;
pub mod planner;
pub mod protocol;
pub mod rng;
pub mod series;
pub mod stats;
pub mod wire;

pub use error::{Error, Result};
