// SPDX-License-Identifier: Apache-2.0

//! Exact finite-dimensional qubit states: the protocol's carrier and attack
//! states, Born-rule sampling, tensor products, and distance measures between
//! density operators.

mod carrier;
mod state;

pub use carrier::{attack_state, carrier_state, measure, AttackState, Basis, CarrierLabel, CarrierSet, Theta};
pub use state::{fidelity, hermitian_eigenvalues, max_entry_norm, tensor, trace_distance, DensityMatrix, StateVector, MAX_DIM};

pub use num_complex::Complex64;
