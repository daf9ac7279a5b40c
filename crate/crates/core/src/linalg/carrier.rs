// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Carrier angle, validated to lie in the open interval (0, pi/2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Theta(f64);

impl Theta {
    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() && radians > 0.0 && radians < FRAC_PI_2 {
            Ok(Self(radians))
        } else {
            Err(Error::Domain(format!(
                "theta = {radians} is outside the open interval (0, pi/2)"
            )))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Theta {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Theta> for f64 {
    fn from(t: Theta) -> f64 {
        t.0
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One of the four carrier states `|0>, |1>, |0'>, |1'>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CarrierLabel {
    K0,
    K1,
    K0P,
    K1P,
}

impl CarrierLabel {
    pub const ALL: [CarrierLabel; 4] = [Self::K0, Self::K1, Self::K0P, Self::K1P];

    /// Unprimed states carry bit 0, primed states bit 1.
    pub fn coded_bit(self) -> u8 {
        match self {
            Self::K0 | Self::K1 => 0,
            Self::K0P | Self::K1P => 1,
        }
    }

    /// Bob's public letter: 0 for `{|0>, |0'>}`, 1 for `{|1>, |1'>}`.
    pub fn declaration_letter(self) -> u8 {
        match self {
            Self::K0 | Self::K0P => 0,
            Self::K1 | Self::K1P => 1,
        }
    }

    pub fn from_parts(letter: u8, coded_bit: u8) -> Self {
        match (letter & 1, coded_bit & 1) {
            (0, 0) => Self::K0,
            (0, _) => Self::K0P,
            (_, 0) => Self::K1,
            _ => Self::K1P,
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Self::K0 | Self::K1 => Basis::B,
            Self::K0P | Self::K1P => Basis::BP,
        }
    }
}

/// Measurement basis: `B = {|0>, |1>}` or `B' = {|0'>, |1'>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    B,
    BP,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::B, Basis::BP];

    /// Basis vectors in outcome order: outcome 0 is `|0>` or `|0'>`.
    pub fn vectors(self, theta: Theta) -> [StateVector; 2] {
        match self {
            Basis::B => [
                carrier_state(CarrierLabel::K0, theta),
                carrier_state(CarrierLabel::K1, theta),
            ],
            Basis::BP => [
                carrier_state(CarrierLabel::K0P, theta),
                carrier_state(CarrierLabel::K1P, theta),
            ],
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Basis::B => 0,
            Basis::BP => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            Basis::B
        } else {
            Basis::BP
        }
    }
}

pub fn carrier_state(label: CarrierLabel, theta: Theta) -> StateVector {
    let (s, c) = theta.radians().sin_cos();
    match label {
        CarrierLabel::K0 => StateVector::qubit(1.0, 0.0),
        CarrierLabel::K1 => StateVector::qubit(0.0, 1.0),
        CarrierLabel::K0P => StateVector::qubit(c, s),
        CarrierLabel::K1P => StateVector::qubit(s, -c),
    }
}

/// Half-angle states a dishonest Bob sends to steer Alice's conclusiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackState {
    A0PP,
    A1PP,
}

pub fn attack_state(which: AttackState, theta: Theta) -> StateVector {
    let (s, c) = (theta.radians() / 2.0).sin_cos();
    match which {
        AttackState::A0PP => StateVector::qubit(c, s),
        AttackState::A1PP => StateVector::qubit(s, -c),
    }
}

/// Samples a projective measurement of a single qubit in `basis`. Returns the
/// outcome index (0 for `|0>`/`|0'>`, 1 for `|1>`/`|1'>`).
pub fn measure(state: &StateVector, basis: Basis, theta: Theta, rng: &mut RandomStream) -> Result<u8> {
    let [_, second] = basis.vectors(theta);
    let p1 = second.inner(state)?.norm_sqr();
    Ok(sample_outcome(p1, rng))
}

// Outcome 1 iff u < p1, so an exact eigenstate (p1 == 0 or p1 == 1) never
// produces the other outcome.
fn sample_outcome(p1: f64, rng: &mut RandomStream) -> u8 {
    u8::from(rng.random::<f64>() < p1)
}

/// Precomputed carrier states and basis overlaps for one angle. Used on hot
/// paths where the per-photon cost of building vectors matters.
#[derive(Debug, Clone)]
pub struct CarrierSet {
    theta: Theta,
    // p1[label][basis]: probability of outcome 1.
    p1: [[f64; 2]; 4],
}

impl CarrierSet {
    pub fn new(theta: Theta) -> Self {
        let mut p1 = [[0.0; 2]; 4];
        for (li, label) in CarrierLabel::ALL.into_iter().enumerate() {
            let psi = carrier_state(label, theta);
            for basis in Basis::ALL {
                let [_, second] = basis.vectors(theta);
                p1[li][basis.bit() as usize] = second.inner(&psi).expect("qubit dims").norm_sqr();
            }
        }
        Self { theta, p1 }
    }

    pub fn theta(&self) -> Theta {
        self.theta
    }

    /// Born probability of outcome 1 for `label` measured in `basis`.
    pub fn outcome_one_probability(&self, label: CarrierLabel, basis: Basis) -> f64 {
        let li = CarrierLabel::ALL.iter().position(|&l| l == label).unwrap();
        self.p1[li][basis.bit() as usize]
    }

    /// Same distribution as [`measure`] on the carrier state.
    pub fn measure(&self, label: CarrierLabel, basis: Basis, rng: &mut RandomStream) -> u8 {
        sample_outcome(self.outcome_one_probability(label, basis), rng)
    }
}
