// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::linalg::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiftResult {
    Conclusive(u8),
    Inconclusive,
}

impl SiftResult {
    pub fn is_conclusive(self) -> bool {
        matches!(self, SiftResult::Conclusive(_))
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            SiftResult::Conclusive(b) => Some(b),
            SiftResult::Inconclusive => None,
        }
    }
}

/// Interprets Alice's outcome given Bob's letter.
///
/// Letter `d` leaves the candidates `|d>` (bit 0) and `|d'>` (bit 1). An
/// outcome `|o>` with `o != d` is orthogonal to `|d>`, so the state was the
/// primed one and the bit is 1; symmetrically, `|o'>` with `o != d` excludes
/// `|d'>` and yields bit 0. Outcomes equal to the letter fit both candidates.
pub fn sift(basis: Basis, outcome: u8, declaration: u8) -> SiftResult {
    if outcome == declaration {
        return SiftResult::Inconclusive;
    }
    match basis {
        Basis::B => SiftResult::Conclusive(1),
        Basis::BP => SiftResult::Conclusive(0),
    }
}
