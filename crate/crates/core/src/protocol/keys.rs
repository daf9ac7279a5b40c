// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// The kN-bit raw key: Bob knows every bit, Alice only the conclusive ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawKey {
    pub bits: BitString,
    pub alice_mask: Vec<bool>,
    /// Alice's inferred values; zero where the mask is unset.
    pub alice_bits: BitString,
}

impl RawKey {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn known_count(&self) -> usize {
        self.alice_mask.iter().filter(|&&m| m).count()
    }
}

/// The N-bit final key after XOR compression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalKey {
    pub bits: BitString,
    pub alice_mask: Vec<bool>,
    pub alice_bits: BitString,
    /// Positions revealed during error estimation; unusable for queries.
    pub consumed: Vec<bool>,
}

impl FinalKey {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn known_count(&self) -> usize {
        self.alice_mask.iter().filter(|&&m| m).count()
    }

    /// Alice-known positions not yet consumed, ascending.
    pub fn usable_positions(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.alice_mask[i] && !self.consumed[i])
            .collect()
    }

    pub fn consume(&mut self, positions: &[usize]) {
        for &p in positions {
            self.consumed[p] = true;
        }
    }
}

/// Cuts the raw key into `k` substrings of length `n` and adds them bitwise.
/// A final bit is known to Alice only when all `k` contributors are.
pub fn xor_compress(raw: &RawKey, k: usize, n: usize) -> Result<FinalKey> {
    if k == 0 || n == 0 || raw.len() != k * n || raw.alice_mask.len() != raw.len() {
        return Err(Error::Domain(format!(
            "raw key of length {} cannot be cut into {k} substrings of length {n}",
            raw.len()
        )));
    }
    let mut bits = BitString::zeros(n);
    let mut alice_bits = BitString::zeros(n);
    let mut alice_mask = vec![true; n];
    for m in 0..k {
        for i in 0..n {
            let r = m * n + i;
            bits.set(i, bits[i] ^ raw.bits[r]);
            alice_bits.set(i, alice_bits[i] ^ raw.alice_bits[r]);
            alice_mask[i] &= raw.alice_mask[r];
        }
    }
    for i in (0..n).filter(|&i| !alice_mask[i]) {
        alice_bits.set(i, 0);
    }
    Ok(FinalKey {
        bits,
        alice_mask,
        alice_bits,
        consumed: vec![false; n],
    })
}
