// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Bob's database of single-bit items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    bits: BitString,
}

impl Database {
    pub fn new(bits: BitString) -> Self {
        Self { bits }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = stream(seed);
        Self::new((0..n).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Parses a database of `n` items from text.
    ///
    /// Text consisting of exactly `n` `0`/`1` characters (whitespace ignored)
    /// is read bit by bit. Otherwise the text is read as hexadecimal, an
    /// optional `0x` prefix allowed, and the first `n` bits taken most
    /// significant bit first; any remaining bits must be zero.
    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.len() == n && compact.chars().all(|c| c == '0' || c == '1') {
            return Ok(Self::new(BitString::parse(&compact)?));
        }
        let hex_digits = compact
            .strip_prefix("0x")
            .or_else(|| compact.strip_prefix("0X"))
            .unwrap_or(&compact);
        if hex_digits.len() * 4 < n {
            return Err(Error::Domain(format!(
                "database is neither a {n}-bit string nor hex with at least {n} bits"
            )));
        }
        let padded = if hex_digits.len() % 2 == 1 {
            format!("{hex_digits}0")
        } else {
            hex_digits.to_owned()
        };
        let bytes = hex::decode(&padded)
            .map_err(|e| Error::Domain(format!("database is neither a {n}-bit string nor hex: {e}")))?;
        Self::from_bytes(&bytes, n)
    }

    /// First `n` bits of `bytes`, most significant bit first.
    pub fn from_bytes(bytes: &[u8], n: usize) -> Result<Self> {
        if bytes.len() * 8 < n {
            return Err(Error::Domain(format!(
                "database holds {} bits, {n} required",
                bytes.len() * 8
            )));
        }
        let bits: BitString = (0..n).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect();
        let extra_set = (n..bytes.len() * 8).any(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1);
        if extra_set {
            return Err(Error::Domain(format!("database has set bits beyond item {n}")));
        }
        Ok(Self::new(bits))
    }

    /// Loads a text (bit string or hex) file, or a raw binary file when the
    /// content is not UTF-8 text.
    pub fn load(path: &Path, n: usize) -> Result<Self> {
        let raw = std::fs::read(path)?;
        match std::str::from_utf8(&raw) {
            Ok(text) => Self::from_text(text, n),
            Err(_) => Self::from_bytes(&raw, n),
        }
    }
}
