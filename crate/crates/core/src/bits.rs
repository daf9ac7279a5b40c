// SPDX-License-Identifier: Apache-2.0

//! Bit strings stored one bit per byte, serialized as `"0101..."`.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct BitString(Vec<u8>);

impl BitString {
    /// Panics if any element is not 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bit values must be 0 or 1");
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.0[i] = bit & 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }

    /// Packs the bits most significant bit first, zero padding the last byte.
    pub fn pack(&self) -> Vec<u8> {
        pack_bits(self.0.iter().map(|&b| b == 1))
    }

    /// Inverse of [`BitString::pack`]; padding bits must be zero.
    pub fn unpack(bytes: &[u8], len: usize) -> Option<Self> {
        unpack_bits(bytes, len).map(|v| Self(v.into_iter().map(u8::from).collect()))
    }
}

pub fn pack_bits(bits: impl IntoIterator<Item = bool>) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, b) in bits.into_iter().enumerate() {
        if i % 8 == 0 {
            out.push(0);
        }
        if b {
            *out.last_mut().unwrap() |= 0x80 >> (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Option<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return None;
    }
    if !len.is_multiple_of(8) {
        let pad_mask = 0xFFu8 >> (len % 8);
        if bytes.last().is_some_and(|b| b & pad_mask != 0) {
            return None;
        }
    }
    Some((0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

impl Index<usize> for BitString {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_bits(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packs_msb_first() {
        let b = BitString::parse("1011").unwrap();
        assert_eq!(b.pack(), vec![0xB0]);
        assert_eq!(BitString::parse("100000001").unwrap().pack(), vec![0x80, 0x80]);
    }

    #[test]
    fn rejects_nonzero_padding() {
        assert!(BitString::unpack(&[0xB1], 4).is_none());
        assert!(BitString::unpack(&[0xB0, 0x00], 4).is_none());
    }

    proptest! {
        #[test]
        fn pack_round_trip(bits in prop::collection::vec(0u8..=1, 0..200)) {
            let b = BitString::from_bits(bits);
            prop_assert_eq!(BitString::unpack(&b.pack(), b.len()).unwrap(), b.clone());
            prop_assert_eq!(BitString::parse(&b.to_string()).unwrap(), b);
        }
    }
}
