// SPDX-License-Identifier: Apache-2.0

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::database::Database;
use super::keys::FinalKey;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// One shifted one-time-pad query. `target_index`, `known_index` and
/// `retrieved_bit` are Alice-private and absent from Bob's view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryExchange {
    pub target_index: Option<usize>,
    pub known_index: Option<usize>,
    pub shift: usize,
    pub ciphertext: BitString,
    pub retrieved_bit: Option<u8>,
}

/// `(j - i) mod n`.
pub fn shift_for(known_index: usize, target_index: usize, n: usize) -> usize {
    (known_index + n - target_index % n) % n
}

/// Picks `j` uniformly among Alice's usable final-key positions.
pub fn choose_known_index(key: &FinalKey, rng: &mut RandomStream) -> Result<usize> {
    let usable = key.usable_positions();
    if usable.is_empty() {
        return Err(Error::RestartRequired);
    }
    Ok(usable[rng.random_range(0..usable.len())])
}

/// Bob's side: rotate the key by `shift` (`K'_m = K_{(m+s) mod N}`) and XOR
/// it onto the database.
pub fn encrypt_database(key: &BitString, database: &Database, shift: usize) -> Result<BitString> {
    let n = key.len();
    if database.len() != n {
        return Err(Error::Domain(format!(
            "database has {} items but the key has {n} bits",
            database.len()
        )));
    }
    if shift >= n {
        return Err(Error::Domain(format!("shift {shift} out of range for N = {n}")));
    }
    Ok((0..n).map(|m| database.bit(m) ^ key[(m + shift) % n]).collect())
}

/// Runs both halves of the query in-process.
pub fn oblivious_query(
    key: &FinalKey,
    database: &Database,
    target_index: usize,
    rng: &mut RandomStream,
) -> Result<QueryExchange> {
    let n = key.len();
    if target_index >= n {
        return Err(Error::Domain(format!("item {target_index} out of range for N = {n}")));
    }
    let j = choose_known_index(key, rng)?;
    let shift = shift_for(j, target_index, n);
    let ciphertext = encrypt_database(&key.bits, database, shift)?;
    let retrieved_bit = ciphertext[target_index] ^ key.alice_bits[j];
    Ok(QueryExchange {
        target_index: Some(target_index),
        known_index: Some(j),
        shift,
        ciphertext,
        retrieved_bit: Some(retrieved_bit),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// `None` when the sample was empty.
    pub rate: Option<f64>,
    pub sampled: usize,
    pub errors: usize,
    /// Revealed positions, ascending.
    pub consumed: Vec<usize>,
}

/// Publicly compares a uniform sample of `floor(fraction * known)` of Alice's
/// known positions against Bob's key, always leaving at least one known bit
/// unrevealed. Revealed positions are marked consumed in `alice`.
pub fn estimate_error_rate(
    alice: &mut FinalKey,
    bob: &FinalKey,
    sample_fraction: f64,
    rng: &mut RandomStream,
) -> Result<ErrorEstimate> {
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::Domain(format!(
            "sample fraction {sample_fraction} outside (0, 1]"
        )));
    }
    if alice.len() != bob.len() {
        return Err(Error::Domain("key lengths differ".into()));
    }
    let usable = alice.usable_positions();
    if usable.len() < 2 {
        return Err(Error::InsufficientKey { known: usable.len() });
    }
    let count = ((sample_fraction * usable.len() as f64).floor() as usize).min(usable.len() - 1);
    let mut consumed: Vec<usize> = index::sample(rng, usable.len(), count)
        .into_iter()
        .map(|i| usable[i])
        .collect();
    consumed.sort_unstable();
    let errors = consumed
        .iter()
        .filter(|&&p| alice.alice_bits[p] != bob.bits[p])
        .count();
    alice.consume(&consumed);
    Ok(ErrorEstimate {
        rate: (count > 0).then(|| errors as f64 / count as f64),
        sampled: count,
        errors,
        consumed,
    })
}
