//! Lemma hashing.
//!
//! Lemmas are identified everywhere — in the dictionary file, in lookup
//! results, in downstream search indexes — by the 32-bit MurmurHash3 (x86
//! variant, seed 0) of their normalized UTF-8 bytes. The function is
//! implemented here rather than pulled in as a dependency because the exact
//! bit pattern is a compatibility contract: dictionaries and the indexes
//! built from them are only interchangeable while every producer hashes
//! identically. A pinned cross-implementation vector file under `tests/data`
//! guards the contract.

use std::fmt;

/// Stable 32-bit identifier of a lemma: MurmurHash3 of its normalized text.
///
/// The value is unsigned; the empty string hashes to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LemmaHash(u32);

impl LemmaHash {
    pub const fn new(value: u32) -> Self {
        LemmaHash(value)
    }

    pub const fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for LemmaHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for LemmaHash {
    fn from(value: u32) -> Self {
        LemmaHash(value)
    }
}

/// Hashes the UTF-8 bytes of `text` with MurmurHash3 x86/32, seed 0.
pub fn murmur3_32(text: &str) -> LemmaHash {
    LemmaHash(murmur3_x86_32(text.as_bytes(), 0))
}

fn murmur3_x86_32(data: &[u8], seed: u32) -> u32 {
    const C1: u32 = 0xcc9e_2d51;
    const C2: u32 = 0x1b87_3593;

    let mut h = seed;
    let mut chunks = data.chunks_exact(4);
    for chunk in &mut chunks {
        let mut k = u32::from_le_bytes(chunk.try_into().unwrap());
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h = (h ^ k).rotate_left(13).wrapping_mul(5).wrapping_add(0xe654_6b64);
    }

    let tail = chunks.remainder();
    if !tail.is_empty() {
        let mut k = 0u32;
        for (i, &b) in tail.iter().enumerate() {
            k |= u32::from(b) << (8 * i);
        }
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
    }

    h ^= data.len() as u32;
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 16;
    h
}
