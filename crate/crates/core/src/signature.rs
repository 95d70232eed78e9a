//! Sign-bit signatures and their canonical packed bucket keys.

use crate::error::{Error, Result};

/// One bit per hyperplane: bit `i` is 1 iff the point lies on the
/// non-negative side of hyperplane `i` (a dot product of exactly zero
/// counts as above).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSignature {
    bits: Vec<bool>,
}

impl BitSignature {
    /// Signs a projected vector.
    pub fn from_projected(projected: &[f64]) -> Self {
        BitSignature {
            bits: projected.iter().map(|&v| v >= 0.0).collect(),
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitSignature { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// A signature packed MSB-first into `ceil(len / 8)` bytes: signature bit 0
/// occupies the most-significant bit of byte 0 and unused trailing bits are
/// zero, so byte equality coincides with signature equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BucketKey {
    packed: Vec<u8>,
}

impl BucketKey {
    /// Packs a signature into its canonical byte form.
    pub fn from_signature(sig: &BitSignature) -> Self {
        let mut packed = vec![0u8; sig.len().div_ceil(8)];
        for (i, &bit) in sig.bits().iter().enumerate() {
            if bit {
                packed[i / 8] |= 1 << (7 - (i % 8));
            }
        }
        BucketKey { packed }
    }

    /// Validates raw bytes as a canonical key for `hash_size` bits: the
    /// length must match and every pad bit must be zero.
    pub fn from_bytes(packed: Vec<u8>, hash_size: usize) -> Result<Self> {
        if packed.len() != hash_size.div_ceil(8) {
            return Err(Error::param(format!(
                "bucket key of {} bytes does not match hash size {}",
                packed.len(),
                hash_size
            )));
        }
        let pad_bits = packed.len() * 8 - hash_size;
        if pad_bits > 0 {
            let mask = (1u8 << pad_bits) - 1;
            if packed[packed.len() - 1] & mask != 0 {
                return Err(Error::param(
                    "bucket key has nonzero padding bits".to_string(),
                ));
            }
        }
        Ok(BucketKey { packed })
    }

    /// Recovers the signature; the bit length is not stored in the key, so
    /// the caller supplies it.
    pub fn decode(&self, hash_size: usize) -> Result<BitSignature> {
        if self.packed.len() != hash_size.div_ceil(8) {
            return Err(Error::param(format!(
                "bucket key of {} bytes does not match hash size {}",
                self.packed.len(),
                hash_size
            )));
        }
        let bits = (0..hash_size)
            .map(|i| self.packed[i / 8] & (1 << (7 - (i % 8))) != 0)
            .collect();
        Ok(BitSignature { bits })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.packed
    }
}
