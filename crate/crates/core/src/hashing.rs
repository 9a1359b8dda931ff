//! Toeplitz universal₂ hashing over GF(2).
//!
//! Bit conventions (fixed so hash values are reproducible bit-for-bit):
//!
//! * inputs and outputs are [`BitString`]s; position `i` counts from the
//!   left (most significant bit first);
//! * the seed is a [`BitString`] of `n_in + n_out − 1` bits whose integer
//!   value is `S`, and seed bit `k` is the coefficient of `2^k` in `S`;
//! * the matrix is `T[j, i] = seedbit(j − i + n_in − 1)` and
//!   `out[j] = ⊕_i T[j, i] · in[i]`.
//!
//! With these conventions row `j` of `T`, read as an `n_in`-bit integer, is
//! simply `(S >> j) mod 2^{n_in}`. For example `n_in = 2, n_out = 1`,
//! seed `"10"` gives `T = [1 0]`, the map that keeps the first input bit.

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Largest seed length for which whole families may be enumerated.
pub const FAMILY_CAP_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToeplitzHash {
    n_in: u8,
    n_out: u8,
    seed: BitString,
}

impl ToeplitzHash {
    pub fn new(n_in: usize, n_out: usize, seed: BitString) -> Result<Self> {
        check_shape(n_in, n_out)?;
        let expected = n_in + n_out - 1;
        if seed.len() != expected {
            return Err(Error::LengthMismatch { expected, found: seed.len() });
        }
        Ok(ToeplitzHash { n_in: n_in as u8, n_out: n_out as u8, seed })
    }

    /// Seed given as hex (see [`BitString::from_hex`]).
    pub fn from_hex(n_in: usize, n_out: usize, hex: &str) -> Result<Self> {
        check_shape(n_in, n_out)?;
        Self::new(n_in, n_out, BitString::from_hex(hex, n_in + n_out - 1)?)
    }

    pub fn seed_bits(n_in: usize, n_out: usize) -> usize {
        n_in + n_out - 1
    }

    pub fn n_in(&self) -> usize {
        self.n_in as usize
    }

    pub fn n_out(&self) -> usize {
        self.n_out as usize
    }

    pub fn seed(&self) -> BitString {
        self.seed
    }

    /// Row `j` of the matrix as an `n_in`-bit integer (leftmost input = high bit).
    #[inline]
    pub fn row(&self, j: usize) -> u64 {
        (self.seed.value() >> j) & mask(self.n_in())
    }

    /// Hash of a raw `n_in`-bit integer; the caller guarantees the width.
    #[inline]
    pub fn apply_value(&self, input: u64) -> u64 {
        let n_out = self.n_out();
        let mut out = 0u64;
        for j in 0..n_out {
            let bit = (self.row(j) & input).count_ones() as u64 & 1;
            out |= bit << (n_out - 1 - j);
        }
        out
    }

    pub fn apply(&self, input: &BitString) -> Result<BitString> {
        if input.len() != self.n_in() {
            return Err(Error::LengthMismatch { expected: self.n_in(), found: input.len() });
        }
        BitString::new(self.apply_value(input.value()), self.n_out())
    }
}

fn check_shape(n_in: usize, n_out: usize) -> Result<()> {
    if n_out == 0 || n_out > n_in || n_in + n_out - 1 > 64 {
        return Err(Error::InvalidHashShape { n_in, n_out });
    }
    Ok(())
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Every member of the Toeplitz family, in increasing seed order. Each has
/// weight `2^{-(n_in + n_out − 1)}`.
pub fn enumerate_family(n_in: usize, n_out: usize) -> Result<impl Iterator<Item = ToeplitzHash> + Clone> {
    check_shape(n_in, n_out)?;
    let seed_bits = n_in + n_out - 1;
    if seed_bits > FAMILY_CAP_BITS {
        return Err(Error::FamilyTooLarge { seed_bits });
    }
    Ok(BitString::all(seed_bits).map(move |seed| ToeplitzHash { n_in: n_in as u8, n_out: n_out as u8, seed }))
}

/// Fraction of the family with `h(a) = h(b)`, by exhaustive enumeration.
pub fn collision_fraction(n_in: usize, n_out: usize, a: &BitString, b: &BitString) -> Result<f64> {
    for x in [a, b] {
        if x.len() != n_in {
            return Err(Error::LengthMismatch { expected: n_in, found: x.len() });
        }
    }
    if a == b {
        return Err(Error::EqualInputs);
    }
    let family = enumerate_family(n_in, n_out)?;
    let mut total = 0u64;
    let mut hits = 0u64;
    for h in family {
        total += 1;
        if h.apply_value(a.value()) == h.apply_value(b.value()) {
            hits += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// `⌈log₂(1/ε_cor)⌉`: the smallest `t` with `2^{-t} ≤ ε_cor`.
pub fn tag_length(eps_cor: f64) -> Result<u32> {
    if !(eps_cor > 0.0 && eps_cor < 1.0) {
        return Err(Error::OutOfRange("eps_cor"));
    }
    let mut t = 0u32;
    let mut p = 1.0f64;
    while p > eps_cor {
        t += 1;
        p *= 0.5;
    }
    Ok(t)
}
