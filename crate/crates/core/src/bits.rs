//! Fixed-width bit-strings and register symbols.
//!
//! A [`BitString`] is stored most-significant-bit first: the leftmost
//! character of `"10"` is bit position 0 and also the high bit of
//! [`BitString::value`].

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_BITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    // Field order gives (len, value) ordering: shorter strings sort first.
    len: u8,
    value: u64,
}

impl BitString {
    pub fn new(value: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::OutOfRange("bit-string length"));
        }
        if len < MAX_BITS && value >> len != 0 {
            return Err(Error::OutOfRange("bit-string value"));
        }
        Ok(BitString { len: len as u8, value })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_BITS);
        BitString { len: len as u8, value: 0 }
    }

    /// Builds from positional bits, first element leftmost.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > MAX_BITS {
            return Err(Error::OutOfRange("bit-string length"));
        }
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(BitString { len: bits.len() as u8, value })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Integer whose binary expansion, left-padded to `len`, is this string.
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bit at position `i` counted from the left.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len());
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { expected: self.len(), found: other.len() });
        }
        Ok(BitString { len: self.len, value: self.value ^ other.value })
    }

    /// All strings of the given width in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> + Clone {
        assert!(len < MAX_BITS, "cannot enumerate 64-bit strings");
        (0..1u64 << len).map(move |value| BitString { len: len as u8, value })
    }

    /// Lowercase hex of [`value`](Self::value), most significant digit first.
    pub fn to_hex(&self) -> String {
        alloc::format!("{:x}", self.value)
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let digits = hex.trim_start_matches("0x");
        if digits.is_empty() {
            return Err(Error::OutOfRange("hex string"));
        }
        let value =
            u64::from_str_radix(digits, 16).map_err(|_| Error::OutOfRange("hex string"))?;
        BitString::new(value, len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = alloc::vec::Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::OutOfRange("bit-string character")),
            }
        }
        BitString::from_bits(&bits)
    }
}

/// Value held by a classical register: a bit-string or the abort symbol `⊥`.
///
/// `⊥` is a separate variant, so it can never collide with any bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Bits(BitString),
    Abort,
}

impl Symbol {
    pub const ABORT_TEXT: &'static str = "⊥";

    pub fn bit(b: bool) -> Symbol {
        Symbol::Bits(BitString { len: 1, value: b as u64 })
    }

    pub fn bits(value: u64, len: usize) -> Result<Symbol> {
        BitString::new(value, len).map(Symbol::Bits)
    }

    pub fn as_bits(&self) -> Option<&BitString> {
        match self {
            Symbol::Bits(b) => Some(b),
            Symbol::Abort => None,
        }
    }

    pub fn is_abort(&self) -> bool {
        matches!(self, Symbol::Abort)
    }
}

impl From<BitString> for Symbol {
    fn from(b: BitString) -> Self {
        Symbol::Bits(b)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Bits(b) => b.fmt(f),
            Symbol::Abort => f.write_str(Symbol::ABORT_TEXT),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == Symbol::ABORT_TEXT {
            Ok(Symbol::Abort)
        } else {
            s.parse().map(Symbol::Bits)
        }
    }
}
