//! Fixed-width bit strings.
//!
//! A [`BitString`] is the identity of a left node, a right node, an edge label
//! or a codeword payload. The integer value is rendered big-endian: the first
//! character of the textual form is the most significant bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sequence of at most 64 bits stored as an unsigned integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString {
    width: u32,
    value: u64,
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Smallest `b` with `2^b >= v` (0 for `v <= 1`).
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

impl BitString {
    pub const MAX_WIDTH: u32 = 64;

    pub fn new(width: u32, value: u64) -> Result<Self> {
        if width > Self::MAX_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "bit strings are limited to {} bits, got {width}",
                Self::MAX_WIDTH
            )));
        }
        if value & !mask(width) != 0 {
            return Err(Error::ValueOutOfRange { width, value });
        }
        Ok(BitString { width, value })
    }

    /// Caller guarantees `value < 2^width`.
    pub(crate) fn from_raw(width: u32, value: u64) -> Self {
        debug_assert!(width <= 64 && value & !mask(width) == 0);
        BitString { width, value }
    }

    pub fn zeros(width: u32) -> Self {
        BitString::from_raw(width.min(64), 0)
    }

    pub fn empty() -> Self {
        BitString { width: 0, value: 0 }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0
    }

    /// Bit `i` counted from the left (most significant) end.
    pub fn bit(&self, i: u32) -> bool {
        assert!(i < self.width, "bit index {i} out of range for width {}", self.width);
        (self.value >> (self.width - 1 - i)) & 1 == 1
    }

    /// The leftmost `len` bits.
    pub fn prefix(&self, len: u32) -> Result<Self> {
        if len > self.width {
            return Err(Error::InvalidParameter(format!(
                "prefix length {len} exceeds width {}",
                self.width
            )));
        }
        Ok(BitString::from_raw(len, self.value >> (self.width - len)))
    }

    pub fn concat(&self, other: &BitString) -> Result<Self> {
        let width = self.width + other.width;
        if width > Self::MAX_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "concatenation of {} and {} bits exceeds {} bits",
                self.width,
                other.width,
                Self::MAX_WIDTH
            )));
        }
        let hi = if other.width == 64 { 0 } else { self.value << other.width };
        Ok(BitString::from_raw(width, hi | other.value))
    }

    pub fn expect_width(&self, width: u32) -> Result<()> {
        if self.width != width {
            return Err(Error::WidthMismatch {
                expected: width,
                actual: self.width,
            });
        }
        Ok(())
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bin(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > 64 {
            return Err(Error::Format(format!("binary literal too long: {} bits", s.len())));
        }
        let mut value = 0u64;
        for ch in s.chars() {
            value = (value << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Format(format!("invalid binary digit {ch:?}"))),
                };
        }
        Ok(BitString::from_raw(s.len() as u32, value))
    }

    /// Lower-case hex with `ceil(width / 4)` digits (empty for width 0).
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4) as usize;
        if digits == 0 {
            return String::new();
        }
        format!("{:0digits$x}", self.value)
    }

    pub fn from_hex(width: u32, hex: &str) -> Result<Self> {
        let hex = hex.trim().trim_start_matches("0x");
        let value = if hex.is_empty() {
            0
        } else {
            u64::from_str_radix(hex, 16).map_err(|e| Error::Format(format!("bad hex {hex:?}: {e}")))?
        };
        BitString::new(width, value)
    }

    /// Every string of the given width in increasing order.
    pub fn all(width: u32) -> impl Iterator<Item = BitString> {
        assert!(width < 64, "cannot enumerate {width}-bit strings");
        (0..(1u64 << width)).map(move |v| BitString::from_raw(width, v))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:{})", self.width, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_big_endian() {
        let b = BitString::new(4, 0b0010).unwrap();
        assert_eq!(b.to_string(), "0010");
        assert!(b.bit(2));
        assert_eq!(BitString::from_bin("0010").unwrap(), b);
    }

    #[test]
    fn rejects_values_wider_than_width() {
        assert!(matches!(
            BitString::new(3, 8),
            Err(Error::ValueOutOfRange { width: 3, value: 8 })
        ));
        assert!(BitString::new(64, u64::MAX).is_ok());
        assert!(BitString::new(65, 0).is_err());
    }

    #[test]
    fn prefix_and_concat() {
        let z = BitString::from_bin("1011").unwrap();
        assert_eq!(z.prefix(2).unwrap().to_string(), "10");
        assert_eq!(z.prefix(0).unwrap(), BitString::empty());
        let joined = z.concat(&BitString::from_bin("01").unwrap()).unwrap();
        assert_eq!(joined.to_string(), "101101");
    }

    #[test]
    fn hex_round_trip() {
        let b = BitString::new(10, 0x2a5).unwrap();
        assert_eq!(b.to_hex(), "2a5");
        assert_eq!(BitString::from_hex(10, "2a5").unwrap(), b);
        assert!(BitString::from_hex(4, "1f").is_err());
    }

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(640), 10);
        assert_eq!(ceil_log2(1024), 10);
    }
}
