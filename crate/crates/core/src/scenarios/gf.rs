//! Arithmetic in GF(2^q) for small q.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed irreducible polynomial for each supported width, including the leading term.
pub fn irreducible_poly(q: u32) -> Option<u64> {
    Some(match q {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,
        4 => 0b1_0011,
        5 => 0b10_0101,
        6 => 0b100_0011,
        7 => 0b1000_0011,
        8 => 0x11b,
        _ => return None,
    })
}

/// The field GF(2^q) with elements stored as polynomial bit vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    q: u32,
    poly: u64,
}

impl Field {
    pub fn new(q: u32) -> Result<Self> {
        let poly = irreducible_poly(q)
            .ok_or_else(|| Error::InvalidParameter(format!("no field polynomial configured for q={q}")))?;
        Ok(Field { q, poly })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn order(&self) -> u64 {
        1 << self.q
    }

    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if value >= self.order() {
            return Err(Error::ValueOutOfRange { width: self.q, value });
        }
        Ok(FieldElement { q: self.q, value })
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    /// Shift-and-add multiplication reduced by the field polynomial.
    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let top = 1u64 << self.q;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        acc
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^q - 2)`; zero has none.
    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    pub q: u32,
    pub value: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}):{}", self.q, self.value)
    }
}

fn same_field(a: FieldElement, b: FieldElement) -> Result<Field> {
    if a.q != b.q {
        return Err(Error::InvalidParameter(format!(
            "elements of GF(2^{}) and GF(2^{}) cannot be combined",
            a.q, b.q
        )));
    }
    Field::new(a.q)
}

pub fn gf_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let f = same_field(a, b)?;
    Ok(FieldElement { q: a.q, value: f.mul(a.value, b.value) })
}

pub fn gf_add(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    same_field(a, b)?;
    Ok(FieldElement { q: a.q, value: a.value ^ b.value })
}
