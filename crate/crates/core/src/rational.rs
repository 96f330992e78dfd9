//! Exact rational helpers and seed derivation.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

pub fn int(v: i128) -> Rational {
    Ratio::from_integer(v)
}

/// Parses `"7/10"`, `"0.7"`, `"1e-2"`-free decimals, or integers.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Format(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_abs: i128 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.trim_start_matches('-').parse().map_err(|_| bad())?
        };
        let scale = 10i128.pow(frac.len() as u32);
        let frac_v: i128 = frac.parse().map_err(|_| bad())?;
        let v = Ratio::new(whole_abs * scale + frac_v, scale);
        return Ok(if negative { -v } else { v });
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(n))
}

pub fn ceil_u64(r: &Rational) -> u64 {
    let c = r.ceil().to_integer();
    assert!(c >= 0, "negative ceiling {c}");
    c as u64
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn abs(r: Rational) -> Rational {
    r.abs()
}

/// Exact integer square root of a rational when it exists.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = isqrt(*r.numer())?;
    let d = isqrt(*r.denom())?;
    Some(Ratio::new(n, d))
}

fn isqrt(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let mut x = (v as f64).sqrt() as i128;
    while x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    (x * x == v).then_some(x)
}

pub fn in_unit_interval(r: &Rational) -> bool {
    r.is_positive() && *r <= Rational::one()
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Counter-based seed splitter: stream `index` of `master` is reproducible in isolation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Serde adapter writing a rational as `"p/q"` (or `"p"` for integers).
pub mod as_string {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
