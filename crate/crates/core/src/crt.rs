//! Chinese-remainder fingerprints.
//!
//! A tag is `(p, u mod p)` for a prime `p` drawn uniformly from the first `t`
//! primes. Two distinct `n`-bit values agree modulo at most `n` primes, so a
//! random tag separates a value from `s` distractors except with probability
//! `s * n / t`.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{ceil_log2, BitString};
use crate::error::{Error, Result};
use crate::rational::{ceil_u64, in_unit_interval, int, Rational};

/// The first `len` primes, shared from a process-wide sieve cache.
#[derive(Clone)]
pub struct PrimeList {
    all: Arc<Vec<u64>>,
    len: usize,
}

impl PrimeList {
    pub fn as_slice(&self) -> &[u64] {
        &self.all[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Position of `p` in the list, if it is one of the listed primes.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.as_slice().binary_search(&p).ok()
    }

    pub fn last(&self) -> Option<u64> {
        self.as_slice().last().copied()
    }
}

impl fmt::Debug for PrimeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeList(len={}, last={:?})", self.len, self.last())
    }
}

static PRIME_CACHE: OnceLock<Mutex<Arc<Vec<u64>>>> = OnceLock::new();

pub fn first_primes(count: usize) -> PrimeList {
    let cache = PRIME_CACHE.get_or_init(|| Mutex::new(Arc::new(Vec::new())));
    let mut guard = cache.lock().expect("prime cache poisoned");
    if guard.len() < count {
        *guard = Arc::new(sieve_first(count.max(64)));
    }
    PrimeList {
        all: Arc::clone(&guard),
        len: count,
    }
}

fn sieve_first(count: usize) -> Vec<u64> {
    // Rosser's bound p_k < k (ln k + ln ln k) for k >= 6.
    let k = count as f64;
    let mut limit = if count < 6 {
        15
    } else {
        (k * (k.ln() + k.ln().ln())).ceil() as usize + 1
    };
    loop {
        let primes = sieve_up_to(limit);
        if primes.len() >= count {
            return primes.into_iter().take(count).collect();
        }
        limit *= 2;
    }
}

fn sieve_up_to(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Distinct prime factors of `v` (trial division; `v` is at most 64 bits but
/// in practice a difference of two `n`-bit values with small `n`).
pub fn prime_factors(mut v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= v {
        if v.is_multiple_of(p) {
            out.push(p);
            while v.is_multiple_of(p) {
                v /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if v > 1 {
        out.push(v);
    }
    out
}

/// Parameters of the fingerprint family.
#[derive(Clone, Debug)]
pub struct HashScheme {
    n: u32,
    s: u64,
    epsilon: Rational,
    t: usize,
    primes: PrimeList,
}

impl HashScheme {
    pub fn new(n: u32, s: u64, epsilon: Rational) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("hash width must be in 1..=64, got {n}")));
        }
        if s == 0 {
            return Err(Error::InvalidParameter("distractor budget s must be at least 1".into()));
        }
        if !in_unit_interval(&epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {epsilon}")));
        }
        let t = ceil_u64(&(int(s as i128 * n as i128) / epsilon)) as usize;
        Ok(HashScheme {
            n,
            s,
            epsilon,
            t,
            primes: first_primes(t),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    /// Number of primes in the family.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn primes(&self) -> &[u64] {
        self.primes.as_slice()
    }

    /// Bits needed to transmit a tag: prime plus residue.
    pub fn tag_bits(&self) -> u32 {
        let p = self.primes.last().unwrap_or(2);
        2 * ceil_log2(p + 1)
    }
}

/// `(prime, residue)` fingerprint of a value of a declared width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HashTag {
    pub prime: u64,
    pub residue: u64,
    /// Width of the hashed value; tags of different widths never compare equal.
    pub width: u32,
}

impl HashTag {
    /// Whether `u` has this fingerprint.
    pub fn verifies(&self, u: &BitString) -> bool {
        u.width() == self.width && u.value() % self.prime == self.residue
    }

    /// Wire form `p:r`; the width travels alongside in the codeword.
    pub fn wire(&self) -> String {
        format!("{}:{}", self.prime, self.residue)
    }

    pub fn parse_wire(s: &str, width: u32) -> Result<Self> {
        let (p, r) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("tag must look like p:r, got {s:?}")))?;
        let prime = u64::from_str(p.trim()).map_err(|e| Error::Format(format!("tag prime: {e}")))?;
        let residue = u64::from_str(r.trim()).map_err(|e| Error::Format(format!("tag residue: {e}")))?;
        if prime < 2 || residue >= prime {
            return Err(Error::Format(format!("inconsistent tag {s:?}")));
        }
        Ok(HashTag { prime, residue, width })
    }
}

impl fmt::Display for HashTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prime, self.residue)
    }
}

pub fn crt_hash(u: &BitString, prime: u64) -> Result<HashTag> {
    if prime < 2 {
        return Err(Error::InvalidParameter(format!("modulus must be at least 2, got {prime}")));
    }
    Ok(HashTag {
        prime,
        residue: u.value() % prime,
        width: u.width(),
    })
}

/// Draws the prime index uniformly from the seeded generator.
pub fn draw_hash_tag(u: &BitString, scheme: &HashScheme, seed: u64) -> Result<HashTag> {
    u.expect_width(scheme.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = rng.gen_range(0..scheme.t);
    crt_hash(u, scheme.primes()[i])
}

/// Number of scheme primes modulo which `u1` and `u2` agree.
pub fn colliding_primes(u1: &BitString, u2: &BitString, scheme: &HashScheme) -> usize {
    scheme
        .primes()
        .iter()
        .filter(|&&p| u1.value() % p == u2.value() % p)
        .count()
}

/// Exact fraction of prime indices whose tag separates `u1` from every distractor.
pub fn isolation_probability(u1: &BitString, distractors: &[BitString], scheme: &HashScheme) -> Result<Rational> {
    u1.expect_width(scheme.n)?;
    for v in distractors {
        v.expect_width(scheme.n)?;
    }
    if distractors.len() as u64 > scheme.s {
        return Err(Error::InvalidParameter(format!(
            "{} distractors exceed the scheme budget s={}",
            distractors.len(),
            scheme.s
        )));
    }
    if distractors.iter().any(|v| v == u1) {
        return Ok(int(0));
    }
    let isolating = scheme
        .primes()
        .iter()
        .filter(|&&p| {
            let r = u1.value() % p;
            distractors.iter().all(|v| v.value() % p != r)
        })
        .count();
    Ok(Rational::new(isolating as i128, scheme.t as i128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn b(width: u32, v: u64) -> BitString {
        BitString::new(width, v).unwrap()
    }

    #[test]
    fn first_primes_are_ordered() {
        let p = first_primes(10);
        assert_eq!(p.as_slice(), &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(first_primes(17915).last(), Some(199_109));
        assert_eq!(first_primes(480).last(), Some(3413));
        assert_eq!(first_primes(3).as_slice(), &[2, 3, 5]);
    }

    #[test]
    fn crt_hash_examples() {
        assert_eq!(crt_hash(&b(4, 13), 7).unwrap().residue, 6);
        assert_eq!(crt_hash(&b(8, 0), 251).unwrap().residue, 0);
        let t = crt_hash(&b(16, 65535), 65521).unwrap();
        assert_eq!((t.prime, t.residue), (65521, 14));
        assert!(crt_hash(&b(4, 3), 1).is_err());
    }

    #[test]
    fn scheme_size_follows_budget() {
        let s = HashScheme::new(16, 3, rat(1, 10)).unwrap();
        assert_eq!(s.t(), 480);
        assert!(s.t() as u64 >= s.s() * 16);
        let single = HashScheme::new(1, 1, int(1)).unwrap();
        assert_eq!(single.t(), 1);
        assert_eq!(draw_hash_tag(&b(1, 1), &single, 99).unwrap().prime, 2);
    }

    #[test]
    fn isolation_edge_cases() {
        let scheme = HashScheme::new(8, 3, rat(1, 10)).unwrap();
        assert_eq!(isolation_probability(&b(8, 9), &[b(8, 9)], &scheme).unwrap(), int(0));
        assert_eq!(isolation_probability(&b(8, 1), &[b(8, 2)], &scheme).unwrap(), int(1));
        let too_many = vec![b(8, 1); 4];
        assert!(isolation_probability(&b(8, 0), &too_many, &scheme).is_err());
    }

    #[test]
    fn isolation_with_shared_small_factors() {
        // 173 - 5 = 168 = 2^3 * 3 * 7 and 201 - 173 = 28 = 2^2 * 7: primes 2, 3, 7 collide.
        let scheme = HashScheme::new(8, 3, rat(1, 10)).unwrap();
        assert_eq!(scheme.t(), 240);
        let p = isolation_probability(&b(8, 173), &[b(8, 5), b(8, 201)], &scheme).unwrap();
        assert_eq!(p, rat(237, 240));
        assert!(p >= int(1) - rat(1, 10));
    }

    #[test]
    fn tag_wire_round_trip() {
        let tag = crt_hash(&b(8, 200), 13).unwrap();
        assert_eq!(tag.wire(), "13:5");
        assert_eq!(HashTag::parse_wire("13:5", 8).unwrap(), tag);
        assert!(HashTag::parse_wire("13:13", 8).is_err());
        assert!(tag.verifies(&b(8, 200)));
        assert!(!tag.verifies(&b(9, 200)));
    }

    #[test]
    fn prime_factors_of_small_values() {
        assert_eq!(prime_factors(168), vec![2, 3, 7]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
        assert_eq!(prime_factors(65521), vec![65521]);
    }
}
