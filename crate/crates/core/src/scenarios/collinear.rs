//! Ordered triples of pairwise-distinct collinear points in the affine plane over GF(2^q).
//!
//! A point `(x, y)` is packed into a `2q`-bit string as `x << q | y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf::{Field, FieldElement};
use crate::error::{Error, Result};
use crate::oracle::{ComplexityProfile, CorrelationSet, Subset};

pub type Point = (FieldElement, FieldElement);

pub fn pack(field: &Field, x: u64, y: u64) -> u64 {
    x << field.q() | y
}

pub fn unpack(field: &Field, p: u64) -> (u64, u64) {
    (p >> field.q(), p & (field.order() - 1))
}

/// `(b - a) x (c - a) = 0`, with subtraction equal to addition in characteristic 2.
pub fn is_collinear_raw(field: &Field, a: u64, b: u64, c: u64) -> bool {
    let (ax, ay) = unpack(field, a);
    let (bx, by) = unpack(field, b);
    let (cx, cy) = unpack(field, c);
    field.mul(bx ^ ax, cy ^ ay) == field.mul(by ^ ay, cx ^ ax)
}

pub fn is_collinear(a: Point, b: Point, c: Point) -> Result<bool> {
    let q = a.0.q;
    if [a.1.q, b.0.q, b.1.q, c.0.q, c.1.q].iter().any(|&w| w != q) {
        return Err(Error::InvalidParameter("points come from different fields".into()));
    }
    let field = Field::new(q)?;
    Ok(is_collinear_raw(
        &field,
        pack(&field, a.0.value, a.1.value),
        pack(&field, b.0.value, b.1.value),
        pack(&field, c.0.value, c.1.value),
    ))
}

/// `(Q^2 + Q) * Q * (Q - 1) * (Q - 2)`: lines times ordered distinct triples per line.
pub fn collinear_count(q: u32) -> u64 {
    let big = 1u64 << q;
    (big * big + big) * big * (big - 1) * (big - 2)
}

/// The point `a + t (b - a)`.
fn along(field: &Field, a: u64, b: u64, t: u64) -> u64 {
    let (ax, ay) = unpack(field, a);
    let (bx, by) = unpack(field, b);
    pack(field, ax ^ field.mul(t, bx ^ ax), ay ^ field.mul(t, by ^ ay))
}

/// Visits every ordered pairwise-distinct collinear triple (as packed points).
pub fn for_each_collinear(field: &Field, mut f: impl FnMut([u64; 3])) {
    let points = field.order() * field.order();
    for a in 0..points {
        for b in 0..points {
            if a == b {
                continue;
            }
            for t in 2..field.order() {
                f([a, b, along(field, a, b, t)]);
            }
        }
    }
}

/// Uniform over ordered pairwise-distinct collinear triples: `a` uniform, `b != a`
/// uniform, `c = a + t (b - a)` with `t` uniform outside `{0, 1}`.
pub fn sample_collinear_raw(field: &Field, rng: &mut impl Rng) -> [u64; 3] {
    let points = field.order() * field.order();
    let a = rng.gen_range(0..points);
    let mut b = rng.gen_range(0..points - 1);
    if b >= a {
        b += 1;
    }
    let t = rng.gen_range(2..field.order());
    [a, b, along(field, a, b, t)]
}

pub fn sample_collinear_triple(q: u32, seed: u64) -> Result<[Point; 3]> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("collinear triples need q >= 2, got {q}")));
    }
    let field = Field::new(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = sample_collinear_raw(&field, &mut rng);
    Ok(raw.map(|p| {
        let (x, y) = unpack(&field, p);
        (FieldElement { q, value: x }, FieldElement { q, value: y })
    }))
}

/// Exact projection counts of the collinear set and the resulting counting profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollinearSummary {
    pub q: u32,
    pub members: u64,
    /// Distinct projections onto each subset, in profile order.
    pub projections: [u64; 7],
    /// Largest number of completions of a known pair: `Q - 2`.
    pub max_third_fiber: u64,
    pub profile: ComplexityProfile,
}

pub fn collinear_profile(q: u32) -> Result<CollinearSummary> {
    let set = CorrelationSet::collinear(q)?;
    let counts = set.projection_counts();
    let mut projections = [0u64; 7];
    for (i, v) in Subset::ORDER.iter().enumerate() {
        projections[i] = counts[v.mask() as usize];
    }
    Ok(CollinearSummary {
        q,
        members: set.len(),
        projections,
        max_third_fiber: (1u64 << q) - 2,
        profile: set.profile(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_line_is_collinear() {
        let f = Field::new(2).unwrap();
        let e = |v| f.element(v).unwrap();
        assert!(is_collinear((e(0), e(0)), (e(1), e(1)), (e(2), e(2))).unwrap());
        assert!(!is_collinear((e(0), e(0)), (e(1), e(1)), (e(2), e(3))).unwrap());
    }

    #[test]
    fn samples_pass_determinant_test() {
        for seed in 0..200 {
            let [a, b, c] = sample_collinear_triple(3, seed).unwrap();
            assert!(is_collinear(a, b, c).unwrap());
            assert!(a != b && b != c && a != c);
        }
        assert!(sample_collinear_triple(1, 0).is_err());
    }

    #[test]
    fn count_formula_matches_enumeration() {
        for q in 2..=3 {
            let f = Field::new(q).unwrap();
            let mut seen = 0u64;
            for_each_collinear(&f, |[a, b, c]| {
                assert!(is_collinear_raw(&f, a, b, c));
                seen += 1;
            });
            assert_eq!(seen, collinear_count(q));
        }
        assert_eq!(collinear_count(2), 480);
    }
}
