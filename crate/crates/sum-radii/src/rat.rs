//! Exact rational scalars, the unreachable-distance sentinel, and the
//! fixed-precision rational square root used to rationalize Euclidean inputs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Exact rational scalar used for every distance, radius and dual value.
pub type Rat = BigRational;

/// Builds a rational from an integer numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an integer.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Parses a rational from `"p"` or `"p/q"` decimal strings.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rat::new(num, den))
}

/// Formats a rational as `"p/q"` (always with an explicit denominator).
pub fn format_rat(value: &Rat) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// A metric distance: either an exact rational or an unreachable sentinel
/// that compares greater than every finite value and is rejected as a radius.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    /// Finite exact distance.
    Finite(Rat),
    /// Points in different components of a disconnected metric.
    Unreachable,
}

impl Dist {
    /// Returns the finite value, or `None` for the sentinel.
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Dist::Finite(r) => Some(r),
            Dist::Unreachable => None,
        }
    }

    /// True iff the distance is the unreachable sentinel.
    pub fn is_unreachable(&self) -> bool {
        matches!(self, Dist::Unreachable)
    }

    /// Compares against a finite radius; the sentinel exceeds every radius.
    pub fn le_rat(&self, radius: &Rat) -> bool {
        match self {
            Dist::Finite(r) => r <= radius,
            Dist::Unreachable => false,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(r) => write!(f, "{}", format_rat(r)),
            Dist::Unreachable => write!(f, "inf"),
        }
    }
}

/// Smallest grid rational `s / 2^grid_log2` whose square is `>= value`.
///
/// Rounding the square root up onto a fixed power-of-two grid keeps the
/// triangle inequality intact: if `ac <= ab + bc` exactly, then
/// `ceil(ac) < ceil(ab) + ceil(bc) + u` for grid unit `u`, and since all three
/// are multiples of `u` the strict inequality collapses to
/// `ceil(ac) <= ceil(ab) + ceil(bc)`. Rounding down has no such guarantee.
pub fn sqrt_ceil_to_grid(value: &Rat, grid_log2: u32) -> Rat {
    assert!(!value.is_negative(), "square root of a negative rational");
    if value.is_zero() {
        return Rat::zero();
    }
    let scale = BigInt::one() << (2 * grid_log2);
    let scaled_num = value.numer() * &scale;
    let den = value.denom();
    // Smallest integer s with s^2 * den >= scaled_num.
    let mut s = (&scaled_num / den).sqrt();
    while &s * &s * den < scaled_num {
        s += 1;
    }
    Rat::new(s, BigInt::one() << grid_log2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let v = parse_rat("-7/3").unwrap();
        assert_eq!(v, rat(-7, 3));
        assert_eq!(format_rat(&v), "-7/3");
        assert_eq!(parse_rat("5").unwrap(), rat_int(5));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("x").is_none());
    }

    #[test]
    fn sentinel_orders_above_all_finite_values() {
        assert!(Dist::Finite(rat_int(1_000_000)) < Dist::Unreachable);
        assert!(!Dist::Unreachable.le_rat(&rat_int(i64::MAX)));
        assert!(Dist::Finite(rat(1, 2)).le_rat(&rat(1, 2)));
    }

    #[test]
    fn sqrt_ceil_exact_squares_are_exact() {
        assert_eq!(sqrt_ceil_to_grid(&rat_int(9), 32), rat_int(3));
        assert_eq!(sqrt_ceil_to_grid(&rat(1, 4), 32), rat(1, 2));
        assert_eq!(sqrt_ceil_to_grid(&Rat::zero(), 32), Rat::zero());
    }

    #[test]
    fn sqrt_ceil_rounds_up_within_one_grid_unit() {
        let two = rat_int(2);
        let approx = sqrt_ceil_to_grid(&two, 32);
        assert!(&approx * &approx >= two);
        let down = &approx - rat(1, 1 << 32);
        assert!(&down * &down < rat_int(2));
    }
}
