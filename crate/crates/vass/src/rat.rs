//! Arbitrary-precision integer and rational scalars used throughout the crate.
//!
//! All analysis arithmetic is exact: integers are [`num::BigInt`] and rationals
//! are [`num::BigRational`] kept in lowest terms with a positive denominator.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

/// Arbitrary-precision signed integer.
pub type Int = BigInt;

/// Arbitrary-precision rational, always in lowest terms with denominator > 0.
pub type Rat = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Shorthand for the rational `n/d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn int(n: i64) -> Int {
    Int::from(n)
}

/// Scales a rational vector to an integer vector by the least common multiple
/// of the denominators. Returns the scaled vector together with the multiplier
/// `m`, so `result = m * xs` componentwise. Homogeneous inequalities with zero
/// right-hand side keep their direction since `m >= 1`.
pub fn scale_to_integer(xs: &[Rat]) -> (Vec<Int>, Int) {
    let mut m = Int::one();
    for x in xs {
        m = m.lcm(x.denom());
    }
    let scaled = xs
        .iter()
        .map(|x| {
            let v = x * Rat::from_integer(m.clone());
            debug_assert!(v.is_integer());
            v.to_integer()
        })
        .collect();
    (scaled, m)
}

/// Renders a rational as `p/q`, or just `p` when it is an integer.
pub fn rat_display(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses the output of [`rat_display`].
pub fn rat_parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => {
            let n: Int = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

/// Maximum absolute value of a vector's entries; zero for the empty vector.
pub fn max_abs(xs: &[Int]) -> Int {
    xs.iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(Int::zero)
}
