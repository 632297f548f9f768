use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive};

/// Field operations shared by `f64` and exact rationals.
pub trait Scalar: Clone + Debug + Num + Neg<Output = Self> + Signed + PartialOrd {
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// The rational whose decimal expansion is the shortest representation of
/// `x` that round-trips, so `0.2` maps to `1/5` rather than its binary value.
pub fn exact(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x:e}");
    let (mantissa, exponent) = text.split_once('e')?;
    let exponent: i32 = exponent.parse().ok()?;
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// `p/q` (or `p` for integers).
pub(crate) fn fraction_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn decimal_inputs_become_short_fractions() {
        assert_eq!(exact(0.2).unwrap(), q(1, 5));
        assert_eq!(exact(-1.5).unwrap(), q(-3, 2));
        assert_eq!(exact(0.0).unwrap(), q(0, 1));
        assert_eq!(exact(1e-7).unwrap(), q(1, 10_000_000));
        assert_eq!(exact(2.5e3).unwrap(), q(2500, 1));
        assert!(exact(f64::NAN).is_none());
    }

    #[test]
    fn fraction_strings() {
        assert_eq!(fraction_string(&q(-6, 4)), "-3/2");
        assert_eq!(fraction_string(&q(4, 2)), "2");
    }
}
