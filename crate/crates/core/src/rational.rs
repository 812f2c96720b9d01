//! Exact rational helpers shared by the counting code and the reports.

use num_bigint::{BigInt, BigUint, ToBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serializer;

pub type Rational = BigRational;

pub fn ratio(num: u64, den: u64) -> Rational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn from_u64(v: u64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Renders as `p/q`, always with an explicit denominator.
pub fn fmt(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders in the DSL style: integers bare, everything else as `p/q`.
pub fn fmt_compact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        fmt(r)
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= r`.
pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// `ceil(r)` clamped into `[0, u64::MAX]`.
pub fn ceil_u64(r: &Rational) -> u64 {
    clamp_u64(&ceil(r))
}

pub fn clamp_u64(v: &BigInt) -> u64 {
    if v.is_negative() {
        0
    } else {
        v.to_u64().unwrap_or(u64::MAX)
    }
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// Smallest `m` with `m^root >= value`.
pub fn ceil_root(value: &BigUint, root: u32) -> BigUint {
    if value.is_zero() {
        return BigUint::zero();
    }
    let r = value.nth_root(root);
    if r.pow(root) < *value {
        r + BigUint::one()
    } else {
        r
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn to_bigint(v: u64) -> BigInt {
    v.to_bigint().expect("u64 always converts")
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt(r))
}

pub fn serialize_opt<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt(r)),
        None => s.serialize_none(),
    }
}

pub fn serialize_vec<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_with_explicit_denominator() {
        assert_eq!(fmt(&ratio(2, 4)), "1/2");
        assert_eq!(fmt(&int(3)), "3/1");
        assert_eq!(fmt_compact(&int(3)), "3");
    }

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse(" 7 "), Some(int(7)));
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn ceil_root_brackets() {
        let v = BigUint::from(1u32) << 10u32; // 1024
        assert_eq!(ceil_root(&v, 2), BigUint::from(32u32));
        let v = BigUint::from(1025u32);
        assert_eq!(ceil_root(&v, 2), BigUint::from(33u32));
    }
}
