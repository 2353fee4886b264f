//! Exact rational scalars and their `"p/q"` text form.
//!
//! Every measure, value and characteristic that can be exact is carried as a
//! [`Rational`]. The text form is always `numerator/denominator` in lowest
//! terms with a positive denominator, so golden files compare byte-for-byte.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"` in lowest terms; integers still carry `/1`.
pub fn format(r: &Rational) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}/{}", r.numer(), r.denom());
    s
}

/// Parses `p/q`, a signed integer, or a finite decimal such as `-0.125`.
///
/// `location` names where the text came from and is echoed in the error.
pub fn parse(text: &str, location: &str) -> Result<Rational> {
    let err = |message: &str| Error::Parse { location: location.to_string(), message: format!("{message}: {text:?}") };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty rational"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let whole: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| err("bad decimal"))?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| err("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(whole * &scale + frac_num, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let v: BigInt = t.parse().map_err(|_| err("bad integer"))?;
    Ok(Rational::from_integer(v))
}

/// Smallest integer `k` with `k >= r`.
pub fn ceil_to_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

/// `ceil(tau * count)` for a rational `tau`, computed without rounding error.
pub fn ceil_mul(tau: &Rational, count: u64) -> u64 {
    let num = tau.numer() * BigInt::from(count);
    let (q, r) = num.div_rem(tau.denom());
    let q = q.to_u64().expect("ceil_mul result fits in u64");
    if r.is_positive() {
        q + 1
    } else {
        q
    }
}

/// Whether `count >= tau * total`, exactly.
pub fn at_least_fraction(count: u64, tau: &Rational, total: u64) -> bool {
    BigInt::from(count) * tau.denom() >= tau.numer() * BigInt::from(total)
}

/// `r^e` for a non-negative integer exponent.
pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

/// Whether `r` lies in the open interval (0, 1).
pub fn in_unit_open(r: &Rational) -> bool {
    r.is_positive() && r < &Rational::one()
}

/// Serde adapters storing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text, "json").map_err(serde::de::Error::custom)
    }
}

pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| parse(t, &format!("json[{i}]")))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)
    }
}

pub mod serde_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|t| parse(&t, "json").map_err(serde::de::Error::custom)).transpose()
    }
}

pub mod serde_vec_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.iter().map(format).collect::<Vec<_>>()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, t)| parse(t, &format!("json[{i}]")))
                    .collect::<Result<Vec<_>>>()
                    .map_err(serde::de::Error::custom)
            })
            .transpose()
    }
}
