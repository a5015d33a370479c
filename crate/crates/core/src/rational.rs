//! Exact rational helpers and the `p/q` text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational {0:?}")]
pub struct ParseQError(pub String);

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qb(n: &BigInt) -> Q {
    Q::from_integer(n.clone())
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Q {
    let m = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Q::from_integer(m)
    } else {
        Q::new(BigInt::one(), m)
    }
}

/// Parses `p/q` or a bare integer; the result is normalised.
pub fn parse_q(s: &str) -> Result<Q, ParseQError> {
    let t = s.trim();
    let bad = || ParseQError(s.to_string());
    let (p, d) = match t.split_once('/') {
        Some((p, d)) => (p, d),
        None => (t, "1"),
    };
    let ok = |x: &str| {
        let x = x.strip_prefix(['-', '+']).unwrap_or(x);
        !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit())
    };
    if !ok(p) || !ok(d) || d.starts_with(['-', '+']) {
        return Err(bad());
    }
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(p, d))
}

/// Canonical text form, always `p/q` with `q > 0` in lowest terms.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Largest integer `m` with `2^m <= x`, for `x > 0`.
pub fn floor_log2(x: &Q) -> i64 {
    assert!(x.is_positive(), "floor_log2 of non-positive value");
    let (n, d) = (x.numer(), x.denom());
    let mut m = n.bits() as i64 - d.bits() as i64;
    // now 2^(m-1) < x < 2^(m+1)
    if &pow2(m) > x {
        m -= 1;
    }
    m
}

pub fn floor(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Q) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

pub fn to_u64(x: &Q) -> Option<u64> {
    if x.is_integer() {
        x.numer().to_u64()
    } else {
        None
    }
}

pub fn qmax(a: Q, b: Q) -> Q {
    if b > a {
        b
    } else {
        a
    }
}

pub fn qmin(a: Q, b: Q) -> Q {
    if b < a {
        b
    } else {
        a
    }
}


/// Serde adapter storing a rational as its `p/q` string.
pub mod qser {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod qvec {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(fmt_q).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_q(s).map_err(D::Error::custom)).collect()
    }
}

/// Serde adapter for `Option<Q>`.
pub mod qopt {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&fmt_q(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_q(&s).map_err(D::Error::custom)).transpose()
    }
}

/// Serde adapter for `Vec<BigInt>` as decimal strings.
pub mod zvec {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| D::Error::custom(format!("malformed integer {s:?}"))))
            .collect()
    }
}
