//! Exact rational scalars and small dense-vector helpers.
//!
//! Every quantity in the crate is a [`Q`] (an arbitrary-precision fraction kept
//! in lowest terms). Vectors are plain `Vec<Q>`.

use std::cmp::Ordering;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type Vector = Vec<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qv(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q(x)).collect()
}

pub fn zeros(n: usize) -> Vector {
    vec![Q::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = zeros(n);
    v[i] = Q::one();
    v
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), dec);
        let n = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("bad decimal `{s}`")))?;
        let d = num_traits::pow(BigInt::from(10), dec.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(s)
        .map(Q::from_integer)
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))
}

/// `"p/q"` rendering; integers print without a denominator.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Decimal approximation with `sig` significant digits. Display only.
pub fn approx(x: &Q, sig: usize) -> String {
    let f = x.to_f64().unwrap_or(f64::NAN);
    if f == 0.0 || !f.is_finite() {
        return format!("{f}");
    }
    let mag = f.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - mag).max(0) as usize;
    let s = format!("{f:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Q, a: &[Q]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Q]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Lexicographic order on equal-length vectors.
pub fn lex_cmp(a: &[Q], b: &[Q]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Positive rescaling to a primitive integer vector. Zero stays zero.
pub fn primitive(a: &[Q]) -> Vector {
    if is_zero_vec(a) {
        return a.to_vec();
    }
    let mut l = BigInt::one();
    for x in a {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

pub fn sign(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(serde::de::Error::custom)
    }
}

pub mod serde_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vector, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        vec_from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Accepts `"p/q"` strings and JSON integers.
pub fn from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(q(i))
            } else {
                parse_q(&n.to_string())
            }
        }
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

pub fn vec_from_json(v: &serde_json::Value) -> Result<Vector> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("expected array of rationals, found {v}")))?
        .iter()
        .map(from_json)
        .collect()
}

pub fn vec_to_json(xs: &[Q]) -> serde_json::Value {
    serde_json::Value::Array(xs.iter().map(|x| serde_json::Value::String(fmt_q(x))).collect())
}
