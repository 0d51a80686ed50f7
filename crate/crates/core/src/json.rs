//! Serde helpers. Rationals serialize as `{"num": "...", "den": "..."}` and
//! big integers as decimal strings so no precision is lost in JSON.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl From<&Ratio<u128>> for RationalJson {
    fn from(r: &Ratio<u128>) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

pub fn big_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    RationalJson::from(r).serialize(s)
}

pub fn ratio_u128<S: Serializer>(r: &Ratio<u128>, s: S) -> Result<S::Ok, S::Error> {
    RationalJson::from(r).serialize(s)
}

pub fn u128_as_string<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn biguint_as_string<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn big_ratio_map<S: Serializer>(
    m: &BTreeMap<u64, BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(&k.to_string(), &RationalJson::from(v))?;
    }
    map.end()
}

pub fn ratio_u128_to_f64(r: &Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn big_ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
