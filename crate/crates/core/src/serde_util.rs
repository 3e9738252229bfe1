//! Serde adapters serializing big integers as decimal strings.
//!
//! JSON numbers lose precision past 2^53; every `BigNat` crossing the
//! wire is therefore written as a decimal string and parsed back
//! exactly.

use std::collections::BTreeMap;

use crate::digits::BigNat;

/// `BigNat` <-> decimal string.
pub mod bignat {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigNat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&value.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigNat, D::Error> {
        let s = String::deserialize(de)?;
        BigNat::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| de::Error::custom(format!("invalid decimal big integer: {s:?}")))
    }
}

/// `BTreeMap<i64, BigNat>` <-> JSON object with string keys and
/// decimal-string values.
pub mod bignat_map {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<i64, BigNat>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        ser.collect_map(map.iter().map(|(k, v)| (k.to_string(), v.to_str_radix(10))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<i64, BigNat>, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(de)?;
        let mut out = BTreeMap::new();
        for (k, v) in raw {
            let key: i64 = k
                .parse()
                .map_err(|_| de::Error::custom(format!("invalid integer key: {k:?}")))?;
            let value = BigNat::parse_bytes(v.as_bytes(), 10)
                .ok_or_else(|| de::Error::custom(format!("invalid decimal big integer: {v:?}")))?;
            out.insert(key, value);
        }
        Ok(out)
    }
}
