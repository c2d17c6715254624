//! JSON for metric values: NaN as `null`, infinities as `"inf"` / `"-inf"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Text(String),
    Null(()),
}

fn to_repr(v: f64) -> Repr {
    if v.is_nan() {
        Repr::Null(())
    } else if v.is_infinite() {
        Repr::Text(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        Repr::Number(v)
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Number(v) => Ok(v),
        Repr::Null(()) => Ok(f64::NAN),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(E::custom(format!("bad metric value {s:?}"))),
        },
    }
}

pub mod value {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

pub mod map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, v)| (k, to_repr(*v))).collect::<BTreeMap<_, _>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Repr>::deserialize(d)?.into_iter().map(|(k, r)| Ok((k, from_repr(r)?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct M(#[serde(with = "map")] BTreeMap<String, f64>);

    #[test]
    fn special_values_round_trip() {
        let m = M(BTreeMap::from([("a".into(), f64::NAN), ("b".into(), f64::INFINITY), ("c".into(), 0.25)]));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"a":null,"b":"inf","c":0.25}"#);
        let back: M = serde_json::from_str(&s).unwrap();
        assert!(back.0["a"].is_nan());
        assert_eq!(back.0["b"], f64::INFINITY);
        assert_eq!(back.0["c"], 0.25);
    }
}
