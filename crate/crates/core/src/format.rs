//! Locale-independent numeric formatting with 17 significant digits.

use serde::Serializer;
use serde_json::value::RawValue;

/// `x` in scientific notation with 17 significant digits, or `null` when
/// non-finite.
pub fn sig17_string(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Like [`sig17_string`] but without the JSON `null` fallback, for CSV.
pub fn sig17_csv(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(sig17_string(*x)).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, s)
}

pub fn sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

pub fn sig17_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        let raw = RawValue::from_string(sig17_string(*x)).map_err(serde::ser::Error::custom)?;
        seq.serialize_element(&raw)?;
    }
    seq.end()
}

pub fn sig17_map<S: Serializer>(
    map: &std::collections::BTreeMap<String, f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(map.len()))?;
    for (k, v) in map {
        let raw = RawValue::from_string(sig17_string(*v)).map_err(serde::ser::Error::custom)?;
        m.serialize_entry(k, &raw)?;
    }
    m.end()
}
