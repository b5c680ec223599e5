//! JSON helpers that write reals with 17 significant digits.

use serde::ser::{SerializeSeq, Serializer};
use serde_json::value::RawValue;

/// Formats a finite real with 17 significant digits in JSON number syntax.
pub fn sig17(x: f64) -> String {
    assert!(x.is_finite(), "cannot serialize non-finite value {x}");
    format!("{x:.16e}")
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(sig17(x)).expect("formatted real is valid JSON")
}

pub fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&raw(*x), s)
}

pub fn reals<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&raw(x))?;
    }
    seq.end()
}

pub fn pairs<S: Serializer>(xs: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &(a, b) in xs {
        seq.serialize_element(&[raw(a), raw(b)])?;
    }
    seq.end()
}
