//! Serialization of extended reals: non-finite values are written as the
//! strings `"inf"`, `"-inf"` and `"nan"` so that JSON output never loses them.

use serde::ser::{SerializeSeq, SerializeTuple};
use serde::Serializer;

fn put<S: Serializer>(x: f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

struct Ext(f64);

impl serde::Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        put(self.0, s)
    }
}

pub fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    put(*x, s)
}

pub fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => put(*v, s),
        None => s.serialize_none(),
    }
}

pub fn reals<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Ext(*x))?;
    }
    seq.end()
}

pub fn pairs<S: Serializer>(xs: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &(a, b) in xs {
        seq.serialize_element(&(Ext(a), Ext(b)))?;
    }
    seq.end()
}

pub fn real_map<S: Serializer>(
    m: &std::collections::BTreeMap<String, f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &Ext(*v))?;
    }
    map.end()
}

pub fn four<S: Serializer>(xs: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(4)?;
    for x in xs {
        t.serialize_element(&Ext(*x))?;
    }
    t.end()
}
