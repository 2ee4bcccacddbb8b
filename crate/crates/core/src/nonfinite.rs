//! Serde helpers writing non-finite floats as the strings `"inf"`,
//! `"-inf"` and `"nan"`; JSON has no literal for them.

use serde::ser::SerializeSeq;
use serde::Serializer;

fn name(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

pub fn float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(name(*x))
    }
}

pub fn floats<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    struct One(f64);
    impl serde::Serialize for One {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            float(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&One(x))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    #[derive(serde::Serialize)]
    struct T {
        #[serde(serialize_with = "super::float")]
        a: f64,
        #[serde(serialize_with = "super::floats")]
        b: Vec<f64>,
    }

    #[test]
    fn writes_strings_for_non_finite() {
        let t = T { a: f64::INFINITY, b: vec![1.5, f64::NEG_INFINITY] };
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"a":"inf","b":[1.5,"-inf"]}"#);
    }
}
