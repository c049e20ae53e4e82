//! Fixed 17-significant-digit text for reals, used by every JSON and CSV writer.

use serde::Serializer;
use serde_json::value::RawValue;

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Non-finite values become `NaN`, `inf` or `-inf`; JSON writers map them to `null`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn raw(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { sig17(x) } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_some(&raw(*x))
}

pub fn ser_f64_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| raw(x)))
}

pub fn ser_f64_array4<S: Serializer>(xs: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
    ser_f64_slice(xs, s)
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.6), "5.9999999999999998e-1");
        assert_eq!(sig17(2.0), "2.0000000000000000e0");
        assert_eq!(sig17(-0.25), "-2.5000000000000000e-1");
        for x in [0.1, 1.0 / 3.0, std::f64::consts::SQRT_2, -7.25e-300] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_numbers_are_raw() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "ser_f64")]
            x: f64,
            #[serde(serialize_with = "ser_f64")]
            y: f64,
        }
        let s = serde_json::to_string(&T { x: 0.5, y: f64::NAN }).unwrap();
        assert_eq!(s, r#"{"x":5.0000000000000000e-1,"y":null}"#);
    }
}
