//! JSON rendering shared by every report.

use serde::Serialize;
use serde_json::Value;

/// Significant digits kept in JSON output.
pub const SIG_DIGITS: usize = 12;

/// Round to `digits` significant decimal digits. Non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), SIG_DIGITS);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Serialize with floats rounded to [`SIG_DIGITS`] and object keys sorted.
pub fn to_json<T: Serialize + ?Sized>(report: &T) -> Result<Value, serde_json::Error> {
    serde_json::to_value(report).map(round_value)
}

pub fn to_json_string<T: Serialize + ?Sized>(report: &T) -> Result<String, serde_json::Error> {
    to_json(report).and_then(|v| serde_json::to_string_pretty(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_sig(-123456.7890123456, 12), -123456.789012);
        assert_eq!(round_sig(1.0e-20 / 3.0, 3), 3.33e-21);
        assert!(round_sig(f64::NAN, 12).is_nan());
        assert!(round_sig(-0.0, 12).is_sign_positive());
    }

    #[test]
    fn keys_sorted_and_nested_floats_rounded() {
        #[derive(Serialize)]
        struct R {
            zeta: f64,
            alpha: Vec<f64>,
            n: u32,
        }
        let s = to_json_string(&R { zeta: 2.0 / 3.0, alpha: vec![1.0 / 7.0], n: 3 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("0.666666666667"));
        assert!(s.contains("0.142857142857"));
        assert!(s.contains("\"n\": 3"));
    }
}
