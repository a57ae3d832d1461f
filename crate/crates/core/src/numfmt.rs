//! Fixed-precision float output shared by every text format the crate writes.

/// Rounds `x` to 9 significant digits. Non-finite values pass through.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let rounded: f64 = format!("{:.8e}", x).parse().unwrap_or(x);
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Formats `x` with at most 9 significant digits and no exponent.
pub fn fmt_sig9(x: f64) -> String {
    format!("{}", round_sig9(x))
}

/// Recursively rounds every float in a JSON value to 9 significant digits.
pub fn round_json(value: &mut serde_json::Value) {
    use serde_json::Value;
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig9(f)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_nine_digits() {
        assert_eq!(fmt_sig9(0.1), "0.1");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(123456789.4), "123456789");
    }

    #[test]
    fn json_rounding_leaves_integers() {
        let mut v = serde_json::json!({"a": 2, "b": [0.1234567891234, 5]});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":2,"b":[0.123456789,5]}"#);
    }
}
