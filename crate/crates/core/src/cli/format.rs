//! Number formatting shared by every report: 17 significant digits so that
//! printed values round-trip exactly.

use serde_json::{Number, Value};

/// `x` with 17 significant digits, e.g. `5.9999999999999998e-1` for 0.6.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number carrying the same 17-digit text. Non-finite values become
/// `null`.
pub fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    num(x)
        .parse::<Number>()
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn json_nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

/// Builds a CSV document from a header and rows of preformatted cells.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.into_iter().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn pretty_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
