use crate::error::{Error, Result};

/// Parses a non-negative decimal token. Only `.` is accepted as the decimal
/// separator; signs, commas, `inf` and `nan` are rejected.
pub(crate) fn non_negative(token: &str, line: usize) -> Result<f64> {
    let overflow = || Error::NumericOverflow {
        line,
        token: token.to_string(),
    };
    let bytes = token.as_bytes();
    if bytes.is_empty() || !bytes[0].is_ascii_digit() {
        return Err(overflow());
    }
    if !bytes
        .iter()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
    {
        return Err(overflow());
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(overflow()),
    }
}
