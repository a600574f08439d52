//! Per-event parameter files.
//!
//! Whitespace-separated values in event-id order; `#` starts a comment that
//! runs to the end of the line. A value is a decimal number (`0.25`, `1e-3`)
//! or a ratio of two decimals (`1/3`). Non-finite values are rejected.

use crate::error::{ParseError, ParseErrorKind};

pub fn parse_parameters(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let value = parse_value(token)
                .ok_or_else(|| ParseError::new(idx + 1, ParseErrorKind::InvalidValue(token.to_string())))?;
            values.push(value);
        }
    }
    Ok(values)
}

pub fn parse_value(token: &str) -> Option<f64> {
    let finite = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let value = match token.split_once('/') {
        Some((num, den)) => {
            let den = finite(den).filter(|d| *d != 0.0)?;
            finite(num)? / den
        }
        None => finite(token)?,
    };
    value.is_finite().then_some(value)
}

/// Writes values one per line with full round-trip precision.
pub fn format_parameters(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}\n")).collect()
}
