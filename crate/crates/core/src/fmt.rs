//! Number formatting for the text serialization formats.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Formats `x` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, exponent notation outside `[1e-5, 1e17)`. Enough digits to
/// round-trip any `f64` exactly.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..17).contains(&exponent) {
        let decimals = (16 - exponent) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

pub(crate) fn parse_field<T: FromStr>(field: &str, row: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("cannot parse {field:?}"),
    })
}

/// Reads `rows` lines of `cols` comma-separated numbers.
pub(crate) fn read_matrix<I>(lines: &mut I, rows: usize, cols: usize) -> Result<Vec<f64>>
where
    I: Iterator<Item = (usize, std::io::Result<String>)>,
{
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (index, line) = lines.next().ok_or(Error::Parse {
            row: 0,
            message: "unexpected end of input".into(),
        })?;
        let line = line?;
        let row = index + 1;
        let parsed: Vec<f64> = line
            .trim()
            .split(',')
            .map(|f| parse_field(f, row))
            .collect::<Result<_>>()?;
        if parsed.len() != cols {
            return Err(Error::Parse {
                row,
                message: format!("expected {cols} values, found {}", parsed.len()),
            });
        }
        values.extend(parsed);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.0), "-2");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(3.0f64.ln()), "1.0986122886681098");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02214076e23, -7.25, f64::MIN_POSITIVE] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
