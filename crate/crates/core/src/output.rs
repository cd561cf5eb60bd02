//! CSV-friendly number formatting and probability grids.

use crate::error::{Error, Result};

/// Formats `x` with `digits` significant digits, like C's `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve significant digits, the precision of every CSV column.
pub fn csv_num(x: f64) -> String {
    fmt_sig(x, 12)
}

/// `start, start + step, …, stop` with the endpoint included.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bad grid {start}:{stop}:{step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - stop).abs() < 1e-9 * step.max(1.0) {
            *last = stop;
        }
    }
    Ok(grid)
}

/// Parses `A:B:STEP`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidParameter(format!("grid {spec:?} is not A:B:STEP"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    uniform_grid(nums[0], nums[1], nums[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(0.5, 12), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(-2.0 / 3.0, 12), "-0.666666666667");
        assert_eq!(fmt_sig(123456.0, 12), "123456");
        assert_eq!(fmt_sig(1.5e-7, 12), "1.5e-07");
        assert_eq!(fmt_sig(1e13, 12), "1e+13");
        assert_eq!(fmt_sig(0.0001234, 3), "0.000123");
    }

    #[test]
    fn grids() {
        let g = uniform_grid(0.0, 0.5, 0.005).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 0.5);
        assert_eq!(parse_grid("0:0.5:0.05").unwrap().len(), 11);
        assert_eq!(uniform_grid(0.2, 0.2, 0.1).unwrap(), vec![0.2]);
        assert!(parse_grid("0:1").is_err());
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }
}
