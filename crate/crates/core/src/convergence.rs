//! Convergence-order estimates and numeric formatting for result tables.

use crate::error::{Error, Result};

/// `log2(e_i / e_{i+1})` for consecutive entries of a halving sequence.
pub fn estimate_order(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two (error, h) pairs of equal length".into(),
        ));
    }
    if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument("errors must be positive and finite".into()));
    }
    for w in hs.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "mesh sizes must halve: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// C-style `%.16e` formatting (`1.0000000000000000e-03`).
pub fn format_e16(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{v:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(estimate_order(&[4e-3, 1e-3], &[0.1, 0.05]).unwrap(), vec![2.0]);
        assert_eq!(estimate_order(&[1e-3, 1e-3], &[0.1, 0.05]).unwrap(), vec![0.0]);
        assert!(estimate_order(&[0.0, 1e-3], &[0.1, 0.05]).is_err());
        assert!(estimate_order(&[-1.0, 1e-3], &[0.1, 0.05]).is_err());
        assert!(estimate_order(&[1.0], &[0.1]).is_err());
        assert!(estimate_order(&[1.0, 0.5], &[0.1, 0.07]).is_err());
    }

    #[test]
    fn c_style_exponent() {
        assert_eq!(format_e16(1e-3), "1.0000000000000000e-03");
        assert_eq!(format_e16(-2.5), "-2.5000000000000000e+00");
        assert_eq!(format_e16(0.0), "0.0000000000000000e+00");
        assert_eq!(format_e16(2f64.powi(1000)), "1.0715086071862673e+301");
    }
}
