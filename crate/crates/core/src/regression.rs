//! Ordinary least squares on a single regressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// True when the responses were constant; slope is then 0 and `r2` is 0.
    pub degenerate: bool,
}

/// Fits `y = slope * x + intercept`. Needs at least two distinct `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("need >= 2 paired samples, got {}/{}", xs.len(), ys.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= f64::EPSILON * (1.0 + mx * mx) * n {
        return Err(Error::DegenerateFit("all regressor values equal".into()));
    }
    if syy <= 1e-24 * (1.0 + my * my) * n {
        return Ok(LinearFit {
            slope: 0.0,
            intercept: my,
            r2: 0.0,
            degenerate: true,
        });
    }
    let slope = sxy / sxx;
    let r2 = (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0);
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = ols(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response_is_flagged() {
        let f = ols(&[0.0, 1.0, 2.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert!(f.degenerate);
    }

    #[test]
    fn constant_regressor_is_an_error() {
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(ols(&[1.0], &[0.0]).is_err());
    }
}
