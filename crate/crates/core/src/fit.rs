//! Power-law exponents by least squares in log–log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};

pub const MIN_RUNGS: usize = 5;
/// Distances below this are treated as exact zeros.
pub const COINCIDENT_BELOW: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub ladder: Vec<f64>,
    pub values: Vec<f64>,
    /// `log value − (intercept + slope · log t)` per rung.
    pub residuals: Vec<f64>,
}

/// Either a fitted exponent or the sentinel for a sequence of zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitOutcome {
    Fitted(ExponentFit),
    /// The two quantities agree at every rung; the order is `+∞`.
    Coincident { ladder: Vec<f64> },
}

impl FitOutcome {
    /// Fitted slope, or `+∞` for coincident data.
    pub fn slope(&self) -> f64 {
        match self {
            FitOutcome::Fitted(f) => f.slope,
            FitOutcome::Coincident { .. } => f64::INFINITY,
        }
    }

    pub fn fit(&self) -> Option<&ExponentFit> {
        match self {
            FitOutcome::Fitted(f) => Some(f),
            FitOutcome::Coincident { .. } => None,
        }
    }

    pub fn is_coincident(&self) -> bool {
        matches!(self, FitOutcome::Coincident { .. })
    }
}

/// Fits `value ≈ C · t^slope` over the ladder.
pub fn fit_power_law(ladder: &[f64], values: &[f64]) -> Result<FitOutcome> {
    if ladder.len() != values.len() {
        return Err(GermError::InvalidInput("ladder and values differ in length".into()));
    }
    if ladder.len() < MIN_RUNGS {
        return Err(GermError::InvalidInput(format!(
            "exponent fit needs at least {MIN_RUNGS} rungs, got {}",
            ladder.len()
        )));
    }
    if ladder.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(GermError::InvalidInput("ladder scales must be positive".into()));
    }
    if values.iter().all(|&v| v.abs() < COINCIDENT_BELOW) {
        return Ok(FitOutcome::Coincident { ladder: ladder.to_vec() });
    }
    if let Some(k) = values.iter().position(|&v| !(v >= COINCIDENT_BELOW && v.is_finite())) {
        return Err(GermError::Degenerate(format!(
            "value {:e} at t = {} cannot enter a log–log fit",
            values[k], ladder[k]
        )));
    }
    let xs: Vec<f64> = ladder.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(GermError::Degenerate("ladder has a single distinct scale".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(FitOutcome::Fitted(ExponentFit {
        slope,
        intercept,
        r2,
        ladder: ladder.to_vec(),
        values: values.to_vec(),
        residuals,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::dyadic_ladder;
    use proptest::prelude::*;

    #[test]
    fn pure_power_law_is_exact() {
        let ladder = dyadic_ladder(4, 14, 1);
        let values: Vec<f64> = ladder.iter().map(|t| 3.0 * t.powf(1.25)).collect();
        let f = fit_power_law(&ladder, &values).unwrap();
        let f = f.fit().unwrap();
        assert!((f.slope - 1.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
        assert!(f.r2 > 0.999_999);
    }

    #[test]
    fn zeros_are_coincident() {
        let ladder = dyadic_ladder(4, 10, 1);
        let f = fit_power_law(&ladder, &vec![0.0; ladder.len()]).unwrap();
        assert!(f.is_coincident());
        assert_eq!(f.slope(), f64::INFINITY);
    }

    #[test]
    fn partial_zeros_are_degenerate() {
        let ladder = dyadic_ladder(4, 10, 1);
        let mut v: Vec<f64> = ladder.clone();
        v[3] = 0.0;
        assert!(matches!(fit_power_law(&ladder, &v), Err(GermError::Degenerate(_))));
    }

    #[test]
    fn too_few_rungs() {
        let ladder = dyadic_ladder(4, 7, 1);
        assert!(fit_power_law(&ladder, &ladder).is_err());
    }

    proptest! {
        #[test]
        fn recovers_exponent(e in 0.5f64..4.0, c in 0.01f64..100.0) {
            let ladder = dyadic_ladder(3, 12, 1);
            let values: Vec<f64> = ladder.iter().map(|t| c * t.powf(e)).collect();
            let f = fit_power_law(&ladder, &values).unwrap();
            let f = f.fit().unwrap();
            prop_assert!((f.slope - e).abs() < 1e-9);
            prop_assert!(f.r2 >= 0.999 && f.r2 <= 1.0);
        }
    }
}
