use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OlsFit {
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub slope_p_value: f64,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
}

impl OlsFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Two-sided p-value of a t statistic, with the degenerate cases of a zero
/// standard error resolved as "no evidence" (zero estimate) or "certain".
fn two_sided_p(estimate: f64, std_error: f64, df: f64) -> f64 {
    if std_error == 0.0 || !std_error.is_finite() {
        return if estimate == 0.0 { 1.0 } else { 0.0 };
    }
    let t = (estimate / std_error).abs();
    let dist = StudentsT::new(0.0, 1.0, df).expect("degrees of freedom are positive");
    (2.0 * dist.sf(t)).min(1.0)
}

fn adjusted(r_squared: f64, n: usize, predictors: usize) -> f64 {
    1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (n as f64 - predictors as f64 - 1.0)
}

/// Simple linear regression of `y` on `x`.
///
/// A constant response gives `R^2 = 0`. The slope p-value uses the t
/// distribution with `n - 2` degrees of freedom.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n < 3 {
        return Err(Error::Regression(format!("need at least 3 observations, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Regression("predictor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 0.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    let slope_std_error = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(OlsFit {
        n,
        slope,
        intercept,
        slope_std_error,
        slope_p_value: two_sided_p(slope, slope_std_error, nf - 2.0),
        r_squared,
        adjusted_r_squared: adjusted(r_squared, n, 1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiFit {
    pub n: usize,
    /// Intercept first, then one coefficient per predictor.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
}

/// Multiple regression of `y` on the given predictor columns plus an
/// intercept, solved through a QR factorization of the design matrix.
pub fn ols_multi(predictors: &[&[f64]], y: &[f64]) -> Result<MultiFit> {
    let n = y.len();
    let k = predictors.len();
    if let Some(bad) = predictors.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    if n < k + 2 {
        return Err(Error::Regression(format!(
            "need at least {} observations for {k} predictors, got {n}",
            k + 2
        )));
    }
    let design = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { predictors[j - 1][i] });
    let target = DVector::from_column_slice(y);
    let qr = design.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax().max(1.0);
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(Error::Regression("predictors are collinear or constant".into()));
    }
    let qty = qr.q().transpose() * &target;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Regression("singular design".into()))?;
    let residuals = &target - &design * &beta;
    let ssr = residuals.norm_squared();
    let my = target.mean();
    let syy: f64 = target.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if syy == 0.0 { 0.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    let df = (n - k - 1) as f64;
    let sigma2 = ssr / df;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Regression("singular design".into()))?;
    // (X'X)^-1 = R^-1 R^-T
    let cov_diag: Vec<f64> = (0..=k).map(|j| r_inv.row(j).norm_squared()).collect();
    let std_errors: Vec<f64> = cov_diag.iter().map(|c| (sigma2 * c).sqrt()).collect();
    let p_values = beta
        .iter()
        .zip(&std_errors)
        .map(|(&b, &se)| two_sided_p(b, se, df))
        .collect();
    Ok(MultiFit {
        n,
        coefficients: beta.iter().copied().collect(),
        std_errors,
        p_values,
        r_squared,
        adjusted_r_squared: adjusted(r_squared, n, k),
    })
}
