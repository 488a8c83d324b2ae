//! Ordinary least squares on a straight line.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
    /// Coefficient of determination; 1 for a perfect fit, including flat data.
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("{} abscissae vs {} ordinates", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidRange(format!("need >= 2 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidRange("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(LineFit { slope, intercept, residual_norm: ss_res.sqrt(), r_squared })
}

/// A fitted dimension and the window of samples it was fitted on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub dimension: f64,
    /// In log2 units of the fitted quantity.
    pub intercept: f64,
    pub residual_norm: f64,
    pub r_squared: f64,
    /// Inclusive sample indices.
    pub used_range: (usize, usize),
    pub n_points: usize,
}

impl FitResult {
    pub(crate) fn from_line(line: LineFit, used_range: (usize, usize)) -> Self {
        Self {
            dimension: line.slope,
            intercept: line.intercept,
            residual_norm: line.residual_norm,
            r_squared: line.r_squared,
            used_range,
            n_points: used_range.1 - used_range.0 + 1,
        }
    }
}
