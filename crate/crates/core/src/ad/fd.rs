//! Central-difference gradient checks.

use super::AdError;

/// Central difference of `f` along parameter `i` with step `h`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(f: &mut F, theta: &[f64], i: usize, h: f64) -> f64 {
    let mut p = theta.to_vec();
    p[i] = theta[i] + h;
    let fp = f(&p);
    p[i] = theta[i] - h;
    let fm = f(&p);
    (fp - fm) / (2.0 * h)
}

/// Max over components of `|analytic - fd| / (|analytic| + 1e-12)`.
pub fn fd_check<F: FnMut(&[f64]) -> f64>(f: F, theta: &[f64], analytic: &[f64], h: f64) -> Result<f64, AdError> {
    let all: Vec<usize> = (0..theta.len()).collect();
    fd_check_at(f, theta, analytic, &all, h)
}

/// [`fd_check`] restricted to the listed components.
pub fn fd_check_at<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    theta: &[f64],
    analytic: &[f64],
    indices: &[usize],
    h: f64,
) -> Result<f64, AdError> {
    if !(h > 0.0) {
        return Err(AdError::BadStep(h));
    }
    if analytic.len() != theta.len() {
        return Err(AdError::DimMismatch(analytic.len(), theta.len()));
    }
    let mut worst = 0.0f64;
    for &i in indices {
        let fd = central_difference(&mut f, theta, i, h);
        let rel = (analytic[i] - fd).abs() / (analytic[i].abs() + 1e-12);
        worst = worst.max(rel);
    }
    Ok(worst)
}
