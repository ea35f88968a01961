//! Small dense-vector helpers used throughout the solvers.

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2_sq(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    norm2_sq(x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|a| a.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, a| m.max(a.abs()))
}

pub fn diff_norm2_sq(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn diff_norm2(x: &[f64], y: &[f64]) -> f64 {
    diff_norm2_sq(x, y).sqrt()
}

#[cfg_attr(not(test), allow(dead_code))] // heavily used by unit tests
pub fn diff_norm_inf(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
