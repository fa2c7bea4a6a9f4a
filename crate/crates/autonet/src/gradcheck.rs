//! Finite-difference gradient verification.
//!
//! Numeric derivatives use central differences `(f(x+h) - f(x-h)) / (2h)` in
//! f64. Agreement is scored with the relative error
//! `|a - n| / max(1, |a|, |n|)`, which behaves like an absolute error near
//! zero and a relative one for large magnitudes.

/// Central-difference derivative of `f` w.r.t. each listed coordinate of `x`.
/// `x` is restored to its original values afterwards.
pub fn central_difference_at<F>(mut f: F, x: &mut [f64], indices: &[usize], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let saved = x[i];
        x[i] = saved + h;
        let plus = f(x);
        x[i] = saved - h;
        let minus = f(x);
        x[i] = saved;
        out.push((plus - minus) / (2.0 * h));
    }
    out
}

pub fn central_difference<F>(f: F, x: &mut [f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let indices: Vec<usize> = (0..x.len()).collect();
    central_difference_at(f, x, &indices, h)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / 1.0f64.max(analytic.abs()).max(numeric.abs())
}

#[derive(Clone, Copy, Debug)]
pub struct GradReport {
    pub max_rel_err: f64,
    pub worst_index: usize,
    pub checked: usize,
}

impl GradReport {
    pub fn within(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

pub fn compare_gradients(analytic: &[f64], numeric: &[f64]) -> GradReport {
    assert_eq!(
        analytic.len(),
        numeric.len(),
        "gradient vectors must align"
    );
    let mut report = GradReport {
        max_rel_err: 0.0,
        worst_index: 0,
        checked: analytic.len(),
    };
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let e = relative_error(a, n);
        if e > report.max_rel_err {
            report.max_rel_err = e;
            report.worst_index = i;
        }
    }
    report
}

pub const DEFAULT_STEP: f64 = 1e-5;
pub const OP_TOLERANCE: f64 = 1e-4;
pub const NET_TOLERANCE: f64 = 1e-3;
