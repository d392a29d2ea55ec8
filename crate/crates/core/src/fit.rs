//! Small least-squares fits used by the oracles.

use nalgebra::{DMatrix, DVector};

/// Ordinary least-squares line `y = slope·t + intercept`.
///
/// Returns `None` for fewer than two samples or zero spread in `t`.
pub fn fit_line(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = t.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mt = t.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = t.iter().map(|ti| (ti - mt).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - mt) * (yi - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mt))
}

/// Quadratic `y = c[0] + c[1]·t + c[2]·t²` by least squares.
///
/// The design matrix is built on centered, scaled time for conditioning and
/// the coefficients are mapped back to raw `t`.
pub fn fit_quadratic(t: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    let n = t.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let mean = t.iter().sum::<f64>() / n as f64;
    let half_span = t.iter().map(|ti| (ti - mean).abs()).fold(0.0_f64, f64::max);
    if !(half_span > 0.0) {
        return None;
    }
    let a = DMatrix::from_fn(n, 3, |i, j| ((t[i] - mean) / half_span).powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * max_sv {
        return None;
    }
    let sol = svd.solve(&b, 0.0).ok()?;
    // y = s0 + s1 u + s2 u², u = (t - m)/w
    let (s0, s1, s2) = (sol[0], sol[1] / half_span, sol[2] / (half_span * half_span));
    Some([s0 - s1 * mean + s2 * mean * mean, s1 - 2.0 * s2 * mean, s2])
}

pub fn eval_quadratic(c: &[f64; 3], t: f64) -> f64 {
    c[0] + t * (c[1] + t * c[2])
}

/// Rational fit `y = (a + b·s) / (1 + g·s)`, returned as `[a, b, g]`.
///
/// Multiplying out gives `y = a + b·s − g·y·s`, which is linear in the
/// coefficients. Columns are scaled to unit max before solving.
pub fn fit_mobius(s: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    let n = s.len();
    if n < 4 || n != y.len() {
        return None;
    }
    let column = |i: usize, j: usize| match j {
        0 => 1.0,
        1 => s[i],
        _ => -y[i] * s[i],
    };
    let scale: Vec<f64> = (0..3)
        .map(|j| (0..n).map(|i| column(i, j).abs()).fold(0.0_f64, f64::max))
        .collect();
    if scale.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let a = DMatrix::from_fn(n, 3, |i, j| column(i, j) / scale[j]);
    let svd = a.svd(true, true);
    if svd.singular_values.min() <= 1e-12 * svd.singular_values.max() {
        return None;
    }
    let sol = svd.solve(&DVector::from_column_slice(y), 0.0).ok()?;
    let c = [sol[0] / scale[0], sol[1] / scale[1], sol[2] / scale[2]];
    c.iter().all(|v| v.is_finite()).then_some(c)
}
