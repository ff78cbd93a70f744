//! Small numerical helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SwapError};

/// Neumaier-compensated running sum. Order of `add` calls fixes the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn mean(v: &[f64]) -> f64 {
    kahan_sum(v.iter().copied()) / v.len() as f64
}

/// Least squares `design * beta ~ target` via Householder QR.
/// Returns the coefficients and the residual sum of squares.
pub fn least_squares(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(SwapError::InsufficientData(format!("{rows} rows for {cols} coefficients")));
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let scale = (0..cols).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|j| r[(j, j)].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(SwapError::SingularDesign);
    }
    let qt_b = qr.q().transpose() * target;
    let beta = r.solve_upper_triangular(&qt_b).ok_or(SwapError::SingularDesign)?;
    let resid = target - design * &beta;
    let rss = kahan_sum(resid.iter().map(|e| e * e));
    Ok((beta, rss))
}

/// Polynomial least squares of `y` on `x`; coefficients are returned highest
/// degree first, matching the model coefficient order.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let design = DMatrix::from_fn(n, degree + 1, |i, j| x[i].powi((degree - j) as i32));
    let target = DVector::from_column_slice(y);
    let (beta, _) = least_squares(&design, &target).map_err(|e| match e {
        SwapError::SingularDesign => SwapError::DegenerateDesign("x values do not span the polynomial basis".into()),
        other => other,
    })?;
    Ok(beta.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(v), 2.0);
    }

    #[test]
    fn polyfit_exact_line_and_parabola() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = polyfit(&x, &y, 1).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v * v - v + 3.0).collect();
        let c = polyfit(&x, &y, 2).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 1.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn polyfit_degenerate() {
        let x = [1.0, 1.0, 1.0];
        assert!(matches!(polyfit(&x, &[1.0, 2.0, 3.0], 1), Err(SwapError::DegenerateDesign(_))));
    }
}
