#![allow(dead_code)]

use std::path::PathBuf;

use swapfit_core::data::{align_pair, load_series_csv, scale_pair};
use swapfit_core::gof::volodin_pdf;
use swapfit_core::SeriesPair;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The bundled snapshot, aligned and scaled to trillions.
pub fn bundled_pair() -> SeriesPair {
    let dir = data_dir();
    let gdp = load_series_csv(dir.join("gdp_quarterly.csv"), "DATE", "NGDPSAXDCUSQ").unwrap();
    let debt = load_series_csv(dir.join("debt_quarterly.csv"), "DATE", "GFDEBTN").unwrap();
    scale_pair(&align_pair(&gdp, &debt).unwrap(), 1e-6).unwrap()
}

pub fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-11, 40)
}

/// Integral of the density over (0, 1). The power-law endpoint singularities
/// are removed by substituting x = s^(1/alpha) on the lower half and
/// 1 - x = s^(1/beta) on the upper half; the transformed integrands are
/// smooth and the density is only evaluated, never integrated in closed form.
pub fn pdf_mass(alpha: f64, beta: f64) -> f64 {
    let lower = |s: f64| {
        let x = s.powf(1.0 / alpha);
        if x <= 0.0 {
            // limits of pdf * dx/ds as s -> 0
            let gamma = alpha / (alpha + beta);
            return 1.0 - gamma;
        }
        volodin_pdf(x, alpha, beta).unwrap() * x / (alpha * s)
    };
    let upper = |s: f64| {
        let t = s.powf(1.0 / beta);
        volodin_pdf(1.0 - t, alpha, beta).unwrap() * t / (beta * s)
    };
    // 1 - t cannot be formed accurately for tiny t; there the transformed
    // integrand is gamma * (1 + O(t)), so the last stretch is added directly.
    let s_cut = 1e-8f64.powf(beta);
    let tail = alpha / (alpha + beta) * s_cut;
    let s_mid_lower = 0.5f64.powf(alpha);
    let s_mid_upper = 0.5f64.powf(beta);
    integrate(&lower, 0.0, s_mid_lower) + integrate(&upper, s_cut, s_mid_upper) + tail
}

/// Residual sum of squares of y on the columns of `design`, from the normal
/// equations solved by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn rss_by_normal_equations(design: &[Vec<f64>], y: &[f64]) -> f64 {
    let k = design[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &t) in design.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * t;
        }
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for j in c..=k {
                a[r][j] -= f * a[c][j];
            }
        }
    }
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| a[i][j] * beta[j]).sum();
        beta[i] = (a[i][k] - s) / a[i][i];
    }
    design
        .iter()
        .zip(y)
        .map(|(row, &t)| {
            let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (t - fit).powi(2)
        })
        .sum()
}
