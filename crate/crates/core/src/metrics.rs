//! Relative error and mean SSIM.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// `||ref - rec|| / ||ref||` over the complex samples.
pub fn relative_error(reference: &ImageGrid, rec: &ImageGrid) -> Result<f64> {
    reference.check_same(rec)?;
    let denom = reference.norm();
    if denom == 0.0 {
        return Err(Error::InvalidParameter("relative error against an all-zero reference".into()));
    }
    Ok((reference - rec).norm() / denom)
}

const WIN: usize = 8;

/// Mean SSIM over all 8x8 windows fully inside the image, computed on moduli.
/// The dynamic range `L` is `max - min` of the reference (1 if it is constant).
pub fn ssim(reference: &ImageGrid, rec: &ImageGrid) -> Result<f64> {
    let m = reference.modulus();
    let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    ssim_with_range(reference, rec, range)
}

/// [`ssim`] with an explicit dynamic range. Window statistics use the
/// unbiased `1/(N-1)` (co)variance.
pub fn ssim_with_range(reference: &ImageGrid, rec: &ImageGrid, range: f64) -> Result<f64> {
    reference.check_same(rec)?;
    let n = reference.n();
    if n < WIN {
        return Err(Error::InvalidParameter(format!("SSIM needs at least {WIN}x{WIN} pixels, got {n}")));
    }
    let x = reference.modulus();
    let y = rec.modulus();
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    // Summed-area tables of x, y, x^2, y^2, xy with a zero border row/column.
    let w = n + 1;
    let mut tables = vec![[0.0f64; 5]; w * w];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (x[i * n + j], y[i * n + j]);
            let vals = [a, b, a * a, b * b, a * b];
            let up = tables[i * w + j + 1];
            let left = tables[(i + 1) * w + j];
            let diag = tables[i * w + j];
            let cell = &mut tables[(i + 1) * w + j + 1];
            for k in 0..5 {
                cell[k] = vals[k] + up[k] + left[k] - diag[k];
            }
        }
    }
    let count = (WIN * WIN) as f64;
    let windows = n - WIN + 1;
    let mut total = 0.0;
    for i in 0..windows {
        for j in 0..windows {
            let s = |k: usize| {
                tables[(i + WIN) * w + j + WIN][k] - tables[i * w + j + WIN][k] - tables[(i + WIN) * w + j][k]
                    + tables[i * w + j][k]
            };
            let (sx, sy, sxx, syy, sxy) = (s(0), s(1), s(2), s(3), s(4));
            let (mx, my) = (sx / count, sy / count);
            let vx = ((sxx - sx * mx) / (count - 1.0)).max(0.0);
            let vy = ((syy - sy * my) / (count - 1.0)).max(0.0);
            let cxy = (sxy - sx * my) / (count - 1.0);
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    Ok(total / (windows * windows) as f64)
}
