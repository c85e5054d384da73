//! Locally weighted linear regression with tricube weights.

use crate::error::{Error, Result};

pub const DEFAULT_FRACTION: f64 = 0.95;

/// Smooths `points` by a single pass of local linear fits.
///
/// Each point is refitted on its `ceil(fraction * n)` nearest neighbours in
/// `x`, weighted by the tricube kernel scaled to the farthest of them. The
/// curve is returned sorted by `x`.
pub fn lowess(points: &[(f64, f64)], fraction: f64) -> Result<Vec<(f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::param("points", format!("need at least 3 points, got {}", points.len())));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::param("points", "coordinates must be finite"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len();
    let k = ((fraction * n as f64).ceil() as usize).clamp(2, n);

    let mut out = Vec::with_capacity(n);
    let mut dist = vec![0.0; n];
    for &(x0, _) in &pts {
        for (d, &(x, _)) in dist.iter_mut().zip(&pts) {
            *d = (x - x0).abs();
        }
        let mut sorted = dist.clone();
        sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
        let h = sorted[k - 1];
        out.push((x0, local_fit(&pts, &dist, h, x0)));
    }
    Ok(out)
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let c = 1.0 - u * u * u;
        c * c * c
    }
}

fn local_fit(pts: &[(f64, f64)], dist: &[f64], h: f64, x0: f64) -> f64 {
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let weights: Vec<f64> = dist
        .iter()
        .map(|&d| if h > 0.0 { tricube(d / h) } else if d == 0.0 { 1.0 } else { 0.0 })
        .collect();
    for (&w, &(x, y)) in weights.iter().zip(pts) {
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&w, &(x, y)) in weights.iter().zip(pts) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    // all weight on one abscissa: the local fit is a weighted mean
    if sxx <= 1e-12 * sw * (1.0 + mx * mx) {
        return my;
    }
    my + sxy / sxx * (x0 - mx)
}
