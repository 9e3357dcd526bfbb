use super::series::IrregularSeries;
use crate::error::{Error, Result};

/// Hayashi-Yoshida covariance: the sum of increment products `dX_i * dY_j`
/// over every pair of observation intervals `(t_{i-1}, t_i]`, `(s_{j-1}, s_j]`
/// that overlap. Increments are uncentred.
///
/// Each x-interval overlaps a contiguous block of y-intervals, and consecutive
/// blocks share at most their boundary interval, so a single forward sweep
/// visits O(n + m) pairs. Pairs are accumulated in (i, j) order.
pub fn hy_covariance(x: &IrregularSeries, y: &IrregularSeries) -> Result<f64> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InvalidSeries("Hayashi-Yoshida needs at least 2 points per series".into()));
    }
    let (t, xv) = (x.times(), x.values());
    let (s, yv) = (y.times(), y.values());
    let mut total = 0.0;
    // first y-interval (index j, spanning s[j-1]..s[j]) that can still overlap
    let mut j_start = 1;
    for i in 1..t.len() {
        let (a, b) = (t[i - 1], t[i]);
        // skip y-intervals ending at or before a
        while j_start < s.len() && s[j_start] <= a {
            j_start += 1;
        }
        let dx = xv[i] - xv[i - 1];
        let mut j = j_start;
        while j < s.len() && s[j - 1] < b {
            total += dx * (yv[j] - yv[j - 1]);
            j += 1;
        }
    }
    Ok(total)
}
