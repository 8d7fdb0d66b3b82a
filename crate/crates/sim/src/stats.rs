//! Box-plot statistics of tracking errors.

use serde::{Deserialize, Serialize};

use crate::log::SimLog;

pub const AXIS_NAMES: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub axis: String,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    /// Most extreme samples within 1.5 IQR of the quartiles.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
}

/// Position errors [m] on the first three axes, attitude errors [rad] on
/// the last three.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingStats {
    pub samples: usize,
    pub axes: Vec<AxisStats>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn axis_stats(axis: &str, values: &[f64]) -> AxisStats {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        let nan = f64::NAN;
        return AxisStats { axis: axis.into(), median: nan, lower_quartile: nan, upper_quartile: nan, lower_whisker: nan, upper_whisker: nan };
    }
    v.sort_by(f64::total_cmp);
    let (q1, q2, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
    let reach = 1.5 * (q3 - q1);
    let lower_whisker = v.iter().copied().find(|x| *x >= q1 - reach).unwrap_or(q1);
    let upper_whisker = v.iter().rev().copied().find(|x| *x <= q3 + reach).unwrap_or(q3);
    AxisStats { axis: axis.into(), median: q2, lower_quartile: q1, upper_quartile: q3, lower_whisker, upper_whisker }
}

pub fn stats(log: &SimLog) -> TrackingStats {
    let axes = (0..6)
        .map(|k| {
            let vals: Vec<f64> =
                log.rows.iter().map(|r| if k < 3 { r.error.e_p[k] } else { r.error.e_r[k - 3] }).collect();
            axis_stats(AXIS_NAMES[k], &vals)
        })
        .collect();
    TrackingStats { samples: log.len(), axes }
}

/// `(t, eta_f)` per logged step.
pub fn efficiency_timeline(log: &SimLog) -> Vec<(f64, f64)> {
    log.rows.iter().map(|r| (r.time, r.eta_f)).collect()
}

/// `(t, kappa)` per logged step.
pub fn kappa_timeline(log: &SimLog) -> Vec<(f64, f64)> {
    log.rows.iter().map(|r| (r.time, r.kappa)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_error() {
        let s = axis_stats("x", &[0.2; 50]);
        assert_eq!(s.median, 0.2);
        assert_eq!(s.upper_quartile - s.lower_quartile, 0.0);
        assert_eq!((s.lower_whisker, s.upper_whisker), (0.2, 0.2));
    }

    #[test]
    fn uniform_grid_quartiles() {
        // Evenly spaced samples of U(a, b): the quartiles of the grid are
        // exactly the distribution quartiles.
        let (a, b, n) = (-1.0, 3.0, 4001);
        let v: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
        let s = axis_stats("x", &v);
        assert_relative_eq!(s.lower_quartile, a + 0.25 * (b - a), epsilon = 1e-12);
        assert_relative_eq!(s.median, a + 0.5 * (b - a), epsilon = 1e-12);
        assert_relative_eq!(s.upper_quartile, a + 0.75 * (b - a), epsilon = 1e-12);
        assert_eq!((s.lower_whisker, s.upper_whisker), (a, b));
    }

    #[test]
    fn outliers_fall_outside_whiskers() {
        let mut v: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
        v.push(10.0);
        let s = axis_stats("x", &v);
        assert!(s.upper_whisker < 1.0);
    }

    proptest! {
        #[test]
        fn ordering(v in prop::collection::vec(-10.0..10.0f64, 1..200)) {
            let s = axis_stats("x", &v);
            prop_assert!(s.lower_whisker <= s.lower_quartile);
            prop_assert!(s.lower_quartile <= s.median && s.median <= s.upper_quartile);
            prop_assert!(s.upper_quartile <= s.upper_whisker);
        }
    }
}
