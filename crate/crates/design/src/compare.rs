use serde::{Deserialize, Serialize};

use crate::optimize::DesignResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub a: f64,
    pub b: f64,
    /// `b / a`; `NaN` when `a` is zero.
    pub ratio: f64,
}

/// Side-by-side envelope and inertia metrics of two designs.
pub fn compare(a: &DesignResult, b: &DesignResult) -> Vec<ComparisonRow> {
    let metrics = |r: &DesignResult| {
        vec![
            ("f_min", r.force.min),
            ("f_max", r.force.max),
            ("f_vol", r.force.volume),
            ("tau_min", r.torque.min),
            ("tau_max", r.torque.max),
            ("tau_vol", r.torque.volume),
            ("eta_hover_min", r.hover.eta_min),
            ("eta_hover_max", r.hover.eta_max),
            ("J_xx", r.inertia[0]),
            ("J_yy", r.inertia[1]),
            ("J_zz", r.inertia[2]),
        ]
    };
    metrics(a)
        .into_iter()
        .zip(metrics(b))
        .map(|((name, x), (_, y))| ComparisonRow {
            metric: name.to_string(),
            a: x,
            b: y,
            ratio: if x != 0.0 { y / x } else { f64::NAN },
        })
        .collect()
}
