//! Per-step simulation records and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};
use tiltrotor_core::control::ErrorState;

use crate::SimError;

/// Version tag written as the first CSV line.
pub const LOG_SCHEMA: &str = "tiltrotor-simlog/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub time: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub acceleration: [f64; 3],
    /// `[w, x, y, z]`.
    pub attitude: [f64; 4],
    pub angular_velocity: [f64; 3],
    pub angular_acceleration: [f64; 3],
    pub ref_position: [f64; 3],
    pub ref_velocity: [f64; 3],
    pub ref_attitude: [f64; 4],
    pub ref_angular_velocity: [f64; 3],
    pub error: ErrorState<f64>,
    pub alpha_ref: Vec<f64>,
    pub alpha: Vec<f64>,
    pub omega_ref: Vec<f64>,
    pub omega: Vec<f64>,
    pub eta_f: f64,
    pub kappa: f64,
    /// Stability condition sides; NaN when not applicable.
    pub stability_lhs: f64,
    pub stability_rhs: f64,
    pub regularized: bool,
    pub residual: f64,
    /// Actuator rates clipped by the rate limits in this step.
    pub saturated: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimLog {
    pub n_arms: usize,
    pub n_rotors: usize,
    pub rows: Vec<LogRow>,
}

const ERROR_BLOCKS: [&str; 8] = ["e_p", "e_p_int", "e_v", "e_a", "e_R", "e_R_int", "e_omega", "e_psi"];

fn xyz(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|a| format!("{prefix}_{a}"))
}

fn wxyz(prefix: &str) -> [String; 4] {
    ["w", "x", "y", "z"].map(|a| format!("{prefix}_{a}"))
}

impl SimLog {
    pub fn new(n_arms: usize, n_rotors: usize) -> Self {
        Self { n_arms, n_rotors, rows: Vec::new() }
    }

    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["time".to_string()];
        h.extend(xyz("p"));
        h.extend(xyz("v"));
        h.extend(xyz("a"));
        h.extend(wxyz("q"));
        h.extend(xyz("omega"));
        h.extend(xyz("psi"));
        h.extend(xyz("p_ref"));
        h.extend(xyz("v_ref"));
        h.extend(wxyz("q_ref"));
        h.extend(xyz("omega_ref_body"));
        for b in ERROR_BLOCKS {
            h.extend(xyz(b));
        }
        h.extend((0..self.n_arms).map(|i| format!("alpha_cmd_{i}")));
        h.extend((0..self.n_arms).map(|i| format!("alpha_{i}")));
        h.extend((0..self.n_rotors).map(|j| format!("rotor_cmd_{j}")));
        h.extend((0..self.n_rotors).map(|j| format!("rotor_{j}")));
        h.extend(
            ["eta_f", "kappa", "stability_lhs", "stability_rhs", "regularized", "residual", "saturated"].map(String::from),
        );
        h
    }

    fn record(row: &LogRow) -> Vec<String> {
        let mut r = vec![row.time];
        for v in [&row.position, &row.velocity, &row.acceleration] {
            r.extend(v);
        }
        r.extend(row.attitude);
        r.extend(row.angular_velocity);
        r.extend(row.angular_acceleration);
        r.extend(row.ref_position);
        r.extend(row.ref_velocity);
        r.extend(row.ref_attitude);
        r.extend(row.ref_angular_velocity);
        for b in row.error.blocks() {
            r.extend(b.iter());
        }
        r.extend(&row.alpha_ref);
        r.extend(&row.alpha);
        r.extend(&row.omega_ref);
        r.extend(&row.omega);
        r.extend([row.eta_f, row.kappa, row.stability_lhs, row.stability_rhs]);
        let mut out: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        out.push(u8::from(row.regularized).to_string());
        out.push(row.residual.to_string());
        out.push(row.saturated.to_string());
        out
    }

    /// Writes the schema line, the header and one record per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        writeln!(out, "# {LOG_SCHEMA}").map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header()).map_err(io)?;
        for row in &self.rows {
            let rec = Self::record(row);
            debug_assert_eq!(rec.len(), self.header().len());
            w.write_record(rec).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

fn io(e: impl std::fmt::Display) -> SimError {
    SimError::Config(format!("failed to write log: {e}"))
}
