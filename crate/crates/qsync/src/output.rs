//! CSV serialization of the observable records.
//!
//! All files are built in memory and written in one shot, so a failed run
//! never leaves a partial file behind. Numbers are formatted with 17
//! significant digits, enough to round-trip f64 exactly.

use num_complex::Complex64;
use std::io;
use std::path::Path;

use crate::state::{PhaseSpaceGrid, SyncTrace};

/// Round-trip precision float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "NaN".to_string(),
    }
}

pub fn amplitude_csv(tau_grid: &[f64], values: &[Complex64]) -> String {
    let mut s = String::from("tau,re_E,im_E,abs_E\n");
    for (tau, e) in tau_grid.iter().zip(values) {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(*tau),
            fmt_f64(e.re),
            fmt_f64(e.im),
            fmt_f64(e.norm())
        ));
    }
    s
}

pub fn husimi_csv(grid: &PhaseSpaceGrid) -> String {
    let mut s = String::from("theta,phi,Q\n");
    for (i, theta) in grid.theta_nodes.iter().enumerate() {
        for (j, phi) in grid.phi_nodes.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(*theta),
                fmt_f64(*phi),
                fmt_f64(grid.value(i, j))
            ));
        }
    }
    s
}

pub fn sync_csv(trace: &SyncTrace) -> String {
    let mut s = String::from("tau,phi,S,peak_phase,peak_height\n");
    for (i, tau) in trace.tau_grid.iter().enumerate() {
        for (k, phi) in trace.phi_probes.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(*tau),
                fmt_f64(*phi),
                fmt_f64(trace.s_values[k][i]),
                fmt_opt(trace.peak_phase[i]),
                fmt_f64(trace.peak_height[i])
            ));
        }
    }
    s
}

/// Q probe curves used by the trace figures: the initial-peak point
/// (theta = pi/2, phi = 0) and the pole (theta = 0, phi-independent).
pub fn qprobe_csv(tau_grid: &[f64], q_equator: &[f64], q_pole: &[f64]) -> String {
    let mut s = String::from("tau,Q_equator_phi0,Q_pole\n");
    for i in 0..tau_grid.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(tau_grid[i]),
            fmt_f64(q_equator[i]),
            fmt_f64(q_pole[i])
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub case_id: usize,
    pub max_divergence: f64,
    pub pass: bool,
}

pub fn verify_csv(rows: &[VerifyRow]) -> String {
    let mut s = String::from("case_id,max_divergence,pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{}\n",
            r.case_id,
            fmt_f64(r.max_divergence),
            if r.pass { "true" } else { "false" }
        ));
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1.5e9, 2.5e-312, 0.0] {
            let parsed: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn amplitude_header_and_rows() {
        let csv = amplitude_csv(&[0.0], &[Complex64::new(1.0, 0.0)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "tau,re_E,im_E,abs_E");
        let row = lines.next().unwrap();
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields, vec![0.0, 1.0, 0.0, 1.0]);
    }
}
