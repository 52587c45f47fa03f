//! Reduced density matrix and phase-space observables.
//!
//! The Bloch-sphere phase space is parameterized by the spin-coherent state
//! `|theta, phi> = cos(theta/2)|e> + sin(theta/2) e^{i phi} |g>`. The Husimi
//! Q-function is `(1/2pi) <theta,phi| rho |theta,phi>` and the
//! synchronization measure is its theta-integrated, offset-subtracted
//! phi-profile, which collapses to `Re(rho_eg e^{i phi}) / 4`.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::StateError;
use crate::params::InitialQubitState;

/// Tolerance on |E| above 1 before the input is rejected as unphysical.
pub const AMPLITUDE_TOL: f64 = 1e-8;

/// |rho_eg| below which the peak phase is reported as undefined (the
/// phi-distribution is uniform to machine noise).
pub const PEAK_UNDEFINED_TOL: f64 = 1e-12;

/// Qubit reduced density matrix. Populations are real by construction; the
/// lower-left entry is always the conjugate of `rho_eg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub rho_ee: f64,
    pub rho_eg: Complex64,
    pub rho_gg: f64,
}

impl DensityMatrix {
    pub fn rho_ge(&self) -> Complex64 {
        self.rho_eg.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho_ee + self.rho_gg
    }

    pub fn determinant(&self) -> f64 {
        self.rho_ee * self.rho_gg - self.rho_eg.norm_sqr()
    }

    /// Maximally mixed state; handy reference point for the observables.
    pub fn maximally_mixed() -> Self {
        Self { rho_ee: 0.5, rho_eg: Complex64::new(0.0, 0.0), rho_gg: 0.5 }
    }
}

/// State at scaled time tau: excited population decays with |E|^2, coherence
/// with E, and the lost population piles up in the ground state.
pub fn density_matrix(
    s0: &InitialQubitState,
    e: Complex64,
) -> Result<DensityMatrix, StateError> {
    let abs_e = e.norm();
    if abs_e > 1.0 + AMPLITUDE_TOL {
        return Err(StateError::UnphysicalAmplitude { abs_e });
    }
    let rho_ee0 = s0.c1().norm_sqr();
    let rho_eg0 = s0.c1() * s0.c0().conj();
    let rho_ee = rho_ee0 * e.norm_sqr();
    Ok(DensityMatrix {
        rho_ee,
        rho_eg: rho_eg0 * e,
        rho_gg: 1.0 - rho_ee,
    })
}

/// Closed-form Husimi Q:
/// `(1/2pi) [cos(theta) rho_ee + sin(theta) Re(e^{i phi} rho_eg) + sin^2(theta/2)]`.
pub fn husimi_q(rho: &DensityMatrix, theta: f64, phi: f64) -> Result<f64, StateError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(StateError::AngleOutOfRange { name: "theta", value: theta });
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(StateError::AngleOutOfRange { name: "phi", value: phi });
    }
    let coherence = (Complex64::from_polar(1.0, phi) * rho.rho_eg).re;
    let half = (theta / 2.0).sin();
    Ok((theta.cos() * rho.rho_ee + theta.sin() * coherence + half * half) / TAU)
}

/// Q evaluated straight from the spin-coherent inner product
/// `<theta,phi| rho |theta,phi>`; independent route used to verify the
/// closed form.
pub fn husimi_q_direct(rho: &DensityMatrix, theta: f64, phi: f64) -> f64 {
    let ch = (theta / 2.0).cos();
    let sh = (theta / 2.0).sin();
    let cross = 2.0 * ch * sh * (Complex64::from_polar(1.0, phi) * rho.rho_eg).re;
    (ch * ch * rho.rho_ee + sh * sh * rho.rho_gg + cross) / TAU
}

/// Sampled Husimi Q over the sphere at a fixed time. Theta nodes are
/// Gauss-Legendre in cos(theta) so the spherical integral is a plain
/// weighted sum; phi nodes are uniform.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    pub theta_nodes: Vec<f64>,
    /// Gauss-Legendre weights matching `theta_nodes` (weights in cos theta).
    pub theta_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    /// Row-major `[i_theta * n_phi + i_phi]`.
    pub values: Vec<f64>,
    pub tau: f64,
}

impl PhaseSpaceGrid {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phi_nodes.len() + i_phi]
    }

    /// Integral of Q over the full sphere; equals 1 for any density matrix.
    pub fn sphere_integral(&self) -> f64 {
        let dphi = TAU / self.phi_nodes.len() as f64;
        let mut total = 0.0;
        for (i, w) in self.theta_weights.iter().enumerate() {
            let mut row = 0.0;
            for j in 0..self.phi_nodes.len() {
                row += self.value(i, j);
            }
            total += w * row * dphi;
        }
        total
    }

    /// The theta = pi/2 great-circle slice (nearest sampled row).
    pub fn equator_row(&self) -> (&f64, Vec<f64>) {
        let i = self
            .theta_nodes
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - PI / 2.0)
                    .abs()
                    .partial_cmp(&(b.1 - PI / 2.0).abs())
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        (
            &self.theta_nodes[i],
            (0..self.phi_nodes.len()).map(|j| self.value(i, j)).collect(),
        )
    }
}

/// Sample Q on an `n_theta x n_phi` mesh at time stamp `tau`.
pub fn husimi_grid(rho: &DensityMatrix, n_theta: usize, n_phi: usize, tau: f64) -> PhaseSpaceGrid {
    assert!(n_theta >= 2 && n_phi >= 2, "grid must be at least 2 x 2");
    let (x_nodes, weights) = gauss_legendre(n_theta);
    // cos(theta) descending -> theta ascending
    let theta_nodes: Vec<f64> = x_nodes.iter().rev().map(|x| x.acos()).collect();
    let theta_weights: Vec<f64> = weights.iter().rev().copied().collect();
    let phi_nodes: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();

    let mut values = Vec::with_capacity(n_theta * n_phi);
    for &theta in &theta_nodes {
        for &phi in &phi_nodes {
            values.push(husimi_q(rho, theta, phi).expect("nodes are in range"));
        }
    }
    PhaseSpaceGrid { theta_nodes, theta_weights, phi_nodes, values, tau }
}

/// Closed-form synchronization measure `Re(rho_eg e^{i phi}) / 4`; bounded by
/// 1/8 in magnitude since |rho_eg| <= 1/2.
pub fn sync_measure(rho: &DensityMatrix, phi: f64) -> f64 {
    (rho.rho_eg * Complex64::from_polar(1.0, phi)).re / 4.0
}

/// The defining theta-integral of the measure, done numerically:
/// `int_0^pi sin(theta) Q(theta, phi) dtheta - 1/2pi`.
pub fn sync_measure_by_quadrature(rho: &DensityMatrix, phi: f64, n_nodes: usize) -> f64 {
    assert!(n_nodes >= 8, "need at least 8 quadrature nodes");
    let (x_nodes, weights) = gauss_legendre(n_nodes);
    let mut integral = 0.0;
    for (x, w) in x_nodes.iter().zip(&weights) {
        // map [-1, 1] -> [0, pi]
        let theta = PI * (x + 1.0) / 2.0;
        integral += w * (PI / 2.0) * theta.sin() * husimi_q_direct(rho, theta, phi);
    }
    integral - 1.0 / TAU
}

/// Time series of the synchronization measure at probe phases, plus the
/// tracked location and height of the phi-peak.
#[derive(Debug, Clone)]
pub struct SyncTrace {
    pub tau_grid: Vec<f64>,
    pub phi_probes: Vec<f64>,
    /// `s_values[k]` is the S(phi_probes[k], tau) series.
    pub s_values: Vec<Vec<f64>>,
    /// `None` when |rho_eg| is below `PEAK_UNDEFINED_TOL` (uniform phase).
    pub peak_phase: Vec<Option<f64>>,
    pub peak_height: Vec<f64>,
}

/// The peak of S over phi sits at `-arg(rho_eg) mod 2pi` with height
/// `|rho_eg|/4`; no search needed.
pub fn track_peak_phase(
    tau_grid: &[f64],
    rhos: &[DensityMatrix],
    phi_probes: &[f64],
) -> Result<SyncTrace, StateError> {
    assert_eq!(tau_grid.len(), rhos.len(), "trajectory length mismatch");
    assert!(!tau_grid.is_empty(), "empty trajectory");
    let s_values = phi_probes
        .iter()
        .map(|&phi| rhos.iter().map(|r| sync_measure(r, phi)).collect())
        .collect();
    let mut peak_phase = Vec::with_capacity(rhos.len());
    let mut peak_height = Vec::with_capacity(rhos.len());
    for r in rhos {
        let mag = r.rho_eg.norm();
        peak_height.push(mag / 4.0);
        if mag < PEAK_UNDEFINED_TOL {
            peak_phase.push(None);
        } else {
            peak_phase.push(Some((-r.rho_eg.arg()).rem_euclid(TAU)));
        }
    }
    Ok(SyncTrace {
        tau_grid: tau_grid.to_vec(),
        phi_probes: phi_probes.to_vec(),
        s_values,
        peak_phase,
        peak_height,
    })
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn symmetric_rho(e: Complex64) -> DensityMatrix {
        density_matrix(&InitialQubitState::symmetric(), e).unwrap()
    }

    #[test]
    fn density_matrix_examples() {
        let rho = symmetric_rho(c(1.0, 0.0));
        assert_abs_diff_eq!(rho.rho_ee, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_eg.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_gg, 0.5, epsilon = 1e-15);

        let rho = symmetric_rho(c(0.0, 0.0));
        assert_eq!(rho.rho_ee, 0.0);
        assert_eq!(rho.rho_eg, c(0.0, 0.0));
        assert_eq!(rho.rho_gg, 1.0);

        let rho = symmetric_rho(c(0.0, 0.5));
        assert_abs_diff_eq!(rho.rho_ee, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_eg.im, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_gg, 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.determinant(), 0.046875, epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_invariants() {
        for e in [c(1.0, 0.0), c(0.3, -0.4), c(0.0, 0.0), c(-0.9, 0.1)] {
            let rho = symmetric_rho(e);
            assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
            assert_eq!(rho.rho_ge(), rho.rho_eg.conj());
            assert!(rho.determinant() >= -1e-12);
        }
        assert!(density_matrix(&InitialQubitState::symmetric(), c(1.1, 0.0)).is_err());
    }

    #[test]
    fn husimi_point_values() {
        let rho = symmetric_rho(c(1.0, 0.0));
        assert_abs_diff_eq!(
            husimi_q(&rho, PI / 2.0, 0.0).unwrap(),
            1.0 / TAU,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(husimi_q(&rho, 0.0, 0.0).unwrap(), 0.5 / TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(husimi_q(&rho, PI / 2.0, PI).unwrap(), 0.0, epsilon = 1e-12);
        assert!(husimi_q(&rho, -0.1, 0.0).is_err());
        assert!(husimi_q(&rho, 0.1, TAU).is_err());
    }

    #[test]
    fn husimi_closed_form_matches_inner_product() {
        for e in [c(1.0, 0.0), c(0.5, 0.1), c(-0.2, 0.6), c(0.0, 0.0)] {
            let rho = symmetric_rho(e);
            for i in 0..25 {
                let theta = PI * (i as f64 + 0.3) / 25.0;
                let phi = TAU * ((i as f64 * 0.61) % 1.0);
                let closed = husimi_q(&rho, theta, phi).unwrap();
                let direct = husimi_q_direct(&rho, theta, phi);
                assert!((closed - direct).abs() < 1e-12);
                assert!(closed >= -1e-12);
            }
        }
    }

    #[test]
    fn husimi_grid_normalization_and_symmetry() {
        let mixed = DensityMatrix::maximally_mixed();
        let grid = husimi_grid(&mixed, 16, 32, 0.0);
        for v in &grid.values {
            assert_abs_diff_eq!(*v, 1.0 / (2.0 * TAU), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(grid.sphere_integral(), 1.0, epsilon = 1e-8);

        // real-positive E: Q even in phi
        let rho = symmetric_rho(c(0.7, 0.0));
        let grid = husimi_grid(&rho, 16, 32, 0.0);
        assert_abs_diff_eq!(grid.sphere_integral(), 1.0, epsilon = 1e-8);
        let n_phi = grid.phi_nodes.len();
        for i in 0..grid.theta_nodes.len() {
            for j in 1..n_phi {
                assert_abs_diff_eq!(
                    grid.value(i, j),
                    grid.value(i, n_phi - j),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn sync_measure_examples() {
        let rho = symmetric_rho(c(1.0, 0.0));
        assert_abs_diff_eq!(sync_measure(&rho, 0.0), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(sync_measure(&rho, PI), -0.125, epsilon = 1e-15);

        let rho_i = DensityMatrix { rho_ee: 0.125, rho_eg: c(0.0, 0.25), rho_gg: 0.875 };
        assert_abs_diff_eq!(sync_measure(&rho_i, PI / 2.0), -0.0625, epsilon = 1e-15);
    }

    #[test]
    fn sync_quadrature_matches_closed_form() {
        let mixed = DensityMatrix::maximally_mixed();
        assert_abs_diff_eq!(sync_measure_by_quadrature(&mixed, 0.3, 16), 0.0, epsilon = 1e-10);

        let rho = symmetric_rho(c(1.0, 0.0));
        assert_abs_diff_eq!(
            sync_measure_by_quadrature(&rho, 0.0, 16),
            0.125,
            epsilon = 1e-8
        );

        for k in 0..50 {
            let e = c(
                0.9 * ((k as f64 * 0.37).sin()),
                0.4 * ((k as f64 * 0.53).cos()),
            );
            let e = if e.norm() > 1.0 { e / e.norm() } else { e };
            let rho = symmetric_rho(e);
            let phi = TAU * ((k as f64 * 0.71) % 1.0);
            let closed = sync_measure(&rho, phi);
            let quad = sync_measure_by_quadrature(&rho, phi, 16);
            assert!((closed - quad).abs() < 1e-8, "k={k}");
            assert!(closed.abs() <= 0.125 + 1e-12);
        }
    }

    #[test]
    fn peak_phase_tracking() {
        let taus = [0.0, 1.0, 2.0];
        let rhos = [
            symmetric_rho(c(1.0, 0.0)),
            symmetric_rho(c(-0.5, 0.0)),
            symmetric_rho(c(0.0, 0.0)),
        ];
        let trace = track_peak_phase(&taus, &rhos, &[0.0, PI]).unwrap();
        assert_eq!(trace.peak_phase[0], Some(0.0));
        assert_abs_diff_eq!(trace.peak_phase[1].unwrap(), PI, epsilon = 1e-12);
        assert_eq!(trace.peak_phase[2], None);
        assert_eq!(trace.peak_height[2], 0.0);
        assert_abs_diff_eq!(trace.peak_height[0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.s_values[0][0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.s_values[1][0], -0.125, epsilon = 1e-15);
    }

    #[test]
    fn peak_phase_matches_equator_argmax() {
        let rho = symmetric_rho(c(0.3, -0.55));
        let expected = (-rho.rho_eg.arg()).rem_euclid(TAU);
        let grid = husimi_grid(&rho, 17, 720, 0.0);
        let (_, row) = grid.equator_row();
        let j_max = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let phi_max = grid.phi_nodes[j_max];
        let diff = (phi_max - expected + PI).rem_euclid(TAU) - PI;
        assert!(diff.abs() < TAU / 720.0 + 1e-12);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (nodes, weights) = gauss_legendre(8);
        // integrates polynomials up to degree 15 exactly
        for degree in 0..=15u32 {
            let num: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(degree as i32))
                .sum();
            let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
            assert_abs_diff_eq!(num, exact, epsilon = 1e-13);
        }
    }
}
