//! Brute-force ground truth for the survival amplitude.
//!
//! The memory kernel is a sum of two complex exponentials (the cosh split),
//! so the integro-differential equation reduces exactly to a linear ODE
//! system by carrying one convolution state per kernel mode:
//!
//! ```text
//! dE/dtau  = -w (z+ + z-)
//! dz±/dtau =  E - r± z±        z±(0) = 0, E(0) = 1
//! ```
//!
//! with `z± = int_0^tau exp(-r± (tau - s)) E(s) ds`. No quadrature of the
//! memory integral is involved; the only error source is the integrator.

use num_complex::Complex64;

use crate::error::OracleError;
use crate::params::ScaledParams;

/// Default relative tolerance of the adaptive integrator.
pub const DEFAULT_RTOL: f64 = 1e-9;
/// Default absolute tolerance of the adaptive integrator.
pub const DEFAULT_ATOL: f64 = 1e-12;

/// Exponential decomposition of the scaled memory kernel
/// `g(tau) = w (exp(-r+ tau) + exp(-r- tau))` with `w = x1/8`.
#[derive(Debug, Clone, Copy)]
pub struct KernelModes {
    /// `lambda_bar - theta_m` (equals y-).
    pub r_plus: Complex64,
    /// `lambda_bar + theta_m` (equals y+).
    pub r_minus: Complex64,
    /// Per-mode weight x1/8.
    pub weight: f64,
}

/// Split `(x1/4) exp(-lambda_bar tau) cosh(theta_m tau)` into its two
/// exponential modes.
pub fn reduce_kernel(sp: &ScaledParams) -> KernelModes {
    KernelModes {
        r_plus: sp.lambda_bar - sp.theta_m,
        r_minus: sp.lambda_bar + sp.theta_m,
        weight: sp.x1 / 8.0,
    }
}

impl KernelModes {
    /// Scaled kernel value; used to cross-check the mode split.
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.weight * ((-self.r_plus * tau).exp() + (-self.r_minus * tau).exp())
    }
}

type State = [Complex64; 3];

fn deriv(km: &KernelModes, y: &State) -> State {
    [
        -km.weight * (y[1] + y[2]),
        y[0] - km.r_plus * y[1],
        y[0] - km.r_minus * y[2],
    ]
}

fn axpy(y: &State, h: f64, ks: &[&State], coeffs: &[f64]) -> State {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate the amplitude over `tau_grid` with default tolerances.
pub fn solve_volterra(km: &KernelModes, tau_grid: &[f64]) -> Result<Vec<Complex64>, OracleError> {
    solve_volterra_with_tol(km, tau_grid, DEFAULT_RTOL, DEFAULT_ATOL)
}

/// Dormand-Prince 5(4) with PI-free step control; steps are clamped so every
/// grid point is hit exactly.
pub fn solve_volterra_with_tol(
    km: &KernelModes,
    tau_grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Complex64>, OracleError> {
    if tau_grid.is_empty() {
        return Err(OracleError::BadGrid("empty grid".into()));
    }
    if tau_grid[0] != 0.0 {
        return Err(OracleError::BadGrid(format!(
            "grid must start at 0, got {}",
            tau_grid[0]
        )));
    }
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(OracleError::BadGrid("grid must be non-decreasing".into()));
    }

    let mut out = Vec::with_capacity(tau_grid.len());
    let mut tau = 0.0f64;
    let mut y: State = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    out.push(y[0]);

    // initial step from the fastest rate in the system
    let rate = km
        .r_plus
        .norm()
        .max(km.r_minus.norm())
        .max((2.0 * km.weight).sqrt())
        .max(1e-3);
    let mut h = (0.1 / rate).min(1.0);
    let mut k1 = deriv(km, &y);

    for &target in &tau_grid[1..] {
        while tau < target {
            h = h.min(target - tau);
            if h < f64::EPSILON * 16.0 * tau.max(1.0) {
                return Err(OracleError::StepSizeUnderflow { tau });
            }
            let (ynew, err, k_last) = dopri5_step(km, &y, &k1, h);
            // error norm over the three complex components
            let mut sum = 0.0;
            for i in 0..3 {
                let sc = atol + rtol * y[i].norm().max(ynew[i].norm());
                let r = err[i].norm() / sc;
                sum += r * r;
            }
            let err_norm = (sum / 3.0).sqrt();
            if err_norm <= 1.0 {
                tau += h;
                y = ynew;
                k1 = k_last; // FSAL
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        // the last accepted step landed exactly on `target`
        tau = target;
        out.push(y[0]);
    }
    Ok(out)
}

/// One Dormand-Prince step: returns (y_new, error estimate, k7 for FSAL).
fn dopri5_step(km: &KernelModes, y: &State, k1: &State, h: f64) -> (State, State, State) {
    let k2 = deriv(km, &axpy(y, h, &[k1], &[1.0 / 5.0]));
    let k3 = deriv(km, &axpy(y, h, &[k1, &k2], &[3.0 / 40.0, 9.0 / 40.0]));
    let k4 = deriv(
        km,
        &axpy(y, h, &[k1, &k2, &k3], &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0]),
    );
    let k5 = deriv(
        km,
        &axpy(
            y,
            h,
            &[k1, &k2, &k3, &k4],
            &[
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
            ],
        ),
    );
    let k6 = deriv(
        km,
        &axpy(
            y,
            h,
            &[k1, &k2, &k3, &k4, &k5],
            &[
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
            ],
        ),
    );
    let ynew = axpy(
        y,
        h,
        &[k1, &k3, &k4, &k5, &k6],
        &[
            35.0 / 384.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    );
    let k7 = deriv(km, &ynew);
    // difference of the embedded orders
    let zero: State = [Complex64::new(0.0, 0.0); 3];
    let err = axpy(
        &zero,
        h,
        &[k1, &k3, &k4, &k5, &k6, &k7],
        &[
            71.0 / 57600.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ],
    );
    (ynew, err, k7)
}

/// Max over the grid of |E_left - E_right|.
pub fn max_divergence(left: &[Complex64], right: &[Complex64]) -> Result<f64, OracleError> {
    if left.len() != right.len() {
        return Err(OracleError::GridMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    Ok(left
        .iter()
        .zip(right)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Uniform grid `0, step, ..., ~max` (inclusive of the endpoint).
pub fn uniform_grid(tau_max: f64, n_points: usize) -> Vec<f64> {
    assert!(n_points >= 2 && tau_max > 0.0);
    (0..n_points)
        .map(|i| tau_max * i as f64 / (n_points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::{eval_amplitude_grid, AmplitudeSolution};

    fn sp(x1: f64, x3: f64, beta: f64) -> ScaledParams {
        ScaledParams::new(x1, 1.5e9, x3, beta)
    }

    #[test]
    fn kernel_mode_identities() {
        let p = sp(0.01, 0.0, 1e-10);
        let km = reduce_kernel(&p);
        assert!((km.r_plus - p.y_minus).norm() < 1e-15);
        assert!((km.r_minus - p.y_plus).norm() < 1e-15);
        assert_eq!(km.weight, 0.01 / 8.0);

        // beta = 0, on resonance: single effective mode of weight x1/4
        let p0 = sp(5.0, 0.0, 0.0);
        let km0 = reduce_kernel(&p0);
        assert_eq!(km0.r_plus, km0.r_minus);
        assert_eq!(km0.r_plus.re, 5.0);
    }

    #[test]
    fn kernel_reconstruction_matches_cosh_form() {
        let p = sp(0.37, -0.42, 2e-10);
        let km = reduce_kernel(&p);
        // deterministic scattered taus in [0, 10)
        for i in 0..20 {
            let tau = (i as f64 * 2.718281828).rem_euclid(10.0);
            let direct = (p.x1 / 4.0)
                * (-p.lambda_bar * tau).exp()
                * (p.theta_m * tau).cosh();
            let split = km.eval(tau);
            assert!(
                (direct - split).norm() < 1e-12,
                "tau={tau}: {direct} vs {split}"
            );
        }
    }

    #[test]
    fn initial_conditions() {
        let km = reduce_kernel(&sp(0.01, 0.3, 1e-10));
        let grid = [0.0, 1e-4];
        let traj = solve_volterra(&km, &grid).unwrap();
        assert_eq!(traj[0], Complex64::new(1.0, 0.0));
        // E'(0) = 0, so over dt the change is O(dt^2)
        assert!((traj[1] - 1.0).norm() < 1e-7);
    }

    #[test]
    fn matches_closed_form_weak_coupling() {
        let p = sp(5.0, 0.0, 0.0);
        let km = reduce_kernel(&p);
        let grid = uniform_grid(5.0, 101);
        let traj = solve_volterra(&km, &grid).unwrap();
        assert!((traj.last().unwrap().norm() - 0.283).abs() < 1e-3);

        let sol = AmplitudeSolution::from_params(&p).unwrap();
        let analytic = eval_amplitude_grid(&sol, &grid).unwrap();
        assert!(max_divergence(&analytic, &traj).unwrap() < 1e-6);
    }

    #[test]
    fn matches_textbook_single_mode_form() {
        // collapse both modes onto one rate: kernel 2w exp(-r tau) gives
        // E'' + r E' + 2w E = 0, E = e^{-r tau/2}(cosh(D tau/2) + (r/D) sinh(D tau/2)),
        // D = sqrt(r^2 - 8w)
        let r = Complex64::new(0.05, -0.2);
        let w = 0.01 / 8.0;
        let km = KernelModes { r_plus: r, r_minus: r, weight: w };
        let d = (r * r - 8.0 * w).sqrt();
        let grid = uniform_grid(80.0, 401);
        let traj = solve_volterra(&km, &grid).unwrap();
        for (&tau, e) in grid.iter().zip(&traj) {
            let half = tau / 2.0;
            let reference = (-r * half).exp() * ((d * half).cosh() + (r / d) * (d * half).sinh());
            assert!((e - reference).norm() < 1e-7, "tau={tau}");
        }
    }

    #[test]
    fn tolerance_convergence() {
        let km = reduce_kernel(&sp(0.01, 0.2, 3e-10));
        let grid = uniform_grid(100.0, 501);
        let coarse = solve_volterra(&km, &grid).unwrap();
        let fine =
            solve_volterra_with_tol(&km, &grid, DEFAULT_RTOL / 2.0, DEFAULT_ATOL / 2.0).unwrap();
        assert!(max_divergence(&coarse, &fine).unwrap() < 1e-8);
    }

    #[test]
    fn amplitude_stays_physical() {
        for (x1, x3, beta) in [(5.0, 0.0, 0.0), (0.01, 0.0, 3e-10), (0.01, 0.3, 1e-11)] {
            let km = reduce_kernel(&sp(x1, x3, beta));
            let grid = uniform_grid(100.0, 1001);
            let traj = solve_volterra(&km, &grid).unwrap();
            for e in traj {
                assert!(e.norm() <= 1.0 + 1e-8);
            }
        }
    }

    #[test]
    fn grid_validation() {
        let km = reduce_kernel(&sp(1.0, 0.0, 0.0));
        assert!(solve_volterra(&km, &[]).is_err());
        assert!(solve_volterra(&km, &[1.0, 2.0]).is_err());
        assert!(solve_volterra(&km, &[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn divergence_of_offset_trajectories() {
        let a = vec![Complex64::new(1.0, 0.0); 10];
        let b: Vec<_> = a.iter().map(|z| z + 1e-5).collect();
        assert_eq!(max_divergence(&a, &a).unwrap(), 0.0);
        assert!((max_divergence(&a, &b).unwrap() - 1e-5).abs() < 1e-15);
        assert!(max_divergence(&a, &b[..5]).is_err());
    }
}
