//! Randomized invariants of the amplitude and phase-space layers.

use num_complex::Complex64;
use proptest::prelude::*;

use qsync::amplitude::{
    build_cubic, eval_amplitude, residue_identity_errors, residues, solve_cubic,
};
use qsync::state::{density_matrix, husimi_q, sync_measure};
use qsync::{InitialQubitState, ScaledParams};

fn scaled_params() -> impl Strategy<Value = ScaledParams> {
    (
        (0.005f64.log10()..=1.0f64),
        -1.0f64..=1.0,
        0.0f64..=3e-10,
    )
        .prop_map(|(lx1, x3, beta)| ScaledParams::new(10f64.powf(lx1), 1.5e9, x3, beta))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, .. ProptestConfig::default() })]

    /// Every root satisfies the cubic to within the residual bound, the real
    /// parts are non-positive, and the residue identities hold.
    #[test]
    fn amplitude_invariants(sp in scaled_params(), tau in 0.0f64..=100.0) {
        let cubic = build_cubic(&sp);
        let roots = solve_cubic(&cubic);
        let scale = roots
            .roots
            .iter()
            .map(|q| q.norm().powi(3))
            .fold(1.0f64, f64::max);
        for q in roots.roots {
            prop_assert!(cubic.eval(q).norm() <= 1e-10 * scale,
                "root residual {:.3e} at q = {q}", cubic.eval(q).norm());
            prop_assert!(q.re <= 1e-12, "growing mode: Re q = {:.3e}", q.re);
        }
        // near-degenerate draws fall back to the oracle; nothing more to check
        let Ok(sol) = residues(&sp, &roots) else { return Ok(()) };
        let errs = residue_identity_errors(&sp, &sol);
        prop_assert!(errs[0] <= 1e-10, "sum identity error {:.3e}", errs[0]);
        prop_assert!(errs[1] <= 1e-10, "slope identity error {:.3e}", errs[1]);
        prop_assert!(errs[2] <= 1e-9, "curvature identity error {:.3e}", errs[2]);

        let e = eval_amplitude(&sol, tau).unwrap();
        prop_assert!(e.norm() <= 1.0 + 1e-8, "|E({tau})| = {} > 1", e.norm());
    }

    /// The Husimi function is a true quasi-probability on physical states:
    /// non-negative everywhere, and S stays within the 1/8 bound.
    #[test]
    fn phase_space_invariants(
        c0_re in -1.0f64..=1.0, c0_im in -1.0f64..=1.0,
        c1_re in -1.0f64..=1.0, c1_im in -1.0f64..=1.0,
        e_mag in 0.0f64..=1.0, e_arg in 0.0f64..=std::f64::consts::TAU,
        theta in 0.0f64..=std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let s0 = InitialQubitState::new(
            Complex64::new(c0_re, c0_im),
            Complex64::new(c1_re, c1_im),
        );
        // the zero state is rejected upstream; skip that corner of the cube
        let Ok(s0) = s0 else { return Ok(()) };
        let e = e_mag * Complex64::new(e_arg.cos(), e_arg.sin());
        let rho = density_matrix(&s0, e).unwrap();
        prop_assert!(rho.trace() >= 1.0 - 1e-12 && rho.trace() <= 1.0 + 1e-12);
        prop_assert!(rho.determinant() >= -1e-12, "negative eigenvalue");
        let q = husimi_q(&rho, theta, phi).unwrap();
        prop_assert!(q >= -1e-15, "negative Q = {q:.3e}");
        prop_assert!(sync_measure(&rho, phi).abs() <= 0.125 + 1e-12);
    }
}
