//! Closed-form survival amplitude.
//!
//! The Laplace transform of the memory-kernel equation turns the amplitude
//! into a sum of three exponentials `E(tau) = sum c_i exp(q_i tau)`, where
//! the `q_i` solve a monic complex cubic and the `c_i` are partial-fraction
//! residues. This module builds the cubic from [`ScaledParams`], solves it
//! (Cardano, then Newton polish), and evaluates the amplitude.

use num_complex::Complex64;

use crate::error::AmplitudeError;
use crate::params::ScaledParams;

/// Relative pairwise-separation threshold below which the residue formula is
/// abandoned in favor of the oracle integrator.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Root residual bound, relative to max(1, |a0|).
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// exp(x) underflows f64 below this; clamp instead of producing NaN noise.
const EXP_UNDERFLOW: f64 = -745.0;

/// Monic cubic `q^3 + a2 q^2 + a1 q + a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
}

/// Characteristic cubic of the amplitude dynamics:
/// `a2 = 2(x1 - i x3)`, `a1 = y+ y- + x1/4`, `a0 = x1 (x1 - i x3) / 4`.
pub fn build_cubic(sp: &ScaledParams) -> CubicCoefficients {
    CubicCoefficients {
        a2: 2.0 * sp.lambda_bar,
        a1: sp.y_plus * sp.y_minus + sp.x1 / 4.0,
        a0: sp.x1 * sp.lambda_bar / 4.0,
    }
}

impl CubicCoefficients {
    pub fn eval(&self, q: Complex64) -> Complex64 {
        ((q + self.a2) * q + self.a1) * q + self.a0
    }

    fn eval_derivative(&self, q: Complex64) -> Complex64 {
        (3.0 * q + 2.0 * self.a2) * q + self.a1
    }
}

/// Solved roots plus the degeneracy diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct CubicRoots {
    /// Sorted by descending real part, ties by imaginary part.
    pub roots: [Complex64; 3],
    /// Minimum pairwise separation fell below `DEGENERACY_TOL * max(1, |q|)`.
    pub degenerate: bool,
    pub min_separation: f64,
}

/// Cardano's formula with the cube-root branch chosen to avoid cancellation,
/// then a few guarded Newton steps on every root.
pub fn solve_cubic(c: &CubicCoefficients) -> CubicRoots {
    let shift = c.a2 / 3.0;
    // depressed cubic t^3 + p t + q, q = t - shift
    let p = c.a1 - c.a2 * c.a2 / 3.0;
    let q = c.a0 - c.a2 * c.a1 / 3.0 + 2.0 * c.a2 * c.a2 * c.a2 / 27.0;

    let scale = shift.norm().max(1.0);
    let mut roots = if p.norm() < 1e-12 * scale * scale && q.norm() < 1e-12 * scale * scale * scale
    {
        // near-triple root; Cardano would amplify rounding by eps^(1/3)
        [-shift; 3]
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u3 = if (-q / 2.0 + s).norm() >= (-q / 2.0 - s).norm() {
            -q / 2.0 + s
        } else {
            -q / 2.0 - s
        };
        let u = u3.cbrt();
        let v = -p / (3.0 * u);
        let w = Complex64::new(-0.5, 0.75f64.sqrt());
        let wc = w.conj();
        [u + v - shift, u * w + v * wc - shift, u * wc + v * w - shift]
    };

    for r in roots.iter_mut() {
        newton_polish(c, r);
    }

    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });

    let qmax = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
    let min_separation = (roots[0] - roots[1])
        .norm()
        .min((roots[0] - roots[2]).norm())
        .min((roots[1] - roots[2]).norm());

    CubicRoots {
        roots,
        degenerate: min_separation < DEGENERACY_TOL * qmax,
        min_separation,
    }
}

fn newton_polish(c: &CubicCoefficients, r: &mut Complex64) {
    let mut f = c.eval(*r);
    for _ in 0..3 {
        let df = c.eval_derivative(*r);
        if df.norm() == 0.0 {
            return;
        }
        let candidate = *r - f / df;
        if !candidate.re.is_finite() || !candidate.im.is_finite() {
            return;
        }
        let fc = c.eval(candidate);
        if fc.norm() >= f.norm() {
            return;
        }
        *r = candidate;
        f = fc;
    }
}

/// Roots and residues of the three-exponential amplitude.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeSolution {
    pub roots: [Complex64; 3],
    pub coeffs: [Complex64; 3],
    pub degenerate: bool,
}

/// Partial-fraction residues `c_i = (q_i + y+)(q_i + y-) / prod_{j!=i}(q_i - q_j)`.
///
/// Refuses near-coincident roots; the caller falls back to the oracle there.
pub fn residues(sp: &ScaledParams, roots: &CubicRoots) -> Result<AmplitudeSolution, AmplitudeError> {
    if roots.degenerate {
        return Err(AmplitudeError::DegenerateRoots {
            min_separation: roots.min_separation,
        });
    }
    let [q1, q2, q3] = roots.roots;
    let numer = |q: Complex64| (q + sp.y_plus) * (q + sp.y_minus);
    let coeffs = [
        numer(q1) / ((q1 - q2) * (q1 - q3)),
        numer(q2) / ((q2 - q1) * (q2 - q3)),
        numer(q3) / ((q3 - q1) * (q3 - q2)),
    ];
    Ok(AmplitudeSolution {
        roots: roots.roots,
        coeffs,
        degenerate: false,
    })
}

impl AmplitudeSolution {
    /// Solve the full chain from scaled parameters.
    pub fn from_params(sp: &ScaledParams) -> Result<Self, AmplitudeError> {
        let cubic = build_cubic(sp);
        let roots = solve_cubic(&cubic);
        residues(sp, &roots)
    }
}

fn exp_decaying(z: Complex64) -> Complex64 {
    if z.re < EXP_UNDERFLOW {
        Complex64::new(0.0, 0.0)
    } else {
        z.exp()
    }
}

/// `E(tau) = sum c_i exp(q_i tau)` for scaled time `tau = gamma t >= 0`.
pub fn eval_amplitude(sol: &AmplitudeSolution, tau: f64) -> Result<Complex64, AmplitudeError> {
    let mut e = Complex64::new(0.0, 0.0);
    for (q, c) in sol.roots.iter().zip(sol.coeffs.iter()) {
        if q.re * tau > 1e-6 {
            return Err(AmplitudeError::UnstableRoot { root: *q });
        }
        e += c * exp_decaying(q * tau);
    }
    Ok(e)
}

pub fn eval_amplitude_grid(
    sol: &AmplitudeSolution,
    tau_grid: &[f64],
) -> Result<Vec<Complex64>, AmplitudeError> {
    tau_grid.iter().map(|&t| eval_amplitude(sol, t)).collect()
}

/// Max-norm residual of the three sum identities that pin the amplitude's
/// initial conditions: sum c = 1, sum q c = 0, sum q^2 c = -x1/4.
pub fn residue_identity_errors(sp: &ScaledParams, sol: &AmplitudeSolution) -> [f64; 3] {
    let one = Complex64::new(1.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for (q, c) in sol.roots.iter().zip(sol.coeffs.iter()) {
        s0 += c;
        s1 += q * c;
        s2 += q * q * c;
    }
    [
        (s0 - one).norm(),
        s1.norm(),
        (s2 + sp.x1 / 4.0).norm(),
    ]
}
