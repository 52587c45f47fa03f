//! System parameters: physical rates, their dimensionless scaled form, and
//! the initial qubit state.
//!
//! Everything downstream works in scaled time `tau = gamma * t` and consumes
//! only the dimensionless [`ScaledParams`]; the conversion from physical
//! rates happens exactly once, in [`PhysicalParams::scale`].

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::ParamError;

/// Default qubit transition frequency in units of gamma. Typical
/// optical-frequency-to-decay ratio; velocity enters the dynamics only
/// through the product `beta * omega0 / gamma`, so this scale is what makes
/// beta values of order 1e-10 produce order-one phase effects.
pub const DEFAULT_OMEGA0_OVER_GAMMA: f64 = 1.5e9;

/// Above this, the non-relativistic treatment of the qubit motion is
/// questionable and a warning is attached to the parameters.
pub const BETA_WARN_THRESHOLD: f64 = 1e-6;

const NORM_TOL: f64 = 1e-12;

/// Physical rates of the qubit-cavity system, all in the same inverse-time
/// unit. `gamma` is the coupling rate and serves as the scale unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Coupling rate, inverse time. The unit everything is scaled by.
    pub gamma: f64,
    /// Spectral width of the cavity line, inverse time.
    pub lambda: f64,
    /// Detuning between qubit transition and cavity center frequency.
    pub delta: f64,
    /// Qubit transition frequency.
    pub omega0: f64,
    /// Qubit speed as a fraction of the speed of light.
    pub beta: f64,
}

impl PhysicalParams {
    pub fn new(
        gamma: f64,
        lambda: f64,
        delta: f64,
        omega0: f64,
        beta: f64,
    ) -> Result<Self, ParamError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(ParamError::NonPositive { name: "gamma", value: gamma });
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ParamError::NonPositive { name: "lambda", value: lambda });
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(ParamError::NonPositive { name: "omega0", value: omega0 });
        }
        if !delta.is_finite() {
            return Err(ParamError::NotFinite { name: "delta", value: delta });
        }
        if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
            return Err(ParamError::BetaOutOfRange { value: beta });
        }
        Ok(Self { gamma, lambda, delta, omega0, beta })
    }

    /// A human-readable caution when the parameters are outside the regime
    /// the model was derived for. Does not block the computation.
    pub fn validity_warning(&self) -> Option<String> {
        if self.beta > BETA_WARN_THRESHOLD {
            Some(format!(
                "beta = {:e} exceeds {:e}; the model assumes beta << 1 and slow qubit motion",
                self.beta, BETA_WARN_THRESHOLD
            ))
        } else {
            None
        }
    }

    /// Reduce to dimensionless form: x1 = lambda/gamma, x2 = omega0/gamma,
    /// x3 = delta/gamma, and the derived complex rates.
    pub fn scale(&self) -> ScaledParams {
        ScaledParams::new(
            self.lambda / self.gamma,
            self.omega0 / self.gamma,
            self.delta / self.gamma,
            self.beta,
        )
    }
}

/// Dimensionless parameters plus the derived complex rates. Single source of
/// truth for the characteristic cubic and the memory kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams {
    /// lambda / gamma
    pub x1: f64,
    /// omega0 / gamma
    pub x2: f64,
    /// delta / gamma
    pub x3: f64,
    pub beta: f64,
    /// Scaled complex linewidth, x1 - i x3.
    pub lambda_bar: Complex64,
    /// Scaled motion rate, beta * (lambda_bar + i x2).
    pub theta_m: Complex64,
    /// lambda_bar + theta_m = (1+beta) x1 + i beta x2 - i (1+beta) x3
    pub y_plus: Complex64,
    /// lambda_bar - theta_m = (1-beta) x1 - i beta x2 - i (1-beta) x3
    pub y_minus: Complex64,
}

impl ScaledParams {
    pub fn new(x1: f64, x2: f64, x3: f64, beta: f64) -> Self {
        let lambda_bar = Complex64::new(x1, -x3);
        let theta_m = beta * (lambda_bar + Complex64::new(0.0, x2));
        let y_plus = Complex64::new((1.0 + beta) * x1, beta * x2 - (1.0 + beta) * x3);
        let y_minus = Complex64::new((1.0 - beta) * x1, -beta * x2 - (1.0 - beta) * x3);
        Self { x1, x2, x3, beta, lambda_bar, theta_m, y_plus, y_minus }
    }
}

/// Pure initial qubit state `c0 |g> + c1 |e>`, kept normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialQubitState {
    c0: Complex64,
    c1: Complex64,
    /// Factor that was divided out to normalize the raw amplitudes.
    norm_factor: f64,
}

impl InitialQubitState {
    /// Normalize the raw amplitude pair. Rejects the zero vector.
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self, ParamError> {
        let norm_sq = c0.norm_sqr() + c1.norm_sqr();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(ParamError::ZeroState);
        }
        let norm_factor = norm_sq.sqrt();
        Ok(Self { c0: c0 / norm_factor, c1: c1 / norm_factor, norm_factor })
    }

    /// Equal superposition (|e> + |g>)/sqrt(2), the initial state used by
    /// every figure preset.
    pub fn symmetric() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { c0: a, c1: a, norm_factor: 1.0 }
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    /// Normalization factor applied to the raw input amplitudes.
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn is_normalized(&self) -> bool {
        (self.c0.norm_sqr() + self.c1.norm_sqr() - 1.0).abs() < NORM_TOL
    }
}

/// Flat key-value configuration file. Unknown keys are rejected so a typo in
/// a sweep config fails loudly instead of silently using a default.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    /// Optional; defaults to 1.5e9 * gamma.
    pub omega0: Option<f64>,
    pub beta: f64,
    #[serde(default = "default_amp")]
    pub c0_re: f64,
    #[serde(default)]
    pub c0_im: f64,
    #[serde(default = "default_amp")]
    pub c1_re: f64,
    #[serde(default)]
    pub c1_im: f64,
}

fn default_amp() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ParamError> {
        serde_json::from_str(text).map_err(|e| ParamError::Config(e.to_string()))
    }

    pub fn physical(&self) -> Result<PhysicalParams, ParamError> {
        let omega0 = self.omega0.unwrap_or(DEFAULT_OMEGA0_OVER_GAMMA * self.gamma);
        PhysicalParams::new(self.gamma, self.lambda, self.delta, omega0, self.beta)
    }

    pub fn initial_state(&self) -> Result<InitialQubitState, ParamError> {
        InitialQubitState::new(
            Complex64::new(self.c0_re, self.c0_im),
            Complex64::new(self.c1_re, self.c1_im),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scale_beta_zero_weak_coupling() {
        let p = PhysicalParams::new(1.0, 5.0, 0.0, 1.5e9, 0.0).unwrap();
        let sp = p.scale();
        assert_eq!(sp.x1, 5.0);
        assert_eq!(sp.x2, 1.5e9);
        assert_eq!(sp.x3, 0.0);
        assert_eq!(sp.y_plus, c(5.0, 0.0));
        assert_eq!(sp.y_minus, c(5.0, 0.0));
        assert_eq!(sp.theta_m, c(0.0, 0.0));
    }

    #[test]
    fn scale_beta_zero_detuned() {
        let p = PhysicalParams::new(1.0, 0.01, 0.3, 1.5e9, 0.0).unwrap();
        let sp = p.scale();
        assert_eq!(sp.x1, 0.01);
        assert_eq!(sp.x3, 0.3);
        assert_eq!(sp.y_plus, c(0.01, -0.3));
        assert_eq!(sp.y_minus, c(0.01, -0.3));
    }

    #[test]
    fn scale_moving_qubit() {
        let p = PhysicalParams::new(1.0, 0.01, 0.0, 1.5e9, 1e-10).unwrap();
        let sp = p.scale();
        assert_abs_diff_eq!(sp.theta_m.re, 1e-12, epsilon = 1e-24);
        assert_abs_diff_eq!(sp.theta_m.im, 0.15, epsilon = 1e-13);
        // y_pm = (1 pm beta) x1 pm i beta x2 - i (1 pm beta) x3
        assert_abs_diff_eq!(sp.y_plus.re, 0.01 + 1e-12, epsilon = 1e-24);
        assert_abs_diff_eq!(sp.y_plus.im, 0.15, epsilon = 1e-13);
        assert_abs_diff_eq!(sp.y_minus.re, 0.01 - 1e-12, epsilon = 1e-24);
        assert_abs_diff_eq!(sp.y_minus.im, -0.15, epsilon = 1e-13);
        // algebraic identity y+ + y- = 2 (x1 - i x3)
        let sum = sp.y_plus + sp.y_minus;
        assert_abs_diff_eq!(sum.re, 2.0 * sp.x1, epsilon = 1e-14);
        assert_abs_diff_eq!(sum.im, -2.0 * sp.x3, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(PhysicalParams::new(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 0.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 1.0, -0.1).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn beta_warning() {
        let p = PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 1e-3).unwrap();
        assert!(p.validity_warning().is_some());
        let p = PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 1e-10).unwrap();
        assert!(p.validity_warning().is_none());
    }

    #[test]
    fn state_normalization() {
        let s = InitialQubitState::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.c0().re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm_factor(), std::f64::consts::SQRT_2, epsilon = 1e-15);

        let s = InitialQubitState::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(s.c1(), c(1.0, 0.0));
        assert_eq!(s.norm_factor(), 1.0);

        assert!(InitialQubitState::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let good = r#"{"gamma": 1.0, "lambda": 5.0, "delta": 0.0, "beta": 0.0}"#;
        let cfg = ConfigFile::parse(good).unwrap();
        let p = cfg.physical().unwrap();
        assert_eq!(p.omega0, 1.5e9);
        assert!(cfg.initial_state().unwrap().is_normalized());

        let bad = r#"{"gamma": 1.0, "lambda": 5.0, "delta": 0.0, "beta": 0.0, "lamda": 2.0}"#;
        assert!(ConfigFile::parse(bad).is_err());
    }
}
