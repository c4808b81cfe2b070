//! Interface fluxes coupling neighbouring elements.
//!
//! ```text
//! F_hat = {{F}}
//! b_hat = {{b}} + beta [[b]]
//! B_hat = b_hat {{F}}
//! G_hat = {{G}} + alpha [[F]] . n+
//! ```
//!
//! with `{{a}} = (a+ + a-)/2` and `[[a]] = a+ - a-`. `alpha = beta = 0` gives
//! the energy- and entropy-conserving scheme; `alpha = g / 2c` with upwinded
//! `b_hat` dissipates both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxMode {
    Conservative,
    Dissipative,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    Zero,
    /// `beta = sign({{F}} . n-) / 2`, i.e. take `b` from the upwind side.
    Upwind,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub mode: FluxMode,
    /// Penalty used in `custom` mode, 1/s.
    #[serde(default)]
    pub alpha: f64,
    /// Buoyancy rule used in `custom` mode.
    #[serde(default = "default_beta")]
    pub beta: BetaRule,
    /// Fixed reference wave speed for `dissipative` mode, m/s. When absent the
    /// fastest wave speed of the current state is used, once per step.
    #[serde(default)]
    pub c_ref: Option<f64>,
}

fn default_beta() -> BetaRule {
    BetaRule::Zero
}

impl Default for FluxConfig {
    fn default() -> Self {
        Self::dissipative()
    }
}

/// Flux parameters frozen for one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub alpha: f64,
    pub beta: BetaRule,
}

impl FluxParams {
    pub const CONSERVATIVE: FluxParams = FluxParams {
        alpha: 0.0,
        beta: BetaRule::Zero,
    };
}

impl FluxConfig {
    pub fn conservative() -> Self {
        Self {
            mode: FluxMode::Conservative,
            alpha: 0.0,
            beta: BetaRule::Zero,
            c_ref: None,
        }
    }

    pub fn dissipative() -> Self {
        Self {
            mode: FluxMode::Dissipative,
            alpha: 0.0,
            beta: BetaRule::Upwind,
            c_ref: None,
        }
    }

    pub fn custom(alpha: f64, beta: BetaRule) -> Result<Self> {
        let cfg = Self {
            mode: FluxMode::Custom,
            alpha,
            beta,
            c_ref: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == FluxMode::Custom {
            if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
                return Err(Error::InvalidState(format!(
                    "flux alpha must be finite and >= 0, got {}",
                    self.alpha
                )));
            }
            if let BetaRule::Fixed(b) = self.beta {
                if !(b.abs() <= 0.5) {
                    return Err(Error::InvalidState(format!(
                        "fixed beta must satisfy |beta| <= 1/2, got {b}"
                    )));
                }
            }
        }
        if let Some(c) = self.c_ref {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidState(format!(
                    "reference wave speed must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Whether resolving this config needs the state's fastest wave speed.
    pub fn needs_wave_speed(&self) -> bool {
        self.mode == FluxMode::Dissipative && self.c_ref.is_none()
    }

    /// Freeze `alpha` and the `b_hat` rule. `wave_speed` is only read in
    /// dissipative mode without a reference speed.
    pub fn resolve(&self, g: f64, wave_speed: f64) -> FluxParams {
        match self.mode {
            FluxMode::Conservative => FluxParams::CONSERVATIVE,
            FluxMode::Dissipative => FluxParams {
                alpha: g / (2.0 * self.c_ref.unwrap_or(wave_speed)),
                beta: BetaRule::Upwind,
            },
            FluxMode::Custom => FluxParams {
                alpha: self.alpha,
                beta: self.beta,
            },
        }
    }
}

/// `F_hat`, the average of the two physical-space mass-flux traces.
#[inline]
pub fn flux_mass(f_minus: &Vec3, f_plus: &Vec3) -> Vec3 {
    (f_minus + f_plus) * 0.5
}

/// `b_hat`. `fbar_dot_n_minus` is `{{F}} . n-`; at zero mass flux the minus
/// value is taken.
#[inline]
pub fn flux_buoyancy(b_minus: f64, b_plus: f64, fbar_dot_n_minus: f64, rule: BetaRule) -> f64 {
    match rule {
        BetaRule::Zero => 0.5 * (b_minus + b_plus),
        BetaRule::Upwind => {
            if fbar_dot_n_minus >= 0.0 {
                b_minus
            } else {
                b_plus
            }
        }
        BetaRule::Fixed(beta) => 0.5 * (b_minus + b_plus) + beta * (b_plus - b_minus),
    }
}

/// `B_hat = b_hat F_hat`.
#[inline]
pub fn flux_buoyancy_mass(b_hat: f64, f_hat: &Vec3) -> Vec3 {
    f_hat * b_hat
}

/// `G_hat = {{G}} + alpha [[F]] . n+`.
#[inline]
pub fn flux_potential(
    g_minus: f64,
    g_plus: f64,
    f_minus: &Vec3,
    f_plus: &Vec3,
    n_plus: &Vec3,
    alpha: f64,
) -> f64 {
    0.5 * (g_minus + g_plus) + alpha * (f_plus - f_minus).dot(n_plus)
}

/// `alpha = g / 2c` for the fastest wave speed `c`.
pub fn alpha_for_wave_speed(g: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidState(format!(
            "wave speed must be positive, got {c}"
        )));
    }
    Ok(g / (2.0 * c))
}
