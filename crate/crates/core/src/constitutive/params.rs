use serde::{Deserialize, Serialize};

use super::ConstitutiveError;

fn require(ok: bool, msg: impl Into<String>) -> Result<(), ConstitutiveError> {
    if ok {
        Ok(())
    } else {
        Err(ConstitutiveError::InvalidParams(msg.into()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreepOrientation {
    /// `B (ŝ / s)^m`
    #[default]
    AsPrinted,
    /// `B (s / ŝ)^m`, the usual Norton form.
    Inverted,
}

/// Power-law creep parameters. `b` is a rate per unit of time exposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreepParams {
    pub b: f64,
    pub m: f64,
    pub s_hat: f64,
    #[serde(default)]
    pub orientation: CreepOrientation,
}

impl CreepParams {
    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        require(self.b > 0.0 && self.b.is_finite(), "creep B must be > 0")?;
        require(self.s_hat > 0.0 && self.s_hat.is_finite(), "creep s_hat must be > 0")?;
        require(self.m.is_finite(), "creep exponent m must be finite")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardeningMode {
    #[default]
    Perfect,
    LinearHardening,
}

/// Yield limit and its history variable `k` (accumulated effective plastic strain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldModel {
    pub mode: HardeningMode,
    pub s_y: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub k: f64,
}

impl YieldModel {
    pub fn perfect(s_y: f64) -> Self {
        Self {
            mode: HardeningMode::Perfect,
            s_y,
            h: 0.0,
            k: 0.0,
        }
    }

    pub fn linear(s_y: f64, h: f64) -> Self {
        Self {
            mode: HardeningMode::LinearHardening,
            s_y,
            h,
            k: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        require(self.s_y > 0.0 && self.s_y.is_finite(), "yield stress s_y must be > 0")?;
        require(self.h >= 0.0 && self.h.is_finite(), "hardening modulus H must be >= 0")?;
        require(self.k >= 0.0 && self.k.is_finite(), "hardening parameter k must be >= 0")
    }

    /// Current yield limit `Y(k)`.
    pub fn yield_stress(&self) -> f64 {
        match self.mode {
            HardeningMode::Perfect => self.s_y,
            HardeningMode::LinearHardening => self.s_y + self.h * self.k,
        }
    }

    /// Advances `k`; negative increments are ignored so `k` never decreases.
    pub fn advance(&mut self, dk: f64) {
        if dk > 0.0 {
            self.k += dk;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusMode {
    #[default]
    Constant,
    /// Tangent of the power branch: `1 / (dε_eff/dS_eff)`.
    RambergOsgoodConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowModel {
    pub modulus_mode: ModulusMode,
    pub k0: f64,
}

impl FlowModel {
    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        require(self.k0 > 0.0 && self.k0.is_finite(), "flow modulus K0 must be > 0")
    }
}

/// Constants of the total-deformation law plus the elastic moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyConstants {
    /// Proportional limit between the elastic and power branches.
    pub s_0: f64,
    /// Power-law coefficient; replaced by `s_0^(1-n)/e_el` when continuity is enforced.
    pub a: f64,
    pub n: f64,
    /// Effective elastic modulus of the elastic branch `ε_eff = S_eff / e_el`.
    pub e_el: f64,
    pub bulk: f64,
    /// `α` in `f(K) = α ‖K‖`.
    pub phason_coupling: f64,
    #[serde(default = "default_true")]
    pub enforce_continuity: bool,
}

fn default_true() -> bool {
    true
}

impl OntologyConstants {
    pub fn validate(&self) -> Result<(), ConstitutiveError> {
        require(self.s_0 > 0.0 && self.s_0.is_finite(), "s_0 must be > 0")?;
        require(self.a > 0.0 && self.a.is_finite(), "A must be > 0")?;
        require(self.n >= 1.0 && self.n.is_finite(), "n must be >= 1")?;
        require(self.e_el > 0.0 && self.e_el.is_finite(), "E_el must be > 0")?;
        require(self.bulk > 0.0 && self.bulk.is_finite(), "bulk modulus must be > 0")?;
        require(
            self.phason_coupling >= 0.0 && self.phason_coupling.is_finite(),
            "phason coupling must be >= 0",
        )
    }

    /// Coefficient actually used by the power branch.
    pub fn power_coefficient(&self) -> f64 {
        if self.enforce_continuity {
            self.s_0.powf(1.0 - self.n) / self.e_el
        } else {
            self.a
        }
    }

    /// Shear modulus consistent with the elastic branch: `2G = 2 E_el / 3`.
    pub fn shear_modulus(&self) -> f64 {
        self.e_el / 3.0
    }
}
