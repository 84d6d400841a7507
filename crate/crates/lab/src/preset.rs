//! Named parameter sets and the conversion between model units and seconds.
//!
//! Model frequencies are in units of `g` and times in `1/g`, with `g` an
//! angular frequency. A preset carries the physical value of `g`, so a model
//! time `τ` lasts `τ / g_physical` seconds.

use std::fmt;
use std::str::FromStr;

use dispersive_core::model::{derive, DriveParams};

use crate::config::{Config, ParamsSection, PhysicalSection};
use crate::error::{LabError, LabResult};

pub const SQUID_G_HZ: f64 = 1.8e8;
pub const SQUID_LIFETIME_S: f64 = 7.6e-7;
pub const SQUID_OMEGA: f64 = 1.05;
pub const SQUID_DELTA1: f64 = 20.0;
pub const SQUID_DELTA2: f64 = 21.0;
/// Effective pair coupling quoted for trapped ions.
pub const ION_LAMBDA_PRIME_HZ: f64 = 1e4;
/// Motional decoherence time of the ion chain.
pub const ION_T_D_S: f64 = 1e-2;
/// Occupation probability assumed by the nominal budget.
pub const NOMINAL_POPULATION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Squid,
    Ion,
    Custom,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Squid => "squid",
            PresetName::Ion => "ion",
            PresetName::Custom => "custom",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "squid" => Ok(PresetName::Squid),
            "ion" => Ok(PresetName::Ion),
            "custom" => Ok(PresetName::Custom),
            other => Err(LabError::Usage(format!(
                "unknown preset '{other}' (expected squid, ion or custom)"
            ))),
        }
    }
}

/// Decoherence times of the platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetimes {
    /// Cavity photon lifetime and excited-state relaxation time.
    Cavity { t_c: f64, t_r: f64 },
    /// Motional decoherence time of the shared phonon mode.
    Motional { t_d: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub params: DriveParams,
    /// Physical value of `g` (angular, s⁻¹).
    pub g_physical: f64,
    pub lifetimes: Option<Lifetimes>,
}

impl Preset {
    /// Superconducting circuits in a microwave cavity.
    pub fn squid() -> Self {
        Self {
            name: PresetName::Squid,
            params: squid_params(2),
            g_physical: SQUID_G_HZ,
            lifetimes: Some(Lifetimes::Cavity {
                t_c: SQUID_LIFETIME_S,
                t_r: SQUID_LIFETIME_S,
            }),
        }
    }

    /// Trapped ions sharing a vibrational mode. Only `λ'` is quoted for
    /// this platform, so the dimensionless detunings reuse the superconducting
    /// ratios and `g_physical` is chosen to make `λ'` equal
    /// [`ION_LAMBDA_PRIME_HZ`].
    pub fn ion() -> Self {
        let params = squid_params(2);
        let lambda_prime = derive(&params)
            .and_then(|d| d.uniform_lambda_prime())
            .expect("preset parameters are uniform and non-degenerate");
        Self {
            name: PresetName::Ion,
            params,
            g_physical: ION_LAMBDA_PRIME_HZ / lambda_prime,
            lifetimes: Some(Lifetimes::Motional { t_d: ION_T_D_S }),
        }
    }

    pub fn from_config(config: &Config) -> LabResult<Self> {
        let params = config
            .params
            .as_ref()
            .ok_or_else(|| LabError::Usage("config has no [params] section".into()))?
            .to_drive_params()?;
        let physical = config.physical.clone().unwrap_or_default();
        let lifetimes = match (physical.t_c, physical.t_r, physical.t_d) {
            (Some(t_c), Some(t_r), None) => Some(Lifetimes::Cavity { t_c, t_r }),
            (None, None, Some(t_d)) => Some(Lifetimes::Motional { t_d }),
            (None, None, None) => None,
            _ => {
                return Err(LabError::Usage(
                    "[physical] needs either both t_c and t_r, or t_d alone".into(),
                ))
            }
        };
        let g_physical = physical.g_hz.unwrap_or(1.0);
        if !(g_physical > 0.0 && g_physical.is_finite()) {
            return Err(LabError::Usage("[physical] g_hz must be positive".into()));
        }
        for t in [physical.t_c, physical.t_r, physical.t_d].into_iter().flatten() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(LabError::Usage("lifetimes must be positive".into()));
            }
        }
        Ok(Self {
            name: PresetName::Custom,
            params,
            g_physical,
            lifetimes,
        })
    }

    /// Resolves `--preset` and `--config`.
    pub fn load(name: PresetName, config: Option<&Config>) -> LabResult<Self> {
        match (name, config) {
            (PresetName::Squid, _) => Ok(Self::squid()),
            (PresetName::Ion, _) => Ok(Self::ion()),
            (PresetName::Custom, Some(c)) => Self::from_config(c),
            (PresetName::Custom, None) => Err(LabError::Usage(
                "preset custom needs --config FILE".into(),
            )),
        }
    }

    /// The config that reproduces this preset.
    pub fn to_config(&self) -> Config {
        let (t_c, t_r, t_d) = match self.lifetimes {
            Some(Lifetimes::Cavity { t_c, t_r }) => (Some(t_c), Some(t_r), None),
            Some(Lifetimes::Motional { t_d }) => (None, None, Some(t_d)),
            None => (None, None, None),
        };
        Config {
            params: Some(ParamsSection::from_drive_params(&self.params)),
            physical: Some(PhysicalSection {
                g_hz: Some(self.g_physical),
                t_c,
                t_r,
                t_d,
            }),
            plan: None,
            sweep: None,
        }
    }

    pub fn with_atoms(&self, n_atoms: usize) -> LabResult<Self> {
        Ok(Self {
            params: self.params.with_atoms(n_atoms)?,
            ..self.clone()
        })
    }

    pub fn to_seconds(&self, t_units: f64) -> f64 {
        t_units / self.g_physical
    }

    pub fn to_units(&self, seconds: f64) -> f64 {
        seconds * self.g_physical
    }
}

pub fn squid_params(n_atoms: usize) -> DriveParams {
    DriveParams::uniform(n_atoms, 1.0, SQUID_OMEGA, SQUID_DELTA1, SQUID_DELTA2)
        .expect("preset parameters are valid")
}
