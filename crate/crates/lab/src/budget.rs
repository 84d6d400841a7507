//! Decoherence budgets: how many gates fit in the effective lifetimes.

use std::f64::consts::{PI, TAU};

use dispersive_core::gates::Model;
use dispersive_core::model::derive;

use crate::engine::{run_simulation, Engine};
use crate::error::{LabError, LabResult};
use crate::preset::{Lifetimes, Preset, NOMINAL_POPULATION};

/// Effective lifetimes for given virtual populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityBudget {
    /// Excited-state population.
    pub p_r: f64,
    /// Photon population.
    pub p_c: f64,
    /// `t_r / P_r`.
    pub t_r_eff: f64,
    /// `t_c / P_c`.
    pub t_c_eff: f64,
    /// `min(t_r_eff, t_c_eff) / t_gate`.
    pub headroom: f64,
}

impl CavityBudget {
    pub fn new(t_c: f64, t_r: f64, p_r: f64, p_c: f64, t_gate: f64) -> LabResult<Self> {
        if !(p_r > 0.0 && p_c > 0.0) {
            return Err(LabError::Physics(
                "populations must be positive to bound lifetimes".into(),
            ));
        }
        let t_r_eff = t_r / p_r;
        let t_c_eff = t_c / p_c;
        Ok(Self {
            p_r,
            p_c,
            t_r_eff,
            t_c_eff,
            headroom: t_r_eff.min(t_c_eff) / t_gate,
        })
    }
}

/// Gate time against the motional decoherence time, with the quoted
/// effective coupling read as angular (s⁻¹) and as cyclic (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionalBudget {
    pub t_d: f64,
    pub lambda_prime_physical: f64,
    /// `π / λ'`.
    pub t_gate_angular: f64,
    /// `π / (2π λ')`.
    pub t_gate_cyclic: f64,
    /// `t_d / t_gate_angular`.
    pub headroom: f64,
    pub headroom_cyclic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub preset: String,
    /// `π / λ'` in units of `1/g`.
    pub t_gate_units: f64,
    pub t_gate: f64,
    /// With the nominal populations [`NOMINAL_POPULATION`].
    pub nominal: Option<CavityBudget>,
    /// With the populations measured over the gate.
    pub measured: Option<CavityBudget>,
    pub motional: Option<MotionalBudget>,
    /// Engine and truncation used for the measured populations.
    pub simulation: Option<(Engine, usize)>,
}

pub fn budget(preset: &Preset, engine: Engine, n_max: usize, samples: usize) -> LabResult<BudgetReport> {
    let d = derive(&preset.params)?;
    let lambda_prime = d.uniform_lambda_prime()?;
    let t_gate_units = PI / lambda_prime;
    let t_gate = preset.to_seconds(t_gate_units);
    let mut report = BudgetReport {
        preset: preset.name.to_string(),
        t_gate_units,
        t_gate,
        nominal: None,
        measured: None,
        motional: None,
        simulation: None,
    };
    match preset.lifetimes {
        Some(Lifetimes::Cavity { t_c, t_r }) => {
            report.nominal = Some(CavityBudget::new(
                t_c,
                t_r,
                NOMINAL_POPULATION,
                NOMINAL_POPULATION,
                t_gate,
            )?);
            let grid = dispersive_core::gates::uniform_grid(t_gate_units, samples.max(1));
            let sim = run_simulation(&preset.params, Model::Full, engine, n_max, t_gate_units, &grid)?;
            report.measured = Some(CavityBudget::new(
                t_c,
                t_r,
                sim.max_excited(),
                sim.max_photons(),
                t_gate,
            )?);
            report.simulation = Some((engine, n_max));
        }
        Some(Lifetimes::Motional { t_d }) => {
            let lp = preset.g_physical * lambda_prime;
            let t_gate_angular = PI / lp;
            let t_gate_cyclic = PI / (TAU * lp);
            report.motional = Some(MotionalBudget {
                t_d,
                lambda_prime_physical: lp,
                t_gate_angular,
                t_gate_cyclic,
                headroom: t_d / t_gate_angular,
                headroom_cyclic: t_d / t_gate_cyclic,
            });
        }
        None => {
            return Err(LabError::Usage(
                "budget needs lifetimes: add t_c and t_r, or t_d, to [physical]".into(),
            ))
        }
    }
    Ok(report)
}
