//! Controlled-Z runs and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use dispersive_core::gates::{
    gate_from_simulation, max_relative_phase_deviation, uniform_grid, GateResult, Model, Simulation,
};
use dispersive_core::model::{derive, regime_check, DriveParams, RegimeReport, DEFAULT_REGIME_THRESHOLD};
use dispersive_core::{wrap_phase, Error as CoreError};
use rayon::prelude::*;

use crate::engine::{run_simulation, Engine};
use crate::error::{LabError, LabResult};
use crate::preset::Preset;

/// Points on which the conditional phase is compared with `λ't`.
pub const PHASE_GRID_POINTS: usize = 16;

#[derive(Debug, Clone)]
pub struct CzRun {
    pub model: Model,
    pub engine: Engine,
    pub n_max: usize,
    pub lambda_prime: f64,
    /// Evolution time, units of `1/g`.
    pub t: f64,
    pub t_seconds: f64,
    pub regime: RegimeReport,
    pub sim: Simulation,
    pub gate: GateResult,
    /// Largest `| |φ(t_k)| - λ't_k | / λ't_k` over the sample grid.
    pub phase_deviation: Option<f64>,
}

/// Evolves every basis input to `t` (default `π/λ'`), sampling on
/// `samples` uniform points, and scores the result against controlled-Z.
pub fn run_cz(
    preset: &Preset,
    model: Model,
    engine: Engine,
    n_max: usize,
    t: Option<f64>,
    samples: usize,
) -> LabResult<CzRun> {
    let lambda_prime = derive(&preset.params)?.uniform_lambda_prime()?;
    let t = t.unwrap_or(std::f64::consts::PI / lambda_prime);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(LabError::Usage("--t must be finite and non-negative".into()));
    }
    let grid = if t > 0.0 { uniform_grid(t, samples) } else { Vec::new() };
    let sim = run_simulation(&preset.params, model, engine, n_max, t, &grid)?;
    let gate = gate_from_simulation(&preset.params, &sim)?;
    let phase_deviation = max_relative_phase_deviation(&sim, lambda_prime)?;
    Ok(CzRun {
        model,
        engine,
        n_max,
        lambda_prime,
        t,
        t_seconds: preset.to_seconds(t),
        regime: regime_check(&preset.params, DEFAULT_REGIME_THRESHOLD),
        sim,
        gate,
        phase_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Both detunings multiplied by the value.
    DeltaScale,
    Omega,
    NMax,
    /// Evolution time in units of `1/g`.
    T,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::DeltaScale => "delta-scale",
            SweepParam::Omega => "omega",
            SweepParam::NMax => "n-max",
            SweepParam::T => "t",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "delta-scale" | "delta_scale" => Ok(SweepParam::DeltaScale),
            "omega" => Ok(SweepParam::Omega),
            "n-max" | "n_max" => Ok(SweepParam::NMax),
            "t" => Ok(SweepParam::T),
            other => Err(LabError::Usage(format!(
                "unknown sweep parameter '{other}' (expected delta-scale, omega, n-max or t)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Controlled-Z fidelity after the correction frame.
    Fidelity,
    /// Largest per-column leakage at the final time.
    Leakage,
    /// Largest relative deviation of `|φ|` from `λ't` on the 16-point grid.
    PhaseDeviation,
    /// Conditional phase at the final time, unwrapped along the sweep.
    Phase,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Fidelity => "fidelity",
            Metric::Leakage => "leakage",
            Metric::PhaseDeviation => "phase-deviation",
            Metric::Phase => "phase",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "fidelity" => Ok(Metric::Fidelity),
            "leakage" => Ok(Metric::Leakage),
            "phase-deviation" | "phase_deviation" => Ok(Metric::PhaseDeviation),
            "phase" => Ok(Metric::Phase),
            other => Err(LabError::Usage(format!(
                "unknown metric '{other}' (expected fidelity, leakage, phase-deviation or phase)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    /// A survival amplitude fell to the leakage threshold.
    Leakage,
    /// The metric has no value here (e.g. a relative deviation at `t = 0`).
    Undefined,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Leakage => "leakage",
            PointStatus::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub metric: Option<f64>,
    pub status: PointStatus,
}

/// Least-squares line through the `(t, φ)` points of a time sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub slope: f64,
    pub intercept: f64,
    pub lambda_prime: f64,
    /// `| |slope| - λ' | / λ'`.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub param: SweepParam,
    pub metric: Metric,
    pub model: Model,
    pub engine: Engine,
    pub n_max: usize,
    pub points: Vec<SweepPoint>,
    pub fit: Option<PhaseFit>,
}

impl SweepReport {
    /// Metric values in grid order, `None` where undefined.
    pub fn column(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.metric).collect()
    }
}

/// Linearly spaced `count` points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `start:stop:count`, where either end may be `gate` (`π/λ'`).
pub fn parse_range(text: &str, gate_time: f64) -> LabResult<Vec<f64>> {
    let bad = || LabError::Usage(format!("invalid range '{text}' (expected start:stop:count)"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let end = |s: &str| -> LabResult<f64> {
        match s.trim() {
            "gate" => Ok(gate_time),
            other => other.parse().map_err(|_| bad()),
        }
    };
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    Ok(linspace(end(start)?, end(stop)?, count))
}

fn check_grid(param: SweepParam, values: &[f64]) -> LabResult<()> {
    if values.is_empty() {
        return Err(LabError::Usage("sweep grid is empty".into()));
    }
    for &v in values {
        let ok = v.is_finite()
            && match param {
                SweepParam::DeltaScale => v > 0.0,
                SweepParam::Omega => v != 0.0,
                SweepParam::NMax => v >= 0.0 && v.fract() == 0.0 && v <= 64.0,
                SweepParam::T => v >= 0.0,
            };
        if !ok {
            return Err(LabError::Usage(format!("invalid {param} grid value {v}")));
        }
    }
    Ok(())
}

struct Point {
    params: DriveParams,
    n_max: usize,
    t: f64,
}

fn point(preset: &Preset, param: SweepParam, n_max: usize, value: f64) -> LabResult<Point> {
    let params = match param {
        SweepParam::DeltaScale => preset.params.scale_detunings(value)?,
        SweepParam::Omega => preset.params.with_drive(value)?,
        _ => preset.params.clone(),
    };
    let n_max = if param == SweepParam::NMax {
        value as usize
    } else {
        n_max
    };
    let t = match param {
        SweepParam::T => value,
        _ => derive(&params)?.gate_time()?,
    };
    Ok(Point { params, n_max, t })
}

fn evaluate(p: &Point, model: Model, engine: Engine, metric: Metric) -> LabResult<(Option<f64>, PointStatus)> {
    let lambda_prime = derive(&p.params)?.uniform_lambda_prime()?;
    let grid = match metric {
        Metric::PhaseDeviation if p.t > 0.0 => uniform_grid(p.t, PHASE_GRID_POINTS),
        _ => Vec::new(),
    };
    let sim = run_simulation(&p.params, model, engine, p.n_max, p.t, &grid)?;
    let value = match metric {
        Metric::Leakage => Some(sim.subspace()?.max_leakage()),
        Metric::Fidelity => match gate_from_simulation(&p.params, &sim) {
            Ok(g) => Some(g.fidelity),
            Err(CoreError::ExcessiveLeakage { .. }) => return Ok((None, PointStatus::Leakage)),
            Err(e) => return Err(e.into()),
        },
        Metric::Phase => match sim.phase_report() {
            Ok(r) => Some(r.phi),
            Err(CoreError::ExcessiveLeakage { .. }) => return Ok((None, PointStatus::Leakage)),
            Err(e) => return Err(e.into()),
        },
        Metric::PhaseDeviation => {
            if p.t == 0.0 {
                return Ok((None, PointStatus::Undefined));
            }
            match max_relative_phase_deviation(&sim, lambda_prime)? {
                Some(d) => Some(d),
                None => return Ok((None, PointStatus::Leakage)),
            }
        }
    };
    Ok((value, PointStatus::Ok))
}

/// Evaluates `metric` at every grid value in parallel and returns the
/// points in grid order.
pub fn run_sweep(
    preset: &Preset,
    model: Model,
    engine: Engine,
    n_max: usize,
    param: SweepParam,
    values: &[f64],
    metric: Metric,
) -> LabResult<SweepReport> {
    check_grid(param, values)?;
    let points = values
        .par_iter()
        .map(|&value| {
            let p = point(preset, param, n_max, value)?;
            let (metric, status) = evaluate(&p, model, engine, metric)?;
            Ok(SweepPoint { value, metric, status })
        })
        .collect::<LabResult<Vec<_>>>()?;
    let mut report = SweepReport {
        param,
        metric,
        model,
        engine,
        n_max,
        points,
        fit: None,
    };
    if metric == Metric::Phase {
        unwrap_points(&mut report.points);
        if param == SweepParam::T {
            let lambda_prime = derive(&preset.params)?.uniform_lambda_prime()?;
            report.fit = fit_line(&report.points).map(|(slope, intercept)| PhaseFit {
                slope,
                intercept,
                lambda_prime,
                relative_error: (slope.abs() - lambda_prime).abs() / lambda_prime,
            });
        }
    }
    Ok(report)
}

/// Removes 2π jumps between consecutive defined phases, starting from the
/// branch nearest zero.
fn unwrap_points(points: &mut [SweepPoint]) {
    let mut prev = 0.0;
    for p in points.iter_mut() {
        if let Some(phi) = p.metric {
            let next = prev + wrap_phase(phi - prev);
            p.metric = Some(next);
            prev = next;
        }
    }
}

fn fit_line(points: &[SweepPoint]) -> Option<(f64, f64)> {
    let xy: Vec<(f64, f64)> = points.iter().filter_map(|p| p.metric.map(|m| (p.value, m))).collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
