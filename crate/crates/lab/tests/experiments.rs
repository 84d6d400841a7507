//! Engine cross-checks and parameter sweeps.

use std::f64::consts::PI;

use dispersive_core::evolve::{evolve, EvolutionSpec, Sequential};
use dispersive_core::gates::{simulate, uniform_grid, Model};
use dispersive_core::hilbert::{Dims, QuantumState};
use dispersive_core::model::{derive, h_full_rotating};
use dispersive_lab::budget::CavityBudget;
use dispersive_lab::engine::{run_simulation, Engine, SpectralPropagator};
use dispersive_lab::experiments::{
    linspace, parse_range, run_cz, run_sweep, Metric, PointStatus, SweepParam,
};
use dispersive_lab::preset::{squid_params, Preset};
use dispersive_lab::LabError;

#[test]
fn spectral_matches_rk4_on_the_full_model() {
    let p = squid_params(2);
    let t = derive(&p).unwrap().gate_time().unwrap();
    let grid = uniform_grid(t, 4);
    let rk4 = simulate(&p, Model::Full, 3, t, &grid, &Sequential).unwrap();
    let eig = run_simulation(&p, Model::Full, Engine::Spectral, 3, t, &grid).unwrap();
    for (a, b) in rk4.columns.iter().zip(&eig.columns) {
        for (x, y) in a.projection.iter().zip(&b.projection) {
            assert!((x - y).norm() < 1e-6);
        }
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.survival - y.survival).norm() < 1e-6);
            assert!((x.excited - y.excited).abs() < 1e-6);
        }
    }
}

#[test]
fn propagator_agrees_with_integrator_on_a_short_run() {
    let p = squid_params(1);
    let dims = Dims::new(1, 3).unwrap();
    let h = h_full_rotating(&p, dims).unwrap();
    let psi = QuantumState::basis(dims, 1).unwrap();
    let exact = SpectralPropagator::new(&h).evolve(&psi, 2.5);
    let rk4 = evolve(&h, &psi, &EvolutionSpec::resolved(&h, 2.5)).unwrap();
    assert!(exact.max_abs_diff(&rk4) < 1e-8);
    assert!((exact.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn cz_run_defaults_to_the_gate_time() {
    let run = run_cz(&Preset::squid(), Model::EffDiag, Engine::Rk4, 4, None, 8).unwrap();
    assert!((run.t - PI / run.lambda_prime).abs() < 1e-9);
    assert!((run.t_seconds - 3.3225e-6).abs() < 1e-9);
    assert!((run.gate.fidelity - 1.0).abs() < 1e-9);
    assert!(run.phase_deviation.unwrap() < 1e-9);
    assert!(run.regime.pass);
}

#[test]
fn time_sweep_slope_is_lambda_prime_under_the_diagonal_model() {
    let preset = Preset::squid();
    let gate = derive(&preset.params).unwrap().gate_time().unwrap();
    let values = parse_range("0:gate:9", gate).unwrap();
    assert_eq!(values.len(), 9);
    assert!((values[8] - gate).abs() < 1e-12);
    let r = run_sweep(&preset, Model::EffDiag, Engine::Rk4, 4, SweepParam::T, &values, Metric::Phase).unwrap();
    let fit = r.fit.unwrap();
    assert!(fit.relative_error < 1e-6, "{fit:?}");
    assert!(fit.intercept.abs() < 1e-6, "{fit:?}");
    // The unwrapped column is monotone through π.
    let col: Vec<f64> = r.column().into_iter().map(Option::unwrap).collect();
    assert!(col.windows(2).all(|w| w[1].abs() > w[0].abs()));
}

#[test]
fn fock_truncation_sweep_converges() {
    let r = run_sweep(
        &Preset::squid(),
        Model::Full,
        Engine::Spectral,
        4,
        SweepParam::NMax,
        &[3.0, 4.0, 5.0],
        Metric::Fidelity,
    )
    .unwrap();
    let f: Vec<f64> = r.column().into_iter().map(Option::unwrap).collect();
    assert!((f[2] - f[1]).abs() < 1e-6, "{f:?}");
    assert!(f.iter().all(|&x| x > 0.95));
}

#[test]
fn larger_detunings_reduce_leakage() {
    let r = run_sweep(
        &Preset::squid(),
        Model::Full,
        Engine::Spectral,
        4,
        SweepParam::DeltaScale,
        &[1.0, 2.0],
        Metric::Leakage,
    )
    .unwrap();
    let l: Vec<f64> = r.column().into_iter().map(Option::unwrap).collect();
    assert!(l[1] < l[0], "{l:?}");
    assert!(r.points.iter().all(|p| p.status == PointStatus::Ok));
    let dev = run_sweep(
        &Preset::squid(),
        Model::Full,
        Engine::Spectral,
        4,
        SweepParam::DeltaScale,
        &[1.0, 2.0],
        Metric::PhaseDeviation,
    )
    .unwrap()
    .column();
    assert!(dev[1].unwrap() < dev[0].unwrap(), "{dev:?}");
}

#[test]
fn grids_are_validated() {
    assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    assert!(parse_range("1:2", 1.0).is_err());
    assert!(parse_range("a:2:3", 1.0).is_err());
    let preset = Preset::squid();
    for (param, values) in [
        (SweepParam::DeltaScale, vec![0.0]),
        (SweepParam::NMax, vec![2.5]),
        (SweepParam::T, vec![-1.0]),
    ] {
        let r = run_sweep(&preset, Model::EffDiag, Engine::Rk4, 2, param, &values, Metric::Fidelity);
        assert!(matches!(r, Err(LabError::Usage(_))), "{param:?}");
    }
    assert!("delta_scale".parse::<SweepParam>().is_ok());
    assert!("phase-deviation".parse::<Metric>().is_ok());
}

#[test]
fn cavity_budget_arithmetic() {
    let b = CavityBudget::new(7.6e-7, 7.6e-7, 0.01, 0.02, 3.3e-6).unwrap();
    assert_eq!(b.t_r_eff, 7.6e-5);
    assert_eq!(b.t_c_eff, 3.8e-5);
    assert!((b.headroom - 3.8e-5 / 3.3e-6).abs() < 1e-12);
    assert!(CavityBudget::new(1.0, 1.0, 0.0, 0.1, 1.0).is_err());
}
