//! Conditional phases, the single-qubit correction frame, and gate scoring.
//!
//! Bitstrings index qubit registers with atom 0 as the most significant bit,
//! so `0b01` is "atom 0 in |0⟩, atom 1 in |1⟩".

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use num_traits::Float;

use crate::evolve::{
    evolve_sampled, ColumnRunner, EvolutionSpec, Hamiltonian, SubspaceEvolution,
    MAX_SUBSPACE_QUBITS,
};
use crate::hilbert::{Dims, QuantumState, Selector};
use crate::matrix::CMatrix;
use crate::model::{
    derive, h_eff_cavity, h_eff_diag, h_full, regime_check, DriveParams, DEFAULT_REGIME_THRESHOLD,
};
use crate::{wrap_phase, Error, Result, C64};

/// Survival amplitude magnitude at or below which a phase is meaningless.
pub const LEAKAGE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Both fields explicitly time dependent, excited level included.
    Full,
    /// Excited level eliminated, cavity kept.
    EffCavity,
    /// Vacuum-cavity diagonal Hamiltonian with self-energy terms.
    EffDiag,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Full, Model::EffCavity, Model::EffDiag];

    pub fn name(self) -> &'static str {
        match self {
            Model::Full => "full",
            Model::EffCavity => "eff_cavity",
            Model::EffDiag => "eff_diag",
        }
    }

    pub fn hamiltonian(self, params: &DriveParams, dims: Dims) -> Result<Box<dyn Hamiltonian>> {
        Ok(match self {
            Model::Full => Box::new(h_full(params, dims)?),
            Model::EffCavity => Box::new(h_eff_cavity(params, dims)?),
            Model::EffDiag => Box::new(h_eff_diag(params, dims, true)?),
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Model::Full),
            "eff_cavity" | "eff-cavity" => Ok(Model::EffCavity),
            "eff_diag" | "eff-diag" => Ok(Model::EffDiag),
            _ => Err(Error::InvalidParams("unknown model")),
        }
    }
}

/// `bits` as an `n`-character string, atom 0 first.
pub fn bitstring(bits: usize, n: usize) -> String {
    (0..n)
        .map(|j| if bits >> (n - 1 - j) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// One observation of a column evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `⟨b, 0|ψ_b(t)⟩`.
    pub survival: C64,
    /// Population outside qubit ⊗ vacuum.
    pub leakage: f64,
    /// Population with at least one atom in |e⟩.
    pub excited: f64,
    /// Population with at least one photon.
    pub photons: f64,
    /// `‖ψ(t)‖`.
    pub norm: f64,
}

impl Sample {
    pub fn observe(t: f64, bits: usize, state: &QuantumState) -> Self {
        let dims = state.dims();
        Self {
            t,
            survival: state.amplitude(dims.qubit_index(bits, 0)),
            leakage: 1.0 - state.population(Selector::QubitSubspace),
            excited: state.population(Selector::AnyExcited),
            photons: state.population(Selector::AnyPhotons),
            norm: state.norm(),
        }
    }
}

/// Evolution of one computational basis input.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTrack {
    pub bits: usize,
    pub samples: Vec<Sample>,
    /// Final state projected onto qubit ⊗ vacuum.
    pub projection: Vec<C64>,
    /// `‖ψ(t_final)‖`.
    pub final_norm: f64,
}

/// Every computational basis input evolved to `t_final`, with observations
/// at the requested sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub model: Model,
    pub n_qubits: usize,
    pub t_final: f64,
    pub columns: Vec<ColumnTrack>,
}

/// Evolves all `2^n` basis inputs (cavity in vacuum) under `model`.
pub fn simulate<R: ColumnRunner>(
    params: &DriveParams,
    model: Model,
    n_max: usize,
    t_final: f64,
    samples: &[f64],
    runner: &R,
) -> Result<Simulation> {
    let n = params.n_atoms();
    if n > MAX_SUBSPACE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_SUBSPACE_QUBITS,
        });
    }
    let dims = Dims::new(n, n_max)?;
    let h = model.hamiltonian(params, dims)?;
    let spec = EvolutionSpec::resolved(&h, t_final);
    let columns = runner.run(1usize << n, |bits| {
        let psi0 = QuantumState::basis(dims, dims.qubit_index(bits, 0))?;
        let mut track = Vec::with_capacity(samples.len());
        let last = evolve_sampled(&h, &psi0, &spec, samples, |t, state| {
            track.push(Sample::observe(t, bits, state))
        })?;
        Ok(ColumnTrack {
            bits,
            samples: track,
            projection: last.qubit_projection(),
            final_norm: last.norm(),
        })
    })?;
    Ok(Simulation {
        model,
        n_qubits: n,
        t_final,
        columns,
    })
}

impl Simulation {
    pub fn subspace(&self) -> Result<SubspaceEvolution> {
        let cols: Vec<Vec<C64>> = self.columns.iter().map(|c| c.projection.clone()).collect();
        let leakage = cols
            .iter()
            .map(|c| 1.0 - c.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .collect();
        Ok(SubspaceEvolution {
            unitary: CMatrix::from_columns(&cols)?,
            leakage,
        })
    }

    pub fn phase_report(&self) -> Result<PhaseReport> {
        PhaseReport::from_subspace(&self.subspace()?, self.model, self.t_final)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.columns
            .first()
            .map(|c| c.samples.iter().map(|s| s.t).collect())
            .unwrap_or_default()
    }

    /// Conditional phase at each sample, `None` where a survival amplitude
    /// has dropped to the leakage threshold.
    pub fn phi_series(&self) -> Result<Vec<Option<f64>>> {
        check_pair(self.n_qubits)?;
        let k = self.sample_times().len();
        Ok((0..k)
            .map(|i| {
                let survival = |bits: usize| self.columns[bits].samples[i].survival;
                conditional_phase(survival)
            })
            .collect())
    }

    /// [`Self::phi_series`] unwrapped along the samples, starting from the
    /// branch nearest zero. `None` once any sample is undefined.
    pub fn unwrapped_phi_series(&self) -> Result<Option<Vec<f64>>> {
        let raw = self.phi_series()?;
        let mut out = Vec::with_capacity(raw.len());
        let mut prev = 0.0;
        for phi in raw {
            let Some(phi) = phi else { return Ok(None) };
            let next = prev + wrap_phase(phi - prev);
            out.push(next);
            prev = next;
        }
        Ok(Some(out))
    }

    /// Largest excited-state population over all samples and inputs.
    pub fn max_excited(&self) -> f64 {
        self.max_over(|s| s.excited)
    }

    /// Largest photon population over all samples and inputs.
    pub fn max_photons(&self) -> f64 {
        self.max_over(|s| s.photons)
    }

    /// Largest `|‖ψ‖ - 1|` over all samples, inputs and final states.
    pub fn max_norm_drift(&self) -> f64 {
        let end = self.columns.iter().map(|c| Float::abs(c.final_norm - 1.0));
        self.max_over(|s| Float::abs(s.norm - 1.0)).max(end.fold(0.0, f64::max))
    }

    /// Largest leakage over all samples and inputs.
    pub fn max_sampled_leakage(&self) -> f64 {
        self.max_over(|s| s.leakage)
    }

    fn max_over(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| c.samples.iter())
            .map(f)
            .fold(0.0, f64::max)
    }
}

fn check_pair(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams("conditional phase needs at least two atoms"));
    }
    Ok(())
}

/// `-(p(11) - p(01) - p(10) + p(00))` on the last two qubits, all others
/// in |0⟩, wrapped to `(-π, π]`.
fn conditional_phase(survival: impl Fn(usize) -> C64) -> Option<f64> {
    let mut acc = 0.0;
    for (bits, sign) in [(0b11, 1.0), (0b01, -1.0), (0b10, -1.0), (0b00, 1.0)] {
        let a = survival(bits);
        if a.norm() <= LEAKAGE_THRESHOLD {
            return None;
        }
        acc += sign * a.arg();
    }
    Some(wrap_phase(-acc))
}

/// Phases of the computational basis states after a gate.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub model: Model,
    pub n_qubits: usize,
    pub t: f64,
    /// `arg U_bb` in `(-π, π]`, indexed by bitstring.
    pub phases: Vec<f64>,
    /// `|U_bb|`.
    pub survival: Vec<f64>,
    /// `1 - ‖column_b‖²`.
    pub leakage: Vec<f64>,
    /// Single-qubit phase `-phase(0…01)`.
    pub xi_i: f64,
    /// Conditional phase on the last two qubits, in `(-π, π]`.
    pub phi: f64,
}

impl PhaseReport {
    pub fn from_subspace(sub: &SubspaceEvolution, model: Model, t: f64) -> Result<Self> {
        let d = sub.unitary.dim();
        let n = d.trailing_zeros() as usize;
        check_pair(n)?;
        let diag = sub.unitary.diagonal();
        for (bits, a) in diag.iter().enumerate() {
            if a.norm() <= LEAKAGE_THRESHOLD {
                return Err(Error::ExcessiveLeakage {
                    basis: bitstring(bits, n),
                    survival: a.norm(),
                });
            }
        }
        let phi = conditional_phase(|b| diag[b]).expect("survival checked above");
        Ok(Self {
            model,
            n_qubits: n,
            t,
            phases: diag.iter().map(|a| a.arg()).collect(),
            survival: diag.iter().map(|a| a.norm()).collect(),
            leakage: sub.leakage.clone(),
            xi_i: -diag[1].arg(),
            phi,
        })
    }

    pub fn phase(&self, bits: usize) -> f64 {
        self.phases[bits]
    }

    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolves every basis input for time `t` and extracts the phases.
pub fn truth_table<R: ColumnRunner>(
    params: &DriveParams,
    t: f64,
    model: Model,
    n_max: usize,
    runner: &R,
) -> Result<PhaseReport> {
    check_pair(params.n_atoms())?;
    simulate(params, model, n_max, t, &[], runner)?.phase_report()
}

/// Left-multiplies by `⊗_j diag(1, e^{iξ})`.
pub fn apply_correction_frame(u: &CMatrix, xi_i: f64) -> CMatrix {
    let mut out = u.clone();
    for row in 0..u.dim() {
        let phase = C64::from_polar(1.0, xi_i * row.count_ones() as f64);
        for col in 0..u.dim() {
            out[(row, col)] = u[(row, col)] * phase;
        }
    }
    out
}

/// Outcome of a piecewise-constant `λ'` schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSchedule {
    /// `φ' = Σ λ'_i · duration_i`.
    pub accumulated: f64,
    /// `φ_target - φ'` wrapped to `(-π, π]`.
    pub residual: f64,
}

pub fn tunable_phase_schedule(phi_target: f64, segments: &[(f64, f64)]) -> Result<PhaseSchedule> {
    check_target(phi_target)?;
    if segments.iter().any(|&(_, d)| !(d >= 0.0)) {
        return Err(Error::InvalidSchedule("durations must be non-negative"));
    }
    let accumulated = segments.iter().map(|&(rate, d)| rate * d).sum::<f64>();
    if phi_target != 0.0 && segments.iter().all(|&(rate, d)| rate == 0.0 || d == 0.0) {
        return Err(Error::InvalidSchedule("no segment accumulates phase"));
    }
    Ok(PhaseSchedule {
        accumulated,
        residual: wrap_phase(phi_target - accumulated),
    })
}

/// Shortest single-segment duration reaching `phi_target` (mod 2π).
pub fn duration_for_phase(phi_target: f64, lambda_prime: f64) -> Result<f64> {
    check_target(phi_target)?;
    if phi_target == 0.0 {
        return Ok(0.0);
    }
    if lambda_prime == 0.0 || !lambda_prime.is_finite() {
        return Err(Error::InvalidSchedule("lambda' = 0 cannot reach a nonzero phase"));
    }
    let signed = if lambda_prime > 0.0 {
        phi_target
    } else {
        TAU - phi_target
    };
    Ok(signed / Float::abs(lambda_prime))
}

fn check_target(phi: f64) -> Result<()> {
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::InvalidSchedule("target phase must lie in [0, 2π)"));
    }
    Ok(())
}

/// Diagonal `2^m` matrix with entry `e^{-iλ't·w(w-1)/2}` for Hamming weight
/// `w`.
pub fn entangling_unitary(m: usize, t: f64, lambda_prime: f64) -> Result<CMatrix> {
    if m < 2 {
        return Err(Error::InvalidParams("entangling gate needs at least two qubits"));
    }
    if m > MAX_SUBSPACE_QUBITS {
        return Err(Error::TooManyQubits {
            n: m,
            max: MAX_SUBSPACE_QUBITS,
        });
    }
    let diag: Vec<C64> = (0..1usize << m)
        .map(|b| {
            let w = b.count_ones() as f64;
            C64::from_polar(1.0, -lambda_prime * t * w * (w - 1.0) / 2.0)
        })
        .collect();
    Ok(CMatrix::from_diagonal(&diag))
}

/// Controlled-Z on every pair of `m` qubits.
pub fn all_pairs_cz(m: usize) -> Result<CMatrix> {
    entangling_unitary(m, PI, 1.0)
}

/// `|tr(U_ideal† U_sim)|² / (d · tr(U_sim† U_sim))`.
pub fn gate_fidelity(u_sim: &CMatrix, u_ideal: &CMatrix) -> Result<f64> {
    if u_sim.dim() != u_ideal.dim() {
        return Err(Error::ShapeMismatch {
            left: u_sim.dim(),
            right: u_ideal.dim(),
        });
    }
    let d = u_sim.dim() as f64;
    let overlap = u_ideal.adjoint().mul(u_sim)?.trace().norm_sqr();
    let weight = u_sim.adjoint().mul(u_sim)?.trace().re;
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok((overlap / (d * weight)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    pub model: Model,
    pub t_gate: f64,
    /// Simulated qubit-subspace block after the correction frame.
    pub unitary: CMatrix,
    /// Block before correction.
    pub raw: CMatrix,
    pub ideal: CMatrix,
    pub fidelity: f64,
    pub leakage: Vec<f64>,
    pub max_leakage: f64,
    /// Correction applied, measured from the same run.
    pub xi_i: f64,
    pub phases: PhaseReport,
    pub regime_pass: bool,
}

/// Controlled-Z (all pairs for more than two atoms) at `t = π/λ'`, with the
/// correction frame calibrated on the simulated `phase(0…01)`.
pub fn end_to_end_cz<R: ColumnRunner>(
    params: &DriveParams,
    model: Model,
    n_max: usize,
    runner: &R,
) -> Result<GateResult> {
    let t = derive(params)?.gate_time()?;
    let sim = simulate(params, model, n_max, t, &[], runner)?;
    gate_from_simulation(params, &sim)
}

/// Scores an existing simulation that ran to the controlled-Z time.
pub fn gate_from_simulation(params: &DriveParams, sim: &Simulation) -> Result<GateResult> {
    let sub = sim.subspace()?;
    let phases = PhaseReport::from_subspace(&sub, sim.model, sim.t_final)?;
    let unitary = apply_correction_frame(&sub.unitary, phases.xi_i);
    let ideal = all_pairs_cz(sim.n_qubits)?;
    let fidelity = gate_fidelity(&unitary, &ideal)?;
    Ok(GateResult {
        model: sim.model,
        t_gate: sim.t_final,
        max_leakage: sub.max_leakage(),
        leakage: sub.leakage.clone(),
        raw: sub.unitary,
        ideal,
        unitary,
        fidelity,
        xi_i: phases.xi_i,
        phases,
        regime_pass: regime_check(params, DEFAULT_REGIME_THRESHOLD).pass,
    })
}

/// Controlled-Z fidelity at `n_max` and `n_max + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConvergence {
    pub n_max: usize,
    pub fidelity: f64,
    pub fidelity_next: f64,
}

impl FockConvergence {
    pub fn delta(&self) -> f64 {
        Float::abs(self.fidelity_next - self.fidelity)
    }
}

pub fn fock_convergence<R: ColumnRunner>(
    params: &DriveParams,
    model: Model,
    n_max: usize,
    runner: &R,
) -> Result<FockConvergence> {
    Ok(FockConvergence {
        n_max,
        fidelity: end_to_end_cz(params, model, n_max, runner)?.fidelity,
        fidelity_next: end_to_end_cz(params, model, n_max + 1, runner)?.fidelity,
    })
}

/// `k·t_final/count` for `k = 1..=count`.
pub fn uniform_grid(t_final: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| t_final * k as f64 / count as f64)
        .collect()
}

/// Largest `| |φ(t)| - λ't | / (λ't)` over the samples of `sim`.
pub fn max_relative_phase_deviation(sim: &Simulation, lambda_prime: f64) -> Result<Option<f64>> {
    let Some(phi) = sim.unwrapped_phi_series()? else {
        return Ok(None);
    };
    Ok(Some(
        sim.sample_times()
            .iter()
            .zip(&phi)
            .filter(|(t, _)| **t > 0.0)
            .map(|(t, p)| {
                let expected = Float::abs(lambda_prime * t);
                Float::abs(Float::abs(*p) - expected) / expected
            })
            .fold(0.0, f64::max),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Sequential;
    use alloc::vec;

    fn squid() -> DriveParams {
        DriveParams::uniform(2, 1.0, 1.05, 20.0, 21.0).unwrap()
    }

    #[test]
    fn bitstrings_put_atom_zero_first() {
        assert_eq!(bitstring(0b01, 2), "01");
        assert_eq!(bitstring(0b100, 3), "100");
    }

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert!("nope".parse::<Model>().is_err());
    }

    #[test]
    fn eff_diag_truth_table_is_analytic() {
        let p = squid();
        let d = derive(&p).unwrap();
        let lp = d.uniform_lambda_prime().unwrap();
        let rate = d.single_qubit_rate().unwrap();
        let t = PI / lp;
        let r = truth_table(&p, t, Model::EffDiag, 4, &Sequential).unwrap();
        assert_eq!(r.phase(0), 0.0);
        assert!((r.xi_i - wrap_phase(rate * t)).abs() < 1e-9);
        assert!((wrap_phase(r.phi - PI)).abs() < 1e-9);
        let expected11 = wrap_phase(-(2.0 * rate * t + lp * t));
        assert!(wrap_phase(r.phase(3) - expected11).abs() < 1e-9);
        assert!(r.max_leakage() < 1e-15);
    }

    #[test]
    fn correction_frame_examples() {
        let xi = 0.37;
        let u = CMatrix::from_diagonal(&[
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, -xi),
            C64::from_polar(1.0, -xi),
            C64::from_polar(1.0, -2.0 * xi),
        ]);
        let fixed = apply_correction_frame(&u, xi);
        assert!(fixed.max_abs_diff(&CMatrix::identity(4)).unwrap() < 1e-15);
        assert_eq!(apply_correction_frame(&u, 0.0), u);
    }

    #[test]
    fn schedule_examples() {
        let lp = 5.253125e-3;
        assert!((duration_for_phase(PI, lp).unwrap() - PI / lp).abs() < 1e-9);
        assert_eq!(duration_for_phase(0.0, lp).unwrap(), 0.0);
        assert!(duration_for_phase(1.0, 0.0).is_err());
        let s = tunable_phase_schedule(PI, &[(lp, PI / (2.0 * lp)), (lp, PI / (2.0 * lp))]).unwrap();
        assert!((s.accumulated - PI).abs() < 1e-12);
        assert!(s.residual.abs() < 1e-12);
        assert!(tunable_phase_schedule(PI, &[(lp, -1.0)]).is_err());
        assert!(tunable_phase_schedule(1.0, &[(0.0, 5.0)]).is_err());
        assert!(tunable_phase_schedule(TAU, &[]).is_err());
    }

    #[test]
    fn negative_rate_takes_the_other_way_round() {
        let d = duration_for_phase(PI / 2.0, -1.0).unwrap();
        assert!((d - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let cz = all_pairs_cz(2).unwrap();
        assert!((gate_fidelity(&cz, &cz).unwrap() - 1.0).abs() < 1e-15);
        let rotated = cz.scale(C64::from_polar(1.0, 0.9));
        assert!((gate_fidelity(&rotated, &cz).unwrap() - 1.0).abs() < 1e-14);
        assert!((gate_fidelity(&CMatrix::identity(4), &cz).unwrap() - 0.25).abs() < 1e-15);
        assert!(gate_fidelity(&CMatrix::identity(2), &cz).is_err());
    }

    #[test]
    fn entangling_three_qubits() {
        let u = entangling_unitary(3, PI, 1.0).unwrap();
        let expected = [1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0];
        for (b, e) in expected.iter().enumerate() {
            assert!((u[(b, b)] - C64::new(*e, 0.0)).norm() < 1e-12);
        }
        assert!(entangling_unitary(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn eff_diag_cz_is_exact() {
        let g = end_to_end_cz(&squid(), Model::EffDiag, 4, &Sequential).unwrap();
        assert!((g.fidelity - 1.0).abs() < 1e-9);
        assert!(g.regime_pass);
        let target = CMatrix::from_diagonal(&[
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]);
        assert!(g.unitary.max_abs_diff(&target).unwrap() < 1e-9);
    }

    #[test]
    fn excessive_leakage_names_the_state() {
        let mut u = CMatrix::identity(4);
        u[(3, 3)] = C64::new(0.3, 0.0);
        let sub = SubspaceEvolution {
            unitary: u,
            leakage: vec![0.0, 0.0, 0.0, 0.91],
        };
        match PhaseReport::from_subspace(&sub, Model::Full, 1.0) {
            Err(Error::ExcessiveLeakage { basis, .. }) => assert_eq!(basis, "11"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unwrapping_follows_the_branch() {
        let p = squid();
        let lp = derive(&p).unwrap().uniform_lambda_prime().unwrap();
        let t = 1.5 * PI / lp;
        let sim = simulate(&p, Model::EffDiag, 0, t, &uniform_grid(t, 12), &Sequential).unwrap();
        let phi = sim.unwrapped_phi_series().unwrap().unwrap();
        let last = *phi.last().unwrap();
        assert!((last - 1.5 * PI).abs() < 1e-9);
        assert!(max_relative_phase_deviation(&sim, lp).unwrap().unwrap() < 1e-9);
    }
}
