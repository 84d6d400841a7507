//! Drive parameters, the atom–mode Hamiltonians and the dispersive-regime
//! checks.
//!
//! `N` atoms with levels `|0⟩, |1⟩, |e⟩` share one bosonic mode `a`. The
//! `|1⟩ ↔ |e⟩` transition of atom `j` is driven by the mode (coupling `g_j`,
//! detuning `Δ1`) and by a classical field (Rabi frequency `Ω_j`, detuning
//! `Δ2`). In the interaction picture
//!
//! ```text
//! H(t) = Σ_j (g_j e^{iΔ1 t} a |e_j⟩⟨1_j| + Ω_j e^{iΔ2 t} |e_j⟩⟨1_j|) + h.c.
//! ```
//!
//! Eliminating `|e⟩` for `Δ1 ≫ |g_j|`, `Δ2 ≫ |Ω_j|` leaves Stark shifts on
//! `|1_j⟩` plus a mode/drive exchange at `δ = Δ2 - Δ1` with amplitude
//! `λ_j = Ω_j* g_j (1/Δ1 + 1/Δ2)/2`. For `δ` large compared to those shifts
//! the mode is only virtually excited and atoms pick up the pairwise
//! conditional shift `λ' = 2λ²/δ`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::evolve::{Hamiltonian, ModulatedHamiltonian};
use crate::hilbert::{Dims, Level};
use crate::operator::SparseOperator;
use crate::{Error, Result, C64};

/// Default threshold used to read "≫" in the validity conditions.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DriveParams {
    couplings: Vec<C64>,
    drives: Vec<C64>,
    delta1: f64,
    delta2: f64,
}

impl DriveParams {
    /// Per-atom couplings `g_j` and Rabi frequencies `Ω_j`.
    pub fn new(couplings: Vec<C64>, drives: Vec<C64>, delta1: f64, delta2: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidParams("at least one atom is required"));
        }
        if couplings.len() != drives.len() {
            return Err(Error::InvalidParams("one coupling and one drive per atom"));
        }
        if delta1 == 0.0 || delta2 == 0.0 {
            return Err(Error::InvalidParams("detunings must be nonzero"));
        }
        if !(delta1.is_finite() && delta2.is_finite()) {
            return Err(Error::InvalidParams("detunings must be finite"));
        }
        Ok(Self {
            couplings,
            drives,
            delta1,
            delta2,
        })
    }

    /// `g_j = g`, `Ω_j = Ω`, both real.
    pub fn uniform(n_atoms: usize, g: f64, omega: f64, delta1: f64, delta2: f64) -> Result<Self> {
        Self::new(
            alloc::vec![C64::new(g, 0.0); n_atoms],
            alloc::vec![C64::new(omega, 0.0); n_atoms],
            delta1,
            delta2,
        )
    }

    pub fn n_atoms(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[C64] {
        &self.couplings
    }

    pub fn drives(&self) -> &[C64] {
        &self.drives
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    /// `(g, Ω)` when every atom has the same real coupling and drive.
    pub fn uniform_values(&self) -> Option<(f64, f64)> {
        let g = self.couplings[0];
        let w = self.drives[0];
        let same = self.couplings.iter().all(|&c| c == g) && self.drives.iter().all(|&d| d == w);
        (same && g.im == 0.0 && w.im == 0.0).then_some((g.re, w.re))
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_values().is_some()
    }

    /// Same parameters for a different number of atoms. Requires uniform
    /// parameters.
    pub fn with_atoms(&self, n_atoms: usize) -> Result<Self> {
        let (g, w) = self.uniform_values().ok_or(Error::NonUniform)?;
        Self::uniform(n_atoms, g, w, self.delta1, self.delta2)
    }

    /// Multiplies both detunings by `factor`, keeping `Δ2/Δ1`, `g` and `Ω`.
    pub fn scale_detunings(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.couplings.clone(),
            self.drives.clone(),
            self.delta1 * factor,
            self.delta2 * factor,
        )
    }

    /// Replaces every `Ω_j` by the real value `omega`.
    pub fn with_drive(&self, omega: f64) -> Result<Self> {
        Self::new(
            self.couplings.clone(),
            alloc::vec![C64::new(omega, 0.0); self.n_atoms()],
            self.delta1,
            self.delta2,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    /// `δ = Δ2 - Δ1`.
    pub delta: f64,
    /// `λ_j = Ω_j* g_j (1/Δ1 + 1/Δ2)/2`.
    pub lambdas: Vec<C64>,
    /// Uniform `λ`, present only for uniform real parameters.
    pub lambda: Option<f64>,
    /// Uniform `λ' = 2λ²/δ`.
    pub lambda_prime: Option<f64>,
    stark_drive: Option<f64>,
}

impl DerivedParams {
    pub fn uniform_lambda(&self) -> Result<f64> {
        self.lambda.ok_or(Error::NonUniform)
    }

    pub fn uniform_lambda_prime(&self) -> Result<f64> {
        self.lambda_prime.ok_or(Error::NonUniform)
    }

    /// Single-qubit shift rate `-Ω²/Δ2 + λ²/δ`; `ξ_I = rate · t`.
    pub fn single_qubit_rate(&self) -> Result<f64> {
        let lambda = self.uniform_lambda()?;
        let stark = self.stark_drive.ok_or(Error::NonUniform)?;
        Ok(-stark + lambda * lambda / self.delta)
    }

    /// `π/λ'`, the controlled-Z time.
    pub fn gate_time(&self) -> Result<f64> {
        Ok(core::f64::consts::PI / self.uniform_lambda_prime()?)
    }
}

pub fn derive(params: &DriveParams) -> Result<DerivedParams> {
    let delta = params.delta2 - params.delta1;
    if delta == 0.0 {
        return Err(Error::DegenerateDetuning);
    }
    let factor = 0.5 * (1.0 / params.delta1 + 1.0 / params.delta2);
    let lambdas = params
        .couplings
        .iter()
        .zip(&params.drives)
        .map(|(g, w)| w.conj() * g * factor)
        .collect();
    let uniform = params.uniform_values();
    let lambda = uniform.map(|(g, w)| w * g * factor);
    Ok(DerivedParams {
        delta,
        lambdas,
        lambda,
        lambda_prime: lambda.map(|l| 2.0 * l * l / delta),
        stark_drive: uniform.map(|(_, w)| w * w / params.delta2),
    })
}

fn sum_ops(dims: Dims, ops: impl IntoIterator<Item = Result<SparseOperator>>) -> Result<SparseOperator> {
    ops.into_iter()
        .try_fold(SparseOperator::zero(dims), |acc, op| acc.add(&op?))
}

fn check_atoms(params: &DriveParams, dims: Dims) -> Result<()> {
    if params.n_atoms() != dims.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: dims.n_atoms(),
            found: params.n_atoms(),
        });
    }
    Ok(())
}

/// Interaction-picture Hamiltonian with both fields explicitly time
/// dependent.
pub fn h_full(params: &DriveParams, dims: Dims) -> Result<ModulatedHamiltonian> {
    check_atoms(params, dims)?;
    let a = SparseOperator::annihilation(dims);
    let raise = |j| SparseOperator::atom_transition(dims, j, Level::Excited, Level::One);
    let cavity = sum_ops(
        dims,
        (0..dims.n_atoms()).map(|j| Ok(a.mul(&raise(j)?)?.scale(params.couplings[j]))),
    )?;
    let drive = sum_ops(
        dims,
        (0..dims.n_atoms()).map(|j| Ok(raise(j)?.scale(params.drives[j]))),
    )?;
    ModulatedHamiltonian::new(dims)
        .with_term(cavity, params.delta1)?
        .with_term(drive, params.delta2)
}

/// The same dynamics in the frame rotating with
/// `H0 = -Δ2 Σ_j |e_j⟩⟨e_j| - δ a†a`, where the Hamiltonian is time
/// independent:
///
/// ```text
/// H_rot = Σ_j (g_j a |e_j⟩⟨1_j| + Ω_j |e_j⟩⟨1_j| + h.c.) + Δ2 Σ_j |e_j⟩⟨e_j| + δ a†a
/// ```
///
/// `H0` vanishes on qubit ⊗ vacuum, so projections onto that subspace agree
/// with the interaction picture at every time.
pub fn h_full_rotating(params: &DriveParams, dims: Dims) -> Result<SparseOperator> {
    check_atoms(params, dims)?;
    let delta = params.delta2 - params.delta1;
    let h = h_full(params, dims)?.at(0.0);
    let frame = SparseOperator::diagonal(dims, |i| {
        let excited = (0..dims.n_atoms())
            .filter(|&j| dims.digit_of(i, j) == Level::Excited.digit())
            .count();
        params.delta2 * excited as f64 + delta * dims.photons_of(i) as f64
    });
    h.add(&frame)?.into_hermitian(1e-12)
}

/// Hamiltonian after eliminating `|e⟩`: Stark shifts of `|1_j⟩` and the
/// `e^{∓iδt}` exchange term, kept explicitly time dependent. Rows and
/// columns touching `|e⟩` are zero.
pub fn h_eff_cavity(params: &DriveParams, dims: Dims) -> Result<ModulatedHamiltonian> {
    check_atoms(params, dims)?;
    let derived = derive(params)?;
    let number = SparseOperator::number(dims);
    let stark = sum_ops(
        dims,
        (0..dims.n_atoms()).map(|j| {
            let p1 = SparseOperator::projector_one(dims, j)?;
            let cav = number.mul(&p1)?.scale(C64::new(-params.couplings[j].norm_sqr() / params.delta1, 0.0));
            let drv = p1.scale(C64::new(-params.drives[j].norm_sqr() / params.delta2, 0.0));
            cav.add(&drv)
        }),
    )?;
    let a = SparseOperator::annihilation(dims);
    let exchange = sum_ops(
        dims,
        (0..dims.n_atoms()).map(|j| {
            let p1 = SparseOperator::projector_one(dims, j)?;
            Ok(a.mul(&p1)?.scale(-derived.lambdas[j]))
        }),
    )?;
    ModulatedHamiltonian::new(dims)
        .with_static(stark)?
        .with_term(exchange, -derived.delta)
}

fn count_ones(dims: Dims, index: usize) -> usize {
    (0..dims.n_atoms())
        .filter(|&j| dims.digit_of(index, j) == Level::One.digit())
        .count()
}

/// Dispersive Hamiltonian with the photon-number Stark term:
/// `Σ_j (-g²/Δ1 a†a - Ω²/Δ2 + λ²/δ)|1_j⟩⟨1_j| + λ' Σ_{j<k} |1_j 1_k⟩⟨1_j 1_k|`.
pub fn h_eff_dispersive(params: &DriveParams, dims: Dims) -> Result<SparseOperator> {
    check_atoms(params, dims)?;
    let (g, _) = params.uniform_values().ok_or(Error::NonUniform)?;
    let d = derive(params)?;
    let single = d.single_qubit_rate()?;
    let pair = d.uniform_lambda_prime()?;
    let cav = g * g / params.delta1;
    Ok(SparseOperator::diagonal(dims, |i| {
        let m = count_ones(dims, i) as f64;
        let n = dims.photons_of(i) as f64;
        m * (single - cav * n) + pair * m * (m - 1.0) / 2.0
    }))
}

/// Vacuum-cavity effective Hamiltonian, diagonal in the product basis:
/// `Σ_j (-Ω²/Δ2 + λ²/δ)|1_j⟩⟨1_j| + λ' Σ_{j<k} |1_j 1_k⟩⟨1_j 1_k|`.
/// With `include_self_energy = false` only the pairwise term is kept, as
/// when the single-atom shifts are compensated.
pub fn h_eff_diag(params: &DriveParams, dims: Dims, include_self_energy: bool) -> Result<SparseOperator> {
    check_atoms(params, dims)?;
    if !params.is_uniform() {
        return Err(Error::NonUniform);
    }
    let d = derive(params)?;
    let single = if include_self_energy {
        d.single_qubit_rate()?
    } else {
        0.0
    };
    let pair = d.uniform_lambda_prime()?;
    Ok(SparseOperator::diagonal(dims, |i| {
        let m = count_ones(dims, i) as f64;
        m * single + pair * m * (m - 1.0) / 2.0
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRatio {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub ratios: Vec<RegimeRatio>,
    pub threshold: f64,
    pub pass: bool,
}

impl RegimeReport {
    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.ratios.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn failing(&self) -> impl Iterator<Item = &RegimeRatio> {
        self.ratios.iter().filter(move |r| !(r.value >= self.threshold))
    }
}

/// Evaluates the five dispersive-regime ratios, taking the worst atom for
/// non-uniform parameters.
pub fn regime_check(params: &DriveParams, threshold: f64) -> RegimeReport {
    let max_abs = |v: &[C64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let g = max_abs(&params.couplings);
    let w = max_abs(&params.drives);
    let d1 = Float::abs(params.delta1);
    let d2 = Float::abs(params.delta2);
    let delta = Float::abs(params.delta2 - params.delta1);
    let factor = Float::abs(0.5 * (1.0 / params.delta1 + 1.0 / params.delta2));
    let lambda = params
        .couplings
        .iter()
        .zip(&params.drives)
        .map(|(g, w)| g.norm() * w.norm() * factor)
        .fold(0.0, f64::max);
    let ratios = alloc::vec![
        RegimeRatio { name: "delta1/g", value: d1 / g },
        RegimeRatio { name: "delta2/omega", value: d2 / w },
        RegimeRatio { name: "delta/(omega^2/delta2)", value: delta / (w * w / d2) },
        RegimeRatio { name: "delta/(g^2/delta1)", value: delta / (g * g / d1) },
        RegimeRatio { name: "delta/lambda", value: delta / lambda },
    ];
    let pass = ratios.iter().all(|r| r.value >= threshold);
    RegimeReport {
        ratios,
        threshold,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Hamiltonian;

    fn squid(n: usize) -> DriveParams {
        DriveParams::uniform(n, 1.0, 1.05, 20.0, 21.0).unwrap()
    }

    #[test]
    fn derived_quantities_at_squid_point() {
        let d = derive(&squid(2)).unwrap();
        assert_eq!(d.delta, 1.0);
        let lambda = 1.05 * (1.0 / 20.0 + 1.0 / 21.0) / 2.0;
        assert!((d.lambda.unwrap() - lambda).abs() < 1e-15);
        assert!((d.lambda.unwrap() - 0.05125).abs() < 1e-15);
        assert!((d.lambda_prime.unwrap() - 5.253125e-3).abs() < 1e-15);
        assert!((d.gate_time().unwrap() - 598.0426229320).abs() < 1e-8);
    }

    #[test]
    fn degenerate_and_invalid_detunings() {
        let p = DriveParams::uniform(2, 1.0, 1.0, 5.0, 5.0).unwrap();
        assert_eq!(derive(&p), Err(Error::DegenerateDetuning));
        assert!(DriveParams::uniform(2, 1.0, 1.0, 0.0, 5.0).is_err());
        assert!(DriveParams::new(vec![C64::new(1.0, 0.0)], vec![], 1.0, 2.0).is_err());
    }

    #[test]
    fn full_hamiltonian_matrix_elements() {
        let p = squid(1);
        let dims = Dims::new(1, 3).unwrap();
        let h = h_full(&p, dims).unwrap();
        let h0 = h.at(0.0);
        for n in 1..=3 {
            let e = dims.basis_index(&[2], n - 1).unwrap();
            let one = dims.basis_index(&[1], n).unwrap();
            assert!((h0.get(e, one) - C64::new((n as f64).sqrt(), 0.0)).norm() < 1e-14);
        }
        let t = 0.731;
        let ht = h.at(t);
        for n in 0..=3 {
            let e = dims.basis_index(&[2], n).unwrap();
            let one = dims.basis_index(&[1], n).unwrap();
            let expected = C64::from_polar(1.05, 21.0 * t);
            assert!((ht.get(e, one) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn full_hamiltonian_annihilates_ground_states() {
        let p = squid(2);
        let dims = Dims::new(2, 2).unwrap();
        let h = h_full(&p, dims).unwrap().at(1.3);
        for n in 0..=2 {
            let psi = crate::hilbert::QuantumState::product_state(dims, &[0, 0], n).unwrap();
            assert_eq!(h.apply(&psi).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn eff_cavity_matrix_elements() {
        let p = squid(1);
        let dims = Dims::new(1, 3).unwrap();
        let h = h_eff_cavity(&p, dims).unwrap();
        let lambda = derive(&p).unwrap().lambda.unwrap();
        let t = 2.2;
        let ht = h.at(t);
        for n in 0..=3 {
            let i = dims.basis_index(&[1], n).unwrap();
            let expected = -(n as f64) / 20.0 - 1.05 * 1.05 / 21.0;
            assert!((ht.get(i, i).re - expected).abs() < 1e-14);
            if n > 0 {
                let lower = dims.basis_index(&[1], n - 1).unwrap();
                let expected = C64::from_polar(-lambda * (n as f64).sqrt(), -1.0 * t);
                assert!((ht.get(lower, i) - expected).norm() < 1e-14);
            }
            let zero = dims.basis_index(&[0], n).unwrap();
            assert_eq!(ht.get(zero, zero), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn eff_diag_eigenvalues() {
        let p = squid(3);
        let dims = Dims::new(3, 0).unwrap();
        let d = derive(&p).unwrap();
        let lp = d.lambda_prime.unwrap();
        let h = h_eff_diag(&p, dims, false).unwrap();
        assert_eq!(h.get(0, 0).re, 0.0);
        for bits in 0..8usize {
            let m = bits.count_ones() as f64;
            let i = dims.qubit_index(bits, 0);
            assert!((h.get(i, i).re - lp * m * (m - 1.0) / 2.0).abs() < 1e-15);
        }
        let p2 = squid(2);
        let dims2 = Dims::new(2, 0).unwrap();
        let h = h_eff_diag(&p2, dims2, true).unwrap();
        let xi = -1.05f64.powi(2) / 21.0 + d.lambda.unwrap().powi(2) / d.delta;
        let i11 = dims2.qubit_index(0b11, 0);
        assert!((h.get(i11, i11).re - (2.0 * xi + lp)).abs() < 1e-15);
    }

    #[test]
    fn eff_diag_rejects_nonuniform() {
        let p = DriveParams::new(
            vec![C64::new(1.0, 0.0), C64::new(0.9, 0.0)],
            vec![C64::new(1.0, 0.0); 2],
            20.0,
            21.0,
        )
        .unwrap();
        assert_eq!(h_eff_diag(&p, Dims::new(2, 0).unwrap(), true), Err(Error::NonUniform));
        let complex = DriveParams::new(
            vec![C64::new(0.0, 1.0); 2],
            vec![C64::new(1.0, 0.0); 2],
            20.0,
            21.0,
        )
        .unwrap();
        assert!(!complex.is_uniform());
    }

    #[test]
    fn dispersive_vacuum_block_matches_diag_form() {
        let p = squid(3);
        let dims = Dims::new(3, 3).unwrap();
        let eq3 = h_eff_dispersive(&p, dims).unwrap();
        let eq4 = h_eff_diag(&p, dims, true).unwrap();
        let stark = 1.0 / 20.0;
        for i in 0..dims.dim() {
            let m = count_ones(dims, i) as f64;
            let n = dims.photons_of(i) as f64;
            let diff = eq3.get(i, i).re + stark * m * n - eq4.get(i, i).re;
            assert!(diff.abs() < 1e-15);
            if n == 0.0 {
                assert_eq!(eq3.get(i, i), eq4.get(i, i));
            }
        }
    }

    #[test]
    fn hermitian_at_random_times() {
        let p = squid(2);
        let dims = Dims::new(2, 3).unwrap();
        let full = h_full(&p, dims).unwrap();
        let eff = h_eff_cavity(&p, dims).unwrap();
        for k in 0..20 {
            let t = 0.37 * k as f64 + 0.011 * (k * k) as f64;
            assert!(full.at(t).hermiticity_deviation() <= 1e-14);
            assert!(eff.at(t).hermiticity_deviation() <= 1e-14);
        }
    }

    #[test]
    fn full_hamiltonian_excitation_structure() {
        // cavity term conserves (#e + photons); the drive changes it by one
        let p = squid(2);
        let dims = Dims::new(2, 3).unwrap();
        let excitations = |i: usize| {
            (0..2).filter(|&j| dims.digit_of(i, j) == 2).count() + dims.photons_of(i)
        };
        let cavity_only = h_full(&DriveParams::uniform(2, 1.0, 0.0, 20.0, 21.0).unwrap(), dims)
            .unwrap()
            .at(0.4);
        for (r, c, _) in cavity_only.entries() {
            assert_eq!(excitations(r), excitations(c));
        }
        for (r, c, _) in h_full(&p, dims).unwrap().at(0.4).entries() {
            assert!(excitations(r).abs_diff(excitations(c)) <= 1);
        }
    }

    #[test]
    fn rotating_frame_is_static_and_hermitian() {
        let p = squid(2);
        let dims = Dims::new(2, 2).unwrap();
        let h = h_full_rotating(&p, dims).unwrap();
        assert!(h.hermiticity_deviation() < 1e-15);
        let e1 = dims.basis_index(&[2, 0], 1).unwrap();
        assert!((h.get(e1, e1).re - 22.0).abs() < 1e-14);
    }

    #[test]
    fn regime_ratios() {
        let r = regime_check(&squid(2), DEFAULT_REGIME_THRESHOLD);
        assert!(r.pass);
        let expect = [20.0, 20.0, 21.0 / 1.1025, 20.0, 1.0 / 0.05125];
        for (ratio, e) in r.ratios.iter().zip(expect) {
            assert!((ratio.value - e).abs() < 1e-12, "{}: {}", ratio.name, ratio.value);
        }
        assert!(!regime_check(&squid(2), 25.0).pass);
        let bad = DriveParams::uniform(2, 1.0, 1.05, 1.0, 2.0).unwrap();
        let r = regime_check(&bad, DEFAULT_REGIME_THRESHOLD);
        assert_eq!(r.ratio("delta1/g"), Some(1.0));
        assert!(!r.pass);
        assert!(r.failing().any(|x| x.name == "delta1/g"));
    }

    #[test]
    fn frequency_scale_covers_detunings() {
        let p = squid(2);
        let dims = Dims::new(2, 4).unwrap();
        assert!(h_full(&p, dims).unwrap().frequency_scale() > 21.0);
    }
}
