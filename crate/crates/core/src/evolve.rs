//! Time-ordered Schrödinger integration `i dψ/dt = H(t) ψ`.
//!
//! The integrator is classic fixed-step fourth-order Runge–Kutta. Explicit
//! time dependence enters only through exact phase factors `e^{±iωt}`
//! evaluated at the RK stage times. The state is never renormalized: a norm
//! drift beyond `norm_tolerance` aborts the run with [`Error::NormDrift`].
//! Time-independent diagonal Hamiltonians skip RK4 and are exponentiated
//! exactly.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::hilbert::{Dims, QuantumState};
use crate::matrix::CMatrix;
use crate::operator::SparseOperator;
use crate::{Error, Result, C64};

/// Largest qubit register handled by [`qubit_subspace_unitary`].
pub const MAX_SUBSPACE_QUBITS: usize = 12;

/// Default `|‖ψ(t)‖ - ‖ψ(0)‖| / ‖ψ(0)‖` tolerance.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-9;

/// Step length per radian of the fastest frequency chosen by
/// [`EvolutionSpec::resolved`] for a modulated run spanning a thousand
/// radians.
pub const STEP_PER_RADIAN: f64 = 0.055;

/// Upper bound on the step per radian for short runs.
pub const MAX_STEP_PER_RADIAN: f64 = 0.1;

/// Norm drift [`EvolutionSpec::resolved`] aims for, a quarter of
/// [`DEFAULT_NORM_TOLERANCE`].
pub const DRIFT_BUDGET: f64 = 2.5e-10;

/// A time-indexed hermitian operator.
pub trait Hamiltonian: Sync {
    fn dims(&self) -> Dims;

    /// `out += coeff · H(t) · psi`.
    fn accumulate(&self, t: f64, psi: &[C64], coeff: C64, out: &mut [C64]);

    /// Upper bound on the fastest angular frequency in the dynamics: explicit
    /// modulation frequencies plus operator norms.
    fn frequency_scale(&self) -> f64;

    /// `H(t)` as an explicit sparse matrix.
    fn at(&self, t: f64) -> SparseOperator;

    /// Real diagonal of a time-independent diagonal `H`. When present the
    /// evolution is exact phase multiplication instead of RK4.
    fn static_diagonal(&self) -> Option<Vec<f64>> {
        None
    }

    /// Fastest explicit modulation frequency; zero for a static `H`.
    fn modulation_frequency(&self) -> f64 {
        0.0
    }

    /// Bound on `‖H(t)‖` valid at every `t`.
    fn norm_bound(&self) -> f64 {
        self.frequency_scale()
    }

    /// A copy acting identically on every state supported in the invariant
    /// subspace generated from `support`, with everything else pruned.
    /// `None` when the implementation does not prune.
    fn localized(&self, support: &[bool]) -> Option<Box<dyn Hamiltonian>> {
        let _ = support;
        None
    }
}

impl Hamiltonian for SparseOperator {
    fn dims(&self) -> Dims {
        SparseOperator::dims(self)
    }

    fn accumulate(&self, _t: f64, psi: &[C64], coeff: C64, out: &mut [C64]) {
        SparseOperator::accumulate(self, psi, coeff, out)
    }

    fn frequency_scale(&self) -> f64 {
        self.row_sum_norm()
    }

    fn at(&self, _t: f64) -> SparseOperator {
        self.clone()
    }

    fn static_diagonal(&self) -> Option<Vec<f64>> {
        let mut diag = vec![0.0; self.dims().dim()];
        for (r, c, v) in self.entries() {
            if r != c || v.im != 0.0 {
                return None;
            }
            diag[r] = v.re;
        }
        Some(diag)
    }
}

impl<H: Hamiltonian + ?Sized> Hamiltonian for Box<H> {
    fn dims(&self) -> Dims {
        (**self).dims()
    }

    fn accumulate(&self, t: f64, psi: &[C64], coeff: C64, out: &mut [C64]) {
        (**self).accumulate(t, psi, coeff, out)
    }

    fn frequency_scale(&self) -> f64 {
        (**self).frequency_scale()
    }

    fn at(&self, t: f64) -> SparseOperator {
        (**self).at(t)
    }

    fn static_diagonal(&self) -> Option<Vec<f64>> {
        (**self).static_diagonal()
    }

    fn modulation_frequency(&self) -> f64 {
        (**self).modulation_frequency()
    }

    fn norm_bound(&self) -> f64 {
        (**self).norm_bound()
    }

    fn localized(&self, support: &[bool]) -> Option<Box<dyn Hamiltonian>> {
        (**self).localized(support)
    }
}

/// `e^{iωt} M + e^{-iωt} M†`.
#[derive(Debug, Clone)]
struct ModulatedTerm {
    op: SparseOperator,
    adjoint: SparseOperator,
    frequency: f64,
}

/// Static hermitian part plus a sum of hermitian-paired modulated terms.
#[derive(Debug, Clone)]
pub struct ModulatedHamiltonian {
    dims: Dims,
    static_part: Option<SparseOperator>,
    terms: Vec<ModulatedTerm>,
    fused: Fused,
}

/// All parts merged into one CSR pattern. Each entry carries a slot index
/// into the per-call phase table: slot 0 is the static part, slots `2k+1`
/// and `2k+2` are `e^{iω_k t}` and its conjugate.
#[derive(Debug, Clone, Default)]
struct Fused {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    slots: Vec<u16>,
}

impl Fused {
    fn build(
        dims: Dims,
        static_part: Option<&SparseOperator>,
        terms: &[ModulatedTerm],
        keep: Option<&[bool]>,
    ) -> Self {
        let n = dims.dim();
        let mut rows: Vec<Vec<(u32, C64, u16)>> = vec![Vec::new(); n];
        let mut push = |op: &SparseOperator, slot: u16| {
            for (r, c, v) in op.entries() {
                if keep.map_or(true, |k| k[r]) {
                    rows[r].push((c as u32, v, slot));
                }
            }
        };
        if let Some(s) = static_part {
            push(s, 0);
        }
        for (k, term) in terms.iter().enumerate() {
            push(&term.op, (2 * k + 1) as u16);
            push(&term.adjoint, (2 * k + 2) as u16);
        }
        let mut fused = Fused {
            row_ptr: Vec::with_capacity(n + 1),
            ..Default::default()
        };
        fused.row_ptr.push(0);
        for row in rows {
            for (c, v, slot) in row {
                fused.cols.push(c);
                fused.vals.push(v);
                fused.slots.push(slot);
            }
            fused.row_ptr.push(fused.cols.len());
        }
        fused
    }
}

impl ModulatedHamiltonian {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            static_part: None,
            terms: Vec::new(),
            fused: Fused::build(dims, None, &[], None),
        }
    }

    fn refuse(mut self) -> Self {
        self.fused = Fused::build(self.dims, self.static_part.as_ref(), &self.terms, None);
        self
    }

    /// Adds a time-independent part, which must be hermitian.
    pub fn with_static(mut self, op: SparseOperator) -> Result<Self> {
        check_dims(self.dims, op.dims())?;
        let op = op.into_hermitian(1e-12)?;
        self.static_part = Some(match self.static_part.take() {
            Some(s) => s.add(&op)?,
            None => op,
        });
        Ok(self.refuse())
    }

    /// Adds `e^{iωt} op + h.c.`. Terms sharing a frequency are merged.
    pub fn with_term(mut self, op: SparseOperator, frequency: f64) -> Result<Self> {
        check_dims(self.dims, op.dims())?;
        if let Some(term) = self.terms.iter_mut().find(|t| t.frequency == frequency) {
            term.op = term.op.add(&op)?;
            term.adjoint = term.op.adjoint();
        } else {
            let adjoint = op.adjoint();
            self.terms.push(ModulatedTerm {
                op,
                adjoint,
                frequency,
            });
        }
        Ok(self.refuse())
    }
}

impl Hamiltonian for ModulatedHamiltonian {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn accumulate(&self, t: f64, psi: &[C64], coeff: C64, out: &mut [C64]) {
        const INLINE: usize = 9;
        let slots = 1 + 2 * self.terms.len();
        let mut inline = [C64::new(0.0, 0.0); INLINE];
        let mut heap = Vec::new();
        let table: &mut [C64] = if slots <= INLINE {
            &mut inline[..slots]
        } else {
            heap.resize(slots, C64::new(0.0, 0.0));
            &mut heap
        };
        table[0] = coeff;
        for (k, term) in self.terms.iter().enumerate() {
            let (sin, cos) = Float::sin_cos(term.frequency * t);
            let phase = C64::new(cos, sin);
            table[2 * k + 1] = coeff * phase;
            table[2 * k + 2] = coeff * phase.conj();
        }
        let f = &self.fused;
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for e in f.row_ptr[r]..f.row_ptr[r + 1] {
                acc += table[f.slots[e] as usize] * (f.vals[e] * psi[f.cols[e] as usize]);
            }
            *o += acc;
        }
    }

    fn localized(&self, support: &[bool]) -> Option<Box<dyn Hamiltonian>> {
        let f = &self.fused;
        let mut seen = support.to_vec();
        let mut stack: Vec<usize> = (0..seen.len()).filter(|&i| seen[i]).collect();
        while let Some(r) = stack.pop() {
            for &c in &f.cols[f.row_ptr[r]..f.row_ptr[r + 1]] {
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    stack.push(c as usize);
                }
            }
        }
        let mut pruned = self.clone();
        pruned.fused = Fused::build(self.dims, self.static_part.as_ref(), &self.terms, Some(&seen));
        Some(Box::new(pruned))
    }

    /// Largest row sum of `|entries|` over all parts, the worst case of
    /// every phase combination.
    fn norm_bound(&self) -> f64 {
        let f = &self.fused;
        f.row_ptr
            .windows(2)
            .map(|w| f.vals[w[0]..w[1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn modulation_frequency(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| Float::abs(t.frequency))
            .fold(0.0, f64::max)
    }

    fn frequency_scale(&self) -> f64 {
        let stat = self.static_part.as_ref().map_or(0.0, |s| s.row_sum_norm());
        let fastest = self.modulation_frequency();
        let coupling: f64 = self
            .terms
            .iter()
            .map(|t| t.op.row_sum_norm() + t.adjoint.row_sum_norm())
            .sum();
        stat + fastest + coupling
    }

    fn at(&self, t: f64) -> SparseOperator {
        let mut h = self
            .static_part
            .clone()
            .unwrap_or_else(|| SparseOperator::zero(self.dims));
        for term in &self.terms {
            let (sin, cos) = Float::sin_cos(term.frequency * t);
            let phase = C64::new(cos, sin);
            h = h
                .add(&term.op.scale(phase))
                .and_then(|h| h.add(&term.adjoint.scale(phase.conj())))
                .expect("same dims");
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub t_initial: f64,
    pub t_final: f64,
    pub max_step: f64,
    pub norm_tolerance: f64,
}

impl EvolutionSpec {
    pub fn new(t_final: f64, max_step: f64) -> Self {
        Self {
            t_initial: 0.0,
            t_final,
            max_step,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
        }
    }

    /// Picks `max_step` for `h` over `[0, t_final]`.
    ///
    /// An RK4 step of an eigenfrequency `ω` loses norm `(ω·dt)⁶/144` to
    /// leading order, so a run over `T` loses `ω·T·(ω·dt)⁵/144`. The step is
    /// the smallest of:
    ///
    /// * that bound solved for [`DRIFT_BUDGET`] with `ω` =
    ///   [`Hamiltonian::norm_bound`];
    /// * for modulated `H`, where fast phases multiply weak couplings, a
    ///   calibrated rule: the model Hamiltonians drift by about
    ///   `5e-7·ω·T·(ω·dt)⁵` with `ω` = [`Hamiltonian::frequency_scale`], so
    ///   the step per radian is `STEP_PER_RADIAN · (ω·T / 10³)^(-1/5)`;
    /// * [`MAX_STEP_PER_RADIAN`] per radian of `frequency_scale`.
    ///
    /// The drift check still guards every run.
    pub fn resolved<H: Hamiltonian + ?Sized>(h: &H, t_final: f64) -> Self {
        let duration = t_final.abs().max(1e-12);
        let omega = h.frequency_scale().max(1e-12);
        let mut step = MAX_STEP_PER_RADIAN / omega;
        let norm = h.norm_bound();
        if norm > 0.0 {
            step = step.min(Float::powf(144.0 * DRIFT_BUDGET / (norm * duration), 0.2) / norm);
        }
        if h.modulation_frequency() > 0.0 {
            let radians = omega * duration;
            step = step.min(STEP_PER_RADIAN * Float::powf(radians / 1e3, -0.2) / omega);
        }
        Self::new(t_final, step)
    }

    pub fn starting_at(mut self, t_initial: f64) -> Self {
        self.t_initial = t_initial;
        self
    }

    pub fn with_norm_tolerance(mut self, tol: f64) -> Self {
        self.norm_tolerance = tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn duration(&self) -> f64 {
        self.t_final - self.t_initial
    }

    /// Number of equal RK4 steps used for an interval of length `len`.
    pub fn steps_for(&self, len: f64) -> usize {
        if len <= 0.0 {
            0
        } else {
            Float::ceil(len / self.max_step) as usize
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_initial.is_finite()) {
            return Err(Error::InvalidSpec("times must be finite"));
        }
        if self.t_final < self.t_initial {
            return Err(Error::InvalidSpec("t_final must not precede t_initial"));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidSpec("max_step must be positive"));
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::InvalidSpec("norm_tolerance must be positive"));
        }
        Ok(())
    }
}

/// Evolves `psi0` from `spec.t_initial` to `spec.t_final`.
pub fn evolve<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &QuantumState,
    spec: &EvolutionSpec,
) -> Result<QuantumState> {
    evolve_sampled(h, psi0, spec, &[], |_, _| {})
}

/// Like [`evolve`], calling `observer(t, ψ(t))` at each sample time.
///
/// Samples must be sorted and lie inside `[t_initial, t_final]`. The
/// interval between consecutive sample times is integrated with its own
/// uniform step no longer than `max_step`.
pub fn evolve_sampled<H, F>(
    h: &H,
    psi0: &QuantumState,
    spec: &EvolutionSpec,
    samples: &[f64],
    mut observer: F,
) -> Result<QuantumState>
where
    H: Hamiltonian + ?Sized,
    F: FnMut(f64, &QuantumState),
{
    spec.validate()?;
    check_dims(h.dims(), psi0.dims())?;
    if samples.windows(2).any(|w| w[1] < w[0])
        || samples
            .iter()
            .any(|&s| s < spec.t_initial || s > spec.t_final)
    {
        return Err(Error::InvalidSpec("sample times must be sorted and inside the interval"));
    }

    if let Some(diag) = h.static_diagonal() {
        let rotate = |from: &QuantumState, dt: f64| {
            let mut out = from.clone();
            for (a, &e) in out.amplitudes_mut().iter_mut().zip(&diag) {
                *a *= C64::from_polar(1.0, -e * dt);
            }
            out
        };
        for &s in samples {
            observer(s, &rotate(psi0, s - spec.t_initial));
        }
        return Ok(rotate(psi0, spec.duration()));
    }

    let support: Vec<bool> = psi0.amplitudes().iter().map(|a| *a != C64::new(0.0, 0.0)).collect();
    let local = h.localized(&support);
    match &local {
        Some(local) => integrate(&**local, psi0, spec, samples, observer),
        None => integrate(h, psi0, spec, samples, observer),
    }
}

fn integrate<H, F>(
    h: &H,
    psi0: &QuantumState,
    spec: &EvolutionSpec,
    samples: &[f64],
    mut observer: F,
) -> Result<QuantumState>
where
    H: Hamiltonian + ?Sized,
    F: FnMut(f64, &QuantumState),
{
    let mut rk = Rk4::new(h, psi0, spec.norm_tolerance);
    let mut t = spec.t_initial;
    for &s in samples {
        rk.run(t, s, spec.steps_for(s - t))?;
        t = s;
        observer(s, &rk.state);
    }
    rk.run(t, spec.t_final, spec.steps_for(spec.t_final - t))?;
    rk.check_norm(spec.t_final, spec.max_step)?;
    Ok(rk.state)
}

struct Rk4<'a, H: Hamiltonian + ?Sized> {
    h: &'a H,
    state: QuantumState,
    initial_norm: f64,
    tolerance: f64,
    k: Vec<C64>,
    acc: Vec<C64>,
    tmp: Vec<C64>,
}

impl<'a, H: Hamiltonian + ?Sized> Rk4<'a, H> {
    fn new(h: &'a H, psi0: &QuantumState, tolerance: f64) -> Self {
        let d = psi0.dims().dim();
        Self {
            h,
            state: psi0.clone(),
            initial_norm: psi0.norm(),
            tolerance,
            k: vec![C64::new(0.0, 0.0); d],
            acc: vec![C64::new(0.0, 0.0); d],
            tmp: vec![C64::new(0.0, 0.0); d],
        }
    }

    /// `n` uniform steps from `t0` to `t1`.
    fn run(&mut self, t0: f64, t1: f64, n: usize) -> Result<()> {
        let dt = (t1 - t0) / n as f64;
        let minus_i = C64::new(0.0, -1.0);
        for step in 0..n {
            let t = t0 + step as f64 * dt;
            let y = self.state.amplitudes_mut();
            let (k, acc, tmp) = (&mut self.k, &mut self.acc, &mut self.tmp);

            // k1
            zero(k);
            self.h.accumulate(t, y, minus_i, k);
            for i in 0..y.len() {
                acc[i] = k[i];
                tmp[i] = y[i] + k[i] * (0.5 * dt);
            }
            // k2
            zero(k);
            self.h.accumulate(t + 0.5 * dt, tmp, minus_i, k);
            for i in 0..y.len() {
                acc[i] += k[i] * 2.0;
                tmp[i] = y[i] + k[i] * (0.5 * dt);
            }
            // k3
            zero(k);
            self.h.accumulate(t + 0.5 * dt, tmp, minus_i, k);
            for i in 0..y.len() {
                acc[i] += k[i] * 2.0;
                tmp[i] = y[i] + k[i] * dt;
            }
            // k4
            zero(k);
            self.h.accumulate(t + dt, tmp, minus_i, k);
            for i in 0..y.len() {
                y[i] += (acc[i] + k[i]) * (dt / 6.0);
            }

            if step % 4096 == 4095 {
                self.check_norm(t + dt, dt)?;
            }
        }
        Ok(())
    }

    fn check_norm(&self, t: f64, step: f64) -> Result<()> {
        if self.initial_norm == 0.0 {
            return Ok(());
        }
        let drift = Float::abs(self.state.norm() / self.initial_norm - 1.0);
        if !(drift <= self.tolerance) {
            return Err(Error::NormDrift {
                time_reached: t,
                step,
                drift,
                tolerance: self.tolerance,
            });
        }
        Ok(())
    }
}

fn zero(v: &mut [C64]) {
    for x in v {
        *x = C64::new(0.0, 0.0);
    }
}

fn check_dims(a: Dims, b: Dims) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Differences between runs at `max_step`, `max_step/2` and `max_step/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepHalvingReport {
    /// `‖ψ(h) - ψ(h/2)‖`.
    pub coarse: f64,
    /// `‖ψ(h/2) - ψ(h/4)‖`.
    pub fine: f64,
}

impl StepHalvingReport {
    /// Observed convergence factor; about 16 for a fourth-order method in its
    /// asymptotic regime.
    pub fn ratio(&self) -> f64 {
        if self.fine == 0.0 {
            f64::INFINITY
        } else {
            self.coarse / self.fine
        }
    }

    /// Accepts when halving shrinks the change by at least `min_factor`, or
    /// when both differences are already below `floor`.
    pub fn is_consistent(&self, min_factor: f64, floor: f64) -> bool {
        (self.coarse <= floor && self.fine <= floor) || self.ratio() >= min_factor
    }
}

pub fn step_halving_check<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &QuantumState,
    spec: &EvolutionSpec,
) -> Result<StepHalvingReport> {
    let a = evolve(h, psi0, spec)?;
    let b = evolve(h, psi0, &spec.with_max_step(spec.max_step / 2.0))?;
    let c = evolve(h, psi0, &spec.with_max_step(spec.max_step / 4.0))?;
    Ok(StepHalvingReport {
        coarse: a.distance(&b),
        fine: b.distance(&c),
    })
}

/// Runs independent jobs, e.g. the columns of a propagator.
pub trait ColumnRunner {
    fn run<T, F>(&self, count: usize, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ColumnRunner for Sequential {
    fn run<T, F>(&self, count: usize, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}

/// Qubit-subspace block of the propagator and per-column leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEvolution {
    pub unitary: CMatrix,
    /// `1 - ‖column_b‖²` for every input bitstring `b`.
    pub leakage: Vec<f64>,
}

impl SubspaceEvolution {
    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Column `b` is the projection onto qubit ⊗ vacuum of `evolve(|b⟩|0⟩)`.
pub fn qubit_subspace_unitary<H, R>(
    h: &H,
    spec: &EvolutionSpec,
    n_atoms: usize,
    runner: &R,
) -> Result<SubspaceEvolution>
where
    H: Hamiltonian + ?Sized,
    R: ColumnRunner,
{
    let dims = h.dims();
    if n_atoms > MAX_SUBSPACE_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_atoms,
            max: MAX_SUBSPACE_QUBITS,
        });
    }
    if n_atoms != dims.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: dims.n_atoms(),
            found: n_atoms,
        });
    }
    let columns = runner.run(1usize << n_atoms, |bits| {
        let psi0 = QuantumState::basis(dims, dims.qubit_index(bits, 0))?;
        Ok(evolve(h, &psi0, spec)?.qubit_projection())
    })?;
    let leakage = columns
        .iter()
        .map(|c| 1.0 - c.iter().map(|a| a.norm_sqr()).sum::<f64>())
        .collect();
    Ok(SubspaceEvolution {
        unitary: CMatrix::from_columns(&columns)?,
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let d = Dims::new(2, 1).unwrap();
        let h = SparseOperator::zero(d);
        let psi = QuantumState::plus_state(d);
        let out = evolve(&h, &psi, &EvolutionSpec::new(10.0, 0.1)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn diagonal_phase() {
        let d = Dims::new(1, 0).unwrap();
        let e = 0.7;
        let h = SparseOperator::diagonal(d, |i| if i == 1 { e } else { 0.0 });
        let psi = QuantumState::basis(d, 1).unwrap();
        let t = 3.0;
        let out = evolve(&h, &psi, &EvolutionSpec::new(t, 1e-3)).unwrap();
        let expected = C64::from_polar(1.0, -e * t);
        assert!((out.amplitude(1) - expected).norm() < 1e-12);
    }

    #[test]
    fn rabi_transfer() {
        // closed form: c_1(t) = -i sin(Ω t)
        let d = Dims::new(1, 0).unwrap();
        let omega = 0.8;
        let h = SparseOperator::from_triplets(d, [(0, 1, c(omega)), (1, 0, c(omega))]).unwrap();
        let psi = QuantumState::basis(d, 0).unwrap();
        let t = PI / (2.0 * omega);
        let out = evolve(&h, &psi, &EvolutionSpec::new(t, 1e-3)).unwrap();
        assert!((out.amplitude(1).norm_sqr() - 1.0).abs() < 1e-6);
        assert!((out.amplitude(1) - C64::new(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn norm_drift_is_reported_not_hidden() {
        let d = Dims::new(1, 0).unwrap();
        let h = SparseOperator::from_triplets(d, [(0, 1, c(5.0)), (1, 0, c(5.0))]).unwrap();
        let psi = QuantumState::basis(d, 0).unwrap();
        let spec = EvolutionSpec::new(50.0, 0.2).with_norm_tolerance(1e-9);
        match evolve(&h, &psi, &spec) {
            Err(Error::NormDrift { step, .. }) => assert!((step - 0.2).abs() < 1e-12),
            other => panic!("expected norm drift, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs() {
        let d = Dims::new(1, 0).unwrap();
        let h = SparseOperator::zero(d);
        let psi = QuantumState::basis(d, 0).unwrap();
        assert!(evolve(&h, &psi, &EvolutionSpec::new(-1.0, 0.1)).is_err());
        assert!(evolve(&h, &psi, &EvolutionSpec::new(1.0, 0.0)).is_err());
        assert!(evolve(&h, &psi, &EvolutionSpec::new(1.0, 0.1).with_norm_tolerance(0.0)).is_err());
        let other = QuantumState::basis(Dims::new(2, 0).unwrap(), 0).unwrap();
        assert!(evolve(&h, &other, &EvolutionSpec::new(1.0, 0.1)).is_err());
    }

    #[test]
    fn sampled_observer_sees_every_sample() {
        let d = Dims::new(1, 0).unwrap();
        let h = SparseOperator::diagonal(d, |i| i as f64);
        let psi = QuantumState::basis(d, 1).unwrap();
        let mut seen = Vec::new();
        let samples = [0.5, 1.0, 2.0];
        evolve_sampled(&h, &psi, &EvolutionSpec::new(2.0, 1e-3), &samples, |t, s| {
            seen.push((t, s.amplitude(1)))
        })
        .unwrap();
        assert_eq!(seen.len(), 3);
        for (t, a) in seen {
            assert!((a - C64::from_polar(1.0, -t)).norm() < 1e-10);
        }
        assert!(evolve_sampled(&h, &psi, &EvolutionSpec::new(2.0, 1e-3), &[3.0], |_, _| {}).is_err());
    }

    #[test]
    fn modulated_term_is_hermitian_at_all_times() {
        let d = Dims::new(1, 2).unwrap();
        let h = ModulatedHamiltonian::new(d)
            .with_term(SparseOperator::annihilation(d).scale(C64::new(0.3, 0.1)), 2.5)
            .unwrap();
        for &t in &[0.0, 0.37, 1.9, 12.0] {
            assert!(h.at(t).hermiticity_deviation() < 1e-14);
        }
    }

    #[test]
    fn subspace_unitary_of_zero_hamiltonian() {
        let d = Dims::new(2, 1).unwrap();
        let h = SparseOperator::zero(d);
        let r = qubit_subspace_unitary(&h, &EvolutionSpec::new(5.0, 0.5), 2, &Sequential).unwrap();
        assert!(r.unitary.max_abs_diff(&CMatrix::identity(4)).unwrap() < 1e-15);
        assert!(r.leakage.iter().all(|&l| l.abs() < 1e-15));
        assert!(qubit_subspace_unitary(&h, &EvolutionSpec::new(5.0, 0.5), 3, &Sequential).is_err());
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let d = Dims::new(1, 0).unwrap();
        let h = SparseOperator::from_triplets(d, [(0, 1, c(1.0)), (1, 0, c(1.0)), (2, 2, c(0.5))])
            .unwrap();
        let psi = QuantumState::basis(d, 0).unwrap();
        let spec = EvolutionSpec::new(4.0, 0.05).with_norm_tolerance(1e-6);
        let r = step_halving_check(&h, &psi, &spec).unwrap();
        assert!(r.ratio() > 12.0 && r.ratio() < 20.0, "ratio {}", r.ratio());
    }
}
