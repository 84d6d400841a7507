//! Sparse operators on the atoms ⊗ mode space (compressed sparse rows).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::hilbert::{Dims, Level, QuantumState};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dims: Dims,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed,
    /// exact zeros dropped.
    pub fn from_triplets<I>(dims: Dims, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let dim = dims.dim();
        let mut entries: Vec<(usize, usize, C64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfRange {
                    index: r.max(c),
                    dim,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = Self {
            dims,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        op.prune();
        Ok(op)
    }

    pub fn zero(dims: Dims) -> Self {
        Self {
            dims,
            row_ptr: vec![0; dims.dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(dims: Dims) -> Self {
        Self::diagonal(dims, |_| 1.0)
    }

    /// Real diagonal operator with entry `f(index)`.
    pub fn diagonal(dims: Dims, f: impl Fn(usize) -> f64) -> Self {
        let mut op = Self::from_triplets(
            dims,
            (0..dims.dim()).map(|i| (i, i, C64::new(f(i), 0.0))),
        )
        .expect("diagonal indices are in range");
        op.hermitian = true;
        op
    }

    /// Mode annihilation operator `a`.
    pub fn annihilation(dims: Dims) -> Self {
        let trip = (0..dims.dim()).filter_map(|i| {
            let n = dims.photons_of(i);
            (n > 0).then(|| (i - 1, i, C64::new(Float::sqrt(n as f64), 0.0)))
        });
        Self::from_triplets(dims, trip).expect("in range")
    }

    pub fn creation(dims: Dims) -> Self {
        Self::annihilation(dims).adjoint()
    }

    /// `a†a`.
    pub fn number(dims: Dims) -> Self {
        Self::diagonal(dims, |i| dims.photons_of(i) as f64)
    }

    /// `|to⟩⟨from|` acting on `atom`, identity elsewhere.
    pub fn atom_transition(dims: Dims, atom: usize, to: Level, from: Level) -> Result<Self> {
        if atom >= dims.n_atoms() {
            return Err(Error::IndexOutOfRange {
                index: atom,
                dim: dims.n_atoms(),
            });
        }
        let fock = dims.fock_dim();
        let place = 3usize.pow((dims.n_atoms() - 1 - atom) as u32) * fock;
        let shift_to = to.digit() as usize * place;
        let shift_from = from.digit() as usize * place;
        let trip = (0..dims.dim())
            .filter(|&i| dims.digit_of(i, atom) == from.digit())
            .map(|i| (i - shift_from + shift_to, i, C64::new(1.0, 0.0)));
        let mut op = Self::from_triplets(dims, trip)?;
        op.hermitian = to == from;
        Ok(op)
    }

    /// `|1_j⟩⟨1_j|`.
    pub fn projector_one(dims: Dims, atom: usize) -> Result<Self> {
        Self::atom_transition(dims, atom, Level::One, Level::One)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the hermitian flag after checking the entries are closed under
    /// conjugate transpose.
    pub fn into_hermitian(mut self, tol: f64) -> Result<Self> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dims.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut op = Self::from_triplets(self.dims, self.entries().map(|(r, c, v)| (c, r, v.conj())))
            .expect("same dims");
        op.hermitian = self.hermitian;
        op
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut op = self.clone();
        for v in &mut op.vals {
            *v *= c;
        }
        op.hermitian = self.hermitian && c.im == 0.0;
        op.prune();
        op
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other.dims)?;
        let mut op = Self::from_triplets(self.dims, self.entries().chain(other.entries()))?;
        op.hermitian = self.hermitian && other.hermitian;
        Ok(op)
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other.dims)?;
        let mut trip = Vec::new();
        for (r, k, a) in self.entries() {
            for j in other.row_ptr[k]..other.row_ptr[k + 1] {
                trip.push((r, other.cols[j], a * other.vals[j]));
            }
        }
        Self::from_triplets(self.dims, trip)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        // every asymmetric pair has at least one stored entry, so scanning
        // the stored entries is enough
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Max absolute row sum, an upper bound on the spectral norm for
    /// hermitian operators.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dims.dim())
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<QuantumState> {
        self.check_dims(psi.dims())?;
        let mut out = QuantumState::zero(self.dims);
        self.accumulate(psi.amplitudes(), C64::new(1.0, 0.0), out.amplitudes_mut());
        Ok(out)
    }

    /// `out += coeff · A · x`. Slices must have length `dim`.
    #[inline]
    pub fn accumulate(&self, x: &[C64], coeff: C64, out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dims.dim());
        debug_assert_eq!(out.len(), self.dims.dim());
        for (r, o) in out.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if s == e {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for k in s..e {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o += coeff * acc;
        }
    }

    fn check_dims(&self, other: Dims) -> Result<()> {
        if self.dims != other {
            return Err(Error::DimensionMismatch {
                expected: self.dims.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dims.dim() + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dims.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != C64::new(0.0, 0.0) {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let d = Dims::new(2, 2).unwrap();
        let psi = QuantumState::plus_state(d);
        let out = SparseOperator::identity(d).apply(&psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let d = Dims::new(1, 3).unwrap();
        let vac = QuantumState::product_state(d, &[1], 0).unwrap();
        let out = SparseOperator::annihilation(d).apply(&vac).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn number_operator_eigenvalue() {
        let d = Dims::new(1, 4).unwrap();
        let n = SparseOperator::number(d);
        let ad_a = SparseOperator::creation(d)
            .mul(&SparseOperator::annihilation(d))
            .unwrap();
        for k in 0..=4 {
            let s = QuantumState::product_state(d, &[0], k).unwrap();
            let out = n.apply(&s).unwrap();
            assert_eq!(out.amplitude(k), c(k as f64));
            let out2 = ad_a.apply(&s).unwrap();
            assert!((out2.amplitude(k) - c(k as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn atom_transition_maps_levels() {
        let d = Dims::new(2, 1).unwrap();
        let sigma = SparseOperator::atom_transition(d, 1, Level::Excited, Level::One).unwrap();
        let s = QuantumState::product_state(d, &[0, 1], 1).unwrap();
        let out = sigma.apply(&s).unwrap();
        assert_eq!(out.amplitude(d.basis_index(&[0, 2], 1).unwrap()), c(1.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);
        let s = QuantumState::product_state(d, &[1, 0], 0).unwrap();
        assert_eq!(sigma.apply(&s).unwrap().norm(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = SparseOperator::identity(Dims::new(1, 1).unwrap());
        let psi = QuantumState::zero(Dims::new(2, 1).unwrap());
        assert!(matches!(a.apply(&psi), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let d = Dims::new(1, 2).unwrap();
        let a = SparseOperator::annihilation(d);
        assert!(a.clone().into_hermitian(1e-14).is_err());
        let x = a.add(&a.adjoint()).unwrap();
        assert!(x.into_hermitian(1e-14).is_ok());
        assert!(SparseOperator::from_triplets(d, [(9, 0, c(1.0))]).is_err());
    }

    #[test]
    fn duplicates_are_summed() {
        let d = Dims::new(1, 0).unwrap();
        let op = SparseOperator::from_triplets(d, [(0, 1, c(1.0)), (0, 1, c(2.0)), (2, 2, c(0.0))])
            .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(3.0));
    }
}
