//! Hilbert space of `n_atoms` three-level atoms and one truncated bosonic mode.
//!
//! Basis ordering is frozen: atoms are base-3 digits, atom 0 most
//! significant, and the photon number is the least-significant mixed-radix
//! digit:
//!
//! ```text
//! index = (d_0·3^(N-1) + d_1·3^(N-2) + … + d_(N-1)) · (n_max + 1) + photons
//! ```
//!
//! with digit `0 = |0⟩`, `1 = |1⟩`, `2 = |e⟩`. Qubit bitstrings used by the
//! gate layer follow the same convention: atom 0 is the most significant bit.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result, C64};

/// Number of internal levels per atom.
pub const LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Zero = 0,
    One = 1,
    Excited = 2,
}

impl Level {
    pub fn digit(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    n_atoms: usize,
    n_max: usize,
    atom_dim: usize,
    dim: usize,
}

impl Dims {
    pub fn new(n_atoms: usize, n_max: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidDims("at least one atom is required"));
        }
        let atom_dim = u32::try_from(n_atoms)
            .ok()
            .and_then(|n| LEVELS.checked_pow(n))
            .ok_or(Error::InvalidDims("3^n_atoms overflows"))?;
        let dim = n_max
            .checked_add(1)
            .and_then(|f| atom_dim.checked_mul(f))
            .ok_or(Error::InvalidDims("total dimension overflows"))?;
        Ok(Self {
            n_atoms,
            n_max,
            atom_dim,
            dim,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    /// Total dimension `3^n_atoms · (n_max + 1)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_index(&self, digits: &[u8], photons: usize) -> Result<usize> {
        if digits.len() != self.n_atoms {
            return Err(Error::DigitCount {
                expected: self.n_atoms,
                found: digits.len(),
            });
        }
        if photons > self.n_max {
            return Err(Error::PhotonOutOfRange {
                photons,
                n_max: self.n_max,
            });
        }
        let mut code = 0usize;
        for (atom, &d) in digits.iter().enumerate() {
            if d as usize >= LEVELS {
                return Err(Error::DigitOutOfRange { atom, digit: d });
            }
            code = code * LEVELS + d as usize;
        }
        Ok(code * self.fock_dim() + photons)
    }

    /// Inverse of [`Dims::basis_index`].
    pub fn decompose(&self, index: usize) -> (Vec<u8>, usize) {
        let photons = index % self.fock_dim();
        let mut code = index / self.fock_dim();
        let mut digits = vec![0u8; self.n_atoms];
        for d in digits.iter_mut().rev() {
            *d = (code % LEVELS) as u8;
            code /= LEVELS;
        }
        (digits, photons)
    }

    pub fn photons_of(&self, index: usize) -> usize {
        index % self.fock_dim()
    }

    /// Level digit of `atom` in basis state `index`.
    pub fn digit_of(&self, index: usize, atom: usize) -> u8 {
        let code = index / self.fock_dim();
        let place = LEVELS.pow((self.n_atoms - 1 - atom) as u32);
        ((code / place) % LEVELS) as u8
    }

    /// Basis index of qubit bitstring `bits` (atom 0 = most significant bit)
    /// with the given photon number.
    pub fn qubit_index(&self, bits: usize, photons: usize) -> usize {
        let mut code = 0usize;
        for atom in 0..self.n_atoms {
            let bit = (bits >> (self.n_atoms - 1 - atom)) & 1;
            code = code * LEVELS + bit;
        }
        code * self.fock_dim() + photons
    }

    /// `Some(bits)` when every atom sits in `|0⟩` or `|1⟩`.
    pub fn qubit_bits_of(&self, index: usize) -> Option<usize> {
        let mut code = index / self.fock_dim();
        let mut bits = 0usize;
        for k in 0..self.n_atoms {
            let d = code % LEVELS;
            if d == 2 {
                return None;
            }
            bits |= d << k;
            code /= LEVELS;
        }
        Some(bits)
    }
}

/// Selects a set of basis states for [`QuantumState::population`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    AtomLevel { atom: usize, level: Level },
    Photons(usize),
    /// All atoms in qubit levels and the mode in vacuum.
    QubitSubspace,
    /// At least one atom in `|e⟩`.
    AnyExcited,
    /// At least one photon.
    AnyPhotons,
}

impl Selector {
    pub fn matches(&self, dims: &Dims, index: usize) -> bool {
        match *self {
            Selector::AtomLevel { atom, level } => {
                atom < dims.n_atoms() && dims.digit_of(index, atom) == level.digit()
            }
            Selector::Photons(k) => dims.photons_of(index) == k,
            Selector::QubitSubspace => {
                dims.photons_of(index) == 0 && dims.qubit_bits_of(index).is_some()
            }
            Selector::AnyExcited => dims.qubit_bits_of(index).is_none(),
            Selector::AnyPhotons => dims.photons_of(index) > 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    dims: Dims,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    pub fn zero(dims: Dims) -> Self {
        Self {
            dims,
            amplitudes: vec![C64::new(0.0, 0.0); dims.dim()],
        }
    }

    pub fn basis(dims: Dims, index: usize) -> Result<Self> {
        if index >= dims.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: dims.dim(),
            });
        }
        let mut s = Self::zero(dims);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(dims: Dims, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.dim() {
            return Err(Error::DimensionMismatch {
                expected: dims.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Basis state with atoms in the given qubit levels (0 or 1 only).
    pub fn product_state(dims: Dims, qubit_levels: &[u8], photons: usize) -> Result<Self> {
        if let Some((atom, &d)) = qubit_levels.iter().enumerate().find(|(_, &d)| d > 1) {
            return Err(Error::DigitOutOfRange { atom, digit: d });
        }
        let index = dims.basis_index(qubit_levels, photons)?;
        Self::basis(dims, index)
    }

    /// `|+⟩^⊗N` with the mode in vacuum.
    pub fn plus_state(dims: Dims) -> Self {
        let n = dims.n_atoms();
        let count = 1usize << n;
        let amp = C64::new(1.0 / Float::sqrt(count as f64), 0.0);
        let mut s = Self::zero(dims);
        for bits in 0..count {
            s.amplitudes[dims.qubit_index(bits, 0)] = amp;
        }
        s
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dims(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        self.check_dims(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            dims: self.dims,
            amplitudes,
        })
    }

    /// Explicit renormalization. The integrator never calls this.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    /// Sum of `|amplitude|²` over the basis states matching `selector`.
    pub fn population(&self, selector: Selector) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| selector.matches(&self.dims, *i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projection onto qubit ⊗ vacuum, indexed by qubit bitstring.
    pub fn qubit_projection(&self) -> Vec<C64> {
        (0..1usize << self.dims.n_atoms())
            .map(|bits| self.amplitudes[self.dims.qubit_index(bits, 0)])
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// 2-norm of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        Float::sqrt(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>(),
        )
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.dim(),
                found: other.dims.dim(),
            });
        }
        Ok(())
    }
}
