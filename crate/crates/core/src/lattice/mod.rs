//! Finite periodic lattice: states, basis changes, evolution and packets.

mod evolve;
mod fft;
mod measure;
mod packet;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{C64, DIM};
use crate::momentum::{KernelError, ReducedMomentum};

pub use evolve::{evolve_direct, evolve_spectral, evolve_spectral_decomposed};
pub use measure::{
    centroid, fit_velocity, measure_group_velocity, unwrap_trajectory, CentroidSample,
    CentroidTrajectory, VelocityMeasurement,
};
pub use packet::{
    make_wavepacket, positive_energy_vector, InternalProfile, PacketDocument, PacketKind,
    PacketShape, WavePacketSpec,
};

/// Tolerance on the unit-norm invariant of [`LatticeState`].
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("lattice size {0} must be even and at least 4")]
    InvalidSize(usize),
    #[error("state is in the {found:?} basis, expected {expected:?}")]
    BasisMismatch { expected: Basis, found: Basis },
    #[error("amplitude buffer has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("state norm {0} differs from 1 by more than {NORM_TOL:e}")]
    NotNormalized(f64),
    #[error("packet specification violated: {0}")]
    SpecViolation(String),
    #[error("centroid undefined along axis {axis}: circular resultant {resultant:e} below 1e-6")]
    UndefinedCentroid { axis: usize, resultant: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Periodic cubic lattice of linear size `n` with unit spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lattice {
    n: usize,
}

impl Lattice {
    pub fn new(n: usize) -> Result<Self, LatticeError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(LatticeError::InvalidSize(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Amplitude count: sites times internal dimension.
    pub fn len(&self) -> usize {
        self.sites() * DIM
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of `(x, y, z, internal)`.
    pub fn index(&self, site: [usize; 3], internal: usize) -> usize {
        ((site[0] * self.n + site[1]) * self.n + site[2]) * DIM + internal
    }

    /// Site index of a flat site number `0..n³`.
    pub fn site_of(&self, site_number: usize) -> [usize; 3] {
        let n = self.n;
        [site_number / (n * n), (site_number / n) % n, site_number % n]
    }

    /// Signed momentum label in `(-n/2, n/2]` for storage index `l`.
    pub fn signed_label(&self, l: usize) -> i64 {
        let l = l as i64;
        let n = self.n as i64;
        if l > n / 2 {
            l - n
        } else {
            l
        }
    }

    /// Storage index of a signed (or any integer) momentum label.
    pub fn storage_index(&self, label: i64) -> usize {
        label.rem_euclid(self.n as i64) as usize
    }

    /// Reduced momentum `2πℓ/n` of storage index `l`.
    pub fn momentum(&self, l: usize) -> f64 {
        2.0 * PI * self.signed_label(l) as f64 / self.n as f64
    }

    pub fn mode_momentum(&self, mode_number: usize) -> ReducedMomentum {
        let [a, b, c] = self.site_of(mode_number);
        ReducedMomentum::wrapped(self.momentum(a), self.momentum(b), self.momentum(c))
    }

    /// `e^{2πi·m/n}` with the integer `m` reduced first, so equal residues
    /// give bit-identical phases.
    pub fn root_of_unity(&self, m: i64) -> C64 {
        let r = m.rem_euclid(self.n as i64);
        C64::from_polar(1.0, 2.0 * PI * r as f64 / self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    Position,
    Momentum,
}

/// Unit-norm amplitude field over `n³` sites (or modes) times six internal
/// components, laid out as `[x][y][z][internal]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    lattice: Lattice,
    basis: Basis,
    amplitudes: Vec<C64>,
}

impl LatticeState {
    /// Wrap a buffer whose norm is already 1 to within [`NORM_TOL`].
    pub fn from_amplitudes(
        lattice: Lattice,
        basis: Basis,
        amplitudes: Vec<C64>,
    ) -> Result<Self, LatticeError> {
        let state = Self::unchecked(lattice, basis, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(LatticeError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Scale an arbitrary nonzero buffer to unit norm.
    pub fn normalized(
        lattice: Lattice,
        basis: Basis,
        amplitudes: Vec<C64>,
    ) -> Result<Self, LatticeError> {
        let mut state = Self::unchecked(lattice, basis, amplitudes)?;
        let norm = state.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LatticeError::NotNormalized(norm));
        }
        let s = 1.0 / norm;
        state.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(state)
    }

    fn unchecked(
        lattice: Lattice,
        basis: Basis,
        amplitudes: Vec<C64>,
    ) -> Result<Self, LatticeError> {
        if amplitudes.len() != lattice.len() {
            return Err(LatticeError::LengthMismatch {
                expected: lattice.len(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            lattice,
            basis,
            amplitudes,
        })
    }

    /// Unit amplitude on a single site and internal component.
    pub fn delta(lattice: Lattice, site: [usize; 3], internal: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); lattice.len()];
        amplitudes[lattice.index(site, internal)] = C64::new(1.0, 0.0);
        Self {
            lattice,
            basis: Basis::Position,
            amplitudes,
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, site: [usize; 3], internal: usize) -> C64 {
        self.amplitudes[self.lattice.index(site, internal)]
    }

    /// `Σ|a|²`, accumulated in storage order.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Probability per site (or mode), summed over the internal index.
    pub fn cell_probabilities(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(DIM)
            .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn expect_basis(&self, expected: Basis) -> Result<(), LatticeError> {
        if self.basis != expected {
            return Err(LatticeError::BasisMismatch {
                expected,
                found: self.basis,
            });
        }
        Ok(())
    }

    /// Coefficients `⟨k,σ|ψ⟩` with `⟨x|k⟩ = e^{ik·x}/n^{3/2}`.
    pub fn to_momentum(&self) -> Result<Self, LatticeError> {
        self.expect_basis(Basis::Position)?;
        let mut amplitudes = self.amplitudes.clone();
        fft::transform(&mut amplitudes, self.lattice.n(), fft::Direction::ToMomentum);
        Ok(Self {
            lattice: self.lattice,
            basis: Basis::Momentum,
            amplitudes,
        })
    }

    pub fn to_position(&self) -> Result<Self, LatticeError> {
        self.expect_basis(Basis::Momentum)?;
        let mut amplitudes = self.amplitudes.clone();
        fft::transform(&mut amplitudes, self.lattice.n(), fft::Direction::ToPosition);
        Ok(Self {
            lattice: self.lattice,
            basis: Basis::Position,
            amplitudes,
        })
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<C64>) -> Self {
        Self {
            lattice: self.lattice,
            basis: self.basis,
            amplitudes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_size_rules() {
        assert!(Lattice::new(4).is_ok());
        assert_eq!(Lattice::new(6).unwrap().sites(), 216);
        assert_eq!(Lattice::new(5), Err(LatticeError::InvalidSize(5)));
        assert_eq!(Lattice::new(2), Err(LatticeError::InvalidSize(2)));
    }

    #[test]
    fn momentum_labels_cover_half_open_range() {
        let l = Lattice::new(8).unwrap();
        let labels: Vec<i64> = (0..8).map(|i| l.signed_label(i)).collect();
        assert_eq!(labels, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(l.momentum(4), PI);
        assert_eq!(l.storage_index(-1), 7);
    }

    #[test]
    fn delta_goes_to_uniform_momentum() {
        let l = Lattice::new(8).unwrap();
        let m = LatticeState::delta(l, [0, 0, 0], 2).to_momentum().unwrap();
        let expected = 1.0 / (512f64).sqrt();
        for site in 0..l.sites() {
            for s in 0..DIM {
                let a = m.amplitudes()[site * DIM + s];
                if s == 2 {
                    assert!((a - C64::new(expected, 0.0)).norm() < 1e-15);
                } else {
                    assert_eq!(a.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn wrong_basis_is_rejected() {
        let l = Lattice::new(4).unwrap();
        let s = LatticeState::delta(l, [1, 2, 3], 0);
        assert_eq!(
            s.to_position().unwrap_err(),
            LatticeError::BasisMismatch {
                expected: Basis::Momentum,
                found: Basis::Position
            }
        );
    }

    #[test]
    fn unnormalized_buffer_is_rejected() {
        let l = Lattice::new(4).unwrap();
        let v = vec![C64::new(1.0, 0.0); l.len()];
        assert!(matches!(
            LatticeState::from_amplitudes(l, Basis::Position, v.clone()),
            Err(LatticeError::NotNormalized(_))
        ));
        let s = LatticeState::normalized(l, Basis::Position, v).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-14);
    }
}
