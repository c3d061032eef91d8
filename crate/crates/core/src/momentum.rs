//! Momentum-space analysis of the walk.
//!
//! For a plane wave of reduced momentum `κ = kΔx` the walk acts on the
//! internal space as the 6×6 unitary `U_κ = e^{-iκ_xγ_X} e^{-iκ_yγ_Y} e^{-iκ_zγ_Z}`.
//! Everything here is in lattice units (`Δx = Δt = c = 1`).
//!
//! `U_κ` is block diagonal. The `σ_Z = -1` block is a rotation by the angle
//! `φ(κ) = arccos((c_xc_y + c_xc_z + c_yc_z + s_xs_ys_z - 1)/2)`; the
//! `σ_Z = +1` block is the same rotation evaluated at `-κ`, whose angle is
//! `φ(-κ)`. The two angles coincide only where `s_xs_ys_z = 0`, so each
//! helicity sector carries its own phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{gamma, Axis, InternalMatrix, C64, DIM};

/// Slack allowed on the arccos argument before it is treated as a bug.
pub const ARCCOS_SLACK: f64 = 1e-12;
/// Distance of `φ` from `0` or `π` below which branches are considered merged.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("arccos argument {argument} lies outside [-1, 1] by more than {ARCCOS_SLACK:e}")]
    ArgumentOutOfRange { argument: f64 },
    #[error("spectrum is degenerate at κ = {kappa:?} (phase {phase} within {DEGENERACY_TOL:e} of 0 or π)")]
    DegenerateSpectrum { kappa: [f64; 3], phase: f64 },
    #[error("momentum must be nonzero")]
    ZeroMomentum,
    #[error("|κ| = {magnitude} lies outside the series window (0, {limit}]")]
    SeriesOutOfRange { magnitude: f64, limit: f64 },
    #[error("finite-difference step {0} outside [1e-8, 1e-2]")]
    InvalidStep(f64),
    #[error("momentum component {0} outside (-π, π]")]
    OutOfZone(f64),
}

/// Dimensionless momentum `κ = kΔx`, each component in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedMomentum {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_z: f64,
}

/// Map a real number into `(-π, π]`.
pub fn wrap_to_zone(k: f64) -> f64 {
    if k > -PI && k <= PI {
        return k;
    }
    let two_pi = 2.0 * PI;
    let mut w = k.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    if w <= -PI {
        w += two_pi;
    }
    w
}

impl ReducedMomentum {
    pub fn new(kappa_x: f64, kappa_y: f64, kappa_z: f64) -> Result<Self, KernelError> {
        for k in [kappa_x, kappa_y, kappa_z] {
            if !(k > -PI && k <= PI) {
                return Err(KernelError::OutOfZone(k));
            }
        }
        Ok(Self {
            kappa_x,
            kappa_y,
            kappa_z,
        })
    }

    /// Build from arbitrary reals, folding each component into the zone.
    pub fn wrapped(kappa_x: f64, kappa_y: f64, kappa_z: f64) -> Self {
        Self {
            kappa_x: wrap_to_zone(kappa_x),
            kappa_y: wrap_to_zone(kappa_y),
            kappa_z: wrap_to_zone(kappa_z),
        }
    }

    pub fn from_array(k: [f64; 3]) -> Self {
        Self::wrapped(k[0], k[1], k[2])
    }

    pub fn zero() -> Self {
        Self::wrapped(0.0, 0.0, 0.0)
    }

    pub fn along(axis: Axis, magnitude: f64) -> Self {
        let mut k = [0.0; 3];
        k[axis.index()] = magnitude;
        Self::from_array(k)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.kappa_x, self.kappa_y, self.kappa_z]
    }

    pub fn component(&self, axis: Axis) -> f64 {
        self.as_array()[axis.index()]
    }

    pub fn magnitude(&self) -> f64 {
        let [x, y, z] = self.as_array();
        (x * x + y * y + z * z).sqrt()
    }

    pub fn negated(&self) -> Self {
        Self::wrapped(-self.kappa_x, -self.kappa_y, -self.kappa_z)
    }
}

/// Helicity label within an energy branch. `Up` is the `σ_Z = -1` sector
/// (internal indices 3..6), whose angle is `φ(κ)`; `Down` is the `σ_Z = +1`
/// sector (indices 0..3), whose angle is `φ(-κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Helicity {
    Up,
    Down,
}

impl Helicity {
    pub const ALL: [Helicity; 2] = [Helicity::Up, Helicity::Down];

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Helicity::Up),
            1 => Some(Helicity::Down),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Helicity::Up => 0,
            Helicity::Down => 1,
        }
    }

    /// Internal-space indices spanned by this sector.
    pub fn internal_range(self) -> std::ops::Range<usize> {
        match self {
            Helicity::Up => 3..6,
            Helicity::Down => 0..3,
        }
    }

    fn sector_projector(self) -> InternalMatrix {
        let r = self.internal_range();
        InternalMatrix::from_fn(|i, j| {
            if i == j && r.contains(&i) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// `e^{-iθγ} = I - iγ sin θ + γ²(cos θ - 1)`, valid because `γ³ = γ`.
pub fn axis_exponential(axis: Axis, theta: f64) -> InternalMatrix {
    let g = gamma(axis);
    let g2 = g * g;
    InternalMatrix::identity() + g * C64::new(0.0, -theta.sin()) + g2 * (theta.cos() - 1.0)
}

/// `U_κ` as the ordered product of the three axis exponentials.
pub fn kernel_exponential(kappa: &ReducedMomentum) -> InternalMatrix {
    axis_exponential(Axis::X, kappa.kappa_x)
        * axis_exponential(Axis::Y, kappa.kappa_y)
        * axis_exponential(Axis::Z, kappa.kappa_z)
}

/// `U_κ` written out entry by entry.
pub fn kernel_closed_form(kappa: &ReducedMomentum) -> InternalMatrix {
    let (sx, cx) = kappa.kappa_x.sin_cos();
    let (sy, cy) = kappa.kappa_y.sin_cos();
    let (sz, cz) = kappa.kappa_z.sin_cos();
    let rows: [[f64; DIM]; DIM] = [
        [cy * cz, -cy * sz, sy, 0.0, 0.0, 0.0],
        [cz * sx * sy + cx * sz, cx * cz - sx * sy * sz, -cy * sx, 0.0, 0.0, 0.0],
        [-cx * cz * sy + sx * sz, cz * sx + cx * sy * sz, cx * cy, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, cy * cz, cy * sz, -sy],
        [0.0, 0.0, 0.0, cz * sx * sy - cx * sz, cx * cz + sx * sy * sz, cy * sx],
        [0.0, 0.0, 0.0, cx * cz * sy + sx * sz, -cz * sx + cx * sy * sz, cx * cy],
    ];
    InternalMatrix::from_fn(|i, j| C64::new(rows[i][j], 0.0))
}

/// Half-angle quantities of the rotation angle `φ`:
/// `h = sin²(φ/2)` and `g = cos²(φ/2)`, each evaluated without cancellation
/// in the regime where it is small.
#[derive(Debug, Clone, Copy)]
struct HalfAngle {
    arccos_argument: f64,
    sin2: f64,
    cos2: f64,
}

fn half_angle(k: [f64; 3]) -> HalfAngle {
    let (sx, cx) = k[0].sin_cos();
    let (sy, cy) = k[1].sin_cos();
    let (sz, cz) = k[2].sin_cos();
    let sss = sx * sy * sz;
    let pair_sum = cx * cy + cx * cz + cy * cz;
    let arccos_argument = (pair_sum + sss - 1.0) / 2.0;

    // 1 - cos κ = 2 sin²(κ/2) keeps small-κ terms exact.
    let u = k.map(|a| {
        let s = (0.5 * a).sin();
        2.0 * s * s
    });
    let three_minus_pairs =
        2.0 * (u[0] + u[1] + u[2]) - (u[0] * u[1] + u[0] * u[2] + u[1] * u[2]);
    let sin2 = (three_minus_pairs - sss) / 4.0;
    let cos2 = (pair_sum + sss + 1.0) / 4.0;
    HalfAngle {
        arccos_argument,
        sin2,
        cos2,
    }
}

fn check_argument(h: &HalfAngle) -> Result<(), KernelError> {
    let a = h.arccos_argument;
    if !a.is_finite() || !(-1.0 - ARCCOS_SLACK..=1.0 + ARCCOS_SLACK).contains(&a) {
        return Err(KernelError::ArgumentOutOfRange { argument: a });
    }
    Ok(())
}

fn angle_from(h: &HalfAngle) -> f64 {
    if h.sin2 <= 0.5 {
        2.0 * h.sin2.clamp(0.0, 1.0).sqrt().asin()
    } else {
        PI - 2.0 * h.cos2.clamp(0.0, 1.0).sqrt().asin()
    }
}

pub(crate) fn phase_of(k: [f64; 3]) -> Result<f64, KernelError> {
    let h = half_angle(k);
    check_argument(&h)?;
    Ok(angle_from(&h))
}

/// Positive-branch phase `φ(κ) ∈ [0, π]`, the `Up` sector's per-step angle.
pub fn phase(kappa: &ReducedMomentum) -> Result<f64, KernelError> {
    phase_of(kappa.as_array())
}

/// Per-step angle of the given helicity sector.
pub fn helicity_phase(kappa: &ReducedMomentum, helicity: Helicity) -> Result<f64, KernelError> {
    match helicity {
        Helicity::Up => phase_of(kappa.as_array()),
        Helicity::Down => phase_of(kappa.as_array().map(|a| -a)),
    }
}

fn is_degenerate(phase: f64) -> bool {
    phase < DEGENERACY_TOL || PI - phase < DEGENERACY_TOL
}

fn nondegenerate_phase(kappa: &ReducedMomentum, helicity: Helicity) -> Result<f64, KernelError> {
    let phase = helicity_phase(kappa, helicity)?;
    if is_degenerate(phase) {
        return Err(KernelError::DegenerateSpectrum {
            kappa: kappa.as_array(),
            phase,
        });
    }
    Ok(phase)
}

/// Spectral resolution of `U_κ`.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    /// `φ(κ)`, the `Up` sector's angle.
    pub phase: f64,
    /// Angles indexed by [`Helicity::index`].
    pub helicity_phases: [f64; 2],
    /// `e^{-iφ_up}, e^{-iφ_down}, 1, 1, e^{iφ_up}, e^{iφ_down}`.
    pub eigenvalues: [C64; DIM],
    /// Rank-2 projector onto the positive-energy eigenvectors of both sectors.
    pub projector_plus: InternalMatrix,
    pub projector_zero: InternalMatrix,
    pub projector_minus: InternalMatrix,
    /// Rank-1 positive-energy projectors per sector.
    pub plus_by_helicity: [InternalMatrix; 2],
    pub minus_by_helicity: [InternalMatrix; 2],
}

impl ModeDecomposition {
    pub fn reconstruct(&self) -> InternalMatrix {
        let mut u = self.projector_zero;
        for h in Helicity::ALL {
            let p = self.helicity_phases[h.index()];
            u = u + self.plus_by_helicity[h.index()] * C64::from_polar(1.0, -p)
                + self.minus_by_helicity[h.index()] * C64::from_polar(1.0, p);
        }
        u
    }

    /// `U_κ^steps` through the spectral resolution.
    pub fn power(&self, steps: u64) -> InternalMatrix {
        let t = steps as f64;
        let mut u = self.projector_zero;
        for h in Helicity::ALL {
            let p = self.helicity_phases[h.index()] * t;
            u = u + self.plus_by_helicity[h.index()] * C64::from_polar(1.0, -p)
                + self.minus_by_helicity[h.index()] * C64::from_polar(1.0, p);
        }
        u
    }
}

/// Three-point Lagrange projector of a sector onto the eigenvalue `target`.
fn lagrange(
    u: &InternalMatrix,
    sector: &InternalMatrix,
    target: C64,
    others: [C64; 2],
) -> InternalMatrix {
    let id = InternalMatrix::identity();
    let num = (*u - id * others[0]) * (*u - id * others[1]);
    let den = (target - others[0]) * (target - others[1]);
    *sector * num * (C64::new(1.0, 0.0) / den)
}

fn sector_projectors(
    u: &InternalMatrix,
    helicity: Helicity,
    phase: f64,
) -> [InternalMatrix; 3] {
    let q = helicity.sector_projector();
    let one = C64::new(1.0, 0.0);
    let em = C64::from_polar(1.0, -phase);
    let ep = C64::from_polar(1.0, phase);
    [
        lagrange(u, &q, em, [one, ep]),
        lagrange(u, &q, one, [em, ep]),
        lagrange(u, &q, ep, [em, one]),
    ]
}

/// Decompose `U_κ` into its spectral projectors using the known eigenvalues.
pub fn mode_decomposition(kappa: &ReducedMomentum) -> Result<ModeDecomposition, KernelError> {
    let phases = [
        nondegenerate_phase(kappa, Helicity::Up)?,
        nondegenerate_phase(kappa, Helicity::Down)?,
    ];
    let u = kernel_closed_form(kappa);
    let mut plus = [InternalMatrix::zeros(); 2];
    let mut minus = [InternalMatrix::zeros(); 2];
    let mut zero = InternalMatrix::zeros();
    for h in Helicity::ALL {
        let [p, z, m] = sector_projectors(&u, h, phases[h.index()]);
        plus[h.index()] = p;
        minus[h.index()] = m;
        zero = zero + z;
    }
    let eigenvalues = [
        C64::from_polar(1.0, -phases[0]),
        C64::from_polar(1.0, -phases[1]),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::from_polar(1.0, phases[0]),
        C64::from_polar(1.0, phases[1]),
    ];
    Ok(ModeDecomposition {
        phase: phases[0],
        helicity_phases: phases,
        eigenvalues,
        projector_plus: plus[0] + plus[1],
        projector_zero: zero,
        projector_minus: minus[0] + minus[1],
        plus_by_helicity: plus,
        minus_by_helicity: minus,
    })
}

/// Rank-1 projector onto the positive-energy eigenvector of one sector.
pub fn positive_energy_projector(
    kappa: &ReducedMomentum,
    helicity: Helicity,
) -> Result<(InternalMatrix, f64), KernelError> {
    let phase = nondegenerate_phase(kappa, helicity)?;
    let u = kernel_closed_form(kappa);
    let [p, _, _] = sector_projectors(&u, helicity, phase);
    Ok((p, phase))
}

/// Group velocity in units of `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupVelocity {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl GroupVelocity {
    pub fn from_array(v: [f64; 3]) -> Self {
        Self {
            vx: v[0],
            vy: v[1],
            vz: v[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }

    pub fn speed(&self) -> f64 {
        let [x, y, z] = self.as_array();
        (x * x + y * y + z * z).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.as_array();
        let b = other.as_array();
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

/// Below this the shared denominator `√(4 - (2cos φ)²)` is treated as zero.
const DENOMINATOR_TOL: f64 = 1e-9;

fn analytic_velocity(k: [f64; 3]) -> Result<GroupVelocity, KernelError> {
    let h = half_angle(k);
    check_argument(&h)?;
    // √(4 - A²) = √((2 - A)(2 + A)) = 4√(sin²(φ/2) cos²(φ/2))
    let den = 4.0 * (h.sin2.max(0.0) * h.cos2.max(0.0)).sqrt();
    if den < DENOMINATOR_TOL {
        return Err(KernelError::DegenerateSpectrum {
            kappa: k,
            phase: angle_from(&h),
        });
    }
    let (sx, cx) = k[0].sin_cos();
    let (sy, cy) = k[1].sin_cos();
    let (sz, cz) = k[2].sin_cos();
    Ok(GroupVelocity {
        vx: (sx * (cy + cz) - cx * sy * sz) / den,
        vy: (sy * (cx + cz) - sx * cy * sz) / den,
        vz: (sz * (cx + cy) - sx * sy * cz) / den,
    })
}

/// Exact group velocity `∇φ(κ)` of the `Up` sector.
pub fn group_velocity_analytic(kappa: &ReducedMomentum) -> Result<GroupVelocity, KernelError> {
    analytic_velocity(kappa.as_array())
}

/// Group velocity of a given helicity sector. The `Down` sector's phase is
/// `φ(-κ)`, so its velocity is `-∇φ` evaluated at `-κ`.
pub fn helicity_group_velocity(
    kappa: &ReducedMomentum,
    helicity: Helicity,
) -> Result<GroupVelocity, KernelError> {
    match helicity {
        Helicity::Up => analytic_velocity(kappa.as_array()),
        Helicity::Down => {
            let v = analytic_velocity(kappa.as_array().map(|a| -a))?;
            Ok(GroupVelocity::from_array(v.as_array().map(|a| -a)))
        }
    }
}

/// Central-difference gradient of [`phase`].
pub fn group_velocity_numeric(
    kappa: &ReducedMomentum,
    step: f64,
) -> Result<GroupVelocity, KernelError> {
    if !(1e-8..=1e-2).contains(&step) {
        return Err(KernelError::InvalidStep(step));
    }
    let k = kappa.as_array();
    let centre = phase_of(k)?;
    // The stencil must not straddle a branch point, where φ has a kink.
    if centre < step.max(DEGENERACY_TOL) * 2.0 || PI - centre < step.max(DEGENERACY_TOL) * 2.0 {
        return Err(KernelError::DegenerateSpectrum {
            kappa: k,
            phase: centre,
        });
    }
    let mut v = [0.0; 3];
    for (axis, slot) in v.iter_mut().enumerate() {
        let mut fwd = k;
        let mut bwd = k;
        fwd[axis] += step;
        bwd[axis] -= step;
        *slot = (phase_of(fwd)? - phase_of(bwd)?) / (2.0 * step);
    }
    Ok(GroupVelocity::from_array(v))
}

/// Leading relative speed deviation `-κ_xκ_yκ_z/|κ|²`, so `|v| ≈ 1 + value`.
pub fn speed_deviation_series(kappa: &ReducedMomentum) -> Result<f64, KernelError> {
    let m2 = kappa.magnitude().powi(2);
    if m2 == 0.0 {
        return Err(KernelError::ZeroMomentum);
    }
    Ok(-kappa.kappa_x * kappa.kappa_y * kappa.kappa_z / m2)
}

pub const SERIES_WINDOW: f64 = 0.1;

/// `|φ(κ) - (|κ| - κ_xκ_yκ_z/|κ|)|`, which should scale as `|κ|³`.
pub fn phase_expansion_check(kappa: &ReducedMomentum) -> Result<f64, KernelError> {
    let m = kappa.magnitude();
    if m == 0.0 {
        return Err(KernelError::ZeroMomentum);
    }
    if m > SERIES_WINDOW {
        return Err(KernelError::SeriesOutOfRange {
            magnitude: m,
            limit: SERIES_WINDOW,
        });
    }
    let series = m - kappa.kappa_x * kappa.kappa_y * kappa.kappa_z / m;
    Ok((phase(kappa)? - series).abs())
}

/// `|φ(κ) - (|κ| - κ_xκ_yκ_z/(2|κ|))|`.
///
/// The true second-order term carries a factor `1/2`: its radial derivative
/// is the speed deviation `-κ_xκ_yκ_z/|κ|²`. Against this series the
/// residual is `O(|κ|³)`; against the one in [`phase_expansion_check`] it is
/// `O(|κ|²)`.
pub fn phase_expansion_residual(kappa: &ReducedMomentum) -> Result<f64, KernelError> {
    let m = kappa.magnitude();
    if m == 0.0 {
        return Err(KernelError::ZeroMomentum);
    }
    if m > SERIES_WINDOW {
        return Err(KernelError::SeriesOutOfRange {
            magnitude: m,
            limit: SERIES_WINDOW,
        });
    }
    let series = m - 0.5 * kappa.kappa_x * kappa.kappa_y * kappa.kappa_z / m;
    Ok((phase(kappa)? - series).abs())
}

/// Momenta `2πℓ/m` for the integers `ℓ` in `(-m/2, m/2]`, ascending.
pub fn zone_grid(m: usize) -> Vec<f64> {
    let hi = (m / 2) as i64;
    let lo = hi - m as i64 + 1;
    (lo..=hi)
        .map(|l| 2.0 * PI * l as f64 / m as f64)
        .collect()
}

/// One point of the dispersion surface. Velocity is `None` at branch points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSample {
    pub kappa: [f64; 3],
    pub phase: f64,
    pub velocity: Option<GroupVelocity>,
}

/// Phase and group velocity over an `m³` grid, in lexicographic `(kx, ky, kz)` order.
pub fn dispersion_surface(m: usize) -> Result<Vec<DispersionSample>, KernelError> {
    let axis = zone_grid(m);
    let total = m * m * m;
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let k = [axis[idx / (m * m)], axis[(idx / m) % m], axis[idx % m]];
            let phase = phase_of(k)?;
            let velocity = match analytic_velocity(k) {
                Ok(v) if !is_degenerate(phase) => Some(v),
                Ok(_) | Err(KernelError::DegenerateSpectrum { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(DispersionSample {
                kappa: k,
                phase,
                velocity,
            })
        })
        .collect()
}

/// Apply `U_κ` to an internal 6-vector.
pub fn apply_kernel(kappa: &ReducedMomentum, v: &[Complex64; DIM]) -> [Complex64; DIM] {
    kernel_closed_form(kappa).mul_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(x: f64, y: f64, z: f64) -> ReducedMomentum {
        ReducedMomentum::wrapped(x, y, z)
    }

    #[test]
    fn wrapping_lands_in_half_open_zone() {
        assert_eq!(wrap_to_zone(PI), PI);
        assert!((wrap_to_zone(-PI) - PI).abs() < 1e-15);
        assert!((wrap_to_zone(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_to_zone(2.0 * PI + 0.5) - 0.5).abs() < 1e-12);
        assert!(ReducedMomentum::new(-PI, 0.0, 0.0).is_err());
    }

    #[test]
    fn kernel_at_origin_is_identity() {
        let k = ReducedMomentum::zero();
        assert!(kernel_exponential(&k).approx_eq(&InternalMatrix::identity(), 0.0));
        assert!(kernel_closed_form(&k).approx_eq(&InternalMatrix::identity(), 0.0));
    }

    #[test]
    fn kernel_at_x_zone_edge() {
        // I - 2γ_X²: diag(1, -1, -1) in both blocks.
        let expected = InternalMatrix::from_fn(|i, j| {
            if i != j {
                C64::new(0.0, 0.0)
            } else if i % 3 == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(-1.0, 0.0)
            }
        });
        let k = rm(PI, 0.0, 0.0);
        assert!(kernel_exponential(&k).approx_eq(&expected, 1e-15));
        assert!(kernel_closed_form(&k).approx_eq(&expected, 1e-15));
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase(&ReducedMomentum::zero()).unwrap(), 0.0);
        for eps in [1e-6, 0.1, 1.0, 2.5, PI] {
            let p = phase(&rm(eps, 0.0, 0.0)).unwrap();
            assert!((p - eps).abs() <= 4e-15 * eps.max(1.0), "{eps}: {p}");
        }
        let p = phase(&rm(PI / 2.0, PI / 2.0, PI / 2.0)).unwrap();
        assert!((p - PI / 2.0).abs() < 1e-15);
        let p = phase(&rm(PI, PI, PI)).unwrap();
        assert!(p.abs() < 1e-7);
    }

    #[test]
    fn helicity_phases_swap_under_negation() {
        let k = rm(0.3, 0.5, 0.7);
        let up = helicity_phase(&k, Helicity::Up).unwrap();
        let down = helicity_phase(&k, Helicity::Down).unwrap();
        assert!((up - 0.842_262_197_450_070_9).abs() < 1e-12);
        assert!((down - 0.958_798_451_713_741_5).abs() < 1e-12);
        assert_eq!(helicity_phase(&k.negated(), Helicity::Up).unwrap(), down);
    }

    #[test]
    fn decomposition_errors_at_branch_points() {
        assert!(matches!(
            mode_decomposition(&ReducedMomentum::zero()),
            Err(KernelError::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            group_velocity_analytic(&ReducedMomentum::zero()),
            Err(KernelError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn decomposition_at_quarter_turn() {
        let d = mode_decomposition(&rm(PI / 2.0, 0.0, 0.0)).unwrap();
        assert!((d.phase - PI / 2.0).abs() < 1e-15);
        for p in [&d.projector_plus, &d.projector_zero, &d.projector_minus] {
            assert!((p.trace().re - 2.0).abs() < 1e-12);
            assert!(p.is_projector(1e-12));
        }
        let u = kernel_closed_form(&rm(PI / 2.0, 0.0, 0.0));
        assert!(d.reconstruct().approx_eq(&u, 1e-12));
    }

    #[test]
    fn axis_velocity_is_exactly_c() {
        for eps in [1e-4, 0.4, 1.7, 3.0] {
            for axis in Axis::ALL {
                let v = group_velocity_analytic(&ReducedMomentum::along(axis, eps)).unwrap();
                let mut expected = [0.0; 3];
                expected[axis.index()] = 1.0;
                assert!(v.max_abs_diff(&GroupVelocity::from_array(expected)) < 1e-13);
            }
        }
    }

    #[test]
    fn body_diagonal_quarter_turn_is_stationary() {
        let v = group_velocity_analytic(&rm(PI / 2.0, PI / 2.0, PI / 2.0)).unwrap();
        assert!(v.speed() < 1e-15);
    }

    #[test]
    fn numeric_velocity_on_axis() {
        let v = group_velocity_numeric(&rm(0.3, 0.0, 0.0), 1e-5).unwrap();
        assert!(v.max_abs_diff(&GroupVelocity::from_array([1.0, 0.0, 0.0])) < 1e-9);
        assert!(matches!(
            group_velocity_numeric(&rm(0.3, 0.0, 0.0), 0.1),
            Err(KernelError::InvalidStep(_))
        ));
    }

    #[test]
    fn series_examples() {
        let t = 0.01;
        let d = 1.0 / 3f64.sqrt();
        let v = speed_deviation_series(&rm(t * d, t * d, t * d)).unwrap();
        assert!((v + t / (3.0 * 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(speed_deviation_series(&rm(t, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(
            speed_deviation_series(&ReducedMomentum::zero()),
            Err(KernelError::ZeroMomentum)
        );
    }

    #[test]
    fn expansion_residual_examples() {
        let d = 1e-3 / 3f64.sqrt();
        // The full-coefficient series misses by κ_xκ_yκ_z/(2|κ|).
        let miss = d * d * d / (2.0 * 1e-3);
        assert!((phase_expansion_check(&rm(d, d, d)).unwrap() - miss).abs() < 1e-3 * miss);
        assert!(phase_expansion_residual(&rm(d, d, d)).unwrap() <= 1e-10);
        assert_eq!(phase_expansion_residual(&rm(0.05, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(phase_expansion_check(&rm(0.05, 0.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(
            phase_expansion_check(&rm(0.2, 0.0, 0.0)),
            Err(KernelError::SeriesOutOfRange { .. })
        ));
    }

    #[test]
    fn zone_grid_labels() {
        let g = zone_grid(3);
        assert_eq!(g.len(), 3);
        assert_eq!(g[1], 0.0);
        let g = zone_grid(4);
        assert_eq!(g, vec![-PI / 2.0, 0.0, PI / 2.0, PI]);
    }
}
