//! Internal-space operators of the massless boson walk.
//!
//! The particle carries a six-dimensional internal state. The walk is built
//! from the spin-1 matrices `J_j`, the block matrices `γ_j = σ_Z ⊗ J_j`, and
//! the eigenprojectors of each `γ_j` (eigenvalues `+1`, `0`, `-1`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

pub type C64 = Complex64;

pub const DIM: usize = 6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Lattice axis. The derived ordering `X < Y < Z` is used for every
/// iteration whose order matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A 3×3 complex block (spin-1 operators).
pub type Block3 = [[C64; 3]; 3];

/// Spin-1 matrix `J_axis` in the Cartesian basis.
pub fn spin1_matrix(axis: Axis) -> Block3 {
    match axis {
        Axis::X => [[ZERO, ZERO, ZERO], [ZERO, ZERO, -I], [ZERO, I, ZERO]],
        Axis::Y => [[ZERO, ZERO, I], [ZERO, ZERO, ZERO], [-I, ZERO, ZERO]],
        Axis::Z => [[ZERO, -I, ZERO], [I, ZERO, ZERO], [ZERO, ZERO, ZERO]],
    }
}

/// A 6×6 complex matrix on the internal space.
#[derive(Clone, Copy, PartialEq)]
pub struct InternalMatrix {
    pub entries: [[C64; DIM]; DIM],
}

impl fmt::Debug for InternalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "InternalMatrix [")?;
        for row in &self.entries {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl InternalMatrix {
    pub fn zeros() -> Self {
        Self {
            entries: [[ZERO; DIM]; DIM],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.entries[i][i] = ONE;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for (i, row) in m.entries.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = f(i, j);
            }
        }
        m
    }

    /// Block-diagonal matrix `diag(upper, lower)`.
    pub fn block_diag(upper: &Block3, lower: &Block3) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.entries[i][j] = upper[i][j];
                m.entries[i + 3][j + 3] = lower[i][j];
            }
        }
        m
    }

    /// Kronecker product `diag(d0, d1) ⊗ block`.
    pub fn kron_diag2(d: [C64; 2], block: &Block3) -> Self {
        let mut upper = *block;
        let mut lower = *block;
        for i in 0..3 {
            for j in 0..3 {
                upper[i][j] *= d[0];
                lower[i][j] *= d[1];
            }
        }
        Self::block_diag(&upper, &lower)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i][j]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.entries[j][i].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..DIM).map(|i| self.entries[i][i]).sum()
    }

    pub fn mul_vec(&self, v: &[C64; DIM]) -> [C64; DIM] {
        let mut out = [ZERO; DIM];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i];
            let mut acc = ZERO;
            for j in 0..DIM {
                acc += row[j] * v[j];
            }
            *o = acc;
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Hermitian and idempotent.
    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (*self * *self).approx_eq(self, tol)
    }

    /// `self^power` by repeated squaring.
    pub fn pow(&self, mut power: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while power > 0 {
            if power & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            power >>= 1;
        }
        acc
    }
}

impl Mul for InternalMatrix {
    type Output = InternalMatrix;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.entries[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    out.entries[i][j] += a * rhs.entries[k][j];
                }
            }
        }
        out
    }
}

impl Add for InternalMatrix {
    type Output = InternalMatrix;

    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] + rhs.entries[i][j])
    }
}

impl Sub for InternalMatrix {
    type Output = InternalMatrix;

    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.entries[i][j] - rhs.entries[i][j])
    }
}

impl Neg for InternalMatrix {
    type Output = InternalMatrix;

    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.entries[i][j])
    }
}

impl Mul<C64> for InternalMatrix {
    type Output = InternalMatrix;

    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for InternalMatrix {
    type Output = InternalMatrix;

    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}

/// `γ_axis = σ_Z ⊗ J_axis`: block-diagonal with blocks `+J` and `-J`.
pub fn gamma(axis: Axis) -> InternalMatrix {
    InternalMatrix::kron_diag2([ONE, -ONE], &spin1_matrix(axis))
}

/// Eigenprojectors of `γ_axis` onto eigenvalues `+1`, `0`, `-1`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectorTriple {
    pub axis: Axis,
    pub plus: InternalMatrix,
    pub zero: InternalMatrix,
    pub minus: InternalMatrix,
}

impl ProjectorTriple {
    pub fn new(axis: Axis) -> Self {
        let g = gamma(axis);
        let g2 = g * g;
        // Entries of γ and γ² are 0, ±1, ±i, so halving is exact.
        Self {
            axis,
            plus: (g2 + g) * 0.5,
            zero: InternalMatrix::identity() - g2,
            minus: (g2 - g) * 0.5,
        }
    }

    /// The member selected by the sign `k` (`+1`, `0`, `-1`).
    pub fn member(&self, k: Sign) -> &InternalMatrix {
        match k {
            Sign::Plus => &self.plus,
            Sign::Zero => &self.zero,
            Sign::Minus => &self.minus,
        }
    }
}

pub fn build_projectors(axis: Axis) -> ProjectorTriple {
    ProjectorTriple::new(axis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Zero,
    Minus,
}

impl Sign {
    fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Zero => "0",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub instances: usize,
    pub max_residual: f64,
    pub passed: bool,
}

/// Outcome of checking the cross-axis projector conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub checks: Vec<ConditionCheck>,
    /// `c` in `P_i^k P_j^± P_i^k = c P_i^k`.
    pub c: f64,
    /// `c'` in `P_i^k P_j^0 P_i^k = c' P_i^k`.
    pub c_prime: f64,
    pub passed: bool,
}

impl ConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

const EXPECTED_C: f64 = 0.25;
const EXPECTED_C_PRIME: f64 = 0.5;

/// Evaluate every cross-axis condition over all ordered axis pairs `i ≠ j`
/// and signs `k = ±`, for the given projector triples.
pub fn check_projector_conditions(
    triples: &[ProjectorTriple; 3],
    tolerance: f64,
) -> ConditionReport {
    assert!(tolerance > 0.0, "tolerance must be positive");

    // c and c' read off a single instance; every instance is then checked
    // against them.
    let p = &triples[0];
    let q = &triples[1];
    let c = ratio(&(p.plus * q.plus * p.plus), &p.plus);
    let c_prime = ratio(&(p.plus * q.zero * p.plus), &p.plus);

    let pairs: Vec<(usize, usize)> = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();

    let mut checks = Vec::new();
    let mut push = |name: String, residuals: Vec<f64>| {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        checks.push(ConditionCheck {
            name,
            instances: residuals.len(),
            max_residual,
            passed: max_residual <= tolerance,
        });
    };

    for k in [Sign::Plus, Sign::Minus] {
        for (j_sign, constant, label) in [
            (Sign::Plus, c, "c"),
            (Sign::Minus, c, "c"),
            (Sign::Zero, c_prime, "c'"),
        ] {
            let residuals = pairs
                .iter()
                .map(|&(i, j)| {
                    let pk = triples[i].member(k);
                    let lhs = *pk * *triples[j].member(j_sign) * *pk;
                    lhs.max_abs_diff(&(*pk * constant))
                })
                .collect();
            push(
                format!(
                    "P_i^{k} P_j^{j} P_i^{k} = {label} P_i^{k}",
                    k = k.symbol(),
                    j = j_sign.symbol()
                ),
                residuals,
            );
        }
        let residuals = pairs
            .iter()
            .map(|&(i, j)| {
                let p0 = &triples[i].zero;
                let lhs = *p0 * *triples[j].member(k) * *p0;
                lhs.max_abs_diff(&(*p0 * c_prime))
            })
            .collect();
        push(
            format!("P_i^0 P_j^{k} P_i^0 = c' P_i^0", k = k.symbol()),
            residuals,
        );
    }

    let residuals = pairs
        .iter()
        .map(|&(i, j)| (triples[i].zero * triples[j].zero).max_abs())
        .collect();
    push("P_i^0 P_j^0 = 0".to_string(), residuals);

    let residuals = pairs
        .iter()
        .flat_map(|&(i, j)| {
            let (a, b) = (&triples[i], &triples[j]);
            [Sign::Plus, Sign::Zero, Sign::Minus].map(|k| {
                let pk = a.member(k);
                (*pk * b.plus * *pk).max_abs_diff(&(*pk * b.minus * *pk))
            })
        })
        .collect();
    push("P_i^k P_j^+ P_i^k = P_i^k P_j^- P_i^k".to_string(), residuals);

    let constants_ok = (c - EXPECTED_C).abs() <= tolerance
        && (c_prime - EXPECTED_C_PRIME).abs() <= tolerance
        && c > 0.0
        && c_prime > 0.0;
    let passed = constants_ok && checks.iter().all(|c| c.passed);
    ConditionReport {
        tolerance,
        checks,
        c,
        c_prime,
        passed,
    }
}

/// Check the cross-axis conditions on the walk's own projectors.
pub fn verify_projector_conditions(tolerance: f64) -> ConditionReport {
    let triples = Axis::ALL.map(ProjectorTriple::new);
    check_projector_conditions(&triples, tolerance)
}

fn ratio(lhs: &InternalMatrix, p: &InternalMatrix) -> f64 {
    (lhs.trace() / p.trace()).re
}
