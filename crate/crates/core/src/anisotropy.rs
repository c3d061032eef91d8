//! Angular structure of the leading speed deviation.
//!
//! To first order in `κ = |k|Δx` the speed in direction `(θ, φ)` is
//! `c(1 - κ·s(θ, φ))` with `s = cos θ sin²θ cos φ sin φ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::momentum::SERIES_WINDOW;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnisotropyError {
    #[error("|κ| = {0} outside the series window [0, {SERIES_WINDOW}]")]
    SeriesOutOfRange(f64),
    #[error("quadrature resolution {n_theta}×{n_phi} below the 16×16 minimum")]
    ResolutionTooLow { n_theta: usize, n_phi: usize },
    #[error("direction (θ = {theta}, φ = {phi}) outside [0, π] × [0, 2π)")]
    InvalidDirection { theta: f64, phi: f64 },
}

/// Polar angle `theta ∈ [0, π]`, azimuth `phi ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self, AnisotropyError> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(AnisotropyError::InvalidDirection { theta, phi });
        }
        Ok(Self { theta, phi })
    }

    /// Fold arbitrary angles into range, flipping through the poles as needed.
    pub fn normalized(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(2.0 * PI);
        let mut p = phi;
        if t > PI {
            t = 2.0 * PI - t;
            p += PI;
        }
        let mut p = p.rem_euclid(2.0 * PI);
        if p >= 2.0 * PI {
            p = 0.0;
        }
        Self { theta: t, phi: p }
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        Self::normalized(theta, v[1].atan2(v[0]))
    }
}

pub fn s_factor(direction: &Direction) -> f64 {
    let (st, ct) = direction.theta.sin_cos();
    let (sp, cp) = direction.phi.sin_cos();
    ct * st * st * cp * sp
}

/// Gradient and Hessian of `s` in `(θ, φ)`.
fn s_derivatives(theta: f64, phi: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let (st, ct) = theta.sin_cos();
    let f = ct * st * st;
    let df = 2.0 * st * ct * ct - st * st * st;
    let d2f = 2.0 * ct * ct * ct - 7.0 * st * st * ct;
    let g = 0.5 * (2.0 * phi).sin();
    let dg = (2.0 * phi).cos();
    let d2g = -2.0 * (2.0 * phi).sin();
    (
        [df * g, f * dg],
        [[d2f * g, df * dg], [df * dg, f * d2g]],
    )
}

/// Relative speed deviation `(v_g - c)/c = -κ·s(θ, φ)` to first order.
pub fn deviation_for_direction(
    kappa_magnitude: f64,
    direction: &Direction,
) -> Result<f64, AnisotropyError> {
    if !(0.0..=SERIES_WINDOW).contains(&kappa_magnitude) {
        return Err(AnisotropyError::SeriesOutOfRange(kappa_magnitude));
    }
    Ok(-kappa_magnitude * s_factor(direction))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereStats {
    /// Solid-angle average of `s`.
    pub mean: f64,
    /// `√⟨s²⟩` with `⟨·⟩` the unit-normalized solid-angle average.
    pub rms_unit_average: f64,
    /// `√(∫ s² dΩ) = √(4π)·rms_unit_average`.
    pub rms_paper_normalization: f64,
    pub min: f64,
    pub max: f64,
    pub argmax: Direction,
    pub argmin: Direction,
    /// Change in mean and RMS when both resolutions are doubled.
    pub quadrature_error_estimate: f64,
}

impl SphereStats {
    /// Largest spread of the deviation factor between two directions.
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Solid-angle mean and mean square of `s` on a `n_theta × n_phi` product rule.
fn sphere_moments(n_theta: usize, n_phi: usize) -> (f64, f64) {
    let (nodes, weights) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    // Each ring is summed on its own; rings are then combined in order.
    let rings: Vec<(f64, f64)> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&x, &w)| {
            let theta = x.acos();
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for j in 0..n_phi {
                let s = s_factor(&Direction {
                    theta,
                    phi: j as f64 * dphi,
                });
                s1 += s;
                s2 += s * s;
            }
            (w * s1 * dphi, w * s2 * dphi)
        })
        .collect();
    let total = 4.0 * PI;
    let (s1, s2) = rings
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    (s1 / total, s2 / total)
}

const EXTREMUM_GRID: usize = 256;
const NEWTON_STEPS: usize = 50;

fn refine(mut theta: f64, mut phi: f64) -> (f64, f64) {
    for _ in 0..NEWTON_STEPS {
        let (g, h) = s_derivatives(theta, phi);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dt = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dp = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        theta = (theta - dt).clamp(0.0, PI);
        phi -= dp;
        if dt.abs() < 1e-16 && dp.abs() < 1e-16 {
            break;
        }
    }
    (theta, phi)
}

fn extremum(sign: f64) -> (f64, Direction) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=EXTREMUM_GRID {
        let theta = PI * i as f64 / EXTREMUM_GRID as f64;
        for j in 0..EXTREMUM_GRID {
            let phi = 2.0 * PI * j as f64 / EXTREMUM_GRID as f64;
            let v = sign * s_factor(&Direction { theta, phi });
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let (t, p) = refine(best.1, best.2);
    let d = Direction::normalized(t, p);
    let refined = sign * s_factor(&d);
    if refined >= best.0 {
        (sign * refined, d)
    } else {
        (sign * best.0, Direction::normalized(best.1, best.2))
    }
}

/// Sphere statistics of `s(θ, φ)`: Gauss-Legendre in `cos θ`, uniform
/// trapezoid in `φ`, extrema by grid search plus Newton refinement.
pub fn sphere_stats(n_theta: usize, n_phi: usize) -> Result<SphereStats, AnisotropyError> {
    if n_theta < 16 || n_phi < 16 {
        return Err(AnisotropyError::ResolutionTooLow { n_theta, n_phi });
    }
    let (mean, mean_sq) = sphere_moments(n_theta, n_phi);
    let (mean2, mean_sq2) = sphere_moments(2 * n_theta, 2 * n_phi);
    let rms = mean_sq.sqrt();
    let quadrature_error_estimate = (mean - mean2).abs().max((rms - mean_sq2.sqrt()).abs());
    let (max, argmax) = extremum(1.0);
    let (min, argmin) = extremum(-1.0);
    Ok(SphereStats {
        mean,
        rms_unit_average: rms,
        rms_paper_normalization: (4.0 * PI).sqrt() * rms,
        min,
        max,
        argmax,
        argmin,
        quadrature_error_estimate,
    })
}

/// One row of the anisotropy map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapSample {
    pub theta: f64,
    pub phi: f64,
    pub s: f64,
}

/// `s` on a regular grid: `n_theta` polar values spanning `[0, π]` inclusive
/// and `n_phi` azimuths `2πj/n_phi`.
pub fn anisotropy_map(n_theta: usize, n_phi: usize) -> Vec<MapSample> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = if n_theta == 1 {
            0.0
        } else {
            PI * i as f64 / (n_theta - 1) as f64
        };
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            out.push(MapSample {
                theta,
                phi,
                s: s_factor(&Direction { theta, phi }),
            });
        }
    }
    out
}
