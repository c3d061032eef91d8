use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::C64;
use crate::momentum::{helicity_group_velocity, GroupVelocity};

use super::{evolve_spectral, make_wavepacket, Basis, Lattice, LatticeError, LatticeState, WavePacketSpec};

const MIN_RESULTANT: f64 = 1e-6;

/// Circular-mean position and spread of a state at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentroidSample {
    pub step: u64,
    /// Per-axis circular mean in `[0, n)`.
    pub position: [f64; 3],
    /// Per-axis circular standard deviation, in sites.
    pub spread: [f64; 3],
    pub norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CentroidTrajectory {
    pub samples: Vec<CentroidSample>,
}

impl CentroidTrajectory {
    pub fn push(&mut self, sample: CentroidSample) {
        if let Some(last) = self.samples.last() {
            assert!(sample.step > last.step, "trajectory steps must increase");
        }
        self.samples.push(sample);
    }
}

/// Per-axis circular mean of the site probability distribution.
pub fn centroid(state: &LatticeState) -> Result<CentroidSample, LatticeError> {
    if state.basis() != Basis::Position {
        return Err(LatticeError::BasisMismatch {
            expected: Basis::Position,
            found: state.basis(),
        });
    }
    let lattice = state.lattice();
    let n = lattice.n();
    let probs = state.cell_probabilities();
    let mut marginals = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (cell, p) in probs.iter().enumerate() {
        let site = lattice.site_of(cell);
        for a in 0..3 {
            marginals[a][site[a]] += p;
        }
    }
    let total: f64 = marginals[0].iter().sum();

    let mut position = [0.0; 3];
    let mut spread = [0.0; 3];
    for a in 0..3 {
        let resultant: C64 = marginals[a]
            .iter()
            .enumerate()
            .map(|(x, p)| lattice.root_of_unity(x as i64) * *p)
            .sum::<C64>()
            / total;
        let r = resultant.norm();
        if !(r >= MIN_RESULTANT) {
            return Err(LatticeError::UndefinedCentroid {
                axis: a,
                resultant: r,
            });
        }
        let mut x = n as f64 * resultant.arg() / (2.0 * PI);
        if x < 0.0 {
            x += n as f64;
        }
        if x >= n as f64 {
            x -= n as f64;
        }
        position[a] = x;
        spread[a] = n as f64 / (2.0 * PI) * (-2.0 * r.min(1.0).ln()).sqrt();
    }
    Ok(CentroidSample {
        step: 0,
        position,
        spread,
        norm: total.sqrt(),
    })
}

/// Continue each axis by the nearest periodic image of the previous sample.
pub fn unwrap_trajectory(samples: &[CentroidSample], n: usize) -> Vec<[f64; 3]> {
    let period = n as f64;
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(samples.len());
    for s in samples {
        let next = match out.last() {
            None => s.position,
            Some(prev) => {
                let mut p = [0.0; 3];
                for a in 0..3 {
                    let mut d = s.position[a] - prev[a].rem_euclid(period);
                    d -= period * (d / period).round();
                    p[a] = prev[a] + d;
                }
                p
            }
        };
        out.push(next);
    }
    out
}

/// Least-squares slope of each axis against step, with the largest per-axis
/// RMS residual.
pub fn fit_velocity(steps: &[f64], positions: &[[f64; 3]]) -> ([f64; 3], f64) {
    let m = steps.len() as f64;
    let t_mean = steps.iter().sum::<f64>() / m;
    let stt: f64 = steps.iter().map(|t| (t - t_mean).powi(2)).sum();
    let mut slope = [0.0; 3];
    let mut worst = 0.0f64;
    for a in 0..3 {
        let x_mean = positions.iter().map(|p| p[a]).sum::<f64>() / m;
        let stx: f64 = steps
            .iter()
            .zip(positions)
            .map(|(t, p)| (t - t_mean) * (p[a] - x_mean))
            .sum();
        let b = if stt > 0.0 { stx / stt } else { 0.0 };
        let rss: f64 = steps
            .iter()
            .zip(positions)
            .map(|(t, p)| (p[a] - x_mean - b * (t - t_mean)).powi(2))
            .sum();
        slope[a] = b;
        worst = worst.max((rss / m).sqrt());
    }
    (slope, worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityMeasurement {
    pub velocity: GroupVelocity,
    pub fit_residual: f64,
    /// Group velocity of the packet's central mode, for comparison.
    pub analytic: GroupVelocity,
    pub trajectory: CentroidTrajectory,
}

/// Build a packet, evolve it spectrally and fit the centroid drift.
///
/// Requires `steps · |v_g| < n`: the centre may travel at most one lap of the
/// torus, beyond which nearest-image unwrapping cannot follow it.
pub fn measure_group_velocity(
    lattice: &Lattice,
    spec: &WavePacketSpec,
    steps: u64,
    sample_every: u64,
) -> Result<VelocityMeasurement, LatticeError> {
    if steps == 0 || sample_every == 0 {
        return Err(LatticeError::SpecViolation(
            "steps and sample_every must be positive".into(),
        ));
    }
    let center = spec.effective_center(lattice);
    let analytic = helicity_group_velocity(&center, spec.helicity)?;
    let travel = steps as f64 * analytic.speed();
    if travel >= lattice.n() as f64 {
        return Err(LatticeError::SpecViolation(format!(
            "packet would travel {travel:.2} sites on a lattice of size {}",
            lattice.n()
        )));
    }

    let mut state = make_wavepacket(lattice, spec)?;
    let mut trajectory = CentroidTrajectory::default();
    let mut t = 0;
    loop {
        let mut sample = centroid(&state.to_position()?)?;
        sample.step = t;
        trajectory.push(sample);
        if t >= steps {
            break;
        }
        let advance = sample_every.min(steps - t);
        state = evolve_spectral(&state, advance)?;
        t += advance;
    }

    let times: Vec<f64> = trajectory.samples.iter().map(|s| s.step as f64).collect();
    let unwrapped = unwrap_trajectory(&trajectory.samples, lattice.n());
    let (slope, fit_residual) = fit_velocity(&times, &unwrapped);
    Ok(VelocityMeasurement {
        velocity: GroupVelocity::from_array(slope),
        fit_residual,
        analytic,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_centroid() {
        let l = Lattice::new(16).unwrap();
        let s = LatticeState::delta(l, [3, 5, 7], 4);
        let c = centroid(&s).unwrap();
        for (got, want) in c.position.iter().zip([3.0, 5.0, 7.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(c.spread.iter().all(|s| s.abs() < 1e-6));
    }

    #[test]
    fn uniform_state_has_no_centroid() {
        let l = Lattice::new(8).unwrap();
        let v = vec![C64::new(1.0, 0.0); l.len()];
        let s = LatticeState::normalized(l, Basis::Position, v).unwrap();
        assert!(matches!(
            centroid(&s),
            Err(LatticeError::UndefinedCentroid { .. })
        ));
    }

    #[test]
    fn momentum_basis_is_rejected() {
        let l = Lattice::new(4).unwrap();
        let s = LatticeState::delta(l, [0, 0, 0], 0).to_momentum().unwrap();
        assert!(matches!(
            centroid(&s),
            Err(LatticeError::BasisMismatch { .. })
        ));
    }

    #[test]
    fn unwrap_follows_across_the_seam() {
        let mk = |x: f64| CentroidSample {
            step: 0,
            position: [x, 0.0, 0.0],
            spread: [0.0; 3],
            norm: 1.0,
        };
        let samples = [mk(14.0), mk(15.5), mk(0.8), mk(2.0)];
        let u = unwrap_trajectory(&samples, 16);
        let xs: Vec<f64> = u.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![14.0, 15.5, 16.8, 18.0]);
    }

    #[test]
    fn fit_recovers_line() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let p: Vec<[f64; 3]> = t.iter().map(|t| [2.0 + 0.5 * t, -t, 3.0]).collect();
        let (v, r) = fit_velocity(&t, &p);
        assert!((v[0] - 0.5).abs() < 1e-14);
        assert!((v[1] + 1.0).abs() < 1e-14);
        assert!(v[2].abs() < 1e-14);
        assert!(r < 1e-13);
    }
}
