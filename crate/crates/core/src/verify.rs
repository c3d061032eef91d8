//! Self-check suite: named numerical identities that must hold for any
//! correct build. Random inputs come from a seeded generator so a run is
//! reproducible from its seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{gamma, verify_projector_conditions, Axis, InternalMatrix, ProjectorTriple, C64};
use crate::anisotropy::{s_factor, sphere_stats, Direction};
use crate::bounds::{
    anisotropy_bound, bundled_catalog, dispersion_bound, paper_rms_factor, time_lag,
    ExperimentRecord, PhysicalConstants,
};
use crate::lattice::{
    evolve_direct, evolve_spectral, make_wavepacket, Basis, Lattice, LatticeState, WavePacketSpec,
};
use crate::momentum::{
    group_velocity_analytic, group_velocity_numeric, helicity_phase, kernel_closed_form,
    kernel_exponential, mode_decomposition, phase_expansion_residual, Helicity, ReducedMomentum,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual observed, or the compared value.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const SAMPLES: usize = 24;

fn random_kappa(rng: &mut ChaCha8Rng) -> ReducedMomentum {
    ReducedMomentum::from_array([0; 3].map(|_| rng.gen_range(-PI..PI)))
}

fn random_state(rng: &mut ChaCha8Rng, lattice: Lattice) -> LatticeState {
    let v = (0..lattice.len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    LatticeState::normalized(lattice, Basis::Position, v).expect("nonzero state")
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Run every check. Deterministic for a given `seed`.
pub fn run_checks(seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut push = |name, value: f64, tolerance: f64| {
        checks.push(Check {
            name,
            passed: value.is_finite() && value <= tolerance,
            value,
            tolerance,
        })
    };

    push(
        "gamma_cubed_equals_gamma",
        worst(Axis::ALL.map(|a| {
            let g = gamma(a);
            (g * g * g).max_abs_diff(&g)
        })),
        1e-14,
    );
    push(
        "gamma_hermitian",
        worst(Axis::ALL.map(|a| gamma(a).hermiticity_residual())),
        1e-15,
    );
    push(
        "projectors_resolve_identity",
        worst(Axis::ALL.map(|a| {
            let t = ProjectorTriple::new(a);
            (t.plus + t.zero + t.minus).max_abs_diff(&InternalMatrix::identity())
        })),
        1e-14,
    );
    let report = verify_projector_conditions(1e-12);
    push(
        "cross_axis_conditions",
        if report.passed { report.max_residual() } else { f64::INFINITY },
        1e-12,
    );
    push(
        "cross_axis_constants",
        (report.c - 0.25).abs() + (report.c_prime - 0.5).abs(),
        1e-12,
    );

    let kappas: Vec<ReducedMomentum> = (0..SAMPLES).map(|_| random_kappa(&mut rng)).collect();
    push(
        "kernel_closed_form_matches_product",
        worst(kappas.iter().map(|k| kernel_closed_form(k).max_abs_diff(&kernel_exponential(k)))),
        1e-13,
    );
    push(
        "kernel_unitary",
        worst(kappas.iter().map(|k| kernel_closed_form(k).unitarity_residual())),
        1e-13,
    );
    push(
        "kernel_at_zero_is_identity",
        kernel_closed_form(&ReducedMomentum::zero()).max_abs_diff(&InternalMatrix::identity()),
        1e-15,
    );
    push(
        "spectral_resolution_reconstructs",
        worst(kappas.iter().filter_map(|k| {
            mode_decomposition(k)
                .ok()
                .map(|d| d.reconstruct().max_abs_diff(&kernel_closed_form(k)))
        })),
        1e-10,
    );
    push(
        "sectors_related_by_parity",
        worst(kappas.iter().map(|k| {
            match (
                helicity_phase(k, Helicity::Down),
                helicity_phase(&k.negated(), Helicity::Up),
            ) {
                (Ok(a), Ok(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            }
        })),
        1e-14,
    );
    push(
        "group_velocity_matches_finite_difference",
        worst(kappas.iter().filter_map(|k| {
            let a = group_velocity_analytic(k).ok()?;
            let n = group_velocity_numeric(k, 1e-5).ok()?;
            Some(a.max_abs_diff(&n))
        })),
        1e-6,
    );
    push(
        "axis_velocity_is_light_speed",
        (group_velocity_analytic(&ReducedMomentum::along(Axis::X, 0.7))
            .map(|v| v.speed())
            .unwrap_or(f64::NAN)
            - 1.0)
            .abs(),
        1e-12,
    );
    push(
        "phase_expansion_cubic",
        worst((1..=4).map(|i| {
            let scale = 0.02 * i as f64;
            let k = ReducedMomentum::from_array([0.5 * scale, 0.6 * scale, 0.62 * scale]);
            let m = k.magnitude();
            phase_expansion_residual(&k).unwrap_or(f64::INFINITY) / m.powi(3)
        })),
        1.0,
    );

    let small = Lattice::new(4).expect("valid size");
    let psi = random_state(&mut rng, small);
    push(
        "fourier_round_trip",
        psi.to_momentum()
            .and_then(|m| m.to_position())
            .map(|p| p.max_abs_diff(&psi))
            .unwrap_or(f64::INFINITY),
        1e-14,
    );
    push(
        "fourier_preserves_norm",
        psi.to_momentum().map(|m| (m.norm() - 1.0).abs()).unwrap_or(f64::INFINITY),
        1e-14,
    );
    push(
        "spectral_matches_direct",
        match (evolve_direct(&psi, 5), evolve_spectral(&psi, 5)) {
            (Ok(a), Ok(b)) => a.max_abs_diff(&b),
            _ => f64::INFINITY,
        },
        1e-12,
    );
    push(
        "evolution_preserves_norm",
        evolve_direct(&psi, 40).map(|s| (s.norm() - 1.0).abs()).unwrap_or(f64::INFINITY),
        1e-13,
    );
    let delta = LatticeState::delta(small, [0, 0, 0], 1);
    let shifted = LatticeState::delta(small, [1, 2, 3], 1);
    push(
        "translation_covariance",
        match (evolve_direct(&delta, 3), evolve_direct(&shifted, 3)) {
            (Ok(a), Ok(b)) => {
                let mut d = 0.0f64;
                for cell in 0..small.sites() {
                    let s = small.site_of(cell);
                    let t = [(s[0] + 1) % 4, (s[1] + 2) % 4, (s[2] + 3) % 4];
                    for i in 0..6 {
                        d = d.max((a.amplitude(s, i) - b.amplitude(t, i)).norm());
                    }
                }
                d
            }
            _ => f64::INFINITY,
        },
        1e-14,
    );
    let lattice = Lattice::new(32).expect("valid size");
    let spec = WavePacketSpec::gaussian(ReducedMomentum::along(Axis::X, 0.6), [16, 16, 16], PI / 8.0);
    push(
        "wavepacket_normalized",
        make_wavepacket(&lattice, &spec)
            .map(|s| (s.norm() - 1.0).abs())
            .unwrap_or(f64::INFINITY),
        1e-12,
    );

    push(
        "s_odd_under_reflection",
        worst((0..SAMPLES).map(|_| {
            let t = rng.gen_range(0.0..PI);
            let p = rng.gen_range(0.0..2.0 * PI);
            let a = s_factor(&Direction::normalized(t, p));
            let b = s_factor(&Direction::normalized(PI - t, p));
            (a + b).abs()
        })),
        1e-15,
    );
    match sphere_stats(32, 64) {
        Ok(stats) => {
            push("sphere_mean_zero", stats.mean.abs(), 1e-14);
            push(
                "sphere_rms_unit_average",
                rel(stats.rms_unit_average, (1.0 / 105.0f64).sqrt()),
                1e-12,
            );
            push(
                "sphere_max",
                rel(stats.max, 1.0 / (3.0 * 3f64.sqrt())),
                1e-10,
            );
        }
        Err(_) => push("sphere_stats", f64::INFINITY, 0.0),
    }

    let constants = PhysicalConstants::default();
    push(
        "dispersion_bound_inverse_in_energy",
        match (
            dispersion_bound(&ExperimentRecord::dispersion("a", 1e20, 1, 1), &constants, paper_rms_factor()),
            dispersion_bound(&ExperimentRecord::dispersion("b", 2e20, 1, 1), &constants, paper_rms_factor()),
        ) {
            (Ok(a), Ok(b)) => rel(a.delta_x_upper_bound, 2.0 * b.delta_x_upper_bound),
            _ => f64::INFINITY,
        },
        1e-14,
    );
    push(
        "anisotropy_bound_linear_in_wavelength",
        match (
            anisotropy_bound(&ExperimentRecord::anisotropy("a", 1e-18, 1e-6), &constants, 0.385, false),
            anisotropy_bound(&ExperimentRecord::anisotropy("b", 1e-18, 3e-6), &constants, 0.385, false),
        ) {
            (Ok(a), Ok(b)) => rel(b.delta_x_upper_bound, 3.0 * a.delta_x_upper_bound),
            _ => f64::INFINITY,
        },
        1e-14,
    );
    push(
        "time_lag_linear_in_distance",
        match (
            time_lag(1e25, 10.0, 1.0, 1e20, 1, 1),
            time_lag(2e25, 10.0, 1.0, 1e20, 1, 1),
        ) {
            (Ok(a), Ok(b)) => rel(b, 2.0 * a),
            _ => f64::INFINITY,
        },
        1e-14,
    );
    push(
        "bundled_catalog_valid",
        if bundled_catalog().iter().all(|r| r.validate().is_ok()) { 0.0 } else { 1.0 },
        0.0,
    );

    VerifyReport { seed, checks }
}
