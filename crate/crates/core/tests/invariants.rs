use std::f64::consts::PI;

use proptest::prelude::*;
use qca_lattice::anisotropy::{s_factor, Direction};
use qca_lattice::bounds::{dispersion_bound, time_lag, ExperimentRecord, PhysicalConstants};
use qca_lattice::lattice::{evolve_spectral, Basis, Lattice, LatticeState};
use qca_lattice::momentum::{
    group_velocity_analytic, group_velocity_numeric, helicity_phase, kernel_closed_form,
    kernel_exponential, phase, Helicity, ReducedMomentum,
};
use qca_lattice::C64;

fn kappa() -> impl Strategy<Value = ReducedMomentum> {
    let c = -PI..PI;
    (c.clone(), c.clone(), c).prop_map(|(x, y, z)| ReducedMomentum::from_array([x, y, z]))
}

fn state(n: usize) -> impl Strategy<Value = LatticeState> {
    let len = n * n * n * 6;
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len).prop_filter_map("nonzero", move |v| {
        let lattice = Lattice::new(n).unwrap();
        let amps = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        LatticeState::normalized(lattice, Basis::Position, amps).ok()
    })
}

/// Near `φ = π` the half-angle evaluation loses about `ε/(π - φ)`.
fn phase_tol(p: f64) -> f64 {
    1e-13 + 1e-15 / (PI - p).max(1e-15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_unitary_and_closed_form(k in kappa()) {
        let u = kernel_closed_form(&k);
        prop_assert!(u.unitarity_residual() < 1e-13);
        prop_assert!(u.max_abs_diff(&kernel_exponential(&k)) < 1e-12);
    }

    #[test]
    fn phase_in_range(k in kappa()) {
        let p = phase(&k).unwrap();
        prop_assert!((0.0..=PI).contains(&p));
    }

    #[test]
    fn phase_symmetric_under_axis_permutation(k in kappa()) {
        let [x, y, z] = k.as_array();
        let p = phase(&k).unwrap();
        for perm in [[y, z, x], [z, x, y], [y, x, z]] {
            let q = phase(&ReducedMomentum::from_array(perm)).unwrap();
            prop_assert!((p - q).abs() < phase_tol(p));
        }
    }

    #[test]
    fn inversion_swaps_sectors(k in kappa()) {
        let up = helicity_phase(&k, Helicity::Up).unwrap();
        let down = helicity_phase(&k.negated(), Helicity::Down).unwrap();
        prop_assert!((up - down).abs() < 1e-14);
    }

    #[test]
    fn two_sign_flips_leave_phase(k in kappa()) {
        let [x, y, z] = k.as_array();
        let p = phase(&k).unwrap();
        let q = phase(&ReducedMomentum::from_array([-x, -y, z])).unwrap();
        prop_assert!((p - q).abs() < phase_tol(p));
    }

    #[test]
    fn gradient_matches_central_differences(k in kappa()) {
        let p = phase(&k).unwrap();
        prop_assume!(p > 1e-3 && p < PI - 1e-3);
        let a = group_velocity_analytic(&k).unwrap();
        let n = group_velocity_numeric(&k, 1e-5).unwrap();
        prop_assert!(a.max_abs_diff(&n) <= 1e-7 * a.speed().max(1e-3));
    }

    #[test]
    fn fourier_round_trip(s in state(4)) {
        let m = s.to_momentum().unwrap();
        prop_assert!((m.norm() - 1.0).abs() < 1e-12);
        prop_assert!(m.to_position().unwrap().max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn evolution_conserves_per_mode_probability(s in state(4), steps in 0u64..30) {
        let m = s.to_momentum().unwrap();
        let out = evolve_spectral(&m, steps).unwrap();
        let before = m.cell_probabilities();
        let after = out.cell_probabilities();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn s_bounded(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let s = s_factor(&Direction::new(theta, phi).unwrap());
        prop_assert!(s.abs() <= 1.0 / (3.0 * 3f64.sqrt()) + 1e-15);
    }

    #[test]
    fn tighter_energy_gives_tighter_bound(e in 1e10..1e22f64, f in 1.0..10.0f64) {
        let c = PhysicalConstants::default();
        let a = dispersion_bound(&ExperimentRecord::dispersion("a", e, 1, 1), &c, 0.346).unwrap();
        let b = dispersion_bound(&ExperimentRecord::dispersion("b", e * f, 1, 1), &c, 0.346).unwrap();
        prop_assert!(b.delta_x_upper_bound < a.delta_x_upper_bound);
        prop_assert!(a.delta_x_upper_bound > 0.0);
    }

    #[test]
    fn time_lag_sign_flips(d in 1e20..1e27f64, hi in 1.0..100.0f64, order in 1u8..=2) {
        let sub = time_lag(d, hi, 0.5, 1e19, order, 1).unwrap();
        let sup = time_lag(d, hi, 0.5, 1e19, order, -1).unwrap();
        prop_assert!(sub > 0.0);
        prop_assert_eq!(sub, -sup);
    }
}
