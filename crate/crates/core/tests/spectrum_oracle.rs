//! Spectra checked against nalgebra's Hermitian eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qca_lattice::algebra::{gamma, Axis, InternalMatrix};
use qca_lattice::momentum::{
    helicity_phase, kernel_closed_form, mode_decomposition, phase, Helicity, ReducedMomentum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_dense(m: &InternalMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(6, 6, |i, j| m.get(i, j))
}

fn sorted_eigenvalues(h: DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of the Hermitian and anti-Hermitian parts of a normal matrix,
/// i.e. the cosines and sines of its eigenphases.
fn cos_sin_spectrum(u: &InternalMatrix) -> (Vec<f64>, Vec<f64>) {
    let d = to_dense(u);
    let a = d.adjoint();
    let re = (&d + &a) * Complex64::new(0.5, 0.0);
    let im = (&d - &a) * Complex64::new(0.0, -0.5);
    (sorted_eigenvalues(re), sorted_eigenvalues(im))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_kappas(seed: u64, count: usize) -> Vec<ReducedMomentum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    (0..count)
        .map(|_| ReducedMomentum::from_array([0; 3].map(|_| rng.gen_range(-pi..pi))))
        .filter(|k| mode_decomposition(k).is_ok())
        .collect()
}

#[test]
fn gamma_spectrum() {
    for axis in Axis::ALL {
        let ev = sorted_eigenvalues(to_dense(&gamma(axis)));
        assert!(max_diff(&ev, &[-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]) < 1e-14, "{axis:?}: {ev:?}");
    }
}

#[test]
fn kernel_spectrum_has_one_phase_per_sector() {
    for k in random_kappas(11, 200) {
        let up = helicity_phase(&k, Helicity::Up).unwrap();
        let down = helicity_phase(&k, Helicity::Down).unwrap();
        let (c, s) = cos_sin_spectrum(&kernel_closed_form(&k));
        let want_c = sorted(vec![up.cos(), up.cos(), down.cos(), down.cos(), 1.0, 1.0]);
        let want_s = sorted(vec![-up.sin(), up.sin(), -down.sin(), down.sin(), 0.0, 0.0]);
        assert!(max_diff(&c, &want_c) < 1e-10, "{k:?}");
        assert!(max_diff(&s, &want_s) < 1e-10, "{k:?}");
    }
}

#[test]
fn sectors_differ_off_the_symmetry_planes() {
    // With all three components nonzero the two sectors' phases split.
    let k = ReducedMomentum::from_array([0.3, 0.5, 0.7]);
    let (c, _) = cos_sin_spectrum(&kernel_closed_form(&k));
    let p = phase(&k).unwrap();
    let fourfold = sorted(vec![p.cos(), p.cos(), p.cos(), p.cos(), 1.0, 1.0]);
    assert!(max_diff(&c, &fourfold) > 1e-2);
}

#[test]
fn sectors_coincide_when_a_component_vanishes() {
    for k in [[0.0, 0.4, 1.1], [0.9, 0.0, -2.0], [0.3, 0.3, 0.0]] {
        let k = ReducedMomentum::from_array(k);
        let p = phase(&k).unwrap();
        let (c, _) = cos_sin_spectrum(&kernel_closed_form(&k));
        let want = sorted(vec![p.cos(), p.cos(), p.cos(), p.cos(), 1.0, 1.0]);
        assert!(max_diff(&c, &want) < 1e-12);
    }
}

#[test]
fn decomposition_eigenvalues_match_oracle() {
    for k in random_kappas(5, 50) {
        let d = mode_decomposition(&k).unwrap();
        let (c, s) = cos_sin_spectrum(&kernel_closed_form(&k));
        let mine_c = sorted(d.eigenvalues.iter().map(|z| z.re).collect());
        let mine_s = sorted(d.eigenvalues.iter().map(|z| z.im).collect());
        assert!(max_diff(&c, &mine_c) < 1e-10);
        assert!(max_diff(&s, &mine_s) < 1e-10);
    }
}
