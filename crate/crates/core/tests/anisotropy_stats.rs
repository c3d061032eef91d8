use std::f64::consts::PI;

use qca_lattice::anisotropy::{anisotropy_map, s_factor, sphere_stats, Direction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform directions by rejection sampling from the unit ball.
fn monte_carlo_moments(samples: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2, mut sum4) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let v: [f64; 3] = loop {
            let v = [0; 3].map(|_| rng.gen_range(-1.0..1.0f64));
            let r2 = v.iter().map(|x| x * x).sum::<f64>();
            if r2 > 1e-6 && r2 <= 1.0 {
                break v;
            }
        };
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // On the unit sphere s is the product of the Cartesian components.
        let s = v[0] * v[1] * v[2] / (r * r * r);
        sum += s;
        sum2 += s * s;
        sum4 += s.powi(4);
    }
    let m = samples as f64;
    (sum / m, sum2 / m, sum4 / m)
}

#[test]
fn monte_carlo_rms_agrees_with_quadrature() {
    let n = 400_000;
    let (mean, mean_sq, mean_4) = monte_carlo_moments(n, 2024);
    let stats = sphere_stats(32, 64).unwrap();
    let se_sq = ((mean_4 - mean_sq * mean_sq) / n as f64).sqrt();
    assert!((mean_sq - stats.rms_unit_average.powi(2)).abs() < 4.0 * se_sq);
    assert!(mean.abs() < 4.0 * (mean_sq / n as f64).sqrt());
}

#[test]
fn cartesian_and_spherical_forms_agree() {
    for (t, p) in [(0.3, 1.1), (1.2, 4.0), (2.9, 5.5)] {
        let d = Direction::new(t, p).unwrap();
        let [x, y, z] = d.unit_vector();
        assert!((s_factor(&d) - x * y * z).abs() < 1e-15);
    }
}

#[test]
fn closed_form_statistics() {
    let stats = sphere_stats(24, 48).unwrap();
    assert!(stats.mean.abs() < 1e-14);
    assert!((stats.rms_unit_average - (1.0 / 105.0f64).sqrt()).abs() < 1e-10);
    assert!((stats.rms_paper_normalization - (4.0 * PI / 105.0).sqrt()).abs() < 1e-10);
    assert!((stats.rms_paper_normalization - 0.346).abs() < 1e-3);
    assert!((stats.spread() - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-6);
    assert!((stats.spread() - 0.385).abs() < 1e-3);
    let [x, y, z] = stats.argmax.unit_vector();
    assert!((x.abs() - y.abs()).abs() < 1e-5 && (y.abs() - z.abs()).abs() < 1e-5);
}

#[test]
fn quadrature_converges() {
    let a = sphere_stats(16, 32).unwrap();
    let b = sphere_stats(64, 128).unwrap();
    assert!((a.rms_unit_average - b.rms_unit_average).abs() < 1e-12);
    assert!(a.quadrature_error_estimate < 1e-12);
}

#[test]
fn low_resolution_rejected() {
    assert!(sphere_stats(8, 64).is_err());
}

#[test]
fn map_covers_grid() {
    let map = anisotropy_map(5, 8);
    assert_eq!(map.len(), 40);
    assert_eq!(map[0].theta, 0.0);
    assert_eq!(map.last().unwrap().theta, PI);
    assert!(map.iter().all(|m| m.s.abs() <= 0.2));
}
