mod common;

use common::{dense_gp_oracle, mol, random_count_fp};
use molbo::chem::{morgan_fingerprint, FingerprintMode};
use molbo::gp::{fit_hypers_grid, gp_fit, gram_matrix, rbf_kernel, GpConfig, KernelConfig, KernelInput};
use molbo::pitfalls::{Demo1DProblem, NOISE, PROBE_X};
use molbo::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;

fn random_points<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

#[test]
fn rbf_matches_dense_oracle() {
    let mut rng = stream_rng(11, 0);
    for _ in 0..40 {
        let n = rng.random_range(1..=20);
        let dim = rng.random_range(1..=3);
        let cfg = GpConfig {
            kernel: KernelConfig::rbf(rng.random_range(0.3..2.0), rng.random_range(0.2..2.0)),
            noise_variance: 10f64.powf(rng.random_range(-3.0..-1.0)),
            prior_mean: rng.random_range(-0.5..0.5),
        };
        let xs = random_points(&mut rng, n, dim);
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let qs = random_points(&mut rng, 10, dim);
        let post = gp_fit(&xs, &ys, &cfg).unwrap();
        let (want, lml) = dense_gp_oracle(&xs, &ys, &qs, &cfg, post.jitter());
        for (q, (m, v)) in qs.iter().zip(want) {
            let (pm, pv) = post.predict(q).unwrap();
            assert!((pm - m).abs() < 1e-8, "mean {pm} vs {m}");
            assert!((pv - v).abs() < 1e-8, "var {pv} vs {v}");
        }
        assert!((post.log_marginal_likelihood() - lml).abs() < 1e-8);
    }
}

#[test]
fn tanimoto_matches_dense_oracle() {
    let mut rng = stream_rng(12, 0);
    for _ in 0..40 {
        let n = rng.random_range(1..=20);
        let mode = if rng.random() { FingerprintMode::Count } else { FingerprintMode::Binary };
        let cfg = GpConfig {
            kernel: KernelConfig::tanimoto(rng.random_range(0.3..2.0)),
            noise_variance: 10f64.powf(rng.random_range(-3.0..-1.0)),
            prior_mean: 0.0,
        };
        let xs: Vec<_> = (0..n).map(|_| random_count_fp(&mut rng, 40, 4, mode)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let qs: Vec<_> = (0..10).map(|_| random_count_fp(&mut rng, 40, 4, mode)).collect();
        let post = gp_fit(&xs, &ys, &cfg).unwrap();
        let (want, lml) = dense_gp_oracle(&xs, &ys, &qs, &cfg, post.jitter());
        for (q, (m, v)) in qs.iter().zip(want) {
            let (pm, pv) = post.predict(q).unwrap();
            assert!((pm - m).abs() < 1e-8 && (pv - v).abs() < 1e-8);
        }
        assert!((post.log_marginal_likelihood() - lml).abs() < 1e-8);
    }
}

#[test]
fn rbf_far_field_example() {
    // 0.01·exp(−18)
    let v = rbf_kernel(&[0.0], &[0.3], &KernelConfig::rbf(0.1, 0.05)).unwrap();
    assert!((v / 1.522_997_974_471_263e-10 - 1.0).abs() < 1e-12);
}

#[test]
fn cholesky_reconstructs_gram() {
    let mut rng = stream_rng(13, 0);
    let xs = random_points(&mut rng, 15, 2);
    let ys: Vec<f64> = (0..15).map(|_| rng.random()).collect();
    let cfg = GpConfig {
        kernel: KernelConfig::rbf(1.0, 0.3),
        noise_variance: 1e-4,
        prior_mean: 0.0,
    };
    let post = gp_fit(&xs, &ys, &cfg).unwrap();
    let l = post.chol();
    let mut k = gram_matrix(&xs, &cfg.kernel).unwrap();
    for i in 0..15 {
        k[(i, i)] += post.jitter();
    }
    assert!((l * l.transpose() - k).amax() < 1e-8);
    assert_eq!(post.solve_vec().len(), 15);
}

#[test]
fn noiseless_interpolation() {
    let mut rng = stream_rng(14, 0);
    let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.13).collect();
    let ys: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    // Well separated so the 1e-8 floor jitter stays negligible.
    let cfg = GpConfig {
        kernel: KernelConfig::rbf(1.0, 0.05),
        noise_variance: 0.0,
        prior_mean: 0.0,
    };
    let post = gp_fit(&xs, &ys, &cfg).unwrap();
    for (x, y) in xs.iter().zip(&ys) {
        let (m, v) = post.predict(x).unwrap();
        assert!((m - y).abs() <= 1e-6 && v <= 1e-6, "jitter {} dm {} v {v}", post.jitter(), m - y);
    }
}

#[test]
fn prior_reversion() {
    let xs = vec![0.0, 0.1, 0.2];
    let cfg = GpConfig {
        kernel: KernelConfig::rbf(0.7, 0.05),
        noise_variance: 1e-4,
        prior_mean: 0.0,
    };
    let post = gp_fit(&xs, &[0.3, -0.2, 0.5], &cfg).unwrap();
    let (m, v) = post.predict(&(0.2 + 20.0 * 0.05)).unwrap();
    assert!(m.abs() < 1e-8 && (v - 0.49).abs() < 1e-8);

    // Fingerprints sharing no identifier with the training set.
    let a = morgan_fingerprint(&mol("CCO"), 2, FingerprintMode::Count);
    let b = morgan_fingerprint(&mol("c1ccccc1"), 2, FingerprintMode::Count);
    let post = gp_fit(&[a], &[0.8], &GpConfig::default()).unwrap();
    let (m, v) = post.predict(&b).unwrap();
    assert!(m.abs() < 1e-8 && (v - 1.0).abs() < 1e-8);
}

#[test]
fn small_amplitude_wins_on_flat_data() {
    let mut rng = stream_rng(15, 0);
    let xs = random_points(&mut rng, 10, 1);
    let ys: Vec<f64> = (0..10).map(|_| rng.random_range(-0.01..0.01)).collect();
    let grid: Vec<GpConfig> = [1.0, 0.1]
        .iter()
        .map(|&s| GpConfig {
            kernel: KernelConfig::rbf(s, 0.2),
            noise_variance: 1e-4,
            prior_mean: 0.0,
        })
        .collect();
    let (best, scores) = fit_hypers_grid(&xs, &ys, &grid).unwrap();
    assert_eq!(best.kernel.amplitude, 0.1);
    // Oracle: evaluate both likelihoods directly.
    let oracle: Vec<f64> = grid
        .iter()
        .map(|c| dense_gp_oracle(&xs, &ys, &[], c, 1e-4).1)
        .collect();
    assert!(oracle[1] > oracle[0]);
    assert!((scores[0].unwrap() - oracle[0]).abs() < 1e-8);
}

#[test]
fn pitfall_variance_ordering() {
    let p = Demo1DProblem::default();
    let narrow = p.fit(0.1, 0.05, NOISE).unwrap().predict(&PROBE_X).unwrap().1;
    let wide = p.fit(1.0, 0.05, NOISE).unwrap().predict(&PROBE_X).unwrap().1;
    assert!(narrow < wide);
}

#[test]
fn std_scales_linearly_with_amplitude() {
    let p = Demo1DProblem::default();
    for ell in [0.05, 0.2, 5.0] {
        let base = p.fit(1.0, ell, 1e-4).unwrap();
        for sigma in [0.1, 0.5, 3.0] {
            let post = p.fit(sigma, ell, 1e-4 * sigma * sigma).unwrap();
            for &x in &p.grid {
                let s = post.predict(&x).unwrap().1.sqrt();
                let s1 = base.predict(&x).unwrap().1.sqrt();
                assert!((s - sigma * s1).abs() <= 1e-10 * sigma * s1, "x={x} sigma={sigma} ell={ell}");
            }
        }
    }
}

proptest! {
    #[test]
    fn rbf_symmetric(a in prop::collection::vec(-3.0f64..3.0, 3), b in prop::collection::vec(-3.0f64..3.0, 3), ell in 0.05f64..5.0) {
        let cfg = KernelConfig::rbf(1.3, ell);
        prop_assert_eq!(rbf_kernel(&a, &b, &cfg).unwrap(), rbf_kernel(&b, &a, &cfg).unwrap());
    }

    #[test]
    fn tanimoto_kernel_symmetric(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let cfg = KernelConfig::tanimoto(0.8);
        let a = random_count_fp(&mut rng, 30, 5, FingerprintMode::Count);
        let b = random_count_fp(&mut rng, 30, 5, FingerprintMode::Count);
        prop_assert_eq!(a.kernel(&b, &cfg).unwrap(), b.kernel(&a, &cfg).unwrap());
        prop_assert!((a.kernel(&a, &cfg).unwrap() - 0.64).abs() < 1e-15);
    }
}
