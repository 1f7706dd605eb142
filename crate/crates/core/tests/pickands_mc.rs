mod common;

use common::fixtures;
use cpscan::asymptotics::Penalty;
use cpscan::fbm::{sample_fbm, FbmGridSpec, FbmMethod, FbmSampler, FbmScratch};
use cpscan::pickands::*;
use cpscan::seed::{replicate_rng, Stream};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

/// Paths at `n` replicates from the Fbm1 stream.
fn paths(spec: FbmGridSpec, method: Option<FbmMethod>, n: u64, stream: Stream) -> Vec<Vec<f64>> {
    let sampler = match method {
        Some(m) => FbmSampler::with_method(spec, m).unwrap(),
        None => FbmSampler::new(spec).unwrap(),
    };
    let mut scratch = FbmScratch::default();
    (0..n)
        .map(|r| {
            let mut out = vec![0.0; spec.n_points];
            sampler.sample(&mut replicate_rng(11, stream, r), &mut out, &mut scratch);
            out
        })
        .collect()
}

#[test]
fn fbm_marginal_variances_within_four_standard_errors() {
    let n = 100_000;
    for alpha in [0.4, 1.0, 1.5, 2.0] {
        let spec = FbmGridSpec::new(alpha, 2.0, 0.25).unwrap();
        let ps = paths(spec, None, n, Stream::Fbm1);
        for k in [1, 4, 8] {
            let xs: Vec<f64> = ps.iter().map(|p| p[k]).collect();
            let (m, v) = mean_var(&xs);
            let target = spec.time(k).powf(alpha);
            // Var of the sample variance of a normal: 2σ⁴/(n−1)
            let se = target * (2.0 / (n as f64 - 1.0)).sqrt();
            assert!((v - target).abs() < 4.0 * se, "alpha={alpha} k={k}: var {v} vs {target}");
            assert!(m.abs() < 4.0 * (target / n as f64).sqrt(), "alpha={alpha} k={k}: mean {m}");
        }
    }
}

#[test]
fn fbm_cross_covariance_matches_formula() {
    let n = 100_000;
    for (alpha, method) in [(0.6, FbmMethod::CirculantEmbedding), (1.4, FbmMethod::DenseCholesky)] {
        let spec = FbmGridSpec::new(alpha, 1.0, 0.125).unwrap();
        let ps = paths(spec, Some(method), n, Stream::Fbm1);
        let (s, t) = (2, 7);
        let (ts, tt) = (spec.time(s), spec.time(t));
        let want = 0.5 * (ts.powf(alpha) + tt.powf(alpha) - (tt - ts).powf(alpha));
        let prods: Vec<f64> = ps.iter().map(|p| p[s] * p[t]).collect();
        let (c, v) = mean_var(&prods);
        let se = (v / n as f64).sqrt();
        assert!((c - want).abs() < 4.0 * se, "alpha={alpha}: cov {c} vs {want} (se {se})");
    }
}

#[test]
fn fbm_streams_are_independent() {
    let n = 100_000;
    let spec = FbmGridSpec::new(1.3, 1.0, 0.1).unwrap();
    let a = paths(spec, None, n, Stream::Fbm1);
    let b = paths(spec, None, n, Stream::Fbm2);
    let last = spec.n_points - 1;
    let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x[last] * y[last]).collect();
    let (c, v) = mean_var(&prods);
    assert!(c.abs() < 4.0 * (v / n as f64).sqrt(), "cross covariance {c}");
}

#[test]
fn fbm_special_cases() {
    let spec = FbmGridSpec::new(2.0, 1.0, 0.1).unwrap();
    let p = sample_fbm(&spec, 5).unwrap();
    assert_eq!(p[0], 0.0);
    let z = p[1] / spec.time(1);
    for (k, v) in p.iter().enumerate() {
        assert!((v - z * spec.time(k)).abs() < 1e-12);
    }
    let spec = FbmGridSpec::new(1.0, 1.0, 0.01).unwrap();
    assert_eq!(FbmSampler::new(spec).unwrap().method(), FbmMethod::Brownian);
    assert!(FbmGridSpec::new(2.5, 1.0, 0.1).is_err());
    assert!(FbmGridSpec::new(1.0, 1.0, 0.0).is_err());
}

#[test]
fn brownian_h_matches_exact_grid_value() {
    let f = fixtures();
    let cfg = McConfig::new(0.02, 20_000, 3);
    let e = estimate_h(1.0, 8.0, HForm::OfLambda, &cfg).unwrap();
    let want = f.get("h1_grid_step0.02_lambda8");
    assert!((e.value - want).abs() < 4.0 * e.std_error, "{} ± {} vs {want}", e.value, e.std_error);
    assert!(e.value >= 1.0);
}

#[test]
fn degenerate_h_matches_exact_grid_value() {
    let f = fixtures();
    let cfg = McConfig::new(0.01, 20_000, 4);
    let e = estimate_h(2.0, 8.0, HForm::Rate, &cfg).unwrap();
    let want = f.get("h2_grid_rate_step0.01_lambda8");
    assert!((e.value - want).abs() < 4.0 * e.std_error, "{} ± {} vs {want}", e.value, e.std_error);
    let e = estimate_h(2.0, 8.0, HForm::OfLambda, &cfg).unwrap();
    let want = f.get("h2_grid_step0.01_lambda8");
    assert!((e.value - want).abs() < 4.0 * e.std_error, "{} ± {} vs {want}", e.value, e.std_error);
}

#[test]
fn direct_and_tilted_agree_where_both_work() {
    let base = McConfig::new(0.05, 20_000, 8);
    let d = estimate_h(1.0, 2.0, HForm::OfLambda, &base.with_estimator(Estimator::Direct)).unwrap();
    let t = estimate_h(1.0, 2.0, HForm::OfLambda, &base).unwrap();
    let pooled = (d.std_error.powi(2) + t.std_error.powi(2)).sqrt();
    assert!((d.value - t.value).abs() < 4.0 * pooled, "{} vs {}", d.value, t.value);
}

#[test]
fn h_is_nondecreasing_in_the_horizon() {
    for est in [Estimator::Tilted, Estimator::Direct] {
        let cfg = McConfig::new(0.02, 2_000, 9).with_estimator(est);
        let prof = estimate_h_profile(1.0, &[1.0, 2.0, 4.0, 8.0], &cfg).unwrap();
        if est == Estimator::Direct {
            for w in prof.windows(2) {
                assert!(w[1].value >= w[0].value, "{est:?}");
            }
        } else {
            // the tilted samples of different horizons are not ordered pathwise
            for w in prof.windows(2) {
                assert!(w[1].value > w[0].value, "{est:?}: {} then {}", w[0].value, w[1].value);
            }
        }
    }
}

#[test]
fn refinement_never_lowers_suprema() {
    let cfg = McConfig::new(0.02, 1_000, 10);
    let h = estimate_h_two_level(1.0, 4.0, HForm::OfLambda, &cfg).unwrap();
    assert!(h.fine.value >= h.coarse.value);
    let p = estimate_p_two_level(1.0, Penalty::ZERO, 2.0, 1.0, &cfg).unwrap();
    assert!(p.fine.value >= p.coarse.value);
    let q = estimate_q_two_level(1.5, 2.0, 1.0, &cfg).unwrap();
    assert!(q.fine.value >= q.coarse.value);
    assert!(q.fine.value <= p.fine.value * 1.5);
}

#[test]
fn p_without_lag_matches_h_on_the_doubled_horizon() {
    // at λ1 = 0 the field is √2(B¹(s)+B²(s)) − 2s = √2·B(2s) − 2s in law
    let cfg_p = McConfig::new(0.02, 20_000, 12);
    let cfg_h = McConfig::new(0.04, 20_000, 13);
    let p = estimate_p(1.0, Penalty::ZERO, 4.0, 0.0, &cfg_p).unwrap();
    let h = estimate_h(1.0, 8.0, HForm::OfLambda, &cfg_h).unwrap();
    let pooled = (p.std_error.powi(2) + h.std_error.powi(2)).sqrt();
    assert!((p.value - h.value).abs() < 4.0 * pooled, "P {} vs H {}", p.value, h.value);
}

#[test]
fn q_reduces_to_the_diagonal_without_lag() {
    let cfg = McConfig::new(0.02, 2_000, 14);
    let p = estimate_p(1.0, Penalty::ZERO, 2.0, 0.0, &cfg).unwrap();
    let q = estimate_q(1.0, 2.0, 0.0, &cfg).unwrap();
    assert_eq!(p.value, q.value);
}

#[test]
fn linear_penalty_applies_only_at_alpha_two() {
    let cfg = McConfig::new(0.05, 2_000, 15);
    let lin = Penalty { b_over_a: 0.0, c_over_sqrt_a: 1.0 };
    let at2 = estimate_p(2.0, lin, 1.0, 0.5, &cfg).unwrap().value;
    let at2_zero = estimate_p(2.0, Penalty::ZERO, 1.0, 0.5, &cfg).unwrap().value;
    assert!(at2.is_finite() && at2 != at2_zero);
    let at1 = estimate_p(1.0, lin, 1.0, 0.5, &cfg).unwrap().value;
    let at1_zero = estimate_p(1.0, Penalty::ZERO, 1.0, 0.5, &cfg).unwrap().value;
    assert_eq!(at1, at1_zero);
}

#[test]
fn estimates_are_deterministic_across_thread_counts() {
    let cfg = McConfig::new(0.05, 500, 16);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            (
                estimate_h_two_level(1.0, 4.0, HForm::Rate, &cfg).unwrap(),
                estimate_p_two_level(1.3, Penalty { b_over_a: 0.5, c_over_sqrt_a: 0.0 }, 1.0, 0.5, &cfg).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(3));
}
