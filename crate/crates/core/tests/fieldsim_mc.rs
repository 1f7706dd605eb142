use cpscan::asymptotics::{p1_fixed, ContinuousProblemParams};
use cpscan::fieldsim::*;
use cpscan::Error;

#[test]
fn path_law_is_exact_on_the_grid() {
    let (m, n) = (50usize, 100_000u64);
    let mut w = vec![0.0; m + 1];
    let mut sum = vec![0.0; m + 1];
    let mut sum2 = vec![0.0; m + 1];
    for r in 0..n {
        brownian_path(21, r, &mut w);
        for k in 0..=m {
            sum[k] += w[k];
            sum2[k] += w[k] * w[k];
        }
    }
    let nf = n as f64;
    for k in [1, 10, 25, 50] {
        let t = k as f64 / m as f64;
        let mean = sum[k] / nf;
        let var = sum2[k] / nf - mean * mean;
        assert!(mean.abs() < 4.0 * (t / nf).sqrt(), "k={k}: mean {mean}");
        assert!((var - t).abs() < 4.0 * t * (2.0 / nf).sqrt(), "k={k}: var {var} vs {t}");
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn time_reversal_leaves_the_distribution_unchanged() {
    let n = 1000;
    let kind = FieldKind::Free2 { c: 0.0 };
    let fwd = sample_functional_max(kind, 1.0, 400, n, 31, false).unwrap();
    let rev = sample_functional_max(kind, 1.0, 400, n, 32, true).unwrap();
    // 1% critical value: 1.628·√(2/n)
    let crit = 1.628 * (2.0 / n as f64).sqrt();
    let d = ks(fwd.clone(), rev);
    assert!(d < crit, "KS {d} ≥ {crit}");
    // on a single path the functional is reversal invariant exactly
    let same = sample_functional_max(kind, 1.0, 400, 50, 31, true).unwrap();
    for (a, b) in fwd.iter().zip(&same) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn study_rows_carry_the_closed_form() {
    let kind = FieldKind::P1 { c: 1.5, d: 0.5 };
    let rows = convergence_study(kind, &[1.0, 1.5, 2.0], 200, 2000, 5).unwrap();
    for (row, u) in rows.iter().zip([1.0, 1.5, 2.0]) {
        let want = p1_fixed(&ContinuousProblemParams::new(1.5, 0.5, u)).unwrap().value;
        assert_eq!(row.analytic, want);
        assert_eq!(row.ratio, row.estimate.p_hat / want);
        assert_eq!(row.threshold, 0.5 * u);
        assert!(row.refined.exceedances >= row.estimate.exceedances);
    }
}

#[test]
fn study_of_u_free_kind_matches_separate_runs() {
    let kind = FieldKind::Free2 { c: 0.0 };
    let rows = convergence_study(kind, &[1.0, 1.25, 1.5], 300, 3000, 6).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].estimate.p_hat <= w[0].estimate.p_hat);
    }
    let (a, b) = simulate_sup_two_level(kind, 1.25, 300, 3000, 6).unwrap();
    assert_eq!(rows[1].estimate, a);
    assert_eq!(rows[1].refined, b);
}

#[test]
fn study_input_errors() {
    let kind = FieldKind::Free2 { c: 0.0 };
    assert!(matches!(convergence_study(kind, &[1.0, 1.5], 100, 0, 1), Err(Error::Parameter(_))));
    assert!(matches!(convergence_study(kind, &[1.5, 1.0], 100, 10, 1), Err(Error::Parameter(_))));
    assert!(matches!(convergence_study(kind, &[], 100, 10, 1), Err(Error::Parameter(_))));
    let bad = FieldKind::P3 { c: 1.0, d: 1.0 };
    assert!(matches!(convergence_study(bad, &[1.0], 100, 10, 1), Err(Error::Domain(_))));
}

#[test]
fn refinement_is_monotone_for_every_kind() {
    let kinds = [
        (FieldKind::P1 { c: 1.5, d: 0.5 }, 2.0),
        (FieldKind::P2 { c: 0.5, d: 0.25 }, 3.0),
        (FieldKind::P3 { c: 5.0, d: 1.0 }, 0.8),
        (FieldKind::P4, 3.0),
        (FieldKind::Free2 { c: 1.0 }, 1.0),
        (FieldKind::Free3 { c: 2.0 }, 1.0),
    ];
    for (k, level) in kinds {
        let maxima = |m| sample_functional_max(k, level, m, 200, 7, false).unwrap();
        let coarse = maxima(100);
        let (a, b) = simulate_sup_two_level(k, level, 100, 200, 7).unwrap();
        assert!(b.exceedances >= a.exceedances, "{k:?}");
        let thr = k.threshold(level);
        assert_eq!(a.exceedances, coarse.iter().filter(|&&x| x > thr).count() as u64, "{k:?}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_sup_two_level(FieldKind::P4, 3.0, 200, 3000, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
}
