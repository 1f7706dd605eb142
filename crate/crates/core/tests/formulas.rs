mod common;

use common::{fixtures, formula_value, is_grid_oracle, rel_err, statistic_value};
use cpscan::asymptotics::*;

const TOL: f64 = 1e-9;

#[test]
fn every_closed_form_fixture_is_reproduced() {
    let f = fixtures();
    let mut checked = 0;
    for (key, &want) in &f.values {
        if is_grid_oracle(key) {
            continue;
        }
        let got = formula_value(key).unwrap_or_else(|| panic!("no evaluator for fixture {key}"));
        assert!(rel_err(got, want) < TOL, "{key}: got {got}, want {want}");
        checked += 1;
    }
    assert!(checked >= 40, "only {checked} fixtures checked");
}

#[test]
fn statistic_fixtures() {
    for (key, want) in &fixtures().statistics {
        let r = statistic_value(key);
        assert!((r.value - want.value).abs() < 1e-12, "{key}: {} vs {}", r.value, want.value);
        assert_eq!((r.i_star, r.j_star), (want.i, want.j), "{key}");
    }
}

#[test]
fn tails_deep_in_the_log_domain() {
    let f = fixtures();
    // values underflow but the logs stay exact
    let t = p4_tail(40.0).unwrap();
    let want = (2.0 * 40f64.powi(4)).ln() + f.get("log_psi_40");
    assert!(rel_err(t.log_value, want) < TOL);
    assert_eq!(t.value, 0.0);
    let t = p2_free_delta(0.0, 100.0).unwrap();
    assert!(rel_err(t.log_value, 4f64.ln() + 2.0 * 100f64.ln() - 20000.0) < 1e-12);
}
