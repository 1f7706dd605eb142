#![allow(dead_code)]

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Deserialize)]
pub struct StatFixture {
    pub value: f64,
    pub i: usize,
    pub j: usize,
}

#[derive(Deserialize)]
pub struct Fixtures {
    pub values: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, StatFixture>,
}

pub fn fixtures() -> Fixtures {
    let text = include_str!("../fixtures/formula_values.json");
    serde_json::from_str(text).expect("fixture file parses")
}

impl Fixtures {
    pub fn get(&self, key: &str) -> f64 {
        *self.values.get(key).unwrap_or_else(|| panic!("missing fixture {key}"))
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

use cpscan::asymptotics::*;
use cpscan::fieldsim::kuiper_half_tail;
use cpscan::normal::{gamma, log_norm_survival, norm_survival};
use cpscan::stats::*;

/// Direct evaluation over every pair with lexicographic tie-breaking.
pub fn naive_stat(kind: StatKind, x: &[f64], mu0: f64, delta: f64) -> (f64, usize, usize) {
    let m = x.len();
    let mut s = vec![0.0; m + 1];
    for k in 0..m {
        s[k + 1] = s[k] + x[k];
    }
    let mf = m as f64;
    let mean = s[m] / mf;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for i in 0..m {
        for j in i + 1..=m {
            let k = (j - i) as f64;
            let inc = s[j] - s[i];
            let v = match kind {
                StatKind::Z1 => delta * (inc - k * (mu0 + delta / 2.0)),
                StatKind::Z2 => delta * (inc - k * mean - k * delta / 2.0),
                StatKind::Z3 => delta * (inc - k * mean - delta / 2.0 * k * (1.0 - k / mf)),
                StatKind::Z4 => {
                    if j - i == m {
                        0.0
                    } else {
                        (inc - k * mean).max(0.0) / (k * (1.0 - k / mf)).sqrt()
                    }
                }
            };
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    if kind == StatKind::Z4 && best.0 == 0.0 {
        return (0.0, 0, 1);
    }
    best
}

/// Exact grid values of discretised Pickands functionals. They are oracles
/// for the Monte Carlo suites, not outputs of a library function.
pub fn is_grid_oracle(key: &str) -> bool {
    key.starts_with("h1_grid") || key.starts_with("h2_grid")
}

/// Recomputes a closed-form fixture with the library. `None` for keys that
/// have no library counterpart.
pub fn formula_value(key: &str) -> Option<f64> {
    let num = |s: &str| -> f64 { s.parse().unwrap_or_else(|_| panic!("bad number in {key}")) };
    let q = |c, d, u| ContinuousProblemParams::new(c, d, u);
    let field = |a, b, c| {
        let p = AsymptoticParams { s1: 0.5, s2: 1.0, a, b, alpha: 1.0, beta: 2.0, c, trend: Trend::Linear };
        theorem1_tail(&p, 3.0, &ConstantTable::builtin()).unwrap().approx.constant
    };
    let v = match key {
        "p1_c1.5_d0.5_u2" | "p1_12_exp_minus6" => p1_fixed(&q(1.5, 0.5, 2.0)).ok()?.value,
        "p2_c1_d1_u1" | "p2_256_27_exp_minus4" => p2_fixed(&q(1.0, 1.0, 1.0)).ok()?.value,
        "p2_c0.5_d0.25_u2" => p2_fixed(&q(0.5, 0.25, 2.0)).ok()?.value,
        "p3_c5_d1_u1" => p3_fixed(&q(5.0, 1.0, 1.0)).ok()?.value,
        "p3_c10_d1_u1" => p3_fixed(&q(10.0, 1.0, 1.0)).ok()?.value,
        "free2_c1_u1" => p2_free_delta(1.0, 1.0).ok()?.value,
        "free3_c2_u1" => p3_free_delta(2.0, 1.0).ok()?.value,
        "free3_c0_u1" => p3_free_delta(0.0, 1.0).ok()?.value,
        "field_const_linear_c0" | "field_const_sqrt_pi_over_2" => field(1.0, 0.5, 0.0),
        "field_const_shifted_c0_0.7" | "field_const_sqrt_2pi_exp_c0sq_over_2_c0_0.7" => field(2.0, 2.0, 1.4),
        "cmd_stat_z4_step_pvalue" => {
            let x = ObservationSeries::new(vec![0.0, 0.0, 2.0, 2.0]).unwrap();
            statistic_pvalue(StatKind::Z4, x.len(), None, z4(&x).value).ok()?.0.value
        }
        _ => {
            if let Some(x) = key.strip_prefix("log_psi_") {
                log_norm_survival(num(x))
            } else if let Some(x) = key.strip_prefix("psi_") {
                norm_survival(num(x))
            } else if let Some(x) = key.strip_prefix("gamma_") {
                gamma(num(x))
            } else if let Some(d) = key.strip_prefix("p4_d") {
                p4_tail(num(d)).ok()?.value
            } else if let Some(u) = key.strip_prefix("free2_c0_u") {
                p2_free_delta(0.0, num(u)).ok()?.value
            } else {
                let rest = key.strip_prefix("kuiper_half_u")?;
                match rest.strip_suffix("_terms1") {
                    Some(u) => kuiper_half_tail(num(u), 1).ok()?,
                    None => kuiper_half_tail(num(rest), 50).ok()?,
                }
            }
        }
    };
    Some(v)
}

fn fixture_series(name: &str) -> Vec<f64> {
    match name {
        "alt" => vec![1.0, -1.0, 1.0, -1.0],
        "step" => vec![0.0, 0.0, 2.0, 2.0],
        "zeros3" => vec![0.0; 3],
        "zeros4" => vec![0.0; 4],
        "const5" => vec![3.0; 5],
        "const4" => vec![2.0; 4],
        _ => panic!("unknown series {name}"),
    }
}

/// Recomputes a statistic fixture such as `z3_step_delta_1`.
pub fn statistic_value(key: &str) -> StatReport {
    let mut parts = key.split('_');
    let kind: StatKind = parts.next().unwrap().parse().unwrap();
    let x = ObservationSeries::new(fixture_series(parts.next().unwrap())).unwrap();
    let h = HypothesisParams::new(Some(0.0), Some(1.0)).unwrap();
    statistic(kind, &x, &h).unwrap()
}
