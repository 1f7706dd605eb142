//! Direct simulation of suprema of Brownian-motion fields on `{(s,t): 0 ≤ s ≤ t ≤ 1}`.
//!
//! With `B` standard Brownian motion and `Y(s,t) = B(t) − B(s) − (t−s)B(1)`,
//! `τ = t − s`:
//!
//! | kind        | functional                                  | threshold |
//! |-------------|---------------------------------------------|-----------|
//! | `P1{c,d}`   | `B(t) − B(s) − cτu`                         | `du`      |
//! | `P2{c,d}`   | `Y(s,t) − cτu`                              | `du`      |
//! | `P3{c,d}`   | `Y(s,t) − cτ(1−τ)u`                         | `du`      |
//! | `P4`        | `Y(s,t)/√(τ(1−τ))`, `0 < τ < 1`             | `d`       |
//! | `Free2{c}`  | `Y(s,t) − cτ`                               | `u`       |
//! | `Free3{c}`  | `Y(s,t) − cτ(1−τ)`                          | `u`       |
//!
//! Paths are sampled exactly at `k/m`, so the grid supremum underestimates
//! the continuous one. Two-level runs add the midpoints (`2m`) to the same
//! paths by Brownian-bridge interpolation, which can only raise each
//! replicate's supremum.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    p1_fixed, p2_fixed, p2_free_delta, p3_fixed, p3_free_delta, p4_tail, ContinuousProblemParams, TailApprox,
};
use crate::error::{require_finite, Error, Result};
use crate::seed::{replicate_rng, Stream};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Below this grid size results are flagged as coarse.
pub const RECOMMENDED_MIN_GRID: usize = 100;
/// Below this replicate count results are flagged as noisy.
pub const RECOMMENDED_MIN_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    P1 { c: f64, d: f64 },
    P2 { c: f64, d: f64 },
    P3 { c: f64, d: f64 },
    P4,
    Free2 { c: f64 },
    Free3 { c: f64 },
}

impl FieldKind {
    /// Build from a kind name (`p1`…`p4`, `free2`, `free3`) and optional parameters.
    pub fn from_parts(name: &str, c: Option<f64>, d: Option<f64>) -> Result<Self> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Error::param(format!("kind {name} requires --{flag}")));
        let kind = match name {
            "p1" => FieldKind::P1 { c: need(c, "c")?, d: need(d, "d")? },
            "p2" => FieldKind::P2 { c: need(c, "c")?, d: need(d, "d")? },
            "p3" => FieldKind::P3 { c: need(c, "c")?, d: need(d, "d")? },
            "p4" => FieldKind::P4,
            "free2" => FieldKind::Free2 { c: need(c, "c")? },
            "free3" => FieldKind::Free3 { c: need(c, "c")? },
            _ => {
                return Err(Error::param(format!(
                    "unknown field kind '{name}' (expected p1, p2, p3, p4, free2, free3)"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::P1 { .. } => "p1",
            FieldKind::P2 { .. } => "p2",
            FieldKind::P3 { .. } => "p3",
            FieldKind::P4 => "p4",
            FieldKind::Free2 { .. } => "free2",
            FieldKind::Free3 { .. } => "free3",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldKind::P1 { c, d } => {
                require_finite("c", c)?;
                require_finite("d", d)?;
                if !(d > 0.0 && c > d) {
                    return Err(Error::domain(format!("p1 requires c > d > 0, got c={c}, d={d}")));
                }
            }
            FieldKind::P2 { c, d } => {
                require_finite("c", c)?;
                require_finite("d", d)?;
                if !(c > 0.0 && d > 0.0) {
                    return Err(Error::domain(format!("p2 requires c > 0 and d > 0, got c={c}, d={d}")));
                }
            }
            FieldKind::P3 { c, d } => {
                require_finite("c", c)?;
                require_finite("d", d)?;
                if !(d > 0.0 && c > 4.0 * d) {
                    return Err(Error::domain(format!("p3 requires c > 4d > 0, got c={c}, d={d}")));
                }
            }
            FieldKind::P4 => {}
            FieldKind::Free2 { c } | FieldKind::Free3 { c } => require_finite("c", c)?,
        }
        Ok(())
    }

    /// The exceedance level for the given `u` (P1–P3, Free) or `d` (P4).
    pub fn threshold(&self, u_or_d: f64) -> f64 {
        match *self {
            FieldKind::P1 { d, .. } | FieldKind::P2 { d, .. } | FieldKind::P3 { d, .. } => d * u_or_d,
            FieldKind::P4 | FieldKind::Free2 { .. } | FieldKind::Free3 { .. } => u_or_d,
        }
    }

    /// The matching closed-form approximation.
    pub fn analytic(&self, u_or_d: f64) -> Result<TailApprox> {
        match *self {
            FieldKind::P1 { c, d } => p1_fixed(&ContinuousProblemParams::new(c, d, u_or_d)),
            FieldKind::P2 { c, d } => p2_fixed(&ContinuousProblemParams::new(c, d, u_or_d)),
            FieldKind::P3 { c, d } => p3_fixed(&ContinuousProblemParams::new(c, d, u_or_d)),
            FieldKind::P4 => p4_tail(u_or_d),
            FieldKind::Free2 { c } => p2_free_delta(c, u_or_d),
            FieldKind::Free3 { c } => p3_free_delta(c, u_or_d),
        }
    }

    /// Slope of the lag penalty in `τ` and whether it carries the `(1−τ)` factor.
    fn penalty(&self, u_or_d: f64) -> (f64, bool) {
        match *self {
            FieldKind::P1 { c, .. } | FieldKind::P2 { c, .. } => (c * u_or_d, false),
            FieldKind::P3 { c, .. } => (c * u_or_d, true),
            FieldKind::P4 => (0.0, false),
            FieldKind::Free2 { c } => (c, false),
            FieldKind::Free3 { c } => (c, true),
        }
    }

    fn is_bridge(&self) -> bool {
        !matches!(self, FieldKind::P1 { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exceedances: u64,
    pub n_rep: usize,
    pub grid_m: usize,
    pub threshold: f64,
}

impl TailEstimate {
    fn from_counts(exceedances: u64, n_rep: usize, grid_m: usize, threshold: f64) -> Self {
        let p_hat = exceedances as f64 / n_rep as f64;
        let (lo, hi) = wilson_interval(exceedances, n_rep as u64);
        TailEstimate { p_hat, ci_low: lo, ci_high: hi, exceedances, n_rep, grid_m, threshold }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Half the Kuiper tail, `Σ_{k=1}^{terms} (4k²u² − 1)e^{−2k²u²}`.
///
/// The Kuiper tail is that of the bridge range `sup Y − inf Y`. Half of it is
/// asymptotically equivalent to the tail of the ordered-pair supremum
/// `sup_{s≤t} Y(s,t)`, but lies below it at moderate `u`: paths that both
/// rise and fall by `u` are counted once in the range and in each ordering.
pub fn kuiper_half_tail(u: f64, terms: usize) -> Result<f64> {
    if !(u.is_finite() && u > 0.5) {
        return Err(Error::param(format!("kuiper_half_tail requires u > 0.5, got {u}")));
    }
    if terms == 0 {
        return Err(Error::param("kuiper_half_tail requires terms ≥ 1"));
    }
    let u2 = u * u;
    Ok((1..=terms)
        .map(|k| {
            let k2 = (k * k) as f64;
            (4.0 * k2 * u2 - 1.0) * (-2.0 * k2 * u2).exp()
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub threshold: f64,
    pub estimate: TailEstimate,
    /// the same replicates on the `2m` grid
    pub refined: TailEstimate,
    pub analytic: f64,
    /// `estimate.p_hat / analytic`
    pub ratio: f64,
    pub pre_asymptotic: bool,
}

fn check_run(grid_m: usize, n_rep: usize) -> Result<()> {
    if grid_m < 2 {
        return Err(Error::param(format!("grid must have at least 2 intervals, got {grid_m}")));
    }
    if grid_m > 1 << 24 {
        return Err(Error::Resource(format!("grid of {grid_m} intervals is too large")));
    }
    if n_rep == 0 {
        return Err(Error::param("reps must be at least 1"));
    }
    Ok(())
}

fn check_level(u_or_d: f64, kind: &FieldKind) -> Result<()> {
    let ok = match kind {
        FieldKind::P4 => u_or_d.is_finite() && u_or_d >= 0.0,
        _ => u_or_d.is_finite() && u_or_d > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::param(format!("{} level must be positive and finite, got {u_or_d}", kind.name())))
    }
}

/// `P{sup > threshold}` on the grid `{k/m}`.
pub fn simulate_sup(kind: FieldKind, u_or_d: f64, grid_m: usize, n_rep: usize, seed: u64) -> Result<TailEstimate> {
    kind.validate()?;
    check_level(u_or_d, &kind)?;
    check_run(grid_m, n_rep)?;
    let thr = kind.threshold(u_or_d);
    let eval = Functional::new(kind, u_or_d);
    let hits: u64 = replicate_maxima(n_rep, grid_m, seed, false, |w| eval.max(w, thr) > thr)
        .into_iter()
        .map(|(a, _)| a as u64)
        .sum();
    Ok(TailEstimate::from_counts(hits, n_rep, grid_m, thr))
}

/// [`simulate_sup`] on grids `m` and `2m` with the same paths.
pub fn simulate_sup_two_level(
    kind: FieldKind,
    u_or_d: f64,
    grid_m: usize,
    n_rep: usize,
    seed: u64,
) -> Result<(TailEstimate, TailEstimate)> {
    kind.validate()?;
    check_level(u_or_d, &kind)?;
    check_run(grid_m, n_rep)?;
    let thr = kind.threshold(u_or_d);
    let eval = Functional::new(kind, u_or_d);
    let (mut a, mut b) = (0u64, 0u64);
    for (x, y) in replicate_maxima(n_rep, grid_m, seed, true, |w| eval.max(w, thr) > thr) {
        a += x as u64;
        b += y as u64;
    }
    Ok((TailEstimate::from_counts(a, n_rep, grid_m, thr), TailEstimate::from_counts(b, n_rep, 2 * grid_m, thr)))
}

/// Exceedance frequencies at several increasing levels on grids `m` and `2m`,
/// next to the closed-form approximation.
pub fn convergence_study(
    kind: FieldKind,
    levels: &[f64],
    grid_m: usize,
    n_rep: usize,
    seed: u64,
) -> Result<Vec<StudyRow>> {
    kind.validate()?;
    check_run(grid_m, n_rep)?;
    if levels.is_empty() {
        return Err(Error::param("convergence study needs at least one level"));
    }
    for w in levels.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::param("convergence study levels must be strictly increasing"));
        }
    }
    for &l in levels {
        check_level(l, &kind)?;
    }
    let analytic: Vec<TailApprox> = levels.iter().map(|&l| kind.analytic(l)).collect::<Result<_>>()?;

    // The functional depends on u for P1–P3, so each level is a separate run
    // on the same paths; otherwise one pass records the maximum.
    let u_dependent = matches!(kind, FieldKind::P1 { .. } | FieldKind::P2 { .. } | FieldKind::P3 { .. });
    let counts: Vec<(u64, u64)> = if u_dependent {
        levels
            .iter()
            .map(|&l| {
                let thr = kind.threshold(l);
                let eval = Functional::new(kind, l);
                replicate_maxima(n_rep, grid_m, seed, true, |w| eval.max(w, thr) > thr)
                    .into_iter()
                    .fold((0, 0), |(a, b), (x, y)| (a + x as u64, b + y as u64))
            })
            .collect()
    } else {
        let eval = Functional::new(kind, levels[0]);
        let top = *levels.last().unwrap();
        let maxima = replicate_maxima(n_rep, grid_m, seed, true, |w| eval.max(w, top));
        levels
            .iter()
            .map(|&l| maxima.iter().fold((0, 0), |(a, b), (x, y)| (a + (*x > l) as u64, b + (*y > l) as u64)))
            .collect()
    };

    Ok(levels
        .iter()
        .zip(counts)
        .zip(analytic)
        .map(|((&l, (a, b)), an)| {
            let thr = kind.threshold(l);
            let estimate = TailEstimate::from_counts(a, n_rep, grid_m, thr);
            StudyRow {
                threshold: thr,
                estimate,
                refined: TailEstimate::from_counts(b, n_rep, 2 * grid_m, thr),
                analytic: an.value,
                ratio: estimate.p_hat / an.value,
                pre_asymptotic: an.pre_asymptotic,
            }
        })
        .collect())
}

/// Raw grid suprema of the functional, one per replicate. With `reversed`
/// the functional is applied to the time-reversed path `B(1) − B(1−t)`.
pub fn sample_functional_max(
    kind: FieldKind,
    u_or_d: f64,
    grid_m: usize,
    n_rep: usize,
    seed: u64,
    reversed: bool,
) -> Result<Vec<f64>> {
    kind.validate()?;
    check_level(u_or_d, &kind)?;
    check_run(grid_m, n_rep)?;
    let eval = Functional::new(kind, u_or_d);
    Ok((0..n_rep as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; grid_m + 1], Vec::new()),
            |(w, r), i| {
                brownian_path(seed, i, w);
                if reversed {
                    let total = w[grid_m];
                    r.clear();
                    r.extend(w.iter().rev().map(|x| total - x));
                    eval.max(r, f64::INFINITY)
                } else {
                    eval.max(w, f64::INFINITY)
                }
            },
        )
        .collect())
}

/// `B(k/m)` for k = 0..=m, replicate `i` of the run with master `seed`.
pub fn brownian_path(seed: u64, replicate: u64, out: &mut [f64]) {
    let m = out.len() - 1;
    let sd = 1.0 / (m as f64).sqrt();
    let mut rng = replicate_rng(seed, Stream::Path, replicate);
    out[0] = 0.0;
    for k in 1..=m {
        let z: f64 = rng.sample(StandardNormal);
        out[k] = out[k - 1] + sd * z;
    }
}

/// Insert bridge midpoints: `coarse` on `{k/m}` → `fine` on `{k/2m}`.
fn refine_path(seed: u64, replicate: u64, coarse: &[f64], fine: &mut [f64]) {
    let m = coarse.len() - 1;
    let sd = 0.5 / (m as f64).sqrt();
    let mut rng = replicate_rng(seed, Stream::Refine, replicate);
    for k in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        fine[2 * k] = coarse[k];
        fine[2 * k + 1] = 0.5 * (coarse[k] + coarse[k + 1]) + sd * z;
    }
    fine[2 * m] = coarse[m];
}

/// Runs `f` on every replicate path (and on its `2m` refinement when `two_level`).
fn replicate_maxima<T, F>(n_rep: usize, grid_m: usize, seed: u64, two_level: bool, f: F) -> Vec<(T, T)>
where
    T: Send + Default,
    F: Fn(&[f64]) -> T + Sync,
{
    (0..n_rep as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; grid_m + 1], vec![0.0; if two_level { 2 * grid_m + 1 } else { 0 }]),
            |(w, fine), i| {
                brownian_path(seed, i, w);
                let a = f(w);
                let b = if two_level {
                    refine_path(seed, i, w, fine);
                    f(fine)
                } else {
                    T::default()
                };
                (a, b)
            },
        )
        .collect()
}

/// The grid supremum of one field functional.
struct Functional {
    kind: FieldKind,
    slope: f64,
    quadratic: bool,
}

impl Functional {
    fn new(kind: FieldKind, u_or_d: f64) -> Self {
        let (slope, quadratic) = kind.penalty(u_or_d);
        Self { kind, slope, quadratic }
    }

    /// Supremum over grid pairs `0 ≤ i ≤ j ≤ m` (P4: `0 < j − i < m`).
    /// May stop early and return any value above `stop` once one is found.
    fn max(&self, w: &[f64], stop: f64) -> f64 {
        let m = w.len() - 1;
        let mf = m as f64;
        let bridge = if self.kind.is_bridge() { w[m] } else { 0.0 };
        if matches!(self.kind, FieldKind::P4) {
            let mut best = f64::NEG_INFINITY;
            for lag in 1..m {
                let tau = lag as f64 / mf;
                let v = (max_increment(w, lag) - tau * bridge) / (tau * (1.0 - tau)).sqrt();
                if v > best {
                    best = v;
                    if best > stop {
                        break;
                    }
                }
            }
            return best;
        }
        if !self.quadratic {
            // linear in τ: sup_{i≤j} (h_j − h_i) with h_k = W_k − (bridge + slope)k/m
            let drift = (bridge + self.slope) / mf;
            let mut run_min = f64::INFINITY;
            let mut best = 0.0_f64;
            for (k, &x) in w.iter().enumerate() {
                let h = x - drift * k as f64;
                if h < run_min {
                    run_min = h;
                }
                if h - run_min > best {
                    best = h - run_min;
                }
            }
            return best;
        }
        let mut best = 0.0_f64;
        for lag in 1..=m {
            let tau = lag as f64 / mf;
            let v = max_increment(w, lag) - tau * bridge - self.slope * tau * (1.0 - tau);
            if v > best {
                best = v;
                if best > stop {
                    break;
                }
            }
        }
        best
    }
}

/// `max_i (w[i+lag] − w[i])`.
fn max_increment(w: &[f64], lag: usize) -> f64 {
    let n = w.len() - lag;
    let (a, b) = (&w[..n], &w[lag..]);
    let mut acc = [f64::NEG_INFINITY; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let d = b[4 * c + l] - a[4 * c + l];
            if d > acc[l] {
                acc[l] = d;
            }
        }
    }
    let mut best = acc[0].max(acc[1]).max(acc[2].max(acc[3]));
    for i in 4 * chunks..n {
        best = best.max(b[i] - a[i]);
    }
    best
}
