//! Exact scan statistics for a single shifted segment in a normal mean.
//!
//! With partial sums `S_0 = 0, S_k = x_1 + … + x_k`, every statistic is a
//! maximum over index pairs `0 ≤ i < j ≤ m` of a penalised increment
//! `S_j − S_i`:
//!
//! ```text
//! Z1 = δ·max[S_j − S_i − (j−i)(μ0 + δ/2)]
//! Z2 = δ·max[S_j − S_i − (j−i)(S_m/m + δ/2)]
//! Z3 = δ·max[S_j − S_i − (j−i)S_m/m − ½δ(j−i)(1 − (j−i)/m)]
//! Z4 = max[S_j − S_i − (j−i)S_m/m]⁺ / √((j−i)(1 − (j−i)/m))
//! ```
//!
//! Z1 and Z2 have a penalty linear in `j − i`, so they reduce to a running
//! minimum and cost O(m). Z3 and Z4 depend on the lag non-linearly and are
//! scanned lag by lag in O(m²). All maximisers are reported as the
//! lexicographically smallest `(i, j)` among pairs attaining the maximum.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Error, Result};

/// Observations `x_1 … x_m`, validated finite with `m ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    values: Vec<f64>,
}

impl ObservationSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Input(format!("need at least 2 observations, got {}", values.len())));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Input(format!("observation {} is not finite ({v})", k + 1)));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn partial_sums(&self) -> Vec<f64> {
        partial_sums(self)
    }
}

/// Hypothesis parameters. `mu0` is only needed for Z1, `delta` for Z1–Z3.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisParams {
    pub mu0: Option<f64>,
    pub delta: Option<f64>,
}

impl HypothesisParams {
    pub fn new(mu0: Option<f64>, delta: Option<f64>) -> Result<Self> {
        if let Some(m) = mu0 {
            require_finite("mu0", m)?;
        }
        if let Some(d) = delta {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::param(format!("delta must be positive and finite, got {d}")));
            }
        }
        Ok(Self { mu0, delta })
    }

    fn delta(&self, kind: StatKind) -> Result<f64> {
        match self.delta {
            Some(d) if d.is_finite() && d > 0.0 => Ok(d),
            Some(d) => Err(Error::param(format!("{kind} requires delta > 0, got {d}"))),
            None => Err(Error::param(format!("{kind} requires --delta (mean shift)"))),
        }
    }

    fn mu0(&self, kind: StatKind) -> Result<f64> {
        match self.mu0 {
            Some(m) if m.is_finite() => Ok(m),
            Some(m) => Err(Error::param(format!("{kind} requires a finite mu0, got {m}"))),
            None => Err(Error::param(format!("{kind} requires --mu0 (baseline mean)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKind {
    Z1,
    Z2,
    Z3,
    Z4,
}

impl StatKind {
    pub const ALL: [StatKind; 4] = [StatKind::Z1, StatKind::Z2, StatKind::Z3, StatKind::Z4];
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StatKind::Z1 => "Z1",
            StatKind::Z2 => "Z2",
            StatKind::Z3 => "Z3",
            StatKind::Z4 => "Z4",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z1" => Ok(StatKind::Z1),
            "z2" => Ok(StatKind::Z2),
            "z3" => Ok(StatKind::Z3),
            "z4" => Ok(StatKind::Z4),
            _ => Err(Error::param(format!("unknown statistic '{s}' (expected z1, z2, z3 or z4)"))),
        }
    }
}

/// A statistic value with its maximising pair. The estimated shifted segment
/// is `(i_star, j_star]` in 1-based observation indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub kind: StatKind,
    pub value: f64,
    pub i_star: usize,
    pub j_star: usize,
}

/// `[0, x_1, x_1 + x_2, …]`, accumulated left to right.
pub fn partial_sums(x: &ObservationSeries) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for &v in x.values() {
        acc += v;
        out.push(acc);
    }
    out
}

pub fn z1(x: &ObservationSeries, h: &HypothesisParams) -> Result<StatReport> {
    let mu0 = h.mu0(StatKind::Z1)?;
    let delta = h.delta(StatKind::Z1)?;
    let s = partial_sums(x);
    Ok(linear_drift_scan(StatKind::Z1, &s, mu0 + 0.5 * delta, delta))
}

pub fn z2(x: &ObservationSeries, h: &HypothesisParams) -> Result<StatReport> {
    let delta = h.delta(StatKind::Z2)?;
    let s = partial_sums(x);
    let m = x.len() as f64;
    let mean = s[x.len()] / m;
    Ok(linear_drift_scan(StatKind::Z2, &s, mean + 0.5 * delta, delta))
}

pub fn z3(x: &ObservationSeries, h: &HypothesisParams) -> Result<StatReport> {
    let delta = h.delta(StatKind::Z3)?;
    let s = partial_sums(x);
    let m = x.len();
    let mean = s[m] / m as f64;
    let mf = m as f64;
    let (value, i, j) = lag_scan(&s, |k, inc| {
        let kf = k as f64;
        Some(delta * (inc - kf * mean - 0.5 * delta * kf * (1.0 - kf / mf)))
    });
    Ok(StatReport { kind: StatKind::Z3, value, i_star: i, j_star: j })
}

pub fn z4(x: &ObservationSeries) -> StatReport {
    let s = partial_sums(x);
    let m = x.len();
    let mean = s[m] / m as f64;
    let mf = m as f64;
    let (value, i, j) = lag_scan(&s, |k, inc| {
        if k == m {
            // numerator is identically zero on the full span
            return Some(0.0);
        }
        let kf = k as f64;
        let num = (inc - kf * mean).max(0.0);
        Some(num / (kf * (1.0 - kf / mf)).sqrt())
    });
    if value == 0.0 {
        return StatReport { kind: StatKind::Z4, value: 0.0, i_star: 0, j_star: 1 };
    }
    StatReport { kind: StatKind::Z4, value, i_star: i, j_star: j }
}

/// Dispatch by kind.
pub fn statistic(kind: StatKind, x: &ObservationSeries, h: &HypothesisParams) -> Result<StatReport> {
    match kind {
        StatKind::Z1 => z1(x, h),
        StatKind::Z2 => z2(x, h),
        StatKind::Z3 => z3(x, h),
        StatKind::Z4 => Ok(z4(x)),
    }
}

/// The defining expression of `kind` at a single pair, written out term by
/// term. Used to re-check reported maxima.
pub fn statistic_at(kind: StatKind, x: &ObservationSeries, h: &HypothesisParams, i: usize, j: usize) -> Result<f64> {
    let m = x.len();
    if !(i < j && j <= m) {
        return Err(Error::param(format!("pair ({i}, {j}) outside 0 ≤ i < j ≤ {m}")));
    }
    let s = partial_sums(x);
    let (iff, jf, mf) = (i as f64, j as f64, m as f64);
    let sm = s[m];
    Ok(match kind {
        StatKind::Z1 => {
            let (d, mu0) = (h.delta(kind)?, h.mu0(kind)?);
            d * (s[j] - jf * mu0 - (s[i] - iff * mu0) - (jf - iff) * d / 2.0)
        }
        StatKind::Z2 => {
            let d = h.delta(kind)?;
            d * (s[j] - jf * sm / mf - (s[i] - iff * sm / mf) - (jf - iff) * d / 2.0)
        }
        StatKind::Z3 => {
            let d = h.delta(kind)?;
            let k = jf - iff;
            d * (s[j] - s[i] - k * sm / mf - 0.5 * d * k * (1.0 - k / mf))
        }
        StatKind::Z4 => {
            if j - i == m {
                0.0
            } else {
                let k = jf - iff;
                (s[j] - s[i] - k * sm / mf).max(0.0) / (k * (1.0 - k / mf)).sqrt()
            }
        }
    })
}

/// `scale · max_{i<j} (g_j − g_i)` with `g_k = S_k − k·drift`, in one pass
/// with a running minimum of `g` over the prefix.
fn linear_drift_scan(kind: StatKind, s: &[f64], drift: f64, scale: f64) -> StatReport {
    let g = |k: usize| s[k] - k as f64 * drift;
    let mut min_val = g(0);
    let mut min_idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    let (mut bi, mut bj) = (0usize, 1usize);
    for j in 1..s.len() {
        let gj = g(j);
        let cand = scale * (gj - min_val);
        // earliest minimiser for this j gives the smallest i; on exact ties
        // across j keep the lexicographically smaller pair
        if cand > best || (cand == best && (min_idx, j) < (bi, bj)) {
            best = cand;
            bi = min_idx;
            bj = j;
        }
        if gj < min_val {
            min_val = gj;
            min_idx = j;
        }
    }
    StatReport { kind, value: best, i_star: bi, j_star: bj }
}

/// Lag-major scan over all pairs. `term(k, S_{i+k} − S_i)` gives the pair's
/// contribution, or `None` to skip it.
fn lag_scan(s: &[f64], term: impl Fn(usize, f64) -> Option<f64>) -> (f64, usize, usize) {
    let m = s.len() - 1;
    let mut best = f64::NEG_INFINITY;
    let (mut bi, mut bj) = (0usize, 1usize);
    for k in 1..=m {
        // best increment at this lag, earliest i on ties
        let mut inc_best = f64::NEG_INFINITY;
        let mut inc_i = 0usize;
        for (i, (hi, lo)) in s[k..].iter().zip(s).enumerate() {
            let inc = hi - lo;
            if inc > inc_best {
                inc_best = inc;
                inc_i = i;
            }
        }
        // the lag penalty is monotone in the increment, so the lag-k maximum
        // sits at the best increment; still resolve ties across equal values
        let Some(v) = term(k, inc_best) else { continue };
        if v > best || (v == best && (inc_i, inc_i + k) < (bi, bj)) {
            best = v;
            bi = inc_i;
            bj = inc_i + k;
        }
    }
    (best, bi, bj)
}
