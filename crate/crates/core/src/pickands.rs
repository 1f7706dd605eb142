//! Monte Carlo estimation of the Pickands constant `H_α` and the
//! two-dimensional Piterbarg-type constants `P_α^f`, `Q_α`.
//!
//! With `B_α`, `B¹_α`, `B²_α` independent fractional Brownian motions:
//!
//! ```text
//! H_α(λ)     = E sup_{0≤t≤λ}            exp(√2 B_α(t) − |t|^α)
//! P_α^f(λ,μ) = E sup_{0≤s≤λ, |s−t|≤μ}   exp(√2(B¹(s) + B²(t)) − |s|^α − |t|^α − f(s−t))
//! Q_α(λ,μ)   = E sup_{0≤s≤λ, 0≤s−t≤μ}  exp(√2(B¹(s) + B²(t)) − |s|^α − |t|^α)
//! ```
//!
//! Suprema are taken over grid points. `H_α(λ) = H_α·λ + O(1)`, so the
//! default limit estimate is the increment `(H_α(λ) − H_α(λ/2))/(λ/2)`
//! computed on common paths.
//!
//! Two estimators of the same grid expectation are available:
//!
//! - [`Estimator::Direct`] averages `exp(sup …)` over plain fBm paths. Its
//!   summands are heavy tailed (for α = 1 the supremum is roughly Exp(1), so
//!   `exp(sup)` has no finite variance as λ grows), and for α = 2 the mass sits
//!   at normal quantiles a sample never reaches.
//! - [`Estimator::Tilted`] samples from the uniform mixture of the
//!   exponentially tilted laws `exp(G_k)·P`, `G_k = √2B(t_k) − |t_k|^α`, over
//!   the grid points `k`. Under the tilt at `t*` the path is fBm plus the
//!   mean shift `|t|^α + |t*|^α − |t − t*|^α`, and the likelihood ratio turns
//!   each summand into `N·exp(sup G)/Σ_k exp(G_k)`, which lies in `[1, N]`.
//!   For the increment form the mixture runs over `(λ/2, λ]` only, where the
//!   difference of suprema lives. For two-dimensional constants it runs over
//!   all grid pairs `|s−t| ≤ μ`, so P and Q share the same tilted paths.
//!
//! Both estimators are unbiased for the grid quantity. Coarse and fine
//! grids (`η`, `η/2`) are evaluated on the same fine paths and the same
//! mixture, so halving the step never lowers a replicate of `H_α(λ)`, `P` or
//! `Q`. The increment form is a difference of two suprema and carries no such
//! pathwise guarantee.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::Penalty;
use crate::error::{require_positive, Error, Result};
use crate::fbm::{FbmGridSpec, FbmSampler, FbmScratch};
use crate::seed::{replicate_rng, Stream};
use crate::sum::mean_and_std_error;

pub const MIN_REPLICATES: usize = 100;

/// Default grid step: finer for rough paths.
pub fn default_step(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        0.01
    } else {
        0.002
    }
}

pub const DEFAULT_LAMBDA_H: f64 = 8.0;
pub const DEFAULT_LAMBDA_P: f64 = 4.0;
pub const DEFAULT_LAMBDA1_P: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantKind {
    /// `H_α(λ)`
    HOfLambda,
    /// `(H_α(λ) − H_α(λ/2))/(λ/2)`, an estimate of `H_α`
    HRate,
    /// `P_α^f(λ, λ1)`
    POfLambda,
    /// `Q_α(λ, λ1)`
    QOfLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Estimator {
    Direct,
    #[default]
    Tilted,
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Estimator::Direct),
            "tilted" => Ok(Estimator::Tilted),
            _ => Err(Error::param(format!("unknown estimator '{s}' (expected direct or tilted)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub step: f64,
    pub n_rep: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl McConfig {
    pub fn new(step: f64, n_rep: usize, seed: u64) -> Self {
        Self { step, n_rep, seed, estimator: Estimator::default() }
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    fn validate(&self) -> Result<()> {
        require_positive("step", self.step)?;
        if self.n_rep < MIN_REPLICATES {
            return Err(Error::param(format!(
                "constant estimation needs at least {MIN_REPLICATES} replicates, got {}",
                self.n_rep
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    pub value: f64,
    /// sample standard deviation / √n_replicates
    pub std_error: f64,
    pub n_replicates: usize,
    /// grid of the `s` (or `t`) axis on `[0, λ]`
    pub grid: FbmGridSpec,
    /// λ1 for P and Q
    pub lambda1: Option<f64>,
    /// penalty `f` for P
    pub f_params: Option<Penalty>,
    pub estimator: Estimator,
    pub seed: u64,
}

/// Estimates at step `η` and `η/2` from common paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelEstimate {
    pub coarse: ConstantEstimate,
    pub fine: ConstantEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HForm {
    OfLambda,
    Rate,
}

/// Estimate `H_α(λ)` or the increment-form limit at `cfg.step`.
pub fn estimate_h(alpha: f64, lambda: f64, form: HForm, cfg: &McConfig) -> Result<ConstantEstimate> {
    cfg.validate()?;
    let plan = HPlan::new(alpha, lambda, cfg.step, 1, form)?;
    let samples = plan.run(cfg)?;
    Ok(plan.finish(0, &samples, cfg))
}

/// Same as [`estimate_h`] at `cfg.step` and `cfg.step / 2` on shared paths.
pub fn estimate_h_two_level(alpha: f64, lambda: f64, form: HForm, cfg: &McConfig) -> Result<TwoLevelEstimate> {
    cfg.validate()?;
    let plan = HPlan::new(alpha, lambda, cfg.step / 2.0, 2, form)?;
    let samples = plan.run(cfg)?;
    Ok(TwoLevelEstimate { coarse: plan.finish(0, &samples, cfg), fine: plan.finish(1, &samples, cfg) })
}

/// `H_α(λ)` at each horizon (ascending), all read off the same paths on
/// `[0, max horizon]`.
pub fn estimate_h_profile(alpha: f64, horizons: &[f64], cfg: &McConfig) -> Result<Vec<ConstantEstimate>> {
    cfg.validate()?;
    if horizons.is_empty() || horizons.len() > MAX_EVALS {
        return Err(Error::param(format!("need 1..={MAX_EVALS} horizons")));
    }
    let lambda = horizons.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &h in horizons {
        require_positive("horizon", h)?;
    }
    let spec = FbmGridSpec::new(alpha, lambda, cfg.step)?;
    let evals: Vec<HEval> =
        horizons.iter().map(|&h| HEval { stride: 1, last: last_index(h, cfg.step, spec.n_points) }).collect();
    let plan = HPlan { spec, evals, form: HForm::OfLambda, lambda };
    let samples = plan.run(cfg)?;
    horizons
        .iter()
        .enumerate()
        .map(|(e, &h)| {
            let xs: Vec<f64> = samples.iter().map(|s| s[e]).collect();
            let (value, std_error) = mean_and_std_error(&xs);
            Ok(ConstantEstimate {
                kind: ConstantKind::HOfLambda,
                value,
                std_error,
                n_replicates: cfg.n_rep,
                grid: FbmGridSpec::new(alpha, h, cfg.step)?,
                lambda1: None,
                f_params: None,
                estimator: cfg.estimator,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// Estimate `P_α^f(λ, λ1)` at `cfg.step`.
pub fn estimate_p(alpha: f64, penalty: Penalty, lambda: f64, lambda1: f64, cfg: &McConfig) -> Result<ConstantEstimate> {
    cfg.validate()?;
    let plan = PairPlan::new(alpha, lambda, lambda1, cfg.step, 1, Region::Symmetric, penalty)?;
    let samples = plan.run(cfg)?;
    Ok(plan.finish(0, &samples, cfg))
}

pub fn estimate_p_two_level(
    alpha: f64,
    penalty: Penalty,
    lambda: f64,
    lambda1: f64,
    cfg: &McConfig,
) -> Result<TwoLevelEstimate> {
    cfg.validate()?;
    let plan = PairPlan::new(alpha, lambda, lambda1, cfg.step / 2.0, 2, Region::Symmetric, penalty)?;
    let samples = plan.run(cfg)?;
    Ok(TwoLevelEstimate { coarse: plan.finish(0, &samples, cfg), fine: plan.finish(1, &samples, cfg) })
}

/// Estimate `Q_α(λ, λ1)` at `cfg.step`.
pub fn estimate_q(alpha: f64, lambda: f64, lambda1: f64, cfg: &McConfig) -> Result<ConstantEstimate> {
    cfg.validate()?;
    let plan = PairPlan::new(alpha, lambda, lambda1, cfg.step, 1, Region::OneSided, Penalty::ZERO)?;
    let samples = plan.run(cfg)?;
    Ok(plan.finish(0, &samples, cfg))
}

pub fn estimate_q_two_level(alpha: f64, lambda: f64, lambda1: f64, cfg: &McConfig) -> Result<TwoLevelEstimate> {
    cfg.validate()?;
    let plan = PairPlan::new(alpha, lambda, lambda1, cfg.step / 2.0, 2, Region::OneSided, Penalty::ZERO)?;
    let samples = plan.run(cfg)?;
    Ok(TwoLevelEstimate { coarse: plan.finish(0, &samples, cfg), fine: plan.finish(1, &samples, cfg) })
}

const MAX_EVALS: usize = 4;
type Samples = [f64; MAX_EVALS];

fn last_index(horizon: f64, step: f64, n_points: usize) -> usize {
    let k = (horizon / step * (1.0 + 1e-12)).floor() as usize;
    k.min(n_points - 1)
}

/// `(kη)^α` for k = 0..n.
fn powers(alpha: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 * step).powf(alpha)).collect()
}

fn run_parallel<S, F>(n_rep: usize, init: impl Fn() -> S + Sync + Send, f: F) -> Vec<Samples>
where
    F: Fn(&mut S, u64) -> Samples + Sync + Send,
{
    (0..n_rep as u64).into_par_iter().map_init(init, |s, r| f(s, r)).collect()
}

/// Log of Σ exp(x).
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct HEval {
    stride: usize,
    last: usize,
}

struct HPlan {
    /// finest grid
    spec: FbmGridSpec,
    /// per level: for OfLambda one eval, for Rate (full, half)
    evals: Vec<HEval>,
    form: HForm,
    lambda: f64,
}

impl HPlan {
    /// `levels` = 1 (just `step`) or 2 (`2·step` coarse, `step` fine).
    fn new(alpha: f64, lambda: f64, step: f64, levels: usize, form: HForm) -> Result<Self> {
        let spec = FbmGridSpec::new(alpha, lambda, step)?;
        let mut evals = Vec::new();
        for level in 0..levels {
            let stride = 1 << (levels - 1 - level);
            evals.push(HEval { stride, last: spec.n_points - 1 });
            if form == HForm::Rate {
                evals.push(HEval { stride, last: last_index(lambda / 2.0, step, spec.n_points) });
            }
        }
        Ok(Self { spec, evals, form, lambda })
    }

    fn run(&self, cfg: &McConfig) -> Result<Vec<Samples>> {
        let sampler = FbmSampler::new(self.spec)?;
        let n = self.spec.n_points;
        let pow = powers(self.spec.alpha, self.spec.step, n);
        // mixture support [from, n)
        let from = match self.form {
            HForm::Rate if self.evals[1].last + 1 < n => self.evals[1].last + 1,
            _ => 0,
        };
        let ln_n = ((n - from) as f64).ln();
        let sqrt2 = std::f64::consts::SQRT_2;
        Ok(run_parallel(
            cfg.n_rep,
            || (FbmScratch::default(), vec![0.0; n], vec![0.0; n]),
            |(scratch, path, g), r| {
                let mut rng = replicate_rng(cfg.seed, Stream::Fbm1, r);
                sampler.sample(&mut rng, path, scratch);
                match cfg.estimator {
                    Estimator::Direct => {
                        for k in 0..n {
                            g[k] = sqrt2 * path[k] - pow[k];
                        }
                    }
                    Estimator::Tilted => {
                        let star = replicate_rng(cfg.seed, Stream::Tilt, r).random_range(from..n);
                        for k in 0..n {
                            g[k] = sqrt2 * path[k] + pow[star] - pow[k.abs_diff(star)];
                        }
                    }
                }
                let lse = match cfg.estimator {
                    Estimator::Direct => 0.0,
                    Estimator::Tilted => log_sum_exp(g[from..].iter().copied()) - ln_n,
                };
                let mut out = [0.0; MAX_EVALS];
                for (o, e) in out.iter_mut().zip(&self.evals) {
                    let m = g[..=e.last].iter().step_by(e.stride).cloned().fold(f64::NEG_INFINITY, f64::max);
                    *o = (m - lse).exp();
                }
                out
            },
        ))
    }

    fn finish(&self, level: usize, samples: &[Samples], cfg: &McConfig) -> ConstantEstimate {
        let per_level = if self.form == HForm::Rate { 2 } else { 1 };
        let base = level * per_level;
        let stride = self.evals[base].stride;
        let step = self.spec.step * stride as f64;
        let xs: Vec<f64> = match self.form {
            HForm::OfLambda => samples.iter().map(|s| s[base]).collect(),
            HForm::Rate => {
                let width = self.lambda / 2.0;
                samples.iter().map(|s| (s[base] - s[base + 1]) / width).collect()
            }
        };
        let (value, std_error) = mean_and_std_error(&xs);
        ConstantEstimate {
            kind: match self.form {
                HForm::OfLambda => ConstantKind::HOfLambda,
                HForm::Rate => ConstantKind::HRate,
            },
            value,
            std_error,
            n_replicates: cfg.n_rep,
            grid: FbmGridSpec::new(self.spec.alpha, self.lambda, step).expect("validated grid"),
            lambda1: None,
            f_params: None,
            estimator: cfg.estimator,
            seed: cfg.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    /// `|s − t| ≤ λ1`
    Symmetric,
    /// `0 ≤ s − t ≤ λ1`
    OneSided,
}

struct PairPlan {
    alpha: f64,
    lambda: f64,
    lambda1: f64,
    step: f64,
    /// number of fine `s` points on `[0, λ]`
    n_s: usize,
    /// lag half-width in fine steps
    lag: usize,
    strides: Vec<usize>,
    region: Region,
    penalty: Penalty,
}

impl PairPlan {
    fn new(
        alpha: f64,
        lambda: f64,
        lambda1: f64,
        step: f64,
        levels: usize,
        region: Region,
        penalty: Penalty,
    ) -> Result<Self> {
        if !(lambda1.is_finite() && lambda1 >= 0.0) {
            return Err(Error::param(format!("lambda1 must be ≥ 0, got {lambda1}")));
        }
        if !(penalty.b_over_a.is_finite() && penalty.b_over_a >= 0.0) {
            return Err(Error::param(format!("b_over_a must be ≥ 0, got {}", penalty.b_over_a)));
        }
        if !penalty.c_over_sqrt_a.is_finite() {
            return Err(Error::param("c_over_sqrt_a must be finite"));
        }
        let spec = FbmGridSpec::new(alpha, lambda, step)?;
        let lag = (lambda1 / step * (1.0 + 1e-12)).floor() as usize;
        let strides = (0..levels).map(|level| 1 << (levels - 1 - level)).collect();
        Ok(Self { alpha, lambda, lambda1, step, n_s: spec.n_points, lag, strides, region, penalty })
    }

    fn run(&self, cfg: &McConfig) -> Result<Vec<Samples>> {
        let (n_s, lag) = (self.n_s, self.lag);
        let n_t = n_s + 2 * lag;
        let s_spec = FbmGridSpec::new(self.alpha, self.lambda, self.step)?;
        let s_sampler = FbmSampler::new(s_spec)?;
        let t_sampler = if lag == 0 {
            FbmSampler::new(s_spec)?
        } else {
            let mut t_spec = FbmGridSpec::new(self.alpha, (n_t - 1) as f64 * self.step, self.step)?;
            t_spec.n_points = n_t;
            FbmSampler::new(t_spec)?
        };
        let pow = powers(self.alpha, self.step, n_t);
        // f((i − j)η) indexed by i − j + lag
        let fvals: Vec<f64> =
            (0..=2 * lag).map(|o| self.penalty.eval(self.alpha, (o as f64 - lag as f64) * self.step)).collect();
        let n_pairs = n_s * (2 * lag + 1);
        let ln_pairs = (n_pairs as f64).ln();
        let sqrt2 = std::f64::consts::SQRT_2;

        Ok(run_parallel(
            cfg.n_rep,
            || {
                (
                    FbmScratch::default(),
                    vec![0.0; n_s],
                    vec![0.0; n_t],
                    vec![0.0; n_s],
                    vec![0.0; n_t],
                    vec![0.0; n_t + 1],
                )
            },
            |(scratch, b1, w, g1, g2, prefix), r| {
                s_sampler.sample(&mut replicate_rng(cfg.seed, Stream::Fbm1, r), b1, scratch);
                t_sampler.sample(&mut replicate_rng(cfg.seed, Stream::Fbm2, r), w, scratch);
                // g2[jj] holds t = (jj − lag)η; recentre W so that B²(0) = 0
                let w0 = w[lag];
                let (s_star, t_star) = match cfg.estimator {
                    Estimator::Direct => (None, None),
                    Estimator::Tilted => {
                        let mut rng = replicate_rng(cfg.seed, Stream::Tilt, r);
                        let i = rng.random_range(0..n_s);
                        let off = rng.random_range(0..=2 * lag);
                        // t index (shifted by lag) of the tilting pair
                        (Some(i), Some(i + off))
                    }
                };
                for i in 0..n_s {
                    g1[i] = sqrt2 * b1[i]
                        + match s_star {
                            None => -pow[i],
                            Some(k) => pow[k] - pow[i.abs_diff(k)],
                        };
                }
                for jj in 0..n_t {
                    let tabs = jj.abs_diff(lag);
                    g2[jj] = sqrt2 * (w[jj] - w0)
                        + match t_star {
                            None => -pow[tabs],
                            Some(k) => pow[k.abs_diff(lag)] - pow[jj.abs_diff(k)],
                        };
                }
                let log_norm = match cfg.estimator {
                    Estimator::Direct => 0.0,
                    Estimator::Tilted => {
                        // Σ_i e^{g1_i} Σ_{|j−i|≤lag} e^{g2_j}, via prefix sums of e^{g2}
                        let m2 = g2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        prefix[0] = 0.0;
                        for jj in 0..n_t {
                            prefix[jj + 1] = prefix[jj] + (g2[jj] - m2).exp();
                        }
                        let m1 = g1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let mut total = 0.0;
                        for i in 0..n_s {
                            // window jj ∈ [i, i + 2·lag]
                            let win = prefix[i + 2 * lag + 1] - prefix[i];
                            total += (g1[i] - m1).exp() * win;
                        }
                        m1 + m2 + total.ln() - ln_pairs
                    }
                };
                let mut out = [0.0; MAX_EVALS];
                for (o, &stride) in out.iter_mut().zip(&self.strides) {
                    let mut best = f64::NEG_INFINITY;
                    let reach = (lag / stride) * stride;
                    for i in (0..n_s).step_by(stride) {
                        // offsets o = j − i in multiples of stride
                        let lo = lag - reach;
                        let hi = match self.region {
                            Region::Symmetric => lag + reach,
                            Region::OneSided => lag,
                        };
                        let gi = g1[i];
                        let mut jj = i + lo;
                        let mut fo = 2 * lag - lo; // index of f at s − t = −(j − i)
                        while jj <= i + hi {
                            let v = gi + g2[jj] - fvals[fo];
                            if v > best {
                                best = v;
                            }
                            jj += stride;
                            fo = fo.wrapping_sub(stride);
                        }
                    }
                    *o = (best - log_norm).exp();
                }
                out
            },
        ))
    }

    fn finish(&self, level: usize, samples: &[Samples], cfg: &McConfig) -> ConstantEstimate {
        let xs: Vec<f64> = samples.iter().map(|s| s[level]).collect();
        let (value, std_error) = mean_and_std_error(&xs);
        let step = self.step * self.strides[level] as f64;
        ConstantEstimate {
            kind: match self.region {
                Region::Symmetric => ConstantKind::POfLambda,
                Region::OneSided => ConstantKind::QOfLambda,
            },
            value,
            std_error,
            n_replicates: cfg.n_rep,
            grid: FbmGridSpec::new(self.alpha, self.lambda, step).expect("validated grid"),
            lambda1: Some(self.lambda1),
            f_params: match self.region {
                Region::Symmetric => Some(self.penalty),
                Region::OneSided => None,
            },
            estimator: cfg.estimator,
            seed: cfg.seed,
        }
    }
}
