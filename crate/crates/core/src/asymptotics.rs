//! Leading-order tail approximations for suprema of Gaussian fields with a
//! trend, and the closed forms they yield for the change-point statistics.
//!
//! The general result covers a centered field `X(s,t)` on a strip around the
//! diagonal `s = t`, of length `s2 − s1`, whose standard deviation peaks at 1
//! on the diagonal with `1 − σ ~ b|s−t|^β` and whose correlation satisfies
//! `1 − r ~ a(|s−s'|^α + |t−t'|^α)`. For a trend `c(s−t)` (linear) or
//! `c(s−t)²` (quadratic):
//!
//! ```text
//! P{sup (X − trend) > u} ~ C · u^(2/α + (2/α − 2/β)₊) · Ψ(u)
//! ```
//!
//! with `C` depending on how α compares to β:
//!
//! - α < β: `2(s2−s1) a^{2/α} H_α² b^{−1/β} Γ(1/β + 1)`, times `exp(c²/4b)`
//!   for a linear trend when β = 2;
//! - α = β: `(s2−s1) a^{1/α} P_α^f` with `f(t) = (b/a)|t|^α (+ (c/√a)t if α = 2
//!   and the trend is linear)`;
//! - α > β: `2^{1/α} (s2−s1) a^{1/α} H_α`.
//!
//! The α > β constant carries no extra power of `u`; the power is entirely in
//! the exponent.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::normal::{gamma, log_mills_leading, log_norm_survival};
use crate::report::float_repr;
use crate::stats::StatKind;

/// Built-in closed forms: H₁ = 1, H₂ = 1/√π.
pub const PICKANDS_H1: f64 = 1.0;
pub const PICKANDS_H2: f64 = 0.564_189_583_547_756_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Linear,
    Quadratic,
}

/// Parameters of the general field tail result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub s1: f64,
    pub s2: f64,
    /// correlation scale
    pub a: f64,
    /// variance-decay scale
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// trend coefficient
    pub c: f64,
    pub trend: Trend,
}

impl AsymptoticParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("s1", self.s1), ("s2", self.s2), ("c", self.c)] {
            require_finite(n, v)?;
        }
        if self.s2 < self.s1 {
            return Err(Error::param(format!("requires s2 ≥ s1, got s1={} s2={}", self.s1, self.s2)));
        }
        require_positive("a", self.a)?;
        require_positive("b", self.b)?;
        for (n, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 2.0) {
                return Err(Error::param(format!("{n} must lie in (0, 2], got {v}")));
            }
        }
        Ok(())
    }

    /// `2/α + (2/α − 2/β)₊`.
    pub fn exponent_power(&self) -> f64 {
        2.0 / self.alpha + (2.0 / self.alpha - 2.0 / self.beta).max(0.0)
    }

    /// The penalty `f` entering the Piterbarg-type constant when α = β.
    pub fn penalty(&self) -> Penalty {
        let linear = if self.trend == Trend::Linear && self.alpha == 2.0 { self.c / self.a.sqrt() } else { 0.0 };
        Penalty { b_over_a: self.b / self.a, c_over_sqrt_a: linear }
    }
}

/// `f(t) = b_over_a·|t|^α + c_over_sqrt_a·t`, the linear part only used at α = 2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Penalty {
    pub b_over_a: f64,
    pub c_over_sqrt_a: f64,
}

impl Penalty {
    pub const ZERO: Penalty = Penalty { b_over_a: 0.0, c_over_sqrt_a: 0.0 };

    pub fn eval(&self, alpha: f64, t: f64) -> f64 {
        let lin = if alpha == 2.0 { self.c_over_sqrt_a * t } else { 0.0 };
        self.b_over_a * t.abs().powf(alpha) + lin
    }
}

/// An asymptotic tail value. `value` is an asymptotic equivalent, not a
/// probability, and may exceed 1 below the formula's range of validity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailApprox {
    pub value: f64,
    #[serde(with = "float_repr")]
    pub log_value: f64,
    pub constant: f64,
    pub exponent_power: f64,
    pub pre_asymptotic: bool,
}

impl TailApprox {
    fn from_log(constant: f64, exponent_power: f64, log_value: f64) -> Self {
        let value = if constant == 0.0 { 0.0 } else { log_value.exp() };
        let log_value = if constant == 0.0 { f64::NEG_INFINITY } else { log_value };
        TailApprox { value, log_value, constant, exponent_power, pre_asymptotic: value > 1.0 }
    }
}

/// Where a constant came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstantSource {
    ClosedForm,
    MonteCarlo { n_replicates: usize, std_error: f64, step: f64, seed: u64 },
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    pub source: ConstantSource,
}

/// Supplies the limit constants H_α and P_α^f.
pub trait ConstantProvider {
    fn pickands(&self, alpha: f64) -> Result<ConstantValue>;
    fn piterbarg(&self, alpha: f64, penalty: Penalty) -> Result<ConstantValue>;
}

/// Lookup table of constants, seeded with the closed forms H₁ and H₂.
/// Entries are matched exactly on their parameters.
#[derive(Debug, Clone, Default)]
pub struct ConstantTable {
    pickands: Vec<(f64, ConstantValue)>,
    piterbarg: Vec<(f64, Penalty, ConstantValue)>,
}

impl ConstantTable {
    /// Empty table (no closed forms).
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut t = Self::default();
        t.insert_pickands(1.0, ConstantValue { value: PICKANDS_H1, source: ConstantSource::ClosedForm });
        t.insert_pickands(2.0, ConstantValue { value: PICKANDS_H2, source: ConstantSource::ClosedForm });
        t
    }

    pub fn insert_pickands(&mut self, alpha: f64, v: ConstantValue) {
        self.pickands.retain(|(a, _)| *a != alpha);
        self.pickands.push((alpha, v));
    }

    pub fn insert_piterbarg(&mut self, alpha: f64, penalty: Penalty, v: ConstantValue) {
        self.piterbarg.retain(|(a, p, _)| !(*a == alpha && *p == penalty));
        self.piterbarg.push((alpha, penalty, v));
    }
}

impl ConstantProvider for ConstantTable {
    fn pickands(&self, alpha: f64) -> Result<ConstantValue> {
        self.pickands.iter().find(|(a, _)| *a == alpha).map(|(_, v)| v.clone()).ok_or_else(|| {
            Error::param(format!("no Pickands constant H_alpha available for alpha={alpha}; estimate it first"))
        })
    }

    fn piterbarg(&self, alpha: f64, penalty: Penalty) -> Result<ConstantValue> {
        self.piterbarg.iter().find(|(a, p, _)| *a == alpha && *p == penalty).map(|(_, _, v)| v.clone()).ok_or_else(
            || {
                Error::param(format!(
                    "no Piterbarg constant P_alpha^f available for alpha={alpha}, \
                     b/a={}, c/sqrt(a)={}; estimate it first",
                    penalty.b_over_a, penalty.c_over_sqrt_a
                ))
            },
        )
    }
}

/// How Ψ(u) enters the tail formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivalForm {
    /// Ψ(u) itself.
    Exact,
    /// The Mills-ratio equivalent φ(u)/u.
    MillsRatio,
}

/// The general field tail approximation with its constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTail {
    pub approx: TailApprox,
    /// Provenance of the H_α or P_α^f factor, if one was used.
    pub constant_source: Option<ConstantSource>,
}

pub fn theorem1_tail(p: &AsymptoticParams, u: f64, constants: &dyn ConstantProvider) -> Result<FieldTail> {
    theorem1_tail_with(p, u, constants, SurvivalForm::Exact)
}

pub fn theorem1_tail_with(
    p: &AsymptoticParams,
    u: f64,
    constants: &dyn ConstantProvider,
    form: SurvivalForm,
) -> Result<FieldTail> {
    p.validate()?;
    require_positive("u", u)?;
    let power = p.exponent_power();
    let len = p.s2 - p.s1;
    let (constant, source) = if len == 0.0 {
        (0.0, None)
    } else if p.alpha < p.beta {
        let h = constants.pickands(p.alpha)?;
        let trend = if p.beta == 2.0 && p.trend == Trend::Linear { (p.c * p.c / (4.0 * p.b)).exp() } else { 1.0 };
        let c = 2.0
            * len
            * p.a.powf(2.0 / p.alpha)
            * h.value
            * h.value
            * p.b.powf(-1.0 / p.beta)
            * gamma(1.0 / p.beta + 1.0)
            * trend;
        (c, Some(h.source))
    } else if p.alpha == p.beta {
        let pf = constants.piterbarg(p.alpha, p.penalty())?;
        (len * p.a.powf(1.0 / p.alpha) * pf.value, Some(pf.source))
    } else {
        let h = constants.pickands(p.alpha)?;
        (2f64.powf(1.0 / p.alpha) * len * p.a.powf(1.0 / p.alpha) * h.value, Some(h.source))
    };
    let log_surv = match form {
        SurvivalForm::Exact => log_norm_survival(u),
        SurvivalForm::MillsRatio => log_mills_leading(u),
    };
    let log_value = constant.ln() + power * u.ln() + log_surv;
    Ok(FieldTail { approx: TailApprox::from_log(constant, power, log_value), constant_source: source })
}

/// `(c, d, u)` of a continuous-time tail problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProblemParams {
    pub c: f64,
    pub d: f64,
    pub u: f64,
}

impl ContinuousProblemParams {
    pub fn new(c: f64, d: f64, u: f64) -> Self {
        Self { c, d, u }
    }

    fn check_common(&self) -> Result<()> {
        require_finite("c", self.c)?;
        require_finite("d", self.d)?;
        require_positive("u", self.u)
    }
}

fn check_u(u: f64) -> Result<()> {
    require_positive("u", u)
}

/// `P{sup (B(t)−B(s) − c(t−s)u) > du} ~ 2c(c−d)u²e^{−2cdu²}`.
pub fn p1_fixed(q: &ContinuousProblemParams) -> Result<TailApprox> {
    q.check_common()?;
    let ContinuousProblemParams { c, d, u } = *q;
    if !(d > 0.0) {
        return Err(Error::domain(format!("p1 requires c > d > 0, got d={d} ≤ 0")));
    }
    if !(c > d) {
        return Err(Error::domain(format!("p1 requires c > d > 0, got c={c} ≤ d={d}")));
    }
    let k = 2.0 * c * (c - d);
    Ok(TailApprox::from_log(k, 2.0, k.ln() + 2.0 * u.ln() - 2.0 * c * d * u * u))
}

/// Bridge increments with linear lag penalty:
/// `~ 32d²(d+c)³/(2d+c)³ · u²e^{−2d(c+d)u²}`.
pub fn p2_fixed(q: &ContinuousProblemParams) -> Result<TailApprox> {
    q.check_common()?;
    let ContinuousProblemParams { c, d, u } = *q;
    if !(c > 0.0 && d > 0.0) {
        return Err(Error::domain(format!("p2 requires c > 0 and d > 0, got c={c}, d={d}")));
    }
    let k = 32.0 * d * d * (d + c).powi(3) / (2.0 * d + c).powi(3);
    Ok(TailApprox::from_log(k, 2.0, k.ln() + 2.0 * u.ln() - 2.0 * d * (c + d) * u * u))
}

/// Bridge increments with penalty `c(t−s)(1−(t−s))u`:
/// `~ 32cd/√(c(c−4d)) · u²e^{−2cdu²}`.
pub fn p3_fixed(q: &ContinuousProblemParams) -> Result<TailApprox> {
    q.check_common()?;
    let ContinuousProblemParams { c, d, u } = *q;
    if !(d > 0.0 && c > 4.0 * d) {
        return Err(Error::domain(format!("p3 requires c > 4d > 0, got c={c}, d={d}")));
    }
    let k = 32.0 * c * d / (c * (c - 4.0 * d)).sqrt();
    Ok(TailApprox::from_log(k, 2.0, k.ln() + 2.0 * u.ln() - 2.0 * c * d * u * u))
}

/// Standardised bridge increments: `~ 2d⁴Ψ(d)` as d → ∞.
pub fn p4_tail(d: f64) -> Result<TailApprox> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("p4 requires d > 0, got d={d}")));
    }
    Ok(TailApprox::from_log(2.0, 4.0, 2f64.ln() + 4.0 * d.ln() + log_norm_survival(d)))
}

/// Threshold `u` free of the sample size, linear penalty:
/// `~ 4u²e^{−2u²−2cu}`.
pub fn p2_free_delta(c: f64, u: f64) -> Result<TailApprox> {
    require_finite("c", c)?;
    check_u(u)?;
    Ok(TailApprox::from_log(4.0, 2.0, 4f64.ln() + 2.0 * u.ln() - 2.0 * u * u - 2.0 * c * u))
}

/// Threshold `u` free of the sample size, quadratic penalty:
/// `~ 4u²e^{−(2u + c/2)²/2}`.
pub fn p3_free_delta(c: f64, u: f64) -> Result<TailApprox> {
    require_finite("c", c)?;
    check_u(u)?;
    let e = 2.0 * u + 0.5 * c;
    Ok(TailApprox::from_log(4.0, 2.0, 4f64.ln() + 2.0 * u.ln() - 0.5 * e * e))
}

/// Rescale `P{Z > level}` for `m` observations to the continuous problem with
/// `u = √m`, `c = δ/2`, `d = level/(δm)`.
///
/// `d ≤ 0` is returned as is; the p-value functions reject it.
pub fn discrete_to_continuous(m: usize, delta: f64, level: f64, kind: StatKind) -> Result<ContinuousProblemParams> {
    if m < 2 {
        return Err(Error::param(format!("requires m ≥ 2, got {m}")));
    }
    require_positive("delta", delta)?;
    require_finite("level", level)?;
    if kind == StatKind::Z4 {
        return Err(Error::param("Z4 has no (c, d, u) rescaling; use p4_tail on the statistic directly"));
    }
    let mf = m as f64;
    Ok(ContinuousProblemParams { c: delta / 2.0, d: level / (delta * mf), u: mf.sqrt() })
}

/// Approximate p-value of an observed statistic: Z1→p1, Z2→p2, Z3→p3 after
/// rescaling, Z4→p4 applied to the value itself.
pub fn statistic_pvalue(
    kind: StatKind,
    m: usize,
    delta: Option<f64>,
    level: f64,
) -> Result<(TailApprox, Option<ContinuousProblemParams>)> {
    if kind == StatKind::Z4 {
        return Ok((p4_tail(level)?, None));
    }
    let delta = delta.ok_or_else(|| Error::param(format!("{kind} p-value requires --delta")))?;
    let q = discrete_to_continuous(m, delta, level, kind)?;
    let approx = match kind {
        StatKind::Z1 => p1_fixed(&q)?,
        StatKind::Z2 => p2_fixed(&q)?,
        StatKind::Z3 => p3_fixed(&q)?,
        StatKind::Z4 => unreachable!(),
    };
    Ok((approx, Some(q)))
}
