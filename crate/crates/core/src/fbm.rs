//! Fractional Brownian motion `B_α` with `Var B_α(t) = |t|^α`, α ∈ (0, 2],
//! sampled exactly on a uniform grid `{0, η, 2η, …}`.
//!
//! The increments form stationary fractional Gaussian noise with
//! autocovariance `γ(k) = ½η^α(|k+1|^α − 2|k|^α + |k−1|^α)`. They are drawn
//! by circulant embedding: the covariance is embedded in a circulant matrix
//! of size `2N` (N a power of two), diagonalised by one FFT, and a single
//! complex Gaussian vector is coloured by the square-rooted eigenvalues. If
//! the embedding has a negative eigenvalue the sampler falls back to a dense
//! Cholesky factor of the path covariance. α = 1 uses independent increments
//! and α = 2 uses the exact degenerate form `B_2(t) = tZ`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Largest path (excluding t = 0) the dense fallback will factorise.
pub const MAX_DENSE_POINTS: usize = 3000;

/// Largest grid the sampler accepts at all.
pub const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmGridSpec {
    pub alpha: f64,
    /// horizon λ
    pub horizon: f64,
    /// grid step η
    pub step: f64,
    /// `floor(λ/η) + 1`
    pub n_points: usize,
}

impl FbmGridSpec {
    /// Grid on `[0, horizon]`. A step larger than the horizon leaves only
    /// the point t = 0.
    pub fn new(alpha: f64, horizon: f64, step: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::param(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        require_positive("horizon", horizon)?;
        require_positive("step", step)?;
        // tolerate representation error in λ/η, e.g. 8/0.01
        let cells = (horizon / step * (1.0 + 1e-12)).floor();
        if cells + 1.0 > MAX_GRID_POINTS as f64 {
            return Err(Error::Resource(format!(
                "grid of {} points exceeds the limit of {MAX_GRID_POINTS}",
                cells + 1.0
            )));
        }
        Ok(Self { alpha, horizon, step, n_points: cells as usize + 1 })
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FbmMethod {
    /// α = 1: independent Gaussian increments.
    Brownian,
    /// α = 2: `tZ`.
    Linear,
    CirculantEmbedding,
    DenseCholesky,
}

enum Inner {
    Brownian,
    Linear,
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Dense { chol: Vec<f64> },
}

/// Reusable sampler for one grid.
pub struct FbmSampler {
    spec: FbmGridSpec,
    inner: Inner,
}

/// Per-thread working memory for [`FbmSampler::sample`].
#[derive(Default)]
pub struct FbmScratch {
    buf: Vec<Complex<f64>>,
    fft: Vec<Complex<f64>>,
    z: Vec<f64>,
}

fn fgn_autocov(alpha: f64, k: usize) -> f64 {
    let k = k as f64;
    0.5 * ((k + 1.0).powf(alpha) - 2.0 * k.powf(alpha) + (k - 1.0).abs().powf(alpha))
}

impl FbmSampler {
    /// Picks the exact special case for α ∈ {1, 2}, otherwise circulant
    /// embedding with dense fallback.
    pub fn new(spec: FbmGridSpec) -> Result<Self> {
        if spec.alpha == 1.0 {
            return Ok(Self { spec, inner: Inner::Brownian });
        }
        if spec.alpha == 2.0 {
            return Ok(Self { spec, inner: Inner::Linear });
        }
        match Self::circulant(spec)? {
            Some(s) => Ok(s),
            None => Self::dense(spec),
        }
    }

    /// Forces a particular construction. `Brownian` and `Linear` require
    /// α = 1 and α = 2 respectively; circulant embedding fails with a
    /// resource error if the embedding is not nonnegative definite.
    pub fn with_method(spec: FbmGridSpec, method: FbmMethod) -> Result<Self> {
        match method {
            FbmMethod::Brownian if spec.alpha == 1.0 => Ok(Self { spec, inner: Inner::Brownian }),
            FbmMethod::Linear if spec.alpha == 2.0 => Ok(Self { spec, inner: Inner::Linear }),
            FbmMethod::Brownian | FbmMethod::Linear => {
                Err(Error::param(format!("{method:?} sampling does not apply to alpha={}", spec.alpha)))
            }
            FbmMethod::CirculantEmbedding => Self::circulant(spec)?
                .ok_or_else(|| Error::Resource("circulant embedding is not nonnegative definite".into())),
            FbmMethod::DenseCholesky => Self::dense(spec),
        }
    }

    pub fn spec(&self) -> &FbmGridSpec {
        &self.spec
    }

    pub fn method(&self) -> FbmMethod {
        match self.inner {
            Inner::Brownian => FbmMethod::Brownian,
            Inner::Linear => FbmMethod::Linear,
            Inner::Circulant { .. } => FbmMethod::CirculantEmbedding,
            Inner::Dense { .. } => FbmMethod::DenseCholesky,
        }
    }

    fn circulant(spec: FbmGridSpec) -> Result<Option<Self>> {
        let n_inc = (spec.n_points - 1).max(1);
        let half = n_inc.next_power_of_two();
        let size = 2 * half;
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|k| {
                let lag = if k <= half { k } else { size - k };
                Complex::new(fgn_autocov(spec.alpha, lag), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut row);
        let max_eig = row.iter().map(|c| c.re).fold(0.0, f64::max);
        if row.iter().any(|c| c.re < -1e-10 * max_eig) {
            return Ok(None);
        }
        let scale = spec.step.powf(spec.alpha) / size as f64;
        let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) * scale).sqrt()).collect();
        Ok(Some(Self { spec, inner: Inner::Circulant { sqrt_eig, fft } }))
    }

    fn dense(spec: FbmGridSpec) -> Result<Self> {
        let n = spec.n_points - 1;
        if n > MAX_DENSE_POINTS {
            return Err(Error::Resource(format!(
                "dense fBm factorisation limited to {MAX_DENSE_POINTS} points, grid needs {n}"
            )));
        }
        let a = spec.alpha;
        let t = |i: usize| (i + 1) as f64 * spec.step;
        let mut chol = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let cov = 0.5 * (t(i).powf(a) + t(j).powf(a) - (t(i) - t(j)).abs().powf(a));
                let mut s = cov;
                for k in 0..j {
                    s -= chol[i * n + k] * chol[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Resource(format!("fBm covariance not positive definite at row {i}")));
                    }
                    chol[i * n + i] = s.sqrt();
                } else {
                    chol[i * n + j] = s / chol[j * n + j];
                }
            }
        }
        Ok(Self { spec, inner: Inner::Dense { chol } })
    }

    /// Writes one path `B_α(0) = 0, B_α(η), …` into `out[..n_points]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], scratch: &mut FbmScratch) {
        let n = self.spec.n_points;
        let out = &mut out[..n];
        out[0] = 0.0;
        if n == 1 {
            return;
        }
        let step = self.spec.step;
        match &self.inner {
            Inner::Brownian => {
                let sd = step.sqrt();
                let mut acc = 0.0;
                for v in out[1..].iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    acc += sd * z;
                    *v = acc;
                }
            }
            Inner::Linear => {
                let z: f64 = rng.sample(StandardNormal);
                for (k, v) in out.iter_mut().enumerate() {
                    *v = k as f64 * step * z;
                }
            }
            Inner::Circulant { sqrt_eig, fft } => {
                let size = sqrt_eig.len();
                scratch.buf.resize(size, Complex::new(0.0, 0.0));
                for (b, &s) in scratch.buf.iter_mut().zip(sqrt_eig) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *b = Complex::new(s * re, s * im);
                }
                scratch.fft.resize(fft.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
                fft.process_with_scratch(&mut scratch.buf, &mut scratch.fft);
                let mut acc = 0.0;
                for (v, b) in out[1..].iter_mut().zip(&scratch.buf) {
                    acc += b.re;
                    *v = acc;
                }
            }
            Inner::Dense { chol } => {
                let m = n - 1;
                scratch.z.clear();
                scratch.z.extend((0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
                for i in 0..m {
                    let row = &chol[i * m..i * m + i + 1];
                    out[i + 1] = row.iter().zip(&scratch.z).map(|(l, z)| l * z).sum();
                }
            }
        }
    }
}

/// One path on `spec`'s grid from a dedicated seed.
pub fn sample_fbm(spec: &FbmGridSpec, seed: u64) -> Result<Vec<f64>> {
    let sampler = FbmSampler::new(*spec)?;
    let mut rng = crate::seed::replicate_rng(seed, crate::seed::Stream::Fbm1, 0);
    let mut out = vec![0.0; spec.n_points];
    sampler.sample(&mut rng, &mut out, &mut FbmScratch::default());
    Ok(out)
}
