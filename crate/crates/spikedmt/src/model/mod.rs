//! Model definition: parameters, planted signals, noisy observations, and the
//! metrics every estimator is scored with.
//!
//! Conventions used throughout the crate:
//! - components are indexed `0..4` for the signals `(u, v, x, y)`;
//! - aspect ratios are `alpha_k = n_k / n1` with `alpha_1 = 1` fixed;
//! - planted signals and spherical estimates carry norm `sqrt(n_k)`;
//! - the matrix observation is `Y_m = sqrt(delta_m) Z + u vᵀ / sqrt(n1)`,
//!   the tensor observation is `Y_t = sqrt(delta_t) Z + u ⊗ x ⊗ y / n1`.

mod tensor;

pub use tensor::{TensorBackend, TensorObservation};

use crate::rng::{level1, level2, standard_normal, stream_prefix, Stream};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default memory budget for dense tensor allocations: 4 GiB.
pub const DEFAULT_MEM_BUDGET: u64 = 4 << 30;

/// Noise levels, aspect ratios and the loss weight of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Matrix channel noise level.
    pub delta_m: f64,
    /// Tensor channel noise level.
    pub delta_t: f64,
    /// Aspect ratio n2/n1.
    pub alpha2: f64,
    /// Aspect ratio n3/n1.
    pub alpha3: f64,
    /// Aspect ratio n4/n1.
    pub alpha4: f64,
    /// Weight of the tensor term in the maximum-likelihood loss.
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_rho() -> f64 {
    1.0
}

impl ModelParams {
    /// Strictly positive noise levels and ratios, `rho = 1`.
    pub fn new(delta_m: f64, delta_t: f64, alphas: [f64; 3]) -> Result<Self> {
        let p = Self {
            delta_m,
            delta_t,
            alpha2: alphas[0],
            alpha3: alphas[1],
            alpha4: alphas[2],
            rho: 1.0,
        };
        p.validate(false)?;
        Ok(p)
    }

    /// Same, with an explicit loss weight.
    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate(false)?;
        Ok(self)
    }

    /// Test-mode constructor allowing zero noise levels, used by oracle tests
    /// on pure rank-one observations. Zero noise is outside the model's
    /// parameter space proper; estimator and phase routines assume positive
    /// noise.
    pub fn new_test_mode(delta_m: f64, delta_t: f64, alphas: [f64; 3]) -> Result<Self> {
        let p = Self {
            delta_m,
            delta_t,
            alpha2: alphas[0],
            alpha3: alphas[1],
            alpha4: alphas[2],
            rho: 1.0,
        };
        p.validate(true)?;
        Ok(p)
    }

    fn validate(&self, allow_zero_noise: bool) -> Result<()> {
        let fields = [
            ("delta_m", self.delta_m),
            ("delta_t", self.delta_t),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
            ("alpha4", self.alpha4),
            ("rho", self.rho),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
            let zero_ok = allow_zero_noise && (name == "delta_m" || name == "delta_t");
            if v < 0.0 || (v == 0.0 && !zero_ok) {
                return Err(Error::Config(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `[1, alpha2, alpha3, alpha4]`.
    pub fn alphas(&self) -> [f64; 4] {
        [1.0, self.alpha2, self.alpha3, self.alpha4]
    }
}

/// Concrete sizes `n1..n4`, rounded from the aspect ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub n: [usize; 4],
}

impl Dimensions {
    /// `n_k = round(alpha_k * n1)`; every size must come out at least 2.
    pub fn from_params(params: &ModelParams, n1: usize) -> Result<Self> {
        if n1 < 2 {
            return Err(Error::Config(format!("n1 must be at least 2, got {n1}")));
        }
        let alphas = params.alphas();
        let mut n = [0usize; 4];
        for k in 0..4 {
            let nk = (alphas[k] * n1 as f64).round() as usize;
            if nk < 2 {
                return Err(Error::Config(format!(
                    "dimension {k} rounds to {nk} (< 2) from alpha {} at n1 = {n1}",
                    alphas[k]
                )));
            }
            n[k] = nk;
        }
        Ok(Self { n })
    }

    pub fn n1(&self) -> usize {
        self.n[0]
    }

    /// Realized ratios `n_k / n1`, reported back in outputs so rounding never
    /// drifts silently.
    pub fn realized_ratios(&self) -> [f64; 4] {
        let n1 = self.n[0] as f64;
        [
            1.0,
            self.n[1] as f64 / n1,
            self.n[2] as f64 / n1,
            self.n[3] as f64 / n1,
        ]
    }
}

/// The planted signals, each of norm exactly `sqrt(n_k)`.
#[derive(Debug, Clone)]
pub struct PlantedSignals {
    pub w: [Vec<f64>; 4],
}

impl PlantedSignals {
    pub fn dims(&self) -> [usize; 4] {
        [
            self.w[0].len(),
            self.w[1].len(),
            self.w[2].len(),
            self.w[3].len(),
        ]
    }
}

/// Draw the planted signals: i.i.d. standard Gaussians per coordinate,
/// projected onto the sphere of radius `sqrt(n_k)`. Deterministic in `seed`.
pub fn sample_planted(params: &ModelParams, n1: usize, seed: u64) -> Result<PlantedSignals> {
    let dims = Dimensions::from_params(params, n1)?;
    let mut w: [Vec<f64>; 4] = Default::default();
    for k in 0..4 {
        let prefix = stream_prefix(seed, Stream::Signal(k as u8));
        let mut v: Vec<f64> = (0..dims.n[k])
            .map(|i| standard_normal(level1(prefix, i as u64)))
            .collect();
        rescale_to_sphere(&mut v);
        w[k] = v;
    }
    Ok(PlantedSignals { w })
}

/// Scale a vector to norm `sqrt(len)`.
pub fn rescale_to_sphere(v: &mut [f64]) {
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    let scale = ((v.len() as f64) / norm2).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}

/// Dense matrix observation `Y_m`, row-major `n1 x n2`.
#[derive(Debug, Clone)]
pub struct MatrixObservation {
    pub n1: usize,
    pub n2: usize,
    pub data: Vec<f64>,
}

impl MatrixObservation {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n2 + j]
    }

    /// `Y_m v` (length n1).
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n2 {
            return Err(Error::DimensionMismatch {
                what: "matrix-vector product",
                expected: self.n2,
                got: v.len(),
            });
        }
        Ok((0..self.n1)
            .map(|i| {
                let row = &self.data[i * self.n2..(i + 1) * self.n2];
                dot(row, v)
            })
            .collect())
    }

    /// `Y_mᵀ u` (length n2).
    pub fn matvec_t(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n1 {
            return Err(Error::DimensionMismatch {
                what: "transposed matrix-vector product",
                expected: self.n1,
                got: u.len(),
            });
        }
        let mut out = vec![0.0; self.n2];
        for (i, &ui) in u.iter().enumerate() {
            let row = &self.data[i * self.n2..(i + 1) * self.n2];
            for (o, &r) in out.iter_mut().zip(row) {
                *o += ui * r;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four-way unrolled to break the fma dependency chain; fixed grouping
    // keeps the result identical across runs and builds
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let o = 4 * c;
        acc[0] += a[o] * b[o];
        acc[1] += a[o + 1] * b[o + 1];
        acc[2] += a[o + 2] * b[o + 2];
        acc[3] += a[o + 3] * b[o + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Generate the noisy observations for given signals. The tensor backend is
/// chosen by the caller; dense requests are rejected when they would exceed
/// `mem_budget` bytes (default 4 GiB).
pub fn generate_observations(
    signals: &PlantedSignals,
    params: &ModelParams,
    seed: u64,
    backend: TensorBackend,
    mem_budget: Option<u64>,
) -> Result<(MatrixObservation, TensorObservation)> {
    let [n1, n2, _, _] = signals.dims();
    let budget = mem_budget.unwrap_or(DEFAULT_MEM_BUDGET);

    let sqrt_dm = params.delta_m.sqrt();
    let inv_sqrt_n1 = 1.0 / (n1 as f64).sqrt();
    let prefix = stream_prefix(seed, Stream::MatrixNoise);
    let mut data = vec![0.0f64; n1 * n2];
    for i in 0..n1 {
        let hi = level1(prefix, i as u64);
        let ui = signals.w[0][i];
        let row = &mut data[i * n2..(i + 1) * n2];
        for (j, slot) in row.iter_mut().enumerate() {
            let z = standard_normal(level2(hi, j as u64));
            *slot = sqrt_dm * z + ui * signals.w[1][j] * inv_sqrt_n1;
        }
    }
    let matrix = MatrixObservation { n1, n2, data };

    let tensor = TensorObservation::generate(
        seed,
        params.delta_t,
        &signals.w[0],
        &signals.w[2],
        &signals.w[3],
        backend,
        budget,
    )?;
    Ok((matrix, tensor))
}

/// A full planted instance: parameters, truth, and both observations.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub params: ModelParams,
    pub dims: Dimensions,
    pub signals: PlantedSignals,
    pub matrix: MatrixObservation,
    pub tensor: TensorObservation,
    pub seed: u64,
}

impl PlantedInstance {
    pub fn generate(
        params: &ModelParams,
        n1: usize,
        seed: u64,
        backend: TensorBackend,
        mem_budget: Option<u64>,
    ) -> Result<Self> {
        let dims = Dimensions::from_params(params, n1)?;
        let signals = sample_planted(params, n1, seed)?;
        let (matrix, tensor) = generate_observations(&signals, params, seed, backend, mem_budget)?;
        Ok(Self {
            params: *params,
            dims,
            signals,
            matrix,
            tensor,
            seed,
        })
    }
}

/// Normalization convention of an estimate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Every component has norm `sqrt(n_k)` (within 1e-10 relative).
    Spherical,
    /// No constraint.
    Free,
}

/// Four estimator vectors, one per signal component.
#[derive(Debug, Clone)]
pub struct EstimateSet {
    pub w: [Vec<f64>; 4],
    pub normalization: Normalization,
}

impl EstimateSet {
    pub fn dims(&self) -> [usize; 4] {
        [
            self.w[0].len(),
            self.w[1].len(),
            self.w[2].len(),
            self.w[3].len(),
        ]
    }

    /// Zero estimates (the uninformative AMP starting point).
    pub fn zeros(dims: &Dimensions) -> Self {
        Self {
            w: [
                vec![0.0; dims.n[0]],
                vec![0.0; dims.n[1]],
                vec![0.0; dims.n[2]],
                vec![0.0; dims.n[3]],
            ],
            normalization: Normalization::Free,
        }
    }

    /// Random spherical vectors, i.i.d. Gaussian coordinates projected to
    /// norm `sqrt(n_k)`.
    pub fn random_spherical(dims: &Dimensions, seed: u64) -> Self {
        let mut w: [Vec<f64>; 4] = Default::default();
        for k in 0..4 {
            let prefix = stream_prefix(seed, Stream::Init(k as u8));
            let mut v: Vec<f64> = (0..dims.n[k])
                .map(|i| standard_normal(level1(prefix, i as u64)))
                .collect();
            rescale_to_sphere(&mut v);
            w[k] = v;
        }
        Self {
            w,
            normalization: Normalization::Spherical,
        }
    }

    /// Truth plus spherical Gaussian perturbation hitting the target overlap
    /// exactly: `w = q w* + sqrt(1-q²) ξ` with `ξ ⟂ w*`, `|ξ| = sqrt(n_k)`.
    pub fn informative(truth: &PlantedSignals, target_overlap: [f64; 4], seed: u64) -> Self {
        let mut w: [Vec<f64>; 4] = Default::default();
        for k in 0..4 {
            let t = &truth.w[k];
            let n = t.len();
            let prefix = stream_prefix(seed, Stream::Init(k as u8));
            let mut xi: Vec<f64> = (0..n)
                .map(|i| standard_normal(level1(prefix, i as u64)))
                .collect();
            // project out the truth direction, then rescale
            let c = dot(&xi, t) / norm2(t);
            for (x, &ti) in xi.iter_mut().zip(t) {
                *x -= c * ti;
            }
            rescale_to_sphere(&mut xi);
            let q = target_overlap[k].clamp(-1.0, 1.0);
            let s = (1.0 - q * q).sqrt();
            w[k] = t
                .iter()
                .zip(&xi)
                .map(|(&ti, &xii)| q * ti + s * xii)
                .collect();
        }
        Self {
            w,
            normalization: Normalization::Spherical,
        }
    }

    /// Truth plus perturbation with the posterior-mean magnitude convention:
    /// `w = q w* + sqrt(q(1-q)) ξ` with `ξ ⟂ w*`, `|ξ| = sqrt(n_k)`, so both
    /// `<w, w*>/n = q` and `|w|²/n = q` hold exactly. This is the
    /// initialization whose Bayes-AMP run starts on the Bayes-SE trajectory
    /// (the spherical variant starts the ML one).
    pub fn informative_bayes(truth: &PlantedSignals, target_overlap: [f64; 4], seed: u64) -> Self {
        let mut est = Self::informative(truth, target_overlap, seed);
        for k in 0..4 {
            let q = target_overlap[k].clamp(0.0, 1.0);
            let t = &truth.w[k];
            let xi_scale = (q - q * q).max(0.0).sqrt();
            let prev_scale = (1.0 - q * q).sqrt();
            // rebuild w = q t + xi_scale * xi from the spherical variant
            // w_sph = q t + prev_scale * xi
            for (wi, &ti) in est.w[k].iter_mut().zip(t) {
                let xi = if prev_scale > 0.0 {
                    (*wi - q * ti) / prev_scale
                } else {
                    0.0
                };
                *wi = q * ti + xi_scale * xi;
            }
        }
        est.normalization = Normalization::Free;
        est
    }

    /// Check the declared spherical normalization within 1e-10 relative.
    pub fn spherical_ok(&self) -> bool {
        self.w.iter().all(|v| {
            let n = v.len() as f64;
            (norm2(v) / n - 1.0).abs() < 1e-10
        })
    }
}

/// Overlaps and per-coordinate mean square errors against the truth.
///
/// Overlaps are sign-aligned: AMP and spectral estimates carry a global sign
/// ambiguity per spike, so each component's sign is chosen to minimize the
/// error, and `overlaps[k] = |<w_k, w*_k>| / n_k`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Metrics {
    pub overlaps: [f64; 4],
    pub mse_per_coord: [f64; 4],
}

pub fn overlaps_and_mse(est: &EstimateSet, truth: &PlantedSignals) -> Result<Metrics> {
    let mut overlaps = [0.0; 4];
    let mut mse = [0.0; 4];
    for k in 0..4 {
        let (w, t) = (&est.w[k], &truth.w[k]);
        if w.len() != t.len() {
            return Err(Error::DimensionMismatch {
                what: "estimate vs truth",
                expected: t.len(),
                got: w.len(),
            });
        }
        let n = t.len() as f64;
        let ip = dot(w, t);
        let sign = if ip < 0.0 { -1.0 } else { 1.0 };
        overlaps[k] = ip.abs() / n;
        let diff2: f64 = w
            .iter()
            .zip(t)
            .map(|(&wi, &ti)| {
                let d = wi - sign * ti;
                d * d
            })
            .sum();
        mse[k] = diff2 / n;
    }
    Ok(Metrics {
        overlaps,
        mse_per_coord: mse,
    })
}

/// Signed raw overlaps `<w_k, w*_k> / n_k`, used when tracing AMP against
/// state evolution.
pub fn signed_overlaps(est: &EstimateSet, truth: &PlantedSignals) -> [f64; 4] {
    let mut q = [0.0; 4];
    for k in 0..4 {
        q[k] = dot(&est.w[k], &truth.w[k]) / truth.w[k].len() as f64;
    }
    q
}
