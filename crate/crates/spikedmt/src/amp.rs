//! Approximate message passing for the spiked matrix-tensor model.
//!
//! One iteration computes, for each component `k`, an Onsager coefficient
//! `r_k` (the memory correction), a corrected field `b_k` combining the
//! matrix and tensor channels, a noise parameter `A_k`, and applies the
//! denoiser:
//!
//! - Bayes: `w' = b/(1+A)`, `σ' = 1/(1+A)`;
//! - maximum likelihood: `w' = sqrt(n_k) b/|b|`, `σ' = sqrt(n_k)/|b|`
//!   (the leading-order divergence of the sphere projection).
//!
//! The tensor contributes to components 1, 3, 4 with weight `1/(ρ Δt)`; the
//! matrix to components 1, 2 with weight `1/Δm`. All three tensor
//! contractions of an iteration run in a single fused pass over the
//! observation.

use crate::model::{dot, norm2, EstimateSet, Normalization, PlantedInstance, signed_overlaps};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// The two denoiser families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenoiserKind {
    /// Posterior-mean denoiser; the channel weight is pinned at `rho = 1`.
    Bayes,
    /// Sphere-projection denoiser with arbitrary loss weight.
    MaximumLikelihood,
}

/// Convergence test applied between successive iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceMode {
    /// Max change of the truth overlaps (needs the planted signals).
    OverlapChange,
    /// Max cosine distance between successive iterates (truth-free).
    IterateCosine,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AmpConfig {
    pub denoiser: DenoiserKind,
    pub rho: f64,
    pub max_iters: usize,
    /// Zero disables the convergence test: exactly `max_iters` steps run.
    pub convergence_tol: f64,
    pub convergence: ConvergenceMode,
    /// Damping in [0, 1): blend with the previous iterate before
    /// renormalizing. Only meaningful for the ML denoiser; 0 is the exact
    /// iteration.
    pub damping: f64,
    /// Test hook: disable the Onsager memory term. Tracking of state
    /// evolution collapses without it.
    pub onsager: bool,
}

impl AmpConfig {
    pub fn bayes(max_iters: usize, convergence_tol: f64) -> Self {
        Self {
            denoiser: DenoiserKind::Bayes,
            rho: 1.0,
            max_iters,
            convergence_tol,
            convergence: ConvergenceMode::OverlapChange,
            damping: 0.0,
            onsager: true,
        }
    }

    pub fn ml(rho: f64, max_iters: usize, convergence_tol: f64) -> Self {
        Self {
            denoiser: DenoiserKind::MaximumLikelihood,
            rho,
            max_iters,
            convergence_tol,
            convergence: ConvergenceMode::OverlapChange,
            damping: 0.0,
            onsager: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.denoiser == DenoiserKind::Bayes && self.rho != 1.0 {
            return Err(Error::Config(format!(
                "the Bayes denoiser requires rho = 1, got {}",
                self.rho
            )));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if self.rho <= 0.0 || !self.rho.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Iteration state: current and previous estimates plus the denoiser
/// variances.
#[derive(Debug, Clone)]
pub struct AmpState {
    pub w_hat: EstimateSet,
    pub w_prev: EstimateSet,
    pub sigma: [f64; 4],
    pub iteration: usize,
}

impl AmpState {
    /// Initial conditions: given estimates, zero previous iterate, zero
    /// variances, so the first step carries no Onsager correction.
    pub fn init(init: EstimateSet) -> Self {
        let dims = init.dims();
        Self {
            w_hat: init,
            w_prev: EstimateSet {
                w: [
                    vec![0.0; dims[0]],
                    vec![0.0; dims[1]],
                    vec![0.0; dims[2]],
                    vec![0.0; dims[3]],
                ],
                normalization: Normalization::Free,
            },
            sigma: [0.0; 4],
            iteration: 0,
        }
    }
}

/// Per-iteration record of a run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AmpTrace {
    /// Signed truth overlaps per iteration (entry 0 is the initialization).
    pub overlaps: Vec<[f64; 4]>,
    /// Denoiser variances per iteration.
    pub sigmas: Vec<[f64; 4]>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StepMode {
    /// Both channels, all four components.
    Full,
    /// Matrix channel only; components 2, 3 (x, y) are left untouched.
    MatrixOnly,
    /// Tensor channel only with component 0 (u) frozen: sequential stage 2.
    TensorFrozenU,
}

fn denoise(
    b: Vec<f64>,
    a: f64,
    nk: usize,
    config: &AmpConfig,
    old: &[f64],
) -> (Vec<f64>, f64) {
    match config.denoiser {
        DenoiserKind::Bayes => {
            let s = 1.0 / (1.0 + a);
            (b.iter().map(|&v| v * s).collect(), s)
        }
        DenoiserKind::MaximumLikelihood => {
            let sqrt_n = (nk as f64).sqrt();
            let nb = norm2(&b).sqrt();
            let scale = sqrt_n / nb;
            let mut w: Vec<f64> = b.iter().map(|&v| v * scale).collect();
            if config.damping > 0.0 && !old.is_empty() {
                let g = config.damping;
                for (wi, &oi) in w.iter_mut().zip(old) {
                    *wi = (1.0 - g) * *wi + g * oi;
                }
                let renorm = (nk as f64 / norm2(&w)).sqrt();
                for wi in w.iter_mut() {
                    *wi *= renorm;
                }
            }
            (w, sqrt_n / nb)
        }
    }
}

fn amp_step_impl(
    state: &AmpState,
    instance: &PlantedInstance,
    config: &AmpConfig,
    mode: StepMode,
) -> Result<AmpState> {
    let p = &instance.params;
    let n = instance.dims.n;
    let n1 = n[0] as f64;
    let alphas = p.alphas();
    let w = &state.w_hat.w;
    let wp = &state.w_prev.w;
    let sg = &state.sigma;

    let rho = match config.denoiser {
        DenoiserKind::Bayes => 1.0,
        DenoiserKind::MaximumLikelihood => config.rho,
    };
    let wt = 1.0 / (rho * p.delta_t * n1); // tensor field weight
    let wm = 1.0 / (p.delta_m * n1.sqrt()); // matrix field weight

    // cross-iteration correlations entering the Onsager terms
    let cross = |k: usize| dot(&w[k], &wp[k]) / n[k] as f64;
    let norms = [norm2(&w[0]), norm2(&w[1]), norm2(&w[2]), norm2(&w[3])];

    let mut r = [0.0f64; 4];
    if config.onsager {
        match mode {
            StepMode::Full => {
                let (c1, c3, c4) = (cross(0), cross(2), cross(3));
                r[0] = alphas[1] / p.delta_m * sg[1]
                    + alphas[2] * alphas[3] / (rho * p.delta_t) * (c3 * sg[3] + c4 * sg[2]);
                r[1] = sg[0] / p.delta_m;
                r[2] = alphas[3] / (rho * p.delta_t) * (c1 * sg[3] + c4 * sg[0]);
                r[3] = alphas[2] / (rho * p.delta_t) * (c1 * sg[2] + c3 * sg[0]);
            }
            StepMode::MatrixOnly => {
                r[0] = alphas[1] / p.delta_m * sg[1];
                r[1] = sg[0] / p.delta_m;
            }
            StepMode::TensorFrozenU => {
                // u is pinned: its cross-correlation is 1 and sigma_1 = 0
                r[2] = alphas[3] / (rho * p.delta_t) * sg[3];
                r[3] = alphas[2] / (rho * p.delta_t) * sg[2];
            }
        }
    }

    let mut next = state.clone();
    next.iteration = state.iteration + 1;

    let tensor_fields = if mode == StepMode::MatrixOnly {
        None
    } else {
        Some(instance.tensor.contract_amp(&w[0], &w[2], &w[3])?)
    };

    // component 0 (u)
    if mode != StepMode::TensorFrozenU {
        let mut b = vec![0.0f64; n[0]];
        if mode == StepMode::Full || mode == StepMode::MatrixOnly {
            let mv = instance.matrix.matvec(&w[1])?;
            for (bi, &m) in b.iter_mut().zip(&mv) {
                *bi += wm * m;
            }
        }
        if let Some((t1, _, _)) = &tensor_fields {
            for (bi, &t) in b.iter_mut().zip(t1) {
                *bi += wt * t;
            }
        }
        for (bi, &prev) in b.iter_mut().zip(&wp[0]) {
            *bi -= r[0] * prev;
        }
        let a = match mode {
            StepMode::Full => {
                norms[1] / (p.delta_m * n1) + norms[2] * norms[3] / (rho * p.delta_t * n1 * n1)
            }
            StepMode::MatrixOnly => norms[1] / (p.delta_m * n1),
            StepMode::TensorFrozenU => unreachable!(),
        };
        let (wn, s) = denoise(b, a, n[0], config, &w[0]);
        next.w_prev.w[0] = std::mem::replace(&mut next.w_hat.w[0], wn);
        next.sigma[0] = s;
    }

    // component 1 (v)
    if mode != StepMode::TensorFrozenU {
        let mu = instance.matrix.matvec_t(&w[0])?;
        let mut b: Vec<f64> = mu.iter().map(|&m| wm * m).collect();
        for (bi, &prev) in b.iter_mut().zip(&wp[1]) {
            *bi -= r[1] * prev;
        }
        let a = norms[0] / (p.delta_m * n1);
        let (wn, s) = denoise(b, a, n[1], config, &w[1]);
        next.w_prev.w[1] = std::mem::replace(&mut next.w_hat.w[1], wn);
        next.sigma[1] = s;
    }

    // components 2, 3 (x, y)
    if mode != StepMode::MatrixOnly {
        let (_, t3, t4) = tensor_fields.as_ref().unwrap();
        for (k, t) in [(2usize, t3), (3usize, t4)] {
            let mut b: Vec<f64> = t.iter().map(|&v| wt * v).collect();
            for (bi, &prev) in b.iter_mut().zip(&wp[k]) {
                *bi -= r[k] * prev;
            }
            let other = if k == 2 { norms[3] } else { norms[2] };
            let a = norms[0] * other / (rho * p.delta_t * n1 * n1);
            let (wn, s) = denoise(b, a, n[k], config, &w[k]);
            next.w_prev.w[k] = std::mem::replace(&mut next.w_hat.w[k], wn);
            next.sigma[k] = s;
        }
    }

    next.w_hat.normalization = match config.denoiser {
        DenoiserKind::Bayes => Normalization::Free,
        DenoiserKind::MaximumLikelihood => Normalization::Spherical,
    };

    for k in 0..4 {
        if !next.sigma[k].is_finite() || next.w_hat.w[k].iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iteration: next.iteration,
                trace: AmpTrace::default(),
            });
        }
    }
    Ok(next)
}

/// One full AMP step (both channels).
pub fn amp_step(
    state: &AmpState,
    instance: &PlantedInstance,
    config: &AmpConfig,
) -> Result<AmpState> {
    config.validate()?;
    amp_step_impl(state, instance, config, StepMode::Full)
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let na = norm2(a).sqrt();
    let nb = norm2(b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - (dot(a, b) / (na * nb)).abs()
}

fn converged(
    config: &AmpConfig,
    prev_q: &[f64; 4],
    cur_q: &[f64; 4],
    state: &AmpState,
) -> bool {
    if config.convergence_tol <= 0.0 {
        return false;
    }
    match config.convergence {
        ConvergenceMode::OverlapChange => {
            prev_q
                .iter()
                .zip(cur_q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                < config.convergence_tol
        }
        ConvergenceMode::IterateCosine => (0..4)
            .map(|k| cosine_distance(&state.w_hat.w[k], &state.w_prev.w[k]))
            .fold(0.0, f64::max)
            .lt(&config.convergence_tol),
    }
}

fn run_loop(
    mut state: AmpState,
    instance: &PlantedInstance,
    config: &AmpConfig,
    mode: StepMode,
) -> Result<(AmpState, AmpTrace)> {
    let mut trace = AmpTrace {
        overlaps: vec![signed_overlaps(&state.w_hat, &instance.signals)],
        sigmas: vec![state.sigma],
        converged: false,
    };
    for _ in 0..config.max_iters {
        let prev_q = *trace.overlaps.last().unwrap();
        state = match amp_step_impl(&state, instance, config, mode) {
            Ok(s) => s,
            Err(Error::Diverged { iteration, .. }) => {
                return Err(Error::Diverged { iteration, trace });
            }
            Err(e) => return Err(e),
        };
        let q = signed_overlaps(&state.w_hat, &instance.signals);
        trace.overlaps.push(q);
        trace.sigmas.push(state.sigma);
        if converged(config, &prev_q, &q, &state) {
            trace.converged = true;
            break;
        }
    }
    Ok((state, trace))
}

/// Run AMP from the given initialization until the overlap (or iterate)
/// change drops below tolerance, or `max_iters` steps elapse.
pub fn run_amp(
    instance: &PlantedInstance,
    init: EstimateSet,
    config: &AmpConfig,
) -> Result<(EstimateSet, AmpTrace)> {
    config.validate()?;
    let (state, trace) = run_loop(AmpState::init(init), instance, config, StepMode::Full)?;
    Ok((state.w_hat, trace))
}

/// The sequential (decimated) ML-AMP: a matrix-only ML-AMP recovers (u, v)
/// first; then, with u frozen at the stage-1 output and its Onsager
/// contribution removed, a tensor-only ML-AMP recovers (x, y). Returns the
/// combined estimates and both stage traces.
pub fn run_sequential_ml(
    instance: &PlantedInstance,
    init: EstimateSet,
    config: &AmpConfig,
) -> Result<(EstimateSet, AmpTrace, AmpTrace)> {
    if config.denoiser != DenoiserKind::MaximumLikelihood {
        return Err(Error::Config(
            "the sequential iteration is defined for the ML denoiser".into(),
        ));
    }
    config.validate()?;
    let (stage1, trace1) = run_loop(AmpState::init(init), instance, config, StepMode::MatrixOnly)?;

    // stage 2: u pinned at the stage-1 estimate, fresh memory
    let (stage2, trace2) = run_loop(
        AmpState::init(stage1.w_hat),
        instance,
        config,
        StepMode::TensorFrozenU,
    )?;
    Ok((stage2.w_hat, trace1, trace2))
}

/// Tangential gradient norms of the maximum-likelihood loss at the given
/// spherical estimates, one per component, each divided by `sqrt(n_k)`.
///
/// The loss is `L = L_m + L_t/ρ` with
/// `L_m = |Y_m − u vᵀ/sqrt(n1)|² / (2Δm)` and
/// `L_t = |Y_t − u⊗x⊗y/n1|² / (2Δt)`; the radial component is projected out
/// (spherical constraint), so converged ML-AMP estimates make all four
/// values vanish.
pub fn gd_stationarity_residual(
    instance: &PlantedInstance,
    est: &EstimateSet,
    rho: f64,
) -> Result<[f64; 4]> {
    let p = &instance.params;
    let n = instance.dims.n;
    let n1 = n[0] as f64;
    let w = &est.w;
    let norms = [norm2(&w[0]), norm2(&w[1]), norm2(&w[2]), norm2(&w[3])];

    let (t1, t3, t4) = instance.tensor.contract_amp(&w[0], &w[2], &w[3])?;
    let mv = instance.matrix.matvec(&w[1])?;
    let mu = instance.matrix.matvec_t(&w[0])?;

    let im = 1.0 / p.delta_m;
    let it = 1.0 / (rho * p.delta_t);

    let mut grads: [Vec<f64>; 4] = Default::default();
    grads[0] = (0..n[0])
        .map(|i| {
            im * (-mv[i] / n1.sqrt() + norms[1] / n1 * w[0][i])
                + it * (-t1[i] / n1 + norms[2] * norms[3] / (n1 * n1) * w[0][i])
        })
        .collect();
    grads[1] = (0..n[1])
        .map(|j| im * (-mu[j] / n1.sqrt() + norms[0] / n1 * w[1][j]))
        .collect();
    grads[2] = (0..n[2])
        .map(|j| it * (-t3[j] / n1 + norms[0] * norms[3] / (n1 * n1) * w[2][j]))
        .collect();
    grads[3] = (0..n[3])
        .map(|k| it * (-t4[k] / n1 + norms[0] * norms[2] / (n1 * n1) * w[3][k]))
        .collect();

    let mut out = [0.0f64; 4];
    for k in 0..4 {
        let radial = dot(&grads[k], &w[k]) / norms[k];
        let tang2: f64 = grads[k]
            .iter()
            .zip(&w[k])
            .map(|(&g, &wi)| {
                let t = g - radial * wi;
                t * t
            })
            .sum();
        out[k] = (tang2 / n[k] as f64).sqrt();
    }
    Ok(out)
}
