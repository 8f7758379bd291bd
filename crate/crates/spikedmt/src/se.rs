//! State evolution: the four-dimensional deterministic recursions that track
//! the overlaps of the AMP estimators as dimensions diverge.
//!
//! The channel map sends overlaps `q = (q1..q4)` to effective
//! signal-to-noise ratios
//!
//! ```text
//! g1 = (α2/Δm) q2 + (α3 α4 / (ρ Δt)) q3 q4
//! g2 = q1 / Δm
//! g3 = (α4 / (ρ Δt)) q1 q4
//! g4 = (α3 / (ρ Δt)) q1 q3
//! ```
//!
//! and one step applies the denoiser-specific scalar map componentwise:
//! `q' = g/(1+g)` for the Bayes denoiser, `q' = g / sqrt(G + g²)` for the
//! maximum-likelihood denoiser, where `G_k` is the channel map at `q = 1`
//! with `ρ` replaced by `ρ²`. The sequential variant runs the matrix-only
//! ML recursion first, then the tensor recursion with the matrix overlap
//! frozen.

use crate::model::ModelParams;
use serde::{Deserialize, Serialize};

/// The SE order parameters, one overlap per signal component.
pub type OverlapVector = [f64; 4];

/// Which SE recursion to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeKind {
    Bayes,
    /// Maximum-likelihood with loss weight rho.
    Ml { rho: f64 },
    /// Matrix-only ML recursion (components 3, 4 pinned at zero).
    SequentialStage1,
    /// Tensor recursion with the matrix overlap frozen at `q1_mat`;
    /// components 1, 2 are treated as constants (passed through unchanged).
    SequentialStage2 { q1_mat: f64 },
}

/// Effective SNRs `g(q)`; `rho` enters the tensor terms only.
pub fn channel_map(q: &OverlapVector, params: &ModelParams, rho: f64) -> [f64; 4] {
    let a = params;
    let t = rho * a.delta_t;
    [
        a.alpha2 / a.delta_m * q[1] + a.alpha3 * a.alpha4 / t * q[2] * q[3],
        q[0] / a.delta_m,
        a.alpha4 / t * q[0] * q[3],
        a.alpha3 / t * q[0] * q[2],
    ]
}

#[inline]
fn f_bayes(g: f64) -> f64 {
    g / (1.0 + g)
}

#[inline]
fn f_ml(g: f64, gsq1: f64) -> f64 {
    g / (gsq1 + g * g).sqrt()
}

/// Channel map at `q = 1` with `rho` replaced by `rho²` — the constants in
/// the ML denominators.
fn ml_denominator_constants(params: &ModelParams, rho: f64) -> [f64; 4] {
    channel_map(&[1.0; 4], params, rho * rho)
}

/// One SE step.
pub fn se_step(q: &OverlapVector, kind: SeKind, params: &ModelParams) -> OverlapVector {
    match kind {
        SeKind::Bayes => {
            let g = channel_map(q, params, 1.0);
            [f_bayes(g[0]), f_bayes(g[1]), f_bayes(g[2]), f_bayes(g[3])]
        }
        SeKind::Ml { rho } => {
            let g = channel_map(q, params, rho);
            let gs = ml_denominator_constants(params, rho);
            [
                f_ml(g[0], gs[0]),
                f_ml(g[1], gs[1]),
                f_ml(g[2], gs[2]),
                f_ml(g[3], gs[3]),
            ]
        }
        SeKind::SequentialStage1 => {
            let g1 = params.alpha2 / params.delta_m * q[1];
            let g2 = q[0] / params.delta_m;
            [
                f_ml(g1, params.alpha2 / params.delta_m),
                f_ml(g2, 1.0 / params.delta_m),
                0.0,
                0.0,
            ]
        }
        SeKind::SequentialStage2 { q1_mat } => {
            let g3 = params.alpha4 / params.delta_t * q1_mat * q[3];
            let g4 = params.alpha3 / params.delta_t * q1_mat * q[2];
            [
                q[0],
                q[1],
                f_ml(g3, params.alpha4 / params.delta_t),
                f_ml(g4, params.alpha3 / params.delta_t),
            ]
        }
    }
}

/// Outcome of a fixed-point iteration.
#[derive(Debug, Clone)]
pub struct SeRun {
    pub fixed_point: OverlapVector,
    pub trace: Vec<OverlapVector>,
    pub converged: bool,
    pub iterations: usize,
}

/// Iterate `se_step` until the sup-norm change drops below `tol`.
///
/// Non-convergence within `max_iters` is not an error: near thresholds the
/// iteration slows down critically, so the last iterate is returned with
/// `converged = false`.
pub fn run_se(
    q0: &OverlapVector,
    kind: SeKind,
    params: &ModelParams,
    tol: f64,
    max_iters: usize,
) -> SeRun {
    let mut q = *q0;
    let mut trace = Vec::with_capacity(max_iters.min(1024) + 1);
    trace.push(q);
    for it in 1..=max_iters {
        let next = se_step(&q, kind, params);
        let delta = q
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        // keep the trace bounded for very long runs; the head is what plots use
        if trace.len() < 100_000 {
            trace.push(q);
        }
        if delta < tol {
            return SeRun {
                fixed_point: q,
                trace,
                converged: true,
                iterations: it,
            };
        }
    }
    SeRun {
        fixed_point: q,
        trace,
        converged: false,
        iterations: max_iters,
    }
}

/// Run SE for exactly `t_max` steps, returning the whole trajectory
/// (`t_max + 1` entries). Used to compare with finite-size AMP iterates.
pub fn se_trajectory(
    q0: &OverlapVector,
    kind: SeKind,
    params: &ModelParams,
    t_max: usize,
) -> Vec<OverlapVector> {
    let mut out = Vec::with_capacity(t_max + 1);
    let mut q = *q0;
    out.push(q);
    for _ in 0..t_max {
        q = se_step(&q, kind, params);
        out.push(q);
    }
    out
}

/// Derivative of the scalar denoiser map at the channel output, per
/// component.
pub(crate) fn denoiser_slopes(q: &OverlapVector, kind: SeKind, params: &ModelParams) -> [f64; 4] {
    match kind {
        SeKind::Bayes => {
            let g = channel_map(q, params, 1.0);
            [
                (1.0 + g[0]).powi(-2),
                (1.0 + g[1]).powi(-2),
                (1.0 + g[2]).powi(-2),
                (1.0 + g[3]).powi(-2),
            ]
        }
        SeKind::Ml { rho } => {
            let g = channel_map(q, params, rho);
            let gs = ml_denominator_constants(params, rho);
            let mut out = [0.0; 4];
            for k in 0..4 {
                out[k] = gs[k] * (gs[k] + g[k] * g[k]).powf(-1.5);
            }
            out
        }
        SeKind::SequentialStage1 => {
            let g1 = params.alpha2 / params.delta_m * q[1];
            let g2 = q[0] / params.delta_m;
            let gs1 = params.alpha2 / params.delta_m;
            let gs2 = 1.0 / params.delta_m;
            [
                gs1 * (gs1 + g1 * g1).powf(-1.5),
                gs2 * (gs2 + g2 * g2).powf(-1.5),
                0.0,
                0.0,
            ]
        }
        SeKind::SequentialStage2 { q1_mat } => {
            let g3 = params.alpha4 / params.delta_t * q1_mat * q[3];
            let g4 = params.alpha3 / params.delta_t * q1_mat * q[2];
            let gs3 = params.alpha4 / params.delta_t;
            let gs4 = params.alpha3 / params.delta_t;
            [
                0.0,
                0.0,
                gs3 * (gs3 + g3 * g3).powf(-1.5),
                gs4 * (gs4 + g4 * g4).powf(-1.5),
            ]
        }
    }
}

/// Jacobian `J_kl = ∂ q'_k / ∂ q_l` of one SE step: the denoiser slope times
/// the linearized channel map. Spectral radius below one means the point is
/// locally stable.
pub fn se_jacobian(q: &OverlapVector, kind: SeKind, params: &ModelParams) -> [[f64; 4]; 4] {
    let a = params;
    let rho = match kind {
        SeKind::Ml { rho } => rho,
        _ => 1.0,
    };
    let t = rho * a.delta_t;
    let df = denoiser_slopes(q, kind, params);
    let mut j = [[0.0; 4]; 4];
    match kind {
        SeKind::Bayes | SeKind::Ml { .. } => {
            let c34 = a.alpha3 * a.alpha4 / t;
            // dg rows: channel-map linearization with the fixed-point cross terms
            j[0][1] = df[0] * a.alpha2 / a.delta_m;
            j[0][2] = df[0] * c34 * q[3];
            j[0][3] = df[0] * c34 * q[2];
            j[1][0] = df[1] / a.delta_m;
            j[2][0] = df[2] * a.alpha4 / t * q[3];
            j[2][3] = df[2] * a.alpha4 / t * q[0];
            j[3][0] = df[3] * a.alpha3 / t * q[2];
            j[3][2] = df[3] * a.alpha3 / t * q[0];
        }
        SeKind::SequentialStage1 => {
            j[0][1] = df[0] * a.alpha2 / a.delta_m;
            j[1][0] = df[1] / a.delta_m;
        }
        SeKind::SequentialStage2 { q1_mat } => {
            // components 1, 2 are parameters here, not state
            j[2][3] = df[2] * a.alpha4 / a.delta_t * q1_mat;
            j[3][2] = df[3] * a.alpha3 / a.delta_t * q1_mat;
        }
    }
    j
}

/// Spectral radius of a 4x4 matrix by Gelfand iteration with repeated
/// squaring: `ρ = lim ‖M^(2^s)‖_F^(1/2^s)`. Handles complex eigenvalues and
/// the imprimitive (period-two) matrices that arise at the null fixed point.
pub fn spectral_radius(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut log_acc = 0.0f64;
    let mut weight = 1.0f64;
    for _ in 0..64 {
        let norm: f64 = a
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { 0.0 } else { f64::INFINITY };
        }
        // with A_{s+1} = (A_s/||A_s||)^2: log rho = sum_s 2^{-s} log ||A_s||
        log_acc += weight * norm.ln();
        weight *= 0.5;
        let mut b = [[0.0f64; 4]; 4];
        let inv = 1.0 / norm;
        for i in 0..4 {
            for k in 0..4 {
                let v = a[i][k] * inv;
                if v != 0.0 {
                    for l in 0..4 {
                        b[i][l] += v * a[k][l] * inv;
                    }
                }
            }
        }
        a = b;
    }
    log_acc.exp()
}
