//! Closed-form phase analysis: recovery thresholds, region classification,
//! fixed-point solving with stability, free energy, and spinodal lines.
//!
//! The parameter space splits into three regions. With
//! `δ_c = sqrt(α3 α4) (α2 − Δm²)/(α2 + Δm)`:
//!
//! - no recovery:            `Δm > sqrt(α2)`;
//! - matrix-only recovery:   `Δm < sqrt(α2)` and `Δt > δ_c`;
//! - matrix+tensor recovery: `Δt < δ_c`.
//!
//! The maximum-likelihood estimator obeys the same geometry with `α2`
//! replaced by the effective ratio `α̃2 ≤ α2`, so its regions are always at
//! least as bad. Matrix-and-tensor fixed points are found by reducing the SE
//! fixed-point system to a scalar residual in `q1` (Bayes) or `q1²` (ML) and
//! scanning (0, 1] with bisection refinement; spinodals are parameter values
//! where the residual acquires a double root.

use crate::model::ModelParams;
use crate::se::{
    run_se, se_jacobian, se_step, spectral_radius, OverlapVector, SeKind,
};
use serde::{Deserialize, Serialize};

/// Which estimator's state evolution the analysis refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Bayes,
    /// Maximum likelihood; the loss weight is taken from `ModelParams::rho`.
    Ml,
}

impl Estimator {
    pub fn se_kind(self, params: &ModelParams) -> SeKind {
        match self {
            Estimator::Bayes => SeKind::Bayes,
            Estimator::Ml => SeKind::Ml { rho: params.rho },
        }
    }
}

/// Default uninformative SE initialization per estimator.
pub fn uninformative_init(estimator: Estimator) -> f64 {
    match estimator {
        Estimator::Bayes => 0.05,
        Estimator::Ml => 0.2,
    }
}

/// Default informative SE initialization.
pub const INFORMATIVE_INIT: f64 = 0.9;

/// Recovery region of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseRegion {
    /// No component recovered (the null fixed point is stable).
    NoRecovery,
    /// Only the matrix pair (u, v) recovered.
    MatrixOnly,
    /// All four components recovered.
    MatrixTensor,
}

impl PhaseRegion {
    pub fn label(self) -> &'static str {
        match self {
            PhaseRegion::NoRecovery => "R0",
            PhaseRegion::MatrixOnly => "Rm",
            PhaseRegion::MatrixTensor => "Rt",
        }
    }
}

/// Tensor recovery threshold of the Bayes estimator,
/// `sqrt(α3 α4) (α2 − Δm²)/(α2 + Δm)`. Negative output means the matrix
/// itself is unrecoverable (`Δm ≥ sqrt(α2)`).
pub fn delta_c_bayes(params: &ModelParams) -> f64 {
    delta_c_with_alpha2(params.alpha2, params.alpha3, params.alpha4, params.delta_m)
}

fn delta_c_with_alpha2(alpha2: f64, alpha3: f64, alpha4: f64, delta_m: f64) -> f64 {
    (alpha3 * alpha4).sqrt() * (alpha2 - delta_m * delta_m) / (alpha2 + delta_m)
}

/// The effective constants of the joint ML estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MlEffectiveConstants {
    /// `α̃2 = α2 (α2/Δm) / ((α2/Δm) + α3 α4/(ρ² Δt))`.
    pub alpha2_tilde: f64,
    /// `δ̃_c = δ_c(α̃2, α3, α4, Δm)`.
    pub delta_c_tilde: f64,
    /// ML matrix fixed point `(q̃_m1, q̃_m2)`; zeros below threshold.
    pub q_matrix: (f64, f64),
}

pub fn effective_constants_ml(params: &ModelParams) -> MlEffectiveConstants {
    let wm = params.alpha2 / params.delta_m;
    let wt = params.alpha3 * params.alpha4 / (params.rho * params.rho * params.delta_t);
    let a2t = params.alpha2 * wm / (wm + wt);
    let delta_c_tilde = delta_c_with_alpha2(a2t, params.alpha3, params.alpha4, params.delta_m);
    let dm = params.delta_m;
    let r1 = (a2t - dm * dm) / (a2t + dm);
    let r2 = (a2t - dm * dm) / (a2t * (1.0 + dm));
    let q_matrix = if r1 > 0.0 {
        (r1.sqrt(), r2.sqrt())
    } else {
        (0.0, 0.0)
    };
    MlEffectiveConstants {
        alpha2_tilde: a2t,
        delta_c_tilde,
        q_matrix,
    }
}

/// Bayes matrix fixed point `(q_m1, q_m2)`; zeros below threshold.
pub fn bayes_matrix_fp(params: &ModelParams) -> (f64, f64) {
    let (a2, dm) = (params.alpha2, params.delta_m);
    let q1 = (a2 - dm * dm) / (a2 + dm);
    let q2 = (a2 - dm * dm) / (a2 * (1.0 + dm));
    if q1 > 0.0 {
        (q1, q2)
    } else {
        (0.0, 0.0)
    }
}

/// Classify the recovery region. Boundary equalities resolve to the
/// matrix-only region, so classification is total and deterministic.
pub fn classify_region(params: &ModelParams, estimator: Estimator) -> PhaseRegion {
    let (a2_eff, dc_eff) = match estimator {
        Estimator::Bayes => (params.alpha2, delta_c_bayes(params)),
        Estimator::Ml => {
            let c = effective_constants_ml(params);
            (c.alpha2_tilde, c.delta_c_tilde)
        }
    };
    if params.delta_m > a2_eff.sqrt() {
        PhaseRegion::NoRecovery
    } else if params.delta_t < dc_eff {
        PhaseRegion::MatrixTensor
    } else {
        PhaseRegion::MatrixOnly
    }
}

/// Unique solution of the rank-one consistency system
///
/// ```text
/// x1 + (a/Δ) x1 x2 = (a/Δ) x2
/// x2 + (b/Δ) x1 x2 = (b/Δ) x1
/// ```
///
/// namely `x1 = (ab − Δ²)/(b(a+Δ))`, `x2 = (ab − Δ²)/(a(b+Δ))`. Every
/// matrix-type fixed point in this crate is an instance of this system.
pub fn rank_one_system_solve(a: f64, b: f64, delta: f64) -> (f64, f64) {
    let num = a * b - delta * delta;
    (num / (b * (a + delta)), num / (a * (b + delta)))
}

/// Asymptotic overlaps of the sequential (matrix-then-tensor) estimator.
/// Components are zero below their thresholds.
pub fn sequential_overlaps(params: &ModelParams) -> OverlapVector {
    let (x1, x2) = rank_one_system_solve(params.alpha2, 1.0, params.delta_m);
    if x1 <= 0.0 || x2 <= 0.0 {
        return [0.0; 4];
    }
    let (q1, q2) = (x1.sqrt(), x2.sqrt());
    let q1sq = x1;
    let (y1, y2) = rank_one_system_solve(
        params.alpha4 * q1sq,
        params.alpha3 * q1sq,
        params.delta_t,
    );
    if y1 <= 0.0 || y2 <= 0.0 {
        return [q1, q2, 0.0, 0.0];
    }
    // y1 solves the x3-slot of the system (a = α4 q1², b = α3 q1²)
    [q1, q2, y1.sqrt(), y2.sqrt()]
}

/// Stability of the null fixed point: `(α2/Δm²) f'_1(0) f'_2(0) < 1`.
/// Reduces to `Δm > sqrt(α2)` for Bayes and `Δm > sqrt(α̃2)` for ML.
pub fn stability_null(params: &ModelParams, estimator: Estimator) -> bool {
    let kind = estimator.se_kind(params);
    let df = crate::se::denoiser_slopes(&[0.0; 4], kind, params);
    params.alpha2 / (params.delta_m * params.delta_m) * df[0] * df[1] < 1.0
}

/// Stability of the matrix fixed point: the matrix block condition
/// `(α2/Δm²) f'_1(g) f'_2(g) < 1` and the tensor block condition
/// `(α3 α4/(ρ² Δt²)) q1² f'_3 f'_4 < 1`, both evaluated at the closed-form
/// matrix fixed point. Returns false when that fixed point does not exist.
pub fn stability_matrix_fp(params: &ModelParams, estimator: Estimator) -> bool {
    let (q1, q2, rho) = match estimator {
        Estimator::Bayes => {
            let (q1, q2) = bayes_matrix_fp(params);
            (q1, q2, 1.0)
        }
        Estimator::Ml => {
            let c = effective_constants_ml(params);
            (c.q_matrix.0, c.q_matrix.1, params.rho)
        }
    };
    if q1 <= 0.0 {
        return false;
    }
    let q0 = [q1, q2, 0.0, 0.0];
    let df = crate::se::denoiser_slopes(&q0, estimator.se_kind(params), params);
    let matrix_block =
        params.alpha2 / (params.delta_m * params.delta_m) * df[0] * df[1] < 1.0;
    let tensor_block = params.alpha3 * params.alpha4
        / (rho * rho * params.delta_t * params.delta_t)
        * q1
        * q1
        * df[2]
        * df[3]
        < 1.0;
    matrix_block && tensor_block
}

/// The Bayes replica free energy
/// `Φ̃(q) = (α2/2Δm) q1 q2 + (α3 α4/2Δt) q1 q3 q4 + ½ Σ α_k [q_k + ln(1−q_k)]`
/// with `α1 = 1`. Bayes-SE fixed points are exactly its critical points.
/// Any `q_k = 1` yields `-inf`.
pub fn free_energy(q: &OverlapVector, params: &ModelParams) -> f64 {
    let alphas = params.alphas();
    let mut phi = params.alpha2 / (2.0 * params.delta_m) * q[0] * q[1]
        + params.alpha3 * params.alpha4 / (2.0 * params.delta_t) * q[0] * q[2] * q[3];
    for k in 0..4 {
        phi += 0.5 * alphas[k] * (q[k] + (1.0 - q[k]).ln());
    }
    phi
}

/// Kind of a state-evolution fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Null,
    Matrix,
    MatrixTensor,
}

/// A fixed point with its stability, basin labels and (Bayes) free energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub q: OverlapVector,
    pub kind: FixedPointKind,
    pub stable: bool,
    /// Bayes only; `None` for ML (no free energy is defined there).
    pub free_energy: Option<f64>,
    /// Reached by SE from the informative initialization.
    pub informative: bool,
    /// Reached by SE from the uninformative initialization.
    pub uninformative: bool,
}

/// One point on the matrix-tensor root curve, including branches whose
/// tensor components leave the admissible domain ("non-defined" roots:
/// negative overlaps for Bayes, negative squared overlaps for ML). Those are
/// reported for curve reproduction but never become fixed-point reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootPoint {
    /// Root location: `q1` for Bayes, `sqrt(v)` with `v = q1²` for ML.
    pub q1: f64,
    /// Full overlap vector when the root lies in the admissible domain.
    pub q: Option<OverlapVector>,
    pub defined: bool,
}

const SCAN_EPS: f64 = 1e-6;
const SCAN_RES: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-12;
const FP_RESIDUAL_TOL: f64 = 1e-8;

/// Scalar residual whose roots are the matrix-tensor fixed points.
///
/// Bayes, in `q1`: substituting `q2 = q1/(Δm+q1)` and the closed-form
/// `q3(q1), q4(q1)` into the first SE equation gives
/// `q1 + g1(q1) (q1 − 1) = 0`.
///
/// ML, in `v = q1²`: `(α2/Δm + α3α4/(ρ²Δt)) v + h(v)² (v − 1) = 0` with
/// `h = (α2/Δm) q2 + (α3α4/(ρΔt)) q3 q4`. Where the tensor radicands turn
/// negative the product `q3 q4` continues analytically (two imaginary
/// factors give a real negative product), which is what produces the
/// non-defined branches.
fn mt_residual(z: f64, params: &ModelParams, estimator: Estimator) -> f64 {
    let (a2, a3, a4, dm, dt) = (
        params.alpha2,
        params.alpha3,
        params.alpha4,
        params.delta_m,
        params.delta_t,
    );
    match estimator {
        Estimator::Bayes => {
            let q1 = z;
            let q2 = q1 / (dm + q1);
            let s = a3 * a4 * q1 * q1 - dt * dt;
            let q3 = s / (a3 * q1 * (a4 * q1 + dt));
            let q4 = s / (a4 * q1 * (a3 * q1 + dt));
            let g1 = a2 / dm * q2 + a3 * a4 / dt * q3 * q4;
            q1 + g1 * (q1 - 1.0)
        }
        Estimator::Ml => {
            let rho = params.rho;
            let v = z;
            let q2 = (v / (dm + v)).sqrt();
            let s = a3 * a4 * v * v - dt * dt;
            // signed analytic continuation of q3*q4
            let p34 = s / (v * (a3 * a4 * (a4 * v + dt) * (a3 * v + dt)).sqrt());
            let h = a2 / dm * q2 + a3 * a4 / (rho * dt) * p34;
            (a2 / dm + a3 * a4 / (rho * rho * dt)) * v + h * h * (v - 1.0)
        }
    }
}

/// Reconstruct the full overlap vector from a residual root.
fn mt_root_to_point(z: f64, params: &ModelParams, estimator: Estimator) -> RootPoint {
    let (a3, a4, dm, dt) = (
        params.alpha3,
        params.alpha4,
        params.delta_m,
        params.delta_t,
    );
    match estimator {
        Estimator::Bayes => {
            let q1 = z;
            let q2 = q1 / (dm + q1);
            let s = a3 * a4 * q1 * q1 - dt * dt;
            let q3 = s / (a3 * q1 * (a4 * q1 + dt));
            let q4 = s / (a4 * q1 * (a3 * q1 + dt));
            let q = [q1, q2, q3, q4];
            let defined = q.iter().all(|&v| (0.0..=1.0).contains(&v)) && s > 0.0;
            RootPoint {
                q1,
                q: defined.then_some(q),
                defined,
            }
        }
        Estimator::Ml => {
            let v = z;
            let q1 = v.sqrt();
            let q2sq = v / (dm + v);
            let s = a3 * a4 * v * v - dt * dt;
            let q3sq = s / (a3 * v * (a4 * v + dt));
            let q4sq = s / (a4 * v * (a3 * v + dt));
            if s > 0.0 && q3sq <= 1.0 && q4sq <= 1.0 && v <= 1.0 {
                let q = [q1, q2sq.sqrt(), q3sq.sqrt(), q4sq.sqrt()];
                RootPoint {
                    q1,
                    q: Some(q),
                    defined: true,
                }
            } else {
                RootPoint {
                    q1,
                    q: None,
                    defined: false,
                }
            }
        }
    }
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo < ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of the matrix-tensor residual in (0, 1], with the overlap
/// vectors of the admissible ones. Dense scan at resolution 1e-4, bisection
/// refinement to 1e-12.
pub fn matrix_tensor_root_curve(
    params: &ModelParams,
    estimator: Estimator,
) -> Vec<RootPoint> {
    let f = |z: f64| mt_residual(z, params, estimator);
    let steps = ((1.0 - SCAN_EPS) / SCAN_RES).ceil() as usize;
    let mut roots = Vec::new();
    let mut z_prev = SCAN_EPS;
    let mut f_prev = f(z_prev);
    for s in 1..=steps {
        let z = (SCAN_EPS + s as f64 * SCAN_RES).min(1.0);
        let fz = f(z);
        if f_prev == 0.0 {
            roots.push(z_prev);
        } else if (f_prev < 0.0) != (fz < 0.0) {
            roots.push(bisect_root(f, z_prev, z));
        }
        z_prev = z;
        f_prev = fz;
        if z >= 1.0 {
            break;
        }
    }
    roots
        .into_iter()
        .map(|z| mt_root_to_point(z, params, estimator))
        .collect()
}

/// All fixed points of the SE map for the given estimator: the null point,
/// the matrix point when it exists, and every admissible matrix-tensor root.
/// Each is validated by re-substitution into the SE step, classified for
/// stability via the Jacobian spectral radius, and labelled with the
/// initialization basins.
pub fn solve_all_fixed_points(
    params: &ModelParams,
    estimator: Estimator,
) -> Vec<FixedPointReport> {
    let kind = estimator.se_kind(params);
    let mut reports: Vec<FixedPointReport> = Vec::new();

    let mut push = |q: OverlapVector, fp_kind: FixedPointKind| {
        let step = se_step(&q, kind, params);
        let residual = q
            .iter()
            .zip(&step)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual > FP_RESIDUAL_TOL {
            return; // removable-singularity artifact or below-threshold stub
        }
        let stable = spectral_radius(&se_jacobian(&q, kind, params)) < 1.0;
        let free_energy = match estimator {
            Estimator::Bayes => Some(free_energy(&q, params)),
            Estimator::Ml => None,
        };
        reports.push(FixedPointReport {
            q,
            kind: fp_kind,
            stable,
            free_energy,
            informative: false,
            uninformative: false,
        });
    };

    push([0.0; 4], FixedPointKind::Null);

    let (qm1, qm2) = match estimator {
        Estimator::Bayes => bayes_matrix_fp(params),
        Estimator::Ml => effective_constants_ml(params).q_matrix,
    };
    if qm1 > 0.0 {
        push([qm1, qm2, 0.0, 0.0], FixedPointKind::Matrix);
    }

    for root in matrix_tensor_root_curve(params, estimator) {
        if let Some(q) = root.q {
            push(q, FixedPointKind::MatrixTensor);
        }
    }

    // basin labels from the two canonical initializations
    let match_tol = 1e-6;
    for (level, informative) in [
        (uninformative_init(estimator), false),
        (INFORMATIVE_INIT, true),
    ] {
        let run = run_se(&[level; 4], kind, params, 1e-13, 2_000_000);
        if !run.converged {
            continue;
        }
        if let Some(best) = reports.iter_mut().min_by(|a, b| {
            let da = dist_inf(&a.q, &run.fixed_point);
            let db = dist_inf(&b.q, &run.fixed_point);
            da.partial_cmp(&db).unwrap()
        }) {
            if dist_inf(&best.q, &run.fixed_point) < match_tol {
                if informative {
                    best.informative = true;
                } else {
                    best.uninformative = true;
                }
            }
        }
    }

    reports.sort_by(|a, b| a.q[0].partial_cmp(&b.q[0]).unwrap());
    reports
}

fn dist_inf(a: &OverlapVector, b: &OverlapVector) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Axis of a one-dimensional parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    DeltaM,
    DeltaT,
}

impl SweepAxis {
    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = *base;
        match self {
            SweepAxis::DeltaM => p.delta_m = value,
            SweepAxis::DeltaT => p.delta_t = value,
        }
        p
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::DeltaM => "delta_m",
            SweepAxis::DeltaT => "delta_t",
        }
    }
}

fn count_mt_roots(params: &ModelParams, estimator: Estimator) -> usize {
    matrix_tensor_root_curve(params, estimator).len()
}

/// Locate spinodal boundaries along a parameter sweep: values where the
/// number of real roots of the matrix-tensor residual changes (a double
/// root appears or disappears). Boundaries are refined to 1e-6.
pub fn spinodal_boundary(
    params_base: &ModelParams,
    axis: SweepAxis,
    lo: f64,
    hi: f64,
    coarse_steps: usize,
    estimator: Estimator,
) -> Vec<f64> {
    assert!(coarse_steps >= 2 && hi > lo);
    let count_at = |v: f64| count_mt_roots(&axis.apply(params_base, v), estimator);
    let mut boundaries = Vec::new();
    let step = (hi - lo) / coarse_steps as f64;
    let mut v_prev = lo;
    let mut c_prev = count_at(lo);
    for s in 1..=coarse_steps {
        let v = lo + s as f64 * step;
        let c = count_at(v);
        if c != c_prev {
            // bisect the change point
            let (mut a, mut b) = (v_prev, v);
            let ca = c_prev;
            for _ in 0..60 {
                if b - a < 1e-7 {
                    break;
                }
                let m = 0.5 * (a + b);
                if count_at(m) == ca {
                    a = m;
                } else {
                    b = m;
                }
            }
            boundaries.push(0.5 * (a + b));
        }
        v_prev = v;
        c_prev = c;
    }
    boundaries
}

/// The initialization dependence of SE at one parameter point: endpoints
/// from the canonical uninformative and informative starts, whether they
/// disagree, and for Bayes the free-energy gap `Φ̃(inf) − Φ̃(uninf)` (negative
/// gap with distinct endpoints is the hard phase).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitSplit {
    pub uninformative: OverlapVector,
    pub informative: OverlapVector,
    pub distinct: bool,
    pub free_energy_gap: Option<f64>,
}

pub fn init_dependence(params: &ModelParams, estimator: Estimator) -> InitSplit {
    let kind = estimator.se_kind(params);
    let lo = run_se(
        &[uninformative_init(estimator); 4],
        kind,
        params,
        1e-12,
        2_000_000,
    );
    let hi = run_se(&[INFORMATIVE_INIT; 4], kind, params, 1e-12, 2_000_000);
    let distinct = dist_inf(&lo.fixed_point, &hi.fixed_point) > 1e-4;
    let free_energy_gap = match estimator {
        Estimator::Bayes if distinct => Some(
            free_energy(&hi.fixed_point, params) - free_energy(&lo.fixed_point, params),
        ),
        _ => None,
    };
    InitSplit {
        uninformative: lo.fixed_point,
        informative: hi.fixed_point,
        distinct,
        free_energy_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> ModelParams {
        ModelParams::new(0.7, 0.3, [1.5, 0.8, 1.0]).unwrap()
    }

    #[test]
    fn delta_c_hand_values() {
        assert_abs_diff_eq!(delta_c_bayes(&params()), 0.41062, epsilon = 1e-5);
        // threshold collapse at delta_m = sqrt(alpha2)
        let p = ModelParams::new(1.5f64.sqrt(), 0.3, [1.5, 0.8, 1.0]).unwrap();
        assert_abs_diff_eq!(delta_c_bayes(&p), 0.0, epsilon = 1e-14);
        // no tensor data
        let p = ModelParams::new(0.7, 0.3, [1.5, 1e-300, 1.0]).unwrap();
        assert!(delta_c_bayes(&p) < 1e-140);
    }

    #[test]
    fn effective_constants_hand_values() {
        let p = ModelParams::new(0.7, 0.8, [1.5, 0.8, 1.0]).unwrap();
        let c = effective_constants_ml(&p);
        assert_abs_diff_eq!(c.alpha2_tilde, 1.5 * (1.5 / 0.7) / (1.5 / 0.7 + 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(c.alpha2_tilde, 1.0227272727272727, epsilon = 1e-9);
        // rho -> infinity restores the Bayes constants
        let p_inf = p.with_rho(1e9).unwrap();
        let c_inf = effective_constants_ml(&p_inf);
        assert_abs_diff_eq!(c_inf.alpha2_tilde, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(c_inf.delta_c_tilde, delta_c_bayes(&p), epsilon = 1e-9);
    }

    #[test]
    fn ml_constants_always_pessimistic() {
        let mut k = 0u64;
        for _ in 0..200 {
            k += 1;
            let r = |k: u64| crate::rng::uniform53(k);
            let p = ModelParams::new(
                0.2 + 1.5 * r(k * 7 + 1),
                0.05 + 1.2 * r(k * 7 + 2),
                [
                    0.3 + 2.0 * r(k * 7 + 3),
                    0.3 + 1.5 * r(k * 7 + 4),
                    0.3 + 1.5 * r(k * 7 + 5),
                ],
            )
            .unwrap()
            .with_rho(0.25 + 4.0 * r(k * 7 + 6))
            .unwrap();
            let c = effective_constants_ml(&p);
            assert!(c.alpha2_tilde <= p.alpha2 + 1e-12);
            assert!(c.delta_c_tilde <= delta_c_bayes(&p) + 1e-12);
        }
    }

    #[test]
    fn region_classification() {
        let p = ModelParams::new(1.3, 0.5, [1.5, 0.8, 1.0]).unwrap();
        assert_eq!(classify_region(&p, Estimator::Bayes), PhaseRegion::NoRecovery);
        let p = ModelParams::new(0.7, 0.2, [1.5, 0.8, 1.0]).unwrap();
        assert_eq!(classify_region(&p, Estimator::Bayes), PhaseRegion::MatrixTensor);
        let p = ModelParams::new(0.7, 0.8, [1.5, 0.8, 1.0]).unwrap();
        assert_eq!(classify_region(&p, Estimator::Bayes), PhaseRegion::MatrixOnly);
        // exact boundary goes to the matrix region
        let p = ModelParams::new(0.7, delta_c_bayes(&params()), [1.5, 0.8, 1.0]).unwrap();
        assert_eq!(classify_region(&p, Estimator::Bayes), PhaseRegion::MatrixOnly);
    }

    #[test]
    fn rank_one_solver() {
        assert_eq!(rank_one_system_solve(1.0, 1.0, 1.0), (0.0, 0.0));
        let (x1, x2) = rank_one_system_solve(2.0, 1.0, 1.0);
        assert_abs_diff_eq!(x1, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x2, 0.25, epsilon = 1e-15);
        // plug back into the defining system
        for (a, b, d) in [(2.0, 1.0, 1.0), (1.5, 1.0, 0.7), (3.0, 0.5, 0.9)] {
            let (x1, x2) = rank_one_system_solve(a, b, d);
            assert_abs_diff_eq!(x1 + a / d * x1 * x2, a / d * x2, epsilon = 1e-12);
            assert_abs_diff_eq!(x2 + b / d * x1 * x2, b / d * x1, epsilon = 1e-12);
        }
        // matrix fixed point instance
        let (x1, _) = rank_one_system_solve(1.5, 1.0, 0.7);
        assert_abs_diff_eq!(x1, 0.4590909090909091, epsilon = 1e-12);
    }

    #[test]
    fn sequential_overlaps_hand_values() {
        let q = sequential_overlaps(&params());
        assert_abs_diff_eq!(q[0], 0.6776, epsilon = 5e-4);
        assert_abs_diff_eq!(q[1], 0.6293, epsilon = 5e-4);
        assert_abs_diff_eq!(q[2], 0.5310, epsilon = 5e-4);
        assert_abs_diff_eq!(q[3], 0.5066, epsilon = 5e-4);
        // no matrix recovery: everything zero
        let p = ModelParams::new(1.5, 0.3, [1.5, 0.8, 1.0]).unwrap();
        assert_eq!(sequential_overlaps(&p), [0.0; 4]);
        // tensor radicand exactly zero -> tensor components zero
        let q1sq = 0.4590909090909091f64;
        let dt = (0.8f64 * 1.0).sqrt() * q1sq;
        let p = ModelParams::new(0.7, dt, [1.5, 0.8, 1.0]).unwrap();
        let q = sequential_overlaps(&p);
        assert!(q[0] > 0.6 && q[2] == 0.0 && q[3] == 0.0);
    }

    #[test]
    fn null_stability_thresholds() {
        let a2: f64 = 1.5;
        for dm in [0.5, 1.0, 1.2, 1.3, 2.0] {
            let p = ModelParams::new(dm, 0.5, [a2, 0.8, 1.0]).unwrap();
            assert_eq!(stability_null(&p, Estimator::Bayes), dm > a2.sqrt());
            let c = effective_constants_ml(&p);
            assert_eq!(
                stability_null(&p, Estimator::Ml),
                dm > c.alpha2_tilde.sqrt(),
                "dm = {dm}"
            );
        }
    }

    #[test]
    fn matrix_stability_thresholds() {
        // Bayes: stable iff delta_m < sqrt(alpha2) and delta_t > delta_c
        for (dm, dt, want) in [
            (0.7, 0.8, true),
            (0.7, 0.2, false),
            (1.3, 0.8, false),
            (0.7, 0.42, true),
        ] {
            let p = ModelParams::new(dm, dt, [1.5, 0.8, 1.0]).unwrap();
            assert_eq!(stability_matrix_fp(&p, Estimator::Bayes), want, "{dm} {dt}");
        }
        // ML: tilde versions
        let p = ModelParams::new(0.7, 0.8, [1.5, 0.8, 1.0]).unwrap();
        let c = effective_constants_ml(&p);
        assert_eq!(
            stability_matrix_fp(&p, Estimator::Ml),
            p.delta_m < c.alpha2_tilde.sqrt() && p.delta_t > c.delta_c_tilde
        );
    }

    #[test]
    fn stability_agrees_with_jacobian_radius() {
        let mut k = 0u64;
        for _ in 0..100 {
            k += 1;
            let r = |k: u64| crate::rng::uniform53(k);
            let p = ModelParams::new(
                0.2 + 1.6 * r(k * 11 + 1),
                0.05 + 1.0 * r(k * 11 + 2),
                [
                    0.4 + 1.6 * r(k * 11 + 3),
                    0.4 + 1.2 * r(k * 11 + 4),
                    0.4 + 1.2 * r(k * 11 + 5),
                ],
            )
            .unwrap()
            .with_rho(0.5 + 2.0 * r(k * 11 + 6))
            .unwrap();
            for est in [Estimator::Bayes, Estimator::Ml] {
                let kind = est.se_kind(&p);
                let j0 = se_jacobian(&[0.0; 4], kind, &p);
                let r0 = spectral_radius(&j0);
                // skip knife-edge cases
                if (r0 - 1.0).abs() > 1e-9 {
                    assert_eq!(stability_null(&p, est), r0 < 1.0, "{p:?} {est:?}");
                }
                let (q1, q2) = match est {
                    Estimator::Bayes => bayes_matrix_fp(&p),
                    Estimator::Ml => effective_constants_ml(&p).q_matrix,
                };
                if q1 > 1e-9 {
                    let jm = se_jacobian(&[q1, q2, 0.0, 0.0], kind, &p);
                    let rm = spectral_radius(&jm);
                    if (rm - 1.0).abs() > 1e-9 {
                        assert_eq!(stability_matrix_fp(&p, est), rm < 1.0, "{p:?} {est:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn free_energy_zero_at_origin_and_critical_at_fps() {
        let p = params();
        assert_eq!(free_energy(&[0.0; 4], &p), 0.0);
        // finite differences of the free energy vanish at Bayes fixed points
        let h = 1e-6;
        for report in solve_all_fixed_points(&p, Estimator::Bayes) {
            if report.q.iter().any(|&v| v > 1.0 - 1e-6) {
                continue;
            }
            for l in 0..4 {
                let mut qp = report.q;
                let mut qm = report.q;
                qp[l] += h;
                qm[l] -= h;
                let grad = (free_energy(&qp, &p) - free_energy(&qm, &p)) / (2.0 * h);
                assert!(
                    grad.abs() < 1e-5,
                    "grad[{l}] = {grad} at {:?}",
                    report.q
                );
            }
        }
        assert_eq!(free_energy(&[0.5, 0.5, 1.0, 0.5], &p), f64::NEG_INFINITY);
    }

    #[test]
    fn fixed_points_deep_in_no_recovery() {
        let p = ModelParams::new(2.0, 2.0, [1.5, 0.8, 1.0]).unwrap();
        let reports = solve_all_fixed_points(&p, Estimator::Bayes);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].kind, FixedPointKind::Null);
        assert!(reports[0].stable);
        assert!(reports[0].uninformative);
    }

    #[test]
    fn fixed_points_satisfy_se_step() {
        for (dm, dt) in [(0.7, 0.3), (1.0, 0.24), (0.95, 0.24), (0.7, 0.8)] {
            let p = ModelParams::new(dm, dt, [1.5, 0.8, 1.0]).unwrap();
            for est in [Estimator::Bayes, Estimator::Ml] {
                for rep in solve_all_fixed_points(&p, est) {
                    let kind = est.se_kind(&p);
                    let step = se_step(&rep.q, kind, &p);
                    let res = rep
                        .q
                        .iter()
                        .zip(&step)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(res < 1e-8, "{est:?} ({dm},{dt}) q={:?} res={res}", rep.q);
                }
            }
        }
    }

    #[test]
    fn coexistence_band_has_three_mt_roots() {
        // inside the band at delta_t = 0.24 three matrix-tensor roots coexist
        let p = ModelParams::new(1.0, 0.24, [1.5, 0.8, 1.0]).unwrap();
        let reports = solve_all_fixed_points(&p, Estimator::Bayes);
        let mt: Vec<_> = reports
            .iter()
            .filter(|r| r.kind == FixedPointKind::MatrixTensor)
            .collect();
        assert_eq!(mt.len(), 2, "{reports:?}");
        // region Rm at this point: uninformative basin is the matrix FP
        assert_eq!(classify_region(&p, Estimator::Bayes), PhaseRegion::MatrixOnly);
        let stable_mt: Vec<_> = mt.iter().filter(|r| r.stable).collect();
        assert_eq!(stable_mt.len(), 1);
        assert!(stable_mt[0].informative);
        let matrix_fp: Vec<_> = reports
            .iter()
            .filter(|r| r.kind == FixedPointKind::Matrix)
            .collect();
        assert_eq!(matrix_fp.len(), 1);
        assert!(matrix_fp[0].stable && matrix_fp[0].uninformative);
    }

    #[test]
    fn spinodal_root_count_changes_by_two() {
        let p = ModelParams::new(0.7, 0.24, [1.5, 0.8, 1.0]).unwrap();
        let bounds = spinodal_boundary(&p, SweepAxis::DeltaM, 0.4, 1.6, 240, Estimator::Bayes);
        assert!(!bounds.is_empty(), "no spinodal found");
        for b in &bounds {
            let before = count_mt_roots(&SweepAxis::DeltaM.apply(&p, b - 1e-4), Estimator::Bayes);
            let after = count_mt_roots(&SweepAxis::DeltaM.apply(&p, b + 1e-4), Estimator::Bayes);
            assert_eq!(
                (before as i64 - after as i64).abs(),
                2,
                "boundary {b}: {before} -> {after}"
            );
        }
    }
}
