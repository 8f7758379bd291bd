//! The two-stage spectral estimator and its asymptotic overlap predictions.
//!
//! Stage 1 extracts the top singular pair of `Y_m / sqrt(n2)`, estimating
//! `(u, v)`. Stage 2 contracts the tensor with the unit-norm stage-1 left
//! vector, forming the `n3 x n4` matrix `(Y_t · û)/sqrt(n4)` — an effective
//! spiked matrix whose planted strength is inherited from the stage-1
//! overlap — and extracts its top pair, estimating `(x, y)`. Above the
//! matrix threshold this sequence attains the Bayes recovery thresholds.
//!
//! The singular-vector overlaps obey the rectangular spiked-matrix law: for
//! a spike of strength θ = σ²/Δ and aspect ratio α = n/m,
//!
//! ```text
//! |<left, signal>|²  →  max(0, 1 − α(1+θ)/(θ(θ+α)))
//! |<right, signal>|² →  max(0, 1 − (α+θ)/(θ(θ+1)))
//! ```
//!
//! both vanishing at θ = sqrt(α).

use crate::model::{dot, norm2, rescale_to_sphere, EstimateSet, Normalization, PlantedInstance};
use crate::rng::{level1, standard_normal, stream_prefix, Stream};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Top singular triplet of a matrix, with convergence diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularTriplet {
    pub value: f64,
    /// Unit-norm left singular vector (length = rows).
    pub left: Vec<f64>,
    /// Unit-norm right singular vector (length = cols).
    pub right: Vec<f64>,
    /// False when the iteration hit `max_iters` first (degenerate top pair);
    /// the best iterate is still returned.
    pub converged: bool,
    pub iterations: usize,
}

/// Dense row-major matrix view used by the power iteration.
pub struct MatRef<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

impl MatRef<'_> {
    fn mul(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.data[i * self.cols..(i + 1) * self.cols], v);
        }
    }

    fn mul_t(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &ui) in u.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &r) in out.iter_mut().zip(row) {
                *o += ui * r;
            }
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn normalize_unit(v: &mut [f64]) -> f64 {
    let n = norm2(v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Top singular triplet by alternating power iteration on `M Mᵀ`, started
/// from a seeded random unit vector. Converges when successive left vectors
/// have cosine distance below `tol`; the returned triplet satisfies
/// `|M·right − value·left| ≤ 10·tol·|M|_F` whenever `converged` is set.
pub fn top_singular_triplet(
    m: &MatRef<'_>,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<SingularTriplet> {
    if m.rows == 0 || m.cols == 0 || m.data.len() != m.rows * m.cols {
        return Err(Error::DimensionMismatch {
            what: "power iteration input",
            expected: m.rows * m.cols,
            got: m.data.len(),
        });
    }
    if m.data.iter().all(|&x| x == 0.0) {
        return Err(Error::Config("power iteration on a zero matrix".into()));
    }
    let prefix = stream_prefix(seed, Stream::Aux(0x501));
    let mut left: Vec<f64> = (0..m.rows)
        .map(|i| standard_normal(level1(prefix, i as u64)))
        .collect();
    normalize_unit(&mut left);
    let mut right = vec![0.0f64; m.cols];
    let mut left_next = vec![0.0f64; m.rows];
    let mut value = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        iterations = it;
        m.mul_t(&left, &mut right);
        normalize_unit(&mut right);
        m.mul(&right, &mut left_next);
        value = normalize_unit(&mut left_next);
        let cos = dot(&left, &left_next).abs().min(1.0);
        std::mem::swap(&mut left, &mut left_next);
        if 1.0 - cos < tol {
            converged = true;
            break;
        }
    }
    Ok(SingularTriplet {
        value,
        left,
        right,
        converged,
        iterations,
    })
}

/// Asymptotic squared overlaps of the top singular vectors of a spiked
/// rectangular matrix `X/sqrt(m) + σ u vᵀ` with noise variance `delta` and
/// aspect ratio `alpha = n/m`: `(left², right²)`, clamped at zero below the
/// transition θ = sqrt(alpha), θ = σ²/delta.
pub fn bbp_overlap_prediction(sigma: f64, delta: f64, alpha: f64) -> (f64, f64) {
    let theta = sigma * sigma / delta;
    if theta <= 0.0 {
        return (0.0, 0.0);
    }
    let left = 1.0 - alpha * (1.0 + theta) / (theta * (theta + alpha));
    let right = 1.0 - (alpha + theta) / (theta * (theta + 1.0));
    (left.max(0.0), right.max(0.0))
}

/// Diagnostics of the two-stage estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    /// Top singular value of `Y_m / sqrt(n2)`.
    pub stage1_value: f64,
    /// Top singular value of `(Y_t · û)/sqrt(n4)`.
    pub stage2_value: f64,
    pub stage1_converged: bool,
    pub stage2_converged: bool,
}

/// The sequential estimator: PCA on the matrix, then PCA on the tensor
/// contracted with the matrix estimate. Estimates are rescaled to the
/// spherical convention (norm `sqrt(n_k)`).
pub fn sequential_pca(
    instance: &PlantedInstance,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<(EstimateSet, SpectralDiagnostics)> {
    let n = instance.dims.n;
    let inv_s2 = 1.0 / (n[1] as f64).sqrt();
    let scaled: Vec<f64> = instance.matrix.data.iter().map(|&v| v * inv_s2).collect();
    let m1 = MatRef {
        rows: n[0],
        cols: n[1],
        data: &scaled,
    };
    let s1 = top_singular_triplet(&m1, tol, max_iters, seed)?;

    // stage 2 input: (Y_t · û)/sqrt(n4), an n3 x n4 effective spiked matrix
    let mut contracted = instance.tensor.contract_mode1_matrix(&s1.left)?;
    let inv_s4 = 1.0 / (n[3] as f64).sqrt();
    for v in contracted.iter_mut() {
        *v *= inv_s4;
    }
    let m2 = MatRef {
        rows: n[2],
        cols: n[3],
        data: &contracted,
    };
    let s2 = top_singular_triplet(&m2, tol, max_iters, seed ^ 0x5EC2)?;

    let mut w: [Vec<f64>; 4] = [
        s1.left.clone(),
        s1.right.clone(),
        s2.left.clone(),
        s2.right.clone(),
    ];
    for v in w.iter_mut() {
        rescale_to_sphere(v);
    }
    Ok((
        EstimateSet {
            w,
            normalization: Normalization::Spherical,
        },
        SpectralDiagnostics {
            stage1_value: s1.value,
            stage2_value: s2.value,
            stage1_converged: s1.converged,
            stage2_converged: s2.converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{overlaps_and_mse, ModelParams, PlantedInstance, TensorBackend};
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix_triplet() {
        let data = vec![3.0, 0.0, 0.0, 1.0];
        let m = MatRef {
            rows: 2,
            cols: 2,
            data: &data,
        };
        let t = top_singular_triplet(&m, 1e-12, 500, 1).unwrap();
        assert!(t.converged);
        assert_abs_diff_eq!(t.value, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.left[0].abs(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(t.right[0].abs(), 1.0, epsilon = 1e-6);
        // left and right carry a consistent sign: M right = value * left
        assert_abs_diff_eq!(t.left[0] * t.right[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn residual_bound_holds() {
        // random 50x80 matrix, compare residual against the documented bound
        let prefix = crate::rng::stream_prefix(99, Stream::Aux(1));
        let data: Vec<f64> = (0..50 * 80)
            .map(|i| standard_normal(level1(prefix, i as u64)))
            .collect();
        let m = MatRef {
            rows: 50,
            cols: 80,
            data: &data,
        };
        let tol = 1e-12;
        let t = top_singular_triplet(&m, tol, 50_000, 7).unwrap();
        assert!(t.converged);
        let mut mv = vec![0.0; 50];
        m.mul(&t.right, &mut mv);
        let res: f64 = mv
            .iter()
            .zip(&t.left)
            .map(|(&a, &b)| (a - t.value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res <= 10.0 * tol.max(1e-10) * m.frobenius(), "residual {res}");
    }

    #[test]
    fn marchenko_pastur_edge() {
        // top value of an n x m Gaussian/sqrt(m) concentrates at 1 + sqrt(n/m)
        let (rows, cols) = (100, 150);
        let mut mean = 0.0;
        let draws = 20;
        for s in 0..draws {
            let prefix = crate::rng::stream_prefix(s, Stream::Aux(2));
            let scale = 1.0 / (cols as f64).sqrt();
            let data: Vec<f64> = (0..rows * cols)
                .map(|i| standard_normal(level1(prefix, i as u64)) * scale)
                .collect();
            let m = MatRef {
                rows,
                cols,
                data: &data,
            };
            let t = top_singular_triplet(&m, 1e-10, 20_000, s).unwrap();
            mean += t.value;
        }
        mean /= draws as f64;
        let edge = 1.0 + (rows as f64 / cols as f64).sqrt();
        assert!((mean - edge).abs() < 0.1, "mean top value {mean} vs edge {edge}");
    }

    #[test]
    fn agrees_with_deflation_oracle_on_small_matrices() {
        // oracle: after removing the top component, the next power iteration
        // finds a smaller value; and the triplet reproduces the matrix action
        let prefix = crate::rng::stream_prefix(5, Stream::Aux(3));
        let (rows, cols) = (50, 50);
        let data: Vec<f64> = (0..rows * cols)
            .map(|i| standard_normal(level1(prefix, i as u64)))
            .collect();
        let m = MatRef {
            rows,
            cols,
            data: &data,
        };
        let t1 = top_singular_triplet(&m, 1e-13, 100_000, 3).unwrap();
        // deflate and re-run
        let mut deflated = data.clone();
        for i in 0..rows {
            for j in 0..cols {
                deflated[i * cols + j] -= t1.value * t1.left[i] * t1.right[j];
            }
        }
        let m2 = MatRef {
            rows,
            cols,
            data: &deflated,
        };
        let t2 = top_singular_triplet(&m2, 1e-13, 100_000, 4).unwrap();
        assert!(t2.value < t1.value + 1e-8);
        // the deflated matrix is orthogonal to the removed pair
        let mut mv = vec![0.0; rows];
        m2.mul(&t1.right, &mut mv);
        let along: f64 = dot(&mv, &t1.left);
        assert!(along.abs() < 1e-8, "deflation leak {along}");
    }

    #[test]
    fn bbp_threshold_and_limits() {
        let alpha: f64 = 1.5;
        // theta = sqrt(alpha): both overlaps vanish
        let sigma = (alpha.sqrt() * 0.3).sqrt(); // theta = sigma^2/0.3 = sqrt(alpha)
        let (l, r) = bbp_overlap_prediction(sigma, 0.3, alpha);
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        // strong spike: both approach one
        let (l, r) = bbp_overlap_prediction(1e4, 1.0, alpha);
        assert!(l > 0.999 && r > 0.999);
        // below threshold: clamped to zero
        let (l, r) = bbp_overlap_prediction(0.1, 1.0, alpha);
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn stage1_overlap_matches_bbp_at_model_scaling() {
        // Y_m/sqrt(n2) is a BBP instance with sigma = 1, delta = delta_m,
        // alpha = n1/n2 = 1/alpha2; its left overlap equals the q1 of the
        // sequential theory
        let p = ModelParams::new(0.7, 0.3, [1.5, 0.8, 1.0]).unwrap();
        let (l, r) = bbp_overlap_prediction(1.0, 0.7, 1.0 / 1.5);
        let qs = crate::phase::sequential_overlaps(&p);
        assert_abs_diff_eq!(l, qs[0] * qs[0], epsilon = 1e-12);
        assert_abs_diff_eq!(r, qs[1] * qs[1], epsilon = 1e-12);
    }

    #[test]
    fn sequential_pca_recovers_in_both_channels() {
        let p = ModelParams::new(0.7, 0.3, [1.5, 0.8, 1.0]).unwrap();
        let qs = crate::phase::sequential_overlaps(&p);
        let trials = 6;
        let mut mean = [0.0f64; 4];
        for s in 0..trials {
            let inst =
                PlantedInstance::generate(&p, 300, 1000 + s, TensorBackend::Virtual, None)
                    .unwrap();
            let (est, diag) = sequential_pca(&inst, 1e-9, 20_000, s).unwrap();
            assert!(diag.stage1_converged && diag.stage2_converged);
            assert!(est.spherical_ok());
            let m = overlaps_and_mse(&est, &inst.signals).unwrap();
            for k in 0..4 {
                mean[k] += m.overlaps[k] / trials as f64;
            }
        }
        for k in 0..4 {
            assert!(
                (mean[k] - qs[k]).abs() < 0.06,
                "component {k}: mean {} vs theory {}",
                mean[k],
                qs[k]
            );
        }
    }

    #[test]
    fn below_threshold_everything_is_noise() {
        let p = ModelParams::new(1.4, 0.3, [1.5, 0.8, 1.0]).unwrap();
        let inst = PlantedInstance::generate(&p, 300, 77, TensorBackend::Virtual, None).unwrap();
        let (est, _) = sequential_pca(&inst, 1e-8, 20_000, 1).unwrap();
        let m = overlaps_and_mse(&est, &inst.signals).unwrap();
        for k in 0..4 {
            assert!(
                m.overlaps[k] < 10.0 / (300f64).sqrt(),
                "component {k}: {}",
                m.overlaps[k]
            );
        }
    }

    #[test]
    fn sign_flip_of_stage1_leaves_overlaps_invariant() {
        let p = ModelParams::new(0.7, 0.3, [1.5, 0.8, 1.0]).unwrap();
        let inst = PlantedInstance::generate(&p, 200, 5, TensorBackend::Virtual, None).unwrap();
        let (est, _) = sequential_pca(&inst, 1e-9, 20_000, 11).unwrap();
        let m1 = overlaps_and_mse(&est, &inst.signals).unwrap();

        // flipping u flips the contracted matrix: stage-2 pair flips jointly
        let mut flipped = est.w[0].clone();
        for v in flipped.iter_mut() {
            *v = -*v;
        }
        let mut unit = flipped.clone();
        let inv = 1.0 / norm2(&unit).sqrt();
        for v in unit.iter_mut() {
            *v *= inv;
        }
        let mut contracted = inst.tensor.contract_mode1_matrix(&unit).unwrap();
        let inv_s4 = 1.0 / (inst.dims.n[3] as f64).sqrt();
        for v in contracted.iter_mut() {
            *v *= inv_s4;
        }
        let m2m = MatRef {
            rows: inst.dims.n[2],
            cols: inst.dims.n[3],
            data: &contracted,
        };
        let s2 = top_singular_triplet(&m2m, 1e-9, 20_000, 11 ^ 0x5EC2).unwrap();
        let mut w = est.w.clone();
        w[0] = flipped;
        w[2] = s2.left;
        w[3] = s2.right;
        for v in w.iter_mut() {
            rescale_to_sphere(v);
        }
        let est_f = EstimateSet {
            w,
            normalization: Normalization::Spherical,
        };
        let m2 = overlaps_and_mse(&est_f, &inst.signals).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(m1.overlaps[k], m2.overlaps[k], epsilon = 5e-2);
        }
    }
}
