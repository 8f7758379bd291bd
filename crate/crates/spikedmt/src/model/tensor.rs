//! The spiked tensor observation and its contraction kernels.
//!
//! Three storage backends expose the same entries:
//! - `Dense64`: the full `n1 x n3 x n4` array in f64;
//! - `Dense32`: the same values rounded to f32 (half the memory, contractions
//!   agree with the 64-bit value within ~1e-5 relative);
//! - `Virtual`: nothing but the rank-one factors; every noise entry is
//!   regenerated on demand from the counter-based generator keyed by
//!   `(seed, i, j, k)`, so memory stays O(n1 + n3 + n4).
//!
//! Dense64 materializes exactly the values Virtual regenerates, so their
//! contractions are bit-identical. All kernels parallelize over the output
//! index only, or over fixed-size chunks combined in chunk order, so results
//! do not depend on the number of threads.

use crate::model::dot;
use crate::rng::{level1, level2, level3, standard_normal, stream_prefix, Stream};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Storage backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorBackend {
    Dense64,
    Dense32,
    Virtual,
}

#[derive(Debug, Clone)]
enum Storage {
    Dense64(Vec<f64>),
    Dense32(Vec<f32>),
    Virtual,
}

/// Which mode of `T` is produced by a two-vector contraction. The remaining
/// two modes are contracted against the supplied vectors in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionMode {
    /// `out_i = Σ_{jk} T_ijk a_j b_k`
    Mode1,
    /// `out_j = Σ_{ik} T_ijk a_i b_k`
    Mode3,
    /// `out_k = Σ_{ij} T_ijk a_i b_j`
    Mode4,
}

const FUSED_CHUNK: usize = 16;
const OUT_CHUNK: usize = 64;

/// The tensor observation `Y_t = sqrt(delta_t) Z + u ⊗ x ⊗ y / n1`.
#[derive(Debug, Clone)]
pub struct TensorObservation {
    pub n1: usize,
    pub n3: usize,
    pub n4: usize,
    sqrt_dt: f64,
    inv_n1: f64,
    noise_prefix: u64,
    u: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    storage: Storage,
}

impl TensorObservation {
    pub(crate) fn generate(
        seed: u64,
        delta_t: f64,
        u: &[f64],
        x: &[f64],
        y: &[f64],
        backend: TensorBackend,
        mem_budget: u64,
    ) -> Result<Self> {
        let (n1, n3, n4) = (u.len(), x.len(), y.len());
        let entries = n1 as u64 * n3 as u64 * n4 as u64;
        let elem = match backend {
            TensorBackend::Dense64 => 8,
            TensorBackend::Dense32 => 4,
            TensorBackend::Virtual => 0,
        };
        if elem > 0 && entries * elem > mem_budget {
            return Err(Error::Capacity {
                requested_bytes: entries * elem,
                budget_bytes: mem_budget,
            });
        }
        let mut t = Self {
            n1,
            n3,
            n4,
            sqrt_dt: delta_t.sqrt(),
            inv_n1: 1.0 / n1 as f64,
            noise_prefix: stream_prefix(seed, Stream::TensorNoise),
            u: u.to_vec(),
            x: x.to_vec(),
            y: y.to_vec(),
            storage: Storage::Virtual,
        };
        match backend {
            TensorBackend::Virtual => {}
            TensorBackend::Dense64 => {
                let mut data = vec![0.0f64; n1 * n3 * n4];
                t.materialize_into(&mut data);
                t.storage = Storage::Dense64(data);
            }
            TensorBackend::Dense32 => {
                let mut data = vec![0.0f64; n3 * n4];
                let mut out = vec![0.0f32; n1 * n3 * n4];
                for i in 0..n1 {
                    t.materialize_slab(i, &mut data);
                    let dst = &mut out[i * n3 * n4..(i + 1) * n3 * n4];
                    for (d, &s) in dst.iter_mut().zip(data.iter()) {
                        *d = s as f32;
                    }
                }
                t.storage = Storage::Dense32(out);
            }
        }
        Ok(t)
    }

    /// Wrap an arbitrary dense array as a tensor (no planted structure); used
    /// by oracle tests and by callers needing raw contractions.
    pub fn from_dense64(n1: usize, n3: usize, n4: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n1 * n3 * n4 {
            return Err(Error::DimensionMismatch {
                what: "dense tensor data",
                expected: n1 * n3 * n4,
                got: data.len(),
            });
        }
        Ok(Self {
            n1,
            n3,
            n4,
            sqrt_dt: 0.0,
            inv_n1: if n1 > 0 { 1.0 / n1 as f64 } else { 0.0 },
            noise_prefix: 0,
            u: vec![0.0; n1],
            x: vec![0.0; n3],
            y: vec![0.0; n4],
            storage: Storage::Dense64(data),
        })
    }

    pub fn backend(&self) -> TensorBackend {
        match self.storage {
            Storage::Dense64(_) => TensorBackend::Dense64,
            Storage::Dense32(_) => TensorBackend::Dense32,
            Storage::Virtual => TensorBackend::Virtual,
        }
    }

    #[inline]
    fn virtual_entry(&self, hij: u64, i: usize, j: usize, k: usize) -> f64 {
        // same grouping as the dense materialization, so the two backends
        // agree bitwise
        self.sqrt_dt * standard_normal(level3(hij, k as u64))
            + (self.u[i] * self.x[j] * self.inv_n1) * self.y[k]
    }

    /// Entry `T_ijk`, identical across backends up to element precision.
    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        match &self.storage {
            Storage::Dense64(d) => d[(i * self.n3 + j) * self.n4 + k],
            Storage::Dense32(d) => f64::from(d[(i * self.n3 + j) * self.n4 + k]),
            Storage::Virtual => {
                let hij = level2(level1(self.noise_prefix, i as u64), j as u64);
                self.virtual_entry(hij, i, j, k)
            }
        }
    }

    fn materialize_slab(&self, i: usize, out: &mut [f64]) {
        let hi = level1(self.noise_prefix, i as u64);
        for j in 0..self.n3 {
            let hij = level2(hi, j as u64);
            let c = self.u[i] * self.x[j] * self.inv_n1;
            let row = &mut out[j * self.n4..(j + 1) * self.n4];
            for (k, slot) in row.iter_mut().enumerate() {
                *slot =
                    self.sqrt_dt * standard_normal(level3(hij, k as u64)) + c * self.y[k];
            }
        }
    }

    fn materialize_into(&self, out: &mut [f64]) {
        let slab = self.n3 * self.n4;
        out.par_chunks_mut(slab)
            .enumerate()
            .for_each(|(i, s)| self.materialize_slab(i, s));
    }

    /// Contract two vectors against the tensor, producing the remaining mode.
    pub fn contract(&self, a: &[f64], b: &[f64], mode: ContractionMode) -> Result<Vec<f64>> {
        let (la, lb, what) = match mode {
            ContractionMode::Mode1 => (self.n3, self.n4, "mode-1 contraction"),
            ContractionMode::Mode3 => (self.n1, self.n4, "mode-3 contraction"),
            ContractionMode::Mode4 => (self.n1, self.n3, "mode-4 contraction"),
        };
        if a.len() != la {
            return Err(Error::DimensionMismatch {
                what,
                expected: la,
                got: a.len(),
            });
        }
        if b.len() != lb {
            return Err(Error::DimensionMismatch {
                what,
                expected: lb,
                got: b.len(),
            });
        }
        Ok(match mode {
            ContractionMode::Mode1 => self.contract_mode1(a, b),
            ContractionMode::Mode3 => self.contract_mode3(a, b),
            ContractionMode::Mode4 => self.contract_mode4(a, b),
        })
    }

    fn contract_mode1(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n1];
        out.par_chunks_mut(OUT_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (o, slot) in chunk.iter_mut().enumerate() {
                    let i = c * OUT_CHUNK + o;
                    let mut acc = 0.0;
                    match &self.storage {
                        Storage::Dense64(d) => {
                            for j in 0..self.n3 {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                acc += a[j] * dot(row, b);
                            }
                        }
                        Storage::Dense32(d) => {
                            for j in 0..self.n3 {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                let mut p = 0.0;
                                for (k, &t) in row.iter().enumerate() {
                                    p += f64::from(t) * b[k];
                                }
                                acc += a[j] * p;
                            }
                        }
                        Storage::Virtual => {
                            let hi = level1(self.noise_prefix, i as u64);
                            for j in 0..self.n3 {
                                let hij = level2(hi, j as u64);
                                let cs = self.u[i] * self.x[j] * self.inv_n1;
                                let mut p = 0.0;
                                for (k, &bk) in b.iter().enumerate() {
                                    let t = self.sqrt_dt
                                        * standard_normal(level3(hij, k as u64))
                                        + cs * self.y[k];
                                    p += t * bk;
                                }
                                acc += a[j] * p;
                            }
                        }
                    }
                    *slot = acc;
                }
            });
        out
    }

    fn contract_mode3(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n3];
        out.par_chunks_mut(OUT_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (o, slot) in chunk.iter_mut().enumerate() {
                    let j = c * OUT_CHUNK + o;
                    let mut acc = 0.0;
                    match &self.storage {
                        Storage::Dense64(d) => {
                            for (i, &ai) in a.iter().enumerate() {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                acc += ai * dot(row, b);
                            }
                        }
                        Storage::Dense32(d) => {
                            for (i, &ai) in a.iter().enumerate() {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                let mut p = 0.0;
                                for (k, &t) in row.iter().enumerate() {
                                    p += f64::from(t) * b[k];
                                }
                                acc += ai * p;
                            }
                        }
                        Storage::Virtual => {
                            for (i, &ai) in a.iter().enumerate() {
                                let hij =
                                    level2(level1(self.noise_prefix, i as u64), j as u64);
                                let cs = self.u[i] * self.x[j] * self.inv_n1;
                                let mut p = 0.0;
                                for (k, &bk) in b.iter().enumerate() {
                                    let t = self.sqrt_dt
                                        * standard_normal(level3(hij, k as u64))
                                        + cs * self.y[k];
                                    p += t * bk;
                                }
                                acc += ai * p;
                            }
                        }
                    }
                    *slot = acc;
                }
            });
        out
    }

    fn contract_mode4(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.n4];
        let n4 = self.n4;
        out.par_chunks_mut(OUT_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let k0 = c * OUT_CHUNK;
                for (i, &ai) in a.iter().enumerate() {
                    match &self.storage {
                        Storage::Dense64(d) => {
                            for (j, &bj) in b.iter().enumerate() {
                                let w = ai * bj;
                                let row = &d[(i * self.n3 + j) * n4 + k0..][..chunk.len()];
                                for (slot, &t) in chunk.iter_mut().zip(row) {
                                    *slot += w * t;
                                }
                            }
                        }
                        Storage::Dense32(d) => {
                            for (j, &bj) in b.iter().enumerate() {
                                let w = ai * bj;
                                let row = &d[(i * self.n3 + j) * n4 + k0..][..chunk.len()];
                                for (slot, &t) in chunk.iter_mut().zip(row) {
                                    *slot += w * f64::from(t);
                                }
                            }
                        }
                        Storage::Virtual => {
                            let hi = level1(self.noise_prefix, i as u64);
                            for (j, &bj) in b.iter().enumerate() {
                                let w = ai * bj;
                                let hij = level2(hi, j as u64);
                                let cs = self.u[i] * self.x[j] * self.inv_n1;
                                for (o, slot) in chunk.iter_mut().enumerate() {
                                    let k = k0 + o;
                                    let t = self.sqrt_dt
                                        * standard_normal(level3(hij, k as u64))
                                        + cs * self.y[k];
                                    *slot += w * t;
                                }
                            }
                        }
                    }
                }
            });
        out
    }

    /// All three contractions the AMP step needs, in a single pass over the
    /// tensor: `(T(·, x̂, ŷ), T(û, ·, ŷ), T(û, x̂, ·))`.
    ///
    /// The pass runs over fixed 16-row chunks of the first mode; the chunk
    /// partials for the second and third outputs are combined in chunk order,
    /// so the result is independent of thread count (though the grouping
    /// differs from the single-mode kernels in the last ulp).
    pub fn contract_amp(
        &self,
        u: &[f64],
        x: &[f64],
        y: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        for (len, want, what) in [
            (u.len(), self.n1, "fused contraction (mode-1 vector)"),
            (x.len(), self.n3, "fused contraction (mode-3 vector)"),
            (y.len(), self.n4, "fused contraction (mode-4 vector)"),
        ] {
            if len != want {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: want,
                    got: len,
                });
            }
        }
        let nchunks = self.n1.div_ceil(FUSED_CHUNK);
        let partials: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..nchunks)
            .into_par_iter()
            .map(|c| {
                let i0 = c * FUSED_CHUNK;
                let i1 = (i0 + FUSED_CHUNK).min(self.n1);
                let mut out1 = vec![0.0f64; i1 - i0];
                let mut out3 = vec![0.0f64; self.n3];
                let mut out4 = vec![0.0f64; self.n4];
                for i in i0..i1 {
                    let mut acc1 = 0.0;
                    match &self.storage {
                        Storage::Dense64(d) => {
                            for j in 0..self.n3 {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                let p = fused_row(|k| row[k], y, u[i] * x[j], &mut out4);
                                acc1 += x[j] * p;
                                out3[j] += u[i] * p;
                            }
                        }
                        Storage::Dense32(d) => {
                            for j in 0..self.n3 {
                                let row = &d[(i * self.n3 + j) * self.n4..][..self.n4];
                                let p = fused_row(
                                    |k| f64::from(row[k]),
                                    y,
                                    u[i] * x[j],
                                    &mut out4,
                                );
                                acc1 += x[j] * p;
                                out3[j] += u[i] * p;
                            }
                        }
                        Storage::Virtual => {
                            let hi = level1(self.noise_prefix, i as u64);
                            for j in 0..self.n3 {
                                let hij = level2(hi, j as u64);
                                let cs = self.u[i] * self.x[j] * self.inv_n1;
                                let sd = self.sqrt_dt;
                                let ys = &self.y;
                                let p = fused_row(
                                    |k| {
                                        sd * standard_normal(level3(hij, k as u64))
                                            + cs * ys[k]
                                    },
                                    y,
                                    u[i] * x[j],
                                    &mut out4,
                                );
                                acc1 += x[j] * p;
                                out3[j] += u[i] * p;
                            }
                        }
                    }
                    out1[i - i0] = acc1;
                }
                (out1, out3, out4)
            })
            .collect();

        let mut out1 = vec![0.0f64; self.n1];
        let mut out3 = vec![0.0f64; self.n3];
        let mut out4 = vec![0.0f64; self.n4];
        for (c, (p1, p3, p4)) in partials.into_iter().enumerate() {
            let i0 = c * FUSED_CHUNK;
            out1[i0..i0 + p1.len()].copy_from_slice(&p1);
            for (o, v) in out3.iter_mut().zip(p3) {
                *o += v;
            }
            for (o, v) in out4.iter_mut().zip(p4) {
                *o += v;
            }
        }
        Ok((out1, out3, out4))
    }

    /// Contract mode 1 against a single vector, producing the `n3 x n4`
    /// matrix `Σ_i T_ijk a_i` (row-major). This is the input of the second
    /// spectral stage.
    pub fn contract_mode1_matrix(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.n1 {
            return Err(Error::DimensionMismatch {
                what: "mode-1 matrix contraction",
                expected: self.n1,
                got: a.len(),
            });
        }
        let n4 = self.n4;
        let mut out = vec![0.0f64; self.n3 * n4];
        out.par_chunks_mut(n4).enumerate().for_each(|(j, row)| {
            match &self.storage {
                Storage::Dense64(d) => {
                    for (i, &ai) in a.iter().enumerate() {
                        let src = &d[(i * self.n3 + j) * n4..][..n4];
                        for (slot, &t) in row.iter_mut().zip(src) {
                            *slot += ai * t;
                        }
                    }
                }
                Storage::Dense32(d) => {
                    for (i, &ai) in a.iter().enumerate() {
                        let src = &d[(i * self.n3 + j) * n4..][..n4];
                        for (slot, &t) in row.iter_mut().zip(src) {
                            *slot += ai * f64::from(t);
                        }
                    }
                }
                Storage::Virtual => {
                    for (i, &ai) in a.iter().enumerate() {
                        let hij = level2(level1(self.noise_prefix, i as u64), j as u64);
                        let cs = self.u[i] * self.x[j] * self.inv_n1;
                        for (k, slot) in row.iter_mut().enumerate() {
                            let t = self.sqrt_dt * standard_normal(level3(hij, k as u64))
                                + cs * self.y[k];
                            *slot += ai * t;
                        }
                    }
                }
            }
        });
        Ok(out)
    }
}

/// Inner row kernel of the fused pass: returns `Σ_k f(k) y_k` and adds
/// `c·f(k)` into `out4`. Four-way unrolled with fixed grouping.
#[inline(always)]
fn fused_row<F: Fn(usize) -> f64>(f: F, y: &[f64], c: f64, out4: &mut [f64]) -> f64 {
    let n = y.len();
    let chunks = n / 4;
    let mut acc = [0.0f64; 4];
    for q in 0..chunks {
        let k = 4 * q;
        let t0 = f(k);
        let t1 = f(k + 1);
        let t2 = f(k + 2);
        let t3 = f(k + 3);
        acc[0] += t0 * y[k];
        acc[1] += t1 * y[k + 1];
        acc[2] += t2 * y[k + 2];
        acc[3] += t3 * y[k + 3];
        out4[k] += c * t0;
        out4[k + 1] += c * t1;
        out4[k + 2] += c * t2;
        out4[k + 3] += c * t3;
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        let t = f(k);
        tail += t * y[k];
        out4[k] += c * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_observations, sample_planted, ModelParams};
    use approx::assert_abs_diff_eq;

    fn triple_loop(
        t: &TensorObservation,
        a: &[f64],
        b: &[f64],
        mode: ContractionMode,
    ) -> Vec<f64> {
        let (n1, n3, n4) = (t.n1, t.n3, t.n4);
        match mode {
            ContractionMode::Mode1 => (0..n1)
                .map(|i| {
                    let mut s = 0.0;
                    for j in 0..n3 {
                        for k in 0..n4 {
                            s += t.entry(i, j, k) * a[j] * b[k];
                        }
                    }
                    s
                })
                .collect(),
            ContractionMode::Mode3 => (0..n3)
                .map(|j| {
                    let mut s = 0.0;
                    for i in 0..n1 {
                        for k in 0..n4 {
                            s += t.entry(i, j, k) * a[i] * b[k];
                        }
                    }
                    s
                })
                .collect(),
            ContractionMode::Mode4 => (0..n4)
                .map(|k| {
                    let mut s = 0.0;
                    for i in 0..n1 {
                        for j in 0..n3 {
                            s += t.entry(i, j, k) * a[i] * b[j];
                        }
                    }
                    s
                })
                .collect(),
        }
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().map(|x| x.abs()).fold(1e-30, f64::max);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn basis_tensor_contraction() {
        let mut data = vec![0.0; 27];
        data[0] = 1.0; // e1 ⊗ e1 ⊗ e1
        let t = TensorObservation::from_dense64(3, 3, 3, data).unwrap();
        let e1 = vec![1.0, 0.0, 0.0];
        let out = t.contract(&e1, &e1, ContractionMode::Mode1).unwrap();
        assert_eq!(out, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rank_one_contraction_closed_form() {
        // zero tensor noise: T = u ⊗ x ⊗ y / n1, so T(·, x, y) = u |x|²|y|²/n1
        let p = ModelParams::new_test_mode(1.0, 0.0, [1.0, 0.8, 1.2]).unwrap();
        let s = sample_planted(&p, 20, 5).unwrap();
        let (_, t) = generate_observations(&s, &p, 5, TensorBackend::Virtual, None).unwrap();
        let out = t
            .contract(&s.w[2], &s.w[3], ContractionMode::Mode1)
            .unwrap();
        let scale = (t.n3 * t.n4) as f64 / t.n1 as f64;
        for (o, &u) in out.iter().zip(&s.w[0]) {
            assert_abs_diff_eq!(*o, u * scale, epsilon = 1e-9);
        }
    }

    #[test]
    fn contractions_match_triple_loop_oracle() {
        let p = ModelParams::new(0.7, 0.3, [1.0, 0.75, 0.5]).unwrap();
        let s = sample_planted(&p, 20, 9).unwrap();
        let (_, t) = generate_observations(&s, &p, 9, TensorBackend::Dense64, None).unwrap();
        assert_eq!((t.n1, t.n3, t.n4), (20, 15, 10));
        let a3: Vec<f64> = (0..15).map(|i| (i as f64 * 0.7).sin()).collect();
        let a1: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos()).collect();
        let b4: Vec<f64> = (0..10).map(|i| 0.1 * i as f64 - 0.4).collect();
        for (mode, a, b) in [
            (ContractionMode::Mode1, &a3, &b4),
            (ContractionMode::Mode3, &a1, &b4),
            (ContractionMode::Mode4, &a1, &a3),
        ] {
            let got = t.contract(a, b, mode).unwrap();
            let want = triple_loop(&t, a, b, mode);
            assert!(
                rel_err(&got, &want) < 1e-12,
                "mode {mode:?}: {}",
                rel_err(&got, &want)
            );
        }
    }

    #[test]
    fn dense64_equals_virtual_bitwise() {
        let p = ModelParams::new(0.5, 0.4, [1.0, 1.0, 1.0]).unwrap();
        let s = sample_planted(&p, 24, 3).unwrap();
        let (_, dense) = generate_observations(&s, &p, 3, TensorBackend::Dense64, None).unwrap();
        let (_, virt) = generate_observations(&s, &p, 3, TensorBackend::Virtual, None).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                for k in 0..24 {
                    assert_eq!(
                        dense.entry(i, j, k).to_bits(),
                        virt.entry(i, j, k).to_bits()
                    );
                }
            }
        }
        let a: Vec<f64> = (0..24).map(|i| (i as f64 * 0.11).sin()).collect();
        let got_d = dense.contract(&a, &a, ContractionMode::Mode1).unwrap();
        let got_v = virt.contract(&a, &a, ContractionMode::Mode1).unwrap();
        assert_eq!(got_d, got_v);
    }

    #[test]
    fn dense32_matches_within_element_precision() {
        let p = ModelParams::new(0.5, 0.4, [1.0, 1.0, 1.0]).unwrap();
        let s = sample_planted(&p, 50, 4).unwrap();
        let (_, d32) = generate_observations(&s, &p, 4, TensorBackend::Dense32, None).unwrap();
        let (_, virt) = generate_observations(&s, &p, 4, TensorBackend::Virtual, None).unwrap();
        let a: Vec<f64> = (0..50).map(|i| (i as f64 * 0.2).cos()).collect();
        for mode in [
            ContractionMode::Mode1,
            ContractionMode::Mode3,
            ContractionMode::Mode4,
        ] {
            let g32 = d32.contract(&a, &a, mode).unwrap();
            let g64 = virt.contract(&a, &a, mode).unwrap();
            assert!(rel_err(&g32, &g64) < 1e-5, "mode {mode:?}");
        }
    }

    #[test]
    fn capacity_guard_fires() {
        let p = ModelParams::new(0.7, 0.3, [1.5, 0.8, 1.0]).unwrap();
        // do not actually allocate: the guard must reject before allocation
        let s = sample_planted(&p, 1000, 1).unwrap();
        let err = generate_observations(&s, &p, 1, TensorBackend::Dense64, None).unwrap_err();
        match err {
            Error::Capacity {
                requested_bytes,
                budget_bytes,
            } => {
                assert_eq!(requested_bytes, 1000 * 800 * 1000 * 8);
                assert_eq!(budget_bytes, crate::model::DEFAULT_MEM_BUDGET);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn fused_pass_matches_single_mode_kernels() {
        let p = ModelParams::new(0.6, 0.5, [1.0, 0.8, 1.2]).unwrap();
        let s = sample_planted(&p, 30, 8).unwrap();
        let (_, t) = generate_observations(&s, &p, 8, TensorBackend::Virtual, None).unwrap();
        let u: Vec<f64> = (0..t.n1).map(|i| (i as f64 * 0.13).sin()).collect();
        let x: Vec<f64> = (0..t.n3).map(|i| (i as f64 * 0.29).cos()).collect();
        let y: Vec<f64> = (0..t.n4).map(|i| 0.05 * i as f64 - 1.0).collect();
        let (f1, f3, f4) = t.contract_amp(&u, &x, &y).unwrap();
        let c1 = t.contract(&x, &y, ContractionMode::Mode1).unwrap();
        let c3 = t.contract(&u, &y, ContractionMode::Mode3).unwrap();
        let c4 = t.contract(&u, &x, ContractionMode::Mode4).unwrap();
        assert!(rel_err(&f1, &c1) < 1e-12);
        assert!(rel_err(&f3, &c3) < 1e-12);
        assert!(rel_err(&f4, &c4) < 1e-12);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let p = ModelParams::new(0.6, 0.5, [1.0, 1.0, 1.0]).unwrap();
        let s = sample_planted(&p, 40, 12).unwrap();
        let (_, t) = generate_observations(&s, &p, 12, TensorBackend::Virtual, None).unwrap();
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.17).sin()).collect();

        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let c = t.contract(&a, &a, ContractionMode::Mode4).unwrap();
                let f = t.contract_amp(&a, &a, &a).unwrap();
                (c, f)
            })
        };
        let (c1, f1) = run(1);
        let (c4, f4) = run(4);
        assert_eq!(c1, c4);
        assert_eq!(f1.0, f4.0);
        assert_eq!(f1.1, f4.1);
        assert_eq!(f1.2, f4.2);
    }

    #[test]
    fn mode1_matrix_contraction_matches_oracle() {
        let p = ModelParams::new(0.7, 0.4, [1.0, 0.6, 0.9]).unwrap();
        let s = sample_planted(&p, 15, 6).unwrap();
        let (_, t) = generate_observations(&s, &p, 6, TensorBackend::Virtual, None).unwrap();
        let a: Vec<f64> = (0..15).map(|i| (i as f64 * 0.41).cos()).collect();
        let m = t.contract_mode1_matrix(&a).unwrap();
        for j in 0..t.n3 {
            for k in 0..t.n4 {
                let want: f64 = (0..t.n1).map(|i| t.entry(i, j, k) * a[i]).sum();
                assert_abs_diff_eq!(m[j * t.n4 + k], want, epsilon = 1e-10);
            }
        }
    }
}
