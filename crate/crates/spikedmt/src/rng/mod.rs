//! Counter-based random number generation.
//!
//! Every random quantity in this crate is a pure function of a 64-bit key, so
//! instances, estimators and Monte Carlo trials are reproducible bit-for-bit
//! regardless of evaluation order or thread count. There is no mutable RNG
//! state anywhere: the noise tensor entry at `(i, j, k)`, the matrix noise at
//! `(i, j)` and the `i`-th coordinate of a sampled signal are each derived
//! from `(seed, stream, indices)` on demand. This is what makes the virtual
//! (never materialized) tensor backend possible.
//!
//! # Exact scheme
//!
//! Keys are derived by chaining the splitmix64 finalizer:
//!
//! ```text
//! prefix      = splitmix64(seed xor STREAM_TAG)
//! level(h, m) = splitmix64(h xor (m + 1) * Cl)     (distinct odd Cl per level)
//! key(i,j,k)  = level(level(level(prefix, i), j), k)
//! ```
//!
//! and a standard normal draw is produced from one key by a 256-layer
//! ziggurat over the unnormalized density exp(-x²/2) (tables in
//! [`tables`], embedded as bit-exact literals). The fast path — roughly 98.5%
//! of draws — uses only integer mixing, one table compare and one multiply;
//! the wedge and tail fallbacks consume further keys derived from the same
//! entry key with fixed salts, so the value is still a pure function of the
//! entry key.
//!
//! Determinism caveat: fast-path draws involve only IEEE-exact arithmetic and
//! are identical on every platform. The rare wedge/tail fallbacks call
//! `exp`/`ln` from the platform libm, which may differ in the last ulp across
//! platforms (never across runs or thread counts on one platform).

mod tables;

use tables::{ZIG_NORM_F, ZIG_NORM_R, ZIG_NORM_X};

/// splitmix64 finalizer (Steele, Lea, Flood 2014). Bijective on `u64`.
#[inline(always)]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

// Per-level multipliers for index chaining; odd, so m -> (m+1)*C is injective.
const LEVEL_1: u64 = 0xC2B2AE3D27D4EB4F;
const LEVEL_2: u64 = 0x165667B19E3779F9;
const LEVEL_3: u64 = 0x9E3779B97F4A7C15;

// Salts for the ziggurat slow paths and rejection restarts.
const WEDGE_SALT: u64 = 0x8CB92BA72F3D8DD7;
const TAIL_SALT: u64 = 0xEB44ACCAB455D165;
const RETRY_SALT: u64 = 0xA0761D6478BD642F;

/// Independent noise streams, domain-separating every random quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Additive noise of the matrix observation, indexed (i, j).
    MatrixNoise,
    /// Additive noise of the tensor observation, indexed (i, j, k).
    TensorNoise,
    /// Planted signal component `k` in 0..4, indexed by coordinate.
    Signal(u8),
    /// Estimator initialization for component `k` in 0..4.
    Init(u8),
    /// Free-form stream for auxiliary draws (e.g. power-iteration starts).
    Aux(u64),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::MatrixNoise => 0x6D61747269786E,
            Stream::TensorNoise => 0x74656E736F726E,
            Stream::Signal(k) => 0x7369676E0000 ^ u64::from(k),
            Stream::Init(k) => 0x696E69740000 ^ u64::from(k),
            Stream::Aux(n) => 0x61757800_0000_0000 ^ n,
        }
    }
}

/// Stream prefix: the root of the per-stream key chain.
#[inline]
pub fn stream_prefix(seed: u64, stream: Stream) -> u64 {
    splitmix64(seed ^ stream.tag())
}

/// Chain one index level into a key.
#[inline(always)]
pub fn level1(prefix: u64, i: u64) -> u64 {
    splitmix64(prefix ^ (i.wrapping_add(1)).wrapping_mul(LEVEL_1))
}

/// Chain a second index level.
#[inline(always)]
pub fn level2(h: u64, j: u64) -> u64 {
    splitmix64(h ^ (j.wrapping_add(1)).wrapping_mul(LEVEL_2))
}

/// Final (third) index level. Cheap: the ziggurat finalizes internally.
#[inline(always)]
pub fn level3(h: u64, k: u64) -> u64 {
    h ^ (k.wrapping_add(1)).wrapping_mul(LEVEL_3)
}

/// Uniform in [0, 1) with 53-bit resolution.
#[inline(always)]
pub fn uniform53(key: u64) -> f64 {
    (splitmix64(key) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

#[inline(always)]
fn mant53(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / 9007199254740992.0)
}

// Uniform in (0, 1): strip midpoint, safe under ln().
#[inline(always)]
fn mant53_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// One standard normal draw from one key.
#[inline]
pub fn standard_normal(key: u64) -> f64 {
    let mut state = key;
    loop {
        let bits = splitmix64(state);
        let i = (bits & 0xFF) as usize;
        // sign and magnitude from bits 11..64: u in (-1, 1)
        let u = 2.0 * mant53(bits) - 1.0;
        let x = u * ZIG_NORM_X[i];
        if x.abs() < ZIG_NORM_X[i + 1] {
            return x;
        }
        if i == 0 {
            // Marsaglia tail sampling beyond R
            let mut t = splitmix64(state ^ TAIL_SALT);
            loop {
                let a = -mant53_open(splitmix64(t)).ln() / ZIG_NORM_R;
                let b = -mant53_open(splitmix64(t ^ WEDGE_SALT)).ln();
                if b + b > a * a {
                    let mag = ZIG_NORM_R + a;
                    return if u < 0.0 { -mag } else { mag };
                }
                t = splitmix64(t);
            }
        }
        // wedge: accept under the true density
        let y = ZIG_NORM_F[i]
            + (ZIG_NORM_F[i + 1] - ZIG_NORM_F[i]) * mant53(splitmix64(state ^ WEDGE_SALT));
        if y < (-0.5 * x * x).exp() {
            return x;
        }
        state = splitmix64(state ^ RETRY_SALT);
    }
}

/// Derive a trial seed from a base seed and structured indices.
///
/// Used by the experiment harness: `hash(base_seed, point, trial)`. Changing
/// one index never perturbs the stream of another.
#[inline]
pub fn derive_seed(base_seed: u64, point: u64, trial: u64) -> u64 {
    level2(level1(splitmix64(base_seed), point), trial)
}
