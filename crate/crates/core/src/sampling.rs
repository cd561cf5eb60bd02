//! Counter-based random streams and small numeric helpers shared by the
//! Monte Carlo estimators.
//!
//! Trial `i` of a run seeded with `seed` always draws from ChaCha8 stream `i`
//! of that seed, so results do not depend on how trials are scheduled across
//! threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::f2la::BitVector;

/// RNG for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derives an unrelated seed (splitmix64 finaliser).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// I.i.d. Bernoulli(`p`) mask of length `len`.
pub fn bernoulli_mask<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> BitVector {
    let mut v = BitVector::zeros(len);
    for i in 0..len {
        if rng.random::<f64>() < p {
            v.set(i, true);
        }
    }
    v
}

/// Sample mean and standard error from a count of successes.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    let t = trials as f64;
    let mean = successes as f64 / t;
    let var = if trials > 1 {
        (successes as f64 - t * mean * mean) / (t - 1.0)
    } else {
        0.0
    };
    (mean, (var.max(0.0) / t).sqrt())
}

/// Sample mean and standard error from integer sums `Σx` and `Σx²`.
pub fn mean_stderr(sum: u64, sum_sq: u64, trials: u64) -> (f64, f64) {
    let t = trials as f64;
    let mean = sum as f64 / t;
    let var = if trials > 1 {
        (sum_sq as f64 - t * mean * mean) / (t - 1.0)
    } else {
        0.0
    };
    (mean, (var.max(0.0) / t).sqrt())
}
