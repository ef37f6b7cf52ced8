//! Deterministic derivation of independent random streams from one master
//! seed.
//!
//! Every stream is addressed by a path of integers below the master seed,
//! e.g. `[TRIAL, t, CHUNK, c]` for the voters of chunk `c` in trial `t`. The
//! path is folded into a 64-bit key with SplitMix64 (each step mixes the
//! running key with the next component), and the key seeds a ChaCha8
//! generator. Voters are simulated in fixed-size chunks, so the result of a
//! simulation does not depend on how many threads process the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of voters drawn from one derived stream.
pub const CHUNK_VOTERS: usize = 1 << 13;

/// Path tag for per-trial streams.
pub const TRIAL: u64 = 0x7472_6961_6c00_0000;
/// Path tag for per-chunk voter streams.
pub const CHUNK: u64 = 0x6368_756e_6b00_0000;
/// Path tag for instance generation in randomized sweeps.
pub const SWEEP: u64 = 0x7377_6565_7000_0000;
/// Path tag for the verification suites.
pub const VERIFY: u64 = 0x7665_7269_6679_0000;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `path` into `master`.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |key, &p| splitmix64(key ^ splitmix64(p)))
}

/// A generator for the stream at `path` below `master`.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}

/// Seed for trial `t` of an experiment with master seed `master`.
pub fn trial_seed(master: u64, t: u64) -> u64 {
    derive(master, &[TRIAL, t])
}
