//! Seeding contract: path `i` of a run with root seed `s` draws from the
//! ChaCha8 stream `i` keyed by `s`. Paths never share a stream, so the
//! result of a run does not depend on how paths are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(seed: u64, path: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}
