//! Per-replica random streams.
//!
//! Replica `r` of a run with base seed `s` draws from ChaCha8 keyed by `s`
//! on stream `r`. Streams are disjoint, so results do not depend on which
//! worker ran which replica.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicaRng = ChaCha8Rng;

pub fn replica_rng(base_seed: u64, stream: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}
