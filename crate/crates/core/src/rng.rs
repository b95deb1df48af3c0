//! Seeded random streams.
//!
//! Every random draw in the crate goes through ChaCha8 so that a seed
//! produces the same values on every platform. Independent quantities drawn
//! from one seed (graph topology, edge weights, initial parameters) use
//! distinct ChaCha stream ids rather than consecutive draws, so adding a
//! consumer never shifts another consumer's values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TOPOLOGY_STREAM: u64 = 0;
pub const WEIGHT_STREAM: u64 = 1;
pub const PARAM_STREAM: u64 = 2;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
