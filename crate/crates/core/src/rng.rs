//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`], a ChaCha8
//! generator. Independent sub-streams are derived from a master seed with
//! [`substream`]: the generator is keyed by the master seed and positioned on
//! ChaCha stream number `index`. Trial `k` of a campaign always uses
//! `substream(seed, k)`, whatever the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
