// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic random streams. Every consumer derives its generator from a
//! master seed and a stream index, so results do not depend on execution
//! order or parallelism.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

/// Generator for stream `index` under `master`.
pub fn stream(master: u64, index: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Mixes a label into a seed so unrelated consumers of one master seed get
/// independent streams.
pub fn derive(master: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the seed with a splitmix finaliser
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
