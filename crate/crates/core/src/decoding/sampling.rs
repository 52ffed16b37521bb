use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SequenceModel, TokenId};

/// Independent generator for sample `index` of a run seeded with `seed`.
///
/// Each sample owns a ChaCha8 stream, so samples can be drawn in any order or
/// in parallel without changing their values.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finaliser; derives well-spread child seeds from `(seed, index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `k` most probable token ids (ties to the lower id), returned in id order.
pub fn top_k_ids(dist: &[f64], k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..dist.len()).collect();
    ids.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    ids.truncate(k);
    ids.sort_unstable();
    ids
}

/// Draws one token from `dist`, optionally restricted to its top `k` entries
/// and renormalised. Inverse-CDF over ascending token ids.
pub fn sample_token(dist: &[f64], top_k: Option<usize>, rng: &mut impl Rng) -> TokenId {
    let support: Vec<usize> = match top_k {
        Some(k) if k < dist.len() => top_k_ids(dist, k),
        _ => (0..dist.len()).collect(),
    };
    let mass: f64 = support.iter().map(|&t| dist[t]).sum();
    let u: f64 = rng.gen::<f64>() * mass;
    let mut cum = 0.0;
    let mut last = support[0];
    for &t in &support {
        if dist[t] <= 0.0 {
            continue;
        }
        cum += dist[t];
        last = t;
        if u < cum {
            return t as TokenId;
        }
    }
    last as TokenId
}

/// Ancestral sampling until end-of-sequence or `max_len` steps. Returns the
/// tokens and whether end-of-sequence was reached.
pub fn sample_sequence(
    model: &dyn SequenceModel,
    top_k: Option<usize>,
    max_len: usize,
    rng: &mut impl Rng,
) -> (Vec<TokenId>, bool) {
    let eos = model.eos();
    let mut tokens = Vec::new();
    for _ in 0..max_len {
        let dist = model.next_distribution(&tokens);
        let t = sample_token(&dist, top_k, rng);
        if t == eos {
            return (tokens, true);
        }
        tokens.push(t);
    }
    (tokens, false)
}
