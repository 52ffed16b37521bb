//! Toy generation harness: set-decoding strategies over count-based n-gram
//! models, used to produce output sets that exercise the metrics end to end.
//!
//! Four strategies produce three sentences each:
//!
//! * [`generate_top3_beam`]: the three best finished beam-search hypotheses.
//! * [`generate_random`]: three ancestral samples from the full distribution.
//! * [`generate_topk_random`]: three samples restricted to the top-k tokens.
//! * [`generate_ensemble`]: the single best beam hypothesis of each of three models.
//!
//! All strategies forbid an immediate end-of-sequence so that no generated
//! sentence is empty.

pub mod beam;
pub mod harness;
pub mod ngram;
pub mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use beam::{beam_search, greedy, length_penalty, penalized_score, Hypothesis};
pub use harness::{generate_for_dataset, GenerateConfig};
pub use ngram::{train_ngram, NGramLM, EOS};
pub use sampling::{mix_seed, sample_rng, sample_sequence};

pub type TokenId = u32;

/// Sentences generated per input.
pub const SET_SIZE: usize = 3;

/// A left-to-right next-token model over a fixed vocabulary.
pub trait SequenceModel: Sync {
    /// Vocabulary indexed by token id; includes the end-of-sequence token.
    fn vocab(&self) -> &[String];
    fn eos(&self) -> TokenId;
    /// Probability of every vocabulary token following `context`; sums to 1.
    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64>;
}

/// Removes end-of-sequence from the first step's distribution.
struct NonEmpty<'a>(&'a dyn SequenceModel);

impl SequenceModel for NonEmpty<'_> {
    fn vocab(&self) -> &[String] {
        self.0.vocab()
    }

    fn eos(&self) -> TokenId {
        self.0.eos()
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        let mut dist = self.0.next_distribution(context);
        if context.is_empty() {
            let eos = self.eos() as usize;
            let rest = 1.0 - dist[eos];
            if rest > 0.0 {
                dist[eos] = 0.0;
                dist.iter_mut().for_each(|p| *p /= rest);
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "beam3")]
    BeamTop3,
    #[serde(rename = "random")]
    TotalRandom,
    #[serde(rename = "topk3")]
    TopkRandom,
    #[serde(rename = "ensemble")]
    Ensemble,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::BeamTop3 => "beam3",
            Strategy::TotalRandom => "random",
            Strategy::TopkRandom => "topk3",
            Strategy::Ensemble => "ensemble",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beam3" => Ok(Strategy::BeamTop3),
            "random" => Ok(Strategy::TotalRandom),
            "topk3" => Ok(Strategy::TopkRandom),
            "ensemble" => Ok(Strategy::Ensemble),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationSet {
    pub instance_id: String,
    pub strategy: Strategy,
    pub sentences: Vec<String>,
    /// Seed of the sampling strategies; `None` for deterministic ones.
    pub seed: Option<u64>,
    /// Fewer than three distinct finished hypotheses were available.
    pub filled: bool,
    /// Some sentence hit the length limit before end-of-sequence.
    pub truncated: bool,
}

impl GenerationSet {
    pub fn for_instance(mut self, id: impl Into<String>) -> Self {
        self.instance_id = id.into();
        self
    }
}

fn detokenize(model: &dyn SequenceModel, tokens: &[TokenId]) -> String {
    let vocab = model.vocab();
    tokens
        .iter()
        .map(|&t| vocab[t as usize].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// The three best finished beam hypotheses. If fewer than three finish, the
/// best unfinished prefixes (distinct, non-empty) fill the set, and as a last
/// resort the best sentence is repeated; either case sets `filled`.
pub fn generate_top3_beam(
    model: &dyn SequenceModel,
    beam_width: usize,
    max_len: usize,
    alpha: f64,
) -> Result<GenerationSet> {
    if beam_width < SET_SIZE {
        return Err(Error::InvalidConfig(format!(
            "top-3 beam search needs beam_width >= 3, got {beam_width}"
        )));
    }
    let guarded = NonEmpty(model);
    let outcome = beam::run_beam(&guarded, beam_width, max_len, alpha);
    let mut chosen: Vec<Vec<TokenId>> = outcome
        .finished
        .iter()
        .take(SET_SIZE)
        .map(|h| h.tokens.clone())
        .collect();
    let mut filled = false;
    let mut truncated = false;
    if chosen.len() < SET_SIZE {
        filled = true;
        let mut pool = outcome.unfinished;
        pool.sort_by(beam::rank);
        for h in pool {
            if chosen.len() == SET_SIZE {
                break;
            }
            if !h.tokens.is_empty() && !chosen.contains(&h.tokens) {
                truncated = true;
                chosen.push(h.tokens);
            }
        }
        while !chosen.is_empty() && chosen.len() < SET_SIZE {
            chosen.push(chosen[0].clone());
        }
    }
    Ok(GenerationSet {
        instance_id: String::new(),
        strategy: Strategy::BeamTop3,
        sentences: chosen.iter().map(|t| detokenize(model, t)).collect(),
        seed: None,
        filled,
        truncated,
    })
}

fn generate_sampled(
    model: &dyn SequenceModel,
    top_k: Option<usize>,
    seed: u64,
    max_len: usize,
    strategy: Strategy,
) -> GenerationSet {
    let guarded = NonEmpty(model);
    let mut truncated = false;
    let sentences = (0..SET_SIZE as u64)
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let (tokens, done) = sample_sequence(&guarded, top_k, max_len, &mut rng);
            truncated |= !done;
            detokenize(model, &tokens)
        })
        .collect();
    GenerationSet {
        instance_id: String::new(),
        strategy,
        sentences,
        seed: Some(seed),
        filled: false,
        truncated,
    }
}

/// Three ancestral samples from the full next-token distribution; sample `i`
/// draws from its own stream `(seed, i)`.
pub fn generate_random(model: &dyn SequenceModel, seed: u64, max_len: usize) -> GenerationSet {
    generate_sampled(model, None, seed, max_len, Strategy::TotalRandom)
}

pub fn generate_topk_random(model: &dyn SequenceModel, k: usize, seed: u64, max_len: usize) -> Result<GenerationSet> {
    if k == 0 {
        return Err(Error::InvalidConfig("top-k sampling needs k >= 1".into()));
    }
    Ok(generate_sampled(model, Some(k), seed, max_len, Strategy::TopkRandom))
}

/// Sentence `i` is the best beam-search output of `models[i]`.
pub fn generate_ensemble(
    models: &[&dyn SequenceModel],
    beam_width: usize,
    max_len: usize,
    alpha: f64,
) -> Result<GenerationSet> {
    if models.len() != SET_SIZE {
        return Err(Error::invalid(format!(
            "ensemble needs exactly 3 models, got {}",
            models.len()
        )));
    }
    let mut filled = false;
    let mut truncated = false;
    let mut sentences = Vec::with_capacity(SET_SIZE);
    for &model in models {
        let guarded = NonEmpty(model);
        let outcome = beam::run_beam(&guarded, beam_width.max(1), max_len, alpha);
        let best = match outcome.finished.into_iter().next() {
            Some(h) => h.tokens,
            None => {
                filled = true;
                truncated = true;
                let mut pool = outcome.unfinished;
                pool.sort_by(beam::rank);
                pool.into_iter().next().map(|h| h.tokens).unwrap_or_default()
            }
        };
        sentences.push(detokenize(model, &best));
    }
    Ok(GenerationSet {
        instance_id: String::new(),
        strategy: Strategy::Ensemble,
        sentences,
        seed: None,
        filled,
        truncated,
    })
}
