//! Dataset-level generation: one n-gram model per instance, trained on that
//! instance's references, stands in for a model conditioned on the input.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    generate_ensemble, generate_random, generate_top3_beam, generate_topk_random, mix_seed, train_ngram, GenerationSet,
    NGramLM, SequenceModel, Strategy, SET_SIZE,
};
use crate::corpus::{Dataset, OutputRecord};
use crate::error::{Error, Result};
use crate::multi_score::EvalInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerateConfig {
    pub strategy: Strategy,
    pub order: usize,
    pub add_k: f64,
    pub seed: u64,
    pub beam_width: usize,
    pub max_len: usize,
    pub alpha: f64,
    pub top_k: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            strategy: Strategy::BeamTop3,
            order: 3,
            add_k: 0.1,
            seed: 0,
            beam_width: 5,
            max_len: 64,
            alpha: 1.0,
            top_k: 3,
        }
    }
}

fn token_corpus<'a>(refs: impl Iterator<Item = &'a crate::text::Sentence>) -> Vec<Vec<String>> {
    refs.map(|s| s.tokens().to_vec()).collect()
}

/// Splits references round-robin into three shards. A shard left empty (fewer
/// than three references) reuses reference `k mod n`.
pub fn shard_references(instance: &EvalInstance) -> Vec<Vec<Vec<String>>> {
    let refs = &instance.references;
    (0..SET_SIZE)
        .map(|k| {
            let shard = token_corpus(refs.iter().skip(k).step_by(SET_SIZE));
            if shard.is_empty() {
                token_corpus(std::iter::once(&refs[k % refs.len()]))
            } else {
                shard
            }
        })
        .collect()
}

/// Trains the pooled model of one instance.
pub fn instance_model(instance: &EvalInstance, config: &GenerateConfig) -> Result<NGramLM> {
    train_ngram(&token_corpus(instance.references.iter()), config.order, config.add_k)
}

pub fn generate_instance(instance: &EvalInstance, index: usize, config: &GenerateConfig) -> Result<GenerationSet> {
    let seed = mix_seed(config.seed, index as u64);
    let set = match config.strategy {
        Strategy::BeamTop3 => {
            let model = instance_model(instance, config)?;
            generate_top3_beam(&model, config.beam_width, config.max_len, config.alpha)?
        }
        Strategy::TotalRandom => generate_random(&instance_model(instance, config)?, seed, config.max_len),
        Strategy::TopkRandom => {
            generate_topk_random(&instance_model(instance, config)?, config.top_k, seed, config.max_len)?
        }
        Strategy::Ensemble => {
            let models = shard_references(instance)
                .iter()
                .map(|shard| train_ngram(shard, config.order, config.add_k))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&dyn SequenceModel> = models.iter().map(|m| m as &dyn SequenceModel).collect();
            generate_ensemble(&refs, config.beam_width, config.max_len, config.alpha)?
        }
    };
    Ok(set.for_instance(instance.id.clone()))
}

/// Generates a three-sentence set for every instance. Instances run in
/// parallel; each derives its own seed from `(config.seed, index)`, so results
/// do not depend on scheduling.
pub fn generate_for_dataset(dataset: &Dataset, config: &GenerateConfig) -> Result<Vec<OutputRecord>> {
    if dataset.is_empty() {
        return Err(Error::invalid("training data has no instances"));
    }
    dataset
        .instances()
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let set = generate_instance(inst, i, config)?;
            Ok(OutputRecord {
                id: set.instance_id,
                outputs: set.sentences,
                strategy: Some(set.strategy.as_str().to_string()),
                seed: set.seed,
                filled: set.filled,
                truncated: set.truncated,
            })
        })
        .collect()
}
