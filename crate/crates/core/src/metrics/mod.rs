//! Sentence- and corpus-level quality metrics plus the Self-BLEU diversity
//! baseline.
//!
//! Every metric that can weight an output/reference edge implements
//! [`SentenceMetric`], which is what the Multi-Score matcher consumes.

pub mod bleu;
pub mod chrf;
pub mod self_bleu;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Sentence;

pub use bleu::{corpus_bleu, sentence_bleu, BleuConfig, BleuStats, Smoothing};
pub use chrf::{corpus_chrfpp, sentence_chrfpp, sentence_chrfpp_multi, ChrfConfig};
pub use self_bleu::self_bleu;

/// Scores one hypothesis against one or more references on a 0..=100 scale.
///
/// Implementations must return 100 when the hypothesis equals its single
/// reference and must be deterministic.
pub trait SentenceMetric: Sync {
    fn name(&self) -> &str;
    fn score(&self, hypothesis: &Sentence, references: &[Sentence]) -> Result<f64>;
}

/// Smoothed sentence-level BLEU (the default `BleuConfig`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SentenceBleu {
    pub config: BleuConfig,
}

impl SentenceMetric for SentenceBleu {
    fn name(&self) -> &str {
        "bleu"
    }

    fn score(&self, hypothesis: &Sentence, references: &[Sentence]) -> Result<f64> {
        sentence_bleu(hypothesis, references, &self.config)
    }
}

/// Sentence-level chrF++; with several references the best one counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SentenceChrf {
    pub config: ChrfConfig,
}

impl SentenceMetric for SentenceChrf {
    fn name(&self) -> &str {
        "chrf"
    }

    fn score(&self, hypothesis: &Sentence, references: &[Sentence]) -> Result<f64> {
        sentence_chrfpp_multi(hypothesis, references, &self.config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LookupEntry {
    hypothesis: String,
    reference: String,
    score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LookupFile {
    name: String,
    scores: Vec<LookupEntry>,
}

/// A metric backed by a table of precomputed pairwise scores, keyed by the
/// trimmed raw text of hypothesis and reference.
///
/// Useful for auditing the matcher against externally computed scores, or for
/// replaying a published score matrix.
#[derive(Debug, Clone)]
pub struct LookupMetric {
    name: String,
    table: HashMap<(String, String), f64>,
}

impl LookupMetric {
    pub fn new(name: impl Into<String>) -> Self {
        LookupMetric {
            name: name.into(),
            table: HashMap::new(),
        }
    }

    pub fn insert(&mut self, hypothesis: &str, reference: &str, score: f64) -> Result<()> {
        if !(0.0..=100.0).contains(&score) {
            return Err(Error::invalid(format!(
                "lookup score {score} for ({hypothesis:?}, {reference:?}) is outside [0, 100]"
            )));
        }
        self.table
            .insert((hypothesis.trim().to_string(), reference.trim().to_string()), score);
        Ok(())
    }

    /// Reads `{"name": ..., "scores": [{"hypothesis", "reference", "score"}, ...]}`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: LookupFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut metric = LookupMetric::new(file.name);
        for entry in file.scores {
            metric.insert(&entry.hypothesis, &entry.reference, entry.score)?;
        }
        Ok(metric)
    }
}

impl SentenceMetric for LookupMetric {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, hypothesis: &Sentence, references: &[Sentence]) -> Result<f64> {
        if references.is_empty() {
            return Err(Error::EmptyReferences);
        }
        let mut best = f64::NEG_INFINITY;
        for r in references {
            let key = (hypothesis.raw().to_string(), r.raw().to_string());
            let v = if hypothesis.raw() == r.raw() {
                self.table.get(&key).copied().unwrap_or(100.0)
            } else {
                *self.table.get(&key).ok_or_else(|| {
                    Error::invalid(format!(
                        "no score for hypothesis {:?} against reference {:?}",
                        hypothesis.raw(),
                        r.raw()
                    ))
                })?
            };
            best = best.max(v);
        }
        Ok(best)
    }
}
