use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{word_ngrams, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    None,
    /// +1 on matched and total counts for every order >= 2.
    AddOneForOrdersGe2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub smoothing: Smoothing,
}

impl BleuConfig {
    /// Smoothed configuration used for sentence-level scoring.
    pub fn sentence() -> Self {
        BleuConfig {
            max_order: 4,
            smoothing: Smoothing::AddOneForOrdersGe2,
        }
    }

    /// Unsmoothed configuration used for corpus-level scoring.
    pub fn corpus() -> Self {
        BleuConfig {
            max_order: 4,
            smoothing: Smoothing::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=9).contains(&self.max_order) {
            return Err(Error::InvalidConfig(format!(
                "BLEU max_order must be in 1..=9, got {}",
                self.max_order
            )));
        }
        Ok(())
    }
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self::sentence()
    }
}

/// Sufficient statistics for BLEU; summing them across segments gives the
/// corpus-level statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    fn zero(max_order: usize) -> Self {
        BleuStats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Collects clipped n-gram matches of `hypothesis` against the per-n-gram
    /// maximum over `references`.
    pub fn collect(hypothesis: &Sentence, references: &[Sentence], max_order: usize) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::EmptyReferences);
        }
        let hyp = hypothesis.tokens();
        let mut stats = BleuStats::zero(max_order);
        for n in 1..=max_order {
            let hyp_grams = word_ngrams(hyp, n);
            let mut ref_max = word_ngrams(references[0].tokens(), n);
            for r in &references[1..] {
                ref_max.max_merge(&word_ngrams(r.tokens(), n));
            }
            stats.matches[n - 1] = hyp_grams.overlap(&ref_max);
            stats.totals[n - 1] = hyp_grams.total();
        }
        stats.hyp_len = hyp.len();
        stats.ref_len = closest_ref_len(hyp.len(), references);
        Ok(stats)
    }

    pub fn score(&self, smoothing: Smoothing) -> f64 {
        if self.hyp_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut used = 0usize;
        for (idx, (&m, &t)) in self.matches.iter().zip(&self.totals).enumerate() {
            let p = match smoothing {
                Smoothing::AddOneForOrdersGe2 if idx >= 1 => (m as f64 + 1.0) / (t as f64 + 1.0),
                _ => {
                    // Orders longer than the hypothesis carry no evidence.
                    if t == 0 {
                        continue;
                    }
                    if m == 0 {
                        return 0.0;
                    }
                    m as f64 / t as f64
                }
            };
            log_sum += p.ln();
            used += 1;
        }
        let c = self.hyp_len as f64;
        let r = self.ref_len as f64;
        let bp = (1.0 - r / c).exp().min(1.0);
        (bp * (log_sum / used as f64).exp() * 100.0).clamp(0.0, 100.0)
    }
}

/// Reference length closest to `hyp_len`; ties go to the shorter reference.
fn closest_ref_len(hyp_len: usize, references: &[Sentence]) -> usize {
    references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .unwrap_or(0)
}

pub fn sentence_bleu(hypothesis: &Sentence, references: &[Sentence], config: &BleuConfig) -> Result<f64> {
    config.validate()?;
    Ok(BleuStats::collect(hypothesis, references, config.max_order)?.score(config.smoothing))
}

/// Micro-averaged BLEU: statistics are summed over all segments before the
/// formula is applied.
pub fn corpus_bleu(pairs: &[(&Sentence, &[Sentence])], config: &BleuConfig) -> Result<f64> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("corpus BLEU needs at least one segment"));
    }
    let mut total = BleuStats::zero(config.max_order);
    for (hyp, refs) in pairs {
        total.add(&BleuStats::collect(hyp, refs, config.max_order)?);
    }
    Ok(total.score(config.smoothing))
}
