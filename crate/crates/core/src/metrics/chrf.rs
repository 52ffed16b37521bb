use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{char_ngrams, word_ngrams, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            char_order: 6,
            word_order: 2,
            beta: 2.0,
        }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.char_order == 0 {
            return Err(Error::InvalidConfig("chrF char_order must be >= 1".into()));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "chrF beta must be > 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Matched / hypothesis / reference n-gram counts for one order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrderStats {
    pub matched: usize,
    pub hyp_total: usize,
    pub ref_total: usize,
}

/// Per-order statistics, character orders first, then word orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChrfStats(pub Vec<OrderStats>);

impl ChrfStats {
    pub fn collect(hypothesis: &Sentence, reference: &Sentence, config: &ChrfConfig) -> Self {
        let mut orders = Vec::with_capacity(config.char_order + config.word_order);
        for n in 1..=config.char_order {
            let h = char_ngrams(hypothesis.normalized(), n, true);
            let r = char_ngrams(reference.normalized(), n, true);
            orders.push(OrderStats {
                matched: h.overlap(&r),
                hyp_total: h.total(),
                ref_total: r.total(),
            });
        }
        for n in 1..=config.word_order {
            let h = word_ngrams(hypothesis.tokens(), n);
            let r = word_ngrams(reference.tokens(), n);
            orders.push(OrderStats {
                matched: h.overlap(&r),
                hyp_total: h.total(),
                ref_total: r.total(),
            });
        }
        ChrfStats(orders)
    }

    fn add(&mut self, other: &ChrfStats) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.matched += b.matched;
            a.hyp_total += b.hyp_total;
            a.ref_total += b.ref_total;
        }
    }

    /// Averages precision and recall over the orders where either side has
    /// n-grams, then combines them into F-beta, scaled to [0, 100].
    pub fn score(&self, beta: f64) -> f64 {
        let mut precision = 0.0;
        let mut recall = 0.0;
        let mut used = 0usize;
        for o in &self.0 {
            if o.hyp_total == 0 && o.ref_total == 0 {
                continue;
            }
            if o.hyp_total > 0 {
                precision += o.matched as f64 / o.hyp_total as f64;
            }
            if o.ref_total > 0 {
                recall += o.matched as f64 / o.ref_total as f64;
            }
            used += 1;
        }
        if used == 0 {
            return 0.0;
        }
        let p = precision / used as f64;
        let r = recall / used as f64;
        if p + r == 0.0 {
            return 0.0;
        }
        let b2 = beta * beta;
        ((1.0 + b2) * p * r / (b2 * p + r) * 100.0).clamp(0.0, 100.0)
    }
}

pub fn sentence_chrfpp(hypothesis: &Sentence, reference: &Sentence, config: &ChrfConfig) -> Result<f64> {
    config.validate()?;
    Ok(ChrfStats::collect(hypothesis, reference, config).score(config.beta))
}

/// Statistics against the reference with the best sentence-level score
/// (earliest reference on ties).
fn best_reference_stats(hypothesis: &Sentence, references: &[Sentence], config: &ChrfConfig) -> Result<ChrfStats> {
    let mut best: Option<(f64, ChrfStats)> = None;
    for r in references {
        let stats = ChrfStats::collect(hypothesis, r, config);
        let score = stats.score(config.beta);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, stats));
        }
    }
    best.map(|(_, s)| s).ok_or(Error::EmptyReferences)
}

/// Multi-reference sentence chrF++: the best score over `references`.
pub fn sentence_chrfpp_multi(hypothesis: &Sentence, references: &[Sentence], config: &ChrfConfig) -> Result<f64> {
    config.validate()?;
    Ok(best_reference_stats(hypothesis, references, config)?.score(config.beta))
}

/// Corpus chrF++ with per-order statistics summed over segments. Segments with
/// several references contribute the statistics of their best reference.
pub fn corpus_chrfpp(pairs: &[(&Sentence, &[Sentence])], config: &ChrfConfig) -> Result<f64> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::invalid("corpus chrF++ needs at least one segment"));
    }
    let mut total = ChrfStats(vec![OrderStats::default(); config.char_order + config.word_order]);
    for (hyp, refs) in pairs {
        total.add(&best_reference_stats(hyp, refs, config)?);
    }
    Ok(total.score(config.beta))
}
