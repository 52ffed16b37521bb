use std::cmp::Ordering;

use super::{SequenceModel, TokenId};

/// A decoded token sequence. `tokens` never contains the end-of-sequence token.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    pub log_prob: f64,
    /// `log_prob / length_penalty(tokens.len(), alpha)`.
    pub score: f64,
    pub finished: bool,
}

/// `((5 + len) / 6)^alpha`.
pub fn length_penalty(len: usize, alpha: f64) -> f64 {
    ((5.0 + len as f64) / 6.0).powf(alpha)
}

pub fn penalized_score(log_prob: f64, len: usize, alpha: f64) -> f64 {
    log_prob / length_penalty(len, alpha)
}

/// Descending by score, then ascending token order.
pub(crate) fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

struct Candidate {
    tokens: Vec<TokenId>,
    log_prob: f64,
    /// Last token appended; `tokens` excludes it when it is end-of-sequence.
    last: TokenId,
    is_eos: bool,
}

pub(crate) struct BeamOutcome {
    /// Finished hypotheses, ranked.
    pub finished: Vec<Hypothesis>,
    /// Every hypothesis that survived pruning without finishing, in step order.
    pub unfinished: Vec<Hypothesis>,
}

pub(crate) fn run_beam(model: &dyn SequenceModel, beam_width: usize, max_len: usize, alpha: f64) -> BeamOutcome {
    let eos = model.eos();
    let mut live: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished = Vec::new();
    let mut unfinished = Vec::new();

    for _ in 0..max_len {
        let mut candidates = Vec::new();
        for (tokens, lp) in &live {
            let dist = model.next_distribution(tokens);
            for (t, &p) in dist.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let t = t as TokenId;
                let is_eos = t == eos;
                let mut next = tokens.clone();
                if !is_eos {
                    next.push(t);
                }
                candidates.push(Candidate {
                    tokens: next,
                    log_prob: lp + p.ln(),
                    last: t,
                    is_eos,
                });
            }
        }
        // Rank by summed log-probability; ties by the full token sequence
        // (end-of-sequence included) in ascending order.
        candidates.sort_by(|a, b| {
            b.log_prob.total_cmp(&a.log_prob).then_with(|| {
                let ka = a.tokens.iter().chain(a.is_eos.then_some(&a.last));
                let kb = b.tokens.iter().chain(b.is_eos.then_some(&b.last));
                ka.cmp(kb)
            })
        });
        candidates.truncate(beam_width);

        live.clear();
        for c in candidates {
            let hyp = Hypothesis {
                score: penalized_score(c.log_prob, c.tokens.len(), alpha),
                log_prob: c.log_prob,
                finished: c.is_eos,
                tokens: c.tokens,
            };
            if c.is_eos {
                finished.push(hyp);
            } else {
                live.push((hyp.tokens.clone(), hyp.log_prob));
                unfinished.push(hyp);
            }
        }
        if live.is_empty() {
            break;
        }
    }
    finished.sort_by(rank);
    BeamOutcome { finished, unfinished }
}

/// Beam search ranking finished hypotheses by length-penalized log-probability.
///
/// At every step each live hypothesis is extended by every token with
/// non-zero probability, and the `beam_width` best extensions by summed
/// log-probability are kept; those ending in end-of-sequence retire to the
/// finished pool. After `max_len` steps (a finished sequence therefore holds
/// at most `max_len - 1` tokens) the best `beam_width` finished hypotheses are
/// returned.
pub fn beam_search(model: &dyn SequenceModel, beam_width: usize, max_len: usize, alpha: f64) -> Vec<Hypothesis> {
    let mut finished = run_beam(model, beam_width.max(1), max_len, alpha).finished;
    finished.truncate(beam_width.max(1));
    finished
}

/// Argmax decoding, ties to the lowest token id. Returns the tokens and
/// whether end-of-sequence was reached within `max_len` steps.
pub fn greedy(model: &dyn SequenceModel, max_len: usize) -> (Vec<TokenId>, bool) {
    let eos = model.eos();
    let mut tokens = Vec::new();
    for _ in 0..max_len {
        let dist = model.next_distribution(&tokens);
        let mut best = 0usize;
        for (t, &p) in dist.iter().enumerate() {
            if p > dist[best] {
                best = t;
            }
        }
        let best = best as TokenId;
        if best == eos {
            return (tokens, true);
        }
        tokens.push(best);
    }
    (tokens, false)
}
