use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SequenceModel, TokenId};
use crate::error::{Error, Result};

pub const EOS: &str = "</s>";

/// Context slot that precedes the first token of a sentence.
const BOS: TokenId = TokenId::MAX;

const FORMAT_NAME: &str = "ngram-lm";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: BTreeMap<TokenId, u64>,
}

/// Count-based n-gram model with add-k smoothing.
///
/// `P(t | ctx) = (count(ctx, t) + k) / (count(ctx, ·) + k·|V|)` where `ctx` is
/// the last `order - 1` tokens, left-padded with a begin marker. `|V|` counts
/// the end-of-sequence token. If a context was never observed and `k == 0`,
/// the oldest context token is dropped until an observed context is found.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    order: usize,
    add_k: f64,
    vocab: Vec<String>,
    index: HashMap<String, TokenId>,
    /// Keyed by contexts of every length `0..order`, so lower orders are
    /// available for backoff.
    counts: BTreeMap<Vec<TokenId>, ContextCounts>,
}

/// Trains on tokenized sentences. The vocabulary is the end-of-sequence token
/// followed by the corpus tokens in sorted order.
pub fn train_ngram(corpus: &[Vec<String>], order: usize, add_k: f64) -> Result<NGramLM> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot train an n-gram model on an empty corpus"));
    }
    if order == 0 {
        return Err(Error::InvalidConfig("n-gram order must be >= 1".into()));
    }
    if !(add_k.is_finite() && add_k >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "add_k must be finite and >= 0, got {add_k}"
        )));
    }
    let mut words: Vec<&String> = corpus.iter().flatten().collect();
    words.sort_unstable();
    words.dedup();
    let mut vocab = vec![EOS.to_string()];
    vocab.extend(words.into_iter().filter(|w| w.as_str() != EOS).cloned());
    let index: HashMap<String, TokenId> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as TokenId))
        .collect();

    let mut counts: BTreeMap<Vec<TokenId>, ContextCounts> = BTreeMap::new();
    for sentence in corpus {
        let mut padded = vec![BOS; order - 1];
        padded.extend(sentence.iter().map(|w| index[w]));
        padded.push(0);
        for end in (order - 1)..padded.len() {
            let next = padded[end];
            for ctx_len in 0..order {
                let ctx = padded[end - ctx_len..end].to_vec();
                let entry = counts.entry(ctx).or_default();
                entry.total += 1;
                *entry.next.entry(next).or_insert(0) += 1;
            }
        }
    }
    Ok(NGramLM {
        order,
        add_k,
        vocab,
        index,
        counts,
    })
}

impl NGramLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add_k(&self) -> f64 {
        self.add_k
    }

    pub fn token_id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    /// Probability of `token` after `context`, both given as strings.
    pub fn prob(&self, context: &[&str], token: &str) -> Option<f64> {
        let ctx: Option<Vec<TokenId>> = context.iter().map(|w| self.token_id(w)).collect();
        Some(self.next_distribution(&ctx?)[self.token_id(token)? as usize])
    }

    fn context_key(&self, context: &[TokenId]) -> Vec<TokenId> {
        let want = self.order - 1;
        let mut key = vec![BOS; want.saturating_sub(context.len())];
        key.extend_from_slice(&context[context.len().saturating_sub(want)..]);
        key
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            order: self.order,
            add_k: self.add_k,
            vocab: self.vocab.clone(),
            contexts: self
                .counts
                .iter()
                .map(|(ctx, c)| ContextRecord {
                    context: ctx.iter().map(|&t| if t == BOS { -1 } else { t as i64 }).collect(),
                    next: c.next.iter().map(|(&t, &n)| (t, n)).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("model always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::invalid(format!("n-gram model file: {msg}"));
        let file: ModelFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format {} v{}", file.format, file.version)));
        }
        if file.order == 0 || file.vocab.first().map(String::as_str) != Some(EOS) {
            return Err(bad("order must be >= 1 and the vocabulary must start with </s>".into()));
        }
        let v = file.vocab.len() as TokenId;
        let mut counts = BTreeMap::new();
        for rec in file.contexts {
            let ctx = rec
                .context
                .iter()
                .map(|&t| match t {
                    -1 => Ok(BOS),
                    t if t >= 0 && (t as TokenId) < v => Ok(t as TokenId),
                    t => Err(bad(format!("context token {t} out of range"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if ctx.len() >= file.order {
                return Err(bad("context longer than order - 1".into()));
            }
            let mut cc = ContextCounts::default();
            for (t, n) in rec.next {
                if t >= v {
                    return Err(bad(format!("next token {t} out of range")));
                }
                cc.total += n;
                cc.next.insert(t, n);
            }
            counts.insert(ctx, cc);
        }
        let index = file
            .vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as TokenId))
            .collect();
        Ok(NGramLM {
            order: file.order,
            add_k: file.add_k,
            vocab: file.vocab,
            index,
            counts,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl SequenceModel for NGramLM {
    fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn eos(&self) -> TokenId {
        0
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        let v = self.vocab.len();
        let mut key = self.context_key(context);
        loop {
            let counts = self.counts.get(&key);
            let total = counts.map_or(0, |c| c.total) as f64;
            let denom = total + self.add_k * v as f64;
            if denom > 0.0 {
                let mut dist = vec![self.add_k / denom; v];
                if let Some(c) = counts {
                    for (&t, &n) in &c.next {
                        dist[t as usize] = (n as f64 + self.add_k) / denom;
                    }
                }
                return dist;
            }
            // Unseen context without smoothing; the empty context is always seen.
            key.remove(0);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ContextRecord {
    /// Token ids; -1 marks the begin-of-sentence slot.
    context: Vec<i64>,
    next: Vec<(TokenId, u64)>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    add_k: f64,
    vocab: Vec<String>,
    contexts: Vec<ContextRecord>,
}
