//! Tokenization and n-gram extraction shared by every metric.
//!
//! Word tokens are produced by splitting on Unicode whitespace and detaching
//! every character that is neither alphanumeric nor whitespace into its own
//! token. Character n-grams run over Unicode scalar values, so Cyrillic and
//! other non-ASCII text is windowed per character rather than per byte.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Controls how raw strings are normalized before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { lowercase: true }
    }
}

/// Splits `raw` into word tokens using the default (lowercasing) configuration.
pub fn tokenize_words(raw: &str) -> Vec<String> {
    tokenize_words_with(raw, TokenizerConfig::default())
}

pub fn tokenize_words_with(raw: &str, config: TokenizerConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        let mut word = String::new();
        for ch in chunk.chars() {
            if ch.is_alphanumeric() {
                if config.lowercase {
                    word.extend(ch.to_lowercase());
                } else {
                    word.push(ch);
                }
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(ch.to_string());
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// One sentence with its cached word tokens.
///
/// `normalized` is the raw text after case folding (when enabled); character
/// n-grams are drawn from it so that cased and uncased evaluation stay
/// consistent across the word and character views.
#[derive(Clone, PartialEq, Eq)]
pub struct Sentence {
    raw: String,
    normalized: String,
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(raw: &str) -> Result<Self> {
        Self::with_config(raw, TokenizerConfig::default())
    }

    pub fn with_config(raw: &str, config: TokenizerConfig) -> Result<Self> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(Error::EmptySentence);
        }
        let normalized = if config.lowercase {
            raw.to_lowercase()
        } else {
            raw.to_string()
        };
        Ok(Sentence {
            raw: raw.to_string(),
            normalized,
            tokens: tokenize_words_with(raw, config),
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Debug for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sentence({:?})", self.raw)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl Serialize for Sentence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for Sentence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Sentence::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// Builds sentences from string slices, failing on the first empty one.
pub fn sentences<S: AsRef<str>>(raws: &[S]) -> Result<Vec<Sentence>> {
    raws.iter().map(|s| Sentence::new(s.as_ref())).collect()
}

/// Multiset of contiguous n-grams of a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset<T: Eq + Hash> {
    order: usize,
    counts: HashMap<Vec<T>, usize>,
}

impl<T: Eq + Hash + Clone> NGramMultiset<T> {
    pub fn empty(order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be positive");
        NGramMultiset {
            order,
            counts: HashMap::new(),
        }
    }

    pub fn from_units(units: &[T], order: usize) -> Self {
        let mut set = Self::empty(order);
        for window in units.windows(order) {
            *set.counts.entry(window.to_vec()).or_insert(0) += 1;
        }
        set
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, ngram: &[T]) -> usize {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[T], usize)> {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Sum over n-grams of `min(self[g], other[g])`.
    pub fn overlap(&self, other: &Self) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.counts.iter().map(|(g, &c)| c.min(large.get(g))).sum()
    }

    /// Keeps, per n-gram, the larger of the two counts.
    pub fn max_merge(&mut self, other: &Self) {
        debug_assert_eq!(self.order, other.order);
        for (g, &c) in &other.counts {
            let slot = self.counts.entry(g.clone()).or_insert(0);
            *slot = (*slot).max(c);
        }
    }
}

pub fn word_ngrams(tokens: &[String], n: usize) -> NGramMultiset<String> {
    NGramMultiset::from_units(tokens, n)
}

pub fn char_ngrams(raw: &str, n: usize, strip_whitespace: bool) -> NGramMultiset<char> {
    let chars: Vec<char> = if strip_whitespace {
        raw.chars().filter(|c| !c.is_whitespace()).collect()
    } else {
        raw.chars().collect()
    };
    NGramMultiset::from_units(&chars, n)
}
