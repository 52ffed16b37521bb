//! Joint quality and diversity evaluation for systems that emit a *set* of
//! sentences per input, scored against a set of references.
//!
//! The headline number is Multi-Score: score every output against every
//! reference with a sentence metric, find the one-to-one assignment with the
//! largest total ([`assignment::max_weight_matching`]), and average the matched
//! scores.
//!
//! ```
//! use multiscore::{multi_score, sentences, MultiScoreOptions, SentenceBleu};
//!
//! let refs = sentences(&["the cat sat on the mat", "a dog barked", "it rained all day"]).unwrap();
//! let outs = sentences(&["a dog barked", "it rained all day", "the cat sat on the mat"]).unwrap();
//! let ms = multi_score(&outs, &refs, &SentenceBleu::default(), MultiScoreOptions::default()).unwrap();
//! assert_eq!(ms.score, 100.0);
//! ```
//!
//! Besides the metrics, the crate ships a small decoding toolkit (an add-k
//! n-gram model, beam search, top-k and ancestral sampling) used to produce
//! output sets with known diversity characteristics.

pub mod assignment;
pub mod cli;
pub mod corpus;
pub mod decoding;
pub mod error;
pub mod metrics;
pub mod multi_score;
pub mod report;
pub mod text;

pub use assignment::{brute_force_matching, max_weight_matching, Matching, ScoreMatrix};
pub use corpus::{bind_outputs, load_jsonl, load_parallel_text, parse_jsonl, Dataset, OutputRecord};
pub use error::{Error, Result};
pub use metrics::{
    corpus_bleu, corpus_chrfpp, self_bleu, sentence_bleu, sentence_chrfpp, BleuConfig, ChrfConfig, LookupMetric,
    SentenceBleu, SentenceChrf, SentenceMetric,
};
pub use multi_score::{corpus_multi_score, multi_score, EvalInstance, MultiScoreOptions, MultiScoreResult};
pub use report::{evaluate_all, render, EvalConfig, EvaluationReport, Format};
pub use text::{sentences, Sentence};
