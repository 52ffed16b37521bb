//! Multi-Score: joint quality and diversity of an output set, measured against
//! a reference set.
//!
//! Every output is scored against every reference with a sentence-level
//! metric, the resulting bipartite graph is solved for a maximum-weight
//! one-to-one assignment, and the matched edge weights are averaged. A set of
//! near-duplicate outputs can only claim one good reference; the others are
//! forced onto references they do not resemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{max_weight_matching, Matching, ScoreMatrix};
use crate::error::{Error, Result};
use crate::metrics::SentenceMetric;
use crate::text::Sentence;

/// One input's reference set together with one system's output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalInstance {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub references: Vec<Sentence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<Sentence>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiScoreOptions {
    /// Match `min(outputs, references)` edges instead of rejecting sets of
    /// different sizes.
    pub allow_unequal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiScoreResult {
    pub instance_id: String,
    pub matrix: ScoreMatrix,
    pub matching: Matching,
    pub score: f64,
}

/// `weights[i][j]` is the metric score of output `i` against reference `j` alone.
pub fn score_matrix(outputs: &[Sentence], references: &[Sentence], metric: &dyn SentenceMetric) -> Result<ScoreMatrix> {
    if outputs.is_empty() {
        return Err(Error::invalid("output set is empty"));
    }
    if references.is_empty() {
        return Err(Error::EmptyReferences);
    }
    let rows = outputs
        .iter()
        .map(|o| {
            references
                .iter()
                .map(|r| metric.score(o, std::slice::from_ref(r)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreMatrix::new(rows)
}

pub fn multi_score(
    outputs: &[Sentence],
    references: &[Sentence],
    metric: &dyn SentenceMetric,
    options: MultiScoreOptions,
) -> Result<MultiScoreResult> {
    multi_score_for("", outputs, references, metric, options)
}

fn multi_score_for(
    id: &str,
    outputs: &[Sentence],
    references: &[Sentence],
    metric: &dyn SentenceMetric,
    options: MultiScoreOptions,
) -> Result<MultiScoreResult> {
    if outputs.len() != references.len() && !outputs.is_empty() && !references.is_empty() {
        if !options.allow_unequal {
            return Err(Error::UnequalSetSizes {
                id: id.to_string(),
                outputs: outputs.len(),
                references: references.len(),
            });
        }
        log::warn!(
            "instance {id:?}: {} outputs vs {} references, averaging over {} matched pairs",
            outputs.len(),
            references.len(),
            outputs.len().min(references.len())
        );
    }
    let matrix = score_matrix(outputs, references, metric)?;
    let matching = max_weight_matching(&matrix);
    let score = matching.total / matching.len() as f64;
    Ok(MultiScoreResult {
        instance_id: id.to_string(),
        matrix,
        matching,
        score,
    })
}

pub fn instance_multi_score(
    instance: &EvalInstance,
    metric: &dyn SentenceMetric,
    options: MultiScoreOptions,
) -> Result<MultiScoreResult> {
    multi_score_for(&instance.id, &instance.outputs, &instance.references, metric, options)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusMultiScore {
    pub score: f64,
    pub per_instance: Vec<MultiScoreResult>,
}

/// Macro average of per-instance Multi-Score. Instances are scored in
/// parallel; results come back in input order and are summed sequentially, so
/// the value does not depend on the thread count.
pub fn corpus_multi_score(
    instances: &[EvalInstance],
    metric: &dyn SentenceMetric,
    options: MultiScoreOptions,
) -> Result<CorpusMultiScore> {
    if instances.is_empty() {
        return Err(Error::invalid("corpus is empty"));
    }
    let per_instance = instances
        .par_iter()
        .map(|inst| instance_multi_score(inst, metric, options))
        .collect::<Result<Vec<_>>>()?;
    let score = per_instance.iter().map(|r| r.score).sum::<f64>() / per_instance.len() as f64;
    Ok(CorpusMultiScore { score, per_instance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{LookupMetric, SentenceBleu, SentenceChrf};
    use crate::text::sentences;
    use approx::assert_abs_diff_eq;

    fn worked_metric() -> (Vec<Sentence>, Vec<Sentence>, LookupMetric) {
        let preds = sentences(&["pred one", "pred two", "pred three"]).unwrap();
        let refs = sentences(&["ref one", "ref two", "ref three"]).unwrap();
        let grid = [[32.0, 56.0, 21.0], [40.0, 18.0, 50.0], [58.0, 27.0, 35.0]];
        let mut metric = LookupMetric::new("worked");
        for (p, row) in preds.iter().zip(grid) {
            for (r, w) in refs.iter().zip(row) {
                metric.insert(p.raw(), r.raw(), w).unwrap();
            }
        }
        (preds, refs, metric)
    }

    #[test]
    fn averaged_matched_weights() {
        let (preds, refs, metric) = worked_metric();
        let res = multi_score(&preds, &refs, &metric, MultiScoreOptions::default()).unwrap();
        assert_eq!(res.matching.edges, vec![(0, 1), (1, 2), (2, 0)]);
        assert_abs_diff_eq!(res.score, 164.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_cell_identity() {
        let x = sentences(&["x"]).unwrap();
        let m = score_matrix(&x, &x, &SentenceBleu::default()).unwrap();
        assert_eq!(m.to_rows(), vec![vec![100.0]]);
    }

    #[test]
    fn matrix_entries_are_independent_calls() {
        let outs = sentences(&["a b c", "b c d", "x y z"]).unwrap();
        let refs = sentences(&["a b c d", "c d e", "x y"]).unwrap();
        let metric = SentenceChrf::default();
        let m = score_matrix(&outs, &refs, &metric).unwrap();
        for (i, o) in outs.iter().enumerate() {
            for (j, r) in refs.iter().enumerate() {
                assert_eq!(m.get(i, j), metric.score(o, std::slice::from_ref(r)).unwrap());
            }
        }
        assert_eq!(m.get(2, 0), 0.0);
    }

    #[test]
    fn permuted_references_score_100() {
        let refs = sentences(&["the cat sat", "a dog ran off", "birds fly south"]).unwrap();
        let outs = vec![refs[2].clone(), refs[0].clone(), refs[1].clone()];
        for metric in [
            &SentenceBleu::default() as &dyn SentenceMetric,
            &SentenceChrf::default(),
        ] {
            let res = multi_score(&outs, &refs, metric, MultiScoreOptions::default()).unwrap();
            assert_eq!(res.score, 100.0);
        }
    }

    #[test]
    fn triplicated_output_scores_mean_over_references() {
        let refs = sentences(&["the cat sat on the mat", "a cat was sitting", "the mat had a cat"]).unwrap();
        let o = Sentence::new("the cat sat").unwrap();
        let outs = vec![o.clone(), o.clone(), o.clone()];
        let metric = SentenceBleu::default();
        let expected = refs
            .iter()
            .map(|r| metric.score(&o, std::slice::from_ref(r)).unwrap())
            .sum::<f64>()
            / 3.0;
        let res = multi_score(&outs, &refs, &metric, MultiScoreOptions::default()).unwrap();
        assert_abs_diff_eq!(res.score, expected, epsilon = 1e-9);
    }

    #[test]
    fn unequal_sizes_need_opt_in() {
        let outs = sentences(&["a b", "c d"]).unwrap();
        let refs = sentences(&["a b", "c d", "e f"]).unwrap();
        let metric = SentenceBleu::default();
        assert!(matches!(
            multi_score(&outs, &refs, &metric, MultiScoreOptions::default()),
            Err(Error::UnequalSetSizes { .. })
        ));
        let res = multi_score(&outs, &refs, &metric, MultiScoreOptions { allow_unequal: true }).unwrap();
        assert_eq!(res.matching.len(), 2);
        assert_eq!(res.score, 100.0);
    }

    #[test]
    fn empty_sets_are_rejected() {
        let refs = sentences(&["a"]).unwrap();
        let metric = SentenceBleu::default();
        assert!(multi_score(&[], &refs, &metric, MultiScoreOptions::default()).is_err());
        assert!(multi_score(&refs, &[], &metric, MultiScoreOptions::default()).is_err());
        assert!(corpus_multi_score(&[], &metric, MultiScoreOptions::default()).is_err());
    }

    fn inst(id: &str, outs: &[&str], refs: &[&str]) -> EvalInstance {
        EvalInstance {
            id: id.into(),
            category: None,
            references: sentences(refs).unwrap(),
            outputs: sentences(outs).unwrap(),
        }
    }

    #[test]
    fn corpus_is_macro_average() {
        let metric = SentenceBleu::default();
        let a = inst(
            "a",
            &["one two three four", "five six"],
            &["one two three four", "seven eight"],
        );
        let b = inst("b", &["red green blue"], &["red green blue"]);
        let c = inst("c", &["p q r", "s t u"], &["p q", "s t u v"]);
        let opts = MultiScoreOptions::default();
        let corpus = corpus_multi_score(&[a.clone(), b.clone(), c.clone()], &metric, opts).unwrap();
        let each: Vec<f64> = [a, b, c]
            .iter()
            .map(|i| instance_multi_score(i, &metric, opts).unwrap().score)
            .collect();
        assert_abs_diff_eq!(corpus.score, (each[0] + each[1] + each[2]) / 3.0, epsilon = 1e-12);
        assert_eq!(corpus.per_instance[1].score, 100.0);
        assert_eq!(corpus.per_instance[0].instance_id, "a");
    }
}
