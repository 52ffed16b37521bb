//! The full evaluation battery and its renderings.
//!
//! Quality is corpus BLEU and corpus chrF++ computed once per output slot
//! (slot `k` holds every instance's `k`-th output, scored against that
//! instance's full reference set) and averaged over slots. Diversity is
//! Self-BLEU and Multi-Score under sentence BLEU and sentence chrF++, each
//! macro-averaged over instances.
//!
//! Scores are carried at full precision and rounded half-up to two decimals
//! only when rendered.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::assignment::TIE_TOLERANCE;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{corpus_bleu, corpus_chrfpp, self_bleu, BleuConfig, ChrfConfig, SentenceBleu, SentenceChrf};
use crate::multi_score::{instance_multi_score, MultiScoreOptions, MultiScoreResult};
use crate::text::Sentence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    /// Sentence-level BLEU for Self-BLEU and MS-BLEU edges.
    pub sentence_bleu: BleuConfig,
    /// Corpus-level BLEU for quality.
    pub corpus_bleu: BleuConfig,
    pub chrf: ChrfConfig,
    pub allow_unequal: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            sentence_bleu: BleuConfig::sentence(),
            corpus_bleu: BleuConfig::corpus(),
            chrf: ChrfConfig::default(),
            allow_unequal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quality {
    pub bleu: f64,
    pub chrfpp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diversity {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_bleu: Option<f64>,
    pub ms_bleu: f64,
    pub ms_chrf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub ms_bleu: f64,
    pub ms_bleu_edges: Vec<(usize, usize)>,
    pub ms_chrf: f64,
    pub ms_chrf_edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_bleu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub tool: &'static str,
    pub version: &'static str,
    pub eval: EvalConfig,
    pub lowercase: bool,
    pub tie_tolerance: String,
    pub quality_aggregation: &'static str,
    pub diversity_aggregation: &'static str,
}

impl ConfigEcho {
    pub fn new(eval: EvalConfig) -> Self {
        ConfigEcho {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            eval,
            lowercase: true,
            tie_tolerance: format!("{TIE_TOLERANCE:e}"),
            quality_aggregation: "mean over output slots of multi-reference corpus scores",
            diversity_aggregation: "macro mean over instances",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub instances: usize,
    pub quality: Quality,
    pub diversity: Diversity,
    pub per_instance: Vec<InstanceSummary>,
    pub config: ConfigEcho,
}

/// Quality averaged over output slots.
fn slot_quality(dataset: &Dataset, config: &EvalConfig) -> Result<Quality> {
    let slots = dataset.instances().iter().map(|i| i.outputs.len()).max().unwrap_or(0);
    let mut bleu = 0.0;
    let mut chrf = 0.0;
    for k in 0..slots {
        let pairs: Vec<(&Sentence, &[Sentence])> = dataset
            .instances()
            .iter()
            .filter_map(|i| i.outputs.get(k).map(|o| (o, i.references.as_slice())))
            .collect();
        bleu += corpus_bleu(&pairs, &config.corpus_bleu)?;
        chrf += corpus_chrfpp(&pairs, &config.chrf)?;
    }
    Ok(Quality {
        bleu: bleu / slots as f64,
        chrfpp: chrf / slots as f64,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn evaluate_all(dataset: &Dataset, config: &EvalConfig) -> Result<EvaluationReport> {
    if dataset.is_empty() {
        return Err(Error::invalid("dataset has no instances"));
    }
    if let Some(inst) = dataset.instances().iter().find(|i| i.outputs.is_empty()) {
        return Err(Error::MissingId(inst.id.clone()));
    }
    config.sentence_bleu.validate()?;
    config.corpus_bleu.validate()?;
    config.chrf.validate()?;

    let quality = slot_quality(dataset, config)?;

    let options = MultiScoreOptions {
        allow_unequal: config.allow_unequal,
    };
    let bleu_metric = SentenceBleu {
        config: config.sentence_bleu,
    };
    let chrf_metric = SentenceChrf { config: config.chrf };
    let per_instance = dataset
        .instances()
        .par_iter()
        .map(|inst| {
            let b = instance_multi_score(inst, &bleu_metric, options)?;
            let c = instance_multi_score(inst, &chrf_metric, options)?;
            let sb = if inst.outputs.len() >= 2 {
                Some(self_bleu(&inst.outputs, &config.sentence_bleu)?)
            } else {
                None
            };
            Ok(InstanceSummary {
                id: inst.id.clone(),
                category: inst.category.clone(),
                ms_bleu: b.score,
                ms_bleu_edges: b.matching.edges,
                ms_chrf: c.score,
                ms_chrf_edges: c.matching.edges,
                self_bleu: sb,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let skipped = per_instance.iter().filter(|s| s.self_bleu.is_none()).count();
    if skipped > 0 {
        log::warn!("{skipped} instance(s) have a single output; Self-BLEU skips them");
    }
    let self_bleu = mean(per_instance.iter().filter_map(|s| s.self_bleu));
    if self_bleu.is_none() {
        log::warn!("no instance has two or more outputs; Self-BLEU omitted");
    }
    let diversity = Diversity {
        self_bleu,
        ms_bleu: mean(per_instance.iter().map(|s| s.ms_bleu)).unwrap_or(0.0),
        ms_chrf: mean(per_instance.iter().map(|s| s.ms_chrf)).unwrap_or(0.0),
    };
    Ok(EvaluationReport {
        instances: dataset.len(),
        quality,
        diversity,
        per_instance,
        config: ConfigEcho::new(*config),
    })
}

/// Multi-Score under a single metric, with optional per-instance audit detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiScoreReport {
    pub metric: String,
    pub instances: usize,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_instance: Option<Vec<MultiScoreResult>>,
    pub allow_unequal: bool,
    pub tie_tolerance: String,
}

/// Rounds half-up to two decimals, working on the shortest decimal
/// representation of `x` so that e.g. 0.125 becomes "0.13".
pub fn format_score(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let negative = x < 0.0;
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.push(frac.first().copied().unwrap_or(0));
    digits.push(frac.get(1).copied().unwrap_or(0));
    if frac.get(2).copied().unwrap_or(0) >= 5 {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let int_str: String = digits[..split].iter().map(|d| char::from(b'0' + d)).collect();
    let frac_str: String = digits[split..].iter().map(|d| char::from(b'0' + d)).collect();
    let sign = if negative && digits.iter().any(|&d| d != 0) {
        "-"
    } else {
        ""
    };
    format!("{sign}{int_str}.{frac_str}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
    Table,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "tsv" => Ok(Format::Tsv),
            "table" | "text-table" => Ok(Format::Table),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

/// Canonical JSON: sorted keys, two-space indent, every float with exactly
/// two decimals (half-up), integers verbatim.
pub fn canonical_json(value: &Value) -> String {
    fn write(out: &mut String, v: &Value, indent: usize) {
        let pad = |n: usize| "  ".repeat(n);
        match v {
            Value::Null => out.push_str("null"),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::Number(n) => match (n.as_u64(), n.as_i64()) {
                (Some(u), _) => write!(out, "{u}").unwrap(),
                (None, Some(i)) => write!(out, "{i}").unwrap(),
                _ => out.push_str(&format_score(n.as_f64().unwrap_or(f64::NAN))),
            },
            Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
            Value::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                } else if items.iter().all(|i| !i.is_object() && !i.is_array()) {
                    out.push('[');
                    for (k, item) in items.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        write(out, item, indent);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (k, item) in items.iter().enumerate() {
                        out.push_str(&pad(indent + 1));
                        write(out, item, indent + 1);
                        out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                    }
                    out.push_str(&pad(indent));
                    out.push(']');
                }
            }
            Value::Object(map) => {
                if map.is_empty() {
                    out.push_str("{}");
                    return;
                }
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push_str("{\n");
                for (k, key) in keys.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    out.push_str(&serde_json::to_string(key).unwrap());
                    out.push_str(": ");
                    write(out, &map[key.as_str()], indent + 1);
                    out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push('}');
            }
        }
    }
    let mut out = String::new();
    write(&mut out, value, 0);
    out.push('\n');
    out
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), format_score)
}

pub const TSV_HEADER: [&str; 5] = ["BLEU", "CHRF++", "Self-B", "MS-B", "MS-C"];

fn headline(report: &EvaluationReport) -> [String; 5] {
    [
        cell(Some(report.quality.bleu)),
        cell(Some(report.quality.chrfpp)),
        cell(report.diversity.self_bleu),
        cell(Some(report.diversity.ms_bleu)),
        cell(Some(report.diversity.ms_chrf)),
    ]
}

fn aligned_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| -> String {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    out.push_str(&line(header.iter().map(|h| h.to_string()).collect()));
    out.push('\n');
    out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect()));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.clone()));
        out.push('\n');
    }
    out
}

pub fn render(report: &EvaluationReport, format: Format) -> String {
    match format {
        Format::Json => canonical_json(&serde_json::to_value(report).expect("report serializes")),
        Format::Tsv => {
            let mut out = TSV_HEADER.join("\t");
            out.push('\n');
            out.push_str(&headline(report).join("\t"));
            out.push('\n');
            out
        }
        Format::Table => {
            let mut header = vec!["system"];
            header.extend(TSV_HEADER);
            let mut row = vec!["corpus".to_string()];
            row.extend(headline(report));
            let mut out = aligned_table(&header, &[row]);
            writeln!(out, "\n{} instances", report.instances).unwrap();
            out
        }
    }
}

pub fn render_multiscore(report: &MultiScoreReport, format: Format) -> String {
    match format {
        Format::Json => canonical_json(&serde_json::to_value(report).expect("report serializes")),
        Format::Tsv => {
            let mut out = String::from("id\tMS\n");
            for r in report.per_instance.iter().flatten() {
                writeln!(out, "{}\t{}", r.instance_id, format_score(r.score)).unwrap();
            }
            writeln!(out, "corpus\t{}", format_score(report.score)).unwrap();
            out
        }
        Format::Table => {
            let mut out = String::new();
            for r in report.per_instance.iter().flatten() {
                writeln!(out, "instance {}", r.instance_id).unwrap();
                let n_cols = r.matrix.n_cols();
                let mut header = vec!["".to_string()];
                header.extend((1..=n_cols).map(|j| format!("ref{j}")));
                let rows: Vec<Vec<String>> = (0..r.matrix.n_rows())
                    .map(|i| {
                        let mut row = vec![format!("pred{}", i + 1)];
                        row.extend((0..n_cols).map(|j| {
                            let mark = if r.matching.edges.contains(&(i, j)) { "*" } else { "" };
                            format!("{}{mark}", format_score(r.matrix.get(i, j)))
                        }));
                        row
                    })
                    .collect();
                let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
                out.push_str(&aligned_table(&header_refs, &rows));
                let parts: Vec<String> = r.matching.edge_weights.iter().map(|w| format_score(*w)).collect();
                writeln!(
                    out,
                    "matching: {}",
                    r.matching
                        .edges
                        .iter()
                        .map(|(i, j)| format!("pred{}->ref{}", i + 1, j + 1))
                        .collect::<Vec<_>>()
                        .join(", ")
                )
                .unwrap();
                writeln!(
                    out,
                    "MS = ({}) / {} = {}\n",
                    parts.join(" + "),
                    parts.len(),
                    format_score(r.score)
                )
                .unwrap();
            }
            writeln!(
                out,
                "MS-{} over {} instances: {}",
                report.metric,
                report.instances,
                format_score(report.score)
            )
            .unwrap();
            out
        }
    }
}
