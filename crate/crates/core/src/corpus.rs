//! Loading and validating multi-reference evaluation data.
//!
//! The canonical format is JSON Lines, one instance per line:
//!
//! ```text
//! {"id": "t1", "category": "Airport", "references": ["...", "..."], "outputs": ["...", "..."]}
//! ```
//!
//! `category` and `outputs` are optional. System outputs can also live in a
//! separate JSONL file of `{"id", "outputs", ...}` records (see
//! [`OutputRecord`]) and be attached with [`bind_outputs`]. A plain-text
//! importer covers the shared-task layout of `ref0.txt, ref1.txt, ...` and
//! `out0.txt, ...` files with one instance per line.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_score::EvalInstance;
use crate::text::Sentence;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub instances: usize,
    /// Reference-set size -> number of instances with that size.
    pub references_per_instance: BTreeMap<usize, usize>,
    pub outputs_per_instance: BTreeMap<usize, usize>,
}

impl DatasetStats {
    fn of(instances: &[EvalInstance]) -> Self {
        let mut stats = DatasetStats {
            instances: instances.len(),
            ..Default::default()
        };
        for inst in instances {
            *stats.references_per_instance.entry(inst.references.len()).or_insert(0) += 1;
            *stats.outputs_per_instance.entry(inst.outputs.len()).or_insert(0) += 1;
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<EvalInstance>,
    source_path: String,
    stats: DatasetStats,
}

impl Dataset {
    /// Builds a dataset, checking that ids are unique and references non-empty.
    pub fn new(instances: Vec<EvalInstance>, source_path: impl Into<String>) -> Result<Self> {
        let source_path = source_path.into();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, inst) in instances.iter().enumerate() {
            if inst.references.is_empty() {
                return Err(Error::invalid(format!("instance {:?} has no references", inst.id)));
            }
            if let Some(prev) = seen.insert(&inst.id, idx) {
                return Err(Error::DuplicateId {
                    path: source_path.clone(),
                    id: inst.id.clone(),
                    first_line: prev + 1,
                    second_line: idx + 1,
                });
            }
        }
        let stats = DatasetStats::of(&instances);
        Ok(Dataset {
            instances,
            source_path,
            stats,
        })
    }

    pub fn instances(&self) -> &[EvalInstance] {
        &self.instances
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn stats(&self) -> &DatasetStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Serializes back to canonical JSONL (one object per line, trailing newline).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            let line = serde_json::to_string(inst).expect("instances always serialize");
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    id: String,
    #[serde(default)]
    category: Option<String>,
    references: Vec<String>,
    #[serde(default)]
    outputs: Option<Vec<String>>,
}

fn strip_bom(text: &str) -> &str {
    text.strip_prefix('\u{feff}').unwrap_or(text)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_sentences(raws: &[String], path: &str, line: usize, field: &str) -> Result<Vec<Sentence>> {
    raws.iter()
        .enumerate()
        .map(|(k, raw)| {
            Sentence::new(raw).map_err(|_| Error::Parse {
                path: path.to_string(),
                line,
                message: format!("{field}[{k}] is empty"),
            })
        })
        .collect()
}

/// Parses JSONL text. Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_jsonl(text: &str, source: &str) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (idx, line) in strip_bom(text).lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            line: line_no,
            message,
        };
        let rec: InstanceRecord = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        if rec.references.is_empty() {
            return Err(parse_err(format!("instance {:?} has an empty references list", rec.id)));
        }
        if let Some(&prev) = first_line.get(&rec.id) {
            return Err(Error::DuplicateId {
                path: source.to_string(),
                id: rec.id,
                first_line: prev,
                second_line: line_no,
            });
        }
        first_line.insert(rec.id.clone(), line_no);
        instances.push(EvalInstance {
            references: parse_sentences(&rec.references, source, line_no, "references")?,
            outputs: parse_sentences(rec.outputs.as_deref().unwrap_or(&[]), source, line_no, "outputs")?,
            id: rec.id,
            category: rec.category,
        });
    }
    Dataset::new(instances, source)
}

pub fn load_jsonl(path: &Path) -> Result<Dataset> {
    parse_jsonl(&read_text(path)?, &path.display().to_string())
}

/// Files in `dir` named `{prefix}{k}.txt`, ordered by `k`.
fn numbered_files(dir: &Path, prefix: &str) -> Result<Vec<std::path::PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let index = name
            .strip_prefix(prefix)
            .and_then(|rest| rest.strip_suffix(".txt"))
            .and_then(|k| k.parse::<usize>().ok());
        if let Some(k) = index {
            found.push((k, entry.path()));
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(strip_bom(&read_text(path)?).lines().map(str::to_string).collect())
}

/// Assembles instance `k` from line `k` of every `refN.txt` in `refs_dir` and,
/// when given, every `outN.txt` in `outputs_dir`. Empty lines mark a missing
/// slot and are dropped. Instance ids are the zero-based line indices.
pub fn load_parallel_text(refs_dir: &Path, outputs_dir: Option<&Path>) -> Result<Dataset> {
    let ref_files = numbered_files(refs_dir, "ref")?;
    if ref_files.is_empty() {
        return Err(Error::invalid(format!("{}: no ref<N>.txt files", refs_dir.display())));
    }
    let out_files = match outputs_dir {
        Some(dir) => numbered_files(dir, "out")?,
        None => Vec::new(),
    };

    let mut columns = Vec::new();
    for path in ref_files.iter().chain(&out_files) {
        columns.push((path, read_lines(path)?));
    }
    let expected = columns[0].1.len();
    for (path, lines) in &columns {
        if lines.len() != expected {
            return Err(Error::LineCountMismatch {
                path: path.display().to_string(),
                expected,
                found: lines.len(),
            });
        }
    }

    let n_refs = ref_files.len();
    let mut instances = Vec::with_capacity(expected);
    for k in 0..expected {
        let slot = |range: std::ops::Range<usize>| -> Vec<Sentence> {
            columns[range]
                .iter()
                .filter_map(|(_, lines)| Sentence::new(&lines[k]).ok())
                .collect()
        };
        let references = slot(0..n_refs);
        if references.is_empty() {
            return Err(Error::invalid(format!(
                "{}: instance {k} has no non-empty reference",
                refs_dir.display()
            )));
        }
        instances.push(EvalInstance {
            id: k.to_string(),
            category: None,
            references,
            outputs: slot(n_refs..columns.len()),
        });
    }
    Dataset::new(instances, refs_dir.display().to_string())
}

/// One line of a system-outputs JSONL file. Generation metadata is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub id: String,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Set when a decoder had to pad the set with unfinished or repeated hypotheses.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub filled: bool,
    /// Set when at least one sentence hit the maximum generation length.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl OutputRecord {
    pub fn new(id: impl Into<String>, outputs: Vec<String>) -> Self {
        OutputRecord {
            id: id.into(),
            outputs,
            strategy: None,
            seed: None,
            filled: false,
            truncated: false,
        }
    }
}

pub fn parse_outputs_jsonl(text: &str, source: &str) -> Result<Vec<OutputRecord>> {
    let mut records = Vec::new();
    for (idx, line) in strip_bom(text).lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: OutputRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

pub fn load_outputs_jsonl(path: &Path) -> Result<Vec<OutputRecord>> {
    parse_outputs_jsonl(&read_text(path)?, &path.display().to_string())
}

pub fn outputs_to_jsonl(records: &[OutputRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        writeln!(out, "{}", serde_json::to_string(rec).expect("records always serialize")).unwrap();
    }
    out
}

/// Attaches one non-empty output list to every instance, replacing existing outputs.
pub fn bind_outputs(dataset: &Dataset, outputs: &[OutputRecord]) -> Result<Dataset> {
    let mut by_id: HashMap<&str, &OutputRecord> = HashMap::new();
    for rec in outputs {
        if by_id.insert(&rec.id, rec).is_some() {
            return Err(Error::invalid(format!("outputs listed twice for id {:?}", rec.id)));
        }
    }
    for rec in outputs {
        if !dataset.instances.iter().any(|i| i.id == rec.id) {
            return Err(Error::UnknownId(rec.id.clone()));
        }
    }
    let mut instances = Vec::with_capacity(dataset.len());
    for inst in &dataset.instances {
        let rec = by_id
            .get(inst.id.as_str())
            .ok_or_else(|| Error::MissingId(inst.id.clone()))?;
        if rec.outputs.is_empty() {
            return Err(Error::invalid(format!("instance {:?}: output list is empty", inst.id)));
        }
        let sentences = rec
            .outputs
            .iter()
            .enumerate()
            .map(|(k, raw)| {
                Sentence::new(raw).map_err(|_| Error::invalid(format!("instance {:?}: outputs[{k}] is empty", inst.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        instances.push(EvalInstance {
            outputs: sentences,
            ..inst.clone()
        });
    }
    Dataset::new(instances, dataset.source_path.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_line() {
        let ds = parse_jsonl(r#"{"id":"t1","references":["a b"],"outputs":["a b"]}"#, "mem").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.instances()[0].outputs.len(), 1);
        assert_eq!(ds.stats().references_per_instance[&1], 1);
    }

    #[test]
    fn missing_references_names_line() {
        let text = "{\"id\":\"a\",\"references\":[\"x\"]}\n{\"id\":\"b\"}\n";
        let err = parse_jsonl(text, "data.jsonl").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("data.jsonl:2"));
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let mut text = String::new();
        for id in ["a", "b", "dup", "c", "d", "e", "dup"] {
            text.push_str(&format!("{{\"id\":\"{id}\",\"references\":[\"x\"]}}\n"));
        }
        match parse_jsonl(&text, "d.jsonl").unwrap_err() {
            Error::DuplicateId {
                first_line,
                second_line,
                id,
                ..
            } => assert_eq!((id.as_str(), first_line, second_line), ("dup", 3, 7)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_empty_references_and_blank_sentences() {
        assert!(parse_jsonl(r#"{"id":"a","references":[]}"#, "m").is_err());
        assert!(parse_jsonl(r#"{"id":"a","references":["  "]}"#, "m").is_err());
        assert!(parse_jsonl(r#"{"id":"a","references":["x"],"extra":1}"#, "m").is_err());
        assert!(parse_jsonl("not json", "m").is_err());
    }

    #[test]
    fn bom_crlf_and_missing_trailing_newline() {
        let text = "\u{feff}{\"id\":\"a\",\"references\":[\"x\"]}\r\n{\"id\":\"b\",\"references\":[\"y\"]}";
        let ds = parse_jsonl(text, "m").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.instances()[0].id, "a");
    }

    #[test]
    fn round_trip_is_lossless() {
        let text = concat!(
            "{\"id\":\"a\",\"category\":\"Airport\",\"references\":[\"x y\",\"z\"],\"outputs\":[\"x\"]}\n",
            "{\"id\":\"b\",\"references\":[\"Москва, столица.\"]}\n"
        );
        let ds = parse_jsonl(text, "m").unwrap();
        let again = parse_jsonl(&ds.to_jsonl(), "m").unwrap();
        assert_eq!(ds, again);
        assert_eq!(ds.to_jsonl(), text);
    }

    fn base() -> Dataset {
        parse_jsonl(
            "{\"id\":\"a\",\"references\":[\"x\"]}\n{\"id\":\"b\",\"references\":[\"y\"]}\n",
            "m",
        )
        .unwrap()
    }

    #[test]
    fn bind_attaches_outputs() {
        let outs = vec![
            OutputRecord::new("b", vec!["1".into(), "2".into(), "3".into()]),
            OutputRecord::new("a", vec!["4".into(), "5".into(), "6".into()]),
        ];
        let ds = bind_outputs(&base(), &outs).unwrap();
        assert_eq!(ds.instances()[0].outputs[0].raw(), "4");
        assert_eq!(ds.stats().outputs_per_instance[&3], 2);
    }

    #[test]
    fn bind_errors() {
        let unknown = vec![
            OutputRecord::new("a", vec!["1".into()]),
            OutputRecord::new("b", vec!["1".into()]),
            OutputRecord::new("zzz", vec!["1".into()]),
        ];
        assert!(matches!(bind_outputs(&base(), &unknown), Err(Error::UnknownId(_))));
        let missing = vec![OutputRecord::new("a", vec!["1".into()])];
        assert!(matches!(bind_outputs(&base(), &missing), Err(Error::MissingId(_))));
        let empty = vec![OutputRecord::new("a", vec![]), OutputRecord::new("b", vec!["1".into()])];
        assert!(bind_outputs(&base(), &empty).is_err());
    }

    #[test]
    fn output_records_round_trip() {
        let mut rec = OutputRecord::new("a", vec!["x".into()]);
        rec.strategy = Some("beam3".into());
        rec.seed = Some(7);
        rec.filled = true;
        let text = outputs_to_jsonl(&[rec.clone()]);
        assert_eq!(parse_outputs_jsonl(&text, "m").unwrap(), vec![rec]);
        assert!(!text.contains("truncated"));
    }

    #[test]
    fn parallel_text_layout() {
        let dir = tempfile::tempdir().unwrap();
        let refs = dir.path().join("refs");
        let outs = dir.path().join("outs");
        std::fs::create_dir_all(&refs).unwrap();
        std::fs::create_dir_all(&outs).unwrap();
        let lines = |tag: &str| (0..10).map(|k| format!("{tag} {k}")).collect::<Vec<_>>();
        std::fs::write(refs.join("ref0.txt"), lines("first").join("\n")).unwrap();
        let mut second = lines("second");
        second[4].clear();
        std::fs::write(refs.join("ref1.txt"), second.join("\n") + "\n").unwrap();
        std::fs::write(outs.join("out0.txt"), lines("sys").join("\n")).unwrap();

        let ds = load_parallel_text(&refs, Some(&outs)).unwrap();
        assert_eq!(ds.len(), 10);
        assert_eq!(ds.instances()[0].references.len(), 2);
        assert_eq!(ds.instances()[0].outputs.len(), 1);
        assert_eq!(ds.instances()[4].references.len(), 1);
        assert_eq!(ds.instances()[4].id, "4");

        std::fs::write(outs.join("out0.txt"), lines("sys")[..9].join("\n")).unwrap();
        assert!(matches!(
            load_parallel_text(&refs, Some(&outs)),
            Err(Error::LineCountMismatch {
                expected: 10,
                found: 9,
                ..
            })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_jsonl(Path::new("/nonexistent/x.jsonl")).unwrap_err();
        assert!(err.is_io());
    }
}
