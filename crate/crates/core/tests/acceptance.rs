//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! runtime; the process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use multiscore::decoding::{
    beam_search, generate_for_dataset, greedy, train_ngram, GenerateConfig, SequenceModel, Strategy, TokenId,
};
use multiscore::metrics::{sentence_chrfpp, ChrfConfig};
use multiscore::multi_score::instance_multi_score;
use multiscore::report::format_score;
use multiscore::{
    bind_outputs, brute_force_matching, corpus_bleu, evaluate_all, load_jsonl, max_weight_matching, multi_score,
    self_bleu, sentence_bleu, BleuConfig, Dataset, EvalConfig, EvalInstance, LookupMetric, MultiScoreOptions,
    ScoreMatrix, Sentence, SentenceBleu, SentenceChrf, SentenceMetric,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, &'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn sent(s: &str) -> Sentence {
    Sentence::new(s).unwrap()
}

const WORDS: &[&str] = &[
    "the",
    "a",
    "city",
    "airport",
    "is",
    "of",
    "in",
    "river",
    "capital",
    "served",
    "by",
    ",",
    ".",
    "'s",
    "runway",
    "1913",
    "733",
    "metres",
    "straße",
    "Москва",
    "café",
    "north",
    "built",
    "located",
    "at",
    "and",
    "Baku",
    "(",
    ")",
];

fn random_sentence(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, integer: bool) -> ScoreMatrix {
    ScoreMatrix::new(
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        if integer {
                            rng.gen_range(0..4) as f64 * 25.0
                        } else {
                            rng.gen_range(0.0..=100.0)
                        }
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

// 1
fn worked_example() -> Check {
    let dir = data_dir().join("worked_example");
    let ds = load_jsonl(&dir.join("data.jsonl")).map_err(|e| e.to_string())?;
    let metric = LookupMetric::from_json_file(&dir.join("scores.json")).map_err(|e| e.to_string())?;
    let result =
        instance_multi_score(&ds.instances()[0], &metric, MultiScoreOptions::default()).map_err(|e| e.to_string())?;
    ensure!(
        result.matching.edges == vec![(0, 1), (1, 2), (2, 0)],
        "matched edges {:?}",
        result.matching.edges
    );
    ensure!(
        result.matching.edge_weights == vec![56.0, 50.0, 58.0],
        "matched weights {:?}",
        result.matching.edge_weights
    );
    let oracle = brute_force_matching(&result.matrix).map_err(|e| e.to_string())?;
    ensure!(oracle == result.matching, "brute force found {:?}", oracle.edges);
    ensure!(
        format_score(result.score) == "54.67",
        "rendered {}",
        format_score(result.score)
    );
    Ok(())
}

// 2
fn matcher_oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    for integer in [false, true] {
        for _ in 0..1000 {
            let rows = rng.gen_range(1..=7);
            let cols = rng.gen_range(1..=7);
            let m = random_matrix(&mut rng, rows, cols, integer);
            let fast = max_weight_matching(&m);
            let slow = brute_force_matching(&m).map_err(|e| e.to_string())?;
            ensure!(
                fast.total == slow.total,
                "{rows}x{cols}: totals {} vs {}",
                fast.total,
                slow.total
            );
            ensure!(
                fast.edges == slow.edges,
                "{rows}x{cols}: edges {:?} vs {:?}",
                fast.edges,
                slow.edges
            );
            cases += 1;
        }
    }
    ensure!(cases >= 1000, "only {cases} cases");
    Ok(())
}

// 3
fn metric_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bleu = BleuConfig::sentence();
    let chrf = ChrfConfig::default();
    for _ in 0..500 {
        let x = sent(&random_sentence(&mut rng, 25));
        let b = sentence_bleu(&x, std::slice::from_ref(&x), &bleu).map_err(|e| e.to_string())?;
        ensure!(b == 100.0, "BLEU({:?}, itself) = {b}", x.raw());
        let c = sentence_chrfpp(&x, &x, &chrf).map_err(|e| e.to_string())?;
        ensure!(c == 100.0, "chrF++({:?}, itself) = {c}", x.raw());
    }
    for _ in 0..500 {
        let h = sent(&random_sentence(&mut rng, 20));
        let refs: Vec<Sentence> = (0..rng.gen_range(1..=3))
            .map(|_| sent(&random_sentence(&mut rng, 20)))
            .collect();
        let scores = [
            sentence_bleu(&h, &refs, &bleu).map_err(|e| e.to_string())?,
            sentence_bleu(&h, &refs, &BleuConfig::corpus()).map_err(|e| e.to_string())?,
            sentence_chrfpp(&h, &refs[0], &chrf).map_err(|e| e.to_string())?,
            corpus_bleu(&[(&h, refs.as_slice())], &BleuConfig::corpus()).map_err(|e| e.to_string())?,
        ];
        ensure!(
            scores.iter().all(|s| (0.0..=100.0).contains(s)),
            "out of range: {scores:?} for {:?}",
            h.raw()
        );
    }
    Ok(())
}

/// Three references over pairwise disjoint alphabets, so cross scores are
/// zero under both word and character metrics; outputs are noisy copies.
fn disjoint_instance(rng: &mut ChaCha8Rng) -> (Vec<Sentence>, Vec<Sentence>) {
    const ALPHABETS: [&str; 3] = ["abcdefgh", "ijklmnop", "qrstuvwx"];
    let word = |rng: &mut ChaCha8Rng, alphabet: &str| -> String {
        let chars: Vec<char> = alphabet.chars().collect();
        (0..rng.gen_range(2..=5)).map(|_| *chars.choose(rng).unwrap()).collect()
    };
    let mut refs = Vec::new();
    let mut outs = Vec::new();
    for alphabet in ALPHABETS {
        let r: Vec<String> = (0..rng.gen_range(4..=10)).map(|_| word(rng, alphabet)).collect();
        let o: Vec<String> = r
            .iter()
            .map(|w| {
                if rng.gen_bool(0.3) {
                    word(rng, alphabet)
                } else {
                    w.clone()
                }
            })
            .collect();
        refs.push(sent(&r.join(" ")));
        outs.push(sent(&o.join(" ")));
    }
    (refs, outs)
}

// 4
fn multi_score_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = MultiScoreOptions::default();
    let bleu = SentenceBleu::default();
    let chrf = SentenceChrf::default();
    let metrics: [&dyn SentenceMetric; 2] = [&bleu, &chrf];
    let ms = |o: &[Sentence], r: &[Sentence], m: &dyn SentenceMetric| multi_score(o, r, m, opts).map(|x| x.score);

    // (a) outputs equal to references, in any order.
    for _ in 0..100 {
        let refs: Vec<Sentence> = (0..3).map(|_| sent(&random_sentence(&mut rng, 15))).collect();
        let mut outs = refs.clone();
        outs.shuffle(&mut rng);
        for m in metrics {
            let s = ms(&outs, &refs, m).map_err(|e| e.to_string())?;
            ensure!(s == 100.0, "(a) {} gave {s}", m.name());
        }
    }
    // (b) outputs sharing no token with any reference.
    for _ in 0..100 {
        let (refs, _) = disjoint_instance(&mut rng);
        let outs: Vec<Sentence> = (0..3)
            .map(|_| {
                let words: Vec<String> = (0..rng.gen_range(1..=8))
                    .map(|_| {
                        (0..rng.gen_range(1..=4))
                            .map(|_| *b"yz0123456789".choose(&mut rng).unwrap() as char)
                            .collect()
                    })
                    .collect();
                sent(&words.join(" "))
            })
            .collect();
        let s = ms(&outs, &refs, &bleu).map_err(|e| e.to_string())?;
        ensure!(s == 0.0, "(b) MS-BLEU gave {s}");
    }
    // (c) triplicating the best output never beats the diverse set.
    for case in 0..150 {
        let (refs, outs) = disjoint_instance(&mut rng);
        for m in metrics {
            let original = multi_score(&outs, &refs, m, opts).map_err(|e| e.to_string())?;
            let best_row = (0..3)
                .max_by(|&a, &b| {
                    let ma = original.matrix.row(a).iter().cloned().fold(f64::MIN, f64::max);
                    let mb = original.matrix.row(b).iter().cloned().fold(f64::MIN, f64::max);
                    ma.total_cmp(&mb).then(b.cmp(&a))
                })
                .unwrap();
            let triple = vec![outs[best_row].clone(); 3];
            let dup = ms(&triple, &refs, m).map_err(|e| e.to_string())?;
            ensure!(
                dup <= original.score,
                "(c) case {case} {}: triplicated {dup} > diverse {}",
                m.name(),
                original.score
            );
        }
    }
    // (d) exact invariance under permutations of either side.
    for _ in 0..200 {
        let refs: Vec<Sentence> = (0..3).map(|_| sent(&random_sentence(&mut rng, 15))).collect();
        let outs: Vec<Sentence> = (0..3).map(|_| sent(&random_sentence(&mut rng, 15))).collect();
        for m in metrics {
            let base = ms(&outs, &refs, m).map_err(|e| e.to_string())?;
            let mut po = outs.clone();
            let mut pr = refs.clone();
            po.shuffle(&mut rng);
            pr.shuffle(&mut rng);
            let permuted = ms(&po, &pr, m).map_err(|e| e.to_string())?;
            ensure!(base == permuted, "(d) {}: {base} vs {permuted}", m.name());
        }
    }
    Ok(())
}

// 5
fn self_bleu_extremes() -> Check {
    let cfg = BleuConfig::sentence();
    let same = vec![sent("the airport serves the city"); 3];
    let v = self_bleu(&same, &cfg).map_err(|e| e.to_string())?;
    ensure!(format_score(v) == "100.00", "identical triple: {v}");
    let disjoint = vec![
        sent("alpha beta gamma"),
        sent("delta epsilon zeta"),
        sent("eta theta iota"),
    ];
    let v = self_bleu(&disjoint, &cfg).map_err(|e| e.to_string())?;
    ensure!(format_score(v) == "0.00", "disjoint triple: {v}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let set: Vec<Sentence> = (0..rng.gen_range(2..=5))
            .map(|_| sent(&random_sentence(&mut rng, 12)))
            .collect();
        let before = self_bleu(&set, &cfg).map_err(|e| e.to_string())?;
        let mut grown = set.clone();
        grown.push(set.choose(&mut rng).unwrap().clone());
        let after = self_bleu(&grown, &cfg).map_err(|e| e.to_string())?;
        ensure!(after >= before, "case {case}: {before} -> {after}");
    }
    Ok(())
}

fn generated(ds: &Dataset, strategy: Strategy) -> Result<Dataset, String> {
    let cfg = GenerateConfig {
        strategy,
        seed: 7,
        ..GenerateConfig::default()
    };
    let records = generate_for_dataset(ds, &cfg).map_err(|e| e.to_string())?;
    bind_outputs(ds, &records).map_err(|e| e.to_string())
}

// 6
fn decoding_ordering() -> Check {
    let ds = load_jsonl(&data_dir().join("demo.jsonl")).map_err(|e| e.to_string())?;
    let eval = |s: Strategy| -> Result<(f64, f64), String> {
        let r = evaluate_all(&generated(&ds, s)?, &EvalConfig::default()).map_err(|e| e.to_string())?;
        Ok((r.diversity.self_bleu.ok_or("no Self-BLEU")?, r.quality.bleu))
    };
    let (sb_random, bleu_random) = eval(Strategy::TotalRandom)?;
    let (sb_topk, _) = eval(Strategy::TopkRandom)?;
    let (sb_beam, bleu_beam) = eval(Strategy::BeamTop3)?;
    println!(
        "    Self-BLEU random {} < topk3 {} < beam3 {}; BLEU beam3 {} > random {}",
        format_score(sb_random),
        format_score(sb_topk),
        format_score(sb_beam),
        format_score(bleu_beam),
        format_score(bleu_random)
    );
    ensure!(sb_random < sb_topk && sb_topk < sb_beam, "Self-BLEU ordering violated");
    ensure!(bleu_beam > bleu_random, "BLEU ordering violated");
    // Golden values measured on the bundled corpus with seed 7.
    let golden = [
        (sb_random, "14.48"),
        (sb_topk, "39.61"),
        (sb_beam, "57.47"),
        (bleu_random, "11.67"),
        (bleu_beam, "59.25"),
    ];
    for (value, expected) in golden {
        ensure!(
            format_score(value) == expected,
            "golden {expected}, got {}",
            format_score(value)
        );
    }
    Ok(())
}

/// Explicit next-token table over a small vocabulary (id 0 is end-of-sequence).
struct TableModel {
    vocab: Vec<String>,
    seed: u64,
}

impl SequenceModel for TableModel {
    fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn eos(&self) -> TokenId {
        0
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        let mut key = self.seed;
        for &t in context {
            key = key.wrapping_mul(31).wrapping_add(t as u64 + 1);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let raw: Vec<f64> = (0..self.vocab.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|p| p / sum).collect()
    }
}

/// Every finished sequence of at most `max_len - 1` content tokens, scored
/// and ranked like beam search ranks its finished pool.
fn enumerate(model: &dyn SequenceModel, max_len: usize, alpha: f64) -> Vec<(Vec<TokenId>, f64)> {
    let eos = model.eos();
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (tokens, lp) in &frontier {
            let dist = model.next_distribution(tokens);
            for (t, &p) in dist.iter().enumerate() {
                let lp = lp + p.ln();
                if t as TokenId == eos {
                    let len = tokens.len() as f64;
                    out.push((tokens.clone(), lp / ((5.0 + len) / 6.0).powf(alpha)));
                } else {
                    let mut ext = tokens.clone();
                    ext.push(t as TokenId);
                    next.push((ext, lp));
                }
            }
        }
        frontier = next;
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

// 7
fn beam_oracle() -> Check {
    for vocab_size in 2..=4usize {
        for max_len in 1..=5usize {
            for seed in 0..6u64 {
                let model = TableModel {
                    vocab: (0..vocab_size)
                        .map(|i| if i == 0 { "</s>".into() } else { format!("w{i}") })
                        .collect(),
                    seed: seed * 97 + vocab_size as u64,
                };
                let all_sequences: usize = (1..=max_len as u32).map(|l| vocab_size.pow(l)).sum();
                for alpha in [0.0, 0.6, 1.0] {
                    let expected = enumerate(&model, max_len, alpha);
                    let got: Vec<(Vec<TokenId>, f64)> = beam_search(&model, all_sequences, max_len, alpha)
                        .into_iter()
                        .map(|h| (h.tokens, h.score))
                        .collect();
                    ensure!(
                        got == expected,
                        "|V|={vocab_size} max_len={max_len} seed={seed} alpha={alpha}: beam differs from enumeration"
                    );
                }
                let (g, done) = greedy(&model, max_len);
                let top = beam_search(&model, 1, max_len, 0.6);
                match top.first() {
                    Some(h) => ensure!(done && h.tokens == g, "width 1 {:?} vs greedy {g:?}", h.tokens),
                    None => ensure!(!done, "greedy finished but width-1 beam did not"),
                }
            }
        }
    }
    // Width 1 on trained n-gram models as well.
    let corpus: Vec<Vec<String>> = ["a b c", "a c b", "b a", "c c a b"]
        .iter()
        .map(|s| s.split(' ').map(String::from).collect())
        .collect();
    for order in 1..=3 {
        let lm = train_ngram(&corpus, order, 0.1).map_err(|e| e.to_string())?;
        let (g, done) = greedy(&lm, 5);
        match beam_search(&lm, 1, 5, 1.0).first() {
            Some(h) => ensure!(done && h.tokens == g, "order {order}: width 1 differs from greedy"),
            None => ensure!(!done, "order {order}: greedy finished but beam did not"),
        }
    }
    Ok(())
}

// 8
fn performance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = random_matrix(&mut rng, 500, 500, false);
    let start = Instant::now();
    let matching = max_weight_matching(&m);
    let elapsed = start.elapsed();
    ensure!(matching.len() == 500, "incomplete matching");
    ensure!(elapsed < Duration::from_secs(1), "500x500 took {elapsed:?}");
    println!("    500x500 assignment: {elapsed:?}");

    let instances: Vec<EvalInstance> = (0..1000)
        .map(|i| EvalInstance {
            id: format!("s{i}"),
            category: None,
            references: (0..3).map(|_| sent(&random_sentence(&mut rng, 20))).collect(),
            outputs: (0..3).map(|_| sent(&random_sentence(&mut rng, 20))).collect(),
        })
        .collect();
    let ds = Dataset::new(instances, "synthetic").map_err(|e| e.to_string())?;
    let start = Instant::now();
    evaluate_all(&ds, &EvalConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    println!("    1000-instance evaluation: {elapsed:?}");
    ensure!(elapsed < Duration::from_secs(10), "evaluation took {elapsed:?}");
    Ok(())
}

// 9
fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_multiscore");
    let train = data_dir().join("demo.jsonl");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut artifacts = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4")] {
        let outputs = dir.path().join(format!("outputs{run}.jsonl"));
        let report = dir.path().join(format!("report{run}.json"));
        for args in [
            vec![
                "generate",
                "--train",
                train.to_str().unwrap(),
                "--strategy",
                "topk3",
                "--seed",
                "7",
                "--out",
            ],
            vec![
                "evaluate",
                "--data",
                train.to_str().unwrap(),
                "--outputs",
                outputs.to_str().unwrap(),
                "--out",
            ],
        ] {
            let target = if args[0] == "generate" { &outputs } else { &report };
            let status = Command::new(bin)
                .args(&args)
                .arg(target)
                .env("MULTISCORE_THREADS", threads)
                .status()
                .map_err(|e| e.to_string())?;
            ensure!(status.success(), "{} exited with {status}", args[0]);
        }
        artifacts.push((std::fs::read(&outputs).unwrap(), std::fs::read(&report).unwrap()));
    }
    ensure!(
        artifacts[0].0 == artifacts[1].0,
        "generated outputs differ between runs"
    );
    ensure!(artifacts[0].1 == artifacts[1].1, "reports differ between runs");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1", "worked example renders 54.67", 1, worked_example),
        ("2", "hungarian matches brute force", 30, matcher_oracle_equivalence),
        ("3", "metric identities and ranges", 10, metric_identities),
        ("4", "multi-score properties", 20, multi_score_properties),
        ("5", "self-bleu extremes and duplicates", 10, self_bleu_extremes),
        ("6", "decoding strategy ordering", 60, decoding_ordering),
        ("7", "beam search vs enumeration", 5, beam_oracle),
        ("8", "performance", 20, performance),
        ("9", "end-to-end determinism", 60, determinism),
    ];
    let mut failures = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed > Duration::from_secs(budget) {
                Err(format!("over the {budget} s budget"))
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => println!("PASS  {id}  {name}  ({:.2} s)", elapsed.as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {id}  {name}  ({:.2} s): {msg}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
