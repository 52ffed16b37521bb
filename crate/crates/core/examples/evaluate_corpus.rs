//! Generate outputs for the demo corpus with every strategy and print the
//! full evaluation table.
//!
//!     cargo run --release --example evaluate_corpus

use std::path::Path;

use multiscore::decoding::{generate_for_dataset, GenerateConfig, Strategy};
use multiscore::report::{format_score, TSV_HEADER};
use multiscore::{bind_outputs, evaluate_all, load_jsonl, EvalConfig};

fn main() -> multiscore::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/demo.jsonl");
    let data = load_jsonl(&path)?;
    println!(
        "{} instances, reference-set sizes {:?}",
        data.len(),
        data.stats().references_per_instance
    );

    println!("{:<10}{}", "strategy", TSV_HEADER.map(|h| format!("{h:>9}")).concat());
    for strategy in [
        Strategy::BeamTop3,
        Strategy::TotalRandom,
        Strategy::TopkRandom,
        Strategy::Ensemble,
    ] {
        let config = GenerateConfig {
            strategy,
            seed: 7,
            ..GenerateConfig::default()
        };
        let outputs = generate_for_dataset(&data, &config)?;
        let report = evaluate_all(&bind_outputs(&data, &outputs)?, &EvalConfig::default())?;
        let cells = [
            Some(report.quality.bleu),
            Some(report.quality.chrfpp),
            report.diversity.self_bleu,
            Some(report.diversity.ms_bleu),
            Some(report.diversity.ms_chrf),
        ];
        let row: String = cells
            .iter()
            .map(|c| format!("{:>9}", c.map_or("-".to_string(), format_score)))
            .collect();
        println!("{:<10}{row}", strategy.as_str());
    }
    Ok(())
}
