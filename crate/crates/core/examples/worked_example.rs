//! Three outputs against three references with hand-set pairwise scores.
//! The matching pairs each output with a different reference even though
//! that is not every row's best cell.
//!
//!     cargo run --example worked_example

use std::path::Path;

use multiscore::multi_score::instance_multi_score;
use multiscore::report::format_score;
use multiscore::{load_jsonl, LookupMetric, MultiScoreOptions};

fn main() -> multiscore::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/worked_example");
    let data = load_jsonl(&dir.join("data.jsonl"))?;
    let metric = LookupMetric::from_json_file(&dir.join("scores.json"))?;
    let inst = &data.instances()[0];
    let result = instance_multi_score(inst, &metric, MultiScoreOptions::default())?;

    for (i, out) in inst.outputs.iter().enumerate() {
        let row: Vec<String> = result.matrix.row(i).iter().map(|w| format!("{w:>5}")).collect();
        println!("pred{} {}   {}", i + 1, row.join(" "), out.raw());
    }
    for (&(i, j), w) in result.matching.edges.iter().zip(&result.matching.edge_weights) {
        println!("pred{} -> ref{}  ({w})", i + 1, j + 1);
    }
    println!("Multi-Score = {}", format_score(result.score));
    Ok(())
}
