//! Loading line-aligned `refN.txt` / `outN.txt` files and scoring them.
//!
//!     cargo run --example parallel_text

use multiscore::report::{render, Format};
use multiscore::{evaluate_all, load_parallel_text, EvalConfig};

fn main() -> multiscore::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let refs = dir.path().join("refs");
    let outs = dir.path().join("outs");
    for d in [&refs, &outs] {
        std::fs::create_dir_all(d).expect("create dir");
    }
    let files = [
        (
            "ref1.txt",
            "Baku is the capital of Azerbaijan.\nA Wizard of Mars was written by Diane Duane.\n",
        ),
        (
            "ref2.txt",
            "The capital of Azerbaijan is Baku.\nDiane Duane wrote A Wizard of Mars.\n",
        ),
        (
            "out1.txt",
            "Baku is the capital of Azerbaijan.\nA Wizard of Mars is by Diane Duane.\n",
        ),
        (
            "out2.txt",
            "Baku is the capital of Azerbaijan.\nDiane Duane is the author.\n",
        ),
    ];
    for (name, body) in files {
        let target = if name.starts_with("ref") { &refs } else { &outs };
        std::fs::write(target.join(name), body).expect("write");
    }

    let data = load_parallel_text(&refs, Some(&outs))?;
    let report = evaluate_all(&data, &EvalConfig::default())?;
    print!("{}", render(&report, Format::Table));
    for s in &report.per_instance {
        println!(
            "instance {}: MS-BLEU {:.2}, matched {:?}",
            s.id, s.ms_bleu, s.ms_bleu_edges
        );
    }
    Ok(())
}
