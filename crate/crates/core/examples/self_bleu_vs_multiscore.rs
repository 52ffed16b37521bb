//! Self-BLEU only looks at the outputs; Multi-Score also needs them to cover
//! the references. Three copies of one good sentence are maximally redundant
//! and can only claim one reference.
//!
//!     cargo run --example self_bleu_vs_multiscore

use multiscore::{multi_score, self_bleu, sentences, BleuConfig, MultiScoreOptions, SentenceBleu};

fn main() -> multiscore::Result<()> {
    let refs = sentences(&[
        "Baku is the capital of Azerbaijan.",
        "The capital city of Azerbaijan is Baku.",
        "Azerbaijan has Baku as its capital.",
    ])?;
    let sets = [
        (
            "diverse",
            vec![
                "Baku is the capital of Azerbaijan.",
                "The capital of Azerbaijan is Baku.",
                "Azerbaijan has Baku as capital.",
            ],
        ),
        ("copies", vec!["Baku is the capital of Azerbaijan."; 3]),
        (
            "off topic",
            vec!["The river flows north.", "A café opened in 1913.", "Runways are long."],
        ),
    ];
    println!("{:>10}  {:>9}  {:>7}", "set", "Self-BLEU", "MS-BLEU");
    for (name, outs) in sets {
        let outs = sentences(&outs)?;
        let sb = self_bleu(&outs, &BleuConfig::sentence())?;
        let ms = multi_score(&outs, &refs, &SentenceBleu::default(), MultiScoreOptions::default())?;
        println!("{name:>10}  {sb:>9.2}  {:>7.2}", ms.score);
    }
    Ok(())
}
