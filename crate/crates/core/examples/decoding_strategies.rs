//! The four ways of producing a three-sentence set from an n-gram model.
//!
//!     cargo run --example decoding_strategies -- 7

use multiscore::decoding::{
    generate_ensemble, generate_random, generate_top3_beam, generate_topk_random, train_ngram, SequenceModel,
};

fn tokens(lines: &[&str]) -> Vec<Vec<String>> {
    lines.iter().map(|l| multiscore::text::tokenize_words(l)).collect()
}

fn main() -> multiscore::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let refs = [
        "Alderney Airport has a runway length of 733 metres.",
        "The runway at Alderney Airport is 733 metres long.",
        "Alderney Airport's runway measures 733 metres in length.",
    ];
    let pooled = train_ngram(&tokens(&refs), 3, 0.1)?;

    let sets = [
        generate_top3_beam(&pooled, 5, 64, 1.0)?,
        generate_random(&pooled, seed, 64),
        generate_topk_random(&pooled, 3, seed, 64)?,
        {
            let shards = refs
                .iter()
                .map(|r| train_ngram(&tokens(&[r]), 3, 0.1))
                .collect::<multiscore::Result<Vec<_>>>()?;
            let models: Vec<&dyn SequenceModel> = shards.iter().map(|m| m as &dyn SequenceModel).collect();
            generate_ensemble(&models, 5, 64, 1.0)?
        },
    ];
    for set in sets {
        println!("{}:", set.strategy.as_str());
        for s in &set.sentences {
            println!("  {s}");
        }
    }
    Ok(())
}
