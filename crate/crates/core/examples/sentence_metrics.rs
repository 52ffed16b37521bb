//! Sentence and corpus BLEU, chrF++, and how they treat multiple references.
//!
//!     cargo run --example sentence_metrics

use multiscore::metrics::sentence_chrfpp_multi;
use multiscore::{corpus_bleu, corpus_chrfpp, sentence_bleu, sentence_chrfpp, sentences, BleuConfig, ChrfConfig};

fn main() -> multiscore::Result<()> {
    let hyp = &sentences(&["Aarhus Airport serves the city of Aarhus."])?[0];
    let refs = sentences(&[
        "Aarhus Airport serves the city of Aarhus in Denmark.",
        "The city of Aarhus is served by Aarhus Airport.",
    ])?;
    let chrf = ChrfConfig::default();

    println!("tokens: {:?}", hyp.tokens());
    println!(
        "sentence BLEU, first reference: {:.2}",
        sentence_bleu(hyp, &refs[..1], &BleuConfig::sentence())?
    );
    println!(
        "sentence BLEU, both references: {:.2}",
        sentence_bleu(hyp, &refs, &BleuConfig::sentence())?
    );
    println!(
        "chrF++, first reference:        {:.2}",
        sentence_chrfpp(hyp, &refs[0], &chrf)?
    );
    println!(
        "chrF++, best of both:           {:.2}",
        sentence_chrfpp_multi(hyp, &refs, &chrf)?
    );

    let other = &sentences(&["Denmark has an airport."])?[0];
    let corpus = [(hyp, refs.as_slice()), (other, refs.as_slice())];
    println!("corpus BLEU:   {:.2}", corpus_bleu(&corpus, &BleuConfig::corpus())?);
    println!("corpus chrF++: {:.2}", corpus_chrfpp(&corpus, &chrf)?);
    Ok(())
}
