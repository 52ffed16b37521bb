use crate::error::{Error, Result};
use crate::metrics::bleu::{sentence_bleu, BleuConfig};
use crate::text::Sentence;

/// Mean BLEU of each output scored against the remaining outputs of the same
/// set. Higher means less diverse.
pub fn self_bleu(outputs: &[Sentence], config: &BleuConfig) -> Result<f64> {
    if outputs.len() < 2 {
        return Err(Error::invalid(format!(
            "Self-BLEU needs at least 2 outputs, got {}",
            outputs.len()
        )));
    }
    let mut sum = 0.0;
    let mut others = Vec::with_capacity(outputs.len() - 1);
    for (i, hyp) in outputs.iter().enumerate() {
        others.clear();
        others.extend(
            outputs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| o.clone()),
        );
        sum += sentence_bleu(hyp, &others, config)?;
    }
    Ok(sum / outputs.len() as f64)
}
