//! Log-perplexity of tokenised audio under a four-stream autoregressive model.

mod model;
mod quantizer;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pearson;

pub use model::{context, ArModel, BOS, MODEL_HEADER};
pub use quantizer::{band_energies, nearest, tokenize, train_quantizer, Feature, Quantizer, MIN_CORPUS_S, N_BANDS, N_STREAMS};

/// Four parallel token streams of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedClip {
    pub streams: Vec<Vec<u32>>,
    pub vocab_size: usize,
    pub hop_s: f64,
}

impl TokenizedClip {
    pub fn new(streams: Vec<Vec<u32>>, vocab_size: usize, hop_s: f64) -> Result<Self> {
        if streams.len() != N_STREAMS {
            return Err(Error::Input(format!("expected {N_STREAMS} token streams, got {}", streams.len())));
        }
        let len = streams[0].len();
        if streams.iter().any(|s| s.len() != len) {
            return Err(Error::Input("token streams differ in length".into()));
        }
        if let Some(t) = streams.iter().flatten().find(|&&t| t as usize >= vocab_size) {
            return Err(Error::Input(format!("token {t} outside vocabulary of size {vocab_size}")));
        }
        Ok(Self {
            streams,
            vocab_size,
            hop_s,
        })
    }

    pub fn len(&self) -> usize {
        self.streams[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The first `n` steps of every stream.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            streams: self.streams.iter().map(|s| s[..n.min(s.len())].to_vec()).collect(),
            vocab_size: self.vocab_size,
            hop_s: self.hop_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    pub unit_id: String,
    /// `−Σ_i ln P(s_i | s_<i)` in nats.
    pub log_perplexity: f64,
    pub tokens_scored: usize,
    pub per_token_mean: f64,
}

/// `−ln` of the averaged stream probability at every step.
///
/// The four per-stream conditionals are averaged in probability space,
/// evaluated as `logsumexp(ln p_s) − ln 4` so no product is ever formed.
pub fn step_surprisals(clip: &TokenizedClip, model: &ArModel) -> Result<Vec<f64>> {
    if clip.vocab_size != model.vocab_size() {
        return Err(Error::Input(format!(
            "clip vocabulary {} does not match model vocabulary {}",
            clip.vocab_size,
            model.vocab_size()
        )));
    }
    let ln_n = (N_STREAMS as f64).ln();
    let mut out = Vec::with_capacity(clip.len());
    let mut logs = [0.0; N_STREAMS];
    for i in 0..clip.len() {
        for (s, tokens) in clip.streams.iter().enumerate() {
            let ctx = context(tokens, i, model.order());
            logs[s] = model.prob(s, &ctx, tokens[i]).ln();
        }
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = hi + logs.iter().map(|l| (l - hi).exp()).sum::<f64>().ln();
        out.push((ln_n - lse).max(0.0));
    }
    Ok(out)
}

pub fn log_perplexity(unit_id: &str, clip: &TokenizedClip, model: &ArModel) -> Result<PerplexityReport> {
    let steps = step_surprisals(clip, model)?;
    let total: f64 = steps.iter().sum();
    Ok(PerplexityReport {
        unit_id: unit_id.into(),
        log_perplexity: total,
        tokens_scored: steps.len(),
        per_token_mean: if steps.is_empty() { 0.0 } else { total / steps.len() as f64 },
    })
}

/// Pearson correlation over units present in both maps (ordered by unit id).
pub fn perplexity_repetition_correlation(perp: &HashMap<String, f64>, enc: &HashMap<String, f64>) -> Result<f64> {
    let paired: BTreeMap<&String, (f64, f64)> = perp
        .iter()
        .filter_map(|(u, &p)| enc.get(u).map(|&e| (u, (p, e))))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = paired.into_values().unzip();
    pearson(&x, &y)
}
