//! Per-stream order-n count model with additive smoothing.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::quantizer::N_STREAMS;
use super::TokenizedClip;

/// Padding token for contexts reaching before the first frame.
pub const BOS: u32 = u32::MAX;
pub const MODEL_HEADER: &[u8] = b"XLAB-ARM v1\n";

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

/// `P(w | ctx) = (c(ctx, w) + α) / (c(ctx) + α·V)` per stream; an unseen
/// context therefore gives `1/V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    vocab_size: usize,
    order: usize,
    alpha: f64,
    streams: Vec<HashMap<Vec<u32>, ContextCounts>>,
}

/// The `order` tokens before position `i`, padded with [`BOS`].
pub fn context(tokens: &[u32], i: usize, order: usize) -> Vec<u32> {
    (0..order)
        .map(|j| {
            let back = order - j;
            if i >= back {
                tokens[i - back]
            } else {
                BOS
            }
        })
        .collect()
}

impl ArModel {
    /// A model with no counts: every conditional is uniform.
    pub fn uniform(vocab_size: usize, order: usize) -> Result<Self> {
        Self::empty(vocab_size, order, 1.0)
    }

    fn empty(vocab_size: usize, order: usize, alpha: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::Input("context order must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Input(format!("smoothing alpha must be positive and finite, got {alpha}")));
        }
        if vocab_size == 0 {
            return Err(Error::Input("vocabulary size must be positive".into()));
        }
        Ok(Self {
            vocab_size,
            order,
            alpha,
            streams: vec![HashMap::new(); N_STREAMS],
        })
    }

    pub fn train(corpus: &[TokenizedClip], order: usize, alpha: f64) -> Result<Self> {
        let Some(first) = corpus.first() else {
            return Err(Error::Input("empty token corpus".into()));
        };
        let mut m = Self::empty(first.vocab_size, order, alpha)?;
        for clip in corpus {
            if clip.vocab_size != m.vocab_size {
                return Err(Error::Input(format!(
                    "corpus mixes vocabulary sizes {} and {}",
                    m.vocab_size, clip.vocab_size
                )));
            }
            for (s, tokens) in clip.streams.iter().enumerate() {
                for (i, &w) in tokens.iter().enumerate() {
                    let e = m.streams[s].entry(context(tokens, i, order)).or_default();
                    e.total += 1;
                    *e.next.entry(w).or_default() += 1;
                }
            }
        }
        Ok(m)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn prob(&self, stream: usize, ctx: &[u32], token: u32) -> f64 {
        let v = self.vocab_size as f64;
        match self.streams[stream].get(ctx) {
            None => 1.0 / v,
            Some(c) => {
                let n = c.next.get(&token).copied().unwrap_or(0) as f64;
                (n + self.alpha) / (c.total as f64 + self.alpha * v)
            }
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MODEL_HEADER)?;
        w.write_all(&(self.vocab_size as u32).to_le_bytes())?;
        w.write_all(&(self.order as u32).to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&(self.streams.len() as u32).to_le_bytes())?;
        for s in &self.streams {
            let mut ctxs: Vec<_> = s.iter().collect();
            ctxs.sort_by(|a, b| a.0.cmp(b.0));
            w.write_all(&(ctxs.len() as u64).to_le_bytes())?;
            for (ctx, c) in ctxs {
                for t in ctx {
                    w.write_all(&t.to_le_bytes())?;
                }
                let mut next: Vec<_> = c.next.iter().collect();
                next.sort();
                w.write_all(&(next.len() as u32).to_le_bytes())?;
                for (tok, n) in next {
                    w.write_all(&tok.to_le_bytes())?;
                    w.write_all(&n.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; MODEL_HEADER.len()];
        read_exact(&mut r, &mut head)?;
        if head != MODEL_HEADER {
            return Err(Error::ModelFormat("missing `XLAB-ARM v1` header".into()));
        }
        let vocab = read_u32(&mut r)? as usize;
        let order = read_u32(&mut r)? as usize;
        let mut a = [0u8; 8];
        read_exact(&mut r, &mut a)?;
        let mut m = Self::empty(vocab, order, f64::from_le_bytes(a))
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        if read_u32(&mut r)? as usize != N_STREAMS {
            return Err(Error::ModelFormat(format!("expected {N_STREAMS} streams")));
        }
        for s in 0..N_STREAMS {
            let n_ctx = read_u64(&mut r)?;
            for _ in 0..n_ctx {
                let ctx = (0..order).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
                let n_next = read_u32(&mut r)?;
                let mut c = ContextCounts::default();
                for _ in 0..n_next {
                    let tok = read_u32(&mut r)?;
                    if tok as usize >= vocab {
                        return Err(Error::ModelFormat(format!("token {tok} outside vocabulary {vocab}")));
                    }
                    let n = read_u64(&mut r)?;
                    c.total += n;
                    c.next.insert(tok, n);
                }
                m.streams[s].insert(ctx, c);
            }
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::ModelFormat("trailing bytes after model".into()));
        }
        Ok(m)
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::ModelFormat("file ends early".into()),
        _ => Error::Io(e),
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
