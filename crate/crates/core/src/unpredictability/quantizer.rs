//! Band-energy features and a residual vector quantizer with four stages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::{frame, AudioClip, DEFAULT_HOP_S};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::replication_seed;

use super::TokenizedClip;

pub const N_STREAMS: usize = 4;
pub const N_BANDS: usize = 4;
/// Minimum total corpus duration for training, in seconds.
pub const MIN_CORPUS_S: f64 = 60.0;
const KMEANS_MAX_ITER: usize = 50;
const KMEANS_REL_TOL: f64 = 1e-6;
const POWER_FLOOR: f64 = 1e-10;

pub type Feature = [f64; N_BANDS];

/// `ln(mean power + 1e-10)` in the bands `[0, f/8)`, `[f/8, f/4)`,
/// `[f/4, f/2)` and `[f/2, f]` of Nyquist frequency `f`, per frame.
pub fn band_energies<T: Scalar>(clip: &AudioClip<T>, hop_s: f64) -> Result<Vec<Feature>> {
    let frames = frame(clip, hop_s)?;
    let n = frames.samples_per_frame();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let half = n / 2;
    // band of each one-sided bin j (frequency j/n of the rate; Nyquist is 1/2)
    let band_of = |j: usize| -> usize {
        let f = j as f64 / n as f64;
        if f < 1.0 / 16.0 {
            0
        } else if f < 1.0 / 8.0 {
            1
        } else if f < 1.0 / 4.0 {
            2
        } else {
            3
        }
    };
    let mut counts = [0usize; N_BANDS];
    for j in 0..=half {
        counts[band_of(j)] += 1;
    }
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(frames.len());
    for fr in frames.iter() {
        for (b, s) in buf.iter_mut().zip(fr) {
            *b = Complex::new(s.to_f64_lossy(), 0.0);
        }
        fft.process(&mut buf);
        let mut sums = [0.0; N_BANDS];
        for (j, c) in buf.iter().enumerate().take(half + 1) {
            sums[band_of(j)] += c.norm_sqr() / n as f64;
        }
        let mut feat = [0.0; N_BANDS];
        for b in 0..N_BANDS {
            let mean = if counts[b] > 0 { sums[b] / counts[b] as f64 } else { 0.0 };
            feat[b] = (mean + POWER_FLOOR).ln();
        }
        out.push(feat);
    }
    Ok(out)
}

fn dist2(a: &Feature, b: &Feature) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid; ties resolve to the lowest index.
pub fn nearest(codebook: &[Feature], x: &Feature) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in codebook.iter().enumerate() {
        let d = dist2(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// k-means++ seeding followed by Lloyd iterations.
fn kmeans(points: &[Feature], k: usize, seed: u64) -> Vec<Feature> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Feature> = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }

    let mut prev_inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![[0.0; N_BANDS]; k];
        let mut counts = vec![0usize; k];
        let mut inertia = 0.0;
        for p in points {
            let j = nearest(&centroids, p);
            inertia += dist2(p, &centroids[j]);
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for b in 0..N_BANDS {
                    centroids[j][b] = sums[j][b] / counts[j] as f64;
                }
            }
        }
        let converged = prev_inertia.is_finite()
            && (prev_inertia - inertia).abs() <= KMEANS_REL_TOL * prev_inertia.max(f64::MIN_POSITIVE);
        prev_inertia = inertia;
        if converged || inertia == 0.0 {
            break;
        }
    }
    centroids
}

/// Four residual codebooks over band-energy features: stage `s` quantizes
/// what stages `0..s` left unexplained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub vocab_size: usize,
    pub sample_rate_hz: u32,
    pub hop_s: f64,
    pub seed: u64,
    pub codebooks: Vec<Vec<Feature>>,
}

pub fn train_quantizer<T: Scalar>(corpus: &[AudioClip<T>], vocab_size: usize, seed: u64) -> Result<Quantizer> {
    if vocab_size == 0 || vocab_size > u32::MAX as usize {
        return Err(Error::Input(format!("vocabulary size {vocab_size} out of range")));
    }
    let Some(first) = corpus.first() else {
        return Err(Error::Input("empty training corpus".into()));
    };
    let rate = first.sample_rate_hz();
    if corpus.iter().any(|c| c.sample_rate_hz() != rate) {
        return Err(Error::Input("training clips have different sample rates".into()));
    }
    let total: f64 = corpus.iter().map(AudioClip::duration_s).sum();
    if total < MIN_CORPUS_S {
        return Err(Error::Input(format!(
            "training corpus lasts {total:.2} s; at least {MIN_CORPUS_S} s needed"
        )));
    }
    if corpus.iter().all(|c| c.samples().iter().all(|s| *s == T::zero())) {
        return Err(Error::Degenerate("training corpus is entirely silent".into()));
    }
    let mut residual: Vec<Feature> = Vec::new();
    for clip in corpus {
        residual.extend(band_energies(clip, DEFAULT_HOP_S)?);
    }
    let mut codebooks = Vec::with_capacity(N_STREAMS);
    for stage in 0..N_STREAMS {
        let cb = kmeans(&residual, vocab_size, replication_seed(seed, stage as u64));
        for r in residual.iter_mut() {
            let c = cb[nearest(&cb, r)];
            for b in 0..N_BANDS {
                r[b] -= c[b];
            }
        }
        codebooks.push(cb);
    }
    Ok(Quantizer {
        vocab_size,
        sample_rate_hz: rate,
        hop_s: DEFAULT_HOP_S,
        seed,
        codebooks,
    })
}

/// One token per frame per codebook stage.
pub fn tokenize<T: Scalar>(clip: &AudioClip<T>, q: &Quantizer) -> Result<TokenizedClip> {
    if clip.sample_rate_hz() != q.sample_rate_hz {
        return Err(Error::Input(format!(
            "clip sample rate {} Hz differs from the quantizer's {} Hz",
            clip.sample_rate_hz(),
            q.sample_rate_hz
        )));
    }
    let feats = band_energies(clip, q.hop_s)?;
    let mut streams: Vec<Vec<u32>> = (0..N_STREAMS).map(|_| Vec::with_capacity(feats.len())).collect();
    for mut r in feats {
        for (stage, cb) in q.codebooks.iter().enumerate() {
            let j = nearest(cb, &r);
            streams[stage].push(j as u32);
            for b in 0..N_BANDS {
                r[b] -= cb[j][b];
            }
        }
    }
    TokenizedClip::new(streams, q.vocab_size, q.hop_s)
}
