//! Mono PCM clips, WAV ingestion and fixed-hop framing.

mod wav;

pub use wav::{load_wav, parse_wav, wav_bytes, write_wav, SampleFormat};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frame hop shared by every frame-based measure, in seconds.
pub const DEFAULT_HOP_S: f64 = 0.02;

/// Mono samples in `[-1, 1]` at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate_hz: u32,
}

impl<T: Scalar> AudioClip<T> {
    /// Rejects empty, non-finite or out-of-range samples and a zero rate.
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::Input("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::Input("audio clip has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > T::one()) {
            return Err(Error::Input(format!(
                "sample {i} is {} (must be finite and within [-1, 1])",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Samples `[start, end)` as a new clip.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::Input(format!(
                "slice {start}..{end} outside clip of {} samples",
                self.samples.len()
            )));
        }
        Self::new(self.samples[start..end].to_vec(), self.sample_rate_hz)
    }

    /// Multiply every sample by `gain`, clamping to `[-1, 1]`.
    pub fn scaled(&self, gain: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| (s * gain).max(-T::one()).min(T::one())).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Non-overlapping frames of `samples_per_frame` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<'a, T> {
    samples: &'a [T],
    samples_per_frame: usize,
    pub hop_s: f64,
}

impl<'a, T> FrameSequence<'a, T> {
    pub fn len(&self) -> usize {
        self.samples.len() / self.samples_per_frame
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn samples_per_frame(&self) -> usize {
        self.samples_per_frame
    }

    pub fn frame(&self, i: usize) -> &'a [T] {
        let n = self.samples_per_frame;
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [T]> + '_ {
        self.samples.chunks_exact(self.samples_per_frame)
    }
}

/// Split into frames of `hop_s` seconds, dropping a trailing partial frame.
pub fn frame<T: Scalar>(clip: &AudioClip<T>, hop_s: f64) -> Result<FrameSequence<'_, T>> {
    let per = samples_per_hop(clip.sample_rate_hz, hop_s)?;
    if clip.len() < per {
        return Err(Error::Input(format!(
            "clip of {:.6} s is shorter than one hop of {hop_s} s",
            clip.duration_s()
        )));
    }
    Ok(FrameSequence {
        samples: &clip.samples,
        samples_per_frame: per,
        hop_s,
    })
}

/// `hop_s · rate` as an exact positive integer.
pub fn samples_per_hop(sample_rate_hz: u32, hop_s: f64) -> Result<usize> {
    let exact = hop_s * sample_rate_hz as f64;
    let rounded = exact.round();
    if !(hop_s > 0.0) || rounded < 1.0 || (exact - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::Input(format!(
            "hop {hop_s} s is not a whole number of samples at {sample_rate_hz} Hz"
        )));
    }
    Ok(rounded as usize)
}
