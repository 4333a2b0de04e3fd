//! RIFF/WAVE little-endian PCM and IEEE-float reader and writer.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::AudioClip;

const TAG_PCM: u16 = 1;
const TAG_FLOAT: u16 = 3;
const TAG_EXTENSIBLE: u16 = 0xFFFE;

/// On-disk sample encodings understood by [`parse_wav`] and [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// Unsigned, offset 128.
    Pcm8,
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    fn bits(self) -> u16 {
        match self {
            SampleFormat::Pcm8 => 8,
            SampleFormat::Pcm16 => 16,
            SampleFormat::Pcm24 => 24,
            SampleFormat::Float32 => 32,
        }
    }

    fn tag(self) -> u16 {
        match self {
            SampleFormat::Float32 => TAG_FLOAT,
            _ => TAG_PCM,
        }
    }
}

struct Format {
    sample: SampleFormat,
    channels: u16,
    sample_rate: u32,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::WavHeader(format!("fmt chunk of {} bytes (need 16)", body.len())));
    }
    let mut tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let bits = u16_at(body, 14);
    if tag == TAG_EXTENSIBLE {
        if body.len() < 26 {
            return Err(Error::WavHeader("WAVE_FORMAT_EXTENSIBLE fmt chunk too short".into()));
        }
        // first two bytes of the sub-format GUID carry the real tag
        tag = u16_at(body, 24);
    }
    let sample = match (tag, bits) {
        (TAG_PCM, 8) => SampleFormat::Pcm8,
        (TAG_PCM, 16) => SampleFormat::Pcm16,
        (TAG_PCM, 24) => SampleFormat::Pcm24,
        (TAG_FLOAT, 32) => SampleFormat::Float32,
        (TAG_PCM, b) | (TAG_FLOAT, b) => {
            return Err(Error::WavUnsupported(format!("{b}-bit samples with format tag {tag}")))
        }
        (t, _) => return Err(Error::WavUnsupported(format!("format tag 0x{t:04X}"))),
    };
    if !(1..=2).contains(&channels) {
        return Err(Error::WavUnsupported(format!("{channels} channels (1 or 2 supported)")));
    }
    if sample_rate == 0 {
        return Err(Error::WavHeader("sample rate is zero".into()));
    }
    let block_align = u16_at(body, 12);
    if block_align != channels * bits / 8 {
        return Err(Error::WavHeader(format!(
            "block align {block_align} inconsistent with {channels}×{bits}-bit frames"
        )));
    }
    Ok(Format {
        sample,
        channels,
        sample_rate,
    })
}

fn decode_sample(fmt: SampleFormat, b: &[u8]) -> f64 {
    match fmt {
        SampleFormat::Pcm8 => (b[0] as f64 - 128.0) / 128.0,
        SampleFormat::Pcm16 => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        SampleFormat::Pcm24 => {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        SampleFormat::Float32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
    }
}

/// Decode an in-memory WAVE file, averaging stereo channels to mono.
pub fn parse_wav<T: Scalar>(bytes: &[u8]) -> Result<AudioClip<T>> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::WavHeader("missing RIFF/WAVE signature".into()));
    }
    let mut pos = 12;
    let mut fmt: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let start = pos + 8;
        match id {
            b"fmt " => {
                let end = start.checked_add(size).filter(|&e| e <= bytes.len()).ok_or_else(|| {
                    Error::WavHeader("fmt chunk runs past end of file".into())
                })?;
                fmt = Some(parse_fmt(&bytes[start..end])?);
            }
            b"data" => {
                let available = bytes.len() - start;
                if size > available {
                    return Err(Error::WavTruncated {
                        expected: size,
                        found: available,
                    });
                }
                data = Some(&bytes[start..start + size]);
                break;
            }
            _ => {}
        }
        // chunks are word aligned
        pos = start.saturating_add(size).saturating_add(size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::WavHeader("no fmt chunk before data".into()))?;
    let data = data.ok_or_else(|| Error::WavHeader("no data chunk".into()))?;
    let width = (fmt.sample.bits() / 8) as usize;
    let frame = width * fmt.channels as usize;
    if data.len() % frame != 0 {
        return Err(Error::WavTruncated {
            expected: data.len().div_ceil(frame) * frame,
            found: data.len(),
        });
    }
    let samples: Vec<T> = data
        .chunks_exact(frame)
        .map(|f| {
            let sum: f64 = f.chunks_exact(width).map(|s| decode_sample(fmt.sample, s)).sum();
            T::lit((sum / fmt.channels as f64).clamp(-1.0, 1.0))
        })
        .collect();
    AudioClip::new(samples, fmt.sample_rate)
}

pub fn load_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    parse_wav(&std::fs::read(path)?)
}

/// Serialise a mono clip. Integer formats round to nearest and saturate.
pub fn wav_bytes<T: Scalar>(clip: &AudioClip<T>, format: SampleFormat) -> Vec<u8> {
    let width = (format.bits() / 8) as usize;
    let data_len = clip.len() * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.tag().to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz() * width as u32).to_le_bytes());
    out.extend_from_slice(&(width as u16).to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in clip.samples() {
        let s = s.to_f64_lossy();
        match format {
            SampleFormat::Pcm8 => out.push((s * 128.0 + 128.0).round().clamp(0.0, 255.0) as u8),
            SampleFormat::Pcm16 => {
                out.extend_from_slice(&((s * 32768.0).round().clamp(-32768.0, 32767.0) as i16).to_le_bytes())
            }
            SampleFormat::Pcm24 => {
                let v = (s * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                out.extend_from_slice(&v.to_le_bytes()[..3]);
            }
            SampleFormat::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

pub fn write_wav<T: Scalar>(path: impl AsRef<Path>, clip: &AudioClip<T>, format: SampleFormat) -> Result<()> {
    std::fs::write(path, wav_bytes(clip, format))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Hand-assembled header for `channels` × `bits` with the given tag.
    fn header(tag: u16, channels: u16, rate: u32, bits: u16, data_len: u32) -> Vec<u8> {
        let mut h = Vec::new();
        h.extend_from_slice(b"RIFF");
        h.extend_from_slice(&(36 + data_len).to_le_bytes());
        h.extend_from_slice(b"WAVEfmt ");
        h.extend_from_slice(&16u32.to_le_bytes());
        h.extend_from_slice(&tag.to_le_bytes());
        h.extend_from_slice(&channels.to_le_bytes());
        h.extend_from_slice(&rate.to_le_bytes());
        h.extend_from_slice(&(rate * (channels * bits / 8) as u32).to_le_bytes());
        h.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        h.extend_from_slice(&bits.to_le_bytes());
        h.extend_from_slice(b"data");
        h.extend_from_slice(&data_len.to_le_bytes());
        h
    }

    #[test]
    fn sine_second_at_44k1() {
        let samples: Vec<f64> = (0..44_100)
            .map(|i| 0.8 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 44_100.0).sin())
            .collect();
        let clip = AudioClip::new(samples, 44_100).unwrap();
        let back: AudioClip<f64> = parse_wav(&wav_bytes(&clip, SampleFormat::Pcm16)).unwrap();
        assert_eq!(back.len(), 44_100);
        assert!(back.samples().iter().all(|s| s.abs() <= 1.0));
    }

    #[test]
    fn most_negative_16_bit_is_minus_one() {
        let mut b = header(TAG_PCM, 1, 8000, 16, 4);
        b.extend_from_slice(&i16::MIN.to_le_bytes());
        b.extend_from_slice(&i16::MAX.to_le_bytes());
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples()[0], -1.0);
        assert_eq!(clip.samples()[1], 32767.0 / 32768.0);
    }

    #[test]
    fn opposite_stereo_downmixes_to_silence() {
        let mut b = header(TAG_PCM, 2, 8000, 16, 400);
        for _ in 0..100 {
            b.extend_from_slice(&16384i16.to_le_bytes());
            b.extend_from_slice(&(-16384i16).to_le_bytes());
        }
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.len(), 100);
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn other_depths_and_extensible() {
        let mut b = header(TAG_PCM, 1, 8000, 24, 6);
        b.extend_from_slice(&[0x00, 0x00, 0x80, 0xFF, 0xFF, 0x7F]);
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples()[0], -1.0);
        assert_eq!(clip.samples()[1], 8_388_607.0 / 8_388_608.0);

        let mut b = header(TAG_PCM, 1, 8000, 8, 2);
        b.extend_from_slice(&[0, 192]);
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples(), &[-1.0, 0.5]);

        let mut b = header(TAG_FLOAT, 1, 8000, 32, 4);
        b.extend_from_slice(&0.25f32.to_le_bytes());
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples(), &[0.25]);

        // extensible: 40-byte fmt with the PCM sub-format GUID
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(4u32 + 48 + 8 + 2).to_le_bytes());
        b.extend_from_slice(b"WAVEfmt ");
        b.extend_from_slice(&40u32.to_le_bytes());
        b.extend_from_slice(&TAG_EXTENSIBLE.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&8000u32.to_le_bytes());
        b.extend_from_slice(&16000u32.to_le_bytes());
        b.extend_from_slice(&2u16.to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(&22u16.to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(&0u32.to_le_bytes());
        b.extend_from_slice(&TAG_PCM.to_le_bytes());
        b.extend_from_slice(&[0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71]);
        b.extend_from_slice(b"data");
        b.extend_from_slice(&2u32.to_le_bytes());
        b.extend_from_slice(&16384i16.to_le_bytes());
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples(), &[0.5]);
    }

    #[test]
    fn unknown_chunks_are_skipped() {
        let mut b = header(TAG_PCM, 1, 8000, 16, 2);
        let data_at = b.len() - 8;
        let mut list = b"LIST".to_vec();
        list.extend_from_slice(&3u32.to_le_bytes());
        list.extend_from_slice(&[1, 2, 3, 0]); // odd size plus pad byte
        b.splice(data_at..data_at, list);
        b.extend_from_slice(&(-16384i16).to_le_bytes());
        let clip: AudioClip<f64> = parse_wav(&b).unwrap();
        assert_eq!(clip.samples(), &[-0.5]);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(parse_wav::<f64>(b"RIFX\0\0\0\0WAVE"), Err(Error::WavHeader(_))));
        let mut b = header(2, 1, 8000, 16, 2);
        b.extend_from_slice(&[0, 0]);
        assert!(matches!(parse_wav::<f64>(&b), Err(Error::WavUnsupported(_))));
        let mut b = header(TAG_PCM, 1, 8000, 16, 100);
        b.extend_from_slice(&[0; 10]);
        assert!(matches!(
            parse_wav::<f64>(&b),
            Err(Error::WavTruncated { expected: 100, found: 10 })
        ));
        let mut b = header(TAG_PCM, 3, 8000, 16, 6);
        b.extend_from_slice(&[0; 6]);
        assert!(matches!(parse_wav::<f64>(&b), Err(Error::WavUnsupported(_))));
    }

    proptest! {
        #[test]
        fn pcm16_round_trip_is_bit_exact(values in proptest::collection::vec(any::<i16>(), 1..2000)) {
            let clip = AudioClip::new(values.iter().map(|&v| v as f64 / 32768.0).collect(), 22_050).unwrap();
            let bytes = wav_bytes(&clip, SampleFormat::Pcm16);
            let back: AudioClip<f64> = parse_wav(&bytes).unwrap();
            prop_assert_eq!(back.samples(), clip.samples());
            prop_assert_eq!(wav_bytes(&back, SampleFormat::Pcm16), bytes);
        }
    }
}
