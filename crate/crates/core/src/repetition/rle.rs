//! Run-length codecs: a textual variant over non-digit alphabets and a
//! general byte-pair variant.

use crate::error::{Error, Result};

use super::Codec;

/// Runs of one symbol are emitted bare, runs of 2–9 as `digit symbol`;
/// longer runs are split into chunks of at most 9.
///
/// Digits are rejected because they would be ambiguous with run counts;
/// use [`rle_encode_binary`] for arbitrary bytes.
pub fn rle_encode_pedagogical(text: &[u8]) -> Result<Vec<u8>> {
    if let Some(i) = text.iter().position(u8::is_ascii_digit) {
        return Err(Error::Input(format!(
            "byte {i} is the digit {:?}; digits are reserved for run counts (use the binary run-length codec)",
            text[i] as char
        )));
    }
    let mut out = Vec::with_capacity(text.len());
    for run in text.chunk_by(|a, b| a == b) {
        let sym = run[0];
        let mut left = run.len();
        while left > 0 {
            let n = left.min(9);
            if n > 1 {
                out.push(b'0' + n as u8);
            }
            out.push(sym);
            left -= n;
        }
    }
    Ok(out)
}

pub fn rle_decode_pedagogical(code: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut it = code.iter();
    while let Some(&b) = it.next() {
        if b.is_ascii_digit() {
            let n = b - b'0';
            let sym = it.next().filter(|s| !s.is_ascii_digit()).ok_or_else(|| Error::Codec {
                codec: "rle-text".into(),
                reason: "run count not followed by a symbol".into(),
            })?;
            if n < 2 {
                return Err(Error::Codec {
                    codec: "rle-text".into(),
                    reason: format!("run count {n} below 2"),
                });
            }
            out.extend(std::iter::repeat_n(*sym, n as usize));
        } else {
            out.push(b);
        }
    }
    Ok(out)
}

/// `(count, value)` byte pairs with `count` in `1..=255`.
pub fn rle_encode_binary(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for run in data.chunk_by(|a, b| a == b) {
        for chunk in run.chunks(255) {
            out.push(chunk.len() as u8);
            out.push(chunk[0]);
        }
    }
    out
}

pub fn rle_decode_binary(code: &[u8]) -> Result<Vec<u8>> {
    if !code.len().is_multiple_of(2) {
        return Err(Error::Codec {
            codec: "rle".into(),
            reason: "odd-length stream".into(),
        });
    }
    let mut out = Vec::new();
    for pair in code.chunks_exact(2) {
        if pair[0] == 0 {
            return Err(Error::Codec {
                codec: "rle".into(),
                reason: "zero run count".into(),
            });
        }
        out.extend(std::iter::repeat_n(pair[1], pair[0] as usize));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryRle;

impl Codec for BinaryRle {
    fn name(&self) -> &str {
        "rle"
    }

    fn encode(&self, data: &[u8]) -> Vec<u8> {
        rle_encode_binary(data)
    }

    fn decode(&self, code: &[u8]) -> Result<Vec<u8>> {
        rle_decode_binary(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        assert_eq!(rle_encode_pedagogical(b"aaaaabbbbb").unwrap(), b"5a5b");
        assert_eq!(rle_encode_pedagogical(b"aabbabbaba").unwrap(), b"2a2ba2baba");
        assert_eq!(rle_encode_pedagogical(&[b'a'; 12]).unwrap(), b"9a3a");
        assert_eq!(rle_decode_pedagogical(b"9a3a").unwrap(), vec![b'a'; 12]);
        assert_eq!(rle_encode_pedagogical(b"").unwrap(), b"");
        assert!(matches!(rle_encode_pedagogical(b"a1b"), Err(Error::Input(_))));
    }

    #[test]
    fn binary_sizes() {
        assert_eq!(rle_encode_binary(&[0; 255]), vec![255, 0]);
        assert_eq!(rle_encode_binary(&[0; 256]), vec![255, 0, 1, 0]);
        let alt: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        assert_eq!(rle_encode_binary(&alt).len(), 400);
        assert!(rle_decode_binary(&[0, 5]).is_err());
        assert!(rle_decode_binary(&[3]).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(s in "[a-z ]{0,200}") {
            let enc = rle_encode_pedagogical(s.as_bytes()).unwrap();
            prop_assert_eq!(rle_decode_pedagogical(&enc).unwrap(), s.as_bytes());
        }

        #[test]
        fn binary_round_trip(data in proptest::collection::vec(0u8..4, 0..2000)) {
            prop_assert_eq!(rle_decode_binary(&rle_encode_binary(&data)).unwrap(), data);
        }
    }
}
