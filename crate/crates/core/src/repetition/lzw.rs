//! Variable-width LZW over bytes.
//!
//! The dictionary starts with the 256 single bytes and grows by one entry
//! per emitted code until it holds 2¹⁶ entries, after which it is frozen.
//! Code `k` (0-based) is written with `max(9, bitlen(255 + min(k, 65280)))`
//! bits, enough for the largest index the decoder can see at that point.
//! Codes are packed least-significant bit first; the last byte is
//! zero-padded.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::Codec;

const MAX_ENTRIES: usize = 1 << 16;

fn code_width(k: usize) -> u32 {
    let top = 255 + k.min(MAX_ENTRIES - 256);
    (usize::BITS - top.leading_zeros()).max(9)
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn push(&mut self, code: u32, width: u32) {
        self.acc |= (code as u64) << self.nbits;
        self.nbits += width;
        while self.nbits >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.nbits -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.out.push(self.acc as u8);
        }
        self.out
    }
}

pub fn lzw_encode(data: &[u8]) -> Vec<u8> {
    let mut w = BitWriter {
        out: Vec::with_capacity(data.len() / 2),
        acc: 0,
        nbits: 0,
    };
    let Some((&first, rest)) = data.split_first() else {
        return Vec::new();
    };
    let mut dict: HashMap<(u32, u8), u32> = HashMap::new();
    let mut next = 256usize;
    let mut cur = first as u32;
    let mut k = 0usize;
    for &b in rest {
        if let Some(&c) = dict.get(&(cur, b)) {
            cur = c;
            continue;
        }
        w.push(cur, code_width(k));
        k += 1;
        if next < MAX_ENTRIES {
            dict.insert((cur, b), next as u32);
            next += 1;
        }
        cur = b as u32;
    }
    w.push(cur, code_width(k));
    w.finish()
}

fn corrupt(reason: String) -> Error {
    Error::Codec {
        codec: "lzw".into(),
        reason,
    }
}

pub fn lzw_decode(code: &[u8]) -> Result<Vec<u8>> {
    // entry i ≥ 256 is (prefix code, last byte); `first` caches its first byte
    let mut prefix: Vec<u32> = Vec::new();
    let mut last: Vec<u8> = Vec::new();
    let mut first: Vec<u8> = Vec::new();
    let mut out = Vec::with_capacity(code.len() * 2);
    let mut scratch = Vec::new();

    let expand = |c: u32, prefix: &[u32], last: &[u8], scratch: &mut Vec<u8>, out: &mut Vec<u8>| {
        scratch.clear();
        let mut c = c as usize;
        while c >= 256 {
            scratch.push(last[c - 256]);
            c = prefix[c - 256] as usize;
        }
        scratch.push(c as u8);
        out.extend(scratch.iter().rev());
    };
    let first_of = |c: u32, first: &[u8]| if c < 256 { c as u8 } else { first[c as usize - 256] };

    let total_bits = code.len() as u64 * 8;
    let mut pos = 0u64;
    let mut prev: Option<u32> = None;
    let mut k = 0usize;
    loop {
        let width = code_width(k);
        if pos + width as u64 > total_bits {
            break;
        }
        let mut c = 0u32;
        for i in 0..width as u64 {
            let bit = pos + i;
            c |= (((code[(bit / 8) as usize] >> (bit % 8)) & 1) as u32) << i;
        }
        pos += width as u64;
        let next = 256 + prefix.len();
        match prev {
            None => {
                if c >= 256 {
                    return Err(corrupt(format!("first code {c} is not a literal")));
                }
                out.push(c as u8);
            }
            Some(p) => {
                let head = if (c as usize) < next {
                    first_of(c, &first)
                } else if c as usize == next && next < MAX_ENTRIES {
                    first_of(p, &first)
                } else {
                    return Err(corrupt(format!("code {c} beyond dictionary size {next}")));
                };
                if next < MAX_ENTRIES {
                    prefix.push(p);
                    last.push(head);
                    first.push(first_of(p, &first));
                }
                expand(c, &prefix, &last, &mut scratch, &mut out);
            }
        }
        prev = Some(c);
        k += 1;
    }
    let slack = total_bits - pos;
    if slack >= 8 || (slack > 0 && code[code.len() - 1] >> (8 - slack) != 0) {
        return Err(corrupt("trailing bits after the last code".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Lzw;

impl Codec for Lzw {
    fn name(&self) -> &str {
        "lzw"
    }

    fn encode(&self, data: &[u8]) -> Vec<u8> {
        lzw_encode(data)
    }

    fn decode(&self, code: &[u8]) -> Result<Vec<u8>> {
        lzw_decode(code)
    }
}
