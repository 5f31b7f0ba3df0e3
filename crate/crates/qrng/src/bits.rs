//! Packed bit buffers and the QRNGBITS on-disk format.
//!
//! Bit order is LSB-first within each byte: bit index i lives at byte i/8,
//! bit position i%8. File layout: 8-byte magic "QRNGBITS", bit count as a
//! little-endian u64, then the packed payload.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"QRNGBITS";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBuffer {
    bit_count: usize,
    data: Vec<u8>,
}

impl BitBuffer {
    pub fn new() -> Self {
        BitBuffer::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitBuffer {
            bit_count: 0,
            data: Vec::with_capacity(bits.div_ceil(8)),
        }
    }

    pub fn len(&self) -> usize {
        self.bit_count
    }

    pub fn is_empty(&self) -> bool {
        self.bit_count == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.bit_count % 8 == 0 {
            self.data.push(0);
        }
        if bit {
            *self.data.last_mut().unwrap() |= 1 << (self.bit_count % 8);
        }
        self.bit_count += 1;
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.bit_count, "bit index out of range");
        (self.data[index / 8] >> (index % 8)) & 1 == 1
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut buf = BitBuffer::new();
        for b in bits {
            buf.push(b);
        }
        buf
    }

    /// Parse a string of '0'/'1' characters (other characters are ignored).
    pub fn from_binary_str(s: &str) -> Self {
        BitBuffer::from_bits(s.chars().filter_map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        }))
    }

    /// The buffer packed into little-endian 64-bit words, zero-padded.
    pub fn to_words(&self) -> Vec<u64> {
        let n_words = self.bit_count.div_ceil(64);
        let mut words = vec![0u64; n_words];
        for (i, chunk) in self.data.chunks(8).enumerate() {
            let mut b = [0u8; 8];
            b[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_le_bytes(b);
        }
        words
    }

    /// Rebuild from word form; extra high bits beyond `bit_count` are masked.
    pub fn from_words(words: &[u64], bit_count: usize) -> Self {
        assert!(bit_count <= words.len() * 64);
        let n_bytes = bit_count.div_ceil(8);
        let mut data = Vec::with_capacity(n_bytes);
        for w in words {
            data.extend_from_slice(&w.to_le_bytes());
        }
        data.truncate(n_bytes);
        let mut buf = BitBuffer { bit_count, data };
        buf.mask_trailing();
        buf
    }

    /// Count of set bits.
    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Copy of bits [start, start+len).
    pub fn slice(&self, start: usize, len: usize) -> Result<BitBuffer> {
        if start + len > self.bit_count {
            return Err(Error::InvalidLength(format!(
                "slice [{start}, {}) exceeds buffer of {} bits",
                start + len,
                self.bit_count
            )));
        }
        if start % 8 == 0 {
            let data = self.data[start / 8..(start + len).div_ceil(8)].to_vec();
            let mut out = BitBuffer {
                bit_count: len,
                data,
            };
            out.mask_trailing();
            return Ok(out);
        }
        let mut out = BitBuffer::with_capacity(len);
        for i in 0..len {
            out.push(self.get(start + i));
        }
        Ok(out)
    }

    pub fn xor(&self, other: &BitBuffer) -> Result<BitBuffer> {
        if self.bit_count != other.bit_count {
            return Err(Error::InvalidLength(
                "xor requires equal-length buffers".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitBuffer {
            bit_count: self.bit_count,
            data,
        })
    }

    fn mask_trailing(&mut self) {
        let rem = self.bit_count % 8;
        if rem != 0 {
            if let Some(last) = self.data.last_mut() {
                *last &= (1u8 << rem) - 1;
            }
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.bit_count as u64).to_le_bytes())?;
        w.write_all(&self.data)?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::InvalidLength("bad magic; not a QRNGBITS file".into()));
        }
        let mut count = [0u8; 8];
        r.read_exact(&mut count)?;
        let bit_count = u64::from_le_bytes(count) as usize;
        let mut data = vec![0u8; bit_count.div_ceil(8)];
        r.read_exact(&mut data)?;
        let mut buf = BitBuffer { bit_count, data };
        buf.mask_trailing();
        Ok(buf)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        BitBuffer::read_from(&mut f)
    }
}
