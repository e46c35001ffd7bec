//! Fixed-length binary words and the line-oriented frame file format.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};

/// A fixed-length binary word. Index 0 is the leftmost and most significant
/// bit, so the derived ordering on equal-length frames is lexicographic and
/// agrees with the integer order of [`BitFrame::to_biguint`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitFrame(Vec<u8>);

impl BitFrame {
    /// Wraps a vector of 0/1 values.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::domain(format!("bit {pos} has value {}, expected 0 or 1", bits[pos])));
        }
        Ok(BitFrame(bits))
    }

    pub(crate) fn from_vec_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitFrame(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitFrame(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        BitFrame(vec![1; len])
    }

    /// Uniformly random frame.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        BitFrame((0..len).map(|_| rng.random::<bool>() as u8).collect())
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        BitFrame(bits.iter().map(|&b| b as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    pub fn complement(&self) -> Self {
        BitFrame(self.0.iter().map(|&b| b ^ 1).collect())
    }

    pub fn xor(&self, other: &BitFrame) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::domain(format!("length mismatch {} vs {}", self.len(), other.len())));
        }
        Ok(BitFrame(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Number of positions where the two frames differ. Extra positions of the
    /// longer frame count as differences.
    pub fn hamming_distance(&self, other: &BitFrame) -> usize {
        let common = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        common + self.len().abs_diff(other.len())
    }

    /// Reads the frame as an unsigned integer, leftmost bit most significant.
    pub fn to_biguint(&self) -> BigUint {
        let mut value = BigUint::zero();
        for &b in &self.0 {
            value <<= 1u32;
            if b == 1 {
                value += 1u32;
            }
        }
        value
    }

    /// Writes `value` as a `len`-bit frame, leftmost bit most significant.
    pub fn from_biguint(value: &BigUint, len: usize) -> Result<Self> {
        if value.bits() as usize > len {
            return Err(Error::domain(format!("value needs {} bits, frame has {len}", value.bits())));
        }
        let bits = (0..len).map(|i| value.bit((len - 1 - i) as u64) as u8).collect();
        Ok(BitFrame(bits))
    }
}

impl fmt::Display for BitFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for BitFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::domain(format!("character {} is {other:?}, expected '0' or '1'", i + 1))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitFrame)
    }
}

impl AsRef<[u8]> for BitFrame {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

/// Reads one frame per line, each exactly `frame_len` characters of '0'/'1'.
/// Errors carry the 1-based line number.
pub fn read_frames<R: BufRead>(reader: R, frame_len: usize) -> Result<Vec<BitFrame>> {
    let mut frames = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let frame: BitFrame = line
            .parse()
            .map_err(|e: Error| Error::Parse { line: line_no, message: e.to_string() })?;
        if frame.len() != frame_len {
            return Err(Error::Parse {
                line: line_no,
                message: format!("frame has {} bits, expected {frame_len}", frame.len()),
            });
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Writes frames one per line, LF-terminated.
pub fn write_frames<W: Write>(mut out: W, frames: &[BitFrame]) -> std::io::Result<()> {
    for f in frames {
        writeln!(out, "{f}")?;
    }
    Ok(())
}
