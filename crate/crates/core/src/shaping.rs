//! Flexible distribution controller (FDC) and the fixed-weight distribution
//! controller (DC).
//!
//! Both map uniform message bits onto words of prescribed weight by
//! enumerative coding. Words of one weight are numbered in ascending
//! lexicographic order (leftmost bit most significant); the FDC concatenates
//! the weight classes `1, 2, ..., w_max` in that order, so message integer `I`
//! lands in the smallest class `m` whose cumulative size `S_m` exceeds `I`.
//!
//! The low-rate bit `v` picks the range: `v = 0` emits the weight-`m` word
//! itself, `v = 1` emits its complement, which has weight `n - m`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::combinatorics::{floor_log2, floor_weight, BinomialTable, MAX_N};
use crate::error::{Error, Result};
use crate::frame::BitFrame;

/// The low-rate signal selecting the logic-0 or logic-1 ones-ratio range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LowRateBit {
    Zero,
    One,
}

impl LowRateBit {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(LowRateBit::Zero),
            1 => Ok(LowRateBit::One),
            other => Err(Error::domain(format!("low-rate bit must be 0 or 1, got {other}"))),
        }
    }

    pub fn as_bit(self) -> u8 {
        match self {
            LowRateBit::Zero => 0,
            LowRateBit::One => 1,
        }
    }
}

impl From<bool> for LowRateBit {
    fn from(b: bool) -> Self {
        if b {
            LowRateBit::One
        } else {
            LowRateBit::Zero
        }
    }
}

/// Index of `word` among the `C(n, m)` words of weight `m`, in ascending
/// lexicographic order. `table` must cover rows up to `word.len() - 1`.
pub(crate) fn rank_with(table: &BinomialTable, word: &[u8], m: usize) -> BigUint {
    let n = word.len();
    let mut remaining = m;
    let mut index = BigUint::zero();
    for (i, &b) in word.iter().enumerate() {
        if b == 1 {
            // Every word with a 0 here and the same prefix precedes this one.
            index += table.get(n - i - 1, remaining);
            remaining -= 1;
        }
    }
    index
}

/// Inverse of [`rank_with`]. `index` must be below `C(n, m)`.
pub(crate) fn unrank_with(table: &BinomialTable, n: usize, m: usize, mut index: BigUint) -> Vec<u8> {
    let mut bits = vec![0u8; n];
    let mut remaining = m;
    for (i, bit) in bits.iter_mut().enumerate() {
        if remaining == 0 {
            break;
        }
        let with_zero = table.get(n - i - 1, remaining);
        if index >= *with_zero {
            index -= with_zero;
            *bit = 1;
            remaining -= 1;
        }
    }
    bits
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::domain(format!("n={n} must lie in 1..={MAX_N}")));
    }
    Ok(())
}

/// The `index`-th `n`-bit word of weight `m` in ascending lexicographic order.
pub fn unrank_constant_weight(n: usize, m: usize, index: &BigUint) -> Result<BitFrame> {
    check_n(n)?;
    if m > n {
        return Err(Error::domain(format!("weight {m} exceeds n={n}")));
    }
    let table = BinomialTable::new(n)?;
    if index >= table.get(n, m) {
        return Err(Error::domain(format!("index {index} is not below C({n},{m})")));
    }
    Ok(BitFrame::from_vec_unchecked(unrank_with(&table, n, m, index.clone())))
}

/// Lexicographic index of `word` among the words of its length and weight `m`.
pub fn rank_constant_weight(word: &BitFrame, m: usize) -> Result<BigUint> {
    check_n(word.len())?;
    if word.weight() != m {
        return Err(Error::domain(format!("word has weight {}, expected {m}", word.weight())));
    }
    let table = BinomialTable::new(word.len())?;
    Ok(rank_with(&table, word.bits(), m))
}

/// Parameters and cumulative class sizes of the flexible distribution
/// controller for one code length and logic-0 threshold.
#[derive(Debug, Clone)]
pub struct ShapingCodebook {
    n: usize,
    upsilon0: f64,
    w_max: usize,
    k: usize,
    size: BigUint,
    /// `cumulative[m - 1] = S_m = C(n,1) + ... + C(n,m)`.
    cumulative: Vec<BigUint>,
    message_space: BigUint,
    table: BinomialTable,
}

impl ShapingCodebook {
    /// Builds the codebook whose logic-0 range is `(0, upsilon0]`, i.e.
    /// weights `1..=floor(upsilon0 n)`.
    pub fn build(n: usize, upsilon0: f64) -> Result<Self> {
        check_n(n)?;
        if !(upsilon0 > 0.0 && upsilon0 < 0.5) {
            return Err(Error::domain(format!("upsilon0={upsilon0} must lie in (0, 0.5)")));
        }
        let w_max = floor_weight(n, upsilon0);
        if w_max == 0 || 2 * w_max >= n {
            return Err(Error::domain(format!(
                "floor({upsilon0} * {n}) = {w_max} must satisfy 1 <= w_max < n/2"
            )));
        }
        let table = BinomialTable::new(n)?;
        let mut cumulative = Vec::with_capacity(w_max);
        let mut acc = BigUint::zero();
        for m in 1..=w_max {
            acc += table.get(n, m);
            cumulative.push(acc.clone());
        }
        let k = floor_log2(&acc).expect("codebook is nonempty");
        Ok(ShapingCodebook {
            n,
            upsilon0,
            w_max,
            k,
            size: acc,
            cumulative,
            message_space: BigUint::one() << k,
            table,
        })
    }

    /// Shaped word length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length in bits.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest weight of the logic-0 range.
    pub fn w_max(&self) -> usize {
        self.w_max
    }

    pub fn upsilon0(&self) -> f64 {
        self.upsilon0
    }

    pub fn upsilon1(&self) -> f64 {
        1.0 - self.upsilon0
    }

    /// Codebook size `Z = S_{w_max}`.
    pub fn size(&self) -> &BigUint {
        &self.size
    }

    /// Partial sums `S_1 ..= S_{w_max}`.
    pub fn cumulative(&self) -> &[BigUint] {
        &self.cumulative
    }

    /// `1 - k/n`.
    pub fn rate_loss(&self) -> f64 {
        1.0 - self.k as f64 / self.n as f64
    }

    /// `S_{m-1}`, with `S_0 = 0`.
    fn offset(&self, m: usize) -> Option<&BigUint> {
        if m == 1 {
            None
        } else {
            Some(&self.cumulative[m - 2])
        }
    }

    /// Maps a `k`-bit message to an `n`-bit word in the range chosen by `v`.
    pub fn encode(&self, v: LowRateBit, msg: &BitFrame) -> Result<BitFrame> {
        if msg.len() != self.k {
            return Err(Error::domain(format!("message has {} bits, expected {}", msg.len(), self.k)));
        }
        let index = msg.to_biguint();
        // First class whose cumulative size exceeds the index.
        let m = self.cumulative.partition_point(|s| *s <= index) + 1;
        let local = match self.offset(m) {
            Some(s) => index - s,
            None => index,
        };
        let mut bits = unrank_with(&self.table, self.n, m, local);
        if v == LowRateBit::One {
            bits.iter_mut().for_each(|b| *b ^= 1);
        }
        Ok(BitFrame::from_vec_unchecked(bits))
    }

    /// Recovers the low-rate bit and the message from an `n`-bit word.
    ///
    /// Words heavier than `n/2` belong to the logic-1 range and are
    /// complemented first. Fails with [`Error::InvalidWeight`] outside both
    /// ranges and with [`Error::UnusedCodeword`] when the index is not a
    /// valid `k`-bit message.
    pub fn decode(&self, word: &BitFrame) -> Result<(LowRateBit, BitFrame)> {
        if word.len() != self.n {
            return Err(Error::domain(format!("word has {} bits, expected {}", word.len(), self.n)));
        }
        let weight = word.weight();
        let (v, m) = if 2 * weight > self.n {
            (LowRateBit::One, self.n - weight)
        } else {
            (LowRateBit::Zero, weight)
        };
        if m == 0 || m > self.w_max {
            return Err(Error::InvalidWeight { weight, n: self.n });
        }
        let local = match v {
            LowRateBit::Zero => rank_with(&self.table, word.bits(), m),
            LowRateBit::One => rank_with(&self.table, word.complement().bits(), m),
        };
        let index = match self.offset(m) {
            Some(s) => local + s,
            None => local,
        };
        if index >= self.message_space {
            return Err(Error::UnusedCodeword { k: self.k });
        }
        Ok((v, BitFrame::from_biguint(&index, self.k)?))
    }
}

/// Fixed-weight distribution controller: every word has weight exactly `m`.
#[derive(Debug, Clone)]
pub struct FixedWeightCoder {
    n: usize,
    m: usize,
    k: usize,
    table: BinomialTable,
}

impl FixedWeightCoder {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        check_n(n)?;
        if m > n {
            return Err(Error::domain(format!("weight {m} exceeds n={n}")));
        }
        let table = BinomialTable::new(n)?;
        let k = floor_log2(table.get(n, m)).expect("C(n,m) >= 1");
        Ok(FixedWeightCoder { n, m, k, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.m
    }

    /// Message length `floor(log2 C(n, m))`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn encode(&self, msg: &BitFrame) -> Result<BitFrame> {
        if msg.len() != self.k {
            return Err(Error::domain(format!("message has {} bits, expected {}", msg.len(), self.k)));
        }
        let bits = unrank_with(&self.table, self.n, self.m, msg.to_biguint());
        Ok(BitFrame::from_vec_unchecked(bits))
    }

    pub fn decode(&self, word: &BitFrame) -> Result<BitFrame> {
        if word.len() != self.n {
            return Err(Error::domain(format!("word has {} bits, expected {}", word.len(), self.n)));
        }
        let weight = word.weight();
        if weight != self.m {
            return Err(Error::InvalidWeight { weight, n: self.n });
        }
        let index = rank_with(&self.table, word.bits(), self.m);
        if index.bits() as usize > self.k {
            return Err(Error::UnusedCodeword { k: self.k });
        }
        BitFrame::from_biguint(&index, self.k)
    }
}

/// One-shot fixed-weight encode.
pub fn dc_encode(n: usize, m: usize, msg: &BitFrame) -> Result<BitFrame> {
    FixedWeightCoder::new(n, m)?.encode(msg)
}

/// One-shot fixed-weight decode.
pub fn dc_decode(n: usize, m: usize, word: &BitFrame) -> Result<BitFrame> {
    FixedWeightCoder::new(n, m)?.decode(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(s: &str) -> BitFrame {
        s.parse().unwrap()
    }

    /// All `n`-bit words of weight `m` in ascending lexicographic order.
    fn enumerate(n: usize, m: usize) -> Vec<BitFrame> {
        (0u64..1 << n)
            .filter(|w| w.count_ones() as usize == m)
            .map(|w| BitFrame::new((0..n).map(|i| ((w >> (n - 1 - i)) & 1) as u8).collect()).unwrap())
            .collect()
    }

    #[test]
    fn unrank_small_cases() {
        assert_eq!(unrank_constant_weight(4, 2, &BigUint::zero()).unwrap(), frame("0011"));
        assert_eq!(unrank_constant_weight(4, 2, &BigUint::from(5u32)).unwrap(), frame("1100"));
        assert_eq!(unrank_constant_weight(7, 7, &BigUint::zero()).unwrap(), BitFrame::ones(7));
        assert!(unrank_constant_weight(4, 2, &BigUint::from(6u32)).is_err());
    }

    #[test]
    fn rank_small_cases() {
        assert_eq!(rank_constant_weight(&frame("0011"), 2).unwrap(), BigUint::zero());
        assert_eq!(rank_constant_weight(&frame("1100"), 2).unwrap(), BigUint::from(5u32));
        assert_eq!(rank_constant_weight(&BitFrame::ones(9), 9).unwrap(), BigUint::zero());
        assert!(rank_constant_weight(&frame("0111"), 2).is_err());
    }

    #[test]
    fn rank_unrank_match_enumeration() {
        for n in 1..=10 {
            let table = BinomialTable::new(n).unwrap();
            for m in 0..=n {
                for (i, w) in enumerate(n, m).iter().enumerate() {
                    assert_eq!(unrank_with(&table, n, m, BigUint::from(i)), w.bits());
                    assert_eq!(rank_with(&table, w.bits(), m), BigUint::from(i));
                }
            }
        }
    }

    #[test]
    fn build_small_codebooks() {
        let cb = ShapingCodebook::build(8, 0.25).unwrap();
        assert_eq!((cb.w_max(), cb.k()), (2, 5));
        assert_eq!(cb.size(), &BigUint::from(36u32));
        assert_eq!(cb.cumulative(), &[BigUint::from(8u32), BigUint::from(36u32)]);

        let cb = ShapingCodebook::build(4, 0.25).unwrap();
        assert_eq!((cb.w_max(), cb.k()), (1, 2));
        assert_eq!(cb.size(), &BigUint::from(4u32));

        let cb = ShapingCodebook::build(100, 0.36).unwrap();
        assert_eq!((cb.w_max(), cb.k()), (36, 91));

        assert!(ShapingCodebook::build(8, 0.1).is_err());
        assert!(ShapingCodebook::build(8, 0.5).is_err());
        assert_eq!(ShapingCodebook::build(10, 0.45).unwrap().w_max(), 4);
    }

    #[test]
    fn fdc_encode_examples() {
        let cb = ShapingCodebook::build(8, 0.25).unwrap();
        assert_eq!(cb.encode(LowRateBit::Zero, &frame("00000")).unwrap(), frame("00000001"));
        assert_eq!(cb.encode(LowRateBit::Zero, &frame("01000")).unwrap(), frame("00000011"));
        assert_eq!(cb.encode(LowRateBit::One, &frame("00000")).unwrap(), frame("11111110"));
        assert!(cb.encode(LowRateBit::Zero, &frame("0000")).is_err());
    }

    #[test]
    fn fdc_decode_examples() {
        let cb = ShapingCodebook::build(8, 0.25).unwrap();
        assert_eq!(cb.decode(&frame("00000011")).unwrap(), (LowRateBit::Zero, frame("01000")));
        assert_eq!(cb.decode(&frame("11111110")).unwrap(), (LowRateBit::One, frame("00000")));
        assert!(matches!(cb.decode(&frame("00111100")), Err(Error::InvalidWeight { weight: 4, .. })));
        assert!(matches!(cb.decode(&frame("00000000")), Err(Error::InvalidWeight { .. })));
        assert!(matches!(cb.decode(&frame("11111111")), Err(Error::InvalidWeight { .. })));
        assert!(matches!(cb.decode(&frame("00000111")), Err(Error::InvalidWeight { .. })));
        // Indices 32..36 are unused: the last four weight-2 words.
        assert!(matches!(cb.decode(&frame("11000000")), Err(Error::UnusedCodeword { k: 5 })));
        assert!(matches!(cb.decode(&frame("00111111")), Err(Error::UnusedCodeword { k: 5 })));
    }

    #[test]
    fn dc_examples() {
        assert_eq!(dc_encode(4, 2, &frame("00")).unwrap(), frame("0011"));
        assert_eq!(dc_decode(4, 2, &frame("0011")).unwrap(), frame("00"));
        assert!(dc_decode(4, 2, &frame("0111")).is_err());
        assert_eq!(FixedWeightCoder::new(100, 36).unwrap().k(), 90);
        for (n, m) in [(8, 3), (12, 6), (16, 5)] {
            let dc = FixedWeightCoder::new(n, m).unwrap();
            for i in 0u32..1 << dc.k() {
                let msg = BitFrame::from_biguint(&BigUint::from(i), dc.k()).unwrap();
                let w = dc.encode(&msg).unwrap();
                assert_eq!(w.weight(), m);
                assert_eq!(dc.decode(&w).unwrap(), msg);
            }
        }
    }

    #[test]
    fn low_rate_bit_conversions() {
        assert_eq!(LowRateBit::from_bit(1).unwrap(), LowRateBit::One);
        assert_eq!(LowRateBit::Zero.as_bit(), 0);
        assert!(LowRateBit::from_bit(2).is_err());
    }
}
