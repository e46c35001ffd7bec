//! Exact binomial arithmetic and the rate-loss formulas for fixed-weight and
//! weight-range shaping codebooks.
//!
//! Every codebook size is an exact [`BigUint`]. The number of message bits a
//! codebook of size `Z` carries is `floor(log2 Z)`, taken as the bit length of
//! `Z` minus one so no floating-point logarithm is involved.

use std::io::Write;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest supported code length.
pub const MAX_N: usize = 512;

/// Slack used when a fractional ones-ratio is turned into an integer weight,
/// so that e.g. `0.29 * 100` floors to 29 rather than 28.
const WEIGHT_EPS: f64 = 1e-9;

/// `C(n, m)` computed exactly.
pub fn binomial(n: usize, m: usize) -> Result<BigUint> {
    if n > MAX_N {
        return Err(Error::domain(format!("n={n} exceeds the supported maximum {MAX_N}")));
    }
    if m > n {
        return Err(Error::domain(format!("m={m} exceeds n={n}")));
    }
    Ok(binomial_unchecked(n, m))
}

fn binomial_unchecked(n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    let m = m.min(n - m);
    let mut acc = BigUint::one();
    // acc = C(n - m + i, i) after step i, always an integer.
    for i in 1..=m {
        acc *= n - m + i;
        acc /= i;
    }
    acc
}

/// `C_m = C(n, m) / C(n, m - 1) = (n - m + 1) / m`, defined for `1 <= m < n/2`.
pub fn weight_class_ratio(n: usize, m: usize) -> Result<Ratio<u64>> {
    if m == 0 || 2 * m >= n {
        return Err(Error::domain(format!("weight class ratio needs 1 <= m < n/2, got n={n}, m={m}")));
    }
    Ok(Ratio::new((n - m + 1) as u64, m as u64))
}

/// Number of `n`-bit words whose weight lies in `w_lo..=w_hi`.
pub fn fdc_codebook_size(n: usize, w_lo: usize, w_hi: usize) -> Result<BigUint> {
    if n > MAX_N {
        return Err(Error::domain(format!("n={n} exceeds the supported maximum {MAX_N}")));
    }
    if w_lo == 0 || w_lo > w_hi || w_hi + 1 > n {
        return Err(Error::domain(format!(
            "weight range {w_lo}..={w_hi} is not within 1..={} for n={n}",
            n.saturating_sub(1)
        )));
    }
    Ok(range_size(n, w_lo, w_hi))
}

fn range_size(n: usize, w_lo: usize, w_hi: usize) -> BigUint {
    // Walk the row with the multiplicative recurrence instead of recomputing
    // each term from scratch.
    let mut term = binomial_unchecked(n, w_lo);
    let mut total = BigUint::zero();
    for m in w_lo..=w_hi {
        total += &term;
        term *= n - m;
        term /= m + 1;
    }
    total
}

/// `floor(log2 x)` for `x >= 1`; `None` for zero.
pub fn floor_log2(x: &BigUint) -> Option<usize> {
    if x.is_zero() {
        None
    } else {
        Some(x.bits() as usize - 1)
    }
}

/// Message length and rate loss of a shaping codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLossReport {
    pub n: usize,
    pub k: usize,
    /// `1 - k/n`.
    pub delta: f64,
}

impl RateLossReport {
    fn from_size(n: usize, size: &BigUint) -> Self {
        let k = floor_log2(size).unwrap_or(0);
        RateLossReport { n, k, delta: 1.0 - k as f64 / n as f64 }
    }

    /// The rate loss as the exact fraction `(n - k) / n`.
    pub fn delta_exact(&self) -> Ratio<usize> {
        Ratio::new(self.n - self.k, self.n)
    }
}

/// Rate loss of the fixed-weight distribution controller with weight `m`.
pub fn rate_loss_dc(n: usize, m: usize) -> Result<RateLossReport> {
    if m == 0 || m >= n {
        return Err(Error::domain(format!("fixed-weight rate loss needs 1 <= m <= n-1, got n={n}, m={m}")));
    }
    let size = binomial(n, m)?;
    Ok(RateLossReport::from_size(n, &size))
}

/// Rate loss of the flexible controller over the logic-0 range `(0, upsilon0]`.
///
/// By complement symmetry this is also the rate loss over `[1 - upsilon0, 1)`.
pub fn rate_loss_fdc(n: usize, upsilon0: f64) -> Result<RateLossReport> {
    if !(upsilon0 > 0.0 && upsilon0 <= 0.5) {
        return Err(Error::domain(format!("upsilon0={upsilon0} must lie in (0, 0.5]")));
    }
    let w_max = floor_weight(n, upsilon0);
    if w_max == 0 {
        return Err(Error::domain(format!("floor({upsilon0} * {n}) is zero: empty weight range")));
    }
    let size = fdc_codebook_size(n, 1, w_max)?;
    Ok(RateLossReport::from_size(n, &size))
}

/// Rate loss of the flexible controller over the logic-1 range `[upsilon1, 1)`,
/// summed directly over the upper weight classes.
pub fn rate_loss_fdc_upper(n: usize, upsilon1: f64) -> Result<RateLossReport> {
    if !(0.5..1.0).contains(&upsilon1) {
        return Err(Error::domain(format!("upsilon1={upsilon1} must lie in [0.5, 1)")));
    }
    let w_min = ceil_weight(n, upsilon1);
    if w_min + 1 > n {
        return Err(Error::domain(format!("ceil({upsilon1} * {n}) leaves an empty weight range")));
    }
    let size = fdc_codebook_size(n, w_min, n - 1)?;
    Ok(RateLossReport::from_size(n, &size))
}

/// `floor(frac * n)`, tolerant of binary representation error in `frac`.
pub fn floor_weight(n: usize, frac: f64) -> usize {
    (frac * n as f64 + WEIGHT_EPS).floor().max(0.0) as usize
}

/// `ceil(frac * n)`, tolerant of binary representation error in `frac`.
pub fn ceil_weight(n: usize, frac: f64) -> usize {
    (frac * n as f64 - WEIGHT_EPS).ceil().max(0.0) as usize
}

/// Pascal's triangle up to a fixed row, for repeated rank/unrank lookups.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<BigUint>>,
    zero: BigUint,
}

impl BinomialTable {
    pub fn new(max_n: usize) -> Result<Self> {
        if max_n > MAX_N {
            return Err(Error::domain(format!("n={max_n} exceeds the supported maximum {MAX_N}")));
        }
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigUint::one()]);
        for r in 1..=max_n {
            let prev = &rows[r - 1];
            let mut row = Vec::with_capacity(r + 1);
            row.push(BigUint::one());
            for m in 1..r {
                row.push(&prev[m - 1] + &prev[m]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        Ok(BinomialTable { rows, zero: BigUint::zero() })
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// `C(r, m)`, zero when `m > r`. Panics if `r` exceeds the table.
    #[inline]
    pub fn get(&self, r: usize, m: usize) -> &BigUint {
        self.rows[r].get(m).unwrap_or(&self.zero)
    }
}

/// One point of the rate-loss comparison between the fixed-weight and the
/// flexible controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLossRow {
    pub n: usize,
    pub phi: f64,
    pub delta_dc: f64,
    pub delta_fdc: f64,
}

/// Rate loss of both controllers on a grid of code lengths and ones-ratios.
///
/// The fixed-weight controller uses weight `floor(phi n)`. The flexible one
/// covers `(0, phi]` for `phi <= 0.5` and `[phi, 1)` above. A point whose
/// range holds no admissible word reports a rate loss of 1.
pub fn rate_loss_table(n_list: &[usize], phi_grid: &[f64]) -> Result<Vec<RateLossRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * phi_grid.len());
    for &n in n_list {
        if n == 0 || n > MAX_N {
            return Err(Error::domain(format!("n={n} must lie in 1..={MAX_N}")));
        }
        for &phi in phi_grid {
            if !(phi > 0.0 && phi < 1.0) {
                return Err(Error::domain(format!("phi={phi} must lie in (0, 1)")));
            }
            let m = floor_weight(n, phi).min(n);
            let dc = RateLossReport::from_size(n, &binomial_unchecked(n, m));
            let (lo, hi) = if phi <= 0.5 {
                (1, floor_weight(n, phi))
            } else {
                (ceil_weight(n, phi), n - 1)
            };
            let fdc = if lo >= 1 && lo <= hi && hi < n {
                RateLossReport::from_size(n, &range_size(n, lo, hi))
            } else {
                RateLossReport { n, k: 0, delta: 1.0 }
            };
            rows.push(RateLossRow { n, phi, delta_dc: dc.delta, delta_fdc: fdc.delta });
        }
    }
    Ok(rows)
}

/// Writes rate-loss rows as CSV with header `n,phi,delta_dc,delta_fdc`.
pub fn write_rate_loss_csv<W: Write>(mut out: W, rows: &[RateLossRow]) -> std::io::Result<()> {
    writeln!(out, "n,phi,delta_dc,delta_fdc")?;
    for r in rows {
        writeln!(out, "{},{:.4},{:.6},{:.6}", r.n, r.phi, r.delta_dc, r.delta_fdc)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal_row(n: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one()];
            for w in row.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigUint::one());
            row = next;
        }
        row
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(binomial(100, 0).unwrap(), BigUint::one());
        assert_eq!(binomial(100, 100).unwrap(), BigUint::one());
    }

    #[test]
    fn binomial_matches_pascal_row_100() {
        let row = pascal_row(100);
        assert_eq!(binomial(100, 36).unwrap(), row[36]);
        for (m, c) in row.iter().enumerate() {
            assert_eq!(&binomial(100, m).unwrap(), c);
        }
    }

    #[test]
    fn binomial_domain_errors() {
        assert!(binomial(4, 5).is_err());
        assert!(binomial(513, 1).is_err());
        assert!(binomial(512, 256).is_ok());
    }

    #[test]
    fn weight_class_ratio_values() {
        assert_eq!(weight_class_ratio(100, 1).unwrap(), Ratio::new(100, 1));
        assert_eq!(weight_class_ratio(100, 2).unwrap(), Ratio::new(99, 2));
        // C(8,2) = (7/2) C(8,1)
        let r = weight_class_ratio(8, 2).unwrap();
        assert_eq!(r * Ratio::from_integer(8u64), Ratio::from_integer(28));
        assert!(weight_class_ratio(100, 0).is_err());
        assert!(weight_class_ratio(100, 50).is_err());
    }

    #[test]
    fn codebook_sizes() {
        // 8 weight-1 words plus 28 weight-2 words, counted by enumeration.
        let enumerated = (0u32..256).filter(|w| (1..=2).contains(&w.count_ones())).count();
        assert_eq!(enumerated, 36);
        assert_eq!(fdc_codebook_size(8, 1, 2).unwrap(), BigUint::from(36u32));
        for n in 2..40 {
            let all = (BigUint::one() << n) - 2u32;
            assert_eq!(fdc_codebook_size(n, 1, n - 1).unwrap(), all);
        }
        assert_eq!(fdc_codebook_size(100, 1, 36).unwrap(), fdc_codebook_size(100, 64, 99).unwrap());
        assert!(fdc_codebook_size(8, 0, 2).is_err());
        assert!(fdc_codebook_size(8, 3, 2).is_err());
        assert!(fdc_codebook_size(8, 1, 8).is_err());
    }

    #[test]
    fn dc_rate_loss() {
        let r = rate_loss_dc(100, 36).unwrap();
        assert_eq!(r.k, 90);
        assert_eq!(r.delta_exact(), Ratio::new(1, 10));
        let r = rate_loss_dc(4, 2).unwrap();
        assert_eq!((r.k, r.delta), (2, 0.5));
        for m in 1..100 {
            assert_eq!(rate_loss_dc(100, m).unwrap(), rate_loss_dc(100, 100 - m).unwrap());
        }
        assert!(rate_loss_dc(10, 0).is_err());
        assert!(rate_loss_dc(10, 10).is_err());
    }

    #[test]
    fn fdc_rate_loss() {
        let r = rate_loss_fdc(100, 0.36).unwrap();
        assert_eq!(r.k, 91);
        assert_eq!(r.delta_exact(), Ratio::new(9, 100));
        let r = rate_loss_fdc(8, 0.25).unwrap();
        assert_eq!((r.k, r.delta), (5, 0.375));
        assert_eq!(rate_loss_fdc(100, 0.36).unwrap(), rate_loss_fdc_upper(100, 0.64).unwrap());
        assert!(rate_loss_fdc(100, 0.001).is_err());
        assert!(rate_loss_fdc(100, 0.6).is_err());
    }

    #[test]
    fn fractional_thresholds_floor_cleanly() {
        assert_eq!(floor_weight(100, 0.29), 29);
        assert_eq!(floor_weight(100, 0.36), 36);
        assert_eq!(floor_weight(16, 0.3), 4);
        assert_eq!(ceil_weight(100, 0.64), 64);
        assert_eq!(ceil_weight(100, 0.71), 71);
    }

    #[test]
    fn table_shape_and_csv() {
        let phis: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let rows = rate_loss_table(&[100, 200], &phis).unwrap();
        assert_eq!(rows.len(), 198);
        let at = |n: usize, phi: f64| {
            *rows.iter().find(|r| r.n == n && (r.phi - phi).abs() < 1e-12).unwrap()
        };
        let p = at(100, 0.36);
        assert!((p.delta_dc - 0.10).abs() < 1e-12 && (p.delta_fdc - 0.09).abs() < 1e-12);
        let min_dc = rows.iter().filter(|r| r.n == 100).map(|r| r.delta_dc).fold(f64::INFINITY, f64::min);
        assert_eq!(at(100, 0.5).delta_dc, min_dc);
        assert!(at(200, 0.36).delta_dc <= at(100, 0.36).delta_dc);
        assert!(at(200, 0.36).delta_fdc <= at(100, 0.36).delta_fdc);

        let mut buf = Vec::new();
        write_rate_loss_csv(&mut buf, &[p]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,phi,delta_dc,delta_fdc\n100,0.3600,0.100000,0.090000\n");
    }

    #[test]
    fn table_range_without_words() {
        let rows = rate_loss_table(&[10], &[0.05, 0.95]).unwrap();
        assert!(rows.iter().all(|r| r.delta_fdc == 1.0));
        // floor(0.5) = 0 leaves the single all-zeros word.
        assert_eq!(rows[0].delta_dc, 1.0);
    }

    #[test]
    fn binomial_table_agrees() {
        let t = BinomialTable::new(60).unwrap();
        for n in 0..=60 {
            for m in 0..=n + 1 {
                assert_eq!(t.get(n, m), &binomial_unchecked(n, m));
            }
        }
    }
}
