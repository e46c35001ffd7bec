//! Systematic polar code with run-length-aware frozen bit values.
//!
//! Conventions used throughout:
//! - natural index order, no bit-reversal permutation;
//! - generator `G = F^{⊗log2 l}` with `F = [[1,0],[1,1]]`, row-vector
//!   encoding `x = u G` over GF(2);
//! - bit-channel metrics from the Bhattacharyya recursion, where metric `z`
//!   splits into `(2z - z², z²)` with the degraded child at the lower index.
//!
//! The information set holds the `n_info` smallest metrics. Frozen positions
//! carry either zeros or, in run-length-aware mode, the alternating sequence
//! `1, 0, 1, 0, ...` along the ascending frozen indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::BitFrame;

/// Largest supported code length.
pub const MAX_L: usize = 4096;

/// Value assignment for frozen input positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenMode {
    AllZero,
    Rla,
}

impl fmt::Display for FrozenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrozenMode::AllZero => "all_zero",
            FrozenMode::Rla => "rla",
        })
    }
}

impl FromStr for FrozenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_zero" | "all-zero" | "zero" => Ok(FrozenMode::AllZero),
            "rla" => Ok(FrozenMode::Rla),
            other => Err(Error::Usage(format!("unknown frozen mode {other:?} (expected all_zero or rla)"))),
        }
    }
}

/// Check-node rule of the successive cancellation decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckRule {
    /// `sign(a) sign(b) min(|a|, |b|)`.
    #[default]
    MinSum,
    /// `2 atanh(tanh(a/2) tanh(b/2))`.
    Exact,
}

impl CheckRule {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        let min_sum = a.signum() * b.signum() * a.abs().min(b.abs());
        match self {
            CheckRule::MinSum => min_sum,
            // Min-sum plus the Jacobian correction terms; equal to the tanh
            // rule without its overflow at large magnitudes.
            CheckRule::Exact => min_sum + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p(),
        }
    }
}

impl FromStr for CheckRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minsum" | "min-sum" | "min_sum" => Ok(CheckRule::MinSum),
            "exact" | "tanh" => Ok(CheckRule::Exact),
            other => Err(Error::Usage(format!("unknown check rule {other:?} (expected minsum or exact)"))),
        }
    }
}

impl fmt::Display for CheckRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckRule::MinSum => "minsum",
            CheckRule::Exact => "exact",
        })
    }
}

fn check_length(l: usize) -> Result<()> {
    if !(2..=MAX_L).contains(&l) || !l.is_power_of_two() {
        return Err(Error::domain(format!("code length {l} must be a power of two in 2..={MAX_L}")));
    }
    Ok(())
}

/// Bhattacharyya parameters of the `l` bit channels, starting from `z0`.
pub fn bhattacharyya_from_z0(l: usize, z0: f64) -> Result<Vec<f64>> {
    check_length(l)?;
    if !(0.0..=1.0).contains(&z0) {
        return Err(Error::domain(format!("initial metric {z0} must lie in [0, 1]")));
    }
    let mut z = vec![z0];
    while z.len() < l {
        z = z.iter().flat_map(|&m| [2.0 * m - m * m, m * m]).collect();
    }
    Ok(z)
}

/// Bhattacharyya parameters for an AWGN channel at `design_snr_db` (Es/N0),
/// with `z0 = exp(-Es/N0)`.
pub fn bhattacharyya_construct(l: usize, design_snr_db: f64) -> Result<Vec<f64>> {
    if !design_snr_db.is_finite() {
        return Err(Error::domain("design SNR must be finite"));
    }
    bhattacharyya_from_z0(l, (-(10f64.powf(design_snr_db / 10.0))).exp())
}

/// `x <- x G` in place. The transform is its own inverse.
pub fn polar_transform_in_place(bits: &mut [u8]) {
    let l = bits.len();
    debug_assert!(l.is_power_of_two());
    let mut half = 1;
    while half < l {
        for block in bits.chunks_exact_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            a.iter_mut().zip(b.iter()).for_each(|(x, y)| *x ^= y);
        }
        half *= 2;
    }
}

/// `x = u G` for a frame whose length is a power of two.
pub fn polar_transform(word: &BitFrame) -> Result<BitFrame> {
    if word.is_empty() || !word.len().is_power_of_two() {
        return Err(Error::domain(format!("transform length {} is not a power of two", word.len())));
    }
    let mut bits = word.bits().to_vec();
    polar_transform_in_place(&mut bits);
    Ok(BitFrame::from_vec_unchecked(bits))
}

/// A fully specified polar code: information and frozen sets, frozen values
/// and the metrics they were chosen from.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCodeSpec {
    l: usize,
    n_info: usize,
    design_snr_db: Option<f64>,
    frozen_mode: FrozenMode,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    frozen_values: Vec<u8>,
    metrics: Vec<f64>,
    /// Per input position: `Some(value)` if frozen.
    frozen_at: Vec<Option<u8>>,
    /// `u0 G` where `u0` carries the frozen values and zero data.
    coset: Vec<u8>,
}

/// Picks the information set from `metrics` and assigns frozen values.
///
/// Ties between equal metrics go to the lower index first.
pub fn select_and_freeze(metrics: &[f64], n_info: usize, mode: FrozenMode) -> Result<PolarCodeSpec> {
    let l = metrics.len();
    check_length(l)?;
    if n_info >= l {
        return Err(Error::domain(format!("n_info={n_info} must be below l={l}")));
    }
    if metrics.iter().any(|m| !m.is_finite()) {
        return Err(Error::domain("metrics must be finite"));
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| metrics[a].total_cmp(&metrics[b]).then(a.cmp(&b)));
    let mut info_set = order[..n_info].to_vec();
    let mut frozen_set = order[n_info..].to_vec();
    info_set.sort_unstable();
    frozen_set.sort_unstable();
    let frozen_values = frozen_pattern(mode, frozen_set.len());
    PolarCodeSpec::assemble(l, None, mode, info_set, frozen_set, frozen_values, metrics.to_vec())
}

/// Frozen values along ascending frozen indices: counter `i` runs from 1 and
/// odd `i` gets a one in run-length-aware mode.
fn frozen_pattern(mode: FrozenMode, count: usize) -> Vec<u8> {
    match mode {
        FrozenMode::AllZero => vec![0; count],
        FrozenMode::Rla => (1..=count).map(|i| (i % 2) as u8).collect(),
    }
}

impl PolarCodeSpec {
    /// Bhattacharyya construction at `design_snr_db` followed by
    /// [`select_and_freeze`].
    pub fn construct(l: usize, n_info: usize, design_snr_db: f64, mode: FrozenMode) -> Result<Self> {
        let metrics = bhattacharyya_construct(l, design_snr_db)?;
        let mut spec = select_and_freeze(&metrics, n_info, mode)?;
        spec.design_snr_db = Some(design_snr_db);
        Ok(spec)
    }

    fn assemble(
        l: usize,
        design_snr_db: Option<f64>,
        frozen_mode: FrozenMode,
        info_set: Vec<usize>,
        frozen_set: Vec<usize>,
        frozen_values: Vec<u8>,
        metrics: Vec<f64>,
    ) -> Result<Self> {
        let mut frozen_at = vec![None; l];
        for (&i, &v) in frozen_set.iter().zip(&frozen_values) {
            frozen_at[i] = Some(v);
        }
        let mut coset: Vec<u8> = frozen_at.iter().map(|f| f.unwrap_or(0)).collect();
        polar_transform_in_place(&mut coset);
        let spec = PolarCodeSpec {
            l,
            n_info: info_set.len(),
            design_snr_db,
            frozen_mode,
            info_set,
            frozen_set,
            frozen_values,
            metrics,
            frozen_at,
            coset,
        };
        spec.check_systematic()?;
        Ok(spec)
    }

    /// The systematic map is affine, so it reproduces every data word iff it
    /// reproduces zero and each unit vector.
    fn check_systematic(&self) -> Result<()> {
        let mut data = vec![0u8; self.n_info];
        self.systematic_encode_bits(&data)?;
        for i in 0..self.n_info {
            data[i] = 1;
            self.systematic_encode_bits(&data)?;
            data[i] = 0;
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_info(&self) -> usize {
        self.n_info
    }

    pub fn design_snr_db(&self) -> Option<f64> {
        self.design_snr_db
    }

    pub fn frozen_mode(&self) -> FrozenMode {
        self.frozen_mode
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    /// Frozen values aligned with [`Self::frozen_set`].
    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    pub fn metrics(&self) -> &[f64] {
        &self.metrics
    }

    /// Same sets and metrics with a different frozen value assignment.
    pub fn with_frozen_mode(&self, mode: FrozenMode) -> Result<Self> {
        PolarCodeSpec::assemble(
            self.l,
            self.design_snr_db,
            mode,
            self.info_set.clone(),
            self.frozen_set.clone(),
            frozen_pattern(mode, self.frozen_set.len()),
            self.metrics.clone(),
        )
    }

    fn check_data(&self, data: &[u8]) -> Result<()> {
        if data.len() != self.n_info {
            return Err(Error::domain(format!("data has {} bits, expected {}", data.len(), self.n_info)));
        }
        Ok(())
    }

    /// Input vector with data at the information set and frozen values elsewhere.
    pub fn input_vector(&self, data: &BitFrame) -> Result<BitFrame> {
        self.check_data(data.bits())?;
        let mut u: Vec<u8> = self.frozen_at.iter().map(|f| f.unwrap_or(0)).collect();
        for (&i, &d) in self.info_set.iter().zip(data.bits()) {
            u[i] = d;
        }
        Ok(BitFrame::from_vec_unchecked(u))
    }

    /// `x = u G` with data placed at the information set of `u`.
    pub fn nonsystematic_encode(&self, data: &BitFrame) -> Result<BitFrame> {
        let mut u = self.input_vector(data)?.into_bits();
        polar_transform_in_place(&mut u);
        Ok(BitFrame::from_vec_unchecked(u))
    }

    /// Codeword `x` with `x_A = data` and `(x G)_F = frozen values`.
    pub fn systematic_encode(&self, data: &BitFrame) -> Result<BitFrame> {
        self.check_data(data.bits())?;
        self.systematic_encode_bits(data.bits()).map(BitFrame::from_vec_unchecked)
    }

    fn systematic_encode_bits(&self, data: &[u8]) -> Result<Vec<u8>> {
        // Shift by the frozen-value coset, then solve the zero-frozen problem
        // by transform, re-freeze, transform.
        let mut x = vec![0u8; self.l];
        for (&i, &d) in self.info_set.iter().zip(data) {
            x[i] = d ^ self.coset[i];
        }
        polar_transform_in_place(&mut x);
        for &i in &self.frozen_set {
            x[i] = 0;
        }
        polar_transform_in_place(&mut x);
        x.iter_mut().zip(&self.coset).for_each(|(b, c)| *b ^= c);
        if self.info_set.iter().zip(data).any(|(&i, &d)| x[i] != d) {
            return Err(Error::Construction(
                "systematic encoding does not reproduce the data bits; the information set is not closed under the polar transform".into(),
            ));
        }
        Ok(x)
    }

    /// Codeword bits at the information set.
    pub fn extract_data(&self, codeword: &BitFrame) -> Result<BitFrame> {
        if codeword.len() != self.l {
            return Err(Error::domain(format!("codeword has {} bits, expected {}", codeword.len(), self.l)));
        }
        let bits = self.info_set.iter().map(|&i| codeword.bits()[i]).collect();
        Ok(BitFrame::from_vec_unchecked(bits))
    }

    /// Successive cancellation decoding. Positive LLR favours bit 0; a zero
    /// LLR decides 0. Returns `(codeword estimate, data estimate)`, where the
    /// data estimate is the codeword restricted to the information set.
    pub fn sc_decode(&self, llr: &[f64], rule: CheckRule) -> Result<(BitFrame, BitFrame)> {
        if llr.len() != self.l {
            return Err(Error::domain(format!("received {} LLRs, expected {}", llr.len(), self.l)));
        }
        let mut u = vec![0u8; self.l];
        let mut x = vec![0u8; self.l];
        let mut scratch = vec![0f64; self.l];
        sc_node(llr, &self.frozen_at, rule, &mut scratch, &mut u, &mut x);
        let codeword = BitFrame::from_vec_unchecked(x);
        let data = self.extract_data(&codeword)?;
        Ok((codeword, data))
    }

    fn validate(&self) -> Result<()> {
        check_length(self.l)?;
        let mut seen = vec![false; self.l];
        for &i in self.info_set.iter().chain(&self.frozen_set) {
            if i >= self.l || seen[i] {
                return Err(Error::domain(format!("index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::domain("information and frozen sets do not cover all positions"));
        }
        if !self.info_set.is_sorted() || !self.frozen_set.is_sorted() {
            return Err(Error::domain("index sets must be ascending"));
        }
        if self.frozen_values.len() != self.frozen_set.len() || self.frozen_values.iter().any(|&v| v > 1) {
            return Err(Error::domain("frozen values must be one binary value per frozen index"));
        }
        if self.frozen_values != frozen_pattern(self.frozen_mode, self.frozen_set.len()) {
            return Err(Error::domain(format!("frozen values do not follow the {} pattern", self.frozen_mode)));
        }
        if self.metrics.len() != self.l {
            return Err(Error::domain(format!("expected {} metrics, found {}", self.l, self.metrics.len())));
        }
        let worst_info = self.info_set.iter().map(|&i| self.metrics[i]).fold(f64::NEG_INFINITY, f64::max);
        let best_frozen = self.frozen_set.iter().map(|&i| self.metrics[i]).fold(f64::INFINITY, f64::min);
        if worst_info > best_frozen {
            return Err(Error::domain("an information position has a worse metric than a frozen position"));
        }
        Ok(())
    }
}

fn sc_node(llr: &[f64], frozen: &[Option<u8>], rule: CheckRule, scratch: &mut [f64], u: &mut [u8], x: &mut [u8]) {
    let n = llr.len();
    if n == 1 {
        let bit = frozen[0].unwrap_or((llr[0] < 0.0) as u8);
        u[0] = bit;
        x[0] = bit;
        return;
    }
    let h = n / 2;
    let (child, rest) = scratch.split_at_mut(h);
    let (llr_a, llr_b) = llr.split_at(h);
    let (u_a, u_b) = u.split_at_mut(h);
    let (x_a, x_b) = x.split_at_mut(h);
    for i in 0..h {
        child[i] = rule.apply(llr_a[i], llr_b[i]);
    }
    sc_node(child, &frozen[..h], rule, rest, u_a, x_a);
    for i in 0..h {
        child[i] = if x_a[i] == 1 { llr_b[i] - llr_a[i] } else { llr_b[i] + llr_a[i] };
    }
    sc_node(child, &frozen[h..], rule, rest, u_b, x_b);
    for i in 0..h {
        x_a[i] ^= x_b[i];
    }
}

/// On-disk form of a [`PolarCodeSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub l: usize,
    pub n_info: usize,
    pub design_snr_db: Option<f64>,
    pub frozen_mode: FrozenMode,
    #[serde(default = "natural_order")]
    pub index_order: String,
    pub info_set: Vec<usize>,
    pub frozen_set: Vec<usize>,
    pub frozen_values: Vec<u8>,
    pub metrics: Vec<f64>,
}

fn natural_order() -> String {
    "natural".to_string()
}

impl From<&PolarCodeSpec> for CodeSpecFile {
    fn from(s: &PolarCodeSpec) -> Self {
        CodeSpecFile {
            l: s.l,
            n_info: s.n_info,
            design_snr_db: s.design_snr_db,
            frozen_mode: s.frozen_mode,
            index_order: natural_order(),
            info_set: s.info_set.clone(),
            frozen_set: s.frozen_set.clone(),
            frozen_values: s.frozen_values.clone(),
            metrics: s.metrics.clone(),
        }
    }
}

impl TryFrom<CodeSpecFile> for PolarCodeSpec {
    type Error = Error;

    fn try_from(f: CodeSpecFile) -> Result<Self> {
        if f.index_order != "natural" {
            return Err(Error::domain(format!("unsupported index order {:?}", f.index_order)));
        }
        if f.info_set.len() != f.n_info {
            return Err(Error::domain(format!("n_info={} but the information set has {} entries", f.n_info, f.info_set.len())));
        }
        check_length(f.l)?;
        let unchecked = PolarCodeSpec {
            l: f.l,
            n_info: f.n_info,
            design_snr_db: f.design_snr_db,
            frozen_mode: f.frozen_mode,
            info_set: f.info_set,
            frozen_set: f.frozen_set,
            frozen_values: f.frozen_values,
            metrics: f.metrics,
            frozen_at: Vec::new(),
            coset: Vec::new(),
        };
        unchecked.validate()?;
        PolarCodeSpec::assemble(
            unchecked.l,
            unchecked.design_snr_db,
            unchecked.frozen_mode,
            unchecked.info_set,
            unchecked.frozen_set,
            unchecked.frozen_values,
            unchecked.metrics,
        )
    }
}

impl PolarCodeSpec {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CodeSpecFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<CodeSpecFile>(text)?.try_into()
    }
}
