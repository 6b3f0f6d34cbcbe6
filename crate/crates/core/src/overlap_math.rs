//! Generalized means and the overlap-weighted merge score.

use std::fmt;
use std::str::FromStr;

use crate::corpus::ResourceClass;
use crate::error::{Error, Result};

/// Exponent of the generalized mean, `p <= 1`. `-inf` selects the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParam(f64);

impl PowerParam {
    pub const MIN: PowerParam = PowerParam(f64::NEG_INFINITY);
    pub const ARITHMETIC: PowerParam = PowerParam(1.0);
    pub const GEOMETRIC: PowerParam = PowerParam(0.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p > 1.0 {
            return Err(Error::InvalidParameter(format!("p must be <= 1, got {p}")));
        }
        Ok(PowerParam(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_min(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Default for PowerParam {
    fn default() -> Self {
        PowerParam::MIN
    }
}

impl fmt::Display for PowerParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_min() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for PowerParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "-inf" {
            return Ok(PowerParam::MIN);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("p must be a number <= 1 or -inf, got {s:?}")))?;
        if v.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "p must be a number <= 1 or -inf, got {s:?}"
            )));
        }
        PowerParam::new(v)
    }
}

/// Weight of the overlap term, `0 <= alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixWeight(f64);

impl MixWeight {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(MixWeight(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for MixWeight {
    fn default() -> Self {
        MixWeight(0.5)
    }
}

impl fmt::Display for MixWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for MixWeight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("alpha must be a number, got {s:?}")))?;
        MixWeight::new(v)
    }
}

/// Indices of high- and low-resource languages within a frequency vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    high: Vec<usize>,
    low: Vec<usize>,
}

impl Partition {
    pub fn new(classes: &[ResourceClass]) -> Self {
        let mut high = Vec::new();
        let mut low = Vec::new();
        for (i, c) in classes.iter().enumerate() {
            match c {
                ResourceClass::High => high.push(i),
                ResourceClass::Low => low.push(i),
            }
        }
        Partition { high, low }
    }

    pub fn high(&self) -> &[usize] {
        &self.high
    }

    pub fn low(&self) -> &[usize] {
        &self.low
    }

    pub fn len(&self) -> usize {
        self.high.len() + self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Power mean of two non-negative numbers, `((a^p + b^p) / 2)^(1/p)`.
///
/// For `p <= 0` the mean is 0 whenever either argument is 0.
pub fn generalized_mean(a: f64, b: f64, p: PowerParam) -> Result<f64> {
    for x in [a, b] {
        if x.is_nan() || x < 0.0 {
            return Err(Error::NegativeInput(x));
        }
    }
    Ok(mean_unchecked(a, b, p.0))
}

#[inline]
pub(crate) fn mean_unchecked(a: f64, b: f64, p: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo == hi {
        return lo;
    }
    if p == 1.0 {
        return lo + (hi - lo) / 2.0;
    }
    if p == f64::NEG_INFINITY || (p <= 0.0 && lo == 0.0) {
        return lo;
    }
    if p == 0.0 {
        return (lo.sqrt() * hi.sqrt()).clamp(lo, hi);
    }
    // Factor out the argument whose p-th power dominates so the remaining
    // ratio raised to p stays in [0, 1].
    let (base, other) = if p < 0.0 { (lo, hi) } else { (hi, lo) };
    let ratio_pow = (other / base).powf(p);
    let log_t = (0.5 * (ratio_pow - 1.0)).ln_1p();
    (base * (log_t / p).exp()).clamp(lo, hi)
}

/// Σ over LRLs i of max over HRLs h of GM(f_i, f_h, p).
pub fn overlap_term(freqs: &[f64], partition: &Partition, p: PowerParam) -> Result<f64> {
    check_freqs(freqs, partition)?;
    if partition.high.is_empty() {
        return Err(Error::NoHighResource);
    }
    Ok(overlap_unchecked(freqs, partition, p.0))
}

#[inline]
fn overlap_unchecked(freqs: &[f64], partition: &Partition, p: f64) -> f64 {
    let mut total = 0.0;
    for &i in &partition.low {
        let fi = freqs[i];
        if fi == 0.0 && p <= 0.0 {
            continue;
        }
        let best = partition
            .high
            .iter()
            .map(|&h| mean_unchecked(fi, freqs[h], p))
            .fold(0.0, f64::max);
        total += best;
    }
    total
}

/// `(1 - alpha) Σ_j f_j + alpha · overlap_term`. At `alpha = 0` this is the
/// plain frequency sum and no HRL is required.
pub fn merge_score(freqs: &[f64], alpha: MixWeight, p: PowerParam, partition: &Partition) -> Result<f64> {
    check_freqs(freqs, partition)?;
    if alpha.0 > 0.0 && partition.high.is_empty() {
        return Err(Error::NoHighResource);
    }
    Ok(Scorer::new(alpha, p, partition.clone()).score(freqs))
}

fn check_freqs(freqs: &[f64], partition: &Partition) -> Result<()> {
    if freqs.len() != partition.len() {
        return Err(Error::InvalidParameter(format!(
            "frequency vector has {} entries for {} languages",
            freqs.len(),
            partition.len()
        )));
    }
    if let Some(&bad) = freqs.iter().find(|f| f.is_nan() || **f < 0.0) {
        return Err(Error::NegativeInput(bad));
    }
    Ok(())
}

/// Pre-validated scoring parameters for the training hot loop.
#[derive(Debug, Clone)]
pub struct Scorer {
    alpha: f64,
    p: f64,
    partition: Partition,
}

impl Scorer {
    pub fn new(alpha: MixWeight, p: PowerParam, partition: Partition) -> Self {
        Scorer {
            alpha: alpha.0,
            p: p.0,
            partition,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    #[inline]
    pub fn score(&self, freqs: &[f64]) -> f64 {
        let total: f64 = freqs.iter().sum();
        if self.alpha == 0.0 {
            return total;
        }
        let overlap = overlap_unchecked(freqs, &self.partition, self.p);
        (1.0 - self.alpha) * total + self.alpha * overlap
    }
}
