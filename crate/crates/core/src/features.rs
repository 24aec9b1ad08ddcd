//! Time-domain features of a startup current window.
//!
//! Thirteen statistics summarise one preprocessed transient. Five carry the
//! signal's physical scale (mean, RMS, root-sum-square, peak-to-peak,
//! energy); eight are scale-free shape descriptors (shape factor, impulsion,
//! crest factor, margin factor, peak/average power ratio, variance,
//! skewness, kurtosis). Downstream models treat the thirteen as one flat
//! vector in the order given by [`FEATURE_NAMES`].
//!
//! Two conventions are deliberate and load-bearing, because classifier
//! thresholds depend on them staying put:
//!
//! * `peak_avg_power_ratio` squares the **signed** maximum, not the largest
//!   absolute excursion, so a window whose biggest swing is negative scores
//!   by its positive-side peak;
//! * `variance` uses the `N - 1` divisor while the standard deviation
//!   inside `skewness` and `kurtosis` uses `N`.
//!
//! Moments are computed in two passes (mean first, then centred sums),
//! which keeps them stable for the window lengths seen here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signals::SignalRecord;

/// Canonical feature order. Every row-shaped API in the crate (datasets,
/// CSV columns, importance vectors) uses this ordering.
pub const FEATURE_NAMES: [&str; 13] = [
    "mean_index",
    "rms",
    "rss",
    "peak_peak",
    "energy",
    "shape_factor",
    "impulsion",
    "crest_factor",
    "margin_factor",
    "peak_avg_power_ratio",
    "variance",
    "skewness",
    "kurtosis",
];

/// Number of features extracted per window.
pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

/// The five features that carry the signal's physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionalFeatures<F> {
    /// Arithmetic mean of the raw samples (signed).
    pub mean_index: F,
    /// Root mean square, `sqrt(sum(x^2) / N)`.
    pub rms: F,
    /// Root sum of squares, `sqrt(sum(x^2))`.
    pub rss: F,
    /// Peak-to-peak span, `max(x) - min(x)`.
    pub peak_peak: F,
    /// Total energy, `sum(x^2)`.
    pub energy: F,
}

/// The eight scale-free shape descriptors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondimensionalFeatures<F> {
    /// RMS over mean absolute value.
    pub shape_factor: F,
    /// Peak absolute value over mean absolute value.
    pub impulsion: F,
    /// Peak absolute value over RMS.
    pub crest_factor: F,
    /// Peak absolute value over the squared mean of `sqrt(|x|)`.
    pub margin_factor: F,
    /// Squared signed maximum over squared RMS.
    pub peak_avg_power_ratio: F,
    /// Sample variance with the `N - 1` divisor.
    pub variance: F,
    /// Third standardised moment; the standardising sigma uses divisor `N`.
    pub skewness: F,
    /// Fourth standardised moment; the standardising sigma uses divisor `N`.
    pub kurtosis: F,
}

/// All thirteen features of one window, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<F> {
    pub mean_index: F,
    pub rms: F,
    pub rss: F,
    pub peak_peak: F,
    pub energy: F,
    pub shape_factor: F,
    pub impulsion: F,
    pub crest_factor: F,
    pub margin_factor: F,
    pub peak_avg_power_ratio: F,
    pub variance: F,
    pub skewness: F,
    pub kurtosis: F,
}

impl<F: Scalar> FeatureVector<F> {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn as_array(&self) -> [F; FEATURE_COUNT] {
        [
            self.mean_index,
            self.rms,
            self.rss,
            self.peak_peak,
            self.energy,
            self.shape_factor,
            self.impulsion,
            self.crest_factor,
            self.margin_factor,
            self.peak_avg_power_ratio,
            self.variance,
            self.skewness,
            self.kurtosis,
        ]
    }

    /// Rebuilds a vector from values in [`FEATURE_NAMES`] order.
    pub fn from_array(v: [F; FEATURE_COUNT]) -> Self {
        FeatureVector {
            mean_index: v[0],
            rms: v[1],
            rss: v[2],
            peak_peak: v[3],
            energy: v[4],
            shape_factor: v[5],
            impulsion: v[6],
            crest_factor: v[7],
            margin_factor: v[8],
            peak_avg_power_ratio: v[9],
            variance: v[10],
            skewness: v[11],
            kurtosis: v[12],
        }
    }

    /// Looks a feature up by its canonical name.
    pub fn get(&self, name: &str) -> Option<F> {
        let idx = FEATURE_NAMES.iter().position(|n| *n == name)?;
        Some(self.as_array()[idx])
    }
}

/// Shared first-pass sums over a non-empty slice.
struct Profile<F> {
    n: F,
    mean: F,
    mean_abs: F,
    mean_root: F,
    max: F,
    min: F,
    max_abs: F,
    sum_sq: F,
}

fn profile<F: Scalar>(x: &[F]) -> Profile<F> {
    debug_assert!(!x.is_empty());
    let n = F::from_usize(x.len()).expect("slice length fits the scalar");
    let mut sum = F::zero();
    let mut sum_abs = F::zero();
    let mut sum_root = F::zero();
    let mut sum_sq = F::zero();
    let mut max = F::neg_infinity();
    let mut min = F::infinity();
    for &v in x {
        sum = sum + v;
        sum_abs = sum_abs + v.abs();
        sum_root = sum_root + v.abs().sqrt();
        sum_sq = sum_sq + v * v;
        max = max.max(v);
        min = min.min(v);
    }
    Profile {
        n,
        mean: sum / n,
        mean_abs: sum_abs / n,
        mean_root: sum_root / n,
        max,
        min,
        max_abs: max.abs().max(min.abs()),
        sum_sq,
    }
}

/// Centred moment sums (divisor `N`), second pass.
struct Moments<F> {
    m2: F,
    m3: F,
    m4: F,
}

fn moments<F: Scalar>(x: &[F], mean: F) -> Moments<F> {
    let n = F::from_usize(x.len()).expect("slice length fits the scalar");
    let mut s2 = F::zero();
    let mut s3 = F::zero();
    let mut s4 = F::zero();
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        s2 = s2 + d2;
        s3 = s3 + d2 * d;
        s4 = s4 + d2 * d2;
    }
    Moments {
        m2: s2 / n,
        m3: s3 / n,
        m4: s4 / n,
    }
}

/// Population standard deviation (divisor `N`).
///
/// Errors with [`Error::EmptySignal`] on an empty slice. A constant slice
/// yields exactly zero.
pub fn std_dev<F: Scalar>(x: &[F]) -> Result<F> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mean = profile(x).mean;
    Ok(moments(x, mean).m2.sqrt())
}

/// The five scale-carrying features.
///
/// Needs at least two samples; errors with [`Error::EmptySignal`] otherwise.
pub fn dimensional_features<F: Scalar>(x: &[F]) -> Result<DimensionalFeatures<F>> {
    if x.len() < 2 {
        return Err(Error::EmptySignal);
    }
    let p = profile(x);
    Ok(DimensionalFeatures {
        mean_index: p.mean,
        rms: (p.sum_sq / p.n).sqrt(),
        rss: p.sum_sq.sqrt(),
        peak_peak: p.max - p.min,
        energy: p.sum_sq,
    })
}

/// The eight scale-free features.
///
/// Needs at least two samples, at least one nonzero sample, and at least
/// two distinct values; otherwise the ratios are undefined and
/// [`Error::EmptySignal`] or [`Error::DegenerateSignal`] is returned.
pub fn nondimensional_features<F: Scalar>(x: &[F]) -> Result<NondimensionalFeatures<F>> {
    if x.len() < 2 {
        return Err(Error::EmptySignal);
    }
    let p = profile(x);
    if p.mean_abs == F::zero() {
        return Err(Error::DegenerateSignal("all samples are zero"));
    }
    let m = moments(x, p.mean);
    let sigma = m.m2.sqrt();
    if sigma == F::zero() {
        return Err(Error::DegenerateSignal("all samples are equal"));
    }
    let one = F::one();
    let rms = (p.sum_sq / p.n).sqrt();
    Ok(NondimensionalFeatures {
        shape_factor: rms / p.mean_abs,
        impulsion: p.max_abs / p.mean_abs,
        crest_factor: p.max_abs / rms,
        margin_factor: p.max_abs / (p.mean_root * p.mean_root),
        peak_avg_power_ratio: (p.max * p.max) / (rms * rms),
        variance: m.m2 * p.n / (p.n - one),
        skewness: m.m3 / (sigma * sigma * sigma),
        kurtosis: m.m4 / (sigma * sigma * sigma * sigma),
    })
}

/// All thirteen features of one sample window.
pub fn extract<F: Scalar>(x: &[F]) -> Result<FeatureVector<F>> {
    let d = dimensional_features(x)?;
    let s = nondimensional_features(x)?;
    Ok(FeatureVector {
        mean_index: d.mean_index,
        rms: d.rms,
        rss: d.rss,
        peak_peak: d.peak_peak,
        energy: d.energy,
        shape_factor: s.shape_factor,
        impulsion: s.impulsion,
        crest_factor: s.crest_factor,
        margin_factor: s.margin_factor,
        peak_avg_power_ratio: s.peak_avg_power_ratio,
        variance: s.variance,
        skewness: s.skewness,
        kurtosis: s.kurtosis,
    })
}

/// Features of a (typically preprocessed) signal record.
pub fn extract_features<F: Scalar>(sig: &SignalRecord<F>) -> Result<FeatureVector<F>> {
    extract(&sig.samples)
}
