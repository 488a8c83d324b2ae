//! Compression dimension: compressed size of downscaled copies against scale,
//! fitted on log2-log2 axes.

use rayon::prelude::*;

use crate::codec::{compressed_size, Codec};
use crate::error::{invalid_arg, Error, Result};
use crate::fit::{fit_line, FitResult};
use crate::raster::{GrayRaster, DEFAULT_THRESHOLD, WHITE};
use crate::rescale::{Percent, ScaleMode, ScaleSpec};

/// The 17 percentages used for the systematic Weierstrass study.
pub const DEFAULT_SCALES: [f64; 17] =
    [5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

/// The nine-step 10%..90% ladder.
pub const DECADE_SCALES: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

pub const DEFAULT_MIN_R2: f64 = 0.99;

/// Shortest window `auto_range` will consider.
pub const MIN_WINDOW: usize = 4;

pub fn default_scale_vector() -> Vec<f64> {
    DEFAULT_SCALES.to_vec()
}

pub fn decade_scale_vector() -> Vec<f64> {
    DECADE_SCALES.to_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSample {
    pub percent: f64,
    pub width: usize,
    pub height: usize,
    pub pixel_count: usize,
    pub compressed_bytes: u64,
    /// The downscaled raster is entirely background.
    pub blank: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    /// Ascending, distinct percents.
    pub samples: Vec<ScaleSample>,
    pub mode: ScaleMode,
    pub codec: Codec,
    pub source_dims: (usize, usize),
}

impl ScalingCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn percents(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.percent).collect()
    }

    pub fn all_blank(&self) -> bool {
        self.samples.iter().all(|s| s.blank)
    }
}

pub(crate) fn validate_percents(percents: &[f64]) -> Result<Vec<Percent>> {
    if percents.is_empty() {
        return Err(invalid_arg("scale list is empty"));
    }
    let out = percents.iter().map(|&p| Percent::new(p)).collect::<Result<Vec<_>>>()?;
    if let Some(w) = percents.windows(2).find(|w| w[1] <= w[0]) {
        return Err(invalid_arg(format!("scales must be strictly increasing ({} then {})", w[0], w[1])));
    }
    Ok(out)
}

/// Downscales `r` to every percent and records the compressed payload size.
pub fn sample_scaling_curve(
    r: &GrayRaster,
    percents: &[f64],
    mode: ScaleMode,
    codec: Codec,
    threshold: u8,
) -> Result<ScalingCurve> {
    let checked = validate_percents(percents)?;
    let samples = checked
        .par_iter()
        .map(|&percent| {
            let spec = ScaleSpec { percent, mode, threshold };
            let scaled = spec.apply(r);
            let bytes = compressed_size(&scaled, codec).max(1) as u64;
            ScaleSample {
                percent: percent.value(),
                width: scaled.width(),
                height: scaled.height(),
                pixel_count: scaled.pixel_count(),
                compressed_bytes: bytes,
                blank: scaled.is_uniform(WHITE),
            }
        })
        .collect();
    Ok(ScalingCurve { samples, mode, codec, source_dims: (r.width(), r.height()) })
}

/// Least-squares slope of `log2(size)` on `log2(percent / percents[0])`.
///
/// The low-level entry point for real-valued sizes; `used_range` spans all
/// points.
pub fn fit_power_law(percents: &[f64], sizes: &[f64]) -> Result<FitResult> {
    if percents.len() != sizes.len() {
        return Err(invalid_arg("percent and size lists differ in length"));
    }
    if let Some(bad) = percents.iter().chain(sizes).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(invalid_arg(format!("log-log fit needs positive values, got {bad}")));
    }
    let reference = percents.iter().copied().fold(f64::INFINITY, f64::min);
    let x: Vec<f64> = percents.iter().map(|p| (p / reference).log2()).collect();
    let y: Vec<f64> = sizes.iter().map(|s| s.log2()).collect();
    let line = fit_line(&x, &y)?;
    Ok(FitResult::from_line(line, (0, percents.len().saturating_sub(1))))
}

pub fn fit_loglog(curve: &ScalingCurve, range: (usize, usize)) -> Result<FitResult> {
    let (first, last) = range;
    if first >= last || last >= curve.len() {
        return Err(Error::InvalidRange(format!("{first}..{last} is not a window of {} samples", curve.len())));
    }
    let window = &curve.samples[first..=last];
    if let Some(s) = window.iter().find(|s| s.blank) {
        return Err(Error::InvalidRange(format!("sample at {}% is blank", s.percent)));
    }
    let p: Vec<f64> = window.iter().map(|s| s.percent).collect();
    let s: Vec<f64> = window.iter().map(|s| s.compressed_bytes as f64).collect();
    let fit = fit_power_law(&p, &s)?;
    Ok(FitResult { used_range: range, ..fit })
}

/// Picks the physical scaling range.
///
/// Leading blank samples and leading flat plateaus (equal sizes at
/// consecutive scales) are dropped. Of the remaining blank-free windows of at
/// least [`MIN_WINDOW`] samples, the longest one whose fit reaches `min_r2`
/// wins, preferring higher R² and then lower start. If no window qualifies
/// there is no detectable break to cut at, and the longest blank-free window
/// is used.
pub fn auto_range(curve: &ScalingCurve, min_r2: f64) -> Result<(usize, usize)> {
    let s = &curve.samples;
    let n = s.len();
    let mut start = 0;
    while start < n {
        let flat_ahead = start + 1 < n && s[start + 1].compressed_bytes == s[start].compressed_bytes;
        let flat_behind = start > 0 && s[start - 1].compressed_bytes == s[start].compressed_bytes;
        if s[start].blank || flat_ahead || flat_behind {
            start += 1;
        } else {
            break;
        }
    }
    if n - start < MIN_WINDOW {
        let why = if curve.all_blank() {
            "all scales blank".to_string()
        } else {
            format!("{} usable samples, need {MIN_WINDOW}", n - start)
        };
        return Err(Error::InsufficientData(why));
    }

    // (len, r2, first)
    let mut best_ok: Option<(usize, f64, usize)> = None;
    let mut longest: Option<(usize, usize)> = None;
    for first in start..n {
        for last in first + MIN_WINDOW - 1..n {
            if s[first..=last].iter().any(|x| x.blank) {
                break;
            }
            let len = last - first + 1;
            if longest.is_none_or(|(l, _)| len > l) {
                longest = Some((len, first));
            }
            let r2 = fit_loglog(curve, (first, last))?.r_squared;
            if r2 >= min_r2 && best_ok.is_none_or(|(l, best, _)| len > l || (len == l && r2 > best)) {
                best_ok = Some((len, r2, first));
            }
        }
    }
    let (len, first) = match (best_ok, longest) {
        (Some((len, _, first)), _) => (len, first),
        (None, Some(w)) => w,
        (None, None) => {
            return Err(Error::InsufficientData(format!("no {MIN_WINDOW}-sample window free of blank scales")))
        }
    };
    Ok((first, first + len - 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    Auto { min_r2: f64 },
    /// Inclusive sample indices.
    Explicit(usize, usize),
    /// The first `n` samples.
    Prefix(usize),
}

impl Default for RangePolicy {
    fn default() -> Self {
        RangePolicy::Auto { min_r2: DEFAULT_MIN_R2 }
    }
}

impl RangePolicy {
    pub fn resolve(&self, curve: &ScalingCurve) -> Result<(usize, usize)> {
        match *self {
            RangePolicy::Auto { min_r2 } => auto_range(curve, min_r2),
            RangePolicy::Explicit(a, b) => Ok((a, b)),
            RangePolicy::Prefix(ns) => {
                if ns < 2 || ns > curve.len() {
                    return Err(Error::InvalidRange(format!("prefix of {ns} samples out of 2..={}", curve.len())));
                }
                if curve.samples[..ns].iter().all(|s| s.blank) {
                    return Err(Error::InsufficientData("all scales blank".into()));
                }
                Ok((0, ns - 1))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub percents: Vec<f64>,
    pub mode: ScaleMode,
    pub codec: Codec,
    pub threshold: u8,
    pub range: RangePolicy,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            percents: default_scale_vector(),
            mode: ScaleMode::GrayBox,
            codec: Codec::Deflate,
            threshold: DEFAULT_THRESHOLD,
            range: RangePolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub fit: FitResult,
    pub curve: ScalingCurve,
}

pub fn compression_dimension(r: &GrayRaster, cfg: &EstimateConfig) -> Result<Estimate> {
    let curve = sample_scaling_curve(r, &cfg.percents, cfg.mode, cfg.codec, cfg.threshold)?;
    estimate_from_curve(curve, &cfg.range)
}

pub fn estimate_from_curve(curve: ScalingCurve, range: &RangePolicy) -> Result<Estimate> {
    if curve.all_blank() {
        return Err(Error::InsufficientData("all scales blank".into()));
    }
    let range = range.resolve(&curve)?;
    let fit = fit_loglog(&curve, range)?;
    Ok(Estimate { fit, curve })
}
