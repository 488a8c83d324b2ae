//! Percentage downscaling.
//!
//! All filters are separable: per-axis weight tables are built once and the
//! raster is filtered horizontally then vertically in `f64`, rounding half-up
//! only at the end.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::raster::{ColorSpace, GrayRaster, DEFAULT_THRESHOLD};

/// Downscale percentage in `(0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Percent(f64);

impl Percent {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 100.0 {
            Ok(Self(value))
        } else {
            Err(invalid_arg(format!("scale percent must be in (0, 100], got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleMode {
    /// Exact area averaging (pixel averaging).
    GrayBox,
    /// Separable tent filter with support widened by the reduction ratio.
    GrayTriangle,
    /// Area averaging followed by thresholding back to mono.
    MonoBox,
}

impl ScaleMode {
    pub fn name(self) -> &'static str {
        match self {
            ScaleMode::GrayBox => "gray_box",
            ScaleMode::GrayTriangle => "gray_triangle",
            ScaleMode::MonoBox => "mono_box",
        }
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray_box" | "gray" => Ok(ScaleMode::GrayBox),
            "gray_triangle" | "resize" => Ok(ScaleMode::GrayTriangle),
            "mono_box" | "bw" | "mono" => Ok(ScaleMode::MonoBox),
            other => Err(invalid_arg(format!("unknown scale mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSpec {
    pub percent: Percent,
    pub mode: ScaleMode,
    /// Only used by [`ScaleMode::MonoBox`].
    pub threshold: u8,
}

impl ScaleSpec {
    pub fn new(percent: Percent, mode: ScaleMode) -> Self {
        Self { percent, mode, threshold: DEFAULT_THRESHOLD }
    }

    pub fn apply(&self, r: &GrayRaster) -> GrayRaster {
        match self.mode {
            ScaleMode::GrayBox => box_scale(r, self.percent),
            ScaleMode::GrayTriangle => triangle_scale(r, self.percent),
            ScaleMode::MonoBox => mono_scale(r, self.percent, self.threshold),
        }
    }
}

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

fn target_len(n: usize, percent: Percent) -> usize {
    let scaled = round_half_up(n as f64 * percent.value() / 100.0);
    (scaled as usize).max(1)
}

/// Output dimensions for a downscale, rounding half-up with a floor of 1.
pub fn target_dims(width: usize, height: usize, percent: f64) -> Result<(usize, usize)> {
    if width == 0 || height == 0 {
        return Err(invalid_arg("dimensions must be >= 1"));
    }
    let p = Percent::new(percent)?;
    Ok((target_len(width, p), target_len(height, p)))
}

/// Sparse row of a resampling matrix: `(first source index, weights)`.
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

/// Area-coverage weights mapping `src` samples onto `dst` equal-width bins.
fn box_taps(src: usize, dst: usize) -> Vec<Taps> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let lo = o as f64 * ratio;
            let hi = if o + 1 == dst { src as f64 } else { (o + 1) as f64 * ratio };
            let start = lo.floor() as usize;
            let end = (hi.ceil() as usize).min(src);
            let weights: Vec<f64> = (start..end)
                .map(|i| {
                    let a = lo.max(i as f64);
                    let b = hi.min((i + 1) as f64);
                    (b - a).max(0.0)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            Taps { start, weights: weights.into_iter().map(|w| w / total).collect() }
        })
        .collect()
}

/// Tent-filter weights; the kernel radius is one output pixel measured in
/// source pixels. Weights falling outside the source are dropped and the
/// remainder renormalised.
fn triangle_taps(src: usize, dst: usize) -> Vec<Taps> {
    let ratio = src as f64 / dst as f64;
    let radius = ratio.max(1.0);
    (0..dst)
        .map(|o| {
            let centre = (o as f64 + 0.5) * ratio - 0.5;
            let start = ((centre - radius).floor().max(0.0)) as usize;
            let end = (((centre + radius).ceil() as usize) + 1).min(src);
            let mut weights: Vec<f64> =
                (start..end).map(|i| (1.0 - (i as f64 - centre).abs() / radius).max(0.0)).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Taps { start, weights }
        })
        .collect()
}

fn resample(r: &GrayRaster, out_w: usize, out_h: usize, xtaps: &[Taps], ytaps: &[Taps]) -> Vec<u8> {
    let w = r.width();
    // Horizontal pass: h rows of out_w f64 values.
    let mut horiz = vec![0.0f64; out_w * r.height()];
    horiz.par_chunks_mut(out_w).zip(r.pixels().par_chunks(w)).for_each(|(dst, src)| {
        for (d, t) in dst.iter_mut().zip(xtaps) {
            *d = t.weights.iter().zip(&src[t.start..]).map(|(wt, &p)| wt * p as f64).sum();
        }
    });
    let mut out = vec![0u8; out_w * out_h];
    out.par_chunks_mut(out_w).zip(ytaps.par_iter()).for_each(|(dst, t)| {
        let mut acc = vec![0.0f64; out_w];
        for (k, wt) in t.weights.iter().enumerate() {
            let row = &horiz[(t.start + k) * out_w..(t.start + k + 1) * out_w];
            acc.iter_mut().zip(row).for_each(|(a, &v)| *a += wt * v);
        }
        for (d, a) in dst.iter_mut().zip(acc) {
            *d = round_half_up(a).clamp(0.0, 255.0) as u8;
        }
    });
    out
}

/// Area-weighted box downscale (the pixel-averaging `-scale` behaviour).
pub fn box_scale(r: &GrayRaster, percent: Percent) -> GrayRaster {
    if percent.is_identity() {
        return r.clone();
    }
    let (ow, oh) = (target_len(r.width(), percent), target_len(r.height(), percent));
    let px = resample(r, ow, oh, &box_taps(r.width(), ow), &box_taps(r.height(), oh));
    GrayRaster::from_parts(ow, oh, px, ColorSpace::Gray8)
}

/// Box downscale followed by thresholding.
pub fn mono_scale(r: &GrayRaster, percent: Percent, threshold: u8) -> GrayRaster {
    box_scale(r, percent).to_monochrome(threshold)
}

/// Separable tent-filter downscale (the `-resize` analogue).
pub fn triangle_scale(r: &GrayRaster, percent: Percent) -> GrayRaster {
    if percent.is_identity() {
        return r.clone();
    }
    let (ow, oh) = (target_len(r.width(), percent), target_len(r.height(), percent));
    let px = resample(r, ow, oh, &triangle_taps(r.width(), ow), &triangle_taps(r.height(), oh));
    GrayRaster::from_parts(ow, oh, px, ColorSpace::Gray8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pct(v: f64) -> Percent {
        Percent::new(v).unwrap()
    }

    fn raster(w: usize, h: usize, px: &[u8]) -> GrayRaster {
        GrayRaster::new(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn target_dims_examples() {
        assert_eq!(target_dims(100, 50, 10.0).unwrap(), (10, 5));
        assert_eq!(target_dims(3, 3, 50.0).unwrap(), (2, 2));
        assert_eq!(target_dims(5, 5, 1.0).unwrap(), (1, 1));
        assert!(target_dims(5, 5, 0.0).is_err());
        assert!(target_dims(5, 5, 100.5).is_err());
        assert!(target_dims(5, 5, f64::NAN).is_err());
    }

    #[test]
    fn box_examples() {
        let r = raster(2, 2, &[0, 255, 255, 0]);
        assert_eq!(box_scale(&r, pct(50.0)).pixels(), &[128]);
        let r = raster(4, 1, &[0, 0, 255, 255]);
        let out = box_scale(&r, pct(50.0));
        assert_eq!((out.width(), out.height()), (2, 1));
        assert_eq!(out.pixels(), &[0, 255]);
        let r = raster(3, 2, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(box_scale(&r, pct(100.0)), r);
    }

    #[test]
    fn box_fractional_boundaries() {
        // 3 -> 2: bins [0,1.5) and [1.5,3).
        let r = raster(3, 1, &[0, 100, 200]);
        let out = box_scale(&r, pct(50.0));
        // (0 + 0.5*100)/1.5 = 33.33 ; (0.5*100 + 200)/1.5 = 166.67
        assert_eq!(out.pixels(), &[33, 167]);
    }

    #[test]
    fn mono_examples() {
        let r = raster(2, 2, &[0, 255, 255, 0]);
        let out = mono_scale(&r, pct(50.0), 128);
        assert_eq!(out.pixels(), &[255]);
        assert!(out.is_mono());
        let r = raster(2, 2, &[0, 0, 0, 255]);
        assert_eq!(mono_scale(&r, pct(50.0), 128).pixels(), &[0]);
        let black = GrayRaster::filled(7, 5, 0).unwrap();
        for p in [5.0, 33.0, 80.0] {
            assert!(mono_scale(&black, pct(p), 128).is_uniform(0));
        }
    }

    #[test]
    fn triangle_examples() {
        let c = GrayRaster::filled(9, 7, 77).unwrap();
        for p in [5.0, 30.0, 50.0, 90.0] {
            assert!(triangle_scale(&c, pct(p)).is_uniform(77));
        }
        let r = raster(3, 2, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(triangle_scale(&r, pct(100.0)), r);

        // Hand-evaluated tent weights at 25% for a 4-wide axis: centre 1.5,
        // radius 4, weights 0.625, 0.875, 0.875, 0.625 (sum 3). Each row of the
        // checkerboard averages to 255*1.5/3 = 127.5 and so does the column.
        let checker: Vec<u8> = (0..16).map(|i| if (i % 4 + i / 4) % 2 == 0 { 0 } else { 255 }).collect();
        let out = triangle_scale(&raster(4, 4, &checker), pct(25.0));
        assert_eq!(out.pixels(), &[128]);
    }

    #[test]
    fn background_stays_background() {
        let white = GrayRaster::filled(31, 17, 255).unwrap();
        for p in [5.0, 12.0, 60.0] {
            assert!(box_scale(&white, pct(p)).is_uniform(255));
            assert!(triangle_scale(&white, pct(p)).is_uniform(255));
            assert!(mono_scale(&white, pct(p), 128).is_uniform(255));
        }
    }

    #[test]
    fn deterministic_across_pool_sizes() {
        let px: Vec<u8> = (0..123 * 77).map(|i| ((i * 7919) % 256) as u8).collect();
        let r = GrayRaster::new(123, 77, px).unwrap();
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| (box_scale(&r, pct(37.0)), triangle_scale(&r, pct(37.0))))
        };
        assert_eq!(run(1), run(4));
    }

    fn arb_raster() -> impl Strategy<Value = GrayRaster> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayRaster::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn mean_conserved_for_exact_divisors(k in 1usize..5, bw in 1usize..6, bh in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (k * bw, k * bh);
            let px: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
            let r = GrayRaster::new(w, h, px).unwrap();
            let out = box_scale(&r, pct(100.0 / k as f64));
            prop_assert_eq!((out.width(), out.height()), (bw, bh));
            prop_assert!((out.mean() - r.mean()).abs() <= 0.5);
        }

        #[test]
        fn box_output_within_input_range(r in arb_raster(), p in 1.0f64..100.0) {
            let lo = *r.pixels().iter().min().unwrap();
            let hi = *r.pixels().iter().max().unwrap();
            let out = box_scale(&r, pct(p));
            prop_assert_eq!((out.width(), out.height()), target_dims(r.width(), r.height(), p).unwrap());
            prop_assert!(out.pixels().iter().all(|&v| v >= lo && v <= hi));
        }
    }
}
