//! Grayscale/monochrome raster model.
//!
//! Foreground (curve or fractal points) is black, `0`; background is white,
//! [`WHITE`].

use crate::error::{invalid_arg, Result};

pub const BLACK: u8 = 0;
pub const WHITE: u8 = 255;
pub const DEFAULT_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Gray8,
    /// Every pixel is either [`BLACK`] or [`WHITE`].
    Mono,
}

/// Row-major 8-bit raster. Always at least 1x1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    colorspace: ColorSpace,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid_arg(format!("raster dimensions must be >= 1, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(invalid_arg(format!(
                "pixel buffer has {} entries, expected {}x{}={}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self { width, height, pixels, colorspace: ColorSpace::Gray8 })
    }

    /// Builds a mono raster. Fails if any pixel is not 0 or 255.
    pub fn new_mono(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        let mut r = Self::new(width, height, pixels)?;
        if let Some(p) = r.pixels.iter().find(|&&p| p != BLACK && p != WHITE) {
            return Err(invalid_arg(format!("mono raster contains intensity {p}")));
        }
        r.colorspace = ColorSpace::Mono;
        Ok(r)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_parts(width: usize, height: usize, pixels: Vec<u8>, colorspace: ColorSpace) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(width >= 1 && height >= 1);
        Self { width, height, pixels, colorspace }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn is_mono(&self) -> bool {
        self.colorspace == ColorSpace::Mono
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u8> {
        self.pixels.chunks_exact(self.width)
    }

    /// True when every pixel equals `background`.
    pub fn is_uniform(&self, background: u8) -> bool {
        self.pixels.iter().all(|&p| p == background)
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as u64).sum::<u64>() as f64 / self.pixel_count() as f64
    }

    pub fn histogram(&self) -> Histogram {
        let mut counts = [0u64; 256];
        for &p in &self.pixels {
            counts[p as usize] += 1;
        }
        Histogram { counts, total: self.pixel_count() as u64 }
    }

    /// Thresholds into a mono raster: `pixel < threshold` becomes black.
    pub fn to_monochrome(&self, threshold: u8) -> GrayRaster {
        let pixels = self.pixels.iter().map(|&p| if p < threshold { BLACK } else { WHITE }).collect();
        Self::from_parts(self.width, self.height, pixels, ColorSpace::Mono)
    }

    /// Crops to the bounding box of all pixels that differ from `background`.
    /// A raster with no such pixels collapses to a single background pixel.
    pub fn trim_margins(&self, background: u8) -> GrayRaster {
        let mut x0 = usize::MAX;
        let mut x1 = 0;
        let mut y0 = usize::MAX;
        let mut y1 = 0;
        for (y, row) in self.rows().enumerate() {
            let first = row.iter().position(|&p| p != background);
            if let Some(first) = first {
                let last = row.iter().rposition(|&p| p != background).unwrap();
                x0 = x0.min(first);
                x1 = x1.max(last);
                y0 = y0.min(y);
                y1 = y;
            }
        }
        if y0 == usize::MAX {
            return Self::from_parts(1, 1, vec![background], self.colorspace);
        }
        self.crop(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
    }

    fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> GrayRaster {
        let mut pixels = Vec::with_capacity(w * h);
        for row in self.rows().skip(y0).take(h) {
            pixels.extend_from_slice(&row[x0..x0 + w]);
        }
        Self::from_parts(w, h, pixels, self.colorspace)
    }

    /// Order-0 Shannon entropy of the pixel values, in bits per pixel.
    pub fn order0_entropy(&self) -> f64 {
        self.histogram().entropy()
    }
}

/// 256-bin pixel value histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: [u64; 256],
    pub total: u64,
}

impl Histogram {
    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn entropy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let total = self.total as f64;
        let h: f64 = self
            .counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total;
                -p * p.log2()
            })
            .sum();
        // -0.0 for the single-symbol case
        h.max(0.0)
    }
}

/// Checks a user-supplied threshold value, which arrives as a wider integer on the CLI.
pub fn parse_threshold(v: i64) -> Result<u8> {
    u8::try_from(v).map_err(|_| invalid_arg(format!("threshold must be in [0,255], got {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raster(w: usize, h: usize, px: &[u8]) -> GrayRaster {
        GrayRaster::new(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayRaster::new(0, 3, vec![]).is_err());
        assert!(GrayRaster::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayRaster::new_mono(1, 2, vec![0, 7]).is_err());
    }

    #[test]
    fn monochrome_boundary() {
        let r = GrayRaster::filled(3, 2, 128).unwrap().to_monochrome(128);
        assert!(r.is_mono());
        assert!(r.pixels().iter().all(|&p| p == WHITE));

        let r = GrayRaster::filled(2, 2, 0).unwrap().to_monochrome(1);
        assert!(r.pixels().iter().all(|&p| p == BLACK));

        let r = raster(2, 1, &[10, 200]).to_monochrome(128);
        assert_eq!(r.pixels(), &[0, 255]);
        assert_eq!((r.width(), r.height()), (2, 1));
    }

    #[test]
    fn trim_fully_blank() {
        let r = GrayRaster::filled(5, 5, 255).unwrap().trim_margins(255);
        assert_eq!((r.width(), r.height()), (1, 1));
        assert_eq!(r.pixels(), &[255]);
    }

    #[test]
    fn trim_single_pixel() {
        let mut px = vec![255; 9];
        px[4] = 0;
        let r = raster(3, 3, &px).trim_margins(255);
        assert_eq!((r.width(), r.height()), (1, 1));
        assert_eq!(r.pixels(), &[0]);
    }

    #[test]
    fn trim_bounding_box() {
        let mut px = vec![255; 16];
        px[4 + 1] = 0;
        px[2 * 4 + 2] = 0;
        let r = raster(4, 4, &px).trim_margins(255);
        assert_eq!((r.width(), r.height()), (2, 2));
        assert_eq!(r.pixels(), &[0, 255, 255, 0]);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(GrayRaster::filled(4, 4, 17).unwrap().order0_entropy(), 0.0);
        let half = raster(2, 2, &[0, 255, 255, 0]);
        assert!((half.order0_entropy() - 1.0).abs() < 1e-12);
        let all: Vec<u8> = (0..=255).collect();
        let uniform = raster(16, 16, &all);
        assert!((uniform.order0_entropy() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_totals() {
        let r = raster(3, 1, &[1, 1, 9]);
        let h = r.histogram();
        assert_eq!(h.total, 3);
        assert_eq!(h.counts.iter().sum::<u64>(), 3);
        assert_eq!(h.distinct(), 2);
    }

    fn arb_raster() -> impl Strategy<Value = GrayRaster> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(prop_oneof![Just(255u8), any::<u8>()], w * h)
                .prop_map(move |px| GrayRaster::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn trim_is_idempotent(r in arb_raster()) {
            let once = r.trim_margins(255);
            prop_assert_eq!(once.trim_margins(255), once);
        }

        #[test]
        fn monochrome_is_idempotent(r in arb_raster(), t in 1u8..=255) {
            let mono = r.to_monochrome(128);
            prop_assert_eq!(mono.to_monochrome(t), mono);
        }

        #[test]
        fn entropy_is_permutation_invariant(r in arb_raster(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut px = r.pixels().to_vec();
            px.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = GrayRaster::new(r.width(), r.height(), px).unwrap();
            prop_assert!((shuffled.order0_entropy() - r.order0_entropy()).abs() < 1e-12);
        }

        #[test]
        fn entropy_bounded_by_alphabet(r in arb_raster()) {
            let h = r.order0_entropy();
            let bound = (r.histogram().distinct() as f64).log2();
            prop_assert!(h >= 0.0 && h <= bound + 1e-12 && h <= 8.0);
        }
    }
}
