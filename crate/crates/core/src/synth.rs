//! Ground-truth fractal rasters.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{invalid_arg, Result};
use crate::raster::{ColorSpace, GrayRaster, BLACK, WHITE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassParams {
    /// In `(0, 1)`; the graph has dimension `2 - alpha`.
    pub alpha: f64,
    pub gamma: f64,
    /// Highest term index of the partial sum.
    pub terms: u32,
    /// Number of plotted points.
    pub points: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl WeierstrassParams {
    pub const DEFAULT_GAMMA: f64 = 5.0;
    pub const DEFAULT_TERMS: u32 = 26;

    pub fn new(alpha: f64, points: usize) -> Self {
        Self {
            alpha,
            gamma: Self::DEFAULT_GAMMA,
            terms: Self::DEFAULT_TERMS,
            points,
            t_min: 0.0,
            t_max: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid_arg(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(invalid_arg(format!("gamma must be > 1, got {}", self.gamma)));
        }
        if self.points < 2 {
            return Err(invalid_arg("need at least 2 points"));
        }
        if !(self.t_min < self.t_max && self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(invalid_arg(format!("empty interval [{}, {}]", self.t_min, self.t_max)));
        }
        Ok(())
    }

    pub fn true_dimension(&self) -> f64 {
        2.0 - self.alpha
    }

    fn series(&self) -> Vec<(f64, f64)> {
        (0..=self.terms)
            .map(|n| (self.gamma.powi(n as i32), self.gamma.powf(-(n as f64) * self.alpha)))
            .collect()
    }
}

/// `t` strictly increasing and equally spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
}

fn partial_sum(series: &[(f64, f64)], t: f64) -> f64 {
    // Phase reduced to [0,1) before the cosine; terms summed from n = 0 up.
    series.iter().map(|&(freq, amp)| amp * (TAU * (freq * t).rem_euclid(1.0)).cos()).sum()
}

/// Weierstrass cosine partial sum at a single abscissa.
pub fn weierstrass_at(p: &WeierstrassParams, t: f64) -> f64 {
    partial_sum(&p.series(), t)
}

pub fn sample_weierstrass(p: &WeierstrassParams) -> Result<Polyline> {
    p.validate()?;
    let series = p.series();
    let last = p.points - 1;
    let span = p.t_max - p.t_min;
    let points = (0..p.points)
        .into_par_iter()
        .map(|j| {
            let t = if j == last { p.t_max } else { p.t_min + span * (j as f64 / last as f64) };
            (t, partial_sum(&series, t))
        })
        .collect();
    Ok(Polyline { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineStyle {
    /// 1-pixel midpoint (Bresenham) stepping, pure black on white.
    #[default]
    Binary,
    /// Wu-style coverage shading.
    AntiAliased,
}

/// Canvas being drawn on; background white.
struct Canvas {
    width: usize,
    height: usize,
    px: Vec<u8>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Self { width, height, px: vec![WHITE; width * height] }
    }

    fn put(&mut self, x: i64, y: i64) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.px[y as usize * self.width + x as usize] = BLACK;
        }
    }

    fn darken(&mut self, x: i64, y: i64, coverage: f64) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let v = (WHITE as f64 * (1.0 - coverage.clamp(0.0, 1.0)) + 0.5).floor() as u8;
            let p = &mut self.px[y as usize * self.width + x as usize];
            *p = (*p).min(v);
        }
    }

    /// Integer midpoint line, all octants, both endpoints inclusive.
    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        let (mut x, mut y) = (x0, y0);
        loop {
            self.put(x, y);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn wu_line(&mut self, (x0, y0): (f64, f64), (x1, y1): (f64, f64)) {
        let steep = (y1 - y0).abs() > (x1 - x0).abs();
        let (mut x0, mut y0, mut x1, mut y1) = if steep { (y0, x0, y1, x1) } else { (x0, y0, x1, y1) };
        if x0 > x1 {
            std::mem::swap(&mut x0, &mut x1);
            std::mem::swap(&mut y0, &mut y1);
        }
        let dx = x1 - x0;
        let gradient = if dx == 0.0 { 1.0 } else { (y1 - y0) / dx };
        let mut plot = |a: i64, b: i64, c: f64| {
            if steep {
                self.darken(b, a, c)
            } else {
                self.darken(a, b, c)
            }
        };
        let xs = x0.round() as i64;
        let xe = x1.round() as i64;
        let mut y = y0 + gradient * (xs as f64 - x0);
        for x in xs..=xe {
            let yf = y.floor();
            let frac = y - yf;
            plot(x, yf as i64, 1.0 - frac);
            plot(x, yf as i64 + 1, frac);
            y += gradient;
        }
    }
}

/// Plots a polyline into a `width x height` canvas and trims the blank margin.
///
/// The polyline's bounding box is mapped onto the canvas inset by `margin`
/// with independent x and y scaling; larger ordinates go up. A constant
/// polyline is drawn along the middle row.
pub fn rasterize_polyline(
    line: &Polyline,
    width: usize,
    height: usize,
    margin: usize,
    style: LineStyle,
) -> Result<GrayRaster> {
    if line.points.len() < 2 {
        return Err(invalid_arg("polyline needs at least 2 points"));
    }
    if width <= 2 * margin || height <= 2 * margin {
        return Err(invalid_arg(format!("canvas {width}x{height} too small for margin {margin}")));
    }
    let (t0, t1) = (line.points[0].0, line.points[line.points.len() - 1].0);
    let (lo, hi) = line
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, w)| (lo.min(w), hi.max(w)));
    let inner_w = (width - 1 - 2 * margin) as f64;
    let inner_h = (height - 1 - 2 * margin) as f64;
    let m = margin as f64;
    let map = |&(t, w): &(f64, f64)| -> (f64, f64) {
        let x = m + (t - t0) / (t1 - t0) * inner_w;
        let y = if hi > lo { m + (hi - w) / (hi - lo) * inner_h } else { m + inner_h / 2.0 };
        (x, y)
    };
    let round = |v: f64| (v + 0.5).floor() as i64;

    let mut canvas = Canvas::new(width, height);
    let mapped: Vec<(f64, f64)> = line.points.iter().map(map).collect();
    match style {
        LineStyle::Binary => {
            let pts: Vec<(i64, i64)> = mapped.iter().map(|&(x, y)| (round(x), round(y))).collect();
            for seg in pts.windows(2) {
                canvas.line(seg[0], seg[1]);
            }
        }
        LineStyle::AntiAliased => {
            for seg in mapped.windows(2) {
                canvas.wu_line(seg[0], seg[1]);
            }
        }
    }
    let space = if style == LineStyle::Binary { ColorSpace::Mono } else { ColorSpace::Gray8 };
    Ok(GrayRaster::from_parts(width, height, canvas.px, space).trim_margins(WHITE))
}

/// A Weierstrass plot: sample, rasterize with binary lines, trim.
pub fn weierstrass_raster(p: &WeierstrassParams, width: usize, height: usize, margin: usize) -> Result<GrayRaster> {
    rasterize_polyline(&sample_weierstrass(p)?, width, height, margin, LineStyle::Binary)
}

/// Right-angled Sierpinski triangle from Pascal's triangle mod 2: grid cell
/// `(row, col)` of the `2^order` square is black iff `row & col == 0`. Each
/// cell becomes a `cell x cell` block.
pub fn sierpinski_raster(order: u32, cell: usize) -> GrayRaster {
    let n = 1usize << order;
    let cell = cell.max(1);
    let side = n * cell;
    let mut px = vec![WHITE; side * side];
    px.par_chunks_mut(side).enumerate().for_each(|(y, row)| {
        let i = y / cell;
        for (x, p) in row.iter_mut().enumerate() {
            if i & (x / cell) == 0 {
                *p = BLACK;
            }
        }
    });
    GrayRaster::from_parts(side, side, px, ColorSpace::Mono)
}
