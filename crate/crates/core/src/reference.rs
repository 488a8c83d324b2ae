//! Grid-based box-counting and information dimensions.
//!
//! The grid is anchored at the top-left pixel and partial boxes along the
//! right and bottom edges are counted. A pixel is foreground when its value is
//! below the threshold.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::fit::{fit_line, FitResult};
use crate::raster::GrayRaster;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCounts {
    pub box_size: usize,
    /// Number of boxes holding at least one foreground pixel.
    pub occupied: usize,
    /// Foreground pixel count of every occupied box, in row-major box order.
    pub occupancy_mass: Vec<u64>,
}

impl GridCounts {
    pub fn total_mass(&self) -> u64 {
        self.occupancy_mass.iter().sum()
    }

    /// Shannon entropy (bits) of the normalised box masses.
    pub fn entropy(&self) -> f64 {
        let total = self.total_mass() as f64;
        if total == 0.0 {
            return 0.0;
        }
        let h: f64 = self
            .occupancy_mass
            .iter()
            .map(|&m| {
                let p = m as f64 / total;
                -p * p.log2()
            })
            .sum();
        h.max(0.0)
    }
}

pub fn grid_counts(r: &GrayRaster, box_size: usize, threshold: u8) -> Result<GridCounts> {
    if box_size == 0 {
        return Err(invalid_arg("box size must be >= 1"));
    }
    let cols = r.width().div_ceil(box_size);
    let mut mass = vec![0u64; cols * r.height().div_ceil(box_size)];
    for (y, row) in r.rows().enumerate() {
        let base = (y / box_size) * cols;
        for (x, &p) in row.iter().enumerate() {
            if p < threshold {
                mass[base + x / box_size] += 1;
            }
        }
    }
    let occupancy_mass: Vec<u64> = mass.into_iter().filter(|&m| m > 0).collect();
    Ok(GridCounts { box_size, occupied: occupancy_mass.len(), occupancy_mass })
}

/// Powers of two from 1 up to `min(w, h) / 4` (at least `{1, 2}`).
pub fn default_box_sizes(width: usize, height: usize) -> Vec<usize> {
    let limit = (width.min(height) / 4).max(2);
    std::iter::successors(Some(1usize), |&b| Some(b * 2)).take_while(|&b| b <= limit).collect()
}

fn check_sizes(box_sizes: &[usize]) -> Result<()> {
    if box_sizes.contains(&0) {
        return Err(invalid_arg("box sizes must be >= 1"));
    }
    if box_sizes.iter().collect::<BTreeSet<_>>().len() < 2 {
        return Err(invalid_arg("need at least two distinct box sizes"));
    }
    Ok(())
}

fn counts_for(r: &GrayRaster, box_sizes: &[usize], threshold: u8) -> Result<Vec<GridCounts>> {
    check_sizes(box_sizes)?;
    let counts = box_sizes
        .par_iter()
        .map(|&b| grid_counts(r, b, threshold))
        .collect::<Result<Vec<_>>>()?;
    if counts.iter().any(|c| c.occupied == 0) {
        return Err(Error::InsufficientData("raster has no foreground pixels".into()));
    }
    Ok(counts)
}

fn fit_against_inverse_size(box_sizes: &[usize], y: Vec<f64>) -> Result<FitResult> {
    let x: Vec<f64> = box_sizes.iter().map(|&b| -(b as f64).log2()).collect();
    let line = fit_line(&x, &y)?;
    Ok(FitResult::from_line(line, (0, box_sizes.len() - 1)))
}

/// Slope of `log2 n(b)` against `log2(1/b)`.
pub fn box_count_dimension(r: &GrayRaster, box_sizes: &[usize], threshold: u8) -> Result<FitResult> {
    let counts = counts_for(r, box_sizes, threshold)?;
    let y = counts.iter().map(|c| (c.occupied as f64).log2()).collect();
    fit_against_inverse_size(box_sizes, y)
}

/// Slope of the box-mass entropy `H(b)` against `log2(1/b)`.
pub fn information_dimension(r: &GrayRaster, box_sizes: &[usize], threshold: u8) -> Result<FitResult> {
    let counts = counts_for(r, box_sizes, threshold)?;
    let y = counts.iter().map(GridCounts::entropy).collect();
    fit_against_inverse_size(box_sizes, y)
}
