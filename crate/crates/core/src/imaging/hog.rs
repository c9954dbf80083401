//! Histogram of Oriented Gradients.
//!
//! Gradients use centered `[-1, 0, 1]` differences with edge replication.
//! Bin `i` is centered on `i · range / bins` degrees and every pixel splits
//! its magnitude between the two nearest centers (wrapping around the range).
//! Cells are grouped into overlapping blocks, stride one cell, and every block
//! vector is divided by `sqrt(|v|² + ε²)`. Pixels past the last whole cell are
//! ignored.

use serde::{Deserialize, Serialize};

use super::{GrayImage, ImageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogParams {
    pub cell_size: usize,
    pub block_size: usize,
    pub bins: usize,
    /// Orientations over 0–360° instead of 0–180°.
    pub signed: bool,
    pub epsilon: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            cell_size: 8,
            block_size: 2,
            bins: 9,
            signed: false,
            epsilon: 1e-6,
        }
    }
}

impl HogParams {
    pub fn validate(&self) -> Result<()> {
        if self.cell_size == 0 || self.block_size == 0 {
            return Err(ImageError::BadHogParams(
                "cell and block sizes must be positive".into(),
            ));
        }
        if self.bins < 2 {
            return Err(ImageError::BadHogParams(format!(
                "need at least 2 bins, got {}",
                self.bins
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(ImageError::BadHogParams("epsilon must be positive".into()));
        }
        Ok(())
    }

    fn range_degrees(&self) -> f64 {
        if self.signed {
            360.0
        } else {
            180.0
        }
    }

    /// Layout for an image of the given size.
    pub fn layout(&self, width: usize, height: usize) -> Result<HogLayout> {
        self.validate()?;
        let min = self.cell_size * self.block_size;
        if width < min || height < min {
            return Err(ImageError::ImageTooSmall { width, height, min });
        }
        let cells_x = width / self.cell_size;
        let cells_y = height / self.cell_size;
        Ok(HogLayout {
            blocks_x: cells_x - self.block_size + 1,
            blocks_y: cells_y - self.block_size + 1,
            block_len: self.block_size * self.block_size * self.bins,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HogLayout {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub block_len: usize,
}

impl HogLayout {
    pub fn len(&self) -> usize {
        self.blocks_x * self.blocks_y * self.block_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HogDescriptor {
    pub layout: HogLayout,
    pub values: Vec<f64>,
}

impl HogDescriptor {
    pub fn block(&self, bx: usize, by: usize) -> &[f64] {
        let start = (by * self.layout.blocks_x + bx) * self.layout.block_len;
        &self.values[start..start + self.layout.block_len]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    /// All values on one comma-separated line.
    pub fn to_csv(&self) -> String {
        let mut line = self
            .values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        line.push('\n');
        line
    }
}

/// Per-cell orientation histograms, row-major over cells, each `bins` long.
pub fn cell_histograms(img: &GrayImage, params: &HogParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let cs = params.cell_size;
    let cells_x = img.width() / cs;
    let cells_y = img.height() / cs;
    let range = params.range_degrees();
    let bin_width = range / params.bins as f64;
    let mut hist = vec![vec![0.0; params.bins]; cells_x * cells_y];

    for y in 0..cells_y * cs {
        for x in 0..cells_x * cs {
            let (xi, yi) = (x as isize, y as isize);
            let gx = img.get_clamped(xi + 1, yi) - img.get_clamped(xi - 1, yi);
            let gy = img.get_clamped(xi, yi + 1) - img.get_clamped(xi, yi - 1);
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees().rem_euclid(range);
            if angle >= range {
                angle -= range;
            }
            let pos = angle / bin_width;
            let floor = pos.floor();
            let frac = pos - floor;
            let lo = floor as usize % params.bins;
            let hi = (lo + 1) % params.bins;
            let cell = &mut hist[(y / cs) * cells_x + x / cs];
            cell[lo] += magnitude * (1.0 - frac);
            cell[hi] += magnitude * frac;
        }
    }
    Ok(hist)
}

pub fn hog(img: &GrayImage, params: &HogParams) -> Result<HogDescriptor> {
    let layout = params.layout(img.width(), img.height())?;
    let hist = cell_histograms(img, params)?;
    let cells_x = img.width() / params.cell_size;
    let bs = params.block_size;
    let eps2 = params.epsilon * params.epsilon;

    let mut values = Vec::with_capacity(layout.len());
    let mut block = Vec::with_capacity(layout.block_len);
    for by in 0..layout.blocks_y {
        for bx in 0..layout.blocks_x {
            block.clear();
            for cy in by..by + bs {
                for cx in bx..bx + bs {
                    block.extend_from_slice(&hist[cy * cells_x + cx]);
                }
            }
            let norm = (block.iter().map(|v| v * v).sum::<f64>() + eps2).sqrt();
            values.extend(block.iter().map(|v| v / norm));
        }
    }
    Ok(HogDescriptor { layout, values })
}
