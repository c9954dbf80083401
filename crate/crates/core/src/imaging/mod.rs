//! Grayscale images, PNM codecs, denoising filters and HOG descriptors.

pub mod filters;
pub mod hog;
pub mod pnm;

use thiserror::Error;

pub use filters::{gaussian_blur, gaussian_kernel, median_denoise, Denoiser};
pub use hog::{hog, HogDescriptor, HogLayout, HogParams};
pub use pnm::{decode_pnm, encode_pgm, PnmEncoding};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImageError {
    #[error("bad magic number: expected P2, P3, P5 or P6")]
    BadMagic,
    #[error("image data is truncated")]
    TruncatedData,
    #[error("unsupported maxval {0} (must be 1..=255)")]
    MaxvalUnsupported(u32),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("invalid dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("radius must be at least 1, got {0}")]
    BadRadius(usize),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("image {width}x{height} is smaller than the {min}x{min} HOG block")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid HOG parameters: {0}")]
    BadHogParams(String),
    #[error("unknown filter {0:?}")]
    UnknownFilter(String),
}

pub type Result<T> = std::result::Result<T, ImageError>;

/// Row-major intensity grid with values in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(ImageError::BadDimensions { width, height });
        }
        let pixels = pixels.into_iter().map(clamp_pixel).collect();
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// The image turned upside down and mirrored (a 180° rotation).
    pub fn rotated_180(&self) -> GrayImage {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }
}

fn clamp_pixel(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 255.0)
    }
}
