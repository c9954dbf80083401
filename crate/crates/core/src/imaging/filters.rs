//! Denoising filters and their by-name registry.
//!
//! Filters are addressed by a short spec string, `name` or `name:param`:
//! `median:1`, `gaussian:1.5`, `none`.

use std::fmt;

use super::{GrayImage, ImageError, Result};

/// A pre-processing filter applied before feature extraction.
pub trait Denoiser: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Spec string that reconstructs this filter through [`denoiser_from_spec`].
    fn spec(&self) -> String;

    fn apply(&self, img: &GrayImage) -> GrayImage;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianFilter {
    radius: usize,
}

impl MedianFilter {
    pub fn new(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(ImageError::BadRadius(radius));
        }
        Ok(MedianFilter { radius })
    }
}

impl Denoiser for MedianFilter {
    fn name(&self) -> &'static str {
        "median"
    }

    fn spec(&self) -> String {
        format!("median:{}", self.radius)
    }

    fn apply(&self, img: &GrayImage) -> GrayImage {
        median_filter(img, self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFilter {
    sigma: f64,
}

impl GaussianFilter {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(ImageError::BadSigma(sigma));
        }
        Ok(GaussianFilter { sigma })
    }
}

impl Denoiser for GaussianFilter {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn spec(&self) -> String {
        format!("gaussian:{}", self.sigma)
    }

    fn apply(&self, img: &GrayImage) -> GrayImage {
        separable_blur(img, &gaussian_kernel(self.sigma))
    }
}

/// Pass-through.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoFilter;

impl Denoiser for NoFilter {
    fn name(&self) -> &'static str {
        "none"
    }

    fn spec(&self) -> String {
        "none".to_string()
    }

    fn apply(&self, img: &GrayImage) -> GrayImage {
        img.clone()
    }
}

type Constructor = fn(Option<&str>) -> Result<Box<dyn Denoiser>>;

struct Registration {
    name: &'static str,
    build: Constructor,
}

fn parse_param<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| ImageError::UnknownFilter(format!("{name}:{raw}")))
}

static FILTERS: [Registration; 3] = [
    Registration {
        name: "median",
        build: |p| {
            let r = p.map(|p| parse_param("median", p)).transpose()?.unwrap_or(1);
            Ok(Box::new(MedianFilter::new(r)?))
        },
    },
    Registration {
        name: "gaussian",
        build: |p| {
            let s = p.map(|p| parse_param("gaussian", p)).transpose()?.unwrap_or(1.0);
            Ok(Box::new(GaussianFilter::new(s)?))
        },
    },
    Registration {
        name: "none",
        build: |p| match p {
            None => Ok(Box::new(NoFilter)),
            Some(p) => Err(ImageError::UnknownFilter(format!("none:{p}"))),
        },
    },
];

pub fn denoiser_names() -> Vec<&'static str> {
    FILTERS.iter().map(|r| r.name).collect()
}

/// Builds a filter from `name` or `name:param`.
pub fn denoiser_from_spec(spec: &str) -> Result<Box<dyn Denoiser>> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p)),
        None => (spec.trim(), None),
    };
    let entry = FILTERS
        .iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| ImageError::UnknownFilter(spec.to_string()))?;
    (entry.build)(param)
}

pub const DEFAULT_DENOISE: &str = "median:1";

fn median_filter(img: &GrayImage, radius: usize) -> GrayImage {
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mut window = Vec::with_capacity(side * side);
    let mut out = Vec::with_capacity(img.pixels().len());
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    window.push(img.get_clamped(x + dx, y + dy));
                }
            }
            let mid = window.len() / 2;
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            out.push(*m);
        }
    }
    GrayImage::new(img.width(), img.height(), out).expect("same geometry")
}

/// Median of each `(2r+1)²` neighborhood, borders replicated.
pub fn median_denoise(img: &GrayImage, radius: usize) -> Result<GrayImage> {
    Ok(MedianFilter::new(radius)?.apply(img))
}

/// Normalized 1-D Gaussian of radius `⌈3σ⌉`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn separable_blur(img: &GrayImage, kernel: &[f64]) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            horizontal[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * img.get(clamp(x as isize + k as isize - r, w), y))
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * horizontal[clamp(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    // GrayImage::new clamps to [0, 255]
    GrayImage::new(w, h, out).expect("same geometry")
}

pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    Ok(GaussianFilter::new(sigma)?.apply(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.gen_range(0..=255) as f64).unwrap()
    }

    /// Sort the whole neighborhood and take the middle element.
    fn naive_median(img: &GrayImage, r: isize) -> Vec<f64> {
        let mut out = Vec::new();
        for y in 0..img.height() as isize {
            for x in 0..img.width() as isize {
                let mut v = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        v.push(img.get_clamped(x + dx, y + dy));
                    }
                }
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                out.push(v[v.len() / 2]);
            }
        }
        out
    }

    /// Direct 2-D convolution with the outer-product kernel.
    fn naive_blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
        let radius = (3.0 * sigma).ceil() as isize;
        let mut k2 = Vec::new();
        let mut total = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                k2.push((dx, dy, w));
                total += w;
            }
        }
        let mut out = Vec::new();
        for y in 0..img.height() as isize {
            for x in 0..img.width() as isize {
                let s: f64 = k2.iter().map(|&(dx, dy, w)| w / total * img.get_clamped(x + dx, y + dy)).sum();
                out.push(s.clamp(0.0, 255.0));
            }
        }
        out
    }

    #[test]
    fn median_removes_salt() {
        let mut px = vec![0.0; 9];
        px[4] = 255.0;
        let img = GrayImage::new(3, 3, px).unwrap();
        assert_eq!(median_denoise(&img, 1).unwrap().get(1, 1), 0.0);
    }

    #[test]
    fn filters_preserve_constants() {
        let img = GrayImage::filled(7, 5, 42.0).unwrap();
        assert_eq!(median_denoise(&img, 2).unwrap(), img);
        let blurred = gaussian_blur(&img, 1.3).unwrap();
        assert!(blurred.pixels().iter().all(|&p| (p - 42.0).abs() < 1e-9));
    }

    #[test]
    fn median_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in 1..=2 {
            let img = random_image(&mut rng, 8, 8);
            assert_eq!(median_denoise(&img, r).unwrap().pixels(), naive_median(&img, r as isize).as_slice());
        }
    }

    #[test]
    fn median_idempotent_on_step() {
        let step = GrayImage::from_fn(10, 6, |x, _| if x < 4 { 10.0 } else { 200.0 }).unwrap();
        let once = median_denoise(&step, 1).unwrap();
        assert_eq!(once, step);
        assert_eq!(median_denoise(&once, 1).unwrap(), once);
    }

    #[test]
    fn kernel_normalized() {
        for sigma in [0.3, 0.5, 1.0, 1.7, 4.0] {
            let k = gaussian_kernel(sigma);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(k.len(), 2 * (3.0 * sigma).ceil() as usize + 1);
        }
    }

    #[test]
    fn separable_matches_2d_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let img = random_image(&mut rng, 16, 16);
        for sigma in [0.7, 1.0, 2.2] {
            let fast = gaussian_blur(&img, sigma).unwrap();
            let slow = naive_blur(&img, sigma);
            let worst = fast.pixels().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "sigma {sigma}: {worst}");
        }
    }

    #[test]
    fn bad_parameters() {
        let img = GrayImage::filled(2, 2, 0.0).unwrap();
        assert_eq!(median_denoise(&img, 0), Err(ImageError::BadRadius(0)));
        assert_eq!(gaussian_blur(&img, 0.0), Err(ImageError::BadSigma(0.0)));
        assert!(gaussian_blur(&img, f64::NAN).is_err());
    }

    #[test]
    fn registry_specs() {
        assert_eq!(denoiser_names(), vec!["median", "gaussian", "none"]);
        assert_eq!(denoiser_from_spec("median").unwrap().spec(), "median:1");
        assert_eq!(denoiser_from_spec("median:3").unwrap().spec(), "median:3");
        assert_eq!(denoiser_from_spec("gaussian:1.5").unwrap().spec(), "gaussian:1.5");
        assert_eq!(denoiser_from_spec("none").unwrap().name(), "none");
        assert!(matches!(denoiser_from_spec("bilateral"), Err(ImageError::UnknownFilter(_))));
        assert!(matches!(denoiser_from_spec("median:x"), Err(ImageError::UnknownFilter(_))));
        assert_eq!(denoiser_from_spec("median:0").unwrap_err(), ImageError::BadRadius(0));
        let spec = denoiser_from_spec(DEFAULT_DENOISE).unwrap().spec();
        assert_eq!(denoiser_from_spec(&spec).unwrap().spec(), spec);
    }
}
