use std::path::Path;

use super::idx::{read_images, read_labels, IdxImages};
use crate::error::{Error, Result};

pub const SIDE: usize = 8;
pub const PIXELS: usize = SIDE * SIDE;
pub const CLASSES: usize = 4;
/// Size of the evaluation set.
pub const EVAL_IMAGES: usize = 100;

/// Binary 8×8 image, row-major.
pub type Image = [u8; PIXELS];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub images: Vec<Image>,
    pub labels: Vec<u8>,
}

/// Bilinear resample of a `side × side` image (intensities in [0, 1]) to
/// 32 × 32, then 4 × 4 box averages down to 8 × 8.
pub fn downscale(src: &[f64], side: usize) -> [f64; PIXELS] {
    const MID: usize = 32;
    let scale = side as f64 / MID as f64;
    let at = |r: usize, c: usize| src[r * side + c];
    let coord = |k: usize| {
        let x = ((k as f64 + 0.5) * scale - 0.5).clamp(0.0, (side - 1) as f64);
        let i = (x.floor() as usize).min(side - 1);
        let j = (i + 1).min(side - 1);
        (i, j, x - i as f64)
    };
    let mut mid = [0.0; MID * MID];
    for r in 0..MID {
        let (r0, r1, fr) = coord(r);
        for c in 0..MID {
            let (c0, c1, fc) = coord(c);
            let top = at(r0, c0) * (1.0 - fc) + at(r0, c1) * fc;
            let bot = at(r1, c0) * (1.0 - fc) + at(r1, c1) * fc;
            mid[r * MID + c] = top * (1.0 - fr) + bot * fr;
        }
    }
    let mut out = [0.0; PIXELS];
    let k = MID / SIDE;
    for r in 0..SIDE {
        for c in 0..SIDE {
            let mut s = 0.0;
            for dr in 0..k {
                for dc in 0..k {
                    s += mid[(r * k + dr) * MID + c * k + dc];
                }
            }
            out[r * SIDE + c] = s / (k * k) as f64;
        }
    }
    out
}

/// 8-bit square image to binary 8×8, thresholding the downscaled intensity
/// at one half.
pub fn preprocess(pixels: &[u8], side: usize) -> Image {
    let norm: Vec<f64> = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    downscale(&norm, side).map(|v| (v >= 0.5) as u8)
}

impl Dataset {
    /// Images with labels 0..4, in file order, at most `limit` of them.
    pub fn from_idx(images: &IdxImages, labels: &[u8], limit: Option<usize>) -> Result<Self> {
        if images.count != labels.len() {
            return Err(Error::Format(format!("{} images but {} labels", images.count, labels.len())));
        }
        if images.rows != images.cols {
            return Err(Error::Format(format!("images are {}x{}, expected square", images.rows, images.cols)));
        }
        let mut ds = Dataset {
            images: vec![],
            labels: vec![],
        };
        for (k, &label) in labels.iter().enumerate() {
            if limit.is_some_and(|n| ds.len() >= n) {
                break;
            }
            if (label as usize) < CLASSES {
                ds.images.push(preprocess(images.image(k), images.rows));
                ds.labels.push(label);
            }
        }
        Ok(ds)
    }

    /// Every 0–3 image in a pair of IDX files.
    pub fn load(image_path: impl AsRef<Path>, label_path: impl AsRef<Path>, limit: Option<usize>) -> Result<Self> {
        Self::from_idx(&read_images(image_path)?, &read_labels(label_path)?, limit)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// The evaluation set: the first 100 test images labelled 0–3.
pub fn ingest_mnist(image_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<Dataset> {
    let ds = Dataset::load(image_path, label_path, Some(EVAL_IMAGES))?;
    if ds.len() < EVAL_IMAGES {
        return Err(Error::Dataset(format!("only {} images labelled 0-3, need {EVAL_IMAGES}", ds.len())));
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_and_saturated() {
        assert_eq!(preprocess(&[0; 784], 28), [0; PIXELS]);
        assert_eq!(preprocess(&[255; 784], 28), [1; PIXELS]);
    }

    #[test]
    fn constant_image_is_preserved() {
        let out = downscale(&[0.37; 784], 28);
        assert!(out.iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn left_half_stays_left() {
        let mut px = [0u8; 784];
        for r in 0..28 {
            for c in 0..14 {
                px[r * 28 + c] = 255;
            }
        }
        let img = preprocess(&px, 28);
        for r in 0..8 {
            assert_eq!(&img[r * 8..r * 8 + 8], &[1, 1, 1, 1, 0, 0, 0, 0]);
        }
    }

    #[test]
    fn filters_labels_and_limits() {
        let images = IdxImages {
            count: 6,
            rows: 28,
            cols: 28,
            pixels: vec![0; 6 * 784],
        };
        let labels = [5, 0, 3, 9, 1, 2];
        let ds = Dataset::from_idx(&images, &labels, Some(3)).unwrap();
        assert_eq!(ds.labels, vec![0, 3, 1]);
        assert!(Dataset::from_idx(&images, &labels[..5], None).is_err());
    }
}
