//! Fire localisation: the bounding rectangle of the brightest pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Model, Tensor};

/// Default nearest-rank quantile for "brightest pixels".
pub const DEFAULT_QUANTILE: f64 = 0.99;

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Input(format!("image must be non-empty, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::dim(
                "image",
                format!("{width}x{height} image needs {} pixels, got {}", width * height, pixels.len()),
            ));
        }
        Ok(GrayImage { width, height, pixels })
    }

    /// Luminance as the mean of the three channels of interleaved RGB.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::dim(
                "rgb image",
                format!("{width}x{height} RGB needs {} bytes, got {}", width * height * 3, rgb.len()),
            ));
        }
        let pixels = rgb
            .chunks_exact(3)
            .map(|c| ((c[0] as u16 + c[1] as u16 + c[2] as u16 + 1) / 3) as u8)
            .collect();
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// `[1, H, W]` tensor with pixels scaled into [0, 1].
    pub fn to_tensor(&self) -> Tensor {
        let data = self.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
        Tensor::new(vec![1, self.height, self.width], data).expect("image tensor has a consistent shape")
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    /// Pixel count of the rectangle, edges included.
    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn encloses(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min && self.y_min <= other.y_min && self.x_max >= other.x_max && self.y_max >= other.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Fire,
    NoFire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: Label,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoundingBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_px: Option<usize>,
}

impl Detection {
    pub fn is_fire(&self) -> bool {
        self.label == Label::Fire
    }
}

/// Luminance at the nearest-rank `quantile` (rank `ceil(q * N)` of the
/// ascending pixel values).
pub fn brightness_threshold(image: &GrayImage, quantile: f64) -> Result<u8> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::Domain(format!("quantile must lie in (0, 1], got {quantile}")));
    }
    let mut histogram = [0usize; 256];
    for &p in &image.pixels {
        histogram[p as usize] += 1;
    }
    let n = image.pixels.len();
    let rank = ((quantile * n as f64).ceil() as usize).clamp(1, n);
    let mut seen = 0;
    for (value, &count) in histogram.iter().enumerate() {
        seen += count;
        if seen >= rank {
            return Ok(value as u8);
        }
    }
    unreachable!("rank never exceeds the pixel count")
}

/// Coordinates `(x, y)` of every pixel at or above the quantile threshold,
/// in row-major order. Never empty: the brightest pixel always qualifies.
pub fn threshold_bright(image: &GrayImage, quantile: f64) -> Result<Vec<(usize, usize)>> {
    let t = brightness_threshold(image, quantile)?;
    Ok(image
        .pixels
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= t)
        .map(|(i, _)| (i % image.width, i / image.width))
        .collect())
}

pub fn bounding_box(points: &[(usize, usize)]) -> Result<BoundingBox> {
    let (&(x0, y0), rest) = points
        .split_first()
        .ok_or_else(|| Error::Input("cannot bound an empty set of pixels".into()))?;
    Ok(rest.iter().fold(
        BoundingBox {
            x_min: x0,
            y_min: y0,
            x_max: x0,
            y_max: y0,
        },
        |b, &(x, y)| BoundingBox {
            x_min: b.x_min.min(x),
            y_min: b.y_min.min(y),
            x_max: b.x_max.max(x),
            y_max: b.y_max.max(y),
        },
    ))
}

/// Box around the brightest pixels.
pub fn locate(image: &GrayImage, quantile: f64) -> Result<BoundingBox> {
    bounding_box(&threshold_bright(image, quantile)?)
}

/// Classifies the image and, when it is fire (p >= 0.5), attaches the
/// brightest-pixel rectangle and its area.
pub fn detect_fire(model: &Model, image: &GrayImage, quantile: f64) -> Result<Detection> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::Domain(format!("quantile must lie in (0, 1], got {quantile}")));
    }
    let probability = model.predict(&image.to_tensor())?;
    if probability >= 0.5 {
        let bbox = locate(image, quantile)?;
        Ok(Detection {
            label: Label::Fire,
            probability,
            bbox: Some(bbox),
            area_px: Some(bbox.area()),
        })
    } else {
        Ok(Detection {
            label: Label::NoFire,
            probability,
            bbox: None,
            area_px: None,
        })
    }
}
