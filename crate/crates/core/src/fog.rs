//! Depth-aware fog augmentation.
//!
//! Each channel becomes `I·t + A·(1 − t)` with transmittance `t = exp(−β·d)`,
//! evaluated in floating point, rounded half-up and clamped to `[0, 255]`.
//! Pixels without depth (`d = 0`) are treated as infinitely far away.

use image::RgbImage;
use thiserror::Error;

use crate::lift::DepthMap;

#[derive(Debug, Error, PartialEq)]
pub enum FogError {
    #[error("image is {image:?} but depth map is {depth:?}")]
    DimensionMismatch { image: (u32, u32), depth: (u32, u32) },
    #[error("invalid fog parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogParams {
    beta: f64,
    ambient: [f64; 3],
}

impl Default for FogParams {
    fn default() -> Self {
        Self {
            beta: 0.03,
            ambient: [255.0; 3],
        }
    }
}

impl FogParams {
    pub fn new(beta: f64, ambient: [f64; 3]) -> Result<Self, FogError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(FogError::InvalidParams(format!("beta {beta} must be finite and >= 0")));
        }
        if ambient.iter().any(|a| !(0.0..=255.0).contains(a)) {
            return Err(FogError::InvalidParams(format!("ambient {ambient:?} outside [0, 255]")));
        }
        Ok(Self { beta, ambient })
    }

    /// White ambient light.
    pub fn white(beta: f64) -> Result<Self, FogError> {
        Self::new(beta, [255.0; 3])
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ambient(&self) -> [f64; 3] {
        self.ambient
    }

    pub fn transmittance(&self, depth: f64) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else if depth <= 0.0 {
            0.0
        } else {
            (-self.beta * depth).exp()
        }
    }
}

/// Unrounded fogged intensity.
pub fn blend(intensity: f64, ambient: f64, t: f64) -> f64 {
    intensity * t + ambient * (1.0 - t)
}

/// Round half-up, then clamp to the 8-bit range.
pub fn quantize(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn apply_fog(img: &RgbImage, depth: &DepthMap, params: &FogParams) -> Result<RgbImage, FogError> {
    if img.dimensions() != (depth.width(), depth.height()) {
        return Err(FogError::DimensionMismatch {
            image: img.dimensions(),
            depth: (depth.width(), depth.height()),
        });
    }
    let mut out = img.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        let t = params.transmittance(f64::from(depth.get(x, y)));
        for (c, value) in px.0.iter_mut().enumerate() {
            *value = quantize(blend(f64::from(*value), params.ambient[c], t));
        }
    }
    Ok(out)
}
