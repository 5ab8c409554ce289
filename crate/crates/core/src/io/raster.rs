//! Image, depth and mask files.
//!
//! Depth comes either as a 16-bit grayscale PNG in millimeters or as raw
//! little-endian `f32` meters behind a 16-byte header: the magic `DF32`, then
//! width, height and a reserved zero as little-endian `u32`. In both formats
//! `0` marks an invalid sample.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::{DepthMap, InstanceMask};

pub const RAW_DEPTH_MAGIC: [u8; 4] = *b"DF32";
const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

fn decode_png(path: &Path, bytes: &[u8]) -> Result<DynamicImage> {
    image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| Error::parse(path, e.to_string()))
}

fn encode_png(img: &DynamicImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("PNG encoding into memory");
    out.into_inner()
}

pub fn read_rgb_png(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_png(path, &bytes)?.to_rgb8())
}

pub fn write_rgb_png(path: &Path, img: &RgbImage) -> Result<()> {
    super::write_file(path, &encode_png(&DynamicImage::ImageRgb8(img.clone())))
}

pub fn parse_depth(bytes: &[u8]) -> std::result::Result<DepthMap, String> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| e.to_string())?;
        let DynamicImage::ImageLuma16(gray) = img else {
            return Err(format!("depth PNG must be 16-bit grayscale, found {:?}", img.color()));
        };
        let (w, h) = gray.dimensions();
        let meters = gray.into_raw().into_iter().map(|mm| f32::from(mm) / 1000.0).collect();
        return DepthMap::new(w, h, meters).map_err(|e| e.to_string());
    }
    if bytes.len() < 16 || bytes[..4] != RAW_DEPTH_MAGIC {
        return Err("neither a PNG nor a raw DF32 depth file".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    let (w, h) = (word(1), word(2));
    let expected = 16 + 4 * w as usize * h as usize;
    if bytes.len() != expected {
        return Err(format!("raw depth of {w}x{h} needs {expected} bytes, found {}", bytes.len()));
    }
    let values = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    DepthMap::new(w, h, values).map_err(|e| e.to_string())
}

pub fn read_depth(path: &Path) -> Result<DepthMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_depth(&bytes).map_err(|m| Error::parse(path, m))
}

pub fn encode_depth_raw(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * depth.values().len());
    out.extend_from_slice(&RAW_DEPTH_MAGIC);
    for v in [depth.width(), depth.height(), 0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in depth.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// 16-bit millimeter PNG; depths are rounded to the nearest millimeter and
/// saturate at 65.535 m.
pub fn encode_depth_png(depth: &DepthMap) -> Vec<u8> {
    let mm: Vec<u16> = depth
        .values()
        .iter()
        .map(|&d| (f64::from(d) * 1000.0).round().clamp(0.0, 65535.0) as u16)
        .collect();
    let img = ImageBuffer::<Luma<u16>, _>::from_raw(depth.width(), depth.height(), mm).expect("sized buffer");
    encode_png(&DynamicImage::ImageLuma16(img))
}

/// Instance-id map, row-major; 0 is background.
#[derive(Debug, Clone, PartialEq)]
pub struct IdMap {
    pub width: u32,
    pub height: u32,
    pub ids: Vec<u16>,
}

pub fn read_id_map(path: &Path) -> Result<IdMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = decode_png(path, &bytes)?;
    let (width, height) = (img.width(), img.height());
    let ids = match img {
        DynamicImage::ImageLuma16(g) => g.into_raw(),
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(u16::from).collect(),
        other => {
            return Err(Error::parse(
                path,
                format!("mask PNG must be grayscale, found {:?}", other.color()),
            ))
        }
    };
    Ok(IdMap { width, height, ids })
}

pub fn encode_id_map(map: &IdMap) -> Vec<u8> {
    let img = ImageBuffer::<Luma<u16>, _>::from_raw(map.width, map.height, map.ids.clone()).expect("sized buffer");
    encode_png(&DynamicImage::ImageLuma16(img))
}

/// COCO-style uncompressed run-length encoding: alternating background and
/// foreground run lengths, starting with background, over pixels in
/// column-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rle {
    /// `[height, width]`.
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl Rle {
    pub fn decode(&self, instance_id: u32) -> std::result::Result<InstanceMask, String> {
        let [h, w] = self.size;
        let total = h as usize * w as usize;
        let sum: usize = self.counts.iter().map(|&c| c as usize).sum();
        if sum != total {
            return Err(format!("RLE counts sum to {sum}, expected {total}"));
        }
        let mut bitmap = vec![false; total];
        let mut pos = 0usize;
        for (k, &run) in self.counts.iter().enumerate() {
            if k % 2 == 1 {
                for p in pos..pos + run as usize {
                    let (x, y) = (p / h as usize, p % h as usize);
                    bitmap[y * w as usize + x] = true;
                }
            }
            pos += run as usize;
        }
        InstanceMask::new(w, h, instance_id, bitmap).map_err(|e| e.to_string())
    }

    pub fn encode(mask: &InstanceMask) -> Self {
        let (w, h) = (mask.width() as usize, mask.height() as usize);
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for x in 0..w {
            for y in 0..h {
                let bit = mask.bitmap()[y * w + x];
                if bit != current {
                    counts.push(run);
                    run = 0;
                    current = bit;
                }
                run += 1;
            }
        }
        counts.push(run);
        Self {
            size: [h as u32, w as u32],
            counts,
        }
    }
}
