//! Lifting 2D instance masks into camera-frame 3D point segments, either from
//! projected LiDAR or from dense depth maps.
//!
//! Pixels are rasterized with `floor(u), floor(v)`. Several LiDAR points may
//! fall on one pixel; all of them are kept.

use nalgebra::Point3;
use thiserror::Error;

use crate::geom::{CameraModel, Frame, PixelPointMap, PointCloud};

/// Default pixel stride for depth-based lifting.
pub const DEFAULT_STRIDE: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum LiftError {
    #[error("mask has no member pixels")]
    EmptyMask,
    #[error("bitmap has {len} entries, expected {expected}")]
    BitmapSize { len: usize, expected: usize },
    #[error("dimension mismatch: {what} is {got:?}, expected {expected:?}")]
    DimensionMismatch {
        what: &'static str,
        got: (u32, u32),
        expected: (u32, u32),
    },
    #[error("depth value {value} at pixel {index} is negative or non-finite")]
    InvalidDepthValue { index: usize, value: f32 },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("segment for detection {0} captured no points")]
    EmptySegment(String),
}

/// Binary membership mask of one instance, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMask {
    width: u32,
    height: u32,
    instance_id: u32,
    bitmap: Vec<bool>,
}

impl InstanceMask {
    pub fn new(width: u32, height: u32, instance_id: u32, bitmap: Vec<bool>) -> Result<Self, LiftError> {
        let expected = width as usize * height as usize;
        if bitmap.len() != expected {
            return Err(LiftError::BitmapSize {
                len: bitmap.len(),
                expected,
            });
        }
        if !bitmap.iter().any(|&b| b) {
            return Err(LiftError::EmptyMask);
        }
        Ok(Self {
            width,
            height,
            instance_id,
            bitmap,
        })
    }

    /// Mask of every pixel carrying `instance_id` in an instance-id map.
    pub fn from_id_map(width: u32, height: u32, ids: &[u16], instance_id: u32) -> Result<Self, LiftError> {
        let bitmap = ids.iter().map(|&v| u32::from(v) == instance_id).collect();
        Self::new(width, height, instance_id, bitmap)
    }

    /// Axis-aligned pixel rectangle `[x0, x1) × [y0, y1)`.
    pub fn from_rect(width: u32, height: u32, instance_id: u32, rect: [u32; 4]) -> Result<Self, LiftError> {
        let [x0, y0, x1, y1] = rect;
        let mut bitmap = vec![false; width as usize * height as usize];
        for y in y0..y1.min(height) {
            for x in x0..x1.min(width) {
                bitmap[y as usize * width as usize + x as usize] = true;
            }
        }
        Self::new(width, height, instance_id, bitmap)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn instance_id(&self) -> u32 {
        self.instance_id
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bitmap[y as usize * self.width as usize + x as usize]
    }

    /// Membership of the pixel a sub-pixel coordinate falls in.
    pub fn contains_uv(&self, u: f64, v: f64) -> bool {
        if !(u >= 0.0 && v >= 0.0) {
            return false;
        }
        let (x, y) = (u.floor(), v.floor());
        x < self.width as f64 && y < self.height as f64 && self.contains(x as u32, y as u32)
    }

    pub fn member_count(&self) -> usize {
        self.bitmap.iter().filter(|&&b| b).count()
    }

    pub fn bitmap(&self) -> &[bool] {
        &self.bitmap
    }
}

/// Per-pixel metric depth, row-major; `0` marks an invalid sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    depth: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, depth: Vec<f32>) -> Result<Self, LiftError> {
        let expected = width as usize * height as usize;
        if depth.len() != expected {
            return Err(LiftError::BitmapSize {
                len: depth.len(),
                expected,
            });
        }
        if let Some((index, &value)) = depth
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d >= 0.0))
        {
            return Err(LiftError::InvalidDepthValue { index, value });
        }
        Ok(Self { width, height, depth })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.depth
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.depth[y as usize * self.width as usize + x as usize]
    }
}

/// Camera-frame points captured by one detection's mask.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSegment {
    pub detection_ref: String,
    pub points: PointCloud,
    pub pixel_count: usize,
    pub hit_count: usize,
}

/// Collects the cloud points whose projected pixel is a mask member, in
/// source-index order.
pub fn lift_mask_lidar(
    mask: &InstanceMask,
    map: &PixelPointMap,
    cloud: &PointCloud,
    detection_ref: &str,
) -> Result<LiftedSegment, LiftError> {
    if (map.width, map.height) != (mask.width, mask.height) {
        return Err(LiftError::DimensionMismatch {
            what: "pixel map",
            got: (map.width, map.height),
            expected: (mask.width, mask.height),
        });
    }
    let mut indices: Vec<usize> = map
        .pixel_uv
        .iter()
        .zip(&map.source_index)
        .filter(|([u, v], _)| mask.contains_uv(*u, *v))
        .map(|(_, &i)| i)
        .collect();
    indices.sort_unstable();
    if indices.is_empty() {
        return Err(LiftError::EmptySegment(detection_ref.to_string()));
    }
    let points = cloud.select(&indices);
    Ok(LiftedSegment {
        detection_ref: detection_ref.to_string(),
        hit_count: points.len(),
        points,
        pixel_count: mask.member_count(),
    })
}

fn check_stride(stride: usize) -> Result<(), LiftError> {
    if stride == 0 {
        Err(LiftError::ZeroStride)
    } else {
        Ok(())
    }
}

fn check_depth_dims(depth: &DepthMap, width: u32, height: u32, what: &'static str) -> Result<(), LiftError> {
    if (depth.width, depth.height) != (width, height) {
        return Err(LiftError::DimensionMismatch {
            what,
            got: (depth.width, depth.height),
            expected: (width, height),
        });
    }
    Ok(())
}

/// Back-projects every `stride`-th member pixel (row-major over members) that
/// has a valid depth sample. Pixel `(x, y)` is back-projected from its
/// integer corner coordinate.
pub fn lift_mask_depth(
    mask: &InstanceMask,
    depth: &DepthMap,
    cam: &CameraModel,
    stride: usize,
    detection_ref: &str,
) -> Result<LiftedSegment, LiftError> {
    check_stride(stride)?;
    check_depth_dims(depth, mask.width, mask.height, "depth map")?;
    let width = mask.width as usize;
    let points: Vec<Point3<f64>> = mask
        .bitmap
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .step_by(stride)
        .filter_map(|(i, _)| {
            let d = depth.depth[i];
            (d > 0.0).then(|| pixel_point(cam, i % width, i / width, d))
        })
        .collect();
    if points.is_empty() {
        return Err(LiftError::EmptySegment(detection_ref.to_string()));
    }
    let hit_count = points.len();
    Ok(LiftedSegment {
        detection_ref: detection_ref.to_string(),
        points: PointCloud::new(points, Frame::Camera).expect("finite by construction"),
        pixel_count: mask.member_count(),
        hit_count,
    })
}

/// Dense camera-frame cloud from every `stride`-th pixel (row-major linear
/// index) holding a valid depth.
pub fn depth_to_pseudocloud(depth: &DepthMap, cam: &CameraModel, stride: usize) -> Result<PointCloud, LiftError> {
    check_stride(stride)?;
    check_depth_dims(depth, cam.width, cam.height, "depth map")?;
    let width = depth.width as usize;
    let points = depth
        .depth
        .iter()
        .enumerate()
        .step_by(stride)
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, &d)| pixel_point(cam, i % width, i / width, d))
        .collect();
    Ok(PointCloud::new(points, Frame::Camera).expect("finite by construction"))
}

fn pixel_point(cam: &CameraModel, x: usize, y: usize, d: f32) -> Point3<f64> {
    cam.backproject(x as f64, y as f64, f64::from(d))
        .expect("depth checked positive")
}
