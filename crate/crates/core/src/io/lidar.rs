use std::fs;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geom::{Frame, PointCloud};

/// Bytes per record: `x, y, z, intensity, ring` as little-endian `f32`.
pub const LIDAR_RECORD_BYTES: usize = 20;

/// Parses nuScenes-layout LiDAR records into a cloud tagged `frame`.
pub fn parse_lidar_bin(bytes: &[u8], frame: Frame) -> std::result::Result<PointCloud, String> {
    if !bytes.len().is_multiple_of(LIDAR_RECORD_BYTES) {
        let offset = bytes.len() - bytes.len() % LIDAR_RECORD_BYTES;
        return Err(format!(
            "truncated record at byte offset {offset} ({} bytes is not a multiple of {LIDAR_RECORD_BYTES})",
            bytes.len()
        ));
    }
    let n = bytes.len() / LIDAR_RECORD_BYTES;
    let mut positions = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    let mut ring = Vec::with_capacity(n);
    for (r, record) in bytes.chunks_exact(LIDAR_RECORD_BYTES).enumerate() {
        let mut values = [0f32; 5];
        for (k, v) in values.iter_mut().enumerate() {
            let at = 4 * k;
            *v = f32::from_le_bytes(record[at..at + 4].try_into().expect("4-byte slice"));
            if !v.is_finite() {
                return Err(format!(
                    "non-finite value at byte offset {}",
                    r * LIDAR_RECORD_BYTES + at
                ));
            }
        }
        positions.push(Point3::new(f64::from(values[0]), f64::from(values[1]), f64::from(values[2])));
        intensity.push(values[3]);
        ring.push(values[4]);
    }
    PointCloud::with_attributes(positions, Some(intensity), Some(ring), frame).map_err(|e| e.to_string())
}

pub fn read_lidar_bin(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_lidar_bin(&bytes, Frame::Lidar).map_err(|m| Error::parse(path, m))
}

/// Encodes a cloud in the same layout; missing attributes are written as 0.
pub fn encode_lidar_bin(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * LIDAR_RECORD_BYTES);
    for (i, p) in cloud.positions().iter().enumerate() {
        let attrs = [
            cloud.intensity().map_or(0.0, |v| v[i]),
            cloud.ring().map_or(0.0, |v| v[i]),
        ];
        for v in [p.x as f32, p.y as f32, p.z as f32].into_iter().chain(attrs) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_lidar_bin(path: &Path, cloud: &PointCloud) -> Result<()> {
    super::write_file(path, &encode_lidar_bin(cloud))
}
