//! Training-free 3D box inference from 2D instance masks.
//!
//! Masks are lifted to 3D through LiDAR or a dense depth map, filtered with
//! DBSCAN, fitted with a minimum-area oriented rectangle, and scored with the
//! nuScenes detection metrics. A depth-aware fog model supports robustness
//! experiments.

pub mod bev;
pub mod boxes;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod fog;
pub mod geom;
pub mod io;
pub mod lift;
pub mod pipeline;

pub use error::{Error, Result};
