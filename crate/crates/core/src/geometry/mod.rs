//! Line-based contour parameterization and the planar geometry around it.
//!
//! A region carries fixed boundary points `B_i` and lines `L_i` at angles
//! `theta_i`. A contour is determined by how far along each line the ice
//! edge sits; lines that cross land are split into ocean spans `R_{i,k}` and
//! land gaps `H_{i,k}`, and the model works with the ice-covered fraction of
//! the ocean part.

mod raster;
mod region;
mod repair;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use raster::{discretization_error, point_in_polygon, rasterize, shoelace_area, signed_area};
pub use region::{
    build_region_geometry, contour_from_lengths, length_from_proportion, outline_from_lengths,
    proportion_from_field, proportion_from_length, snap_to_boundary, GeometryKind, Line, LineLayout,
    Piece, RegionGeometry, Span,
};
pub use repair::{douglas_peucker, find_crossing, has_self_intersection, repair_self_intersections, segments_cross};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<F> {
    pub x: F,
    pub y: F,
}

impl<F: Scalar> Point<F> {
    pub fn new(x: F, y: F) -> Self {
        Point { x, y }
    }

    /// Point at distance `t` from `self` in direction `angle`.
    pub fn offset(self, angle: F, t: F) -> Self {
        Point { x: self.x + t * angle.cos(), y: self.y + t * angle.sin() }
    }

    pub fn distance(self, other: Self) -> F {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A closed polygon: the last point connects back to the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour<F> {
    points: Vec<Point<F>>,
}

impl<F: Scalar> Contour<F> {
    pub fn new(points: Vec<Point<F>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::domain(format!("contour needs at least 3 points, got {}", points.len())));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::domain("contour points must be finite"));
        }
        Ok(Contour { points })
    }

    pub fn points(&self) -> &[Point<F>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point<F>> {
        self.points
    }

    /// Enclosed area (absolute shoelace area).
    pub fn area(&self) -> F {
        shoelace_area(&self.points)
    }

    /// Same polygon with the point sequence rotated left by `k`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut points = self.points.clone();
        let n = points.len();
        points.rotate_left(k % n);
        Contour { points }
    }
}
