//! Pinhole intrinsics and projection.

use nalgebra::{Matrix3, Point2, Point3, Vector3};

use super::bbox::{BBox, ImageSize};
use super::pose::{Extrinsics, Pose6DoF};
use crate::error::{Error, Result};

/// Smallest camera-frame depth accepted by projection.
pub const MIN_DEPTH: f64 = 1e-9;

/// Pinhole camera `[[f, 0, cx], [0, f, cy], [0, 0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    focal: f64,
    cx: f64,
    cy: f64,
}

impl Intrinsics {
    pub fn new(focal: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(focal.is_finite() && focal > 0.0) {
            return Err(Error::InvalidInput(format!("focal length must be positive, got {focal}")));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::InvalidInput("principal point must be finite".into()));
        }
        Ok(Intrinsics { focal, cx, cy })
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.focal, 0.0, self.cx, 0.0, self.focal, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        let inv_f = 1.0 / self.focal;
        Matrix3::new(
            inv_f,
            0.0,
            -self.cx * inv_f,
            0.0,
            inv_f,
            -self.cy * inv_f,
            0.0,
            0.0,
            1.0,
        )
    }
}

fn check_dims(w: f64, h: f64) -> Result<()> {
    if w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimensions must be positive, got {w}x{h}")))
    }
}

/// Camera of a face crop in crop-local pixels: `f = w_bb + h_bb`, principal point at the crop center.
pub fn crop_intrinsics(w_bb: f64, h_bb: f64) -> Result<Intrinsics> {
    check_dims(w_bb, h_bb)?;
    Intrinsics::new(w_bb + h_bb, w_bb / 2.0, h_bb / 2.0)
}

/// Camera with the image focal length `w + h` and principal point at the box center
/// in image coordinates.
pub fn box_intrinsics(b: &BBox, image: ImageSize) -> Result<Intrinsics> {
    check_dims(image.width(), image.height())?;
    let (cx, cy) = (b.width() / 2.0, b.height() / 2.0);
    Intrinsics::new(image.width() + image.height(), cx + b.x(), cy + b.y())
}

/// Camera of the whole image: `f = w + h`, principal point at the image center.
pub fn image_intrinsics(image: ImageSize) -> Result<Intrinsics> {
    check_dims(image.width(), image.height())?;
    Intrinsics::new(
        image.width() + image.height(),
        image.width() / 2.0,
        image.height() / 2.0,
    )
}

/// Project model points through `K [R | t]`.
pub fn project(points: &[Point3<f64>], pose: &Pose6DoF, k: &Intrinsics) -> Result<Vec<Point2<f64>>> {
    project_extrinsics(points, &pose.extrinsics(), k)
}

/// Project through an arbitrary `K [L | t]`, `L` not necessarily a rotation.
pub fn project_extrinsics(
    points: &[Point3<f64>],
    ext: &Extrinsics,
    k: &Intrinsics,
) -> Result<Vec<Point2<f64>>> {
    let km = k.matrix();
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let cam: Vector3<f64> = ext.linear * p.coords + ext.translation;
            if !(cam.z > MIN_DEPTH) {
                return Err(Error::BehindCamera { index, depth: cam.z });
            }
            let h = km * cam;
            Ok(Point2::new(h.x / h.z, h.y / h.z))
        })
        .collect()
}
