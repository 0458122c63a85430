//! Geometric augmentation that keeps image-frame pose labels consistent.
//!
//! Applied in the order crop, mirror, scale. Scaling leaves poses untouched
//! because the image camera's focal length and principal point scale with the
//! image. Mirroring conjugates the pose by `diag(-1, 1, 1)`. Cropping re-expresses
//! the pose against the camera of the cropped image.

use nalgebra::{Point2, Vector3};
use rand::Rng;

use super::{FaceAnnotation, ImageRecord};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize, Pose6DoF, RotationVector};
use crate::transform::{rebase_to_subimage, ConversionMode};

/// Landmark index permutation under horizontal mirroring, 68-point layout.
pub const MIRROR_68: [usize; 68] = [
    16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0, // jaw
    26, 25, 24, 23, 22, 21, 20, 19, 18, 17, // brows
    27, 28, 29, 30, // nose bridge
    35, 34, 33, 32, 31, // nostrils
    45, 44, 43, 42, 47, 46, // right eye from left
    39, 38, 37, 36, 41, 40, // left eye from right
    54, 53, 52, 51, 50, 49, 48, 59, 58, 57, 56, 55, // outer lip
    64, 63, 62, 61, 60, 67, 66, 65, // inner lip
];

const MIRROR_5: [usize; 5] = [1, 0, 2, 4, 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentSpec {
    pub mirror: bool,
    pub scale: f64,
    /// Region of the source image to keep.
    pub crop: Option<BBox>,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec { mirror: false, scale: 1.0, crop: None }
    }
}

impl AugmentSpec {
    fn validate(&self, size: ImageSize) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {}", self.scale)));
        }
        if let Some(c) = &self.crop {
            if !c.within(size) {
                return Err(Error::InvalidInput(format!(
                    "crop {:?} is not inside the {}x{} image",
                    c.to_array(),
                    size.width(),
                    size.height()
                )));
            }
        }
        Ok(())
    }
}

/// Multi-scale training sizes: the shorter side goes to one of `min_sizes`
/// unless that pushes the longer side past `max_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePolicy {
    pub min_sizes: Vec<f64>,
    pub max_size: f64,
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy { min_sizes: vec![640.0, 672.0, 704.0, 736.0, 768.0, 800.0], max_size: 1400.0 }
    }
}

impl ScalePolicy {
    pub fn scale_for(&self, size: ImageSize, min_size: f64) -> f64 {
        let short = size.width().min(size.height());
        let long = size.width().max(size.height());
        (min_size / short).min(self.max_size / long)
    }
}

/// Random augmentation draws.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentSampler {
    pub mirror_prob: f64,
    pub crop_prob: f64,
    /// Smallest crop side as a fraction of the image side.
    pub min_crop_fraction: f64,
    pub scales: ScalePolicy,
}

impl Default for AugmentSampler {
    fn default() -> Self {
        AugmentSampler {
            mirror_prob: 0.5,
            crop_prob: 0.5,
            min_crop_fraction: 0.6,
            scales: ScalePolicy::default(),
        }
    }
}

impl AugmentSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, size: ImageSize) -> AugmentSpec {
        let crop = if rng.random::<f64>() < self.crop_prob {
            let fw = rng.random_range(self.min_crop_fraction..=1.0);
            let fh = rng.random_range(self.min_crop_fraction..=1.0);
            let (w, h) = (size.width() * fw, size.height() * fh);
            let x = rng.random_range(0.0..=(size.width() - w));
            let y = rng.random_range(0.0..=(size.height() - h));
            BBox::new(x, y, w, h).ok()
        } else {
            None
        };
        let mirror = rng.random::<f64>() < self.mirror_prob;
        let cropped = crop.map_or(size, |c| ImageSize::new(c.width(), c.height()).unwrap_or(size));
        let scale = if self.scales.min_sizes.is_empty() {
            1.0
        } else {
            let pick = self.scales.min_sizes[rng.random_range(0..self.scales.min_sizes.len())];
            self.scales.scale_for(cropped, pick)
        };
        AugmentSpec { mirror, scale, crop }
    }
}

/// Mirror a pose across the vertical image axis through the principal point.
pub fn mirror_pose(p: &Pose6DoF) -> Pose6DoF {
    let r = p.rotation.as_vector();
    let t = &p.translation;
    Pose6DoF::new(RotationVector::new(r.x, -r.y, -r.z), Vector3::new(-t.x, t.y, t.z))
}

fn mirror_landmarks(points: &[Point2<f64>], width: f64) -> Vec<Point2<f64>> {
    let flipped = |p: &Point2<f64>| Point2::new(width - p.x, p.y);
    match points.len() {
        5 => MIRROR_5.iter().map(|&i| flipped(&points[i])).collect(),
        68 => MIRROR_68.iter().map(|&i| flipped(&points[i])).collect(),
        _ => points.iter().map(flipped).collect(),
    }
}

fn map_landmarks(
    lm: &Option<Vec<Point2<f64>>>,
    f: impl Fn(&[Point2<f64>]) -> Vec<Point2<f64>>,
) -> Option<Vec<Point2<f64>>> {
    lm.as_ref().map(|v| f(v))
}

fn crop_record(rec: &ImageRecord, region: &BBox) -> Result<ImageRecord> {
    let size = ImageSize::new(region.width(), region.height())?;
    let shift = |pts: &[Point2<f64>]| {
        pts.iter().map(|p| Point2::new(p.x - region.x(), p.y - region.y())).collect()
    };
    let mut faces = Vec::new();
    for face in &rec.faces {
        if !region.contains(&face.gt_box.center()) {
            continue;
        }
        let pose_global = match &face.pose_global {
            Some(p) => Some(rebase_to_subimage(p, region, rec.size, ConversionMode::Orthogonalized)?.0.pose),
            None => None,
        };
        faces.push(FaceAnnotation {
            gt_box: face.gt_box.translated(-region.x(), -region.y()),
            landmarks5: map_landmarks(&face.landmarks5, shift),
            landmarks68: map_landmarks(&face.landmarks68, shift),
            pose_global,
            label_source: face.label_source,
        });
    }
    Ok(ImageRecord { path: rec.path.clone(), size, faces })
}

fn mirror_record(rec: &ImageRecord) -> ImageRecord {
    let w = rec.size.width();
    let faces = rec
        .faces
        .iter()
        .map(|face| FaceAnnotation {
            gt_box: face.gt_box.mirrored(w),
            landmarks5: map_landmarks(&face.landmarks5, |p| mirror_landmarks(p, w)),
            landmarks68: map_landmarks(&face.landmarks68, |p| mirror_landmarks(p, w)),
            pose_global: face.pose_global.as_ref().map(mirror_pose),
            label_source: face.label_source,
        })
        .collect();
    ImageRecord { path: rec.path.clone(), size: rec.size, faces }
}

fn scale_record(rec: &ImageRecord, s: f64) -> Result<ImageRecord> {
    let size = ImageSize::new(rec.size.width() * s, rec.size.height() * s)?;
    let scale = |pts: &[Point2<f64>]| pts.iter().map(|p| Point2::new(p.x * s, p.y * s)).collect();
    let faces = rec
        .faces
        .iter()
        .map(|face| {
            Ok(FaceAnnotation {
                gt_box: face.gt_box.scaled(s)?,
                landmarks5: map_landmarks(&face.landmarks5, scale),
                landmarks68: map_landmarks(&face.landmarks68, scale),
                pose_global: face.pose_global,
                label_source: face.label_source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageRecord { path: rec.path.clone(), size, faces })
}

/// Apply `spec` to a record. A crop keeps the faces whose box center lies inside it;
/// a crop that keeps none yields an empty face list.
pub fn augment(record: &ImageRecord, spec: &AugmentSpec) -> Result<ImageRecord> {
    spec.validate(record.size)?;
    let mut rec = match &spec.crop {
        Some(region) => crop_record(record, region)?,
        None => record.clone(),
    };
    if spec.mirror {
        rec = mirror_record(&rec);
    }
    if spec.scale != 1.0 {
        rec = scale_record(&rec, spec.scale)?;
    }
    Ok(rec)
}
