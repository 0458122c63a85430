//! Pose labels from landmarks: human annotations or detector output (weak labels).

use std::collections::BTreeMap;

use nalgebra::Point2;

use super::{ImageRecord, LabelSource, LandmarkAnnotation};
use crate::error::Result;
use crate::face_model::FaceMesh;
use crate::geometry::{crop_intrinsics, BBox, ImageSize, Pose6DoF};
use crate::matching::{best_match, iou};
use crate::pnp::{pose_from_landmarks, LandmarkScheme};
use crate::transform::{local_to_global, ConversionMode, CropFrame};

/// Detections below this IoU with a ground-truth face are not used for labeling.
pub const WEAK_LABEL_MIN_IOU: f64 = 0.5;

/// A detector box with its five landmarks, in image pixels.
pub type Detection = LandmarkAnnotation;

/// Solve the pose of a face in the crop camera of `bbox`, then move it to the image frame.
fn global_pose_from_crop(
    bbox: &BBox,
    landmarks: &[Point2<f64>],
    size: ImageSize,
    mesh: &FaceMesh,
) -> Result<Pose6DoF> {
    let k = crop_intrinsics(bbox.width(), bbox.height())?;
    let local: Vec<Point2<f64>> = landmarks
        .iter()
        .map(|p| Point2::new(p.x - bbox.x(), p.y - bbox.y()))
        .collect();
    let crop_pose = pose_from_landmarks(&local, mesh, LandmarkScheme::FivePoint, &k)?;
    let converted = local_to_global(&crop_pose, &CropFrame::new(*bbox, size), ConversionMode::Orthogonalized)?;
    Ok(converted.pose)
}

/// For every unlabeled face, take the detection with the highest IoU (lowest index on
/// ties); if that IoU reaches [`WEAK_LABEL_MIN_IOU`], solve a pose from its landmarks in
/// the detection crop and store the image-frame pose. Only the pose is kept.
/// Faces whose pose cannot be solved stay unlabeled.
pub fn weak_label(record: &ImageRecord, detections: &[Detection], mesh: &FaceMesh) -> ImageRecord {
    let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
    let faces = record
        .faces
        .iter()
        .map(|face| {
            if face.has_pose() {
                return face.clone();
            }
            let mut out = face.clone();
            out.label_source = LabelSource::None;
            let Some((idx, overlap)) = best_match(&face.gt_box, &boxes) else {
                return out;
            };
            if overlap < WEAK_LABEL_MIN_IOU {
                return out;
            }
            let det = &detections[idx];
            match global_pose_from_crop(&det.bbox, &det.points, record.size, mesh) {
                Ok(pose) => out.with_pose(pose, LabelSource::Weak),
                Err(_) => out,
            }
        })
        .collect();
    ImageRecord { path: record.path.clone(), size: record.size, faces }
}

/// Attach annotated landmarks to the faces they overlap best (IoU ≥ 0.5).
pub fn attach_landmarks(records: &mut [ImageRecord], landmarks: &BTreeMap<String, Vec<LandmarkAnnotation>>) {
    for rec in records.iter_mut() {
        let Some(anns) = landmarks.get(&rec.path) else { continue };
        for ann in anns {
            let best = rec
                .faces
                .iter()
                .enumerate()
                .map(|(i, f)| (i, iou(&ann.bbox, &f.gt_box)))
                .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((i, v)),
                });
            if let Some((i, v)) = best {
                if v >= WEAK_LABEL_MIN_IOU && rec.faces[i].landmarks5.is_none() {
                    rec.faces[i].landmarks5 = Some(ann.points.clone());
                }
            }
        }
    }
}

/// Label faces that carry annotated five-point landmarks, using their ground-truth box
/// as the crop.
pub fn label_from_landmarks(record: &ImageRecord, mesh: &FaceMesh) -> ImageRecord {
    let faces = record
        .faces
        .iter()
        .map(|face| match (&face.landmarks5, face.has_pose()) {
            (Some(lm), false) => match global_pose_from_crop(&face.gt_box, lm, record.size, mesh) {
                Ok(pose) => face.clone().with_pose(pose, LabelSource::Human),
                Err(_) => face.clone(),
            },
            _ => face.clone(),
        })
        .collect();
    ImageRecord { path: record.path.clone(), size: record.size, faces }
}
