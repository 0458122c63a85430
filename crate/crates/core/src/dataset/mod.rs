//! Face annotations, weak pose labeling, pose-consistent augmentation and the
//! line-delimited pose dataset.

mod annotations;
mod augment;
mod labeling;
mod store;

pub use annotations::{parse_boxes, parse_landmarks, LandmarkAnnotation};
pub use augment::{augment, mirror_pose, AugmentSampler, AugmentSpec, ScalePolicy, MIRROR_68};
pub use labeling::{attach_landmarks, label_from_landmarks, weak_label, Detection, WEAK_LABEL_MIN_IOU};
pub use store::{read_dataset, read_dataset_str, write_dataset, write_dataset_string, DATASET_VERSION};

use nalgebra::Point2;

use crate::geometry::{BBox, ImageSize, Pose6DoF};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Human,
    Weak,
    None,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Human => "human",
            LabelSource::Weak => "weak",
            LabelSource::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<LabelSource> {
        match s {
            "human" => Some(LabelSource::Human),
            "weak" => Some(LabelSource::Weak),
            "none" => Some(LabelSource::None),
            _ => None,
        }
    }
}

/// One annotated face. A pose is present exactly when the source is not `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceAnnotation {
    pub gt_box: BBox,
    pub landmarks5: Option<Vec<Point2<f64>>>,
    pub landmarks68: Option<Vec<Point2<f64>>>,
    pub pose_global: Option<Pose6DoF>,
    pub label_source: LabelSource,
}

impl FaceAnnotation {
    pub fn unlabeled(gt_box: BBox) -> Self {
        FaceAnnotation {
            gt_box,
            landmarks5: None,
            landmarks68: None,
            pose_global: None,
            label_source: LabelSource::None,
        }
    }

    pub fn with_pose(mut self, pose: Pose6DoF, source: LabelSource) -> Self {
        self.pose_global = Some(pose);
        self.label_source = source;
        self
    }

    pub fn has_pose(&self) -> bool {
        self.pose_global.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub path: String,
    pub size: ImageSize,
    pub faces: Vec<FaceAnnotation>,
}
