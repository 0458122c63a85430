//! Per-proposal training losses: classification, pose and calibration-point terms.

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::face_model::{project_calibration, CalibrationPoints};
use crate::geometry::{Intrinsics, Pose6DoF};
use crate::transform::FramedPose;

/// Probability clamp for the cross-entropy.
pub const BCE_EPS: f64 = 1e-7;

pub fn bce_loss(p: f64, p_star: u8) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    if p_star == 0 {
        -(1.0 - p).ln()
    } else {
        -p.ln()
    }
}

/// Squared L2 distance between two 6-vectors `(r, t)`.
pub fn pose_loss(pred: &Pose6DoF, gt: &Pose6DoF) -> f64 {
    pred.to_array()
        .iter()
        .zip(gt.to_array())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// [`pose_loss`] on poses that carry their frame; they must agree.
pub fn pose_loss_framed(pred: &FramedPose, gt: &FramedPose) -> Result<f64> {
    if pred.frame != gt.frame {
        return Err(Error::FrameMismatch("predicted and ground-truth poses use different frames".into()));
    }
    Ok(pose_loss(&pred.pose, &gt.pose))
}

/// Entrywise L1 distance between the calibration points projected by each pose.
pub fn calib_loss(pred: &Pose6DoF, gt: &Pose6DoF, pc: &CalibrationPoints, k: &Intrinsics) -> Result<f64> {
    let a = project_calibration(pc, pred, k)?;
    let b = project_calibration(pc, gt, k)?;
    Ok(l1_distance(&a, &b))
}

/// Sum of absolute coordinate differences between two point sets.
pub fn l1_distance(a: &[Point2<f64>], b: &[Point2<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p.x - q.x).abs() + (p.y - q.y).abs())
        .sum()
}

/// `L_cls + p*·L_pose + p*·L_calib`. Negatives return the classification term alone
/// and never touch the poses.
pub fn multi_task_loss(
    p: f64,
    p_star: u8,
    pred: &Pose6DoF,
    gt: &Pose6DoF,
    pc: &CalibrationPoints,
    k: &Intrinsics,
) -> Result<f64> {
    let cls = bce_loss(p, p_star);
    if p_star == 0 {
        return Ok(cls);
    }
    Ok(cls + pose_loss(pred, gt) + calib_loss(pred, gt, pc, k)?)
}
