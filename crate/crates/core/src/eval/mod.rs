//! Head-pose evaluation: face selection, Euler-angle range filtering and
//! per-axis mean absolute errors.
//!
//! Prediction file: `image_path score r_x r_y r_z t_x t_y t_z` per line, pose in
//! the image frame. Ground-truth file: `image_path width height x y w h pitch yaw
//! roll [t_x t_y t_z]` per face, angles in degrees.

mod render;

pub use render::{render_overlay, OverlayStyle};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::face_model::{bbox_from_pose, BoxStyle, FaceMesh};
use crate::geometry::{euler_from_mat, image_intrinsics, BBox, EulerAngles, ImageSize, Pose6DoF};
use crate::matching::best_match;

/// Euler range used to discard extreme ground-truth poses.
pub const DEFAULT_ANGLE_RANGE: (f64, f64) = (-99.0, 99.0);
/// Minimum face score for center-based selection.
pub const DEFAULT_MIN_SCORE: f64 = 0.9;

/// Absolute difference of two angles in degrees, taking the short way around.
pub fn angular_error(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// One predicted face matched to its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub predicted: Pose6DoF,
    pub score: f64,
    pub gt_rotation: EulerAngles,
    pub gt_translation: Option<Vector3<f64>>,
}

/// Keep pairs whose ground-truth pitch, yaw and roll all lie in `[lo, hi]`.
pub fn filter_yaw(pairs: Vec<EvalPair>, lo: f64, hi: f64) -> Vec<EvalPair> {
    let inside = |a: f64| (lo..=hi).contains(&a);
    pairs
        .into_iter()
        .filter(|p| {
            let g = p.gt_rotation;
            inside(g.pitch) && inside(g.yaw) && inside(g.roll)
        })
        .collect()
}

/// Candidate whose box overlaps `gt_box` most; ties go to the lowest index.
pub fn select_by_iou(candidates: &[(Pose6DoF, BBox)], gt_box: &BBox) -> Result<usize> {
    let boxes: Vec<BBox> = candidates.iter().map(|c| c.1).collect();
    best_match(gt_box, &boxes)
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidInput("no candidates to select from".into()))
}

/// Among candidates scoring above `min_score`, the one whose box center is closest
/// to the image center.
pub fn select_by_center(candidates: &[(Pose6DoF, BBox, f64)], image: ImageSize, min_score: f64) -> Option<usize> {
    let c = image.center();
    candidates
        .iter()
        .enumerate()
        .filter(|(_, cand)| cand.2 > min_score)
        .map(|(i, cand)| (i, (cand.1.center() - c).norm()))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub mae_r: f64,
    /// Per-axis translation MAE (x, y, z), when translation ground truth exists.
    pub translation: Option<[f64; 3]>,
    pub mae_t: Option<f64>,
    pub evaluated: usize,
    pub filtered: usize,
    pub unmatched: usize,
}

impl EvalReport {
    /// Build a report from per-axis errors; the aggregates are the plain means.
    pub fn from_axis_maes(yaw: f64, pitch: f64, roll: f64, translation: Option<[f64; 3]>) -> Self {
        EvalReport {
            yaw,
            pitch,
            roll,
            mae_r: (yaw + pitch + roll) / 3.0,
            translation,
            mae_t: translation.map(|t| (t[0] + t[1] + t[2]) / 3.0),
            evaluated: 0,
            filtered: 0,
            unmatched: 0,
        }
    }
}

/// Mean in a fixed order so the result does not depend on input order.
fn sorted_mean(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn evaluate(pairs: &[EvalPair]) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("nothing to evaluate".into()));
    }
    let mut errs = [Vec::new(), Vec::new(), Vec::new()];
    let mut terrs = [Vec::new(), Vec::new(), Vec::new()];
    for p in pairs {
        let e = euler_from_mat(&p.predicted.rotation_matrix()).angles;
        let g = p.gt_rotation;
        errs[0].push(angular_error(e.yaw, g.yaw));
        errs[1].push(angular_error(e.pitch, g.pitch));
        errs[2].push(angular_error(e.roll, g.roll));
        if let Some(gt) = p.gt_translation {
            for (k, v) in terrs.iter_mut().enumerate() {
                v.push((p.predicted.translation[k] - gt[k]).abs());
            }
        }
    }
    let [yaw, pitch, roll] = errs.map(sorted_mean);
    let translation = if terrs[0].is_empty() { None } else { Some(terrs.map(sorted_mean)) };
    let mut report = EvalReport::from_axis_maes(yaw, pitch, roll, translation);
    report.evaluated = pairs.len();
    Ok(report)
}

/// A predicted face read from a prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub path: String,
    pub score: f64,
    pub pose: Pose6DoF,
}

/// A ground-truth face read from a ground-truth file.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub path: String,
    pub size: ImageSize,
    pub bbox: BBox,
    pub rotation: EulerAngles,
    pub translation: Option<Vector3<f64>>,
}

fn numbers(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(line, format!("bad number {t:?}"))),
        })
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>> {
    data_lines(text)
        .map(|(line, f)| {
            if f.len() != 8 {
                return Err(Error::parse(line, format!("expected 8 fields, got {}", f.len())));
            }
            let v = numbers(&f[1..], line)?;
            if !(0.0..=1.0).contains(&v[0]) {
                return Err(Error::parse(line, format!("score {} outside [0, 1]", v[0])));
            }
            Ok(Prediction {
                path: f[0].to_owned(),
                score: v[0],
                pose: Pose6DoF::from_array([v[1], v[2], v[3], v[4], v[5], v[6]]),
            })
        })
        .collect()
}

pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruth>> {
    data_lines(text)
        .map(|(line, f)| {
            if f.len() != 10 && f.len() != 13 {
                return Err(Error::parse(line, format!("expected 10 or 13 fields, got {}", f.len())));
            }
            let v = numbers(&f[1..], line)?;
            let size = ImageSize::new(v[0], v[1]).map_err(|e| Error::parse(line, e.to_string()))?;
            let bbox = BBox::new(v[2], v[3], v[4], v[5]).map_err(|e| Error::parse(line, e.to_string()))?;
            Ok(GroundTruth {
                path: f[0].to_owned(),
                size,
                bbox,
                rotation: EulerAngles::new(v[6], v[7], v[8]),
                translation: (v.len() == 12).then(|| Vector3::new(v[9], v[10], v[11])),
            })
        })
        .collect()
}

/// How a prediction is chosen for each ground-truth face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Highest IoU between the pose-projected box and the ground-truth box.
    Iou,
    /// Nearest to the image center among faces scoring above the threshold.
    Center { min_score: f64 },
}

/// Pair every ground-truth face with one prediction for the same image.
/// Returns the pairs and the number of faces left without a prediction.
pub fn match_predictions(
    gts: &[GroundTruth],
    preds: &[Prediction],
    mesh: &FaceMesh,
    style: &BoxStyle,
    selection: Selection,
) -> Result<(Vec<EvalPair>, usize)> {
    let mut pairs = Vec::new();
    let mut unmatched = 0;
    for gt in gts {
        let k = image_intrinsics(gt.size)?;
        let cands: Vec<(Pose6DoF, BBox, f64)> = preds
            .iter()
            .filter(|p| p.path == gt.path)
            .filter_map(|p| bbox_from_pose(mesh, &p.pose, &k, style).ok().map(|b| (p.pose, b, p.score)))
            .collect();
        let chosen = match selection {
            Selection::Iou if cands.is_empty() => None,
            Selection::Iou => {
                let pb: Vec<(Pose6DoF, BBox)> = cands.iter().map(|c| (c.0, c.1)).collect();
                Some(select_by_iou(&pb, &gt.bbox)?)
            }
            Selection::Center { min_score } => select_by_center(&cands, gt.size, min_score),
        };
        match chosen {
            Some(i) => pairs.push(EvalPair {
                predicted: cands[i].0,
                score: cands[i].2,
                gt_rotation: gt.rotation,
                gt_translation: gt.translation,
            }),
            None => unmatched += 1,
        }
    }
    Ok((pairs, unmatched))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mat_from_euler;

    fn pair(pred: EulerAngles, gt: EulerAngles) -> EvalPair {
        EvalPair {
            predicted: Pose6DoF::from_rotation(&mat_from_euler(&pred), Vector3::new(0.0, 0.0, 5.0)),
            score: 1.0,
            gt_rotation: gt,
            gt_translation: None,
        }
    }

    #[test]
    fn angular_error_examples() {
        assert_eq!(angular_error(10.0, 10.0), 0.0);
        assert!((angular_error(179.0, -179.0) - 2.0).abs() < 1e-12);
        assert_eq!(angular_error(90.0, -90.0), 180.0);
    }

    #[test]
    fn table_rows_aggregate() {
        let r = EvalReport::from_axis_maes(3.426, 5.034, 3.278, None);
        assert!((r.mae_r - 3.913).abs() < 5e-4);
        let r = EvalReport::from_axis_maes(4.567, 3.546, 3.244, None);
        assert!((r.mae_r - 3.786).abs() < 5e-4);
        let r = EvalReport::from_axis_maes(0.0, 0.0, 0.0, Some([0.038, 0.049, 0.255]));
        assert!((r.mae_t.unwrap() - 0.114).abs() < 5e-4);
    }

    #[test]
    fn range_filter() {
        let z = EulerAngles::new(0.0, 0.0, 0.0);
        let kept = filter_yaw(vec![pair(z, EulerAngles::new(0.0, 100.0, 0.0)), pair(z, z)], -99.0, 99.0);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].gt_rotation, z);
    }

    #[test]
    fn evaluate_single_axis() {
        let gt = EulerAngles::new(0.0, 0.0, 0.0);
        let r = evaluate(&[pair(EulerAngles::new(0.0, 6.0, 0.0), gt)]).unwrap();
        assert!((r.yaw - 6.0).abs() < 1e-9);
        assert!(r.pitch.abs() < 1e-9 && r.roll.abs() < 1e-9);
        assert!((r.mae_r - 2.0).abs() < 1e-9);
        assert!(r.mae_t.is_none());
        assert!(evaluate(&[]).is_err());
    }

    #[test]
    fn center_selection() {
        let p = Pose6DoF::from_array([0.0; 6]);
        let size = ImageSize::new(100.0, 100.0).unwrap();
        let near = BBox::new(40.0, 40.0, 10.0, 10.0).unwrap(); // center (45, 45), 7.07 away
        let far = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        assert_eq!(select_by_center(&[(p, far, 0.95), (p, near, 0.95)], size, 0.9), Some(1));
        assert_eq!(select_by_center(&[(p, far, 0.95), (p, near, 0.9)], size, 0.9), Some(0));
        assert_eq!(select_by_center(&[(p, near, 0.5)], size, 0.9), None);
        assert!(select_by_iou(&[], &near).is_err());
    }

    #[test]
    fn file_parsers() {
        let preds = parse_predictions("a.jpg 0.99 0 0 0 0 0 5\n# comment\n").unwrap();
        assert_eq!(preds.len(), 1);
        assert!(parse_predictions("a.jpg 1.5 0 0 0 0 0 5\n").is_err());
        let gts = parse_ground_truth("a.jpg 640 480 1 2 3 4 10 20 30\nb.jpg 640 480 1 2 3 4 0 0 0 0.1 0.2 5\n").unwrap();
        assert_eq!(gts[0].rotation, EulerAngles::new(10.0, 20.0, 30.0));
        assert!(gts[0].translation.is_none());
        assert_eq!(gts[1].translation, Some(Vector3::new(0.1, 0.2, 5.0)));
        assert!(parse_ground_truth("a.jpg 640 480 1 2 3 4 10 20\n").is_err());
    }
}
