use facepose::dataset::{
    augment, mirror_pose, read_dataset_str, weak_label, write_dataset_string, AugmentSpec, Detection,
    FaceAnnotation, ImageRecord, LabelSource,
};
use facepose::face_model::{bbox_from_pose, BoxStyle, FaceMesh};
use facepose::geometry::{image_intrinsics, project, BBox, ImageSize, Pose6DoF};
use facepose::matching::iou;
use facepose::pnp::LandmarkScheme;
use nalgebra::Point2;
use proptest::prelude::*;

fn pose() -> impl Strategy<Value = Pose6DoF> {
    (proptest::array::uniform3(-0.6..0.6f64), -1.5..1.5f64, -1.0..1.0f64, 6.0..30.0f64)
        .prop_map(|(r, tx, ty, tz)| Pose6DoF::from_array([r[0], r[1], r[2], tx, ty, tz]))
}

fn record_with(poses: &[Pose6DoF]) -> ImageRecord {
    let size = ImageSize::new(800.0, 600.0).unwrap();
    let k = image_intrinsics(size).unwrap();
    let mesh = FaceMesh::canonical();
    let faces = poses
        .iter()
        .map(|p| {
            let b = bbox_from_pose(mesh, p, &k, &BoxStyle::tight()).unwrap();
            let lm5 = project(&LandmarkScheme::FivePoint.model_points(mesh), p, &k).unwrap();
            let lm68 = project(mesh.landmarks68(), p, &k).unwrap();
            FaceAnnotation { landmarks5: Some(lm5), landmarks68: Some(lm68), ..FaceAnnotation::unlabeled(b) }
                .with_pose(*p, LabelSource::Human)
        })
        .collect();
    ImageRecord { path: "img.jpg".into(), size, faces }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn scaling_keeps_poses(poses in proptest::collection::vec(pose(), 1..4), s in 0.2..4.0f64) {
        let rec = record_with(&poses);
        let out = augment(&rec, &AugmentSpec { scale: s, ..Default::default() }).unwrap();
        for (a, b) in out.faces.iter().zip(&rec.faces) {
            prop_assert_eq!(a.pose_global, b.pose_global);
            prop_assert!(close(&a.gt_box.to_array(), &b.gt_box.to_array().map(|v| v * s), 1e-9));
        }
    }

    #[test]
    fn mirror_is_an_involution(poses in proptest::collection::vec(pose(), 1..4)) {
        let rec = record_with(&poses);
        let spec = AugmentSpec { mirror: true, ..Default::default() };
        let twice = augment(&augment(&rec, &spec).unwrap(), &spec).unwrap();
        for (a, b) in twice.faces.iter().zip(&rec.faces) {
            prop_assert!(close(&a.pose_global.unwrap().to_array(), &b.pose_global.unwrap().to_array(), 1e-12));
            prop_assert!(close(&a.gt_box.to_array(), &b.gt_box.to_array(), 1e-12));
            prop_assert_eq!(a.landmarks68.as_ref().unwrap().len(), 68);
        }
    }

    /// The box projected from the mirrored pose is the reflection of the original box.
    #[test]
    fn mirrored_pose_projects_to_reflected_box(p in pose()) {
        let size = ImageSize::new(800.0, 600.0).unwrap();
        let k = image_intrinsics(size).unwrap();
        let mesh = FaceMesh::canonical();
        for style in [BoxStyle::tight(), BoxStyle::forehead()] {
            let b = bbox_from_pose(mesh, &p, &k, &style).unwrap();
            let m = bbox_from_pose(mesh, &mirror_pose(&p), &k, &style).unwrap();
            prop_assert!(close(&m.to_array(), &b.mirrored(size.width()).to_array(), 1e-6));
        }
    }

    /// Mirrored landmarks are the projections of the mirrored pose, label order included.
    #[test]
    fn mirrored_landmarks_follow_pose(p in pose()) {
        let rec = record_with(&[p]);
        let out = augment(&rec, &AugmentSpec { mirror: true, ..Default::default() }).unwrap();
        let expected = record_with(&[mirror_pose(&p)]);
        for (a, b) in out.faces[0].landmarks68.as_ref().unwrap().iter().zip(expected.faces[0].landmarks68.as_ref().unwrap()) {
            prop_assert!((a - b).norm() < 1e-6);
        }
        for (a, b) in out.faces[0].landmarks5.as_ref().unwrap().iter().zip(expected.faces[0].landmarks5.as_ref().unwrap()) {
            prop_assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn store_round_trip(poses in proptest::collection::vec(pose(), 0..4)) {
        let rec = record_with(&poses);
        let text = write_dataset_string(std::slice::from_ref(&rec));
        let back = read_dataset_str(&text).unwrap();
        prop_assert_eq!(back, vec![rec]);
    }

    #[test]
    fn weak_label_matches_argmax_and_keeps_boxes(
        gts in proptest::collection::vec((0.0..600.0f64, 0.0..400.0f64, 20.0..120.0f64), 1..5),
        dets in proptest::collection::vec((0.0..600.0f64, 0.0..400.0f64, 20.0..120.0f64), 0..6),
    ) {
        let size = ImageSize::new(800.0, 600.0).unwrap();
        let faces = gts.iter().map(|&(x, y, s)| FaceAnnotation::unlabeled(BBox::new(x, y, s, s).unwrap())).collect();
        let rec = ImageRecord { path: "a".into(), size, faces };
        let detections: Vec<Detection> = dets
            .iter()
            .map(|&(x, y, s)| Detection {
                bbox: BBox::new(x, y, s, s).unwrap(),
                // a frontal five-point layout inside the box
                points: [(0.3, 0.35), (0.7, 0.35), (0.5, 0.55), (0.35, 0.75), (0.65, 0.75)]
                    .iter()
                    .map(|(u, v)| Point2::new(x + u * s, y + v * s))
                    .collect(),
            })
            .collect();
        let out = weak_label(&rec, &detections, FaceMesh::canonical());
        for (face, orig) in out.faces.iter().zip(&rec.faces) {
            prop_assert_eq!(face.gt_box, orig.gt_box);
            let ious: Vec<f64> = detections.iter().map(|d| iou(&orig.gt_box, &d.bbox)).collect();
            let mut k = 0;
            for (i, v) in ious.iter().enumerate() {
                if *v > ious[k] {
                    k = i;
                }
            }
            if ious.is_empty() || ious[k] < 0.5 {
                prop_assert_eq!(face.label_source, LabelSource::None);
                prop_assert!(face.pose_global.is_none());
            } else {
                prop_assert_eq!(face.label_source, LabelSource::Weak);
                // labeling with only the argmax detection gives the same pose
                let single = ImageRecord { path: "a".into(), size, faces: vec![orig.clone()] };
                let alone = weak_label(&single, &detections[k..=k], FaceMesh::canonical());
                prop_assert_eq!(alone.faces[0].pose_global, face.pose_global);
            }
        }
    }
}

#[test]
fn full_crop_and_unit_scale_are_identity() {
    let rec = record_with(&[Pose6DoF::from_array([0.1, -0.2, 0.05, 0.3, 0.2, 12.0])]);
    let out = augment(&rec, &AugmentSpec { crop: Some(rec.size.full_box()), ..Default::default() }).unwrap();
    let (a, b) = (out.faces[0].pose_global.unwrap(), rec.faces[0].pose_global.unwrap());
    assert!(close(&a.to_array(), &b.to_array(), 1e-12));
    assert_eq!(augment(&rec, &AugmentSpec::default()).unwrap(), rec);
}

#[test]
fn crop_keeps_faces_by_center_and_shifts_them() {
    let rec = record_with(&[
        Pose6DoF::from_array([0.0, 0.0, 0.0, -1.0, 0.0, 12.0]),
        Pose6DoF::from_array([0.0, 0.0, 0.0, 1.0, 0.0, 12.0]),
    ]);
    let left = rec.faces[0].gt_box;
    let region = BBox::new(0.0, 0.0, 400.0, 600.0).unwrap();
    let out = augment(&rec, &AugmentSpec { crop: Some(region), ..Default::default() }).unwrap();
    assert_eq!(out.faces.len(), 1);
    assert_eq!(out.faces[0].gt_box, left);
    assert_eq!(out.size, ImageSize::new(400.0, 600.0).unwrap());
}
