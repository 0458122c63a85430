use facepose::face_model::FaceMesh;
use facepose::geometry::{
    box_intrinsics, image_intrinsics, orthonormality_deviation, project, project_extrinsics, BBox, Extrinsics,
    ImageSize, Pose6DoF,
};
use facepose::transform::{
    global_to_local, global_to_local_raw, local_to_global, local_to_global_raw, rebase_to_subimage_raw,
    ConversionMode, CropFrame,
};
use nalgebra::{Matrix3, Matrix3x4, Vector3};
use proptest::prelude::*;

fn image() -> impl Strategy<Value = ImageSize> {
    (64.0..2000.0f64, 64.0..2000.0f64).prop_map(|(w, h)| ImageSize::new(w, h).unwrap())
}

fn scene() -> impl Strategy<Value = (Pose6DoF, CropFrame)> {
    (
        image(),
        proptest::array::uniform4(0.0..1.0f64),
        proptest::array::uniform3(-0.8..0.8f64),
        (-2.0..2.0f64, -2.0..2.0f64, 3.0..50.0f64),
    )
        .prop_map(|(img, b, r, (tx, ty, tz))| {
            let w = 8.0 + b[2] * (img.width() - 8.0);
            let h = 8.0 + b[3] * (img.height() - 8.0);
            let x = b[0] * (img.width() - w);
            let y = b[1] * (img.height() - h);
            let pose = Pose6DoF::from_array([r[0], r[1], r[2], tx, ty, tz]);
            (pose, CropFrame::new(BBox::new(x, y, w, h).unwrap(), img))
        })
}

/// Projection through an explicit 3x4 camera matrix.
fn oracle_project(p: &Matrix3x4<f64>, x: &Vector3<f64>) -> (f64, f64) {
    let h = p * x.push(1.0);
    (h.x / h.z, h.y / h.z)
}

fn camera_matrix(k: &Matrix3<f64>, ext: &Extrinsics) -> Matrix3x4<f64> {
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&ext.linear);
    rt.set_column(3, &ext.translation);
    k * rt
}

proptest! {
    #[test]
    fn projection_matches_matrix_oracle((pose, crop) in scene()) {
        let k = image_intrinsics(crop.image).unwrap();
        let pts = FaceMesh::canonical().points();
        let ours = project(pts, &pose, &k).unwrap();
        let p = camera_matrix(&k.matrix(), &pose.extrinsics());
        for (q, x) in ours.iter().zip(pts) {
            let (u, v) = oracle_project(&p, &x.coords);
            prop_assert!((q.x - u).abs() < 1e-9 && (q.y - v).abs() < 1e-9);
        }
    }

    #[test]
    fn raw_round_trip_both_orders((pose, crop) in scene()) {
        let ext = pose.extrinsics();
        let back = local_to_global_raw(&global_to_local_raw(&ext, &crop).unwrap(), &crop).unwrap();
        prop_assert!((back.linear - ext.linear).abs().max() < 1e-9);
        prop_assert!((back.translation - ext.translation).norm() <= 1e-9 * ext.translation.norm());
        let back = global_to_local_raw(&local_to_global_raw(&ext, &crop).unwrap(), &crop).unwrap();
        prop_assert!((back.linear - ext.linear).abs().max() < 1e-9);
        prop_assert!((back.translation - ext.translation).norm() <= 1e-9 * ext.translation.norm());
    }

    /// Reversed-order oracle: the image-frame camera matrix of the converted pose equals
    /// the box camera matrix of the rescaled crop pose.
    #[test]
    fn box_and_image_camera_matrices_agree((pose, crop) in scene()) {
        let mut intermediate = pose.extrinsics();
        intermediate.translation.z *= (crop.image.width() + crop.image.height())
            / (crop.bbox.width() + crop.bbox.height());
        let global = local_to_global_raw(&pose.extrinsics(), &crop).unwrap();
        let a = camera_matrix(&box_intrinsics(&crop.bbox, crop.image).unwrap().matrix(), &intermediate);
        let b = camera_matrix(&image_intrinsics(crop.image).unwrap().matrix(), &global);
        prop_assert!((a - b).abs().max() <= 1e-9 * a.abs().max());
    }

    #[test]
    fn orthogonalized_pose_is_rigid((pose, crop) in scene()) {
        for conv in [
            local_to_global(&pose, &crop, ConversionMode::Orthogonalized).unwrap(),
            global_to_local(&pose, &crop, ConversionMode::Orthogonalized).unwrap(),
        ] {
            prop_assert!(conv.linear.is_none());
            prop_assert!(orthonormality_deviation(conv.pose.rotation_matrix().matrix()) < 1e-9);
        }
    }

    #[test]
    fn rebase_shifts_projections((pose, crop) in scene()) {
        let ext = rebase_to_subimage_raw(&pose.extrinsics(), &crop.bbox, crop.image).unwrap();
        let sub = ImageSize::new(crop.bbox.width(), crop.bbox.height()).unwrap();
        let pts = FaceMesh::canonical().points();
        let before = project(pts, &pose, &image_intrinsics(crop.image).unwrap()).unwrap();
        let after = project_extrinsics(pts, &ext, &image_intrinsics(sub).unwrap()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a.x - crop.bbox.x() - b.x).abs() < 1e-6);
            prop_assert!((a.y - crop.bbox.y() - b.y).abs() < 1e-6);
        }
    }
}

/// The shear that orthogonalization removes grows as the box moves off the image center.
#[test]
fn orthogonalization_deviation_grows_off_center() {
    let img = ImageSize::new(1000.0, 1000.0).unwrap();
    let pose = Pose6DoF::from_array([0.1, 0.2, 0.0, 0.0, 0.0, 10.0]);
    let mut last = -1.0;
    for step in 0..10 {
        let x = 475.0 + step as f64 * 50.0;
        let crop = CropFrame::new(BBox::new(x, 475.0, 50.0, 50.0).unwrap(), img);
        let ext = local_to_global_raw(&pose.extrinsics(), &crop).unwrap();
        let dev = orthonormality_deviation(&ext.linear);
        assert!(dev >= last, "deviation dropped at x = {x}: {dev} < {last}");
        last = dev;
    }
    assert!(last > 0.0);
}

#[test]
fn centered_crop_has_no_shear() {
    let img = ImageSize::new(640.0, 480.0).unwrap();
    let crop = CropFrame::new(BBox::new(300.0, 220.0, 40.0, 40.0).unwrap(), img);
    let pose = Pose6DoF::from_array([0.3, -0.2, 0.1, 0.1, 0.0, 4.0]);
    let ext = local_to_global_raw(&pose.extrinsics(), &crop).unwrap();
    assert!(orthonormality_deviation(&ext.linear) < 1e-12);
}
