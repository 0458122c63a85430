use facepose::geometry::{
    euler_from_mat, mat_from_euler, mat_to_rot_vec, nearest_rotation, orthonormality_deviation, rot_vec_to_mat,
    EulerAngles, GeneralLinear3, RotationVector,
};
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use std::f64::consts::PI;

fn rot_vec() -> impl Strategy<Value = Vector3<f64>> {
    // angles strictly below pi so the rotation vector is unique
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..(PI - 1e-6)).prop_filter_map("zero axis", |(x, y, z, a)| {
        let v = Vector3::new(x, y, z);
        (v.norm() > 1e-3).then(|| v.normalize() * a)
    })
}

proptest! {
    #[test]
    fn rodrigues_matches_quaternion_oracle(v in rot_vec()) {
        let ours = rot_vec_to_mat(&RotationVector::from_vector(v));
        let oracle = UnitQuaternion::from_scaled_axis(v).to_rotation_matrix().into_inner();
        prop_assert!((ours.matrix() - oracle).abs().max() < 1e-12);
    }

    #[test]
    fn rotation_vector_round_trip(v in rot_vec()) {
        let m = rot_vec_to_mat(&RotationVector::from_vector(v));
        let back = mat_to_rot_vec(m.matrix()).unwrap();
        prop_assert!((back.as_vector() - v).norm() < 1e-9, "{:?} vs {:?}", back, v);
        prop_assert!(back.angle() <= PI);
    }

    #[test]
    fn euler_round_trip(p in -179.0..179.0f64, y in -89.0..89.0f64, r in -179.0..179.0f64) {
        let e = EulerAngles::new(p, y, r);
        let d = euler_from_mat(&mat_from_euler(&e));
        prop_assert!(!d.gimbal_lock);
        prop_assert!((d.angles.pitch - p).abs() < 1e-9);
        prop_assert!((d.angles.yaw - y).abs() < 1e-9);
        prop_assert!((d.angles.roll - r).abs() < 1e-9);
    }

    #[test]
    fn euler_matches_axis_product(p in -180.0..180.0f64, y in -90.0..90.0f64, r in -180.0..180.0f64) {
        let oracle = Rotation3::from_axis_angle(&Vector3::z_axis(), r.to_radians())
            * Rotation3::from_axis_angle(&Vector3::y_axis(), y.to_radians())
            * Rotation3::from_axis_angle(&Vector3::x_axis(), p.to_radians());
        let ours = mat_from_euler(&EulerAngles::new(p, y, r));
        prop_assert!((ours.matrix() - oracle.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn nearest_rotation_is_orthonormal_and_idempotent(
        v in rot_vec(),
        noise in proptest::array::uniform9(-0.2..0.2f64),
    ) {
        let r = rot_vec_to_mat(&RotationVector::from_vector(v));
        let m = r.matrix() + Matrix3::from_row_slice(&noise);
        let g = GeneralLinear3::new(m).unwrap();
        let q = nearest_rotation(&g);
        prop_assert!(orthonormality_deviation(q.matrix()) < 1e-12);
        prop_assert!((q.matrix().determinant() - 1.0).abs() < 1e-12);
        let again = nearest_rotation(&GeneralLinear3::from(q));
        prop_assert!((again.matrix() - q.matrix()).abs().max() < 1e-12);
    }
}

/// Brute force: no rotation on a fine local grid around the answer is closer in
/// Frobenius norm than `nearest_rotation`.
#[test]
fn nearest_rotation_beats_rotation_grid() {
    let m = Matrix3::new(0.9, -0.3, 0.1, 0.35, 1.1, -0.05, -0.2, 0.1, 0.8);
    let q = nearest_rotation(&GeneralLinear3::new(m).unwrap());
    let best = (q.matrix() - m).norm();
    let steps = 12;
    for i in -steps..=steps {
        for j in -steps..=steps {
            for k in -steps..=steps {
                let d = Vector3::new(i as f64, j as f64, k as f64) * 0.01;
                let cand = q.matrix() * Rotation3::new(d).matrix();
                assert!((cand - m).norm() >= best - 1e-12, "grid point {d:?} is closer");
            }
        }
    }
    // and coarse samples over the whole group
    for a in 0..20 {
        for b in 0..20 {
            let v = Vector3::new((a as f64 / 19.0 - 0.5) * 2.0 * PI, (b as f64 / 19.0 - 0.5) * 2.0 * PI, 0.7);
            let cand = Rotation3::new(v);
            assert!((cand.matrix() - m).norm() >= best - 1e-12);
        }
    }
}

#[test]
fn angle_pi_is_canonical() {
    for v in [Vector3::new(0.0, PI, 0.0), Vector3::new(0.0, -PI, 0.0)] {
        let m = rot_vec_to_mat(&RotationVector::from_vector(v));
        let back = mat_to_rot_vec(m.matrix()).unwrap();
        assert!((back.as_vector() - Vector3::new(0.0, PI, 0.0)).norm() < 1e-9);
    }
}

#[test]
fn gimbal_lock_is_flagged() {
    let d = euler_from_mat(&mat_from_euler(&EulerAngles::new(20.0, 90.0, 10.0)));
    assert!(d.gimbal_lock);
    assert_eq!(d.angles.roll, 0.0);
    let back = mat_from_euler(&d.angles);
    let orig = mat_from_euler(&EulerAngles::new(20.0, 90.0, 10.0));
    assert!((back.matrix() - orig.matrix()).abs().max() < 1e-9);
}
