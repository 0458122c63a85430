use facepose::face_model::{default_calibration_points, FaceMesh};
use facepose::geometry::{image_intrinsics, project, ImageSize, Pose6DoF};
use facepose::pnp::{reprojection_rmse, solve_pnp, Correspondences, SolverConfig};
use nalgebra::Point2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

fn pose() -> impl Strategy<Value = Pose6DoF> {
    (proptest::array::uniform3(-0.7..0.7f64), -0.5..0.5f64, -0.5..0.5f64, 4.0..12.0f64)
        .prop_map(|(r, tx, ty, tz)| Pose6DoF::from_array([r[0], r[1], r[2], tx, ty, tz]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_recovery(p in pose()) {
        let k = image_intrinsics(ImageSize::new(400.0, 400.0).unwrap()).unwrap();
        let pts = default_calibration_points(FaceMesh::canonical()).unwrap().points().to_vec();
        let uv = project(&pts, &p, &k).unwrap();
        let sol = solve_pnp(&Correspondences::new(pts, uv).unwrap(), &k, &SolverConfig::default()).unwrap();
        prop_assert!(sol.pose.rotation_matrix().angle_to(&p.rotation_matrix()) < 1e-6);
        prop_assert!((sol.pose.translation - p.translation).norm() < 1e-8 * p.translation.norm());
        prop_assert!(sol.rmse < 1e-6);
    }

    #[test]
    fn order_of_correspondences_does_not_matter(p in pose(), shift in 1usize..5) {
        let k = image_intrinsics(ImageSize::new(400.0, 400.0).unwrap()).unwrap();
        let pts = FaceMesh::canonical().landmarks68().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(shift as u64);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let uv: Vec<Point2<f64>> = project(&pts, &p, &k)
            .unwrap()
            .into_iter()
            .map(|q| Point2::new(q.x + rng.sample(noise), q.y + rng.sample(noise)))
            .collect();
        let a = solve_pnp(&Correspondences::new(pts.clone(), uv.clone()).unwrap(), &k, &SolverConfig::default()).unwrap();
        let (mut p3, mut p2) = (pts, uv);
        p3.rotate_left(shift);
        p2.rotate_left(shift);
        let b = solve_pnp(&Correspondences::new(p3, p2).unwrap(), &k, &SolverConfig::default()).unwrap();
        prop_assert!(a.pose.rotation_matrix().angle_to(&b.pose.rotation_matrix()) < 1e-7);
        prop_assert!((a.pose.translation - b.pose.translation).norm() < 1e-6 * a.pose.translation.norm());
    }

    #[test]
    fn accepted_steps_never_increase_error(p in pose()) {
        let k = image_intrinsics(ImageSize::new(400.0, 400.0).unwrap()).unwrap();
        let pts = FaceMesh::canonical().landmarks68().to_vec();
        let uv: Vec<Point2<f64>> = project(&pts, &p, &k)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, q)| Point2::new(q.x + (i % 3) as f64 - 1.0, q.y + (i % 5) as f64 * 0.5 - 1.0))
            .collect();
        let c = Correspondences::new(pts, uv).unwrap();
        let sol = solve_pnp(&c, &k, &SolverConfig::default()).unwrap();
        for w in sol.rmse_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!((reprojection_rmse(&sol.pose, &c, &k).unwrap() - sol.rmse).abs() < 1e-9);
    }
}

/// Monte-Carlo check of noisy accuracy: 1 px noise on a 400x400 frame.
#[test]
fn noisy_median_rotation_error() {
    let k = image_intrinsics(ImageSize::new(400.0, 400.0).unwrap()).unwrap();
    let pts = default_calibration_points(FaceMesh::canonical()).unwrap().points().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut errs = Vec::new();
    for _ in 0..300 {
        let p = Pose6DoF::from_array([
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(4.0..10.0),
        ]);
        let uv: Vec<Point2<f64>> = project(&pts, &p, &k)
            .unwrap()
            .into_iter()
            .map(|q| Point2::new(q.x + rng.sample(noise), q.y + rng.sample(noise)))
            .collect();
        let err = match solve_pnp(&Correspondences::new(pts.clone(), uv).unwrap(), &k, &SolverConfig::default()) {
            Ok(s) => s.pose.rotation_matrix().angle_to(&p.rotation_matrix()).to_degrees(),
            Err(_) => 180.0,
        };
        errs.push(err);
    }
    errs.sort_by(f64::total_cmp);
    assert!(errs[errs.len() / 2] < 2.0, "median {}", errs[errs.len() / 2]);
}
