use facepose::eval::{angular_error, evaluate, filter_yaw, select_by_iou, EvalPair, EvalReport};
use facepose::geometry::{mat_from_euler, BBox, EulerAngles, Pose6DoF};
use facepose::matching::iou;
use nalgebra::Vector3;
use proptest::prelude::*;

fn pair(pred: [f64; 3], gt: [f64; 3], t: Option<[f64; 3]>) -> EvalPair {
    let e = EulerAngles::new(pred[0], pred[1], pred[2]);
    EvalPair {
        predicted: Pose6DoF::from_rotation(&mat_from_euler(&e), Vector3::new(0.1, -0.2, 8.0)),
        score: 1.0,
        gt_rotation: EulerAngles::new(gt[0], gt[1], gt[2]),
        gt_translation: t.map(Vector3::from),
    }
}

fn angles() -> impl Strategy<Value = [f64; 3]> {
    (-170.0..170.0f64, -80.0..80.0f64, -170.0..170.0f64).prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #[test]
    fn angular_error_properties(a in -1000.0..1000.0f64, b in -1000.0..1000.0f64, k in -3i32..3) {
        let e = angular_error(a, b);
        prop_assert!((0.0..=180.0).contains(&e));
        prop_assert!((e - angular_error(b, a)).abs() < 1e-9);
        prop_assert!(angular_error(a, a + 360.0 * k as f64) < 1e-9);
    }

    #[test]
    fn evaluate_is_order_independent(
        rows in proptest::collection::vec((angles(), angles(), proptest::array::uniform3(-1.0..1.0f64)), 1..30),
        seed in any::<u64>(),
    ) {
        let pairs: Vec<EvalPair> = rows.iter().map(|(p, g, t)| pair(*p, *g, Some(*t))).collect();
        let mut shuffled = pairs.clone();
        // deterministic Fisher-Yates driven by the seed
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(evaluate(&pairs).unwrap(), evaluate(&shuffled).unwrap());
    }

    #[test]
    fn aggregates_are_axis_means(y in 0.0..20.0f64, p in 0.0..20.0f64, r in 0.0..20.0f64) {
        let rep = EvalReport::from_axis_maes(y, p, r, Some([p, r, y]));
        prop_assert_eq!(rep.mae_r, (y + p + r) / 3.0);
        prop_assert_eq!(rep.mae_t.unwrap(), (p + r + y) / 3.0);
    }

    #[test]
    fn select_by_iou_is_argmax(
        boxes in proptest::collection::vec((0.0..50.0f64, 0.0..50.0f64, 1.0..30.0f64, 1.0..30.0f64), 1..10),
        gt in (0.0..50.0f64, 0.0..50.0f64, 1.0..30.0f64, 1.0..30.0f64),
    ) {
        let gt = BBox::new(gt.0, gt.1, gt.2, gt.3).unwrap();
        let cands: Vec<(Pose6DoF, BBox)> = boxes
            .iter()
            .map(|b| (Pose6DoF::from_array([0.0; 6]), BBox::new(b.0, b.1, b.2, b.3).unwrap()))
            .collect();
        let ious: Vec<f64> = cands.iter().map(|c| iou(&c.1, &gt)).collect();
        let mut best = 0;
        for i in 0..ious.len() {
            if ious[i] > ious[best] {
                best = i;
            }
        }
        prop_assert_eq!(select_by_iou(&cands, &gt).unwrap(), best);
    }
}

#[test]
fn evaluate_matches_hand_computed_errors() {
    let pairs = vec![
        pair([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], Some([0.1, -0.2, 8.5])),
        pair([-1.0, -4.0, 1.0], [0.0, 0.0, 0.0], Some([0.1, -0.2, 7.0])),
    ];
    let r = evaluate(&pairs).unwrap();
    assert!((r.pitch - 1.0).abs() < 1e-9);
    assert!((r.yaw - 3.0).abs() < 1e-9);
    assert!((r.roll - 2.0).abs() < 1e-9);
    assert!((r.mae_r - 2.0).abs() < 1e-9);
    let t = r.translation.unwrap();
    assert!(t[0].abs() < 1e-12 && t[1].abs() < 1e-12);
    assert!((t[2] - 0.75).abs() < 1e-12);
    assert!((r.mae_t.unwrap() - 0.25).abs() < 1e-12);
}

/// 2000 faces, 31 of them with some angle outside [-99, 99].
#[test]
fn range_filter_keeps_1969_of_2000() {
    let mut pairs = Vec::new();
    for i in 0..2000 {
        let a = (i % 181) as f64 - 90.0;
        let gt = match i % 64 {
            0 if pairs.len() < 2000 && i < 31 * 64 => [0.0, 99.0 + 1.0 + (i % 7) as f64, 0.0],
            _ => [a * 0.5, a, -a * 0.3],
        };
        pairs.push(pair([0.0, 0.0, 0.0], gt, None));
    }
    let outside = pairs.iter().filter(|p| p.gt_rotation.yaw > 99.0).count();
    assert_eq!(outside, 31);
    assert_eq!(filter_yaw(pairs, -99.0, 99.0).len(), 1969);
}

#[test]
fn boundary_angles_are_kept() {
    let kept = filter_yaw(
        vec![pair([0.0; 3], [99.0, -99.0, 0.0], None), pair([0.0; 3], [0.0, 100.0, 0.0], None)],
        -99.0,
        99.0,
    );
    assert_eq!(kept.len(), 1);
}
