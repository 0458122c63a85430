//! Perspective-n-point: pose from 2D–3D correspondences with known intrinsics.
//!
//! Initial guesses come from a scaled-orthographic iteration (POSIT) for
//! non-planar point sets and from a plane homography for near-planar ones.
//! Each guess is refined by Levenberg–Marquardt on the reprojection error and
//! the lowest-error result wins.

use nalgebra::{DMatrix, Matrix3, Matrix6, Point2, Point3, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::face_model::FaceMesh;
use crate::geometry::{
    nearest_rotation, project, GeneralLinear3, Intrinsics, Pose6DoF, RotationMatrix,
    RotationVector, MIN_DEPTH,
};

/// σ₃/σ₁ of the centered 3D points below which the set is treated as planar.
const PLANAR_RATIO: f64 = 1e-3;
/// σ₂/σ₁ below which the 3D points are treated as collinear.
const COLLINEAR_RATIO: f64 = 1e-9;
const MAX_DAMPING: f64 = 1e16;

#[derive(Debug, Clone, PartialEq)]
pub struct Correspondences {
    points3: Vec<Point3<f64>>,
    points2: Vec<Point2<f64>>,
}

impl Correspondences {
    pub fn new(points3: Vec<Point3<f64>>, points2: Vec<Point2<f64>>) -> Result<Self> {
        if points3.len() != points2.len() {
            return Err(Error::InvalidInput(format!(
                "{} model points but {} image points",
                points3.len(),
                points2.len()
            )));
        }
        if points3.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "PnP needs at least 4 correspondences, got {}",
                points3.len()
            )));
        }
        let finite = points3.iter().all(|p| p.iter().all(|v| v.is_finite()))
            && points2.iter().all(|p| p.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidInput("correspondences must be finite".into()));
        }
        let s = centered_singular_values(&points3);
        if !(s[1] > COLLINEAR_RATIO * s[0]) {
            return Err(Error::Degenerate("model points are collinear".into()));
        }
        Ok(Correspondences { points3, points2 })
    }

    pub fn len(&self) -> usize {
        self.points3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points3.is_empty()
    }

    pub fn points3(&self) -> &[Point3<f64>] {
        &self.points3
    }

    pub fn points2(&self) -> &[Point2<f64>] {
        &self.points2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Converged once the parameter step is below `tol · (|x| + tol)`.
    pub convergence_tol: f64,
    pub initial_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_iterations: 100, convergence_tol: 1e-10, initial_damping: 1e-3 }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.convergence_tol > 0.0) || !(self.initial_damping > 0.0) {
            return Err(Error::InvalidInput("solver settings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnpSolution {
    pub pose: Pose6DoF,
    /// Converged reprojection RMSE in pixels.
    pub rmse: f64,
    pub iterations: usize,
    /// RMSE at the start and after every accepted step.
    pub rmse_trace: Vec<f64>,
}

/// Root mean square of the per-point reprojection distances, in pixels.
pub fn reprojection_rmse(pose: &Pose6DoF, c: &Correspondences, k: &Intrinsics) -> Result<f64> {
    let projected = project(&c.points3, pose, k)?;
    let sum: f64 = projected
        .iter()
        .zip(&c.points2)
        .map(|(p, q)| (p - q).norm_squared())
        .sum();
    Ok((sum / c.len() as f64).sqrt())
}

pub fn solve_pnp(c: &Correspondences, k: &Intrinsics, cfg: &SolverConfig) -> Result<PnpSolution> {
    cfg.validate()?;
    let normalized: Vec<Point2<f64>> = {
        let (cx, cy) = k.principal_point();
        c.points2
            .iter()
            .map(|q| Point2::new((q.x - cx) / k.focal(), (q.y - cy) / k.focal()))
            .collect()
    };

    let s = centered_singular_values(&c.points3);
    let mut starts = Vec::new();
    if s[2] > PLANAR_RATIO * s[0] {
        starts.extend(posit_init(&c.points3, &normalized));
    }
    if starts.is_empty() || s[2] <= 0.1 * s[0] {
        starts.extend(homography_init(&c.points3, &normalized));
    }
    if starts.is_empty() {
        return Err(Error::Degenerate("no usable initial pose".into()));
    }

    let mut best: Option<PnpSolution> = None;
    let mut last_err = None;
    for start in starts {
        match refine(c, k, cfg, start) {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.rmse < b.rmse) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Degenerate("PnP failed".into())))
}

/// Which landmark layout `pose_from_landmarks` receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandmarkScheme {
    /// Left eye, right eye, nose tip, left mouth corner, right mouth corner.
    FivePoint,
    /// The 68-point layout.
    SixtyEightPoint,
}

impl LandmarkScheme {
    pub fn count(self) -> usize {
        match self {
            LandmarkScheme::FivePoint => 5,
            LandmarkScheme::SixtyEightPoint => 68,
        }
    }

    pub fn model_points(self, mesh: &FaceMesh) -> Vec<Point3<f64>> {
        match self {
            LandmarkScheme::FivePoint => mesh.landmarks5().to_vec(),
            LandmarkScheme::SixtyEightPoint => mesh.landmarks68().to_vec(),
        }
    }
}

pub fn pose_from_landmarks(
    landmarks: &[Point2<f64>],
    mesh: &FaceMesh,
    scheme: LandmarkScheme,
    k: &Intrinsics,
) -> Result<Pose6DoF> {
    if landmarks.len() != scheme.count() {
        return Err(Error::InvalidInput(format!(
            "expected {} landmarks, got {}",
            scheme.count(),
            landmarks.len()
        )));
    }
    let c = Correspondences::new(scheme.model_points(mesh), landmarks.to_vec())?;
    Ok(solve_pnp(&c, k, &SolverConfig::default())?.pose)
}

fn centered_singular_values(points: &[Point3<f64>]) -> [f64; 3] {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let m = centered_matrix(points, &centroid);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.resize(3, 0.0);
    [s[0], s[1], s[2]]
}

fn centered_matrix(points: &[Point3<f64>], origin: &Vector3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 3, |i, j| points[i].coords[j] - origin[j])
}

fn to_rotation(rows_or_cols: Matrix3<f64>) -> Option<RotationMatrix> {
    GeneralLinear3::new(rows_or_cols).ok().map(|g| nearest_rotation(&g))
}

/// POSIT with a permutation-independent reference point (lexicographically smallest).
fn posit_init(points3: &[Point3<f64>], normalized: &[Point2<f64>]) -> Option<Pose6DoF> {
    let r0 = (0..points3.len()).min_by(|&a, &b| {
        let (p, q) = (points3[a], points3[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    })?;
    let m0 = points3[r0].coords;
    let q0 = normalized[r0];
    let others: Vec<usize> = (0..points3.len()).filter(|&i| i != r0).collect();
    let a = DMatrix::from_fn(others.len(), 3, |r, j| points3[others[r]].coords[j] - m0[j]);
    let pinv = a.clone().pseudo_inverse(1e-12).ok()?;

    let mut eps = vec![0.0; others.len()];
    let mut pose = None;
    for _ in 0..100 {
        let xp = nalgebra::DVector::from_iterator(
            others.len(),
            others.iter().zip(&eps).map(|(&i, e)| normalized[i].x * (1.0 + e) - q0.x),
        );
        let yp = nalgebra::DVector::from_iterator(
            others.len(),
            others.iter().zip(&eps).map(|(&i, e)| normalized[i].y * (1.0 + e) - q0.y),
        );
        let big_i = &pinv * xp;
        let big_j = &pinv * yp;
        let (ni, nj) = (big_i.norm(), big_j.norm());
        if !(ni > 0.0 && nj > 0.0) {
            return None;
        }
        let scale = (ni * nj).sqrt();
        let i = Vector3::new(big_i[0], big_i[1], big_i[2]) / ni;
        let j = Vector3::new(big_j[0], big_j[1], big_j[2]) / nj;
        let kk = i.cross(&j);
        let rot = to_rotation(Matrix3::from_rows(&[i.transpose(), j.transpose(), kk.normalize().transpose()]))?;
        let z0 = 1.0 / scale;
        let t = Vector3::new(q0.x * z0, q0.y * z0, z0) - rot.matrix() * m0;

        let k_row = rot.matrix().row(2).transpose();
        let next: Vec<f64> = others
            .iter()
            .map(|&idx| (points3[idx].coords - m0).dot(&k_row) / z0)
            .collect();
        let change = next.iter().zip(&eps).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        eps = next;
        pose = Some(Pose6DoF::from_rotation(&rot, t));
        if change < 1e-12 {
            break;
        }
    }
    pose.filter(|p| p.is_finite() && p.translation.z > 0.0)
}

/// Homography from the best-fit model plane to the normalized image, decomposed
/// into a pose. Also returns the mirrored (depth-flipped) candidate.
fn homography_init(points3: &[Point3<f64>], normalized: &[Point2<f64>]) -> Vec<Pose6DoF> {
    let n = points3.len();
    let centroid = points3.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n as f64;
    let centered = centered_matrix(points3, &centroid);
    let svd = centered.svd(false, true);
    let Some(v_t) = svd.v_t else { return Vec::new() };
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let e1 = Vector3::new(v_t[(order[0], 0)], v_t[(order[0], 1)], v_t[(order[0], 2)]);
    let e2 = Vector3::new(v_t[(order[1], 0)], v_t[(order[1], 1)], v_t[(order[1], 2)]);
    let e3 = e1.cross(&e2);
    let basis = Matrix3::from_columns(&[e1, e2, e3]);

    let mut a = DMatrix::zeros(2 * n, 9);
    for (i, (p, q)) in points3.iter().zip(normalized).enumerate() {
        let d = p.coords - centroid;
        let (u, v) = (d.dot(&e1), d.dot(&e2));
        let row = [u, v, 1.0];
        for c in 0..3 {
            a[(2 * i, c)] = row[c];
            a[(2 * i, 6 + c)] = -q.x * row[c];
            a[(2 * i + 1, 3 + c)] = row[c];
            a[(2 * i + 1, 6 + c)] = -q.y * row[c];
        }
    }
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let (min_idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if *v < best.1 { (i, *v) } else { best });
    let h = eig.eigenvectors.column(min_idx);
    let hm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let (h1, h2, h3) = (hm.column(0).into_owned(), hm.column(1).into_owned(), hm.column(2).into_owned());
    let norm = (h1.norm() * h2.norm()).sqrt();
    if !(norm > 0.0) {
        return Vec::new();
    }
    let sign = if h3.z < 0.0 { -1.0 } else { 1.0 };
    let (r1, r2, t_plane) = (h1 * sign / norm, h2 * sign / norm, h3 * sign / norm);

    let mut out = Vec::new();
    for flip in [false, true] {
        let (c1, c2) = if flip {
            // reflect the plane orientation through the viewing ray of its center
            let ray = t_plane.normalize();
            let reflect = |v: Vector3<f64>| 2.0 * ray * ray.dot(&v) - v;
            (-reflect(r1), -reflect(r2))
        } else {
            (r1, r2)
        };
        let Some(rp) = to_rotation(Matrix3::from_columns(&[c1, c2, c1.cross(&c2)])) else {
            continue;
        };
        let r = rp.matrix() * basis.transpose();
        let Ok(rot) = RotationMatrix::new(r) else { continue };
        let t = t_plane - rot.matrix() * centroid;
        let pose = Pose6DoF::from_rotation(&rot, t);
        if pose.is_finite() && t.z > 0.0 {
            out.push(pose);
        }
    }
    out
}

struct Evaluation {
    residuals: Vec<f64>,
    cost: f64,
}

fn evaluate(c: &Correspondences, k: &Intrinsics, r: &Matrix3<f64>, t: &Vector3<f64>) -> Option<Evaluation> {
    let (cx, cy) = k.principal_point();
    let f = k.focal();
    let mut residuals = Vec::with_capacity(2 * c.len());
    for (p, q) in c.points3.iter().zip(&c.points2) {
        let x = r * p.coords + t;
        if !(x.z > MIN_DEPTH) {
            return None;
        }
        residuals.push(f * x.x / x.z + cx - q.x);
        residuals.push(f * x.y / x.z + cy - q.y);
    }
    let cost = residuals.iter().map(|v| v * v).sum();
    Some(Evaluation { residuals, cost })
}

fn normal_equations(
    c: &Correspondences,
    k: &Intrinsics,
    r: &Matrix3<f64>,
    t: &Vector3<f64>,
    residuals: &[f64],
) -> (Matrix6<f64>, Vector6<f64>) {
    let f = k.focal();
    let mut h = Matrix6::zeros();
    let mut g = Vector6::zeros();
    for (i, p) in c.points3.iter().enumerate() {
        let rp = r * p.coords;
        let x = rp + t;
        let inv_z = 1.0 / x.z;
        // d(camera point)/d(ω) = −[Rp]×, d/dt = I
        let d_omega = Matrix3::new(0.0, rp.z, -rp.y, -rp.z, 0.0, rp.x, rp.y, -rp.x, 0.0);
        let du = Vector3::new(f * inv_z, 0.0, -f * x.x * inv_z * inv_z);
        let dv = Vector3::new(0.0, f * inv_z, -f * x.y * inv_z * inv_z);
        for (row, d) in [(du, residuals[2 * i]), (dv, residuals[2 * i + 1])] {
            let jw = d_omega.transpose() * row;
            let j = Vector6::new(jw.x, jw.y, jw.z, row.x, row.y, row.z);
            h += j * j.transpose();
            g += j * d;
        }
    }
    (h, g)
}

fn refine(c: &Correspondences, k: &Intrinsics, cfg: &SolverConfig, start: Pose6DoF) -> Result<PnpSolution> {
    let mut r = *start.rotation_matrix().matrix();
    let mut t = start.translation;
    let n = c.len() as f64;
    let mut current = evaluate(c, k, &r, &t)
        .ok_or_else(|| Error::Degenerate("initial pose places points behind the camera".into()))?;
    let mut trace = vec![(current.cost / n).sqrt()];
    let mut lambda = cfg.initial_damping;
    let mut last_step = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        if current.cost == 0.0 {
            return Ok(finish(r, t, current.cost, n, iteration - 1, trace));
        }
        let (h, g) = normal_equations(c, k, &r, &t, &current.residuals);
        let mut damped = h;
        for d in 0..6 {
            damped[(d, d)] += lambda * h[(d, d)].max(1e-12);
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let step = -chol.solve(&g);
        last_step = step.norm();
        let x_norm = (rotation_params(&r).norm_squared() + t.norm_squared()).sqrt();
        let small = last_step <= cfg.convergence_tol * (x_norm + cfg.convergence_tol);

        let omega = Vector3::new(step[0], step[1], step[2]);
        let r_new = *RotationVector::from_vector(omega).to_matrix().matrix() * r;
        let t_new = t + Vector3::new(step[3], step[4], step[5]);
        match evaluate(c, k, &r_new, &t_new) {
            Some(e) if e.cost < current.cost => {
                r = r_new;
                t = t_new;
                current = e;
                trace.push((current.cost / n).sqrt());
                lambda = (lambda / 10.0).max(1e-12);
                if small {
                    return Ok(finish(r, t, current.cost, n, iteration, trace));
                }
            }
            _ => {
                if small || lambda >= MAX_DAMPING {
                    return Ok(finish(r, t, current.cost, n, iteration, trace));
                }
                lambda *= 10.0;
            }
        }
    }
    Err(Error::Divergence { iterations: cfg.max_iterations, step: last_step })
}

fn rotation_params(r: &Matrix3<f64>) -> Vector3<f64> {
    *RotationMatrix::new(*r)
        .map(|m| m.to_rotation_vector())
        .unwrap_or_else(|_| RotationVector::identity())
        .as_vector()
}

fn finish(r: Matrix3<f64>, t: Vector3<f64>, cost: f64, n: f64, iterations: usize, rmse_trace: Vec<f64>) -> PnpSolution {
    // accumulated left-multiplications drift from orthonormality at the 1e-16 level
    let rot = to_rotation(r).unwrap_or_else(RotationMatrix::identity);
    PnpSolution {
        pose: Pose6DoF::from_rotation(&rot, t),
        rmse: (cost / n).sqrt(),
        iterations,
        rmse_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k400() -> Intrinsics {
        Intrinsics::new(800.0, 200.0, 200.0).unwrap()
    }

    #[test]
    fn identity_pose_recovered() {
        let mesh = FaceMesh::canonical();
        let pose = Pose6DoF::from_array([0.0, 0.0, 0.0, 0.0, 0.0, 5.0]);
        let pts = mesh.landmarks5().to_vec();
        let obs = project(&pts, &pose, &k400()).unwrap();
        let sol = solve_pnp(&Correspondences::new(pts, obs).unwrap(), &k400(), &SolverConfig::default()).unwrap();
        for (a, b) in sol.pose.to_array().iter().zip(pose.to_array()) {
            assert!((a - b).abs() < 1e-8, "{:?}", sol.pose);
        }
        assert!(sol.rmse < 1e-9);
    }

    #[test]
    fn collinear_points_rejected() {
        let pts: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        let obs = vec![Point2::origin(); 5];
        assert!(matches!(Correspondences::new(pts, obs), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_few_or_mismatched() {
        let p3 = vec![Point3::origin(); 3];
        assert!(Correspondences::new(p3.clone(), vec![Point2::origin(); 3]).is_err());
        assert!(Correspondences::new(p3, vec![Point2::origin(); 2]).is_err());
    }

    #[test]
    fn wrong_landmark_count() {
        let err = pose_from_landmarks(&[Point2::origin(); 4], FaceMesh::canonical(), LandmarkScheme::FivePoint, &k400());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rmse_zero_at_generator_and_positive_off_it() {
        let mesh = FaceMesh::canonical();
        let pose = Pose6DoF::from_array([0.2, -0.3, 0.1, 0.2, -0.1, 6.0]);
        let pts = mesh.landmarks68().to_vec();
        let obs = project(&pts, &pose, &k400()).unwrap();
        let c = Correspondences::new(pts, obs).unwrap();
        assert!(reprojection_rmse(&pose, &c, &k400()).unwrap() <= 1e-9);
        let mut shifted = pose;
        shifted.translation.x += 1.0;
        assert!(reprojection_rmse(&shifted, &c, &k400()).unwrap() > 0.0);
    }

    #[test]
    fn planar_points_solved() {
        let pts = vec![
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(-1.0, 1.0, 0.0),
            Point3::new(0.3, 0.2, 0.0),
        ];
        let pose = Pose6DoF::from_array([0.4, -0.3, 0.2, 0.1, 0.2, 9.0]);
        let obs = project(&pts, &pose, &k400()).unwrap();
        let sol = solve_pnp(&Correspondences::new(pts, obs).unwrap(), &k400(), &SolverConfig::default()).unwrap();
        assert!(sol.pose.rotation_matrix().angle_to(&pose.rotation_matrix()) < 1e-6);
    }
}
