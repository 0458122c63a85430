//! Reference 3D face, calibration points, and face boxes generated from a pose.
//!
//! Mesh asset format (ASCII): a header line with the point count, then one
//! `x y z [anchor_name]` line per point. Blank lines and lines starting with `#`
//! are skipped. The first 68 points follow the usual 68-landmark order.
//! Model frame: `x` toward image right, `y` down, `z` away from the camera.

use std::sync::OnceLock;

use nalgebra::{Matrix3xX, Point2, Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{project, BBox, Intrinsics, Pose6DoF};

const CANONICAL_MESH: &str = include_str!("../assets/canonical_face.txt");

pub const MIN_MESH_POINTS: usize = 68;
const SYMMETRY_TOL: f64 = 1e-6;
const COPLANAR_TOL: f64 = 1e-6;

/// Named points every mesh must carry. "Left" is the image-left side at identity pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Anchor {
    NoseTip,
    Chin,
    LeftEyeOuter,
    RightEyeOuter,
    LeftMouthCorner,
    RightMouthCorner,
    ForeheadApex,
}

impl Anchor {
    pub const ALL: [Anchor; 7] = [
        Anchor::NoseTip,
        Anchor::Chin,
        Anchor::LeftEyeOuter,
        Anchor::RightEyeOuter,
        Anchor::LeftMouthCorner,
        Anchor::RightMouthCorner,
        Anchor::ForeheadApex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Anchor::NoseTip => "nose_tip",
            Anchor::Chin => "chin",
            Anchor::LeftEyeOuter => "left_eye_outer",
            Anchor::RightEyeOuter => "right_eye_outer",
            Anchor::LeftMouthCorner => "left_mouth_corner",
            Anchor::RightMouthCorner => "right_mouth_corner",
            Anchor::ForeheadApex => "forehead_apex",
        }
    }

    pub fn from_name(s: &str) -> Option<Anchor> {
        Anchor::ALL.into_iter().find(|a| a.name() == s)
    }

    fn slot(self) -> usize {
        Anchor::ALL.iter().position(|a| *a == self).unwrap_or(0)
    }
}

/// Bilaterally symmetric reference face, centroid at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMesh {
    points: Vec<Point3<f64>>,
    anchors: [usize; 7],
    mirror: Vec<usize>,
}

impl FaceMesh {
    /// The bundled canonical face (unit distance between the outer eye corners).
    pub fn canonical() -> &'static FaceMesh {
        static MESH: OnceLock<FaceMesh> = OnceLock::new();
        MESH.get_or_init(|| FaceMesh::parse(CANONICAL_MESH).expect("bundled mesh is valid"))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<FaceMesh> {
        FaceMesh::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<FaceMesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing point-count header"))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::parse(hline, format!("bad point count {header:?}")))?;

        let mut points = Vec::with_capacity(n);
        let mut anchors = [usize::MAX; 7];
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(Error::parse(lineno, "expected `x y z [anchor]`"));
            }
            let mut xyz = [0.0; 3];
            for (slot, f) in xyz.iter_mut().zip(&fields[..3]) {
                *slot = f
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("bad coordinate {f:?}")))?;
            }
            if let Some(name) = fields.get(3) {
                let anchor = Anchor::from_name(name)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown anchor {name:?}")))?;
                if anchors[anchor.slot()] != usize::MAX {
                    return Err(Error::parse(lineno, format!("duplicate anchor {name:?}")));
                }
                anchors[anchor.slot()] = points.len();
            }
            points.push(Point3::new(xyz[0], xyz[1], xyz[2]));
        }
        if points.len() != n {
            return Err(Error::InvalidInput(format!(
                "mesh header declares {n} points but {} were listed",
                points.len()
            )));
        }
        FaceMesh::from_points(points, anchors)
    }

    fn from_points(points: Vec<Point3<f64>>, anchors: [usize; 7]) -> Result<FaceMesh> {
        if points.len() < MIN_MESH_POINTS {
            return Err(Error::InvalidInput(format!(
                "mesh needs at least {MIN_MESH_POINTS} points, got {}",
                points.len()
            )));
        }
        if let Some(missing) = Anchor::ALL.iter().find(|a| anchors[a.slot()] == usize::MAX) {
            return Err(Error::InvalidInput(format!("mesh is missing anchor {}", missing.name())));
        }
        let mirror = mirror_partners(&points)?;
        let n = points.len() as f64;
        let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
        let points = points.into_iter().map(|p| p - centroid).collect();
        Ok(FaceMesh { points, anchors, mirror })
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn anchor_index(&self, a: Anchor) -> usize {
        self.anchors[a.slot()]
    }

    pub fn anchor(&self, a: Anchor) -> Point3<f64> {
        self.points[self.anchor_index(a)]
    }

    /// Index of the point mirrored across the `x = 0` plane.
    pub fn mirror_partner(&self, i: usize) -> usize {
        self.mirror[i]
    }

    /// The 68 landmark points, in landmark order.
    pub fn landmarks68(&self) -> &[Point3<f64>] {
        &self.points[..68]
    }

    /// Model points matching the usual five detector landmarks:
    /// left eye center, right eye center, nose tip, left and right mouth corners.
    pub fn landmarks5(&self) -> [Point3<f64>; 5] {
        let mean = |r: std::ops::Range<usize>| {
            let len = r.len() as f64;
            Point3::from(r.fold(Vector3::zeros(), |acc, i| acc + self.points[i].coords) / len)
        };
        [
            mean(36..42),
            mean(42..48),
            self.anchor(Anchor::NoseTip),
            self.anchor(Anchor::LeftMouthCorner),
            self.anchor(Anchor::RightMouthCorner),
        ]
    }
}

fn mirror_partners(points: &[Point3<f64>]) -> Result<Vec<usize>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let target = Point3::new(-p.x, p.y, p.z);
            let (j, dist) = points
                .iter()
                .enumerate()
                .map(|(j, q)| (j, (q - target).norm()))
                .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
            if dist > SYMMETRY_TOL {
                Err(Error::InvalidInput(format!(
                    "mesh is not symmetric about x = 0: point {i} has no mirror partner (nearest {dist:e})"
                )))
            } else {
                Ok(j)
            }
        })
        .collect()
}

/// Five fixed, non-coplanar model points used by the calibration-point loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoints([Point3<f64>; 5]);

impl CalibrationPoints {
    pub fn new(points: [Point3<f64>; 5]) -> Result<Self> {
        let s = smallest_centered_singular_value(&points);
        if !(s > COPLANAR_TOL) {
            return Err(Error::Degenerate(format!(
                "calibration points are coplanar (smallest singular value {s:e})"
            )));
        }
        Ok(CalibrationPoints(points))
    }

    pub fn points(&self) -> &[Point3<f64>; 5] {
        &self.0
    }
}

pub(crate) fn smallest_centered_singular_value(points: &[Point3<f64>]) -> f64 {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let m = Matrix3xX::from_iterator(
        points.len(),
        points.iter().flat_map(|p| {
            let c = p.coords - centroid;
            [c.x, c.y, c.z]
        }),
    );
    m.singular_values().min()
}

/// Nose tip, chin, both outer eye corners and the forehead apex.
pub fn default_calibration_points(mesh: &FaceMesh) -> Result<CalibrationPoints> {
    CalibrationPoints::new([
        mesh.anchor(Anchor::NoseTip),
        mesh.anchor(Anchor::Chin),
        mesh.anchor(Anchor::LeftEyeOuter),
        mesh.anchor(Anchor::RightEyeOuter),
        mesh.anchor(Anchor::ForeheadApex),
    ])
}

/// Padding applied to the tight projected box, as fractions of its size.
/// `forehead_extend` grows the box toward the projected top of the head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStyle {
    pub pad_left: f64,
    pub pad_right: f64,
    pub pad_top: f64,
    pub pad_bottom: f64,
    pub forehead_extend: f64,
}

pub const MIN_PADDING: f64 = -0.25;

impl BoxStyle {
    pub fn new(pad_left: f64, pad_right: f64, pad_top: f64, pad_bottom: f64, forehead_extend: f64) -> Result<Self> {
        let s = BoxStyle { pad_left, pad_right, pad_top, pad_bottom, forehead_extend };
        let all = [pad_left, pad_right, pad_top, pad_bottom, forehead_extend];
        if all.iter().any(|p| !p.is_finite() || *p < MIN_PADDING) {
            return Err(Error::InvalidInput(format!("paddings must be finite and >= {MIN_PADDING}")));
        }
        Ok(s)
    }

    pub fn uniform(pad: f64) -> Result<Self> {
        BoxStyle::new(pad, pad, pad, pad, 0.0)
    }

    pub fn tight() -> Self {
        BoxStyle { pad_left: 0.0, pad_right: 0.0, pad_top: 0.0, pad_bottom: 0.0, forehead_extend: 0.0 }
    }

    pub fn loose() -> Self {
        BoxStyle { pad_left: 0.1, pad_right: 0.1, pad_top: 0.1, pad_bottom: 0.1, forehead_extend: 0.0 }
    }

    pub fn very_tight() -> Self {
        BoxStyle { pad_left: -0.05, pad_right: -0.05, pad_top: -0.05, pad_bottom: -0.05, forehead_extend: 0.0 }
    }

    pub fn forehead() -> Self {
        BoxStyle { pad_left: 0.02, pad_right: 0.02, pad_top: 0.0, pad_bottom: 0.02, forehead_extend: 0.25 }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "tight" => Some(BoxStyle::tight()),
            "loose" => Some(BoxStyle::loose()),
            "very-tight" => Some(BoxStyle::very_tight()),
            "forehead" => Some(BoxStyle::forehead()),
            _ => None,
        }
    }
}

impl Default for BoxStyle {
    fn default() -> Self {
        BoxStyle::tight()
    }
}

/// Face box from a pose: bound the projected mesh, then apply the style.
pub fn bbox_from_pose(mesh: &FaceMesh, pose: &Pose6DoF, k: &Intrinsics, style: &BoxStyle) -> Result<BBox> {
    let projected = project(mesh.points(), pose, k)?;
    let tight = BBox::enclosing(&projected)?;
    let (w, h) = (tight.width(), tight.height());

    // model -y is head-up
    let up = pose.rotation_matrix().matrix() * Vector3::new(0.0, -1.0, 0.0);
    let fe = style.forehead_extend;
    let left = style.pad_left * w + fe * w * (-up.x).max(0.0);
    let right = style.pad_right * w + fe * w * up.x.max(0.0);
    let top = style.pad_top * h + fe * h * (-up.y).max(0.0);
    let bottom = style.pad_bottom * h + fe * h * up.y.max(0.0);
    BBox::from_corners(tight.x() - left, tight.y() - top, tight.x2() + right, tight.y2() + bottom)
}

/// Project only the calibration points.
pub fn project_calibration(pc: &CalibrationPoints, pose: &Pose6DoF, k: &Intrinsics) -> Result<Vec<Point2<f64>>> {
    project(pc.points(), pose, k)
}
