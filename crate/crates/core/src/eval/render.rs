//! SVG overlay of ground-truth boxes, pose-projected boxes and calibration points.

use std::fmt::Write;

use crate::dataset::ImageRecord;
use crate::error::Result;
use crate::face_model::{bbox_from_pose, default_calibration_points, project_calibration, BoxStyle, FaceMesh};
use crate::geometry::{image_intrinsics, BBox, Pose6DoF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayStyle {
    pub boxes: BoxStyle,
    pub stroke_width: f64,
    pub point_radius: f64,
    pub show_calibration: bool,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        OverlayStyle { boxes: BoxStyle::default(), stroke_width: 2.0, point_radius: 2.5, show_calibration: true }
    }
}

fn rect(out: &mut String, b: &BBox, color: &str, stroke: f64) {
    let _ = writeln!(
        out,
        r#"  <rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{color}" stroke-width="{stroke}"/>"#,
        b.x(),
        b.y(),
        b.width(),
        b.height()
    );
}

/// Render the overlay for one image. Poses are in the image frame of `record`.
/// The output depends only on the inputs.
pub fn render_overlay(record: &ImageRecord, poses: &[Pose6DoF], mesh: &FaceMesh, style: &OverlayStyle) -> Result<String> {
    let (w, h) = (record.size.width(), record.size.height());
    let k = image_intrinsics(record.size)?;
    let pc = default_calibration_points(mesh)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "  <!-- {} -->", record.path.replace("--", "- -"));
    let _ = writeln!(out, r##"  <rect x="0" y="0" width="{w}" height="{h}" fill="#202020"/>"##);
    for face in &record.faces {
        rect(&mut out, &face.gt_box, "#00c000", style.stroke_width);
    }
    for pose in poses {
        let b = bbox_from_pose(mesh, pose, &k, &style.boxes)?;
        rect(&mut out, &b, "#ff4040", style.stroke_width);
        if style.show_calibration {
            for p in project_calibration(&pc, pose, &k)? {
                let _ = writeln!(
                    out,
                    r##"  <circle cx="{}" cy="{}" r="{}" fill="#40a0ff"/>"##,
                    p.x, p.y, style.point_radius
                );
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
