//! Pose dataset as JSON Lines, one image per line:
//!
//! ```text
//! {"version":"v1","path":"a.jpg","width":640.0,"height":480.0,"faces":[
//!   {"box":[x,y,w,h],"landmarks5":[[u,v],...],"landmarks68":null,
//!    "pose":[rx,ry,rz,tx,ty,tz],"label_source":"weak"}]}
//! ```
//!
//! Numbers are written in shortest round-trip form, so reading back gives the
//! same bits.

use std::io::{BufRead, Write};

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::{FaceAnnotation, ImageRecord, LabelSource};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize, Pose6DoF};

pub const DATASET_VERSION: &str = "v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordRow {
    version: String,
    path: String,
    width: f64,
    height: f64,
    faces: Vec<FaceRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceRow {
    #[serde(rename = "box")]
    bbox: [f64; 4],
    landmarks5: Option<Vec<[f64; 2]>>,
    landmarks68: Option<Vec<[f64; 2]>>,
    pose: Option<[f64; 6]>,
    label_source: String,
}

fn points_to_rows(p: &Option<Vec<Point2<f64>>>) -> Option<Vec<[f64; 2]>> {
    p.as_ref().map(|v| v.iter().map(|q| [q.x, q.y]).collect())
}

fn rows_to_points(rows: Option<Vec<[f64; 2]>>, n: usize, line: usize) -> Result<Option<Vec<Point2<f64>>>> {
    let Some(rows) = rows else { return Ok(None) };
    if rows.len() != n {
        return Err(Error::parse(line, format!("expected {n} landmarks, got {}", rows.len())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::parse(line, "landmarks must be finite"));
    }
    Ok(Some(rows.into_iter().map(|[u, v]| Point2::new(u, v)).collect()))
}

fn to_row(rec: &ImageRecord) -> RecordRow {
    RecordRow {
        version: DATASET_VERSION.to_owned(),
        path: rec.path.clone(),
        width: rec.size.width(),
        height: rec.size.height(),
        faces: rec
            .faces
            .iter()
            .map(|f| FaceRow {
                bbox: f.gt_box.to_array(),
                landmarks5: points_to_rows(&f.landmarks5),
                landmarks68: points_to_rows(&f.landmarks68),
                pose: f.pose_global.map(|p| p.to_array()),
                label_source: f.label_source.as_str().to_owned(),
            })
            .collect(),
    }
}

fn from_row(row: RecordRow, line: usize) -> Result<ImageRecord> {
    if row.version != DATASET_VERSION {
        return Err(Error::Version { line, found: row.version });
    }
    let size = ImageSize::new(row.width, row.height).map_err(|e| Error::parse(line, e.to_string()))?;
    let mut faces = Vec::with_capacity(row.faces.len());
    for f in row.faces {
        let [x, y, w, h] = f.bbox;
        let gt_box = BBox::new(x, y, w, h).map_err(|e| Error::parse(line, e.to_string()))?;
        let label_source = LabelSource::parse(&f.label_source)
            .ok_or_else(|| Error::parse(line, format!("unknown label_source {:?}", f.label_source)))?;
        let pose_global = match f.pose {
            Some(a) if a.iter().all(|v| v.is_finite()) => Some(Pose6DoF::from_array(a)),
            Some(_) => return Err(Error::parse(line, "pose must be finite")),
            None => None,
        };
        if pose_global.is_some() == (label_source == LabelSource::None) {
            return Err(Error::parse(
                line,
                format!("label_source {:?} inconsistent with pose presence", f.label_source),
            ));
        }
        faces.push(FaceAnnotation {
            gt_box,
            landmarks5: rows_to_points(f.landmarks5, 5, line)?,
            landmarks68: rows_to_points(f.landmarks68, 68, line)?,
            pose_global,
            label_source,
        });
    }
    Ok(ImageRecord { path: row.path, size, faces })
}

pub fn write_dataset<W: Write>(mut out: W, records: &[ImageRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut out, &to_row(rec)).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dataset_string(records: &[ImageRecord]) -> String {
    let mut buf = Vec::new();
    write_dataset(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Vec<ImageRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: RecordRow =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push(from_row(row, line_no)?);
    }
    Ok(out)
}

pub fn read_dataset_str(text: &str) -> Result<Vec<ImageRecord>> {
    read_dataset(text.as_bytes())
}
