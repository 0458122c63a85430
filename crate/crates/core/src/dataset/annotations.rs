//! Readers for box and five-point landmark annotation files.
//!
//! Box file: repeated blocks of an image path line (optionally followed by the
//! image `width height`), a face-count line `N`, then `N` lines `x y w h`. Extra
//! integer columns after the first four are ignored.
//!
//! Landmark file: `# path` header lines, each followed by one line per face:
//! `x y w h u1 v1 ... u5 v5` (left eye, right eye, nose tip, left mouth corner,
//! right mouth corner).

use std::collections::BTreeMap;

use nalgebra::Point2;

use super::{FaceAnnotation, ImageRecord};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageSize};

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

fn parse_box(fields: &[&str], line: usize) -> Result<BBox> {
    let mut v = [0.0; 4];
    for (slot, tok) in v.iter_mut().zip(fields) {
        *slot = parse_num::<f64>(tok, line, "box coordinate")?;
    }
    BBox::new(v[0], v[1], v[2], v[3]).map_err(|e| Error::parse(line, e.to_string()))
}

pub fn parse_boxes(text: &str, default_size: Option<ImageSize>) -> Result<Vec<ImageRecord>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut records = Vec::new();
    while let Some((pline, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let path = parts[0].to_owned();
        let size = match parts.len() {
            1 => default_size.ok_or_else(|| {
                Error::parse(pline, format!("no image dimensions for {path} and no default given"))
            })?,
            3 => {
                let w = parse_num::<f64>(parts[1], pline, "image width")?;
                let h = parse_num::<f64>(parts[2], pline, "image height")?;
                ImageSize::new(w, h).map_err(|e| Error::parse(pline, e.to_string()))?
            }
            _ => return Err(Error::parse(pline, "expected `path [width height]`")),
        };
        let (cline, count) = lines
            .next()
            .ok_or_else(|| Error::parse(pline, format!("{path}: missing face count")))?;
        let n: usize = count
            .parse()
            .map_err(|_| Error::parse(cline, format!("{path}: bad face count {count:?}")))?;
        let mut faces = Vec::with_capacity(n);
        for k in 0..n {
            let (bline, row) = lines.next().ok_or_else(|| {
                Error::parse(cline, format!("{path}: declared {n} faces but found {k}"))
            })?;
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() < 4 || fields.iter().any(|f| f.parse::<f64>().is_err()) {
                return Err(Error::parse(
                    bline,
                    format!("{path}: declared {n} faces but found {k}; expected `x y w h`, got {row:?}"),
                ));
            }
            faces.push(FaceAnnotation::unlabeled(parse_box(&fields, bline)?));
        }
        records.push(ImageRecord { path, size, faces });
    }
    Ok(records)
}

/// A box with its five landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkAnnotation {
    pub bbox: BBox,
    pub points: Vec<Point2<f64>>,
}

pub fn parse_landmarks(text: &str) -> Result<BTreeMap<String, Vec<LandmarkAnnotation>>> {
    let mut out: BTreeMap<String, Vec<LandmarkAnnotation>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if let Some(path) = row.strip_prefix('#') {
            let path = path.trim();
            if path.is_empty() {
                return Err(Error::parse(line, "empty image path"));
            }
            out.entry(path.to_owned()).or_default();
            current = Some(path.to_owned());
            continue;
        }
        let path = current
            .as_ref()
            .ok_or_else(|| Error::parse(line, "face line before any `# path` header"))?;
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() != 14 {
            return Err(Error::parse(
                line,
                format!("expected box and 5 landmark points (14 values), got {} values", fields.len()),
            ));
        }
        let bbox = parse_box(&fields[..4], line)?;
        let vals = fields[4..]
            .iter()
            .map(|t| parse_num::<f64>(t, line, "landmark coordinate"))
            .collect::<Result<Vec<f64>>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(line, "landmarks must be finite"));
        }
        let points = vals.chunks(2).map(|c| Point2::new(c[0], c[1])).collect();
        out.entry(path.clone()).or_default().push(LandmarkAnnotation { bbox, points });
    }
    Ok(out)
}
