use std::fs;
use std::path::Path;

use facepose::dataset::{
    attach_landmarks, augment as augment_record, label_from_landmarks, parse_boxes, parse_landmarks, read_dataset_str,
    weak_label, write_dataset_string, AugmentSampler, AugmentSpec, ImageRecord,
};
use facepose::eval::{
    evaluate, filter_yaw, match_predictions, parse_ground_truth, parse_predictions, render_overlay, OverlayStyle,
    Selection,
};
use facepose::face_model::{bbox_from_pose, default_calibration_points, BoxStyle, FaceMesh};
use facepose::geometry::{image_intrinsics, project as project_points, BBox, ImageSize, Intrinsics, Pose6DoF};
use facepose::matching::{box_vote, ScoredBox};
use facepose::pnp::{solve_pnp, Correspondences, LandmarkScheme, SolverConfig};
use facepose::transform::{global_to_local, local_to_global, ConversionMode, CropFrame};
use nalgebra::{Point2, Point3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::io::{fmt_num, fmt_row, read_rows, read_text};
use crate::{CameraArgs, Direction, Mode, PointSet, PoseInput, Select, Style};

fn load_mesh(path: Option<&Path>) -> Result<Option<FaceMesh>, CliError> {
    path.map(|p| FaceMesh::load(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))))
        .transpose()
}

fn camera(c: &CameraArgs) -> Result<Intrinsics, CliError> {
    match (&c.image, &c.intrinsics) {
        (Some(s), _) => Ok(image_intrinsics(ImageSize::new(s[0], s[1])?)?),
        (_, Some(k)) => Ok(Intrinsics::new(k[0], k[1], k[2])?),
        _ => Err(CliError::Usage("give --image or --intrinsics".into())),
    }
}

fn poses(p: &PoseInput) -> Result<Vec<Pose6DoF>, CliError> {
    let rows = match (&p.pose, &p.input) {
        (Some(v), _) => vec![v.clone()],
        (_, Some(path)) => read_rows(&read_text(path)?, &[6])?,
        _ => return Err(CliError::Usage("give --pose or --input".into())),
    };
    Ok(rows.into_iter().map(|r| Pose6DoF::from_array([r[0], r[1], r[2], r[3], r[4], r[5]])).collect())
}

fn box_style(s: Style) -> BoxStyle {
    match s {
        Style::Tight => BoxStyle::tight(),
        Style::Loose => BoxStyle::loose(),
        Style::VeryTight => BoxStyle::very_tight(),
        Style::Forehead => BoxStyle::forehead(),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))
}

fn lines(rows: impl IntoIterator<Item = String>) -> String {
    rows.into_iter().map(|r| r + "\n").collect()
}

pub fn project(cam: &CameraArgs, input: &PoseInput, which: PointSet, mesh: Option<&Path>) -> Result<String, CliError> {
    let k = camera(cam)?;
    let owned = load_mesh(mesh)?;
    let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
    let points: Vec<Point3<f64>> = match which {
        PointSet::Mesh => mesh.points().to_vec(),
        PointSet::Landmarks5 => mesh.landmarks5().to_vec(),
        PointSet::Landmarks68 => mesh.landmarks68().to_vec(),
        PointSet::Calibration => default_calibration_points(mesh)?.points().to_vec(),
    };
    let mut out = Vec::new();
    for pose in poses(input)? {
        let uv = project_points(&points, &pose, &k)?;
        out.push(fmt_row(&uv.iter().flat_map(|p| [p.x, p.y]).collect::<Vec<_>>()));
    }
    Ok(lines(out))
}

pub fn convert_pose(
    direction: Direction,
    image: &[f64],
    bbox: &[f64],
    mode: Mode,
    input: &PoseInput,
) -> Result<String, CliError> {
    let crop = CropFrame::new(BBox::new(bbox[0], bbox[1], bbox[2], bbox[3])?, ImageSize::new(image[0], image[1])?);
    let mode = match mode {
        Mode::Orthogonalized => ConversionMode::Orthogonalized,
        Mode::Raw => ConversionMode::Raw,
    };
    let mut out = Vec::new();
    for pose in poses(input)? {
        let converted = match direction {
            Direction::LocalToGlobal => local_to_global(&pose, &crop, mode)?,
            Direction::GlobalToLocal => global_to_local(&pose, &crop, mode)?,
        };
        let row = match mode {
            ConversionMode::Orthogonalized => converted.pose.to_array().to_vec(),
            ConversionMode::Raw => {
                let e = converted.extrinsics();
                let m = e.linear;
                let mut v: Vec<f64> = (0..3).flat_map(|r| (0..3).map(move |c| m[(r, c)])).collect();
                v.extend(e.translation.iter());
                v
            }
        };
        out.push(fmt_row(&row));
    }
    Ok(lines(out))
}

pub fn bbox(cam: &CameraArgs, input: &PoseInput, style: Style, mesh: Option<&Path>) -> Result<String, CliError> {
    let k = camera(cam)?;
    let owned = load_mesh(mesh)?;
    let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
    let style = box_style(style);
    let mut out = Vec::new();
    for pose in poses(input)? {
        out.push(fmt_row(&bbox_from_pose(mesh, &pose, &k, &style)?.to_array()));
    }
    Ok(lines(out))
}

pub fn solve_pnp_cmd(input: &Path, cam: &CameraArgs, max_iterations: usize, mesh: Option<&Path>) -> Result<String, CliError> {
    let k = camera(cam)?;
    let rows = read_rows(&read_text(input)?, &[2, 5])?;
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::Data("mixed 2- and 5-column rows".into()));
    }
    let (p3, p2): (Vec<Point3<f64>>, Vec<Point2<f64>>) = match rows.first().map(|r| r.len()) {
        Some(5) => rows.iter().map(|r| (Point3::new(r[0], r[1], r[2]), Point2::new(r[3], r[4]))).unzip(),
        _ => {
            let owned = load_mesh(mesh)?;
            let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
            let scheme = match rows.len() {
                5 => LandmarkScheme::FivePoint,
                68 => LandmarkScheme::SixtyEightPoint,
                n => return Err(CliError::Data(format!("expected 5 or 68 landmarks, got {n}"))),
            };
            (scheme.model_points(mesh), rows.iter().map(|r| Point2::new(r[0], r[1])).collect())
        }
    };
    let cfg = SolverConfig { max_iterations, ..SolverConfig::default() };
    let sol = solve_pnp(&Correspondences::new(p3, p2)?, &k, &cfg)?;
    Ok(format!(
        "pose {}\nrmse {}\niterations {}\n",
        fmt_row(&sol.pose.to_array()),
        fmt_num(sol.rmse),
        sol.iterations
    ))
}

pub fn gen_labels(
    boxes: &Path,
    detections: Option<&Path>,
    landmarks: Option<&Path>,
    image_size: Option<&[f64]>,
    mesh: Option<&Path>,
    jobs: usize,
) -> Result<String, CliError> {
    let default_size = image_size.map(|s| ImageSize::new(s[0], s[1])).transpose()?;
    let mut records = parse_boxes(&read_text(boxes)?, default_size)?;
    if let Some(p) = landmarks {
        attach_landmarks(&mut records, &parse_landmarks(&read_text(p)?)?);
    }
    let dets = detections.map(|p| read_text(p).and_then(|t| Ok(parse_landmarks(&t)?))).transpose()?;
    let owned = load_mesh(mesh)?;
    let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
    let labeled: Vec<ImageRecord> = pool(jobs)?.install(|| {
        records
            .par_iter()
            .map(|rec| {
                let rec = label_from_landmarks(rec, mesh);
                match &dets {
                    Some(d) => weak_label(&rec, d.get(&rec.path).map_or(&[][..], |v| v), mesh),
                    None => rec,
                }
            })
            .collect()
    });
    Ok(write_dataset_string(&labeled))
}

pub enum AugmentHow {
    Fixed { mirror: bool, scale: f64, crop: Option<Vec<f64>> },
    Random { seed: u64 },
}

pub fn augment(input: &Path, how: AugmentHow, jobs: usize) -> Result<String, CliError> {
    let records = read_dataset_str(&read_text(input)?)?;
    let fixed = match &how {
        AugmentHow::Fixed { mirror, scale, crop } => Some(AugmentSpec {
            mirror: *mirror,
            scale: *scale,
            crop: crop.as_ref().map(|c| BBox::new(c[0], c[1], c[2], c[3])).transpose()?,
        }),
        AugmentHow::Random { .. } => None,
    };
    let sampler = AugmentSampler::default();
    let out: Vec<Result<ImageRecord, CliError>> = pool(jobs)?.install(|| {
        records
            .par_iter()
            .enumerate()
            .map(|(i, rec)| {
                let spec = match (&fixed, &how) {
                    (Some(s), _) => *s,
                    (None, AugmentHow::Random { seed }) => {
                        // one stream per record keeps draws independent of scheduling
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        rng.set_stream(i as u64);
                        sampler.sample(&mut rng, rec.size)
                    }
                    (None, AugmentHow::Fixed { .. }) => unreachable!("fixed spec is always built"),
                };
                augment_record(rec, &spec).map_err(|e| CliError::from(e).context(&rec.path))
            })
            .collect()
    });
    let out = out.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(write_dataset_string(&out))
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    predictions: &Path,
    ground_truth: &Path,
    select: Select,
    min_score: f64,
    range: (f64, f64),
    style: Style,
    mesh: Option<&Path>,
    jobs: usize,
) -> Result<String, CliError> {
    let preds = parse_predictions(&read_text(predictions)?)?;
    let gts = parse_ground_truth(&read_text(ground_truth)?)?;
    let owned = load_mesh(mesh)?;
    let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
    let style = box_style(style);
    let selection = match select {
        Select::Iou => Selection::Iou,
        Select::Center => Selection::Center { min_score },
    };
    let chunks: Vec<_> = pool(jobs)?.install(|| {
        gts.par_chunks(64)
            .map(|c| match_predictions(c, &preds, mesh, &style, selection))
            .collect()
    });
    let mut pairs = Vec::new();
    let mut unmatched = 0;
    for c in chunks {
        let (p, u) = c?;
        pairs.extend(p);
        unmatched += u;
    }
    let total = pairs.len();
    let kept = filter_yaw(pairs, range.0, range.1);
    let mut report = evaluate(&kept)?;
    report.filtered = total - kept.len();
    report.unmatched = unmatched;

    let mut out = vec![
        format!("mae_yaw {}", fmt_num(report.yaw)),
        format!("mae_pitch {}", fmt_num(report.pitch)),
        format!("mae_roll {}", fmt_num(report.roll)),
        format!("mae_r {}", fmt_num(report.mae_r)),
    ];
    if let (Some(t), Some(m)) = (report.translation, report.mae_t) {
        out.push(format!("mae_x {}", fmt_num(t[0])));
        out.push(format!("mae_y {}", fmt_num(t[1])));
        out.push(format!("mae_z {}", fmt_num(t[2])));
        out.push(format!("mae_t {}", fmt_num(m)));
    }
    out.push(format!("evaluated {}", report.evaluated));
    out.push(format!("filtered {}", report.filtered));
    out.push(format!("unmatched {}", report.unmatched));
    Ok(lines(out))
}

fn svg_name(index: usize, path: &str) -> String {
    let stem: String = path
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{index:05}_{stem}.svg")
}

pub fn render(input: &Path, out_dir: &Path, style: Style, points: bool, mesh: Option<&Path>) -> Result<String, CliError> {
    let records = read_dataset_str(&read_text(input)?)?;
    let owned = load_mesh(mesh)?;
    let mesh = owned.as_ref().unwrap_or_else(|| FaceMesh::canonical());
    let style = OverlayStyle { boxes: box_style(style), show_calibration: points, ..OverlayStyle::default() };
    fs::create_dir_all(out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let poses: Vec<Pose6DoF> = rec.faces.iter().filter_map(|f| f.pose_global).collect();
        let svg = render_overlay(rec, &poses, mesh, &style)?;
        let path = out_dir.join(svg_name(i, &rec.path));
        fs::write(&path, svg).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    Ok(lines(written))
}

pub fn vote_boxes(input: &Path, iou: f64) -> Result<String, CliError> {
    if !(0.0..=1.0).contains(&iou) {
        return Err(CliError::Usage(format!("--iou must lie in [0, 1], got {iou}")));
    }
    let boxes = read_rows(&read_text(input)?, &[5])?
        .into_iter()
        .map(|r| Ok(ScoredBox::new(BBox::new(r[0], r[1], r[2], r[3])?, r[4])?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let voted = box_vote(&boxes, iou);
    Ok(lines(voted.iter().map(|b| {
        let mut v = b.bbox.to_array().to_vec();
        v.push(b.score);
        fmt_row(&v)
    })))
}
