//! `facepose`: batch front end for the 6DoF face pose toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numerical failure.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "facepose", version, about = "6DoF face pose geometry toolkit")]
struct Cli {
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for per-image work; output order follows input order
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write output here instead of standard output
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct CameraArgs {
    /// Image camera of a WxH image: focal W+H, principal point at the center
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub image: Option<Vec<f64>>,
    /// Explicit pinhole camera
    #[arg(long, num_args = 3, value_names = ["F", "CX", "CY"], allow_negative_numbers = true)]
    pub intrinsics: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct PoseInput {
    /// A single pose: rotation vector then translation
    #[arg(long, num_args = 6, value_names = ["RX", "RY", "RZ", "TX", "TY", "TZ"], allow_negative_numbers = true)]
    pub pose: Option<Vec<f64>>,
    /// File with one pose per line (`rx ry rz tx ty tz`), `-` for standard input
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    /// Every mesh vertex
    Mesh,
    Landmarks5,
    Landmarks68,
    /// The five calibration points
    Calibration,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LocalToGlobal,
    GlobalToLocal,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Project the converted linear part back onto a rotation
    Orthogonalized,
    /// Keep the converted 3x3 linear part; prints 12 values per pose
    Raw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Tight,
    Loose,
    VeryTight,
    Forehead,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Select {
    /// Highest IoU between projected and ground-truth boxes
    Iou,
    /// Closest to the image center among confident faces
    Center,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project mesh points with one or more poses; prints `u1 v1 u2 v2 ...` per pose
    Project {
        #[command(flatten)]
        camera: CameraArgs,
        #[command(flatten)]
        poses: PoseInput,
        #[arg(long, value_enum, default_value_t = PointSet::Calibration)]
        points: PointSet,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// Convert poses between a face crop and the full image
    ConvertPose {
        #[arg(long, value_enum)]
        direction: Direction,
        /// Full image size
        #[arg(long, num_args = 2, value_names = ["W", "H"], required = true)]
        image: Vec<f64>,
        /// Crop box in image pixels
        #[arg(long = "box", num_args = 4, value_names = ["X", "Y", "W", "H"], required = true, allow_negative_numbers = true)]
        bbox: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Orthogonalized)]
        mode: Mode,
        #[command(flatten)]
        poses: PoseInput,
    },
    /// Face box from each pose; prints `x y w h` per pose
    Bbox {
        #[command(flatten)]
        camera: CameraArgs,
        #[command(flatten)]
        poses: PoseInput,
        /// Box padding style
        #[arg(long, value_enum, default_value_t = Style::Tight)]
        style: Style,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// Pose from 2D-3D correspondences (`X Y Z u v` per line) or from 5 or 68 landmarks (`u v` per line)
    SolvePnp {
        /// Correspondence or landmark file, `-` for standard input
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[command(flatten)]
        camera: CameraArgs,
        /// Levenberg-Marquardt iteration cap
        #[arg(long, default_value_t = 100)]
        max_iterations: usize,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// Build the pose dataset: human landmarks first, then weak labels from detections
    GenLabels {
        /// Box annotation file
        #[arg(long, value_name = "FILE")]
        boxes: PathBuf,
        /// Detector output in the landmark file format
        #[arg(long, value_name = "FILE")]
        detections: Option<PathBuf>,
        /// Annotated five-point landmarks
        #[arg(long, value_name = "FILE")]
        landmarks: Option<PathBuf>,
        /// Size for images whose path line has no dimensions
        #[arg(long, num_args = 2, value_names = ["W", "H"])]
        image_size: Option<Vec<f64>>,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// Crop, mirror and rescale a pose dataset
    Augment {
        /// Dataset file, `-` for standard input
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Flip horizontally
        #[arg(long)]
        mirror: bool,
        /// Uniform image scale factor
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Region to keep, in image pixels
        #[arg(long, num_args = 4, value_names = ["X", "Y", "W", "H"])]
        crop: Option<Vec<f64>>,
        /// Draw crop, mirror and scale per image from `--seed` instead
        #[arg(long, conflicts_with_all = ["mirror", "crop"])]
        random: bool,
    },
    /// Rotation and translation MAE of predictions against ground truth
    Eval {
        /// `image_path score rx ry rz tx ty tz` per line
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
        /// `image_path W H x y w h pitch yaw roll [tx ty tz]` per line
        #[arg(long, value_name = "FILE")]
        ground_truth: PathBuf,
        #[arg(long, value_enum, default_value_t = Select::Iou)]
        select: Select,
        /// Score threshold for center selection
        #[arg(long, default_value_t = facepose::eval::DEFAULT_MIN_SCORE)]
        min_score: f64,
        /// Keep faces whose ground-truth angles all lie in this range (degrees)
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-99.0, 99.0])]
        range: Vec<f64>,
        /// Box style used to project predictions for IoU selection
        #[arg(long, value_enum, default_value_t = Style::Tight)]
        style: Style,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// SVG overlays of boxes, pose boxes and calibration points, one per dataset image
    Render {
        /// Dataset file
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Box padding style
        #[arg(long, value_enum, default_value_t = Style::Tight)]
        style: Style,
        /// Leave out the calibration points
        #[arg(long)]
        no_points: bool,
        /// Face mesh file instead of the bundled one
        #[arg(long, value_name = "FILE")]
        mesh: Option<PathBuf>,
    },
    /// Merge overlapping scored boxes (`x y w h score` per line)
    VoteBoxes {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let out = cli.out.as_ref();
    let text = match cli.command {
        Command::Project { camera, poses, points, mesh } => commands::project(&camera, &poses, points, mesh.as_deref())?,
        Command::ConvertPose { direction, image, bbox, mode, poses } => {
            commands::convert_pose(direction, &image, &bbox, mode, &poses)?
        }
        Command::Bbox { camera, poses, style, mesh } => commands::bbox(&camera, &poses, style, mesh.as_deref())?,
        Command::SolvePnp { input, camera, max_iterations, mesh } => {
            commands::solve_pnp_cmd(&input, &camera, max_iterations, mesh.as_deref())?
        }
        Command::GenLabels { boxes, detections, landmarks, image_size, mesh } => commands::gen_labels(
            &boxes,
            detections.as_deref(),
            landmarks.as_deref(),
            image_size.as_deref(),
            mesh.as_deref(),
            cli.jobs,
        )?,
        Command::Augment { input, mirror, scale, crop, random } => {
            let how = if random {
                commands::AugmentHow::Random { seed: cli.seed }
            } else {
                commands::AugmentHow::Fixed { mirror, scale, crop }
            };
            commands::augment(&input, how, cli.jobs)?
        }
        Command::Eval { predictions, ground_truth, select, min_score, range, style, mesh } => commands::eval(
            &predictions,
            &ground_truth,
            select,
            min_score,
            (range[0], range[1]),
            style,
            mesh.as_deref(),
            cli.jobs,
        )?,
        Command::Render { input, out_dir, style, no_points, mesh } => {
            commands::render(&input, &out_dir, style, !no_points, mesh.as_deref())?
        }
        Command::VoteBoxes { input, iou } => commands::vote_boxes(&input, iou)?,
    };
    io::emit(out, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("facepose: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
