//! Rotations, intrinsics and pinhole projection shared by every other module.

mod bbox;
mod camera;
mod euler;
mod pose;
mod rotation;

pub use bbox::{BBox, ImageSize};
pub use camera::{
    box_intrinsics, crop_intrinsics, image_intrinsics, project, project_extrinsics, Intrinsics,
    MIN_DEPTH,
};
pub use euler::{euler_from_mat, mat_from_euler, EulerAngles, EulerDecomposition};
pub use pose::{Extrinsics, Pose6DoF};
pub use rotation::{
    mat_to_rot_vec, nearest_rotation, orthonormality_deviation, rot_vec_to_mat, GeneralLinear3,
    RotationMatrix, RotationVector, ORTHONORMAL_TOL, SINGULAR_TOL,
};
