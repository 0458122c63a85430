//! Rotation vectors, rotation matrices and the conversions between them.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Tolerance used when accepting a caller-supplied matrix as a rotation.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

/// Smallest |det| accepted for a general 3x3 linear map.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Axis-angle rotation: direction is the axis, norm is the angle in radians.
///
/// Always canonical: the angle lies in `[0, π]`. At exactly `π` the axis sign
/// is chosen so that its first non-zero component is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationVector(Vector3<f64>);

impl RotationVector {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Self {
        Self::from_vector(Vector3::new(rx, ry, rz))
    }

    pub fn identity() -> Self {
        RotationVector(Vector3::zeros())
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        RotationVector(canonicalize(v))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    /// Rotation angle in radians, in `[0, π]`.
    pub fn angle(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        rot_vec_to_mat(self)
    }
}

fn canonicalize(v: Vector3<f64>) -> Vector3<f64> {
    let angle = v.norm();
    if !angle.is_finite() || angle <= PI - 1e-12 {
        return v;
    }
    let axis = v / angle;
    let wrapped = angle.rem_euclid(2.0 * PI);
    let out = if wrapped > PI + 1e-12 {
        -axis * (2.0 * PI - wrapped)
    } else {
        axis * wrapped
    };
    if (out.norm() - PI).abs() <= 1e-12 {
        let first = out.iter().copied().find(|c| *c != 0.0).unwrap_or(0.0);
        if first < 0.0 {
            return -out;
        }
    }
    out
}

/// A proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    /// Accepts `m` if it is orthonormal with determinant +1 to [`ORTHONORMAL_TOL`].
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let deviation = orthonormality_deviation(&m);
        if !deviation.is_finite() || deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(RotationMatrix(m))
    }

    pub(crate) fn new_unchecked(m: Matrix3<f64>) -> Self {
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    pub fn to_rotation_vector(&self) -> RotationVector {
        rotation_vector_from_orthonormal(&self.0)
    }

    /// Angle of `self * other^T`, in radians.
    pub fn angle_to(&self, other: &RotationMatrix) -> f64 {
        rotation_vector_from_orthonormal(&(self.0 * other.0.transpose())).angle()
    }
}

/// Max of `|MᵀM − I|` entries and `|det M − 1|`.
pub fn orthonormality_deviation(m: &Matrix3<f64>) -> f64 {
    let gram = m.transpose() * m - Matrix3::identity();
    let ortho = gram.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    ortho.max((m.determinant() - 1.0).abs())
}

/// An invertible 3x3 linear map, e.g. a rotation composed with an intrinsics shear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralLinear3(Matrix3<f64>);

impl GeneralLinear3 {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let determinant = m.determinant();
        if !determinant.is_finite() || determinant.abs() <= SINGULAR_TOL {
            return Err(Error::Singular { determinant });
        }
        Ok(GeneralLinear3(m))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

impl From<RotationMatrix> for GeneralLinear3 {
    fn from(r: RotationMatrix) -> Self {
        GeneralLinear3(r.0)
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues' formula. The zero vector maps to the identity.
pub fn rot_vec_to_mat(rv: &RotationVector) -> RotationMatrix {
    let v = rv.0;
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    // sin(θ)/θ and (1 − cos θ)/θ², with series near zero
    let (a, b) = if theta < 1e-6 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        let half = (0.5 * theta).sin();
        (theta.sin() / theta, 2.0 * half * half / theta2)
    };
    let k = skew(&v);
    RotationMatrix(Matrix3::identity() + k * a + k * k * b)
}

/// Inverse of [`rot_vec_to_mat`]. Rejects matrices that are not rotations to
/// within [`ORTHONORMAL_TOL`]; orthogonalize first with [`nearest_rotation`].
pub fn mat_to_rot_vec(m: &Matrix3<f64>) -> Result<RotationVector> {
    let r = RotationMatrix::new(*m)?;
    Ok(r.to_rotation_vector())
}

fn rotation_vector_from_orthonormal(m: &Matrix3<f64>) -> RotationVector {
    // Shepperd's branch selection keeps the quaternion well conditioned everywhere.
    let tr = m.trace();
    let (m00, m11, m22) = (m[(0, 0)], m[(1, 1)], m[(2, 2)]);
    let (w, x, y, z);
    if tr >= m00 && tr >= m11 && tr >= m22 {
        let s = 0.5 * (1.0 + tr).max(0.0).sqrt();
        let d = 0.25 / s;
        w = s;
        x = (m[(2, 1)] - m[(1, 2)]) * d;
        y = (m[(0, 2)] - m[(2, 0)]) * d;
        z = (m[(1, 0)] - m[(0, 1)]) * d;
    } else if m00 >= m11 && m00 >= m22 {
        let s = 0.5 * (1.0 + m00 - m11 - m22).max(0.0).sqrt();
        let d = 0.25 / s;
        x = s;
        w = (m[(2, 1)] - m[(1, 2)]) * d;
        y = (m[(0, 1)] + m[(1, 0)]) * d;
        z = (m[(0, 2)] + m[(2, 0)]) * d;
    } else if m11 >= m22 {
        let s = 0.5 * (1.0 - m00 + m11 - m22).max(0.0).sqrt();
        let d = 0.25 / s;
        y = s;
        w = (m[(0, 2)] - m[(2, 0)]) * d;
        x = (m[(0, 1)] + m[(1, 0)]) * d;
        z = (m[(1, 2)] + m[(2, 1)]) * d;
    } else {
        let s = 0.5 * (1.0 - m00 - m11 + m22).max(0.0).sqrt();
        let d = 0.25 / s;
        z = s;
        w = (m[(1, 0)] - m[(0, 1)]) * d;
        x = (m[(0, 2)] + m[(2, 0)]) * d;
        y = (m[(1, 2)] + m[(2, 1)]) * d;
    }
    let sign = if w < 0.0 { -1.0 } else { 1.0 };
    let q = Vector3::new(x, y, z) * sign;
    let w = w * sign;
    let s = q.norm();
    if s == 0.0 {
        return RotationVector::identity();
    }
    let angle = 2.0 * s.atan2(w);
    RotationVector::from_vector(q * (angle / s))
}

/// Orthogonal Procrustes: the rotation closest to `g` in Frobenius norm.
pub fn nearest_rotation(g: &GeneralLinear3) -> RotationMatrix {
    let svd = g.0.svd(true, true);
    // both factors are requested above
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut correction = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        let (smallest, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, s)| if *s < best.1 { (i, *s) } else { best });
        correction[(smallest, smallest)] = -1.0;
    }
    RotationMatrix(u * correction * v_t)
}
