//! Tait–Bryan angles in the camera frame (x right, y down, z forward).
//!
//! `R = R_z(roll) · R_y(yaw) · R_x(pitch)`, all angles in degrees.

use nalgebra::Matrix3;

use super::rotation::RotationMatrix;

/// `cos(yaw)` below this is treated as gimbal lock (|yaw| within 1e-6° of 90°).
const GIMBAL_COS: f64 = 1.745_329_251_994_33e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

impl EulerAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Self {
        EulerAngles { pitch, yaw, roll }
    }
}

/// Result of decomposing a rotation into Euler angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerDecomposition {
    pub angles: EulerAngles,
    /// Set when yaw is at ±90°; roll is then fixed to 0 and pitch absorbs the rest.
    pub gimbal_lock: bool,
}

fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

pub fn mat_from_euler(e: &EulerAngles) -> RotationMatrix {
    let (sp, cp) = e.pitch.to_radians().sin_cos();
    let (sy, cy) = e.yaw.to_radians().sin_cos();
    let (sr, cr) = e.roll.to_radians().sin_cos();
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cp, -sp, 0.0, sp, cp);
    let ry = Matrix3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let rz = Matrix3::new(cr, -sr, 0.0, sr, cr, 0.0, 0.0, 0.0, 1.0);
    RotationMatrix::new_unchecked(rz * ry * rx)
}

pub fn euler_from_mat(m: &RotationMatrix) -> EulerDecomposition {
    let r = m.matrix();
    let cos_yaw = r[(0, 0)].hypot(r[(1, 0)]);
    let yaw = (-r[(2, 0)]).atan2(cos_yaw);
    if cos_yaw < GIMBAL_COS {
        let pitch = (-r[(1, 2)]).atan2(r[(1, 1)]);
        return EulerDecomposition {
            angles: EulerAngles::new(
                wrap_degrees(pitch.to_degrees()),
                wrap_degrees(yaw.to_degrees()),
                0.0,
            ),
            gimbal_lock: true,
        };
    }
    let pitch = r[(2, 1)].atan2(r[(2, 2)]);
    let roll = r[(1, 0)].atan2(r[(0, 0)]);
    EulerDecomposition {
        angles: EulerAngles::new(
            wrap_degrees(pitch.to_degrees()),
            wrap_degrees(yaw.to_degrees()),
            wrap_degrees(roll.to_degrees()),
        ),
        gimbal_lock: false,
    }
}
