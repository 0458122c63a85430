use nalgebra::{Matrix3, Vector3};

use super::rotation::{nearest_rotation, GeneralLinear3, RotationMatrix, RotationVector};
use crate::error::{Error, Result};

/// Rigid face pose `(r_x, r_y, r_z, t_x, t_y, t_z)`: rotation vector plus translation
/// in the units of the reference face model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose6DoF {
    pub rotation: RotationVector,
    pub translation: Vector3<f64>,
}

impl Pose6DoF {
    pub fn new(rotation: RotationVector, translation: Vector3<f64>) -> Self {
        Pose6DoF { rotation, translation }
    }

    pub fn from_array(h: [f64; 6]) -> Self {
        Pose6DoF {
            rotation: RotationVector::new(h[0], h[1], h[2]),
            translation: Vector3::new(h[3], h[4], h[5]),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        let r = self.rotation.as_vector();
        let t = &self.translation;
        [r.x, r.y, r.z, t.x, t.y, t.z]
    }

    pub fn from_rotation(r: &RotationMatrix, translation: Vector3<f64>) -> Self {
        Pose6DoF { rotation: r.to_rotation_vector(), translation }
    }

    pub fn rotation_matrix(&self) -> RotationMatrix {
        self.rotation.to_matrix()
    }

    pub fn extrinsics(&self) -> Extrinsics {
        Extrinsics {
            linear: *self.rotation_matrix().matrix(),
            translation: self.translation,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.is_finite() && self.translation.iter().all(|v| v.is_finite())
    }

    pub(crate) fn require_in_front(&self) -> Result<()> {
        if self.translation.z > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "pose depth t_z must be positive, got {}",
                self.translation.z
            )))
        }
    }
}

/// `[L | t]` with `L` an arbitrary 3x3 map. Rigid poses have `L` orthonormal;
/// pose conversion between cameras produces a shear times a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrinsics {
    pub linear: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Extrinsics {
    /// Nearest rigid pose: orthogonal Procrustes on the linear part.
    pub fn orthogonalize(&self) -> Result<Pose6DoF> {
        let g = GeneralLinear3::new(self.linear)?;
        Ok(Pose6DoF::from_rotation(&nearest_rotation(&g), self.translation))
    }

    pub fn general_linear(&self) -> Result<GeneralLinear3> {
        GeneralLinear3::new(self.linear)
    }
}
