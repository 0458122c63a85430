//! Pose conversion between a crop (proposal) camera and the full-image camera.
//!
//! Local to global runs in two steps: rescale depth so the crop camera views the
//! whole image, then move the principal point from the crop center to the image
//! center. Global to local runs the same steps in reverse order.
//!
//! Moving the principal point turns the rotation into `K_img⁻¹ K_box R`, a shear
//! times a rotation. [`ConversionMode::Raw`] keeps that linear map so projections
//! stay exact; [`ConversionMode::Orthogonalized`] replaces it with the nearest
//! rotation.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{
    box_intrinsics, image_intrinsics, BBox, Extrinsics, GeneralLinear3, ImageSize, Intrinsics,
    Pose6DoF,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConversionMode {
    #[default]
    Orthogonalized,
    Raw,
}

/// A crop of an image: the proposal box plus the dimensions of the image it came from.
/// The box may extend past the image border.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropFrame {
    pub bbox: BBox,
    pub image: ImageSize,
}

impl CropFrame {
    pub fn new(bbox: BBox, image: ImageSize) -> Self {
        CropFrame { bbox, image }
    }

    fn image_focal(&self) -> f64 {
        self.image.width() + self.image.height()
    }

    fn crop_focal(&self) -> f64 {
        self.bbox.width() + self.bbox.height()
    }

    pub fn box_camera(&self) -> Result<Intrinsics> {
        box_intrinsics(&self.bbox, self.image)
    }

    pub fn image_camera(&self) -> Result<Intrinsics> {
        image_intrinsics(self.image)
    }
}

/// Coordinate frame a pose is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    CropLocal(CropFrame),
    ImageGlobal(ImageSize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedPose {
    pub pose: Pose6DoF,
    pub frame: Frame,
}

/// Output of a conversion. `pose` always carries a proper rotation; `linear`
/// holds the unorthogonalized map in raw mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvertedPose {
    pub pose: Pose6DoF,
    pub linear: Option<GeneralLinear3>,
}

impl ConvertedPose {
    fn from_extrinsics(ext: &Extrinsics, mode: ConversionMode) -> Result<Self> {
        let pose = ext.orthogonalize()?;
        let linear = match mode {
            ConversionMode::Orthogonalized => None,
            ConversionMode::Raw => Some(ext.general_linear()?),
        };
        Ok(ConvertedPose { pose, linear })
    }

    /// The extrinsics this conversion stands for: raw linear part if present.
    pub fn extrinsics(&self) -> Extrinsics {
        match &self.linear {
            Some(g) => Extrinsics { linear: *g.matrix(), translation: self.pose.translation },
            None => self.pose.extrinsics(),
        }
    }
}

fn require_depth(ext: &Extrinsics) -> Result<()> {
    if ext.translation.z > 0.0 && ext.translation.z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "pose depth t_z must be positive, got {}",
            ext.translation.z
        )))
    }
}

/// Re-express `[L | t]` under camera `to` so that `K_from [L | t] = K_to [L' | t']`.
pub fn shift_principal_point(ext: &Extrinsics, from: &Intrinsics, to: &Intrinsics) -> Extrinsics {
    let m: Matrix3<f64> = to.inverse_matrix() * from.matrix();
    let v = from.matrix() * ext.translation;
    Extrinsics {
        linear: m * ext.linear,
        translation: to.inverse_matrix() * v,
    }
}

/// Depth rescale of the local-to-global conversion: crop camera to the intermediate
/// camera `K_box`. Only `t_z` changes.
pub fn rescale_to_image(ext: &Extrinsics, crop: &CropFrame) -> Extrinsics {
    let f = crop.image_focal();
    let mut out = *ext;
    out.translation.z = ext.translation.z * f / crop.crop_focal();
    out
}

/// Inverse of [`rescale_to_image`].
pub fn rescale_to_crop(ext: &Extrinsics, crop: &CropFrame) -> Extrinsics {
    let f = crop.image_focal();
    let mut out = *ext;
    out.translation.z = ext.translation.z / f * crop.crop_focal();
    out
}

/// Crop-frame extrinsics to image-frame extrinsics, without orthogonalization.
pub fn local_to_global_raw(ext: &Extrinsics, crop: &CropFrame) -> Result<Extrinsics> {
    require_depth(ext)?;
    let k_box = crop.box_camera()?;
    let k_img = crop.image_camera()?;
    let intermediate = rescale_to_image(ext, crop);
    Ok(shift_principal_point(&intermediate, &k_box, &k_img))
}

/// Image-frame extrinsics to crop-frame extrinsics, without orthogonalization.
pub fn global_to_local_raw(ext: &Extrinsics, crop: &CropFrame) -> Result<Extrinsics> {
    require_depth(ext)?;
    let k_box = crop.box_camera()?;
    let k_img = crop.image_camera()?;
    let shifted = shift_principal_point(ext, &k_img, &k_box);
    Ok(rescale_to_crop(&shifted, crop))
}

/// Pose predicted for a crop to the full-image frame.
pub fn local_to_global(
    pose: &Pose6DoF,
    crop: &CropFrame,
    mode: ConversionMode,
) -> Result<ConvertedPose> {
    pose.require_in_front()?;
    let ext = local_to_global_raw(&pose.extrinsics(), crop)?;
    ConvertedPose::from_extrinsics(&ext, mode)
}

/// Image-frame pose label to the frame of a crop.
pub fn global_to_local(
    pose: &Pose6DoF,
    crop: &CropFrame,
    mode: ConversionMode,
) -> Result<ConvertedPose> {
    pose.require_in_front()?;
    let ext = global_to_local_raw(&pose.extrinsics(), crop)?;
    ConvertedPose::from_extrinsics(&ext, mode)
}

/// Treat `region` of the image as a new, region-sized image and re-express the
/// global pose against that image's camera.
///
/// Raw mode rescales the whole depth row of `[L | t]`, which is the exact
/// counterpart of the focal-length change, so projections in the new image are
/// the original ones shifted by `(-region.x, -region.y)`. Orthogonalized mode uses
/// [`global_to_local`] followed by the nearest rotation.
pub fn rebase_to_subimage_raw(ext: &Extrinsics, region: &BBox, image: ImageSize) -> Result<Extrinsics> {
    require_depth(ext)?;
    let crop = CropFrame::new(*region, image);
    let shifted = shift_principal_point(ext, &crop.image_camera()?, &crop.box_camera()?);
    let s = crop.crop_focal() / crop.image_focal();
    let mut out = shifted;
    for c in 0..3 {
        out.linear[(2, c)] *= s;
    }
    out.translation.z *= s;
    Ok(out)
}

pub fn rebase_to_subimage(
    pose: &Pose6DoF,
    region: &BBox,
    image: ImageSize,
    mode: ConversionMode,
) -> Result<(ConvertedPose, ImageSize)> {
    let new_size = ImageSize::new(region.width(), region.height())?;
    let converted = match mode {
        ConversionMode::Raw => {
            let ext = rebase_to_subimage_raw(&pose.extrinsics(), region, image)?;
            ConvertedPose::from_extrinsics(&ext, ConversionMode::Raw)?
        }
        ConversionMode::Orthogonalized => {
            global_to_local(pose, &CropFrame::new(*region, image), ConversionMode::Orthogonalized)?
        }
    };
    Ok((converted, new_size))
}

/// Convert a framed pose into another frame of the same image.
pub fn convert_framed(fp: &FramedPose, target: Frame, mode: ConversionMode) -> Result<ConvertedPose> {
    let image_of = |f: &Frame| match f {
        Frame::CropLocal(c) => c.image,
        Frame::ImageGlobal(s) => *s,
    };
    if image_of(&fp.frame) != image_of(&target) {
        return Err(Error::FrameMismatch("frames refer to different images".into()));
    }
    let global = match &fp.frame {
        Frame::CropLocal(c) => local_to_global_raw(&fp.pose.extrinsics(), c)?,
        Frame::ImageGlobal(_) => fp.pose.extrinsics(),
    };
    let out = match &target {
        Frame::CropLocal(c) => global_to_local_raw(&global, c)?,
        Frame::ImageGlobal(_) => global,
    };
    ConvertedPose::from_extrinsics(&out, mode)
}
