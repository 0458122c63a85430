use nalgebra::Point2;

use crate::error::{Error, Result};

/// Axis-aligned box `(x, y, w, h)` in pixels; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidInput("box coordinates must be finite".into()));
        }
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidInput(format!("box dimensions must be positive, got {w}x{h}")));
        }
        Ok(BBox { x, y, w, h })
    }

    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        BBox::new(x1, y1, x2 - x1, y2 - y1)
    }

    /// Tight box around a point set.
    pub fn enclosing(points: &[Point2<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("cannot bound an empty point set".into()));
        }
        let (mut x1, mut y1) = (f64::INFINITY, f64::INFINITY);
        let (mut x2, mut y2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x1 = x1.min(p.x);
            y1 = y1.min(p.y);
            x2 = x2.max(p.x);
            y2 = y2.max(p.y);
        }
        BBox::from_corners(x1, y1, x2, y2)
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn width(&self) -> f64 {
        self.w
    }
    pub fn height(&self) -> f64 {
        self.h
    }
    pub fn x2(&self) -> f64 {
        self.x + self.w
    }
    pub fn y2(&self) -> f64 {
        self.y + self.h
    }
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point2<f64> {
        Point2::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.x >= self.x && p.x <= self.x2() && p.y >= self.y && p.y <= self.y2()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox { x: self.x + dx, y: self.y + dy, ..*self }
    }

    pub fn scaled(&self, s: f64) -> Result<BBox> {
        BBox::new(self.x * s, self.y * s, self.w * s, self.h * s)
    }

    /// Horizontal reflection inside an image of width `image_width`.
    pub fn mirrored(&self, image_width: f64) -> BBox {
        BBox { x: image_width - self.x - self.w, ..*self }
    }

    /// Intersection with the image rectangle, `None` if they do not overlap.
    pub fn clipped(&self, image: ImageSize) -> Option<BBox> {
        let x1 = self.x.max(0.0);
        let y1 = self.y.max(0.0);
        let x2 = self.x2().min(image.width());
        let y2 = self.y2().min(image.height());
        BBox::from_corners(x1, y1, x2, y2).ok()
    }

    /// `true` if the box lies inside `image`.
    pub fn within(&self, image: ImageSize) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x2() <= image.width() && self.y2() <= image.height()
    }
}

/// Image dimensions in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSize {
    width: f64,
    height: f64,
}

impl ImageSize {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0 {
            Ok(ImageSize { width, height })
        } else {
            Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )))
        }
    }

    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn full_box(&self) -> BBox {
        BBox { x: 0.0, y: 0.0, w: self.width, h: self.height }
    }

    pub fn center(&self) -> Point2<f64> {
        Point2::new(self.width / 2.0, self.height / 2.0)
    }
}
