//! Planar geometry shared by depiction, anchors and template alignment.
//!
//! Two frames appear throughout the crate: depiction units (bond length 1.0,
//! y pointing up) produced by layout, and the 0–1000 canvas (y pointing down)
//! in which boxes and anchor keypoints are exchanged.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        (n > 1e-12).then(|| Point::new(self.x / n, self.y / n))
    }

    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_angle(angle: f64) -> Point {
        Point::new(angle.cos(), angle.sin())
    }

    pub fn centroid(points: &[Point]) -> Point {
        if points.is_empty() {
            return Point::ORIGIN;
        }
        let n = points.len() as f64;
        let sum = points.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        Point::new(sum.x / n, sum.y / n)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BoxError {
    #[error("degenerate box [{0}, {1}, {2}, {3}]: need x1 < x2 and y1 < y2")]
    Degenerate(f64, f64, f64, f64),
    #[error("box [{0}, {1}, {2}, {3}] leaves the 0-1000 canvas")]
    OutOfCanvas(f64, f64, f64, f64),
}

/// Axis-aligned rectangle as `[x1, y1, x2, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", from = "[f64; 4]")]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

impl From<[f64; 4]> for BBox {
    fn from(a: [f64; 4]) -> Self {
        BBox::new_unchecked(a[0], a[1], a[2], a[3])
    }
}

pub const CANVAS_SIZE: f64 = 1000.0;

impl BBox {
    /// Builds a box that satisfies the canvas invariants.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<BBox, BoxError> {
        let b = BBox::new_unchecked(x1, y1, x2, y2);
        b.validate()?;
        Ok(b)
    }

    pub const fn new_unchecked(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox { x1, y1, x2, y2 }
    }

    /// Converts a COCO `[x, y, width, height]` box.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new_unchecked(x, y, x + w, y + h)
    }

    pub fn to_xywh(self) -> [f64; 4] {
        [self.x1, self.y1, self.width(), self.height()]
    }

    pub fn validate(&self) -> Result<(), BoxError> {
        let BBox { x1, y1, x2, y2 } = *self;
        if !(x1 < x2 && y1 < y2) {
            return Err(BoxError::Degenerate(x1, y1, x2, y2));
        }
        let inside = |v: f64| (0.0..=CANVAS_SIZE).contains(&v);
        if !(inside(x1) && inside(y1) && inside(x2) && inside(y2)) {
            return Err(BoxError::OutOfCanvas(x1, y1, x2, y2));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.x1 < self.x2 && self.y1 < self.y2)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn contains(&self, p: Point, tolerance: f64) -> bool {
        p.x >= self.x1 - tolerance
            && p.x <= self.x2 + tolerance
            && p.y >= self.y1 - tolerance
            && p.y <= self.y2 + tolerance
    }

    pub fn contains_box(&self, other: &BBox, tolerance: f64) -> bool {
        other.x1 >= self.x1 - tolerance
            && other.y1 >= self.y1 - tolerance
            && other.x2 <= self.x2 + tolerance
            && other.y2 <= self.y2 + tolerance
    }

    pub fn intersects(&self, other: &BBox, tolerance: f64) -> bool {
        self.x1 <= other.x2 + tolerance
            && other.x1 <= self.x2 + tolerance
            && self.y1 <= other.y2 + tolerance
            && other.y1 <= self.y2 + tolerance
    }

    /// Overlap area of two boxes.
    pub fn overlap(&self, other: &BBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox::new_unchecked(
            self.x1.min(other.x1),
            self.y1.min(other.y1),
            self.x2.max(other.x2),
            self.y2.max(other.y2),
        )
    }

    pub fn padded(&self, margin: f64) -> BBox {
        BBox::new_unchecked(
            self.x1 - margin,
            self.y1 - margin,
            self.x2 + margin,
            self.y2 + margin,
        )
    }

    pub fn translated(&self, d: Point) -> BBox {
        BBox::new_unchecked(self.x1 + d.x, self.y1 + d.y, self.x2 + d.x, self.y2 + d.y)
    }

    /// Distance from a point to the nearest point of the box (0 inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        let dx = (self.x1 - p.x).max(0.0).max(p.x - self.x2);
        let dy = (self.y1 - p.y).max(0.0).max(p.y - self.y2);
        dx.hypot(dy)
    }
}

/// Fraction of the box diagonal added on every side of group and atom boxes.
pub const BOX_PADDING_FRACTION: f64 = 0.04;

/// Half-extent of an unlabeled (carbon) vertex, in depiction units.
pub const VERTEX_HALF_EXTENT: f64 = 0.1;
/// Half-height of a text label, in depiction units.
pub const LABEL_HALF_HEIGHT: f64 = 0.3;
/// Width of one label glyph, in depiction units.
pub const GLYPH_WIDTH: f64 = 0.36;

/// Text drawn for an atom, or `None` for a bare carbon vertex.
pub fn atom_label(symbol: &str, hydrogens: u8, charge: i8, is_carbon: bool) -> Option<String> {
    if is_carbon && charge == 0 {
        return None;
    }
    let mut label = symbol.to_string();
    if !is_carbon && hydrogens > 0 {
        label.push('H');
        if hydrogens > 1 {
            label.push_str(&hydrogens.to_string());
        }
    }
    match charge {
        0 => {}
        1 => label.push('+'),
        -1 => label.push('-'),
        c if c > 0 => label.push_str(&format!("{c}+")),
        c => label.push_str(&format!("{}-", -c)),
    }
    Some(label)
}

/// Half-width and half-height of the drawn extent of an atom, in depiction units.
pub fn label_half_extents(label: Option<&str>) -> (f64, f64) {
    match label {
        None => (VERTEX_HALF_EXTENT, VERTEX_HALF_EXTENT),
        Some(text) => {
            let glyphs = text.chars().count().max(1) as f64;
            (glyphs * GLYPH_WIDTH / 2.0 + 0.05, LABEL_HALF_HEIGHT)
        }
    }
}

/// Bounding box of labeled atoms, padded by [`BOX_PADDING_FRACTION`] of its diagonal.
///
/// `extents` are half-width/half-height pairs in the same frame as `points`.
pub fn padded_extent_box(points: &[Point], extents: &[(f64, f64)]) -> Option<BBox> {
    let mut iter = points.iter().zip(extents);
    let (p, &(hw, hh)) = iter.next()?;
    let mut b = BBox::new_unchecked(p.x - hw, p.y - hh, p.x + hw, p.y + hh);
    for (p, &(hw, hh)) in iter {
        b = b.union(&BBox::new_unchecked(p.x - hw, p.y - hh, p.x + hw, p.y + hh));
    }
    Some(b.padded(b.diagonal() * BOX_PADDING_FRACTION))
}

/// Uniform scale + translation from depiction units onto the 0–1000 canvas,
/// flipping y so the drawing reads the same way up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasMapping {
    pub scale: f64,
    pub offset_x: f64,
    pub offset_y: f64,
}

/// Blank border kept around a molecule on the canvas.
pub const CANVAS_MARGIN: f64 = 60.0;

impl CanvasMapping {
    /// Fits the given depiction-space rectangle into the canvas, centered.
    pub fn fit(extent: BBox) -> CanvasMapping {
        let usable = CANVAS_SIZE - 2.0 * CANVAS_MARGIN;
        let w = extent.width().max(1e-9);
        let h = extent.height().max(1e-9);
        let scale = (usable / w).min(usable / h);
        let pad_x = (CANVAS_SIZE - w * scale) / 2.0;
        let pad_y = (CANVAS_SIZE - h * scale) / 2.0;
        CanvasMapping {
            scale,
            offset_x: pad_x - extent.x1 * scale,
            offset_y: pad_y + extent.y2 * scale,
        }
    }

    pub fn map(&self, p: Point) -> Point {
        Point::new(
            p.x * self.scale + self.offset_x,
            self.offset_y - p.y * self.scale,
        )
    }

    pub fn unmap(&self, p: Point) -> Point {
        Point::new(
            (p.x - self.offset_x) / self.scale,
            (self.offset_y - p.y) / self.scale,
        )
    }
}
