//! COCO-style annotation files with the eight diagram categories.

use serde::{Deserialize, Serialize};

use crate::geometry::{BBox, Point, CANVAS_SIZE};

/// Annotation categories with their fixed ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Arrow = 0,
    Conditions = 1,
    FunctionalGroup = 2,
    Plus = 3,
    Products = 4,
    Reactants = 5,
    Bond = 6,
    Anchor = 7,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Arrow,
        Category::Conditions,
        Category::FunctionalGroup,
        Category::Plus,
        Category::Products,
        Category::Reactants,
        Category::Bond,
        Category::Anchor,
    ];

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Option<Category> {
        Category::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Arrow => "Arrow",
            Category::Conditions => "Conditions",
            Category::FunctionalGroup => "FunctionalGroup",
            Category::Plus => "Plus",
            Category::Products => "Products",
            Category::Reactants => "Reactants",
            Category::Bond => "Bond",
            Category::Anchor => "Anchor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// `[x, y, width, height]` in image pixels.
    pub bbox: [f64; 4],
    /// `[x, y, visibility]` for anchor keypoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<[f64; 3]>,
}

impl CocoAnnotation {
    pub fn category(&self) -> Option<Category> {
        Category::from_id(self.category_id)
    }

    pub fn rect(&self) -> BBox {
        let [x, y, w, h] = self.bbox;
        BBox::from_xywh(x, y, w, h)
    }

    /// Keypoint position, if present.
    pub fn keypoint(&self) -> Option<Point> {
        self.keypoints.map(|k| Point::new(k[0], k[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub categories: Vec<CocoCategory>,
    pub annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    pub relations: Vec<serde_json::Value>,
}

impl Default for CocoDataset {
    fn default() -> Self {
        CocoDataset {
            images: Vec::new(),
            categories: published_categories(),
            annotations: Vec::new(),
            relations: Vec::new(),
        }
    }
}

impl CocoDataset {
    pub fn image(&self, id: u64) -> Option<&CocoImage> {
        self.images.iter().find(|i| i.id == id)
    }

    /// Annotations of one image in file order.
    pub fn annotations_for(&self, image_id: u64) -> Vec<&CocoAnnotation> {
        self.annotations.iter().filter(|a| a.image_id == image_id).collect()
    }

    /// True when the category table is exactly the published one.
    pub fn has_published_categories(&self) -> bool {
        self.categories == published_categories()
    }
}

/// The eight categories in id order.
pub fn published_categories() -> Vec<CocoCategory> {
    Category::ALL
        .iter()
        .map(|c| CocoCategory {
            id: c.id(),
            name: c.name().to_string(),
        })
        .collect()
}

/// Rescales a pixel rectangle of a `width` × `height` image into the 0–1000 frame.
pub fn normalize_box(rect: BBox, width: u32, height: u32) -> BBox {
    let sx = CANVAS_SIZE / f64::from(width.max(1));
    let sy = CANVAS_SIZE / f64::from(height.max(1));
    BBox::new_unchecked(rect.x1 * sx, rect.y1 * sy, rect.x2 * sx, rect.y2 * sy)
}

/// Rescales a pixel point of a `width` × `height` image into the 0–1000 frame.
pub fn normalize_point(p: Point, width: u32, height: u32) -> Point {
    Point::new(
        p.x * CANVAS_SIZE / f64::from(width.max(1)),
        p.y * CANVAS_SIZE / f64::from(height.max(1)),
    )
}
