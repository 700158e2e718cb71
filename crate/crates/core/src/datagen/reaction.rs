use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coco::Category;
use crate::geometry::{BBox, Point};
use crate::molgraph::{generate_2d_coords, parse_smiles, sanitize, MolecularGraph};
use crate::reaction::ReactionRecord;

use super::draw::{bounds_of, structure_piece, text_box, Piece, Primitive, GLYPH_ASPECT};
use super::{
    Archetype, DatagenError, DatasetSample, ImageSpec, Provenance, SampleAnnotation, SampleKind, Style, MAX_CANVAS,
};

const MARGIN: f64 = 10.0;
const HEAD_LENGTH: f64 = 9.0;
const HEAD_HALF_WIDTH: f64 = 4.5;
const ARROW_STROKE: f64 = 1.5;

/// Sanitized graph with 2D coordinates for one SMILES.
pub(crate) fn laid_out(smiles: &str) -> Result<MolecularGraph, DatagenError> {
    let err = |reason: String| DatagenError::Structure {
        smiles: smiles.to_string(),
        reason,
    };
    let g = parse_smiles(smiles).map_err(|e| err(e.to_string()))?;
    let g = sanitize(&g).map_err(|d| err(d.to_string()))?;
    Ok(generate_2d_coords(&g).graph)
}

/// Reaction SMILES `reactants>>products` for provenance.
pub fn reaction_smiles(record: &ReactionRecord) -> String {
    format!("{}>>{}", record.reactants.join("."), record.products.join("."))
}

struct Params {
    style: Style,
    bond_px: f64,
    gap: f64,
    text_size: f64,
    plus_size: f64,
}

struct Conditions {
    lines: Vec<String>,
    size: f64,
}

impl Conditions {
    fn new(record: &ReactionRecord, size: f64) -> Option<Conditions> {
        let lines: Vec<String> = [&record.reagents, &record.solvents]
            .into_iter()
            .filter(|l| !l.is_empty())
            .map(|l| l.join(", "))
            .collect();
        (!lines.is_empty()).then_some(Conditions { lines, size })
    }

    fn line_height(&self) -> f64 {
        1.3 * self.size
    }

    fn width(&self) -> f64 {
        self.lines
            .iter()
            .map(|l| GLYPH_ASPECT * self.size * l.chars().count() as f64)
            .fold(0.0, f64::max)
    }

    fn height(&self) -> f64 {
        self.lines.len() as f64 * self.line_height()
    }

    /// Draws the block with its top-left corner at `corner`, each line
    /// centered on `center_x` when given, else left-aligned.
    fn place(&self, corner: Point, center_x: Option<f64>, out: &mut Canvas) {
        let mut b: Option<BBox> = None;
        for (k, line) in self.lines.iter().enumerate() {
            let w = GLYPH_ASPECT * self.size * line.chars().count() as f64;
            let x = center_x.unwrap_or(corner.x + w / 2.0);
            let at = Point::new(x, corner.y + (k as f64 + 0.5) * self.line_height());
            let tb = text_box(at, line, self.size);
            b = Some(b.map_or(tb, |u| u.union(&tb)));
            out.drawing.push(Primitive::Text {
                at,
                text: line.clone(),
                size: self.size,
            });
        }
        if let Some(b) = b {
            out.annotate(Category::Conditions, b.padded(1.0));
        }
    }
}

#[derive(Default)]
struct Canvas {
    annotations: Vec<SampleAnnotation>,
    drawing: Vec<Primitive>,
}

impl Canvas {
    fn annotate(&mut self, category: Category, bbox: BBox) {
        self.annotations.push(SampleAnnotation::boxed(category, bbox));
    }

    fn molecule(&mut self, category: Category, piece: &Piece, corner: Point) {
        self.drawing.extend(piece.placed(corner));
        self.annotate(
            category,
            BBox::new_unchecked(corner.x, corner.y, corner.x + piece.width, corner.y + piece.height),
        );
    }

    fn plus(&mut self, center: Point, size: f64) {
        self.drawing.push(Primitive::Text {
            at: center,
            text: "+".into(),
            size,
        });
        self.annotate(Category::Plus, text_box(center, "+", size).padded(1.0));
    }

    /// Arrow from `tail` to `tip` along one axis, plus extra branch
    /// polylines that feed into the tail.
    fn arrow(&mut self, tail: Point, tip: Point, branches: Vec<Vec<Point>>) {
        let u = (tip - tail).normalized().unwrap_or(Point::new(1.0, 0.0));
        let n = Point::new(-u.y, u.x);
        let base = tip - u * HEAD_LENGTH;
        let mut parts = Vec::new();
        for b in branches {
            parts.push(Primitive::Polyline {
                points: b,
                width: ARROW_STROKE,
            });
        }
        parts.push(Primitive::Polyline {
            points: vec![tail, base],
            width: ARROW_STROKE,
        });
        parts.push(Primitive::Polygon {
            points: vec![tip, base + n * HEAD_HALF_WIDTH, base - n * HEAD_HALF_WIDTH],
        });
        let bounds = bounds_of(&parts).expect("arrow has parts").padded(1.0);
        self.drawing.extend(parts);
        self.annotate(Category::Arrow, bounds);
    }

    fn finish(mut self, provenance: Provenance) -> Result<DatasetSample, DatagenError> {
        let mut extent = bounds_of(&self.drawing);
        for a in &self.annotations {
            extent = Some(extent.map_or(a.bbox, |e| e.union(&a.bbox)));
        }
        let extent = extent.unwrap_or(BBox::new_unchecked(0.0, 0.0, 0.0, 0.0));
        let shift = Point::new(MARGIN - extent.x1, MARGIN - extent.y1);
        let width = (extent.width() + 2.0 * MARGIN).ceil() as u32;
        let height = (extent.height() + 2.0 * MARGIN).ceil() as u32;
        if width > MAX_CANVAS || height > MAX_CANVAS {
            return Err(DatagenError::Unplaceable {
                width,
                height,
                max: MAX_CANVAS,
            });
        }
        for a in &mut self.annotations {
            a.bbox = a.bbox.translated(shift);
        }
        Ok(DatasetSample {
            image: ImageSpec {
                width,
                height,
                file_name: String::new(),
            },
            annotations: self.annotations,
            provenance,
            drawing: self.drawing.iter().map(|p| p.translated(shift)).collect(),
        })
    }
}

enum Token<'a> {
    Molecule(Category, &'a Piece),
    Plus,
    Arrow(f64),
}

impl Token<'_> {
    fn width(&self, p: &Params) -> f64 {
        match self {
            Token::Molecule(_, piece) => piece.width,
            Token::Plus => GLYPH_ASPECT * p.plus_size + 2.0,
            Token::Arrow(len) => *len,
        }
    }

    /// (ascent, descent) around the row baseline.
    fn extent(&self, p: &Params, cond: Option<&Conditions>) -> (f64, f64) {
        match self {
            Token::Molecule(_, piece) => (piece.height / 2.0, piece.height / 2.0),
            Token::Plus => (p.plus_size / 2.0 + 1.0, p.plus_size / 2.0 + 1.0),
            Token::Arrow(_) => {
                let h = HEAD_HALF_WIDTH + 1.0;
                (h + cond.map_or(0.0, |c| c.height() + 4.0), h)
            }
        }
    }

    fn place(&self, x: f64, baseline: f64, p: &Params, cond: Option<&Conditions>, out: &mut Canvas) {
        match self {
            Token::Molecule(cat, piece) => out.molecule(*cat, piece, Point::new(x, baseline - piece.height / 2.0)),
            Token::Plus => out.plus(Point::new(x + self.width(p) / 2.0, baseline), p.plus_size),
            Token::Arrow(len) => {
                out.arrow(Point::new(x, baseline), Point::new(x + len, baseline), Vec::new());
                if let Some(c) = cond {
                    let top = baseline - HEAD_HALF_WIDTH - 1.0 - 4.0 - c.height();
                    c.place(Point::new(x, top), Some(x + len / 2.0), out);
                }
            }
        }
    }
}

fn tokens<'a>(reactants: &'a [Piece], products: &'a [Piece], arrow_len: f64) -> Vec<Token<'a>> {
    let mut out = Vec::new();
    for (i, r) in reactants.iter().enumerate() {
        if i > 0 {
            out.push(Token::Plus);
        }
        out.push(Token::Molecule(Category::Reactants, r));
    }
    out.push(Token::Arrow(arrow_len));
    for (i, r) in products.iter().enumerate() {
        if i > 0 {
            out.push(Token::Plus);
        }
        out.push(Token::Molecule(Category::Products, r));
    }
    out
}

fn rows_layout(toks: &[Token], p: &Params, cond: Option<&Conditions>, max_width: f64, out: &mut Canvas) {
    let mut rows: Vec<Vec<&Token>> = vec![Vec::new()];
    let mut used = 0.0;
    for t in toks {
        let w = t.width(p);
        let row = rows.last_mut().expect("one row");
        if !row.is_empty() && used + p.gap + w > max_width {
            rows.push(vec![t]);
            used = w;
        } else {
            used += if row.is_empty() { w } else { p.gap + w };
            rows.last_mut().expect("one row").push(t);
        }
    }
    let tallest = toks
        .iter()
        .map(|t| {
            let (a, d) = t.extent(p, cond);
            a + d
        })
        .fold(0.0, f64::max);
    let mut baseline = 0.0;
    let mut prev_descent: Option<f64> = None;
    for row in rows {
        let ascent = row.iter().map(|t| t.extent(p, cond).0).fold(0.0, f64::max);
        let descent = row.iter().map(|t| t.extent(p, cond).1).fold(0.0, f64::max);
        baseline = match prev_descent {
            None => ascent,
            Some(d) => baseline + (d + 2.0 * p.gap + ascent).max(1.6 * tallest + 20.0),
        };
        let mut x = 0.0;
        for t in row {
            t.place(x, baseline, p, cond, out);
            x += t.width(p) + p.gap;
        }
        prev_descent = Some(descent);
    }
}

fn tree_layout(reactants: &[Piece], products: &[Piece], p: &Params, cond: Option<&Conditions>, out: &mut Canvas) {
    let row = |pieces: &[Piece], top: f64, center_x: f64, cat: Category, out: &mut Canvas| -> Vec<f64> {
        let total: f64 = pieces.iter().map(|q| q.width).sum::<f64>() + p.gap * (pieces.len().saturating_sub(1)) as f64;
        let tallest = pieces.iter().map(|q| q.height).fold(0.0, f64::max);
        let mut x = center_x - total / 2.0;
        let mut centers = Vec::new();
        for q in pieces {
            out.molecule(cat, q, Point::new(x, top + (tallest - q.height) / 2.0));
            centers.push(x + q.width / 2.0);
            x += q.width + p.gap;
        }
        centers
    };
    let top_height = reactants.iter().map(|q| q.height).fold(0.0, f64::max);
    let xs = row(reactants, 0.0, 0.0, Category::Reactants, out);
    let x_c = (xs.iter().copied().fold(f64::INFINITY, f64::min) + xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)) / 2.0;
    let y_r = top_height + 6.0;
    let y_j = if xs.len() > 1 { y_r + 14.0 } else { y_r };
    let shaft = (4.0 * p.bond_px).max(cond.map_or(0.0, |c| c.height() + 14.0)).max(30.0);
    let y_h = y_j + shaft;
    let branches = if xs.len() > 1 {
        xs.iter()
            .map(|&x| vec![Point::new(x, y_r), Point::new(x, y_j), Point::new(x_c, y_j)])
            .collect()
    } else {
        Vec::new()
    };
    out.arrow(Point::new(x_c, y_j), Point::new(x_c, y_h), branches);
    let arrow_box = out.annotations.last().expect("arrow annotated").bbox;
    if let Some(c) = cond {
        let corner = Point::new(arrow_box.x2 + 8.0, (y_j + y_h) / 2.0 - c.height() / 2.0);
        c.place(corner, None, out);
    }
    row(products, y_h + 8.0, x_c, Category::Products, out);
}

/// Reaction-diagram sample in one archetype.
///
/// Linear puts reactants, plus signs, the arrow with its conditions above it,
/// and products on one row. MultiLine wraps the same sequence into left-aligned
/// rows. TreeGraph stacks the reactants in a row on top whose branch lines merge
/// into one downward arrow, with conditions to its right and products below.
/// Conditions appear only when the record has reagents or solvents.
pub fn gen_reaction_layout(record: &ReactionRecord, archetype: Archetype, seed: u64) -> Result<DatasetSample, DatagenError> {
    reaction_sample_with(record, archetype, seed, &mut |s| laid_out(s))
}

pub(crate) fn reaction_sample_with(
    record: &ReactionRecord,
    archetype: Archetype,
    seed: u64,
    layout: &mut dyn FnMut(&str) -> Result<MolecularGraph, DatagenError>,
) -> Result<DatasetSample, DatagenError> {
    if record.reactants.is_empty() || record.products.is_empty() {
        return Err(DatagenError::EmptyReaction);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let style = Style::ALL[rng.random_range(0..Style::ALL.len())];
    let text_size: f64 = rng.random_range(10.0..13.0);
    let p = Params {
        style,
        bond_px: rng.random_range(12.0..18.0),
        gap: rng.random_range(14.0..26.0),
        text_size,
        plus_size: text_size * 1.4,
    };
    let mut piece = |s: &String| -> Result<Piece, DatagenError> { Ok(structure_piece(&layout(s)?, p.bond_px, p.style, 2.0)) };
    let reactants = record.reactants.iter().map(&mut piece).collect::<Result<Vec<_>, _>>()?;
    let products = record.products.iter().map(&mut piece).collect::<Result<Vec<_>, _>>()?;
    let cond = Conditions::new(record, p.text_size);
    let arrow_len = (4.0 * p.bond_px).max(cond.as_ref().map_or(0.0, |c| c.width() + 16.0));
    let mut canvas = Canvas::default();
    match archetype {
        Archetype::Linear => rows_layout(&tokens(&reactants, &products, arrow_len), &p, cond.as_ref(), f64::INFINITY, &mut canvas),
        Archetype::MultiLine => {
            let toks = tokens(&reactants, &products, arrow_len);
            let widest = toks.iter().map(|t| t.width(&p)).fold(0.0, f64::max);
            let total: f64 = toks.iter().map(|t| t.width(&p)).sum::<f64>() + p.gap * (toks.len() - 1) as f64;
            rows_layout(&toks, &p, cond.as_ref(), widest.max(0.55 * total), &mut canvas);
        }
        Archetype::TreeGraph => tree_layout(&reactants, &products, &p, cond.as_ref(), &mut canvas),
    }
    canvas.finish(Provenance {
        kind: SampleKind::Reaction,
        source: reaction_smiles(record),
        archetype: Some(archetype),
        seed,
        style,
    })
}
