use std::fmt::Write;

use super::draw::Primitive;
use super::DatasetSample;

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn points(ps: &[crate::geometry::Point]) -> String {
    ps.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect::<Vec<_>>().join(" ")
}

/// SVG document of the sample's drawing on a white canvas of the image size.
/// Text is centered on its anchor point.
pub fn render_svg(sample: &DatasetSample) -> String {
    let (w, h) = (sample.image.width, sample.image.height);
    let style = sample.provenance.style;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    for p in &sample.drawing {
        match p {
            Primitive::Line { from, to, width, dashed } => {
                let dash = if *dashed { r#" stroke-dasharray="3,2""# } else { "" };
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="{:.2}" stroke-linecap="round"{dash}/>"#,
                    from.x, from.y, to.x, to.y, width
                );
            }
            Primitive::Polyline { points: ps, width } => {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="black" stroke-width="{:.2}" stroke-linejoin="round"/>"#,
                    points(ps),
                    width
                );
            }
            Primitive::Polygon { points: ps } => {
                let _ = writeln!(out, r#"<polygon points="{}" fill="black"/>"#, points(ps));
            }
            Primitive::Text { at, text, size } => {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" font-family="{}" font-weight="{}" font-size="{:.2}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
                    at.x,
                    at.y,
                    style.font_family(),
                    style.font_weight(),
                    size,
                    esc(text)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{DatasetSample, Provenance, SampleKind, Style};
    use crate::geometry::Point;

    #[test]
    fn blank_canvas() {
        let prov = Provenance {
            kind: SampleKind::Molecule,
            source: String::new(),
            archetype: None,
            seed: 0,
            style: Style::Classic,
        };
        let s = DatasetSample::blank(120, 80, prov.clone());
        let svg = render_svg(&s);
        assert!(svg.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" width="120" height="80""#));
        assert_eq!(svg.lines().count(), 3);
        let mut t = DatasetSample::blank(10, 10, prov);
        t.drawing.push(Primitive::Text {
            at: Point::new(1.0, 2.0),
            text: "a<b".into(),
            size: 5.0,
        });
        assert!(render_svg(&t).contains(">a&lt;b</text>"));
    }
}
