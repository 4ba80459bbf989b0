//! Dependency-free SVG output: trajectory overlays and scatter plots.
//!
//! World coordinates are y-up; the writer flips them into SVG's y-down frame.

use std::fmt::Write;

use crate::geom::Vec2;

#[derive(Debug, Clone, Copy)]
struct Bounds {
    lo: Vec2,
    hi: Vec2,
}

impl Bounds {
    fn of<'a>(points: impl IntoIterator<Item = &'a Vec2>) -> Option<Bounds> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        Some(it.fold(Bounds { lo: first, hi: first }, |b, p| Bounds {
            lo: Vec2::new(b.lo.x.min(p.x), b.lo.y.min(p.y)),
            hi: Vec2::new(b.hi.x.max(p.x), b.hi.y.max(p.y)),
        }))
    }
}

/// A drawing accumulated in world coordinates and rendered once at the end.
#[derive(Debug, Default)]
pub struct Drawing {
    items: Vec<Item>,
    groups: Vec<(String, Vec<Item>)>,
}

#[derive(Debug, Clone)]
enum Item {
    Path { points: Vec<Vec2>, stroke: String, width: f64 },
    Polyline { points: Vec<Vec2>, stroke: String, width: f64 },
    Circle { center: Vec2, radius: f64, fill: String },
    Text { at: Vec2, text: String },
}

impl Item {
    fn points(&self) -> Vec<Vec2> {
        match self {
            Item::Path { points, .. } | Item::Polyline { points, .. } => points.clone(),
            Item::Circle { center, radius, .. } => {
                vec![*center - Vec2::new(*radius, *radius), *center + Vec2::new(*radius, *radius)]
            }
            Item::Text { at, .. } => vec![*at],
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Drawing {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, item: Item) {
        match self.groups.last_mut() {
            Some((_, items)) => items.push(item),
            None => self.items.push(item),
        }
    }

    /// Starts a `<g>`; everything added until the next call lands in it.
    pub fn group(&mut self, id: &str) -> &mut Self {
        self.groups.push((id.to_owned(), Vec::new()));
        self
    }

    pub fn path(&mut self, points: &[Vec2], stroke: &str, width: f64) -> &mut Self {
        self.push(Item::Path { points: points.to_vec(), stroke: stroke.to_owned(), width });
        self
    }

    pub fn polyline(&mut self, points: &[Vec2], stroke: &str, width: f64) -> &mut Self {
        self.push(Item::Polyline { points: points.to_vec(), stroke: stroke.to_owned(), width });
        self
    }

    pub fn circle(&mut self, center: Vec2, radius: f64, fill: &str) -> &mut Self {
        self.push(Item::Circle { center, radius, fill: fill.to_owned() });
        self
    }

    pub fn text(&mut self, at: Vec2, text: &str) -> &mut Self {
        self.push(Item::Text { at, text: text.to_owned() });
        self
    }

    /// Renders with `margin` world units of padding around everything drawn.
    pub fn render(&self, margin: f64) -> String {
        let all: Vec<Vec2> = self
            .items
            .iter()
            .chain(self.groups.iter().flat_map(|(_, g)| g))
            .flat_map(Item::points)
            .collect();
        let b = Bounds::of(&all).unwrap_or(Bounds { lo: Vec2::new(0.0, 0.0), hi: Vec2::new(1.0, 1.0) });
        let (w, h) = ((b.hi.x - b.lo.x).max(1e-9) + 2.0 * margin, (b.hi.y - b.lo.y).max(1e-9) + 2.0 * margin);
        let map = |p: Vec2| (p.x - b.lo.x + margin, b.hi.y - p.y + margin);
        let mut out = String::new();
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}">"#).unwrap();
        let draw = |out: &mut String, item: &Item, indent: &str| {
            let coords = |pts: &[Vec2]| {
                pts.iter().map(|&p| map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect::<Vec<_>>().join(" ")
            };
            match item {
                Item::Path { points, stroke, width } => {
                    let d = coords(points).replacen("", "M", 1).replace(' ', " L");
                    writeln!(out, r#"{indent}<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#)
                }
                Item::Polyline { points, stroke, width } => writeln!(
                    out,
                    r#"{indent}<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
                    coords(points)
                ),
                Item::Circle { center, radius, fill } => {
                    let (x, y) = map(*center);
                    writeln!(out, r#"{indent}<circle cx="{x:.3}" cy="{y:.3}" r="{radius}" fill="{fill}"/>"#)
                }
                Item::Text { at, text } => {
                    let (x, y) = map(*at);
                    writeln!(out, r#"{indent}<text x="{x:.3}" y="{y:.3}" font-size="{:.3}">{}</text>"#, h / 40.0, escape(text))
                }
            }
            .unwrap()
        };
        for item in &self.items {
            draw(&mut out, item, "  ");
        }
        for (id, items) in &self.groups {
            writeln!(out, r#"  <g id="{}">"#, escape(id)).unwrap();
            for item in items {
                draw(&mut out, item, "    ");
            }
            out.push_str("  </g>\n");
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Scatter plot of `(x, y)` pairs scaled into a 100×100 box.
pub fn scatter(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let xmax = points.iter().map(|p| p.0).fold(0.0_f64, f64::max).max(1e-9);
    let ymax = points.iter().map(|p| p.1).fold(0.0_f64, f64::max).max(1e-9);
    let mut d = Drawing::new();
    d.path(&[Vec2::new(0.0, 100.0), Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)], "black", 0.3);
    d.text(Vec2::new(80.0, -6.0), x_label).text(Vec2::new(-8.0, 104.0), y_label);
    d.group("points");
    for &(x, y) in points {
        d.circle(Vec2::new(100.0 * x / xmax, 100.0 * y / ymax), 0.8, "steelblue");
    }
    d.render(10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_and_shapes() {
        let mut d = Drawing::new();
        d.path(&[Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)], "gray", 1.0);
        d.group("a").polyline(&[Vec2::new(0.0, 0.0), Vec2::new(5.0, 5.0)], "red", 0.5);
        d.group("b").polyline(&[Vec2::new(0.0, 1.0), Vec2::new(5.0, 6.0)], "blue", 0.5);
        let svg = d.render(1.0);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<g ").count(), 2);
        assert!(svg.contains(r#"<path d="M1.000,7.000 L11.000,7.000""#), "{svg}");
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn scatter_counts_points() {
        let svg = scatter(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)], "density", "flow <veh/step>");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("flow &lt;veh/step&gt;"));
    }
}
