//! SVG rendering of a score grid.

use std::fmt::Write;

use interlex::aggregate::IntelligibilityMatrix;
use interlex::dli::ChannelConfig;

const CELL: usize = 64;
const MARGIN: usize = 48;

fn blend(t: f64) -> String {
    // White to dark blue.
    let lo = [247.0, 251.0, 255.0];
    let hi = [8.0, 48.0, 107.0];
    let c: Vec<u8> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| (a + (b - a) * t.clamp(0.0, 1.0)).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Speaker rows, listener columns; colour scaled to the largest score of
/// the grid. Diagonal cells are grey.
pub fn render_svg(matrix: &IntelligibilityMatrix, config: ChannelConfig) -> String {
    let langs = &matrix.languages;
    let n = langs.len();
    let max = matrix
        .scores(config)
        .map(|m| m.values().map(|d| d.score).fold(0.0, f64::max))
        .unwrap_or(0.0);
    let size = MARGIN + n * CELL + 8;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="13">"##,
        size + 20
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN}" y="14">{config} (row: speaker, column: listener)</text>"##
    );
    let top = MARGIN + 20;
    for (j, l) in langs.iter().enumerate() {
        let x = MARGIN + j * CELL + CELL / 2;
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{}" text-anchor="middle">{l}</text>"##,
            top - 8
        );
    }
    for (i, s) in langs.iter().enumerate() {
        let y = top + i * CELL;
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="end">{s}</text>"##,
            MARGIN - 8,
            y + CELL / 2 + 5
        );
        for (j, l) in langs.iter().enumerate() {
            let x = MARGIN + j * CELL;
            let score = matrix.get(config, *s, *l);
            let (fill, label, ink) = match score {
                Some(d) => {
                    let t = if max > 0.0 { d.score / max } else { 0.0 };
                    let ink = if t > 0.55 { "#ffffff" } else { "#000000" };
                    (blend(t), format!("{:.1}", d.score_pct()), ink)
                }
                None => ("#d9d9d9".to_string(), String::new(), "#000000"),
            };
            let _ = writeln!(
                svg,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff"/>"##
            );
            if !label.is_empty() {
                let _ = writeln!(
                    svg,
                    r##"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{label}</text>"##,
                    x + CELL / 2,
                    y + CELL / 2 + 5
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
