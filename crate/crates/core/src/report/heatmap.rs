use std::fmt::Write as _;

/// Minimal SVG heatmap. `None` cells are drawn grey. With `diverging`,
/// negative values shade red and positive green, scaled by the largest
/// magnitude; otherwise values in [0, 1] shade from white to blue.
pub fn render_heatmap_svg(
    title: &str,
    row_labels: &[String],
    col_labels: &[String],
    values: &[Vec<Option<f64>>],
    diverging: bool,
) -> String {
    const CELL_W: usize = 72;
    const CELL_H: usize = 24;
    const LEFT: usize = 64;
    const TOP: usize = 48;
    let width = LEFT + CELL_W * col_labels.len() + 8;
    let height = TOP + CELL_H * row_labels.len() + 8;
    let scale = values
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="4" y="16" font-size="13">{}</text>"#, escape(title));
    for (j, c) in col_labels.iter().enumerate() {
        let x = LEFT + j * CELL_W + CELL_W / 2;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#, TOP - 8, escape(c));
    }
    for (i, r) in row_labels.iter().enumerate() {
        let y = TOP + i * CELL_H;
        let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, y + CELL_H / 2 + 4, escape(r));
        for (j, v) in values[i].iter().enumerate() {
            let x = LEFT + j * CELL_W;
            let (fill, label) = match v {
                None => ("#cccccc".to_string(), String::new()),
                Some(v) => (color(*v, scale, diverging), format!("{v:.2}")),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="#ffffff"/><text x="{}" y="{}" text-anchor="middle">{label}</text>"##,
                x + CELL_W / 2,
                y + CELL_H / 2 + 4
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn color(v: f64, scale: f64, diverging: bool) -> String {
    let shade = |t: f64| (255.0 - 155.0 * t.clamp(0.0, 1.0)).round() as u8;
    if diverging {
        let t = v.abs() / scale;
        if v >= 0.0 {
            format!("#{:02x}ff{:02x}", shade(t), shade(t))
        } else {
            format!("#ff{:02x}{:02x}", shade(t), shade(t))
        }
    } else {
        format!("#{:02x}{:02x}ff", shade(v), shade(v))
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
