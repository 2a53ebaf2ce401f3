//! Static SVG figures drawn from the pipeline tables.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One line per series over categorical x positions. Points are
/// `(value, significant)`; significant points are drawn filled.
pub fn line_chart(title: &str, x_labels: &[String], series: &[(String, Vec<Option<(f64, bool)>>)]) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 360.0, 60.0, 140.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let values = series.iter().flat_map(|(_, v)| v.iter().flatten().map(|p| p.0));
    let (mut lo, mut hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        hi += 1.0;
        lo -= 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let n = x_labels.len().max(1);
    let x = |i: usize| left + if n == 1 { pw / 2.0 } else { pw * i as f64 / (n - 1) as f64 };
    let y = |v: f64| top + ph * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, top + ph, left + pw, top + ph);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + ph);
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(s, r##"<line x1="{left}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#999" stroke-dasharray="3,3"/>"##, y(0.0), left + pw);
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, left - 6.0, y(v) + 4.0);
    }
    for (i, l) in x_labels.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x(i), top + ph + 16.0, escape(l));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">layer</text>"#, left + pw / 2.0, h - 10.0);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|(v, _)| format!("{:.2},{:.2}", x(i), y(v))))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        }
        for (i, p) in pts.iter().enumerate() {
            if let Some((v, sig)) = p {
                let fill = if *sig { color } else { "white" };
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="{color}" stroke-width="2"/>"#, x(i), y(*v));
            }
        }
        let ly = top + 14.0 * k as f64 + 6.0;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, left + pw + 14.0, ly - 8.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, left + pw + 30.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t * 0.8), 255.0 * (1.0 - t * 0.8))
    } else {
        (255.0 * (1.0 + t * 0.8), 255.0 * (1.0 + t * 0.8), 255.0)
    };
    format!("rgb({},{},{})", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Rows × columns grid of coefficients in [−1, 1]; `*` marks significant cells.
pub fn heatmap(title: &str, rows: &[String], cols: &[String], cells: &[Vec<Option<(f64, bool)>>]) -> String {
    let (cw, ch, left, top) = (54.0, 26.0, 150.0, 70.0);
    let w = left + cw * cols.len() as f64 + 20.0;
    let h = top + ch * rows.len() as f64 + 20.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="10">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="18" font-size="14">{}</text>"#, escape(title));
    for (j, c) in cols.iter().enumerate() {
        let cx = left + cw * (j as f64 + 0.5);
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#, top - 8.0, escape(c));
    }
    for (i, r) in rows.iter().enumerate() {
        let ry = top + ch * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, ry + ch / 2.0 + 4.0, escape(r));
        for (j, cell) in cells[i].iter().enumerate() {
            let cx = left + cw * j as f64;
            let (fill, label) = match cell {
                Some((v, sig)) => (diverging(*v), format!("{v:.2}{}", if *sig { "*" } else { "" })),
                None => ("#eeeeee".to_string(), String::new()),
            };
            let _ = writeln!(s, r#"<rect x="{cx:.1}" y="{ry:.1}" width="{cw}" height="{ch}" fill="{fill}" stroke="white"/>"#);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, cx + cw / 2.0, ry + ch / 2.0 + 4.0);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_wellformed() {
        let svg = line_chart(
            "coef <x>",
            &["0".into(), "1".into()],
            &[("gen".into(), vec![Some((0.5, true)), None]), ("geo".into(), vec![Some((-0.1, false)), Some((0.2, true))])],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("coef &lt;x&gt;"));
        assert_eq!(svg.matches("<circle").count(), 3);
        let hm = heatmap("rho", &["a".into()], &["mean/0".into()], &[vec![Some((0.95, true))]]);
        assert!(hm.contains("0.95*"));
        assert_eq!(diverging(0.0), "rgb(255,255,255)");
    }
}
