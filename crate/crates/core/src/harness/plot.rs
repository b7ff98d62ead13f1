//! Standalone SVG line plots on `[0, x_max] × [0, 1]`.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 50.0;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw markers instead of a polyline.
    pub markers: bool,
}

impl Series {
    pub fn line(label: &str, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color,
            points,
            dashed: false,
            markers: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn markers(mut self) -> Self {
        self.markers = true;
        self
    }
}

/// The step function with the given breakpoints and plateau values, equal to
/// 1 left of the first breakpoint, sampled as a polyline up to `x_max`.
pub fn step_points(breaks: &[f64], values: &[f64], x_max: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 1.0)];
    let mut level = 1.0;
    for (i, &b) in breaks.iter().enumerate() {
        if b > x_max || i >= values.len() {
            break;
        }
        pts.push((b, level));
        level = values[i];
        pts.push((b, level));
    }
    pts.push((x_max, level));
    pts
}

pub fn render(title: &str, x_max: f64, series: &[Series]) -> String {
    let sx = |x: f64| PAD + (W - 2.0 * PAD) * (x / x_max).clamp(0.0, 1.0);
    let sy = |y: f64| H - PAD - (H - 2.0 * PAD) * y.clamp(0.0, 1.05) / 1.05;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    // Axes and ticks.
    let _ = writeln!(
        s,
        r#"<path d="M{:.1},{:.1} L{:.1},{:.1} L{:.1},{:.1}" stroke="black" fill="none"/>"#,
        sx(0.0),
        sy(1.05),
        sx(0.0),
        sy(0.0),
        sx(x_max),
        sy(0.0)
    );
    for i in 0..=4 {
        let y = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y}</text>"#,
            sx(0.0) - 6.0,
            sy(y) + 4.0
        );
    }
    let step = nice_step(x_max);
    let mut x = 0.0;
    while x <= x_max + 1e-9 {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(x),
            sy(0.0) + 18.0,
            trim(x)
        );
        x += step;
    }
    for (i, ser) in series.iter().enumerate() {
        let visible: Vec<(f64, f64)> = ser.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        if ser.markers {
            for (x, y) in &visible {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{}"/>"#,
                    sx(*x),
                    sy(*y),
                    ser.color
                );
            }
        } else if !visible.is_empty() {
            let d: Vec<String> = visible
                .iter()
                .enumerate()
                .map(|(j, (x, y))| format!("{}{:.2},{:.2}", if j == 0 { 'M' } else { 'L' }, sx(*x), sy(*y)))
                .collect();
            let dash = if ser.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<path d="{}" stroke="{}" stroke-width="1.6" fill="none"{dash}/>"#,
                d.join(" "),
                ser.color
            );
        }
        let ly = 46.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{}" text-anchor="end">{}</text>"#,
            W - PAD,
            ser.color,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn nice_step(x_max: f64) -> f64 {
    let raw = x_max / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&v| v >= raw)
        .unwrap_or(raw)
}

fn trim(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_points() {
        let p = step_points(&[1.0, 2.0], &[0.5, 0.0], 3.0);
        assert_eq!(p, vec![(0.0, 1.0), (1.0, 1.0), (1.0, 0.5), (2.0, 0.5), (2.0, 0.0), (3.0, 0.0)]);
    }

    #[test]
    fn renders_svg() {
        let svg = render("H <test>", 4.0, &[Series::line("H", "black", vec![(0.0, 1.0), (4.0, 0.0)])]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("&lt;test&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
