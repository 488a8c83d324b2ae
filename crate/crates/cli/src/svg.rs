//! Log-log scaling plot as a fixed-layout SVG.

use std::fmt::Write;

use fracdim::dimension::ScalingCurve;
use fracdim::FitResult;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 530.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Integer-aligned bounds around the data, at least one unit wide.
    fn around(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = (lo.floor(), hi.ceil());
        if hi > lo {
            Self { lo, hi }
        } else {
            Self { lo, hi: lo + 1.0 }
        }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        let step = ((self.hi - self.lo) / 10.0).ceil().max(1.0);
        (0..).map(move |k| self.lo + k as f64 * step).take_while(|&v| v <= self.hi)
    }
}

pub fn render(curve: &ScalingCurve, fit: &FitResult, title: &str) -> String {
    let xs: Vec<f64> = curve.samples.iter().map(|s| s.percent.log2()).collect();
    let ys: Vec<f64> = curve.samples.iter().map(|s| (s.compressed_bytes.max(1) as f64).log2()).collect();
    let ax = Axis::around(xs.iter().copied());
    let ay = Axis::around(ys.iter().copied());
    let px = |x: f64| ax.map(x, LEFT, RIGHT);
    let py = |y: f64| ay.map(y, BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    for t in ax.ticks() {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{BOTTOM}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, BOTTOM + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{t}</text>"#,
            BOTTOM + 20.0
        );
    }
    for t in ay.ticks() {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{t}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">log2(scale percent)</text>"#,
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 25.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">log2(compressed bytes)</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{} D = {:.4}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(title),
        fit.dimension
    );

    let (first, last) = fit.used_range;
    let x0 = xs[first..=last].iter().copied().fold(f64::INFINITY, f64::min);
    let line_y = |x: f64| fit.intercept + fit.dimension * (x - x0);
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2"/>"##,
        px(xs[first]),
        py(line_y(xs[first])),
        px(xs[last]),
        py(line_y(xs[last]))
    );
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        let fill = if (first..=last).contains(&i) { "#1f4e9c" } else { "none" };
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="#1f4e9c" stroke-width="1.5"/>"##,
            px(x),
            py(y)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracdim::dimension::{fit_loglog, ScaleSample};
    use fracdim::{Codec, ScaleMode};

    fn curve() -> ScalingCurve {
        let samples = [5.0, 10.0, 20.0, 40.0, 80.0]
            .iter()
            .enumerate()
            .map(|(i, &p): (usize, &f64)| ScaleSample {
                percent: p,
                width: 1,
                height: 1,
                pixel_count: 1,
                compressed_bytes: if i == 0 { 50 } else { 100 << (3 * i / 2) },
                blank: false,
            })
            .collect();
        ScalingCurve { samples, mode: ScaleMode::GrayBox, codec: Codec::Deflate, source_dims: (1, 1) }
    }

    #[test]
    fn excluded_points_are_hollow() {
        let c = curve();
        let fit = fit_loglog(&c, (1, 4)).unwrap();
        let svg = render(&c, &fit, "a<b");
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\""));
        assert_eq!(svg.matches("<circle").count(), 5);
        assert_eq!(svg.matches("fill=\"none\" stroke=\"#1f4e9c\"").count(), 1);
        assert!(svg.contains("a&lt;b D = "));
        assert_eq!(svg, render(&c, &fit, "a<b"));
    }

    #[test]
    fn fitted_line_passes_through_exact_points() {
        let c = curve();
        let fit = fit_loglog(&c, (0, 1)).unwrap();
        let svg = render(&c, &fit, "");
        let line = svg.lines().find(|l| l.contains("#c0392b")).unwrap();
        let first = svg.lines().find(|l| l.starts_with("<circle")).unwrap();
        let cx = first.split("cx=\"").nth(1).unwrap().split('"').next().unwrap();
        let cy = first.split("cy=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(line.contains(&format!("x1=\"{cx}\" y1=\"{cy}\"")));
    }
}
