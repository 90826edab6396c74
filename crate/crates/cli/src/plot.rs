//! Hand-written SVG for the log-log convergence plot.

use infmass::convergence::RateFit;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned bounds (in log10) around the positive values.
    fn covering(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(f64::log10)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        let (lo, hi) = (lo.floor(), hi.ceil());
        Self { lo, hi: if hi > lo { hi } else { lo + 1.0 } }
    }

    fn fraction(&self, value: f64) -> f64 {
        (value.log10() - self.lo) / (self.hi - self.lo)
    }
}

fn to_x(axis: &Axis, mass: f64) -> f64 {
    LEFT + axis.fraction(mass) * (WIDTH - LEFT - RIGHT)
}

fn to_y(axis: &Axis, error: f64) -> f64 {
    HEIGHT - BOTTOM - axis.fraction(error) * (HEIGHT - TOP - BOTTOM)
}

/// Log-log plot of `points` (mass, error) with the fitted power law and its slope.
pub fn convergence_svg(points: &[(f64, f64)], fit: Option<&RateFit>, config_hash: &str) -> String {
    let xs = Axis::covering(points.iter().map(|p| p.0));
    let ys = Axis::covering(points.iter().map(|p| p.1));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, "<!-- config_hash={config_hash} -->");
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for decade in xs.lo as i32..=xs.hi as i32 {
        let x = to_x(&xs, 10f64.powi(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 18.0
        );
    }
    for decade in ys.lo as i32..=ys.hi as i32 {
        let y = to_y(&ys, 10f64.powi(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">mass M</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">ground-level error |E_M - E_inf|</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );

    if let Some(fit) = fit {
        let lo = fit.masses.first().copied().unwrap_or(1.0);
        let hi = fit.masses.last().copied().unwrap_or(1.0);
        let line = |m: f64| (fit.intercept + fit.slope * m.ln()).exp();
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="2" stroke-dasharray="6 4"/>"##,
            to_x(&xs, lo),
            to_y(&ys, line(lo)),
            to_x(&xs, hi),
            to_y(&ys, line(hi))
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#c0392b" font-size="14">fitted slope {:.4}</text>"##,
            WIDTH - RIGHT - 10.0,
            TOP + 20.0,
            fit.slope
        );
    }
    let mut path = String::new();
    for (i, &(m, e)) in points.iter().filter(|p| p.1 > 0.0).enumerate() {
        let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, to_x(&xs, m), to_y(&ys, e));
    }
    let _ = writeln!(svg, r##"<path d="{}" fill="none" stroke="#2c3e50"/>"##, path.trim_end());
    for &(m, e) in points.iter().filter(|p| p.1 > 0.0) {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#2c3e50"><title>M={m} error={e:.3e}</title></circle>"##,
            to_x(&xs, m),
            to_y(&ys, e)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_carries_hash_and_slope() {
        let fit = RateFit { slope: -1.0, intercept: 0.0, masses: vec![10.0, 100.0], errors: vec![0.1, 0.01] };
        let svg = convergence_svg(&[(10.0, 0.1), (100.0, 0.01)], Some(&fit), "feed");
        assert!(svg.contains("config_hash=feed"));
        assert!(svg.contains("fitted slope -1.0000"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
