//! SVG rendering of boundary disks.

use std::fmt::Write;

const WIDTH: f64 = 1000.0;
const MARGIN: f64 = 20.0;

/// A disk to draw: centre `a/b`, radius `1/b`.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub a: u64,
    pub b: u64,
}

/// Fixed-width decimal with 12 significant digits, so output is stable.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Draws the disks over `[x0, x1]` with a vertical mark at every breakpoint.
/// Disks are drawn in the order given.
pub fn render(big_n: u64, x0: f64, x1: f64, disks: &[Shape], breakpoints: &[u64]) -> String {
    let scale = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let max_r = disks.iter().map(|d| 1.0 / d.b as f64).fold(0.0, f64::max);
    let half = max_r * scale;
    let height = 2.0 * (half + MARGIN);
    let axis = MARGIN + half;
    let px = |x: f64| MARGIN + (x - x0) * scale;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(WIDTH),
        num(height),
        num(WIDTH),
        num(height)
    );
    let _ = writeln!(out, "<title>Ford disks for N = {big_n}</title>");
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="0.5"/>"#,
        num(px(x0)),
        num(axis),
        num(px(x1)),
        num(axis)
    );
    for d in disks {
        let _ = writeln!(
            out,
            r#"<circle class="disk" data-a="{}" data-b="{}" cx="{}" cy="{}" r="{}" fill="steelblue" fill-opacity="0.25" stroke="navy" stroke-width="0.5"/>"#,
            d.a,
            d.b,
            num(px(d.a as f64 / d.b as f64)),
            num(axis),
            num(scale / d.b as f64)
        );
    }
    for &n in breakpoints {
        let x = px(n as f64 / big_n as f64);
        let _ = writeln!(
            out,
            r#"<line class="breakpoint" data-n="{n}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="crimson" stroke-width="0.5"/>"#,
            num(x),
            num(MARGIN / 2.0),
            num(x),
            num(height - MARGIN / 2.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(123.456), "123.456000000");
        assert_eq!(num(0.0), "0");
    }
}
