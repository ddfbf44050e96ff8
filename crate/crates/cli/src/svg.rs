//! Static SVG figures of clouds and sweep paths.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

use crate::analyze::CSV_HEADER;

/// Pixels per unit of rotation space.
const SCALE: f64 = 400.0;
/// Visible range in rotation coordinates, wide enough for the band `S`.
const MIN: f64 = -0.2;
const MAX: f64 = 1.2;

fn px(x: f64) -> f64 {
    (x - MIN) * SCALE
}

fn py(y: f64) -> f64 {
    (MAX - y) * SCALE
}

fn parse_rows(csv: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == CSV_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            bail!("line {}: expected 5 columns ({CSV_HEADER}), got {}", i + 1, f.len());
        }
        let num = |k: usize| -> Result<f64> {
            f[k].trim()
                .parse::<f64>()
                .with_context(|| format!("line {}: column {} is not a number", i + 1, k + 1))
        };
        let (xd, yd) = (num(2)?, num(4)?);
        if xd == 0.0 || yd == 0.0 {
            bail!("line {}: zero denominator", i + 1);
        }
        rows.push((num(1)? / xd, num(3)? / yd));
    }
    Ok(rows)
}

/// Renders a CSV produced by `analyze` or `sweep`: the simplex, its
/// boundary `T`, the band `S` of points within 1/8 of `T`, and one marker
/// per row. Sweep files, recognised by their winding-number footer, also get
/// the connecting polyline and the centre `(1/3, 1/3)`.
pub fn plot(csv: &str) -> Result<String> {
    let rows = parse_rows(csv)?;
    let is_sweep = csv.lines().any(|l| l.starts_with('#') && l.contains("\"winding_number\""));
    let size = (MAX - MIN) * SCALE;
    let tri = format!(
        "{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}",
        px(0.0),
        py(0.0),
        px(1.0),
        py(0.0),
        px(0.0),
        py(1.0)
    );
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
    )?;
    writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##)?;
    // A round-capped stroke of width 1/4 along T covers exactly the points
    // within 1/8 of T.
    writeln!(
        s,
        r##"<polygon id="band-S" points="{tri}" fill="none" stroke="#cfe3f7" stroke-width="{:.2}" stroke-linejoin="round" stroke-linecap="round"/>"##,
        0.25 * SCALE
    )?;
    writeln!(s, r##"<polygon id="simplex" points="{tri}" fill="#f2f2f2" fill-opacity="0.6" stroke="none"/>"##)?;
    writeln!(s, r##"<polygon id="T" points="{tri}" fill="none" stroke="#333333" stroke-width="1.5"/>"##)?;
    if is_sweep && !rows.is_empty() {
        let pts: Vec<String> = rows.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(
            s,
            r##"<polyline id="path" points="{}" fill="none" stroke="#c0392b" stroke-width="1"/>"##,
            pts.join(" ")
        )?;
        writeln!(
            s,
            r##"<circle id="center" cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="#000000"/>"##,
            px(1.0 / 3.0),
            py(1.0 / 3.0)
        )?;
    }
    writeln!(s, r##"<g id="markers" fill="#1f4e79">"##)?;
    for &(x, y) in &rows {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#, px(x), py(y))?;
    }
    writeln!(s, "</g>")?;
    writeln!(s, "</svg>")?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_marker_per_row() {
        let csv = format!("{CSV_HEADER}\n1,1,4,1,4\n2,1,2,0,1\n3,0,1,1,1\n");
        let svg = plot(&csv).unwrap();
        assert_eq!(svg.matches(r#"r="1.5""#).count(), 3);
        assert!(svg.contains("band-S") && !svg.contains("polyline"));
        let sweep = format!("{csv}# {{\"winding_number\":1}}\n");
        assert!(plot(&sweep).unwrap().contains("<polyline"));
        assert!(plot("1,2,3\n").is_err());
    }
}
