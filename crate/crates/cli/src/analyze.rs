//! Window clouds and sweep paths as CSV or JSON.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};
use tpz_core::rotation::{self, cloud_area};
use tpz_core::RotationVector;

use crate::construct::{Loaded, Source};
use crate::Format;

pub const CSV_HEADER: &str = "start_index,x_num,x_den,y_num,y_den";

/// Parses `lo:hi`.
pub fn parse_range(s: &str) -> Result<(u64, u64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("expected a range lo:hi, got {s:?}"))?;
    let (lo, hi): (u64, u64) = (lo.trim().parse()?, hi.trim().parse()?);
    if lo == 0 || hi < lo {
        bail!("range {s:?} must satisfy 1 <= lo <= hi");
    }
    Ok((lo, hi))
}

fn row(start: impl std::fmt::Display, r: &RotationVector) -> String {
    let ((xn, xd), (yn, yd)) = r.reduced();
    format!("{start},{xn},{xd},{yn},{yd}")
}

fn json_point(start: impl std::fmt::Display, r: &RotationVector) -> Value {
    let ((xn, xd), (yn, yd)) = r.reduced();
    json!({"start_index": start.to_string(), "x": format!("{xn}/{xd}"), "y": format!("{yn}/{yd}")})
}

/// The cloud of window averages over the file body. Returns the text and
/// whether the window budget cut the cloud short.
pub fn analyze(
    loaded: &Loaded,
    window: u64,
    stride: u64,
    range: Option<(u64, u64)>,
    budget: u64,
    format: Format,
) -> Result<(String, bool)> {
    let body = &loaded.body;
    let (lo, hi) = range.unwrap_or((1, body.len()));
    if hi > body.len() {
        bail!("range ends at {hi} beyond the body of {} symbols", body.len());
    }
    let cloud = rotation::window_cloud(body, window, lo, hi, stride, budget)?;
    let rvs: Vec<RotationVector> = cloud.points.iter().map(|p| p.1).collect();
    let area = cloud_area(&rvs);
    let mut out = String::new();
    match format {
        Format::Csv => {
            if cloud.truncated {
                out.push_str("# truncated: budget exhausted\n");
            }
            writeln!(out, "{CSV_HEADER}")?;
            for (i, r) in &cloud.points {
                writeln!(out, "{}", row(i, r))?;
            }
            writeln!(out, "# {}", json!({"window": window, "points": rvs.len(), "hull_area": area.to_string()}))?;
        }
        Format::Json => {
            let doc = json!({
                "window": window,
                "stride": stride,
                "range": [lo, hi],
                "truncated": cloud.truncated,
                "hull_area": area.to_string(),
                "points": cloud.points.iter().map(|(i, r)| json_point(i, r)).collect::<Vec<_>>(),
            });
            out = serde_json::to_string_pretty(&doc)? + "\n";
        }
    }
    Ok((out, cloud.truncated))
}

/// The sweep path of a separator level, evaluated pointwise from the
/// construction. Returns the text and whether the path passed its check.
pub fn sweep(loaded: &Loaded, level: usize, stride: Option<u64>, format: Format) -> Result<(String, bool)> {
    let Source::Separator(seq) = &loaded.source else {
        bail!(
            "sweep needs a separator sequence, not a {} one",
            loaded.manifest.construction.as_str()
        );
    };
    if level == 0 || level >= seq.levels() {
        bail!("level must lie in 1..{}", seq.levels());
    }
    let stride = match stride {
        Some(s) => s,
        None => rotation::default_stride(seq, level)?,
    };
    let path = rotation::sweep_path(seq, level, stride)?;
    let report = rotation::check_sweep(&path);
    let winding = path.winding_number().ok();
    let summary = json!({
        "level": level,
        "winding_number": winding,
        "closed": path.is_closed(),
        "j1": [path.j1.lo.to_string(), path.j1.hi.to_string()],
        "j2": [path.j2.lo.to_string(), path.j2.hi.to_string()],
        "shift": path.shift.to_string(),
        "stride": stride,
        "points": path.points.len(),
        "status": if report.passed() { "pass" } else { "fail" },
    });
    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for (i, r) in &path.points {
                writeln!(out, "{}", row(&path.j1.lo + i, r))?;
            }
            writeln!(out, "# {summary}")?;
        }
        Format::Json => {
            let mut doc = summary;
            doc["path"] = path
                .points
                .iter()
                .map(|(i, r)| json_point(&path.j1.lo + i, r))
                .collect::<Vec<_>>()
                .into();
            out = serde_json::to_string_pretty(&doc)? + "\n";
        }
    }
    Ok((out, report.passed()))
}
