//! The `verify` command: named checks dispatched on the construction.

use std::time::Instant;

use anyhow::{bail, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use tpz_core::rotation::{self, checks};
use tpz_core::segment;
use tpz_core::separator::SeparatorSequence;
use tpz_core::{BlockSchedule, Error, Materialized, Report, Status, Symbol, SymbolicSequence};

use crate::construct::{parse_rational, Loaded, Source};

pub const CHECKS: &[&str] = &[
    "facts", "toeplitz", "almost", "pis", "depth", "geometry", "endpoint", "pq", "content", "averages",
    "ps", "sweep", "targets",
];

pub struct Options {
    pub budget: u64,
    pub seed: u64,
    pub samples: Option<u64>,
    pub timing: bool,
}

/// Runs the checks and returns their JSON reports, plus whether any check
/// ran out of budget.
pub fn run(loaded: &Loaded, names: &[String], opts: &Options) -> Result<(Vec<Value>, Vec<Report>, bool)> {
    let mut names: Vec<&str> = names.iter().map(String::as_str).collect();
    if names == ["all"] {
        names = CHECKS.to_vec();
    }
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(n)) {
        bail!(UnknownCheck(bad.to_string()));
    }
    let mut json_reports = Vec::new();
    let mut reports = Vec::new();
    let mut over_budget = false;
    for name in names {
        let start = Instant::now();
        let result = run_one(loaded, name, opts);
        let elapsed = start.elapsed().as_secs_f64();
        let batch = match result {
            Ok(rs) => merge(name, rs),
            Err(e) => match e.downcast_ref::<Error>() {
                Some(Error::BudgetExceeded { budget }) => {
                    over_budget = true;
                    Report::skipped(name, "", &format!("budget of {budget} exceeded"))
                        .with_budget(*budget)
                }
                _ => return Err(e),
            },
        };
        json_reports.push(report_json(&batch, opts.timing.then_some(elapsed)));
        reports.push(batch);
    }
    Ok((json_reports, reports, over_budget))
}

#[derive(Debug)]
pub struct UnknownCheck(pub String);

impl std::fmt::Display for UnknownCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown check {:?}; known checks: {}, all", self.0, CHECKS.join(", "))
    }
}

impl std::error::Error for UnknownCheck {}

/// Folds the sub-reports of one check into a single report.
fn merge(name: &str, mut parts: Vec<Report>) -> Report {
    if parts.len() == 1 {
        let mut r = parts.pop().unwrap();
        r.check_name = name.to_string();
        return r;
    }
    let anchor = parts.iter().map(|r| r.anchor.as_str()).collect::<Vec<_>>().join("; ");
    let mut out = Report::new(name, &anchor);
    if parts.iter().all(|r| r.status == Status::Skipped) {
        out.status = Status::Skipped;
    }
    for p in &parts {
        for (k, v) in &p.statistics {
            out.stat(&format!("{}.{k}", p.check_name), v);
        }
        for c in &p.counterexamples {
            out.fail(format!("{}: {c}", p.check_name));
        }
        if p.status == Status::Fail && p.counterexamples.is_empty() {
            out.fail(format!("{} failed", p.check_name));
        }
        out.seed = out.seed.or(p.seed);
        out.budget = out.budget.or(p.budget);
    }
    out
}

pub fn report_json(r: &Report, wall_time: Option<f64>) -> Value {
    json!({
        "check_name": r.check_name,
        "paper_anchor": r.anchor,
        "status": match r.status { Status::Pass => "pass", Status::Fail => "fail", Status::Skipped => "skipped" },
        "counterexamples": r.counterexamples,
        "statistics": r.statistics,
        "budget": r.budget,
        "seed": r.seed,
        "wall_time": wall_time,
    })
}

fn within_budget(needed: u64, budget: u64) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded { budget }.into());
    }
    Ok(())
}

fn skipped(name: &str, construction: &str) -> Vec<Report> {
    let applies_to = match name {
        "pis" | "depth" | "geometry" | "endpoint" => "segment",
        "pq" | "content" | "averages" | "ps" | "sweep" => "separator",
        _ => "interior",
    };
    vec![Report::skipped(
        name,
        "",
        &format!("{name} is specific to {applies_to} sequences; input is a {construction} sequence"),
    )]
}

fn run_one(loaded: &Loaded, name: &str, opts: &Options) -> Result<Vec<Report>> {
    let body = &loaded.body;
    let horizon = body.len();
    let schedule = body.schedule().expect("loaded bodies carry a schedule");
    let construction = loaded.manifest.construction.as_str();
    let budget = opts.budget;
    let seed = opts.seed;
    let out = match (name, &loaded.source) {
        ("facts", _) => {
            let h = horizon.min(tpz_core::DEFAULT_MATERIALIZATION_CAP).max(1);
            within_budget(h, budget)?;
            schedule.verify_facts(h, 4)?
        }
        ("toeplitz", _) => {
            // Small bodies are checked at every position, which pins down
            // any single corrupted symbol.
            let samples = opts
                .samples
                .unwrap_or(if horizon <= 1_000_000 { horizon } else { 1000 });
            within_budget(samples.min(horizon), budget)?;
            let cap = if samples >= horizon { 1 } else { 10_000 };
            let r = match &loaded.source {
                // Translates past the body come from the construction itself.
                Source::Separator(s) => {
                    let seq = Extended { body, tail: s.as_ref() };
                    rotation::toeplitz_check(&seq, horizon, samples, seed, cap)?
                }
                _ => rotation::toeplitz_check(body, horizon, samples, seed, cap)?,
            };
            vec![r.with_budget(budget)]
        }
        ("almost", _) => vec![rotation::almost_periodicity_check(body, 4, horizon, None, budget)?],
        ("pis", Source::Segment(p)) => {
            let mut v = Vec::new();
            for n in 1..=2 {
                within_budget(horizon, budget)?;
                v.push(segment::check_pis(p, body, n, 1, horizon)?);
            }
            v
        }
        ("depth", Source::Segment(p)) => {
            let hi = horizon.min(p.schedule().a_u64(p.schedule().max_level()).unwrap_or(u64::MAX));
            within_budget(hi, budget)?;
            vec![segment::check_depth_bound(p, body, hi)?]
        }
        ("geometry", Source::Segment(p)) => {
            within_budget(horizon, budget)?;
            vec![segment::check_window_geometry(p, body, 2, horizon)?]
        }
        ("endpoint", Source::Segment(p)) => {
            let mut r = Report::new(
                "endpoint",
                "the symbol written at odd (even) levels has frequency above 9 delta on [1, a_n]",
            );
            let mut n = 1;
            while p.schedule().a_u64(n).is_some_and(|a| a <= horizon) && n <= p.schedule().max_level() {
                let f = segment::endpoint_frequencies(p, body, n)?;
                r.stat(&format!("level{n}_freq1"), &f.freq1);
                r.stat(&format!("level{n}_freq2"), &f.freq2);
                if !f.expectation_met {
                    r.fail(format!("level {n}: freq1 = {}, freq2 = {}", f.freq1, f.freq2));
                }
                n += 1;
            }
            r.stat("delta", p.delta());
            vec![r]
        }
        ("pq", Source::Separator(s)) => {
            let mut v = Vec::new();
            for n in 1..s.levels().min(4) {
                v.extend(s.params().verify_pq(n)?.into_iter().map(|mut r| {
                    r.check_name = format!("{}_level{n}", r.check_name);
                    r
                }));
            }
            v
        }
        ("content", Source::Separator(s)) => {
            let samples = opts.samples.unwrap_or(1000);
            within_budget(samples, budget)?;
            let mut v = Vec::new();
            for n in 1..s.levels().min(4) {
                let mut r = s.check_identical_content(n, samples, seed)?;
                r.check_name = format!("content_level{n}");
                v.push(r);
            }
            v
        }
        ("averages", Source::Separator(s)) => {
            let samples = opts.samples.unwrap_or(1000);
            within_budget(samples, budget)?;
            vec![
                checks::check_level_averages(s)?,
                checks::check_interval_averages(s)?,
                checks::check_prefix_suffix(s, samples, seed)?,
            ]
        }
        ("ps", Source::Separator(s)) => {
            let samples = opts.samples.unwrap_or(100_000);
            within_budget(samples, budget)?;
            vec![checks::check_windows_in_s(s, samples, seed)?.with_budget(budget)]
        }
        ("sweep", Source::Separator(s)) => {
            let stride = rotation::default_stride(s, 1)?;
            let path = rotation::sweep_path(s, 1, stride)?;
            vec![rotation::check_sweep(&path)]
        }
        ("targets", Source::Interior(_)) => vec![check_targets(loaded)?],
        _ => skipped(name, construction),
    };
    Ok(out)
}

/// A file body followed by the pointwise construction it was cut from.
struct Extended<'a> {
    body: &'a Materialized,
    tail: &'a SeparatorSequence,
}

impl SymbolicSequence for Extended<'_> {
    fn schedule(&self) -> Option<&BlockSchedule> {
        self.body.schedule()
    }

    fn horizon(&self) -> Option<u64> {
        self.tail.horizon()
    }

    fn symbol(&self, j: u64) -> tpz_core::Result<Symbol> {
        if j <= self.body.len() {
            self.body.symbol(j)
        } else {
            self.tail.symbol(j)
        }
    }
}

/// Compares the file body's level averages with the targets recorded in
/// the manifest.
fn check_targets(loaded: &Loaded) -> Result<Report> {
    let mut r = Report::new(
        "targets",
        "each level averages exactly to its recorded target inside Delta_delta",
    );
    let Source::Interior(params) = &loaded.source else {
        unreachable!()
    };
    let targets = loaded.manifest.derived["targets"].as_array().cloned().unwrap_or_default();
    let delta = params.delta();
    for t in &targets {
        let n = t["level"].as_u64().unwrap_or(0) as usize;
        let rho = t["rho"].as_array().cloned().unwrap_or_default();
        let (Some(x), Some(y)) = (rho.first().and_then(Value::as_str), rho.get(1).and_then(Value::as_str)) else {
            r.fail(format!("level {n}: malformed target"));
            continue;
        };
        let (x, y) = (parse_rational(x)?, parse_rational(y)?);
        let Some(a) = params.schedule().a_u64(n).filter(|&a| a <= loaded.body.len()) else {
            r.fail(format!("level {n}: a_{n} lies beyond the body"));
            continue;
        };
        let psi = loaded.body.prefix(a);
        let den = BigInt::from(a);
        let got = (
            BigRational::new(BigInt::from(psi.x), den.clone()),
            BigRational::new(BigInt::from(psi.y), den),
        );
        if got != (x.clone(), y.clone()) {
            r.fail(format!("level {n}: psi([1, a_{n}])/a_{n} = ({}, {}) but target is ({x}, {y})", got.0, got.1));
        }
        let one = BigRational::from_integer(1.into());
        if !(x > delta && y > delta && &x + &y < one - &delta) {
            r.fail(format!("level {n}: target ({x}, {y}) is not inside Delta_delta"));
        }
    }
    r.stat("levels", targets.len());
    Ok(r)
}
