//! Building the three constructions from flags or from a manifest.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use serde_json::{json, Value};
use tpz_core::interior::{AdjustmentKind, InteriorParams, InteriorSequence};
use tpz_core::segment::{self, SegmentParams, SegmentSequence};
use tpz_core::separator::{SeparatorParams, SeparatorSequence};
use tpz_core::{Materialized, Symbol, SymbolicSequence};

use crate::seqfile::{Construction, Manifest, ScheduleJson};

pub fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| anyhow!("{s:?} is not a rational number"))
}

/// Parses `x,y` with rational coordinates such as `1/4,1/4`.
pub fn parse_vector(s: &str) -> Result<(BigRational, BigRational)> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("expected two comma-separated rationals, got {s:?}"))?;
    Ok((parse_rational(x)?, parse_rational(y)?))
}

fn ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The construction behind a sequence file, rebuilt from its manifest.
pub enum Source {
    Segment(SegmentParams),
    Separator(Box<SeparatorSequence>),
    Interior(InteriorParams),
}

pub struct Loaded {
    pub manifest: Manifest,
    /// The file body, with the construction's block schedule attached.
    pub body: Materialized,
    pub source: Source,
}

impl Loaded {
    pub fn from_file(manifest: Manifest, symbols: Vec<Symbol>) -> Result<Self> {
        let p = &manifest.params;
        let source = match manifest.construction {
            Construction::Segment => {
                let v = p["v"].as_array().context("manifest lacks params.v")?;
                let x = parse_rational(v.first().and_then(Value::as_str).unwrap_or(""))?;
                let y = parse_rational(v.get(1).and_then(Value::as_str).unwrap_or(""))?;
                let a1 = p["a1"].as_u64();
                let levels = field_u64(p, "levels")? as usize;
                Source::Segment(segment::derive_params((x, y), a1, levels)?)
            }
            Construction::Separator => {
                let params = separator_params(
                    field_u64(p, "K")?,
                    field_u64(p, "L")?,
                    p["dexp"].as_i64().context("manifest lacks params.dexp")?,
                    field_u64(p, "levels")? as usize,
                    p["toy_mode"].as_bool().unwrap_or(false),
                )?;
                Source::Separator(Box::new(SeparatorSequence::new(params)?))
            }
            Construction::Interior => Source::Interior(InteriorParams::with_pow2(
                field_u64(p, "a1")?,
                p["dexp"].as_i64().context("manifest lacks params.dexp")?,
                field_u64(p, "levels")? as usize,
                field_u64(p, "target_seed")?,
            )?),
        };
        let schedule = match &source {
            Source::Segment(s) => s.schedule().clone(),
            Source::Separator(s) => s.params().schedule().clone(),
            Source::Interior(s) => s.schedule().clone(),
        };
        manifest.schedule.build().context("manifest schedule is invalid")?;
        if manifest.schedule != ScheduleJson::of(&schedule) {
            bail!("manifest schedule disagrees with the one derived from its parameters");
        }
        Ok(Loaded {
            manifest,
            body: Materialized::new(Some(schedule), symbols),
            source,
        })
    }
}

fn field_u64(p: &Value, key: &str) -> Result<u64> {
    p[key]
        .as_u64()
        .ok_or_else(|| anyhow!("manifest lacks params.{key}"))
}

pub fn separator_params(k: u64, l: u64, dexp: i64, levels: usize, toy: bool) -> Result<SeparatorParams> {
    Ok(SeparatorParams::with_pow2(k, l, dexp, levels, toy)?)
}

pub fn generate_segment(
    v: (BigRational, BigRational),
    a1: Option<u64>,
    levels: usize,
    length: u64,
) -> Result<(Manifest, Vec<Symbol>)> {
    let params = segment::derive_params(v.clone(), a1, levels)?;
    let seq = SegmentSequence::generate(&params, length)?;
    let derived = json!({
        "alpha": format!("{:.17}", params.alpha()),
        "beta": format!("{:.17}", params.beta()),
        "norm": format!("{:.17}", params.norm()),
        "norm_sq": ratio(params.norm_sq()),
        "M": format!("{:.17}", params.m()),
        "t": params.t(),
        "a1": params.a1().to_string(),
        "K": params.k().to_string(),
        "delta": ratio(params.delta()),
        "complete_levels": seq.complete_levels(),
    });
    let manifest = Manifest::new(
        Construction::Segment,
        json!({"v": [ratio(&v.0), ratio(&v.1)], "a1": a1, "levels": levels}),
        params.schedule(),
        length,
        derived,
    );
    let (_, symbols) = seq.sequence().clone().into_parts();
    Ok((manifest, symbols))
}

pub fn generate_separator(
    k: u64,
    l: u64,
    dexp: i64,
    levels: usize,
    toy: bool,
    length: u64,
) -> Result<(Manifest, Vec<Symbol>)> {
    let params = separator_params(k, l, dexp, levels, toy)?;
    let seq = SeparatorSequence::new(params)?;
    let symbols: Vec<Symbol> = (1..=length)
        .map(|j| seq.symbol(j))
        .collect::<std::result::Result<_, _>>()?;
    let mut decompositions = Vec::new();
    for n in 1..seq.levels() {
        let d = seq.decomposition(n)?;
        decompositions.push(json!({
            "level": n,
            "p": d.p.to_string(),
            "q": d.q.to_string(),
            "is_partition": d.is_partition,
            "intervals": d.intervals.iter().map(|(t, sp)| json!({
                "tag": t.as_str(), "lo": sp.lo.to_string(), "hi": sp.hi.to_string(),
            })).collect::<Vec<_>>(),
        }));
    }
    let s = seq.params().schedule();
    let derived = json!({
        "a1": s.a1().to_string(),
        "K": k,
        "L": l,
        "a": (1..=s.max_level()).map(|n| s.a(n).to_string()).collect::<Vec<_>>(),
        "delta_inf": s.delta_infinity().map(|d| ratio(&d)),
        "decompositions": decompositions,
    });
    let manifest = Manifest::new(
        Construction::Separator,
        json!({"K": k, "L": l, "dexp": dexp, "levels": levels, "toy_mode": toy}),
        s,
        length,
        derived,
    );
    Ok((manifest, symbols))
}

pub fn generate_interior(a1: u64, dexp: i64, levels: usize, seed: u64) -> Result<(Manifest, Vec<Symbol>)> {
    let params = InteriorParams::with_pow2(a1, dexp, levels, seed)?;
    let seq = InteriorSequence::generate(params)?;
    let targets: Vec<Value> = seq
        .targets()
        .iter()
        .map(|t| {
            json!({
                "level": t.level,
                "rho": [ratio(&t.rho.0), ratio(&t.rho.1)],
                "counts": t.counts,
            })
        })
        .collect();
    let adjustments: Vec<Value> = seq
        .adjustments()
        .iter()
        .map(|a| {
            json!({
                "level": a.level,
                "kind": match a.kind { AdjustmentKind::Snap => "snap", AdjustmentKind::Clamp => "clamp" },
                "from": a.from,
                "to": a.to,
            })
        })
        .collect();
    let derived = json!({
        "delta": ratio(&seq.params().delta()),
        "targets": targets,
        "adjustments": adjustments,
    });
    let horizon = seq.sequence().len();
    let mut manifest = Manifest::new(
        Construction::Interior,
        json!({"a1": a1, "dexp": dexp, "levels": levels, "target_seed": seed}),
        seq.params().schedule(),
        horizon,
        derived,
    );
    manifest.seeds.insert("target_seed".into(), seed);
    let (_, symbols) = seq.sequence().clone().into_parts();
    Ok((manifest, symbols))
}
