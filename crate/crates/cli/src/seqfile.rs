//! The `#TPZ1` sequence file: one header line carrying a JSON manifest,
//! then the symbols as ASCII digits in lines of 4096.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tpz_core::blocks::{BlockSchedule, LevelRule};
use tpz_core::Symbol;

pub const MAGIC: &str = "#TPZ1 ";
pub const FORMAT_VERSION: u32 = 1;
pub const LINE_WIDTH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Segment,
    Separator,
    Interior,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Segment => "segment",
            Construction::Separator => "separator",
            Construction::Interior => "interior",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleJson {
    pub a1: String,
    pub b: LevelRule,
    pub d: LevelRule,
    pub max_level: usize,
}

impl ScheduleJson {
    pub fn of(s: &BlockSchedule) -> Self {
        ScheduleJson {
            a1: s.a1().to_string(),
            b: s.b_rule().clone(),
            d: s.d_rule().clone(),
            max_level: s.max_level(),
        }
    }

    pub fn build(&self) -> Result<BlockSchedule> {
        let a1 = self.a1.parse().context("schedule a1 is not an integer")?;
        Ok(BlockSchedule::new(a1, self.b.clone(), self.d.clone(), self.max_level)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub construction: Construction,
    pub params: serde_json::Value,
    pub schedule: ScheduleJson,
    /// `a_1, …, a_N` for every level whose initial block fits in the body.
    pub materialized_levels: Vec<String>,
    pub horizon: u64,
    pub generator_version: String,
    pub seeds: BTreeMap<String, u64>,
    /// Derived constants, with rationals as `"num/den"` strings and big
    /// integers as decimal strings.
    pub derived: serde_json::Value,
}

impl Manifest {
    pub fn new(
        construction: Construction,
        params: serde_json::Value,
        schedule: &BlockSchedule,
        horizon: u64,
        derived: serde_json::Value,
    ) -> Self {
        let materialized_levels = (1..=schedule.max_level())
            .map_while(|n| schedule.a_u64(n).filter(|&a| a <= horizon))
            .map(|a| a.to_string())
            .collect();
        Manifest {
            format_version: FORMAT_VERSION,
            construction,
            params,
            schedule: ScheduleJson::of(schedule),
            materialized_levels,
            horizon,
            generator_version: concat!("tpz ", env!("CARGO_PKG_VERSION")).to_string(),
            seeds: BTreeMap::new(),
            derived,
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        contents(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write(path: &Path, manifest: &Manifest, symbols: &[Symbol]) -> Result<()> {
    if manifest.horizon != symbols.len() as u64 {
        bail!("manifest horizon {} != body length {}", manifest.horizon, symbols.len());
    }
    write_atomic(path, |w| {
        w.write_all(MAGIC.as_bytes())?;
        serde_json::to_writer(&mut *w, manifest)?;
        w.write_all(b"\n")?;
        let digits: Vec<u8> = symbols.iter().map(|s| s.digit()).collect();
        for line in digits.chunks(LINE_WIDTH) {
            w.write_all(line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read(path: &Path) -> Result<(Manifest, Vec<Symbol>)> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let Some(json) = header.strip_prefix(MAGIC) else {
        bail!("{} is not a sequence file (missing {MAGIC:?} header)", path.display());
    };
    let manifest: Manifest = serde_json::from_str(json.trim_end()).context("malformed manifest")?;
    if manifest.format_version != FORMAT_VERSION {
        bail!("unsupported format version {}", manifest.format_version);
    }
    let mut symbols = Vec::with_capacity(manifest.horizon as usize);
    let mut line = Vec::new();
    let mut line_no = 1;
    loop {
        line.clear();
        if reader.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        line_no += 1;
        for &c in line.iter().filter(|c| !c.is_ascii_whitespace()) {
            match Symbol::from_digit(c) {
                Some(s) => symbols.push(s),
                None => bail!("line {line_no}: invalid symbol {:?}", c as char),
            }
        }
    }
    if symbols.len() as u64 != manifest.horizon {
        bail!(
            "body holds {} symbols but the manifest declares {}",
            symbols.len(),
            manifest.horizon
        );
    }
    Ok((manifest, symbols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> BlockSchedule {
        BlockSchedule::new(4, LevelRule::Constant { value: 1 }, LevelRule::Pow2 { offset: 0 }, 3).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.tpz");
        let symbols: Vec<Symbol> = (0..10_000u32).map(|i| Symbol::ALL[(i * i % 7 % 3) as usize]).collect();
        let mut m = Manifest::new(
            Construction::Interior,
            serde_json::json!({"a1": 4}),
            &schedule(),
            symbols.len() as u64,
            serde_json::json!({"rho": ["1/4", "3/4"]}),
        );
        m.seeds.insert("target_seed".into(), 9);
        write(&path, &m, &symbols).unwrap();
        let (m2, s2) = read(&path).unwrap();
        assert_eq!(m, m2);
        assert_eq!(symbols, s2);
        assert_eq!(m2.materialized_levels, ["4", "12", "60"]);
        assert_eq!(m2.schedule.build().unwrap().a_u64(3), Some(60));
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().skip(1).all(|l| l.len() <= LINE_WIDTH));
    }

    #[test]
    fn rejects_bad_bodies() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.tpz");
        let m = Manifest::new(Construction::Segment, serde_json::json!({}), &schedule(), 3, serde_json::json!({}));
        write(&path, &m, &[Symbol::Zero, Symbol::One, Symbol::Two]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\n012", "\n013")).unwrap();
        assert!(read(&path).unwrap_err().to_string().contains("invalid symbol"));
        fs::write(&path, text.replace("\n012", "\n01")).unwrap();
        assert!(read(&path).is_err());
        fs::write(&path, "hello\n").unwrap();
        assert!(read(&path).is_err());
    }
}
