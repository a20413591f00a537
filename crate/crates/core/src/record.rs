//! Run records, the on-disk result cache and report emitters.
//!
//! Every run is one JSON file `<command>-d<d>-k<k>.json` in the cache
//! directory (`results/` unless `CANTOR_BOUNDS_DIR` is set). Writes go to a
//! temporary file first and are renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{dimension, naive_upper, BoundDirection, BoundResult, Witness};
use crate::error::{Error, Result};
use crate::lower::{LowerBoundChain, RefinementStep};
use crate::numeric::{rational_from_f64, Rounding, DIRECTED_REL_ERROR};
use crate::Rational;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_ENV: &str = "CANTOR_BOUNDS_DIR";
pub const CSV_HEADER: &str = "d,s_d,naive,upper,lower,depth_upper,depth_lower";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: u32,
    pub k: u32,
    pub flags: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveRow {
    pub d: u32,
    pub s_d: f64,
    pub naive: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub direction: BoundDirection,
    pub value: f64,
    pub witness: Witness,
    pub certified: bool,
    pub rounding_budget: f64,
    pub chain: Vec<RefinementStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<NaiveRow>,
}

impl RecordResult {
    pub fn from_bound(b: &BoundResult) -> Self {
        RecordResult {
            direction: b.direction,
            value: b.value,
            witness: b.witness.clone(),
            certified: b.certified,
            rounding_budget: b.rounding_budget,
            chain: Vec::new(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn from_chain(c: &LowerBoundChain) -> Self {
        let mut r = RecordResult::from_bound(&c.bound());
        r.chain = c.steps.clone();
        r.notes = c.notes.clone();
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub params: Params,
    pub result: RecordResult,
    pub timing: Timing,
    pub enumeration_count: u64,
    pub tool_version: String,
}

impl RunRecord {
    pub fn new(command: &str, d: u32, k: u32, flags: BTreeMap<String, String>, result: RecordResult) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            params: Params { d, k, flags },
            result,
            timing: Timing { wall_time_ms: 0 },
            enumeration_count: 0,
            tool_version: TOOL_VERSION.into(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}-d{}-k{}.json", self.command, self.params.d, self.params.k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// JSON with the wall-clock field zeroed; identical for identical runs.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timing.wall_time_ms = 0;
        copy.to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: RunRecord = serde_json::from_str(text)?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported schema version {}", rec.schema_version)));
        }
        Ok(rec)
    }
}

/// `CANTOR_BOUNDS_DIR`, or `results` in the working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"))
}

/// Writes `contents` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("record");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn save(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    let path = dir.join(record.file_name());
    write_atomic(&path, &record.to_json()?)?;
    Ok(path)
}

pub fn load(path: &Path) -> Result<RunRecord> {
    RunRecord::from_json(&fs::read_to_string(path)?)
}

/// Every parseable record in `dir`, sorted by file name. Foreign files are skipped.
pub fn load_all(dir: &Path) -> Result<Vec<RunRecord>> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths.iter().filter_map(|p| load(p).ok()).collect())
}

/// Best cached upper bound for `d`: smallest value, then deepest.
pub fn best_upper(records: &[RunRecord], d: u32) -> Option<(f64, u32)> {
    records
        .iter()
        .filter(|r| r.command == "upper" && r.params.d == d && r.result.direction == BoundDirection::Upper)
        .map(|r| (r.result.value, r.params.k))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
}

pub fn best_lower(records: &[RunRecord], d: u32) -> Option<(f64, u32)> {
    records
        .iter()
        .filter(|r| r.command == "lower" && r.params.d == d && r.result.direction == BoundDirection::Lower)
        .map(|r| (r.result.value, r.params.k))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub d: u32,
    pub s_d: f64,
    pub naive: f64,
    pub upper: Option<f64>,
    pub lower: Option<f64>,
    pub depth_upper: Option<u32>,
    pub depth_lower: Option<u32>,
}

/// One row per dimension with a cached upper or lower run.
pub fn report_rows(records: &[RunRecord]) -> Result<Vec<ReportRow>> {
    let mut dims: Vec<u32> = records
        .iter()
        .filter(|r| r.command == "upper" || r.command == "lower")
        .map(|r| r.params.d)
        .collect();
    dims.sort_unstable();
    dims.dedup();
    if dims.is_empty() {
        return Err(Error::EmptyCache("no upper or lower runs".into()));
    }
    Ok(dims
        .into_iter()
        .map(|d| {
            let up = best_upper(records, d);
            let lo = best_lower(records, d);
            ReportRow {
                d,
                s_d: dimension(d),
                naive: naive_upper(d),
                upper: up.map(|x| x.0),
                lower: lo.map(|x| x.0),
                depth_upper: up.map(|x| x.1),
                depth_lower: lo.map(|x| x.1),
            }
        })
        .collect())
}

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.d,
            r.s_d,
            r.naive,
            cell(r.upper),
            cell(r.lower),
            cell(r.depth_upper),
            cell(r.depth_lower)
        );
    }
    out
}

/// Two-column `d value` series keyed by file stem: `upper`, `naive`, `lower`.
pub fn report_series(rows: &[ReportRow]) -> Vec<(&'static str, String)> {
    let mut upper = String::new();
    let mut naive = String::new();
    let mut lower = String::new();
    for r in rows {
        let _ = writeln!(naive, "{} {}", r.d, r.naive);
        if let Some(v) = r.upper {
            let _ = writeln!(upper, "{} {}", r.d, v);
        }
        if let Some(v) = r.lower {
            let _ = writeln!(lower, "{} {}", r.d, v);
        }
    }
    vec![("upper", upper), ("naive", naive), ("lower", lower)]
}

/// Significant digits that the rounding budget supports.
pub fn certified_digits(rounding_budget: f64) -> usize {
    let budget = if rounding_budget > 0.0 { rounding_budget } else { DIRECTED_REL_ERROR };
    (-budget.log10()).floor().clamp(1.0, 17.0) as usize
}

/// `value` to `digits` significant digits, rounded towards `dir` exactly,
/// so an upper bound is never printed smaller or a lower bound larger.
pub fn format_directed(value: f64, digits: usize, dir: Rounding) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let exact = rational_from_f64(value);
    if exact.is_zero() {
        return "0".into();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let mut scale = digits as i32 - 1 - magnitude;
    let ten = |e: u32| Rational::from_integer(BigInt::from(10).pow(e));
    let scaled = if scale >= 0 { &exact * ten(scale as u32) } else { &exact / ten((-scale) as u32) };
    let mut n = match dir {
        Rounding::Up => scaled.ceil().to_integer(),
        Rounding::Down => scaled.floor().to_integer(),
    };
    let negative = n.is_negative();
    let mut text = n.abs().to_string();
    // log10 can misjudge the magnitude by one near powers of ten
    if text.len() > digits && scale > 0 && text.ends_with('0') {
        n /= 10;
        scale -= 1;
        text = n.abs().to_string();
    }
    let body = if scale <= 0 {
        format!("{text}{}", "0".repeat((-scale) as usize))
    } else {
        let s = scale as usize;
        if text.len() <= s {
            format!("0.{}{text}", "0".repeat(s - text.len()))
        } else {
            format!("{}.{}", &text[..text.len() - s], &text[text.len() - s..])
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// A bound printed with only the digits its rounding budget certifies.
pub fn display_bound(b: &BoundResult) -> String {
    format_directed(b.value, certified_digits(b.rounding_budget), b.direction.rounding())
}
