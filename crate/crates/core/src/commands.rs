//! Command implementations behind the `cantor-bounds` binary. Each returns
//! the [`RunRecord`] it would cache plus the text it would print.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::bounds::{dimension, naive_upper, BoundDirection, BoundResult, Witness};
use crate::error::{Error, Result};
use crate::lattice::{check_depth, check_dim, MAX_DEPTH};
use crate::lower::{refine_lower_bound, replay_d3, upper_from_value, LowerBoundChain, LowerOptions, ReplayReport, Seed};
use crate::numeric::Rounding;
use crate::record::{
    best_upper, display_bound, format_directed, load_all, report_csv, report_rows, report_series, save, write_atomic,
    NaiveRow, RecordResult, RunRecord,
};
use crate::upper::{upper_bound, HistogramStrategy, UpperOptions};

/// Largest enumeration an automatic in-process upper bound may use.
const AUTO_UPPER_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub record: RunRecord,
    pub text: String,
}

fn strategy_name(s: HistogramStrategy) -> &'static str {
    match s {
        HistogramStrategy::Enumerate => "enumerate",
        HistogramStrategy::Convolve => "convolve",
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

pub fn cmd_upper(dim: u32, depth: u32, opts: &UpperOptions) -> Result<Outcome> {
    check_dim(dim)?;
    check_depth(depth)?;
    let start = Instant::now();
    let bound = upper_bound(dim, depth, opts)?;
    let mut flags = BTreeMap::new();
    flags.insert("strategy".to_string(), strategy_name(opts.strategy).to_string());
    let mut record = RunRecord::new("upper", dim, depth, flags, RecordResult::from_bound(&bound));
    record.enumeration_count = 1u64 << ((depth - 1) * dim);
    record.timing.wall_time_ms = elapsed_ms(start);

    let mut text = format!("H^s(C^{dim}) <= {}\n", display_bound(&bound));
    if let Witness::Ball { diameter_sq, covered, mu_low } = &bound.witness {
        let _ = writeln!(text, "  ball diameter^2   {diameter_sq}  (diameter ~ {:.12})", diameter_sq.to_f64().sqrt());
        let _ = writeln!(text, "  restricted cubes  {covered} of {}", record.enumeration_count);
        let _ = writeln!(text, "  mu(ball) >=       {mu_low}");
    }
    Ok(Outcome { record, text })
}

/// Where the upper bound for a lower-bound run comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum UpperSource {
    /// Best cached run, else an in-process run at the deepest affordable depth.
    Auto,
    /// A value supplied by the caller; the resulting chain is conditional on it.
    Value(f64),
}

/// Best cached upper bound for `dim`, else a fresh run.
pub fn resolve_upper(dim: u32, source: &UpperSource, cache: &Path, budget: u64) -> Result<BoundResult> {
    match *source {
        UpperSource::Value(v) => {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("upper bound {v} must be positive")));
            }
            Ok(upper_from_value(dim, 0, v))
        }
        UpperSource::Auto => {
            let records = load_all(cache)?;
            if let Some((_, k)) = best_upper(&records, dim) {
                let rec = records
                    .iter()
                    .find(|r| r.command == "upper" && r.params.d == dim && r.params.k == k)
                    .expect("best record exists");
                return Ok(BoundResult {
                    direction: BoundDirection::Upper,
                    value: rec.result.value,
                    dim,
                    depth: k,
                    witness: rec.result.witness.clone(),
                    certified: rec.result.certified,
                    rounding_budget: rec.result.rounding_budget,
                });
            }
            let limit = budget.min(AUTO_UPPER_BUDGET);
            let mut depth = 1;
            while depth < MAX_DEPTH && u64::from(depth) * u64::from(dim) < 64 && (1u64 << (depth * dim)) <= limit {
                depth += 1;
            }
            upper_bound(dim, depth, &UpperOptions { budget: limit, ..Default::default() })
        }
    }
}

fn chain_table(chain: &LowerBoundChain) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "  step  |B|^2 >=   mu_min          cap        assume |B|^2 <  classes");
    for (i, s) in chain.steps.iter().enumerate() {
        let _ = writeln!(
            t,
            "  {:<4}  {:<9}  {:<14}  {:<9}  {:<14}  {}",
            i + 1,
            s.previous_sq.to_string(),
            format_directed(s.mu_min, 9, Rounding::Down),
            s.measure_cap.to_string(),
            s.threshold_sq.to_string(),
            s.assumed_classes.len()
        );
    }
    t
}

fn lower_flags(source: &UpperSource, seed: Seed, replay: bool) -> BTreeMap<String, String> {
    let mut flags = BTreeMap::new();
    flags.insert(
        "upper_bound".to_string(),
        match source {
            UpperSource::Auto => "auto".to_string(),
            UpperSource::Value(v) => format!("{v:?}"),
        },
    );
    flags.insert("seed".to_string(), match seed {
        Seed::OneThird => "1/3",
        Seed::FiveNinths => "5/9",
    }
    .to_string());
    if replay {
        flags.insert("replay".to_string(), "true".to_string());
    }
    flags
}

/// Result of `lower`; `failure` is set when a replay check disagreed.
#[derive(Debug)]
pub struct LowerOutcome {
    pub outcome: Outcome,
    pub replay: Option<ReplayReport>,
    pub failure: Option<Error>,
}

pub fn cmd_lower(dim: u32, depth: u32, upper: &BoundResult, seed: Seed, replay: bool, opts: &LowerOptions) -> Result<LowerOutcome> {
    check_dim(dim)?;
    check_depth(depth)?;
    if replay && (dim != 3 || depth != 2) {
        return Err(Error::InvalidArgument("--replay applies to --dim 3 --depth 2 only".into()));
    }
    let source = if upper.certified { UpperSource::Auto } else { UpperSource::Value(upper.value) };
    let flags = lower_flags(&source, seed, replay);
    let start = Instant::now();
    let mut text = String::new();
    let (chain, report, failure) = if replay {
        let report = replay_d3(upper)?;
        for c in &report.checks {
            let mark = match (c.passed, c.informational) {
                (true, _) => "ok  ",
                (false, true) => "note",
                (false, false) => "FAIL",
            };
            let _ = writeln!(text, "  [{mark}] step {} {}: expected {}, got {}", c.step, c.label, c.expected, c.computed);
        }
        let failure = report
            .failure
            .as_ref()
            .map(|f| Error::ReplayFailed { step: f.step, label: f.label.clone(), reason: f.reason.clone() });
        let _ = writeln!(
            text,
            "full chain to |B|^2 >= 104/81 would give {} (printed value {} corresponds to exponent 3 log_2 3: {})",
            format_directed(report.full_chain_value, 9, Rounding::Down),
            report.printed_final,
            format_directed(report.printed_final_exponent_match, 7, Rounding::Down),
        );
        (report.chain.clone(), Some(report), failure)
    } else {
        let opts = LowerOptions { seed, ..opts.clone() };
        (refine_lower_bound(dim, depth, upper, &opts)?, None, None)
    };
    let mut chain = chain;
    if let Some(f) = &failure {
        chain.notes.push(format!("certified only through the steps before the failure: {f}"));
    }
    if !upper.certified {
        chain.notes.push(format!("conditional on the supplied upper bound {:?}", upper.value));
    }
    let bound = chain.bound();
    let mut record = RunRecord::new("lower", dim, depth, flags, RecordResult::from_chain(&chain));
    record.result.certified = upper.certified;
    record.enumeration_count = 1u64 << (depth * dim).min(63);
    record.timing.wall_time_ms = elapsed_ms(start);

    let mut head = format!(
        "H^s(C^{dim}) >= {}  (|B|^2 >= {}, upper bound used {})\n",
        display_bound(&bound),
        chain.final_sq,
        upper.value
    );
    head.push_str(&chain_table(&chain));
    for n in &chain.notes {
        let _ = writeln!(head, "  note: {n}");
    }
    head.push_str(&text);
    if let Some(f) = &failure {
        let _ = writeln!(head, "{f}");
    }
    Ok(LowerOutcome { outcome: Outcome { record, text: head }, replay: report, failure })
}

pub fn cmd_naive(d_max: u32) -> Result<Outcome> {
    check_dim(d_max)?;
    let start = Instant::now();
    let rows: Vec<NaiveRow> = (1..=d_max).map(|d| NaiveRow { d, s_d: dimension(d), naive: naive_upper(d) }).collect();
    let top = BoundResult {
        direction: BoundDirection::Upper,
        value: naive_upper(d_max),
        dim: d_max,
        depth: 0,
        witness: Witness::Cover,
        certified: true,
        rounding_budget: crate::numeric::DIRECTED_REL_ERROR,
    };
    let mut result = RecordResult::from_bound(&top);
    result.rows = rows.clone();
    let mut record = RunRecord::new("naive", d_max, 0, BTreeMap::new(), result);
    record.timing.wall_time_ms = elapsed_ms(start);
    let mut text = String::from("d  s_d           naive\n");
    for r in &rows {
        let _ = writeln!(text, "{:<2} {:<13} {}", r.d, format_directed(r.s_d, 12, Rounding::Down), format_directed(r.naive, 12, Rounding::Up));
    }
    Ok(Outcome { record, text })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Plot,
}

/// Writes the report for the cache in `cache` into `out`; returns the files written.
pub fn cmd_report(cache: &Path, out: &Path, format: ReportFormat) -> Result<(Vec<PathBuf>, String)> {
    let records = load_all(cache)?;
    if records.is_empty() {
        return Err(Error::EmptyCache(cache.display().to_string()));
    }
    let rows = report_rows(&records).map_err(|_| Error::EmptyCache(cache.display().to_string()))?;
    let mut written = Vec::new();
    let text = match format {
        ReportFormat::Csv => {
            let csv = report_csv(&rows);
            let path = out.join("report.csv");
            write_atomic(&path, &csv)?;
            written.push(path);
            csv
        }
        ReportFormat::Json => {
            let json = serde_json::to_string_pretty(&rows)? + "\n";
            let path = out.join("report.json");
            write_atomic(&path, &json)?;
            written.push(path);
            json
        }
        ReportFormat::Plot => {
            let mut listing = String::new();
            for (stem, body) in report_series(&rows) {
                let path = out.join(format!("{stem}.dat"));
                write_atomic(&path, &body)?;
                let _ = writeln!(listing, "{}", path.display());
                written.push(path);
            }
            listing
        }
    };
    Ok((written, text))
}

/// Saves `record` into `cache` and returns its path.
pub fn persist(cache: &Path, record: &RunRecord) -> Result<PathBuf> {
    save(cache, record)
}
