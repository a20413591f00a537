//! Upper bounds from centred balls.
//!
//! A ball centred at `(1/2, ..., 1/2)` whose radius reaches the
//! origin-nearest corner of a restricted cube (a level-`k` cube inside
//! `[0, 1/3]^d`) contains that whole cube, since on `[0, 1/2]^d` that corner
//! is the cube's farthest point from the centre. Counting such cubes and
//! multiplying by the `2^d` mirror images bounds the ball's measure from
//! below, and `(2r)^s / mu` bounds the Hausdorff measure from above.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{dimension, BoundDirection, BoundResult, Witness};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::lattice::{pow3, restricted_corner_stream, CornerStream, SquaredDistance, DEFAULT_ENUM_BUDGET};
use crate::numeric::{pow_directed, scale_div_directed, Exponent, Rounding, DIRECTED_REL_ERROR};
use crate::Rational;

/// Keys per enumeration work unit.
const CHUNK: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HistogramStrategy {
    /// Visit every restricted corner.
    #[default]
    Enumerate,
    /// Convolve the per-axis distance multiset `d` times.
    Convolve,
}

#[derive(Clone, Copy, Debug)]
pub struct UpperOptions {
    pub budget: u64,
    pub strategy: HistogramStrategy,
}

impl Default for UpperOptions {
    fn default() -> Self {
        UpperOptions { budget: DEFAULT_ENUM_BUDGET, strategy: HistogramStrategy::Enumerate }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramEntry {
    /// Squared centre distance in units of `(2 * 3^k)^-2`.
    pub key: u64,
    /// Number of restricted corners at distance `<=` this one.
    pub cum_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceHistogram {
    pub dim: u32,
    pub depth: u32,
    pub entries: Vec<HistogramEntry>,
}

impl DistanceHistogram {
    pub fn sq_dist(&self, i: usize) -> SquaredDistance {
        SquaredDistance::centered(self.entries[i].key, self.depth)
    }

    pub fn total(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.cum_count)
    }

    /// Cumulative count at the largest key `<= key`.
    pub fn count_within(&self, key: u64) -> u64 {
        match self.entries.partition_point(|e| e.key <= key) {
            0 => 0,
            n => self.entries[n - 1].cum_count,
        }
    }

    fn from_counts(dim: u32, depth: u32, counts: Vec<(u64, u64)>) -> Self {
        let mut cum = 0u64;
        let entries = counts
            .into_iter()
            .map(|(key, n)| {
                cum += n;
                HistogramEntry { key, cum_count: cum }
            })
            .collect();
        DistanceHistogram { dim, depth, entries }
    }
}

/// Run-length encodes a sorted key list.
fn run_lengths(sorted: &[u64]) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    for &k in sorted {
        match out.last_mut() {
            Some((last, n)) if *last == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Sorted union of two run-length lists, adding counts of equal keys.
fn merge_counts(a: Vec<(u64, u64)>, b: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    if a.is_empty() {
        return b;
    }
    if b.is_empty() {
        return a;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ka, na) = a[i];
        let (kb, nb) = b[j];
        if ka < kb {
            out.push((ka, na));
            i += 1;
        } else if kb < ka {
            out.push((kb, nb));
            j += 1;
        } else {
            out.push((ka, na + nb));
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn enumerate_counts(stream: &CornerStream) -> Vec<(u64, u64)> {
    let parts = stream.partitions(stream.len().div_ceil(CHUNK));
    parts
        .into_par_iter()
        .map(|range| {
            let mut keys: Vec<u64> = range.map(|i| stream.center_key(i)).collect();
            keys.sort_unstable();
            run_lengths(&keys)
        })
        .reduce(Vec::new, merge_counts)
}

fn convolve_counts(stream: &CornerStream) -> Vec<(u64, u64)> {
    let mut axis = stream.axis_keys().to_vec();
    axis.sort_unstable();
    let axis = run_lengths(&axis);
    let mut acc = vec![(0u64, 1u64)];
    for _ in 0..stream.dim() {
        acc = axis
            .par_iter()
            .map(|&(shift, mult)| acc.iter().map(|&(k, n)| (k + shift, n * mult)).collect::<Vec<_>>())
            .reduce(Vec::new, merge_counts);
    }
    acc
}

/// Exact histogram of centre distances over the restricted corners.
pub fn build_histogram(dim: u32, depth: u32, opts: &UpperOptions) -> Result<DistanceHistogram> {
    let stream = restricted_corner_stream(dim, depth, opts.budget)?;
    if stream.len() >= 1 << 53 {
        return Err(Error::BudgetExceeded { required: u128::from(stream.len()), budget: 1 << 53 });
    }
    let counts = match opts.strategy {
        HistogramStrategy::Enumerate => enumerate_counts(&stream),
        HistogramStrategy::Convolve => convolve_counts(&stream),
    };
    let hist = DistanceHistogram::from_counts(dim, depth, counts);
    debug_assert_eq!(hist.total(), stream.len());
    Ok(hist)
}

/// The best certified upper bound over every radius in the histogram.
pub fn upper_bound_from_histogram(hist: &DistanceHistogram) -> Result<BoundResult> {
    let (dim, depth) = (hist.dim, hist.depth);
    let exponent = Exponent::half_dimension(dim);
    let s_half = dimension(dim) / 2.0;
    // (2r)^2 = key / 9^k; feasible diameters lie in [1/3, sqrt(d)]
    let unit = pow3(2 * depth);
    let lowest = pow3(2 * depth - 2);
    let highest = u64::from(dim) * unit;
    let shift = ((depth - 1) * dim) as i32;

    let mut best: Option<(f64, usize)> = None;
    for (i, entry) in hist.entries.iter().enumerate() {
        if entry.key < lowest || entry.key > highest {
            continue;
        }
        // cheap screen; only near-winners get the directed evaluation
        let approx = (entry.key as f64 / unit as f64).powf(s_half) * 2f64.powi(shift) / entry.cum_count as f64;
        if let Some((v, _)) = best {
            if approx > v * (1.0 + 1e-9) {
                continue;
            }
        }
        let base = Rational::new(entry.key.into(), unit.into());
        let power = pow_directed(&base, exponent, Rounding::Up);
        let value = scale_div_directed(power, shift, entry.cum_count, Rounding::Up);
        if best.map_or(true, |(v, _)| value < v) {
            best = Some((value, i));
        }
    }
    let (value, i) = best.ok_or_else(|| Error::InvalidArgument(format!("no feasible radius at d={dim}, k={depth}")))?;
    let entry = hist.entries[i];
    let mu_low = Rational::new(entry.cum_count.into(), 1u64.into()) / Rational::from_integer((1u128 << shift).into());
    Ok(BoundResult {
        direction: BoundDirection::Upper,
        value,
        dim,
        depth,
        witness: Witness::Ball {
            diameter_sq: Rational::new(entry.key.into(), unit.into()).into(),
            covered: entry.cum_count,
            mu_low: ExactRational(mu_low),
        },
        certified: true,
        rounding_budget: 2.0 * DIRECTED_REL_ERROR,
    })
}

pub fn upper_bound(dim: u32, depth: u32, opts: &UpperOptions) -> Result<BoundResult> {
    let hist = build_histogram(dim, depth, opts)?;
    upper_bound_from_histogram(&hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(dim: u32, depth: u32) -> DistanceHistogram {
        build_histogram(dim, depth, &UpperOptions::default()).unwrap()
    }

    fn entries(h: &DistanceHistogram) -> Vec<(Rational, u64)> {
        (0..h.entries.len()).map(|i| (h.sq_dist(i).to_rational(), h.entries[i].cum_count)).collect()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(entries(&hist(2, 1)), vec![(r(1, 2), 1)]);
        assert_eq!(entries(&hist(2, 2)), vec![(r(25, 162), 1), (r(53, 162), 3), (r(81, 162), 4)]);
        assert_eq!(entries(&hist(1, 1)), vec![(r(1, 4), 1)]);
    }

    #[test]
    fn strategies_agree() {
        for (dim, depth) in [(1, 6), (2, 5), (3, 4), (4, 3), (5, 3)] {
            let a = build_histogram(dim, depth, &UpperOptions { strategy: HistogramStrategy::Enumerate, ..Default::default() }).unwrap();
            let b = build_histogram(dim, depth, &UpperOptions { strategy: HistogramStrategy::Convolve, ..Default::default() }).unwrap();
            assert_eq!(a, b, "d={dim} k={depth}");
        }
    }

    #[test]
    fn histogram_invariants() {
        let h = hist(3, 4);
        assert!(h.entries.windows(2).all(|w| w[0].key < w[1].key && w[0].cum_count < w[1].cum_count));
        assert_eq!(h.total(), 1 << 9);
        assert_eq!(h.count_within(0), 0);
        assert_eq!(h.count_within(u64::MAX), 1 << 9);
    }

    #[test]
    fn dimension_one_is_exact() {
        for k in 1..=8 {
            let b = upper_bound(1, k, &UpperOptions::default()).unwrap();
            assert_eq!(b.value, 1.0, "k={k}");
        }
    }

    #[test]
    fn d2_k2_sweep() {
        let b = upper_bound(2, 2, &UpperOptions::default()).unwrap();
        assert!((b.value - 1.548562652630243).abs() < 1e-12, "{}", b.value);
        match b.witness {
            Witness::Ball { diameter_sq, covered, .. } => {
                assert_eq!(diameter_sq, ExactRational::new(2, 1));
                assert_eq!(covered, 4);
            }
            _ => panic!("wrong witness"),
        }
    }

    #[test]
    fn budget_is_enforced() {
        let opts = UpperOptions { budget: 1 << 10, ..Default::default() };
        assert!(matches!(upper_bound(3, 6, &opts), Err(Error::BudgetExceeded { .. })));
    }
}
