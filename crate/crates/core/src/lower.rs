//! Lower bounds through the diameter of an optimal set.
//!
//! An optimal set `B` satisfies `mu(B) = |B|^s / H^s(C^d)`, so a lower bound
//! `L` on `|B|` and an upper bound `H` on the measure give `mu(B) >= L^s / H`.
//! Conversely, if `|B| < L'` then every pair of level-`k` cubes whose corners
//! are at least `L'` apart (a repulsive pair) contributes at most one cube's
//! worth of measure, so a matching of `M` such pairs among the `T` cubes `B`
//! can reach caps `mu(B) <= (T - M) / 2^{kd}`. Whenever that cap falls below
//! `L^s / H` for every configuration `B` could be in, `|B| >= L'` and the
//! argument repeats. With `mu(B) <= 1`, the final `L^s` bounds the measure
//! from below.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{dimension, BoundDirection, BoundResult, Witness};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::lattice::{
    all_quadrant_classes, check_depth, check_dim, corner_of, kappa_inv, pow3, restricted_axis_coords, SymbolString,
    DEFAULT_ENUM_BUDGET,
};
use crate::matching::{matching_with_limit, max_matching, Graph, Matching};
use crate::numeric::{div_directed, pow_directed, rational_from_f64, Exponent, Rounding, DIRECTED_REL_ERROR};
use crate::Rational;

/// Default cap on repulsive-graph vertices.
pub const DEFAULT_VERTEX_BUDGET: u64 = 1 << 12;

fn ratio(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Which separations count as repulsive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRule {
    /// `|S_I(0) - S_J(0)|^2 >= L^2`, used when the set is assumed narrower than `L`.
    AtLeast,
    /// `|S_I(0) - S_J(0)|^2 > L^2`, used when the set is assumed at most `L` wide.
    Exceeds,
}

/// Level-`k` cubes of the quadrants `Q`, joined when they lie in different
/// quadrants and are separated per `rule`.
#[derive(Clone, Debug)]
pub struct RepulsiveGraph {
    pub dim: u32,
    pub depth: u32,
    pub quadrants: Vec<u32>,
    pub threshold_sq: Rational,
    pub rule: EdgeRule,
    pub vertices: Vec<SymbolString>,
    pub graph: Graph,
}

fn validate_quadrants(dim: u32, quadrants: &[u32]) -> Result<Vec<u32>> {
    let mut q = quadrants.to_vec();
    q.sort_unstable();
    q.dedup();
    if q.len() != quadrants.len() {
        return Err(Error::InvalidQuadrants(format!("{quadrants:?} repeats a quadrant")));
    }
    if q.len() < 2 {
        return Err(Error::InvalidQuadrants(format!("{quadrants:?} has fewer than two quadrants")));
    }
    for &i in &q {
        kappa_inv(i, dim)?;
    }
    Ok(q)
}

/// Corner-distance numerator (units `3^-2k`) an edge must reach.
fn edge_cutoff(threshold_sq: &Rational, depth: u32, rule: EdgeRule) -> Option<u64> {
    let scaled = threshold_sq * Rational::from_integer(BigInt::from(pow3(2 * depth)));
    if scaled.is_negative() {
        return Some(0);
    }
    let cutoff = match rule {
        EdgeRule::AtLeast => scaled.ceil().to_integer(),
        EdgeRule::Exceeds => scaled.floor().to_integer() + 1,
    };
    cutoff.to_u64()
}

/// All depth-`k` addresses with first symbol in `quadrants`, in lexicographic order.
fn addresses(dim: u32, depth: u32, quadrants: &[u32]) -> Vec<SymbolString> {
    let per = 1usize << ((depth - 1) * dim);
    let base = 1u32 << dim;
    let mut out = Vec::with_capacity(per * quadrants.len());
    for &q in quadrants {
        for idx in 0..per {
            let mut symbols = vec![q];
            let mut rest = idx;
            let mut tail = vec![0u32; (depth - 1) as usize];
            for slot in tail.iter_mut().rev() {
                *slot = (rest % base as usize) as u32 + 1;
                rest /= base as usize;
            }
            symbols.extend(tail);
            out.push(SymbolString::new(dim, symbols).expect("valid address"));
        }
    }
    out
}

pub fn build_repulsive_graph(
    dim: u32,
    depth: u32,
    quadrants: &[u32],
    threshold_sq: &Rational,
    rule: EdgeRule,
    vertex_budget: u64,
) -> Result<RepulsiveGraph> {
    check_dim(dim)?;
    check_depth(depth)?;
    let quadrants = validate_quadrants(dim, quadrants)?;
    let bits = u64::from(depth - 1) * u64::from(dim);
    let required = (quadrants.len() as u128) << bits.min(100);
    if bits >= 64 || required > u128::from(vertex_budget) {
        return Err(Error::BudgetExceeded { required, budget: u128::from(vertex_budget) });
    }
    let vertices = addresses(dim, depth, &quadrants);
    let corners: Vec<Vec<u64>> = vertices.iter().map(|v| corner_of(v).coords().to_vec()).collect();
    let n = vertices.len();
    let mut graph = Graph::new(n);
    if let Some(cutoff) = edge_cutoff(threshold_sq, depth, rule) {
        let rows: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|u| {
                ((u + 1)..n)
                    .filter(|&v| {
                        vertices[u].quadrant() != vertices[v].quadrant() && {
                            let d: u64 = corners[u]
                                .iter()
                                .zip(&corners[v])
                                .map(|(&a, &b)| {
                                    let x = a.abs_diff(b);
                                    x * x
                                })
                                .sum();
                            d >= cutoff
                        }
                    })
                    .collect()
            })
            .collect();
        for (u, row) in rows.into_iter().enumerate() {
            for v in row {
                graph.push_edge_unchecked(u, v);
            }
        }
    }
    Ok(RepulsiveGraph { dim, depth, quadrants, threshold_sq: threshold_sq.clone(), rule, vertices, graph })
}

/// A matching of repulsive pairs, with the addresses spelled out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMatching {
    pub pairs: Vec<(SymbolString, SymbolString)>,
    pub maximum: bool,
}

impl PairMatching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }
}

fn named(g: &RepulsiveGraph, m: Matching) -> PairMatching {
    PairMatching {
        pairs: m.pairs.iter().map(|&(u, v)| (g.vertices[u].clone(), g.vertices[v].clone())).collect(),
        maximum: m.maximum,
    }
}

pub fn max_repulsive_matching(g: &RepulsiveGraph) -> PairMatching {
    named(g, max_matching(&g.graph))
}

/// Cap on `mu(B)` from a matching of `matched` pairs among the cubes of `Q`.
pub fn cap_from_matching(dim: u32, depth: u32, quadrant_count: usize, matched: usize) -> Rational {
    let total = (quadrant_count as u64) << ((depth - 1) * dim);
    let denominator = BigInt::one() << (depth * dim);
    Rational::new(BigInt::from(total - matched as u64), denominator)
}

/// Certified cap `(T - M) / 2^{kd}` together with the matching behind it.
#[derive(Clone, Debug)]
pub struct MeasureCap {
    pub cap: Rational,
    pub total: u64,
    pub matching: PairMatching,
}

pub fn measure_cap_certificate(
    dim: u32,
    depth: u32,
    quadrants: &[u32],
    threshold_sq: &Rational,
    vertex_budget: u64,
) -> Result<MeasureCap> {
    let g = build_repulsive_graph(dim, depth, quadrants, threshold_sq, EdgeRule::AtLeast, vertex_budget)?;
    let matching = max_repulsive_matching(&g);
    let total = g.vertices.len() as u64;
    Ok(MeasureCap { cap: cap_from_matching(dim, depth, g.quadrants.len(), matching.size()), total, matching })
}

pub fn measure_cap(dim: u32, depth: u32, quadrants: &[u32], threshold_sq: &Rational) -> Result<Rational> {
    Ok(measure_cap_certificate(dim, depth, quadrants, threshold_sq, DEFAULT_VERTEX_BUDGET)?.cap)
}

/// `N_k(x)`: maximum number of disjoint pairs between `D_1` and `D_{2^d}`
/// whose corners are more than `x` apart.
pub fn opposite_quadrant_matching(dim: u32, depth: u32, x_sq: &Rational, vertex_budget: u64) -> Result<usize> {
    let far = 1u32 << dim;
    let g = build_repulsive_graph(dim, depth, &[1, far], x_sq, EdgeRule::Exceeds, vertex_budget)?;
    Ok(max_matching(&g.graph).size())
}

/// `(H_d (1 - N_k(x) 2^{d - kd - 1}))^{1 / s_d}`, or 0 when the cap is
/// degenerate.
pub fn w_eval(dim: u32, depth: u32, x_sq: &Rational, upper: f64, rounding: Rounding) -> Result<f64> {
    let n = opposite_quadrant_matching(dim, depth, x_sq, DEFAULT_VERTEX_BUDGET)?;
    Ok(w_from_matching(dim, depth, n, upper, rounding))
}

pub fn w_from_matching(dim: u32, depth: u32, matched: usize, upper: f64, rounding: Rounding) -> f64 {
    let removed = Rational::new(BigInt::from(matched as u64), BigInt::one() << (depth * dim + 1 - dim));
    let remaining = Rational::one() - removed;
    if !remaining.is_positive() {
        return 0.0;
    }
    let base = remaining * rational_from_f64(upper);
    pow_directed(&base, Exponent::inverse_dimension(dim), rounding)
}

/// Distinct squared corner distances (units `3^-2k`) between depth-`k`
/// cubes lying in different quadrants, ascending.
pub fn realized_distances(dim: u32, depth: u32) -> Result<Vec<u64>> {
    check_dim(dim)?;
    check_depth(depth)?;
    let third = pow3(depth - 1);
    let inner = restricted_axis_coords(depth);
    let axis: Vec<(u64, bool)> = inner.iter().map(|&c| (c, false)).chain(inner.iter().map(|&c| (c + 2 * third, true))).collect();
    let mut same = BTreeSet::new();
    let mut cross = BTreeSet::new();
    for &(a, qa) in &axis {
        for &(b, qb) in &axis {
            let d = a.abs_diff(b);
            if qa == qb {
                same.insert(d * d);
            } else {
                cross.insert(d * d);
            }
        }
    }
    // (sum, some axis already crosses quadrants)
    let mut states: BTreeSet<(u64, bool)> = BTreeSet::from([(0, false)]);
    for _ in 0..dim {
        let mut next = BTreeSet::new();
        for &(s, crossed) in &states {
            for &x in &same {
                next.insert((s + x, crossed));
            }
            for &x in &cross {
                next.insert((s + x, true));
            }
        }
        states = next;
        if states.len() as u64 > DEFAULT_ENUM_BUDGET {
            return Err(Error::BudgetExceeded { required: states.len() as u128, budget: u128::from(DEFAULT_ENUM_BUDGET) });
        }
    }
    let out: BTreeSet<u64> = states.into_iter().filter(|&(_, c)| c).map(|(s, _)| s).collect();
    Ok(out.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    /// `|B| >= 1/3`: two distinct level-1 pieces are at least `1/3` apart.
    OneThird,
    /// `|B| > 5/9`.
    FiveNinths,
}

impl Seed {
    pub fn diameter_sq(self) -> Rational {
        match self {
            Seed::OneThird => ratio(1, 9),
            Seed::FiveNinths => ratio(25, 81),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LowerOptions {
    pub seed: Seed,
    pub vertex_budget: u64,
    pub class_budget: u64,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { seed: Seed::FiveNinths, vertex_budget: DEFAULT_VERTEX_BUDGET, class_budget: DEFAULT_ENUM_BUDGET }
    }
}

/// One contradiction: assuming `|B| < sqrt(threshold_sq)` caps `mu(B)` below
/// what the previous diameter bound forces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub previous_sq: ExactRational,
    pub assumed_classes: Vec<Vec<u32>>,
    pub threshold_sq: ExactRational,
    pub matching_sizes: Vec<usize>,
    /// Largest cap over the assumed classes.
    pub measure_cap: ExactRational,
    /// `previous^s / H`, rounded down.
    pub mu_min: f64,
    pub conclusion_sq: ExactRational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundChain {
    pub dim: u32,
    pub depth: u32,
    pub seed_sq: ExactRational,
    pub steps: Vec<RefinementStep>,
    pub upper_used: BoundResult,
    pub final_sq: ExactRational,
    pub final_value: f64,
    pub notes: Vec<String>,
}

impl LowerBoundChain {
    pub fn bound(&self) -> BoundResult {
        BoundResult {
            direction: BoundDirection::Lower,
            value: self.final_value,
            dim: self.dim,
            depth: self.depth,
            witness: Witness::Diameter { diameter_sq: self.final_sq.clone(), steps: self.steps.len() },
            certified: true,
            rounding_budget: DIRECTED_REL_ERROR,
        }
    }

    /// Thresholds strictly increase and every recorded cap is below its `mu_min`.
    pub fn is_valid(&self) -> bool {
        let mut last = self.seed_sq.value().clone();
        for step in &self.steps {
            let t = step.threshold_sq.value();
            if *t <= last || *step.previous_sq.value() != last {
                return false;
            }
            if *step.measure_cap.value() >= rational_from_f64(step.mu_min) {
                return false;
            }
            last = t.clone();
        }
        last == *self.final_sq.value()
    }
}

/// `L^s / H`, rounded down.
pub fn mu_min(dim: u32, diameter_sq: &Rational, upper: f64) -> f64 {
    let power = pow_directed(diameter_sq, Exponent::half_dimension(dim), Rounding::Down);
    div_directed(power, upper, Rounding::Down)
}

/// Lower bound `L^{s_d}` from `mu(B) <= 1`.
pub fn diameter_bound(dim: u32, diameter_sq: &Rational) -> f64 {
    pow_directed(diameter_sq, Exponent::half_dimension(dim), Rounding::Down)
}

fn pairwise_gap_below(dim: u32, class: &[u32], threshold_sq: &Rational) -> bool {
    // B spans all of Q, so every pairwise gap h/9 is below |B|^2 < threshold
    for (a, &i) in class.iter().enumerate() {
        for &j in &class[a + 1..] {
            let h = ((i - 1) ^ (j - 1)).count_ones();
            if ratio(u64::from(h), 9) >= *threshold_sq {
                return false;
            }
        }
    }
    let _ = dim;
    true
}

struct CapOracle {
    dim: u32,
    depth: u32,
    vertex_budget: u64,
    cache: HashMap<(usize, u64), (Rational, usize)>,
}

impl CapOracle {
    /// Cap for class `idx` at cutoff `numerator / 9^k`; any matching is
    /// sound, so a quick one is tried before the exhaustive search.
    fn cap_below(&mut self, idx: usize, class: &[u32], numerator: u64, target: &Rational) -> Result<(Rational, usize, bool)> {
        if let Some((cap, m)) = self.cache.get(&(idx, numerator)) {
            return Ok((cap.clone(), *m, cap < target));
        }
        let threshold = ratio(numerator, pow3(2 * self.depth));
        let g = build_repulsive_graph(self.dim, self.depth, class, &threshold, EdgeRule::AtLeast, self.vertex_budget)?;
        let quick = matching_with_limit(&g.graph, 0);
        let cap = cap_from_matching(self.dim, self.depth, class.len(), quick.size());
        if cap < *target {
            return Ok((cap, quick.size(), true));
        }
        let exact = max_matching(&g.graph);
        let cap = cap_from_matching(self.dim, self.depth, class.len(), exact.size());
        self.cache.insert((idx, numerator), (cap.clone(), exact.size()));
        let ok = cap < *target;
        Ok((cap, exact.size(), ok))
    }
}

/// Repeats the contradiction step over every quadrant configuration until
/// no realized distance above the current bound can be certified.
pub fn refine_lower_bound(dim: u32, depth: u32, upper: &BoundResult, opts: &LowerOptions) -> Result<LowerBoundChain> {
    check_dim(dim)?;
    check_depth(depth)?;
    if upper.direction != BoundDirection::Upper || upper.dim != dim {
        return Err(Error::Mismatch(format!("need an upper bound for d={dim}")));
    }
    let seed_sq = opts.seed.diameter_sq();
    let unit = pow3(2 * depth);
    let mut chain = LowerBoundChain {
        dim,
        depth,
        seed_sq: seed_sq.clone().into(),
        steps: Vec::new(),
        upper_used: upper.clone(),
        final_sq: seed_sq.clone().into(),
        final_value: diameter_bound(dim, &seed_sq),
        notes: Vec::new(),
    };
    let classes = match all_quadrant_classes(dim, opts.class_budget) {
        Ok(c) => c,
        Err(e) => {
            chain.notes.push(format!("quadrant classes not enumerable ({e}); seed bound only"));
            return Ok(chain);
        }
    };
    let ladder = match realized_distances(dim, depth) {
        Ok(l) => l,
        Err(e) => {
            chain.notes.push(format!("distance ladder not enumerable ({e}); seed bound only"));
            return Ok(chain);
        }
    };
    let mut oracle = CapOracle { dim, depth, vertex_budget: opts.vertex_budget, cache: HashMap::new() };
    let mut current = seed_sq;
    loop {
        let floor = mu_min(dim, &current, upper.value);
        let target = rational_from_f64(floor);
        let start = ladder.partition_point(|&n| ratio(n, unit) <= current);
        let candidates = &ladder[start..];
        // acceptance is monotone in the threshold, so bisect for the largest
        let mut accept = |numerator: u64| -> Result<Option<(Vec<Vec<u32>>, Vec<usize>, Rational)>> {
            let threshold = ratio(numerator, unit);
            let mut feasible = Vec::new();
            let mut sizes = Vec::new();
            let mut worst = Rational::zero();
            for (idx, class) in classes.iter().enumerate().rev() {
                if !pairwise_gap_below(dim, class, &threshold) {
                    continue;
                }
                let trivial = ratio(class.len() as u64, 1u64 << dim);
                let (cap, size) = if trivial < target {
                    (trivial, 0)
                } else {
                    let (cap, size, ok) = oracle.cap_below(idx, class, numerator, &target)?;
                    if !ok {
                        return Ok(None);
                    }
                    (cap, size)
                };
                if cap > worst {
                    worst = cap.clone();
                }
                feasible.push(class.clone());
                sizes.push(size);
            }
            Ok(Some((feasible, sizes, worst)))
        };
        let (mut lo, mut hi) = (0usize, candidates.len());
        let mut best = None;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match accept(candidates[mid])? {
                Some(found) => {
                    best = Some((candidates[mid], found));
                    lo = mid + 1;
                }
                None => hi = mid,
            }
        }
        let Some((numerator, (mut assumed, mut sizes, worst))) = best else { break };
        assumed.reverse();
        sizes.reverse();
        let threshold = ratio(numerator, unit);
        chain.steps.push(RefinementStep {
            previous_sq: current.clone().into(),
            assumed_classes: assumed,
            threshold_sq: threshold.clone().into(),
            matching_sizes: sizes,
            measure_cap: worst.into(),
            mu_min: floor,
            conclusion_sq: threshold.clone().into(),
        });
        current = threshold;
    }
    chain.final_value = diameter_bound(dim, &current);
    chain.final_sq = current.into();
    Ok(chain)
}

/// Value printed for the three-dimensional chain, which corresponds to the
/// exponent `3 log_2 3` rather than `s_3`.
pub const PRINTED_D3_FINAL: f64 = 1.811621;

/// Upper bound the three-dimensional chain was written against.
pub const D3_REFERENCE_UPPER: f64 = 2.352741546983966;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayCheck {
    pub step: usize,
    pub label: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
    /// Failures of informational checks (misprinted witness pairs) do not
    /// invalidate the step.
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayFailure {
    pub step: usize,
    pub label: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub checks: Vec<ReplayCheck>,
    /// Steps verified before the first failure.
    pub chain: LowerBoundChain,
    pub failure: Option<ReplayFailure>,
    /// `(2 sqrt(26) / 9)^{s_3}` rounded down: the value the full chain would certify.
    pub full_chain_value: f64,
    pub printed_final: f64,
    /// `(2 sqrt(26) / 9)^{3 log_2 3}`, which reproduces the printed value.
    pub printed_final_exponent_match: f64,
}

type Pair = ((u32, u32), (u32, u32));

const PAIRS_44: [Pair; 8] = [
    ((1, 1), (2, 7)),
    ((1, 2), (2, 8)),
    ((1, 3), (2, 5)),
    ((1, 4), (2, 5)),
    ((1, 5), (2, 4)),
    ((1, 6), (2, 3)),
    ((1, 7), (2, 1)),
    ((1, 8), (2, 2)),
];
const PAIRS_72: [Pair; 4] = [((1, 1), (2, 8)), ((1, 3), (2, 6)), ((1, 5), (2, 4)), ((1, 7), (2, 2))];
const PAIRS_104_FACE: [Pair; 8] = [
    ((1, 1), (4, 7)),
    ((1, 2), (4, 8)),
    ((1, 3), (4, 5)),
    ((1, 4), (4, 5)),
    ((1, 5), (4, 4)),
    ((1, 6), (4, 3)),
    ((1, 7), (4, 1)),
    ((1, 8), (4, 2)),
];
const PAIRS_104_SPAN: [Pair; 8] = [
    ((2, 1), (5, 7)),
    ((2, 2), (5, 8)),
    ((2, 3), (5, 6)),
    ((2, 4), (5, 5)),
    ((2, 6), (3, 1)),
    ((2, 8), (3, 2)),
    ((3, 3), (5, 1)),
    ((3, 4), (5, 2)),
];

struct Replay {
    upper: f64,
    checks: Vec<ReplayCheck>,
}

impl Replay {
    fn check(&mut self, step: usize, label: &str, expected: String, computed: String, passed: bool) -> bool {
        self.checks.push(ReplayCheck { step, label: label.into(), expected, computed, passed, informational: false });
        passed
    }

    fn note(&mut self, step: usize, label: &str, expected: String, computed: String, passed: bool) {
        self.checks.push(ReplayCheck { step, label: label.into(), expected, computed, passed, informational: true });
    }

    /// `mu_min` at `diameter_sq` must exceed the printed decimal, which must
    /// exceed the printed fraction.
    fn mu_floor(&mut self, step: usize, diameter_sq: &Rational, printed: (u64, u64), fraction: (u64, u64)) -> (f64, bool) {
        let value = mu_min(3, diameter_sq, self.upper);
        let printed_r = ratio(printed.0, printed.1);
        let fraction_r = ratio(fraction.0, fraction.1);
        let a = self.check(
            step,
            "mu_min above printed decimal",
            format!("> {}", printed.0 as f64 / printed.1 as f64),
            format!("{value:.9}"),
            rational_from_f64(value) > printed_r,
        );
        let b = self.check(
            step,
            "printed decimal above cap fraction",
            format!("> {}", fraction_r),
            format!("{}", printed.0 as f64 / printed.1 as f64),
            printed_r > fraction_r,
        );
        (value, a && b)
    }

    /// Printed witness pairs: each should sit exactly at the threshold and
    /// the list should be a matching.
    fn printed_pairs(&mut self, step: usize, pairs: &[Pair], numerator: u64) {
        let mut used = BTreeSet::new();
        let mut exact = 0;
        let mut repulsive = 0;
        let mut bad = Vec::new();
        for &((a, b), (c, d)) in pairs {
            let u = SymbolString::new(3, vec![a, b]).expect("address");
            let v = SymbolString::new(3, vec![c, d]).expect("address");
            let dist = crate::lattice::pair_distance_sq(&u, &v).expect("same shape").numerator;
            if dist == numerator {
                exact += 1;
            } else {
                bad.push(format!("{u}-{v}: {dist}/81"));
            }
            if dist >= numerator {
                repulsive += 1;
            }
            used.insert((a, b));
            used.insert((c, d));
        }
        self.note(
            step,
            "printed pairs at threshold",
            format!("{} pairs at {numerator}/81", pairs.len()),
            if bad.is_empty() { format!("{exact} at {numerator}/81") } else { format!("{exact} exact; off: {}", bad.join(", ")) },
            bad.is_empty(),
        );
        self.note(
            step,
            "printed pairs form a matching",
            format!("{} distinct cubes", 2 * pairs.len()),
            format!("{} distinct cubes, {repulsive} repulsive", used.len()),
            used.len() == 2 * pairs.len() && repulsive == pairs.len(),
        );
    }

    /// Recomputes the maximum matching and cap for `quadrants` at `numerator / 81`.
    fn cap_step(
        &mut self,
        step: usize,
        quadrants: &[u32],
        numerator: u64,
        min_matching: usize,
        printed_cap: (u64, u64),
        mu: f64,
    ) -> Result<(Rational, usize, bool)> {
        let threshold = ratio(numerator, 81);
        let cert = measure_cap_certificate(3, 2, quadrants, &threshold, DEFAULT_VERTEX_BUDGET)?;
        let m = cert.matching.size();
        let realized = cert.matching.pairs.iter().any(|(u, v)| crate::lattice::pair_distance_sq(u, v).map(|d| d.numerator == numerator).unwrap_or(false));
        let label = format!("Q={quadrants:?} at {numerator}/81");
        let a = self.check(step, &format!("{label}: threshold realized"), format!("{numerator}/81"), format!("{realized}"), realized);
        let b = self.check(step, &format!("{label}: maximum matching"), format!(">= {min_matching}"), format!("{m}"), m >= min_matching);
        let printed = ratio(printed_cap.0, printed_cap.1);
        let c = self.check(step, &format!("{label}: measure cap"), format!("<= {printed}"), format!("{}", cert.cap), cert.cap <= printed);
        let d = self.check(
            step,
            &format!("{label}: cap below mu_min"),
            format!("< {mu:.9}"),
            format!("{}", cert.cap),
            cert.cap < rational_from_f64(mu),
        );
        Ok((cert.cap, m, a && b && c && d))
    }
}

/// Replays the level-2 chain for `C^3` against `upper`, recomputing every
/// distance, matching, cap and inequality.
pub fn replay_d3(upper: &BoundResult) -> Result<ReplayReport> {
    if upper.dim != 3 || upper.direction != BoundDirection::Upper {
        return Err(Error::Mismatch("replay needs an upper bound for d=3".into()));
    }
    if upper.value > D3_REFERENCE_UPPER + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "upper bound {} is weaker than {D3_REFERENCE_UPPER}",
            upper.value
        )));
    }
    let mut r = Replay { upper: upper.value, checks: Vec::new() };
    let mut steps: Vec<RefinementStep> = Vec::new();
    let mut failure: Option<ReplayFailure> = None;
    let seed = ratio(25, 81);
    let mut current = seed.clone();

    let record = |failure: &mut Option<ReplayFailure>, checks: &[ReplayCheck], step: usize, ok: bool| {
        if !ok && failure.is_none() {
            let first = checks.iter().find(|c| c.step == step && !c.passed && !c.informational);
            *failure = Some(ReplayFailure {
                step,
                label: first.map_or_else(String::new, |c| c.label.clone()),
                reason: first.map_or_else(String::new, |c| format!("expected {}, computed {}", c.expected, c.computed)),
            });
        }
    };

    // step 1: seed 5/9
    let (mu1, ok1) = r.mu_floor(1, &seed, (139_716, 1_000_000), (1, 8));
    record(&mut failure, &r.checks, 1, ok1);

    // step 2: eight pairs at 2 sqrt(11) / 9
    r.printed_pairs(2, &PAIRS_44, 44);
    let (cap2, m2, ok2) = r.cap_step(2, &[1, 2], 44, 8, (1, 8), mu1)?;
    let ok2 = ok2 && ok1;
    record(&mut failure, &r.checks, 2, ok2);
    if failure.is_none() {
        steps.push(step_record(&current, vec![vec![1, 2]], 44, vec![m2], cap2, mu1));
        current = ratio(44, 81);
    }

    // step 3: four pairs at 2 sqrt(2) / 3
    let (mu3, ok3a) = r.mu_floor(3, &ratio(44, 81), (238_561, 1_000_000), (3, 16));
    r.printed_pairs(3, &PAIRS_72, 72);
    let (cap3, m3, ok3b) = r.cap_step(3, &[1, 2], 72, 4, (3, 16), mu3)?;
    record(&mut failure, &r.checks, 3, ok3a && ok3b);
    if failure.is_none() {
        steps.push(step_record(&current, vec![vec![1, 2]], 72, vec![m3], cap3, mu3));
        current = ratio(72, 81);
    }

    // step 4: at least four level-1 sets, then both four-set cases at 2 sqrt(26) / 9
    let (mu4, ok4a) = r.mu_floor(4, &ratio(72, 81), (380_202, 1_000_000), (3, 8));
    r.printed_pairs(4, &PAIRS_104_FACE, 104);
    let (cap4a, m4a, ok4b) = r.cap_step(4, &[1, 2, 3, 4], 104, 8, (3, 8), mu4)?;
    r.printed_pairs(4, &PAIRS_104_SPAN, 104);
    let (cap4b, m4b, ok4c) = r.cap_step(4, &[1, 2, 3, 5], 104, 8, (3, 8), mu4)?;
    record(&mut failure, &r.checks, 4, ok4a && ok4b && ok4c);
    if failure.is_none() {
        let worst = if cap4a > cap4b { cap4a } else { cap4b };
        steps.push(step_record(&current, vec![vec![1, 2, 3, 4], vec![1, 2, 3, 5]], 104, vec![m4a, m4b], worst, mu4));
        current = ratio(104, 81);
    }

    // step 5: at least five level-1 sets
    let (_, ok5) = r.mu_floor(5, &ratio(104, 81), (538_462, 1_000_000), (1, 2));
    record(&mut failure, &r.checks, 5, ok5);

    let full_chain_value = diameter_bound(3, &ratio(104, 81));
    let mismatch = pow_directed(&ratio(104, 81), Exponent::Log2Of3 { num: 3, den: 2 }, Rounding::Down);
    r.note(
        6,
        "printed final value",
        format!("{PRINTED_D3_FINAL}"),
        format!("(104/81)^(s_3/2) = {full_chain_value:.9}; exponent 3 log_2 3 gives {mismatch:.6}"),
        (full_chain_value - PRINTED_D3_FINAL).abs() < 1e-6,
    );

    let final_value = diameter_bound(3, &current);
    let chain = LowerBoundChain {
        dim: 3,
        depth: 2,
        seed_sq: seed.into(),
        steps,
        upper_used: upper.clone(),
        final_sq: current.into(),
        final_value,
        notes: vec![format!(
            "printed final {PRINTED_D3_FINAL} matches exponent 3 log_2 3, not s_3 = 3 log_3 2"
        )],
    };
    Ok(ReplayReport {
        checks: r.checks,
        chain,
        failure,
        full_chain_value,
        printed_final: PRINTED_D3_FINAL,
        printed_final_exponent_match: mismatch,
    })
}

fn step_record(previous: &Rational, classes: Vec<Vec<u32>>, numerator: u64, sizes: Vec<usize>, cap: Rational, mu: f64) -> RefinementStep {
    let threshold: ExactRational = ratio(numerator, 81).into();
    RefinementStep {
        previous_sq: previous.clone().into(),
        assumed_classes: classes,
        threshold_sq: threshold.clone(),
        matching_sizes: sizes,
        measure_cap: cap.into(),
        mu_min: mu,
        conclusion_sq: threshold,
    }
}

/// [`replay_d3`], failing with the first step whose recomputation disagrees.
pub fn replay_d3_strict(upper: &BoundResult) -> Result<LowerBoundChain> {
    let report = replay_d3(upper)?;
    match report.failure {
        Some(f) => Err(Error::ReplayFailed { step: f.step, label: f.label, reason: f.reason }),
        None => Ok(report.chain),
    }
}

/// Upper bound usable for `dimension`'s chains when only the value is known.
pub fn upper_from_value(dim: u32, depth: u32, value: f64) -> BoundResult {
    BoundResult {
        direction: BoundDirection::Upper,
        value,
        dim,
        depth,
        witness: Witness::Diameter { diameter_sq: ExactRational::new(0, 1), steps: 0 },
        certified: false,
        rounding_budget: 0.0,
    }
}

/// `s_d`, re-exported for chain consumers.
pub fn chain_exponent(dim: u32) -> f64 {
    dimension(dim)
}

/// `gcd`-reduced `numerator / 3^{2k}`.
pub fn lattice_ratio(numerator: u64, depth: u32) -> Rational {
    let den = pow3(2 * depth);
    let g = numerator.gcd(&den).max(1);
    ratio(numerator / g, den / g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> Rational {
        ratio(n, d)
    }

    fn graph(q: &[u32], n: u64) -> RepulsiveGraph {
        build_repulsive_graph(3, 2, q, &r(n, 81), EdgeRule::AtLeast, DEFAULT_VERTEX_BUDGET).unwrap()
    }

    fn has_edge(g: &RepulsiveGraph, a: &[u32], b: &[u32]) -> bool {
        let u = g.vertices.iter().position(|v| v.symbols() == a).unwrap();
        let v = g.vertices.iter().position(|v| v.symbols() == b).unwrap();
        g.graph.has_edge(u, v)
    }

    #[test]
    fn graph_examples() {
        let g = graph(&[1, 2], 44);
        assert_eq!(g.vertices.len(), 16);
        assert!(has_edge(&g, &[1, 1], &[2, 7]));
        let g = graph(&[1, 2], 72);
        assert!(has_edge(&g, &[1, 1], &[2, 8]));
        assert!(!has_edge(&g, &[1, 1], &[2, 7]));
        let g = graph(&[1, 2], 1000);
        assert_eq!(g.graph.edge_count(), 0);
    }

    #[test]
    fn edges_cross_quadrants_only() {
        let g = build_repulsive_graph(3, 2, &[1, 8], &r(0, 1), EdgeRule::AtLeast, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(g.graph.edge_count(), 64);
    }

    #[test]
    fn matching_examples() {
        assert_eq!(max_repulsive_matching(&graph(&[1, 2], 44)).size(), 8);
        assert_eq!(max_repulsive_matching(&graph(&[1, 2], 72)).size(), 4);
        assert_eq!(max_repulsive_matching(&graph(&[1, 2], 1000)).size(), 0);
    }

    #[test]
    fn cap_examples() {
        assert_eq!(measure_cap(3, 2, &[1, 2], &r(44, 81)).unwrap(), r(1, 8));
        assert_eq!(measure_cap(3, 2, &[1, 2], &r(8, 9)).unwrap(), r(3, 16));
        assert_eq!(measure_cap(3, 2, &[1, 2, 3, 4], &r(104, 81)).unwrap(), r(3, 8));
    }

    #[test]
    fn quadrant_validation() {
        assert!(build_repulsive_graph(3, 2, &[1], &r(1, 9), EdgeRule::AtLeast, 1 << 12).is_err());
        assert!(build_repulsive_graph(3, 2, &[1, 1], &r(1, 9), EdgeRule::AtLeast, 1 << 12).is_err());
        assert!(build_repulsive_graph(3, 2, &[1, 9], &r(1, 9), EdgeRule::AtLeast, 1 << 12).is_err());
        assert!(matches!(
            build_repulsive_graph(3, 4, &[1, 2], &r(1, 9), EdgeRule::AtLeast, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn w_examples() {
        let h = D3_REFERENCE_UPPER;
        let free = w_from_matching(3, 2, 0, h, Rounding::Down);
        assert!((free - h.powf(1.0 / dimension(3))).abs() < 1e-12);
        let half = w_from_matching(3, 2, 8, h, Rounding::Down);
        assert!((half - (h * 0.5).powf(1.0 / dimension(3))).abs() < 1e-12);
        assert!((half - 1.0896).abs() < 1e-4, "{half}");
        assert_eq!(w_from_matching(3, 1, 8, h, Rounding::Down), 0.0);
    }

    #[test]
    fn ladder_contains_replay_thresholds() {
        let ladder = realized_distances(3, 2).unwrap();
        for n in [44, 72, 104] {
            assert!(ladder.contains(&n));
        }
        assert!(ladder.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*ladder.first().unwrap(), 16);
    }

    #[test]
    fn lattice_ratio_reduces() {
        assert_eq!(lattice_ratio(72, 2), r(8, 9));
    }
}
