//! Exact combinatorial geometry of the level-`k` basic cubes of the Cantor
//! product `C^d`.
//!
//! Every length in this module is an integer in a fixed unit:
//!
//! * corners are measured in units of `3^-k`, so each coordinate lies in
//!   `[0, 3^k - 1]` and has base-3 digits in `{0, 2}`;
//! * squared distances between corners are measured in units of `3^-2k`;
//! * squared distances to the centre `(1/2, ..., 1/2)` are measured in units
//!   of `(2 * 3^k)^-2`, which keeps the half-integer centre integral.
//!
//! Nothing here rounds.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

/// Largest supported ambient dimension.
pub const MAX_DIM: u32 = 20;
/// Largest supported depth; keeps every squared distance inside a `u64`.
pub const MAX_DEPTH: u32 = 18;

pub(crate) fn check_dim(dim: u32) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

pub(crate) fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidDepth(depth));
    }
    Ok(())
}

/// `3^k` for `k <= 40`.
pub const fn pow3(k: u32) -> u64 {
    let mut acc = 1u64;
    let mut i = 0;
    while i < k {
        acc *= 3;
        i += 1;
    }
    acc
}

/// A vertex of `{0,1}^d`, stored with the first digit as the most
/// significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitVector {
    dim: u32,
    bits: u32,
}

impl BitVector {
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let dim = u32::try_from(digits.len()).map_err(|_| Error::InvalidDimension(u32::MAX))?;
        check_dim(dim)?;
        let mut bits = 0u32;
        for &digit in digits {
            if digit > 1 {
                return Err(Error::InvalidArgument(format!("bit vector digit {digit} is not binary")));
            }
            bits = (bits << 1) | u32::from(digit);
        }
        Ok(BitVector { dim, bits })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Packed digits, first digit most significant.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Digit `j` counted from zero, left to right.
    pub fn digit(&self, j: u32) -> u8 {
        ((self.bits >> (self.dim - 1 - j)) & 1) as u8
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.dim).map(|j| self.digit(j)).collect()
    }

    pub fn hamming(&self, other: &BitVector) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }
}

/// Lexicographic position of a vertex of `{0,1}^d`, starting at 1.
pub fn kappa(v: &BitVector) -> u32 {
    v.bits + 1
}

pub fn kappa_inv(index: u32, dim: u32) -> Result<BitVector> {
    check_dim(dim)?;
    let max = 1u64 << dim;
    if index == 0 || u64::from(index) > max {
        return Err(Error::IndexOutOfRange { index: u64::from(index), max });
    }
    Ok(BitVector { dim, bits: index - 1 })
}

/// Address `(i_1, ..., i_k)` of the basic cube `S_{i_1} o ... o S_{i_k}([0,1]^d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolString {
    dim: u32,
    symbols: Vec<u32>,
}

impl SymbolString {
    pub fn new(dim: u32, symbols: Vec<u32>) -> Result<Self> {
        check_dim(dim)?;
        let depth = u32::try_from(symbols.len()).unwrap_or(u32::MAX);
        check_depth(depth)?;
        let max = 1u64 << dim;
        if let Some(&bad) = symbols.iter().find(|&&s| s == 0 || u64::from(s) > max) {
            return Err(Error::IndexOutOfRange { index: u64::from(bad), max });
        }
        Ok(SymbolString { dim, symbols })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.symbols.len() as u32
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn quadrant(&self) -> u32 {
        self.symbols[0]
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D_{{")?;
        for (t, s) in self.symbols.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Origin-nearest corner of a basic cube, in units of `3^-depth`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeCorner {
    dim: u32,
    depth: u32,
    coords: Vec<u64>,
}

impl LatticeCorner {
    pub fn new(depth: u32, coords: Vec<u64>) -> Result<Self> {
        let dim = u32::try_from(coords.len()).unwrap_or(u32::MAX);
        check_dim(dim)?;
        check_depth(depth)?;
        for &c in &coords {
            if !has_cantor_digits(c, depth) {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {c} is not a level-{depth} Cantor corner"
                )));
            }
        }
        Ok(LatticeCorner { dim, depth, coords })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Mirror along `axis` through the plane `x = 1/2`. The mirrored cube
    /// `[3^k - 1 - x, 3^k - x]` is again a basic cube.
    pub fn reflect(&self, axis: usize) -> LatticeCorner {
        let mut coords = self.coords.clone();
        coords[axis] = pow3(self.depth) - 1 - coords[axis];
        LatticeCorner { dim: self.dim, depth: self.depth, coords }
    }
}

/// True when `value < 3^depth` and its base-3 digits are all 0 or 2.
pub fn has_cantor_digits(mut value: u64, depth: u32) -> bool {
    if value >= pow3(depth) {
        return false;
    }
    while value > 0 {
        if value % 3 == 1 {
            return false;
        }
        value /= 3;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "unit", rename_all = "snake_case")]
pub enum DistanceUnit {
    /// `3^-2k`: corner-to-corner distances.
    Lattice { depth: u32 },
    /// `(2 * 3^k)^-2`: distances measured from the centre of `[0,1]^d`.
    Centered { depth: u32 },
}

impl DistanceUnit {
    pub fn denominator(&self) -> u64 {
        match *self {
            DistanceUnit::Lattice { depth } => pow3(2 * depth),
            DistanceUnit::Centered { depth } => 4 * pow3(2 * depth),
        }
    }
}

/// An exact squared Euclidean distance `numerator / unit.denominator()`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SquaredDistance {
    pub numerator: u64,
    #[serde(flatten)]
    pub unit: DistanceUnit,
}

impl SquaredDistance {
    pub fn lattice(numerator: u64, depth: u32) -> Self {
        SquaredDistance { numerator, unit: DistanceUnit::Lattice { depth } }
    }

    pub fn centered(numerator: u64, depth: u32) -> Self {
        SquaredDistance { numerator, unit: DistanceUnit::Centered { depth } }
    }

    pub fn denominator(&self) -> u64 {
        self.unit.denominator()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.numerator), BigInt::from(self.denominator()))
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }
}

impl PartialEq for SquaredDistance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SquaredDistance {}

impl PartialOrd for SquaredDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SquaredDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.numerator) * u128::from(other.denominator());
        let rhs = u128::from(other.numerator) * u128::from(self.denominator());
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for SquaredDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

pub fn corner_of(address: &SymbolString) -> LatticeCorner {
    let dim = address.dim;
    let depth = address.depth();
    let mut coords = vec![0u64; dim as usize];
    for (t, &symbol) in address.symbols.iter().enumerate() {
        let weight = 2 * pow3(depth - 1 - t as u32);
        let bits = symbol - 1;
        for (j, c) in coords.iter_mut().enumerate() {
            if (bits >> (dim - 1 - j as u32)) & 1 == 1 {
                *c += weight;
            }
        }
    }
    LatticeCorner { dim, depth, coords }
}

fn corner_gap_sq(a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.abs_diff(y);
            d * d
        })
        .sum()
}

/// `|S_I(0) - S_J(0)|^2`, in units of `3^-2k`.
pub fn pair_distance_sq(a: &SymbolString, b: &SymbolString) -> Result<SquaredDistance> {
    if a.dim != b.dim || a.depth() != b.depth() {
        return Err(Error::Mismatch(format!(
            "{a} has dim {} depth {}, {b} has dim {} depth {}",
            a.dim,
            a.depth(),
            b.dim,
            b.depth()
        )));
    }
    let (ca, cb) = (corner_of(a), corner_of(b));
    Ok(SquaredDistance::lattice(corner_gap_sq(&ca.coords, &cb.coords), a.depth()))
}

/// Squared distance from the corner to `(1/2, ..., 1/2)`, in units of
/// `(2 * 3^k)^-2`. For corners inside `[0, 1/2]^d` this is also the distance
/// to the farthest point of the cube.
pub fn center_distance_sq(corner: &LatticeCorner) -> SquaredDistance {
    let scale = pow3(corner.depth);
    let numerator = corner
        .coords
        .iter()
        .map(|&c| {
            let d = scale.abs_diff(2 * c);
            d * d
        })
        .sum();
    SquaredDistance::centered(numerator, corner.depth)
}

/// Squared distance from the centre to the farthest point of the cube
/// `[c, c + 1]^d / 3^k`, valid for every corner of the lattice.
pub fn farthest_point_distance_sq(corner: &LatticeCorner) -> SquaredDistance {
    let scale = pow3(corner.depth);
    let numerator = corner
        .coords
        .iter()
        .map(|&c| {
            let near = scale.abs_diff(2 * c);
            let far = scale.abs_diff(2 * c + 2);
            let d = near.max(far);
            d * d
        })
        .sum();
    SquaredDistance::centered(numerator, corner.depth)
}

/// Squared gap between level-1 basic sets `D_i` and `D_j`: Hamming distance
/// of their bit vectors over 9.
pub fn min_quadrant_distance(dim: u32, i: u32, j: u32) -> Result<SquaredDistance> {
    let a = kappa_inv(i, dim)?;
    let b = kappa_inv(j, dim)?;
    Ok(SquaredDistance::lattice(u64::from(a.hamming(&b)), 1))
}

/// Default cap on exponential enumerations: `2^26` lattice points.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 26;

/// The `2^{(k-1)d}` corners of level-`k` cubes inside `[0, 1/3]^d`.
///
/// Corner `index` packs `k - 1` bits per axis, axis 0 most significant; bit
/// `1` stands for base-3 digit `2`. Iteration is in increasing index order
/// and any index range can be consumed independently.
#[derive(Clone, Debug)]
pub struct CornerStream {
    dim: u32,
    depth: u32,
    axis_coords: Vec<u64>,
    axis_keys: Vec<u64>,
    len: u64,
}

pub fn restricted_corner_stream(dim: u32, depth: u32, budget: u64) -> Result<CornerStream> {
    check_dim(dim)?;
    check_depth(depth)?;
    let total_bits = u64::from(depth - 1) * u64::from(dim);
    let required = 1u128 << total_bits.min(127);
    if total_bits >= 64 || required > u128::from(budget) {
        return Err(Error::BudgetExceeded { required, budget: u128::from(budget) });
    }
    let axis_coords = restricted_axis_coords(depth);
    let scale = pow3(depth);
    let axis_keys = axis_coords
        .iter()
        .map(|&c| {
            let d = scale - 2 * c;
            d * d
        })
        .collect();
    Ok(CornerStream { dim, depth, axis_coords, axis_keys, len: 1u64 << total_bits })
}

/// Coordinates in `[0, 3^{k-1})` with base-3 digits in `{0,2}`, ordered by
/// their packed bit pattern.
pub(crate) fn restricted_axis_coords(depth: u32) -> Vec<u64> {
    let bits = depth - 1;
    (0..1u64 << bits)
        .map(|pattern| {
            (0..bits)
                .filter(|b| (pattern >> b) & 1 == 1)
                .map(|b| 2 * pow3(b))
                .sum()
        })
        .collect()
}

impl CornerStream {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bits_per_axis(&self) -> u32 {
        self.depth - 1
    }

    fn axis_pattern(&self, index: u64, axis: u32) -> usize {
        let bpa = self.bits_per_axis();
        if bpa == 0 {
            return 0;
        }
        let shift = (self.dim - 1 - axis) * bpa;
        ((index >> shift) & ((1u64 << bpa) - 1)) as usize
    }

    pub fn corner(&self, index: u64) -> LatticeCorner {
        debug_assert!(index < self.len);
        let coords = (0..self.dim).map(|axis| self.axis_coords[self.axis_pattern(index, axis)]).collect();
        LatticeCorner { dim: self.dim, depth: self.depth, coords }
    }

    /// Centre distance numerator of corner `index`, without materialising it.
    #[inline]
    pub fn center_key(&self, index: u64) -> u64 {
        (0..self.dim).map(|axis| self.axis_keys[self.axis_pattern(index, axis)]).sum()
    }

    /// Per-axis centre distance numerators `(3^k - 2c)^2`.
    pub fn axis_keys(&self) -> &[u64] {
        &self.axis_keys
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticeCorner> + '_ {
        self.range(0..self.len)
    }

    pub fn range(&self, range: Range<u64>) -> impl Iterator<Item = LatticeCorner> + '_ {
        let end = range.end.min(self.len);
        (range.start..end).map(move |i| self.corner(i))
    }

    /// Splits `0..len` into at most `parts` contiguous ranges of near-equal size.
    pub fn partitions(&self, parts: u64) -> Vec<Range<u64>> {
        let parts = parts.clamp(1, self.len.max(1));
        let chunk = self.len.div_ceil(parts);
        (0..parts)
            .map(|p| (p * chunk).min(self.len)..((p + 1) * chunk).min(self.len))
            .filter(|r| !r.is_empty())
            .collect()
    }
}

/// Symmetries of `{0,1}^d`: a coordinate permutation followed by bit flips.
fn hyperoctahedral_vertex_maps(dim: u32) -> Vec<Vec<u32>> {
    let n = 1u32 << dim;
    let mut perms = Vec::new();
    let mut current: Vec<u32> = (0..dim).collect();
    permutations(&mut current, 0, &mut perms);
    let mut maps = Vec::with_capacity(perms.len() << dim);
    for perm in &perms {
        for flip in 0..n {
            let map = (0..n)
                .map(|v| {
                    let mut image = 0u32;
                    for (src, &dst) in perm.iter().enumerate() {
                        let bit = (v >> src) & 1;
                        image |= bit << dst;
                    }
                    image ^ flip
                })
                .collect();
            maps.push(map);
        }
    }
    maps
}

fn permutations(items: &mut Vec<u32>, start: usize, out: &mut Vec<Vec<u32>>) {
    if start == items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, out);
        items.swap(start, i);
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// One representative per orbit of `q`-subsets of `{1..2^d}` under the
/// hyperoctahedral group. The representative is the subset with the
/// smallest bitmask (bit `i - 1` for quadrant `i`), so `{1, ..., q}` always
/// appears first.
pub fn canonical_quadrant_classes(dim: u32, q: u32, budget: u64) -> Result<Vec<Vec<u32>>> {
    check_dim(dim)?;
    if dim > 6 {
        return Err(Error::BudgetExceeded { required: 1u128 << 64, budget: u128::from(budget) });
    }
    let n = 1u32 << dim;
    if q < 2 || q > n {
        return Err(Error::InvalidQuadrants(format!("class size {q} outside 2..={n}")));
    }
    let subsets = binomial(u64::from(n), u64::from(q));
    let group = (1u128..=u128::from(dim)).product::<u128>() << dim;
    let required = subsets.max(group * u128::from(n));
    if required > u128::from(budget) {
        return Err(Error::BudgetExceeded { required, budget: u128::from(budget) });
    }
    let maps = hyperoctahedral_vertex_maps(dim);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut reps = Vec::new();
    let limit: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut mask: u64 = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
    loop {
        if seen.insert(mask) {
            reps.push((0..n).filter(|b| (mask >> b) & 1 == 1).map(|b| b + 1).collect());
            for map in &maps {
                let mut image = 0u64;
                let mut rest = mask;
                while rest != 0 {
                    let v = rest.trailing_zeros();
                    image |= 1u64 << map[v as usize];
                    rest &= rest - 1;
                }
                seen.insert(image);
            }
        }
        // next subset with the same popcount (Gosper)
        let low = mask & mask.wrapping_neg();
        let ripple = match mask.checked_add(low) {
            Some(r) => r,
            None => break,
        };
        if ripple == 0 {
            break;
        }
        let next = (((ripple ^ mask) >> 2) / low) | ripple;
        if next > limit || next < mask {
            break;
        }
        mask = next;
    }
    Ok(reps)
}

/// Every class representative for sizes `2..=2^d`, smallest sizes first.
pub fn all_quadrant_classes(dim: u32, budget: u64) -> Result<Vec<Vec<u32>>> {
    check_dim(dim)?;
    let n = 1u32 << dim.min(6);
    let mut out = Vec::new();
    for q in 2..=n {
        out.extend(canonical_quadrant_classes(dim, q, budget)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(dim: u32, s: &[u32]) -> SymbolString {
        SymbolString::new(dim, s.to_vec()).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let zeros = BitVector::from_digits(&[0, 0, 0, 0]).unwrap();
        assert_eq!(kappa(&zeros), 1);
        let one_zero = BitVector::from_digits(&[0, 0, 1, 0]).unwrap();
        assert_eq!(kappa(&one_zero), 3);
        let ones = BitVector::from_digits(&[1, 1, 1, 1]).unwrap();
        assert_eq!(kappa(&ones), 16);
    }

    #[test]
    fn kappa_inv_examples() {
        assert_eq!(kappa_inv(1, 3).unwrap().digits(), vec![0, 0, 0]);
        assert_eq!(kappa_inv(2, 3).unwrap().digits(), vec![0, 0, 1]);
        assert_eq!(kappa_inv(8, 3).unwrap().digits(), vec![1, 1, 1]);
        assert!(matches!(kappa_inv(9, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(kappa_inv(0, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn kappa_bijective_up_to_dim_10() {
        for dim in 1..=10 {
            for i in 1..=(1u32 << dim) {
                assert_eq!(kappa(&kappa_inv(i, dim).unwrap()), i);
            }
        }
    }

    #[test]
    fn symbol_validation() {
        assert!(SymbolString::new(3, vec![]).is_err());
        assert!(SymbolString::new(3, vec![1, 9]).is_err());
        assert!(SymbolString::new(0, vec![1]).is_err());
    }

    #[test]
    fn corners() {
        assert_eq!(corner_of(&sym(3, &[1, 1])).coords(), &[0, 0, 0]);
        assert_eq!(corner_of(&sym(3, &[2, 7])).coords(), &[2, 2, 6]);
        assert_eq!(corner_of(&sym(3, &[2, 8])).coords(), &[2, 2, 8]);
    }

    #[test]
    fn pair_distances() {
        let d = pair_distance_sq(&sym(3, &[1, 1]), &sym(3, &[2, 7])).unwrap();
        assert_eq!(d.to_rational(), Rational::new(44.into(), 81.into()));
        let d = pair_distance_sq(&sym(3, &[1, 1]), &sym(3, &[2, 8])).unwrap();
        assert_eq!(d.to_rational(), Rational::new(8.into(), 9.into()));
        let d = pair_distance_sq(&sym(3, &[4, 5]), &sym(3, &[4, 5])).unwrap();
        assert_eq!(d.numerator, 0);
        assert!(pair_distance_sq(&sym(3, &[1, 1]), &sym(3, &[1])).is_err());
        assert!(pair_distance_sq(&sym(3, &[1]), &sym(2, &[1])).is_err());
    }

    #[test]
    fn center_distances() {
        let c = LatticeCorner::new(1, vec![0, 0]).unwrap();
        assert_eq!(center_distance_sq(&c).to_rational(), Rational::new(1.into(), 2.into()));
        let c = LatticeCorner::new(2, vec![0, 0, 0]).unwrap();
        assert_eq!(center_distance_sq(&c).to_rational(), Rational::new(3.into(), 4.into()));
        let c = LatticeCorner::new(2, vec![2]).unwrap();
        let d = center_distance_sq(&c);
        assert_eq!(d.numerator, 25);
        assert_eq!(d.denominator(), 324);
    }

    #[test]
    fn corner_rejects_middle_third_digits() {
        assert!(LatticeCorner::new(2, vec![1]).is_err());
        assert!(LatticeCorner::new(2, vec![9]).is_err());
        assert!(LatticeCorner::new(2, vec![8]).is_ok());
    }

    #[test]
    fn restricted_stream_examples() {
        let s = restricted_corner_stream(1, 2, DEFAULT_ENUM_BUDGET).unwrap();
        let got: Vec<_> = s.iter().map(|c| c.coords()[0]).collect();
        assert_eq!(got, vec![0, 2]);
        let s = restricted_corner_stream(2, 1, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(s.iter().map(|c| c.coords().to_vec()).collect::<Vec<_>>(), vec![vec![0, 0]]);
        let s = restricted_corner_stream(3, 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(s.len(), 8);
        assert!(matches!(restricted_corner_stream(8, 5, 1 << 20), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn streamed_corners_have_cantor_digits() {
        for (dim, depth) in [(1, 12), (2, 8), (3, 6), (4, 5), (5, 4)] {
            let s = restricted_corner_stream(dim, depth, DEFAULT_ENUM_BUDGET).unwrap();
            assert_eq!(s.len(), 1u64 << ((depth - 1) * dim));
            let third = pow3(depth - 1);
            for c in s.iter() {
                for &x in c.coords() {
                    assert!(has_cantor_digits(x, depth));
                    assert!(x < third);
                }
            }
        }
    }

    #[test]
    fn stream_keys_match_corners() {
        let s = restricted_corner_stream(3, 4, DEFAULT_ENUM_BUDGET).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.center_key(i), center_distance_sq(&s.corner(i)).numerator);
        }
        let parts = s.partitions(7);
        assert_eq!(parts.first().unwrap().start, 0);
        assert_eq!(parts.last().unwrap().end, s.len());
        assert!(parts.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn reflection_preserves_farthest_distance() {
        let s = restricted_corner_stream(3, 3, DEFAULT_ENUM_BUDGET).unwrap();
        for c in s.iter() {
            let near = center_distance_sq(&c);
            assert_eq!(near, farthest_point_distance_sq(&c));
            for axis in 0..3 {
                let mirrored = c.reflect(axis);
                assert!(mirrored.coords().iter().all(|&x| has_cantor_digits(x, 3)));
                assert_eq!(farthest_point_distance_sq(&mirrored), near);
            }
        }
    }

    #[test]
    fn quadrant_gaps() {
        assert_eq!(min_quadrant_distance(3, 1, 2).unwrap().to_rational(), Rational::new(1.into(), 9.into()));
        assert_eq!(min_quadrant_distance(3, 1, 8).unwrap().to_rational(), Rational::new(3.into(), 9.into()));
        assert_eq!(min_quadrant_distance(3, 5, 5).unwrap().numerator, 0);
    }

    #[test]
    fn quadrant_classes() {
        assert_eq!(canonical_quadrant_classes(1, 2, DEFAULT_ENUM_BUDGET).unwrap(), vec![vec![1, 2]]);
        let pairs = canonical_quadrant_classes(3, 2, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(pairs.len(), 3);
        let fours = canonical_quadrant_classes(3, 4, DEFAULT_ENUM_BUDGET).unwrap();
        assert!(fours.contains(&vec![1, 2, 3, 4]));
        assert!(fours.contains(&vec![1, 2, 3, 5]));
        assert!(canonical_quadrant_classes(3, 1, DEFAULT_ENUM_BUDGET).is_err());
        assert!(canonical_quadrant_classes(3, 9, DEFAULT_ENUM_BUDGET).is_err());
    }

    #[test]
    fn class_counts_match_brute_force_orbits() {
        // Orbits counted independently: canonical form = minimum over the
        // whole group image, grouped by that form.
        for dim in 1..=3u32 {
            let n = 1u32 << dim;
            let maps = hyperoctahedral_vertex_maps(dim);
            for q in 2..=n {
                let mut forms = HashSet::new();
                for mask in 0u64..(1u64 << n) {
                    if mask.count_ones() != q {
                        continue;
                    }
                    let canon = maps
                        .iter()
                        .map(|m| (0..n).filter(|b| (mask >> b) & 1 == 1).fold(0u64, |acc, v| acc | 1 << m[v as usize]))
                        .min()
                        .unwrap();
                    forms.insert(canon);
                }
                let reps = canonical_quadrant_classes(dim, q, DEFAULT_ENUM_BUDGET).unwrap();
                assert_eq!(reps.len(), forms.len(), "dim {dim} q {q}");
            }
        }
        // 22 orbits of vertex subsets of the cube, minus the empty set and singletons
        assert_eq!(all_quadrant_classes(3, DEFAULT_ENUM_BUDGET).unwrap().len(), 20);
    }
}
