//! Dimension formula, the naive cover bound and the bound carrier shared by
//! both engines.

use serde::{Deserialize, Serialize};

use crate::exact::ExactRational;
use crate::lattice::check_dim;
use crate::numeric::{pow_directed, DoubleDouble, Exponent, Rounding, DIRECTED_REL_ERROR, LN_2, LN_3};
use crate::error::Result;
use crate::Rational;

/// `s_d = d log_3 2`, nearest double.
pub fn dimension(dim: u32) -> f64 {
    dimension_dd(dim).to_f64()
}

/// `s_d` rounded towards `dir`.
pub fn dimension_directed(dim: u32, dir: Rounding) -> f64 {
    crate::numeric::finish(dimension_dd(dim), dir)
}

fn dimension_dd(dim: u32) -> DoubleDouble {
    LN_2 * f64::from(dim) / LN_3
}

/// Cover by all level-`k` cubes: `d^{s_d / 2}`, rounded up.
pub fn naive_upper(dim: u32) -> f64 {
    pow_directed(&Rational::from_integer(dim.into()), Exponent::half_dimension(dim), Rounding::Up)
}

/// Per-dimension constants for a bound computation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundContext {
    pub dim: u32,
    /// `d log_3 2`, nearest.
    pub s: f64,
    /// Minimum gap between distinct level-1 pieces, always `1/3`.
    pub min_separation: ExactRational,
    /// `sqrt(d)`, rounded up.
    pub ambient_diameter: f64,
    pub rounding_budget: f64,
}

impl BoundContext {
    pub fn new(dim: u32) -> Result<Self> {
        check_dim(dim)?;
        let sqrt = f64::from(dim).sqrt();
        let ambient_diameter = if sqrt * sqrt >= f64::from(dim) { sqrt } else { sqrt.next_up() };
        let s = dimension(dim);
        Ok(BoundContext {
            dim,
            s,
            min_separation: ExactRational::new(1, 3),
            ambient_diameter,
            rounding_budget: s * DIRECTED_REL_ERROR,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Upper,
    Lower,
}

impl BoundDirection {
    pub fn rounding(self) -> Rounding {
        match self {
            BoundDirection::Upper => Rounding::Up,
            BoundDirection::Lower => Rounding::Down,
        }
    }
}

/// Why a value bounds `H^{s_d}(C^d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A centred ball of squared diameter `diameter_sq` containing `covered`
    /// restricted cubes, hence measure at least `mu_low`.
    Ball {
        diameter_sq: ExactRational,
        covered: u64,
        mu_low: ExactRational,
    },
    /// The optimal set has squared diameter at least `diameter_sq` and
    /// measure at most one.
    Diameter {
        diameter_sq: ExactRational,
        steps: usize,
    },
    /// The whole of `[0, 1]^d`, of diameter `sqrt(d)`.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub direction: BoundDirection,
    pub value: f64,
    pub dim: u32,
    pub depth: u32,
    pub witness: Witness,
    pub certified: bool,
    /// Upper bound on the relative distance between `value` and the exact
    /// quantity it was rounded from.
    pub rounding_budget: f64,
}

impl BoundResult {
    /// Whether this bound is compatible with `other` in the opposite direction.
    pub fn consistent_with(&self, other: &BoundResult) -> bool {
        match (self.direction, other.direction) {
            (BoundDirection::Lower, BoundDirection::Upper) => self.value <= other.value,
            (BoundDirection::Upper, BoundDirection::Lower) => other.value <= self.value,
            _ => true,
        }
    }
}
