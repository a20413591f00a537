//! Serializable exact rationals.
//!
//! On the wire a rational is a two-element array of decimal integer strings
//! `["numerator", "denominator"]`, always in lowest terms with a positive
//! denominator, so arbitrarily large values survive a round trip unchanged.

use std::fmt;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(pub Rational);

impl ExactRational {
    pub fn new(num: i64, den: i64) -> Self {
        ExactRational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<Rational> for ExactRational {
    fn from(r: Rational) -> Self {
        ExactRational(r)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.0.numer().to_string(), self.0.denom().to_string()].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [num, den] = <[String; 2]>::deserialize(deserializer)?;
        let num: BigInt = num.parse().map_err(D::Error::custom)?;
        let den: BigInt = den.parse().map_err(D::Error::custom)?;
        if den == BigInt::from(0) {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(ExactRational(Rational::new(num, den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let r = ExactRational::new(88, 162);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"["44","81"]"#);
        let back: ExactRational = serde_json::from_str(r#"["44","81"]"#).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<ExactRational>(r#"["1","0"]"#).is_err());
        assert!(serde_json::from_str::<ExactRational>(r#"["1.5","2"]"#).is_err());
    }
}
