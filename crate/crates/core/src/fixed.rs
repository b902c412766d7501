use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{floor_rat, format_rational, pow2, rat_from_f64, round_half_away};

/// A real vector stored as integer mantissas sharing one binary exponent:
/// coordinate `i` is `mantissas[i] * 2^(-exponent)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedPointVector {
    mantissas: Vec<BigInt>,
    exponent: u32,
}

impl FixedPointVector {
    pub fn new(mantissas: Vec<BigInt>, exponent: u32) -> Self {
        Self { mantissas, exponent }
    }

    pub fn zeros(dim: usize, exponent: u32) -> Self {
        Self::new(vec![BigInt::zero(); dim], exponent)
    }

    /// Nearest fixed-point vector (ties away from zero).
    pub fn from_rationals(values: &[BigRational], exponent: u32) -> Self {
        let scale = BigRational::from_integer(pow2(exponent));
        let mantissas = values.iter().map(|v| round_half_away(&(v * &scale))).collect();
        Self::new(mantissas, exponent)
    }

    pub fn from_f64(values: &[f64], exponent: u32) -> Self {
        let rats: Vec<BigRational> = values.iter().map(|&v| rat_from_f64(v, exponent)).collect();
        Self::from_rationals(&rats, exponent)
    }

    pub fn dim(&self) -> usize {
        self.mantissas.len()
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn mantissas(&self) -> &[BigInt] {
        &self.mantissas
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        let den = pow2(self.exponent);
        self.mantissas
            .iter()
            .map(|m| BigRational::new(m.clone(), den.clone()))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.to_rationals().iter().map(crate::linalg::rat_to_f64).collect()
    }

    /// `floor(self * 2^q)` as integers, the scaled rounding used when
    /// embedding approximate generators. Fails when `q` exceeds the stored
    /// precision.
    pub fn scaled_floor(&self, q: u32) -> Result<Vec<BigInt>> {
        if q > self.exponent {
            return Err(Error::Precision { required: q, available: self.exponent });
        }
        Ok(self.truncated_floor(q))
    }

    /// [`scaled_floor`](Self::scaled_floor) without the precision check.
    /// Used to emulate under-precision inputs.
    pub fn truncated_floor(&self, q: u32) -> Vec<BigInt> {
        if q >= self.exponent {
            let shift = (q - self.exponent) as usize;
            return self.mantissas.iter().map(|m| m << shift).collect();
        }
        let den = BigRational::from_integer(pow2(self.exponent - q));
        self.mantissas
            .iter()
            .map(|m| floor_rat(&(BigRational::from_integer(m.clone()) / &den)))
            .collect()
    }

    /// Re-round to a different exponent.
    pub fn with_exponent(&self, exponent: u32) -> Self {
        Self::from_rationals(&self.to_rationals(), exponent)
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.to_f64().iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// JSON form: `{"exponent": q, "mantissas": ["..", ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FixedPointJson {
    pub exponent: u32,
    pub mantissas: Vec<String>,
}

impl From<&FixedPointVector> for FixedPointJson {
    fn from(v: &FixedPointVector) -> Self {
        Self {
            exponent: v.exponent,
            mantissas: v.mantissas.iter().map(|m| m.to_string()).collect(),
        }
    }
}

impl TryFrom<FixedPointJson> for FixedPointVector {
    type Error = Error;

    fn try_from(j: FixedPointJson) -> Result<Self> {
        let mantissas = j
            .mantissas
            .iter()
            .map(|s| s.trim().parse::<BigInt>().map_err(|_| Error::Format(format!("bad mantissa {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(mantissas, j.exponent))
    }
}

impl Serialize for FixedPointVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FixedPointJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FixedPointVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FixedPointJson::deserialize(d)?;
        FixedPointVector::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for FixedPointVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .to_rationals()
            .iter()
            .map(|r| match r.to_f64() {
                Some(v) if v.is_finite() => format!("{v}"),
                _ => format_rational(r),
            })
            .collect();
        write!(f, "[{}]@2^-{}", parts.join(", "), self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    #[test]
    fn rational_conversion_is_exact() {
        let v = FixedPointVector::new(vec![BigInt::from(3), BigInt::from(-5)], 2);
        assert_eq!(v.to_rationals(), vec![ratio(3, 4), ratio(-5, 4)]);
        assert_eq!(FixedPointVector::from_rationals(&v.to_rationals(), 2), v);
    }

    #[test]
    fn scaled_floor_respects_precision() {
        let v = FixedPointVector::new(vec![BigInt::from(7), BigInt::from(-7)], 3);
        assert_eq!(v.scaled_floor(1).unwrap(), vec![BigInt::from(1), BigInt::from(-2)]);
        assert_eq!(v.scaled_floor(3).unwrap(), vec![BigInt::from(7), BigInt::from(-7)]);
        assert!(matches!(v.scaled_floor(4), Err(Error::Precision { required: 4, available: 3 })));
    }

    #[test]
    fn json_round_trip() {
        let v = FixedPointVector::from_f64(&[0.4, -0.3, 12.5], 40);
        let s = serde_json::to_string(&v).unwrap();
        let back: FixedPointVector = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
    }
}
