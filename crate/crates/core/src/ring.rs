//! The coefficient rings ℤ, ℤ[i] and ℤ[ζ₃]. Elements are written `a + b·ω`
//! with `ω = i` or `ω = ζ₃`; for ℤ the `b` part is always zero.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ratio, round_half_away};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingKind {
    Integers,
    Gaussian,
    Eisenstein,
}

impl RingKind {
    pub fn name(self) -> &'static str {
        match self {
            RingKind::Integers => "integers",
            RingKind::Gaussian => "gaussian",
            RingKind::Eisenstein => "eisenstein",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "integers" | "int" => Ok(RingKind::Integers),
            "gaussian" | "z[i]" | "zi" => Ok(RingKind::Gaussian),
            "eisenstein" | "z[zeta3]" | "zeta3" => Ok(RingKind::Eisenstein),
            _ => Err(Error::Format(format!("unknown ring {s:?}"))),
        }
    }

    /// Rank of the ring as a ℤ-module.
    pub fn z_rank(self) -> usize {
        match self {
            RingKind::Integers => 1,
            _ => 2,
        }
    }
}

/// Which ring a reduction runs over, with its Euclidean minimum and the
/// complex image of the generator `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub kind: RingKind,
}

impl RingDescriptor {
    pub const INTEGERS: Self = Self { kind: RingKind::Integers };
    pub const GAUSSIAN: Self = Self { kind: RingKind::Gaussian };
    pub const EISENSTEIN: Self = Self { kind: RingKind::Eisenstein };

    pub fn new(kind: RingKind) -> Self {
        Self { kind }
    }

    /// `max_x min_y N(x - y)`: 1/4, 1/2, 1/3.
    pub fn euclidean_minimum(&self) -> BigRational {
        match self.kind {
            RingKind::Integers => ratio(1, 4),
            RingKind::Gaussian => ratio(1, 2),
            RingKind::Eisenstein => ratio(1, 3),
        }
    }

    /// `ω` as a complex number `(re, im)`.
    pub fn generator_embedding(&self) -> (f64, f64) {
        match self.kind {
            RingKind::Integers => (0.0, 0.0),
            RingKind::Gaussian => (0.0, 1.0),
            RingKind::Eisenstein => (-0.5, 3f64.sqrt() / 2.0),
        }
    }
}

impl From<RingKind> for RingDescriptor {
    fn from(kind: RingKind) -> Self {
        Self { kind }
    }
}

/// `a + b·ω` with coefficients in `T` (integers for ring elements,
/// rationals for elements of the fraction field).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Elem<T> {
    pub a: T,
    pub b: T,
}

pub type RingElem = Elem<BigInt>;
pub type FieldElem = Elem<BigRational>;

impl<T: Clone + Num + Signed> Elem<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero())
    }

    pub fn from_int(a: T) -> Self {
        Self::new(a, T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a.clone() + o.a.clone(), self.b.clone() + o.b.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a.clone() - o.a.clone(), self.b.clone() - o.b.clone())
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a.clone(), -self.b.clone())
    }

    pub fn mul(&self, o: &Self, kind: RingKind) -> Self {
        let (a1, b1, a2, b2) = (&self.a, &self.b, &o.a, &o.b);
        let aa = a1.clone() * a2.clone();
        let bb = b1.clone() * b2.clone();
        let cross = a1.clone() * b2.clone() + a2.clone() * b1.clone();
        match kind {
            RingKind::Integers => Self::new(aa, T::zero()),
            RingKind::Gaussian => Self::new(aa - bb, cross),
            // ω² = −1 − ω
            RingKind::Eisenstein => Self::new(aa - bb.clone(), cross - bb),
        }
    }

    pub fn conj(&self, kind: RingKind) -> Self {
        match kind {
            RingKind::Integers => Self::new(self.a.clone(), T::zero()),
            RingKind::Gaussian => Self::new(self.a.clone(), -self.b.clone()),
            // conj(ω) = ω² = −1 − ω
            RingKind::Eisenstein => Self::new(self.a.clone() - self.b.clone(), -self.b.clone()),
        }
    }

    /// Algebraic norm `x · conj(x)`, equal to `|x|²` under the embedding.
    pub fn norm(&self, kind: RingKind) -> T {
        let (a, b) = (&self.a, &self.b);
        match kind {
            RingKind::Integers => a.clone() * a.clone(),
            RingKind::Gaussian => a.clone() * a.clone() + b.clone() * b.clone(),
            RingKind::Eisenstein => a.clone() * a.clone() - a.clone() * b.clone() + b.clone() * b.clone(),
        }
    }
}

impl RingElem {
    pub fn to_field(&self) -> FieldElem {
        FieldElem::new(BigRational::from_integer(self.a.clone()), BigRational::from_integer(self.b.clone()))
    }

    pub fn from_i64(a: i64, b: i64) -> Self {
        Self::new(BigInt::from(a), BigInt::from(b))
    }

    /// Units of the ring: ±1; ±1, ±i; the six powers of −ζ₃.
    pub fn is_unit(&self, kind: RingKind) -> bool {
        self.norm(kind) == BigInt::from(1)
    }

    /// Complex image `(re, im)`.
    pub fn embed(&self, kind: RingKind) -> (f64, f64) {
        self.to_field().embed(kind)
    }

    /// Euclidean division `self = q·d + r` with `N(r) ≤ 𝔪_K · N(d)`.
    pub fn div_rem(&self, d: &RingElem, kind: RingKind) -> Result<(RingElem, RingElem)> {
        if d.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let q = self.to_field().div(&d.to_field(), kind).round_nearest(kind);
        let r = self.sub(&q.mul(d, kind));
        Ok((q, r))
    }
}

impl FieldElem {
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn to_ring(&self) -> Option<RingElem> {
        self.is_integral().then(|| RingElem::new(self.a.to_integer(), self.b.to_integer()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(&self.a * c, &self.b * c)
    }

    pub fn inv(&self, kind: RingKind) -> Self {
        let n = self.norm(kind);
        self.conj(kind).scale(&(BigRational::from_integer(1.into()) / n))
    }

    pub fn div(&self, o: &Self, kind: RingKind) -> Self {
        let n = o.norm(kind);
        self.mul(&o.conj(kind), kind).scale(&(BigRational::from_integer(1.into()) / n))
    }

    /// Nearest ring element. Coordinates are rounded half away from zero;
    /// for ℤ[ζ₃] the eight neighbours are also tried, since coordinate
    /// rounding alone only guarantees `N(x − y) ≤ 3/4`. Ties keep the
    /// first candidate in a fixed order, so the result is reproducible.
    pub fn round_nearest(&self, kind: RingKind) -> RingElem {
        let base = RingElem::new(round_half_away(&self.a), round_half_away(&self.b));
        match kind {
            RingKind::Integers => RingElem::new(base.a, BigInt::zero()),
            RingKind::Gaussian => base,
            RingKind::Eisenstein => {
                let mut best = base.clone();
                let mut best_n = self.sub(&base.to_field()).norm(kind);
                for da in -1i64..=1 {
                    for db in -1i64..=1 {
                        if da == 0 && db == 0 {
                            continue;
                        }
                        let cand = RingElem::new(&base.a + da, &base.b + db);
                        let n = self.sub(&cand.to_field()).norm(kind);
                        if n < best_n {
                            best_n = n;
                            best = cand;
                        }
                    }
                }
                best
            }
        }
    }

    pub fn embed(&self, kind: RingKind) -> (f64, f64) {
        let a = crate::linalg::rat_to_f64(&self.a);
        let b = crate::linalg::rat_to_f64(&self.b);
        let (wr, wi) = RingDescriptor::new(kind).generator_embedding();
        (a + b * wr, b * wi)
    }
}

impl<T: fmt::Display + Zero> fmt::Display for Elem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

/// Row-major matrix of ring elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OKMatrix {
    pub ring: RingKind,
    pub rows: Vec<Vec<RingElem>>,
}

impl OKMatrix {
    pub fn new(ring: RingKind, rows: Vec<Vec<RingElem>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, got: r.len() });
            }
            if ring == RingKind::Integers && r.iter().any(|x| !x.b.is_zero()) {
                return Err(Error::Format("integer matrix with nonzero ω-part".into()));
            }
        }
        Ok(Self { ring, rows })
    }

    pub fn from_integers(rows: &[Vec<BigInt>]) -> Self {
        Self {
            ring: RingKind::Integers,
            rows: rows.iter().map(|r| r.iter().map(|x| RingElem::from_int(x.clone())).collect()).collect(),
        }
    }

    pub fn identity(ring: RingKind, n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { RingElem::one() } else { RingElem::zero() }).collect())
            .collect();
        Self { ring, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn mul(&self, o: &OKMatrix) -> OKMatrix {
        let k = self.ring;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..o.ncols())
                    .map(|j| r.iter().zip(&o.rows).fold(RingElem::zero(), |acc, (x, orow)| acc.add(&x.mul(&orow[j], k))))
                    .collect()
            })
            .collect();
        OKMatrix { ring: k, rows }
    }

    /// Underlying ℤ-generators: each row `r` contributes `r` and `ω·r`, each
    /// entry `a + bω` expanded to the pair `(a, b)`. For ℤ this is the
    /// matrix itself.
    pub fn forget_to_z(&self) -> Vec<Vec<BigInt>> {
        let expand = |r: &[RingElem]| -> Vec<BigInt> {
            match self.ring {
                RingKind::Integers => r.iter().map(|x| x.a.clone()).collect(),
                _ => r.iter().flat_map(|x| [x.a.clone(), x.b.clone()]).collect(),
            }
        };
        let mut out = Vec::new();
        for r in &self.rows {
            out.push(expand(r));
            if self.ring != RingKind::Integers {
                let w = RingElem::from_i64(0, 1);
                let wr: Vec<RingElem> = r.iter().map(|x| w.mul(x, self.ring)).collect();
                out.push(expand(&wr));
            }
        }
        out
    }
}

/// JSON form of one entry: `{"a": "3", "b": "-1", "ring": "gaussian"}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OKEntryJson {
    pub a: String,
    pub b: String,
    pub ring: RingKind,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OKMatrixJson {
    pub rows: Vec<Vec<OKEntryJson>>,
}

impl From<&OKMatrix> for OKMatrixJson {
    fn from(m: &OKMatrix) -> Self {
        Self {
            rows: m
                .rows
                .iter()
                .map(|r| {
                    r.iter().map(|x| OKEntryJson { a: x.a.to_string(), b: x.b.to_string(), ring: m.ring }).collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<OKMatrixJson> for OKMatrix {
    type Error = Error;

    fn try_from(j: OKMatrixJson) -> Result<Self> {
        let ring = j.rows.iter().flatten().next().map_or(RingKind::Integers, |e| e.ring);
        let parse = |s: &str| s.trim().parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer {s:?}")));
        let rows = j
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| {
                        if e.ring != ring {
                            return Err(Error::Format("mixed rings in one matrix".into()));
                        }
                        Ok(RingElem::new(parse(&e.a)?, parse(&e.b)?))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        OKMatrix::new(ring, rows)
    }
}

impl Serialize for OKMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OKMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OKMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OKMatrix::try_from(OKMatrixJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
