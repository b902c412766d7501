//! Exact full-rank lattices given by basis rows: duals, operator norms,
//! sublattice indices, Gram-Schmidt data and short-vector enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, det_rat, format_rational, int_to_rat, inverse_rat, is_integral, mul_rat, parse_rational, rank_rat,
    rat_pow2, transpose, RatMatrix,
};

/// Square, nonsingular matrix of exact rationals whose rows generate a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisMatrix {
    rows: RatMatrix,
    det: BigRational,
}

impl BasisMatrix {
    pub fn new(rows: RatMatrix) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Rank { rank: 0, expected: 1 });
        }
        for r in &rows {
            if r.len() != m {
                return Err(Error::Dimension { expected: m, got: r.len() });
            }
        }
        let det = det_rat(&rows);
        if det.is_zero() {
            return Err(Error::Rank { rank: rank_rat(&rows), expected: m });
        }
        Ok(Self { rows, det })
    }

    pub fn from_integers(rows: &[Vec<BigInt>]) -> Result<Self> {
        Self::new(int_to_rat(rows))
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| linalg::rat(x)).collect()).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self::new(linalg::identity_rat(m)).expect("identity is nonsingular")
    }

    pub fn diagonal(entries: &[BigRational]) -> Result<Self> {
        let m = entries.len();
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { entries[i].clone() } else { BigRational::zero() }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &RatMatrix {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.rows[i]
    }

    pub fn det(&self) -> &BigRational {
        &self.det
    }

    pub fn abs_det(&self) -> BigRational {
        self.det.abs()
    }

    pub fn inverse(&self) -> RatMatrix {
        inverse_rat(&self.rows).expect("basis is nonsingular")
    }

    pub fn transpose(&self) -> Self {
        Self { rows: transpose(&self.rows), det: self.det.clone() }
    }

    pub fn is_integral(&self) -> bool {
        is_integral(&self.rows)
    }

    /// Left-multiply by a square matrix, e.g. a change of basis.
    pub fn left_mul(&self, t: &[Vec<BigRational>]) -> Result<Self> {
        Self::new(mul_rat(t, &self.rows))
    }

    pub fn scaled(&self, c: &BigRational) -> Result<Self> {
        Self::new(self.rows.iter().map(|r| r.iter().map(|x| x * c).collect()).collect())
    }

    /// Coordinates of `v` with respect to the rows: `x` with `x * B = v`.
    pub fn coordinates(&self, v: &[BigRational]) -> Vec<BigRational> {
        let inv = self.inverse();
        linalg::vec_mul_rat(v, &inv)
    }

    pub fn point(&self, coords: &[BigInt]) -> Vec<BigRational> {
        let c: Vec<BigRational> = coords.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        linalg::vec_mul_rat(&c, &self.rows)
    }

    /// Basis of the dual lattice, the rows of `(B^t)^-1`.
    pub fn dual_basis(&self) -> Self {
        let inv = self.inverse();
        Self { rows: transpose(&inv), det: BigRational::one() / &self.det }
    }

    pub fn op_norm(&self, mode: NormMode) -> NormValue {
        op_norm(&self.rows, mode)
    }

    /// `true` iff every row of `self` lies in the lattice spanned by `other`.
    pub fn contained_in(&self, other: &BasisMatrix) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        is_integral(&mul_rat(&self.rows, &other.inverse()))
    }

    /// Same lattice, possibly with different bases.
    pub fn same_lattice(&self, other: &BasisMatrix) -> bool {
        self.abs_det() == other.abs_det() && self.contained_in(other)
    }

    pub fn gram_schmidt(&self) -> GramSchmidtData {
        gram_schmidt(&self.rows)
    }

    /// Exact squared length of a shortest nonzero vector, by enumeration.
    /// Intended for small dimensions.
    pub fn shortest_norm_sq(&self) -> Result<BigRational> {
        let bound = self.rows.iter().map(|r| linalg::norm_sq_rat(r)).min().expect("nonempty basis");
        let radius = linalg::rat_to_f64(&bound).sqrt();
        let coords = enumerate_short_vectors(self, radius, 2_000_000)?;
        let mut best = bound;
        for x in coords {
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            let big: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
            let n = linalg::norm_sq_rat(&self.point(&big));
            if n < best {
                best = n;
            }
        }
        Ok(best)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.iter().map(linalg::rat_to_f64).collect()).collect()
    }
}

/// Operator norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `max_j sum_i |B_ij|`
    InfOne,
    /// `max_i sqrt(sum_j B_ij^2)`
    TwoRowmax,
}

/// A norm value with sound rational bounds. For [`NormMode::InfOne`] the
/// bounds coincide with the exact value; for [`NormMode::TwoRowmax`] the
/// squared value is exact and the root is bracketed with relative error at
/// most 2^-64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormValue {
    pub squared: Option<BigRational>,
    pub lower: BigRational,
    pub upper: BigRational,
}

impl NormValue {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn to_f64(&self) -> f64 {
        linalg::rat_to_f64(&self.upper)
    }
}

pub fn op_norm(rows: &[Vec<BigRational>], mode: NormMode) -> NormValue {
    match mode {
        NormMode::InfOne => {
            let cols = rows.first().map_or(0, |r| r.len());
            let v = (0..cols)
                .map(|j| rows.iter().fold(BigRational::zero(), |a, r| a + r[j].abs()))
                .max()
                .unwrap_or_else(BigRational::zero);
            NormValue { squared: None, lower: v.clone(), upper: v }
        }
        NormMode::TwoRowmax => {
            let sq = rows.iter().map(|r| linalg::norm_sq_rat(r)).max().unwrap_or_else(BigRational::zero);
            NormValue { lower: linalg::sqrt_lower(&sq), upper: linalg::sqrt_upper(&sq), squared: Some(sq) }
        }
    }
}

/// Bounds `(lower, upper)` on `1/lambda_1(L*)` from a basis of `L`:
/// `2^(-3m) ||B^t|| <= 1/lambda_1* <= ||B||` in the (inf,1) norm.
pub fn lambda1_dual_bounds(b_l: &BasisMatrix) -> (BigRational, BigRational) {
    let m = b_l.dim() as i64;
    let lower = rat_pow2(-3 * m) * b_l.transpose().op_norm(NormMode::InfOne).upper;
    let upper = b_l.op_norm(NormMode::InfOne).upper;
    (lower, upper)
}

/// `[L : M]` for `M` a sublattice of `L`.
pub fn sublattice_index(b_m: &BasisMatrix, b_l: &BasisMatrix) -> Result<BigInt> {
    if b_m.dim() != b_l.dim() {
        return Err(Error::Dimension { expected: b_l.dim(), got: b_m.dim() });
    }
    if !b_m.contained_in(b_l) {
        return Err(Error::Containment("B_M * B_L^-1 is not integral".into()));
    }
    let idx = b_m.abs_det() / b_l.abs_det();
    debug_assert!(idx.is_integer());
    Ok(idx.to_integer())
}

/// Exact Gram-Schmidt orthogonalisation of the rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSchmidtData {
    /// Orthogonal vectors `b_i*`.
    pub ortho: RatMatrix,
    /// `mu[i][j] = <b_i, b_j*> / ||b_j*||^2` for `j < i`, zero elsewhere.
    pub mu: RatMatrix,
    /// `||b_i*||^2`.
    pub norms_sq: Vec<BigRational>,
}

pub fn gram_schmidt(rows: &[Vec<BigRational>]) -> GramSchmidtData {
    let n = rows.len();
    let mut ortho: RatMatrix = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut norms_sq = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            if norms_sq[j] == BigRational::zero() {
                continue;
            }
            let c = linalg::dot_rat(&rows[i], &ortho[j]) / &norms_sq[j];
            for (vk, ok) in v.iter_mut().zip(&ortho[j]) {
                *vk -= &c * ok;
            }
            mu[i][j] = c;
        }
        norms_sq.push(linalg::norm_sq_rat(&v));
        ortho.push(v);
    }
    GramSchmidtData { ortho, mu, norms_sq }
}

impl GramSchmidtData {
    /// Rebuild `b_i = b_i* + sum_{j<i} mu_ij b_j*`.
    pub fn reconstruct(&self) -> RatMatrix {
        let n = self.ortho.len();
        (0..n)
            .map(|i| {
                let mut v = self.ortho[i].clone();
                for j in 0..i {
                    for (vk, ok) in v.iter_mut().zip(&self.ortho[j]) {
                        *vk += &self.mu[i][j] * ok;
                    }
                }
                v
            })
            .collect()
    }
}

/// Integer coefficient vectors `x` with `||x B|| <= radius`, found by
/// Fincke-Pohst enumeration in floating point with a small outward margin.
/// Fails when more than `limit` points would be produced.
pub fn enumerate_short_vectors(basis: &BasisMatrix, radius: f64, limit: usize) -> Result<Vec<Vec<i64>>> {
    let b = basis.to_f64_rows();
    let n = b.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut bn = vec![0.0f64; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            let c = dot(&b[i], &bstar[j]) / bn[j];
            mu[i][j] = c;
            for (vk, sk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= c * sk;
            }
        }
        bn[i] = dot(&v, &v);
        bstar.push(v);
    }
    let r2 = radius * radius * (1.0 + 1e-9) + 1e-12;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    enumerate_level(n, n - 1, &mu, &bn, r2, 0.0, &mut x, &mut out, limit)?;
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    n: usize,
    level: usize,
    mu: &[Vec<f64>],
    bn: &[f64],
    r2: f64,
    partial: f64,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    limit: usize,
) -> Result<()> {
    let center: f64 = -(level + 1..n).map(|j| mu[j][level] * x[j] as f64).sum::<f64>();
    let rem = r2 - partial;
    if rem < 0.0 {
        return Ok(());
    }
    let half = (rem / bn[level]).sqrt();
    let lo = (center - half).ceil() as i64;
    let hi = (center + half).floor() as i64;
    for v in lo..=hi {
        let d = v as f64 - center;
        let p = partial + d * d * bn[level];
        if p > r2 {
            continue;
        }
        x[level] = v;
        if level == 0 {
            out.push(x.clone());
            if out.len() > limit {
                return Err(Error::Config(format!("enumeration exceeded {limit} points")));
            }
        } else {
            enumerate_level(n, level - 1, mu, bn, r2, p, x, out, limit)?;
        }
    }
    x[level] = 0;
    Ok(())
}

/// Interchange format: `{"m": cols, "q": optional exponent, "rows": [["p/q", ...], ...]}`.
/// When `q` is present every entry is additionally scaled by `2^-q`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    pub rows: Vec<Vec<String>>,
}

impl MatrixJson {
    pub fn from_rows(rows: &[Vec<BigRational>]) -> Self {
        let m = rows.first().map_or(0, |r| r.len());
        Self { m, q: None, rows: rows.iter().map(|r| r.iter().map(format_rational).collect()).collect() }
    }

    pub fn to_rows(&self) -> Result<RatMatrix> {
        let scale = self.q.map(|q| rat_pow2(-(q as i64)));
        self.rows
            .iter()
            .map(|r| {
                if r.len() != self.m {
                    return Err(Error::Dimension { expected: self.m, got: r.len() });
                }
                r.iter()
                    .map(|s| {
                        let x = parse_rational(s).ok_or_else(|| Error::Format(format!("bad rational {s:?}")))?;
                        Ok(match &scale {
                            Some(c) => x * c,
                            None => x,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_basis(&self) -> Result<BasisMatrix> {
        BasisMatrix::new(self.to_rows()?)
    }

    pub fn to_integer_rows(&self) -> Result<Vec<Vec<BigInt>>> {
        linalg::to_int(&self.to_rows()?).ok_or_else(|| Error::Format("matrix has non-integer entries".into()))
    }
}

impl From<&BasisMatrix> for MatrixJson {
    fn from(b: &BasisMatrix) -> Self {
        MatrixJson::from_rows(b.rows())
    }
}

impl Serialize for BasisMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?.to_basis().map_err(serde::de::Error::custom)
    }
}

/// Euclidean length of each row, as f64 (reporting only).
pub fn row_norms_f64(rows: &[Vec<BigRational>]) -> Vec<f64> {
    rows.iter()
        .map(|r| linalg::rat_to_f64(&linalg::norm_sq_rat(r)).sqrt())
        .collect()
}

pub fn rat_to_f64_checked(x: &BigRational) -> Option<f64> {
    x.to_f64().filter(|v| v.is_finite())
}
