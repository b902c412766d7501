//! Buchmann-Pohst: exact basis recovery from approximate generators, by
//! LLL on the embedded matrix `[⌊g̃_j·2^q⌋ | e_j]`, over ℤ, ℤ[i] or ℤ[ζ₃].
//!
//! Over ℤ a generator is a real vector of length `m`. Over ℤ[i] and ℤ[ζ₃]
//! it has length `2m`: consecutive pairs are the coordinates of each entry
//! in the basis `(1, ω)` (real and imaginary parts for ℤ[i]).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointVector;
use crate::linalg::{self, ceil_log2, nth_root_upper, rat, ratio, rat_string, sqrt_upper};
use crate::reduction::lll::{herm, lll_reduce_field};
use crate::ring::{FieldElem, RingDescriptor, RingElem, RingKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPParams {
    /// Rank of the lattice over the ring.
    pub m: usize,
    /// Number of generators.
    pub k: usize,
    /// Lower bound on `λ₁(L)`.
    #[serde(with = "rat_string")]
    pub mu: BigRational,
    /// Upper bound on `det L`.
    #[serde(with = "rat_string")]
    pub d: BigRational,
    #[serde(with = "rat_string")]
    pub delta: BigRational,
    pub ring: RingDescriptor,
    pub derived: BPDerived,
}

/// Upper bounds derived from the inputs, all rounded outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPDerived {
    /// `1/(δ − 𝔪_K)`
    #[serde(with = "rat_string")]
    pub c_k: BigRational,
    /// `c_K^m · D^(1/m)`
    #[serde(with = "rat_string")]
    pub b: BigRational,
    /// `(B/μ)^m · γ_m^(1/2)`
    #[serde(with = "rat_string")]
    pub c: BigRational,
    /// `(k√m/2 + √k) · C`
    #[serde(with = "rat_string")]
    pub m_tilde: BigRational,
    /// `2^((k−1)/2) · M̃`, the relation threshold.
    #[serde(with = "rat_string")]
    pub threshold: BigRational,
    pub q: u32,
}

/// Upper bound on the Hermite constant: `γ_1 = 1`, `γ_m ≤ 2m/3`.
pub fn hermite_constant_bound(m: usize) -> BigRational {
    if m <= 1 {
        rat(1)
    } else {
        ratio(2 * m as i64, 3)
    }
}

/// Upper bound on `2^(e/2)`.
fn pow2_half_upper(e: usize) -> BigRational {
    let base = BigRational::from_integer(linalg::pow2((e / 2) as u32));
    if e.is_multiple_of(2) {
        base
    } else {
        base * sqrt_upper(&rat(2))
    }
}

impl BPParams {
    pub fn new(m: usize, k: usize, mu: BigRational, d: BigRational, delta: BigRational, ring: RingDescriptor) -> Result<Self> {
        if m == 0 || k < m {
            return Err(Error::Parameter(format!("need 1 <= m <= k, got m={m}, k={k}")));
        }
        if mu <= BigRational::zero() || d <= BigRational::zero() {
            return Err(Error::Parameter("mu and D must be positive".into()));
        }
        let mk = ring.euclidean_minimum();
        if delta <= mk || delta >= rat(1) {
            return Err(Error::Parameter(format!("delta must lie in ({mk}, 1)")));
        }
        let c_k = BigRational::one() / (&delta - &mk);
        let b = num_traits::pow(c_k.clone(), m) * nth_root_upper(&d, m as u32);
        let c = num_traits::pow(&b / &mu, m) * sqrt_upper(&hermite_constant_bound(m));
        let km = BigRational::from_integer(k.into());
        let m_tilde = (&km * sqrt_upper(&rat(m as i64)) / rat(2) + sqrt_upper(&km)) * &c;
        let threshold = pow2_half_upper(k - 1) * &m_tilde;
        let arg = (sqrt_upper(&rat((m * k) as i64)) + rat(2)) * &threshold / &mu;
        let q = ceil_log2(&arg).max(1) as u32;
        Ok(Self { m, k, mu, d, delta, ring, derived: BPDerived { c_k, b, c, m_tilde, threshold, q } })
    }

    pub fn q(&self) -> u32 {
        self.derived.q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPOutput {
    pub q: u32,
    pub ring: RingKind,
    /// Reduced rows of the embedded matrix; the first `k − m` are relations.
    pub rows: Vec<Vec<RingElemJson>>,
    /// Coefficient vectors (bottom block) of the last `m` rows: a basis of
    /// `L` is `X · G`.
    pub coefficients: Vec<Vec<RingElemJson>>,
    /// Approximate basis `X · G̃`, at the input precision.
    pub basis: Vec<FixedPointVector>,
    /// Squared norms of all reduced rows.
    pub row_norms_sq: Vec<String>,
    #[serde(with = "rat_string")]
    pub threshold: BigRational,
}

/// Compact `[a, b]` form of a ring element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingElemJson(pub String, pub String);

impl From<&RingElem> for RingElemJson {
    fn from(x: &RingElem) -> Self {
        Self(x.a.to_string(), x.b.to_string())
    }
}

impl RingElemJson {
    pub fn to_elem(&self) -> Result<RingElem> {
        let p = |s: &str| s.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer {s:?}")));
        Ok(RingElem::new(p(&self.0)?, p(&self.1)?))
    }
}

impl BPOutput {
    pub fn coefficient_matrix(&self) -> Vec<Vec<RingElem>> {
        self.coefficients.iter().map(|r| r.iter().map(|x| x.to_elem().expect("well-formed")).collect()).collect()
    }

    pub fn relation_matrix(&self) -> Vec<Vec<RingElem>> {
        let rel = self.rows.len() - self.coefficients.len();
        let width = self.coefficients.first().map_or(0, |r| r.len());
        self.rows[..rel]
            .iter()
            .map(|r| r[r.len() - width..].iter().map(|x| x.to_elem().expect("well-formed")).collect())
            .collect()
    }

    pub fn norms_sq(&self) -> Vec<BigInt> {
        self.row_norms_sq.iter().map(|s| s.parse().expect("well-formed")).collect()
    }
}

fn generator_entries(g: &FixedPointVector, m: usize, kind: RingKind) -> Result<usize> {
    let want = m * kind.z_rank();
    if g.dim() != want {
        return Err(Error::Dimension { expected: want, got: g.dim() });
    }
    Ok(want)
}

fn to_ring_entries(ints: &[BigInt], kind: RingKind) -> Vec<RingElem> {
    match kind {
        RingKind::Integers => ints.iter().map(|x| RingElem::from_int(x.clone())).collect(),
        _ => ints.chunks(2).map(|p| RingElem::new(p[0].clone(), p[1].clone())).collect(),
    }
}

fn to_field_entries(rats: &[BigRational], kind: RingKind) -> Vec<FieldElem> {
    match kind {
        RingKind::Integers => rats.iter().map(|x| FieldElem::from_int(x.clone())).collect(),
        _ => rats.chunks(2).map(|p| FieldElem::new(p[0].clone(), p[1].clone())).collect(),
    }
}

fn from_field_entries(v: &[FieldElem], kind: RingKind) -> Vec<BigRational> {
    match kind {
        RingKind::Integers => v.iter().map(|x| x.a.clone()).collect(),
        _ => v.iter().flat_map(|x| [x.a.clone(), x.b.clone()]).collect(),
    }
}

/// Run the reduction at the parameters' `q`. Fails when an input carries
/// fewer than `q` fractional bits.
pub fn bp_reduce(g_tilde: &[FixedPointVector], params: &BPParams) -> Result<BPOutput> {
    for g in g_tilde {
        if g.exponent() < params.q() {
            return Err(Error::Precision { required: params.q(), available: g.exponent() });
        }
    }
    bp_reduce_at(g_tilde, params, params.q())
}

/// Run the reduction at an explicit scaling `q`, truncating inputs as
/// needed. Used to study under-precision behaviour.
pub fn bp_reduce_at(g_tilde: &[FixedPointVector], params: &BPParams, q: u32) -> Result<BPOutput> {
    let (m, k) = (params.m, params.k);
    let kind = params.ring.kind;
    if g_tilde.len() != k {
        return Err(Error::Dimension { expected: k, got: g_tilde.len() });
    }
    for g in g_tilde {
        generator_entries(g, m, kind)?;
    }
    let rows: Vec<Vec<FieldElem>> = g_tilde
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let mut row: Vec<FieldElem> = to_ring_entries(&g.truncated_floor(q), kind).iter().map(RingElem::to_field).collect();
            row.extend((0..k).map(|i| if i == j { FieldElem::one() } else { FieldElem::zero() }));
            row
        })
        .collect();
    let out = lll_reduce_field(&rows, &params.delta, params.ring).map_err(|e| match e {
        Error::Rank { rank, .. } => Error::Rank { rank, expected: k },
        other => other,
    })?;
    let reduced: Vec<Vec<RingElem>> =
        out.rows.iter().map(|r| r.iter().map(|x| x.to_ring().expect("integral")).collect()).collect();
    let norms: Vec<BigInt> =
        out.rows.iter().map(|r| herm(r, r, kind).a.to_integer()).collect();
    let coeff: Vec<Vec<RingElem>> = reduced[k - m..].iter().map(|r| r[m..].to_vec()).collect();

    let exp = g_tilde.iter().map(|g| g.exponent()).max().unwrap_or(q);
    let gt: Vec<Vec<FieldElem>> = g_tilde.iter().map(|g| to_field_entries(&g.to_rationals(), kind)).collect();
    let basis = coeff
        .iter()
        .map(|x| {
            let v: Vec<FieldElem> = (0..m)
                .map(|c| {
                    x.iter().zip(&gt).fold(FieldElem::zero(), |acc, (xi, g)| acc.add(&xi.to_field().mul(&g[c], kind)))
                })
                .collect();
            FixedPointVector::from_rationals(&from_field_entries(&v, kind), exp)
        })
        .collect();
    let enc = |rows: &[Vec<RingElem>]| rows.iter().map(|r| r.iter().map(RingElemJson::from).collect()).collect();
    Ok(BPOutput {
        q,
        ring: kind,
        rows: enc(&reduced),
        coefficients: enc(&coeff),
        basis,
        row_norms_sq: norms.iter().map(|n| n.to_string()).collect(),
        threshold: params.derived.threshold.clone(),
    })
}

/// Relation rows (the first `k − m`) have norm at most the threshold and
/// every remaining row exceeds it.
pub fn relation_norm_check(out: &BPOutput, params: &BPParams) -> bool {
    let t2 = &params.derived.threshold * &params.derived.threshold;
    let rel = params.k - params.m;
    out.norms_sq().iter().enumerate().all(|(i, n)| {
        let n = BigRational::from_integer(n.clone());
        if i < rel {
            n <= t2
        } else {
            n > t2
        }
    })
}

/// Exact basis `X · G` from exact generators `G` (in the same coordinate
/// layout as the approximations).
pub fn exact_basis(out: &BPOutput, generators: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let kind = out.ring;
    let g: Vec<Vec<FieldElem>> = generators.iter().map(|r| to_field_entries(r, kind)).collect();
    let cols = g.first().map_or(0, |r| r.len());
    out.coefficient_matrix()
        .iter()
        .map(|x| {
            let v: Vec<FieldElem> = (0..cols)
                .map(|c| x.iter().zip(&g).fold(FieldElem::zero(), |acc, (xi, gi)| acc.add(&xi.to_field().mul(&gi[c], kind))))
                .collect();
            from_field_entries(&v, kind)
        })
        .collect()
}

/// The relation rows' coefficient vectors annihilate the exact generators.
pub fn relations_vanish(out: &BPOutput, generators: &[Vec<BigRational>]) -> bool {
    let kind = out.ring;
    let g: Vec<Vec<FieldElem>> = generators.iter().map(|r| to_field_entries(r, kind)).collect();
    let cols = g.first().map_or(0, |r| r.len());
    out.relation_matrix().iter().all(|x| {
        (0..cols).all(|c| x.iter().zip(&g).fold(FieldElem::zero(), |acc, (xi, gi)| acc.add(&xi.to_field().mul(&gi[c], kind))).is_zero())
    })
}

/// Underlying ℤ-generators of the ring span of `rows` (layout as above):
/// each row and, for ℤ[i]/ℤ[ζ₃], its multiple by `ω`.
pub fn forget_rows(rows: &[Vec<BigRational>], kind: RingKind) -> Vec<Vec<BigRational>> {
    if kind == RingKind::Integers {
        return rows.to_vec();
    }
    let w = FieldElem::new(rat(0), rat(1));
    rows.iter()
        .flat_map(|r| {
            let f = to_field_entries(r, kind);
            let wr: Vec<FieldElem> = f.iter().map(|x| w.mul(x, kind)).collect();
            [r.clone(), from_field_entries(&wr, kind)]
        })
        .collect()
}
