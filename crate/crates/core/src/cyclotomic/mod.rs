//! Cyclotomic fields `Q(ζ_m)`: conductor data, the cyclotomic unit
//! generators `v_j`, and their logarithmic embeddings in interval
//! arithmetic.
//!
//! Log coordinates are indexed by the representatives `a ∈ [1, m/2)` with
//! `gcd(a, m) = 1`, one per pair of conjugate embeddings, so a unit's Log
//! vector has `φ(m)/2` coordinates summing to zero.

pub mod period;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointVector;
use crate::interval::{self, Interval};
use crate::lattice::{BasisMatrix, NormMode};
use crate::linalg::{rat_to_f64, ratio};

pub use period::{alt_period_check, PeriodCheck};

/// Upper limit for automatic precision escalation.
pub const MAX_PRECISION: u32 = 2048;

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut a = 0;
            while n.is_multiple_of(p) {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// `Φ_d(1)`: `p` when `d = p^k` (k ≥ 1), else 1 (for `d ≥ 2`).
fn cyclotomic_at_one(d: u64) -> u64 {
    match factorize(d).as_slice() {
        [(p, _)] => *p,
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicField {
    m: u64,
    factors: Vec<(u64, u32)>,
    cofactors: Vec<u64>,
    reps: Vec<u64>,
}

impl CyclotomicField {
    pub fn new(m: u64) -> Result<Self> {
        if m < 3 || m % 4 == 2 {
            return Err(Error::Parameter(format!("conductor must be >= 3 and not 2 mod 4, got {m}")));
        }
        let factors = factorize(m);
        let cofactors = factors.iter().map(|&(p, a)| m / p.pow(a)).collect();
        let reps = (1..m).filter(|&a| 2 * a < m && a.gcd(&m) == 1).collect();
        Ok(Self { m, factors, cofactors, reps })
    }

    pub fn conductor(&self) -> u64 {
        self.m
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// `m_i = m / p_i^{α_i}`.
    pub fn cofactors(&self) -> &[u64] {
        &self.cofactors
    }

    pub fn degree(&self) -> u64 {
        euler_phi(self.m)
    }

    pub fn unit_rank(&self) -> usize {
        (self.degree() / 2 - 1) as usize
    }

    /// Embedding representatives, one per conjugate pair.
    pub fn representatives(&self) -> &[u64] {
        &self.reps
    }

    /// Order of the torsion subgroup, `lcm(2, m)`.
    pub fn torsion_order(&self) -> u64 {
        self.m.lcm(&2)
    }

    /// Exact absolute norm of `1 − ζ^j` down to `Q` (`0` when `m | j`).
    pub fn norm_one_minus(&self, j: u64) -> BigInt {
        let j = j % self.m;
        if j == 0 {
            return BigInt::zero();
        }
        let d = self.m / j.gcd(&self.m);
        if d == 1 {
            return BigInt::zero();
        }
        num_traits::pow(BigInt::from(cyclotomic_at_one(d)), (self.degree() / euler_phi(d)) as usize)
    }
}

/// `ζ^root · Π (1 − ζ^j)^e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloElement {
    pub root: u64,
    pub factors: Vec<(u64, i64)>,
}

impl CycloElement {
    pub fn root_of_unity(k: u64) -> Self {
        Self { root: k, factors: vec![] }
    }

    pub fn one_minus(j: u64) -> Self {
        Self { root: 0, factors: vec![(j, 1)] }
    }

    /// Exact absolute norm as a rational.
    pub fn norm(&self, field: &CyclotomicField) -> Result<BigRational> {
        let mut n = BigRational::one();
        for &(j, e) in &self.factors {
            if e == 0 {
                continue;
            }
            let f = field.norm_one_minus(j);
            if f.is_zero() {
                return Err(Error::Domain(format!("1 - zeta^{j} vanishes")));
            }
            let f = BigRational::from_integer(f);
            n *= if e > 0 { num_traits::pow(f, e as usize) } else { num_traits::pow(f.recip(), (-e) as usize) };
        }
        Ok(n)
    }

    pub fn is_unit(&self, field: &CyclotomicField) -> bool {
        self.norm(field).is_ok_and(|n| n.is_one())
    }

    pub fn is_trivial(&self) -> bool {
        let mut net: Vec<(u64, i64)> = Vec::new();
        for &(j, e) in &self.factors {
            match net.iter_mut().find(|(k, _)| *k == j) {
                Some(x) => x.1 += e,
                None => net.push((j, e)),
            }
        }
        net.iter().all(|(_, e)| *e == 0)
    }
}

/// `log|1 − ζ^t| = log(2|sin(πt/m)|)` for `t = 0..m`, at precision `p`.
#[derive(Debug, Clone)]
pub struct LogTable {
    m: u64,
    prec: u32,
    values: Vec<Option<Interval>>,
}

impl LogTable {
    pub fn new(m: u64, prec: u32) -> Result<Self> {
        let mut values = vec![None];
        for t in 1..m {
            let s = interval::sin_pi(&ratio(t as i64, m as i64), prec).abs().mul_int(2);
            values.push(Some(interval::ln(&s)?));
        }
        Ok(Self { m, prec, values })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn get(&self, t: u64) -> Option<&Interval> {
        self.values[(t % self.m) as usize].as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogVector {
    pub coords: Vec<Interval>,
    pub prec: u32,
}

impl LogVector {
    pub fn to_fixed(&self) -> FixedPointVector {
        FixedPointVector::from_rationals(&self.coords.iter().map(Interval::mid).collect::<Vec<_>>(), self.prec)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Interval::mid_f64).collect()
    }

    pub fn sum(&self) -> Interval {
        self.coords.iter().fold(Interval::from_int(0, self.prec), |a, c| a.add(c))
    }

    /// Upper bound on the Euclidean norm.
    pub fn norm2_upper(&self) -> f64 {
        self.coords.iter().map(|c| c.abs().hi()).map(|h| rat_to_f64(&h).powi(2)).sum::<f64>().sqrt()
    }

    pub fn norm2(&self) -> f64 {
        self.to_f64().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_width_log2(&self) -> f64 {
        self.coords.iter().map(Interval::width_log2).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn embed_with(table: &LogTable, elem: &CycloElement, field: &CyclotomicField) -> Result<LogVector> {
    let p = table.prec();
    let mut coords = Vec::with_capacity(field.reps.len());
    for &a in &field.reps {
        let mut c = Interval::from_int(0, p);
        for &(j, e) in &elem.factors {
            if e == 0 {
                continue;
            }
            let t = (a * j) % field.m;
            let v = table.get(t).ok_or_else(|| Error::Domain(format!("1 - zeta^{j} vanishes")))?;
            c = c.add(&v.mul_int(e));
        }
        coords.push(c);
    }
    Ok(LogVector { coords, prec: p })
}

fn guard_bits(field: &CyclotomicField) -> u32 {
    16 + 64 - (field.m.max(2)).leading_zeros()
}

/// Log embedding with every coordinate enclosed in an interval of width at
/// most `2^-precision`; escalates internally when that fails.
pub fn log_embedding(elem: &CycloElement, field: &CyclotomicField, precision: u32) -> Result<LogVector> {
    for &(j, e) in &elem.factors {
        if e != 0 && j % field.m == 0 {
            return Err(Error::Domain(format!("1 - zeta^{j} vanishes at every embedding")));
        }
    }
    let target = -(precision as f64);
    interval::with_escalation(precision + guard_bits(field), MAX_PRECISION, |w| {
        let table = LogTable::new(field.m, w)?;
        let v = embed_with(&table, elem, field)?;
        if v.max_width_log2() > target {
            return Err(Error::PrecisionEscalation { bits: w * 2 });
        }
        Ok(v)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub j: u64,
    /// `Some(m_i)` when `v_j = (1 − ζ^j)/(1 − ζ^{m_i})`.
    pub divided_by: Option<u64>,
    pub element: CycloElement,
    pub is_unit: bool,
    pub log: LogVector,
}

/// `v_j` for `j = 1..m−1`: `1 − ζ^j` when no cofactor `m_i` divides `j`,
/// otherwise `(1 − ζ^j)/(1 − ζ^{m_i})` for the unique such `i`. For a
/// prime power `m_1 = 1` divides every `j`, so all take the quotient form.
pub fn cyclotomic_unit_generators(field: &CyclotomicField, precision: u32) -> Result<Vec<Generator>> {
    let table = interval::with_escalation(precision + guard_bits(field), MAX_PRECISION, |w| LogTable::new(field.m, w))?;
    let mut out = Vec::with_capacity(field.m as usize - 1);
    for j in 1..field.m {
        let div = field.cofactors.iter().copied().find(|&mi| j % mi == 0);
        let element = match div {
            None => CycloElement::one_minus(j),
            Some(mi) => CycloElement { root: 0, factors: vec![(j, 1), (mi, -1)] },
        };
        let is_unit = element.is_unit(field);
        let log = embed_with(&table, &element, field)?;
        out.push(Generator { j, divided_by: div, element, is_unit, log });
    }
    Ok(out)
}

fn project(v: &LogVector) -> Vec<Interval> {
    // drop the last coordinate: units live on the zero-sum hyperplane
    let n = v.coords.len();
    v.coords[..n.saturating_sub(1)].to_vec()
}

/// Indices of a certified linearly independent subset of `rows`, found by
/// interval elimination with full pivoting. Its size is a lower bound on
/// the rank.
pub fn certified_independent(rows: &[Vec<Interval>]) -> Vec<usize> {
    let mut a: Vec<(usize, Vec<Interval>)> = rows.iter().cloned().enumerate().collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut used_cols = vec![false; cols];
    let mut chosen = Vec::new();
    loop {
        let mut best: Option<(usize, usize, BigRational)> = None;
        for (ri, (_, r)) in a.iter().enumerate() {
            for (c, x) in r.iter().enumerate() {
                if used_cols[c] || x.contains_zero() {
                    continue;
                }
                let mag = x.abs().lo();
                if best.as_ref().is_none_or(|(_, _, b)| mag > *b) {
                    best = Some((ri, c, mag));
                }
            }
        }
        let Some((ri, c, _)) = best else { break };
        let (orig, pivot) = a.remove(ri);
        let Ok(inv) = pivot[c].recip() else { break };
        for (_, r) in a.iter_mut() {
            let f = r[c].mul(&inv);
            for (x, p) in r.iter_mut().zip(&pivot) {
                *x = x.sub(&f.mul(p));
            }
        }
        used_cols[c] = true;
        chosen.push(orig);
    }
    chosen.sort_unstable();
    chosen
}

/// The sublattice `M` of the Log unit lattice spanned by a certified
/// independent subset of the unit generators.
#[derive(Debug, Clone)]
pub struct UnitLattice {
    pub field: CyclotomicField,
    pub generators: Vec<Generator>,
    /// Certified rank of the span of the unit generators.
    pub rank: usize,
    /// `j` values of the generators used as the basis of `M`.
    pub basis_indices: Vec<u64>,
    /// Projected basis (last coordinate dropped), rounded to `precision` bits.
    pub basis: Option<BasisMatrix>,
    /// `|det|` of the projected basis, which for `h⁺ = 1` and a generating
    /// subset is the regulator of the real subfield.
    pub covolume: Interval,
    pub precision: u32,
}

pub fn unit_lattice(field: &CyclotomicField, precision: u32) -> Result<UnitLattice> {
    let expected = field.unit_rank();
    let mut p = precision;
    loop {
        let gens = cyclotomic_unit_generators(field, p)?;
        let units: Vec<&Generator> = gens.iter().filter(|g| g.is_unit && !g.element.is_trivial()).collect();
        let rows: Vec<Vec<Interval>> = units.iter().map(|g| project(&g.log)).collect();
        let idx = certified_independent(&rows);
        if idx.len() < expected && p < MAX_PRECISION {
            p = (p * 2).min(MAX_PRECISION);
            continue;
        }
        let chosen: Vec<&Generator> = idx.iter().map(|&i| units[i]).collect();
        let w = chosen.first().map_or(p, |g| g.log.prec);
        let (basis, covolume) = if chosen.len() == expected && expected > 0 {
            let ivs: Vec<Vec<Interval>> = chosen.iter().map(|g| project(&g.log)).collect();
            let cov = interval::det(&ivs).abs();
            let fixed: Vec<Vec<BigRational>> =
                chosen.iter().map(|g| LogVector { coords: project(&g.log), prec: precision }.to_fixed().to_rationals()).collect();
            (Some(BasisMatrix::new(fixed)?), cov)
        } else {
            (None, Interval::from_int(1, w))
        };
        return Ok(UnitLattice {
            field: field.clone(),
            rank: idx.len(),
            basis_indices: chosen.iter().map(|g| g.j).collect(),
            generators: gens,
            basis,
            covolume,
            precision,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub m: u64,
    /// Largest Euclidean norm among the Log vectors of unit generators.
    pub max_log_norm: f64,
    pub argmax_j: u64,
    /// `max_log_norm / √(m ln m)`.
    pub growth_ratio: f64,
    /// Upper bound on the largest row norm of the basis of `M`.
    pub basis_two_rowmax: Option<f64>,
}

pub fn basis_norm_profile(lat: &UnitLattice) -> NormProfile {
    let m = lat.field.conductor();
    let (mut best, mut arg) = (0.0f64, 0u64);
    for g in lat.generators.iter().filter(|g| g.is_unit) {
        let n = g.log.norm2();
        if n > best {
            best = n;
            arg = g.j;
        }
    }
    let mf = m as f64;
    NormProfile {
        m,
        max_log_norm: best,
        argmax_j: arg,
        growth_ratio: best / (mf * mf.ln()).sqrt(),
        basis_two_rowmax: lat.basis.as_ref().map(|b| rat_to_f64(&b.op_norm(NormMode::TwoRowmax).upper)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub j: u64,
    pub unit: bool,
    pub log: FixedPointVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclotomicReport {
    pub m: u64,
    pub degree: u64,
    pub unit_rank: usize,
    pub torsion_order: u64,
    pub generators: Vec<GeneratorJson>,
    pub rank: usize,
    pub basis_indices: Vec<u64>,
    pub covolume: f64,
    pub norm_profile: NormProfile,
}

impl CyclotomicReport {
    pub fn new(lat: &UnitLattice) -> Self {
        let f = &lat.field;
        Self {
            m: f.conductor(),
            degree: f.degree(),
            unit_rank: f.unit_rank(),
            torsion_order: f.torsion_order(),
            generators: lat
                .generators
                .iter()
                .map(|g| GeneratorJson {
                    j: g.j,
                    unit: g.is_unit,
                    log: LogVector { coords: g.log.coords.clone(), prec: lat.precision }.to_fixed(),
                })
                .collect(),
            rank: lat.rank,
            basis_indices: lat.basis_indices.clone(),
            covolume: lat.covolume.mid_f64(),
            norm_profile: basis_norm_profile(lat),
        }
    }
}

/// Sign-agnostic check that `x` lies within `tol` of an integer.
pub fn near_integer(x: &BigRational, tol: &BigRational) -> bool {
    let r = x.round();
    (x - r).abs() <= *tol
}
