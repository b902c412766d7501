//! End-to-end lattice recovery from a dual lattice sampler.
//!
//! Sublattice-assisted recovery: given a basis of a known full-rank
//! sublattice `M ⊆ L`, each noisy sample of `L*` is rounded exactly onto
//! `M*` by Babai, the integer coordinates are put in Hermite normal form to
//! get `L*`, its Smith form gives `[L : M]`, and dualising returns `L`.
//!
//! The baseline feeds the raw samples to Buchmann-Pohst instead, which needs
//! far more bits of sampler precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::buchmann_pohst::{bp_reduce, relation_norm_check, BPParams};
use crate::cyclotomic::{unit_lattice, CyclotomicField};
use crate::error::{Error, Result};
use crate::fixed::FixedPointVector;
use crate::lattice::{BasisMatrix, NormMode};
use crate::linalg::{
    self, format_rational, identity_int, int_to_rat, log2_abs, rat, rat_to_f64, ratio, round_half_away,
    sqrt_upper, transpose, IntMatrix,
};
use crate::reduction::{hnf, lll_reduce, snf};
use crate::ring::RingDescriptor;
use crate::sampler::{babai_bdd, bdd_radius, DualSampler, SamplerConfig};

/// Number of samples: the larger of `α(m + m·lip + detL)` and
/// `m(½log₂m + lip) + detL`, rounded up, and at least `m`.
pub fn compute_k(m: usize, lip_log2: f64, detl_log2: f64, alpha: f64) -> Result<usize> {
    if alpha <= 2.0 {
        return Err(Error::Parameter(format!("alpha must exceed 2, got {alpha}")));
    }
    if !lip_log2.is_finite() || !detl_log2.is_finite() {
        return Err(Error::Parameter("log terms must be finite".into()));
    }
    let mf = m as f64;
    let lemma = alpha * (mf + mf * lip_log2 + detl_log2);
    let line = mf * (0.5 * mf.log2() + lip_log2) + detl_log2;
    let k = (lemma.max(line) - 1e-9).ceil().max(0.0) as usize;
    Ok(k.max(m))
}

/// Default `α`.
pub const DEFAULT_ALPHA: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub b_m: BasisMatrix,
    /// Basis of the hidden `L*` that drives the simulated sampler.
    pub hidden_dual: BasisMatrix,
    pub sampler: SamplerConfig,
    pub index_bound: BigInt,
    pub detl_bound: BigRational,
    /// Upper bound on `λ₁(L*)`; scales the noise radius.
    pub lambda1_dual_bound: BigRational,
    pub alpha: f64,
    pub max_attempts: u32,
}

impl RecoveryProblem {
    /// Checks dimensions, the bound on `λ₁(L*)`, and that the noise stays
    /// inside the Babai radius of `M*`.
    pub fn new(
        b_m: BasisMatrix,
        hidden_l: &BasisMatrix,
        sampler: SamplerConfig,
        index_bound: BigInt,
        detl_bound: BigRational,
        lambda1_dual_bound: BigRational,
    ) -> Result<Self> {
        let p = Self::new_unchecked(b_m, hidden_l, sampler, index_bound, detl_bound, lambda1_dual_bound)?;
        if p.noise_bound() >= bdd_radius(&p.b_m) {
            return Err(Error::Parameter(format!(
                "noise bound {} is not below the decoding radius {}",
                rat_to_f64(&p.noise_bound()),
                rat_to_f64(&bdd_radius(&p.b_m))
            )));
        }
        Ok(p)
    }

    /// As [`RecoveryProblem::new`] without the decoding-radius check.
    pub fn new_unchecked(
        b_m: BasisMatrix,
        hidden_l: &BasisMatrix,
        sampler: SamplerConfig,
        index_bound: BigInt,
        detl_bound: BigRational,
        lambda1_dual_bound: BigRational,
    ) -> Result<Self> {
        if b_m.dim() != hidden_l.dim() {
            return Err(Error::Dimension { expected: b_m.dim(), got: hidden_l.dim() });
        }
        sampler.validate()?;
        if !index_bound.is_positive() || !detl_bound.is_positive() || !lambda1_dual_bound.is_positive() {
            return Err(Error::Parameter("bounds must be positive".into()));
        }
        let hidden_dual = hidden_l.dual_basis();
        Ok(Self {
            b_m,
            hidden_dual,
            sampler,
            index_bound,
            detl_bound,
            lambda1_dual_bound,
            alpha: DEFAULT_ALPHA,
            max_attempts: 3,
        })
    }

    pub fn dim(&self) -> usize {
        self.b_m.dim()
    }

    /// `δ·λ₁*` plus the fixed-point rounding of a sample.
    pub fn noise_bound(&self) -> BigRational {
        let m = self.dim() as i64;
        &self.sampler.delta * &self.lambda1_dual_bound
            + sqrt_upper(&rat(m)) * linalg::rat_pow2(1 - self.sampler.output_bits as i64)
    }

    /// `log₂ R` for the concentration radius `r`, clipped at zero.
    pub fn lip_log2(&self) -> f64 {
        log2_abs(&self.sampler.r).max(0.0)
    }

    pub fn detl_log2(&self) -> f64 {
        log2_abs(&self.detl_bound).max(0.0)
    }

    pub fn k(&self) -> Result<usize> {
        compute_k(self.dim(), self.lip_log2(), self.detl_log2(), self.alpha)
    }

    fn attempt_seed(&self, attempt: u32) -> u64 {
        self.sampler.seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub basis_l: BasisMatrix,
    /// `[L : M]·C` where `B_L = C·B_M`.
    pub coefficients: IntMatrix,
    pub index: BigInt,
    /// HNF basis of `L*` in coordinates of `M*`.
    pub hnf_dual: IntMatrix,
    pub invariant_factors: Vec<BigInt>,
    pub k: usize,
    pub samples_used: usize,
    pub discarded: usize,
    pub attempts: u32,
}

impl RecoveryResult {
    pub fn abs_det(&self) -> BigRational {
        self.basis_l.abs_det()
    }
}

fn one_attempt(problem: &RecoveryProblem, sampler: &mut DualSampler, k: usize) -> Result<RecoveryResult> {
    let m = problem.dim();
    let bound = problem.noise_bound();
    let bound_sq = &bound * &bound;
    let mut rows: IntMatrix = Vec::with_capacity(k);
    let mut discarded = 0;
    for _ in 0..k {
        let s = sampler.sample();
        let out = babai_bdd(&s.y_tilde, &problem.b_m)?;
        let d: Vec<BigRational> = s.y_tilde.to_rationals().iter().zip(&out.y).map(|(a, b)| a - b).collect();
        if linalg::norm_sq_rat(&d) > bound_sq {
            discarded += 1;
            continue;
        }
        rows.push(out.z);
    }
    let h = hnf(&rows);
    if h.rank < m {
        return Err(Error::InsufficientSamples { rank: h.rank, needed: m });
    }
    let basis = h.basis();
    let s = snf(&basis);
    let index = s.det_abs();
    if index > problem.index_bound {
        return Err(Error::ContractViolation(format!("index {index} exceeds bound {}", problem.index_bound)));
    }
    // B_L = (Hᵗ)⁻¹ · B_M
    let c = linalg::inverse_rat(&transpose(&int_to_rat(&basis))).expect("full rank HNF");
    let idx = BigRational::from_integer(index.clone());
    let coefficients = linalg::to_int(&c.iter().map(|r| r.iter().map(|x| x * &idx).collect()).collect::<Vec<Vec<_>>>())
        .ok_or_else(|| Error::ContractViolation("coefficients not in (1/index)Z".into()))?;
    let basis_l = problem.b_m.left_mul(&c)?;
    Ok(RecoveryResult {
        basis_l,
        coefficients,
        index,
        hnf_dual: basis,
        invariant_factors: s.diagonal(),
        k,
        samples_used: k,
        discarded,
        attempts: 1,
    })
}

/// Sublattice-assisted recovery with up to `max_attempts` fresh seeds.
pub fn recover_with_sublattice(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    recover_with_k(problem, problem.k()?)
}

/// As [`recover_with_sublattice`] with an explicit sample count per attempt.
pub fn recover_with_k(problem: &RecoveryProblem, k: usize) -> Result<RecoveryResult> {
    let mut sampler = DualSampler::new(&problem.hidden_dual, &problem.sampler)?;
    let mut last = None;
    for attempt in 0..problem.max_attempts.max(1) {
        sampler.reseed(problem.attempt_seed(attempt));
        match one_attempt(problem, &mut sampler, k) {
            Ok(mut r) => {
                r.attempts = attempt + 1;
                r.samples_used = k * (attempt as usize + 1);
                return Ok(r);
            }
            Err(e @ Error::InsufficientSamples { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// `M ⊆ L`, `[L : M]` equals the Smith determinant,
/// `det L · [L : M] = det M`, and `L` equals the hidden lattice, all exactly.
pub fn verify_recovery(problem: &RecoveryProblem, r: &RecoveryResult) -> bool {
    let hidden = problem.hidden_dual.dual_basis();
    let same = r.basis_l.contained_in(&hidden) && hidden.contained_in(&r.basis_l);
    let contains = same && problem.b_m.contained_in(&r.basis_l);
    let snf_ok = r.invariant_factors.iter().fold(BigInt::one(), |a, d| a * d) == r.index;
    let det_ok = r.abs_det() * BigRational::from_integer(r.index.clone()) == problem.b_m.abs_det();
    contains && snf_ok && det_ok
}

/// A planted instance: `L`, a sublattice `M` of the given index, and a
/// sampler configuration whose noise sits strictly inside the Babai radius.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub b_l: BasisMatrix,
    pub problem: RecoveryProblem,
}

fn random_unimodular(m: usize, rng: &mut ChaCha20Rng) -> IntMatrix {
    let mut u = identity_int(m);
    if m < 2 {
        return u;
    }
    for _ in 0..3 * m {
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let c = BigInt::from(rng.random_range(-1i64..=1));
        let src = u[j].clone();
        for (x, y) in u[i].iter_mut().zip(&src) {
            *x += &c * y;
        }
    }
    u
}

/// Split `index` into diagonal factors over `m` slots.
fn split_index(index: u64, m: usize, rng: &mut ChaCha20Rng) -> Vec<u64> {
    let mut d = vec![1u64; m];
    let mut n = index;
    let mut p = 2;
    while n > 1 {
        while n.is_multiple_of(p) {
            d[rng.random_range(0..m)] *= p;
            n /= p;
        }
        p += 1;
    }
    d
}

/// Sampler width used for planted instances: a multiple of the longest
/// vector of an LLL-reduced basis of `L*`.
pub fn default_sigma(hidden_dual: &BasisMatrix) -> Result<BigRational> {
    let (red, _) = lll_reduce(hidden_dual, &crate::reduction::default_delta())?;
    let n = red.op_norm(NormMode::TwoRowmax).upper;
    Ok(ratio(3, 2) * n)
}

/// Largest `δ` (in steps of 1/1024, below 1/2) that keeps the noise bound
/// below `safety` times the decoding radius.
pub fn safe_delta(b_m: &BasisMatrix, lambda1: &BigRational, safety: &BigRational) -> BigRational {
    let target = bdd_radius(b_m) * safety / lambda1;
    let steps = linalg::floor_rat(&(target * rat(1024))).to_i64().unwrap_or(0).clamp(0, 511);
    ratio(steps, 1024)
}

/// Upper bound on `λ₁` of a small-dimensional lattice, by enumeration.
pub fn lambda1_upper(b: &BasisMatrix) -> Result<BigRational> {
    let (red, _) = lll_reduce(b, &crate::reduction::default_delta())?;
    Ok(sqrt_upper(&red.shortest_norm_sq()?))
}

/// Build a planted instance with `[L : M] = index`.
pub fn planted_instance(dim: usize, index: u64, seed: u64) -> Result<PlantedInstance> {
    planted_instance_with(dim, index, seed, &ratio(9, 10))
}

/// As [`planted_instance`], with the noise set to `safety` times the
/// decoding radius (capped below `δ = 1/2`). For `safety ≥ 1` the
/// decoding hypothesis is not checked.
pub fn planted_instance_with(dim: usize, index: u64, seed: u64, safety: &BigRational) -> Result<PlantedInstance> {
    if dim == 0 || index == 0 {
        return Err(Error::Parameter("dim and index must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let l_rows: IntMatrix = (0..dim)
        .map(|i| (0..dim).map(|j| BigInt::from(if i == j { 3 } else { 0 } + rng.random_range(-1i64..=1))).collect())
        .collect();
    let b_l = BasisMatrix::from_integers(&l_rows)?;
    let diag = split_index(index, dim, &mut rng);
    let t: IntMatrix = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Equal => BigInt::from(diag[i]),
                    std::cmp::Ordering::Greater => BigInt::from(rng.random_range(0..diag[i].max(1)) as i64),
                    std::cmp::Ordering::Less => BigInt::zero(),
                })
                .collect()
        })
        .collect();
    let ut = linalg::mul_int(&random_unimodular(dim, &mut rng), &t);
    let b_m_raw = b_l.left_mul(&int_to_rat(&ut))?;
    let (b_m, _) = lll_reduce(&b_m_raw, &crate::reduction::default_delta())?;
    let hidden_dual = b_l.dual_basis();
    let lambda1 = lambda1_upper(&hidden_dual)?;
    let sigma = default_sigma(&hidden_dual)?;
    let delta = safe_delta(&b_m, &lambda1, safety);
    let cfg = SamplerConfig::new(delta, ratio(3, 1) * &sigma, rat(0), sigma, rng.random());
    let index = BigInt::from(index);
    let problem = if *safety < rat(1) {
        RecoveryProblem::new(b_m, &b_l, cfg, index, b_l.abs_det(), lambda1)?
    } else {
        RecoveryProblem::new_unchecked(b_m, &b_l, cfg, index, b_l.abs_det(), lambda1)?
    };
    Ok(PlantedInstance { b_l, problem })
}

/// The cyclotomic instance for conductor `m`: `M` is spanned by certified
/// independent cyclotomic units (Log coordinates rounded to `precision`
/// bits) and the hidden `L` equals `M`, as when `h⁺(m) = 1`.
pub fn cyclotomic_problem(m: u64, precision: u32, seed: u64) -> Result<(RecoveryProblem, CyclotomicField)> {
    let field = CyclotomicField::new(m)?;
    let lat = unit_lattice(&field, precision)?;
    let b_m = lat
        .basis
        .clone()
        .ok_or_else(|| Error::Parameter(format!("conductor {m} has unit rank {}", field.unit_rank())))?;
    let hidden_dual = b_m.dual_basis();
    let lambda1 = lambda1_upper(&hidden_dual)?;
    let sigma = default_sigma(&hidden_dual)?;
    let delta = safe_delta(&b_m, &lambda1, &ratio(9, 10));
    let cfg = SamplerConfig::new(delta, ratio(3, 1) * &sigma, rat(0), sigma, seed);
    let detl = b_m.abs_det() + rat(1);
    let problem = RecoveryProblem::new(b_m.clone(), &b_m, cfg, BigInt::one(), detl, lambda1)?;
    Ok((problem, field))
}

/// Outcome of the Buchmann-Pohst baseline.
#[derive(Debug, Clone)]
pub enum BaselineOutcome {
    /// The configured mantissa width is below the required `q`.
    Infeasible { required_q: u32, available: u32 },
    Recovered(Box<BaselineResult>),
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    /// Approximate basis of `L*`.
    pub dual_basis: Vec<FixedPointVector>,
    /// Approximate basis of `L`, the rows of `(B*ᵗ)⁻¹`.
    pub basis_l: Vec<FixedPointVector>,
    pub q: u32,
    pub k: usize,
    pub relation_check: bool,
    /// `log₂` of the largest coordinate error of `dual_basis` against the
    /// same combination of the exact sampled points.
    pub error_log2: f64,
}

impl BaselineResult {
    /// Round the dual basis onto `M*` coordinates and take the HNF.
    pub fn dual_hnf_in(&self, b_m: &BasisMatrix) -> IntMatrix {
        let rows: IntMatrix = self
            .dual_basis
            .iter()
            .map(|v| {
                let y = v.to_rationals();
                b_m.rows().iter().map(|b| round_half_away(&linalg::dot_rat(b, &y))).collect()
            })
            .collect();
        hnf(&rows).basis()
    }

    pub fn abs_det_l(&self) -> f64 {
        let rows: Vec<Vec<BigRational>> = self.basis_l.iter().map(FixedPointVector::to_rationals).collect();
        rat_to_f64(&linalg::det_rat(&rows)).abs()
    }
}

/// Buchmann-Pohst on the raw samples. `k` defaults to the problem's sample
/// count. Samples are exact dual points rounded to `available_bits`
/// fractional bits, so the rounding is the only noise.
pub fn recover_baseline(problem: &RecoveryProblem, k: Option<usize>, available_bits: u32) -> Result<BaselineOutcome> {
    let m = problem.dim();
    let k = k.unwrap_or(problem.k()?).max(m);
    // λ₁(L*) ≥ λ₁(M*) ≥ 1/‖B_M‖ and det L* ≤ [L:M]/det M
    let mu = BigRational::one() / problem.b_m.op_norm(NormMode::TwoRowmax).upper;
    let d = BigRational::from_integer(problem.index_bound.clone()) / problem.b_m.abs_det();
    let params = BPParams::new(m, k, mu, d, crate::reduction::default_delta(), RingDescriptor::INTEGERS)?;
    if params.q() > available_bits {
        return Ok(BaselineOutcome::Infeasible { required_q: params.q(), available: available_bits });
    }
    let mut cfg = problem.sampler.clone();
    cfg.delta = BigRational::zero();
    cfg.output_bits = available_bits;
    let mut sampler = DualSampler::new(&problem.hidden_dual, &cfg)?;
    let samples = sampler.sample_n(k);
    let g: Vec<FixedPointVector> = samples.iter().map(|s| s.y_tilde.clone()).collect();
    let out = bp_reduce(&g, &params)?;
    let exact: Vec<Vec<BigRational>> = samples
        .iter()
        .map(|s| problem.hidden_dual.point(&s.ground_truth.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>()))
        .collect();
    let exact_basis = crate::buchmann_pohst::exact_basis(&out, &exact);
    let mut err = BigRational::zero();
    for (a, e) in out.basis.iter().zip(&exact_basis) {
        for (x, y) in a.to_rationals().iter().zip(e) {
            let d = (x - y).abs();
            if d > err {
                err = d;
            }
        }
    }
    let dual_rows: Vec<Vec<BigRational>> = out.basis.iter().map(FixedPointVector::to_rationals).collect();
    let basis_l = match linalg::inverse_rat(&transpose(&dual_rows)) {
        Some(inv) => inv.iter().map(|r| FixedPointVector::from_rationals(r, available_bits)).collect(),
        None => return Err(Error::Rank { rank: linalg::rank_rat(&dual_rows), expected: m }),
    };
    Ok(BaselineOutcome::Recovered(Box::new(BaselineResult {
        dual_basis: out.basis.clone(),
        basis_l,
        q: out.q,
        k,
        relation_check: relation_norm_check(&out, &params),
        error_log2: if err.is_zero() { f64::NEG_INFINITY } else { log2_abs(&err) },
    })))
}

/// Bits of sampler precision each pipeline demands, `log₂(1/(δλ₁*))`, with
/// the unspecified `O(mk)` constant of the baseline set to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionGap {
    pub m: usize,
    pub k: usize,
    pub q_baseline: f64,
    pub q_sublattice: f64,
    pub ratio: f64,
    pub mk_constant: f64,
}

/// `q_sub = log₂(2‖B_M‖)`;
/// `q_base = mk + m·log₂‖B_{L*}‖∞ + log₂det L − 3·log₂λ₁*`.
pub fn precision_gap(m: usize, k: usize, b_m_norm_log2: f64, dual_norm_log2: f64, detl_log2: f64, lambda1_log2: f64) -> PrecisionGap {
    let mf = m as f64;
    let q_sub = (1.0 + b_m_norm_log2).max(1.0);
    let q_base = (mf * k as f64 + mf * dual_norm_log2 + detl_log2 - 3.0 * lambda1_log2).max(1.0);
    PrecisionGap { m, k, q_baseline: q_base, q_sublattice: q_sub, ratio: q_base / q_sub, mk_constant: 1.0 }
}

pub fn precision_gap_report(problem: &RecoveryProblem) -> Result<PrecisionGap> {
    let (red, _) = lll_reduce(&problem.hidden_dual, &crate::reduction::default_delta())?;
    Ok(precision_gap(
        problem.dim(),
        problem.k()?,
        log2_abs(&problem.b_m.op_norm(NormMode::TwoRowmax).upper),
        log2_abs(&red.op_norm(NormMode::InfOne).upper),
        log2_abs(&problem.detl_bound),
        log2_abs(&problem.lambda1_dual_bound),
    ))
}

/// JSON view of a recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub mode: String,
    pub dim: usize,
    pub k: usize,
    pub samples_used: usize,
    pub discarded: usize,
    pub attempts: u32,
    pub index: String,
    pub invariant_factors: Vec<String>,
    pub hnf_dual: Vec<Vec<String>>,
    pub basis_l: Vec<Vec<String>>,
    pub det_l: String,
    pub det_l_f64: f64,
    pub verified: bool,
}

impl RecoveryReport {
    pub fn new(problem: &RecoveryProblem, r: &RecoveryResult) -> Self {
        let s = |m: &IntMatrix| m.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect();
        Self {
            mode: "sublattice".into(),
            dim: problem.dim(),
            k: r.k,
            samples_used: r.samples_used,
            discarded: r.discarded,
            attempts: r.attempts,
            index: r.index.to_string(),
            invariant_factors: r.invariant_factors.iter().map(|x| x.to_string()).collect(),
            hnf_dual: s(&r.hnf_dual),
            basis_l: r.basis_l.rows().iter().map(|row| row.iter().map(format_rational).collect()).collect(),
            det_l: format_rational(&r.abs_det()),
            det_l_f64: rat_to_f64(&r.abs_det()),
            verified: verify_recovery(problem, r),
        }
    }
}
