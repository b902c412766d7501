//! Babai rounding against a dual basis, and a classical stand-in for the
//! dual lattice sampler: a truncated discrete Gaussian on `L*`, bounded
//! noise, and injected failures.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointVector;
use crate::lattice::{enumerate_short_vectors, BasisMatrix, NormMode};
use crate::linalg::{self, rat_string, rat_to_f64, ratio, round_half_away};
use crate::reduction::lll::{default_delta, lll_reduce};

/// Result of Babai rounding: the dual point `y` and its coordinates `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BddOutput {
    pub y: Vec<BigRational>,
    pub z: Vec<BigInt>,
}

/// Babai rounding in `M*`: `z_i = ⌊⟨b_i, ỹ⟩⌉` over the rows `b_i` of `B_M`,
/// and `y = z · (B_Mᵗ)⁻¹`. Exact given the fixed-point input.
pub fn babai_bdd(y_tilde: &FixedPointVector, b_m: &BasisMatrix) -> Result<BddOutput> {
    if y_tilde.dim() != b_m.dim() {
        return Err(Error::Dimension { expected: b_m.dim(), got: y_tilde.dim() });
    }
    let y = y_tilde.to_rationals();
    let z: Vec<BigInt> = b_m.rows().iter().map(|b| round_half_away(&linalg::dot_rat(b, &y))).collect();
    let point = b_m.dual_basis().point(&z);
    Ok(BddOutput { y: point, z })
}

/// A rational lower bound on `1/(2‖B_M‖₂)`, the radius within which
/// [`babai_bdd`] is guaranteed to return the closest dual point.
pub fn bdd_radius(b_m: &BasisMatrix) -> BigRational {
    let n = b_m.op_norm(NormMode::TwoRowmax);
    BigRational::one() / (BigRational::from_integer(2.into()) * n.upper)
}

fn default_epsilon() -> BigRational {
    ratio(1, 4)
}

fn default_tail_p() -> BigRational {
    ratio(1, 100)
}

fn default_bits() -> u32 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Noise radius as a fraction of `λ₁(L*)`.
    #[serde(with = "rat_string")]
    pub delta: BigRational,
    /// Concentration radius.
    #[serde(with = "rat_string")]
    pub r: BigRational,
    /// Failure probability.
    #[serde(with = "rat_string")]
    pub eta: BigRational,
    /// Gaussian width: weights are `exp(−π‖ℓ‖²/σ²)`.
    #[serde(with = "rat_string")]
    pub sigma: BigRational,
    pub seed: u64,
    /// Sublattice mass bound used by the contract check.
    #[serde(with = "rat_string", default = "default_epsilon")]
    pub epsilon: BigRational,
    /// Tail mass bound used by the contract check.
    #[serde(with = "rat_string", default = "default_tail_p")]
    pub tail_p: BigRational,
    /// Exponent of the emitted fixed-point vectors.
    #[serde(default = "default_bits")]
    pub output_bits: u32,
}

impl SamplerConfig {
    pub fn new(delta: BigRational, r: BigRational, eta: BigRational, sigma: BigRational, seed: u64) -> Self {
        Self {
            delta,
            r,
            eta,
            sigma,
            seed,
            epsilon: default_epsilon(),
            tail_p: default_tail_p(),
            output_bits: default_bits(),
        }
    }

    /// `delta` and `eta` may be zero (exact, failure-free sampling).
    pub fn validate(&self) -> Result<()> {
        let half = ratio(1, 2);
        if self.delta < BigRational::zero() || self.delta >= half {
            return Err(Error::Config(format!("delta {} outside [0, 1/2)", self.delta)));
        }
        if self.eta < BigRational::zero() || self.eta >= half {
            return Err(Error::Config(format!("eta {} outside [0, 1/2)", self.eta)));
        }
        if self.sigma <= BigRational::zero() {
            return Err(Error::Config("sigma must be positive".into()));
        }
        if self.r <= BigRational::zero() {
            return Err(Error::Config("r must be positive".into()));
        }
        if self.epsilon <= BigRational::zero() || self.epsilon > ratio(1, 4) {
            return Err(Error::Config("epsilon must lie in (0, 1/4]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub y_tilde: FixedPointVector,
    /// Coordinates of the perturbed dual point in the sampler's basis.
    pub ground_truth: Vec<i64>,
    /// Set when the output was replaced by a uniform point.
    #[serde(default)]
    pub failed: bool,
}

/// `λ₁` of the lattice: exact by enumeration up to dimension 8, otherwise
/// the lower bound `1/‖B_L‖` from the dual basis.
pub fn lambda1_estimate(b: &BasisMatrix) -> Result<f64> {
    if b.dim() <= 8 {
        let (red, _) = lll_reduce(b, &default_delta())?;
        Ok(rat_to_f64(&red.shortest_norm_sq()?).sqrt())
    } else {
        let upper = b.dual_basis().op_norm(NormMode::InfOne).upper;
        Ok(1.0 / rat_to_f64(&upper))
    }
}

/// Seeded sampler over a fixed dual lattice.
#[derive(Debug, Clone)]
pub struct DualSampler {
    basis: BasisMatrix,
    cfg: SamplerConfig,
    coords: Vec<Vec<i64>>,
    weights: WeightedIndex<f64>,
    lambda1: f64,
    noise_radius: f64,
    box_half_width: f64,
    rng: ChaCha20Rng,
}

/// Hard cap on the enumerated support.
pub const SUPPORT_LIMIT: usize = 4_000_000;

impl DualSampler {
    pub fn new(b_l_star: &BasisMatrix, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let sigma = rat_to_f64(&cfg.sigma);
        let (red, u) = lll_reduce(b_l_star, &default_delta())?;
        let red_coords = enumerate_short_vectors(&red, 3.0 * sigma, SUPPORT_LIMIT)?;
        let uf: Vec<Vec<i64>> = u
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64().expect("small transform")).collect())
            .collect();
        let bf = b_l_star.to_f64_rows();
        let m = b_l_star.dim();
        let mut coords = Vec::with_capacity(red_coords.len());
        let mut weights = Vec::with_capacity(red_coords.len());
        for x in red_coords {
            let orig: Vec<i64> = (0..m).map(|j| (0..m).map(|i| x[i] * uf[i][j]).sum()).collect();
            let p: Vec<f64> = (0..m).map(|j| (0..m).map(|i| orig[i] as f64 * bf[i][j]).sum()).collect();
            let n2: f64 = p.iter().map(|v| v * v).sum();
            weights.push((-std::f64::consts::PI * n2 / (sigma * sigma)).exp());
            coords.push(orig);
        }
        if coords.is_empty() {
            return Err(Error::Config("empty truncated support".into()));
        }
        let weights = WeightedIndex::new(&weights).map_err(|e| Error::Config(format!("weights: {e}")))?;
        let lambda1 = lambda1_estimate(&red)?;
        let noise_radius = rat_to_f64(&cfg.delta) * lambda1;
        Ok(Self {
            basis: b_l_star.clone(),
            cfg: cfg.clone(),
            coords,
            weights,
            lambda1,
            noise_radius,
            box_half_width: 3.0 * sigma + noise_radius + 1.0,
            rng: ChaCha20Rng::seed_from_u64(cfg.seed),
        })
    }

    pub fn support_size(&self) -> usize {
        self.coords.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn noise_radius(&self) -> f64 {
        self.noise_radius
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// Restart the random stream without rebuilding the support.
    pub fn reseed(&mut self, seed: u64) {
        self.cfg.seed = seed;
        self.rng = ChaCha20Rng::seed_from_u64(seed);
    }

    pub fn basis(&self) -> &BasisMatrix {
        &self.basis
    }

    pub fn sample(&mut self) -> SampleRecord {
        let m = self.basis.dim();
        let q = self.cfg.output_bits;
        let idx = self.weights.sample(&mut self.rng);
        let coords = self.coords[idx].clone();
        let eta = rat_to_f64(&self.cfg.eta);
        let failed = eta > 0.0 && self.rng.random::<f64>() < eta;
        if failed {
            let w = self.box_half_width;
            let v: Vec<f64> = (0..m).map(|_| self.rng.random_range(-w..w)).collect();
            return SampleRecord { y_tilde: FixedPointVector::from_f64(&v, q), ground_truth: coords, failed };
        }
        let big: Vec<BigInt> = coords.iter().map(|&c| BigInt::from(c)).collect();
        let exact = FixedPointVector::from_rationals(&self.basis.point(&big), q);
        let noise = self.noise();
        let noise_fp = FixedPointVector::from_f64(&noise, q);
        let mantissas = exact.mantissas().iter().zip(noise_fp.mantissas()).map(|(a, b)| a + b).collect();
        SampleRecord { y_tilde: FixedPointVector::new(mantissas, q), ground_truth: coords, failed }
    }

    /// Uniform in the ball of radius `noise_radius`.
    fn noise(&mut self) -> Vec<f64> {
        let m = self.basis.dim();
        if self.noise_radius == 0.0 {
            return vec![0.0; m];
        }
        let dir: Vec<f64> = (0..m).map(|_| self.rng.sample(StandardNormal)).collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let u: f64 = self.rng.random();
        // stay strictly inside the ball after fixed-point rounding
        let rad = self.noise_radius * u.powf(1.0 / m as f64) * (1.0 - 1e-9);
        dir.iter().map(|v| v / len * rad).collect()
    }

    pub fn sample_n(&mut self, count: usize) -> Vec<SampleRecord> {
        (0..count).map(|_| self.sample()).collect()
    }
}

pub fn sample_dual(b_l_star: &BasisMatrix, cfg: &SamplerConfig, count: usize) -> Result<Vec<SampleRecord>> {
    Ok(DualSampler::new(b_l_star, cfg)?.sample_n(count))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    pub samples: usize,
    /// Fraction of outputs within the noise radius of their dual point.
    pub coverage: f64,
    pub coverage_floor: f64,
    /// Fraction of drawn dual points with norm above `r`.
    pub concentration_mass: f64,
    pub concentration_ceiling: f64,
    /// Largest mass on an index-2 sublattice of `L*`.
    pub uniformity_max_mass: f64,
    pub uniformity_ceiling: f64,
    /// `1/2 + ε − uniformity_max_mass`.
    pub uniformity_margin: f64,
    pub coverage_ok: bool,
    pub concentration_ok: bool,
    pub uniformity_ok: bool,
}

impl SamplerReport {
    pub fn passed(&self) -> bool {
        self.coverage_ok && self.concentration_ok && self.uniformity_ok
    }
}

fn stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Empirical check of the sampler contract with a 3-standard-error
/// Monte Carlo tolerance. Uniformity is tested on the `2^m − 1` index-2
/// sublattices of `L*` (coordinate parity classes), which contain every
/// maximal sublattice of 2-power index.
pub fn verify_sampler_contract(
    samples: &[SampleRecord],
    b_l_star: &BasisMatrix,
    cfg: &SamplerConfig,
) -> Result<SamplerReport> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Config("no samples".into()));
    }
    let m = b_l_star.dim();
    let lambda1 = lambda1_estimate(b_l_star)?;
    let rho = rat_to_f64(&cfg.delta) * lambda1;
    let slack = (m as f64).sqrt() * 2f64.powi(-(cfg.output_bits.min(1000) as i32));
    let bf = b_l_star.to_f64_rows();
    let point = |c: &[i64]| -> Vec<f64> { (0..m).map(|j| (0..m).map(|i| c[i] as f64 * bf[i][j]).sum()).collect() };

    let mut covered = 0usize;
    let mut tail = 0usize;
    let r = rat_to_f64(&cfg.r);
    for s in samples {
        if s.ground_truth.len() != m || s.y_tilde.dim() != m {
            return Err(Error::Dimension { expected: m, got: s.y_tilde.dim() });
        }
        let p = point(&s.ground_truth);
        let y = s.y_tilde.to_f64();
        let d: f64 = p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d <= rho + slack + 1e-12 * (1.0 + pn) {
            covered += 1;
        }
        if pn > r {
            tail += 1;
        }
    }
    let coverage = covered as f64 / n as f64;
    let eta = rat_to_f64(&cfg.eta);
    let coverage_floor = 1.0 - eta - 3.0 * stderr(1.0 - eta, n);
    let concentration_mass = tail as f64 / n as f64;
    let p = rat_to_f64(&cfg.tail_p);
    let concentration_ceiling = p + 3.0 * stderr(p, n);

    let mut max_mass = 0.0f64;
    if m < 24 {
        let mut counts = vec![0usize; 1 << m];
        for s in samples {
            let parity = s.ground_truth.iter().enumerate().fold(0usize, |acc, (i, &c)| acc | (((c & 1) as usize) << i));
            counts[parity] += 1;
        }
        for v in 1usize..(1 << m) {
            let inside: usize =
                counts.iter().enumerate().filter(|(par, _)| (par & v).count_ones() % 2 == 0).map(|(_, c)| c).sum();
            max_mass = max_mass.max(inside as f64 / n as f64);
        }
    }
    let eps = rat_to_f64(&cfg.epsilon);
    let bound = 0.5 + eps;
    let uniformity_ceiling = bound + 3.0 * stderr(bound.min(1.0), n);

    Ok(SamplerReport {
        samples: n,
        coverage,
        coverage_floor,
        concentration_mass,
        concentration_ceiling,
        uniformity_max_mass: max_mass,
        uniformity_ceiling,
        uniformity_margin: bound - max_mass,
        coverage_ok: coverage >= coverage_floor,
        concentration_ok: concentration_mass <= concentration_ceiling,
        uniformity_ok: max_mass < uniformity_ceiling,
    })
}

/// Smallest `r` with Gaussian tail mass below `p`, computed from the
/// enumerated support of a sampler.
pub fn concentration_radius(sampler: &DualSampler, p: f64) -> f64 {
    let bf = sampler.basis.to_f64_rows();
    let m = sampler.basis.dim();
    let mut pts: Vec<(f64, f64)> = sampler
        .coords
        .iter()
        .map(|c| {
            let v: Vec<f64> = (0..m).map(|j| (0..m).map(|i| c[i] as f64 * bf[i][j]).sum()).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>();
            (n.sqrt(), n)
        })
        .collect();
    let sigma = rat_to_f64(&sampler.cfg.sigma);
    let total: f64 = pts.iter().map(|(_, n)| (-std::f64::consts::PI * n / (sigma * sigma)).exp()).sum();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    for (len, n) in pts {
        acc += (-std::f64::consts::PI * n / (sigma * sigma)).exp() / total;
        if acc >= p {
            return len;
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn cfg(delta: BigRational, eta: BigRational, sigma: BigRational, seed: u64) -> SamplerConfig {
        SamplerConfig::new(delta, rat(3), eta, sigma, seed)
    }

    #[test]
    fn babai_examples() {
        let y = FixedPointVector::from_f64(&[0.4, -0.3], 30);
        let out = babai_bdd(&y, &BasisMatrix::identity(2)).unwrap();
        assert_eq!(out.z, vec![BigInt::zero(), BigInt::zero()]);
        assert_eq!(out.y, vec![rat(0), rat(0)]);

        // (1/2, 1/3) is the dual point of diag(2,3) at z = (1,1)
        let b = BasisMatrix::from_i64(&[vec![2, 0], vec![0, 3]]).unwrap();
        let p = b.dual_basis().point(&[BigInt::one(), BigInt::one()]);
        let out = babai_bdd(&FixedPointVector::from_rationals(&p, 60), &b).unwrap();
        assert_eq!(out.z, vec![BigInt::one(), BigInt::one()]);
        assert_eq!(out.y, p);

        assert!(matches!(babai_bdd(&y, &BasisMatrix::identity(3)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn zero_noise_outputs_decode_to_ground_truth() {
        let b = BasisMatrix::from_i64(&[vec![2, 1], vec![0, 3]]).unwrap();
        let dual = b.dual_basis();
        let c = cfg(rat(0), rat(0), rat(3), 5);
        let samples = sample_dual(&dual, &c, 200).unwrap();
        for s in &samples {
            let out = babai_bdd(&s.y_tilde, &b).unwrap();
            let z: Vec<i64> = out.z.iter().map(|x| x.to_i64().unwrap()).collect();
            assert_eq!(z, s.ground_truth);
        }
        // dyadic lattice: outputs are exactly lattice points
        let z2 = BasisMatrix::identity(2);
        for s in sample_dual(&z2, &c, 50).unwrap() {
            assert!(s.y_tilde.to_rationals().iter().all(|x| x.is_integer()));
        }
        let report = verify_sampler_contract(&samples, &dual, &c).unwrap();
        assert_eq!(report.coverage, 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let z2 = BasisMatrix::identity(2);
        let c = cfg(ratio(1, 4), ratio(1, 10), rat(2), 11);
        assert_eq!(sample_dual(&z2, &c, 100).unwrap(), sample_dual(&z2, &c, 100).unwrap());
        let mut c2 = c.clone();
        c2.seed = 12;
        assert_ne!(sample_dual(&z2, &c, 100).unwrap(), sample_dual(&z2, &c2, 100).unwrap());
    }

    #[test]
    fn failure_rate_respects_coverage_floor() {
        let z2 = BasisMatrix::identity(2);
        let c = cfg(ratio(1, 4), ratio(1, 10), rat(2), 3);
        let s = sample_dual(&z2, &c, 4000).unwrap();
        let rep = verify_sampler_contract(&s, &z2, &c).unwrap();
        assert!(rep.coverage_ok, "{rep:?}");
        assert!(rep.coverage < 0.95);
    }

    #[test]
    fn tiny_sigma_trips_uniformity() {
        let z2 = BasisMatrix::identity(2);
        let c = cfg(rat(0), rat(0), ratio(1, 100), 1);
        let s = sample_dual(&z2, &c, 500).unwrap();
        let rep = verify_sampler_contract(&s, &z2, &c).unwrap();
        assert_eq!(rep.uniformity_max_mass, 1.0);
        assert!(!rep.uniformity_ok);
    }

    #[test]
    fn invalid_configs_rejected() {
        let z2 = BasisMatrix::identity(2);
        assert!(matches!(sample_dual(&z2, &cfg(ratio(1, 2), rat(0), rat(1), 0), 1), Err(Error::Config(_))));
        assert!(matches!(sample_dual(&z2, &cfg(rat(0), rat(0), rat(0), 0), 1), Err(Error::Config(_))));
    }

    #[test]
    fn json_lines_round_trip() {
        let z2 = BasisMatrix::identity(2);
        let c = cfg(ratio(1, 4), ratio(1, 10), rat(2), 3);
        for s in sample_dual(&z2, &c, 20).unwrap() {
            let line = serde_json::to_string(&s).unwrap();
            assert!(!line.contains('\n'));
            assert_eq!(serde_json::from_str::<SampleRecord>(&line).unwrap(), s);
        }
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SamplerConfig>(&j).unwrap(), c);
    }
}
