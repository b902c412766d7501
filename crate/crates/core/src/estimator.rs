//! Qubit-count formulas, evaluated in `log₂` space with every implied
//! constant set to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::{compute_k, DEFAULT_ALPHA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    /// Degree.
    pub n: u64,
    /// Real embeddings.
    pub n1: u64,
    /// Pairs of complex embeddings.
    pub n2: u64,
    /// Unit rank `n1 + n2 − 1`.
    pub m: u64,
    /// `log₂` of the discriminant.
    pub d_log2: f64,
    /// `log₂` of the regulator, when known.
    pub r_log2: Option<f64>,
    pub conductor: Option<u64>,
    /// User-supplied bound on `h⁺`.
    pub h_plus_bound: Option<u64>,
}

impl FieldProfile {
    pub fn new(n1: u64, n2: u64, d_log2: f64) -> Result<Self> {
        let n = n1 + 2 * n2;
        if n < 2 {
            return Err(Error::Parameter(format!("degree must be at least 2, got {n}")));
        }
        let p = Self { n, n1, n2, m: n1 + n2 - 1, d_log2, r_log2: None, conductor: None, h_plus_bound: None };
        p.validate()?;
        Ok(p)
    }

    /// Totally real field of unit rank `m`.
    pub fn generic(m: u64, d_log2: f64) -> Result<Self> {
        Self::new(m + 1, 0, d_log2)
    }

    /// Generic profile shaped like conductor `m`: unit rank `m`, minimal
    /// degree `m + 1`, and `log₂D = (m − 2)·log₂m`.
    pub fn cyclotomic_shaped(m: u64) -> Result<Self> {
        let mut p = Self::generic(m, cyclotomic_d_log2(m))?;
        p.conductor = Some(m);
        Ok(p)
    }

    /// `Q(a^{1/n})`: one real embedding (two for even `n`), the rest complex.
    pub fn kummer(n: u64, d_log2: f64) -> Result<Self> {
        let n1 = if n.is_multiple_of(2) { 2 } else { 1 };
        Self::new(n1, (n - n1) / 2, d_log2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter("degree must be at least 2".into()));
        }
        if self.d_log2.is_nan() || self.d_log2 < 3f64.log2() || !self.d_log2.is_finite() {
            return Err(Error::Parameter(format!("log2 D must be at least log2 3, got {}", self.d_log2)));
        }
        let (n, m) = (self.n as f64, self.m as f64);
        if m < n / 2.0 - 1.0 || m > n - 1.0 {
            return Err(Error::Parameter(format!("unit rank {} inconsistent with degree {}", self.m, self.n)));
        }
        Ok(())
    }
}

pub fn cyclotomic_d_log2(m: u64) -> f64 {
    (m as f64 - 2.0) * (m as f64).log2()
}

/// `log₂(2^a + 2^b)`.
fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub s_log2: f64,
    pub nu_log2: f64,
    pub lip_log2: f64,
    pub r_log2: f64,
    /// `243/1024`.
    pub epsilon: f64,
}

/// `s = 3·2^{2n}·√(nD)`, `ν = 1/(4n(s√n)^{2n})`,
/// `Lip = √(πn)·s/(4ν) + 1`, `r = s·(√n)^{n−1}·2ν·√m`.
pub fn oracle_params(p: &FieldProfile) -> Result<OracleParams> {
    p.validate()?;
    let n = p.n as f64;
    let ln = n.log2();
    let s = 3f64.log2() + 2.0 * n + 0.5 * (ln + p.d_log2);
    let nu = -(2.0 + ln + 2.0 * n * (s + 0.5 * ln));
    let lip = log2_add(0.5 * (std::f64::consts::PI * n).log2() + s - 2.0 - nu, 0.0);
    let r = s + 0.5 * (n - 1.0) * ln + 1.0 + nu + 0.5 * (p.m.max(1) as f64).log2();
    Ok(OracleParams { s_log2: s, nu_log2: nu, lip_log2: lip, r_log2: r, epsilon: 243.0 / 1024.0 })
}

/// Sampler register size
/// `Q = m·log₂(m·log₂(1/η)) + log₂(Lip/(η·δλ₁*))`.
pub fn sampler_qubits(m: u64, lip_log2: f64, delta_lambda_log2: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::Parameter(format!("eta must lie in (0, 1/2), got {eta}")));
    }
    let mf = m as f64;
    let inner = (mf * (1.0 / eta).log2()).max(1.0);
    Ok(mf * inner.log2() + sampler_second_term(lip_log2, delta_lambda_log2, eta))
}

/// `log₂(Lip/(η·δλ₁*))`.
pub fn sampler_second_term(lip_log2: f64, delta_lambda_log2: f64, eta: f64) -> f64 {
    lip_log2 - eta.log2() - delta_lambda_log2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Generic,
    Cyclotomic,
    HspConjectural,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Generic => "generic",
            Model::Cyclotomic => "cyclotomic",
            Model::HspConjectural => "hsp-conjectural",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub model: Model,
    pub m: u64,
    pub n: u64,
    pub d_log2: f64,
    pub oracle: Option<OracleParams>,
    pub k: usize,
    pub eta: f64,
    pub q: f64,
    /// Per-term breakdown; empty for models without one.
    pub terms: Vec<f64>,
    pub total: f64,
    pub total_log10: f64,
    /// Leading monomial of the asymptotic form with constant 1: `m⁵` for the
    /// generic model, `m²·log₂m` for the cyclotomic one.
    pub leading_term: f64,
    /// Largest single summand of `terms`.
    pub largest_term: f64,
    pub note: String,
}

const CONSTANTS_NOTE: &str = "all implied constants set to 1";

#[allow(clippy::too_many_arguments)]
fn finish(
    model: Model,
    p: &FieldProfile,
    oracle: Option<OracleParams>,
    k: usize,
    eta: f64,
    q: f64,
    terms: Vec<f64>,
    leading: f64,
    note: &str,
) -> ResourceEstimate {
    let total: f64 = terms.iter().sum();
    let largest = terms.iter().copied().fold(0.0, f64::max);
    ResourceEstimate {
        model,
        m: p.m,
        n: p.n,
        d_log2: p.d_log2,
        oracle,
        k,
        eta,
        q,
        terms,
        total,
        total_log10: total.log10(),
        leading_term: leading,
        largest_term: largest,
        note: note.to_string(),
    }
}

/// `log₂(1/λ₁*)` bound via an LLL-shaped `log₂‖B_L‖ ≈ m + log₂D/m`.
pub fn inv_lambda_log2(p: &FieldProfile) -> f64 {
    let m = p.m.max(1) as f64;
    m + p.d_log2 / m
}

fn detl_log2(p: &FieldProfile) -> f64 {
    p.r_log2.unwrap_or(p.d_log2 / 2.0).max(0.0)
}

/// Six summands: `m³log₂m`, `m³·lip`, `m²·log₂D`, `m·(lip + log₂(1/λ₁*))`,
/// `m·(log₂(1/λ₁*) + log₂(1/τ))`, and `N_f = Q·m`.
pub fn qubit_count_generic(p: &FieldProfile, tau_log2: f64) -> Result<ResourceEstimate> {
    let o = oracle_params(p)?;
    let m = p.m.max(1) as f64;
    let inv_l = inv_lambda_log2(p);
    let k = compute_k(p.m as usize, o.lip_log2, detl_log2(p), DEFAULT_ALPHA)?;
    let eta = 1.0 / (k as f64).powi(2);
    // sublattice-assisted decoding: δλ₁* = 1/(2‖B_M‖), ‖B_M‖ ~ ‖B_L‖
    let q = sampler_qubits(p.m, o.lip_log2, -(1.0 + inv_l), eta)?;
    let terms = vec![
        m.powi(3) * m.log2(),
        m.powi(3) * o.lip_log2,
        m.powi(2) * p.d_log2,
        m * (o.lip_log2 + inv_l),
        m * (inv_l - tau_log2),
        q * m,
    ];
    Ok(finish(Model::Generic, p, Some(o), k, eta, q, terms, m.powi(5), CONSTANTS_NOTE))
}

/// Cyclotomic conductor `m`: `log₂D = (m − 2)log₂m`, `Lip` of order
/// `m² + m·log₂D`, `log₂(1/(δλ₁*)) ≈ log₂m`; total `Q`, split into its two
/// summands.
pub fn qubit_count_cyclotomic(m: u64) -> Result<ResourceEstimate> {
    if m < 3 {
        return Err(Error::Parameter(format!("conductor must be at least 3, got {m}")));
    }
    let p = FieldProfile::cyclotomic_shaped(m)?;
    let (lip, dl) = cyclotomic_lip_and_delta(m);
    let k = compute_k(m as usize, lip, detl_log2(&p), DEFAULT_ALPHA)?;
    let eta = 1.0 / (k as f64).powi(2);
    let q = sampler_qubits(m, lip, dl, eta)?;
    let second = sampler_second_term(lip, dl, eta);
    let terms = vec![q - second, second];
    let mf = m as f64;
    Ok(finish(Model::Cyclotomic, &p, None, k, eta, q, terms, mf * mf * mf.log2(), CONSTANTS_NOTE))
}

/// `(lip_log2, log₂(δλ₁*))` used by [`qubit_count_cyclotomic`].
pub fn cyclotomic_lip_and_delta(m: u64) -> (f64, f64) {
    let mf = m as f64;
    (mf * mf + mf * cyclotomic_d_log2(m), -mf.log2())
}

/// Placeholder row for the HSP route: polynomial but with no numeric claim.
pub fn hsp_conjectural(p: &FieldProfile) -> ResourceEstimate {
    let mut e = finish(Model::HspConjectural, p, None, 0, 0.0, f64::NAN, vec![], f64::NAN, "polynomial in m with N = poly(m)!; no numeric claim");
    e.total = f64::NAN;
    e.total_log10 = f64::NAN;
    e.largest_term = f64::NAN;
    e
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Generic over cyclotomic totals on the same conductors.
pub fn generic_cyclotomic_ratio(m: u64, tau_log2: f64) -> Result<f64> {
    let g = qubit_count_generic(&FieldProfile::cyclotomic_shaped(m)?, tau_log2)?;
    let c = qubit_count_cyclotomic(m)?;
    Ok(g.total / c.total)
}

/// Flat row for CSV and table output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub model: String,
    pub m: u64,
    pub n: u64,
    #[serde(rename = "logD")]
    pub log_d: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub term1: Option<f64>,
    pub term2: Option<f64>,
    pub term3: Option<f64>,
    pub term4: Option<f64>,
    pub term5: Option<f64>,
    pub term6: Option<f64>,
    pub total_log10: f64,
}

impl From<&ResourceEstimate> for EstimateRow {
    fn from(e: &ResourceEstimate) -> Self {
        let t = |i: usize| if e.terms.len() == 6 { Some(e.terms[i]) } else { e.terms.get(i).copied() };
        Self {
            model: e.model.name().to_string(),
            m: e.m,
            n: e.n,
            log_d: e.d_log2,
            q: e.q,
            term1: t(0),
            term2: t(1),
            term3: t(2),
            term4: t(3),
            term5: t(4),
            term6: t(5),
            total_log10: e.total_log10,
        }
    }
}
