//! LLL over ℤ and O_K-LLL over ℤ[i] and ℤ[ζ₃], in exact arithmetic with
//! incremental Hermitian Gram-Schmidt.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::BasisMatrix;
use crate::linalg::{ratio, IntMatrix, RatMatrix};
use crate::ring::{FieldElem, OKMatrix, RingDescriptor, RingElem, RingKind};

pub fn default_delta() -> BigRational {
    ratio(99, 100)
}

/// Hermitian inner product `Σ u_i · conj(v_i)`.
pub fn herm(u: &[FieldElem], v: &[FieldElem], kind: RingKind) -> FieldElem {
    u.iter().zip(v).fold(FieldElem::zero(), |acc, (x, y)| acc.add(&x.mul(&y.conj(kind), kind)))
}

/// `Σ N(u_i)`, the squared Euclidean length of the complex embedding.
pub fn norm_sq(u: &[FieldElem], kind: RingKind) -> BigRational {
    u.iter().fold(BigRational::zero(), |acc, x| acc + x.norm(kind))
}

/// Gram-Schmidt coefficients and squared lengths, recomputed from scratch.
#[derive(Debug, Clone)]
pub struct HermitianGs {
    pub mu: Vec<Vec<FieldElem>>,
    pub b: Vec<BigRational>,
}

pub fn hermitian_gs(rows: &[Vec<FieldElem>], kind: RingKind) -> HermitianGs {
    let n = rows.len();
    let mut ortho: Vec<Vec<FieldElem>> = Vec::with_capacity(n);
    let mut mu = vec![vec![FieldElem::zero(); n]; n];
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            if b[j] == BigRational::zero() {
                continue;
            }
            let c = herm(&rows[i], &ortho[j], kind).scale(&(BigRational::one() / &b[j]));
            for (vk, ok) in v.iter_mut().zip(&ortho[j]) {
                *vk = vk.sub(&c.mul(ok, kind));
            }
            mu[i][j] = c;
        }
        b.push(norm_sq(&v, kind));
        ortho.push(v);
    }
    HermitianGs { mu, b }
}

fn check_delta(delta: &BigRational, ring: RingDescriptor) -> Result<()> {
    let m = ring.euclidean_minimum();
    if *delta <= m || *delta >= BigRational::one() {
        return Err(Error::Parameter(format!(
            "delta {delta} must lie strictly between {m} and 1 for {}",
            ring.kind.name()
        )));
    }
    Ok(())
}

struct Lll<'a> {
    kind: RingKind,
    delta: &'a BigRational,
    b: Vec<Vec<FieldElem>>,
    h: Vec<Vec<RingElem>>,
    mu: Vec<Vec<FieldElem>>,
    bb: Vec<BigRational>,
}

impl Lll<'_> {
    fn gs_row(&mut self, k: usize) -> Result<()> {
        let kind = self.kind;
        for j in 0..k {
            let mut u = herm(&self.b[k], &self.b[j], kind);
            for i in 0..j {
                let t = self.mu[j][i].conj(kind).mul(&self.mu[k][i], kind).scale(&self.bb[i]);
                u = u.sub(&t);
            }
            self.mu[k][j] = u.scale(&(BigRational::one() / &self.bb[j]));
        }
        let mut bk = norm_sq(&self.b[k], kind);
        for j in 0..k {
            bk -= self.mu[k][j].norm(kind) * &self.bb[j];
        }
        if bk.is_zero() {
            return Err(Error::Rank { rank: k, expected: self.b.len() });
        }
        self.bb[k] = bk;
        Ok(())
    }

    fn red(&mut self, k: usize, l: usize) {
        let kind = self.kind;
        let q = self.mu[k][l].round_nearest(kind);
        if q.is_zero() {
            return;
        }
        let qf = q.to_field();
        let (lo, hi) = self.b.split_at_mut(k);
        for (x, y) in hi[0].iter_mut().zip(&lo[l]) {
            *x = x.sub(&qf.mul(y, kind));
        }
        let (lo, hi) = self.h.split_at_mut(k);
        for (x, y) in hi[0].iter_mut().zip(&lo[l]) {
            *x = x.sub(&q.mul(y, kind));
        }
        self.mu[k][l] = self.mu[k][l].sub(&qf);
        for i in 0..l {
            let t = qf.mul(&self.mu[l][i], kind);
            self.mu[k][i] = self.mu[k][i].sub(&t);
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        let kind = self.kind;
        self.b.swap(k, k - 1);
        self.h.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = self.mu[k][j].clone();
            self.mu[k][j] = std::mem::replace(&mut self.mu[k - 1][j], t);
        }
        let mu = self.mu[k][k - 1].clone();
        let bp = &self.bb[k] + mu.norm(kind) * &self.bb[k - 1];
        let mu_new = mu.conj(kind).scale(&(&self.bb[k - 1] / &bp));
        self.mu[k][k - 1] = mu_new.clone();
        self.bb[k] = &self.bb[k - 1] * &self.bb[k] / &bp;
        self.bb[k - 1] = bp;
        for i in k + 1..=kmax {
            let t = self.mu[i][k].clone();
            self.mu[i][k] = self.mu[i][k - 1].sub(&mu.mul(&t, kind));
            self.mu[i][k - 1] = t.add(&mu_new.mul(&self.mu[i][k], kind));
        }
    }

    fn lovasz_fails(&self, k: usize) -> bool {
        let n = self.mu[k][k - 1].norm(self.kind);
        self.bb[k] < (self.delta - n) * &self.bb[k - 1]
    }

    fn run(&mut self) -> Result<()> {
        let n = self.b.len();
        if n == 0 {
            return Ok(());
        }
        self.gs_row(0)?;
        let mut k = 1;
        let mut kmax = 0;
        while k < n {
            if k > kmax {
                kmax = k;
                self.gs_row(k)?;
            }
            self.red(k, k - 1);
            if self.lovasz_fails(k) {
                self.swap(k, kmax);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    self.red(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// Reduced rows together with `H`, where `reduced = H · input`.
#[derive(Debug, Clone)]
pub struct LllOutput {
    pub rows: Vec<Vec<FieldElem>>,
    pub transform: OKMatrix,
}

/// O_K-LLL on arbitrary (not necessarily square) rows with entries in the
/// fraction field of the ring. Rows must be independent.
pub fn lll_reduce_field(rows: &[Vec<FieldElem>], delta: &BigRational, ring: RingDescriptor) -> Result<LllOutput> {
    check_delta(delta, ring)?;
    let n = rows.len();
    let mut st = Lll {
        kind: ring.kind,
        delta,
        b: rows.to_vec(),
        h: OKMatrix::identity(ring.kind, n).rows,
        mu: vec![vec![FieldElem::zero(); n]; n],
        bb: vec![BigRational::zero(); n],
    };
    st.run()?;
    Ok(LllOutput { rows: st.b, transform: OKMatrix { ring: ring.kind, rows: st.h } })
}

fn rat_rows_to_field(rows: &[Vec<BigRational>]) -> Vec<Vec<FieldElem>> {
    rows.iter().map(|r| r.iter().map(|x| FieldElem::from_int(x.clone())).collect()).collect()
}

fn field_rows_to_rat(rows: &[Vec<FieldElem>]) -> RatMatrix {
    rows.iter().map(|r| r.iter().map(|x| x.a.clone()).collect()).collect()
}

fn transform_to_int(t: &OKMatrix) -> IntMatrix {
    t.rows.iter().map(|r| r.iter().map(|x| x.a.clone()).collect()).collect()
}

/// Classical LLL on rational rows (any shape, independent rows).
pub fn lll_reduce_rows(rows: &[Vec<BigRational>], delta: &BigRational) -> Result<(RatMatrix, IntMatrix)> {
    let out = lll_reduce_field(&rat_rows_to_field(rows), delta, RingDescriptor::INTEGERS)?;
    Ok((field_rows_to_rat(&out.rows), transform_to_int(&out.transform)))
}

/// Classical LLL on a full-rank basis.
pub fn lll_reduce(b: &BasisMatrix, delta: &BigRational) -> Result<(BasisMatrix, IntMatrix)> {
    let (rows, u) = lll_reduce_rows(b.rows(), delta)?;
    Ok((BasisMatrix::new(rows)?, u))
}

/// O_K-LLL on a matrix of ring elements.
pub fn lll_reduce_ok(b: &OKMatrix, delta: &BigRational) -> Result<(OKMatrix, OKMatrix)> {
    let rows: Vec<Vec<FieldElem>> = b.rows.iter().map(|r| r.iter().map(RingElem::to_field).collect()).collect();
    let out = lll_reduce_field(&rows, delta, RingDescriptor::new(b.ring))?;
    let reduced = out
        .rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_ring().expect("integral combination stays integral")).collect())
        .collect();
    Ok((OKMatrix { ring: b.ring, rows: reduced }, out.transform))
}

/// Both reduction conditions, checked exactly: `N(μ_ij) ≤ 𝔪_K` for `j < i`,
/// and `B_i + N(μ_{i,i-1}) B_{i-1} ≥ δ B_{i-1}`.
pub fn is_lll_reduced(rows: &[Vec<FieldElem>], delta: &BigRational, ring: RingDescriptor) -> bool {
    let kind = ring.kind;
    let gs = hermitian_gs(rows, kind);
    let m = ring.euclidean_minimum();
    for i in 0..rows.len() {
        for j in 0..i {
            if gs.mu[i][j].norm(kind) > m {
                return false;
            }
        }
        if i > 0 {
            let lhs = &gs.b[i] + gs.mu[i][i - 1].norm(kind) * &gs.b[i - 1];
            if lhs < delta * &gs.b[i - 1] {
                return false;
            }
        }
    }
    true
}

fn c_k(delta: &BigRational, ring: RingDescriptor) -> BigRational {
    BigRational::one() / (delta - ring.euclidean_minimum())
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

/// Norm bounds implied by reduction, with `c = 1/(δ − 𝔪_K)`, `B_i` the
/// squared Gram-Schmidt lengths and `det L = Π √B_i`:
///
/// * `‖b_j‖² ≤ c^(j−1) · B_j` for every `j`,
/// * `‖b_1‖ ≤ c^((m−1)/4) · (det L)^(1/m)`,
/// * `Π ‖b_j‖ ≤ c^(m(m−1)/4) · det L`.
///
/// Everything is compared after raising to integer powers, so no roots are
/// taken.
pub fn check_reduced_bound(rows: &[Vec<FieldElem>], delta: &BigRational, ring: RingDescriptor) -> bool {
    let kind = ring.kind;
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let gs = hermitian_gs(rows, kind);
    if gs.b.iter().any(|x| x.is_zero()) {
        return false;
    }
    let c = c_k(delta, ring);
    let norms: Vec<BigRational> = rows.iter().map(|r| norm_sq(r, kind)).collect();
    let det_sq: BigRational = gs.b.iter().fold(BigRational::one(), |a, x| a * x);
    let tri = m * (m - 1) / 2;
    for j in 0..m {
        if norms[j] > pow(&c, j) * &gs.b[j] {
            return false;
        }
    }
    if pow(&norms[0], m) > pow(&c, tri) * &det_sq {
        return false;
    }
    let prod: BigRational = norms.iter().fold(BigRational::one(), |a, x| a * x);
    prod <= pow(&c, tri) * det_sq
}

/// `‖b_j‖ ≤ c^(j−1) · (det L)^(1/m)` for every `j`, as literally stated in
/// the O_K-LLL literature this crate follows. This does not hold for every
/// reduced basis (e.g. `diag(1, 10^6)`), so it is reported rather than
/// enforced.
pub fn literal_norm_bound_holds(rows: &[Vec<FieldElem>], delta: &BigRational, ring: RingDescriptor) -> bool {
    let kind = ring.kind;
    let m = rows.len();
    let gs = hermitian_gs(rows, kind);
    let c = c_k(delta, ring);
    let det_sq: BigRational = gs.b.iter().fold(BigRational::one(), |a, x| a * x);
    (0..m).all(|j| pow(&norm_sq(&rows[j], kind), m) <= pow(&c, 2 * m * j) * &det_sq)
}

/// Convenience wrappers for rational ℤ-bases.
pub fn is_lll_reduced_rat(rows: &[Vec<BigRational>], delta: &BigRational) -> bool {
    is_lll_reduced(&rat_rows_to_field(rows), delta, RingDescriptor::INTEGERS)
}

pub fn check_reduced_bound_rat(rows: &[Vec<BigRational>], delta: &BigRational) -> bool {
    check_reduced_bound(&rat_rows_to_field(rows), delta, RingDescriptor::INTEGERS)
}

pub fn ok_rows_to_field(m: &OKMatrix) -> Vec<Vec<FieldElem>> {
    m.rows.iter().map(|r| r.iter().map(RingElem::to_field).collect()).collect()
}

/// `|det|` of a square ring matrix's transform, as a ring element norm; a
/// unimodular transform has norm-1 determinant.
pub fn ok_det(m: &OKMatrix) -> RingElem {
    let kind = m.ring;
    let n = m.nrows();
    let mut a: Vec<Vec<FieldElem>> = ok_rows_to_field(m);
    let mut det = FieldElem::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return RingElem::zero();
        };
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&a[c][c], kind);
        let inv = a[c][c].inv(kind);
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].mul(&inv, kind);
            for j in c..n {
                let t = f.mul(&a[c][j], kind);
                a[r][j] = a[r][j].sub(&t);
            }
        }
    }
    det.to_ring().expect("determinant of a ring matrix is integral")
}

pub fn is_unimodular_int(u: &[Vec<BigInt>]) -> bool {
    let d = crate::linalg::det_int(u);
    d == BigInt::one() || d == -BigInt::one()
}
