//! Period test for totally real fields.
//!
//! For `K = Q[x]/(P)` with real roots `θ_1 < … < θ_n` and Vandermonde
//! matrix `w = (θ_i^j)`, the map `f(x) = (w⁻¹ e^{x}, w⁻¹ e^{−x}) mod ℤ`
//! has period `2·Log(ε)` for every unit `ε`: shifting by it multiplies
//! `e^{x_i}` by `σ_i(ε²)`. At `x = 0` the shifted vectors are the power-basis
//! coordinates of `ε^{±2}`, which are integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{self, Interval, IntervalMatrix};
use crate::linalg::pow2;

type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[BigRational]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect()
}

fn rem(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        for (i, c) in b.iter().enumerate() {
            r[dr - db + i] -= &f * c;
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

fn sturm_sequence(p: &[BigRational]) -> Vec<Poly> {
    let mut seq = vec![p.to_vec(), derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            return seq;
        }
        let r: Poly = rem(&seq[n - 2], &seq[n - 1]).into_iter().map(|c| -c).collect();
        if r.is_empty() {
            return seq;
        }
        seq.push(r);
    }
}

fn sign_changes(signs: impl Iterator<Item = i32>) -> usize {
    let nz: Vec<i32> = signs.filter(|&s| s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn sign(x: &BigRational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn changes_at(seq: &[Poly], x: &BigRational) -> usize {
    sign_changes(seq.iter().map(|p| sign(&eval(p, x))))
}

fn changes_at_infinity(seq: &[Poly], positive: bool) -> usize {
    sign_changes(seq.iter().map(|p| {
        let s = sign(p.last().expect("nonzero"));
        if positive || (p.len() - 1) % 2 == 0 {
            s
        } else {
            -s
        }
    }))
}

/// Disjoint rational intervals `(a, b]`, one per real root, each of width
/// at most `2^-bits`, sorted increasingly.
fn isolate_roots(p: &[BigRational], seq: &[Poly], bits: u32) -> Vec<(BigRational, BigRational)> {
    let lead = p.last().expect("nonzero").abs();
    let bound = p.iter().map(|c| c.abs() / &lead).fold(BigRational::zero(), |a, c| if c > a { c } else { a }) + BigRational::one();
    let width = BigRational::new(BigInt::one(), pow2(bits));
    let count = |a: &BigRational, b: &BigRational| changes_at(seq, a) - changes_at(seq, b);
    let mut stack = vec![(-bound.clone(), bound)];
    let mut out = Vec::new();
    while let Some((a, b)) = stack.pop() {
        let c = count(&a, &b);
        if c == 0 {
            continue;
        }
        if c == 1 && &b - &a <= width {
            out.push((a, b));
            continue;
        }
        let mid = (&a + &b) / BigRational::from_integer(2.into());
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodCheck {
    /// Upper bound on the largest distance to ℤ among the `2n` coefficient
    /// differences.
    pub residual: f64,
    /// The roots used as embeddings, in increasing order.
    pub roots: Vec<f64>,
}

fn solve_exp(w: &IntervalMatrix, x: &[Interval], sign: i64) -> Result<Vec<Interval>> {
    let e: Vec<Interval> = x.iter().map(|v| interval::exp(&v.mul_int(sign))).collect();
    interval::solve(w, &e)
}

/// Multiples of the candidate that are checked. A period `c` makes every
/// `j·c` a period, and each extra multiple adds `2n` near-uniform fractional
/// parts for a non-period, so a spurious pass becomes much less likely.
pub const PERIOD_MULTIPLES: i64 = 3;

/// Evaluate `f(x + j·candidate) − f(x)` for `j = 1..=PERIOD_MULTIPLES` and
/// return the largest distance to ℤ. `poly` holds integer coefficients,
/// constant term first. The candidate coordinates follow the increasing
/// order of the real roots.
///
/// Integrality of the difference for every unit is guaranteed at `x = 0`;
/// at other base points a unit shift rescales the coefficients by `ε² − 1`
/// and the residual is not meaningful.
pub fn alt_period_check(poly: &[BigInt], x: &[BigRational], candidate: &[Interval], precision: u32) -> Result<PeriodCheck> {
    let p = trim(poly.iter().cloned().map(BigRational::from_integer).collect());
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::Domain("constant polynomial".into()));
    }
    if x.len() != n || candidate.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len().min(candidate.len()) });
    }
    let dp = derivative(&p);
    let mut g = (p.clone(), dp);
    while !g.1.is_empty() {
        let r = rem(&g.0, &g.1);
        g = (g.1, r);
    }
    if g.0.len() > 1 {
        return Err(Error::Domain("polynomial is not squarefree".into()));
    }
    let seq = sturm_sequence(&p);
    let real = changes_at_infinity(&seq, false) - changes_at_infinity(&seq, true);
    if real < n {
        return Err(Error::Domain(format!("{} of {n} roots are complex", n - real)));
    }
    interval::with_escalation(precision, 4 * precision.max(64), |w| {
        let roots = isolate_roots(&p, &seq, w + 8);
        let theta: Vec<Interval> = roots.iter().map(|(a, b)| Interval::from_rational_bounds(a, b, w)).collect();
        let vander: IntervalMatrix = theta
            .iter()
            .map(|t| {
                let mut row = vec![Interval::from_int(1, w)];
                for j in 1..n {
                    let next = row[j - 1].mul(t);
                    row.push(next);
                }
                row
            })
            .collect();
        let x0: Vec<Interval> = x.iter().map(|v| Interval::from_rational(v, w)).collect();
        let mut residual = 0.0f64;
        for s in [1, -1] {
            let base = solve_exp(&vander, &x0, s)?;
            for j in 1..=PERIOD_MULTIPLES {
                let xj: Vec<Interval> = x0.iter().zip(candidate).map(|(a, c)| a.add(&c.with_prec(w).mul_int(j))).collect();
                let shifted = solve_exp(&vander, &xj, s)?;
                for (b, t) in base.iter().zip(&shifted) {
                    residual = residual.max(t.sub(b).dist_to_integer_upper());
                }
            }
        }
        let roots = roots.iter().map(|(a, b)| crate::linalg::rat_to_f64(&((a + b) / BigRational::from_integer(2.into())))).collect();
        Ok(PeriodCheck { residual: residual.min(0.5), roots })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio};

    fn golden() -> Vec<BigInt> {
        vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)]
    }

    fn two_log_abs_roots(p: u32) -> Vec<Interval> {
        // ε = θ itself: σ_i(ε) = θ_i, roots (1 ∓ √5)/2
        let s = crate::linalg::sqrt_lower(&rat(5));
        let su = crate::linalg::sqrt_upper(&rat(5));
        let lo = Interval::from_rational_bounds(&((s.clone() - rat(1)) / rat(2)), &((su.clone() - rat(1)) / rat(2)), p);
        let hi = Interval::from_rational_bounds(&((s + rat(1)) / rat(2)), &((su + rat(1)) / rat(2)), p);
        // |θ_1| = (√5 − 1)/2
        vec![interval::ln(&lo).unwrap().mul_int(2), interval::ln(&hi).unwrap().mul_int(2)]
    }

    #[test]
    fn zero_candidate() {
        let z = vec![rat(0), rat(0)];
        let c = vec![Interval::from_int(0, 96), Interval::from_int(0, 96)];
        let r = alt_period_check(&golden(), &z, &c, 96).unwrap();
        assert!(r.residual < 1e-20);
        assert!((r.roots[1] - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn golden_unit_is_a_period() {
        let c = two_log_abs_roots(256);
        let r = alt_period_check(&golden(), &[rat(0), rat(0)], &c, 128).unwrap();
        assert!(r.residual < 2f64.powi(-32), "{}", r.residual);
    }

    #[test]
    fn non_period() {
        let c = vec![Interval::from_int(1, 128), Interval::from_int(0, 128)];
        let r = alt_period_check(&golden(), &[rat(0), rat(0)], &c, 128).unwrap();
        assert!(r.residual > 0.1);
        let c = vec![Interval::from_rational(&ratio(1, 3), 128), Interval::from_rational(&ratio(-7, 5), 128)];
        assert!(alt_period_check(&golden(), &[rat(0), rat(0)], &c, 128).unwrap().residual > 0.1);
    }

    #[test]
    fn complex_roots_rejected() {
        let p = vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)];
        let c = vec![Interval::from_int(0, 64), Interval::from_int(0, 64)];
        assert!(matches!(alt_period_check(&p, &[rat(0), rat(0)], &c, 64), Err(Error::Domain(_))));
        let sq = vec![BigInt::from(1), BigInt::from(-2), BigInt::from(1)];
        assert!(matches!(alt_period_check(&sq, &[rat(0), rat(0)], &c, 64), Err(Error::Domain(_))));
    }

    #[test]
    fn cubic_field() {
        // x³ − 3x + 1 is totally real; θ is a unit (norm −1)
        let p = vec![BigInt::from(1), BigInt::from(-3), BigInt::from(0), BigInt::from(1)];
        let seq = sturm_sequence(&p.iter().cloned().map(BigRational::from_integer).collect::<Vec<_>>());
        let roots = isolate_roots(&p.iter().cloned().map(BigRational::from_integer).collect::<Vec<_>>(), &seq, 200);
        assert_eq!(roots.len(), 3);
        let c: Vec<Interval> = roots
            .iter()
            .map(|(a, b)| {
                let iv = Interval::from_rational_bounds(a, b, 256).abs();
                interval::ln(&iv).unwrap().mul_int(2)
            })
            .collect();
        let r = alt_period_check(&p, &[rat(0), rat(0), rat(0)], &c, 128).unwrap();
        assert!(r.residual < 2f64.powi(-32), "{}", r.residual);
    }
}
