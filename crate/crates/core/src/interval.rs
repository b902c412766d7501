//! Outward-rounded interval arithmetic on fixed-point mantissas.
//!
//! An [`Interval`] at precision `p` is `[lo·2^-p, hi·2^-p]`. Every
//! operation rounds the lower end down and the upper end up, so the exact
//! result is always enclosed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{ceil_rat, floor_rat, pow2};

pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn div_floor_pow2(x: &BigInt, p: u32) -> BigInt {
    x >> (p as usize)
}

fn div_ceil_pow2(x: &BigInt, p: u32) -> BigInt {
    -((-x) >> (p as usize))
}

impl Interval {
    pub fn from_mantissas(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi, prec }
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        let v = BigInt::from(n) << (prec as usize);
        Self { lo: v.clone(), hi: v, prec }
    }

    pub fn from_rational(x: &BigRational, prec: u32) -> Self {
        let s = BigRational::from_integer(pow2(prec));
        let y = x * s;
        Self { lo: floor_rat(&y), hi: ceil_rat(&y), prec }
    }

    pub fn from_rational_bounds(lo: &BigRational, hi: &BigRational, prec: u32) -> Self {
        let s = BigRational::from_integer(pow2(prec));
        Self { lo: floor_rat(&(lo * &s)), hi: ceil_rat(&(hi * &s)), prec }
    }

    /// `[-r, r]`.
    pub fn symmetric(r: &BigRational, prec: u32) -> Self {
        let s = BigRational::from_integer(pow2(prec));
        let h = ceil_rat(&(r.abs() * s));
        Self { lo: -h.clone(), hi: h, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(self.lo.clone(), pow2(self.prec))
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(self.hi.clone(), pow2(self.prec))
    }

    pub fn mid(&self) -> BigRational {
        BigRational::new(&self.lo + &self.hi, pow2(self.prec + 1))
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, pow2(self.prec))
    }

    /// `log₂` of the width (−∞ for a point).
    pub fn width_log2(&self) -> f64 {
        let w = &self.hi - &self.lo;
        if w.is_zero() {
            return f64::NEG_INFINITY;
        }
        w.bits() as f64 - self.prec as f64
    }

    pub fn mid_f64(&self) -> f64 {
        crate::linalg::rat_to_f64(&self.mid())
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        if prec >= self.prec {
            let s = (prec - self.prec) as usize;
            Self { lo: &self.lo << s, hi: &self.hi << s, prec }
        } else {
            let d = self.prec - prec;
            Self { lo: div_floor_pow2(&self.lo, d), hi: div_ceil_pow2(&self.hi, d), prec }
        }
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.prec, o.prec, "interval precision mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        Self { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        Self { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, prec: self.prec }
    }

    pub fn neg(&self) -> Self {
        Self { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        if self.lo.is_negative() && self.hi.is_positive() {
            Self { lo: BigInt::zero(), hi: self.hi.clone().max(-&self.lo), prec: self.prec }
        } else if self.hi.is_negative() || (self.hi.is_zero() && self.lo.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mn = c.iter().min().expect("four products");
        let mx = c.iter().max().expect("four products");
        Self { lo: div_floor_pow2(mn, self.prec), hi: div_ceil_pow2(mx, self.prec), prec: self.prec }
    }

    pub fn sqr(&self) -> Self {
        let a = self.abs();
        let lo = div_floor_pow2(&(&a.lo * &a.lo), self.prec);
        let hi = div_ceil_pow2(&(&a.hi * &a.hi), self.prec);
        Self { lo, hi, prec: self.prec }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        Self { lo: a.clone().min(b.clone()), hi: a.max(b), prec: self.prec }
    }

    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0);
        let k = BigInt::from(k);
        let (a, b) = if k.is_positive() { (&self.lo, &self.hi) } else { (&self.hi, &self.lo) };
        Self { lo: a.div_floor(&k), hi: b.div_ceil(&k), prec: self.prec }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::PrecisionEscalation { bits: self.prec });
        }
        let one = pow2(2 * self.prec);
        // 1/[l, h] = [1/h, 1/l] for intervals of one sign
        Ok(Self { lo: one.div_floor(&self.hi), hi: one.div_ceil(&self.lo), prec: self.prec })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    /// Smallest interval containing both.
    pub fn hull(&self, o: &Self) -> Self {
        self.check(o);
        Self { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()), prec: self.prec }
    }

    pub fn widen(&self, r: &BigRational) -> Self {
        self.add(&Self::symmetric(r, self.prec))
    }

    /// Distance from the interval to the nearest integer, as an upper bound.
    pub fn dist_to_integer_upper(&self) -> f64 {
        let m = self.mid();
        let f = &m - BigRational::from_integer(m.round().to_integer());
        crate::linalg::rat_to_f64(&f).abs() + crate::linalg::rat_to_f64(&self.width()) / 2.0
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", crate::linalg::rat_to_f64(&self.lo()), crate::linalg::rat_to_f64(&self.hi()))
    }
}

fn guard(p: u32) -> u32 {
    p + 32
}

/// `atan(1/n)` for integer `n ≥ 2`, by the alternating series.
fn atan_inv(n: i64, w: u32) -> Interval {
    let n2 = n * n;
    let mut term = Interval::from_int(1, w).div_int(n);
    let mut sum = term.clone();
    let eps = Interval::from_mantissas(BigInt::zero(), BigInt::one(), w).hi();
    let mut k = 1i64;
    loop {
        term = term.div_int(n2);
        let t = term.div_int(2 * k + 1);
        if t.hi() <= eps {
            // alternating with decreasing terms: remainder bounded by next term
            return sum.widen(&(t.hi() + &eps));
        }
        sum = if k % 2 == 1 { sum.sub(&t) } else { sum.add(&t) };
        k += 1;
    }
}

/// `π` at precision `p` (Machin's formula).
pub fn pi(p: u32) -> Interval {
    let w = guard(p);
    let v = atan_inv(5, w).mul_int(16).sub(&atan_inv(239, w).mul_int(4));
    v.with_prec(p)
}

/// `ln 2 = 2·atanh(1/3)`.
pub fn ln2(p: u32) -> Interval {
    let w = guard(p);
    atanh_series(&Interval::from_rational(&BigRational::new(1.into(), 3.into()), w), &BigRational::new(1.into(), 3.into()))
        .mul_int(2)
        .with_prec(p)
}

/// `atanh(z)` for `0 ≤ z ≤ zmax < 1`, with an explicit tail bound.
fn atanh_series(z: &Interval, zmax: &BigRational) -> Interval {
    let w = z.prec();
    let z2 = z.sqr();
    let mut pow = z.clone();
    let mut sum = z.clone();
    let eps = BigRational::new(BigInt::one(), pow2(w));
    let zm2 = zmax * zmax;
    let mut zpow = zmax.clone();
    let mut k = 1i64;
    loop {
        pow = pow.mul(&z2);
        zpow = &zpow * &zm2;
        let t = pow.div_int(2 * k + 1);
        sum = sum.add(&t);
        k += 1;
        // tail ≤ zmax^(2k+1) / ((2k+1)(1 − zmax²))
        let tail = &zpow * &zm2 / (BigRational::from_integer((2 * k + 1).into()) * (BigRational::one() - &zm2));
        if tail < eps {
            return sum.widen(&(tail + &eps));
        }
    }
}

/// Natural logarithm of a positive rational point.
pub fn ln_rational(x: &BigRational, p: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("log of non-positive {x}")));
    }
    let w = guard(p);
    // x = 2^e · y with y in [1, 2)
    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scale = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(pow2(e as u32))
        } else {
            BigRational::new(BigInt::one(), pow2((-e) as u32))
        }
    };
    let mut y = x / scale(e);
    while y < BigRational::one() {
        e -= 1;
        y = x / scale(e);
    }
    while y >= BigRational::from_integer(2.into()) {
        e += 1;
        y = x / scale(e);
    }
    let one = BigRational::one();
    let z = (&y - &one) / (&y + &one);
    let lny = atanh_series(&Interval::from_rational(&z, w), &BigRational::new(1.into(), 3.into())).mul_int(2);
    let l2 = ln2(w);
    Ok(l2.mul_int(e).add(&lny).with_prec(p))
}

/// Natural logarithm of a positive interval.
pub fn ln(x: &Interval) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::PrecisionEscalation { bits: x.prec() });
    }
    let p = x.prec();
    let lo = ln_rational(&x.lo(), p)?;
    let hi = ln_rational(&x.hi(), p)?;
    Ok(Interval::from_mantissas(lo.lo, hi.hi, p))
}

fn exp_rational(x: &BigRational, p: u32) -> Interval {
    // halve until |x| ≤ 1/2, Taylor, then square back
    let mut s = 0u32;
    let half = BigRational::new(1.into(), 2.into());
    let mut y = x.clone();
    while y.abs() > half {
        y /= BigRational::from_integer(2.into());
        s += 1;
    }
    let w = guard(p) + s + 8;
    let yi = Interval::from_rational(&y, w);
    let mut term = Interval::from_int(1, w);
    let mut sum = term.clone();
    let eps = BigRational::new(BigInt::one(), pow2(w));
    let mut k = 1i64;
    loop {
        term = term.mul(&yi).div_int(k);
        sum = sum.add(&term);
        k += 1;
        // |tail| ≤ 2·|term|·|y|/k for |y| ≤ 1/2
        let bound = term.abs().hi() * &half;
        if bound < eps {
            sum = sum.widen(&(bound * BigRational::from_integer(2.into()) + &eps));
            break;
        }
    }
    for _ in 0..s {
        sum = sum.sqr();
    }
    sum.with_prec(p)
}

/// `e^x` for an interval `x` (monotone in both ends).
pub fn exp(x: &Interval) -> Interval {
    let p = x.prec();
    let lo = exp_rational(&x.lo(), p);
    let hi = exp_rational(&x.hi(), p);
    Interval::from_mantissas(lo.lo, hi.hi, p)
}

/// `sin(π t)` for rational `t`, reduced exactly to `t ∈ [0, 1/2]` first.
pub fn sin_pi(t: &BigRational, p: u32) -> Interval {
    let two = BigRational::from_integer(2.into());
    let mut t = t - &two * BigRational::from_integer((t / &two).floor().to_integer());
    let mut sign = 1i64;
    if t >= BigRational::one() {
        t -= BigRational::one();
        sign = -1;
    }
    let half = BigRational::new(1.into(), 2.into());
    if t > half {
        t = BigRational::one() - t;
    }
    if t.is_zero() {
        return Interval::from_int(0, p);
    }
    let w = guard(p);
    let x = pi(w).mul(&Interval::from_rational(&t, w));
    // Taylor with |x| ≤ π/2 < 2
    let x2 = x.sqr();
    let mut term = x.clone();
    let mut sum = x.clone();
    let eps = BigRational::new(BigInt::one(), pow2(w));
    let mut k = 1i64;
    loop {
        term = term.mul(&x2).div_int((2 * k) * (2 * k + 1));
        let tail = term.abs().hi();
        if tail <= eps {
            sum = sum.widen(&(tail + &eps));
            break;
        }
        sum = if k % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        k += 1;
    }
    let r = sum.with_prec(p);
    if sign < 0 {
        r.neg()
    } else {
        r
    }
}

/// `cos(π t) = sin(π (t + 1/2))`.
pub fn cos_pi(t: &BigRational, p: u32) -> Interval {
    sin_pi(&(t + BigRational::new(1.into(), 2.into())), p)
}

/// Square interval matrix.
pub type IntervalMatrix = Vec<Vec<Interval>>;

fn pivot_row(a: &IntervalMatrix, c: usize) -> Option<usize> {
    (c..a.len())
        .filter(|&r| !a[r][c].contains_zero())
        .max_by(|&i, &j| a[i][c].abs().lo().cmp(&a[j][c].abs().lo()))
}

/// Gaussian elimination. Fails with a precision-escalation signal when no
/// pivot can be certified nonzero.
pub fn solve(a: &IntervalMatrix, b: &[Interval]) -> Result<Vec<Interval>> {
    let n = a.len();
    let prec = b.first().map_or(DEFAULT_PRECISION, Interval::prec);
    let mut m: IntervalMatrix = a.to_vec();
    let mut rhs = b.to_vec();
    for c in 0..n {
        let p = pivot_row(&m, c).ok_or(Error::PrecisionEscalation { bits: prec })?;
        m.swap(p, c);
        rhs.swap(p, c);
        let inv = m[c][c].recip()?;
        for r in c + 1..n {
            let f = m[r][c].mul(&inv);
            for j in c..n {
                let t = f.mul(&m[c][j]);
                m[r][j] = m[r][j].sub(&t);
            }
            let t = f.mul(&rhs[c]);
            rhs[r] = rhs[r].sub(&t);
        }
    }
    let mut x = vec![Interval::from_int(0, prec); n];
    for c in (0..n).rev() {
        let mut s = rhs[c].clone();
        for j in c + 1..n {
            s = s.sub(&m[c][j].mul(&x[j]));
        }
        x[c] = s.div(&m[c][c])?;
    }
    Ok(x)
}

/// Determinant enclosure. Returns an interval containing zero when the
/// elimination cannot certify the pivots.
pub fn det(a: &IntervalMatrix) -> Interval {
    let n = a.len();
    let prec = a.first().and_then(|r| r.first()).map_or(DEFAULT_PRECISION, Interval::prec);
    let mut m = a.to_vec();
    let mut d = Interval::from_int(1, prec);
    for c in 0..n {
        let Some(p) = pivot_row(&m, c) else {
            // remaining columns unresolved: bound by Hadamard is overkill; signal uncertainty
            let big = BigRational::from_integer(pow2(64));
            return Interval::symmetric(&big, prec);
        };
        if p != c {
            m.swap(p, c);
            d = d.neg();
        }
        d = d.mul(&m[c][c]);
        let inv = match m[c][c].recip() {
            Ok(v) => v,
            Err(_) => return Interval::symmetric(&BigRational::from_integer(pow2(64)), prec),
        };
        for r in c + 1..n {
            let f = m[r][c].mul(&inv);
            for j in c..n {
                let t = f.mul(&m[c][j]);
                m[r][j] = m[r][j].sub(&t);
            }
        }
    }
    d
}

/// Retry `f` at doubled precision while it signals escalation.
pub fn with_escalation<T>(start: u32, max: u32, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let mut p = start;
    loop {
        match f(p) {
            Err(Error::PrecisionEscalation { .. }) if p < max => p = (p * 2).min(max),
            other => return other,
        }
    }
}

pub fn to_f64(x: &Interval) -> f64 {
    x.mid().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio};

    fn close(x: &Interval, v: f64, tol: f64) -> bool {
        (x.mid_f64() - v).abs() < tol
    }

    #[test]
    fn pi_digits() {
        let p = pi(200);
        assert!(p.width_log2() < -190.0);
        // 3.14159265358979323846264338327950288...
        let lo = crate::linalg::parse_rational("314159265358979323846264338327950288/100000000000000000000000000000000000").unwrap();
        let hi = crate::linalg::parse_rational("314159265358979323846264338327950289/100000000000000000000000000000000000").unwrap();
        assert!(p.lo() >= lo && p.hi() <= hi);
    }

    #[test]
    fn logs_and_exps() {
        let l2 = ln2(128);
        assert!(close(&l2, std::f64::consts::LN_2, 1e-15));
        let l10 = ln_rational(&rat(10), 128).unwrap();
        assert!(close(&l10, std::f64::consts::LN_10, 1e-14));
        assert!(l10.width_log2() < -120.0);
        let e = exp(&Interval::from_int(1, 128));
        assert!(close(&e, std::f64::consts::E, 1e-15));
        let back = ln(&exp(&Interval::from_rational(&ratio(7, 3), 128))).unwrap();
        assert!(back.contains(&ratio(7, 3)) || (back.mid() - ratio(7, 3)).abs() < ratio(1, 1 << 60));
        assert!(ln_rational(&rat(0), 64).is_err());
    }

    #[test]
    fn sines() {
        assert!(close(&sin_pi(&ratio(1, 6), 128), 0.5, 1e-15));
        assert!(sin_pi(&ratio(1, 6), 128).contains(&ratio(1, 2)));
        assert!(close(&sin_pi(&ratio(7, 6), 128), -0.5, 1e-15));
        assert!(close(&cos_pi(&ratio(1, 3), 128), 0.5, 1e-15));
        assert!(close(&sin_pi(&ratio(2, 5), 128), (2.0 * std::f64::consts::PI / 5.0).sin(), 1e-15));
        assert_eq!(sin_pi(&rat(3), 64), Interval::from_int(0, 64));
    }

    #[test]
    fn doubling_precision_nests() {
        let a = ln_rational(&ratio(5, 7), 64).unwrap();
        let b = ln_rational(&ratio(5, 7), 128).unwrap();
        assert!(b.lo() >= a.lo() && b.hi() <= a.hi());
        assert!(b.width() < a.width());
    }

    #[test]
    fn linear_solve_and_det() {
        let p = 96;
        let a: IntervalMatrix = vec![
            vec![Interval::from_int(2, p), Interval::from_int(1, p)],
            vec![Interval::from_int(1, p), Interval::from_int(3, p)],
        ];
        let x = solve(&a, &[Interval::from_int(3, p), Interval::from_int(5, p)]).unwrap();
        assert!(x[0].contains(&ratio(4, 5)) && x[1].contains(&ratio(7, 5)));
        assert!(det(&a).contains(&rat(5)));
        let sing: IntervalMatrix = vec![
            vec![Interval::from_int(1, p), Interval::from_int(2, p)],
            vec![Interval::from_int(2, p), Interval::from_int(4, p)],
        ];
        assert!(matches!(solve(&sing, &[Interval::from_int(1, p), Interval::from_int(1, p)]), Err(Error::PrecisionEscalation { .. })));
        assert!(det(&sing).contains_zero());
    }

    #[test]
    fn escalation_retries() {
        let mut seen = vec![];
        let r = with_escalation(32, 256, |p| {
            seen.push(p);
            if p < 128 {
                Err(Error::PrecisionEscalation { bits: p })
            } else {
                Ok(p)
            }
        });
        assert_eq!(r.unwrap(), 128);
        assert_eq!(seen, vec![32, 64, 128]);
    }
}
