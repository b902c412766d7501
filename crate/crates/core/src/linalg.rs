//! Exact dense linear algebra over `BigInt` and `BigRational`.
//!
//! Matrices are plain `Vec<Vec<_>>` in row-major order. The helpers here are
//! deliberately small: Gaussian elimination for determinants, inverses and
//! ranks, products, transposes, and a few rational bounding utilities used
//! wherever a square root or an n-th root must be bounded soundly.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int_to_rat(m: &[Vec<BigInt>]) -> RatMatrix {
    m.iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect()
}

pub fn identity_int(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn identity_rat(n: usize) -> RatMatrix {
    int_to_rat(&identity_int(n))
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mul_rat(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> RatMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            debug_assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc += x * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mul_int(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() {
                            acc += x * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Row vector times matrix.
pub fn vec_mul_rat(v: &[BigRational], m: &[Vec<BigRational>]) -> Vec<BigRational> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| {
            let mut acc = BigRational::zero();
            for (k, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc += x * &m[k][j];
                }
            }
            acc
        })
        .collect()
}

pub fn dot_rat(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq_rat(a: &[BigRational]) -> BigRational {
    dot_rat(a, a)
}

/// Determinant by fraction-carrying Gaussian elimination.
pub fn det_rat(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: RatMatrix = m.to_vec();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let pivot = a[c][c].clone();
        det *= &pivot;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pivot;
            for j in c..n {
                let t = &f * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    det
}

/// Bareiss fraction-free determinant of an integer matrix.
pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

pub fn rank_rat(m: &[Vec<BigRational>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pivot = a[r][c].clone();
        for i in r + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &pivot;
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        r += 1;
        if r == a.len() {
            break;
        }
    }
    r
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn inverse_rat(m: &[Vec<BigRational>]) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m.to_vec();
    let mut inv = identity_rat(n);
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(p, c);
        inv.swap(p, c);
        let pivot = a[c][c].clone();
        for j in 0..n {
            a[c][j] /= &pivot;
            inv[c][j] /= &pivot;
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..n {
                let t = &f * &a[c][j];
                a[r][j] -= t;
                let t = &f * &inv[c][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

pub fn is_integral(m: &[Vec<BigRational>]) -> bool {
    m.iter().all(|r| r.iter().all(|x| x.is_integer()))
}

pub fn to_int(m: &[Vec<BigRational>]) -> Option<IntMatrix> {
    if !is_integral(m) {
        return None;
    }
    Some(m.iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect())
}

/// Least common multiple of all denominators.
pub fn common_denominator(m: &[Vec<BigRational>]) -> BigInt {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Round half away from zero.
pub fn round_half_away(x: &BigRational) -> BigInt {
    x.round().to_integer()
}

pub fn floor_rat(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_rat(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e as usize
}

pub fn rat_pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(pow2(e as u32))
    } else {
        BigRational::new(BigInt::one(), pow2((-e) as u32))
    }
}

fn ceil_nth_root(n: &BigInt, k: u32) -> BigInt {
    let s = n.nth_root(k);
    if &s.pow(k) < n {
        s + 1
    } else {
        s
    }
}

/// Number of extra scaling bits so that an integer root carries at least
/// `target` significant bits.
fn scale_bits_for(n: &BigInt, k: u32, target: u64) -> u32 {
    let have = n.bits();
    let want = target * k as u64;
    if have >= want {
        0
    } else {
        let extra = want - have;
        // scale by 2^(k*s) so the root gains s bits
        extra.div_ceil(k as u64) as u32
    }
}

/// Rational `u >= sqrt(x)` with relative error at most 2^-64.
pub fn sqrt_upper(x: &BigRational) -> BigRational {
    nth_root_upper(x, 2)
}

/// Rational `l <= sqrt(x)` with relative error at most 2^-64.
pub fn sqrt_lower(x: &BigRational) -> BigRational {
    nth_root_lower(x, 2)
}

/// Rational upper bound on `x^(1/k)` for `x >= 0`, relative error <= 2^-64.
pub fn nth_root_upper(x: &BigRational, k: u32) -> BigRational {
    assert!(!x.is_negative(), "root of negative value");
    if x.is_zero() {
        return BigRational::zero();
    }
    // x^(1/k) = (p q^(k-1))^(1/k) / q
    let p = x.numer();
    let q = x.denom();
    let n = p * q.pow(k - 1);
    let s = scale_bits_for(&n, k, 66);
    let scaled = n << (s as usize * k as usize);
    BigRational::new(ceil_nth_root(&scaled, k), q * pow2(s))
}

/// Rational lower bound on `x^(1/k)` for `x >= 0`, relative error <= 2^-64.
pub fn nth_root_lower(x: &BigRational, k: u32) -> BigRational {
    assert!(!x.is_negative(), "root of negative value");
    if x.is_zero() {
        return BigRational::zero();
    }
    let p = x.numer();
    let q = x.denom();
    let n = p * q.pow(k - 1);
    let s = scale_bits_for(&n, k, 66);
    let scaled = n << (s as usize * k as usize);
    BigRational::new(scaled.nth_root(k), q * pow2(s))
}

/// Smallest integer `e` with `2^e >= x` for positive rational `x`.
pub fn ceil_log2(x: &BigRational) -> i64 {
    assert!(x.is_positive());
    let num_bits = x.numer().bits() as i64;
    let den_bits = x.denom().bits() as i64;
    let mut e = num_bits - den_bits - 1;
    while rat_pow2(e) < *x {
        e += 1;
    }
    while e > i64::MIN + 1 && rat_pow2(e - 1) >= *x {
        e -= 1;
    }
    e
}

/// Lossy conversion for reporting.
pub fn rat_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // very large or very small: go through log2
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * 2f64.powf(log2_abs(x))
}

/// log2 |x| as f64, valid far outside the f64 exponent range.
pub fn log2_abs(x: &BigRational) -> f64 {
    fn log2_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits <= 1000 {
            return n.to_f64().map(|v| v.abs().log2()).unwrap_or(f64::NAN);
        }
        let shift = bits - 64;
        let top = (n.abs() >> shift as usize).to_f64().unwrap();
        top.log2() + shift as f64
    }
    log2_int(x.numer()) - log2_int(x.denom())
}

pub fn abs_int(x: &BigInt) -> BigInt {
    if x.sign() == Sign::Minus {
        -x
    } else {
        x.clone()
    }
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g >= 0.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Best rational approximation of an f64 with denominator 2^bits.
pub fn rat_from_f64(x: f64, bits: u32) -> BigRational {
    let exact = BigRational::from_float(x).expect("finite float");
    let scale = BigRational::from_integer(pow2(bits));
    BigRational::new(round_half_away(&(exact * scale)), pow2(bits))
}

/// Serde adapter storing a rational as a `"p/q"` string.
pub mod rat_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_agree() {
        let m = vec![vec![rat(2), rat(1)], vec![rat(7), rat(4)]];
        assert_eq!(det_rat(&m), rat(1));
        let inv = inverse_rat(&m).unwrap();
        assert_eq!(mul_rat(&m, &inv), identity_rat(2));
        let mi: IntMatrix = vec![
            vec![BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(7), BigInt::from(4)],
        ];
        assert_eq!(det_int(&mi), BigInt::from(1));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert!(inverse_rat(&m).is_none());
        assert_eq!(rank_rat(&m), 1);
    }

    #[test]
    fn root_bounds_bracket() {
        for v in [2i64, 3, 5, 10, 1_000_003] {
            let x = rat(v);
            let up = sqrt_upper(&x);
            let lo = sqrt_lower(&x);
            assert!(&up * &up >= x);
            assert!(&lo * &lo <= x);
            let gap = (&up - &lo) / &lo;
            assert!(gap < rat_pow2(-63));
        }
        let x = ratio(1, 7);
        let up = nth_root_upper(&x, 3);
        assert!(up.pow(3) >= x);
        assert!(nth_root_lower(&x, 3).pow(3) <= x);
    }

    #[test]
    fn ceil_log2_exact() {
        assert_eq!(ceil_log2(&rat(1)), 0);
        assert_eq!(ceil_log2(&rat(8)), 3);
        assert_eq!(ceil_log2(&rat(9)), 4);
        assert_eq!(ceil_log2(&ratio(1, 3)), -1);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_half_away(&ratio(1, 2)), BigInt::from(1));
        assert_eq!(round_half_away(&ratio(-1, 2)), BigInt::from(-1));
        assert_eq!(round_half_away(&ratio(5, 2)), BigInt::from(3));
        assert_eq!(round_half_away(&ratio(-7, 3)), BigInt::from(-2));
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-7/2", "0", "12345678901234567890/7"] {
            let x = parse_rational(s).unwrap();
            assert_eq!(format_rational(&x), s);
        }
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }
}
