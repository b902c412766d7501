//! Row-style Hermite normal form with transformation matrix.
//!
//! `H` is upper triangular in echelon form: nonzero rows first, each pivot
//! positive and strictly right of the previous one, entries above a pivot
//! reduced into `[0, pivot)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::lattice::BasisMatrix;
use crate::linalg::{self, ext_gcd, identity_int, IntMatrix, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnfResult {
    /// Same shape as the input, zero rows last.
    pub h: IntMatrix,
    /// Unimodular with `U · A = H`.
    pub u: IntMatrix,
    pub rank: usize,
}

impl HnfResult {
    pub fn basis(&self) -> IntMatrix {
        self.h[..self.rank].to_vec()
    }
}

fn row_sub(a: &mut [Vec<BigInt>], i: usize, r: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (src, dst) = if i < r {
        let (lo, hi) = a.split_at_mut(r);
        (&hi[0], &mut lo[i])
    } else {
        let (lo, hi) = a.split_at_mut(i);
        (&lo[r], &mut hi[0])
    };
    for (x, y) in dst.iter_mut().zip(src) {
        *x -= q * y;
    }
}

fn row_neg(a: &mut [Vec<BigInt>], i: usize) {
    for x in a[i].iter_mut() {
        *x = -&*x;
    }
}

fn reduce_above(h: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], pivots: &[(usize, usize)]) {
    for &(r, c) in pivots {
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            row_sub(h, i, r, &q);
            row_sub(u, i, r, &q);
        }
    }
}

/// HNF of any integer matrix, by Euclidean row elimination.
pub fn hnf(a: &[Vec<BigInt>]) -> HnfResult {
    let n = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut h = a.to_vec();
    let mut u = identity_int(n);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == n {
            break;
        }
        while let Some(p) = (r..n).filter(|&i| !h[i][c].is_zero()).min_by_key(|&i| h[i][c].abs()) {
            h.swap(p, r);
            u.swap(p, r);
            let mut done = true;
            for i in r + 1..n {
                if h[i][c].is_zero() {
                    continue;
                }
                let q = h[i][c].div_floor(&h[r][c]);
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
                if !h[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            row_neg(&mut h, r);
            row_neg(&mut u, r);
        }
        pivots.push((r, c));
        r += 1;
    }
    reduce_above(&mut h, &mut u, &pivots);
    HnfResult { h, u, rank: r }
}

/// HNF of a square nonsingular matrix, working modulo the determinant so
/// intermediate entries stay below `|det A|`. `U` is recovered as `H A⁻¹`.
pub fn hnf_modular(a: &[Vec<BigInt>]) -> Option<HnfResult> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return None;
    }
    let det = linalg::det_int(a);
    if det.is_zero() {
        return None;
    }
    let mut rmod = det.abs();
    let mut w: IntMatrix = a.iter().map(|r| r.iter().map(|x| x.mod_floor(&rmod)).collect()).collect();
    let mut h = vec![vec![BigInt::zero(); n]; n];
    for c in 0..n {
        // Euclid down column c on rows c..n, modulo R.
        for i in c + 1..n {
            if w[i][c].is_zero() {
                continue;
            }
            let (g, x, y) = ext_gcd(&w[c][c], &w[i][c]);
            let s = &w[c][c] / &g;
            let t = &w[i][c] / &g;
            let (lo, hi) = w.split_at_mut(i);
            let (rc, ri) = (&mut lo[c], &mut hi[0]);
            for j in c..n {
                let nc = (&x * &rc[j] + &y * &ri[j]).mod_floor(&rmod);
                let ni = (&s * &ri[j] - &t * &rc[j]).mod_floor(&rmod);
                rc[j] = nc;
                ri[j] = ni;
            }
        }
        let (d, uu, _) = ext_gcd(&w[c][c], &rmod);
        let mut row: Vec<BigInt> = w[c].iter().map(|x| (&uu * x).mod_floor(&rmod)).collect();
        row[c] = d.clone();
        if row[c].is_zero() {
            row[c] = rmod.clone();
        }
        h[c] = row;
        let next = &rmod / &d;
        for i in c + 1..n {
            for j in c + 1..n {
                w[i][j] = w[i][j].mod_floor(&next);
            }
        }
        for j in c + 1..n {
            w[c][j] = BigInt::zero();
        }
        rmod = next;
        if rmod.is_one() {
            for (k, hk) in h.iter_mut().enumerate().skip(c + 1) {
                for (j, x) in hk.iter_mut().enumerate() {
                    *x = if j == k { BigInt::one() } else { BigInt::zero() };
                }
            }
            break;
        }
    }
    // Rows hold exact pivots but the off-diagonal parts are only correct
    // modulo the remaining determinant; a final exact reduction fixes them.
    for c in 0..n {
        for j in 0..c {
            h[c][j] = BigInt::zero();
        }
    }
    let mut dummy = identity_int(n);
    let pivots: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    reduce_above(&mut h, &mut dummy, &pivots);
    let ainv = linalg::inverse_rat(&linalg::int_to_rat(a))?;
    let u = linalg::to_int(&linalg::mul_rat(&linalg::int_to_rat(&h), &ainv))?;
    Some(HnfResult { h, u, rank: n })
}

/// Nonzero rows of the HNF: a canonical basis of the row lattice.
pub fn hnf_basis(a: &[Vec<BigInt>]) -> IntMatrix {
    hnf(a).basis()
}

/// Canonical basis of the lattice spanned by rational rows: clear
/// denominators, take the HNF, divide back.
pub fn canonical_hnf(rows: &[Vec<BigRational>]) -> RatMatrix {
    let d = linalg::common_denominator(rows);
    let dr = BigRational::from_integer(d.clone());
    let scaled: IntMatrix = rows.iter().map(|r| r.iter().map(|x| (x * &dr).to_integer()).collect()).collect();
    hnf_basis(&scaled)
        .iter()
        .map(|r| r.iter().map(|x| BigRational::new(x.clone(), d.clone())).collect())
        .collect()
}

pub fn same_lattice_hnf(a: &BasisMatrix, b: &BasisMatrix) -> bool {
    canonical_hnf(a.rows()) == canonical_hnf(b.rows())
}

/// `true` iff `h` already satisfies the HNF shape conditions.
pub fn is_hnf(h: &[Vec<BigInt>]) -> bool {
    let mut last: Option<usize> = None;
    let mut seen_zero = false;
    let mut pivots = Vec::new();
    for (i, r) in h.iter().enumerate() {
        match r.iter().position(|x| !x.is_zero()) {
            None => seen_zero = true,
            Some(p) => {
                if seen_zero || last.is_some_and(|l| p <= l) || !r[p].is_positive() {
                    return false;
                }
                last = Some(p);
                pivots.push((i, p));
            }
        }
    }
    pivots.iter().all(|&(r, c)| (0..r).all(|i| !h[i][c].is_negative() && h[i][c] < h[r][c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mul_int;
    use crate::reduction::lll::is_unimodular_int;
    use proptest::prelude::*;

    fn ints(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn diagonal_is_fixed() {
        let a = ints(&[&[2, 0], &[0, 3]]);
        let r = hnf(&a);
        assert_eq!(r.h, a);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn overcomplete_generators() {
        // (2,0), (0,3), (1,1) generate ℤ²: (1,1)·3 − (0,3) − (2,0) = (1,0).
        let a = ints(&[&[2, 0], &[0, 3], &[1, 1]]);
        let r = hnf(&a);
        assert_eq!(r.basis(), ints(&[&[1, 0], &[0, 1]]));
        assert_eq!(r.h[2], vec![BigInt::zero(), BigInt::zero()]);
        assert_eq!(mul_int(&r.u, &a), r.h);
        assert!(is_unimodular_int(&r.u));
        // mutual containment: each basis row in the span of the generators and back
        let b = BasisMatrix::from_integers(&r.basis()).unwrap();
        for row in &a {
            let x = b.coordinates(&row.iter().map(|v| BigRational::from_integer(v.clone())).collect::<Vec<_>>());
            assert!(x.iter().all(|v| v.is_integer()));
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let a = ints(&[&[0, 0], &[0, 0]]);
        let r = hnf(&a);
        assert_eq!(r.rank, 0);
        assert!(r.basis().is_empty());
    }

    #[test]
    fn modular_matches_naive_on_example() {
        let a = ints(&[&[4, 6, 2], &[3, -1, 7], &[0, 5, 5]]);
        let m = hnf_modular(&a).unwrap();
        assert_eq!(m.h, hnf(&a).h);
        assert_eq!(mul_int(&m.u, &a), m.h);
    }

    fn mat(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(proptest::collection::vec(-30i64..30, cols), rows)
            .prop_map(|v| v.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hnf_contract(a in (1usize..7, 1usize..5).prop_flat_map(|(r, c)| mat(r, c))) {
            let r = hnf(&a);
            prop_assert!(is_hnf(&r.h));
            prop_assert_eq!(mul_int(&r.u, &a), r.h.clone());
            prop_assert!(is_unimodular_int(&r.u));
            prop_assert_eq!(hnf(&r.h).h, r.h.clone());
        }

        #[test]
        fn modular_agrees_with_naive(a in (1usize..6).prop_flat_map(|n| mat(n, n))) {
            prop_assume!(!linalg::det_int(&a).is_zero());
            let m = hnf_modular(&a).unwrap();
            prop_assert_eq!(&m.h, &hnf(&a).h);
            prop_assert_eq!(mul_int(&m.u, &a), m.h.clone());
            prop_assert!(is_unimodular_int(&m.u));
        }
    }
}
