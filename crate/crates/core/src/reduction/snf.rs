//! Smith normal form `U · A · V = S` with tracked unimodular `U`, `V`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::linalg::{identity_int, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Diagonal entries `d_1 | d_2 | …`, including trailing zeros.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.len().min(self.s.first().map_or(0, |r| r.len()));
        (0..k).map(|i| self.s[i][i].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// Product of the nonzero invariant factors.
    pub fn det_abs(&self) -> BigInt {
        self.diagonal().iter().filter(|d| !d.is_zero()).fold(BigInt::from(1), |a, d| a * d)
    }
}

fn add_row(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let s = a[src].clone();
    for (x, y) in a[dst].iter_mut().zip(&s) {
        *x += q * y;
    }
}

fn add_col(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for r in a.iter_mut() {
        let t = q * &r[src];
        r[dst] += t;
    }
}

fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
    for r in a.iter_mut() {
        r.swap(i, j);
    }
}

pub fn snf(a: &[Vec<BigInt>]) -> SnfResult {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    let mut s = a.to_vec();
    let mut u = identity_int(n);
    let mut v = identity_int(m);
    for t in 0..n.min(m) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..m {
                    if !s[i][j].is_zero() && best.is_none_or(|(bi, bj)| s[i][j].abs() < s[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(s, u, v);
            };
            s.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut s, t, pj);
            swap_cols(&mut v, t, pj);

            let mut clean = true;
            for i in t + 1..n {
                let q = -s[i][t].div_floor(&s[t][t]);
                add_row(&mut s, i, t, &q);
                add_row(&mut u, i, t, &q);
                clean &= s[i][t].is_zero();
            }
            for j in t + 1..m {
                let q = -s[t][j].div_floor(&s[t][t]);
                add_col(&mut s, j, t, &q);
                add_col(&mut v, j, t, &q);
                clean &= s[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..n).find(|&i| (t + 1..m).any(|j| !s[i][j].mod_floor(&s[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    let one = BigInt::from(1);
                    add_row(&mut s, t, i, &one);
                    add_row(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if s[t][t].is_negative() {
            for x in s[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    finish(s, u, v)
}

fn finish(s: IntMatrix, u: IntMatrix, v: IntMatrix) -> SnfResult {
    SnfResult { s, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det_int, mul_int};
    use crate::reduction::lll::is_unimodular_int;
    use proptest::prelude::*;

    fn ints(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn check(a: &IntMatrix) -> SnfResult {
        let r = snf(a);
        assert_eq!(mul_int(&mul_int(&r.u, a), &r.v), r.s);
        assert!(is_unimodular_int(&r.u));
        assert!(is_unimodular_int(&r.v));
        for (i, row) in r.s.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!(i == j || x.is_zero());
            }
        }
        let d = r.diagonal();
        for w in d.windows(2) {
            assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
        assert!(d.iter().all(|x| !x.is_negative()));
        r
    }

    #[test]
    fn examples() {
        assert_eq!(check(&ints(&[&[2, 0], &[0, 3]])).diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
        assert_eq!(check(&ints(&[&[1, 0], &[0, 1]])).diagonal(), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(check(&ints(&[&[2, 0], &[0, 2]])).diagonal(), vec![BigInt::from(2), BigInt::from(2)]);
        let z = check(&ints(&[&[0, 0], &[0, 0], &[0, 0]]));
        assert_eq!(z.rank(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn snf_contract(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-25i64..25, 36)) {
            let a: IntMatrix = (0..rows).map(|i| (0..cols).map(|j| BigInt::from(seed[i * 6 + j])).collect()).collect();
            let r = check(&a);
            if rows == cols {
                prop_assert_eq!(r.det_abs() * BigInt::from(if r.rank() == rows { 1 } else { 0 }), det_int(&a).abs());
            }
        }
    }
}
