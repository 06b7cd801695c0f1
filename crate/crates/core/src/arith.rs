//! Exact integer and rational linear algebra used throughout the crate.
//!
//! Matrices are plain `Vec<Vec<_>>` in row-major order. All routines are
//! exact; rational matrices are reduced to integer ones by clearing
//! denominators row by row before fraction-free elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Greatest common divisor of a sequence of integers (non-negative, zero for
/// an empty sequence).
pub fn gcd_all<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigInt>,
{
    let mut g = BigInt::zero();
    for v in values {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Least common multiple of a sequence of integers (one for an empty sequence).
pub fn lcm_all<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a BigInt>,
{
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v))
}

/// Divides a nonzero integer vector by the gcd of its entries.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = gcd_all(v);
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// True when the vector is nonzero and its entries have gcd one.
pub fn is_primitive(v: &[BigInt]) -> bool {
    gcd_all(v).is_one()
}

/// Scales a rational row to a primitive integer row with the same span.
pub fn clear_denominators(row: &[BigRational]) -> Vec<BigInt> {
    let l = lcm_all(row.iter().map(|x| x.denom()));
    let ints: Vec<BigInt> = row.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    primitive(&ints)
}

/// Determinant of a square integer matrix by Bareiss fraction-free elimination.
pub fn det_int(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Determinant of a square rational matrix.
pub fn det_rational(m: &[Vec<BigRational>]) -> BigRational {
    let mut scale = BigInt::one();
    let mut rows = Vec::with_capacity(m.len());
    for row in m {
        let l = lcm_all(row.iter().map(|x| x.denom()));
        rows.push(row.iter().map(|x| x.numer() * (&l / x.denom())).collect());
        scale *= l;
    }
    BigRational::new(det_int(rows), scale)
}

/// Rank of an integer matrix (rows may be modified freely).
pub fn rank_int(mut rows: Vec<Vec<BigInt>>) -> usize {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let a = pivot_row[col].clone();
            let b = row[col].clone();
            for j in col..ncols {
                row[j] = &row[j] * &a - &pivot_row[j] * &b;
            }
            let g = gcd_all(row.iter());
            if !g.is_zero() && !g.is_one() {
                for x in row.iter_mut() {
                    *x /= &g;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of a rational matrix.
pub fn rank_rational(rows: &[Vec<BigRational>]) -> usize {
    rank_int(rows.iter().map(|r| clear_denominators(r)).collect())
}

/// Reduced row echelon form over the rationals. Returns the reduced rows
/// (zero rows dropped) and the pivot column of each.
pub fn rref(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Solves the square system `a x = b` exactly; `None` when `a` is singular.
pub fn solve_square(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (red, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n].clone()).collect())
}

/// A basis of the right kernel `{x : m x = 0}` of a rational matrix with
/// `ncols` columns.
pub fn kernel_rational(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let (red, pivots) = rref(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); ncols];
            x[f] = BigRational::one();
            for (row, &p) in red.iter().zip(&pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect()
}

/// True when `target` lies in the row space of `rows`.
pub fn in_row_space(rows: &[Vec<BigInt>], target: &[BigInt]) -> bool {
    if target.iter().all(Zero::is_zero) {
        return true;
    }
    let base = rank_int(rows.to_vec());
    let mut with = rows.to_vec();
    with.push(target.to_vec());
    rank_int(with) == base
}

/// Extended gcd coefficients: integers `x` with `sum x_i v_i = gcd(v)`.
pub fn bezout(v: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero(); v.len()];
    for (i, a) in v.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let e = g.extended_gcd(a);
        // e.gcd = e.x * g + e.y * a
        for c in coeffs.iter_mut().take(i) {
            *c *= &e.x;
        }
        coeffs[i] = e.y.clone();
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -c.clone();
        }
    }
    (g, coeffs)
}

/// Converts an exact rational to the nearest `f64`.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Finds a rational with small denominator within `tol` of `x`, if one exists
/// with denominator at most `max_den`.
pub fn rational_approximation(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e18 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol * x.abs().max(1.0) {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn determinants() {
        let m = vec![ints(&[2, 1, 0]), ints(&[1, 3, 1]), ints(&[0, 1, 4])];
        assert_eq!(det_int(m), BigInt::from(18));
        let m = vec![ints(&[0, 1]), ints(&[1, 0])];
        assert_eq!(det_int(m), BigInt::from(-1));
        let r = vec![
            vec![BigRational::new(1.into(), 2.into()), q(1)],
            vec![q(1), q(4)],
        ];
        assert_eq!(det_rational(&r), q(1));
    }

    #[test]
    fn ranks_and_kernels() {
        let rows = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        assert_eq!(rank_rational(&rows), 1);
        let k = kernel_rational(&rows, 3);
        assert_eq!(k.len(), 2);
        for x in k {
            let dot: BigRational = rows[0].iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn square_solve() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        let x = solve_square(&a, &[q(3), q(1)]).unwrap();
        assert_eq!(x, vec![q(2), q(1)]);
        let s = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        assert!(solve_square(&s, &[q(1), q(1)]).is_none());
    }

    #[test]
    fn bezout_identity() {
        let v = ints(&[147, 98, 60, 84, 210]);
        let (g, c) = bezout(&v);
        assert_eq!(g, BigInt::from(1));
        let s: BigInt = v.iter().zip(&c).map(|(a, b)| a * b).sum();
        assert_eq!(s, g);
    }

    #[test]
    fn approximations() {
        assert_eq!(rational_approximation(-2187.0, 1000, 1e-12), Some(q(-2187)));
        assert_eq!(
            rational_approximation(0.5, 1000, 1e-12),
            Some(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(rational_approximation(std::f64::consts::PI, 100, 1e-12), None);
    }
}
