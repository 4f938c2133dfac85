//! Orientation predicates with a floating-point filter, exact big-integer
//! fallback and index-based symbolic perturbation for exact zeros.
//!
//! `orient(p_1..p_d; q)` is the sign of `det[p_i - q]`. Coordinates are
//! finite `f64`, hence dyadic rationals; the exact path scales them to a
//! common power of two and evaluates the determinant over `BigInt`.
//!
//! Exact zeros are broken by perturbing point `i` to `p_i + eps * m(i + 1)`
//! where `m(t) = (t, t^2, ..., t^d)` is the moment curve. The perturbed
//! determinant is a polynomial in `eps` whose top coefficient is a
//! Vandermonde determinant, so the lowest-order nonzero coefficient always
//! exists and its sign is the answer.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::points::PointSet;

/// Largest dimension the predicates support.
pub const MAX_DIM: usize = 6;

const UNIT_ROUNDOFF: f64 = f64::EPSILON * 0.5;

type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// Determinant and permanent of |m| for the leading `d x d` block.
fn det_perm(m: &Mat, d: usize) -> (f64, f64) {
    match d {
        1 => (m[0][0], m[0][0].abs()),
        2 => {
            let a = m[0][0] * m[1][1];
            let b = m[0][1] * m[1][0];
            (a - b, a.abs() + b.abs())
        }
        3 => {
            let (m0, m1, m2) = (&m[0], &m[1], &m[2]);
            let c0 = m1[1] * m2[2] - m1[2] * m2[1];
            let c1 = m1[0] * m2[2] - m1[2] * m2[0];
            let c2 = m1[0] * m2[1] - m1[1] * m2[0];
            let p0 = (m1[1] * m2[2]).abs() + (m1[2] * m2[1]).abs();
            let p1 = (m1[0] * m2[2]).abs() + (m1[2] * m2[0]).abs();
            let p2 = (m1[0] * m2[1]).abs() + (m1[1] * m2[0]).abs();
            (
                m0[0] * c0 - m0[1] * c1 + m0[2] * c2,
                m0[0].abs() * p0 + m0[1].abs() * p1 + m0[2].abs() * p2,
            )
        }
        _ => laplace(m, d, 0, (1u32 << d) - 1),
    }
}

fn laplace(m: &Mat, d: usize, row: usize, cols: u32) -> (f64, f64) {
    if row + 1 == d {
        let c = cols.trailing_zeros() as usize;
        return (m[row][c], m[row][c].abs());
    }
    let mut det = 0.0;
    let mut perm = 0.0;
    let mut sign = 1.0;
    let mut rest = cols;
    while rest != 0 {
        let c = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let (sd, sp) = laplace(m, d, row + 1, cols & !(1 << c));
        det += sign * m[row][c] * sd;
        perm += m[row][c].abs() * sp;
        sign = -sign;
    }
    (det, perm)
}

/// Floating-point orientation; `None` when the result is within the error bound.
#[inline]
pub fn orient_filtered(rows: &[&[f64]], q: &[f64]) -> Option<i8> {
    let d = q.len();
    debug_assert_eq!(rows.len(), d);
    let mut m: Mat = [[0.0; MAX_DIM]; MAX_DIM];
    for (i, r) in rows.iter().enumerate() {
        for j in 0..d {
            m[i][j] = r[j] - q[j];
        }
    }
    let (det, perm) = det_perm(&m, d);
    let bound = (4 * d + 2) as f64 * UNIT_ROUNDOFF * perm * (1.0 + 1e-10);
    if perm < 1e-280 || !det.is_finite() {
        return None;
    }
    if det > bound {
        Some(1)
    } else if det < -bound {
        Some(-1)
    } else {
        None
    }
}

/// Exact sign of `det[p_i - q]`; may be zero.
pub fn orient_exact(rows: &[&[f64]], q: &[f64]) -> i8 {
    if let Some(s) = orient_filtered(rows, q) {
        return s;
    }
    let (mat, _) = scaled_difference_matrix(rows, q);
    sign_of(&bareiss_det(mat))
}

/// Orientation of `q` against the ordered simplex `simplex` with symbolic
/// perturbation; never returns zero for distinct indices.
pub fn orient(points: &PointSet, simplex: &[usize], q: usize) -> i8 {
    let d = points.dim();
    debug_assert_eq!(simplex.len(), d);
    let mut rows: [&[f64]; MAX_DIM] = [&[]; MAX_DIM];
    for (slot, &i) in rows.iter_mut().zip(simplex) {
        *slot = points.point(i);
    }
    let qp = points.point(q);
    if let Some(s) = orient_filtered(&rows[..d], qp) {
        return s;
    }
    let (mat, _) = scaled_difference_matrix(&rows[..d], qp);
    let s = sign_of(&bareiss_det(mat.clone()));
    if s != 0 {
        return s;
    }
    perturbed_sign(mat, simplex, q, d)
}

fn sign_of(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Splits a finite double into `(mantissa, exponent)` with `x = m * 2^e`.
fn decompose(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp_bits - 1075)
    };
    (sign * m, e)
}

/// The matrix `S * (p_i - q)` over the integers, with `S` a power of two.
fn scaled_difference_matrix(rows: &[&[f64]], q: &[f64]) -> (Vec<Vec<BigInt>>, i32) {
    let mut e_min = i32::MAX;
    for v in rows.iter().flat_map(|r| r.iter()).chain(q.iter()) {
        assert!(v.is_finite(), "non-finite coordinate in predicate");
        if *v != 0.0 {
            e_min = e_min.min(decompose(*v).1);
        }
    }
    if e_min == i32::MAX {
        e_min = 0;
    }
    let to_int = |x: f64| -> BigInt {
        let (m, e) = decompose(x);
        BigInt::from(m) << ((e - e_min).max(0) as usize)
    };
    let qi: Vec<BigInt> = q.iter().map(|&x| to_int(x)).collect();
    let mat = rows
        .iter()
        .map(|r| r.iter().zip(&qi).map(|(&x, qv)| to_int(x) - qv).collect())
        .collect();
    (mat, e_min)
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

fn moment(t: u64, d: usize) -> Vec<BigInt> {
    let t = BigInt::from(t);
    let mut out = Vec::with_capacity(d);
    let mut acc = t.clone();
    for _ in 0..d {
        out.push(acc.clone());
        acc *= &t;
    }
    out
}

fn perturbed_sign(base: Vec<Vec<BigInt>>, simplex: &[usize], q: usize, d: usize) -> i8 {
    let mq = moment(q as u64 + 1, d);
    let dirs: Vec<Vec<BigInt>> = simplex
        .iter()
        .map(|&i| moment(i as u64 + 1, d).into_iter().zip(&mq).map(|(a, b)| a - b).collect())
        .collect();
    // D(e) = det(base + e * dirs) has degree <= d; sample at e = 0..=d.
    let values: Vec<BigRational> = (0..=d)
        .map(|e| {
            let e = BigInt::from(e as u64);
            let m: Vec<Vec<BigInt>> = base
                .iter()
                .zip(&dirs)
                .map(|(row, dir)| row.iter().zip(dir).map(|(a, b)| a + &e * b).collect())
                .collect();
            BigRational::from_integer(bareiss_det(m))
        })
        .collect();
    let coeffs = interpolate(&values);
    for c in coeffs.iter().skip(1) {
        if !c.is_zero() {
            return if c.is_positive() { 1 } else { -1 };
        }
    }
    unreachable!("moment-curve perturbation has a nonzero leading coefficient")
}

/// Monomial coefficients of the polynomial through `(k, values[k])`.
fn interpolate(values: &[BigRational]) -> Vec<BigRational> {
    let n = values.len();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|k| {
            let x = BigRational::from_integer(BigInt::from(k as u64));
            let mut row = Vec::with_capacity(n + 1);
            let mut p = BigRational::one();
            for _ in 0..n {
                row.push(p.clone());
                p = &p * &x;
            }
            row.push(values[k].clone());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("Vandermonde is invertible");
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..=n {
            a[col][j] = &a[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=n {
                    let v = &a[col][j] * &f;
                    a[r][j] = &a[r][j] - v;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

/// Exact affine rank of a point set (over the rationals).
pub fn affine_rank(points: &PointSet, indices: &[usize]) -> usize {
    let d = points.dim();
    if indices.len() <= d + 1 {
        return affine_rank_exact(points, indices);
    }
    // Greedily collect points with a clearly nonzero float residual, certify
    // them exactly, and only fall back to full elimination when the greedy
    // pass does not reach full rank.
    let base = points.point(indices[0]);
    let scale = indices.iter().flat_map(|&i| points.point(i)).fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut chosen = vec![indices[0]];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut r = vec![0.0; d];
    for &i in &indices[1..] {
        for ((rj, a), b) in r.iter_mut().zip(points.point(i)).zip(base) {
            *rj = a - b;
        }
        for b in &basis {
            let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (rj, bj) in r.iter_mut().zip(b) {
                *rj -= c * bj;
            }
        }
        let nr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nr > 1e-6 * scale {
            basis.push(r.iter().map(|x| x / nr).collect());
            chosen.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() == d && affine_rank_exact(points, &chosen) == d {
        return d;
    }
    affine_rank_exact(points, indices)
}

fn affine_rank_exact(points: &PointSet, indices: &[usize]) -> usize {
    if indices.is_empty() {
        return 0;
    }
    let d = points.dim();
    let base = points.point(indices[0]);
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for &i in &indices[1..] {
        let p = points.point(i);
        rows.push(
            p.iter()
                .zip(base)
                .map(|(&a, &b)| exact_rational(a) - exact_rational(b))
                .collect(),
        );
    }
    let mut rank = 0;
    for col in 0..d {
        if let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            rows.swap(rank, piv);
            let pivot = rows[rank][col].clone();
            for r in rank + 1..rows.len() {
                if !rows[r][col].is_zero() {
                    let f = &rows[r][col] / &pivot;
                    for j in col..d {
                        let v = &rows[rank][j] * &f;
                        rows[r][j] = &rows[r][j] - v;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Exact rational value of a finite double.
pub fn exact_rational(x: f64) -> BigRational {
    let (m, e) = decompose(x);
    let m = BigInt::from(m);
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-e) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filtered_agrees_with_exact_on_easy_input() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let q = [0.3, 0.7];
        // det[a - q; b - q] = 0.21 + 0.49
        assert_eq!(orient_filtered(&[&a, &b], &q), Some(1));
        assert_eq!(orient_exact(&[&a, &b], &q), 1);
        assert_eq!(orient_exact(&[&b, &a], &q), -1);
    }

    #[test]
    fn exact_path_resolves_near_zero_determinants() {
        let a = [0.1, 0.1];
        let b = [0.2, 0.2];
        let q = [0.30000000000000004, 0.30000000000000004];
        // All three have x == y, so they lie on the diagonal exactly.
        assert_eq!(orient_exact(&[&a, &b], &q), 0);
        let c = [1.0, 1.0];
        let d = [2.0, 2.0 + 4.0 * f64::EPSILON];
        let r = [3.0, 3.0];
        assert_ne!(orient_exact(&[&c, &d], &r), 0);
    }

    #[test]
    fn perturbation_is_antisymmetric_and_nonzero() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        for &(a, b, q) in &[(0, 1, 2), (1, 2, 3), (0, 3, 1)] {
            let s = orient(&pts, &[a, b], q);
            assert_ne!(s, 0);
            assert_eq!(orient(&pts, &[b, a], q), -s);
        }
    }

    #[test]
    fn perturbation_in_three_dimensions_is_consistent() {
        // Four coplanar points: the perturbed tetrahedron has a definite,
        // antisymmetric orientation.
        let pts = PointSet::from_rows(
            3,
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        );
        let s = orient(&pts, &[0, 1, 2], 3);
        assert_ne!(s, 0);
        assert_eq!(orient(&pts, &[1, 0, 2], 3), -s);
        assert_eq!(orient(&pts, &[0, 2, 1], 3), -s);
    }

    #[test]
    fn bareiss_matches_hand_determinant() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(2)],
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(1)],
        ];
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(bareiss_det(m), BigInt::zero());
        let m = vec![vec![BigInt::from(0), BigInt::from(1)], vec![BigInt::from(1), BigInt::from(0)]];
        assert_eq!(bareiss_det(m), BigInt::from(-1));
    }

    #[test]
    fn affine_rank_counts_dimensions() {
        let pts = PointSet::from_rows(3, &[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [0.0, 1.0, 0.0]]);
        assert_eq!(affine_rank(&pts, &[0, 1, 2]), 1);
        assert_eq!(affine_rank(&pts, &[0, 1, 2, 3]), 2);
    }

    #[test]
    fn laplace_matches_closed_forms() {
        let mut m: Mat = [[0.0; MAX_DIM]; MAX_DIM];
        let vals = [[2.0, -1.0, 0.5, 3.0], [1.0, 4.0, -2.0, 0.0], [0.0, 1.0, 1.0, 1.0], [3.0, 0.0, 2.0, -1.0]];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = vals[i][j];
            }
        }
        let (det, _) = det_perm(&m, 4);
        let na = nalgebra::Matrix4::from_row_slice(&vals.concat());
        assert!((det - na.determinant()).abs() < 1e-12);
    }
}
