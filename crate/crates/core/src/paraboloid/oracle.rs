//! Extremality from the definition, decided in exact rational arithmetic.
//!
//! `w0 = (v0, h0)` is extreme iff some apex location `x` satisfies
//! `h0 + |x - v0|^2 / 2 < h + |x - v|^2 / 2` for every other point. The
//! quadratic terms cancel, leaving the strict linear system
//! `x . (v - v0) < h - h0 + (|v|^2 - |v0|^2) / 2`, whose feasibility is
//! decided by Fourier–Motzkin elimination.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::points::PointSet;
use crate::predicates::exact_rational;

/// Strict constraint `a . x < b`.
type Constraint = (Vec<BigRational>, BigRational);

fn strictly_feasible(mut cons: Vec<Constraint>, vars: usize) -> bool {
    for j in 0..vars {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = Vec::new();
        for c in cons {
            if c.0[j].is_positive() {
                pos.push(c);
            } else if c.0[j].is_negative() {
                neg.push(c);
            } else {
                rest.push(c);
            }
        }
        for (ap, bp) in &pos {
            for (aq, bq) in &neg {
                // alpha = a_pj > 0, beta = -a_qj > 0: alpha (a_q x - b_q) < beta (b_p - a_p x).
                let alpha = &ap[j];
                let beta = -&aq[j];
                let a: Vec<BigRational> = ap.iter().zip(aq).map(|(p, q)| alpha * q + &beta * p).collect();
                let b = &beta * bp + alpha * bq;
                rest.push((a, b));
            }
        }
        cons = rest;
        cons.sort();
        cons.dedup();
    }
    cons.iter().all(|(_, b)| b.is_positive())
}

/// Extreme flags by direct feasibility of the defining strict inequalities.
/// Intended for small inputs; the elimination is exponential in `d - 1`.
pub fn extreme_points_oracle(points: &PointSet) -> Vec<bool> {
    let d = points.dim();
    let m = d - 1;
    let exact: Vec<Vec<BigRational>> = points.iter().map(|p| p.iter().map(|&x| exact_rational(x)).collect()).collect();
    let half = BigRational::new(1.into(), 2.into());
    let sq = |v: &[BigRational]| v.iter().fold(BigRational::zero(), |acc, x| acc + x * x);
    (0..points.len())
        .map(|i0| {
            let w0 = &exact[i0];
            let n0 = sq(&w0[..m]);
            let cons: Vec<Constraint> = exact
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i0)
                .map(|(_, w)| {
                    let a = w[..m].iter().zip(&w0[..m]).map(|(x, y)| x - y).collect();
                    let b = &w[m] - &w0[m] + &half * (sq(&w[..m]) - &n0);
                    (a, b)
                })
                .collect();
            strictly_feasible(cons, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definition_examples() {
        let p = PointSet::from_rows(2, &[[0.0, 0.0]]);
        assert_eq!(extreme_points_oracle(&p), vec![true]);
        let p = PointSet::from_rows(2, &[[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(extreme_points_oracle(&p), vec![true, false]);
        let p = PointSet::from_rows(2, &[[-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(extreme_points_oracle(&p), vec![true, true]);
        let p = PointSet::from_rows(2, &[[0.5, 0.3], [0.5, 0.3]]);
        assert_eq!(extreme_points_oracle(&p), vec![false, false]);
    }

    #[test]
    fn tangent_configuration_is_not_extreme() {
        // Lifted points (-1, 1.5), (0, 1.5), (1, 1.5) are collinear: the middle
        // paraboloid is covered by the union of its neighbours'.
        let p = PointSet::from_rows(2, &[[-1.0, 1.0], [0.0, 1.5], [1.0, 1.0]]);
        assert_eq!(extreme_points_oracle(&p), vec![true, false, true]);
    }
}
