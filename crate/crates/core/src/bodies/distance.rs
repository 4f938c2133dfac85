//! Distance from interior points to the boundary and nearest boundary points.

use std::f64::consts::PI;

use super::{BodyKind, SmoothBody};
use crate::error::{Error, Result};
use crate::points::{dist2, norm};

const FOOT_TOL: f64 = 1e-10;

impl SmoothBody {
    /// Distance `s` from `x in K` to the boundary, and the nearest boundary point.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!("point has dimension {}, expected {}", x.len(), self.dim)));
        }
        if !self.contains(x) {
            return Err(Error::Domain("boundary distance is defined for points of the body".into()));
        }
        match &self.kind {
            BodyKind::Ball { radius, .. } => {
                let n = norm(x);
                let foot = if n == 0.0 {
                    let mut e = vec![0.0; self.dim];
                    e[0] = *radius;
                    e
                } else {
                    x.iter().map(|c| radius * c / n).collect()
                };
                Ok((radius - n, foot))
            }
            BodyKind::Ellipsoid { axes } => {
                let foot = ellipsoid_foot(axes, x)?;
                Ok((dist2(x, &foot).sqrt(), foot))
            }
            BodyKind::PerturbedDisk { .. } => self.disk_foot(x),
        }
    }

    /// Membership in the inner parallel shell `{x in K : dist(x, boundary) <= s}`.
    pub fn inner_parallel_contains(&self, x: &[f64], s: f64) -> Result<bool> {
        if !self.contains(x) {
            return Ok(false);
        }
        Ok(self.boundary_distance(x)?.0 <= s)
    }

    fn disk_foot(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let point = |t: f64| {
            let (r, rp, rpp) = self.radial(t);
            let (s, c) = t.sin_cos();
            ([r * c, r * s], [rp * c - r * s, rp * s + r * c], [(rpp - r) * c - 2.0 * rp * s, (rpp - r) * s + 2.0 * rp * c])
        };
        let f = |t: f64| {
            let (p, _, _) = point(t);
            (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)
        };
        const GRID: usize = 4096;
        let h = 2.0 * PI / GRID as f64;
        let best = (0..GRID).min_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h))).unwrap();
        // Newton on the derivative of the squared distance, bracketed to one grid cell each side.
        let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
        let mut t = best as f64 * h;
        let g = |t: f64| {
            let (p, dp, ddp) = point(t);
            let e = [p[0] - x[0], p[1] - x[1]];
            (e[0] * dp[0] + e[1] * dp[1], dp[0] * dp[0] + dp[1] * dp[1] + e[0] * ddp[0] + e[1] * ddp[1])
        };
        let (glo, ghi) = (g(lo).0, g(hi).0);
        if glo > 0.0 || ghi < 0.0 {
            // Flat minimum on the grid (x at a centre of curvature); the grid point is optimal to O(h^2).
            let (p, _, _) = point(t);
            return Ok((f(t).sqrt(), p.to_vec()));
        }
        for _ in 0..200 {
            let (gv, gd) = g(t);
            if gv < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let mut next = if gd > 0.0 { t - gv / gd } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() < FOOT_TOL * 1e-3 || hi - lo < FOOT_TOL * 1e-3 {
                t = next;
                break;
            }
            t = next;
        }
        let (p, _, _) = point(t);
        Ok((f(t).sqrt(), p.to_vec()))
    }
}

/// Nearest point of the ellipsoid boundary to an interior point, from the
/// stationarity condition `y_i = a_i^2 x_i / (a_i^2 + t)` with
/// `sum_i (a_i x_i / (a_i^2 + t))^2 = 1` and `t in (-a_min^2, 0]`.
fn ellipsoid_foot(axes: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let d = axes.len();
    let amin2 = axes.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
    let is_min = |i: usize| axes[i] * axes[i] == amin2;
    let scale = axes.iter().copied().fold(0.0, f64::max);
    let f = |t: f64| -> f64 {
        axes.iter().zip(x).map(|(a, x)| if *x == 0.0 { 0.0 } else { (a * x / (a * a + t)).powi(2) }).sum::<f64>() - 1.0
    };
    let min_axis_coords_vanish = (0..d).filter(|&i| is_min(i)).all(|i| x[i] == 0.0);
    if min_axis_coords_vanish {
        // F stays bounded at the left end; if it is negative there, the foot
        // leaves the coordinate hyperplane along a shortest axis.
        let left = axes.iter().zip(x).map(|(a, xi)| if *xi == 0.0 { 0.0 } else { (a * xi / (a * a - amin2)).powi(2) }).sum::<f64>() - 1.0;
        if left <= 0.0 {
            let mut y = vec![0.0; d];
            let mut rest = 1.0;
            for i in 0..d {
                if !is_min(i) {
                    y[i] = axes[i] * axes[i] * x[i] / (axes[i] * axes[i] - amin2);
                    rest -= (y[i] / axes[i]).powi(2);
                }
            }
            let j = (0..d).find(|&i| is_min(i)).unwrap();
            y[j] = (amin2 * rest.max(0.0)).sqrt();
            return Ok(y);
        }
    }
    // F is strictly decreasing on (-a_min^2, 0] with F(0) <= 0.
    let mut lo = -amin2;
    let mut hi = 0.0;
    if f(hi) >= 0.0 {
        return Ok(x.to_vec());
    }
    let mut t = -0.5 * amin2;
    for _ in 0..400 {
        let fv = f(t);
        if fv > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let df: f64 = axes
            .iter()
            .zip(x)
            .map(|(a, x)| if *x == 0.0 { 0.0 } else { -2.0 * (a * x).powi(2) / (a * a + t).powi(3) })
            .sum();
        let mut next = t - fv / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * scale * scale || hi - lo <= 1e-15 * scale * scale {
            t = next;
            let y = axes.iter().zip(x).map(|(a, x)| a * a * x / (a * a + t)).collect();
            return Ok(y);
        }
        t = next;
    }
    Err(Error::NoConvergence { what: "ellipsoid foot point", partial: t, error: hi - lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_distances() {
        let b = SmoothBody::ball(2, 1.0).unwrap();
        let (s, z) = b.boundary_distance(&[0.9, 0.0]).unwrap();
        assert!((s - 0.1).abs() < 1e-15);
        assert!((z[0] - 1.0).abs() < 1e-15 && z[1].abs() < 1e-15);
        let (s0, _) = b.boundary_distance(&[0.0, 0.0]).unwrap();
        assert_eq!(s0, 1.0);
        assert!(b.boundary_distance(&[2.0, 0.0]).is_err());
        assert!(b.inner_parallel_contains(&[0.95, 0.0], 0.1).unwrap());
        assert!(!b.inner_parallel_contains(&[0.5, 0.0], 0.1).unwrap());
    }

    #[test]
    fn ellipse_foot_on_the_long_axis() {
        let e = SmoothBody::ellipsoid(&[2.0, 0.5]).unwrap();
        let (s, y) = e.boundary_distance(&[1.0, 0.0]).unwrap();
        assert!((y[0] - 16.0 / 15.0).abs() < 1e-12);
        assert!((y[0] / 2.0).powi(2) + (y[1] / 0.5).powi(2) - 1.0 < 1e-12);
        assert!((s - ((1.0f64 / 15.0).powi(2) + y[1] * y[1]).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_disk_foot_is_stationary() {
        let k = SmoothBody::perturbed_disk(1.0, &[0.0, 0.0, 0.05], &[0.0, 0.03, 0.0]).unwrap();
        let x = [0.3, -0.4];
        let (s, y) = k.boundary_distance(&x).unwrap();
        let t = y[1].atan2(y[0]);
        for dt in [-1e-3, 1e-3] {
            let p = k.boundary_point_at_angle(t + dt).unwrap().z;
            assert!(dist2(&p, &x).sqrt() >= s - 1e-12);
        }
    }
}
