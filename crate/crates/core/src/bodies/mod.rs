//! Smooth convex bodies with curvature data and boundary integrals.
//!
//! Every body is centred at the origin. Boundary points are addressed by a
//! unit vector `u`: `z = r u` for a ball, `z = D u` with `D = diag(a)` for an
//! ellipsoid and `z = rho(theta) u` for a perturbed disk.

mod distance;
mod transforms;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{dot, norm};
use crate::quadrature::{integrate_box, Quadrature};
use crate::testfn::TestFunction;

pub use transforms::{sphere_exp, sphere_log, AffineNormalizer, ScalingTransform};

/// Default resolution of the convexity grid for perturbed disks.
pub const DEFAULT_CONVEXITY_GRID: usize = 10_000;

/// Relative tolerance for boundary quadratures.
pub const QUADRATURE_TOL: f64 = 1e-8;

const QUADRATURE_BUDGET: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BodyKind {
    Ball { dim: usize, radius: f64 },
    Ellipsoid { axes: Vec<f64> },
    /// Radial function `r0 + sum_j (cos[j-1] cos(j t) + sin[j-1] sin(j t))`.
    PerturbedDisk { r0: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl BodyKind {
    pub fn dim(&self) -> usize {
        match self {
            BodyKind::Ball { dim, .. } => *dim,
            BodyKind::Ellipsoid { axes } => axes.len(),
            BodyKind::PerturbedDisk { .. } => 2,
        }
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyKind::Ball { dim, radius } => write!(f, "ball:{dim},{radius}"),
            BodyKind::Ellipsoid { axes } => write!(f, "ellipsoid:{}", fmt_list(axes)),
            BodyKind::PerturbedDisk { r0, cos, sin } => {
                let mut v = vec![*r0];
                for (a, b) in cos.iter().zip(sin) {
                    v.push(*a);
                    v.push(*b);
                }
                write!(f, "perturbed-disk:{}", fmt_list(&v))
            }
        }
    }
}

/// Parses `disk`, `ball:<d>,<r>`, `ellipsoid:<a1>,...,<ad>` or
/// `perturbed-disk:<r0>,<a1>,<b1>,<a2>,<b2>,...`.
impl FromStr for BodyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidBody(format!("{s:?}: {m}"));
        let s = s.trim();
        if s == "disk" {
            return Ok(BodyKind::Ball { dim: 2, radius: 1.0 });
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<parameters>"))?;
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        match kind.trim() {
            "ball" => {
                if nums.len() != 2 || nums[0].fract() != 0.0 || nums[0] < 1.0 {
                    return Err(bad("ball takes <dim>,<radius>"));
                }
                Ok(BodyKind::Ball { dim: nums[0] as usize, radius: nums[1] })
            }
            "ellipsoid" => Ok(BodyKind::Ellipsoid { axes: nums }),
            "perturbed-disk" => {
                if nums.len() % 2 != 1 {
                    return Err(bad("perturbed-disk takes r0 followed by (cos, sin) pairs"));
                }
                let cos = nums[1..].iter().step_by(2).copied().collect();
                let sin = nums[2..].iter().step_by(2).copied().collect();
                Ok(BodyKind::PerturbedDisk { r0: nums[0], cos, sin })
            }
            other => Err(bad(&format!("unknown body kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothBody {
    pub dim: usize,
    pub kind: BodyKind,
    pub volume: f64,
    /// Minimum radius of curvature over the boundary.
    pub reach_lower_bound: f64,
    pub bounding_box: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub z: Vec<f64>,
    /// Chart coordinate: the unit vector `u` addressing `z`.
    pub param: Vec<f64>,
    pub inner_normal: Vec<f64>,
    pub principal_curvatures: Vec<f64>,
    /// Orthonormal tangent vectors matching `principal_curvatures`.
    pub principal_directions: Vec<Vec<f64>>,
    pub gaussian_curvature: f64,
    pub curvature_radius: f64,
    pub osculating_center: Vec<f64>,
}

impl BoundaryPoint {
    fn assemble(z: Vec<f64>, param: Vec<f64>, inner_normal: Vec<f64>, curv: Vec<f64>, dirs: Vec<Vec<f64>>) -> Self {
        let d = z.len();
        let kappa: f64 = curv.iter().product();
        let r = kappa.powf(-1.0 / (d as f64 - 1.0));
        let center = z.iter().zip(&inner_normal).map(|(a, k)| a + r * k).collect();
        Self {
            z,
            param,
            inner_normal,
            principal_curvatures: curv,
            principal_directions: dirs,
            gaussian_curvature: kappa,
            curvature_radius: r,
            osculating_center: center,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Outward unit normal `-k_z`.
    pub fn outer_normal(&self) -> Vec<f64> {
        self.inner_normal.iter().map(|x| -x).collect()
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / statrs::function::gamma::gamma(d as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Orthonormal basis of the complement of the unit vector `n`, from the
/// Householder reflection that maps `n` to a coordinate axis.
pub(crate) fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let j = (0..d).max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs())).unwrap();
    let mut v = n.to_vec();
    v[j] += n[j].signum();
    let vv = dot(&v, &v);
    (0..d)
        .filter(|&c| c != j)
        .map(|c| (0..d).map(|r| if r == c { 1.0 } else { 0.0 } - 2.0 * v[r] * v[c] / vv).collect())
        .collect()
}

/// Unit vector from hyperspherical angles `phi_1..phi_{d-1}`.
pub fn sphere_from_angles(phi: &[f64]) -> Vec<f64> {
    let d = phi.len() + 1;
    let mut u = vec![0.0; d];
    let mut s = 1.0;
    for (i, &p) in phi.iter().enumerate() {
        u[i] = s * p.cos();
        s *= p.sin();
    }
    u[d - 1] = s;
    u
}

fn sphere_jacobian(phi: &[f64]) -> f64 {
    let m = phi.len();
    (0..m.saturating_sub(1)).map(|i| phi[i].sin().powi((m - 1 - i) as i32)).product()
}

fn sphere_bounds(d: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(0.0, PI); d - 1];
    b[d - 2] = (0.0, 2.0 * PI);
    b
}

impl SmoothBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        make_body(BodyKind::Ball { dim, radius })
    }

    pub fn ellipsoid(axes: &[f64]) -> Result<Self> {
        make_body(BodyKind::Ellipsoid { axes: axes.to_vec() })
    }

    pub fn perturbed_disk(r0: f64, cos: &[f64], sin: &[f64]) -> Result<Self> {
        make_body(BodyKind::PerturbedDisk { r0, cos: cos.to_vec(), sin: sin.to_vec() })
    }

    pub fn id(&self) -> String {
        self.kind.to_string()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            BodyKind::Ball { radius, .. } => dot(x, x) <= radius * radius,
            BodyKind::Ellipsoid { axes } => x.iter().zip(axes).map(|(x, a)| (x / a) * (x / a)).sum::<f64>() <= 1.0,
            BodyKind::PerturbedDisk { .. } => {
                let r = norm(x);
                r == 0.0 || r <= self.radial(x[1].atan2(x[0])).0
            }
        }
    }

    /// `(rho, rho', rho'')` of a perturbed disk.
    fn radial(&self, t: f64) -> (f64, f64, f64) {
        match &self.kind {
            BodyKind::PerturbedDisk { r0, cos, sin } => radial_function(*r0, cos, sin, t),
            _ => unreachable!("radial function of a non-disk body"),
        }
    }

    /// Boundary point addressed by the (not necessarily normalized) direction `u`.
    pub fn boundary_point(&self, u: &[f64]) -> Result<BoundaryPoint> {
        let d = self.dim;
        if u.len() != d {
            return Err(Error::Domain(format!("chart vector has length {}, expected {d}", u.len())));
        }
        let len = norm(u);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Domain("chart vector must be nonzero and finite".into()));
        }
        let u: Vec<f64> = u.iter().map(|x| x / len).collect();
        Ok(match &self.kind {
            BodyKind::Ball { radius, .. } => {
                let z = u.iter().map(|x| radius * x).collect();
                let inner = u.iter().map(|x| -x).collect();
                let dirs = tangent_basis(&u);
                BoundaryPoint::assemble(z, u, inner, vec![1.0 / radius; d - 1], dirs)
            }
            BodyKind::Ellipsoid { axes } => {
                let z: Vec<f64> = u.iter().zip(axes).map(|(u, a)| u * a).collect();
                let g: Vec<f64> = z.iter().zip(axes).map(|(z, a)| z / (a * a)).collect();
                let gn = norm(&g);
                let n: Vec<f64> = g.iter().map(|x| x / gn).collect();
                let t = tangent_basis(&n);
                let m = d - 1;
                let mut s = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        s[(i, j)] = (0..d).map(|k| t[i][k] * t[j][k] / (axes[k] * axes[k])).sum::<f64>() / gn;
                    }
                }
                let (curv, dirs) = sorted_eigen(s, &t);
                let inner = n.iter().map(|x| -x).collect();
                BoundaryPoint::assemble(z, u, inner, curv, dirs)
            }
            BodyKind::PerturbedDisk { .. } => {
                let th = u[1].atan2(u[0]);
                let (rho, rp, rpp) = self.radial(th);
                let (c, s) = (th.cos(), th.sin());
                let z = vec![rho * c, rho * s];
                let tan = [rp * c - rho * s, rp * s + rho * c];
                let tl = (tan[0] * tan[0] + tan[1] * tan[1]).sqrt();
                let kappa = (rho * rho + 2.0 * rp * rp - rho * rpp) / (rho * rho + rp * rp).powf(1.5);
                let inner = vec![-tan[1] / tl, tan[0] / tl];
                BoundaryPoint::assemble(z, u, inner, vec![kappa], vec![vec![tan[0] / tl, tan[1] / tl]])
            }
        })
    }

    /// Boundary point at polar angle `theta` (planar bodies).
    pub fn boundary_point_at_angle(&self, theta: f64) -> Result<BoundaryPoint> {
        if self.dim != 2 {
            return Err(Error::Domain("angle charts exist only in the plane".into()));
        }
        self.boundary_point(&[theta.cos(), theta.sin()])
    }

    /// Surface measure of the boundary per unit of `S^{d-1}` measure at chart point `u`.
    pub fn area_element(&self, u: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::Ball { radius, dim } => radius.powi(*dim as i32 - 1),
            BodyKind::Ellipsoid { axes } => {
                let prod: f64 = axes.iter().product();
                let w: f64 = u.iter().zip(axes).map(|(u, a)| (u / a) * (u / a)).sum();
                prod * w.sqrt()
            }
            BodyKind::PerturbedDisk { .. } => {
                let (rho, rp, _) = self.radial(u[1].atan2(u[0]));
                (rho * rho + rp * rp).sqrt()
            }
        }
    }

    /// `integral over the boundary of f(z) dz` by adaptive Gauss–Legendre
    /// quadrature in hyperspherical coordinates.
    pub fn surface_integral<F>(&self, f: F, rel_tol: f64) -> Result<Quadrature>
    where
        F: Fn(&BoundaryPoint) -> f64,
    {
        let d = self.dim;
        integrate_box(
            &sphere_bounds(d),
            |phi| {
                let u = sphere_from_angles(phi);
                let bp = self.boundary_point(&u).expect("unit chart vector");
                f(&bp) * self.area_element(&u) * sphere_jacobian(phi)
            },
            rel_tol,
            QUADRATURE_BUDGET,
        )
    }

    /// `integral over the boundary of kappa^{1/(d+1)}`.
    pub fn affine_surface_area(&self) -> Result<Quadrature> {
        let e = 1.0 / (self.dim as f64 + 1.0);
        self.surface_integral(|bp| bp.gaussian_curvature.powf(e), QUADRATURE_TOL)
    }

    /// `integral over the boundary of g(z)^power kappa^{1/(d+1)}`.
    pub fn weighted_affine_integral(&self, g: &TestFunction, power: i32) -> Result<Quadrature> {
        let e = 1.0 / (self.dim as f64 + 1.0);
        self.surface_integral(|bp| g.eval(&bp.z).powi(power) * bp.gaussian_curvature.powf(e), QUADRATURE_TOL)
    }

    pub fn surface_area(&self) -> Result<Quadrature> {
        self.surface_integral(|_| 1.0, QUADRATURE_TOL)
    }

    /// Volume of the boundary shell `{x in K : dist(x, boundary) <= s}` from
    /// the normal-coordinate Jacobian `prod_i (1 - t C_i)`; valid for `s`
    /// below the reach.
    pub fn shell_volume(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.reach_lower_bound).contains(&s) {
            return Err(Error::Domain(format!("shell width {s} exceeds the reach {}", self.reach_lower_bound)));
        }
        let q = self.surface_integral(
            |bp| {
                // Coefficients of prod_i (1 - t C_i) as a polynomial in t.
                let mut poly = vec![1.0];
                for &c in &bp.principal_curvatures {
                    let mut next = vec![0.0; poly.len() + 1];
                    for (j, &p) in poly.iter().enumerate() {
                        next[j] += p;
                        next[j + 1] -= c * p;
                    }
                    poly = next;
                }
                poly.iter().enumerate().map(|(j, p)| p * s.powi(j as i32 + 1) / (j as f64 + 1.0)).sum()
            },
            1e-10,
        )?;
        Ok(q.value)
    }
}

fn sorted_eigen(s: DMatrix<f64>, tangent: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let d = tangent[0].len();
    let curv = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dirs = order
        .iter()
        .map(|&i| {
            let mut v = vec![0.0; d];
            for (j, t) in tangent.iter().enumerate() {
                for k in 0..d {
                    v[k] += eig.eigenvectors[(j, i)] * t[k];
                }
            }
            v
        })
        .collect();
    (curv, dirs)
}

fn radial_function(r0: f64, cos: &[f64], sin: &[f64], t: f64) -> (f64, f64, f64) {
    let (mut r, mut rp, mut rpp) = (r0, 0.0, 0.0);
    for (j, (a, b)) in cos.iter().zip(sin).enumerate() {
        let k = (j + 1) as f64;
        let (s, c) = (k * t).sin_cos();
        r += a * c + b * s;
        rp += k * (b * c - a * s);
        rpp -= k * k * (a * c + b * s);
    }
    (r, rp, rpp)
}

/// Builds a body and checks its invariants.
pub fn make_body(kind: BodyKind) -> Result<SmoothBody> {
    make_body_with_grid(kind, DEFAULT_CONVEXITY_GRID)
}

/// As [`make_body`], with an explicit convexity-grid resolution.
pub fn make_body_with_grid(kind: BodyKind, grid: usize) -> Result<SmoothBody> {
    let positive = |x: f64| x.is_finite() && x > 0.0;
    match kind {
        BodyKind::Ball { dim, radius } => {
            if dim < 2 || !positive(radius) {
                return Err(Error::InvalidBody(format!("ball needs dim >= 2 and positive radius, got {dim}, {radius}")));
            }
            Ok(SmoothBody {
                dim,
                volume: unit_ball_volume(dim) * radius.powi(dim as i32),
                reach_lower_bound: radius,
                bounding_box: BoundingBox { lo: vec![-radius; dim], hi: vec![radius; dim] },
                kind: BodyKind::Ball { dim, radius },
            })
        }
        BodyKind::Ellipsoid { axes } => {
            let dim = axes.len();
            if dim < 2 || !axes.iter().all(|&a| positive(a)) {
                return Err(Error::InvalidBody(format!("ellipsoid needs >= 2 positive semi-axes, got {axes:?}")));
            }
            let amin = axes.iter().copied().fold(f64::INFINITY, f64::min);
            let amax = axes.iter().copied().fold(0.0, f64::max);
            Ok(SmoothBody {
                dim,
                volume: unit_ball_volume(dim) * axes.iter().product::<f64>(),
                reach_lower_bound: amin * amin / amax,
                bounding_box: BoundingBox { lo: axes.iter().map(|a| -a).collect(), hi: axes.clone() },
                kind: BodyKind::Ellipsoid { axes },
            })
        }
        BodyKind::PerturbedDisk { r0, cos, sin } => {
            if cos.len() != sin.len() {
                return Err(Error::InvalidBody("perturbed disk needs equally many cos and sin coefficients".into()));
            }
            if !positive(r0) || !cos.iter().chain(&sin).all(|x| x.is_finite()) {
                return Err(Error::InvalidBody("perturbed disk needs positive r0 and finite coefficients".into()));
            }
            let grid = grid.max(16);
            let mut min_radius_of_curvature = f64::INFINITY;
            for i in 0..grid {
                let t = 2.0 * PI * i as f64 / grid as f64;
                let (r, rp, rpp) = radial_function(r0, &cos, &sin, t);
                if r <= 0.0 {
                    return Err(Error::NonConvex(format!("radial function is not positive at theta = {t:.6}")));
                }
                let num = r * r + 2.0 * rp * rp - r * rpp;
                if num <= 0.0 {
                    return Err(Error::NonConvex(format!("curvature is not positive at theta = {t:.6}")));
                }
                min_radius_of_curvature = min_radius_of_curvature.min((r * r + rp * rp).powf(1.5) / num);
            }
            let analytic = PI * r0 * r0 + 0.5 * PI * cos.iter().chain(&sin).map(|x| x * x).sum::<f64>();
            let q = integrate_box(
                &[(0.0, 2.0 * PI)],
                |t| 0.5 * radial_function(r0, &cos, &sin, t[0]).0.powi(2),
                1e-13,
                1 << 20,
            )?;
            if ((q.value - analytic) / analytic).abs() > 1e-10 {
                return Err(Error::InvalidBody(format!("area quadrature {} disagrees with {analytic}", q.value)));
            }
            let bound = r0 + cos.iter().zip(&sin).map(|(a, b)| a.hypot(*b)).sum::<f64>();
            Ok(SmoothBody {
                dim: 2,
                volume: analytic,
                reach_lower_bound: min_radius_of_curvature,
                bounding_box: BoundingBox { lo: vec![-bound; 2], hi: vec![bound; 2] },
                kind: BodyKind::PerturbedDisk { r0, cos, sin },
            })
        }
    }
}

/// Near-boundary shell width `(12 d log(lambda) / (d3 lambda))^{1/(d+1)}`.
pub fn epsilon_lambda(lambda: f64, d: usize, d3: f64) -> Result<f64> {
    if !(lambda >= 2.0) || !(d3 > 0.0) || d < 1 {
        return Err(Error::Domain(format!("epsilon_lambda needs lambda >= 2 and d3 > 0, got {lambda}, {d3}")));
    }
    Ok((12.0 * d as f64 * lambda.ln() / (d3 * lambda)).powf(1.0 / (d as f64 + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_volumes() {
        let disk = SmoothBody::ball(2, 1.0).unwrap();
        assert!((disk.volume - PI).abs() < 1e-15);
        assert_eq!(disk.reach_lower_bound, 1.0);
        let e = SmoothBody::ellipsoid(&[2.0, 0.5]).unwrap();
        assert!((e.volume - PI).abs() < 1e-15);
        let b3 = SmoothBody::ball(3, 2.0).unwrap();
        assert!((b3.volume - 32.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_disk_convexity_check() {
        let ok = SmoothBody::perturbed_disk(1.0, &[0.0, 0.0, 0.05], &[0.0, 0.0, 0.0]).unwrap();
        assert!((ok.volume - (PI + 0.5 * PI * 0.0025)).abs() < 1e-14);
        let bad = SmoothBody::perturbed_disk(1.0, &[0.0, 0.0, 0.5], &[0.0, 0.0, 0.0]);
        assert!(matches!(bad, Err(Error::NonConvex(_))));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["ball:3,2", "ellipsoid:2,1,1", "perturbed-disk:1,0,0,0.05,0.01"] {
            let k: BodyKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert_eq!("disk".parse::<BodyKind>().unwrap(), BodyKind::Ball { dim: 2, radius: 1.0 });
        assert!("cube:1".parse::<BodyKind>().is_err());
        assert!("perturbed-disk:1,0".parse::<BodyKind>().is_err());
    }

    #[test]
    fn ball_curvatures() {
        let b = SmoothBody::ball(3, 2.0).unwrap();
        let p = b.boundary_point(&[0.3, -0.2, 0.9]).unwrap();
        assert!((p.gaussian_curvature - 0.25).abs() < 1e-15);
        assert!((p.curvature_radius - 2.0).abs() < 1e-14);
        assert!(norm(&p.osculating_center) < 1e-14);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let n = [0.6, 0.0, -0.8];
        let t = tangent_basis(&n);
        assert_eq!(t.len(), 2);
        for a in &t {
            assert!(dot(a, &n).abs() < 1e-15);
            assert!((dot(a, a) - 1.0).abs() < 1e-15);
        }
        assert!(dot(&t[0], &t[1]).abs() < 1e-15);
    }

    #[test]
    fn sphere_angles_cover_the_sphere() {
        let q = integrate_box(&sphere_bounds(4), |phi| sphere_jacobian(phi), 1e-12, 1 << 22).unwrap();
        assert!((q.value - unit_sphere_area(4)).abs() < 1e-10);
        let u = sphere_from_angles(&[0.3, 1.1, 4.0]);
        assert!((norm(&u) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_lambda_identity() {
        let v = epsilon_lambda(std::f64::consts::E, 2, 24.0).unwrap();
        assert!((v - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(epsilon_lambda(1.0, 2, 1.0).is_err());
        assert!(epsilon_lambda(10.0, 2, 0.0).is_err());
    }
}
