//! Volume-preserving normalization at a boundary point and the anisotropic
//! scaling transform onto the half-space picture.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{tangent_basis, BodyKind, BoundaryPoint, SmoothBody};
use crate::error::{Error, Result};
use crate::points::{dot, norm};

/// `x -> z + M (x - z)` with `M` scaling principal direction `e_i` by
/// `sqrt(C_i r_z)` and fixing the inner normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineNormalizer {
    pub z: BoundaryPoint,
    /// Row-major `d x d` matrix `M`.
    pub matrix: Vec<Vec<f64>>,
    /// `z - M z`, so that the map is `x -> M x + translation`.
    pub translation: Vec<f64>,
    pub scales: Vec<f64>,
}

impl AffineNormalizer {
    pub fn new(z: &BoundaryPoint) -> Result<Self> {
        let d = z.dim();
        if z.principal_curvatures.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::Domain("affine normalizer needs positive principal curvatures".into()));
        }
        let scales: Vec<f64> = z.principal_curvatures.iter().map(|c| (c * z.curvature_radius).sqrt()).collect();
        let mut m = vec![vec![0.0; d]; d];
        let k = &z.inner_normal;
        for r in 0..d {
            for c in 0..d {
                m[r][c] = k[r] * k[c];
                for (s, e) in scales.iter().zip(&z.principal_directions) {
                    m[r][c] += s * e[r] * e[c];
                }
            }
        }
        let mz: Vec<f64> = m.iter().map(|row| dot(row, &z.z)).collect();
        let translation = z.z.iter().zip(&mz).map(|(a, b)| a - b).collect();
        Ok(Self { z: z.clone(), matrix: m, translation, scales })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().zip(&self.translation).map(|(row, t)| dot(row, x) + t).collect()
    }

    /// Inverse map; `M^{-1}` scales `e_i` by `1 / s_i`.
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let z = &self.z.z;
        let diff: Vec<f64> = y.iter().zip(z).map(|(a, b)| a - b).collect();
        let k = &self.z.inner_normal;
        let mut out = z.clone();
        let a = dot(&diff, k);
        for (o, kk) in out.iter_mut().zip(k) {
            *o += a * kk;
        }
        for (s, e) in self.scales.iter().zip(&self.z.principal_directions) {
            let a = dot(&diff, e) / s;
            for (o, ee) in out.iter_mut().zip(e) {
                *o += a * ee;
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let d = self.matrix.len();
        DMatrix::from_fn(d, d, |r, c| self.matrix[r][c]).determinant()
    }

    /// Principal curvatures of the image body at `z`, from the implicit
    /// quadric equation of the image (balls and ellipsoids) or directly in
    /// the plane, where the normalizer is the identity.
    pub fn image_curvatures(&self, body: &SmoothBody) -> Result<Vec<f64>> {
        let d = body.dim;
        let axes = match &body.kind {
            BodyKind::Ball { radius, .. } => vec![*radius; d],
            BodyKind::Ellipsoid { axes } => axes.clone(),
            BodyKind::PerturbedDisk { .. } => return Ok(self.z.principal_curvatures.iter().map(|c| c / self.scales[0].powi(2)).collect()),
        };
        let m = DMatrix::from_fn(d, d, |r, c| self.matrix[r][c]);
        let minv = m.try_inverse().ok_or_else(|| Error::Runtime("singular normalizer".into()))?;
        let dinv2 = DMatrix::from_fn(d, d, |r, c| if r == c { 1.0 / (axes[r] * axes[r]) } else { 0.0 });
        let q = minv.transpose() * dinv2 * &minv;
        let y = nalgebra::DVector::from_fn(d, |i, _| self.z.z[i] - self.translation[i]);
        let g = &q * y;
        let gn = g.norm();
        let n: Vec<f64> = g.iter().map(|x| x / gn).collect();
        let t = tangent_basis(&n);
        let s = DMatrix::from_fn(d - 1, d - 1, |i, j| {
            let ti = nalgebra::DVector::from_column_slice(&t[i]);
            let tj = nalgebra::DVector::from_column_slice(&t[j]);
            ti.dot(&(&q * tj)) / gn
        });
        let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

/// Exponential map of the unit sphere at `base`, with tangent coordinates
/// taken in the orthonormal `frame`.
pub fn sphere_exp(base: &[f64], frame: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let theta = norm(v);
    if theta == 0.0 {
        return base.to_vec();
    }
    let (s, c) = theta.sin_cos();
    let mut u: Vec<f64> = base.iter().map(|b| c * b).collect();
    for (vi, e) in v.iter().zip(frame) {
        for (uj, ej) in u.iter_mut().zip(e) {
            *uj += s * vi / theta * ej;
        }
    }
    u
}

/// Inverse of [`sphere_exp`]; undefined at the antipode `-base`.
pub fn sphere_log(base: &[f64], frame: &[Vec<f64>], u: &[f64]) -> Result<Vec<f64>> {
    let c = dot(u, base);
    let w: Vec<f64> = u.iter().zip(base).map(|(a, b)| a - c * b).collect();
    let s = norm(&w);
    if s == 0.0 {
        if c > 0.0 {
            return Ok(vec![0.0; frame.len()]);
        }
        return Err(Error::Domain("logarithm map undefined at the antipode".into()));
    }
    if c < 0.0 && s < 1e-14 {
        return Err(Error::Domain("logarithm map undefined at the antipode".into()));
    }
    let theta = s.atan2(c);
    Ok(frame.iter().map(|e| theta * dot(&w, e) / s).collect())
}

/// The map `(r, u) -> (v', h')` around `z`, with polar coordinates `(r, u)`
/// centred at the osculating centre `z_0` and `s = (r_z^d lambda)^beta`:
/// `v' = s exp^{-1}(u)`, `h' = s^2 (1 - r / r_z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTransform {
    pub lambda: f64,
    pub z: BoundaryPoint,
    pub beta: f64,
    scale: f64,
}

impl ScalingTransform {
    pub fn new(z: &BoundaryPoint, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("intensity must be positive, got {lambda}")));
        }
        let d = z.dim() as f64;
        let beta = 1.0 / (d + 1.0);
        let scale = (z.curvature_radius.powf(d) * lambda).powf(beta);
        Ok(Self { lambda, z: z.clone(), beta, scale })
    }

    /// `(r_z^d lambda)^beta`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn pole(&self) -> Vec<f64> {
        self.z.outer_normal()
    }

    pub fn forward(&self, r: f64, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let v = sphere_log(&self.pole(), &self.z.principal_directions, u)?;
        let vp = v.iter().map(|x| self.scale * x).collect();
        Ok((vp, self.scale * self.scale * (1.0 - r / self.z.curvature_radius)))
    }

    pub fn inverse(&self, vp: &[f64], hp: f64) -> Result<(f64, Vec<f64>)> {
        let v: Vec<f64> = vp.iter().map(|x| x / self.scale).collect();
        if norm(&v) >= PI {
            return Err(Error::Domain("tangent vector outside the injectivity radius".into()));
        }
        let r = self.z.curvature_radius * (1.0 - hp / (self.scale * self.scale));
        Ok((r, sphere_exp(&self.pole(), &self.z.principal_directions, &v)))
    }

    /// Forward map of a Cartesian point.
    pub fn forward_point(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let diff: Vec<f64> = x.iter().zip(&self.z.osculating_center).map(|(a, b)| a - b).collect();
        let r = norm(&diff);
        if r == 0.0 {
            return Err(Error::Domain("the osculating centre has no direction".into()));
        }
        let u: Vec<f64> = diff.iter().map(|a| a / r).collect();
        self.forward(r, &u)
    }

    pub fn inverse_point(&self, vp: &[f64], hp: f64) -> Result<Vec<f64>> {
        let (r, u) = self.inverse(vp, hp)?;
        Ok(self.z.osculating_center.iter().zip(&u).map(|(c, u)| c + r * u).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_normalizer_is_identity() {
        let b = SmoothBody::ball(3, 1.5).unwrap();
        let a = AffineNormalizer::new(&b.boundary_point(&[1.0, 2.0, 2.0]).unwrap()).unwrap();
        for (r, row) in a.matrix.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                assert!((x - if r == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(a.translation.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn normalizer_fixes_z_and_inverts() {
        let e = SmoothBody::ellipsoid(&[2.0, 1.0, 0.5]).unwrap();
        let z = e.boundary_point(&[0.4, -0.5, 0.7]).unwrap();
        let a = AffineNormalizer::new(&z).unwrap();
        let img = a.apply(&z.z);
        assert!(img.iter().zip(&z.z).all(|(x, y)| (x - y).abs() < 1e-14));
        let x = [0.1, 0.3, -0.2];
        let back = a.apply_inverse(&a.apply(&x));
        assert!(back.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-14));
        assert!((a.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_fixes_the_base_point() {
        let b = SmoothBody::ball(2, 1.0).unwrap();
        let z = b.boundary_point_at_angle(0.3).unwrap();
        let t = ScalingTransform::new(&z, 8.0).unwrap();
        assert!((t.scale() - 2.0).abs() < 1e-15);
        let (v, h) = t.forward(1.0, &z.outer_normal()).unwrap();
        assert_eq!(v, vec![0.0]);
        assert_eq!(h, 0.0);
        let anti: Vec<f64> = z.inner_normal.clone();
        assert!(matches!(t.forward(1.0, &anti), Err(Error::Domain(_))));
    }
}
