//! The paraboloid growth and hull processes on `R^{d-1} x R_+`.
//!
//! A point `w = (v, h)` is extreme when its upward paraboloid
//! `w + {(x, t) : t >= |x|^2 / 2}` is not covered by the paraboloids of the
//! other points. Under the lift `(v, h) -> (v, h + |v|^2 / 2)` upward
//! paraboloids become upper half-spaces bounded by graphs of affine maps,
//! so extreme points are the vertices of the lower convex hull of the
//! lifted set, and the paraboloid faces of the hull process are its faces.
//! [`extreme_points_oracle`] decides extremality from the definition
//! instead, in exact arithmetic.

pub(crate) mod estimators;
mod oracle;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{convex_hull, for_each_subset, oriented_facets};
use crate::points::{dot, PointSet};
use crate::predicates::{affine_rank, orient_exact};
use crate::rng::SeedKey;
use crate::sampling::sample_paraboloid_window;

pub use estimators::{
    estimate_sigma2_correlation, estimate_sigma2_window, estimate_zeta1, estimate_zeta2, geometric_grid,
    mean_score_profile, select_height, window_run, CorrelationEstimate, CorrelationGrid, Target, WindowConfig, WindowRun,
};
pub use oracle::extreme_points_oracle;

/// `(v, h) -> (v, h + |v|^2 / 2)`.
pub fn lift(points: &PointSet) -> PointSet {
    let d = points.dim();
    points.map(d, |p, out| {
        out.copy_from_slice(p);
        out[d - 1] += 0.5 * dot(&p[..d - 1], &p[..d - 1]);
    })
}

/// Inverse of [`lift`].
pub fn unlift(points: &PointSet) -> PointSet {
    let d = points.dim();
    points.map(d, |p, out| {
        out.copy_from_slice(p);
        out[d - 1] -= 0.5 * dot(&p[..d - 1], &p[..d - 1]);
    })
}

/// Lower envelope of a point set in `R^{d-1} x R`: the extreme points and
/// the maximal paraboloid faces, as index sets into the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerEnvelope {
    pub extreme: Vec<bool>,
    /// Maximal faces (facets of the lower hull of the lifted set).
    pub faces: Vec<Vec<usize>>,
    /// Dimension of the maximal faces.
    pub face_dim: usize,
}

impl LowerEnvelope {
    /// Deduplicated k-faces, each a sorted index list.
    pub fn k_faces(&self, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return self.extreme.iter().enumerate().filter(|(_, &e)| e).map(|(i, _)| vec![i]).collect();
        }
        if k > self.face_dim {
            return Vec::new();
        }
        let mut set = HashSet::new();
        for f in &self.faces {
            let mut s = f.clone();
            s.sort_unstable();
            for_each_subset(&s, k + 1, |sub| {
                set.insert(sub.to_vec());
            });
        }
        let mut out: Vec<Vec<usize>> = set.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// `counts[k][i]` = number of k-faces containing point `i`, for `k < max_k`.
    pub fn face_counts(&self, max_k: usize) -> Vec<Vec<u32>> {
        let n = self.extreme.len();
        (0..max_k)
            .map(|k| {
                let mut c = vec![0u32; n];
                for f in self.k_faces(k) {
                    for v in f {
                        c[v] += 1;
                    }
                }
                c
            })
            .collect()
    }

    /// Face counts of the listed points only: `out[j][k]` for `targets[j]`.
    pub fn incident_face_counts(&self, targets: &[usize], max_k: usize) -> Vec<Vec<u32>> {
        targets
            .iter()
            .map(|&t| {
                let mut out = vec![0u32; max_k];
                if !self.extreme[t] {
                    return out;
                }
                out[0] = 1;
                let mine: Vec<Vec<usize>> = self.faces.iter().filter(|f| f.contains(&t)).cloned().collect();
                for (k, slot) in out.iter_mut().enumerate().skip(1) {
                    if k > self.face_dim {
                        break;
                    }
                    let mut set = HashSet::new();
                    for f in &mine {
                        let others: Vec<usize> = f.iter().copied().filter(|&v| v != t).collect();
                        for_each_subset(&others, k, |sub| {
                            let mut s = sub.to_vec();
                            s.sort_unstable();
                            set.insert(s);
                        });
                    }
                    *slot = set.len() as u32;
                }
                out
            })
            .collect()
    }
}

/// Extreme points and paraboloid faces of `points` (last coordinate = height).
pub fn lower_envelope(points: &PointSet) -> Result<LowerEnvelope> {
    let dim = points.dim();
    if dim < 2 {
        return Err(Error::InvalidInput("paraboloid scenes need a base of dimension at least 1".into()));
    }
    let n = points.len();
    let m = dim - 1;
    if n == 0 {
        return Ok(LowerEnvelope { extreme: Vec::new(), faces: Vec::new(), face_dim: 0 });
    }
    let base = points.map(m, |p, out| out.copy_from_slice(&p[..m]));
    let all: Vec<usize> = (0..n).collect();
    let r = affine_rank(&base, &all);

    if r == 0 {
        // One base location: only a unique lowest point is uncovered.
        let hmin = points.iter().map(|p| p[m]).fold(f64::INFINITY, f64::min);
        let lowest: Vec<usize> = (0..n).filter(|&i| points.point(i)[m] == hmin).collect();
        let mut extreme = vec![false; n];
        if lowest.len() == 1 {
            extreme[lowest[0]] = true;
        }
        return Ok(LowerEnvelope { extreme, faces: Vec::new(), face_dim: 0 });
    }
    if r < m {
        // Optimal apex directions orthogonal to the base's affine hull cancel,
        // so the problem lives on that hull.
        return lower_envelope(&reduce_base(points, &base, r));
    }
    if n == m + 1 {
        return Ok(LowerEnvelope { extreme: vec![true; n], faces: vec![all], face_dim: m });
    }

    let lifted = lift(points);
    match oriented_facets(&lifted) {
        Ok(facets) => {
            let mut extreme = vec![false; n];
            let faces: Vec<Vec<usize>> = facets.into_iter().filter(|f| is_lower(&lifted, f)).collect();
            for f in &faces {
                for &v in f {
                    extreme[v] = true;
                }
            }
            Ok(LowerEnvelope { extreme, faces, face_dim: m })
        }
        Err(Error::Degenerate { .. }) => Ok(flat_lift_envelope(&base)),
        Err(e) => Err(e),
    }
}

/// A facet `p_1..p_d` of the lifted hull faces down iff the coefficient of
/// `q_d` in `det[p_i - q]` is negative, i.e. iff the base projections are
/// positively oriented.
fn is_lower(lifted: &PointSet, facet: &[usize]) -> bool {
    let m = lifted.dim() - 1;
    let rows: Vec<&[f64]> = facet[..m].iter().map(|&i| &lifted.point(i)[..m]).collect();
    orient_exact(&rows, &lifted.point(facet[m])[..m]) > 0
}

/// All lifted points on one non-vertical hyperplane: the extreme points are
/// the vertices of the base hull.
fn flat_lift_envelope(base: &PointSet) -> LowerEnvelope {
    let n = base.len();
    let m = base.dim();
    let mut extreme = vec![false; n];
    if m == 1 {
        let lo = base.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = base.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let lows: Vec<usize> = (0..n).filter(|&i| base.point(i)[0] == lo).collect();
        let highs: Vec<usize> = (0..n).filter(|&i| base.point(i)[0] == hi).collect();
        let mut face = Vec::new();
        for group in [lows, highs] {
            if group.len() == 1 {
                extreme[group[0]] = true;
                face.push(group[0]);
            }
        }
        let faces = if face.len() == 2 { vec![face] } else { Vec::new() };
        return LowerEnvelope { extreme, face_dim: if faces.is_empty() { 0 } else { 1 }, faces };
    }
    if let Ok(h) = convex_hull(base) {
        for &v in &h.vertex_indices {
            extreme[v] = true;
        }
    }
    LowerEnvelope { extreme, faces: Vec::new(), face_dim: 0 }
}

/// Re-expresses the points in orthonormal coordinates of the base's affine hull.
fn reduce_base(points: &PointSet, base: &PointSet, r: usize) -> PointSet {
    let m = base.dim();
    let mut chosen = vec![0usize];
    let mut rank = 0;
    for i in 1..base.len() {
        if rank == r {
            break;
        }
        chosen.push(i);
        let nr = affine_rank(base, &chosen);
        if nr > rank {
            rank = nr;
        } else {
            chosen.pop();
        }
    }
    let origin = base.point(chosen[0]).to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &c in &chosen[1..] {
        let mut v: Vec<f64> = base.point(c).iter().zip(&origin).map(|(a, b)| a - b).collect();
        for b in &basis {
            let proj = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
        let nv = dot(&v, &v).sqrt();
        basis.push(v.into_iter().map(|x| x / nv).collect());
    }
    points.map(r + 1, |p, out| {
        let diff: Vec<f64> = p[..m].iter().zip(&origin).map(|(a, b)| a - b).collect();
        for (j, b) in basis.iter().enumerate() {
            out[j] = dot(&diff, b);
        }
        out[r] = p[m];
    })
}

/// Extreme flags of the growth process generated by `points`.
pub fn extreme_points(points: &PointSet) -> Result<Vec<bool>> {
    Ok(lower_envelope(points)?.extreme)
}

/// Window `[-l/2, l/2]^{d-1} x [0, h]` with an inner scoring window shrunk by `margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneWindow {
    pub dim_base: usize,
    pub l: f64,
    pub h: f64,
    pub margin: f64,
}

impl SceneWindow {
    pub fn new(dim_base: usize, l: f64, h: f64, margin: f64) -> Result<Self> {
        if dim_base == 0 || !(l > 0.0) || !(h > 0.0) || !(margin >= 0.0) || margin >= l / 2.0 {
            return Err(Error::InvalidInput(format!(
                "window needs d-1 >= 1, L, H > 0 and 0 <= m < L/2; got {dim_base}, {l}, {h}, {margin}"
            )));
        }
        Ok(Self { dim_base, l, h, margin })
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p[..self.dim_base].iter().all(|x| x.abs() <= self.l / 2.0) && (0.0..=self.h).contains(&p[self.dim_base])
    }

    pub fn in_inner(&self, p: &[f64]) -> bool {
        let half = self.l / 2.0 - self.margin;
        p[..self.dim_base].iter().all(|x| x.abs() <= half)
    }

    /// Volume of the inner base window, `(L - 2m)^{d-1}`.
    pub fn inner_area(&self) -> f64 {
        (self.l - 2.0 * self.margin).powi(self.dim_base as i32)
    }
}

/// A rate-one Poisson sample of a window plus optional pinned points, which
/// come first in `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaboloidScene {
    pub window: SceneWindow,
    pub points: PointSet,
    pub pinned: usize,
    pub seed: u64,
}

impl ParaboloidScene {
    pub fn sample(window: SceneWindow, pins: &[Vec<f64>], key: &SeedKey) -> Result<Self> {
        let d = window.dim_base + 1;
        let random = sample_paraboloid_window(window.dim_base, window.l, window.h, key)?;
        let mut points = PointSet::with_capacity(d, pins.len() + random.len());
        for p in pins {
            if p.len() != d || !window.contains(p) {
                return Err(Error::InvalidInput(format!("pinned point {p:?} lies outside the window")));
            }
            points.push(p);
        }
        for p in random.iter() {
            points.push(p);
        }
        Ok(Self { window, points, pinned: pins.len(), seed: key.digest() })
    }

    pub fn from_points(window: SceneWindow, points: PointSet, pinned: usize, seed: u64) -> Result<Self> {
        if points.dim() != window.dim_base + 1 || pinned > points.len() {
            return Err(Error::InvalidInput("scene points do not match the window".into()));
        }
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(Error::InvalidInput(format!("scene point {p:?} lies outside the window")));
        }
        Ok(Self { window, points, pinned, seed })
    }

    /// Number of points counted towards the rate-one intensity.
    pub fn random_count(&self) -> usize {
        self.points.len() - self.pinned
    }

    pub fn evaluate(&self) -> Result<SceneResult> {
        let env = lower_envelope(&self.points)?;
        let max_k = self.window.dim_base + 1;
        let hull_k_faces = (0..max_k).map(|k| env.k_faces(k)).collect();
        let face_counts = env.face_counts(max_k);
        let scored = self.points.iter().map(|p| self.window.in_inner(p)).collect();
        Ok(SceneResult { extreme_flags: env.extreme, hull_k_faces, face_counts, scored })
    }

    /// Face counts `[pin][k]` of the pinned points only.
    pub fn pin_face_counts(&self) -> Result<Vec<Vec<u32>>> {
        let env = lower_envelope(&self.points)?;
        let pins: Vec<usize> = (0..self.pinned).collect();
        Ok(env.incident_face_counts(&pins, self.window.dim_base + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneResult {
    pub extreme_flags: Vec<bool>,
    /// `hull_k_faces[k]`: sorted vertex sets of the paraboloid k-faces.
    pub hull_k_faces: Vec<Vec<Vec<usize>>>,
    /// `face_counts[k][i]`: number of k-faces containing point `i`.
    pub face_counts: Vec<Vec<u32>>,
    /// Whether point `i` lies in the inner scoring window.
    pub scored: Vec<bool>,
}

impl SceneResult {
    /// `xi_k^(inf)` of point `i`, zero outside the inner window.
    pub fn xi(&self, k: usize, i: usize) -> f64 {
        if self.scored[i] {
            self.face_counts[k][i] as f64 / (k + 1) as f64
        } else {
            0.0
        }
    }

    pub fn xi_inf_scores(&self, k: usize) -> Vec<f64> {
        (0..self.scored.len()).map(|i| self.xi(k, i)).collect()
    }

    /// Sum of scores over the inner window as the fraction `(numerator, k + 1)`.
    pub fn inner_sum_exact(&self, k: usize) -> (u64, u64) {
        let num = self.face_counts[k].iter().zip(&self.scored).filter(|(_, &s)| s).map(|(&c, _)| c as u64).sum();
        (num, k as u64 + 1)
    }

    pub fn inner_sum(&self, k: usize) -> f64 {
        let (a, b) = self.inner_sum_exact(k);
        a as f64 / b as f64
    }

    /// Points, flags and faces as JSON.
    pub fn to_json(&self, scene: &ParaboloidScene) -> serde_json::Value {
        let points: Vec<&[f64]> = scene.points.iter().collect();
        serde_json::json!({
            "window": scene.window,
            "seed": scene.seed,
            "pinned": scene.pinned,
            "points": points,
            "extreme": self.extreme_flags,
            "scored": self.scored,
            "faces": self.hull_k_faces,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[[f64; 2]]) -> PointSet {
        PointSet::from_rows(2, rows)
    }

    #[test]
    fn lift_examples() {
        let p = pts(&[[0.0, 0.0], [2.0, 1.0]]);
        let l = lift(&p);
        assert_eq!(l.point(1), &[2.0, 3.0]);
        assert_eq!(unlift(&l), p);
    }

    #[test]
    fn small_configurations() {
        assert_eq!(extreme_points(&pts(&[[0.0, 0.0]])).unwrap(), vec![true]);
        assert_eq!(extreme_points(&pts(&[[0.0, 0.0], [0.0, 1.0]])).unwrap(), vec![true, false]);
        assert_eq!(extreme_points(&pts(&[[-1.0, 0.0], [1.0, 0.0]])).unwrap(), vec![true, true]);
        assert_eq!(extreme_points(&pts(&[[0.5, 0.3], [0.5, 0.3]])).unwrap(), vec![false, false]);
        // (0, 2) lies above the chord of the lifted neighbours (lifted height 2 vs 1.5).
        assert_eq!(extreme_points(&pts(&[[-1.0, 1.0], [0.0, 2.0], [1.0, 1.0]])).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn two_extreme_points_share_one_arc() {
        let env = lower_envelope(&pts(&[[-1.0, 0.0], [1.0, 0.0]])).unwrap();
        assert_eq!(env.k_faces(1), vec![vec![0, 1]]);
        assert_eq!(env.face_counts(2)[1], vec![1, 1]);
    }

    #[test]
    fn collinear_bases_reduce_to_a_line() {
        let p = PointSet::from_rows(3, &[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.5, 0.5, 3.0]]);
        let e = extreme_points(&p).unwrap();
        assert_eq!(e, vec![true, true, true, false]);
        assert_eq!(e, extreme_points_oracle(&p));
    }

    #[test]
    fn window_bookkeeping() {
        let w = SceneWindow::new(1, 10.0, 3.0, 2.0).unwrap();
        assert!(w.in_inner(&[3.0, 1.0]));
        assert!(!w.in_inner(&[3.5, 1.0]));
        assert_eq!(w.inner_area(), 6.0);
        assert!(SceneWindow::new(1, 4.0, 1.0, 2.0).is_err());
        let s = ParaboloidScene::sample(w, &[vec![0.0, 0.5]], &SeedKey::new(4)).unwrap();
        assert_eq!(s.points.point(0), &[0.0, 0.5]);
        assert_eq!(s.random_count() + 1, s.points.len());
        assert!(ParaboloidScene::sample(w, &[vec![0.0, 5.0]], &SeedKey::new(4)).is_err());
    }
}
