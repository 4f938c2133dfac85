//! Convex hulls with k-face enumeration and per-vertex k-face scores.
//!
//! Hulls are simplicial: inputs in special position are resolved by the
//! symbolic perturbation in [`crate::predicates`], so every facet has
//! exactly `d` vertices and every `(k+1)`-subset of a facet is a k-face.

mod incremental;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::predicates::orient;
use crate::testfn::TestFunction;


/// Largest supported ambient dimension.
pub const MAX_HULL_DIM: usize = 5;

/// Boundary complex of a simplicial convex hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceLattice {
    pub dim: usize,
    pub input_count: usize,
    /// Sorted indices of hull vertices.
    pub vertex_indices: Vec<usize>,
    /// Facets as oriented index lists: `orient(facet, x) < 0` for interior `x`.
    pub facets: Vec<Vec<usize>>,
    /// `k_faces[k]` holds the sorted vertex sets of all k-faces, sorted.
    pub k_faces: Vec<Vec<Vec<usize>>>,
    pub f_vector: Vec<usize>,
}

/// Computes the convex hull of `points` (dimension 2 to 5).
pub fn convex_hull(points: &PointSet) -> Result<FaceLattice> {
    let d = points.dim();
    if !(2..=MAX_HULL_DIM).contains(&d) {
        return Err(Error::InvalidInput(format!("hull dimension {d} outside 2..={MAX_HULL_DIM}")));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let facets = incremental::IncrementalHull::build(points)?;
    Ok(FaceLattice::from_facets(d, points.len(), facets))
}

/// Oriented facets (`orient(facet, x) > 0` iff `x` is beyond) of the hull of
/// a full-dimensional point set, without face enumeration.
pub(crate) fn oriented_facets(points: &PointSet) -> Result<Vec<Vec<usize>>> {
    incremental::IncrementalHull::build(points)
}

impl FaceLattice {
    fn from_facets(dim: usize, input_count: usize, mut facets: Vec<Vec<usize>>) -> Self {
        facets.sort_by(|a, b| {
            let mut sa = a.clone();
            let mut sb = b.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            sa.cmp(&sb)
        });
        let mut k_faces = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut set: HashSet<Vec<usize>> = HashSet::new();
            for f in &facets {
                let mut sorted = f.clone();
                sorted.sort_unstable();
                for_each_subset(&sorted, k + 1, |s| {
                    set.insert(s.to_vec());
                });
            }
            let mut faces: Vec<Vec<usize>> = set.into_iter().collect();
            faces.sort_unstable();
            k_faces.push(faces);
        }
        let vertex_indices = k_faces[0].iter().map(|v| v[0]).collect();
        let f_vector = k_faces.iter().map(Vec::len).collect();
        Self { dim, input_count, vertex_indices, facets, k_faces, f_vector }
    }

    /// `sum_k (-1)^k f_k`, which equals `1 - (-1)^d` for a polytope boundary.
    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector.iter().enumerate().map(|(k, &f)| if k % 2 == 0 { f as i64 } else { -(f as i64) }).sum()
    }

    pub fn expected_euler_characteristic(&self) -> i64 {
        if self.dim % 2 == 0 {
            0
        } else {
            2
        }
    }

    /// Closed-hull membership of input point `i`, by exact facet tests.
    pub fn contains_input(&self, points: &PointSet, i: usize) -> bool {
        if self.vertex_indices.binary_search(&i).is_ok() {
            return true;
        }
        self.facets.iter().all(|f| orient(points, f, i) < 0)
    }

    /// Checks the structural invariants; used by tests and diagnostics.
    pub fn validate(&self, points: &PointSet) -> Result<()> {
        let fail = |m: String| Err(Error::Runtime(format!("invalid lattice: {m}")));
        if self.facets.iter().any(|f| f.len() != self.dim) {
            return fail("facet with wrong vertex count".into());
        }
        if self.f_vector[0] != self.vertex_indices.len() {
            return fail("f_0 differs from the vertex count".into());
        }
        if self.euler_characteristic() != self.expected_euler_characteristic() {
            return fail(format!("Euler relation fails for f = {:?}", self.f_vector));
        }
        for i in 0..points.len() {
            if !self.contains_input(points, i) {
                return fail(format!("input point {i} lies outside the hull"));
            }
        }
        Ok(())
    }

    /// Volume by cones from the vertex centroid over the facets.
    pub fn volume(&self, points: &PointSet) -> f64 {
        let d = self.dim;
        let mut c = vec![0.0; d];
        for &v in &self.vertex_indices {
            for (cj, x) in c.iter_mut().zip(points.point(v)) {
                *cj += x;
            }
        }
        for cj in &mut c {
            *cj /= self.vertex_indices.len() as f64;
        }
        let fact: f64 = (1..=d).map(|x| x as f64).product();
        let mut total = 0.0;
        if d == 2 {
            for f in &self.facets {
                let a = points.point(f[0]);
                let b = points.point(f[1]);
                total += ((a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0])).abs();
            }
            return total / 2.0;
        }
        for f in &self.facets {
            let m: Vec<f64> = f.iter().flat_map(|&v| points.point(v).iter().zip(&c).map(|(a, b)| a - b)).collect();
            total += nalgebra::DMatrix::from_row_slice(d, d, &m).determinant().abs();
        }
        total / fact
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sorted: Vec<Vec<usize>> = self.k_faces[self.dim - 1].clone();
        serde_json::json!({
            "dim": self.dim,
            "input_count": self.input_count,
            "vertices": self.vertex_indices,
            "facets": sorted,
            "f_vector": self.f_vector,
        })
    }
}

/// Calls `f` on every `size`-subset of `items` in lexicographic order.
pub(crate) fn for_each_subset<F: FnMut(&[usize])>(items: &[usize], size: usize, mut f: F) {
    fn rec<F: FnMut(&[usize])>(items: &[usize], size: usize, start: usize, buf: &mut Vec<usize>, f: &mut F) {
        if buf.len() == size {
            f(buf);
            return;
        }
        let need = size - buf.len();
        for i in start..=items.len().saturating_sub(need) {
            buf.push(items[i]);
            rec(items, size, i + 1, buf, f);
            buf.pop();
        }
    }
    if size <= items.len() {
        rec(items, size, 0, &mut Vec::with_capacity(size), &mut f);
    }
}

/// Per-input-point k-face scores `xi_k(x) = #{k-faces containing x} / (k+1)`.
///
/// Scores are stored as integer face counts so sums stay exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub k: usize,
    /// Number of k-faces containing each input point.
    pub face_counts: Vec<u64>,
}

impl ScoreVector {
    pub fn denominator(&self) -> u64 {
        self.k as u64 + 1
    }

    pub fn score(&self, i: usize) -> f64 {
        self.face_counts[i] as f64 / self.denominator() as f64
    }

    pub fn support(&self) -> Vec<usize> {
        self.face_counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect()
    }

    /// The sum of scores as the exact fraction `numerator / (k+1)`.
    pub fn total_exact(&self) -> (u64, u64) {
        (self.face_counts.iter().sum(), self.denominator())
    }

    pub fn total(&self) -> f64 {
        let (num, den) = self.total_exact();
        num as f64 / den as f64
    }
}

pub fn xi_scores(lattice: &FaceLattice, k: usize) -> Result<ScoreVector> {
    if k >= lattice.dim {
        return Err(Error::InvalidInput(format!("face dimension {k} must be below {}", lattice.dim)));
    }
    let mut face_counts = vec![0u64; lattice.input_count];
    for face in &lattice.k_faces[k] {
        for &v in face {
            face_counts[v] += 1;
        }
    }
    Ok(ScoreVector { k, face_counts })
}

/// `<g, mu> = sum_x g(x) xi_k(x)`.
pub fn weighted_score_sum(points: &PointSet, scores: &ScoreVector, g: &TestFunction) -> f64 {
    scores
        .face_counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| g.eval(points.point(i)) * c as f64)
        .sum::<f64>()
        / scores.denominator() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PointSet {
        PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn square_corners() {
        let pts = square();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.f_vector, vec![4, 4]);
        h.validate(&pts).unwrap();
        assert!((h.volume(&pts) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron() {
        let pts = PointSet::from_rows(3, &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.f_vector, vec![4, 6, 4]);
        assert!((h.volume(&pts) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn interior_points_are_not_vertices() {
        let mut rows = vec![[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
        rows.extend([[1.0, 1.0], [0.5, 2.0], [2.0, 0.5]]);
        let pts = PointSet::from_rows(2, &rows);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertex_indices, vec![0, 1, 2]);
        h.validate(&pts).unwrap();
    }

    #[test]
    fn collinear_input_is_rejected_as_lower_dimensional() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        match convex_hull(&pts) {
            Err(Error::Degenerate { rank: 1, dim: 2 }) => {}
            other => panic!("expected degenerate error, got {other:?}"),
        }
        let flat = PointSet::from_rows(3, &[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.3, 0.2, 1.0]]);
        assert!(matches!(convex_hull(&flat), Err(Error::Degenerate { rank: 2, dim: 3 })));
    }

    #[test]
    fn cube_corners_triangulate_consistently() {
        let mut rows = Vec::new();
        for code in 0..8 {
            rows.push([(code & 1) as f64, ((code >> 1) & 1) as f64, ((code >> 2) & 1) as f64]);
        }
        let pts = PointSet::from_rows(3, &rows);
        let h = convex_hull(&pts).unwrap();
        // Any simplicial 3-polytope on 8 vertices has 18 edges and 12 facets.
        assert_eq!(h.f_vector, vec![8, 18, 12]);
        h.validate(&pts).unwrap();
        assert!((h.volume(&pts) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_do_not_break_the_hull() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.2, 0.2]]);
        let h = convex_hull(&pts).unwrap();
        h.validate(&pts).unwrap();
        assert_eq!(h.f_vector[0], h.f_vector[1]);
    }

    #[test]
    fn triangle_scores() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let h = convex_hull(&pts).unwrap();
        let s0 = xi_scores(&h, 0).unwrap();
        let s1 = xi_scores(&h, 1).unwrap();
        for i in 0..3 {
            assert_eq!(s0.score(i), 1.0);
            assert_eq!(s1.score(i), 1.0);
        }
        assert_eq!(s0.total_exact(), (3, 1));
        assert_eq!(s1.total_exact(), (6, 2));
        assert!(xi_scores(&h, 2).is_err());
    }

    #[test]
    fn weighted_sums_on_a_triangle() {
        let pts = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let h = convex_hull(&pts).unwrap();
        let s0 = xi_scores(&h, 0).unwrap();
        assert_eq!(weighted_score_sum(&pts, &s0, &TestFunction::Constant(1.0)), 3.0);
        assert_eq!(weighted_score_sum(&pts, &s0, &TestFunction::Constant(0.0)), 0.0);
        assert_eq!(weighted_score_sum(&pts, &s0, &TestFunction::Coordinate(0)), 1.0);
    }

    #[test]
    fn subsets_are_enumerated_in_order() {
        let mut out = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, |s| out.push(s.to_vec()));
        assert_eq!(out, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
    }
}
