//! Flat storage for point sets of runtime dimension.

use serde::{Deserialize, Serialize};

/// A list of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "point dimension must be positive");
        Self { dim, coords: Vec::new() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0, "point dimension must be positive");
        Self { dim, coords: Vec::with_capacity(dim * n) }
    }

    /// Builds a point set from row-major coordinates.
    ///
    /// Panics if `coords.len()` is not a multiple of `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0, "coordinate buffer does not match dimension");
        Self { dim, coords }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Self {
        let mut set = Self::with_capacity(dim, rows.len());
        for r in rows {
            set.push(r.as_ref());
        }
        set
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim, "point has wrong dimension");
        self.coords.extend_from_slice(p);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points (or all of them if fewer).
    pub fn prefix(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet { dim: self.dim, coords: self.coords[..n * self.dim].to_vec() }
    }

    /// Applies `f` to every point, producing a set of dimension `out_dim`.
    pub fn map<F>(&self, out_dim: usize, mut f: F) -> PointSet
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut out = PointSet::with_capacity(out_dim, self.len());
        let mut buf = vec![0.0; out_dim];
        for p in self.iter() {
            f(p, &mut buf);
            out.push(&buf);
        }
        out
    }

    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut out = PointSet::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.push(self.point(i));
        }
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
