//! Randomized incremental convex hull with conflict lists.
//!
//! Each outside point is attached to one facet it sees. Inserting a point
//! walks the connected region of visible facets, cones the horizon to the
//! new point, and hands the orphaned outside points to the new facets; a
//! point that sees none of them is inside the hull and is dropped.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::points::{dist2, PointSet};
use crate::predicates::{affine_rank, orient, orient_exact};

const NONE: u32 = u32::MAX;

struct Facet {
    /// Oriented so that `orient(verts, x) > 0` iff `x` is beyond the facet.
    verts: Vec<usize>,
    /// `neighbors[i]` shares the ridge opposite `verts[i]`.
    neighbors: Vec<u32>,
    outside: Vec<u32>,
    alive: bool,
    mark: u32,
}

pub(crate) struct IncrementalHull<'a> {
    pts: &'a PointSet,
    d: usize,
    facets: Vec<Facet>,
    conflict: Vec<u32>,
    stamp: u32,
}

impl<'a> IncrementalHull<'a> {
    pub(crate) fn build(pts: &'a PointSet) -> Result<Vec<Vec<usize>>> {
        let d = pts.dim();
        let n = pts.len();
        if n < d + 1 {
            return Err(Error::Degenerate { rank: n.saturating_sub(1).min(d), dim: d });
        }
        let simplex = initial_simplex(pts)?;
        let mut hull = IncrementalHull { pts, d, facets: Vec::new(), conflict: vec![NONE; n], stamp: 0 };
        hull.make_simplex(&simplex);

        let mut is_vertex = vec![false; n];
        for &s in &simplex {
            is_vertex[s] = true;
        }
        let (extremes, steiner) = direction_extremes(pts);
        for s in extremes {
            if is_vertex[s] {
                continue;
            }
            if let Some(f) = hull.find_visible_linear(s) {
                hull.conflict[s] = f;
                hull.insert(s);
            }
            is_vertex[s] = true;
        }

        let (center, r2) = hull.inner_ball(steiner);
        let alive: Vec<u32> = hull.alive_ids();
        let mut pending = Vec::new();
        for i in 0..n {
            if is_vertex[i] || dist2(pts.point(i), &center) < r2 {
                continue;
            }
            if let Some(&f) = alive.iter().find(|&&f| hull.sees(f, i)) {
                hull.conflict[i] = f;
                hull.facets[f as usize].outside.push(i as u32);
                pending.push(i);
            }
        }

        shuffle(&mut pending, n as u64);
        for p in pending {
            if hull.conflict[p] != NONE {
                hull.insert(p);
            }
        }

        Ok(hull.facets.into_iter().filter(|f| f.alive).map(|f| f.verts).collect())
    }

    #[inline]
    fn sees(&self, f: u32, q: usize) -> bool {
        orient(self.pts, &self.facets[f as usize].verts, q) > 0
    }

    fn alive_ids(&self) -> Vec<u32> {
        (0..self.facets.len() as u32).filter(|&f| self.facets[f as usize].alive).collect()
    }

    fn find_visible_linear(&self, q: usize) -> Option<u32> {
        self.alive_ids().into_iter().find(|&f| self.sees(f, q))
    }

    fn make_simplex(&mut self, s: &[usize]) {
        let d = self.d;
        for i in 0..=d {
            let mut verts: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            // Facet i omits s[i]; neighbor across verts[pos] is the facet omitting that vertex.
            let mut owners: Vec<usize> = (0..=d).filter(|&j| j != i).collect();
            if orient(self.pts, &verts, s[i]) > 0 {
                verts.swap(0, 1);
                owners.swap(0, 1);
            }
            let neighbors = owners.iter().map(|&j| j as u32).collect();
            self.facets.push(Facet { verts, neighbors, outside: Vec::new(), alive: true, mark: 0 });
        }
    }

    fn insert(&mut self, p: usize) {
        let d = self.d;
        let start = self.conflict[p];
        debug_assert!(start != NONE);
        self.stamp += 1;
        let vis = 2 * self.stamp;
        let invis = vis + 1;

        let mut visible = vec![start];
        self.facets[start as usize].mark = vis;
        let mut horizon: Vec<(u32, usize, u32)> = Vec::new();
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for pos in 0..d {
                let g = self.facets[f as usize].neighbors[pos];
                let mark = self.facets[g as usize].mark;
                if mark == vis {
                    continue;
                }
                if mark != invis {
                    if self.sees(g, p) {
                        self.facets[g as usize].mark = vis;
                        visible.push(g);
                        continue;
                    }
                    self.facets[g as usize].mark = invis;
                }
                horizon.push((f, pos, g));
            }
        }

        let first_new = self.facets.len() as u32;
        let mut ridges: HashMap<Vec<usize>, (u32, usize)> = HashMap::with_capacity(horizon.len() * d);
        for &(f, pos, g) in &horizon {
            let id = self.facets.len() as u32;
            let mut verts = self.facets[f as usize].verts.clone();
            verts[pos] = p;
            let mut neighbors = vec![NONE; d];
            neighbors[pos] = g;
            if let Some(slot) = self.facets[g as usize].neighbors.iter_mut().find(|n| **n == f) {
                *slot = id;
            }
            for j in 0..d {
                if j == pos {
                    continue;
                }
                let mut key: Vec<usize> =
                    verts.iter().enumerate().filter(|&(t, _)| t != pos && t != j).map(|(_, &v)| v).collect();
                key.sort_unstable();
                match ridges.remove(&key) {
                    Some((other, oj)) => {
                        neighbors[j] = other;
                        self.facets[other as usize].neighbors[oj] = id;
                    }
                    None => {
                        ridges.insert(key, (id, j));
                    }
                }
            }
            self.facets.push(Facet { verts, neighbors, outside: Vec::new(), alive: true, mark: 0 });
        }
        debug_assert!(ridges.is_empty(), "horizon did not close up");
        let last_new = self.facets.len() as u32;

        self.conflict[p] = NONE;
        for &f in &visible {
            let orphans = std::mem::take(&mut self.facets[f as usize].outside);
            self.facets[f as usize].alive = false;
            for q in orphans {
                let q = q as usize;
                if q == p {
                    continue;
                }
                match (first_new..last_new).find(|&nf| self.sees(nf, q)) {
                    Some(nf) => {
                        self.conflict[q] = nf;
                        self.facets[nf as usize].outside.push(q as u32);
                    }
                    None => self.conflict[q] = NONE,
                }
            }
        }
    }

    /// A squared radius such that the ball around `c` lies strictly inside
    /// every facet's half-space (zero if `c` is not interior).
    fn inner_ball(&self, c: Vec<f64>) -> (Vec<f64>, f64) {
        let alive = self.alive_ids();
        let mut r = f64::INFINITY;
        for &f in &alive {
            let fv = &self.facets[f as usize].verts;
            let normal = facet_normal(self.pts, fv);
            let nn = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nn == 0.0 {
                return (c, 0.0);
            }
            let p0 = self.pts.point(fv[0]);
            // `c` is a convex combination of vertices, so it is never beyond a facet.
            let dist = normal.iter().zip(c.iter().zip(p0)).map(|(n, (ci, pi))| n * (ci - pi)).sum::<f64>().abs() / nn;
            r = r.min(dist);
        }
        let r = r * (1.0 - 1e-7);
        (c, if r.is_finite() && r > 0.0 { r * r } else { 0.0 })
    }
}

/// Generalized cross product of the facet's edge vectors.
fn facet_normal(pts: &PointSet, verts: &[usize]) -> Vec<f64> {
    let d = pts.dim();
    let p0 = pts.point(verts[0]);
    let rows: Vec<Vec<f64>> =
        verts[1..].iter().map(|&v| pts.point(v).iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    (0..d)
        .map(|col| {
            let m: Vec<f64> = rows.iter().flat_map(|r| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &x)| x)).collect();
            let minor = if d == 1 { 1.0 } else { nalgebra::DMatrix::from_row_slice(d - 1, d - 1, &m).determinant() };
            if col % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
        .collect()
}

/// Indices of points extreme in a fixed set of directions, and the mean of
/// those points over the directions (a discrete Steiner point, central for
/// symmetric inputs).
fn direction_extremes(pts: &PointSet) -> (Vec<usize>, Vec<f64>) {
    let d = pts.dim();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if d == 2 {
        for k in 0..64 {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            dirs.push(vec![t.cos(), t.sin()]);
        }
    } else if d == 3 {
        for code in 0..27 {
            let v = vec![(code % 3) as f64 - 1.0, ((code / 3) % 3) as f64 - 1.0, (code / 9) as f64 - 1.0];
            if v.iter().any(|&x| x != 0.0) {
                dirs.push(v);
            }
        }
    } else {
        for j in 0..d {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; d];
                v[j] = s;
                dirs.push(v);
            }
        }
    }
    // Extremes of a strided subsample are enough: they only seed the hull and
    // the inner ball used to discard interior points.
    let stride = (pts.len() / 16384).max(1);
    let mut best = vec![0usize; dirs.len()];
    let mut best_val = vec![f64::NEG_INFINITY; dirs.len()];
    for i in (0..pts.len()).step_by(stride) {
        let p = pts.point(i);
        for (j, dir) in dirs.iter().enumerate() {
            let v: f64 = p.iter().zip(dir).map(|(a, b)| a * b).sum();
            if v > best_val[j] {
                best_val[j] = v;
                best[j] = i;
            }
        }
    }
    let mut steiner = vec![0.0; d];
    for &i in &best {
        for (s, x) in steiner.iter_mut().zip(pts.point(i)) {
            *s += x / best.len() as f64;
        }
    }
    let mut out = best;
    out.sort_unstable();
    out.dedup();
    (out, steiner)
}

/// Picks `d + 1` affinely independent points, far apart when possible.
fn initial_simplex(pts: &PointSet) -> Result<Vec<usize>> {
    let d = pts.dim();
    let n = pts.len();
    let first = (0..n)
        .min_by(|&a, &b| pts.point(a).partial_cmp(pts.point(b)).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut chosen = vec![first];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = pts.point(first).to_vec();
    while chosen.len() < d + 1 {
        let mut best = None;
        let mut best_d = 0.0;
        let mut r = vec![0.0; d];
        for i in 0..n {
            residual(pts.point(i), &origin, &basis, &mut r);
            let dd: f64 = r.iter().map(|x| x * x).sum();
            if dd > best_d {
                best_d = dd;
                best = Some(i);
            }
        }
        match best {
            Some(i) => {
                residual(pts.point(i), &origin, &basis, &mut r);
                let nr = best_d.sqrt();
                basis.push(r.iter().map(|x| x / nr).collect());
                chosen.push(i);
            }
            None => break,
        }
    }
    if chosen.len() == d + 1 {
        let rows: Vec<&[f64]> = chosen[1..].iter().map(|&i| pts.point(i)).collect();
        if orient_exact(&rows, pts.point(chosen[0])) != 0 {
            return Ok(chosen);
        }
    }
    exact_simplex(pts)
}

/// Component of `p - origin` orthogonal to the orthonormal `basis`.
fn residual(p: &[f64], origin: &[f64], basis: &[Vec<f64>], r: &mut [f64]) {
    for ((rj, a), b) in r.iter_mut().zip(p).zip(origin) {
        *rj = a - b;
    }
    for b in basis {
        let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
        for (rj, bj) in r.iter_mut().zip(b) {
            *rj -= c * bj;
        }
    }
}

fn exact_simplex(pts: &PointSet) -> Result<Vec<usize>> {
    let d = pts.dim();
    let mut chosen = vec![0usize];
    let mut rank = 0;
    for i in 1..pts.len() {
        chosen.push(i);
        let r = affine_rank(pts, &chosen);
        if r > rank {
            rank = r;
            if rank == d {
                return Ok(chosen);
            }
        } else {
            chosen.pop();
        }
    }
    Err(Error::Degenerate { rank, dim: d })
}

/// Deterministic Fisher-Yates driven by a splitmix sequence.
fn shuffle(v: &mut [usize], seed: u64) {
    let mut s = seed ^ 0x2545_f491_4f6c_dd1d;
    let mut next = || {
        s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    for i in (1..v.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}
