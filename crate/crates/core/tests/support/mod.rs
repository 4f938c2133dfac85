//! Independent oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hullvar::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact determinant of a small integer matrix by cofactor expansion.
pub fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det_i128(&minor)
            })
            .sum(),
    }
}

/// Sign of `det[p_i - q]` for integer points.
pub fn orientation(simplex: &[&[i64]], q: &[i64]) -> i32 {
    let m: Vec<Vec<i128>> = simplex.iter().map(|p| p.iter().zip(q).map(|(a, b)| (*a - *b) as i128).collect()).collect();
    det_i128(&m).signum() as i32
}

fn subsets(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Facets of the hull of integer points in general position, by testing
/// every d-subset against all other points. `None` if some point lies on the
/// affine hull of a candidate (the instance is not in general position).
pub fn brute_force_facets(points: &[Vec<i64>]) -> Option<BTreeSet<Vec<usize>>> {
    let n = points.len();
    let d = points[0].len();
    let mut facets = BTreeSet::new();
    let mut degenerate = false;
    subsets(n, d, &mut |s| {
        if degenerate {
            return;
        }
        let simplex: Vec<&[i64]> = s.iter().map(|&i| points[i].as_slice()).collect();
        let (mut pos, mut neg) = (false, false);
        for (j, q) in points.iter().enumerate() {
            if s.contains(&j) {
                continue;
            }
            match orientation(&simplex, q) {
                1 => pos = true,
                -1 => neg = true,
                _ => {
                    degenerate = true;
                    return;
                }
            }
        }
        if !(pos && neg) {
            facets.insert(s.to_vec());
        }
    });
    (!degenerate).then_some(facets)
}

/// f-vector of the simplicial complex generated by `facets`.
pub fn f_vector_of(facets: &BTreeSet<Vec<usize>>, d: usize) -> Vec<usize> {
    (0..d)
        .map(|k| {
            let mut faces = BTreeSet::new();
            for f in facets {
                subsets(f.len(), k + 1, &mut |s| {
                    faces.insert(s.iter().map(|&i| f[i]).collect::<Vec<_>>());
                });
            }
            faces.len()
        })
        .collect()
}

/// Number of k-faces containing each point, from brute-force facets.
pub fn face_counts_of(facets: &BTreeSet<Vec<usize>>, n: usize, k: usize) -> Vec<u64> {
    let mut faces = BTreeSet::new();
    for f in facets {
        subsets(f.len(), k + 1, &mut |s| {
            faces.insert(s.iter().map(|&i| f[i]).collect::<Vec<_>>());
        });
    }
    let mut counts = vec![0; n];
    for face in faces {
        for v in face {
            counts[v] += 1;
        }
    }
    counts
}

/// Random integer instance: uniform in a cube, or rounded points of a sphere
/// (most of which are hull vertices).
pub fn integer_instance(seed: u64, n: usize, d: usize, on_sphere: bool) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const R: f64 = (1u64 << 20) as f64;
    (0..n)
        .map(|_| {
            if on_sphere {
                let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                g.iter().map(|x| (R * x / norm).round() as i64).collect()
            } else {
                (0..d).map(|_| rng.random_range(-(1i64 << 20)..=(1i64 << 20))).collect()
            }
        })
        .collect()
}

pub fn to_pointset(points: &[Vec<i64>]) -> PointSet {
    PointSet::from_rows(points[0].len(), &points.iter().map(|p| p.iter().map(|&x| x as f64).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Sorted vertex sets of the library's facets.
pub fn library_facets(lattice: &hullvar::FaceLattice) -> BTreeSet<Vec<usize>> {
    lattice
        .facets
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.sort_unstable();
            f
        })
        .collect()
}
