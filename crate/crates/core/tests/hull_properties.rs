mod support;

use hullvar::{convex_hull, xi_scores, Error, PointSet};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

fn instance() -> impl Strategy<Value = (u64, usize, usize, bool)> {
    (any::<u64>(), 2usize..=4, 0usize..=16, any::<bool>()).prop_map(|(seed, d, extra, sphere)| (seed, d, d + 2 + extra, sphere))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facets_match_brute_force((seed, d, n, sphere) in instance()) {
        let pts = integer_instance(seed, n, d, sphere);
        let oracle = brute_force_facets(&pts);
        prop_assume!(oracle.is_some());
        let oracle = oracle.unwrap();
        let lattice = convex_hull(&to_pointset(&pts)).unwrap();
        prop_assert_eq!(library_facets(&lattice), oracle.clone());
        prop_assert_eq!(&lattice.f_vector, &f_vector_of(&oracle, d));
    }

    #[test]
    fn euler_relation_holds((seed, d, n, sphere) in instance()) {
        let lattice = convex_hull(&to_pointset(&integer_instance(seed, n, d, sphere))).unwrap();
        let chi: i64 = lattice.f_vector.iter().enumerate().map(|(k, &f)| if k % 2 == 0 { f as i64 } else { -(f as i64) }).sum();
        prop_assert_eq!(chi, 1 - if d % 2 == 0 { 1 } else { -1 });
    }

    #[test]
    fn scores_sum_to_face_counts_exactly((seed, d, n, sphere) in instance()) {
        let pts = integer_instance(seed, n, d, sphere);
        let oracle = brute_force_facets(&pts);
        prop_assume!(oracle.is_some());
        let oracle = oracle.unwrap();
        let lattice = convex_hull(&to_pointset(&pts)).unwrap();
        for k in 0..d {
            let scores = xi_scores(&lattice, k).unwrap();
            let (num, den) = scores.total_exact();
            prop_assert_eq!(num, den * lattice.f_vector[k] as u64);
            prop_assert_eq!(&scores.face_counts, &face_counts_of(&oracle, n, k));
        }
    }

    #[test]
    fn insertion_order_does_not_matter((seed, d, n, sphere) in instance(), shuffle in any::<u64>()) {
        let pts = integer_instance(seed, n, d, sphere);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let permuted: Vec<Vec<i64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let a = library_facets(&convex_hull(&to_pointset(&pts)).unwrap());
        let b: std::collections::BTreeSet<Vec<usize>> = library_facets(&convex_hull(&to_pointset(&permuted)).unwrap())
            .into_iter()
            .map(|f| {
                let mut g: Vec<usize> = f.iter().map(|&i| perm[i]).collect();
                g.sort_unstable();
                g
            })
            .collect();
        prop_assert_eq!(a, b);
    }

    /// Dyadic points under integer affine maps stay exactly representable, so
    /// the combinatorics and every score must be identical.
    #[test]
    fn scores_are_invariant_under_integer_affine_maps(
        (seed, d, n, sphere) in instance(),
        entries in prop::collection::vec(-3i64..=3, 16),
        shift in prop::collection::vec(-8i64..=8, 4),
    ) {
        let ints = integer_instance(seed, n, d, sphere);
        prop_assume!(brute_force_facets(&ints).is_some());
        let a: Vec<Vec<i64>> = (0..d).map(|i| entries[i * d..(i + 1) * d].to_vec()).collect();
        let a128: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        prop_assume!(det_i128(&a128) != 0);
        let scale = (1u64 << 20) as f64;
        let x: Vec<Vec<f64>> = ints.iter().map(|p| p.iter().map(|&c| c as f64 / scale).collect()).collect();
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|p| (0..d).map(|i| (0..d).map(|j| a[i][j] as f64 * p[j]).sum::<f64>() + shift[i] as f64).collect())
            .collect();
        let hx = convex_hull(&PointSet::from_rows(d, &x)).unwrap();
        let hy = convex_hull(&PointSet::from_rows(d, &y)).unwrap();
        prop_assert_eq!(&hx.k_faces, &hy.k_faces);
        for k in 0..d {
            prop_assert_eq!(xi_scores(&hx, k).unwrap(), xi_scores(&hy, k).unwrap());
        }
    }
}

#[test]
fn unit_cube_volume_and_counts() {
    let rows: Vec<[f64; 3]> = (0..8).map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]).collect();
    let mut pts = PointSet::from_rows(3, &rows);
    pts.push(&[0.5, 0.5, 0.5]);
    let lattice = convex_hull(&pts).unwrap();
    assert_eq!(lattice.vertex_indices, (0..8).collect::<Vec<_>>());
    assert!((lattice.volume(&pts) - 1.0).abs() < 1e-12);
    // Triangulated cube: 12 triangles, 18 edges.
    assert_eq!(lattice.f_vector, vec![8, 18, 12]);
}

#[test]
fn flat_input_is_reported_as_degenerate() {
    let pts = PointSet::from_rows(3, &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.3, 0.2, 0.0]]);
    assert!(matches!(convex_hull(&pts), Err(Error::Degenerate { rank: 2, dim: 3 })));
}
