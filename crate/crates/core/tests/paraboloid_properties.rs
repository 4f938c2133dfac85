use hullvar::paraboloid::{extreme_points, extreme_points_oracle, ParaboloidScene, SceneWindow};
use hullvar::{PointSet, SeedKey};
use proptest::prelude::*;

/// Dyadic coordinates on a 1/64 grid keep lifts, shifts and comparisons exact.
fn dyadic_points(dim: usize, max_n: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(prop::collection::vec(-256i32..=256, dim), 1..=max_n).prop_map(move |rows| {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| r.into_iter().enumerate().map(|(i, x)| if i + 1 == dim { x.abs() as f64 / 64.0 } else { x as f64 / 64.0 }).collect())
            .collect();
        PointSet::from_rows(dim, &rows)
    })
}

fn shifted(points: &PointSet, shift: &[f64]) -> PointSet {
    points.map(points.dim(), |p, out| {
        for (o, (x, s)) in out.iter_mut().zip(p.iter().zip(shift)) {
            *o = x + s;
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lifted_hull_agrees_with_the_definition_in_the_plane(points in dyadic_points(2, 15)) {
        prop_assert_eq!(extreme_points(&points).unwrap(), extreme_points_oracle(&points));
    }

    #[test]
    fn lifted_hull_agrees_with_the_definition_in_space(points in dyadic_points(3, 12)) {
        prop_assert_eq!(extreme_points(&points).unwrap(), extreme_points_oracle(&points));
    }

    /// Horizontal translations and a common height shift move every
    /// paraboloid alike.
    #[test]
    fn extremality_is_translation_invariant(points in dyadic_points(3, 15), dv in prop::collection::vec(-4i32..=4, 2), dh in 0i32..=4) {
        let base = extreme_points(&points).unwrap();
        let shift = [dv[0] as f64, dv[1] as f64, dh as f64];
        prop_assert_eq!(extreme_points(&shifted(&points, &shift)).unwrap(), base);
    }

    /// Adding a point can only cover paraboloids, never uncover them.
    #[test]
    fn extreme_sets_shrink_when_points_are_added(points in dyadic_points(2, 14), extra in dyadic_points(2, 1)) {
        let before = extreme_points(&points).unwrap();
        let mut more = points.clone();
        more.push(extra.point(0));
        let after = extreme_points(&more).unwrap();
        for i in 0..points.len() {
            prop_assert!(!after[i] || before[i]);
        }
    }
}

#[test]
fn hundred_random_scenes_match_the_oracle() {
    let mut checked = 0;
    for (dim_base, l) in [(1usize, 6.0), (2, 3.0)] {
        for seed in 0..60u64 {
            let window = SceneWindow::new(dim_base, l, 1.5, 0.0).unwrap();
            let scene = ParaboloidScene::sample(window, &[], &SeedKey::new(seed).label("oracle")).unwrap();
            if scene.points.is_empty() || scene.points.len() > 15 {
                continue;
            }
            assert_eq!(extreme_points(&scene.points).unwrap(), extreme_points_oracle(&scene.points), "seed {seed}");
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} instances");
}
