use hullvar::experiments::{
    depoisson_compare, run_sweep, weighted_check, volume_variance, DepoissonConfig, GridSpec, Mode, ProfileConfig, SweepConfig,
    WeightedConfig, View, VolumeConfig,
};
use hullvar::paraboloid::WindowConfig;
use hullvar::sampling::{sample_coupled, CountCoupling};
use hullvar::{make_body, SeedKey, TestFunction};

fn sweep(mode: Mode, grid: Vec<f64>, reps: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        body: "disk".parse().unwrap(),
        k: 0,
        mode,
        grid: GridSpec::Values(grid),
        replications: reps,
        seed,
        test_function: TestFunction::Constant(1.0),
        bootstrap: 1000,
        name: "t".into(),
    }
}

#[test]
fn disk_row_has_a_finite_variance_interval() {
    let rep = run_sweep(&sweep(Mode::Poisson, vec![1e3], 500, 1)).unwrap();
    let row = &rep.rows[0];
    assert!(row.error.is_none());
    assert!(row.var_fk > 0.0 && row.var_fk_ci.0 < row.var_fk && row.var_fk < row.var_fk_ci.1);
    assert!((row.var_fk_ci.1 - row.var_fk_ci.0).is_finite());
    assert!(row.mean_fk_ci.0 <= row.mean_fk && row.mean_fk <= row.mean_fk_ci.1);
}

#[test]
fn binomial_rows_use_points_per_unit_area() {
    let rep = run_sweep(&sweep(Mode::Binomial, vec![300.0, 600.0], 20, 2)).unwrap();
    for r in rep.rows_for(View::Binomial) {
        assert!((r.intensity - r.x / std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(r.mean_count, r.x);
    }
}

#[test]
fn equal_counts_give_identical_samples() {
    let disk = make_body("disk".parse().unwrap()).unwrap();
    let coupling = CountCoupling::new(200, 1.0).unwrap();
    let mut equal = 0;
    for r in 0..400u64 {
        let pair = sample_coupled(&disk, &coupling, &SeedKey::new(9).child(r)).unwrap();
        let (p, b) = (pair.poisson_view(), pair.binomial_view());
        let shared = p.len().min(b.len());
        assert_eq!(p.prefix(shared), b.prefix(shared));
        if pair.poisson_count == pair.binomial_count {
            assert_eq!(p, b);
            equal += 1;
        }
    }
    assert!(equal > 0);
}

#[test]
fn coupled_poisson_variance_matches_an_independent_sweep() {
    let n = 500.0;
    let dep = depoisson_compare(&DepoissonConfig {
        body: "disk".parse().unwrap(),
        k: 0,
        grid: GridSpec::Values(vec![n]),
        replications: 1500,
        seed: 3,
        name: "t".into(),
    })
    .unwrap();
    let ind = run_sweep(&sweep(Mode::Poisson, vec![n / std::f64::consts::PI], 1500, 4)).unwrap();
    let (a, sa) = (dep.rows[0].var_poisson, dep.rows[0].var_poisson_se);
    let (b, sb) = (ind.rows[0].var_fk, ind.rows[0].var_fk_se);
    assert!((a - b).abs() < 1.96 * (sa * sa + sb * sb).sqrt(), "{a} ± {sa} vs {b} ± {sb}");
}

#[test]
fn volume_identity_sides_are_positive_in_the_plane() {
    let rep = volume_variance(&VolumeConfig { body: "disk".parse().unwrap(), n: 300, replications: 200, seed: 5, name: "t".into() })
        .unwrap();
    assert!(rep.lhs > 0.0 && rep.rhs > 0.0 && rep.correction > 0.0);
    assert!(rep.mean_volume < std::f64::consts::PI);
}

fn th2(g: &str, grid: Vec<f64>, reps: usize) -> WeightedConfig {
    WeightedConfig {
        body: "disk".parse().unwrap(),
        k: 0,
        test_function: g.parse().unwrap(),
        grid: GridSpec::Values(grid),
        replications: reps,
        seed: 8,
        bootstrap: 200,
        window: WindowConfig { reps: 1000, ..WindowConfig::default() },
        profile: ProfileConfig { reps: 300, ..ProfileConfig::default() },
        name: "t".into(),
    }
}

#[test]
fn constant_and_zero_test_functions_reduce_to_the_unweighted_case() {
    let one = weighted_check(&th2("one", vec![2e3], 200)).unwrap();
    let asa = 2.0 * std::f64::consts::PI;
    assert!((one.integral_g - asa).abs() < 1e-9 && (one.integral_g2 - asa).abs() < 1e-9);
    assert!((one.rows[0].var_rhs - one.sigma2.value * asa).abs() < 1e-12);
    let zero = weighted_check(&th2("zero", vec![2e3], 50)).unwrap();
    let r = &zero.rows[0];
    assert_eq!((r.var_lhs, r.var_rhs, r.mean_lhs, r.mean_rhs), (0.0, 0.0, 0.0, 0.0));
}

/// A Gaussian bump at (1, 0): normalized Monte Carlo moments of the weighted
/// measure against the paraboloid constants times boundary integrals.
#[test]
fn bump_weighted_moments_match_the_limit() {
    let rep = weighted_check(&th2("bump:1,0;0.5", vec![1e5], 800)).unwrap();
    let r = &rep.rows[0];
    println!("bump check: variance ratio {:.3}, mean ratio {:.3}", r.var_ratio, r.mean_ratio);
    assert!((0.8..=1.2).contains(&r.var_ratio), "variance ratio {}", r.var_ratio);
    assert!((0.9..=1.1).contains(&r.mean_ratio), "mean ratio {}", r.mean_ratio);
}
