//! Replicated experiments on random polytopes: intensity and sample-size
//! sweeps with variance estimates, scaling fits, the Poisson/binomial
//! comparison, the volume-variance identity, the weighted-measure check and
//! the rescaled intensity check.

mod depoisson;
mod intensity;
mod weighted;
mod volume;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use depoisson::{depoisson_compare, DepoissonConfig, DepoissonReport, DepoissonRow};
pub use intensity::{intensity_check, IntensityConfig, IntensityReport, IntensityRow};
pub use weighted::{weighted_check, ProfileConfig, WeightedConfig, WeightedReport, WeightedRow};
pub use volume::{volume_variance, VolumeConfig, VolumeReport};

use crate::bodies::{make_body, BodyKind, SmoothBody};
use crate::config::display_fromstr;
use crate::error::{Error, Result};
use crate::hull::{convex_hull, weighted_score_sum, xi_scores};
use crate::par;
use crate::points::PointSet;
use crate::rng::{Role, SeedKey};
use crate::sampling::{sample_binomial, sample_coupled, sample_poisson, CountCoupling};
use crate::stats::{bootstrap_ci, mean, ols, variance, Summary};
use crate::testfn::TestFunction;

/// Default number of bootstrap resamples.
pub const DEFAULT_BOOTSTRAP: usize = 1000;

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

fn default_test_function() -> TestFunction {
    TestFunction::Constant(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Grid values are intensities `lambda`.
    Poisson,
    /// Grid values are sample sizes `n`.
    Binomial,
    /// Grid values are sample sizes `n`; each replication yields an `n`-point
    /// sample and a Poisson(`n`)-point sample from one stream.
    Coupled,
}

/// Which sample a row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Poisson,
    Binomial,
}

impl View {
    pub fn as_str(&self) -> &'static str {
        match self {
            View::Poisson => "poisson",
            View::Binomial => "binomial",
        }
    }
}

/// Grid of intensities or sample sizes: an explicit list or a geometric
/// progression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Geometric(GeometricGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn geometric(start: f64, stop: f64, points: usize) -> Self {
        GridSpec::Geometric(GeometricGrid { start, stop, points })
    }

    /// Grid values; positive and strictly increasing.
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Geometric(g) => {
                if g.points < 2 || !(g.start > 0.0) || !(g.stop > g.start) {
                    return Err(Error::Config("geometric grid needs 0 < start < stop and >= 2 points".into()));
                }
                let ratio = (g.stop / g.start).powf(1.0 / (g.points - 1) as f64);
                (0..g.points).map(|i| if i + 1 == g.points { g.stop } else { g.start * ratio.powi(i as i32) }).collect()
            }
        };
        if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid must be positive and strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(with = "display_fromstr")]
    pub body: BodyKind,
    pub k: usize,
    pub mode: Mode,
    pub grid: GridSpec,
    pub replications: usize,
    pub seed: u64,
    #[serde(with = "display_fromstr", default = "default_test_function")]
    pub test_function: TestFunction,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Base name of the output files.
    #[serde(default = "default_sweep_name")]
    pub name: String,
}

fn default_sweep_name() -> String {
    "sweep".into()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config("replications must be at least 2".into()));
        }
        if self.k >= self.body.dim() {
            return Err(Error::Config(format!("k = {} must be below d = {}", self.k, self.body.dim())));
        }
        let grid = self.grid.values()?;
        if self.mode != Mode::Poisson && grid.iter().any(|x| x.fract() != 0.0) {
            return Err(Error::Config("sample sizes must be integers".into()));
        }
        Ok(())
    }
}

/// JSON writes NaN as `null`; read it back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer};

    pub fn float<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn pair<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Option<f64>, Option<f64>)>::deserialize(d)?;
        Ok((a.unwrap_or(f64::NAN), b.unwrap_or(f64::NAN)))
    }
}

/// Statistics of one grid point and sample view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    /// Grid value: `lambda` or `n`.
    pub x: f64,
    pub view: View,
    /// Points per unit volume: `lambda`, or `n / vol(K)`.
    pub intensity: f64,
    pub replications: usize,
    #[serde(deserialize_with = "nullable::float")]
    pub mean_count: f64,
    #[serde(deserialize_with = "nullable::float")]
    pub mean_fk: f64,
    #[serde(deserialize_with = "nullable::pair")]
    pub mean_fk_ci: (f64, f64),
    #[serde(deserialize_with = "nullable::float")]
    pub var_fk: f64,
    #[serde(deserialize_with = "nullable::float")]
    pub var_fk_se: f64,
    #[serde(deserialize_with = "nullable::pair")]
    pub var_fk_ci: (f64, f64),
    #[serde(deserialize_with = "nullable::float")]
    pub mean_g: f64,
    #[serde(deserialize_with = "nullable::float")]
    pub var_g: f64,
    #[serde(deserialize_with = "nullable::pair")]
    pub var_g_ci: (f64, f64),
    pub seed: u64,
    /// Set when a replication failed and the grid point was abandoned.
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl GridRow {
    pub const CSV_HEADER: &'static str = "x,view,intensity,replications,mean_count,mean_fk,mean_fk_lo,mean_fk_hi,var_fk,var_fk_se,var_fk_lo,var_fk_hi,mean_g,var_g,var_g_lo,var_g_hi,seed,error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.x,
            self.view.as_str(),
            self.intensity,
            self.replications,
            self.mean_count,
            self.mean_fk,
            self.mean_fk_ci.0,
            self.mean_fk_ci.1,
            self.var_fk,
            self.var_fk_se,
            self.var_fk_ci.0,
            self.var_fk_ci.1,
            self.mean_g,
            self.var_g,
            self.var_g_ci.0,
            self.var_g_ci.1,
            self.seed,
            self.error.as_deref().unwrap_or("").replace(',', ";")
        )
    }

    fn failed(x: f64, view: View, intensity: f64, replications: usize, seed: u64, error: String) -> Self {
        let nan = f64::NAN;
        GridRow {
            x,
            view,
            intensity,
            replications,
            mean_count: nan,
            mean_fk: nan,
            mean_fk_ci: (nan, nan),
            var_fk: nan,
            var_fk_se: nan,
            var_fk_ci: (nan, nan),
            mean_g: nan,
            var_g: nan,
            var_g_ci: (nan, nan),
            seed,
            error: Some(error),
            wall_seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub config: SweepConfig,
    pub body: SmoothBody,
    pub affine_surface_area: f64,
    pub rows: Vec<GridRow>,
    pub warnings: Vec<String>,
}

impl VarianceReport {
    pub fn rows_for(&self, view: View) -> Vec<&GridRow> {
        self.rows.iter().filter(|r| r.view == view).collect()
    }
}

/// Face count and weighted score sum of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HullStats {
    pub count: usize,
    pub fk: f64,
    pub g: f64,
}

pub(crate) fn hull_stats(points: &PointSet, k: usize, g: &TestFunction) -> Result<HullStats> {
    let lattice = convex_hull(points)?;
    let scores = xi_scores(&lattice, k)?;
    Ok(HullStats { count: points.len(), fk: lattice.f_vector[k] as f64, g: weighted_score_sum(points, &scores, g) })
}

fn summarize(
    x: f64,
    view: View,
    intensity: f64,
    stats: &[HullStats],
    bootstrap: usize,
    key: &SeedKey,
) -> GridRow {
    let fk: Vec<f64> = stats.iter().map(|s| s.fk).collect();
    let gs: Vec<f64> = stats.iter().map(|s| s.g).collect();
    let sf = Summary::of(&fk);
    let mut rng = key.label(view.as_str()).rng(Role::Bootstrap);
    let mean_fk_ci = bootstrap_ci(&fk, mean, bootstrap, 0.95, &mut rng);
    let var_fk_ci = bootstrap_ci(&fk, variance, bootstrap, 0.95, &mut rng);
    let var_g_ci = bootstrap_ci(&gs, variance, bootstrap, 0.95, &mut rng);
    GridRow {
        x,
        view,
        intensity,
        replications: stats.len(),
        mean_count: mean(&stats.iter().map(|s| s.count as f64).collect::<Vec<_>>()),
        mean_fk: sf.mean,
        mean_fk_ci,
        var_fk: sf.variance,
        var_fk_se: sf.variance_se,
        var_fk_ci,
        mean_g: mean(&gs),
        var_g: variance(&gs),
        var_g_ci,
        seed: key.digest(),
        error: None,
        wall_seconds: 0.0,
    }
}

/// Replicated sample -> hull -> score runs over the grid.
pub fn run_sweep(config: &SweepConfig) -> Result<VarianceReport> {
    config.validate()?;
    let body = make_body(config.body.clone())?;
    let asa = body.affine_surface_area()?.value;
    let grid = config.grid.values()?;
    let root = SeedKey::new(config.seed).label("sweep");
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let started = Instant::now();
        let key = root.child(i as u64);
        let reps = config.replications;
        let views: Vec<View> = match config.mode {
            Mode::Poisson => vec![View::Poisson],
            Mode::Binomial => vec![View::Binomial],
            Mode::Coupled => vec![View::Poisson, View::Binomial],
        };
        let intensity = match config.mode {
            Mode::Poisson => x,
            _ => x / body.volume,
        };
        let coupling = if config.mode == Mode::Coupled { Some(CountCoupling::new(x as usize, 1.0)?) } else { None };
        let outcome = par::try_map_indexed(reps, |r| -> Result<Vec<HullStats>> {
            let rk = key.child(r as u64);
            match config.mode {
                Mode::Poisson => {
                    let s = sample_poisson(&body, x, &rk)?;
                    Ok(vec![hull_stats(&s.points, config.k, &config.test_function)?])
                }
                Mode::Binomial => {
                    let s = sample_binomial(&body, x as usize, &rk)?;
                    Ok(vec![hull_stats(&s.points, config.k, &config.test_function)?])
                }
                Mode::Coupled => {
                    let pair = sample_coupled(&body, coupling.as_ref().expect("coupled mode"), &rk)?;
                    Ok(vec![
                        hull_stats(&pair.poisson_view(), config.k, &config.test_function)?,
                        hull_stats(&pair.binomial_view(), config.k, &config.test_function)?,
                    ])
                }
            }
        });
        match outcome {
            Ok(per_rep) => {
                for (j, &view) in views.iter().enumerate() {
                    let stats: Vec<HullStats> = per_rep.iter().map(|v| v[j]).collect();
                    rows.push(summarize(x, view, intensity, &stats, config.bootstrap, &key));
                }
            }
            Err(e) => {
                let msg = format!("grid point {x}: {e}");
                log::error!("{msg}");
                warnings.push(msg);
                for &view in &views {
                    rows.push(GridRow::failed(x, view, intensity, reps, key.digest(), e.to_string()));
                }
            }
        }
        let elapsed = started.elapsed().as_secs_f64();
        let n_views = views.len();
        let len = rows.len();
        for row in &mut rows[len - n_views..] {
            row.wall_seconds = elapsed;
        }
        log::info!("grid point {x}: {elapsed:.2} s");
    }
    if config.replications < 30 {
        warnings.push(format!("only {} replications: confidence intervals are wide", config.replications));
    }
    Ok(VarianceReport { config: config.clone(), body, affine_surface_area: asa, rows, warnings })
}

/// Log–log fit of the variance (and mean) against the intensity, with the
/// normalized constants and their plateau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub view: View,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub theoretical_slope: f64,
    pub expectation_slope: f64,
    pub expectation_slope_se: f64,
    /// `(intensity, intensity^{-(d-1)/(d+1)} Var f_k, standard error)` per grid point.
    pub normalized: Vec<(f64, f64, f64)>,
    /// Inverse-variance-weighted mean of the normalized constants over the top half of the grid.
    pub plateau: f64,
    pub plateau_se: f64,
    /// Coefficient of variation of the normalized constants over the top half.
    pub plateau_cv: f64,
    pub affine_surface_area: f64,
    /// Plateau divided by the affine surface area.
    pub f_hat: f64,
    pub f_hat_se: f64,
    /// Expectation analogue `intensity^{-(d-1)/(d+1)} E f_k / as(K)` over the top half.
    pub d_hat: f64,
    pub excluded: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Ordinary least squares on `(log intensity, log Var f_k)`; needs at least
/// four usable grid points.
pub fn fit_scaling(report: &VarianceReport, view: View) -> Result<ScalingFit> {
    let d = report.body.dim as f64;
    let beta = (d - 1.0) / (d + 1.0);
    let mut warnings = Vec::new();
    let mut excluded = Vec::new();
    let mut rows = Vec::new();
    for r in report.rows_for(view) {
        if r.error.is_some() || !(r.var_fk > 0.0) || !(r.mean_fk > 0.0) {
            warnings.push(format!("grid point {} excluded: non-positive or missing variance", r.x));
            excluded.push(r.x);
        } else {
            rows.push(r);
        }
    }
    if rows.len() < 4 {
        return Err(Error::InvalidInput(format!("scaling fit needs at least 4 usable grid points, have {}", rows.len())));
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.intensity.ln()).collect();
    let lv: Vec<f64> = rows.iter().map(|r| r.var_fk.ln()).collect();
    let lm: Vec<f64> = rows.iter().map(|r| r.mean_fk.ln()).collect();
    let fit = ols(&lx, &lv).ok_or_else(|| Error::Runtime("degenerate scaling fit".into()))?;
    let efit = ols(&lx, &lm).ok_or_else(|| Error::Runtime("degenerate scaling fit".into()))?;
    let normalized: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            let s = r.intensity.powf(-beta);
            (r.intensity, s * r.var_fk, s * r.var_fk_se)
        })
        .collect();
    let top = &normalized[normalized.len() / 2..];
    let weights: Vec<f64> = top.iter().map(|t| 1.0 / (t.2 * t.2).max(f64::MIN_POSITIVE)).collect();
    let wsum: f64 = weights.iter().sum();
    let plateau = top.iter().zip(&weights).map(|(t, w)| w * t.1).sum::<f64>() / wsum;
    let plateau_se = wsum.sqrt().recip();
    let top_values: Vec<f64> = top.iter().map(|t| t.1).collect();
    let plateau_cv = if top_values.len() > 1 { variance(&top_values).sqrt() / mean(&top_values) } else { 0.0 };
    let asa = report.affine_surface_area;
    let d_hat = mean(&rows[rows.len() / 2..].iter().map(|r| r.intensity.powf(-beta) * r.mean_fk).collect::<Vec<_>>()) / asa;
    Ok(ScalingFit {
        view,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se.max(f64::MIN_POSITIVE),
        theoretical_slope: beta,
        expectation_slope: efit.slope,
        expectation_slope_se: efit.slope_se,
        normalized,
        plateau,
        plateau_se,
        plateau_cv,
        affine_surface_area: asa,
        f_hat: plateau / asa,
        f_hat_se: plateau_se / asa,
        d_hat,
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted_report(c: f64) -> VarianceReport {
        let cfg = SweepConfig {
            body: "disk".parse().unwrap(),
            k: 0,
            mode: Mode::Poisson,
            grid: GridSpec::geometric(1e3, 1e6, 4),
            replications: 2,
            seed: 0,
            test_function: TestFunction::Constant(1.0),
            bootstrap: 0,
            name: "t".into(),
        };
        let rows = cfg
            .grid
            .values()
            .unwrap()
            .into_iter()
            .map(|x| {
                let v = c * x.powf(1.0 / 3.0);
                GridRow { var_fk: v, var_fk_se: 0.01 * v, mean_fk: 2.0 * v, ..GridRow::failed(x, View::Poisson, x, 2, 0, String::new()) }
            })
            .map(|mut r| {
                r.error = None;
                r
            })
            .collect();
        VarianceReport {
            body: make_body(cfg.body.clone()).unwrap(),
            config: cfg,
            affine_surface_area: std::f64::consts::TAU,
            rows,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn planted_power_law_is_recovered() {
        let fit = fit_scaling(&planted_report(0.5), View::Poisson).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.expectation_slope - 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.plateau - 0.5).abs() < 1e-12);
        assert!(fit.plateau_cv < 1e-12);
        assert!((fit.f_hat - 0.5 / std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn geometric_grid_hits_both_ends() {
        let v = GridSpec::geometric(1024.0, 65536.0, 7).values().unwrap();
        assert_eq!(v.len(), 7);
        assert!((v[1] - 2048.0).abs() < 1e-9);
        assert_eq!(v[6], 65536.0);
        assert!(GridSpec::Values(vec![2.0, 1.0]).values().is_err());
    }

    #[test]
    fn minimal_sweep_runs_and_flags_wide_intervals() {
        let cfg = SweepConfig {
            body: "disk".parse().unwrap(),
            k: 0,
            mode: Mode::Coupled,
            grid: GridSpec::Values(vec![50.0, 100.0]),
            replications: 2,
            seed: 3,
            test_function: TestFunction::Constant(1.0),
            bootstrap: 50,
            name: "t".into(),
        };
        let rep = run_sweep(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.warnings.iter().any(|w| w.contains("wide")));
        for r in &rep.rows {
            assert!(r.var_fk >= 0.0 && r.var_fk_ci.0 <= r.var_fk && r.var_fk <= r.var_fk_ci.1);
            assert_eq!(r.mean_g, r.mean_fk);
        }
    }
}
