use std::path::Path;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use hullvar::config::{display_fromstr, load_config};
use hullvar::experiments::{
    depoisson_compare, fit_scaling, intensity_check, run_sweep, weighted_check, volume_variance, DepoissonConfig, DepoissonRow,
    GridRow, IntensityConfig, IntensityRow, ProfileConfig, ScalingFit, SweepConfig, WeightedConfig, WeightedRow, VarianceReport,
    View, VolumeConfig, VolumeReport,
};
use hullvar::paraboloid::{
    estimate_sigma2_correlation, estimate_sigma2_window, geometric_grid, mean_score_profile, CorrelationEstimate, CorrelationGrid,
    ParaboloidScene, SceneWindow, WindowConfig,
};
use hullvar::report::{write_csv, write_json, LogLogPlot, Manifest, OutputSet, PlotPoint, RunStatus};
use hullvar::sampling::{sample_binomial, sample_poisson};
use hullvar::{convex_hull, make_body, xi_scores, BodyKind, Error, Result, SeedKey, TestFunction};

use crate::Common;

/// Reads the config named by `--config`, applying `--set` overrides and `--seed`.
fn load<C: DeserializeOwned>(common: &Common) -> Result<C> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    load_config(path, &overrides)
}

/// Bookkeeping of one run: output files, warnings and wall times.
struct Run {
    out: OutputSet,
    manifest: Manifest,
    timings: serde_json::Map<String, serde_json::Value>,
}

impl Run {
    fn file(&mut self, suffix: &str) -> std::path::PathBuf {
        let path = self.out.path(suffix);
        self.manifest.outputs.push(path.file_name().expect("file name").to_string_lossy().into_owned());
        path
    }

    fn time(&mut self, what: &str, seconds: f64) {
        self.timings.insert(what.to_string(), serde_json::json!(seconds));
    }
}

/// Writes the manifest, runs `work`, then records the outcome. Wall times go
/// to a separate file so the manifest stays reproducible.
fn execute<C: Serialize>(
    command: &str,
    common: &Common,
    name: &str,
    seed: Option<u64>,
    config: &C,
    work: impl FnOnce(&mut Run) -> Result<()>,
) -> Result<()> {
    let out = OutputSet::new(common.out_dir(), name)?;
    let manifest = Manifest::new(command, seed, config)?;
    write_json(&out.manifest(), &manifest)?;
    let mut run = Run { out, manifest, timings: serde_json::Map::new() };
    let started = Instant::now();
    let result = work(&mut run);
    run.time("total", started.elapsed().as_secs_f64());
    match &result {
        Ok(()) => {
            if run.manifest.status == RunStatus::Running {
                run.manifest.status = RunStatus::Complete;
            }
        }
        Err(e) => {
            run.manifest.status = RunStatus::Failed;
            run.manifest.error = Some(e.to_string());
        }
    }
    write_json(&run.out.manifest(), &run.manifest)?;
    write_json(&run.out.timings(), &run.timings)?;
    result
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleHullConfig {
    #[serde(with = "display_fromstr")]
    body: BodyKind,
    /// Poisson intensity; exactly one of `lambda` and `n` is set.
    lambda: Option<f64>,
    n: Option<usize>,
    #[serde(default)]
    k: usize,
    seed: u64,
    #[serde(default = "sample_hull_name")]
    name: String,
}

fn sample_hull_name() -> String {
    "sample-hull".into()
}

pub fn sample_hull(common: &Common) -> Result<()> {
    let cfg: SampleHullConfig = load(common)?;
    let body = make_body(cfg.body.clone())?;
    if cfg.k >= body.dim {
        return Err(Error::Config(format!("k = {} must be below d = {}", cfg.k, body.dim)));
    }
    execute("sample-hull", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let key = SeedKey::new(cfg.seed).label("sample-hull");
        let sample = match (cfg.lambda, cfg.n) {
            (Some(l), None) => sample_poisson(&body, l, &key)?,
            (None, Some(n)) => sample_binomial(&body, n, &key)?,
            _ => return Err(Error::Config("set exactly one of lambda and n".into())),
        };
        let lattice = convex_hull(&sample.points)?;
        let scores = xi_scores(&lattice, cfg.k)?;
        let mut csv = Vec::new();
        sample.write_csv(&mut csv)?;
        std::fs::write(run.file(".points.csv"), csv)?;
        let (num, den) = scores.total_exact();
        write_json(
            &run.file(".hull.json"),
            &serde_json::json!({
                "body": body,
                "mode": sample.mode,
                "seed": sample.seed,
                "count": sample.realized_count,
                "hull": lattice.to_json(),
                "k": cfg.k,
                "face_counts": scores.face_counts,
                "score_sum": [num, den],
            }),
        )?;
        println!("{} points, f-vector {:?}", sample.realized_count, lattice.f_vector);
        Ok(())
    })
}

fn variance_plot(report: &VarianceReport, view: View, fit: Option<&ScalingFit>) -> LogLogPlot {
    let d = report.body.dim as f64;
    LogLogPlot {
        title: format!("Var f_{} in {} ({})", report.config.k, report.config.body, view.as_str()),
        x_label: "intensity".into(),
        y_label: format!("Var f_{}", report.config.k),
        points: report
            .rows_for(view)
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| PlotPoint { x: r.intensity, y: r.var_fk, lo: r.var_fk_ci.0, hi: r.var_fk_ci.1 })
            .collect(),
        fit: fit.map(|f| (f.slope, f.intercept)),
        reference_slope: Some((d - 1.0) / (d + 1.0)),
    }
}

/// Fits and plots for every sample view present in the report.
fn emit_fits(run: &mut Run, report: &VarianceReport) -> Result<Vec<ScalingFit>> {
    let views: Vec<View> =
        [View::Poisson, View::Binomial].into_iter().filter(|v| report.rows.iter().any(|r| r.view == *v)).collect();
    let mut fits = Vec::new();
    for view in views {
        let fit = match fit_scaling(report, view) {
            Ok(f) => {
                run.manifest.warnings.extend(f.warnings.iter().cloned());
                Some(f)
            }
            Err(e) => {
                run.manifest.warnings.push(format!("{} fit skipped: {e}", view.as_str()));
                None
            }
        };
        variance_plot(report, view, fit.as_ref()).write(&run.file(&format!(".{}.svg", view.as_str())))?;
        if let Some(f) = &fit {
            println!(
                "{}: slope {:.4} ± {:.4} (theory {:.4}), F-hat {:.5} ± {:.5}, plateau cv {:.3}",
                view.as_str(),
                f.slope,
                f.slope_se,
                f.theoretical_slope,
                f.f_hat,
                f.f_hat_se,
                f.plateau_cv
            );
        }
        fits.extend(fit);
    }
    Ok(fits)
}

pub fn sweep(common: &Common) -> Result<()> {
    let cfg: SweepConfig = load(common)?;
    cfg.validate()?;
    execute("sweep", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let report = run_sweep(&cfg)?;
        for row in &report.rows {
            run.time(&format!("{}:{}", row.view.as_str(), row.x), row.wall_seconds);
        }
        run.manifest.warnings.extend(report.warnings.iter().cloned());
        if report.rows.iter().any(|r| r.error.is_some()) {
            run.manifest.status = RunStatus::Partial;
        }
        write_csv(&run.file(".csv"), GridRow::CSV_HEADER, report.rows.iter().map(GridRow::csv_row))?;
        let fits = emit_fits(run, &report)?;
        write_json(&run.file(".json"), &serde_json::json!({ "report": report, "fits": fits }))?;
        Ok(())
    })
}

#[derive(Debug, Deserialize)]
struct SweepOutput {
    report: VarianceReport,
}

pub fn report(common: &Common, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let parsed: SweepOutput = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
    let report = parsed.report;
    let name = format!("{}.report", report.config.name);
    let echo = serde_json::json!({ "input": input.file_name().map(|f| f.to_string_lossy().into_owned()) });
    execute("report", common, &name, Some(report.config.seed), &echo, |run| {
        let fits = emit_fits(run, &report)?;
        write_json(&run.file(".json"), &fits)?;
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ParaboloidTask {
    Scene,
    Profile,
    Intensity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SceneSpec {
    dim_base: usize,
    l: f64,
    h: f64,
    margin: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self { dim_base: 1, l: 12.0, h: 5.0, margin: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParaboloidConfig {
    task: ParaboloidTask,
    seed: u64,
    #[serde(default = "paraboloid_name")]
    name: String,
    #[serde(default)]
    scene: SceneSpec,
    /// Score orders of the profile task.
    #[serde(default = "default_ks")]
    ks: Vec<usize>,
    #[serde(default)]
    profile: ProfileConfig,
    #[serde(default)]
    intensity: IntensityConfig,
}

fn paraboloid_name() -> String {
    "paraboloid".into()
}

fn default_ks() -> Vec<usize> {
    vec![0]
}

pub fn paraboloid(common: &Common) -> Result<()> {
    let cfg: ParaboloidConfig = load(common)?;
    execute("paraboloid", common, &cfg.name, Some(cfg.seed), &cfg, |run| match cfg.task {
        ParaboloidTask::Scene => {
            let s = &cfg.scene;
            let window = SceneWindow::new(s.dim_base, s.l, s.h, s.margin).map_err(as_config)?;
            let scene = ParaboloidScene::sample(window, &[], &SeedKey::new(cfg.seed).label("scene"))?;
            let result = scene.evaluate()?;
            let extreme = result.extreme_flags.iter().filter(|&&e| e).count();
            write_json(&run.file(".scene.json"), &result.to_json(&scene))?;
            println!("{} points, {extreme} extreme", scene.points.len());
            Ok(())
        }
        ParaboloidTask::Profile => {
            let p = &cfg.profile;
            let window = SceneWindow::new(cfg.scene.dim_base, p.l, p.height, 0.0).map_err(as_config)?;
            let heights = geometric_grid(0.0, p.h_max, p.n_h, p.ratio);
            let profile = mean_score_profile(window, &cfg.ks, &heights, p.reps, &SeedKey::new(cfg.seed).label("profile"))?;
            let rows: Vec<CorrelationEstimate> = profile.into_iter().flatten().collect();
            write_csv(&run.file(".profile.csv"), CorrelationEstimate::CSV_HEADER, rows.iter().map(CorrelationEstimate::csv_row))?;
            Ok(())
        }
        ParaboloidTask::Intensity => {
            let icfg = IntensityConfig { seed: cfg.seed, ..cfg.intensity.clone() };
            let rep = intensity_check(&icfg)?;
            write_csv(&run.file(".intensity.csv"), IntensityRow::CSV_HEADER, rep.rows.iter().map(IntensityRow::csv_row))?;
            write_json(&run.file(".intensity.json"), &rep)?;
            println!(
                "chi-square {:.2} on {} dof, p = {:.4}; TV proxy monotone: {}",
                rep.gof_statistic, rep.gof_dof, rep.gof_p_value, rep.monotone
            );
            Ok(())
        }
    })
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Route {
    Window,
    Correlation,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CorrelationScene {
    l: f64,
    h: f64,
}

impl Default for CorrelationScene {
    fn default() -> Self {
        Self { l: 12.0, h: 5.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sigma2Config {
    route: Route,
    #[serde(default = "default_ks")]
    ks: Vec<usize>,
    seed: u64,
    #[serde(default = "sigma2_name")]
    name: String,
    #[serde(default)]
    window: WindowConfig,
    #[serde(default)]
    correlation: CorrelationGrid,
    #[serde(default)]
    correlation_scene: CorrelationScene,
}

fn sigma2_name() -> String {
    "sigma2".into()
}

pub fn sigma2(common: &Common) -> Result<()> {
    let cfg: Sigma2Config = load(common)?;
    execute("sigma2", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let root = SeedKey::new(cfg.seed).label("sigma2");
        let mut estimates = Vec::new();
        if cfg.route != Route::Correlation {
            estimates.extend(estimate_sigma2_window(&cfg.ks, &cfg.window, &root.label("window")).map_err(as_config)?);
        }
        if cfg.route != Route::Window {
            let s = &cfg.correlation_scene;
            let window = SceneWindow::new(cfg.window.dim_base, s.l, s.h, 0.0).map_err(as_config)?;
            estimates.extend(
                estimate_sigma2_correlation(window, &cfg.ks, &cfg.correlation, &root.label("correlation")).map_err(as_config)?,
            );
        }
        for e in &estimates {
            let (lo, hi) = e.ci95();
            println!("{} k={}: {:.5} (95% CI {:.5} .. {:.5})", e.target.as_str(), e.k, e.value, lo, hi);
            run.manifest.warnings.extend(e.warnings.iter().cloned());
        }
        write_csv(&run.file(".csv"), CorrelationEstimate::CSV_HEADER, estimates.iter().map(CorrelationEstimate::csv_row))?;
        write_json(&run.file(".json"), &estimates)?;
        Ok(())
    })
}

pub fn asa(common: &Common, body: &str, g: Option<&str>) -> Result<()> {
    let kind: BodyKind = body.parse()?;
    let g: Option<TestFunction> = g.map(str::parse).transpose()?;
    let body = make_body(kind)?;
    let echo = serde_json::json!({ "body": body.kind.to_string(), "g": g.as_ref().map(|g| g.to_string()) });
    execute("asa", common, "asa", None, &echo, |run| {
        let q = body.affine_surface_area()?;
        println!("affine surface area of {}: {} (error estimate {:e})", body.kind, q.value, q.error);
        let mut out = serde_json::json!({ "body": body, "affine_surface_area": q });
        if let Some(g) = &g {
            let i1 = body.weighted_affine_integral(g, 1)?;
            let i2 = body.weighted_affine_integral(g, 2)?;
            println!("integral of g kappa^(1/(d+1)): {} (error estimate {:e})", i1.value, i1.error);
            println!("integral of g^2 kappa^(1/(d+1)): {} (error estimate {:e})", i2.value, i2.error);
            out["weighted"] = serde_json::json!({ "g": g.to_string(), "power1": i1, "power2": i2 });
        }
        write_json(&run.file(".json"), &out)?;
        Ok(())
    })
}

pub fn depoisson(common: &Common) -> Result<()> {
    let cfg: DepoissonConfig = load(common)?;
    execute("depoisson", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let rep = depoisson_compare(&cfg)?;
        write_csv(&run.file(".csv"), DepoissonRow::CSV_HEADER, rep.rows.iter().map(DepoissonRow::csv_row))?;
        write_json(&run.file(".json"), &rep)?;
        LogLogPlot {
            title: format!("binomial/Poisson variance gap in {}", cfg.body),
            x_label: "n".into(),
            y_label: "|gap| / Var (binomial)".into(),
            points: rep
                .rows
                .iter()
                .map(|r| PlotPoint { x: r.n as f64, y: r.ratio, lo: r.ratio - 1.96 * r.ratio_se, hi: r.ratio + 1.96 * r.ratio_se })
                .collect(),
            fit: None,
            reference_slope: Some(rep.expected_ratio_slope),
        }
        .write(&run.file(".svg"))?;
        for r in &rep.rows {
            println!("n = {}: ratio {:.4} ± {:.4}", r.n, r.ratio, r.ratio_se);
        }
        Ok(())
    })
}

pub fn volvar(common: &Common) -> Result<()> {
    let cfg: VolumeConfig = load(common)?;
    execute("volvar", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let rep = volume_variance(&cfg)?;
        write_csv(&run.file(".csv"), VolumeReport::CSV_HEADER, [rep.csv_row()])?;
        write_json(&run.file(".json"), &rep)?;
        println!(
            "Var vol = {:e}; identity with limiting correction {:e} (relative error {:.3}), with mean-based correction {:e} ({:.3})",
            rep.lhs, rep.rhs, rep.relative_error, rep.rhs_from_mean, rep.relative_error_from_mean
        );
        Ok(())
    })
}

pub fn th2check(common: &Common) -> Result<()> {
    let cfg: WeightedConfig = load(common)?;
    execute("th2check", common, &cfg.name, Some(cfg.seed), &cfg, |run| {
        let rep = weighted_check(&cfg)?;
        run.manifest.warnings.extend(rep.warnings.iter().cloned());
        write_csv(&run.file(".csv"), WeightedRow::CSV_HEADER, rep.rows.iter().map(WeightedRow::csv_row))?;
        write_json(&run.file(".json"), &rep)?;
        for r in &rep.rows {
            println!("lambda = {}: variance ratio {:.3}, mean ratio {:.3}", r.lambda, r.var_ratio, r.mean_ratio);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hullvar::config::from_toml_str;

    #[test]
    fn paraboloid_config_defaults_fill_in() {
        let cfg: ParaboloidConfig = from_toml_str("task = \"scene\"\nseed = 3\n", &[]).unwrap();
        assert_eq!(cfg.task, ParaboloidTask::Scene);
        assert_eq!(cfg.scene.l, 12.0);
        let err = from_toml_str::<ParaboloidConfig>("task = \"scene\"\nseed = 3\nbogus = 1\n", &[]).unwrap_err();
        assert!(err.is_config());
    }
}
