use serde::{Deserialize, Serialize};

use super::{run_sweep, GridSpec, Mode, SweepConfig, View};
use crate::bodies::{make_body, BodyKind};
use crate::config::display_fromstr;
use crate::error::{Error, Result};
use crate::paraboloid::estimators::{exponential_tail, trapezoid_weights};
use crate::paraboloid::{estimate_sigma2_window, geometric_grid, mean_score_profile, CorrelationEstimate, SceneWindow, WindowConfig};
use crate::rng::SeedKey;
use crate::testfn::TestFunction;

/// Height grid and scene size for the mean score profile `h -> E xi(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub h_max: f64,
    pub n_h: usize,
    pub ratio: f64,
    pub l: f64,
    pub height: f64,
    pub reps: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { h_max: 3.0, n_h: 12, ratio: 1.2, l: 12.0, height: 5.0, reps: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedConfig {
    #[serde(with = "display_fromstr")]
    pub body: BodyKind,
    pub k: usize,
    #[serde(with = "display_fromstr")]
    pub test_function: TestFunction,
    /// Intensities.
    pub grid: GridSpec,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Window route for the variance density; `dim_base` is set from the body.
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_bootstrap() -> usize {
    super::DEFAULT_BOOTSTRAP
}

fn default_name() -> String {
    "th2check".into()
}

/// Normalized Monte Carlo moments of `<g, mu>` against their limits at one intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRow {
    pub lambda: f64,
    /// `lambda^{-(d-1)/(d+1)} Var <g, mu>`.
    pub var_lhs: f64,
    pub var_lhs_ci: (f64, f64),
    /// `sigma^2 integral g^2 kappa^{1/(d+1)}`.
    pub var_rhs: f64,
    pub var_ratio: f64,
    /// `lambda^{-(d-1)/(d+1)} E <g, mu>`.
    pub mean_lhs: f64,
    /// `(integral_0^inf E xi(h) dh) integral g kappa^{1/(d+1)}`.
    pub mean_rhs: f64,
    pub mean_ratio: f64,
}

impl WeightedRow {
    pub const CSV_HEADER: &'static str = "lambda,var_lhs,var_lhs_lo,var_lhs_hi,var_rhs,var_ratio,mean_lhs,mean_rhs,mean_ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.lambda,
            self.var_lhs,
            self.var_lhs_ci.0,
            self.var_lhs_ci.1,
            self.var_rhs,
            self.var_ratio,
            self.mean_lhs,
            self.mean_rhs,
            self.mean_ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedReport {
    pub config: WeightedConfig,
    pub sigma2: CorrelationEstimate,
    /// `integral_0^inf E xi_k(h) dh` from the mean score profile.
    pub mean_integral: f64,
    pub mean_integral_se: f64,
    pub integral_g: f64,
    pub integral_g2: f64,
    pub rows: Vec<WeightedRow>,
    pub warnings: Vec<String>,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        1.0
    } else {
        lhs / rhs
    }
}

/// `integral_0^inf E xi_k(h) dh` by trapezoid weights on the profile nodes
/// plus a fitted exponential tail.
fn profile_integral(profile: &[CorrelationEstimate]) -> (f64, f64) {
    let h: Vec<f64> = profile.iter().map(|e| e.node[0]).collect();
    let m: Vec<f64> = profile.iter().map(|e| e.value).collect();
    let w = trapezoid_weights(&h);
    let value = w.iter().zip(&m).map(|(w, m)| w * m).sum::<f64>() + exponential_tail(&h, &m);
    let se = w.iter().zip(profile).map(|(w, e)| (w * e.std_error).powi(2)).sum::<f64>().sqrt();
    (value, se)
}

/// Weighted-measure check: Monte Carlo moments of `<g, mu_lambda>` against
/// the paraboloid constants times boundary integrals of `g`.
pub fn weighted_check(config: &WeightedConfig) -> Result<WeightedReport> {
    let body = make_body(config.body.clone())?;
    let d = body.dim;
    if config.k >= d {
        return Err(Error::Config(format!("k = {} must be below d = {d}", config.k)));
    }
    if let TestFunction::Bump { center, .. } = &config.test_function {
        if center.len() != d {
            return Err(Error::Config(format!("bump centre must have {d} coordinates")));
        }
    }
    if let TestFunction::Coordinate(i) = config.test_function {
        if i >= d {
            return Err(Error::Config(format!("coordinate {i} out of range for d = {d}")));
        }
    }
    let root = SeedKey::new(config.seed).label("th2check");
    let sweep = run_sweep(&SweepConfig {
        body: config.body.clone(),
        k: config.k,
        mode: Mode::Poisson,
        grid: config.grid.clone(),
        replications: config.replications,
        seed: root.label("sweep").digest(),
        test_function: config.test_function.clone(),
        bootstrap: config.bootstrap,
        name: config.name.clone(),
    })?;
    let window = WindowConfig { dim_base: d - 1, ..config.window.clone() };
    let sigma2 = estimate_sigma2_window(&[config.k], &window, &root.label("sigma2"))?.remove(0);
    let p = &config.profile;
    let scene = SceneWindow::new(d - 1, p.l, p.height, 0.0)?;
    let heights = geometric_grid(0.0, p.h_max, p.n_h, p.ratio);
    let profile = mean_score_profile(scene, &[config.k], &heights, p.reps, &root.label("profile"))?.remove(0);
    let (mean_integral, mean_integral_se) = profile_integral(&profile);
    let integral_g = body.weighted_affine_integral(&config.test_function, 1)?.value;
    let integral_g2 = body.weighted_affine_integral(&config.test_function, 2)?.value;
    let beta = (d as f64 - 1.0) / (d as f64 + 1.0);
    let rows = sweep
        .rows_for(View::Poisson)
        .into_iter()
        .map(|r| {
            let s = r.intensity.powf(-beta);
            let (var_lhs, mean_lhs) = (s * r.var_g, s * r.mean_g);
            let var_rhs = sigma2.value * integral_g2;
            let mean_rhs = mean_integral * integral_g;
            WeightedRow {
                lambda: r.x,
                var_lhs,
                var_lhs_ci: (s * r.var_g_ci.0, s * r.var_g_ci.1),
                var_rhs,
                var_ratio: ratio(var_lhs, var_rhs),
                mean_lhs,
                mean_rhs,
                mean_ratio: ratio(mean_lhs, mean_rhs),
            }
        })
        .collect();
    let mut warnings = sweep.warnings;
    warnings.extend(sigma2.warnings.iter().cloned());
    Ok(WeightedReport { config: config.clone(), sigma2, mean_integral, mean_integral_se, integral_g, integral_g2, rows, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_integral_of_a_planted_exponential() {
        let h = geometric_grid(0.0, 6.0, 40, 1.05);
        let profile: Vec<CorrelationEstimate> = h
            .iter()
            .map(|&x| CorrelationEstimate {
                target: crate::paraboloid::Target::MeanScore,
                k: 0,
                node: vec![x],
                value: (-x).exp(),
                std_error: 0.0,
                systematic_error: 0.0,
                replications: 1,
                seed: 0,
                metadata: serde_json::Value::Null,
                warnings: Vec::new(),
            })
            .collect();
        let (v, _) = profile_integral(&profile);
        assert!((v - 1.0).abs() < 5e-3, "{v}");
    }
}
