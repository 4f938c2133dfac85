use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bodies::{ScalingTransform, SmoothBody};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{Role, SeedKey};
use crate::sampling::rescaled_intensity_density;
use crate::stats::chi_square_gof;

/// Rescaled intensity near `z = (1, 0)` on the unit disk, observed in the
/// window `|v'| <= half_width`, `0 <= h' <= height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntensityConfig {
    /// Intensities of the total-variation proxy, increasing.
    pub lambdas: Vec<f64>,
    pub tv_replications: usize,
    pub tv_bands: usize,
    /// Intensity and replications of the goodness-of-fit test.
    pub gof_lambda: f64,
    pub gof_replications: usize,
    /// Bins per axis of the goodness-of-fit test.
    pub gof_bins: usize,
    pub half_width: f64,
    pub height: f64,
    pub seed: u64,
    pub name: String,
}

impl Default for IntensityConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![1e2, 1e3, 1e4],
            tv_replications: 200_000,
            tv_bands: 8,
            gof_lambda: 1e4,
            gof_replications: 4000,
            gof_bins: 8,
            half_width: 2.0,
            height: 4.0,
            seed: 1,
            name: "intensity".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityRow {
    pub lambda: f64,
    pub points: usize,
    /// `1/2 sum_b |p_hat_b - q_b|` over height bands against the uniform limit.
    pub tv_proxy: f64,
    /// The same functional evaluated on the exact finite-intensity density.
    pub tv_exact: f64,
}

impl IntensityRow {
    pub const CSV_HEADER: &'static str = "lambda,points,tv_proxy,tv_exact";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.lambda, self.points, self.tv_proxy, self.tv_exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityReport {
    pub config: IntensityConfig,
    pub gof_points: usize,
    pub gof_statistic: f64,
    pub gof_dof: usize,
    pub gof_p_value: f64,
    pub rows: Vec<IntensityRow>,
    /// Whether the proxy strictly decreases along the intensity grid.
    pub monotone: bool,
}

struct Window<'a> {
    map: &'a ScalingTransform,
    /// Polar sector covering the window: `|phi| <= angle`, `r1 <= r <= 1`.
    angle: f64,
    r1: f64,
}

impl Window<'_> {
    fn new<'a>(map: &'a ScalingTransform, cfg: &IntensityConfig) -> Result<Window<'a>> {
        let s = map.scale();
        let angle = cfg.half_width / s;
        let r1 = 1.0 - cfg.height / (s * s);
        if angle >= std::f64::consts::PI || r1 <= 0.0 {
            return Err(Error::Config(format!("window exceeds the disk at intensity {}", map.lambda)));
        }
        Ok(Window { map, angle, r1 })
    }

    fn mean_count(&self) -> f64 {
        self.map.lambda * self.angle * (1.0 - self.r1 * self.r1)
    }

    /// Rescaled coordinates of one Poisson sample in the sector.
    fn sample(&self, key: &SeedKey) -> Result<Vec<(f64, f64)>> {
        let mut rng = key.rng(Role::Points);
        let n = Poisson::new(self.mean_count()).map_err(|e| Error::Runtime(e.to_string()))?.sample(&mut key.rng(Role::Count)) as usize;
        (0..n)
            .map(|_| {
                let phi = self.angle * (2.0 * rng.random::<f64>() - 1.0);
                let r = (self.r1 * self.r1 + rng.random::<f64>() * (1.0 - self.r1 * self.r1)).sqrt();
                let (v, h) = self.map.forward_point(&[r * phi.cos(), r * phi.sin()])?;
                Ok((v[0], h))
            })
            .collect()
    }
}

fn bin_of(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    (((x - lo) / (hi - lo) * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

/// Cell probabilities of the exact density on a `bins_v x bins_h` grid.
fn cell_probabilities(map: &ScalingTransform, cfg: &IntensityConfig, bins_v: usize, bins_h: usize) -> Result<Vec<f64>> {
    const SUB: usize = 16;
    let (w, h) = (2.0 * cfg.half_width / bins_v as f64, cfg.height / bins_h as f64);
    let mut mass = Vec::with_capacity(bins_v * bins_h);
    for i in 0..bins_v {
        for j in 0..bins_h {
            let mut m = 0.0;
            for a in 0..SUB {
                for b in 0..SUB {
                    let v = -cfg.half_width + (i as f64 + (a as f64 + 0.5) / SUB as f64) * w;
                    let hp = (j as f64 + (b as f64 + 0.5) / SUB as f64) * h;
                    m += rescaled_intensity_density(map.lambda, map.z.curvature_radius, 2, &[v], hp)?;
                }
            }
            mass.push(m);
        }
    }
    let total: f64 = mass.iter().sum();
    Ok(mass.into_iter().map(|m| m / total).collect())
}

fn pooled(window: &Window, reps: usize, key: &SeedKey) -> Result<Vec<(f64, f64)>> {
    Ok(par::try_map_indexed(reps, |r| window.sample(&key.child(r as u64)))?.into_iter().flatten().collect())
}

/// Goodness of fit of the rescaled sample against the finite-intensity
/// density, and the total-variation proxy to the uniform limit.
pub fn intensity_check(cfg: &IntensityConfig) -> Result<IntensityReport> {
    if cfg.lambdas.is_empty() || cfg.lambdas.windows(2).any(|w| w[1] <= w[0]) || cfg.gof_bins < 2 || cfg.tv_bands < 2 {
        return Err(Error::Config("intensities must increase and bin counts must be at least 2".into()));
    }
    let disk = SmoothBody::ball(2, 1.0)?;
    let z = disk.boundary_point_at_angle(0.0)?;
    let root = SeedKey::new(cfg.seed).label("intensity");

    let map = ScalingTransform::new(&z, cfg.gof_lambda)?;
    let window = Window::new(&map, cfg)?;
    let pts = pooled(&window, cfg.gof_replications, &root.label("gof"))?;
    let b = cfg.gof_bins;
    let mut observed = vec![0.0; b * b];
    for &(v, h) in &pts {
        observed[bin_of(v, -cfg.half_width, cfg.half_width, b) * b + bin_of(h, 0.0, cfg.height, b)] += 1.0;
    }
    let expected: Vec<f64> = cell_probabilities(&map, cfg, b, b)?.into_iter().map(|p| p * pts.len() as f64).collect();
    let (gof_statistic, gof_dof, gof_p_value) = chi_square_gof(&observed, &expected, 0);

    let mut rows = Vec::new();
    for (i, &lambda) in cfg.lambdas.iter().enumerate() {
        let map = ScalingTransform::new(&z, lambda)?;
        let window = Window::new(&map, cfg)?;
        let pts = pooled(&window, cfg.tv_replications, &root.label("tv").child(i as u64))?;
        let nb = cfg.tv_bands;
        let mut counts = vec![0.0; nb];
        for &(_, h) in &pts {
            counts[bin_of(h, 0.0, cfg.height, nb)] += 1.0;
        }
        let q = 1.0 / nb as f64;
        let total = pts.len() as f64;
        let tv_proxy = 0.5 * counts.iter().map(|c| (c / total - q).abs()).sum::<f64>();
        let exact = cell_probabilities(&map, cfg, 1, nb)?;
        let tv_exact = 0.5 * exact.iter().map(|p| (p - q).abs()).sum::<f64>();
        rows.push(IntensityRow { lambda, points: pts.len(), tv_proxy, tv_exact });
    }
    let monotone = rows.windows(2).all(|w| w[1].tv_proxy < w[0].tv_proxy);
    Ok(IntensityReport {
        config: cfg.clone(),
        gof_points: pts.len(),
        gof_statistic,
        gof_dof,
        gof_p_value,
        rows,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_band_probabilities_tilt_towards_the_boundary() {
        let disk = SmoothBody::ball(2, 1.0).unwrap();
        let z = disk.boundary_point_at_angle(0.0).unwrap();
        let map = ScalingTransform::new(&z, 1e3).unwrap();
        let cfg = IntensityConfig::default();
        let p = cell_probabilities(&map, &cfg, 1, 2).unwrap();
        // Density 1 - h/s^2 on [0, 4]: band masses 2 - 2/s^2 and 2 - 6/s^2.
        let s2 = map.scale().powi(2);
        let expect = (2.0 - 2.0 / s2) / (4.0 - 8.0 / s2);
        assert!((p[0] - expect).abs() < 1e-12, "{} vs {expect}", p[0]);
    }
}
