use serde::{Deserialize, Serialize};

use crate::bodies::{make_body, BodyKind};
use crate::config::display_fromstr;
use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::par;
use crate::rng::SeedKey;
use crate::sampling::sample_binomial;
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    #[serde(with = "display_fromstr")]
    pub body: BodyKind,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_name() -> String {
    "volvar".into()
}

/// Both sides of the identity linking the volume variance of an `n`-point
/// hull to the vertex-count variance of an `(n+2)`-point hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub config: VolumeConfig,
    pub body_volume: f64,
    pub affine_surface_area: f64,
    pub mean_volume: f64,
    /// Monte Carlo `Var vol(K'_n)`.
    pub lhs: f64,
    pub lhs_se: f64,
    pub var_f0: f64,
    pub var_f0_se: f64,
    /// Limiting correction `d_{n+2}` for the body rescaled to unit volume.
    pub correction: f64,
    /// `vol(K)^2 (Var f_0(K'_{n+2}) + d_{n+2}) / ((n+1)(n+2))`.
    pub rhs: f64,
    pub rhs_se: f64,
    /// `|lhs - rhs| / rhs`.
    pub relative_error: f64,
    pub mean_f0: f64,
    /// Leading-order correction `((3-d)/(d+1)) E f_0(K'_{n+2})`, which keeps
    /// the expectation constant that the limiting form drops.
    pub correction_from_mean: f64,
    pub rhs_from_mean: f64,
    pub relative_error_from_mean: f64,
    /// `(n+1)(n+2) lhs / vol(K)^2 - Var f_0`: the correction the data imply.
    pub implied_correction: f64,
    pub seed: u64,
}

impl VolumeReport {
    pub const CSV_HEADER: &'static str = "n,replications,body_volume,mean_volume,lhs,lhs_se,var_f0,var_f0_se,correction,rhs,rhs_se,relative_error,mean_f0,correction_from_mean,rhs_from_mean,relative_error_from_mean,implied_correction,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.config.n,
            self.config.replications,
            self.body_volume,
            self.mean_volume,
            self.lhs,
            self.lhs_se,
            self.var_f0,
            self.var_f0_se,
            self.correction,
            self.rhs,
            self.rhs_se,
            self.relative_error,
            self.mean_f0,
            self.correction_from_mean,
            self.rhs_from_mean,
            self.relative_error_from_mean,
            self.implied_correction,
            self.seed
        )
    }
}

/// Each replication draws `n + 2` points; the first `n` give the hull volume
/// and all `n + 2` give the vertex count.
pub fn volume_variance(config: &VolumeConfig) -> Result<VolumeReport> {
    let body = make_body(config.body.clone())?;
    let d = body.dim;
    if !(2..=3).contains(&d) {
        return Err(Error::Config(format!("the volume identity is checked for d in {{2, 3}}, got {d}")));
    }
    if config.n < d + 1 {
        return Err(Error::Config(format!("n must be at least d + 1 = {}", d + 1)));
    }
    if config.replications < 4 {
        return Err(Error::Config("replications must be at least 4".into()));
    }
    let asa = body.affine_surface_area()?.value;
    let key = SeedKey::new(config.seed).label("volvar");
    let n = config.n;
    let pairs = par::try_map_indexed(config.replications, |r| -> Result<(f64, f64)> {
        let sample = sample_binomial(&body, n + 2, &key.child(r as u64))?;
        let small = sample.points.prefix(n);
        let vol = convex_hull(&small)?.volume(&small);
        let f0 = convex_hull(&sample.points)?.f_vector[0] as f64;
        Ok((vol, f0))
    })?;
    let vols = Summary::of(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let f0 = Summary::of(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let df = d as f64;
    let beta = (df - 1.0) / (df + 1.0);
    let asa_unit = asa * body.volume.powf(-beta);
    let correction = (3.0 - df) / (df + 1.0) * asa_unit * ((n + 2) as f64).powf(beta);
    let scale = body.volume * body.volume / ((n + 1) as f64 * (n + 2) as f64);
    let rhs = scale * (f0.variance + correction);
    let correction_from_mean = (3.0 - df) / (df + 1.0) * f0.mean;
    let rhs_from_mean = scale * (f0.variance + correction_from_mean);
    Ok(VolumeReport {
        config: config.clone(),
        body_volume: body.volume,
        affine_surface_area: asa,
        mean_volume: vols.mean,
        lhs: vols.variance,
        lhs_se: vols.variance_se,
        var_f0: f0.variance,
        var_f0_se: f0.variance_se,
        correction,
        rhs,
        rhs_se: scale * f0.variance_se,
        relative_error: (vols.variance - rhs).abs() / rhs,
        mean_f0: f0.mean,
        correction_from_mean,
        rhs_from_mean,
        relative_error_from_mean: (vols.variance - rhs_from_mean).abs() / rhs_from_mean,
        implied_correction: vols.variance / scale - f0.variance,
        seed: key.digest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_correction_vanishes() {
        let cfg = VolumeConfig { body: "ball:3,1".parse().unwrap(), n: 40, replications: 8, seed: 1, name: "t".into() };
        let rep = volume_variance(&cfg).unwrap();
        assert_eq!(rep.correction, 0.0);
        assert!(rep.lhs > 0.0 && rep.rhs > 0.0);
    }
}
