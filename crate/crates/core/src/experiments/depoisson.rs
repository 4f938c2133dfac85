use serde::{Deserialize, Serialize};

use super::{hull_stats, GridSpec};
use crate::bodies::{make_body, BodyKind};
use crate::config::display_fromstr;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::SeedKey;
use crate::sampling::{sample_coupled, CountCoupling};
use crate::stats::{mean, ols, variance, Summary};
use crate::testfn::TestFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepoissonConfig {
    #[serde(with = "display_fromstr")]
    pub body: BodyKind,
    pub k: usize,
    /// Sample sizes `n`.
    pub grid: GridSpec,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_name() -> String {
    "depoisson".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepoissonRow {
    pub n: usize,
    pub replications: usize,
    /// `Var f_k` of the `n`-point sample.
    pub var_binomial: f64,
    pub var_binomial_se: f64,
    /// `Var f_k` of the Poisson(`n`)-point sample sharing its stream.
    pub var_poisson: f64,
    pub var_poisson_se: f64,
    pub mean_binomial: f64,
    pub mean_poisson: f64,
    /// `var_binomial - var_poisson`.
    pub gap: f64,
    /// Standard error of the gap from the paired per-replication influence
    /// values `(x - mean x)^2 - (y - mean y)^2`.
    pub gap_se: f64,
    /// `|gap| / var_binomial`.
    pub ratio: f64,
    pub ratio_se: f64,
    /// Fraction of replications with identical counts.
    pub equal_count_fraction: f64,
    pub seed: u64,
}

impl DepoissonRow {
    pub const CSV_HEADER: &'static str = "n,replications,var_binomial,var_binomial_se,var_poisson,var_poisson_se,mean_binomial,mean_poisson,gap,gap_se,ratio,ratio_se,equal_count_fraction,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.replications,
            self.var_binomial,
            self.var_binomial_se,
            self.var_poisson,
            self.var_poisson_se,
            self.mean_binomial,
            self.mean_poisson,
            self.gap,
            self.gap_se,
            self.ratio,
            self.ratio_se,
            self.equal_count_fraction,
            self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepoissonReport {
    pub config: DepoissonConfig,
    pub rows: Vec<DepoissonRow>,
    /// Log–log slope of the ratio against `n` (needs two or more positive ratios).
    pub ratio_slope: Option<f64>,
    /// Reference slope `-1/(d+1)` of the gap-to-variance ratio.
    pub expected_ratio_slope: f64,
    /// Whether the ratio at the largest `n` is below the ratio at the smallest.
    pub decreasing: bool,
}

/// Paired binomial and Poisson hulls from one shared stream per replication:
/// the Poisson count has mean `n` and the first `min(N, n)` points coincide.
pub fn depoisson_compare(config: &DepoissonConfig) -> Result<DepoissonReport> {
    if config.replications < 4 {
        return Err(Error::Config("replications must be at least 4".into()));
    }
    let body = make_body(config.body.clone())?;
    if config.k >= body.dim {
        return Err(Error::Config(format!("k = {} must be below d = {}", config.k, body.dim)));
    }
    let grid = config.grid.values()?;
    if grid.iter().any(|x| x.fract() != 0.0 || *x < (body.dim + 1) as f64) {
        return Err(Error::Config("sample sizes must be integers of at least d + 1".into()));
    }
    let root = SeedKey::new(config.seed).label("depoisson");
    let g = TestFunction::Constant(1.0);
    let mut rows = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let n = x as usize;
        let key = root.child(i as u64);
        let coupling = CountCoupling::new(n, 1.0)?;
        let pairs = par::try_map_indexed(config.replications, |r| -> Result<(f64, f64, bool)> {
            let pair = sample_coupled(&body, &coupling, &key.child(r as u64))?;
            let b = hull_stats(&pair.binomial_view(), config.k, &g)?.fk;
            let p = hull_stats(&pair.poisson_view(), config.k, &g)?.fk;
            Ok((b, p, pair.poisson_count == pair.binomial_count))
        })?;
        let xb: Vec<f64> = pairs.iter().map(|t| t.0).collect();
        let yp: Vec<f64> = pairs.iter().map(|t| t.1).collect();
        let (sb, sp) = (Summary::of(&xb), Summary::of(&yp));
        let influence: Vec<f64> =
            xb.iter().zip(&yp).map(|(a, b)| (a - sb.mean).powi(2) - (b - sp.mean).powi(2)).collect();
        let gap = sb.variance - sp.variance;
        let gap_se = (variance(&influence) / influence.len() as f64).sqrt();
        rows.push(DepoissonRow {
            n,
            replications: config.replications,
            var_binomial: sb.variance,
            var_binomial_se: sb.variance_se,
            var_poisson: sp.variance,
            var_poisson_se: sp.variance_se,
            mean_binomial: sb.mean,
            mean_poisson: sp.mean,
            gap,
            gap_se,
            ratio: gap.abs() / sb.variance,
            ratio_se: gap_se / sb.variance,
            equal_count_fraction: mean(&pairs.iter().map(|t| t.2 as u8 as f64).collect::<Vec<_>>()),
            seed: key.digest(),
        });
    }
    let usable: Vec<&DepoissonRow> = rows.iter().filter(|r| r.ratio > 0.0).collect();
    let ratio_slope = if usable.len() >= 2 {
        let lx: Vec<f64> = usable.iter().map(|r| (r.n as f64).ln()).collect();
        let ly: Vec<f64> = usable.iter().map(|r| r.ratio.ln()).collect();
        ols(&lx, &ly).map(|f| f.slope)
    } else {
        None
    };
    let decreasing = rows.len() >= 2 && rows[rows.len() - 1].ratio < rows[0].ratio;
    Ok(DepoissonReport {
        config: config.clone(),
        rows,
        ratio_slope,
        expected_ratio_slope: -1.0 / (body.dim as f64 + 1.0),
        decreasing,
    })
}
