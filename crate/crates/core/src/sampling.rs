//! Poisson, binomial and coupled uniform point processes.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bodies::{BoundingBox, SmoothBody};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::{Role, SeedKey, StreamRng};

/// Cap on rejection-sampling proposals per call.
pub const MAX_PROPOSALS: u64 = 1_000_000_000;

/// A set that can be sampled uniformly by rejection from its bounding box.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn bounding_box(&self) -> BoundingBox;
    fn contains(&self, x: &[f64]) -> bool;
    fn volume(&self) -> f64;
    fn id(&self) -> String;
}

impl Region for SmoothBody {
    fn dim(&self) -> usize {
        self.dim
    }
    fn bounding_box(&self) -> BoundingBox {
        self.bounding_box.clone()
    }
    fn contains(&self, x: &[f64]) -> bool {
        SmoothBody::contains(self, x)
    }
    fn volume(&self) -> f64 {
        self.volume
    }
    fn id(&self) -> String {
        SmoothBody::id(self)
    }
}

/// An axis-parallel box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox(pub BoundingBox);

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("box needs lo < hi in every coordinate".into()));
        }
        Ok(Self(BoundingBox { lo, hi }))
    }
}

impl Region for AxisBox {
    fn dim(&self) -> usize {
        self.0.lo.len()
    }
    fn bounding_box(&self) -> BoundingBox {
        self.0.clone()
    }
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.0.lo.iter().zip(&self.0.hi)).all(|(x, (a, b))| *a <= *x && *x <= *b)
    }
    fn volume(&self) -> f64 {
        self.0.volume()
    }
    fn id(&self) -> String {
        let f = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("box:{};{}", f(&self.0.lo), f(&self.0.hi))
    }
}

/// `n` i.i.d. uniform points of `region` by rejection from its bounding box.
pub fn uniform_points<R: Region + ?Sized>(region: &R, n: usize, rng: &mut StreamRng) -> Result<PointSet> {
    let d = region.dim();
    let bb = region.bounding_box();
    let mut out = PointSet::with_capacity(d, n);
    let mut buf = vec![0.0; d];
    let mut proposals: u64 = 0;
    while out.len() < n {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = bb.lo[j] + (bb.hi[j] - bb.lo[j]) * rng.random::<f64>();
        }
        proposals += 1;
        if region.contains(&buf) {
            out.push(&buf);
        } else if proposals > MAX_PROPOSALS {
            return Err(Error::Runtime(format!("rejection sampler exceeded {MAX_PROPOSALS} proposals in {}", region.id())));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SampleMode {
    Poisson { lambda: f64 },
    Binomial { n: usize },
}

impl std::fmt::Display for SampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleMode::Poisson { lambda } => write!(f, "poisson({lambda})"),
            SampleMode::Binomial { n } => write!(f, "binomial({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub points: PointSet,
    pub mode: SampleMode,
    pub body_id: String,
    pub seed: u64,
    pub realized_count: usize,
}

impl PointSample {
    /// One point per row: coordinates, then body id, seed and mode.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.points.dim();
        let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
        writeln!(w, "{},body_id,seed,mode", header.join(","))?;
        for p in self.points.iter() {
            let coords: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{},{},{},{}", coords.join(","), self.body_id, self.seed, self.mode)?;
        }
        Ok(())
    }
}

pub(crate) fn poisson_count(mean: f64, rng: &mut StreamRng) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Poisson process of intensity `lambda` restricted to `region`.
pub fn sample_poisson<R: Region + ?Sized>(region: &R, lambda: f64, key: &SeedKey) -> Result<PointSample> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("intensity must be positive, got {lambda}")));
    }
    let count = poisson_count(lambda * region.volume(), &mut key.rng(Role::Count))?;
    let points = uniform_points(region, count, &mut key.rng(Role::Points))?;
    Ok(PointSample { points, mode: SampleMode::Poisson { lambda }, body_id: region.id(), seed: key.digest(), realized_count: count })
}

/// `n` i.i.d. uniform points in `region`.
pub fn sample_binomial<R: Region + ?Sized>(region: &R, n: usize, key: &SeedKey) -> Result<PointSample> {
    if n < region.dim() + 1 {
        return Err(Error::InvalidInput(format!("binomial sample needs at least d+1 = {} points", region.dim() + 1)));
    }
    let points = uniform_points(region, n, &mut key.rng(Role::Points))?;
    Ok(PointSample { points, mode: SampleMode::Binomial { n }, body_id: region.id(), seed: key.digest(), realized_count: n })
}

/// Maximal coupling of `Binomial(n, p)` and `Poisson(n p)` by inverse CDFs on
/// one shared uniform: the overlap `min(b_k, q_k)` is used first, then the
/// two disjoint residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCoupling {
    pub n: usize,
    pub p: f64,
    overlap_cdf: Vec<f64>,
    binomial_residual_cdf: Vec<f64>,
    poisson_residual_cdf: Vec<f64>,
    /// `P[N = Bi]` under the coupling.
    pub agreement: f64,
}

fn ln_binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
    if p >= 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (nf, kf) = (n as f64, k as f64);
    ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * p.ln() + (nf - kf) * (-p).ln_1p()
}

fn ln_poisson_pmf(mean: f64, k: usize) -> f64 {
    let kf = k as f64;
    kf * mean.ln() - mean - ln_gamma(kf + 1.0)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn invert(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().unwrap_or(&0.0);
    let target = u * total;
    cdf.partition_point(|&c| c <= target).min(cdf.len().saturating_sub(1))
}

impl CountCoupling {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 || !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInput(format!("coupling needs n >= 1 and p in (0, 1], got {n}, {p}")));
        }
        let mean = n as f64 * p;
        let kmax = (mean + 14.0 * mean.sqrt() + 30.0).ceil() as usize;
        let kmax = kmax.max(n);
        let b: Vec<f64> = (0..=kmax).map(|k| ln_binomial_pmf(n, p, k).exp()).collect();
        let q: Vec<f64> = (0..=kmax).map(|k| ln_poisson_pmf(mean, k).exp()).collect();
        let m: Vec<f64> = b.iter().zip(&q).map(|(a, c)| a.min(*c)).collect();
        let rb: Vec<f64> = b.iter().zip(&m).map(|(a, c)| (a - c).max(0.0)).collect();
        let rq: Vec<f64> = q.iter().zip(&m).map(|(a, c)| (a - c).max(0.0)).collect();
        let agreement = m.iter().sum::<f64>().min(1.0);
        Ok(Self {
            n,
            p,
            overlap_cdf: cumulative(&m),
            binomial_residual_cdf: cumulative(&rb),
            poisson_residual_cdf: cumulative(&rq),
            agreement,
        })
    }

    /// Total-variation distance between the two count laws.
    pub fn total_variation(&self) -> f64 {
        1.0 - self.agreement
    }

    /// `(N, Bi)` from one uniform variate.
    pub fn draw(&self, u: f64) -> (usize, usize) {
        if u < self.agreement || self.agreement >= 1.0 {
            let k = invert(&self.overlap_cdf, u / self.agreement);
            (k, k)
        } else {
            let v = (u - self.agreement) / (1.0 - self.agreement);
            (invert(&self.poisson_residual_cdf, v), invert(&self.binomial_residual_cdf, v))
        }
    }
}

/// A Poisson and a binomial sample that are prefixes of one uniform stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub shared_stream: PointSet,
    pub poisson_count: usize,
    pub binomial_count: usize,
    pub seed: u64,
}

impl CoupledPair {
    pub fn poisson_view(&self) -> PointSet {
        self.shared_stream.prefix(self.poisson_count)
    }

    pub fn binomial_view(&self) -> PointSet {
        self.shared_stream.prefix(self.binomial_count)
    }
}

/// Coupled counts `(N, Bi)` with `N ~ Poisson(n p)`, `Bi ~ Binomial(n, p)`,
/// followed by `max(N, Bi)` uniform points of `region`. With `p` the
/// probability mass of `region` inside a unit-mass parent, the views are the
/// restrictions of a Poisson(n) and an n-point binomial process.
pub fn sample_coupled<R: Region + ?Sized>(region: &R, coupling: &CountCoupling, key: &SeedKey) -> Result<CoupledPair> {
    let u: f64 = key.rng(Role::Coupling).random();
    let (poisson_count, binomial_count) = coupling.draw(u);
    let shared_stream = uniform_points(region, poisson_count.max(binomial_count), &mut key.rng(Role::Points))?;
    Ok(CoupledPair { shared_stream, poisson_count, binomial_count, seed: key.digest() })
}

/// Rate-one Poisson process on `[-L/2, L/2]^{d-1} x [0, H]`; the last
/// coordinate is the height.
pub fn sample_paraboloid_window(dim_base: usize, l: f64, h: f64, key: &SeedKey) -> Result<PointSet> {
    if !(l > 0.0 && h > 0.0) || dim_base == 0 {
        return Err(Error::InvalidInput(format!("window needs L, H > 0, got {l}, {h}")));
    }
    let mut lo = vec![-l / 2.0; dim_base];
    let mut hi = vec![l / 2.0; dim_base];
    lo.push(0.0);
    hi.push(h);
    let window = AxisBox::new(lo, hi)?;
    let count = poisson_count(window.volume(), &mut key.rng(Role::Count))?;
    uniform_points(&window, count, &mut key.rng(Role::Points))
}

/// Density of the image of `lambda r^{d-1} dr dsigma(u)` under the scaling
/// transform at a point with curvature radius `r_z`:
/// `(1 - s^{-2} h')^{d-1} (sin(|v'|/s) / (|v'|/s))^{d-2}`, `s = (r_z^d lambda)^{1/(d+1)}`.
pub fn rescaled_intensity_density(lambda: f64, r_z: f64, d: usize, vp: &[f64], hp: f64) -> Result<f64> {
    if d < 2 || vp.len() != d - 1 {
        return Err(Error::Domain(format!("tangent coordinate must have length d-1 = {}", d.saturating_sub(1))));
    }
    let s = (r_z.powi(d as i32) * lambda).powf(1.0 / (d as f64 + 1.0));
    let t = vp.iter().map(|x| x * x).sum::<f64>().sqrt() / s;
    if !(0.0..=s * s).contains(&hp) || t >= std::f64::consts::PI {
        return Err(Error::Domain(format!("({vp:?}, {hp}) lies outside the image of the osculating ball")));
    }
    let radial = (1.0 - hp / (s * s)).powi(d as i32 - 1);
    let angular = if t == 0.0 { 1.0 } else { (t.sin() / t).powi(d as i32 - 2) };
    Ok(radial * angular)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_sample_is_exact_and_inside() {
        let disk = SmoothBody::ball(2, 1.0).unwrap();
        let key = SeedKey::new(3);
        let s = sample_binomial(&disk, 4, &key).unwrap();
        assert_eq!(s.points.len(), 4);
        assert!(s.points.iter().all(|p| disk.contains(p)));
        assert_eq!(s, sample_binomial(&disk, 4, &key).unwrap());
        assert!(sample_binomial(&disk, 2, &key).is_err());
    }

    #[test]
    fn coupling_is_maximal_and_prefix_consistent() {
        let c = CountCoupling::new(50, 0.2).unwrap();
        let tv: f64 = (0..=200)
            .map(|k| (ln_binomial_pmf(50, 0.2, k).exp() - ln_poisson_pmf(10.0, k).exp()).abs())
            .sum::<f64>()
            / 2.0;
        assert!((c.total_variation() - tv).abs() < 1e-12);
        let region = AxisBox::new(vec![0.0, 0.0], vec![1.0, 0.2]).unwrap();
        for i in 0..50 {
            let pair = sample_coupled(&region, &c, &SeedKey::new(9).child(i)).unwrap();
            let m = pair.poisson_count.min(pair.binomial_count);
            assert_eq!(pair.poisson_view().prefix(m), pair.binomial_view().prefix(m));
        }
    }

    #[test]
    fn whole_body_coupling_fixes_the_binomial_count() {
        let c = CountCoupling::new(100, 1.0).unwrap();
        for u in [0.0, 0.1, 0.5, 0.93, 0.999_999] {
            assert_eq!(c.draw(u).1, 100);
        }
        assert!((c.agreement - ln_poisson_pmf(100.0, 100).exp()).abs() < 1e-12);
    }

    #[test]
    fn intensity_density_special_values() {
        assert_eq!(rescaled_intensity_density(1e4, 1.0, 3, &[0.0, 0.0], 0.0).unwrap(), 1.0);
        let lam: f64 = 1000.0;
        let v = rescaled_intensity_density(lam, 1.0, 2, &[0.7], 2.0).unwrap();
        assert!((v - (1.0 - lam.powf(-2.0 / 3.0) * 2.0)).abs() < 1e-15);
        assert!(rescaled_intensity_density(lam, 1.0, 2, &[0.7], -1.0).is_err());
        assert!(rescaled_intensity_density(lam, 1.0, 2, &[40.0], 1.0).is_err());
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let disk = SmoothBody::ball(2, 1.0).unwrap();
        let s = sample_binomial(&disk, 5, &SeedKey::new(1)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x0,x1,body_id,seed,mode\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
