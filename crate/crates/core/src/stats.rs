//! Small statistics toolkit: moments, bootstrap intervals, least squares and
//! goodness-of-fit tests.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::rng::StreamRng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the unbiased sample variance from the fourth central
/// moment: `Var(s^2) ~ (mu_4 - (n - 3) / (n - 1) sigma^4) / n`.
pub fn variance_standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return f64::INFINITY;
    }
    let m = mean(xs);
    let nf = n as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / nf;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
    let s2 = m2 * nf / (nf - 1.0);
    ((m4 - (nf - 3.0) / (nf - 1.0) * s2 * s2) / nf).max(0.0).sqrt()
}

/// Mean, variance and their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub mean_se: f64,
    pub variance_se: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let v = variance(xs);
        Self {
            n: xs.len(),
            mean: mean(xs),
            variance: v,
            mean_se: (v / xs.len() as f64).sqrt(),
            variance_se: variance_standard_error(xs),
        }
    }
}

/// Percentile bootstrap interval of `stat` at the given level. The interval
/// is widened if needed so that it contains the point estimate.
pub fn bootstrap_ci<F>(xs: &[f64], stat: F, resamples: usize, level: f64, rng: &mut StreamRng) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = xs.len();
    let point = stat(xs);
    if n < 2 || resamples == 0 {
        return (point, point);
    }
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .filter(|s| s.is_finite())
        .collect();
    if stats.is_empty() {
        return (point, point);
    }
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let idx = (q * (stats.len() - 1) as f64).round() as usize;
        stats[idx.min(stats.len() - 1)]
    };
    let (lo, hi) = (pick(alpha), pick(1.0 - alpha));
    (lo.min(point), hi.max(point))
}

/// Ordinary least squares fit `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub residual_ss: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if n > 2 { rss / (n - 2) as f64 } else { 0.0 };
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / n as f64 + mx * mx / sxx)).sqrt();
    Some(LinearFit { slope, intercept, slope_se, intercept_se, residual_ss: rss })
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut dmax: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        dmax = dmax.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * dmax;
    (dmax, kolmogorov_q(lambda))
}

/// `Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2)`.
fn kolmogorov_q(t: f64) -> f64 {
    if t < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * t * t).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square statistic, degrees of freedom and upper-tail p-value.
/// `fitted` parameters are subtracted from the degrees of freedom.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], fitted: usize) -> (f64, usize, f64) {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = observed.len().saturating_sub(1 + fitted).max(1);
    (stat, dof, chi_square_upper(stat, dof))
}

pub fn chi_square_upper(stat: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|c| 1.0 - c.cdf(stat)).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Role, SeedKey};

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn planted_line_is_recovered_exactly() {
        let x: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|a| 2.0 + a / 3.0).collect();
        let f = ols(&x, &y).unwrap();
        assert!((f.slope - 1.0 / 3.0).abs() < 1e-14);
        assert!(f.residual_ss < 1e-25);
    }

    #[test]
    fn bootstrap_interval_contains_the_estimate() {
        let mut rng = SeedKey::new(2).rng(Role::Bootstrap);
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let (lo, hi) = bootstrap_ci(&xs, variance, 500, 0.95, &mut rng);
        let v = variance(&xs);
        assert!(lo <= v && v <= hi && lo < hi);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &b).1 < 1e-10);
    }

    #[test]
    fn chi_square_tail() {
        // Upper 5% point of chi-square with 3 degrees of freedom.
        assert!((chi_square_upper(7.814727903251178, 3) - 0.05).abs() < 1e-9);
    }
}
