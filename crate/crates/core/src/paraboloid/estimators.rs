//! Monte Carlo estimators for the correlation functions of the paraboloid
//! scores and for the limiting variance density `sigma^2`.
//!
//! Two routes estimate `sigma^2`: integrating the one- and two-point
//! correlation functions of pinned points over a quadrature grid, and the
//! variance of the total score in a large window.

use serde::{Deserialize, Serialize};

use super::{ParaboloidScene, SceneWindow};
use crate::bodies::unit_sphere_area;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::SeedKey;
use crate::stats::{mean, variance, variance_standard_error, Summary};

/// Minimum replications per correlation node.
pub const MIN_CORRELATION_REPS: usize = 100;
/// Minimum replications of the window estimator.
pub const MIN_WINDOW_REPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Zeta1,
    Zeta2,
    MeanScore,
    Sigma2Correlation,
    Sigma2Window,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Zeta1 => "zeta1",
            Target::Zeta2 => "zeta2",
            Target::MeanScore => "mean-score",
            Target::Sigma2Correlation => "sigma2-correlation",
            Target::Sigma2Window => "sigma2-window",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub target: Target,
    pub k: usize,
    /// Grid node the value refers to (`[h]`, `[h, v', h']` or empty).
    pub node: Vec<f64>,
    pub value: f64,
    pub std_error: f64,
    /// Quadrature and truncation error bound (zero for pointwise estimates).
    pub systematic_error: f64,
    pub replications: usize,
    pub seed: u64,
    pub metadata: serde_json::Value,
    pub warnings: Vec<String>,
}

impl CorrelationEstimate {
    /// `value -/+ (1.96 s.e. + systematic error)`.
    pub fn ci95(&self) -> (f64, f64) {
        let half = 1.96 * self.std_error + self.systematic_error;
        (self.value - half, self.value + half)
    }

    pub const CSV_HEADER: &'static str = "target,k,node,value,std_error,systematic_error,replications,seed";

    pub fn csv_row(&self) -> String {
        let node: Vec<String> = self.node.iter().map(|x| format!("{x}")).collect();
        format!(
            "{},{},{},{:.10e},{:.10e},{:.10e},{},{}",
            self.target.as_str(),
            self.k,
            node.join(";"),
            self.value,
            self.std_error,
            self.systematic_error,
            self.replications,
            self.seed
        )
    }
}

fn check_k(window: &SceneWindow, ks: &[usize]) -> Result<()> {
    if let Some(&k) = ks.iter().find(|&&k| k > window.dim_base) {
        return Err(Error::InvalidInput(format!("face dimension {k} exceeds d-1 = {}", window.dim_base)));
    }
    Ok(())
}

/// Scores `[pin][k]` of pinned points, `k <= d - 1`, in the scene `key` draws.
fn pinned_scores(window: SceneWindow, pins: &[Vec<f64>], key: &SeedKey) -> Result<Vec<Vec<f64>>> {
    let scene = ParaboloidScene::sample(window, pins, key)?;
    let counts = scene.pin_face_counts()?;
    Ok(counts.into_iter().map(|c| c.iter().enumerate().map(|(k, &n)| n as f64 / (k + 1) as f64).collect()).collect())
}

fn origin_pin(dim_base: usize, h: f64) -> Vec<f64> {
    let mut p = vec![0.0; dim_base + 1];
    p[dim_base] = h;
    p
}

/// `E xi_k((0, h), P + (0, h))^2` for each `k` in `ks`.
pub fn estimate_zeta1(window: SceneWindow, ks: &[usize], h: f64, reps: usize, key: &SeedKey) -> Result<Vec<CorrelationEstimate>> {
    check_k(&window, ks)?;
    if reps < MIN_CORRELATION_REPS {
        return Err(Error::InvalidInput(format!("need at least {MIN_CORRELATION_REPS} replications")));
    }
    if !(0.0..window.h).contains(&h) {
        return Err(Error::InvalidInput(format!("height {h} outside [0, {})", window.h)));
    }
    let pin = origin_pin(window.dim_base, h);
    let samples = par::try_map_indexed(reps, |r| pinned_scores(window, std::slice::from_ref(&pin), &key.child(r as u64)))?;
    Ok(ks
        .iter()
        .map(|&k| {
            let sq: Vec<f64> = samples.iter().map(|s| s[0][k] * s[0][k]).collect();
            let s = Summary::of(&sq);
            CorrelationEstimate {
                target: Target::Zeta1,
                k,
                node: vec![h],
                value: s.mean,
                std_error: s.mean_se.max(f64::MIN_POSITIVE),
                systematic_error: 0.0,
                replications: reps,
                seed: key.digest(),
                metadata: serde_json::json!({ "L": window.l, "H": window.h }),
                warnings: Vec::new(),
            }
        })
        .collect())
}

/// `E xi_k((0, h), P + (0, h))` on a grid of heights, for each `k`: `out[k_index][node]`.
pub fn mean_score_profile(
    window: SceneWindow,
    ks: &[usize],
    heights: &[f64],
    reps: usize,
    key: &SeedKey,
) -> Result<Vec<Vec<CorrelationEstimate>>> {
    check_k(&window, ks)?;
    let per_node = par::try_map_indexed(heights.len() * reps, |t| {
        let (j, r) = (t / reps, t % reps);
        pinned_scores(window, &[origin_pin(window.dim_base, heights[j])], &key.child(j as u64).child(r as u64))
    })?;
    Ok(ks
        .iter()
        .map(|&k| {
            heights
                .iter()
                .enumerate()
                .map(|(j, &h)| {
                    let xs: Vec<f64> = per_node[j * reps..(j + 1) * reps].iter().map(|s| s[0][k]).collect();
                    let s = Summary::of(&xs);
                    CorrelationEstimate {
                        target: Target::MeanScore,
                        k,
                        node: vec![h],
                        value: s.mean,
                        std_error: s.mean_se.max(f64::MIN_POSITIVE),
                        systematic_error: 0.0,
                        replications: reps,
                        seed: key.child(j as u64).digest(),
                        metadata: serde_json::json!({ "L": window.l, "H": window.h }),
                        warnings: Vec::new(),
                    }
                })
                .collect()
        })
        .collect())
}

/// Per-replication terms of the two-point correlation at one node:
/// `(xi(w1) xi(w2) with both pinned, xi(w1) alone, xi(w2) alone)` for each
/// `k`, all on the same Poisson sample.
fn zeta2_terms(window: SceneWindow, w1: &[f64], w2: &[f64], key: &SeedKey) -> Result<Vec<[f64; 3]>> {
    let both = pinned_scores(window, &[w1.to_vec(), w2.to_vec()], key)?;
    let one = pinned_scores(window, &[w1.to_vec()], key)?;
    let two = pinned_scores(window, &[w2.to_vec()], key)?;
    Ok((0..both[0].len()).map(|k| [both[0][k] * both[1][k], one[0][k], two[0][k]]).collect())
}

/// `mean(A) - mean(B1) mean(B2)` with a delta-method standard error.
fn covariance_from_terms(terms: &[[f64; 3]]) -> (f64, f64) {
    let a: Vec<f64> = terms.iter().map(|t| t[0]).collect();
    let b1: Vec<f64> = terms.iter().map(|t| t[1]).collect();
    let b2: Vec<f64> = terms.iter().map(|t| t[2]).collect();
    let (ma, m1, m2) = (mean(&a), mean(&b1), mean(&b2));
    let psi: Vec<f64> = terms.iter().map(|t| t[0] - m2 * t[1] - m1 * t[2]).collect();
    let se = (variance(&psi) / terms.len() as f64).sqrt();
    (ma - m1 * m2, se)
}

fn check_pins(window: &SceneWindow, w1: &[f64], w2: &[f64]) -> Result<()> {
    if w1 == w2 {
        return Err(Error::InvalidInput("the two pinned points must differ".into()));
    }
    for w in [w1, w2] {
        if !window.contains(w) {
            return Err(Error::InvalidInput(format!("pinned point {w:?} lies outside the window")));
        }
    }
    Ok(())
}

/// `(-v'/2, h)` and `(v'/2, h')`: by stationarity the correlation depends on
/// the base offset only, and centring the pair keeps both far from the edge.
fn pin_pair(h: f64, v: &[f64], h2: f64) -> (Vec<f64>, Vec<f64>) {
    let mut w1: Vec<f64> = v.iter().map(|x| -x / 2.0).collect();
    let mut w2: Vec<f64> = v.iter().map(|x| x / 2.0).collect();
    w1.push(h);
    w2.push(h2);
    (w1, w2)
}

/// Two-point correlation
/// `E xi(w1, P + w1 + w2) xi(w2, P + w1 + w2) - E xi(w1, P + w1) E xi(w2, P + w2)`
/// with base offset `v'` between `w1` at height `h` and `w2` at height `h'`,
/// using common random numbers.
pub fn estimate_zeta2(
    window: SceneWindow,
    ks: &[usize],
    h: f64,
    v: &[f64],
    h2: f64,
    reps: usize,
    key: &SeedKey,
) -> Result<Vec<CorrelationEstimate>> {
    check_k(&window, ks)?;
    if reps < MIN_CORRELATION_REPS {
        return Err(Error::InvalidInput(format!("need at least {MIN_CORRELATION_REPS} replications")));
    }
    if v.len() != window.dim_base {
        return Err(Error::InvalidInput("v' must have dimension d-1".into()));
    }
    let (w1, w2) = pin_pair(h, v, h2);
    check_pins(&window, &w1, &w2)?;
    let terms = par::try_map_indexed(reps, |r| zeta2_terms(window, &w1, &w2, &key.child(r as u64)))?;
    let mut node = vec![h];
    node.extend_from_slice(v);
    node.push(h2);
    Ok(ks
        .iter()
        .map(|&k| {
            let tk: Vec<[f64; 3]> = terms.iter().map(|t| t[k]).collect();
            let (value, se) = covariance_from_terms(&tk);
            CorrelationEstimate {
                target: Target::Zeta2,
                k,
                node: node.clone(),
                value,
                std_error: se.max(f64::MIN_POSITIVE),
                systematic_error: 0.0,
                replications: reps,
                seed: key.digest(),
                metadata: serde_json::json!({ "L": window.l, "H": window.h }),
                warnings: Vec::new(),
            }
        })
        .collect())
}

/// `0, x_1, ..., x_{n-1} = max` with gaps growing by `ratio` (or `start`
/// instead of 0 as the first node).
pub fn geometric_grid(start: f64, max: f64, n: usize, ratio: f64) -> Vec<f64> {
    assert!(n >= 2 && max > start && ratio >= 1.0);
    if ratio == 1.0 {
        return (0..n).map(|j| start + (max - start) * j as f64 / (n - 1) as f64).collect();
    }
    let denom = ratio.powi(n as i32 - 1) - 1.0;
    (0..n).map(|j| start + (max - start) * (ratio.powi(j as i32) - 1.0) / denom).collect()
}

pub(crate) fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { x[j] - x[j - 1] } else { 0.0 };
            let right = if j + 1 < n { x[j + 1] - x[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Quadrature grid for the correlation route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationGrid {
    /// Heights `h` and `h'` run over `[0, h_max]`.
    pub h_max: f64,
    pub n_h: usize,
    /// `|v'|` runs over `[v_min, v_max]`; `[0, v_min]` uses the first node's value.
    pub v_min: f64,
    pub v_max: f64,
    pub n_v: usize,
    /// Growth ratio of consecutive grid gaps.
    pub ratio: f64,
    /// Each `h` gap is split this many times for the cheap one-point term.
    pub one_point_refinement: usize,
    /// Replications per node.
    pub reps: usize,
}

impl Default for CorrelationGrid {
    fn default() -> Self {
        Self { h_max: 3.0, n_h: 8, v_min: 0.05, v_max: 4.0, n_v: 8, ratio: 1.25, one_point_refinement: 4, reps: 600 }
    }
}

fn refine(x: &[f64], parts: usize) -> Vec<f64> {
    let mut out = vec![x[0]];
    for w in x.windows(2) {
        for t in 1..=parts {
            out.push(w[0] + (w[1] - w[0]) * t as f64 / parts as f64);
        }
    }
    out
}

/// Every other index of `0..n`, always keeping the last.
fn even_nodes(n: usize) -> Vec<usize> {
    let mut e: Vec<usize> = (0..n).step_by(2).collect();
    if *e.last().unwrap() != n - 1 {
        e.push(n - 1);
    }
    e
}

/// Exponential tail `integral_{x_last}^inf` fitted to the last three nodes of
/// `|f|`; without visible decay, the last value times the fitted span.
pub(crate) fn exponential_tail(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    let m = 3.min(n);
    let xs = &x[n - m..];
    let ys: Vec<f64> = f[n - m..].iter().map(|v| v.abs().max(1e-300).ln()).collect();
    let last = f[n - 1].abs();
    match crate::stats::ols(xs, &ys) {
        Some(fit) if fit.slope < -1e-9 => last / -fit.slope,
        _ => last * (xs[m - 1] - xs[0]).max(1.0),
    }
}

/// Measure of `{v' : |v'| = r}` relative to `dr`, i.e. `|S^{d-2}| r^{d-2}`.
fn radial_factor(dim_base: usize, r: f64) -> f64 {
    if dim_base == 1 {
        2.0
    } else {
        unit_sphere_area(dim_base) * r.powi(dim_base as i32 - 1)
    }
}

/// `sigma^2 = int zeta1 dh + int int int zeta2 dh' dv' dh`, truncated to the
/// grid, with tails and quadrature error reported as a systematic bound.
/// Uses the symmetries `zeta2(h, v', h') = zeta2(h', v', h)` and rotation
/// invariance in `v'`.
pub fn estimate_sigma2_correlation(
    window: SceneWindow,
    ks: &[usize],
    grid: &CorrelationGrid,
    key: &SeedKey,
) -> Result<Vec<CorrelationEstimate>> {
    check_k(&window, ks)?;
    if grid.reps < MIN_CORRELATION_REPS {
        return Err(Error::InvalidInput(format!("need at least {MIN_CORRELATION_REPS} replications per node")));
    }
    if grid.n_h < 3 || grid.n_v < 3 || !(grid.h_max < window.h) || !(grid.v_max < window.l) || !(grid.v_min > 0.0) {
        return Err(Error::InvalidInput("grid needs >= 3 nodes per axis, h_max < H, 0 < v_min and v_max < L".into()));
    }
    let m = window.dim_base;
    let hs = geometric_grid(0.0, grid.h_max, grid.n_h, grid.ratio);
    let vs = geometric_grid(grid.v_min, grid.v_max, grid.n_v, grid.ratio);
    let h1s = refine(&hs, grid.one_point_refinement.max(1));
    let reps = grid.reps;

    // One-point term.
    let z1_key = key.label("zeta1");
    let z1 = par::try_map_indexed(h1s.len() * reps, |t| {
        let (j, r) = (t / reps, t % reps);
        pinned_scores(window, &[origin_pin(m, h1s[j])], &z1_key.child(j as u64).child(r as u64))
    })?;

    // Two-point term on h <= h'.
    let mut nodes = Vec::new();
    for a in 0..hs.len() {
        for b in a..hs.len() {
            for c in 0..vs.len() {
                nodes.push((a, c, b));
            }
        }
    }
    let z2_key = key.label("zeta2");
    let z2 = par::try_map_indexed(nodes.len() * reps, |t| {
        let (j, r) = (t / reps, t % reps);
        let (a, c, b) = nodes[j];
        let mut v = vec![0.0; m];
        v[0] = vs[c];
        let (w1, w2) = pin_pair(hs[a], &v, hs[b]);
        zeta2_terms(window, &w1, &w2, &z2_key.child(j as u64).child(r as u64))
    })?;

    let mut out = Vec::new();
    for &k in ks {
        let mut f1 = vec![0.0; h1s.len()];
        let mut s1 = vec![0.0; h1s.len()];
        for j in 0..h1s.len() {
            let sq: Vec<f64> = z1[j * reps..(j + 1) * reps].iter().map(|s| s[0][k] * s[0][k]).collect();
            let s = Summary::of(&sq);
            f1[j] = s.mean;
            s1[j] = s.mean_se;
        }
        let integrate1 = |sel: &[usize]| -> (f64, f64) {
            let x: Vec<f64> = sel.iter().map(|&j| h1s[j]).collect();
            let w = trapezoid_weights(&x);
            let value = sel.iter().zip(&w).map(|(&j, w)| w * f1[j]).sum();
            let var: f64 = sel.iter().zip(&w).map(|(&j, w)| (w * s1[j]).powi(2)).sum();
            (value, var)
        };
        let (i1, var1) = integrate1(&(0..h1s.len()).collect::<Vec<_>>());
        let quad1 = (i1 - integrate1(&even_nodes(h1s.len())).0).abs() / 3.0;

        // zeta2 on the full (h, v, h') tensor, mirrored across h = h'.
        let (nh, nv) = (hs.len(), vs.len());
        let mut f2 = vec![0.0; nh * nv * nh];
        let mut s2 = vec![0.0; nh * nv * nh];
        let idx = |a: usize, c: usize, b: usize| (a * nv + c) * nh + b;
        for (j, &(a, c, b)) in nodes.iter().enumerate() {
            let tk: Vec<[f64; 3]> = z2[j * reps..(j + 1) * reps].iter().map(|t| t[k]).collect();
            let (val, se) = covariance_from_terms(&tk);
            f2[idx(a, c, b)] = val;
            f2[idx(b, c, a)] = val;
            s2[idx(a, c, b)] = se;
            s2[idx(b, c, a)] = se;
        }
        let integrate2 = |hsel: &[usize], vsel: &[usize]| -> (f64, f64) {
            let hx: Vec<f64> = hsel.iter().map(|&j| hs[j]).collect();
            let vx: Vec<f64> = vsel.iter().map(|&j| vs[j]).collect();
            let wh = trapezoid_weights(&hx);
            let mut wv = trapezoid_weights(&vx);
            wv[0] += vx[0];
            for (w, &v) in wv.iter_mut().zip(&vx) {
                *w *= radial_factor(m, v);
            }
            let mut value = 0.0;
            let mut var = 0.0;
            for (ia, &a) in hsel.iter().enumerate() {
                for (ic, &c) in vsel.iter().enumerate() {
                    for (ib, &b) in hsel.iter().enumerate() {
                        let w = wh[ia] * wv[ic] * wh[ib];
                        value += w * f2[idx(a, c, b)];
                        // A mirrored pair shares one estimate, so it enters twice.
                        if a < b {
                            var += (2.0 * w * s2[idx(a, c, b)]).powi(2);
                        } else if a == b {
                            var += (w * s2[idx(a, c, b)]).powi(2);
                        }
                    }
                }
            }
            (value, var)
        };
        let (i2, var2) = integrate2(&(0..nh).collect::<Vec<_>>(), &(0..nv).collect::<Vec<_>>());
        let quad2 = (i2 - integrate2(&even_nodes(nh), &even_nodes(nv)).0).abs() / 3.0;
        let value = i1 + i2;
        let se = (var1 + var2).sqrt();
        let quadrature_error = quad1 + quad2;

        // Truncation: tails in h of zeta1 and of the h-marginal of zeta2, and in |v'|.
        let wh = trapezoid_weights(&hs);
        let mut wv = trapezoid_weights(&vs);
        wv[0] += vs[0];
        let h_marginal: Vec<f64> = (0..nh)
            .map(|a| {
                (0..nv)
                    .map(|c| (0..nh).map(|b| wv[c] * radial_factor(m, vs[c]) * wh[b] * f2[idx(a, c, b)]).sum::<f64>())
                    .sum()
            })
            .collect();
        let v_marginal: Vec<f64> = (0..nv)
            .map(|c| {
                radial_factor(m, vs[c])
                    * (0..nh).map(|a| (0..nh).map(|b| wh[a] * wh[b] * f2[idx(a, c, b)]).sum::<f64>()).sum::<f64>()
            })
            .collect();
        let tail_h1 = exponential_tail(&h1s, &f1);
        let tail_h2 = 2.0 * exponential_tail(&hs, &h_marginal);
        let tail_v = exponential_tail(&vs, &v_marginal);
        let truncation = tail_h1 + tail_h2 + tail_v;
        let mut warnings = Vec::new();
        if truncation > 0.1 * value.abs() {
            let msg = format!("k = {k}: truncation estimate {truncation:.3e} exceeds 10% of the value {value:.3e}");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        out.push(CorrelationEstimate {
            target: Target::Sigma2Correlation,
            k,
            node: Vec::new(),
            value,
            std_error: se.max(f64::MIN_POSITIVE),
            systematic_error: quadrature_error + truncation,
            replications: reps,
            seed: key.digest(),
            metadata: serde_json::json!({
                "L": window.l,
                "H": window.h,
                "grid": grid,
                "one_point_integral": i1,
                "two_point_integral": i2,
                "quadrature_error": { "one_point": quad1, "two_point": quad2 },
                "truncation_estimate": truncation,
                "tails": { "zeta1_h": tail_h1, "zeta2_h": tail_h2, "zeta2_v": tail_v },
                "h_nodes": hs,
                "one_point_h_nodes": h1s,
                "v_nodes": vs,
                "zeta1": f1,
            }),
            warnings,
        });
    }
    Ok(out)
}

/// Parameters of the window route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub dim_base: usize,
    /// Side length `L` of the base window.
    pub l: f64,
    /// Window height; `None` selects it with [`select_height`].
    pub height: Option<f64>,
    /// Margin `m` between the window edge and the inner scoring window.
    pub margin: f64,
    /// Growth `g` of the inner window used for the covariance partner sum.
    pub expansion: f64,
    pub reps: usize,
    /// Constant `c` in the precondition `m - g >= c sqrt(log L)`.
    pub margin_constant: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { dim_base: 1, l: 32.0, height: None, margin: 4.0, expansion: 2.0, reps: 2000, margin_constant: 1.0 }
    }
}

/// Score totals of independent scenes over the inner window and over the
/// inner window grown by the expansion: `inner[k_index][rep]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRun {
    pub window: SceneWindow,
    pub expansion: f64,
    pub ks: Vec<usize>,
    pub inner: Vec<Vec<f64>>,
    pub expanded: Vec<Vec<f64>>,
    /// Largest height of an inner-window extreme point over all scenes.
    pub max_inner_extreme_height: f64,
}

fn in_box(p: &[f64], dim_base: usize, half: f64) -> bool {
    p[..dim_base].iter().all(|x| x.abs() <= half)
}

/// Runs `reps` scenes and records the score totals.
pub fn window_run(window: SceneWindow, expansion: f64, ks: &[usize], reps: usize, key: &SeedKey) -> Result<WindowRun> {
    check_k(&window, ks)?;
    if !(0.0..=window.margin).contains(&expansion) {
        return Err(Error::InvalidInput(format!("expansion {expansion} must lie in [0, m = {}]", window.margin)));
    }
    let m = window.dim_base;
    let half = window.l / 2.0 - window.margin;
    let per_rep = par::try_map_indexed(reps, |r| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let scene = ParaboloidScene::sample(window, &[], &key.child(r as u64))?;
        let res = scene.evaluate()?;
        let mut inner = vec![0u64; ks.len()];
        let mut expanded = vec![0u64; ks.len()];
        let mut top: f64 = 0.0;
        for (i, p) in scene.points.iter().enumerate() {
            if !res.extreme_flags[i] || !in_box(p, m, half + expansion) {
                continue;
            }
            let is_inner = in_box(p, m, half);
            if is_inner {
                top = top.max(p[m]);
            }
            for (j, &k) in ks.iter().enumerate() {
                let c = res.face_counts[k][i] as u64;
                expanded[j] += c;
                if is_inner {
                    inner[j] += c;
                }
            }
        }
        let scale = |v: Vec<u64>| v.into_iter().zip(ks).map(|(c, &k)| c as f64 / (k + 1) as f64).collect();
        Ok((scale(inner), scale(expanded), top))
    })?;
    let inner = (0..ks.len()).map(|j| per_rep.iter().map(|t| t.0[j]).collect()).collect();
    let expanded = (0..ks.len()).map(|j| per_rep.iter().map(|t| t.1[j]).collect()).collect();
    let max_inner_extreme_height = per_rep.iter().map(|t| t.2).fold(0.0, f64::max);
    Ok(WindowRun { window, expansion, ks: ks.to_vec(), inner, expanded, max_inner_extreme_height })
}

/// Raises the window height from `start` until no inner-window extreme point
/// of a pilot run comes within 1 of the top.
pub fn select_height(dim_base: usize, l: f64, margin: f64, start: f64, pilot_reps: usize, key: &SeedKey) -> Result<f64> {
    let mut h = start.max(1.5);
    for round in 0..40 {
        let window = SceneWindow::new(dim_base, l, h, margin)?;
        let run = window_run(window, 0.0, &[0], pilot_reps, &key.child(round))?;
        if run.max_inner_extreme_height <= h - 1.0 {
            return Ok(h);
        }
        h += 1.0;
    }
    Err(Error::NoConvergence { what: "window height selection", partial: h, error: f64::NAN })
}

/// Sample covariance of paired samples with a standard error from the
/// variance of the centred products.
fn covariance(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = prods.iter().sum::<f64>() / (n - 1.0);
    (c, (variance(&prods) / n).sqrt())
}

/// `sigma^2` from the scores of large windows, for each `k`.
///
/// The value is `Cov(S_inner, S_grown) / |inner|`, where `S_grown` sums the
/// scores over the inner window grown by `expansion` on every side. Once the
/// growth covers the correlation range this has no boundary term, unlike
/// `Var(S_inner) / |inner|`, which is reported in the metadata alongside.
pub fn estimate_sigma2_window(ks: &[usize], cfg: &WindowConfig, key: &SeedKey) -> Result<Vec<CorrelationEstimate>> {
    if cfg.reps < MIN_WINDOW_REPS {
        return Err(Error::InvalidInput(format!("need at least {MIN_WINDOW_REPS} replications")));
    }
    let required = cfg.margin_constant * cfg.l.ln().max(0.0).sqrt();
    if cfg.margin - cfg.expansion < required {
        return Err(Error::InvalidInput(format!(
            "margin minus expansion {} is below {} sqrt(log L) = {required:.3}",
            cfg.margin - cfg.expansion,
            cfg.margin_constant
        )));
    }
    let h = match cfg.height {
        Some(h) => h,
        None => select_height(cfg.dim_base, cfg.l, cfg.margin, 4.0, 50, &key.label("pilot"))?,
    };
    let window = SceneWindow::new(cfg.dim_base, cfg.l, h, cfg.margin)?;
    let run = window_run(window, cfg.expansion, ks, cfg.reps, &key.label("scenes"))?;
    let area = window.inner_area();
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let (inner, grown) = (&run.inner[j], &run.expanded[j]);
            let (cov, cov_se) = covariance(inner, grown);
            let mut warnings = Vec::new();
            if run.max_inner_extreme_height > h - 1.0 {
                warnings.push(format!(
                    "an inner extreme point reached height {:.3} in a window of height {h}",
                    run.max_inner_extreme_height
                ));
            }
            CorrelationEstimate {
                target: Target::Sigma2Window,
                k,
                node: Vec::new(),
                value: cov / area,
                std_error: (cov_se / area).max(f64::MIN_POSITIVE),
                systematic_error: 0.0,
                replications: cfg.reps,
                seed: key.digest(),
                metadata: serde_json::json!({
                    "L": cfg.l,
                    "H": h,
                    "margin": cfg.margin,
                    "expansion": cfg.expansion,
                    "inner_area": area,
                    "mean_density": mean(inner) / area,
                    "plain_variance_density": variance(inner) / area,
                    "plain_variance_density_se": variance_standard_error(inner) / area,
                    "max_inner_extreme_height": run.max_inner_extreme_height,
                }),
                warnings,
            }
        })
        .collect())
}
