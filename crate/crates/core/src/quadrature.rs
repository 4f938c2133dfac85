//! Composite Gauss–Legendre quadrature with panel halving.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Points per panel.
pub const GL_ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Quadrature value with the difference to the previous refinement level.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

/// Tensor-product composite rule with `panels` panels per axis.
pub fn tensor_rule<F: Fn(&[f64]) -> f64>(bounds: &[(f64, f64)], panels: usize, f: &F) -> f64 {
    let (x, w) = rule16();
    let dim = bounds.len();
    let per_axis = panels * GL_ORDER;
    let mut axes_nodes = Vec::with_capacity(dim);
    let mut axes_weights = Vec::with_capacity(dim);
    for &(a, b) in bounds {
        let h = (b - a) / panels as f64;
        let mut ns = Vec::with_capacity(per_axis);
        let mut ws = Vec::with_capacity(per_axis);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for j in 0..GL_ORDER {
                ns.push(mid + 0.5 * h * x[j]);
                ws.push(0.5 * h * w[j]);
            }
        }
        axes_nodes.push(ns);
        axes_weights.push(ws);
    }
    let mut idx = vec![0usize; dim];
    let mut pt = vec![0.0; dim];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for a in 0..dim {
            pt[a] = axes_nodes[a][idx[a]];
            weight *= axes_weights[a][idx[a]];
        }
        total += weight * f(&pt);
        let mut a = 0;
        loop {
            if a == dim {
                return total;
            }
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Integrates `f` over a box, halving panels until two successive levels
/// agree to `rel_tol` (relative, with an absolute floor of `rel_tol * 1e-3`).
pub fn integrate_box<F: Fn(&[f64]) -> f64>(
    bounds: &[(f64, f64)],
    f: F,
    rel_tol: f64,
    max_evaluations: usize,
) -> Result<Quadrature> {
    let dim = bounds.len().max(1);
    let evals = |p: usize| (p * GL_ORDER).pow(dim as u32);
    let mut panels = 1;
    let mut prev = tensor_rule(bounds, panels, &f);
    let mut used = evals(panels);
    loop {
        let next_panels = panels * 2;
        if used + evals(next_panels) > max_evaluations {
            return Err(Error::NoConvergence { what: "quadrature", partial: prev, error: f64::NAN });
        }
        let next = tensor_rule(bounds, next_panels, &f);
        used += evals(next_panels);
        let err = (next - prev).abs();
        if err <= rel_tol * next.abs().max(1e-3) {
            return Ok(Quadrature { value: next, error: err, panels: next_panels, evaluations: used });
        }
        if !next.is_finite() {
            return Err(Error::NoConvergence { what: "quadrature", partial: next, error: err });
        }
        prev = next;
        panels = next_panels;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_point_rule_is_exact_for_degree_31() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
        let m31: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(31)).sum();
        assert!(m31.abs() < 1e-15);
    }

    #[test]
    fn adaptive_box_integration() {
        let q = integrate_box(&[(0.0, std::f64::consts::PI)], |x| x[0].sin(), 1e-12, 1 << 20).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
        let q2 = integrate_box(&[(0.0, 1.0), (0.0, 2.0)], |x| (x[0] * x[1]).exp(), 1e-10, 1 << 22).unwrap();
        // integral of (e^{2x} - 1)/x over [0,1] = Ein(2)
        let mut ein2 = 0.0;
        let mut fact = 1.0;
        for k in 1..30 {
            fact *= k as f64;
            ein2 += 2f64.powi(k) / (k as f64 * fact);
        }
        assert!((q2.value - ein2).abs() < 1e-9, "{}", q2.value);
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let r = integrate_box(&[(0.0, 1.0)], |x| if x[0] < 0.3 { 0.0 } else { 1.0 }, 1e-15, 100);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
