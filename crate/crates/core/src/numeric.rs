//! Small numerical building blocks shared by the physics modules.

use gauss_quad::{GaussHermite, GaussLegendre};
use roots::{find_root_brent, SimpleConvergency};
use std::num::NonZeroUsize;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `n` evenly spaced samples covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

/// Composite trapezoid weights for `n` uniform samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n == 1 {
        w[0] = 0.0;
    } else if n > 1 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Normalised Hermite polynomials `H_k(u) / sqrt(2^k k!)` for `k = 0..=n_max`.
///
/// The normalisation keeps the three-term recurrence stable for large orders,
/// where the plain `H_k` overflow long before the Gaussian factor can tame them.
pub fn hermite_normalized(n_max: usize, u: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n_max == 0 {
        return;
    }
    out.push(std::f64::consts::SQRT_2 * u);
    for k in 1..n_max {
        let kf = k as f64;
        let next = u * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
}

/// Nodes and weights of an `n`-point Gauss-Hermite rule (weight `exp(-t^2)`).
#[derive(Debug, Clone)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HermiteRule {
    pub fn new(points: usize) -> Self {
        let rule = GaussHermite::new(NonZeroUsize::new(points.max(1)).expect("nonzero"));
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        HermiteRule { nodes, weights }
    }
}

/// Nodes and weights of an `n`-point Gauss-Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone)]
pub struct LegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LegendreRule {
    pub fn new(points: usize, a: f64, b: f64) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(points.max(1)).expect("nonzero"));
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (mid + half * x, half * w))
            .unzip();
        LegendreRule { nodes, weights }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("root search did not converge")]
    NoConvergence,
}

/// Brent root of `f` on a bracketing interval, to absolute tolerance `tol` in x.
pub fn bracketed_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut f = f;
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    let mut conv = SimpleConvergency { eps: tol, max_iter: 500 };
    find_root_brent(lo, hi, &mut f, &mut conv).map_err(|_| RootError::NoConvergence)
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmax, max)`. Evaluation errors abort the search.
pub fn golden_section_max<F, E>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Vertex of the parabola through three equally spaced samples, as an offset
/// in units of the spacing from the middle sample. `None` if the samples are
/// not strictly concave.
pub fn parabolic_vertex(y_left: f64, y_mid: f64, y_right: f64) -> Option<f64> {
    let denom = y_left - 2.0 * y_mid + y_right;
    if denom >= 0.0 {
        return None;
    }
    let offset = 0.5 * (y_left - y_right) / denom;
    (offset.abs() <= 1.0).then_some(offset)
}
