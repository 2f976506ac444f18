//! Closed-form p-Laplacian quantities: interval spectra, Dirichlet–Neumann
//! brackets for variational eigenvalues on a graph, and the p-versions of the
//! nodal bounds.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::secular::ls_slope;

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if p == 2.0 {
        return Ok(PI);
    }
    Ok(2.0 * PI / (p * (PI / p).sin()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PContext {
    pub p: f64,
    /// Conjugate exponent `p / (p − 1)`.
    pub q: f64,
    pub pi_p: f64,
}

impl PContext {
    pub fn new(p: f64) -> Result<Self> {
        let pi_p = pi_p(p)?;
        Ok(PContext { p, q: p / (p - 1.0), pi_p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Dirichlet,
    Neumann,
}

/// `(p−1)(π_p n/ℓ)^p` for Dirichlet, `(p−1)(π_p (n−1)/ℓ)^p` for Neumann, `n = 1..=count`.
pub fn interval_spectrum_p(length: f64, ctx: &PContext, kind: IntervalKind, count: usize) -> Vec<f64> {
    let shift = match kind {
        IntervalKind::Dirichlet => 0.0,
        IntervalKind::Neumann => 1.0,
    };
    (1..=count)
        .map(|n| (ctx.p - 1.0) * (ctx.pi_p * (n as f64 - shift) / length).powf(ctx.p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PBracket {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

/// The `n` smallest values of the union of per-edge closed-form lists.
fn merged(g: &MetricGraph, ctx: &PContext, kind: IntervalKind, n: usize) -> Vec<f64> {
    let mut all: Vec<f64> = g
        .edges()
        .iter()
        .flat_map(|e| interval_spectrum_p(e.length, ctx, kind, n))
        .collect();
    all.sort_by(f64::total_cmp);
    all.truncate(n);
    all
}

/// Index-wise pairs of the decoupled Neumann and Dirichlet spectra.
pub fn bracket_variational(g: &MetricGraph, ctx: &PContext, n: usize) -> Vec<PBracket> {
    let lower = merged(g, ctx, IntervalKind::Neumann, n);
    let upper = merged(g, ctx, IntervalKind::Dirichlet, n);
    lower
        .into_iter()
        .zip(upper)
        .enumerate()
        .map(|(i, (lower, upper))| PBracket { n: i + 1, lower, upper })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PWeylFit {
    /// Slope of `lower^{1/p}` against `n` over the top half.
    pub lower_slope: f64,
    pub upper_slope: f64,
    /// `(p−1)^{1/p} π_p / |𝒢|`.
    pub expected: f64,
    /// Larger of the two relative slope deviations.
    pub deviation: f64,
    /// Index range of the fit.
    pub window: (usize, usize),
}

pub fn weyl_p_check(brackets: &[PBracket], ctx: &PContext, total_length: f64) -> Result<PWeylFit> {
    if brackets.len() < 200 {
        return Err(Error::TooFew {
            what: "brackets",
            needed: 200,
            got: brackets.len(),
        });
    }
    let top = &brackets[brackets.len() / 2..];
    let ns: Vec<f64> = top.iter().map(|b| b.n as f64).collect();
    let root = |x: f64| x.max(0.0).powf(1.0 / ctx.p);
    let lower_slope = ls_slope(&ns, &top.iter().map(|b| root(b.lower)).collect::<Vec<_>>());
    let upper_slope = ls_slope(&ns, &top.iter().map(|b| root(b.upper)).collect::<Vec<_>>());
    let expected = (ctx.p - 1.0).powf(1.0 / ctx.p) * ctx.pi_p / total_length;
    let deviation = ((lower_slope - expected).abs()).max((upper_slope - expected).abs()) / expected;
    Ok(PWeylFit {
        lower_slope,
        upper_slope,
        expected,
        deviation,
        window: (top[0].n, top[top.len() - 1].n),
    })
}

/// `(p/q)(π_p |E| / |𝒢|)^p`.
pub fn lambda1p_upper_bound(g: &MetricGraph, ctx: &PContext) -> f64 {
    ctx.p / ctx.q * (ctx.pi_p * g.edge_count() as f64 / g.total_length()).powf(ctx.p)
}

/// `2 π_p |E| p^{1/p} / (qλ)^{1/p}`.
pub fn p_nodal_size_bound(lambda: f64, ctx: &PContext, edge_count: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    let inv = 1.0 / ctx.p;
    Ok(2.0 * ctx.pi_p * edge_count as f64 * ctx.p.powf(inv) / (ctx.q * lambda).powf(inv))
}

/// `λ` above which the nodal-size bound drops below the shortest edge.
pub fn p_vertex_threshold(g: &MetricGraph, ctx: &PContext) -> f64 {
    ctx.p / ctx.q * (2.0 * ctx.pi_p * g.edge_count() as f64 / g.min_length()).powf(ctx.p)
}

/// Admissible range of `ν` at `λ` for a function supported on length `supported_length`.
pub fn p_nu_bounds(lambda: f64, supported_length: f64, ctx: &PContext, g: &MetricGraph) -> Result<(f64, f64)> {
    let threshold = p_vertex_threshold(g, ctx);
    if !(lambda > threshold) {
        return Err(Error::BelowThreshold { lambda, threshold });
    }
    let centre = supported_length / ctx.pi_p * (ctx.q * lambda / ctx.p).powf(1.0 / ctx.p);
    let ne = g.edge_count() as f64;
    let nv = g.vertex_count() as f64;
    Ok((centre - (2.0 * ne - 1.0) * nv, centre + nv))
}
