//! Nodal domains, nodal-count series, accumulation estimates and the
//! inequalities relating `ν_n`, `λ_n` and nodal-domain sizes.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::eigenfunctions::{apply_strategy, support, zeros_with_flags, BasisStrategy, SupportSet, ZERO_TOL};
use crate::error::{Error, Result};
use crate::graph::{nearest_in, ConditionSpec, End, GraphBuilder, MetricGraph, VertexCondition};
use crate::secular::{Eigenvalue, SpectralProblem};
use crate::solution::EdgewiseSolution;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub edge: usize,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalDomain {
    pub segments: Vec<Segment>,
    /// `+1` or `−1`.
    pub sign: i8,
    pub length: f64,
    /// Vertices with nonzero trace through which the domain is connected.
    pub vertices: Vec<usize>,
    /// Zero-trace vertices in the closure of the domain.
    pub boundary_vertices: Vec<usize>,
}

impl NodalDomain {
    pub fn contains_vertex(&self) -> bool {
        !self.vertices.is_empty()
    }

    /// Number of graph vertices in the closure of the domain.
    pub fn closure_vertex_count(&self) -> usize {
        self.vertices.len() + self.boundary_vertices.len()
    }

    /// A single edge piece.
    pub fn is_interval(&self) -> bool {
        self.segments.len() == 1
    }
}

/// Whether the trace at each vertex counts as zero, relative to the global sup-norm.
pub(crate) fn vertex_zero_flags(g: &MetricGraph, f: &EdgewiseSolution) -> Vec<bool> {
    let sup = f.sup();
    g.vertices()
        .iter()
        .map(|v| {
            v.is_dirichlet()
                || v.ends().iter().all(|x| {
                    let c = &f.edges[x.edge];
                    let at = if x.end == End::Tail { 0.0 } else { c.length };
                    c.value(at).abs() <= ZERO_TOL * sup
                })
        })
        .collect()
}

/// Signed connected components of `{f ≠ 0}`.
pub fn nodal_domains(g: &MetricGraph, f: &EdgewiseSolution) -> Result<Vec<NodalDomain>> {
    let supp = support(f)?;
    let zero_at = vertex_zero_flags(g, f);

    let mut segments: Vec<Segment> = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    // (first segment, last segment) per edge
    let mut span = vec![None; g.edge_count()];
    for &ei in &supp.edges {
        let e = &g.edges()[ei];
        let c = &f.edges[ei];
        let z = zeros_with_flags(c, zero_at[e.tail], zero_at[e.head]);
        let mut cuts = Vec::with_capacity(z.interior.len() + 2);
        cuts.push(0.0);
        cuts.extend_from_slice(&z.interior);
        cuts.push(e.length);
        let first = segments.len();
        for w in cuts.windows(2) {
            let mid = c.value(0.5 * (w[0] + w[1]));
            segments.push(Segment { edge: ei, start: w[0], end: w[1] });
            signs.push(if mid >= 0.0 { 1 } else { -1 });
        }
        span[ei] = Some((first, segments.len() - 1));
    }

    let mut uf = UnionFind::new(segments.len());
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for (vi, v) in g.vertices().iter().enumerate() {
        if zero_at[vi] {
            continue;
        }
        for x in v.ends() {
            if let Some((first, last)) = span[x.edge] {
                attached[vi].push(if x.end == End::Tail { first } else { last });
            }
        }
        for w in attached[vi].windows(2) {
            uf.union(w[0], w[1]);
        }
    }

    let (labels, count) = uf.labels();
    let mut domains: Vec<NodalDomain> = (0..count)
        .map(|_| NodalDomain {
            segments: Vec::new(),
            sign: 0,
            length: 0.0,
            vertices: Vec::new(),
            boundary_vertices: Vec::new(),
        })
        .collect();
    for (i, s) in segments.iter().enumerate() {
        let d = &mut domains[labels[i]];
        d.segments.push(*s);
        d.length += s.length();
        if d.sign == 0 {
            d.sign = signs[i];
        }
        let e = &g.edges()[s.edge];
        for (touches, v) in [(s.start == 0.0, e.tail), (s.end == e.length, e.head)] {
            if touches && zero_at[v] && !d.boundary_vertices.contains(&v) {
                d.boundary_vertices.push(v);
            }
        }
    }
    for (vi, segs) in attached.iter().enumerate() {
        if let Some(&s) = segs.first() {
            domains[labels[s]].vertices.push(vi);
        }
    }
    Ok(domains)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalReport {
    pub n: usize,
    pub lambda: f64,
    /// One-based index of the eigenvalue group the member belongs to.
    pub group: usize,
    pub multiplicity: usize,
    pub nu: usize,
    pub support: SupportSet,
    pub ratio: f64,
    pub domains: Vec<NodalDomain>,
    pub function: EdgewiseSolution,
}

impl NodalReport {
    pub fn domain_lengths(&self) -> Vec<f64> {
        self.domains.iter().map(|d| d.length).collect()
    }

    pub fn max_domain_length(&self) -> f64 {
        self.domains.iter().map(|d| d.length).fold(0.0, f64::max)
    }
}

/// Reports for indices `1..=n_max`, members of a degenerate eigenspace in
/// strategy order.
pub fn nodal_count_series(p: &SpectralProblem, n_max: usize, strategy: &BasisStrategy) -> Result<Vec<NodalReport>> {
    let eigs = p.find_eigenvalues(n_max)?;
    series_from_eigenvalues(p, &eigs, n_max, strategy)
}

pub fn series_from_eigenvalues(
    p: &SpectralProblem,
    eigs: &[Eigenvalue],
    n_max: usize,
    strategy: &BasisStrategy,
) -> Result<Vec<NodalReport>> {
    let mut firsts = Vec::with_capacity(eigs.len());
    let mut next = 1;
    for e in eigs {
        firsts.push(next);
        next += e.multiplicity;
    }
    let groups: Vec<Result<Vec<NodalReport>>> = eigs
        .par_iter()
        .enumerate()
        .filter(|(gi, _)| firsts[*gi] <= n_max)
        .map(|(gi, ev)| {
            let first = firsts[gi];
            let basis = p.eigenbasis(ev)?;
            let members = apply_strategy(&basis, strategy, first)?;
            members
                .into_iter()
                .enumerate()
                .take_while(|(i, _)| first + i <= n_max)
                .map(|(i, f)| {
                    let n = first + i;
                    let domains = nodal_domains(&p.graph, &f)?;
                    let supp = support(&f)?;
                    Ok(NodalReport {
                        n,
                        lambda: ev.value,
                        group: gi + 1,
                        multiplicity: ev.multiplicity,
                        nu: domains.len(),
                        support: supp,
                        ratio: domains.len() as f64 / n as f64,
                        domains,
                        function: f,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n_max);
    for g in groups {
        out.extend(g?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationPoint {
    pub value: f64,
    pub hits: usize,
    pub max_snap_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationEstimate {
    /// From the nodal ratios `ν_n / n`.
    pub points: Vec<AccumulationPoint>,
    /// From the supported-length ratios `|{ψ_n ≠ 0}| / |𝒢|`.
    pub support_points: Vec<AccumulationPoint>,
    pub agree: bool,
    /// Inclusive index range of the tail window.
    pub window: (usize, usize),
    /// Tail indices whose ratio is farther than the snap tolerance from every candidate.
    pub snap_failures: Vec<(usize, f64)>,
    pub candidates: Vec<f64>,
}

impl AccumulationEstimate {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub fn accumulation_estimate(
    series: &[NodalReport],
    g: &MetricGraph,
    tail_fraction: f64,
    snap_tol: f64,
) -> Result<AccumulationEstimate> {
    if series.len() < 100 {
        return Err(Error::TooFew {
            what: "nodal reports",
            needed: 100,
            got: series.len(),
        });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) || !(snap_tol > 0.0) {
        return Err(Error::InvalidParameter("tail fraction must lie in (0, 1] and snap tolerance be positive".into()));
    }
    let total = g.total_length();
    let len = series.len();
    let take = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    let tail = &series[len - take..];
    let candidates = match g.subset_length_ratios() {
        Ok(s) => s.ratios,
        Err(Error::SubsetCap { .. }) => {
            // observed supports are subset sums themselves
            let mut seen: Vec<f64> = tail.iter().map(|r| r.support.length / total).collect();
            seen.sort_by(f64::total_cmp);
            seen.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
            seen
        }
        Err(e) => return Err(e),
    };
    let threshold = (take as f64 * 0.01).ceil() as usize;

    let snap = |values: &mut dyn Iterator<Item = (usize, f64)>| {
        let mut hits = vec![0usize; candidates.len()];
        let mut dist = vec![0.0f64; candidates.len()];
        let mut failures = Vec::new();
        for (n, x) in values {
            let (_, d) = nearest_in(&candidates, x);
            if d > snap_tol {
                failures.push((n, x));
                continue;
            }
            let k = candidates.iter().position(|&c| (c - x).abs() == d).unwrap();
            hits[k] += 1;
            dist[k] = dist[k].max(d);
        }
        let points: Vec<AccumulationPoint> = candidates
            .iter()
            .enumerate()
            .filter(|(k, _)| hits[*k] >= threshold)
            .map(|(k, &value)| AccumulationPoint {
                value,
                hits: hits[k],
                max_snap_distance: dist[k],
            })
            .collect();
        (points, failures)
    };

    let (points, snap_failures) = snap(&mut tail.iter().map(|r| (r.n, r.ratio)));
    let (support_points, _) = snap(&mut tail.iter().map(|r| (r.n, r.support.length / total)));
    let agree = points.len() == support_points.len()
        && points.iter().zip(&support_points).all(|(a, b)| a.value == b.value);
    Ok(AccumulationEstimate {
        points,
        support_points,
        agree,
        window: (tail[0].n, tail[take - 1].n),
        snap_failures,
        candidates,
    })
}

/// `(π|E|/|𝒢| + ‖q‖₁)² − ‖q‖₁²`.
pub fn lambda1_upper_bound(g: &MetricGraph) -> f64 {
    let q = g.q_norm();
    (PI * g.edge_count() as f64 / g.total_length() + q).powi(2) - q * q
}

/// `λ_n` above which no nodal domain holds more than one vertex.
pub fn vertex_threshold(g: &MetricGraph, q_norm: f64) -> f64 {
    (2.0 * PI * g.edge_count() as f64 / g.min_length() + q_norm).powi(2) - q_norm * q_norm
}

/// `c / (√(λ + Q²) − Q)`, infinite when `λ ≤ 0`.
fn size_bound(c: f64, lambda: f64, q_norm: f64) -> f64 {
    if lambda <= 0.0 {
        return f64::INFINITY;
    }
    c / ((lambda + q_norm * q_norm).sqrt() - q_norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuLambdaCheck {
    pub n: usize,
    pub lambda: f64,
    pub nu: usize,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

/// `ν_n` bounds for every report with `λ_n` above the qualifying threshold.
pub fn check_nu_lambda(series: &[NodalReport], g: &MetricGraph, q_norm: f64) -> Vec<NuLambdaCheck> {
    let threshold = (q_norm * q_norm).max(vertex_threshold(g, q_norm));
    let ne = g.edge_count() as f64;
    let nv = g.vertex_count() as f64;
    series
        .iter()
        .filter(|r| r.lambda > threshold)
        .map(|r| {
            let root = r.lambda.sqrt();
            let lower = r.support.length * (root - q_norm) / PI - (2.0 * ne - 1.0) * nv;
            let upper = r.support.length * root / PI + nv;
            let nu = r.nu as f64;
            NuLambdaCheck {
                n: r.n,
                lambda: r.lambda,
                nu: r.nu,
                lower,
                upper,
                ok: lower <= nu && nu <= upper,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalSizeCheck {
    pub n: usize,
    /// `2π|E| / (√(λ+Q²) − Q)`.
    pub bound: f64,
    /// `π / (√(λ+Q²) − Q)`, for single-segment domains.
    pub interval_bound: f64,
    pub max_domain_length: f64,
    pub max_interval_length: f64,
    pub above_vertex_threshold: bool,
    pub max_closure_vertices: usize,
    pub size_ok: bool,
    pub interval_ok: bool,
    pub vertex_ok: bool,
}

impl NodalSizeCheck {
    pub fn ok(&self) -> bool {
        self.size_ok && self.interval_ok && self.vertex_ok
    }
}

pub fn check_nodal_size(report: &NodalReport, g: &MetricGraph, q_norm: f64) -> NodalSizeCheck {
    let ne = g.edge_count() as f64;
    let bound = size_bound(2.0 * PI * ne, report.lambda, q_norm);
    let interval_bound = size_bound(PI, report.lambda, q_norm);
    let slack = |b: f64| b * (1.0 + 1e-9);
    let max_domain_length = report.max_domain_length();
    let max_interval_length = report
        .domains
        .iter()
        .filter(|d| d.is_interval())
        .map(|d| d.length)
        .fold(0.0, f64::max);
    let above = report.lambda > vertex_threshold(g, q_norm);
    let max_closure_vertices = report
        .domains
        .iter()
        .map(NodalDomain::closure_vertex_count)
        .max()
        .unwrap_or(0);
    NodalSizeCheck {
        n: report.n,
        bound,
        interval_bound,
        max_domain_length,
        max_interval_length,
        above_vertex_threshold: above,
        max_closure_vertices,
        size_ok: max_domain_length <= slack(bound),
        interval_ok: max_interval_length <= slack(interval_bound),
        vertex_ok: !above || max_closure_vertices <= 1,
    }
}

/// The problem restricted to one nodal domain: Dirichlet at its zeros,
/// original conditions at its interior vertices.
pub fn domain_problem(p: &SpectralProblem, f: &EdgewiseSolution, domain: &NodalDomain) -> Result<SpectralProblem> {
    let g = &p.graph;
    let zero_at = vertex_zero_flags(g, f);
    let mut segments = domain.segments.clone();
    segments.sort_by(|a, b| (a.edge, a.start).partial_cmp(&(b.edge, b.start)).unwrap());

    let mut b = GraphBuilder::new();
    let mut leaves = 0;
    let mut names: Vec<(String, usize, usize)> = Vec::new(); // (new edge, original edge, piece)
    for (k, s) in segments.iter().enumerate() {
        let e = &g.edges()[s.edge];
        let mut end_name = |at_vertex: bool, v: usize| {
            if at_vertex && !zero_at[v] {
                g.vertices()[v].name.clone()
            } else {
                leaves += 1;
                let name = format!("~z{leaves}");
                b = std::mem::take(&mut b).vertex(&name, ConditionSpec::Dirichlet);
                name
            }
        };
        let tail = end_name(s.start == 0.0, e.tail);
        let head = end_name(s.end == e.length, e.head);
        let name = format!("{}~{k}", e.name);
        b.edge(&name, &tail, &head, s.length(), e.potential);
        names.push((name, s.edge, k));
    }
    for &vi in &domain.vertices {
        let v = &g.vertices()[vi];
        let spec = match &v.condition {
            VertexCondition::Dirichlet => ConditionSpec::Dirichlet,
            VertexCondition::Coupled { weights, robin } => {
                let mut named = Vec::new();
                for (slot, x) in v.ends().iter().enumerate() {
                    let piece = segments.iter().enumerate().find(|(_, s)| {
                        s.edge == x.edge && if x.end == End::Tail { s.start == 0.0 } else { s.end == g.edges()[x.edge].length }
                    });
                    if let Some((k, _)) = piece {
                        named.push((names[k].0.clone(), weights[slot]));
                    }
                }
                ConditionSpec::Robin {
                    block: Some(robin.clone()),
                    weights: named,
                }
            }
        };
        b = b.vertex(&v.name, spec);
    }
    let sub = b.build()?;
    let config = crate::secular::SolverConfig {
        scan_step: None,
        lambda_floor: None,
        ..p.config
    };
    Ok(SpectralProblem::with_config(sub, config))
}

/// `|λ₁(𝒢_j) − λ_n| / |λ_n|` for the sub-problem on `domain`.
pub fn check_domain_groundstate(p: &SpectralProblem, f: &EdgewiseSolution, domain: &NodalDomain) -> Result<f64> {
    let sub = domain_problem(p, f, domain)?;
    let first = sub.find_eigenvalues(1)?[0].value;
    let floor = 1e-9 * (PI / p.graph.total_length()).powi(2);
    Ok((first - f.lambda).abs() / f.lambda.abs().max(floor))
}
