//! Eigenvalues and eigenspaces from the vertex-condition matrix.
//!
//! On edge `e` the eigenfunction is `a_e c(x; λ−q_e) + b_e s(x; λ−q_e)`; the
//! `2|E|` unknowns `(a_0, b_0, a_1, b_1, ...)` must satisfy one row per edge
//! end. Roots are located by scanning the smallest singular value of the
//! row-normalized matrix in the signed parameter `t`, `λ = t|t|`, and every
//! scan window is cross-checked against an exact eigenvalue count obtained
//! from the Dirichlet-to-Neumann matrix:
//! `N(λ) = N_D(λ) + #{negative eigenvalues of Λ(λ)}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fundamental::cs;
use crate::graph::{End, MetricGraph, VertexCondition};
use crate::solution::{orthonormalize, EdgeCoefficients, EdgewiseSolution};

const WINDOW_STEPS: usize = 64;
const MAX_HALVINGS: usize = 6;
const NUDGES: [f64; 7] = [0.0, 0.13, -0.13, 0.29, -0.29, 0.41, -0.41];
/// Multiple of the entry error `ε / dist` the smallest DtN eigenvalue must exceed.
const SAFE_CONDITION: f64 = 64.0 * f64::EPSILON;
const SAFE_DIRICHLET: f64 = 1e-9;
const CLUSTER_WIDTH: f64 = 1e-8;
const NULLSPACE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Grid step in `t`; `None` means `π / (8 |𝒢|)`.
    pub scan_step: Option<f64>,
    pub rank_tol: f64,
    pub refine_tol: f64,
    /// Lower end of the search; `None` derives a form bound.
    pub lambda_floor: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scan_step: None,
            rank_tol: 1e-8,
            refine_tol: 1e-12,
            lambda_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProblem {
    pub graph: MetricGraph,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
    /// Smallest singular value of the normalized matrix at `value`.
    pub residual: f64,
}

/// Values repeated according to multiplicity.
pub fn expand(eigs: &[Eigenvalue]) -> Vec<f64> {
    eigs.iter()
        .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Root {
    t: f64,
    multiplicity: usize,
    residual: f64,
}

#[inline]
fn lambda_of(t: f64) -> f64 {
    t * t.abs()
}

#[inline]
fn t_of(lambda: f64) -> f64 {
    lambda.signum() * lambda.abs().sqrt()
}

impl SpectralProblem {
    pub fn new(graph: MetricGraph) -> Self {
        SpectralProblem {
            graph,
            config: SolverConfig::default(),
        }
    }

    pub fn with_config(graph: MetricGraph, config: SolverConfig) -> Self {
        SpectralProblem { graph, config }
    }

    pub fn scan_step(&self) -> f64 {
        self.config
            .scan_step
            .unwrap_or_else(|| PI / (8.0 * self.graph.total_length()))
    }

    fn end_rows(&self, edge: usize, end: End, lambda: f64) -> ([f64; 2], [f64; 2]) {
        let e = &self.graph.edges()[edge];
        match end {
            End::Tail => ([1.0, 0.0], [0.0, -1.0]),
            End::Head => {
                let mu = lambda - e.potential;
                let (c, s) = cs(e.length, mu);
                ([c, s], [-mu * s, c])
            }
        }
    }

    /// Raw `(2|E|)×(2|E|)` vertex-condition matrix; columns `(a_e, b_e)`.
    pub fn vertex_condition_matrix(&self, lambda: f64) -> DMatrix<f64> {
        let ones = vec![1.0; self.graph.edge_count()];
        self.assemble(lambda, &ones).0
    }

    /// Matrix with `b_e` columns multiplied by `scales[e]`, together with
    /// the norm each row would have if its per-end contributions did not
    /// cancel.
    fn assemble(&self, lambda: f64, scales: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
        let n = 2 * self.graph.edge_count();
        let mut m = DMatrix::zeros(n, n);
        let mut mag = vec![0.0; n];
        let mut row = 0;
        let put = |m: &mut DMatrix<f64>, mag: &mut [f64], row: usize, e: usize, coef: [f64; 2]| {
            let scaled = [coef[0], coef[1] * scales[e]];
            m[(row, 2 * e)] += scaled[0];
            m[(row, 2 * e + 1)] += scaled[1];
            mag[row] += scaled[0] * scaled[0] + scaled[1] * scaled[1];
        };
        for v in self.graph.vertices() {
            let rows: Vec<_> = v
                .ends()
                .iter()
                .map(|x| (x.edge, self.end_rows(x.edge, x.end, lambda)))
                .collect();
            match &v.condition {
                VertexCondition::Dirichlet => {
                    for &(e, (val, _)) in &rows {
                        put(&mut m, &mut mag, row, e, val);
                        row += 1;
                    }
                }
                VertexCondition::Coupled { weights, .. } => {
                    let d = rows.len();
                    let (e0, (val0, _)) = rows[0];
                    for i in 1..d {
                        let (ei, (vali, _)) = rows[i];
                        put(&mut m, &mut mag, row, e0, val0.map(|x| weights[0] * x));
                        put(&mut m, &mut mag, row, ei, vali.map(|x| -weights[i] * x));
                        row += 1;
                    }
                    // the vertex value enters as the mean of the weighted traces
                    let rho = v.rho();
                    for (i, &(e, (val, der))) in rows.iter().enumerate() {
                        let w = weights[i];
                        let coef = [0, 1].map(|k| der[k] / w + rho * w * val[k] / d as f64);
                        put(&mut m, &mut mag, row, e, coef);
                    }
                    row += 1;
                }
            }
        }
        debug_assert_eq!(row, n);
        (m, mag.into_iter().map(f64::sqrt).collect())
    }

    /// Per-edge scale `σ_e` applied to the `b_e` unknown.
    fn column_scales(&self, lambda: f64) -> Vec<f64> {
        self.graph
            .edges()
            .iter()
            .map(|e| (lambda - e.potential).abs().max(1.0 / (e.length * e.length)).sqrt())
            .collect()
    }

    /// Column-scaled, row-normalized matrix and the column scales used.
    /// Rows are divided by their uncancelled norm, so a row that vanishes
    /// through cancellation (two ends of a loop) stays small.
    pub(crate) fn normalized_matrix(&self, lambda: f64) -> (DMatrix<f64>, Vec<f64>) {
        let scales = self.column_scales(lambda);
        let (mut m, mag) = self.assemble(lambda, &scales);
        for (mut r, &norm) in m.row_iter_mut().zip(&mag) {
            if norm > 0.0 {
                r /= norm;
            }
        }
        (m, scales)
    }

    /// Singular values of the normalized matrix, ascending.
    pub fn singular_values(&self, lambda: f64) -> Vec<f64> {
        let (m, _) = self.normalized_matrix(lambda);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        sv
    }

    pub fn secular_min_sv(&self, lambda: f64) -> f64 {
        self.singular_values(lambda)[0]
    }

    /// Number of singular values below `rank_tol` times the largest.
    pub fn nullity(&self, lambda: f64) -> usize {
        let sv = self.singular_values(lambda);
        let cut = self.config.rank_tol * sv.last().copied().unwrap_or(0.0).max(1.0);
        sv.iter().filter(|&&s| s <= cut).count()
    }

    fn min_sv_t(&self, t: f64) -> f64 {
        self.secular_min_sv(lambda_of(t))
    }

    /// Dirichlet-to-Neumann matrix on the non-Dirichlet vertex values.
    fn dtn_matrix(&self, lambda: f64) -> DMatrix<f64> {
        let g = &self.graph;
        let mut slot = vec![usize::MAX; g.vertex_count()];
        let mut k = 0;
        for (i, v) in g.vertices().iter().enumerate() {
            if !v.is_dirichlet() {
                slot[i] = k;
                k += 1;
            }
        }
        let mut a = DMatrix::zeros(k, k);
        for (i, v) in g.vertices().iter().enumerate() {
            if slot[i] != usize::MAX {
                a[(slot[i], slot[i])] += v.rho();
            }
        }
        for (ei, e) in g.edges().iter().enumerate() {
            let (diag, off) = dtn_entries(e.length, lambda - e.potential);
            let (u, su) = g.end_slot(ei, End::Tail);
            let (v, sv) = g.end_slot(ei, End::Head);
            let wu = g.vertices()[u].weight(su);
            let wv = g.vertices()[v].weight(sv);
            let (pu, pv) = (slot[u], slot[v]);
            if pu != usize::MAX {
                a[(pu, pu)] += diag / (wu * wu);
            }
            if pv != usize::MAX {
                a[(pv, pv)] += diag / (wv * wv);
            }
            if pu != usize::MAX && pv != usize::MAX {
                a[(pu, pv)] -= off / (wu * wv);
                a[(pv, pu)] -= off / (wu * wv);
            }
        }
        a
    }

    /// Exact count of eigenvalues below `lambda`, or `None` when `lambda`
    /// is too close to a coupled or decoupled Dirichlet eigenvalue.
    fn count_if_safe(&self, lambda: f64) -> Option<usize> {
        let dist = self.graph.dirichlet_distance(lambda);
        if dist <= SAFE_DIRICHLET {
            return None;
        }
        let nd = self.graph.dirichlet_count_below(lambda);
        let a = self.dtn_matrix(lambda);
        if a.nrows() == 0 {
            return Some(nd);
        }
        if !a.iter().all(|x| x.is_finite()) {
            return None;
        }
        let eig = SymmetricEigen::new(a).eigenvalues;
        let max = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let min = eig.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        if max == 0.0 || min <= SAFE_CONDITION / dist.min(1.0) * max {
            return None;
        }
        Some(nd + eig.iter().filter(|&&x| x < 0.0).count())
    }

    /// Number of eigenvalues (with multiplicity) strictly below `lambda`.
    pub fn eigenvalue_count_below(&self, lambda: f64) -> Result<usize> {
        let scale = lambda.abs().max(1.0);
        for k in 0..40 {
            let probe = lambda - scale * 1e-12 * 1.7f64.powi(k);
            if let Some(n) = self.count_if_safe(probe) {
                return Ok(n);
            }
        }
        Err(Error::InvalidParameter(format!(
            "no regular point for eigenvalue counting found below {lambda}"
        )))
    }

    /// A nearby `t` at which the exact count is available.
    fn safe_point(&self, t: f64, spread: f64) -> Option<(f64, usize)> {
        for off in NUDGES {
            let s = t + off * spread;
            if let Some(n) = self.count_if_safe(lambda_of(s)) {
                return Some((s, n));
            }
        }
        for i in 1..32 {
            let off = 0.45 * (i as f64 * 0.618_033_988_75).fract();
            for sign in [1.0, -1.0] {
                let s = t + sign * off * spread;
                if let Some(n) = self.count_if_safe(lambda_of(s)) {
                    return Some((s, n));
                }
            }
        }
        None
    }

    /// `R = Σ_v max(0, −ρ_v) · max_e w_{e,v}²`, the negative vertex mass.
    fn negative_vertex_mass(&self) -> f64 {
        self.graph
            .vertices()
            .iter()
            .map(|v| {
                let wmax = (0..v.degree()).map(|i| v.weight(i)).fold(0.0, f64::max);
                (-v.rho()).max(0.0) * wmax * wmax
            })
            .sum()
    }

    /// Safe starting point with zero eigenvalues below it.
    fn scan_start(&self) -> Result<(f64, usize)> {
        let h = self.scan_step();
        let no_start = || Error::InvalidParameter("no regular starting point for the scan".into());
        if let Some(floor) = self.config.lambda_floor {
            let (t, n) = self.safe_point(t_of(floor), h).ok_or_else(no_start)?;
            if n != 0 {
                return Err(Error::InvalidParameter(format!(
                    "lambda_floor {floor} lies above {n} eigenvalues"
                )));
            }
            return Ok((t, 0));
        }
        let r = self.negative_vertex_mass();
        if r == 0.0 {
            let (t, n) = self.safe_point(-0.5 * h, 0.5 * h).ok_or_else(no_start)?;
            debug_assert_eq!(n, 0);
            return Ok((t, n));
        }
        let mut floor = -(r * r + r / self.graph.min_length()) - 1.0;
        for _ in 0..64 {
            let (t, n) = self.safe_point(t_of(floor), h).ok_or_else(no_start)?;
            if n == 0 {
                return Ok((t, 0));
            }
            floor *= 2.0;
        }
        Err(no_start())
    }

    /// First `count` eigenvalues with multiplicity; the last group is kept
    /// whole, so the multiplicities may sum to more than `count`.
    pub fn find_eigenvalues(&self, count: usize) -> Result<Vec<Eigenvalue>> {
        if count == 0 {
            return Err(Error::InvalidParameter("eigenvalue count must be positive".into()));
        }
        let h = self.scan_step();
        if !(h > 0.0) || !(self.config.rank_tol > 0.0) || !(self.config.refine_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        let (t_lo, _) = self.scan_start()?;
        let lam_top = *self.graph.decoupled_dirichlet_spectrum(count).last().unwrap();
        let t_top = t_of(lam_top) + h;
        let span = WINDOW_STEPS as f64 * h;
        let windows = (((t_top - t_lo) / span).ceil() as usize).max(1);

        let mut bounds: Vec<(f64, usize)> = vec![(t_lo, 0)];
        let mut extra = 0;
        loop {
            let from = bounds.len();
            let to = windows + extra + 1;
            let fresh: Vec<Result<(f64, usize)>> = (from..to)
                .into_par_iter()
                .map(|j| {
                    let t = t_lo + j as f64 * span;
                    self.safe_point(t, h)
                        .ok_or_else(|| Error::InvalidParameter(format!("no regular scan point near t = {t}")))
                })
                .collect();
            for b in fresh {
                bounds.push(b?);
            }
            if bounds.last().unwrap().1 >= count {
                break;
            }
            extra += windows.max(1);
        }

        let found: Vec<Result<Vec<Root>>> = bounds
            .par_windows(2)
            .map(|w| {
                let ((ta, na), (tb, nb)) = (w[0], w[1]);
                if nb < na {
                    return Err(Error::ScanBudget {
                        lo: lambda_of(ta),
                        hi: lambda_of(tb),
                        expected: 0,
                        found: na - nb,
                    });
                }
                self.scan_window(ta, tb, nb - na, h)
            })
            .collect();

        let mut out = Vec::new();
        let mut total = 0;
        for roots in found {
            for r in roots? {
                if total >= count {
                    break;
                }
                total += r.multiplicity;
                out.push(Eigenvalue {
                    value: lambda_of(r.t),
                    multiplicity: r.multiplicity,
                    residual: r.residual,
                });
            }
        }
        Ok(out)
    }

    fn scan_window(&self, ta: f64, tb: f64, expected: usize, h: f64) -> Result<Vec<Root>> {
        if expected == 0 {
            return Ok(Vec::new());
        }
        let mut steps = (((tb - ta) / h).round() as usize).max(WINDOW_STEPS);
        for _ in 0..=MAX_HALVINGS {
            let roots = self.sample_window(ta, tb, steps);
            let got: usize = roots.iter().map(|r| r.multiplicity).sum();
            if got == expected {
                return Ok(roots);
            }
            steps *= 2;
        }
        self.bisect_window(ta, tb, expected)
    }

    fn refine_tol(&self, t: f64) -> f64 {
        self.config.refine_tol.max(4.0 * f64::EPSILON * t.abs())
    }

    fn root_at(&self, t: f64) -> (usize, f64) {
        let sv = self.singular_values(lambda_of(t));
        let cut = self.config.rank_tol * sv.last().copied().unwrap_or(0.0).max(1.0);
        (sv.iter().filter(|&&s| s <= cut).count(), sv[0])
    }

    fn sample_window(&self, ta: f64, tb: f64, steps: usize) -> Vec<Root> {
        let h = (tb - ta) / steps as f64;
        let ts: Vec<f64> = (0..steps + 3).map(|i| ta + (i as f64 - 1.0) * h).collect();
        let sig: Vec<f64> = ts.iter().map(|&t| self.min_sv_t(t)).collect();
        let mut roots: Vec<Root> = Vec::new();
        for j in 1..ts.len() - 1 {
            if !(sig[j] < sig[j - 1] && sig[j] <= sig[j + 1]) {
                continue;
            }
            let (t, _) = golden_min(|t| self.min_sv_t(t), ts[j - 1], ts[j + 1], self.refine_tol(ts[j]));
            if t < ta || t >= tb {
                continue;
            }
            let (mult, residual) = self.root_at(t);
            if mult == 0 {
                continue;
            }
            if roots
                .last()
                .is_some_and(|r| (r.t - t).abs() <= 1e-9 * t.abs().max(1.0))
            {
                continue;
            }
            roots.push(Root {
                t,
                multiplicity: mult,
                residual,
            });
        }
        roots
    }

    /// Count-driven isolation: bisect until each sub-interval holds one
    /// cluster narrower than `CLUSTER_WIDTH` (relative), then refine it.
    fn bisect_window(&self, ta: f64, tb: f64, expected: usize) -> Result<Vec<Root>> {
        let na = self.count_if_safe(lambda_of(ta)).unwrap_or(0);
        let mut stack = vec![(ta, na, tb, na + expected)];
        let mut roots = Vec::new();
        while let Some((a, ca, b, cb)) = stack.pop() {
            if cb == ca {
                continue;
            }
            if cb < ca {
                return Err(Error::ScanBudget {
                    lo: lambda_of(ta),
                    hi: lambda_of(tb),
                    expected,
                    found: 0,
                });
            }
            let width = b - a;
            let narrow = width <= CLUSTER_WIDTH * a.abs().max(b.abs()).max(1.0);
            let mid = if narrow {
                None
            } else {
                self.safe_point(0.5 * (a + b), 0.2 * width)
            };
            match mid {
                Some((m, cm)) => {
                    stack.push((m, cm, b, cb));
                    stack.push((a, ca, m, cm));
                }
                None => {
                    let (t, residual) = golden_min(|t| self.min_sv_t(t), a, b, self.refine_tol(a));
                    roots.push(Root {
                        t,
                        multiplicity: cb - ca,
                        residual,
                    });
                }
            }
        }
        roots.sort_by(|x, y| x.t.total_cmp(&y.t));
        let got: usize = roots.iter().map(|r| r.multiplicity).sum();
        if got != expected {
            return Err(Error::ScanBudget {
                lo: lambda_of(ta),
                hi: lambda_of(tb),
                expected,
                found: got,
            });
        }
        Ok(roots)
    }

    /// L²-orthonormal basis of the eigenspace of `ev`.
    pub fn eigenbasis(&self, ev: &Eigenvalue) -> Result<Vec<EdgewiseSolution>> {
        let lambda = ev.value;
        let (m, scales) = self.normalized_matrix(lambda);
        let n = m.ncols();
        if ev.multiplicity > n {
            return Err(Error::MultiplicityCap {
                lambda,
                nullity: ev.multiplicity,
                cap: n,
            });
        }
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let sv_max = svd.singular_values[*order.last().unwrap()].max(1.0);
        let nullity = order
            .iter()
            .filter(|&&i| svd.singular_values[i] <= self.config.rank_tol * sv_max)
            .count();
        let mult = ev.multiplicity;
        if nullity != mult && svd.singular_values[order[mult - 1]] > NULLSPACE_SLACK * sv_max {
            return Err(Error::InconsistentNullspace {
                lambda,
                nullity,
                multiplicity: mult,
            });
        }

        let edges = self.graph.edges();
        let mut family: Vec<EdgewiseSolution> = order[..mult]
            .iter()
            .map(|&i| {
                let row = v_t.row(i);
                EdgewiseSolution {
                    lambda,
                    edges: edges
                        .iter()
                        .enumerate()
                        .map(|(e, edge)| EdgeCoefficients {
                            a: row[2 * e],
                            b: row[2 * e + 1] * scales[e],
                            mu: lambda - edge.potential,
                            length: edge.length,
                        })
                        .collect(),
                }
            })
            .collect();
        orthonormalize(&mut family, 1e-6);
        if family.len() != mult {
            return Err(Error::InconsistentNullspace {
                lambda,
                nullity: family.len(),
                multiplicity: mult,
            });
        }
        for f in &mut family {
            fix_sign(f, &scales);
        }
        Ok(family)
    }

    /// Largest residual of `f` against the normalized condition rows.
    pub fn condition_residual(&self, f: &EdgewiseSolution) -> f64 {
        let (m, scales) = self.normalized_matrix(f.lambda);
        let mut x = nalgebra::DVector::zeros(m.ncols());
        for (e, c) in f.edges.iter().enumerate() {
            x[2 * e] = c.a;
            x[2 * e + 1] = c.b / scales[e];
        }
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (m * x).amax() / norm
    }
}

/// `(c/s, 1/s)` at `x = ℓ`, stable for large hyperbolic arguments.
fn dtn_entries(length: f64, mu: f64) -> (f64, f64) {
    if mu < 0.0 && -mu * length * length >= 1e-4 {
        let k = (-mu).sqrt();
        let z = k * length;
        if z > 40.0 {
            return (k, 2.0 * k * (-z).exp());
        }
        return (k / z.tanh(), k / z.sinh());
    }
    let (c, s) = cs(length, mu);
    (c / s, 1.0 / s)
}

/// Make the largest scaled coefficient positive, for reproducible output.
fn fix_sign(f: &mut EdgewiseSolution, scales: &[f64]) {
    let mut best = 0.0f64;
    for (c, s) in f.edges.iter().zip(scales) {
        for x in [c.a, c.b / s] {
            if x.abs() > best.abs() * (1.0 + 1e-9) {
                best = x;
            }
        }
    }
    if best < 0.0 {
        f.scale(-1.0);
    }
}

/// Golden-section minimization on `[a, b]`; returns the best point seen.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterlacingEntry {
    pub n: usize,
    /// `λ^D_{n−|V|}` when `n > |V|`.
    pub lower: Option<f64>,
    pub lambda: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Check `λ^D_{n−|V|} ≤ λ_n ≤ λ^D_n` for `n = 1..=N`.
pub fn verify_interlacing(p: &SpectralProblem, eigs: &[Eigenvalue], n_max: usize) -> Result<Vec<InterlacingEntry>> {
    let values = expand(eigs);
    if values.len() < n_max {
        return Err(Error::TooFew {
            what: "eigenvalues",
            needed: n_max,
            got: values.len(),
        });
    }
    let dirichlet = p.graph.decoupled_dirichlet_spectrum(n_max);
    let nv = p.graph.vertex_count();
    let slack = |x: f64| 1e-8 * x.abs().max(1.0);
    Ok((1..=n_max)
        .map(|n| {
            let lambda = values[n - 1];
            let upper = dirichlet[n - 1];
            let lower = (n > nv).then(|| dirichlet[n - nv - 1]);
            InterlacingEntry {
                n,
                lower,
                lambda,
                upper,
                lower_ok: lower.is_none_or(|l| l <= lambda + slack(l)),
                upper_ok: lambda <= upper + slack(upper),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    pub slope: f64,
    pub expected: f64,
    pub deviation: f64,
}

/// Least-squares slope of `λ_n` against `n²` over the top half of the list.
pub fn weyl_fit(eigs: &[Eigenvalue], total_length: f64) -> Result<WeylFit> {
    let values = expand(eigs);
    if values.len() < 100 {
        return Err(Error::TooFew {
            what: "eigenvalues",
            needed: 100,
            got: values.len(),
        });
    }
    let start = values.len() / 2;
    let xs: Vec<f64> = (start + 1..=values.len()).map(|n| (n * n) as f64).collect();
    let slope = ls_slope(&xs, &values[start..]);
    let expected = (PI / total_length).powi(2);
    Ok(WeylFit {
        slope,
        expected,
        deviation: (slope - expected).abs() / expected,
    })
}

/// Slope of the least-squares line through `(x_i, y_i)`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::library::*;
    use crate::graph::ConditionSpec;
    use approx::assert_relative_eq;

    fn dirichlet_interval() -> SpectralProblem {
        SpectralProblem::new(interval(1.0, ConditionSpec::Dirichlet, ConditionSpec::Dirichlet))
    }

    fn star4() -> SpectralProblem {
        SpectralProblem::new(star(&[1.0; 4], ConditionSpec::Natural))
    }

    #[test]
    fn dirichlet_interval_matrix_has_sine_kernel() {
        let p = dirichlet_interval();
        assert_eq!(p.nullity(PI * PI), 1);
        let basis = p.eigenbasis(&Eigenvalue { value: PI * PI, multiplicity: 1, residual: 0.0 }).unwrap();
        let f = &basis[0].edges[0];
        assert!(f.a.abs() < 1e-12);
        assert_relative_eq!(f.value(0.5), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn secular_min_sv_examples() {
        let p = dirichlet_interval();
        assert!(p.secular_min_sv(PI * PI) < 1e-12);
        assert!(p.secular_min_sv(2.0) > 1e-3);
        let s = star4();
        assert!(s.secular_min_sv(PI * PI / 4.0) < 1e-12);
        assert_eq!(s.nullity(PI * PI / 4.0), 3);
    }

    #[test]
    fn constants_solve_natural_graphs() {
        let p = SpectralProblem::new(lasso(1.0, 3.0));
        assert_eq!(p.nullity(0.0), 1);
        let leaf = SpectralProblem::new(interval(2.0, ConditionSpec::Natural, ConditionSpec::Natural));
        let m = leaf.vertex_condition_matrix(0.0);
        // degree-one natural vertex: a single derivative row
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, -1.0]);
    }

    #[test]
    fn counts_match_closed_forms() {
        let p = SpectralProblem::new(interval(1.0, ConditionSpec::Natural, ConditionSpec::Natural));
        for (lam, n) in [(-1.0, 0), (0.5 * PI * PI, 1), (2.0 * PI * PI, 2), (10.0 * PI * PI, 4)] {
            assert_eq!(p.eigenvalue_count_below(lam).unwrap(), n, "lambda {lam}");
        }
        let s = star4();
        for (lam, n) in [(0.1, 1), (3.0, 4), (PI * PI * 1.01, 5), (5.0 * PI * PI / 2.0, 8)] {
            assert_eq!(s.eigenvalue_count_below(lam).unwrap(), n, "lambda {lam}");
        }
    }

    #[test]
    fn dirichlet_interval_eigenvalues() {
        let eigs = dirichlet_interval().find_eigenvalues(3).unwrap();
        assert_eq!(eigs.len(), 3);
        for (k, e) in eigs.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert_relative_eq!(e.value, exact, max_relative = 1e-12);
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn star4_first_eight() {
        let eigs = star4().find_eigenvalues(8).unwrap();
        let got: Vec<(f64, usize)> = eigs.iter().map(|e| (e.value, e.multiplicity)).collect();
        let expected = [(0.0, 1), (PI * PI / 4.0, 3), (PI * PI, 1), (9.0 * PI * PI / 4.0, 3)];
        assert_eq!(got.len(), expected.len());
        for ((v, m), (ev, em)) in got.iter().zip(expected) {
            assert!((v - ev).abs() <= 1e-8 * ev.max(1.0), "{v} vs {ev}");
            assert_eq!(*m, em);
        }
    }

    #[test]
    fn star4_half_integer_space_is_edgewise_sine() {
        let p = star4();
        let lam = 9.0 * PI * PI / 4.0;
        let basis = p.eigenbasis(&Eigenvalue { value: lam, multiplicity: 3, residual: 0.0 }).unwrap();
        assert_eq!(basis.len(), 3);
        for f in &basis {
            // a_e = 0 at the centre, and Σ b_e = 0 from the Kirchhoff row
            assert!(f.edges.iter().all(|c| c.a.abs() < 1e-9));
            assert!(f.edges.iter().map(|c| c.b).sum::<f64>().abs() < 1e-9);
        }
        for i in 0..3 {
            for j in 0..3 {
                let g = basis[i].inner(&basis[j]);
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loop_has_two_dimensional_space() {
        let g = MetricGraph::parse("edge o v v length 1\n").unwrap();
        let p = SpectralProblem::new(g);
        let lam = 4.0 * PI * PI;
        assert_eq!(p.nullity(lam), 2);
        let basis = p.eigenbasis(&Eigenvalue { value: lam, multiplicity: 2, residual: 0.0 }).unwrap();
        for f in &basis {
            let x = 0.3;
            // every member is a combination of cos(2πx) and sin(2πx)
            let c = f.edges[0];
            let expected = c.a * (2.0 * PI * x).cos() + c.b / (2.0 * PI) * (2.0 * PI * x).sin();
            assert_relative_eq!(c.value(x), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_delta_produces_bound_state() {
        // attractive delta of strength −4 at the midpoint of [0, 2] with
        // Dirichlet ends: the even bound state sinh(κ·dist) needs κ coth κ = 2
        let g = interval_with_delta(1.0, 1.0, -4.0);
        let eigs = SpectralProblem::new(g).find_eigenvalues(1).unwrap();
        let lam = eigs[0].value;
        assert!(lam < 0.0);
        let k = (-lam).sqrt();
        assert_relative_eq!(k / k.tanh(), 2.0, max_relative = 1e-10);
    }

    #[test]
    fn interlacing_on_neumann_interval() {
        let p = SpectralProblem::new(interval(1.0, ConditionSpec::Natural, ConditionSpec::Natural));
        let eigs = p.find_eigenvalues(20).unwrap();
        let report = verify_interlacing(&p, &eigs, 20).unwrap();
        assert!(report.iter().all(|r| r.lower_ok && r.upper_ok));
        assert_relative_eq!(report[4].lambda, 16.0 * PI * PI, max_relative = 1e-10);
        assert_relative_eq!(report[4].lower.unwrap(), 9.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn weyl_needs_enough_values() {
        let eigs = dirichlet_interval().find_eigenvalues(10).unwrap();
        assert!(matches!(weyl_fit(&eigs, 1.0), Err(Error::TooFew { .. })));
    }

    #[test]
    fn golden_finds_kink() {
        let (x, fx) = golden_min(|t| (t - 0.3).abs(), 0.0, 1.0, 1e-14);
        assert!((x - 0.3).abs() < 1e-13 && fx < 1e-13);
    }
}
