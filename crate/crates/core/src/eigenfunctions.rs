//! Evaluation, zeros and supports of edgewise solutions, and basis choices
//! inside degenerate eigenspaces.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solution::{orthonormalize, EdgeCoefficients, EdgewiseSolution};

/// Endpoint zeros are values at most this fraction of the reference sup-norm.
pub const ZERO_TOL: f64 = 1e-9;
/// Edges with L² mass below this fraction of the global norm are not supported.
pub const SUPPORT_TOL: f64 = 1e-9;
const ENDPOINT_GUARD: f64 = 1e-6;
const SPARSE_EDGE_CAP: usize = 16;

pub fn evaluate(f: &EdgewiseSolution, edge: usize, x: f64) -> Result<f64> {
    f.value(edge, x)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeZeros {
    /// Strictly increasing zeros in `(0, ℓ)`.
    pub interior: Vec<f64>,
    pub at_start: bool,
    pub at_end: bool,
    pub identically_zero: bool,
}

/// Zeros of one edge; endpoint flags relative to the edge's own sup-norm.
pub fn edge_zeros(f: &EdgewiseSolution, edge: usize) -> EdgeZeros {
    let c = &f.edges[edge];
    if c.norm_sq().sqrt() <= SUPPORT_TOL * f.norm() {
        return EdgeZeros {
            identically_zero: true,
            ..EdgeZeros::default()
        };
    }
    let sup = c.sup();
    let at_start = c.value(0.0).abs() <= ZERO_TOL * sup;
    let at_end = c.value(c.length).abs() <= ZERO_TOL * sup;
    zeros_with_flags(c, at_start, at_end)
}

/// Interior zeros given externally decided endpoint flags.
pub(crate) fn zeros_with_flags(c: &EdgeCoefficients, at_start: bool, at_end: bool) -> EdgeZeros {
    let l = c.length;
    let guard = ENDPOINT_GUARD * l;
    let interior = candidate_zeros(c)
        .into_iter()
        .map(|x| polish(c, x))
        .filter(|&x| x > 0.0 && x < l)
        .filter(|&x| !(at_start && x < guard) && !(at_end && x > l - guard))
        .collect();
    EdgeZeros {
        interior: dedup_sorted(interior, 1e-12 * l),
        at_start,
        at_end,
        identically_zero: false,
    }
}

fn candidate_zeros(c: &EdgeCoefficients) -> Vec<f64> {
    let (a, b, mu, l) = (c.a, c.b, c.mu, c.length);
    let mut out = Vec::new();
    if mu > 0.0 {
        // f = R cos(kx − φ) vanishes at kx = φ + π/2 + mπ
        let k = mu.sqrt();
        let phi = (b / k).atan2(a);
        let base = phi + 0.5 * PI;
        let mut m = (-base / PI).floor() - 1.0;
        loop {
            let x = (base + m * PI) / k;
            if x > l * (1.0 + 1e-12) {
                break;
            }
            if x >= -l * 1e-12 {
                out.push(x);
            }
            m += 1.0;
        }
    } else if mu < 0.0 {
        // a cosh(κx) + (b/κ) sinh(κx) = 0 ⇔ tanh(κx) = −aκ/b
        let k = (-mu).sqrt();
        if b != 0.0 {
            let y = -a * k / b;
            if y.abs() < 1.0 {
                out.push(y.atanh() / k);
            }
        }
    } else if b != 0.0 {
        out.push(-a / b);
    }
    out
}

fn polish(c: &EdgeCoefficients, mut x: f64) -> f64 {
    for _ in 0..2 {
        let d = c.derivative(x);
        if d == 0.0 {
            break;
        }
        let step = c.value(x) / d;
        if !step.is_finite() || step.abs() > 1e-6 * c.length.max(1.0) {
            break;
        }
        x -= step;
    }
    x
}

fn dedup_sorted(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| (*b - *a).abs() <= tol);
    xs
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    pub edges: Vec<usize>,
    pub length: f64,
}

/// Edges carrying the function, relative to its global L² norm.
pub fn support(f: &EdgewiseSolution) -> Result<SupportSet> {
    let total = f.norm();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroFunction);
    }
    let edges: Vec<usize> = f
        .edges
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sq().sqrt() > SUPPORT_TOL * total)
        .map(|(i, _)| i)
        .collect();
    let length = edges.iter().map(|&i| f.edges[i].length).sum();
    Ok(SupportSet { edges, length })
}

/// Row selector in a basis table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSelector {
    /// One-based eigenvalue index.
    Index(usize),
    /// Every eigenspace whose multiplicity equals the number of `*` rows.
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub selector: TableSelector,
    pub coefficients: Vec<f64>,
}

/// Per-edge coefficient rows, one per requested eigenfunction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BasisTable {
    pub rows: Vec<TableRow>,
}

impl BasisTable {
    /// Parse lines `basis <index|*> row <c_1> ... <c_|E|>`.
    pub fn parse(text: &str) -> Result<BasisTable> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let syntax = |message: String| Error::Syntax { line, message };
            if tokens.len() < 4 || tokens[0] != "basis" || tokens[2] != "row" {
                return Err(syntax("expected: basis <index|*> row <c_1> ... <c_n>".into()));
            }
            let selector = if tokens[1] == "*" {
                TableSelector::Any
            } else {
                let i: usize = tokens[1]
                    .parse()
                    .map_err(|_| syntax(format!("invalid eigenvalue index '{}'", tokens[1])))?;
                if i == 0 {
                    return Err(syntax("eigenvalue indices start at 1".into()));
                }
                TableSelector::Index(i)
            };
            let coefficients = tokens[3..]
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| syntax(format!("invalid coefficient '{t}'"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(TableRow { selector, coefficients });
        }
        Ok(BasisTable { rows })
    }

    /// Rows that apply to the eigenspace occupying indices
    /// `first..first + multiplicity` (one-based).
    fn rows_for(&self, first: usize, multiplicity: usize) -> Vec<&[f64]> {
        let mut indexed: Vec<(usize, &[f64])> = self
            .rows
            .iter()
            .filter_map(|r| match r.selector {
                TableSelector::Index(i) if (first..first + multiplicity).contains(&i) => {
                    Some((i, r.coefficients.as_slice()))
                }
                _ => None,
            })
            .collect();
        if !indexed.is_empty() {
            indexed.sort_by_key(|(i, _)| *i);
            return indexed.into_iter().map(|(_, r)| r).collect();
        }
        let any: Vec<&[f64]> = self
            .rows
            .iter()
            .filter(|r| r.selector == TableSelector::Any)
            .map(|r| r.coefficients.as_slice())
            .collect();
        if any.len() == multiplicity {
            any
        } else {
            Vec::new()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum BasisStrategy {
    /// Numerical nullspace as returned by the solver.
    #[default]
    SolverDefault,
    /// Successive members maximize their supported length.
    SupportMax,
    /// Members with the smallest supports first, built from the
    /// subspaces vanishing outside growing edge subsets.
    SupportMin,
    UserTable(BasisTable),
}

/// Re-express an orthonormal eigenspace basis according to `strategy`.
/// `first_index` is the one-based index of the first member.
pub fn apply_strategy(
    basis: &[EdgewiseSolution],
    strategy: &BasisStrategy,
    first_index: usize,
) -> Result<Vec<EdgewiseSolution>> {
    if basis.len() <= 1 {
        return Ok(basis.to_vec());
    }
    match strategy {
        BasisStrategy::SolverDefault => Ok(basis.to_vec()),
        BasisStrategy::SupportMax => Ok(support_max(basis)),
        BasisStrategy::SupportMin => support_min(basis),
        BasisStrategy::UserTable(table) => {
            let rows = table.rows_for(first_index, basis.len());
            if rows.is_empty() {
                Ok(basis.to_vec())
            } else {
                from_table(basis, &rows)
            }
        }
    }
}

fn scale_of(c: &EdgeCoefficients) -> f64 {
    c.mu.abs().max(1.0 / (c.length * c.length)).sqrt()
}

fn support_score(f: &EdgewiseSolution, total_length: f64, min_length: f64) -> f64 {
    let norm = f.norm();
    let mut supp = 0.0;
    let mut min_mass = f64::INFINITY;
    for c in &f.edges {
        let m = c.norm_sq().sqrt();
        if m > SUPPORT_TOL * norm {
            supp += c.length;
            min_mass = min_mass.min(m * m / (norm * norm));
        }
    }
    if !min_mass.is_finite() {
        min_mass = 0.0;
    }
    // the mass term only breaks ties between equal supports
    supp / total_length + 1e-3 * min_length / total_length * min_mass
}

fn rotate(f: &EdgewiseSolution, g: &EdgewiseSolution, theta: f64) -> (EdgewiseSolution, EdgewiseSolution) {
    let (s, c) = theta.sin_cos();
    let mut x = f.clone();
    x.scale(c);
    x.axpy(s, g);
    let mut y = g.clone();
    y.scale(c);
    y.axpy(-s, f);
    (x, y)
}

fn support_max(basis: &[EdgewiseSolution]) -> Vec<EdgewiseSolution> {
    let total: f64 = basis[0].edges.iter().map(|c| c.length).sum();
    let lmin = basis[0].edges.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let score = |f: &EdgewiseSolution| support_score(f, total, lmin);
    let mut out = basis.to_vec();
    let m = out.len();
    for i in 0..m {
        for _sweep in 0..4 {
            let before = score(&out[i]);
            for j in i + 1..m {
                let samples = 64;
                let mut best = (0.0, score(&out[i]));
                for s in 1..samples {
                    let theta = PI * s as f64 / samples as f64;
                    let v = score(&rotate(&out[i], &out[j], theta).0);
                    if v > best.1 + 1e-12 {
                        best = (theta, v);
                    }
                }
                let h = PI / samples as f64;
                let (theta, v) = crate::secular::golden_min(
                    |t| -score(&rotate(&out[i], &out[j], t).0),
                    best.0 - h,
                    best.0 + h,
                    1e-10,
                );
                let theta = if -v > best.1 { theta } else { best.0 };
                if theta != 0.0 {
                    let (x, y) = rotate(&out[i], &out[j], theta);
                    out[i] = x;
                    out[j] = y;
                }
            }
            if score(&out[i]) <= before + 1e-12 {
                break;
            }
        }
    }
    orthonormalize(&mut out, 1e-6);
    out
}

/// Coefficient vectors `(a_e, b_e/σ_e)` of each member, as matrix columns.
fn coefficient_matrix(basis: &[EdgewiseSolution]) -> DMatrix<f64> {
    let ne = basis[0].edges.len();
    DMatrix::from_fn(2 * ne, basis.len(), |r, j| {
        let c = &basis[j].edges[r / 2];
        if r % 2 == 0 {
            c.a
        } else {
            c.b / scale_of(c)
        }
    })
}

/// Orthonormal basis of the nullspace of `rows`, as columns.
fn nullspace(rows: &DMatrix<f64>, dim: usize, tol: f64) -> Vec<DVector<f64>> {
    let padded = if rows.nrows() < dim {
        let mut p = DMatrix::zeros(dim, dim);
        p.rows_mut(0, rows.nrows()).copy_from(rows);
        p
    } else {
        rows.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(1.0);
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol * smax)
        .map(|i| v_t.row(i).transpose())
        .collect()
}

fn support_min(basis: &[EdgewiseSolution]) -> Result<Vec<EdgewiseSolution>> {
    let m = basis.len();
    let ne = basis[0].edges.len();
    let coeffs = coefficient_matrix(basis);
    let used: Vec<usize> = (0..ne)
        .filter(|&e| coeffs.rows(2 * e, 2).iter().any(|x| x.abs() > SUPPORT_TOL))
        .collect();
    if used.len() > SPARSE_EDGE_CAP {
        return Err(Error::InvalidParameter(format!(
            "support_min needs at most {SPARSE_EDGE_CAP} supported edges, found {}",
            used.len()
        )));
    }
    let mut masks: Vec<u32> = (1..1u32 << used.len()).collect();
    masks.sort_by_key(|&s| (s.count_ones(), s));

    let mut chosen: Vec<DVector<f64>> = Vec::new();
    for mask in masks {
        if chosen.len() == m {
            break;
        }
        let outside: Vec<usize> = used
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) == 0)
            .map(|(_, &e)| e)
            .collect();
        let nrows = 2 * outside.len() + chosen.len();
        let mut rows = DMatrix::zeros(nrows, m);
        for (r, &e) in outside.iter().enumerate() {
            rows.row_mut(2 * r).copy_from(&coeffs.row(2 * e));
            rows.row_mut(2 * r + 1).copy_from(&coeffs.row(2 * e + 1));
        }
        for (r, v) in chosen.iter().enumerate() {
            rows.row_mut(2 * outside.len() + r).copy_from(&v.transpose());
        }
        for v in nullspace(&rows, m, 1e-8) {
            chosen.push(v);
            if chosen.len() == m {
                break;
            }
        }
    }
    let mut out: Vec<EdgewiseSolution> = chosen
        .iter()
        .map(|v| EdgewiseSolution::combine(basis, v.as_slice()))
        .collect();
    orthonormalize(&mut out, 1e-6);
    if out.len() != m {
        return Err(Error::InconsistentNullspace {
            lambda: basis[0].lambda,
            nullity: out.len(),
            multiplicity: m,
        });
    }
    for f in &mut out {
        orient(f);
    }
    Ok(out)
}

/// Make the largest scaled coefficient positive.
fn orient(f: &mut EdgewiseSolution) {
    let mut best = 0.0f64;
    for c in &f.edges {
        for x in [c.a, c.b / scale_of(c)] {
            if x.abs() > best.abs() * (1.0 + 1e-9) {
                best = x;
            }
        }
    }
    if best < 0.0 {
        f.scale(-1.0);
    }
}

fn from_table(basis: &[EdgewiseSolution], rows: &[&[f64]]) -> Result<Vec<EdgewiseSolution>> {
    let m = basis.len();
    let ne = basis[0].edges.len();
    if rows.len() != m {
        return Err(Error::TableShape(format!(
            "eigenspace of dimension {m} needs {m} rows, table has {}",
            rows.len()
        )));
    }
    for r in rows {
        if r.len() != ne {
            return Err(Error::TableShape(format!(
                "row has {} coefficients, graph has {ne} edges",
                r.len()
            )));
        }
    }

    // Each member restricted to edge e is β_{e,i} times a shared unit profile.
    let coeffs = coefficient_matrix(basis);
    let mut profiles: Vec<Option<EdgeCoefficients>> = Vec::with_capacity(ne);
    let mut beta = DMatrix::zeros(ne, m);
    for e in 0..ne {
        let block = coeffs.rows(2 * e, 2).clone_owned();
        let svd = block.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order = [0usize, 1];
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let (s0, s1) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
        if s0 <= SUPPORT_TOL {
            profiles.push(None);
            continue;
        }
        if s1 > 1e-8 * s0 {
            return Err(Error::EdgeProfileAmbiguous { edge: e });
        }
        let mut dir = [u[(0, order[0])], u[(1, order[0])]];
        let lead = if dir[0].abs() >= dir[1].abs() { dir[0] } else { dir[1] };
        if lead < 0.0 {
            dir = [-dir[0], -dir[1]];
        }
        let template = {
            let c0 = basis[0].edges[e];
            let mut t = EdgeCoefficients {
                a: dir[0],
                b: dir[1] * scale_of(&c0),
                ..c0
            };
            let n = t.norm_sq().sqrt();
            t.a /= n;
            t.b /= n;
            t
        };
        for i in 0..m {
            beta[(e, i)] = basis[i].edges[e].inner(&template);
        }
        profiles.push(Some(template));
    }

    let svd = beta.clone().svd(true, true);
    let mut out = Vec::with_capacity(m);
    for (row_idx, row) in rows.iter().enumerate() {
        let target = DVector::from_column_slice(row);
        let alpha = svd
            .solve(&target, 1e-12)
            .map_err(|msg| Error::TableShape(msg.to_string()))?;
        let residual = (&beta * &alpha - &target).norm() / target.norm().max(f64::MIN_POSITIVE);
        if residual >= 1e-6 {
            return Err(Error::TableRowNotInEigenspace {
                row: row_idx + 1,
                residual,
            });
        }
        let mut f = EdgewiseSolution::combine(basis, alpha.as_slice());
        let n = f.norm();
        f.scale(1.0 / n);
        out.push(f);
    }
    for i in 0..m {
        for j in 0..i {
            let cosine = out[i].inner(&out[j]);
            if cosine.abs() > 1e-9 {
                return Err(Error::TableRowsNotOrthogonal {
                    first: j + 1,
                    second: i + 1,
                    cosine,
                });
            }
        }
    }
    Ok(out)
}
