//! Lumped P1 finite elements on every edge, eigenvalues by Sylvester inertia
//! counts and bisection, then Richardson extrapolation in the mesh width.

use nalgebra::{DMatrix, SymmetricEigen};
use nodalgraph::graph::End;
use nodalgraph::MetricGraph;

pub struct Discretization<'a> {
    graph: &'a MetricGraph,
    cells: Vec<usize>,
    /// Index into the vertex block for each vertex, `None` at Dirichlet vertices.
    slot: Vec<Option<usize>>,
    free: usize,
}

impl<'a> Discretization<'a> {
    pub fn new(graph: &'a MetricGraph, points_per_unit: usize) -> Self {
        let cells = graph
            .edges()
            .iter()
            .map(|e| ((e.length * points_per_unit as f64).round() as usize).max(2))
            .collect();
        let mut free = 0;
        let slot = graph
            .vertices()
            .iter()
            .map(|v| {
                if v.is_dirichlet() {
                    None
                } else {
                    free += 1;
                    Some(free - 1)
                }
            })
            .collect();
        Discretization { graph, cells, slot, free }
    }

    /// Number of eigenvalues strictly below `lambda`: negative inertia of `K − λM`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let g = self.graph;
        let mut negatives = 0;
        let mut schur = DMatrix::<f64>::zeros(self.free, self.free);
        for (vi, v) in g.vertices().iter().enumerate() {
            if let Some(s) = self.slot[vi] {
                schur[(s, s)] += v.rho();
            }
        }
        for (ei, e) in g.edges().iter().enumerate() {
            let n = self.cells[ei];
            let h = e.length / n as f64;
            let diag = 2.0 / h + (e.potential - lambda) * h;
            let off = -1.0 / h;
            let m = n - 1;
            // Forward elimination of the interior tridiagonal block, keeping the
            // pivots for the inertia and for the corner entries of its inverse.
            let mut pivots = Vec::with_capacity(m);
            for i in 0..m {
                let p = if i == 0 { diag } else { diag - off * off / pivots[i - 1] };
                let p = if p == 0.0 { f64::MIN_POSITIVE } else { p };
                if p < 0.0 {
                    negatives += 1;
                }
                pivots.push(p);
            }
            let (t11, t1m, tmm) = corners(&pivots, diag, off);

            let (vt, st) = g.end_slot(ei, End::Tail);
            let (vh, sh) = g.end_slot(ei, End::Head);
            let wt = 1.0 / g.vertices()[vt].weight(st);
            let wh = 1.0 / g.vertices()[vh].weight(sh);
            let end_diag = 1.0 / h + 0.5 * (e.potential - lambda) * h;
            let ct = off * wt;
            let ch = off * wh;
            if let Some(a) = self.slot[vt] {
                schur[(a, a)] += end_diag * wt * wt - ct * ct * t11;
            }
            if let Some(b) = self.slot[vh] {
                schur[(b, b)] += end_diag * wh * wh - ch * ch * tmm;
            }
            if let (Some(a), Some(b)) = (self.slot[vt], self.slot[vh]) {
                schur[(a, b)] -= ct * ch * t1m;
                schur[(b, a)] -= ct * ch * t1m;
            }
        }
        if self.free > 0 {
            negatives += SymmetricEigen::new(schur).eigenvalues.iter().filter(|&&x| x < 0.0).count();
        }
        negatives
    }

    /// The `n`-th eigenvalue (one-based) by bisection on the count.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let mut lo = -1.0;
        while self.count_below(lo) >= n {
            lo *= 2.0;
        }
        let mut hi = 1.0;
        while self.count_below(hi) < n {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi.abs().max(1.0) {
                break;
            }
            if self.count_below(mid) >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `(T⁻¹)₁₁, (T⁻¹)₁ₘ, (T⁻¹)ₘₘ` of a constant symmetric tridiagonal matrix,
/// from its forward pivots and a backward sweep.
fn corners(pivots: &[f64], diag: f64, off: f64) -> (f64, f64, f64) {
    let m = pivots.len();
    let tmm = 1.0 / pivots[m - 1];
    // backward pivots give (T⁻¹)₁₁
    let mut back = diag;
    for _ in 1..m {
        back = diag - off * off / back;
        if back == 0.0 {
            back = f64::MIN_POSITIVE;
        }
    }
    let t11 = 1.0 / back;
    // (T⁻¹)₁ₘ = (−off)^{m−1} / det T, with det T = Π pivots, accumulated as a ratio
    let mut t1m = 1.0 / pivots[m - 1];
    for p in pivots[..m - 1].iter().rev() {
        t1m *= -off / p;
    }
    (t11, t1m, tmm)
}

/// Richardson-extrapolated eigenvalues `1..=count` from meshes with
/// `points_per_unit` and half as many points.
pub fn extrapolated_eigenvalues(graph: &MetricGraph, points_per_unit: usize, count: usize) -> Vec<f64> {
    let fine = Discretization::new(graph, points_per_unit);
    let coarse = Discretization::new(graph, points_per_unit / 2);
    (1..=count)
        .map(|n| {
            let f = fine.eigenvalue(n);
            let c = coarse.eigenvalue(n);
            (4.0 * f - c) / 3.0
        })
        .collect()
}
