//! Nodal count by dense sampling of the edge functions and sign changes.

use nodalgraph::graph::End;
use nodalgraph::{EdgewiseSolution, MetricGraph};

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn join(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

/// Samples per half-wavelength.
const DENSITY: f64 = 256.0;

pub fn nodal_count(g: &MetricGraph, f: &EdgewiseSolution) -> usize {
    let mut sup: f64 = 0.0;
    let mut samples = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let c = &f.edges[ei];
        let k = c.mu.abs().sqrt();
        let m = ((e.length * k / std::f64::consts::PI * DENSITY).ceil() as usize).max(512);
        let vals: Vec<f64> = (0..=m).map(|i| c.value(e.length * i as f64 / m as f64)).collect();
        sup = vals.iter().fold(sup, |s, v| s.max(v.abs()));
        samples.push(vals);
    }
    let vertex_zero: Vec<bool> = g
        .vertices()
        .iter()
        .map(|v| {
            v.is_dirichlet()
                || v.ends().iter().all(|x| {
                    let s = &samples[x.edge];
                    let at = if x.end == End::Tail { s[0] } else { s[s.len() - 1] };
                    at.abs() <= 1e-9 * sup
                })
        })
        .collect();

    // segments: (edge, sign); attach[v] lists segments touching a nonzero vertex
    let mut count = 0;
    let mut attach: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for (ei, e) in g.edges().iter().enumerate() {
        let s = &samples[ei];
        if s.iter().all(|v| v.abs() <= 1e-8 * sup) {
            continue;
        }
        let first = count;
        let mut sign = 0i8;
        for v in &s[1..s.len() - 1] {
            if v.abs() <= 1e-12 * sup {
                continue;
            }
            let sv = if *v > 0.0 { 1 } else { -1 };
            if sign != sv {
                count += 1;
                sign = sv;
            }
        }
        let last = count - 1;
        if !vertex_zero[e.tail] {
            attach[e.tail].push(first);
        }
        if !vertex_zero[e.head] {
            attach[e.head].push(last);
        }
    }
    let mut dsu = Dsu((0..count).collect());
    for segs in &attach {
        for w in segs.windows(2) {
            dsu.join(w[0], w[1]);
        }
    }
    (0..count).filter(|&i| dsu.find(i) == i).count()
}
