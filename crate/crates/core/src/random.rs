//! Seeded random connected graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{ConditionSpec, GraphBuilder, MetricGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum LengthDistribution {
    /// Uniform on `[0.5, 2)`.
    Uniform,
    /// `base · m` with an integer multiplier `m ∈ 1..=max_multiplier`.
    Rational { base: f64, max_multiplier: u32 },
    /// `base · m_i` cycling through the given multipliers.
    Multipliers { base: f64, multipliers: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraphOptions {
    pub edge_count: usize,
    pub lengths: LengthDistribution,
    /// Constant potential on every edge.
    pub potential: f64,
    /// Delta strength at every non-leaf vertex.
    pub delta: f64,
    /// Make degree-one vertices Dirichlet.
    pub dirichlet_leaves: bool,
    /// Allow loops and parallel edges among the extra edges.
    pub allow_multi: bool,
    /// Fixed vertex count; `None` draws it. `Some(edge_count + 1)` gives a tree.
    pub vertices: Option<usize>,
}

impl RandomGraphOptions {
    pub fn new(edge_count: usize) -> Self {
        RandomGraphOptions {
            edge_count,
            lengths: LengthDistribution::Uniform,
            potential: 0.0,
            delta: 0.0,
            dirichlet_leaves: false,
            allow_multi: true,
            vertices: None,
        }
    }
}

/// A random spanning tree on `V ∈ [2, E+1]` vertices plus `E − V + 1` extra edges.
pub fn random_graph(seed: u64, opts: &RandomGraphOptions) -> Result<MetricGraph> {
    if opts.edge_count == 0 {
        return Err(Error::InvalidParameter("edge count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = opts.edge_count;
    let min_v = if opts.allow_multi { 2 } else { min_vertices_simple(e) };
    let nv = match opts.vertices {
        Some(v) if v < 2 || v > e + 1 || (!opts.allow_multi && v < min_v) => {
            return Err(Error::InvalidParameter(format!("{v} vertices cannot carry {e} edges")));
        }
        Some(v) => v,
        None => rng.random_range(min_v.min(e + 1)..=e + 1),
    };

    let mut pairs: Vec<(usize, usize)> = (1..nv).map(|v| (rng.random_range(0..v), v)).collect();
    while pairs.len() < e {
        let a = rng.random_range(0..nv);
        let b = rng.random_range(0..nv);
        let fresh = a != b && !pairs.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
        if opts.allow_multi || fresh {
            pairs.push((a, b));
        }
    }

    let mut degree = vec![0usize; nv];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut builder = GraphBuilder::new();
    for (v, &d) in degree.iter().enumerate() {
        let spec = if d == 1 && opts.dirichlet_leaves {
            ConditionSpec::Dirichlet
        } else if d > 1 && opts.delta != 0.0 {
            ConditionSpec::Delta(opts.delta)
        } else {
            ConditionSpec::Natural
        };
        builder = builder.vertex(&format!("v{}", v + 1), spec);
    }
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let length = match &opts.lengths {
            LengthDistribution::Uniform => rng.random_range(0.5..2.0),
            LengthDistribution::Rational { base, max_multiplier } => base * rng.random_range(1..=*max_multiplier) as f64,
            LengthDistribution::Multipliers { base, multipliers } => base * multipliers[i % multipliers.len()] as f64,
        };
        builder.edge(&format!("e{}", i + 1), &format!("v{}", a + 1), &format!("v{}", b + 1), length, opts.potential);
    }
    builder.build()
}

/// Smallest vertex count whose complete graph has at least `e` edges.
fn min_vertices_simple(e: usize) -> usize {
    (2..).find(|&v| v * (v - 1) / 2 >= e).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_connected() {
        for seed in 0..40 {
            let opts = RandomGraphOptions::new(1 + seed as usize % 6);
            let a = random_graph(seed, &opts).unwrap();
            let b = random_graph(seed, &opts).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            assert_eq!(a.edge_count(), opts.edge_count);
            assert!(a.edges().iter().all(|e| (0.5..2.0).contains(&e.length)));
        }
        let opts = RandomGraphOptions::new(5);
        assert_ne!(random_graph(1, &opts).unwrap().to_text(), random_graph(2, &opts).unwrap().to_text());
    }

    #[test]
    fn rational_and_listed_lengths() {
        let opts = RandomGraphOptions {
            lengths: LengthDistribution::Rational { base: 0.5, max_multiplier: 8 },
            ..RandomGraphOptions::new(6)
        };
        let g = random_graph(7, &opts).unwrap();
        for e in g.edges() {
            let m = e.length / 0.5;
            assert!((m - m.round()).abs() < 1e-12 && (1.0..=8.0).contains(&m));
        }
        let opts = RandomGraphOptions {
            lengths: LengthDistribution::Multipliers { base: 1.0, multipliers: vec![1, 2, 4] },
            ..RandomGraphOptions::new(3)
        };
        let lens: Vec<f64> = random_graph(3, &opts).unwrap().edges().iter().map(|e| e.length).collect();
        assert_eq!(lens, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn simple_mode_has_no_loops_or_parallels() {
        for seed in 0..30 {
            let opts = RandomGraphOptions {
                allow_multi: false,
                ..RandomGraphOptions::new(6)
            };
            let g = random_graph(seed, &opts).unwrap();
            let mut seen = std::collections::HashSet::new();
            for e in g.edges() {
                assert_ne!(e.tail, e.head);
                assert!(seen.insert((e.tail.min(e.head), e.tail.max(e.head))));
            }
        }
    }

    #[test]
    fn zero_edges_rejected() {
        assert!(random_graph(0, &RandomGraphOptions::new(0)).is_err());
    }

    #[test]
    fn fixed_vertex_count() {
        let tree = RandomGraphOptions {
            vertices: Some(6),
            ..RandomGraphOptions::new(5)
        };
        assert_eq!(random_graph(4, &tree).unwrap().vertex_count(), 6);
        let too_many = RandomGraphOptions {
            vertices: Some(7),
            ..RandomGraphOptions::new(5)
        };
        assert!(random_graph(4, &too_many).is_err());
    }
}
