//! Compact metric graphs with edgewise-constant potentials and per-vertex
//! positivity-preserving conditions.
//!
//! Every edge `e` is identified with `[0, ℓ_e]`; `x = 0` is the tail end and
//! `x = ℓ_e` the head end. A loop is a single edge whose tail and head are
//! the same vertex, so that vertex sees two independent edge ends.
//!
//! At a non-Dirichlet vertex `v` the traces obey the weighted continuity
//! `w_{e,v} f_e(v) = w_{f,v} f_f(v)`, so all traces are pinned to a common
//! scalar `c_v` via `f_e(v) = c_v / w_{e,v}`. The per-vertex robin block
//! `A_vv` then contributes `ρ_v c_v²` to the form, where
//! `ρ_v = ⟨A_vv u_v, u_v⟩` and `u_v = (1 / w_{e,v})_e`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Exhaustive subset enumeration is refused above this many edges.
pub const SUBSET_CAP: usize = 24;

const RATIO_DEDUP_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Tail,
    Head,
}

/// One end of an edge as seen from its vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexCondition {
    Dirichlet,
    /// Weighted continuity plus a Kirchhoff–Robin derivative condition.
    /// `weights` and the row-major `robin` block are indexed by the vertex's
    /// edge ends in [`MetricGraph::ends`] order.
    Coupled { weights: Vec<f64>, robin: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub condition: VertexCondition,
    ends: Vec<EdgeEnd>,
}

impl Vertex {
    pub fn ends(&self) -> &[EdgeEnd] {
        &self.ends
    }

    pub fn degree(&self) -> usize {
        self.ends.len()
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.condition, VertexCondition::Dirichlet)
    }

    /// Weight of the `i`-th edge end (1 for Dirichlet vertices).
    pub fn weight(&self, i: usize) -> f64 {
        match &self.condition {
            VertexCondition::Dirichlet => 1.0,
            VertexCondition::Coupled { weights, .. } => weights[i],
        }
    }

    /// `ρ_v = ⟨A_vv u, u⟩` with `u_i = 1 / w_i`; zero at Dirichlet vertices.
    pub fn rho(&self) -> f64 {
        match &self.condition {
            VertexCondition::Dirichlet => 0.0,
            VertexCondition::Coupled { weights, robin } => {
                let d = weights.len();
                let mut acc = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        acc += robin[i * d + j] / (weights[i] * weights[j]);
                    }
                }
                acc
            }
        }
    }

    fn is_natural(&self) -> bool {
        match &self.condition {
            VertexCondition::Dirichlet => false,
            VertexCondition::Coupled { weights, robin } => {
                weights.iter().all(|&w| w == 1.0) && robin.iter().all(|&a| a == 0.0)
            }
        }
    }
}

/// Condition requested for a vertex before its degree is known.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ConditionSpec {
    #[default]
    Natural,
    Dirichlet,
    /// Delta coupling: the derivative sum equals `strength` times the vertex value.
    Delta(f64),
    /// Explicit robin block (row-major, degree²) and optional per-edge weights.
    Robin {
        block: Option<Vec<f64>>,
        weights: Vec<(String, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Sorted, deduplicated ratios `Σ_{e∈E₀} ℓ_e / |𝒢|` over nonempty `E₀ ⊂ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetLengthSet {
    pub ratios: Vec<f64>,
}

impl SubsetLengthSet {
    /// Nearest candidate to `x` and its distance.
    pub fn nearest(&self, x: f64) -> (f64, f64) {
        nearest_in(&self.ratios, x)
    }
}

pub(crate) fn nearest_in(sorted: &[f64], x: f64) -> (f64, f64) {
    let idx = sorted.partition_point(|&r| r < x);
    let mut best = (f64::NAN, f64::INFINITY);
    for i in [idx.wrapping_sub(1), idx] {
        if let Some(&r) = sorted.get(i) {
            let d = (r - x).abs();
            if d < best.1 {
                best = (r, d);
            }
        }
    }
    best
}

impl MetricGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖q‖₁ = Σ_e q_e ℓ_e`.
    pub fn q_norm(&self) -> f64 {
        self.edges.iter().map(|e| e.potential * e.length).sum()
    }

    pub fn dirichlet_vertex_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_dirichlet()).count()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Position of `(edge, end)` in the vertex's end list.
    pub fn end_slot(&self, edge: usize, end: End) -> (usize, usize) {
        let e = &self.edges[edge];
        let v = match end {
            End::Tail => e.tail,
            End::Head => e.head,
        };
        let slot = self.vertices[v]
            .ends
            .iter()
            .position(|x| x.edge == edge && x.end == end)
            .expect("edge end registered at its vertex");
        (v, slot)
    }

    /// All vertices carry natural conditions, all potentials vanish.
    pub fn is_standard(&self) -> bool {
        self.vertices.iter().all(Vertex::is_natural) && self.edges.iter().all(|e| e.potential == 0.0)
    }

    /// Uniformly rescale every edge length.
    pub fn scaled(&self, factor: f64) -> MetricGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length *= factor;
        }
        g
    }

    /// Exact subset-sum ratios of the edge lengths.
    pub fn subset_length_ratios(&self) -> Result<SubsetLengthSet> {
        let m = self.edges.len();
        if m > SUBSET_CAP {
            return Err(Error::SubsetCap {
                edges: m,
                cap: SUBSET_CAP,
            });
        }
        // Distinct subset sums grow edge by edge; merging keeps them sorted.
        let mut sums: Vec<f64> = Vec::new();
        for e in &self.edges {
            let mut next = Vec::with_capacity(2 * sums.len() + 1);
            next.extend_from_slice(&sums);
            next.push(e.length);
            next.extend(sums.iter().map(|s| s + e.length));
            next.sort_by(f64::total_cmp);
            sums = dedup_relative(next);
        }
        let total = self.total_length();
        let mut ratios: Vec<f64> = sums.iter().map(|s| s / total).collect();
        if let Some(last) = ratios.last_mut() {
            *last = 1.0;
        }
        Ok(SubsetLengthSet { ratios })
    }

    /// First `count` eigenvalues of the fully decoupled Dirichlet problem,
    /// `{q_e + (mπ/ℓ_e)² : e ∈ E, m ≥ 1}` sorted with multiplicity.
    pub fn decoupled_dirichlet_spectrum(&self, count: usize) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .edges
            .iter()
            .flat_map(|e| {
                (1..=count).map(move |m| e.potential + (m as f64 * PI / e.length).powi(2))
            })
            .collect();
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        all
    }

    /// Number of decoupled Dirichlet eigenvalues strictly below `lambda`.
    pub fn dirichlet_count_below(&self, lambda: f64) -> usize {
        self.edges
            .iter()
            .map(|e| {
                let mu = lambda - e.potential;
                if mu <= 0.0 {
                    return 0;
                }
                let x = e.length * mu.sqrt() / PI;
                let mut m = x.floor() as usize;
                // m counts values (jπ/ℓ)² ≤ mu; drop an exact hit
                if m > 0 && (m as f64 * PI / e.length).powi(2) >= mu {
                    m -= 1;
                }
                m
            })
            .sum()
    }

    /// Smallest relative distance from `lambda` to a decoupled Dirichlet eigenvalue.
    pub fn dirichlet_distance(&self, lambda: f64) -> f64 {
        let scale = lambda.abs().max(1.0);
        self.edges
            .iter()
            .map(|e| {
                let mu = lambda - e.potential;
                let m = if mu > 0.0 {
                    (e.length * mu.sqrt() / PI).round().max(1.0)
                } else {
                    1.0
                };
                let value = e.potential + (m * PI / e.length).powi(2);
                (lambda - value).abs() / scale
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Serialize to the line-oriented graph format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            match &v.condition {
                VertexCondition::Dirichlet => {
                    let _ = writeln!(out, "vertex {} dirichlet", v.name);
                }
                VertexCondition::Coupled { weights, robin } => {
                    if v.is_natural() {
                        let _ = writeln!(out, "vertex {}", v.name);
                        continue;
                    }
                    let _ = write!(out, "vertex {}", v.name);
                    if robin.iter().any(|&a| a != 0.0) {
                        out.push_str(" robin");
                        for a in robin {
                            let _ = write!(out, " {a}");
                        }
                    }
                    if weights.iter().any(|&w| w != 1.0) {
                        out.push_str(" weights");
                        let mut seen = Vec::new();
                        for (i, end) in v.ends.iter().enumerate() {
                            if seen.contains(&end.edge) {
                                continue;
                            }
                            seen.push(end.edge);
                            let _ = write!(out, " {}:{}", self.edges[end.edge].name, weights[i]);
                        }
                    }
                    out.push('\n');
                }
            }
        }
        for e in &self.edges {
            let _ = write!(
                out,
                "edge {} {} {} length {}",
                e.name, self.vertices[e.tail].name, self.vertices[e.head].name, e.length
            );
            if e.potential != 0.0 {
                let _ = write!(out, " q {}", e.potential);
            }
            out.push('\n');
        }
        out
    }

    /// Parse and validate a graph document.
    pub fn parse(text: &str) -> Result<MetricGraph> {
        let mut b = GraphBuilder::new();
        let mut declared: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "vertex" => {
                    let name = *tokens.get(1).ok_or_else(|| syntax(line, "vertex needs an id"))?;
                    if declared.insert(name.to_string(), line).is_some() {
                        return Err(syntax(line, format!("duplicate vertex '{name}'")));
                    }
                    let spec = parse_condition(&tokens[2..], line)?;
                    b.set_condition(name, spec);
                }
                "edge" => {
                    if tokens.len() < 6 {
                        return Err(syntax(line, "expected: edge <id> <tail> <head> length <l> [q <q>]"));
                    }
                    let name = tokens[1];
                    if b.edges.iter().any(|e| e.name == name) {
                        return Err(syntax(line, format!("duplicate edge '{name}'")));
                    }
                    let mut length = None;
                    let mut potential = 0.0;
                    let mut rest = tokens[4..].iter();
                    while let Some(&key) = rest.next() {
                        let value = rest
                            .next()
                            .ok_or_else(|| syntax(line, format!("missing value after '{key}'")))?;
                        let value: f64 = value
                            .parse()
                            .map_err(|_| syntax(line, format!("invalid number '{value}'")))?;
                        match key {
                            "length" => length = Some(value),
                            "q" => potential = value,
                            other => return Err(syntax(line, format!("unknown edge attribute '{other}'"))),
                        }
                    }
                    let length = length.ok_or_else(|| syntax(line, "edge without length"))?;
                    b.edge(name, tokens[2], tokens[3], length, potential);
                }
                other => return Err(syntax(line, format!("unknown directive '{other}'"))),
            }
        }
        b.build()
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_condition(tokens: &[&str], line: usize) -> Result<ConditionSpec> {
    let mut dirichlet = false;
    let mut delta = None;
    let mut block: Option<Vec<f64>> = None;
    let mut weights = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match tokens[i] {
            "dirichlet" => {
                dirichlet = true;
                i += 1;
            }
            "delta" => {
                let v = tokens.get(i + 1).and_then(|t| t.parse::<f64>().ok());
                delta = Some(v.ok_or_else(|| syntax(line, "delta needs a strength"))?);
                i += 2;
            }
            "robin" => {
                i += 1;
                let mut values = Vec::new();
                while let Some(Ok(v)) = tokens.get(i).map(|t| t.parse::<f64>()) {
                    values.push(v);
                    i += 1;
                }
                if values.is_empty() {
                    return Err(syntax(line, "robin block without entries"));
                }
                block = Some(values);
            }
            "weights" => {
                i += 1;
                while let Some(tok) = tokens.get(i) {
                    let Some((edge, w)) = tok.split_once(':') else {
                        break;
                    };
                    let w: f64 = w
                        .parse()
                        .map_err(|_| syntax(line, format!("invalid weight '{tok}'")))?;
                    weights.push((edge.to_string(), w));
                    i += 1;
                }
            }
            other => return Err(syntax(line, format!("unexpected token '{other}'"))),
        }
    }
    if dirichlet && (block.is_some() || !weights.is_empty() || delta.is_some()) {
        return Err(syntax(line, "dirichlet vertex cannot carry robin block or weights"));
    }
    if delta.is_some() && (block.is_some() || !weights.is_empty()) {
        return Err(syntax(line, "delta vertex cannot carry robin block or weights"));
    }
    Ok(if dirichlet {
        ConditionSpec::Dirichlet
    } else if let Some(strength) = delta {
        ConditionSpec::Delta(strength)
    } else if block.is_none() && weights.is_empty() {
        ConditionSpec::Natural
    } else {
        ConditionSpec::Robin { block, weights }
    })
}

fn dedup_relative(sorted: Vec<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for x in sorted {
        match out.last() {
            Some(&prev) if (x - prev).abs() <= RATIO_DEDUP_REL * x.abs().max(prev.abs()) => {}
            _ => out.push(x),
        }
    }
    out
}

/// Programmatic graph construction with the same validation as the parser.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertex_names: Vec<String>,
    specs: Vec<ConditionSpec>,
    edges: Vec<PendingEdge>,
}

#[derive(Debug, Clone)]
struct PendingEdge {
    name: String,
    tail: String,
    head: String,
    length: f64,
    potential: f64,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure_vertex(&mut self, name: &str) -> usize {
        match self.vertex_names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                self.vertex_names.push(name.to_string());
                self.specs.push(ConditionSpec::Natural);
                self.vertex_names.len() - 1
            }
        }
    }

    fn set_condition(&mut self, name: &str, spec: ConditionSpec) {
        let i = self.ensure_vertex(name);
        self.specs[i] = spec;
    }

    /// Declare (or redeclare) a vertex with the given condition.
    pub fn vertex(mut self, name: &str, spec: ConditionSpec) -> Self {
        self.set_condition(name, spec);
        self
    }

    pub fn edge(&mut self, name: &str, tail: &str, head: &str, length: f64, potential: f64) -> &mut Self {
        self.ensure_vertex(tail);
        self.ensure_vertex(head);
        self.edges.push(PendingEdge {
            name: name.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
            length,
            potential,
        });
        self
    }

    pub fn with_edge(mut self, name: &str, tail: &str, head: &str, length: f64, potential: f64) -> Self {
        self.edge(name, tail, head, length, potential);
        self
    }

    pub fn build(self) -> Result<MetricGraph> {
        if self.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let index = |name: &str| self.vertex_names.iter().position(|n| n == name).unwrap();
        let mut edges = Vec::with_capacity(self.edges.len());
        for p in &self.edges {
            if !(p.length > 0.0) || !p.length.is_finite() {
                return Err(Error::NonpositiveLength {
                    edge: p.name.clone(),
                    length: p.length,
                });
            }
            if !(p.potential >= 0.0) || !p.potential.is_finite() {
                return Err(Error::NegativePotential {
                    edge: p.name.clone(),
                    potential: p.potential,
                });
            }
            edges.push(Edge {
                name: p.name.clone(),
                tail: index(&p.tail),
                head: index(&p.head),
                length: p.length,
                potential: p.potential,
            });
        }

        let mut ends: Vec<Vec<EdgeEnd>> = vec![Vec::new(); self.vertex_names.len()];
        for (i, e) in edges.iter().enumerate() {
            ends[e.tail].push(EdgeEnd { edge: i, end: End::Tail });
            ends[e.head].push(EdgeEnd { edge: i, end: End::Head });
        }

        let mut vertices = Vec::with_capacity(self.vertex_names.len());
        for (v, name) in self.vertex_names.iter().enumerate() {
            let d = ends[v].len();
            let condition = match &self.specs[v] {
                ConditionSpec::Dirichlet => VertexCondition::Dirichlet,
                ConditionSpec::Natural => VertexCondition::Coupled {
                    weights: vec![1.0; d],
                    robin: vec![0.0; d * d],
                },
                ConditionSpec::Delta(alpha) => {
                    let mut robin = vec![0.0; d * d];
                    for i in 0..d {
                        robin[i * d + i] = alpha / d as f64;
                    }
                    VertexCondition::Coupled {
                        weights: vec![1.0; d],
                        robin,
                    }
                }
                ConditionSpec::Robin { block, weights: named } => {
                    let mut weights = vec![1.0; d];
                    for (edge_name, w) in named {
                        let slots: Vec<usize> = ends[v]
                            .iter()
                            .enumerate()
                            .filter(|(_, x)| edges[x.edge].name == *edge_name)
                            .map(|(i, _)| i)
                            .collect();
                        if slots.is_empty() {
                            return Err(Error::UnknownWeightEdge {
                                vertex: name.clone(),
                                edge: edge_name.clone(),
                            });
                        }
                        for s in slots {
                            weights[s] = *w;
                        }
                    }
                    let robin = block.clone().unwrap_or_else(|| vec![0.0; d * d]);
                    VertexCondition::Coupled { weights, robin }
                }
            };
            vertices.push(Vertex {
                name: name.clone(),
                condition,
                ends: std::mem::take(&mut ends[v]),
            });
        }

        let g = MetricGraph { vertices, edges };
        g.validate()?;
        Ok(g)
    }
}

impl MetricGraph {
    fn validate(&self) -> Result<()> {
        for v in &self.vertices {
            if let VertexCondition::Coupled { weights, robin } = &v.condition {
                let d = v.degree();
                for (i, &w) in weights.iter().enumerate() {
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(Error::NonpositiveWeight {
                            vertex: v.name.clone(),
                            edge: self.edges[v.ends[i].edge].name.clone(),
                            weight: w,
                        });
                    }
                }
                if robin.len() != d * d {
                    return Err(Error::RobinSize {
                        vertex: v.name.clone(),
                        expected: d * d,
                        found: robin.len(),
                    });
                }
                let scale = robin.iter().fold(1.0f64, |m, a| m.max(a.abs()));
                for i in 0..d {
                    for j in 0..d {
                        let (a, b) = (robin[i * d + j], robin[j * d + i]);
                        if (a - b).abs() > 1e-12 * scale {
                            return Err(Error::RobinNotSymmetric { vertex: v.name.clone() });
                        }
                        if i != j && a > 0.0 {
                            return Err(Error::RobinPositiveOffDiagonal {
                                vertex: v.name.clone(),
                                row: i,
                                col: j,
                                value: a,
                            });
                        }
                    }
                }
            }
        }

        let mut uf = UnionFind::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.tail, e.head);
        }
        let root = uf.find(0);
        for (i, v) in self.vertices.iter().enumerate() {
            if uf.find(i) != root {
                return Err(Error::Disconnected { vertex: v.name.clone() });
            }
        }
        Ok(())
    }
}

/// Common test and experiment graphs.
pub mod library {
    use super::*;

    /// Single interval `[0, ℓ]` with the given end conditions.
    pub fn interval(length: f64, start: ConditionSpec, end: ConditionSpec) -> MetricGraph {
        GraphBuilder::new()
            .vertex("a", start)
            .vertex("b", end)
            .with_edge("e", "a", "b", length, 0.0)
            .build()
            .expect("valid interval")
    }

    /// Star with edges oriented from the centre (x = 0) to the leaves.
    pub fn star(lengths: &[f64], leaves: ConditionSpec) -> MetricGraph {
        let mut b = GraphBuilder::new().vertex("c", ConditionSpec::Natural);
        for (i, &l) in lengths.iter().enumerate() {
            let leaf = format!("v{}", i + 1);
            b = b.vertex(&leaf, leaves.clone());
            b.edge(&format!("e{}", i + 1), "c", &leaf, l, 0.0);
        }
        b.build().expect("valid star")
    }

    /// A loop of length `loop_length` attached at `v` to a pendant edge.
    pub fn lasso(loop_length: f64, pendant_length: f64) -> MetricGraph {
        GraphBuilder::new()
            .with_edge("loop", "v", "v", loop_length, 0.0)
            .with_edge("tail", "v", "leaf", pendant_length, 0.0)
            .build()
            .expect("valid lasso")
    }

    /// Interval `[0, ℓ₁ + ℓ₂]` with Dirichlet ends and a delta of given
    /// strength at the interior point `ℓ₁`.
    pub fn interval_with_delta(left: f64, right: f64, strength: f64) -> MetricGraph {
        GraphBuilder::new()
            .vertex("a", ConditionSpec::Dirichlet)
            .vertex("m", ConditionSpec::Delta(strength))
            .vertex("b", ConditionSpec::Dirichlet)
            .with_edge("l", "a", "m", left, 0.0)
            .with_edge("r", "m", "b", right, 0.0)
            .build()
            .expect("valid delta interval")
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const STAR4: &str = "\
# equilateral 4-star
edge e1 c v1 length 1
edge e2 c v2 length 1
edge e3 c v3 length 1
edge e4 c v4 length 1
";

    #[test]
    fn parses_equilateral_star() {
        let g = MetricGraph::parse(STAR4).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.total_length(), 4.0);
        assert!(g.is_standard());
        assert_eq!(g.vertices()[0].degree(), 4);
    }

    #[test]
    fn parses_dirichlet_interval() {
        let g = MetricGraph::parse("vertex a dirichlet\nvertex b dirichlet\nedge e a b length 1\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.dirichlet_vertex_count(), 2);
    }

    #[test]
    fn parses_delta_vertex() {
        let g = MetricGraph::parse("vertex m delta -1.5\nedge l a m length 1\nedge r m b length 2\n").unwrap();
        let m = &g.vertices()[g.vertex_index("m").unwrap()];
        assert_relative_eq!(m.rho(), -1.5, epsilon = 1e-15);
        assert_eq!(MetricGraph::parse(&g.to_text()).unwrap(), g);
        assert!(MetricGraph::parse("vertex m delta\nedge l a m length 1\n").is_err());
        assert!(MetricGraph::parse("vertex m delta 1 dirichlet\nedge l a m length 1\n").is_err());
    }

    #[test]
    fn rejects_nonpositive_length() {
        let err = MetricGraph::parse("edge e a b length -1\n").unwrap_err();
        assert!(err.to_string().contains("nonpositive length"), "{err}");
    }

    #[test]
    fn reports_syntax_line() {
        let err = MetricGraph::parse("# header\nedge e a b length 1\nedge f b c lenght 2\n").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_disconnected() {
        let err = MetricGraph::parse("edge e a b length 1\nedge f c d length 1\n").unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }));
    }

    #[test]
    fn rejects_bad_robin_blocks() {
        let asym = "vertex m robin 1 -0.5 -0.2 1\nedge l a m length 1\nedge r m b length 1\n";
        assert!(matches!(MetricGraph::parse(asym).unwrap_err(), Error::RobinNotSymmetric { .. }));
        let pos = "vertex m robin 1 0.5 0.5 1\nedge l a m length 1\nedge r m b length 1\n";
        assert!(matches!(
            MetricGraph::parse(pos).unwrap_err(),
            Error::RobinPositiveOffDiagonal { .. }
        ));
        let size = "vertex m robin 1 0 0\nedge l a m length 1\nedge r m b length 1\n";
        assert!(matches!(MetricGraph::parse(size).unwrap_err(), Error::RobinSize { .. }));
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let text = "vertex m weights l:0\nedge l a m length 1\nedge r m b length 1\n";
        assert!(matches!(MetricGraph::parse(text).unwrap_err(), Error::NonpositiveWeight { .. }));
    }

    #[test]
    fn rho_collapses_block_on_weighted_traces() {
        let text = "vertex m robin 2 -1 -1 4 weights l:2 r:1\nedge l a m length 1\nedge r m b length 1\n";
        let g = MetricGraph::parse(text).unwrap();
        let m = &g.vertices()[g.vertex_index("m").unwrap()];
        // u = (1/2, 1): 2/4 - 2·(1/2) + 4 = 3.5
        assert_relative_eq!(m.rho(), 3.5, epsilon = 1e-15);
    }

    #[test]
    fn loop_registers_two_ends() {
        let g = lasso(1.0, 3.0);
        let v = &g.vertices()[0];
        assert_eq!(v.degree(), 3);
        assert_eq!(v.ends()[0], EdgeEnd { edge: 0, end: End::Tail });
        assert_eq!(v.ends()[1], EdgeEnd { edge: 0, end: End::Head });
    }

    #[test]
    fn subset_ratios_examples() {
        let ratios = |ls: &[f64]| star(ls, ConditionSpec::Natural).subset_length_ratios().unwrap().ratios;
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
        assert!(close(&ratios(&[1.0, 1.0, 1.0, 1.0]), &[0.25, 0.5, 0.75, 1.0]));
        let sevenths: Vec<f64> = (1..=7).map(|k| k as f64 / 7.0).collect();
        assert!(close(&ratios(&[1.0, 2.0, 4.0]), &sevenths));
        assert!(close(&ratios(&[1.0, 1.0, 2.0]), &[0.25, 0.5, 0.75, 1.0]));
    }

    #[test]
    fn subset_cap_is_enforced() {
        let lengths: Vec<f64> = (0..25).map(|i| 1.0 + i as f64 * 0.01).collect();
        let err = star(&lengths, ConditionSpec::Natural).subset_length_ratios().unwrap_err();
        assert!(matches!(err, Error::SubsetCap { edges: 25, .. }));
    }

    #[test]
    fn decoupled_dirichlet_examples() {
        let pi2 = PI * PI;
        let unit = interval(1.0, ConditionSpec::Dirichlet, ConditionSpec::Dirichlet);
        let d = unit.decoupled_dirichlet_spectrum(3);
        for (x, y) in d.iter().zip([pi2, 4.0 * pi2, 9.0 * pi2]) {
            assert_relative_eq!(*x, y, max_relative = 1e-15);
        }
        let two = star(&[1.0, 2.0], ConditionSpec::Natural);
        let d = two.decoupled_dirichlet_spectrum(4);
        for (x, y) in d.iter().zip([pi2 / 4.0, pi2, pi2, 9.0 * pi2 / 4.0]) {
            assert_relative_eq!(*x, y, max_relative = 1e-15);
        }
        let shifted = MetricGraph::parse("edge e a b length 1 q 5\n").unwrap();
        assert_relative_eq!(shifted.decoupled_dirichlet_spectrum(1)[0], 5.0 + pi2, max_relative = 1e-15);
    }

    #[test]
    fn dirichlet_count_matches_list() {
        let g = star(&[1.0, 2.0, 4.0], ConditionSpec::Natural);
        let d = g.decoupled_dirichlet_spectrum(60);
        for lam in [0.5, 3.0, 10.0, 40.0, 100.0] {
            let expected = d.iter().filter(|&&x| x < lam).count();
            assert_eq!(g.dirichlet_count_below(lam), expected);
        }
    }

    fn arb_lengths() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.1f64..5.0, 1..8)
    }

    proptest! {
        #[test]
        fn subset_ratios_scale_invariant(lengths in arb_lengths(), factor in 0.1f64..20.0) {
            let g = star(&lengths, ConditionSpec::Natural);
            let a = g.subset_length_ratios().unwrap().ratios;
            let b = g.scaled(factor).subset_length_ratios().unwrap().ratios;
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn subset_ratio_extremes(lengths in arb_lengths()) {
            let g = star(&lengths, ConditionSpec::Natural);
            let r = g.subset_length_ratios().unwrap().ratios;
            prop_assert_eq!(r[0], g.min_length() / g.total_length());
            prop_assert_eq!(*r.last().unwrap(), 1.0);
            prop_assert!(r.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.len() < 1 << lengths.len());
        }

        #[test]
        fn decoupled_spectrum_is_merge_of_edges(lengths in arb_lengths(), count in 1usize..40) {
            let g = star(&lengths, ConditionSpec::Natural);
            let whole = g.decoupled_dirichlet_spectrum(count);
            let mut merged: Vec<f64> = lengths
                .iter()
                .flat_map(|&l| interval(l, ConditionSpec::Dirichlet, ConditionSpec::Dirichlet).decoupled_dirichlet_spectrum(count))
                .collect();
            merged.sort_by(f64::total_cmp);
            merged.truncate(count);
            prop_assert_eq!(whole, merged);
        }

        #[test]
        fn text_round_trip(lengths in arb_lengths(), q in 0.0f64..4.0, alpha in -2.0f64..2.0) {
            let mut b = GraphBuilder::new()
                .vertex("c", ConditionSpec::Delta(alpha))
                .vertex("v1", ConditionSpec::Dirichlet);
            for (i, &l) in lengths.iter().enumerate() {
                b.edge(&format!("e{i}"), "c", &format!("v{}", i + 1), l, q);
            }
            let g = b.build().unwrap();
            let back = MetricGraph::parse(&g.to_text()).unwrap();
            prop_assert_eq!(g, back);
        }
    }
}
