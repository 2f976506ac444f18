mod support;

use std::f64::consts::PI;

use nodalgraph::eigenfunctions::BasisStrategy;
use nodalgraph::graph::library::*;
use nodalgraph::nodal::{nodal_count_series, nodal_domains};
use nodalgraph::secular::expand as expand_eigenvalues;
use nodalgraph::{ConditionSpec, MetricGraph, SpectralProblem};
use support::{fd, signscan};

const POINTS: usize = 1 << 13;

fn oracle_graphs() -> Vec<(&'static str, MetricGraph)> {
    vec![
        ("interval with delta", interval_with_delta(1.0, 1.5, 2.0)),
        ("interval with attractive delta", interval_with_delta(1.0, 1.5, -4.0)),
        ("3-star", star(&[1.0, 2.0, 4.0], ConditionSpec::Natural)),
        ("lasso", lasso(1.0, 3.0)),
    ]
}

#[test]
fn fd_oracle_reproduces_closed_forms() {
    let g = interval(1.0, ConditionSpec::Dirichlet, ConditionSpec::Dirichlet);
    let fd = fd::extrapolated_eigenvalues(&g, POINTS, 10);
    for (i, v) in fd.iter().enumerate() {
        let exact = (PI * (i + 1) as f64).powi(2);
        assert!((v - exact).abs() / exact < 1e-8, "{i}: {v} vs {exact}");
    }
    let g = star(&[1.0; 4], ConditionSpec::Natural);
    let fd = fd::extrapolated_eigenvalues(&g, 1 << 10, 8);
    let q = PI * PI / 4.0;
    let expected = [0.0, q, q, q, 4.0 * q, 9.0 * q, 9.0 * q, 9.0 * q];
    for (v, e) in fd.iter().zip(expected) {
        assert!((v - e).abs() <= 1e-6 * e.max(1.0), "{v} vs {e}");
    }
}

#[test]
fn secular_eigenvalues_match_fd() {
    for (name, g) in oracle_graphs() {
        let fd = fd::extrapolated_eigenvalues(&g, POINTS, 20);
        let p = SpectralProblem::new(g);
        let ours = expand_eigenvalues(&p.find_eigenvalues(20).unwrap());
        for (n, (a, b)) in ours.iter().zip(&fd).enumerate().take(20) {
            let rel = (a - b).abs() / b.abs().max(1.0);
            assert!(rel < 1e-4, "{name} λ_{}: secular {a} fd {b}", n + 1);
        }
    }
}

#[test]
fn sign_scan_matches_nodal_domains() {
    let mut graphs = oracle_graphs();
    graphs.push(("4-star", star(&[1.0; 4], ConditionSpec::Natural)));
    graphs.push(("dirichlet 3-star", star(&[1.0, 2.0, 4.0], ConditionSpec::Dirichlet)));
    for (name, g) in graphs {
        let p = SpectralProblem::new(g);
        for strategy in [BasisStrategy::SolverDefault, BasisStrategy::SupportMin] {
            let series = nodal_count_series(&p, 120, &strategy).unwrap();
            for r in series.iter().filter(|r| r.lambda < 1e4) {
                let brute = signscan::nodal_count(&p.graph, &r.function);
                assert_eq!(r.nu, brute, "{name} n={} λ={}", r.n, r.lambda);
                assert_eq!(nodal_domains(&p.graph, &r.function).unwrap().len(), brute);
            }
        }
    }
}
