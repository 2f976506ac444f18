//! Batch experiments over graph files: spectra, nodal counts, accumulation
//! estimates, bound verification, p-Laplacian brackets and random graphs.

mod format;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use nodalgraph::eigenfunctions::{BasisStrategy, BasisTable};
use nodalgraph::nodal::{
    accumulation_estimate, check_domain_groundstate, check_nodal_size, check_nu_lambda, lambda1_upper_bound,
    series_from_eigenvalues, NodalReport,
};
use nodalgraph::plaplacian::{bracket_variational, weyl_p_check, PContext};
use nodalgraph::random::{random_graph, LengthDistribution, RandomGraphOptions};
use nodalgraph::secular::{verify_interlacing, Eigenvalue};
use nodalgraph::{MetricGraph, SolverConfig, SpectralProblem};

pub use format::fmt_g;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Nodal,
    Accumulate,
    Verify,
    Plap,
    Gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrategyChoice {
    #[default]
    Default,
    SupportMax,
    SupportMin,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSettings {
    pub edges: usize,
    pub lengths: LengthDistribution,
    pub potential: f64,
    pub delta: f64,
    pub dirichlet_leaves: bool,
    pub simple: bool,
    pub vertices: Option<usize>,
}

impl Default for GenSettings {
    fn default() -> Self {
        GenSettings {
            edges: 5,
            lengths: LengthDistribution::Uniform,
            potential: 0.0,
            delta: 0.0,
            dirichlet_leaves: false,
            simple: false,
            vertices: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub graph: Option<PathBuf>,
    pub n: usize,
    pub p: f64,
    pub strategy: StrategyChoice,
    pub basis: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub scan_step: Option<f64>,
    pub rank_tol: Option<f64>,
    /// Skip the SVG plot.
    pub no_plot: bool,
    pub gen: GenSettings,
}

impl ExperimentSpec {
    pub fn new(command: Command, graph: Option<PathBuf>, out: PathBuf) -> Self {
        ExperimentSpec {
            command,
            graph,
            n: 100,
            p: 2.0,
            strategy: StrategyChoice::Default,
            basis: None,
            out,
            seed: 0,
            scan_step: None,
            rank_tol: None,
            no_plot: false,
            gen: GenSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("N must be at least 1");
        }
        if self.command != Command::Gen {
            match &self.graph {
                None => bail!("a graph file is required"),
                Some(g) if !g.is_file() => bail!("graph file {} does not exist", g.display()),
                _ => {}
            }
        }
        if self.strategy == StrategyChoice::Table && self.basis.is_none() {
            bail!("strategy 'table' needs --basis <file>");
        }
        if let Some(b) = &self.basis {
            if !b.is_file() {
                bail!("basis table {} does not exist", b.display());
            }
        }
        if self.command == Command::Gen && self.gen.edges == 0 {
            bail!("a random graph needs at least one edge");
        }
        Ok(())
    }
}

/// What a run produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Rows of `verify.csv` with `pass = false`.
    pub failed_checks: usize,
    pub messages: Vec<String>,
}

pub fn run(spec: &ExperimentSpec) -> Result<RunSummary> {
    spec.validate()?;
    fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;
    let mut summary = RunSummary::default();
    if spec.command == Command::Gen {
        return run_gen(spec, summary);
    }
    let path = spec.graph.as_ref().unwrap();
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let graph = MetricGraph::parse(&text).with_context(|| format!("parsing {}", path.display()))?;

    if spec.command == Command::Plap {
        return run_plap(spec, &graph, summary);
    }

    let defaults = SolverConfig::default();
    let config = SolverConfig {
        scan_step: spec.scan_step,
        rank_tol: spec.rank_tol.unwrap_or(defaults.rank_tol),
        ..defaults
    };
    let problem = SpectralProblem::with_config(graph, config);
    let eigs = problem.find_eigenvalues(spec.n)?;
    write_file(spec, "spectrum.csv", &spectrum_csv(&eigs, spec.n), &mut summary)?;
    if spec.command == Command::Solve {
        summary.messages.push(format!("{} eigenvalues", spec.n));
        return Ok(summary);
    }

    let strategy = strategy(spec, &problem.graph)?;
    let series = series_from_eigenvalues(&problem, &eigs, spec.n, &strategy)?;
    let checks = checks(&problem, &eigs, &series, spec.command == Command::Verify)?;
    write_file(spec, "nodal.csv", &nodal_csv(&series, &checks), &mut summary)?;
    let candidates = problem.graph.subset_length_ratios().map(|s| s.ratios).unwrap_or_default();
    if !spec.no_plot {
        write_file(spec, "ratios.svg", &svg::ratio_plot(&series, &candidates), &mut summary)?;
    }

    match spec.command {
        Command::Accumulate => {
            let est = accumulation_estimate(&series, &problem.graph, 0.5, 0.02)?;
            let mut csv = String::from("source,point,hits,max_snap_distance\n");
            for (source, points) in [("nodal", &est.points), ("support", &est.support_points)] {
                for pt in points {
                    let _ = writeln!(csv, "{source},{},{},{}", fmt_g(pt.value), pt.hits, fmt_g(pt.max_snap_distance));
                }
            }
            write_file(spec, "accumulation.csv", &csv, &mut summary)?;
            let values: Vec<String> = est.points.iter().map(|p| fmt_g(p.value)).collect();
            summary.messages.push(format!(
                "accumulation points {{{}}} over n = {}..{}; support estimate {}; {} snap failures",
                values.join(", "),
                est.window.0,
                est.window.1,
                if est.agree { "agrees" } else { "differs" },
                est.snap_failures.len()
            ));
        }
        Command::Verify => {
            let mut csv = String::from("check,n,lhs,rhs,pass\n");
            for c in &checks {
                let _ = writeln!(csv, "{},{},{},{},{}", c.name, c.n, fmt_g(c.lhs), fmt_g(c.rhs), c.pass);
            }
            summary.failed_checks = checks.iter().filter(|c| !c.pass).count();
            write_file(spec, "verify.csv", &csv, &mut summary)?;
            summary
                .messages
                .push(format!("{} checks, {} failed", checks.len(), summary.failed_checks));
        }
        _ => {}
    }
    Ok(summary)
}

fn strategy(spec: &ExperimentSpec, g: &MetricGraph) -> Result<BasisStrategy> {
    let choice = match (spec.strategy, &spec.basis) {
        (StrategyChoice::Default, Some(_)) => StrategyChoice::Table,
        (c, _) => c,
    };
    Ok(match choice {
        StrategyChoice::Default => BasisStrategy::SolverDefault,
        StrategyChoice::SupportMax => BasisStrategy::SupportMax,
        StrategyChoice::SupportMin => BasisStrategy::SupportMin,
        StrategyChoice::Table => {
            let path = spec.basis.as_ref().unwrap();
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let table = BasisTable::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(row) = table.rows.iter().find(|r| r.coefficients.len() != g.edge_count()) {
                bail!(
                    "basis table rows need {} coefficients, found a row with {}",
                    g.edge_count(),
                    row.coefficients.len()
                );
            }
            BasisStrategy::UserTable(table)
        }
    })
}

/// One checked inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
struct Check {
    name: &'static str,
    n: usize,
    lhs: f64,
    rhs: f64,
    pass: bool,
}

fn le(name: &'static str, n: usize, lhs: f64, rhs: f64, rel: f64) -> Check {
    Check {
        name,
        n,
        lhs,
        rhs,
        pass: lhs <= rhs + rel * rhs.abs().max(1.0),
    }
}

/// Number of indices for which a domain ground state is recomputed.
const GROUNDSTATE_CHECKS: usize = 20;

fn checks(p: &SpectralProblem, eigs: &[Eigenvalue], series: &[NodalReport], full: bool) -> Result<Vec<Check>> {
    let g = &p.graph;
    let q = g.q_norm();
    let n_max = series.len();
    let mut out = Vec::new();
    if full {
        for e in verify_interlacing(p, eigs, n_max)? {
            if let Some(lower) = e.lower {
                out.push(le("interlacing_lower", e.n, lower, e.lambda, 1e-8));
            }
            out.push(le("interlacing_upper", e.n, e.lambda, e.upper, 1e-8));
        }
        out.push(le("lambda1_bound", 1, series[0].lambda, lambda1_upper_bound(g), 1e-9));
    }
    for c in check_nu_lambda(series, g, q) {
        out.push(le("nu_lambda_lower", c.n, c.lower, c.nu as f64, 0.0));
        out.push(le("nu_lambda_upper", c.n, c.nu as f64, c.upper, 0.0));
    }
    for r in series {
        let c = check_nodal_size(r, g, q);
        if c.bound.is_finite() {
            out.push(le("nodal_size", r.n, c.max_domain_length, c.bound, 1e-9));
            if c.max_interval_length > 0.0 {
                out.push(le("interval_domain_size", r.n, c.max_interval_length, c.interval_bound, 1e-9));
            }
        }
        if c.above_vertex_threshold {
            out.push(le("domain_vertices", r.n, c.max_closure_vertices as f64, 1.0, 0.0));
        }
    }
    if full {
        for r in series.iter().take(GROUNDSTATE_CHECKS) {
            let d = r
                .domains
                .iter()
                .max_by(|a, b| a.length.total_cmp(&b.length))
                .unwrap();
            let mismatch = check_domain_groundstate(p, &r.function, d)?;
            out.push(le("domain_groundstate", r.n, mismatch, 1e-6, 0.0));
        }
    }
    out.sort_by_key(|c| c.n);
    Ok(out)
}

fn spectrum_csv(eigs: &[Eigenvalue], n_max: usize) -> String {
    let mut csv = String::from("n,lambda,group,multiplicity\n");
    let mut n = 0;
    for (gi, e) in eigs.iter().enumerate() {
        for _ in 0..e.multiplicity {
            n += 1;
            if n > n_max {
                return csv;
            }
            let _ = writeln!(csv, "{n},{},{},{}", fmt_g(e.value), gi + 1, e.multiplicity);
        }
    }
    csv
}

fn nodal_csv(series: &[NodalReport], checks: &[Check]) -> String {
    let mut csv = String::from("n,lambda,multiplicity_group,nu,supp_len,ratio,max_domain_len,bounds_ok\n");
    for r in series {
        let ok = checks.iter().filter(|c| c.n == r.n).all(|c| c.pass);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.n,
            fmt_g(r.lambda),
            r.group,
            r.nu,
            fmt_g(r.support.length),
            fmt_g(r.ratio),
            fmt_g(r.max_domain_length()),
            ok
        );
    }
    csv
}

fn run_plap(spec: &ExperimentSpec, g: &MetricGraph, mut summary: RunSummary) -> Result<RunSummary> {
    let ctx = PContext::new(spec.p)?;
    let brackets = bracket_variational(g, &ctx, spec.n);
    let mut csv = String::from("n,lower,upper,p\n");
    for b in &brackets {
        let _ = writeln!(csv, "{},{},{},{}", b.n, fmt_g(b.lower), fmt_g(b.upper), fmt_g(spec.p));
    }
    write_file(spec, "brackets.csv", &csv, &mut summary)?;
    match weyl_p_check(&brackets, &ctx, g.total_length()) {
        Ok(fit) => summary.messages.push(format!(
            "Weyl slope deviation {} (expected slope {}, fit over n = {}..{})",
            fmt_g(fit.deviation),
            fmt_g(fit.expected),
            fit.window.0,
            fit.window.1
        )),
        Err(e) => summary.messages.push(format!("Weyl fit skipped: {e}")),
    }
    Ok(summary)
}

fn run_gen(spec: &ExperimentSpec, mut summary: RunSummary) -> Result<RunSummary> {
    let s = &spec.gen;
    let opts = RandomGraphOptions {
        lengths: s.lengths.clone(),
        potential: s.potential,
        delta: s.delta,
        dirichlet_leaves: s.dirichlet_leaves,
        allow_multi: !s.simple,
        vertices: s.vertices,
        ..RandomGraphOptions::new(s.edges)
    };
    let g = random_graph(spec.seed, &opts)?;
    let text = format!("# random graph, seed {}\n{}", spec.seed, g.to_text());
    write_file(spec, &format!("random-{}.graph", spec.seed), &text, &mut summary)?;
    Ok(summary)
}

fn write_file(spec: &ExperimentSpec, name: &str, content: &str, summary: &mut RunSummary) -> Result<()> {
    let path: PathBuf = Path::new(&spec.out).join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    summary.files.push(path);
    Ok(())
}
