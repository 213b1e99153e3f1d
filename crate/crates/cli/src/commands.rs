use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use cdforge::curvature::{cd_max_k_at, cde_search_k_at, CurvatureResult, Dimension, SearchOptions};
use cdforge::generate::{generate, Family, GenerateParams};
use cdforge::graph::parse_graph;
use cdforge::heat::{dirichlet_spectrum, exhaustion_kernel, heat_kernel, ExhaustionDiagnostics, HeatSemigroup};
use cdforge::heat_properties::{kernel_properties, semigroup_properties, KernelProperties, SemigroupProperties};
use cdforge::inequalities::{
    lemma32_derivative_check, summarize, taylor_limit_check, verify_thm31, verify_thm32, InequalityReport,
    Lemma32Report, Summary, TaylorCheck,
};
use cdforge::quadrature::QuadratureOptions;
use cdforge::rng::{derive_seed, seeded};
use cdforge::{ExhaustionPlan, ScalarField, VertexSet, WeightedGraph};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    Cli, Command, CurvatureBound, CurvatureCommand, Format, GenerateArgs, HeatCommand, SubsetArgs, TimeGrid,
    VertexSelection, VerifyCommand,
};
use crate::output::{emit, json, render, Cell, Table};
use crate::{CliError, CliResult};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let threads = match cli.global.threads.trim() {
        "auto" | "0" | "" => 0,
        s => s
            .parse::<usize>()
            .map_err(|_| invalid(format!("invalid thread count {s:?}: expected a positive integer or auto")))?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let format = cli.global.format;
    let seed = cli.global.seed;
    let bytes = pool.install(|| dispatch(cli.command, format, seed))?;
    emit(&bytes, cli.global.out.as_deref())
}

fn dispatch(command: Command, format: Format, seed: u64) -> CliResult<Vec<u8>> {
    match command {
        Command::Info { graph } => info(&load_graph(&graph)?, format),
        Command::Generate(args) => generate_graph(&args, format),
        Command::Curvature(CurvatureCommand::Cd { graph, dim, vertices }) => {
            let g = load_graph(&graph)?;
            let xs = select(&g, &vertices)?;
            let n = dimension(&dim)?;
            let results = xs
                .par_iter()
                .map(|&x| cd_max_k_at(&g, x, n))
                .collect::<cdforge::Result<Vec<_>>>()?;
            curvature_output("curvature cd", n, None, results, format)
        }
        Command::Curvature(CurvatureCommand::Cde { graph, dim, vertices, starts, max_iter, tol }) => {
            let g = load_graph(&graph)?;
            let xs = select(&g, &vertices)?;
            let n = dimension(&dim)?;
            let opts = SearchOptions { starts, seed, max_iter, tol };
            let results = xs
                .par_iter()
                .map(|&x| cde_search_k_at(&g, x, n, &opts))
                .collect::<cdforge::Result<Vec<_>>>()?;
            curvature_output("curvature cde", n, Some(opts), results, format)
        }
        Command::Heat(HeatCommand::Kernel { graph, x, y, times, subset }) => {
            let g = load_graph(&graph)?;
            kernel(&g, &x, &y, &time_grid(&times)?, &subset, format)
        }
        Command::Heat(HeatCommand::Apply { graph, function, times, center, radius }) => {
            let g = load_graph(&graph)?;
            let f = load_field(&function)?;
            apply(&g, &f, &time_grid(&times)?, center.as_deref(), radius, format)
        }
        Command::Verify(VerifyCommand::Thm31 {
            graph,
            function,
            dim,
            kappa,
            times,
            vertex,
            order,
            panels,
            converse,
        }) => {
            let g = load_graph(&graph)?;
            let f = load_field(&function)?;
            let n = dimension(&dim)?;
            if order == 0 || panels == 0 {
                return Err(invalid("--order and --panels must be positive"));
            }
            let quad = QuadratureOptions { order, initial_panels: panels, ..QuadratureOptions::default() };
            thm31(&g, &f, n, &kappa, &time_grid(&times)?, &vertex, &quad, converse, format)
        }
        Command::Verify(VerifyCommand::Thm32 { graph, function, kappa, times, vertex }) => {
            let g = load_graph(&graph)?;
            let f = load_field(&function)?;
            thm32(&g, &f, &kappa, &time_grid(&times)?, &vertex, seed, format)
        }
        Command::Verify(VerifyCommand::Semigroup { graph, function, t, s }) => {
            let g = load_graph(&graph)?;
            let f = match function {
                Some(path) => load_field(&path)?,
                None => random_field(&g, seed),
            };
            semigroup(&g, &f, t, s, format)
        }
        Command::Verify(VerifyCommand::Lemma32 { graph, function, t, s, vertices }) => {
            let g = load_graph(&graph)?;
            let f = load_field(&function)?;
            let xs = select(&g, &vertices)?;
            lemma32(&g, &f, t, &s, &xs, format)
        }
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => invalid(format!("file not found: {}", path.display())),
        _ => invalid(format!("cannot read {}: {e}", path.display())),
    })
}

fn load_graph(path: &Path) -> CliResult<WeightedGraph> {
    parse_graph(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_field(path: &Path) -> CliResult<ScalarField> {
    ScalarField::parse(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn dimension(s: &str) -> CliResult<Dimension> {
    Ok(s.parse::<Dimension>()?)
}

fn select(g: &WeightedGraph, sel: &VertexSelection) -> CliResult<Vec<usize>> {
    if sel.all {
        return Ok((0..g.num_vertices()).collect());
    }
    Ok(VertexSet::from_ids(g, &sel.vertex)?.indices().to_vec())
}

fn subset_of(g: &WeightedGraph, ids: &[String]) -> CliResult<Option<VertexSet>> {
    if ids.is_empty() {
        Ok(None)
    } else {
        Ok(Some(VertexSet::from_ids(g, ids)?))
    }
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim().parse().map_err(|_| invalid(format!("invalid {what} {s:?}")))
}

fn time_grid(times: &TimeGrid) -> CliResult<Vec<f64>> {
    let grid = match &times.t_range {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(':').collect();
            let [start, stop, count] = parts[..] else {
                return Err(invalid(format!("--t-range expects start:stop:count, got {spec:?}")));
            };
            let (start, stop) = (parse_f64(start, "range start")?, parse_f64(stop, "range stop")?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| invalid(format!("invalid range count {count:?}")))?;
            if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) || count == 0 {
                return Err(invalid("--t-range needs positive finite endpoints and count >= 1"));
            }
            if count == 1 {
                vec![start]
            } else {
                let ratio = (stop / start).ln() / (count - 1) as f64;
                (0..count)
                    .map(|i| if i + 1 == count { stop } else { start * (ratio * i as f64).exp() })
                    .collect()
            }
        }
        None => times.t.clone(),
    };
    if let Some(bad) = grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid(format!("times must be positive and finite, got {bad}")));
    }
    Ok(grid)
}

fn parse_radii(spec: &str) -> CliResult<Vec<usize>> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| invalid(format!("invalid radius {s:?}")));
    if let Some((lo, hi)) = spec.split_once(':') {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(invalid(format!("empty radius range {spec:?}")));
        }
        Ok((lo..=hi).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn random_field(g: &WeightedGraph, seed: u64) -> ScalarField {
    let mut rng = seeded(derive_seed(seed, "semigroup-field"));
    let values: Vec<f64> = (0..g.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_dense(g, &values)
}

fn info(g: &WeightedGraph, format: Format) -> CliResult<Vec<u8>> {
    let stats = g.stats();
    render(format, "info", stats, || {
        let mut t = Table::new(vec!["num_vertices", "num_edges", "omega_min", "D_mu"]);
        t.push(vec![
            stats.num_vertices.to_string().into(),
            stats.num_edges.to_string().into(),
            stats.omega_min.into(),
            stats.d_mu.into(),
        ]);
        t
    })
}

fn generate_graph(args: &GenerateArgs, format: Format) -> CliResult<Vec<u8>> {
    let family: Family = args.family.parse()?;
    let params = GenerateParams {
        n: args.n,
        dim: args.dim,
        radius: args.radius,
        weight: args.weight,
        mu: args.mu,
    };
    let g = generate(family, &params)?;
    match format {
        Format::Json => {
            let mut bytes = g.to_json_versioned(1).into_bytes();
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => Err(invalid("generate writes graph JSON only; drop --format csv")),
    }
}

#[derive(Serialize)]
struct CurvatureBody {
    n: Dimension,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchEcho>,
    results: Vec<CurvatureResult>,
    #[serde(serialize_with = "cdforge::format::sig17")]
    min_k: f64,
}

#[derive(Serialize)]
struct SearchEcho {
    starts: usize,
    seed: u64,
    max_iter: usize,
    #[serde(serialize_with = "cdforge::format::sig17")]
    tol: f64,
}

fn curvature_output(
    command: &str,
    n: Dimension,
    opts: Option<SearchOptions>,
    results: Vec<CurvatureResult>,
    format: Format,
) -> CliResult<Vec<u8>> {
    let min_k = results.iter().map(|r| r.k_max).fold(f64::INFINITY, f64::min);
    let heuristic = opts.is_some();
    let table = |results: &[CurvatureResult]| {
        let mut header = vec!["vertex", "n", "k_max", "method", "certified"];
        if heuristic {
            header.extend(["spread", "converged"]);
        }
        let mut t = Table::new(header);
        for r in results {
            let mut row: Vec<Cell> = vec![
                r.vertex.clone().into(),
                n.to_string().into(),
                r.k_max.into(),
                (if heuristic { "heuristic_search" } else { "generalized_eigen" }).into(),
                r.certified.to_string().into(),
            ];
            if heuristic {
                row.push(r.spread.map_or(Cell::Text(String::new()), Cell::Num));
                row.push(r.converged.map_or(String::new(), |c| c.to_string()).into());
            }
            t.push(row);
        }
        t
    };
    match format {
        Format::Csv => render(format, command, (), || table(&results)),
        Format::Json => {
            let search = opts.map(|o| SearchEcho { starts: o.starts, seed: o.seed, max_iter: o.max_iter, tol: o.tol });
            json(command, CurvatureBody { n, search, results, min_k })
        }
    }
}

#[derive(Serialize)]
struct KernelRow {
    #[serde(serialize_with = "cdforge::format::sig17")]
    t: f64,
    x: String,
    y: String,
    #[serde(serialize_with = "cdforge::format::sig17")]
    value: f64,
    /// Ball radius of the Dirichlet domain; `null` for the whole graph.
    radius: Option<usize>,
}

#[derive(Serialize)]
struct KernelBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<String>,
    values: Vec<KernelRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    exhaustion: Vec<TimedDiagnostics>,
}

#[derive(Serialize)]
struct TimedDiagnostics {
    #[serde(serialize_with = "cdforge::format::sig17")]
    t: f64,
    converged: bool,
    monotone: bool,
    #[serde(serialize_with = "cdforge::format::sig17_opt")]
    last_change: Option<f64>,
    sequence: Vec<SequenceEntry>,
}

#[derive(Serialize)]
struct SequenceEntry {
    radius: usize,
    #[serde(serialize_with = "cdforge::format::sig17")]
    value: f64,
}

impl TimedDiagnostics {
    fn new(t: f64, d: ExhaustionDiagnostics) -> Self {
        TimedDiagnostics {
            t,
            converged: d.converged,
            monotone: d.monotone,
            last_change: d.last_change,
            sequence: d.sequence.into_iter().map(|(radius, value)| SequenceEntry { radius, value }).collect(),
        }
    }
}

fn kernel(g: &WeightedGraph, x: &str, y: &str, grid: &[f64], subset: &SubsetArgs, format: Format) -> CliResult<Vec<u8>> {
    let mut values = Vec::with_capacity(grid.len());
    let mut exhaustion = Vec::new();
    match (&subset.center, subset.radius, &subset.radii) {
        (Some(center), _, Some(radii)) => {
            let plan = ExhaustionPlan::new(center.clone(), parse_radii(radii)?)?;
            let runs = grid
                .par_iter()
                .map(|&t| exhaustion_kernel(g, &plan, t, x, y, subset.tol))
                .collect::<cdforge::Result<Vec<_>>>()?;
            for (&t, (value, diag)) in grid.iter().zip(runs) {
                let radius = diag.sequence.last().map(|&(r, _)| r);
                values.push(KernelRow { t, x: x.into(), y: y.into(), value: value.value, radius });
                exhaustion.push(TimedDiagnostics::new(t, diag));
            }
        }
        (Some(center), Some(radius), None) => {
            let ball = g.ball(center, radius)?;
            for &t in grid {
                let v = heat_kernel(g, &ball, t, x, y)?;
                values.push(KernelRow { t, x: x.into(), y: y.into(), value: v.value, radius: Some(radius) });
            }
        }
        (Some(_), None, None) => return Err(invalid("--center needs --radius or --radii")),
        (None, ..) => {
            let all = VertexSet::all(g);
            let spec = dirichlet_spectrum(g, &all)?;
            let (i, j) = (g.index_of(x)?, g.index_of(y)?);
            for &t in grid {
                let raw = spec.kernel(t, i, j);
                let value = if (-cdforge::heat::NEGATIVE_CLAMP..0.0).contains(&raw) { 0.0 } else { raw };
                values.push(KernelRow { t, x: x.into(), y: y.into(), value, radius: None });
            }
        }
    }
    let table = |values: &[KernelRow]| {
        let mut t = Table::new(vec!["t", "x", "y", "value", "radius"]);
        for r in values {
            t.push(vec![
                r.t.into(),
                r.x.clone().into(),
                r.y.clone().into(),
                r.value.into(),
                r.radius.map_or_else(|| "full".to_string(), |r| r.to_string()).into(),
            ]);
        }
        t
    };
    match format {
        Format::Csv => render(format, "heat kernel", (), || table(&values)),
        Format::Json => json("heat kernel", KernelBody { center: subset.center.clone(), values, exhaustion }),
    }
}

#[derive(Serialize)]
struct ApplyBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<usize>,
    results: Vec<ApplyRow>,
}

#[derive(Serialize)]
struct ApplyRow {
    #[serde(serialize_with = "cdforge::format::sig17")]
    t: f64,
    field: ScalarField,
}

fn apply(
    g: &WeightedGraph,
    f: &ScalarField,
    grid: &[f64],
    center: Option<&str>,
    radius: Option<usize>,
    format: Format,
) -> CliResult<Vec<u8>> {
    let set = match (center, radius) {
        (Some(c), Some(r)) => g.ball(c, r)?,
        (Some(_), None) => return Err(invalid("--center needs --radius")),
        _ => VertexSet::all(g),
    };
    let results = grid
        .par_iter()
        .map(|&t| cdforge::heat::apply_semigroup(g, &set, t, f).map(|field| ApplyRow { t, field }))
        .collect::<cdforge::Result<Vec<_>>>()?;
    let table = |results: &[ApplyRow]| {
        let mut t = Table::new(vec!["t", "vertex", "value"]);
        for r in results {
            for (id, &v) in &r.field.values {
                t.push(vec![r.t.into(), id.clone().into(), v.into()]);
            }
        }
        t
    };
    match format {
        Format::Csv => render(format, "heat apply", (), || table(&results)),
        Format::Json => json("heat apply", ApplyBody { center: center.map(str::to_string), radius, results }),
    }
}

#[derive(Serialize)]
struct InequalityBody {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Dimension>,
    #[serde(serialize_with = "cdforge::format::sig17")]
    kappa: f64,
    /// `given`, `certified` (eigen solver) or `heuristic` (CDE′ search).
    kappa_source: &'static str,
    #[serde(serialize_with = "cdforge::format::sig17_vec")]
    t: Vec<f64>,
    reports: Vec<InequalityReport>,
    summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    converse: Option<Vec<ConverseRow>>,
}

#[derive(Serialize)]
struct ConverseRow {
    vertex: String,
    #[serde(flatten)]
    check: TaylorCheck,
}

fn report_table(reports: &[InequalityReport]) -> Table {
    let mut t = Table::new(vec!["item", "vertex", "t", "lhs", "rhs", "margin"]);
    for r in reports {
        t.push(vec![
            r.item.as_str().into(),
            r.vertex.clone().into(),
            r.t.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.margin.into(),
        ]);
    }
    t
}

fn sorted(grid: &[f64]) -> Vec<f64> {
    let mut v = grid.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn kappa_value(bound: &CurvatureBound) -> CliResult<Option<f64>> {
    match bound.kappa.trim() {
        "auto" => Ok(None),
        s => {
            let k = parse_f64(s, "kappa")?;
            if !k.is_finite() {
                return Err(invalid(format!("kappa must be finite, got {s}")));
            }
            Ok(Some(k))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn thm31(
    g: &WeightedGraph,
    f: &ScalarField,
    n: Dimension,
    bound: &CurvatureBound,
    grid: &[f64],
    vertex: &[String],
    quad: &QuadratureOptions,
    converse: bool,
    format: Format,
) -> CliResult<Vec<u8>> {
    let (kappa, kappa_source) = match kappa_value(bound)? {
        Some(k) => (k, "given"),
        None => (cdforge::curvature::cd_global_k(g, n)?, "certified"),
    };
    let sg = HeatSemigroup::new(g)?;
    let subset = subset_of(g, vertex)?;
    let reports = verify_thm31(&sg, f, n, kappa, grid, subset.as_ref(), quad)?;
    let summary = summarize(&reports);
    let converse = if converse {
        let xs: Vec<usize> = match &subset {
            Some(s) => s.indices().to_vec(),
            None => (0..g.num_vertices()).collect(),
        };
        Some(
            xs.par_iter()
                .map(|&x| {
                    taylor_limit_check(&sg, f, n, kappa, g.id(x)).map(|check| ConverseRow { vertex: g.id(x).into(), check })
                })
                .collect::<cdforge::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    match format {
        Format::Csv => render(format, "verify thm31", (), || report_table(&reports)),
        Format::Json => json(
            "verify thm31",
            InequalityBody { n: Some(n), kappa, kappa_source, t: sorted(grid), reports, summary, converse },
        ),
    }
}

fn thm32(
    g: &WeightedGraph,
    f: &ScalarField,
    bound: &CurvatureBound,
    grid: &[f64],
    vertex: &[String],
    seed: u64,
    format: Format,
) -> CliResult<Vec<u8>> {
    let (kappa, kappa_source) = match kappa_value(bound)? {
        Some(k) => (k, "given"),
        None => {
            let opts = SearchOptions { seed, ..SearchOptions::default() };
            let all = cdforge::curvature::cde_search_k_all(g, Dimension::Infinite, &opts)?;
            (all.iter().map(|r| r.k_max).fold(f64::INFINITY, f64::min), "heuristic")
        }
    };
    let sg = HeatSemigroup::new(g)?;
    let subset = subset_of(g, vertex)?;
    let reports = verify_thm32(&sg, f, kappa, grid, subset.as_ref())?;
    let summary = summarize(&reports);
    match format {
        Format::Csv => render(format, "verify thm32", (), || report_table(&reports)),
        Format::Json => json(
            "verify thm32",
            InequalityBody { n: None, kappa, kappa_source, t: sorted(grid), reports, summary, converse: None },
        ),
    }
}

#[derive(Serialize)]
struct SemigroupBody {
    #[serde(serialize_with = "cdforge::format::sig17")]
    t: f64,
    #[serde(serialize_with = "cdforge::format::sig17")]
    s: f64,
    kernel: KernelProperties,
    semigroup: SemigroupProperties,
}

fn semigroup(g: &WeightedGraph, f: &ScalarField, t: f64, s: f64, format: Format) -> CliResult<Vec<u8>> {
    if !(t > 0.0 && s > 0.0 && t.is_finite() && s.is_finite()) {
        return Err(invalid("--t and --s must be positive and finite"));
    }
    let sg = HeatSemigroup::new(g)?;
    let kernel = kernel_properties(&sg, t, s);
    let semigroup = semigroup_properties(&sg, &f.to_dense(g)?, t, s)?;
    let table = || {
        let mut tab = Table::new(vec!["property", "value"]);
        let rows: [(&str, f64); 11] = [
            ("symmetry", kernel.symmetry),
            ("min_value", kernel.min_value),
            ("row_sum_deviation", kernel.row_sum_deviation),
            ("small_time_row_sum_deviation", kernel.small_time_row_sum_deviation),
            ("small_time_identity", kernel.small_time_identity),
            ("heat_equation", kernel.heat_equation),
            ("chapman_kolmogorov", kernel.chapman_kolmogorov),
            ("semigroup_law", semigroup.semigroup_law),
            ("commutation", semigroup.commutation),
            ("matrix_exponential", semigroup.matrix_exponential),
            ("contraction_excess", semigroup.contraction_excess),
        ];
        for (name, v) in rows {
            tab.push(vec![name.into(), v.into()]);
        }
        tab
    };
    render(format, "verify semigroup", SemigroupBody { t, s, kernel, semigroup }, table)
}

#[derive(Serialize)]
struct Lemma32Body {
    #[serde(serialize_with = "cdforge::format::sig17")]
    t: f64,
    #[serde(serialize_with = "cdforge::format::sig17")]
    max_error: f64,
    reports: Vec<Lemma32Report>,
}

fn lemma32(g: &WeightedGraph, f: &ScalarField, t: f64, s: &[f64], xs: &[usize], format: Format) -> CliResult<Vec<u8>> {
    let sg = HeatSemigroup::new(g)?;
    let reports = xs
        .par_iter()
        .map(|&x| lemma32_derivative_check(&sg, f, t, s, g.id(x)))
        .collect::<cdforge::Result<Vec<_>>>()?;
    let max_error = reports.iter().map(|r| r.max_error).fold(0.0, f64::max);
    let table = |reports: &[Lemma32Report]| {
        let mut tab = Table::new(vec!["vertex", "functional", "s", "finite_difference", "identity", "error"]);
        for r in reports {
            for smp in &r.samples {
                let name = serde_json::to_value(smp.functional)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                tab.push(vec![
                    r.vertex.clone().into(),
                    name.into(),
                    smp.s.into(),
                    smp.finite_difference.into(),
                    smp.identity.into(),
                    smp.error.into(),
                ]);
            }
        }
        tab
    };
    match format {
        Format::Csv => render(format, "verify lemma32", (), || table(&reports)),
        Format::Json => json("verify lemma32", Lemma32Body { t, max_error, reports }),
    }
}
