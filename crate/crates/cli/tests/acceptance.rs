//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cdforge::curvature::{cd_global_k, cd_max_k, cd_max_k_all, cde_search_k_all, Dimension, SearchOptions};
use cdforge::gamma::{gamma2_at, gamma2_tilde_at, gamma_all, gamma_at};
use cdforge::generate::{generate, Family, GenerateParams};
use cdforge::heat::{exhaustion_kernel, HeatSemigroup};
use cdforge::heat_properties::{kernel_properties, semigroup_properties};
use cdforge::inequalities::{lemma32_derivative_check, taylor_limit_check, verify_thm31, verify_thm32, Item};
use cdforge::quadrature::QuadratureOptions;
use cdforge::{ExhaustionPlan, ScalarField};
use rand::Rng as _;

use common::{corpus, positive_field, random_field, random_graph, rng};

const T_GRID: [f64; 6] = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion(id: usize, name: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = out.passed && in_time;
    let budget = limit.map_or_else(|| "no limit".to_string(), |l| format!("limit {} s", l.as_secs_f64()));
    println!(
        "{} [{id:>2}] {name}: {} ({:.3} s, {budget}{})",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        if in_time { "" } else { ", over time" },
    );
    passed
}

fn secs(s: f64) -> Option<Duration> {
    Some(Duration::from_secs_f64(s))
}

fn exact_curvature_p2() -> Outcome {
    let p2 = generate(Family::Path, &GenerateParams::with_n(2)).unwrap();
    let mut worst = 0.0f64;
    for n in [Dimension::Finite(1.0), Dimension::Finite(2.0), Dimension::Finite(4.0), Dimension::Infinite] {
        let expected = 2.0 - 2.0 * n.inverse();
        for r in cd_max_k_all(&p2, n).unwrap() {
            worst = worst.max((r.k_max - expected).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |k_max - (2 - 2/n)| = {worst:.3e} over n in {{1,2,4,inf}}"))
}

fn complete_graph_curvature() -> Outcome {
    let k3 = generate(Family::Complete, &GenerateParams::with_n(3)).unwrap();
    let exact = cd_max_k_all(&k3, Dimension::Infinite).unwrap();
    let eig_err = exact.iter().map(|r| (r.k_max - 2.5).abs()).fold(0.0, f64::max);
    let x = k3.index_of("0").unwrap();
    let mut rng = rng(2);
    let mut best = f64::INFINITY;
    for _ in 0..100_000 {
        let f = random_field(&mut rng, &k3);
        let gam = gamma_at(&k3, &f, &f, x);
        if gam > 1e-12 {
            best = best.min(gamma2_at(&k3, &f, &f, x) / gam);
        }
    }
    let beaten_by = exact[x].k_max - best;
    outcome(
        eig_err <= 1e-8 && beaten_by <= 1e-6,
        format!("|k_max - 2.5| = {eig_err:.3e}; random-search infimum {best:.9} (below eigen value by {beaten_by:.3e})"),
    )
}

fn gamma2_tilde_identity() -> Outcome {
    let mut worst = 0.0f64;
    for (_, g) in corpus() {
        for seed in 0..100 {
            let mut rng = rng(1000 + seed);
            let f = common::random_positive(&mut rng, &g, 0.1, 5.0);
            let gam = gamma_all(&g, &f, &f);
            let ratio: Vec<f64> = gam.iter().zip(&f).map(|(a, b)| a / b).collect();
            for x in 0..g.num_vertices() {
                let direct = gamma2_tilde_at(&g, &f, x);
                let g2 = gamma2_at(&g, &f, &f, x);
                let corr = gamma_at(&g, &f, &ratio, x);
                let scale = g2.abs().max(corr.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((direct - (g2 - corr)).abs() / scale);
            }
        }
    }
    outcome(worst <= 1e-11, format!("max relative gap {worst:.3e} over 100 seeds x corpus"))
}

fn remark21_suite() -> Outcome {
    let mut rng = rng(21);
    let (mut sym, mut min_val, mut rows, mut small, mut heq, mut ck) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(2..=40);
        let g = random_graph(&mut rng, n, (3.0 / n as f64).min(1.0));
        let sg = HeatSemigroup::new(&g).unwrap();
        let t = rng.gen_range(0.05..3.0);
        let s = rng.gen_range(0.05..3.0);
        let p = kernel_properties(&sg, t, s);
        sym = sym.max(p.symmetry);
        min_val = min_val.min(p.min_value);
        rows = rows.max(p.row_sum_deviation);
        small = small.max(p.small_time_identity).max(p.small_time_row_sum_deviation);
        heq = heq.max(p.heat_equation);
        ck = ck.max(p.chapman_kolmogorov);
    }
    let passed = sym <= 1e-10 && min_val >= -1e-12 && rows <= 1e-10 && small <= 1e-6 && ck <= 1e-9 && heq <= 1e-6;
    outcome(
        passed,
        format!(
            "symmetry {sym:.2e}, min p {min_val:.2e}, |row sum - 1| {rows:.2e}, t->0 identity {small:.2e}, heat eq {heq:.2e}, Chapman-Kolmogorov {ck:.2e}"
        ),
    )
}

fn semigroup_propositions() -> Outcome {
    let mut rng = rng(22);
    let (mut law, mut comm, mut expm, mut contraction) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..50 {
        let n = rng.gen_range(2..=30);
        let g = random_graph(&mut rng, n, (3.0 / n as f64).min(1.0));
        let sg = HeatSemigroup::new(&g).unwrap();
        let f = random_field(&mut rng, &g);
        let (t, s) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..5.0));
        let p = semigroup_properties(&sg, &f, t, s).unwrap();
        law = law.max(p.semigroup_law);
        comm = comm.max(p.commutation);
        expm = expm.max(p.matrix_exponential);
        contraction = contraction.max(p.contraction_excess);
    }
    outcome(
        law <= 1e-9 && comm <= 1e-9 && expm <= 1e-9 && contraction <= 1e-12,
        format!("semigroup law {law:.2e}, commutation {comm:.2e}, vs matrix exponential {expm:.2e}, contraction excess {contraction:.2e}"),
    )
}

fn bessel_i0(x: f64) -> f64 {
    // Σ (x/2)^{2k}/(k!)²
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

fn exhaustion_vs_bessel() -> Outcome {
    let host = generate(Family::LatticeBall, &GenerateParams::lattice(1, 30)).unwrap();
    let plan = ExhaustionPlan::new("0", (2..=29).collect()).unwrap();
    let (value, diag) = exhaustion_kernel(&host, &plan, 1.0, "0", "0", 1e-8).unwrap();
    let oracle = (-2.0f64).exp() * bessel_i0(2.0);
    let err = (value.value - oracle).abs();
    outcome(
        err <= 1e-6 && diag.monotone && diag.converged,
        format!(
            "p = {:.10} vs e^-2 I0(2) = {oracle:.10} (err {err:.2e}), {} radii, min step {:.2e}",
            value.value,
            diag.sequence.len(),
            diag.min_step.unwrap_or(0.0)
        ),
    )
}

fn thm31_forward() -> Outcome {
    let quad = QuadratureOptions::default();
    let mut worst = f64::INFINITY;
    let mut worst_at = String::new();
    for (name, g) in corpus() {
        let sg = HeatSemigroup::new(&g).unwrap();
        for n in [Dimension::Infinite, Dimension::Finite(4.0)] {
            let kappa = cd_global_k(&g, n).unwrap();
            let mut rng = rng(31);
            for _ in 0..50 {
                let f = positive_field(&mut rng, &g);
                for r in verify_thm31(&sg, &f, n, kappa, &T_GRID, None, &quad).unwrap() {
                    if r.margin < worst {
                        worst = r.margin;
                        worst_at = format!("{name} n={n} {} t={}", r.item.as_str(), r.t);
                    }
                }
            }
        }
    }
    let p2 = generate(Family::Path, &GenerateParams::with_n(2)).unwrap();
    let sg = HeatSemigroup::new(&p2).unwrap();
    let f = ScalarField::from_pairs(&[("0", 1.0), ("1", 3.0)], 1.0);
    let equality = verify_thm31(&sg, &f, Dimension::Infinite, 2.0, &T_GRID, None, &quad)
        .unwrap()
        .iter()
        .filter(|r| r.item == Item::C32_1)
        .map(|r| r.margin.abs())
        .fold(0.0, f64::max);
    outcome(
        worst >= -1e-8 && equality <= 1e-10,
        format!("min margin {worst:.3e} ({worst_at}); P2 equality case |margin| <= {equality:.2e}"),
    )
}

fn lemma32() -> Outcome {
    let mut worst = 0.0f64;
    for (_, g) in corpus() {
        let sg = HeatSemigroup::new(&g).unwrap();
        let mut rng = rng(32);
        for _ in 0..5 {
            let f = positive_field(&mut rng, &g);
            for x in g.ids() {
                let r = lemma32_derivative_check(&sg, &f, 1.0, &[0.0, 0.25, 0.5], x).unwrap();
                worst = worst.max(r.max_error);
            }
        }
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.3e}"))
}

fn taylor_converse() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    let mut flip = f64::NEG_INFINITY;
    for (_, g) in corpus() {
        let sg = HeatSemigroup::new(&g).unwrap();
        let mut rng = rng(9);
        for _ in 0..5 {
            let f = ScalarField::from_dense(&g, &random_field(&mut rng, &g));
            for x in g.ids() {
                let c = taylor_limit_check(&sg, &f, Dimension::Finite(4.0), 1.0, x).unwrap();
                if c.relative {
                    worst_rel = worst_rel.max(c.error);
                } else {
                    worst_abs = worst_abs.max(c.error);
                }
            }
        }
        for x in g.ids() {
            let r = cd_max_k(&g, x, Dimension::Infinite).unwrap();
            let c = taylor_limit_check(&sg, &r.minimizer, Dimension::Infinite, r.k_max + 0.1, x).unwrap();
            flip = flip.max(c.margin);
        }
    }
    outcome(
        worst_rel <= 1e-4 && worst_abs <= 1e-6 && flip <= -1e-3,
        format!("relative error {worst_rel:.2e}, absolute error {worst_abs:.2e}; margin at k_max + 0.1 <= {flip:.3e}"),
    )
}

fn thm32_forward() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut worst_spread = 0.0f64;
    let mut worst_at = String::new();
    for (name, g) in corpus() {
        let per_seed: Vec<Vec<f64>> = (1..=5)
            .map(|seed| {
                let opts = SearchOptions { seed, ..SearchOptions::default() };
                cde_search_k_all(&g, Dimension::Infinite, &opts).unwrap().iter().map(|r| r.k_max).collect()
            })
            .collect();
        for x in 0..g.num_vertices() {
            let (lo, hi) = per_seed.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[x]), hi.max(v[x])));
            worst_spread = worst_spread.max(hi - lo);
        }
        let kappa = per_seed[0].iter().copied().fold(f64::INFINITY, f64::min);
        let sg = HeatSemigroup::new(&g).unwrap();
        let mut rng = rng(10);
        for _ in 0..20 {
            let f = positive_field(&mut rng, &g);
            for r in verify_thm32(&sg, &f, kappa, &T_GRID, None).unwrap() {
                if r.margin < worst {
                    worst = r.margin;
                    worst_at = format!("{name} kappa={kappa:.6} t={}", r.t);
                }
            }
        }
    }
    outcome(
        worst >= -1e-8 && worst_spread <= 1e-4,
        format!("min margin {worst:.3e} ({worst_at}); cross-seed spread {worst_spread:.2e}"),
    )
}

fn cdforge(args: &[&str], threads: usize) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cdforge"))
        .args(args)
        .args(["--threads", &threads.to_string(), "--seed", "7"])
        .env_remove("CDFORGE_THREADS")
        .output()
        .expect("cdforge binary runs")
}

/// Writes the corpus and test functions, returns the argument lists of the
/// CLI suite.
fn cli_suite(dir: &Path) -> Vec<Vec<String>> {
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut suite = Vec::new();
    for (name, family, size) in [("p2", "path", "--n=2"), ("k3", "complete", "--n=3"), ("s4", "star", "--n=4"), ("c5", "cycle", "--n=5"), ("q3", "hypercube", "--dim=3")] {
        let graph = path(&format!("{name}.json"));
        let out = cdforge(&["generate", family, size, "--out", &graph], 1);
        assert!(out.status.success(), "generate {family} failed");
        let g = cdforge::graph::parse_graph(&std::fs::read_to_string(&graph).unwrap()).unwrap();
        let mut rng = rng(11);
        let function = path(&format!("{name}_f.json"));
        std::fs::write(&function, positive_field(&mut rng, &g).to_json()).unwrap();
        let x = g.id(0).to_string();
        let args: Vec<Vec<&str>> = vec![
            vec!["info", &graph],
            vec!["curvature", "cd", "--graph", &graph, "--dim", "inf", "--all"],
            vec!["curvature", "cd", "--graph", &graph, "--dim", "3", "--all", "--format", "csv"],
            vec!["heat", "kernel", "--graph", &graph, "--x", &x, "--y", &x, "--t-range", "0.01:10:7"],
            vec!["heat", "apply", "--graph", &graph, "--function", &function, "--t", "0.5,1,2"],
            vec!["verify", "thm31", "--graph", &graph, "--function", &function, "--dim", "4", "--kappa", "auto", "--t", "0.1,1", "--converse"],
            vec!["verify", "thm31", "--graph", &graph, "--function", &function, "--dim", "inf", "--kappa", "0", "--t", "0.5", "--format", "csv"],
            vec!["verify", "semigroup", "--graph", &graph, "--t", "0.7", "--s", "0.3"],
            vec!["verify", "lemma32", "--graph", &graph, "--function", &function, "--all"],
        ];
        suite.extend(args.into_iter().map(|a| a.into_iter().map(String::from).collect::<Vec<_>>()));
        if matches!(name, "k3" | "c5") {
            let cde: Vec<&str> = vec!["curvature", "cde", "--graph", &graph, "--dim", "inf", "--all", "--starts", "6"];
            suite.push(cde.into_iter().map(String::from).collect());
            let thm32: Vec<&str> = vec!["verify", "thm32", "--graph", &graph, "--function", &function, "--kappa", "auto", "--t", "0.1,1"];
            suite.push(thm32.into_iter().map(String::from).collect());
        }
    }
    let host = path("z30.json");
    assert!(cdforge(&["generate", "lattice_ball", "--dim", "1", "--radius", "30", "--out", &host], 1).status.success());
    let exhaust = ["heat", "kernel", "--graph", &host, "--x", "0", "--y", "1", "--t", "0.5,1", "--center", "0", "--radii", "2:29"];
    suite.push(exhaust.iter().map(|s| s.to_string()).collect());
    suite
}

fn cli_determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let suite = cli_suite(&dir);
    let mut mismatches = Vec::new();
    let mut failures = Vec::new();
    for args in &suite {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let runs: Vec<_> = [1, 8, 8].iter().map(|&threads| cdforge(&args, threads)).collect();
        if let Some(bad) = runs.iter().find(|r| !r.status.success()) {
            failures.push(format!("{} ({})", args[..2].join(" "), String::from_utf8_lossy(&bad.stderr).trim()));
            continue;
        }
        if runs.windows(2).any(|w| w[0].stdout != w[1].stdout) {
            mismatches.push(args[..2].join(" "));
        }
    }
    outcome(
        mismatches.is_empty() && failures.is_empty(),
        format!(
            "{} commands x threads {{1, 8, 8}}: {} mismatched, {} failed{}",
            suite.len(),
            mismatches.len(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let results = [
        criterion(1, "exact curvature on P2", secs(0.1), exact_curvature_p2),
        criterion(2, "complete-graph curvature", secs(5.0), complete_graph_curvature),
        criterion(3, "modified iterated form identity", secs(2.0), gamma2_tilde_identity),
        criterion(4, "heat kernel properties", secs(30.0), remark21_suite),
        criterion(5, "semigroup law and matrix exponential", secs(10.0), semigroup_propositions),
        criterion(6, "exhaustion vs Bessel series", secs(5.0), exhaustion_vs_bessel),
        criterion(7, "gradient and Poincare bounds under CD", secs(60.0), thm31_forward),
        criterion(8, "derivative identities", secs(10.0), lemma32),
        criterion(9, "small-time converse", secs(10.0), taylor_converse),
        criterion(10, "gradient bound under CDE'", secs(30.0), thm32_forward),
        criterion(11, "CLI determinism across thread counts", None, cli_determinism),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
