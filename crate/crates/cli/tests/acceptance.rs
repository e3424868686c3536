//! Acceptance criteria: one pass/fail line per criterion, nonzero exit on any failure.
//!
//! Set `INEQLAB_BLESS=1` to rewrite the frozen regression corpus instead of checking it.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ineqlab::complexify::bridge_report;
use ineqlab::embeddings::{composite_grid_distortion, grid_round_sandwich, integer_grid, psi, schoenberg_embed, theta, GridEmbedding, Metric};
use ineqlab::families::{random_grid, random_hypercube, random_vectors, seeded};
use ineqlab::inequalities::{convolution_probe, displacement_report, linear_xp_report, metric_xp_report, reverse_metric_xp_report, smoothness_report, LinearMode, SmoothnessKind};
use ineqlab::lattice::{doubled_set_vs_diagonal, gap_moment_estimate, set_shift_vs_edges, subset_gap_moment};
use ineqlab::linalg::{random_psd, Mat, SymMatrix};
use ineqlab::operators::{character, complex_inner, rad_identity_max_residual};
use ineqlab::schatten::{khinchine_report, psd_counterexample, psd_xp_report, schatten_xp_report, TraceKind};
use ineqlab::{make_sample_plan, Displacement, LatticePoint, SamplePlan, SignLaw, SignVector};
use ineqlab_cli::verify::{geodesic_failures, psd_pairs, rosenthal_slope, trace_violations};
use rand::Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn sets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..1usize << n).map(move |mask| (0..n).filter(|j| mask >> j & 1 == 1).collect())
}

fn points(modulus: usize, n: usize) -> Vec<Vec<i64>> {
    (0..modulus.pow(n as u32))
        .map(|mut i| {
            (0..n)
                .map(|_| {
                    let c = (i % modulus) as i64;
                    i /= modulus;
                    c
                })
                .collect()
        })
        .collect()
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn rademacher_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 1..=3 {
        for m in 1..=2 {
            let modulus = 8 * m;
            for seed in 0..100 {
                let f = random_grid(modulus, n, 1, 2.0, 1000 * n as u64 + 100 * m as u64 + seed)?;
                worst = worst.max(rad_identity_max_residual(&f)?);
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Ok((worst < 1e-9 && within(Duration::from_secs(5), elapsed), format!("{count} functions, max residual {worst:.2e}, {:.2}s", elapsed.as_secs_f64())))
}

fn character_orthonormality() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=2 {
        let ys = points(8, n);
        let chars = ys.iter().map(|y| character(&LatticePoint::new(y, 8)?)).collect::<Result<Vec<_>, _>>()?;
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let (re, im) = complex_inner(a, b)?;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((re - target).abs()).max(im.abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max Gram deviation {worst:.2e}")))
}

fn enflo_type_two() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for seed in 0..200 {
            let h = random_hypercube(n, 1, 2.0, 7000 + seed)?;
            worst = worst.max(smoothness_report(&h, SmoothnessKind::Enflo { r: 2.0 })?.implied_constant.unwrap_or(0.0));
        }
    }
    Ok((worst <= 1.0 + 1e-12, format!("max implied constant {worst:.15}")))
}

fn set_shift_constants() -> Outcome {
    let (mut set_edges, mut doubled) = (0.0f64, 0.0f64);
    for (modulus, n) in [(8, 2), (4, 3)] {
        for p in [2.0, 4.0] {
            for seed in 0..100 {
                let f = random_grid(modulus, n, 1, p, 500 + seed)?;
                for set in sets(n) {
                    for signs in 0..1usize << n {
                        let eps: Vec<i64> = (0..n).map(|j| if signs >> j & 1 == 1 { -1 } else { 1 }).collect();
                        let (lhs, rhs) = set_shift_vs_edges(&f, &SignVector::new(eps, SignLaw::Rademacher)?, &set, p)?;
                        set_edges = set_edges.max(lhs / rhs);
                    }
                    let (lhs, rhs) = doubled_set_vs_diagonal(&f, &set, p)?;
                    doubled = doubled.max(lhs / rhs);
                }
            }
        }
    }
    let ok = set_edges <= 1.0 + 1e-10 && doubled <= 1.0 + 1e-10;
    Ok((ok, format!("max ratio |S|^(p-1) bound {set_edges:.6}, 2^p bound {doubled:.6}")))
}

fn geodesics() -> Outcome {
    let f = geodesic_failures()?;
    Ok((f.iter().all(|&c| c == 0), format!("failures endpoints/steps/injective/equivariant = {f:?}")))
}

fn rosenthal_exponent() -> Outcome {
    let start = Instant::now();
    let slope = rosenthal_slope(3.0, 6.0)?;
    let elapsed = start.elapsed();
    let ok = (slope - 1.0 / 12.0).abs() <= 0.02 && within(Duration::from_secs(10), elapsed);
    Ok((ok, format!("slope {slope:.5} vs 1/12, {:.3}s", elapsed.as_secs_f64())))
}

fn schoenberg_grid() -> Outcome {
    let q = 3.0;
    let grid = integer_grid(4, 2)?;
    let image = schoenberg_embed(&grid, q)?;
    let l2 = Metric::lp(2.0);
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..i {
            worst = worst.max(rel(l2.distance(&image[i], &image[j]), l2.distance(&grid[i], &grid[j]).powf(2.0 / q)));
        }
    }
    let composite = composite_grid_distortion(4, 2, q, 4.0, GridEmbedding::Schoenberg, 4096)?.distortion;
    let bound = 4f64.powf(1.0 / 3.0);
    Ok((worst <= 1e-8 && composite <= bound + 1e-9, format!("{} points, snowflake error {worst:.2e}, distortion {composite:.9} vs {bound:.9}", grid.len())))
}

fn grid_rounding() -> Outcome {
    let mut failures = 0;
    let mut cases = 0;
    for m in 2..=8 {
        for n in 1..=2 {
            for q in [2.0, 3.0, 4.0] {
                let s = grid_round_sandwich(m, n, q)?;
                failures += usize::from(!s.lower_holds) + usize::from(!s.upper_holds);
                cases += 1;
            }
        }
    }
    Ok((failures == 0, format!("{cases} cases, {failures} failed bounds")))
}

fn psi_checkpoints() -> Outcome {
    let mut rng = seeded(2024);
    let (mut worst, mut bracket) = (0.0f64, 0);
    for _ in 0..20 {
        let q = rng.random_range(2.01..11.9);
        let p = rng.random_range(q + 0.01..=12.0);
        let t = theta(p, q);
        worst = worst.max((psi(p, q, 0.0) + p).abs()).max((psi(p, q, q / p) + (p - q)).abs()).max(psi(p, q, t).abs());
        bracket += usize::from(!(q / p < t && t < 1.0 - (p - q) * (q - 2.0) / (2.0 * p.powi(3))));
    }
    Ok((worst <= 1e-10 && bracket == 0, format!("max checkpoint error {worst:.2e}, {bracket} bracket failures")))
}

fn trace_inequalities() -> Outcome {
    let start = Instant::now();
    let pairs = psd_pairs(2..=6, 1000, 99);
    let mut configs: Vec<(f64, TraceKind)> = Vec::new();
    configs.extend([1.0, 1.5, 2.0, 2.7, 4.0, 7.0].map(|q| (q, TraceKind::MainQge1)));
    configs.extend([0.25, 0.5, 0.9].map(|q| (q, TraceKind::Qlt1)));
    configs.extend([1.0, 1.5, 3.0].map(|r| (r, TraceKind::LiebThirring)));
    configs.extend([1.0, 1.5, 2.0].map(|t| (t, TraceKind::OpConvex { s: 0.3 })));
    let mut bad = 0;
    for (q, kind) in &configs {
        bad += trace_violations(&pairs, *q, kind, 1e-8)?;
    }
    let elapsed = start.elapsed();
    let ok = bad == 0 && within(Duration::from_secs(60), elapsed);
    Ok((ok, format!("{} configurations x {} pairs, {bad} violations, {:.2}s", configs.len(), pairs.len(), elapsed.as_secs_f64())))
}

fn psd_counterexample_check() -> Outcome {
    let mut worst = 0.0f64;
    for s in [0.5, 0.1, 0.01] {
        let r = psd_counterexample(s, 4.0, 2.0)?;
        worst = worst.max(rel(r.form, -s.powi(6) - 3.0 * s.powi(8) + s.powi(10)));
    }
    let min = psd_counterexample(0.1, 4.0, 2.0)?.min_eigenvalue;
    Ok((worst <= 1e-12 && min < 0.0, format!("form error {worst:.2e}, min eigenvalue at s=0.1 {min:.3e}")))
}

fn scalar_reduction() -> Outcome {
    let mut rng = seeded(12);
    let mut mismatches = 0;
    for case in 0..50u64 {
        let n = rng.random_range(2..=7);
        let k = rng.random_range(1..=n);
        let p = rng.random_range(2.0..6.0);
        let a = random_vectors(n, 1, 300 + case);
        let mats = a.iter().map(|v| Mat::from_rows(std::slice::from_ref(v))).collect::<Result<Vec<_>, _>>()?;
        let budget = if case % 2 == 0 { 1_000_000 } else { 500 };
        let plan = make_sample_plan(1, n, k, budget, case)?;
        let lin = linear_xp_report(&a, k, p, LinearMode::Rademacher, &plan)?;
        let sch = schatten_xp_report(&mats, k, p, &plan)?;
        if lin.lhs != sch.lhs || lin.rhs_terms != sch.rhs_terms || lin.implied_constant != sch.implied_constant {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("50 instances, {mismatches} differ")))
}

fn diagonal_khinchine() -> Outcome {
    let (d, n) = (4, 5);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let diags = random_vectors(n, d, 40 + seed);
        let mats: Vec<Mat> = diags
            .iter()
            .map(|v| {
                let mut m = Mat::zeros(d, d);
                v.iter().enumerate().for_each(|(i, x)| m.set(i, i, *x));
                m
            })
            .collect();
        for p in [1.0, 2.0, 3.0, 4.5] {
            let r = khinchine_report(&mats, p, &SamplePlan::exhaustive())?;
            let mut lhs = 0.0;
            for signs in 0..1usize << n {
                for i in 0..d {
                    let s: f64 = diags.iter().enumerate().map(|(j, v)| if signs >> j & 1 == 1 { -v[i] } else { v[i] }).sum();
                    lhs += s.abs().powf(p);
                }
            }
            lhs /= (1usize << n) as f64;
            let square: f64 = (0..d).map(|i| diags.iter().map(|v| v[i] * v[i]).sum::<f64>().powf(p / 2.0)).sum();
            worst = worst.max(rel(r.lhs, lhs)).max(rel(r.rhs_terms["column"], square)).max(rel(r.rhs_terms["row"], square));
        }
    }
    Ok((worst <= 1e-10, format!("max relative error {worst:.2e}")))
}

fn bridge_arithmetic() -> Outcome {
    let z = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let r = bridge_report(&z, 2, 1, 4.0, &SamplePlan::exhaustive())?;
    let failed: Vec<&String> = r.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k).collect();
    let d = &r.details;
    Ok((
        failed.is_empty() && !r.checks.is_empty(),
        format!(
            "metric lhs {:.4e}, z0 {:.4}, contraction {:.4} of bound, failed {failed:?}",
            d["metric_lhs"],
            d["z0_term"] / d["z0_bound"],
            d["contraction_worst"] / d["contraction_bound"]
        ),
    ))
}

fn monte_carlo_consistency() -> Outcome {
    let mut hits = 0;
    let mut worst = 0.0f64;
    let budget = 100_000;
    for case in 0..20u64 {
        let (modulus, n) = [(8, 2), (4, 3), (8, 3), (16, 2)][case as usize % 4];
        let p = [1.0, 2.0, 3.0, 4.5][(case / 4) as usize % 4];
        let f = random_grid(modulus, n, 2, p, 900 + case)?;
        let mc = SamplePlan::monte_carlo(n, 1, budget, case);
        let exact = SamplePlan::exhaustive();
        let (a, b) = if case % 5 == 4 {
            (subset_gap_moment(&f, 1, 2, p, &exact, "mc")?, subset_gap_moment(&f, 1, 2, p, &mc, "mc")?)
        } else {
            let disp = [Displacement::Diagonal, Displacement::SymmetricDiagonal, Displacement::Edge(0), Displacement::ShiftedSet { set: vec![0, 1], scale: 3 }][case as usize % 4].clone();
            (gap_moment_estimate(&f, &disp, SignLaw::Rademacher, p, &exact, "mc")?, gap_moment_estimate(&f, &disp, SignLaw::Rademacher, p, &mc, "mc")?)
        };
        let z = if b.std_err > 0.0 { (a.mean - b.mean).abs() / b.std_err } else if a.mean == b.mean { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        hits += usize::from(z <= 3.0);
    }
    Ok((hits >= 19, format!("{hits}/20 within 3 standard errors, largest z {worst:.2}")))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["run", "metric-xp", "--m", "1", "--n", "3", "--k", "2", "--p", "3", "--seed", "7", "--budget", "2000"],
        &["run", "trace", "--d", "4", "--q", "2.7", "--seed", "3"],
        &["run", "schatten-xp", "--n", "6", "--k", "3", "--d", "3", "--p", "3", "--seed", "5", "--budget", "300"],
        &["run", "rosenthal-distortion", "--n", "64", "--q", "3", "--p", "6"],
    ];
    let bin = env!("CARGO_BIN_EXE_ineqlab");
    let mut differing = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = Command::new(bin).arg("--deterministic").args(args).output()?;
            if !matches!(out.status.code(), Some(0 | 2)) || out.stdout.is_empty() {
                return Ok((false, format!("{} failed: {}", args[1], String::from_utf8_lossy(&out.stderr))));
            }
            outputs.push(out.stdout);
        }
        if outputs[0] != outputs[1] {
            differing.push(args[1]);
        }
    }
    Ok((differing.is_empty(), format!("{} experiments run twice, differing: {differing:?}", runs.len())))
}

fn corpus() -> Result<BTreeMap<String, f64>, Box<dyn std::error::Error>> {
    let mut out = BTreeMap::new();
    let exact = SamplePlan::exhaustive();
    let mut put = |name: String, value: Option<f64>| out.insert(name, value.unwrap_or(f64::NAN));
    for seed in 0..4u64 {
        let p = 2.0 + seed as f64 * 0.5;
        let f = random_grid(8, 2, 2, p, seed)?;
        put(format!("metric_xp/{seed}"), metric_xp_report(&f, 1, &exact)?.implied_constant);
        let g = random_grid(8, 3, 1, p, 10 + seed)?;
        put(format!("metric_xp_mc/{seed}"), metric_xp_report(&g, 2, &make_sample_plan(8, 3, 2, 5000, seed)?)?.implied_constant);
        put(format!("reverse_metric_xp/{seed}"), reverse_metric_xp_report(&f, 1, &exact)?.implied_constant);
        put(format!("displacement/{seed}"), displacement_report(&g, &[0, 2], 3)?.implied_constant);
        let h = random_grid(8, 2, 1, p, 20 + seed)?;
        put(format!("convolution_probe/{seed}"), convolution_probe(&h)?.implied_constant);
        let mut rng = seeded(30 + seed);
        let mats: Vec<SymMatrix> = (0..4).map(|_| random_psd(&mut rng, 3)).collect();
        put(format!("psd_xp/{seed}"), psd_xp_report(&mats, 2, p, &exact)?.implied_constant);
    }
    Ok(out)
}

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/regression.json")
}

fn regression_corpus() -> Outcome {
    let current = corpus()?;
    let path = corpus_path();
    if std::env::var_os("INEQLAB_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().expect("corpus path has a parent"))?;
        std::fs::write(&path, serde_json::to_string_pretty(&current)? + "\n")?;
        return Ok((true, format!("wrote {} values to {}", current.len(), path.display())));
    }
    let frozen: BTreeMap<String, f64> = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    let mut worst = 0.0f64;
    let mut missing = 0;
    for (name, value) in &frozen {
        match current.get(name) {
            Some(v) if v.is_finite() && value.is_finite() => worst = worst.max(rel(*v, *value)),
            _ => missing += 1,
        }
    }
    let ok = missing == 0 && worst <= 1e-9 && frozen.len() == current.len();
    Ok((ok, format!("{} frozen values, {missing} missing or non-finite, max relative drift {worst:.2e}", frozen.len())))
}

fn main() {
    let criteria: [Criterion; 17] = [
        ("rademacher projection identity", rademacher_identity),
        ("character orthonormality", character_orthonormality),
        ("enflo type 2 with constant 1", enflo_type_two),
        ("set-shift and doubled-shift constants", set_shift_constants),
        ("geodesic suite", geodesics),
        ("rosenthal exponent", rosenthal_exponent),
        ("schoenberg grid embedding", schoenberg_grid),
        ("grid rounding sandwich", grid_rounding),
        ("psi and theta checkpoints", psi_checkpoints),
        ("trace inequalities", trace_inequalities),
        ("psd counterexample", psd_counterexample_check),
        ("scalar schatten reduction", scalar_reduction),
        ("diagonal khinchine reduction", diagonal_khinchine),
        ("bridge arithmetic", bridge_arithmetic),
        ("monte carlo consistency", monte_carlo_consistency),
        ("determinism", determinism),
        ("regression corpus", regression_corpus),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("{:>2} {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} criteria, {failed} failed", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
