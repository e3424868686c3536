use ineqlab::complexify::{bridge_report, circular_moment, complexification_norm, complexification_norm_pow, contraction_check, quadrature_drift, ComplexifiedVector, DEFAULT_NODES};
use ineqlab::embeddings::{distortion, grid_round_sandwich, psi, rosenthal_distortion, rosenthal_embed, schoenberg_embed, theta, Metric};
use ineqlab::families::{random_grid, random_hypercube, random_vectors, seeded};
use ineqlab::inequalities::{cotype_report, displacement_report, linear_xp_report, metric_xp_report, reverse_metric_xp_report, smoothness_report, CotypeVariant, LinearMode, SmoothnessKind};
use ineqlab::lattice::{doubled_set_vs_diagonal, gap_moment_estimate, geodesic, set_shift_vs_edges};
use ineqlab::linalg::{random_orthogonal, random_psd, SymMatrix};
use ineqlab::operators::{box_average, edge_average, rademacher_projection, BoxAverageKind, EdgeAverageKind};
use ineqlab::schatten::{lambda_minimum, psd_xp_report, schatten_norm, trace_inequality_report, trace_mixed, trace_power, TraceKind};
use ineqlab::{Displacement, GridFunction, InequalityReport, SamplePlan, SignLaw, SignVector};
use rand::Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::run::evaluate;
use crate::CliError;

pub const SUITES: &[&str] = &["lattice", "geodesic", "operators", "inequalities", "embeddings", "trace", "complexify", "cli"];

/// One named invariant: `observed` is the worst value seen, compared against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
}

struct Collector {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Self { suite, checks: Vec::new() }
    }

    /// Passes when observed ≤ threshold.
    fn at_most(&mut self, name: &str, observed: f64, threshold: f64) {
        self.checks.push(Check { suite: self.suite.into(), name: name.into(), passed: observed <= threshold, observed, threshold });
    }

    /// Passes when observed ≥ threshold.
    fn at_least(&mut self, name: &str, observed: f64, threshold: f64) {
        self.checks.push(Check { suite: self.suite.into(), name: name.into(), passed: observed >= threshold, observed, threshold });
    }

    fn fail(&mut self, name: &str, err: impl std::fmt::Display) {
        eprintln!("{}/{name}: {err}", self.suite);
        self.checks.push(Check { suite: self.suite.into(), name: name.into(), passed: false, observed: f64::NAN, threshold: f64::NAN });
    }

    /// Records the result of a fallible check body.
    fn run(&mut self, name: &str, body: impl FnOnce(&mut Self) -> Result<(), CliError>) {
        if let Err(e) = body(self) {
            self.fail(name, e);
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative gap between two reports' sides, term by term.
fn report_gap(a: &InequalityReport, b: &InequalityReport, factor: f64) -> f64 {
    let mut worst = rel(a.lhs * factor, b.lhs);
    for (k, v) in &a.rhs_terms {
        worst = worst.max(rel(v * factor, b.rhs_terms.get(k).copied().unwrap_or(f64::NAN)));
    }
    for (k, v) in &a.lhs_terms {
        worst = worst.max(rel(v * factor, b.lhs_terms.get(k).copied().unwrap_or(f64::NAN)));
    }
    worst
}

/// Whether a trace-inequality report passes; operator convexity is judged by the spectrum.
pub fn trace_passes(r: &InequalityReport, rel_tol: f64) -> bool {
    match r.details.get("min_eigenvalue") {
        Some(&min) => min >= -rel_tol * r.details.get("scale").copied().unwrap_or(1.0).max(1e-300),
        None => r.holds(rel_tol),
    }
}

fn displacements(n: usize) -> Vec<Displacement> {
    vec![
        Displacement::Edge(n - 1),
        Displacement::Diagonal,
        Displacement::SymmetricDiagonal,
        Displacement::ShiftedSet { set: (0..n).collect(), scale: 2 },
        Displacement::FixedShift((1..=n as i64).collect()),
    ]
}

fn lattice() -> Vec<Check> {
    let mut c = Collector::new("lattice");
    c.run("translation_invariance", |c| {
        let exact = SamplePlan::exhaustive();
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let f = random_grid(8, 2, 2, 3.0, seed)?;
            let g = f.translate(&[3, 5]);
            for disp in displacements(2) {
                let a = gap_moment_estimate(&f, &disp, SignLaw::Rademacher, 3.0, &exact, "")?.mean;
                let b = gap_moment_estimate(&g, &disp, SignLaw::Rademacher, 3.0, &exact, "")?.mean;
                worst = worst.max(rel(a, b));
            }
        }
        c.at_most("translation_invariance", worst, 1e-12);
        Ok(())
    });
    c.run("monte_carlo_budget_4x", |c| {
        let f = random_grid(8, 3, 1, 2.0, 3)?;
        let mut agree = 0;
        for seed in 0..100 {
            let small = gap_moment_estimate(&f, &Displacement::Diagonal, SignLaw::Rademacher, 2.0, &SamplePlan::monte_carlo(3, 1, 2000, seed), "v")?;
            let big = gap_moment_estimate(&f, &Displacement::Diagonal, SignLaw::Rademacher, 2.0, &SamplePlan::monte_carlo(3, 1, 8000, seed), "v")?;
            if (small.mean - big.mean).abs() < 5.0 * small.std_err.hypot(big.std_err) {
                agree += 1;
            }
        }
        c.at_least("monte_carlo_budget_4x", agree as f64 / 100.0, 0.99);
        Ok(())
    });
    c.run("set_shift_vs_edges", |c| {
        let mut worst = 0.0f64;
        for (modulus, n) in [(4, 2), (8, 2), (4, 3)] {
            for p in [1.0, 2.0, 3.0, 4.0] {
                let f = random_grid(modulus, n, 2, p, 11 + modulus as u64 + n as u64)?;
                for signs in 0..1usize << n {
                    let eps: Vec<i64> = (0..n).map(|j| if signs >> j & 1 == 1 { -1 } else { 1 }).collect();
                    let eps = SignVector::new(eps, SignLaw::Rademacher)?;
                    for mask in 1..1usize << n {
                        let set: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
                        let (lhs, rhs) = set_shift_vs_edges(&f, &eps, &set, p)?;
                        worst = worst.max(lhs / rhs);
                    }
                }
            }
        }
        c.at_most("set_shift_vs_edges", worst, 1.0 + 1e-10);
        Ok(())
    });
    c.run("doubled_set_vs_diagonal", |c| {
        let mut worst = 0.0f64;
        for (modulus, n) in [(4, 2), (8, 2), (4, 3)] {
            for p in [1.0, 2.0, 4.0] {
                let f = random_grid(modulus, n, 1, p, 5)?;
                for mask in 1..1usize << n {
                    let set: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
                    let (lhs, rhs) = doubled_set_vs_diagonal(&f, &set, p)?;
                    worst = worst.max(lhs / rhs);
                }
            }
        }
        c.at_most("doubled_set_vs_diagonal", worst, 1.0 + 1e-10);
        Ok(())
    });
    c.checks.extend(geodesics());
    c.checks
}

/// Every odd w ∈ {±1, ±3, ±5}^n for n ≤ 3.
pub fn odd_vectors() -> Vec<Vec<i64>> {
    let values = [-5i64, -3, -1, 1, 3, 5];
    let mut out = Vec::new();
    for n in 1..=3u32 {
        for mut idx in 0..6usize.pow(n) {
            let mut w = Vec::new();
            for _ in 0..n {
                w.push(values[idx % 6]);
                idx /= 6;
            }
            out.push(w);
        }
    }
    out
}

/// Counts of violated geodesic postconditions: endpoints, unit ℓ_∞ steps, injectivity and
/// sign equivariance.
pub fn geodesic_failures() -> Result<[usize; 4], CliError> {
    let mut failures = [0usize; 4];
    for w in odd_vectors() {
        let path = geodesic(&w)?;
        let len = w.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as usize;
        if path.len() != len + 1 || path[0].iter().any(|&x| x != 0) || path[len] != w {
            failures[0] += 1;
        }
        if path.windows(2).any(|s| s[0].iter().zip(&s[1]).map(|(a, b)| (a - b).abs()).max() != Some(1)) {
            failures[1] += 1;
        }
        let mut seen = path.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != path.len() {
            failures[2] += 1;
        }
        for flip in 0..1usize << w.len() {
            let sign: Vec<i64> = (0..w.len()).map(|j| if flip >> j & 1 == 1 { -1 } else { 1 }).collect();
            let flipped: Vec<i64> = w.iter().zip(&sign).map(|(a, s)| a * s).collect();
            let expected: Vec<Vec<i64>> = path.iter().map(|pt| pt.iter().zip(&sign).map(|(a, s)| a * s).collect()).collect();
            if geodesic(&flipped)? != expected {
                failures[3] += 1;
            }
        }
    }
    Ok(failures)
}

fn geodesics() -> Vec<Check> {
    let mut c = Collector::new("geodesic");
    c.run("geodesic", |c| {
        let f = geodesic_failures()?;
        for (name, count) in ["endpoints", "unit_steps", "injective", "sign_equivariant"].iter().zip(f) {
            c.at_most(name, count as f64, 0.0);
        }
        Ok(())
    });
    c.checks
}

fn pow_mass(f: &GridFunction, p: f64) -> f64 {
    (0..f.len()).map(|i| f.value(i).iter().map(|x| x.abs().powf(p)).sum::<f64>()).sum()
}

fn max_diff(f: &GridFunction, g: &GridFunction) -> f64 {
    f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn operators() -> Vec<Check> {
    let mut c = Collector::new("operators");
    c.run("contractivity", |c| {
        let mut worst = 0.0f64;
        for seed in 0..5 {
            let f = random_grid(8, 2, 2, 2.0, seed)?;
            let mut images = vec![
                box_average(&f, &BoxAverageKind::DS(vec![0]), 1)?,
                box_average(&f, &BoxAverageKind::DS(vec![0, 1]), 3)?,
                box_average(&f, &BoxAverageKind::A, 3)?,
                box_average(&f, &BoxAverageKind::Bj(1), 3)?,
                box_average(&f, &BoxAverageKind::DeltaT(vec![1]), 3)?,
            ];
            for kind in [EdgeAverageKind::Ej(0), EdgeAverageKind::CalEj(1), EdgeAverageKind::CalE, EdgeAverageKind::Tj(0)] {
                images.push(edge_average(&f, kind)?);
            }
            for p in [1.0, 2.0, 3.5] {
                let base = pow_mass(&f, p);
                for g in &images {
                    worst = worst.max(pow_mass(g, p) / base);
                }
            }
        }
        c.at_most("contractivity", worst, 1.0 + 1e-12);
        Ok(())
    });
    c.run("commutation", |c| {
        let mut worst = 0.0f64;
        for seed in 0..5 {
            let f = random_grid(8, 2, 1, 2.0, 20 + seed)?;
            let kinds = [(BoxAverageKind::DS(vec![0]), 3), (BoxAverageKind::DS(vec![1]), 1), (BoxAverageKind::A, 3)];
            for (i, (ka, ra)) in kinds.iter().enumerate() {
                for (kb, rb) in &kinds[i + 1..] {
                    let ab = box_average(&box_average(&f, ka, *ra)?, kb, *rb)?;
                    let ba = box_average(&box_average(&f, kb, *rb)?, ka, *ra)?;
                    worst = worst.max(max_diff(&ab, &ba));
                }
            }
        }
        c.at_most("commutation", worst, 1e-12);
        Ok(())
    });
    c.run("average_displacement", |c| {
        let mut worst = 0.0f64;
        for (modulus, n) in [(8, 2), (4, 3)] {
            for p in [1.0, 2.0, 3.0] {
                let f = random_grid(modulus, n, 1, p, 31)?;
                for mask in 1..1usize << n {
                    let set: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
                    for radius in (1..=modulus / 2).step_by(2) {
                        let r = displacement_report(&f, &set, radius)?;
                        worst = worst.max(r.implied_constant.unwrap_or(0.0) / 8f64.powf(p));
                    }
                }
            }
        }
        c.at_most("average_displacement_over_8p", worst, 1.0);
        Ok(())
    });
    c.run("rademacher_idempotent", |c| {
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let h = random_hypercube(4, 2, 2.0, seed)?;
            let once = rademacher_projection(&h);
            let twice = rademacher_projection(&once);
            worst = worst.max(once.values().iter().zip(twice.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        c.at_most("rademacher_idempotent", worst, 1e-12);
        Ok(())
    });
    c.checks
}

/// Reports on one grid function used by the invariance checks.
fn grid_reports(f: &GridFunction) -> Result<Vec<InequalityReport>, CliError> {
    let exact = SamplePlan::exhaustive();
    Ok(vec![
        metric_xp_report(f, 1, &exact)?,
        reverse_metric_xp_report(f, 1, &exact)?,
        cotype_report(f, f.value_p(), CotypeVariant::Rademacher, &exact)?,
        displacement_report(f, &[0], 1)?,
    ])
}

fn inequalities() -> Vec<Check> {
    let mut c = Collector::new("inequalities");
    c.run("constant_shift", |c| {
        let mut worst = 0.0f64;
        for seed in 0..3 {
            let f = random_grid(8, 2, 2, 3.0, seed)?;
            let g = f.affine(1.0, &[0.75, -2.5]);
            for (a, b) in grid_reports(&f)?.iter().zip(grid_reports(&g)?.iter()) {
                worst = worst.max(report_gap(a, b, 1.0));
            }
        }
        c.at_most("constant_shift", worst, 1e-12);
        Ok(())
    });
    c.run("scaling", |c| {
        let (mut worst, mut implied) = (0.0f64, 0.0f64);
        for seed in 0..3 {
            let f = random_grid(8, 2, 1, 2.5, 40 + seed)?;
            let lambda = 1.7;
            let g = f.affine(lambda, &[0.0]);
            for (a, b) in grid_reports(&f)?.iter().zip(grid_reports(&g)?.iter()) {
                worst = worst.max(report_gap(a, b, lambda.powf(2.5)));
                if let (Some(x), Some(y)) = (a.implied_constant, b.implied_constant) {
                    implied = implied.max(rel(x, y));
                }
            }
        }
        c.at_most("scaling_terms", worst, 1e-10);
        c.at_most("scaling_implied_constant", implied, 1e-10);
        Ok(())
    });
    c.run("enflo_type_2", |c| {
        let mut worst = 0.0f64;
        for n in 1..=4 {
            for seed in 0..50 {
                let h = random_hypercube(n, 1, 2.0, seed)?;
                worst = worst.max(smoothness_report(&h, SmoothnessKind::Enflo { r: 2.0 })?.implied_constant.unwrap_or(0.0));
            }
        }
        c.at_most("enflo_type_2", worst, 1.0 + 1e-12);
        Ok(())
    });
    c.run("jensen", |c| {
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let a = random_vectors(5, 3, seed);
            for p in [2.0, 3.0, 5.0] {
                let exact = SamplePlan::exhaustive();
                let sq = linear_xp_report(&a, 2, p, LinearMode::SquareFunction, &exact)?;
                let rad = linear_xp_report(&a, 2, p, LinearMode::Rademacher, &exact)?;
                worst = worst.max(sq.rhs_terms["square"] / rad.rhs_terms["rademacher"]);
            }
        }
        c.at_most("square_below_rademacher", worst, 1.0 + 1e-12);
        Ok(())
    });
    c.run("bridge_chain", |c| {
        let z = random_vectors(2, 2, 9);
        let r = bridge_report(&z, 2, 1, 3.0, &SamplePlan::exhaustive())?;
        let failed = r.checks.values().filter(|ok| !**ok).count();
        c.at_most("bridge_chain", failed as f64, 0.0);
        Ok(())
    });
    c.checks
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Fitted exponent of the Rosenthal distortion over n = 2^4..2^14.
pub fn rosenthal_slope(q: f64, p: f64) -> Result<f64, CliError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in 4..=14 {
        let n = 1usize << e;
        xs.push((n as f64).ln());
        ys.push(rosenthal_distortion(n, q, p)?.distortion.ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

fn embeddings() -> Vec<Check> {
    let mut c = Collector::new("embeddings");
    c.run("subset_monotone", |c| {
        let src = random_vectors(12, 3, 1);
        let img = random_vectors(12, 2, 2);
        let (l1, l3) = (Metric::lp(1.0), Metric::lp(3.0));
        let full = distortion(&src, &l1, &img, &l3)?.distortion;
        let mut worst = 0.0f64;
        for len in 2..12 {
            worst = worst.max(distortion(&src[..len], &l1, &img[..len], &l3)?.distortion / full);
        }
        c.at_most("subset_monotone", worst, 1.0);
        Ok(())
    });
    c.run("schoenberg_isometry", |c| {
        let pts = random_vectors(15, 2, 3);
        let q = 3.0;
        let img = schoenberg_embed(&pts, q)?;
        let snow = Metric::lp(2.0).snowflake(2.0 / q)?;
        let r = distortion(&pts, &snow, &img, &Metric::lp(2.0))?;
        c.at_most("schoenberg_isometry", r.distortion - 1.0, 1e-8);
        Ok(())
    });
    c.run("rosenthal_linear", |c| {
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let v = random_vectors(2, 7, seed);
            let sum: Vec<f64> = v[0].iter().zip(&v[1]).map(|(a, b)| a + b).collect();
            let lhs = rosenthal_embed(&sum, 3.0);
            let (a, b) = (rosenthal_embed(&v[0], 3.0), rosenthal_embed(&v[1], 3.0));
            worst = worst.max(lhs.iter().zip(a.iter().zip(&b)).map(|(l, (x, y))| (l - (x + y)).abs()).fold(0.0, f64::max));
        }
        c.at_most("rosenthal_linear", worst, 1e-14);
        Ok(())
    });
    c.run("rosenthal_exponent_fit", |c| {
        let slope = rosenthal_slope(3.0, 6.0)?;
        c.at_most("rosenthal_exponent_fit", (slope - 1.0 / 12.0).abs(), 0.02);
        Ok(())
    });
    c.run("grid_round_sandwich", |c| {
        let mut failures = 0;
        for m in 2..=8 {
            for n in 1..=2 {
                for q in [2.0, 3.0, 4.0] {
                    let s = grid_round_sandwich(m, n, q)?;
                    failures += usize::from(!s.lower_holds) + usize::from(!s.upper_holds);
                }
            }
        }
        c.at_most("grid_round_sandwich", failures as f64, 0.0);
        Ok(())
    });
    c.run("psi_theta", |c| {
        let mut worst = 0.0f64;
        let mut bracket_failures = 0;
        let mut rng = seeded(17);
        for _ in 0..20 {
            let q = rng.random_range(2.05..11.0);
            let p = rng.random_range(q + 0.05..=12.0);
            let t = theta(p, q);
            worst = worst.max((psi(p, q, 0.0) + p).abs()).max((psi(p, q, q / p) + (p - q)).abs()).max(psi(p, q, t).abs());
            if !(q / p < t && t < 1.0 - (p - q) * (q - 2.0) / (2.0 * p.powi(3))) {
                bracket_failures += 1;
            }
        }
        c.at_most("psi_checkpoints", worst, 1e-10);
        c.at_most("theta_bracket", bracket_failures as f64, 0.0);
        Ok(())
    });
    c.checks
}

/// Seeded random PSD pairs of every order in `orders`.
pub fn psd_pairs(orders: std::ops::RangeInclusive<usize>, count: usize, seed: u64) -> Vec<(SymMatrix, SymMatrix)> {
    let mut rng = seeded(seed);
    orders.flat_map(|d| (0..count).map(move |_| d)).map(|d| (random_psd(&mut rng, d), random_psd(&mut rng, d))).collect()
}

/// Violations of `kind` at exponent q over the pairs.
pub fn trace_violations(pairs: &[(SymMatrix, SymMatrix)], q: f64, kind: &TraceKind, rel_tol: f64) -> Result<usize, CliError> {
    let mut bad = 0;
    for (a, b) in pairs {
        let r = trace_inequality_report(a, b, q, kind)?;
        bad += usize::from(!trace_passes(&r, rel_tol));
    }
    Ok(bad)
}

fn trace() -> Vec<Check> {
    let mut c = Collector::new("trace");
    c.run("unitary_invariance", |c| {
        let mut rng = seeded(2);
        let mut worst = 0.0f64;
        for d in 2..=6 {
            let a = random_psd(&mut rng, d).combine(&random_psd(&mut rng, d), 1.0, -1.0)?;
            let u = random_orthogonal(&mut rng, d);
            let b = SymMatrix::symmetrized(&u.mul(a.mat()).mul(&u.transpose()))?;
            for p in [1.0, 1.5, 2.0, 3.0] {
                worst = worst.max(rel(schatten_norm(&a, p)?, schatten_norm(&b, p)?));
            }
        }
        c.at_most("unitary_invariance", worst, 1e-10);
        Ok(())
    });
    c.run("trace_identities", |c| {
        let mut rng = seeded(3);
        let mut worst = 0.0f64;
        for d in 2..=6 {
            let a = random_psd(&mut rng, d);
            worst = worst.max(rel(trace_power(&a, 1.0)?, a.trace()));
            for q in [0.5, 1.5, 3.0] {
                worst = worst.max(rel(trace_mixed(&a, &SymMatrix::identity(d), q)?, trace_power(&a, q)?));
            }
        }
        c.at_most("trace_identities", worst, 1e-12);
        Ok(())
    });
    c.run("trace_monotone", |c| {
        let mut rng = seeded(4);
        let mut worst = f64::NEG_INFINITY;
        for d in 2..=6 {
            for _ in 0..20 {
                let small = random_psd(&mut rng, d);
                let big = small.add(&random_psd(&mut rng, d).scale(rng.random_range(0.0..1.0)))?;
                let q = rng.random_range(1.0..=8.0);
                worst = worst.max(trace_power(&small, q)? - trace_power(&big, q)?);
            }
        }
        c.at_most("trace_monotone", worst, 1e-10);
        Ok(())
    });
    c.run("trace_corpora", |c| {
        let pairs = psd_pairs(2..=6, 40, 5);
        let mut configs: Vec<(f64, TraceKind)> = Vec::new();
        configs.extend([1.0, 1.5, 2.0, 2.7, 4.0, 7.0].map(|q| (q, TraceKind::MainQge1)));
        configs.extend([0.25, 0.5, 0.9].map(|q| (q, TraceKind::Qlt1)));
        configs.extend([1.0, 2.5, 4.0].map(|q| (q, TraceKind::LambdaFamily)));
        configs.extend([1.0, 1.5, 3.0].map(|q| (q, TraceKind::LiebThirring)));
        configs.extend([1.0, 1.5, 2.0].map(|q| (q, TraceKind::OpConvex { s: 0.3 })));
        configs.push((2.0, TraceKind::Holder { a: vec![1.0, 0.5], b: vec![1.0, 0.5] }));
        let mut bad = 0;
        for (q, kind) in &configs {
            bad += trace_violations(&pairs, *q, kind, 1e-8)?;
        }
        c.at_most("trace_corpora_violations", bad as f64, 0.0);
        Ok(())
    });
    c.run("op_convex_optimizer", |c| {
        let mut bad = 0;
        for (a, b) in psd_pairs(2..=5, 20, 6) {
            for q in [1.25, 1.5, 2.0] {
                let (_, s) = lambda_minimum(trace_power(&a, q)?, trace_power(&b, q)?, q - 1.0);
                let s = s.clamp(1e-6, 1.0 - 1e-6);
                let r = trace_inequality_report(&a, &b, q, &TraceKind::OpConvex { s })?;
                bad += usize::from(!trace_passes(&r, 1e-8));
            }
        }
        c.at_most("op_convex_optimizer", bad as f64, 0.0);
        Ok(())
    });
    c.run("psd_xp_reference", |c| {
        let mut worst = 0.0f64;
        let mut rng = seeded(7);
        for q in [1.0, 2.0, 3.0] {
            for n in 2..=5 {
                let mats: Vec<SymMatrix> = (0..n).map(|_| random_psd(&mut rng, 3)).collect();
                let r = psd_xp_report(&mats, 1, q, &SamplePlan::exhaustive())?;
                worst = worst.max(r.implied_constant.unwrap_or(0.0) / r.details["reference_factor"]);
            }
        }
        c.at_most("psd_xp_over_reference", worst, 1.0);
        Ok(())
    });
    c.checks
}

fn complexify() -> Vec<Check> {
    let mut c = Collector::new("complexify");
    c.run("norm_axioms", |c| {
        let mut rng = seeded(8);
        let (mut homog, mut triangle) = (0.0f64, f64::NEG_INFINITY);
        for _ in 0..1000 {
            let p = rng.random_range(1.0..6.0);
            let mut draw = || ComplexifiedVector::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect(), (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(), p);
            let (x, y) = (draw()?, draw()?);
            let sum = ComplexifiedVector::new(x.u.iter().zip(&y.u).map(|(a, b)| a + b).collect(), x.v.iter().zip(&y.v).map(|(a, b)| a + b).collect(), p)?;
            let (nx, ny) = (x.norm(DEFAULT_NODES)?, y.norm(DEFAULT_NODES)?);
            triangle = triangle.max(sum.norm(DEFAULT_NODES)? - nx - ny);
            let (re, im) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            homog = homog.max(rel(x.scale(re, im).norm(DEFAULT_NODES)?, f64::hypot(re, im) * nx));
        }
        c.at_most("homogeneity", homog, 1e-10);
        c.at_most("triangle", triangle, 1e-10);
        Ok(())
    });
    c.run("real_axis_moment", |c| {
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let z = &random_vectors(1, 4, seed)[0];
            for p in [1.0, 2.0, 3.3, 6.0] {
                let lp: f64 = z.iter().map(|x| x.abs().powf(p)).sum();
                worst = worst.max(rel(complexification_norm_pow(z, &[0.0; 4], p, DEFAULT_NODES)? / lp, circular_moment(p)));
            }
        }
        c.at_most("real_axis_moment", worst, 1e-9);
        Ok(())
    });
    c.run("quadrature_drift", |c| {
        let z = random_vectors(2, 3, 12);
        let mut worst = 0.0f64;
        for p in [1.0, 2.5, 4.0] {
            worst = worst.max(quadrature_drift(&z[0], &z[1], p, DEFAULT_NODES)?);
        }
        let _ = complexification_norm(&z[0], &z[1], 2.0, DEFAULT_NODES)?;
        c.at_most("quadrature_drift", worst, 1e-10);
        Ok(())
    });
    c.run("contraction", |c| {
        let mut failures = 0;
        for seed in 0..20 {
            let z = random_vectors(6, 3, seed);
            let a: Vec<f64> = random_vectors(6, 1, seed + 100).into_iter().map(|v| v[0]).collect();
            let r = contraction_check(&a, &z, 3.0, &SamplePlan::exhaustive())?;
            failures += usize::from(!r.checks["holds"]);
        }
        c.at_most("contraction", failures as f64, 0.0);
        Ok(())
    });
    c.run("bridge_z0", |c| {
        let mut worst = 0.0f64;
        for (m, seed) in [(1, 1), (2, 2), (3, 3)] {
            let r = bridge_report(&random_vectors(2, 2, seed), m, 1, 2.5, &SamplePlan::exhaustive())?;
            worst = worst.max(r.details["z0_term"] / r.details["z0_bound"]);
        }
        c.at_most("bridge_z0_over_bound", worst, 1.0 + 1e-9);
        Ok(())
    });
    c.checks
}

fn cli() -> Vec<Check> {
    let mut c = Collector::new("cli");
    c.run("run_matches_library", |c| {
        let cfg = ExperimentConfig::from_json(r#"{"experiment":"linear-xp","k":2,"p":3,"a":[[1,0.5],[0.2,-1],[0.3,0.3]],"seed":4}"#)?;
        let via_run = evaluate(&cfg)?.report.expect("linear-xp produces a report");
        let plan = ineqlab::make_sample_plan(1, 3, 2, cfg.budget()?, 4)?;
        let direct = linear_xp_report(&[vec![1.0, 0.5], vec![0.2, -1.0], vec![0.3, 0.3]], 2, 3.0, LinearMode::Rademacher, &plan)?;
        c.at_most("run_matches_library", f64::from(u8::from(via_run != direct)), 0.0);
        Ok(())
    });
    c.run("config_round_trip", |c| {
        let texts = [
            r#"{"experiment":"metric-xp","m":1,"n":2,"k":1,"p":3,"budget":1e5,"seed":3,"function":{"builtin":{"family":"random","seed":4}}}"#,
            r#"{"experiment":"psd-counterexample","q":4,"K":2,"s":0.1}"#,
            r#"{"experiment":"trace","d":3,"q":1.5,"trace":{"kind":"holder","a":[1,0.5],"b":[1,0.5]}}"#,
            r#"{"experiment":"smoothness","n":3,"smoothness":{"kind":"bmw","q":2,"p":3}}"#,
        ];
        let mut bad = 0;
        for t in texts {
            let cfg = ExperimentConfig::from_json(t)?;
            bad += usize::from(ExperimentConfig::from_json(&cfg.to_json())? != cfg);
        }
        c.at_most("config_round_trip", bad as f64, 0.0);
        Ok(())
    });
    c.checks
}

/// Runs one suite, or every suite for "all".
pub fn verify(suite: &str) -> Result<Vec<Check>, CliError> {
    Ok(match suite {
        "lattice" => lattice(),
        "geodesic" => geodesics(),
        "operators" => operators(),
        "inequalities" => inequalities(),
        "embeddings" => embeddings(),
        "trace" => trace(),
        "complexify" => complexify(),
        "cli" => cli(),
        "all" => {
            let mut all = lattice();
            for f in [operators, inequalities, embeddings, trace, complexify, cli] {
                all.extend(f());
            }
            all
        }
        other => return Err(CliError::Config(format!("unknown suite {other:?}; known: all, {}", SUITES.join(", ")))),
    })
}

/// Fixed-width table of checks.
pub fn render(checks: &[Check]) -> String {
    let mut out = format!("{:<14} {:<32} {:<6} {:>14} {:>14}\n", "suite", "check", "status", "observed", "threshold");
    for ch in checks {
        out.push_str(&format!(
            "{:<14} {:<32} {:<6} {:>14.6e} {:>14.6e}\n",
            ch.suite,
            ch.name,
            if ch.passed { "pass" } else { "FAIL" },
            ch.observed,
            ch.threshold
        ));
    }
    out
}
