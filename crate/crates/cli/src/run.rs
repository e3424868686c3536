use std::time::Instant;

use ineqlab::complexify::{bridge_report, circular_moment_report, contraction_check};
use ineqlab::embeddings::{composite_grid_distortion, grid_bounds, grid_round_sandwich, rosenthal_distortion, GridEmbedding};
use ineqlab::families::{character_real, cosine_grid, indicator_grid, random_grid, random_hypercube, random_vectors, seeded};
use ineqlab::inequalities::{
    convolution_probe, convolution_search, cotype_report, displacement_report, linear_xp_report, metric_xp_report, reverse_linear_xp_report,
    reverse_metric_xp_report, scaling_witness_report, smoothness_report, CotypeVariant, SmoothnessKind,
};
use ineqlab::linalg::{random_gaussian, random_psd, Mat, SymMatrix};
use ineqlab::schatten::{khinchine_report, psd_counterexample, psd_xp_report, schatten_xp_report, trace_inequality_report, TraceKind};
use ineqlab::{make_sample_plan, GridFunction, InequalityReport, SamplePlan};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require, ExperimentConfig, Family, FunctionSource, MatrixSource};
use crate::CliError;

pub const SCHEMA: &str = "xp-report/1";

/// Every experiment name accepted by [`evaluate`].
pub const EXPERIMENTS: &[&str] = &[
    "metric-xp",
    "reverse-metric-xp",
    "linear-xp",
    "reverse-linear-xp",
    "smoothness",
    "cotype",
    "convolution-probe",
    "convolution-search",
    "scaling-witness",
    "displacement",
    "trace",
    "psd-counterexample",
    "schatten-xp",
    "psd-xp",
    "khinchine",
    "contraction",
    "bridge",
    "rosenthal-distortion",
    "grid-bounds",
    "composite-grid",
    "grid-round",
    "circular-moment",
];

/// The outcome of one experiment: the serialized result and, for inequality
/// functionals, the report itself.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub result: Value,
    pub report: Option<InequalityReport>,
}

impl Evaluation {
    fn report(r: InequalityReport) -> Self {
        Self { result: serde_json::to_value(&r).expect("reports serialize"), report: Some(r) }
    }

    fn value<T: Serialize>(v: &T) -> Self {
        Self { result: serde_json::to_value(v).expect("results serialize"), report: None }
    }

    /// True when a report was produced but one of its hypotheses was not met.
    pub fn has_warnings(&self) -> bool {
        self.report.as_ref().is_some_and(|r| !r.warnings.is_empty())
    }
}

fn grid(c: &ExperimentConfig, modulus: usize, n: usize, p: f64) -> Result<GridFunction, CliError> {
    let d = c.d.unwrap_or(1);
    let source = c.function.clone().unwrap_or(FunctionSource::Builtin(Family::Random { seed: c.seed() }));
    let f = match source {
        FunctionSource::Builtin(Family::Random { seed }) => random_grid(modulus, n, d, p, seed)?,
        FunctionSource::Builtin(Family::Indicator) => indicator_grid(modulus, n, p)?,
        FunctionSource::Builtin(Family::Character { y }) => character_real(modulus, &y, p)?,
        FunctionSource::Builtin(Family::Cosine { half }) => cosine_grid(modulus, n, half, p)?,
        FunctionSource::Json(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let f: GridFunction = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            f.with_value_p(p)?
        }
    };
    Ok(f)
}

fn read_csv_matrix(path: &str) -> Result<Mat, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| CliError::Config(format!("{path}: {s:?} is not a number: {e}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Mat::from_rows(&rows)?)
}

fn matrices(c: &ExperimentConfig, psd_default: bool) -> Result<Vec<Mat>, CliError> {
    let source = match &c.matrices {
        Some(s) => s.clone(),
        None => MatrixSource::Random { count: require(c.n, "n", &c.experiment)?, seed: c.seed(), psd: psd_default },
    };
    match source {
        MatrixSource::Csv(paths) => paths.iter().map(|p| read_csv_matrix(p)).collect(),
        MatrixSource::Random { count, seed, psd } => {
            let d = require(c.d, "d", &c.experiment)?;
            let mut rng = seeded(seed);
            Ok((0..count).map(|_| if psd { random_psd(&mut rng, d).mat().clone() } else { random_gaussian(&mut rng, d, d) }).collect())
        }
        MatrixSource::Diagonal(diagonals) => diagonals.iter().map(|g| Ok(SymMatrix::diagonal(g)?.mat().clone())).collect(),
    }
}

fn sym_matrices(c: &ExperimentConfig) -> Result<Vec<SymMatrix>, CliError> {
    matrices(c, true)?.iter().map(|m| Ok(SymMatrix::from_mat(m)?)).collect()
}

fn vectors(c: &ExperimentConfig, given: Option<Vec<Vec<f64>>>) -> Result<Vec<Vec<f64>>, CliError> {
    match given {
        Some(v) => Ok(v),
        None => Ok(random_vectors(require(c.n, "n", &c.experiment)?, c.d.unwrap_or(1), c.seed())),
    }
}

fn plan(c: &ExperimentConfig, modulus: usize, n: usize, k: usize) -> Result<SamplePlan, CliError> {
    Ok(make_sample_plan(modulus, n, k, c.budget()?, c.seed())?)
}

/// Runs the experiment named by the config through the library.
pub fn evaluate(c: &ExperimentConfig) -> Result<Evaluation, CliError> {
    let name = c.experiment.as_str();
    let need_f = |v: Option<f64>, field: &str| require(v, field, name);
    let need_u = |v: Option<usize>, field: &str| require(v, field, name);
    Ok(match name {
        "metric-xp" | "reverse-metric-xp" => {
            let (n, k, p) = (need_u(c.n, "n")?, need_u(c.k, "k")?, need_f(c.p, "p")?);
            let modulus = c.modulus.map_or_else(|| need_u(c.m, "m").map(|m| 4 * m), Ok)?;
            let f = grid(c, modulus, n, p)?;
            let plan = plan(c, modulus, n, k)?;
            Evaluation::report(if name == "metric-xp" { metric_xp_report(&f, k, &plan)? } else { reverse_metric_xp_report(&f, k, &plan)? })
        }
        "linear-xp" | "reverse-linear-xp" => {
            let (k, p) = (need_u(c.k, "k")?, need_f(c.p, "p")?);
            let a = vectors(c, c.a.as_ref().map(|a| a.vectors()))?;
            let plan = plan(c, 1, a.len(), k)?;
            Evaluation::report(if name == "linear-xp" {
                linear_xp_report(&a, k, p, c.mode.unwrap_or_default(), &plan)?
            } else {
                reverse_linear_xp_report(&a, k, p, &plan)?
            })
        }
        "smoothness" => {
            let n = need_u(c.n, "n")?;
            let p = c.p.unwrap_or(2.0);
            let kind = c.smoothness.unwrap_or(SmoothnessKind::Enflo { r: p });
            let h = random_hypercube(n, c.d.unwrap_or(1), p, c.seed())?;
            Evaluation::report(smoothness_report(&h, kind)?)
        }
        "cotype" => {
            let (m, n, s) = (need_u(c.m, "m")?, need_u(c.n, "n")?, need_f(c.s, "s")?);
            let variant = c.variant.unwrap_or(CotypeVariant::Rademacher);
            let modulus = c.modulus.unwrap_or(match variant {
                CotypeVariant::ThreeLetter => 2 * m,
                CotypeVariant::Rademacher => 8 * m,
            });
            let f = grid(c, modulus, n, c.p.unwrap_or(2.0))?;
            let plan = plan(c, modulus, n, 1)?;
            Evaluation::report(cotype_report(&f, s, variant, &plan)?)
        }
        "convolution-probe" => {
            let (n, p) = (need_u(c.n, "n")?, need_f(c.p, "p")?);
            let modulus = c.modulus.map_or_else(|| need_u(c.m, "m").map(|m| 4 * m), Ok)?;
            Evaluation::report(convolution_probe(&grid(c, modulus, n, p)?)?)
        }
        "convolution-search" => {
            let (n, p) = (need_u(c.n, "n")?, need_f(c.p, "p")?);
            let modulus = c.modulus.map_or_else(|| need_u(c.m, "m").map(|m| 4 * m), Ok)?;
            Evaluation::report(convolution_search(modulus, n, p, c.trials.unwrap_or(16), c.seed())?)
        }
        "scaling-witness" => {
            let (m, n, k, p) = (need_u(c.m, "m")?, need_u(c.n, "n")?, need_u(c.k, "k")?, need_f(c.p, "p")?);
            let plan = plan(c, 2 * m, n, k)?;
            Evaluation::report(scaling_witness_report(m, n, k, p, &plan)?)
        }
        "displacement" => {
            let (n, p, radius) = (need_u(c.n, "n")?, need_f(c.p, "p")?, need_u(c.radius, "R")?);
            let modulus = c.modulus.map_or_else(|| need_u(c.m, "m").map(|m| 4 * m), Ok)?;
            let set = c.set.clone().ok_or_else(|| CliError::Config("experiment displacement needs parameter set".into()))?;
            Evaluation::report(displacement_report(&grid(c, modulus, n, p)?, &set, radius)?)
        }
        "trace" => {
            let (d, q) = (need_u(c.d, "d")?, need_f(c.q, "q")?);
            let kind = c.trace.clone().unwrap_or(TraceKind::MainQge1);
            let mut rng = seeded(c.seed());
            let (a, b) = (random_psd(&mut rng, d), random_psd(&mut rng, d));
            Evaluation::report(trace_inequality_report(&a, &b, q, &kind)?)
        }
        "psd-counterexample" => {
            let (s, q, k) = (need_f(c.s, "s")?, need_f(c.q, "q")?, need_f(c.big_k, "K")?);
            Evaluation::value(&psd_counterexample(s, q, k)?)
        }
        "schatten-xp" => {
            let (k, p) = (need_u(c.k, "k")?, need_f(c.p, "p")?);
            let mats = matrices(c, false)?;
            let plan = plan(c, 1, mats.len(), k)?;
            Evaluation::report(schatten_xp_report(&mats, k, p, &plan)?)
        }
        "psd-xp" => {
            let (k, q) = (need_u(c.k, "k")?, need_f(c.q, "q")?);
            let mats = sym_matrices(c)?;
            let plan = plan(c, 1, mats.len(), k)?;
            Evaluation::report(psd_xp_report(&mats, k, q, &plan)?)
        }
        "khinchine" => {
            let p = need_f(c.p, "p")?;
            let mats = matrices(c, false)?;
            let plan = plan(c, 1, mats.len(), 1)?;
            Evaluation::report(khinchine_report(&mats, p, &plan)?)
        }
        "contraction" => {
            let p = need_f(c.p, "p")?;
            let z = vectors(c, c.z.clone())?;
            let a = match &c.a {
                Some(a) => a.vectors().into_iter().map(|v| v.first().copied().unwrap_or(0.0)).collect(),
                None => random_vectors(z.len(), 1, c.seed().wrapping_add(1)).into_iter().map(|v| v[0]).collect::<Vec<f64>>(),
            };
            let plan = plan(c, 1, z.len(), 1)?;
            Evaluation::report(contraction_check(&a, &z, p, &plan)?)
        }
        "bridge" => {
            let (m, k, p) = (need_u(c.m, "m")?, need_u(c.k, "k")?, need_f(c.p, "p")?);
            let z = vectors(c, c.z.clone())?;
            let plan = SamplePlan { budget: c.budget()?, ..SamplePlan::exhaustive() };
            Evaluation::report(bridge_report(&z, m, k, p, &plan)?)
        }
        "rosenthal-distortion" => {
            let (n, q, p) = (need_u(c.n, "n")?, need_f(c.q, "q")?, need_f(c.p, "p")?);
            Evaluation::value(&rosenthal_distortion(n, q, p)?)
        }
        "grid-bounds" => {
            let (m, n, q, p) = (need_u(c.m, "m")?, need_u(c.n, "n")?, need_f(c.q, "q")?, need_f(c.p, "p")?);
            Evaluation::value(&grid_bounds(m as f64, n as f64, q, p)?)
        }
        "composite-grid" => {
            let (m, n, q) = (need_u(c.m, "m")?, need_u(c.n, "n")?, need_f(c.q, "q")?);
            let which = c.embedding.unwrap_or(GridEmbedding::Schoenberg);
            let p = if which == GridEmbedding::Rosenthal { need_f(c.p, "p")? } else { c.p.unwrap_or(2.0) };
            let max_points = usize::try_from(c.budget()?).unwrap_or(usize::MAX).min(4096);
            Evaluation::value(&composite_grid_distortion(m, n, q, p, which, max_points)?)
        }
        "grid-round" => {
            let (m, n, q) = (need_u(c.m, "m")?, need_u(c.n, "n")?, need_f(c.q, "q")?);
            Evaluation::value(&grid_round_sandwich(m, n, q)?)
        }
        "circular-moment" => Evaluation::value(&circular_moment_report(need_f(c.p, "p")?)?),
        other => return Err(CliError::Config(format!("unknown experiment {other:?}; known: {}", EXPERIMENTS.join(", ")))),
    })
}

/// The versioned report document written by `run`.
pub fn envelope(c: &ExperimentConfig, eval: &Evaluation, elapsed: Option<f64>) -> Value {
    let mut doc = json!({
        "schema": SCHEMA,
        "library_version": ineqlab::VERSION,
        "experiment": c.experiment,
        "config": c,
        "result": eval.result,
    });
    if let Some(secs) = elapsed {
        doc["wall_clock_seconds"] = json!(secs);
    }
    doc
}

/// Evaluates and wraps the result; `deterministic` omits the wall-clock field.
pub fn run(c: &ExperimentConfig, deterministic: bool) -> Result<(Value, Evaluation), CliError> {
    let start = Instant::now();
    let eval = evaluate(c)?;
    let elapsed = (!deterministic).then(|| start.elapsed().as_secs_f64());
    Ok((envelope(c, &eval, elapsed), eval))
}

/// Flattens numbers and booleans of a JSON value into dotted keys in document order;
/// null becomes NaN.
pub fn scalars(v: &Value) -> Vec<(String, f64)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, f64)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Number(x) => out.push((prefix.to_string(), x.as_f64().unwrap_or(f64::NAN))),
            Value::Bool(b) => out.push((prefix.to_string(), f64::from(u8::from(*b)))),
            Value::Null => out.push((prefix.to_string(), f64::NAN)),
            Value::Object(map) => map.iter().for_each(|(k, x)| walk(&key(k), x, out)),
            Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| walk(&key(&i.to_string()), x, out)),
            Value::String(_) => {}
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

/// A sweep over one config field.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub field: String,
    pub values: Vec<Value>,
}

impl Sweep {
    /// Parses `field=v1,v2,...` or `field=start..end:count` (geometric when `geo:` prefixes the range).
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("sweep {text:?} must look like field=1,2,3 or field=lin:a..b:count or field=geo:a..b:count"));
        let (field, rest) = text.split_once('=').ok_or_else(bad)?;
        let range = |body: &str, geometric: bool| -> Result<Vec<f64>, CliError> {
            let (bounds, count) = body.split_once(':').ok_or_else(bad)?;
            let (a, b) = bounds.split_once("..").ok_or_else(bad)?;
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            let count: usize = count.parse().map_err(|_| bad())?;
            if count < 2 || (geometric && (a <= 0.0 || b <= 0.0)) {
                return Err(bad());
            }
            Ok((0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    if geometric {
                        a * (b / a).powf(t)
                    } else {
                        a + t * (b - a)
                    }
                })
                .collect())
        };
        let numbers = if let Some(body) = rest.strip_prefix("geo:") {
            range(body, true)?
        } else if let Some(body) = rest.strip_prefix("lin:") {
            range(body, false)?
        } else {
            rest.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        Ok(Self { field: field.trim().to_string(), values: numbers.into_iter().map(number_value).collect() })
    }
}

/// Integral values become JSON integers so that they deserialize into integer fields.
fn number_value(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        json!(x as i64)
    } else {
        json!(x)
    }
}

/// Runs the config once per sweep value; returns CSV text with a header row.
pub fn scan(c: &ExperimentConfig, sweeps: &[Sweep]) -> Result<String, CliError> {
    let [sweep] = sweeps else {
        return Err(CliError::Config(format!("scan takes exactly one swept parameter, got {}", sweeps.len())));
    };
    let mut rows: Vec<Vec<(String, f64)>> = Vec::new();
    for value in &sweep.values {
        let value = if sweep.field == "n" || sweep.field == "m" || sweep.field == "k" || sweep.field == "d" {
            value.as_f64().map_or(value.clone(), |x| json!(x.round() as i64))
        } else {
            value.clone()
        };
        let cfg = c.with_field(&sweep.field, value.clone())?;
        let eval = evaluate(&cfg)?;
        let mut row = vec![(sweep.field.clone(), value.as_f64().unwrap_or(f64::NAN))];
        row.extend(scalars(&eval.result));
        rows.push(row);
    }
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in &rows {
        let record: Vec<String> = header.iter().map(|h| row.iter().find(|(k, _)| k == h).map_or(String::new(), |(_, v)| format_number(*v))).collect();
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Shortest round-tripping decimal form.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

/// One CSV header line and one value line for a single result.
pub fn csv_row(eval: &Evaluation) -> Result<(String, String), CliError> {
    let pairs = scalars(&eval.result);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(pairs.iter().map(|(k, _)| k.as_str()))?;
    w.write_record(pairs.iter().map(|(_, v)| format_number(*v)))?;
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("CSV output is UTF-8");
    let mut lines = text.lines();
    Ok((lines.next().unwrap_or_default().to_string(), lines.next().unwrap_or_default().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_example_config() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"linear-xp","n":2,"k":1,"p":4,"a":[1,1],"budget":1e6,"seed":7}"#).unwrap();
        let r = evaluate(&c).unwrap().report.unwrap();
        assert_eq!(r.lhs, 1.0);
        let mut terms: Vec<f64> = r.rhs_terms.values().copied().collect();
        terms.sort_by(f64::total_cmp);
        assert_eq!(terms, vec![1.0, 2.0]);
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("n=geo:16..64:3").unwrap();
        assert_eq!(s.values, vec![json!(16), json!(32), json!(64)]);
        assert_eq!(Sweep::parse("s=0.5,0.25").unwrap().values, vec![json!(0.5), json!(0.25)]);
        assert!(Sweep::parse("n").is_err());
    }

    #[test]
    fn multi_sweep_rejected() {
        let c = ExperimentConfig::new("circular-moment");
        let s = Sweep::parse("p=2,3").unwrap();
        assert!(scan(&c, &[s.clone(), s]).is_err());
    }

    #[test]
    fn unknown_experiment() {
        assert!(matches!(evaluate(&ExperimentConfig::new("nope")), Err(CliError::Config(_))));
    }

    #[test]
    fn scalar_flattening() {
        let v = json!({"a": 1, "b": {"c": true, "d": null}, "e": [2.5], "f": "x"});
        let s = scalars(&v);
        assert_eq!(s[0], ("a".to_string(), 1.0));
        assert_eq!(s[1], ("b.c".to_string(), 1.0));
        assert!(s[2].1.is_nan());
        assert_eq!(s[3], ("e.0".to_string(), 2.5));
        assert_eq!(s.len(), 4);
    }
}
