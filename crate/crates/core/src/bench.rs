//! Metrics, pair-file ingestion and the benchmark driver.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::warn;

use crate::config::{run_method, RunConfig};
use crate::copula::normal_quantile;
use crate::error::{Error, Result};
use crate::rng::{mix, rng_from_seed, subsample_indices};
use crate::sample::PairSample;
use crate::scoring::{Decision, Method, Verdict};
use crate::synth::{generate, Scenario, Truth};

/// One (dataset, method) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub id: String,
    /// Records with the same group are summarized together.
    pub group: String,
    pub method: Method,
    pub n: usize,
    pub param: Option<f64>,
    pub truth: Truth,
    pub checksum: String,
    /// `None` when the method failed; see `failure`.
    pub decision: Option<Decision>,
    pub tau: Option<f64>,
    pub p_value: Option<f64>,
    pub rho_hat: Option<f64>,
    pub failure: Option<String>,
    pub wall_time: f64,
}

impl BenchRecord {
    pub fn verdict(&self) -> Verdict {
        self.decision.map_or(Verdict::Abstain, |d| d.verdict)
    }

    pub fn is_failure(&self) -> bool {
        self.failure.is_some()
    }
}

/// Coverage, decided accuracy and directed risk with exact counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSummary {
    pub n: usize,
    pub n_decided: usize,
    pub n_correct: usize,
    pub n_wrong: usize,
    pub n_failed: usize,
    pub coverage: f64,
    /// `None` when nothing was decided or truth is not directional.
    pub decided_accuracy: Option<f64>,
    /// `None` in coverage-only mode.
    pub risk: Option<f64>,
    /// Wilson 95% interval for decided accuracy.
    pub wilson: Option<(f64, f64)>,
}

impl MetricsSummary {
    pub fn coverage_only(&self) -> bool {
        self.risk.is_none()
    }
}

fn truth_matches(verdict: Verdict, truth: Truth) -> bool {
    matches!(
        (verdict, truth),
        (Verdict::XtoY, Truth::XtoY) | (Verdict::YtoX, Truth::YtoX)
    )
}

/// Summarize a set of records. Failed records count as abstentions. If any
/// record lacks a directional truth, only coverage is reported.
pub fn summarize(records: &[BenchRecord]) -> MetricsSummary {
    let n = records.len();
    let n_failed = records.iter().filter(|r| r.is_failure()).count();
    let decided: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.verdict() != Verdict::Abstain)
        .collect();
    let n_decided = decided.len();
    let coverage = if n == 0 {
        0.0
    } else {
        n_decided as f64 / n as f64
    };
    let directional = n > 0 && records.iter().all(|r| r.truth.is_directional());
    let n_correct = decided
        .iter()
        .filter(|r| truth_matches(r.verdict(), r.truth))
        .count();
    if !directional {
        return MetricsSummary {
            n,
            n_decided,
            n_correct: 0,
            n_wrong: 0,
            n_failed,
            coverage,
            decided_accuracy: None,
            risk: None,
            wilson: None,
        };
    }
    let n_wrong = n_decided - n_correct;
    let (decided_accuracy, wilson) = if n_decided == 0 {
        (None, None)
    } else {
        (
            Some(n_correct as f64 / n_decided as f64),
            Some(wilson_interval(n_correct, n_decided, 0.95)),
        )
    };
    MetricsSummary {
        n,
        n_decided,
        n_correct,
        n_wrong,
        n_failed,
        coverage,
        decided_accuracy,
        risk: Some(n_wrong as f64 / n as f64),
        wilson,
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, conf: f64) -> (f64, f64) {
    assert!(
        n >= 1 && k <= n,
        "wilson_interval needs 0 <= k <= n, n >= 1"
    );
    let z = normal_quantile((1.0 + conf) / 2.0);
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if k == 0.0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let high = if k == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (low, high)
}

/// A real-data pair ready for benchmarking.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub id: String,
    pub sample: PairSample,
    pub truth: Truth,
    pub weight: f64,
    /// Finite rows before any subsampling.
    pub rows: usize,
}

struct MetaEntry {
    id: String,
    cause: (usize, usize),
    effect: (usize, usize),
    weight: f64,
}

fn parse_meta(path: &Path) -> Result<Vec<MetaEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let col = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(c) if c >= 1 => Ok(c),
                _ => Err(bad(format!("bad column index {s:?}"))),
            }
        };
        let weight: f64 = f[5]
            .parse()
            .map_err(|_| bad(format!("bad weight {:?}", f[5])))?;
        out.push(MetaEntry {
            id: f[0].to_string(),
            cause: (col(f[1])?, col(f[2])?),
            effect: (col(f[3])?, col(f[4])?),
            weight,
        });
    }
    Ok(out)
}

fn pair_file(dir: &Path, id: &str) -> PathBuf {
    let mut candidates = vec![
        dir.join(format!("{id}.txt")),
        dir.join(format!("pair{id}.txt")),
    ];
    if let Ok(k) = id.parse::<u32>() {
        candidates.push(dir.join(format!("pair{k:04}.txt")));
    }
    candidates
        .iter()
        .find(|p| p.is_file())
        .cloned()
        .unwrap_or_else(|| candidates.swap_remove(0))
}

/// Read whitespace-separated numeric columns `a` and `b` (1-based). Rows with
/// a non-finite value in either column are dropped.
pub fn read_columns(path: &Path, a: usize, b: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let need = a.max(b);
        if fields.len() < need {
            return Err(bad(format!(
                "expected at least {need} columns, found {}",
                fields.len()
            )));
        }
        let get = |c: usize| -> Result<f64> {
            fields[c - 1]
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: {:?}", fields[c - 1])))
        };
        let (x, y) = (get(a)?, get(b)?);
        if x.is_finite() && y.is_finite() {
            xs.push(x);
            ys.push(y);
        }
    }
    Ok((xs, ys))
}

/// Load every univariate pair listed in `meta`. `x` is the lower-numbered
/// column; truth follows from which column is the cause. Pairs with more than
/// `max_samples` finite rows are subsampled once without replacement.
pub fn load_pairs(
    dir: &Path,
    meta: &Path,
    max_samples: usize,
    seed: u64,
) -> Result<Vec<LoadedPair>> {
    let entries = parse_meta(meta)?;
    let mut out = Vec::new();
    for (idx, e) in entries.iter().enumerate() {
        if e.cause.0 != e.cause.1 || e.effect.0 != e.effect.1 {
            continue;
        }
        let (c, f) = (e.cause.0, e.effect.0);
        let (lo, hi, truth) = if c < f {
            (c, f, Truth::XtoY)
        } else {
            (f, c, Truth::YtoX)
        };
        let path = pair_file(dir, &e.id);
        let (x, y) = read_columns(&path, lo, hi)?;
        let rows = x.len();
        if rows == 0 {
            return Err(Error::EmptyPair(e.id.clone()));
        }
        let (x, y) = if rows > max_samples {
            let mut rng = rng_from_seed(mix(seed, idx as u64));
            let keep = subsample_indices(&mut rng, rows, max_samples);
            (
                keep.iter().map(|&i| x[i]).collect(),
                keep.iter().map(|&i| y[i]).collect(),
            )
        } else {
            (x, y)
        };
        let sample = PairSample::with_source(x, y, path.display().to_string())?;
        out.push(LoadedPair {
            id: e.id.clone(),
            sample,
            truth,
            weight: e.weight,
            rows,
        });
    }
    Ok(out)
}

/// A dataset to benchmark: a synthetic scenario (drawn on demand) or a loaded pair.
#[derive(Debug, Clone)]
pub enum BenchInput {
    Scenario(Scenario),
    Pair(LoadedPair),
}

impl BenchInput {
    pub fn id(&self) -> String {
        match self {
            BenchInput::Scenario(s) => s.label(),
            BenchInput::Pair(p) => p.id.clone(),
        }
    }

    fn group(&self) -> String {
        match self {
            BenchInput::Scenario(s) => format!(
                "{}:{}={}:n={}",
                s.kind,
                s.kind.stress_param(),
                s.stress(),
                s.n
            ),
            BenchInput::Pair(_) => "pairs".to_string(),
        }
    }

    fn truth(&self) -> Truth {
        match self {
            BenchInput::Scenario(s) => s.truth(),
            BenchInput::Pair(p) => p.truth,
        }
    }

    fn param(&self) -> Option<f64> {
        match self {
            BenchInput::Scenario(s) => Some(s.stress()),
            BenchInput::Pair(_) => None,
        }
    }

    fn sample(&self) -> Result<PairSample> {
        match self {
            BenchInput::Scenario(s) => generate(s),
            BenchInput::Pair(p) => Ok(p.sample.clone()),
        }
    }
}

pub const RECORD_HEADER: &str = "scenario,method,n,param,decision,truth,score,pvalue,tau,seconds";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// CSV row matching [`RECORD_HEADER`]. `seconds` is `NA` unless `timing`.
pub fn record_csv(r: &BenchRecord, timing: bool) -> String {
    let decision = if r.is_failure() {
        "error".to_string()
    } else {
        r.verdict().to_string()
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.id,
        r.method,
        r.n,
        opt(r.param),
        decision,
        r.truth,
        opt(r.decision.map(|d| d.score)),
        opt(r.p_value),
        opt(r.tau),
        if timing {
            r.wall_time.to_string()
        } else {
            "NA".into()
        }
    )
}

/// Self-describing `key=value` line.
pub fn record_kv(r: &BenchRecord, timing: bool) -> String {
    let mut s = format!(
        "id={} group={} method={} n={} param={} truth={} checksum={} verdict={} score={} pvalue={} tau={} rho_hat={}",
        r.id,
        r.group,
        r.method,
        r.n,
        opt(r.param),
        r.truth,
        r.checksum,
        if r.is_failure() { "error".to_string() } else { r.verdict().to_string() },
        opt(r.decision.map(|d| d.score)),
        opt(r.p_value),
        opt(r.tau),
        opt(r.rho_hat),
    );
    if timing {
        let _ = write!(s, " seconds={}", r.wall_time);
    }
    if let Some(f) = &r.failure {
        let _ = write!(s, " failure={:?}", f);
    }
    s
}

fn evaluate(
    input: &BenchInput,
    sample: &Result<PairSample>,
    method: Method,
    cfg: &RunConfig,
) -> BenchRecord {
    let start = Instant::now();
    let mut record = BenchRecord {
        id: input.id(),
        group: input.group(),
        method,
        n: 0,
        param: input.param(),
        truth: input.truth(),
        checksum: String::new(),
        decision: None,
        tau: None,
        p_value: None,
        rho_hat: None,
        failure: None,
        wall_time: 0.0,
    };
    let outcome = sample.as_ref().map_err(|e| e.to_string()).and_then(|s| {
        record.n = s.len();
        record.checksum = s.checksum();
        run_method(s, method, cfg).map_err(|e| e.to_string())
    });
    match outcome {
        Ok(o) => {
            record.decision = Some(o.decision);
            record.tau = o.tau;
            record.p_value = o.p_value;
            record.rho_hat = o.rho_hat;
        }
        Err(msg) => {
            warn!("{} / {}: {}", record.id, method, msg);
            record.failure = Some(msg);
        }
    }
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

/// Evaluate every method on every input. Each input is drawn once and shared
/// by all methods. Records are streamed to `sink` (CSV rows) in input order.
/// Failures are recorded and the run continues.
pub fn run_benchmark(
    inputs: &[BenchInput],
    methods: &[Method],
    cfg: &RunConfig,
    sink: &mut dyn Write,
    timing: bool,
) -> Result<Vec<BenchRecord>> {
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods selected".into()));
    }
    cfg.validate()?;
    let mut out = Vec::with_capacity(inputs.len() * methods.len());
    for input in inputs {
        let sample = input.sample();
        for &m in methods {
            let rec = evaluate(input, &sample, m, cfg);
            writeln!(sink, "{}", record_csv(&rec, timing))
                .map_err(|e| Error::io("<records>", e))?;
            out.push(rec);
        }
    }
    Ok(out)
}

/// Summaries keyed by `(method, group)`, in sorted order.
pub fn summarize_groups(records: &[BenchRecord]) -> BTreeMap<(Method, String), MetricsSummary> {
    let mut groups: BTreeMap<(Method, String), Vec<BenchRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.method, r.group.clone()))
            .or_default()
            .push(r.clone());
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, summarize(&v)))
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "method,group,n,n_decided,n_correct,n_wrong,n_failed,coverage,decided_accuracy,risk,wilson_low,wilson_high";

pub fn summary_csv(method: Method, group: &str, s: &MetricsSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        method,
        group,
        s.n,
        s.n_decided,
        s.n_correct,
        s.n_wrong,
        s.n_failed,
        s.coverage,
        opt(s.decided_accuracy),
        opt(s.risk),
        opt(s.wilson.map(|w| w.0)),
        opt(s.wilson.map(|w| w.1)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ScenarioKind;
    use proptest::prelude::*;
    use std::fs;

    fn rec(verdict: Verdict, truth: Truth) -> BenchRecord {
        BenchRecord {
            id: "p".into(),
            group: "g".into(),
            method: Method::Tra,
            n: 10,
            param: None,
            truth,
            checksum: String::new(),
            decision: Some(Decision {
                verdict,
                score: 0.0,
                threshold_or_pvalue: 0.0,
                method: Method::Tra,
            }),
            tau: None,
            p_value: None,
            rho_hat: None,
            failure: None,
            wall_time: 0.0,
        }
    }

    fn batch(correct: usize, wrong: usize, abstain: usize) -> Vec<BenchRecord> {
        let mut v = vec![rec(Verdict::XtoY, Truth::XtoY); correct];
        v.extend(vec![rec(Verdict::YtoX, Truth::XtoY); wrong]);
        v.extend(vec![rec(Verdict::Abstain, Truth::XtoY); abstain]);
        v
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&batch(6, 2, 2));
        assert_eq!(
            (s.coverage, s.decided_accuracy, s.risk),
            (0.8, Some(0.75), Some(0.2))
        );
        let s = summarize(&batch(0, 0, 7));
        assert_eq!(
            (s.coverage, s.decided_accuracy, s.risk),
            (0.0, None, Some(0.0))
        );
        assert_eq!(s.wilson, None);
        let s = summarize(&batch(5, 0, 0));
        assert_eq!(
            (s.coverage, s.decided_accuracy, s.risk),
            (1.0, Some(1.0), Some(0.0))
        );
    }

    #[test]
    fn confounded_groups_report_coverage_only() {
        let v = vec![
            rec(Verdict::XtoY, Truth::NoDirection),
            rec(Verdict::Abstain, Truth::NoDirection),
        ];
        let s = summarize(&v);
        assert!(s.coverage_only());
        assert_eq!(s.coverage, 0.5);
        assert_eq!(s.decided_accuracy, None);
    }

    #[test]
    fn failures_count_as_abstentions() {
        let mut v = batch(1, 0, 0);
        let mut f = rec(Verdict::XtoY, Truth::XtoY);
        f.decision = None;
        f.failure = Some("boom".into());
        v.push(f);
        let s = summarize(&v);
        assert_eq!((s.n, s.n_decided, s.n_failed), (2, 1, 1));
    }

    /// Direct evaluation of the closed form with z written out.
    fn wilson_oracle(k: f64, n: f64, z: f64) -> (f64, f64) {
        let p = k / n;
        let denom = 1.0 + z * z / n;
        let c = p + z * z / (2.0 * n);
        let r = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        ((c - r) / denom, (c + r) / denom)
    }

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 20, 0.95).0, 0.0);
        assert_eq!(wilson_interval(20, 20, 0.95).1, 1.0);
        let (lo, hi) = wilson_interval(30, 30, 0.95);
        // 30 / (30 + z²) with z = 1.959964
        let z: f64 = 1.959_963_984_540_054;
        assert!((lo - 30.0 / (30.0 + z * z)).abs() < 1e-12);
        assert!((lo - 0.8865).abs() < 1e-4, "{lo}");
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(7, 19, 0.9);
        let (olo, ohi) = wilson_oracle(7.0, 19.0, 1.644_853_626_951_472);
        assert!((lo - olo).abs() < 1e-12 && (hi - ohi).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn count_identity(c in 0usize..20, w in 0usize..20, a in 0usize..20) {
            prop_assume!(c + w + a > 0);
            let s = summarize(&batch(c, w, a));
            let cov = s.coverage;
            let risk = s.risk.unwrap();
            match s.decided_accuracy {
                Some(acc) => prop_assert!((risk + cov * acc - cov).abs() < 1e-12),
                None => prop_assert_eq!(risk, 0.0),
            }
        }

        #[test]
        fn wilson_contains_proportion(n in 1usize..500, frac in 0.0f64..=1.0, conf in 0.5f64..0.999) {
            let k = ((n as f64) * frac).round() as usize;
            let (lo, hi) = wilson_interval(k, n, conf);
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
    }

    fn write_pairs(dir: &Path) -> PathBuf {
        fs::write(dir.join("pair0001.txt"), "1 2\n2 4.5\nNaN 3\n3 6.1\n4 8\n").unwrap();
        fs::write(dir.join("pair0002.txt"), "1 2 3\n4 5 6\n").unwrap();
        fs::write(dir.join("pair0003.txt"), "5 1\n6 2\n7 3\n").unwrap();
        let meta = dir.join("meta.txt");
        fs::write(&meta, "1 1 1 2 2 1\n2 1 3 4 4 1\n3 2 2 1 1 0.5\n").unwrap();
        meta
    }

    #[test]
    fn pair_loading_filters_and_orients() {
        let dir = tempfile::tempdir().unwrap();
        let meta = write_pairs(dir.path());
        let pairs = load_pairs(dir.path(), &meta, 2000, 0).unwrap();
        assert_eq!(
            pairs.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
            ["1", "3"]
        );
        assert_eq!(pairs[0].sample.len(), 4);
        assert_eq!(pairs[0].truth, Truth::XtoY);
        assert_eq!(pairs[1].truth, Truth::YtoX);
        assert_eq!(pairs[1].sample.x(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn pair_loading_subsamples_once() {
        let dir = tempfile::tempdir().unwrap();
        let body: String = (0..50).map(|i| format!("{i} {}\n", 2 * i)).collect();
        fs::write(dir.path().join("7.txt"), body).unwrap();
        let meta = dir.path().join("m");
        fs::write(&meta, "7 1 1 2 2 1\n").unwrap();
        let a = load_pairs(dir.path(), &meta, 20, 3).unwrap();
        let b = load_pairs(dir.path(), &meta, 20, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].sample.len(), 20);
        assert_eq!(a[0].rows, 50);
        assert!(a[0]
            .sample
            .x()
            .iter()
            .zip(a[0].sample.y())
            .all(|(x, y)| *y == 2.0 * x));
    }

    #[test]
    fn pair_loading_errors() {
        let dir = tempfile::tempdir().unwrap();
        let meta = dir.path().join("m");
        assert!(matches!(
            load_pairs(dir.path(), &meta, 10, 0),
            Err(Error::Io { .. })
        ));
        fs::write(&meta, "1 1 1 2 2 1\n").unwrap();
        fs::write(dir.path().join("1.txt"), "1 2\n3 x\n").unwrap();
        assert!(matches!(
            load_pairs(dir.path(), &meta, 10, 0),
            Err(Error::Parse { line: 2, .. })
        ));
        fs::write(dir.path().join("1.txt"), "nan 2\n3 inf\n").unwrap();
        assert!(matches!(
            load_pairs(dir.path(), &meta, 10, 0),
            Err(Error::EmptyPair(_))
        ));
        fs::write(&meta, "1 1 1 2\n").unwrap();
        assert!(matches!(
            load_pairs(dir.path(), &meta, 10, 0),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn benchmark_pairs_methods_on_one_draw() {
        let mut cfg = RunConfig::default();
        cfg.threshold.r = 4;
        cfg.trac.b = 4;
        let inputs = vec![
            BenchInput::Scenario(Scenario::new(ScenarioKind::CubicAnm, 60, 1)),
            BenchInput::Scenario(Scenario::new(ScenarioKind::CubicAnm, 10, 2)),
        ];
        let mut sink = Vec::new();
        let recs = run_benchmark(&inputs, &Method::ALL, &cfg, &mut sink, false).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs[..3]
            .iter()
            .all(|r| r.checksum == recs[0].checksum && !r.is_failure()));
        // n = 10 is too small for every method; the run continues
        assert!(recs[3..].iter().all(|r| r.is_failure()));
        let text = String::from_utf8(sink).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().all(|l| l.ends_with(",NA")));
        let mut again = Vec::new();
        run_benchmark(&inputs, &Method::ALL, &cfg, &mut again, false).unwrap();
        assert_eq!(String::from_utf8(again).unwrap(), text);
        let groups = summarize_groups(&recs);
        assert_eq!(groups.len(), 6);
    }
}
