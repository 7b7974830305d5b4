//! Experiment driver: every benchmark on every architecture under every
//! router, optimization level and trial; best-of selection; normalization;
//! CSV and plot-table output.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::arch::Architecture;
use crate::circuit::Circuit;
use crate::scoring::{ErrorModel, Metrics};
use crate::simulator::{compact, InitialState, SimError, Simulator};
use crate::transpiler::{self, RouterKind, SabreParams, TranspileConfig};

pub const CSV_COLUMNS: [&str; 21] = [
    "benchmark",
    "arch",
    "c",
    "router",
    "opt_level",
    "trial",
    "seed",
    "status",
    "n_gate_orig",
    "n_gate",
    "depth_orig",
    "depth",
    "score_orig",
    "score",
    "norm_gates",
    "norm_depth",
    "norm_score",
    "t_trans_s",
    "t_sim_s",
    "norm_t_sim",
    "selected",
];

/// Repetitions whose median is reported as a simulation time.
pub const SIM_REPEATS: usize = 3;
/// Lowest fidelity accepted for a simulated selected output.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no selected records to report")]
    NothingSelected,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("unknown aggregate '{0}' (expected best or mean)")]
    UnknownAggregate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    /// Simulation skipped: the state vector exceeds the simulator cap.
    Capacity,
    /// Transpilation or equivalence check failed.
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Capacity => "capacity",
            Status::Failed => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "capacity" => Ok(Status::Capacity),
            "failed" => Ok(Status::Failed),
            other => Err(format!("unknown status '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub routers: Vec<RouterKind>,
    pub opt_levels: Vec<u8>,
    pub trials: usize,
    pub simulate: bool,
    pub seed_base: u64,
    /// Record wall-clock columns; off makes whole files reproducible.
    pub timing: bool,
    pub sabre: SabreParams,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            routers: RouterKind::ALL.to_vec(),
            opt_levels: vec![0, 1, 2, 3],
            trials: 10,
            simulate: false,
            seed_base: 0,
            timing: true,
            sabre: SabreParams::default(),
        }
    }
}

impl Protocol {
    pub fn outputs_per_pair(&self) -> usize {
        self.routers.len() * self.opt_levels.len() * self.trials
    }

    /// Seed of the `trial`-th run of (router, level) within a pair.
    pub fn seed(&self, router_idx: usize, level_idx: usize, trial: usize) -> u64 {
        let idx = (router_idx * self.opt_levels.len() + level_idx) * self.trials + trial;
        self.seed_base.wrapping_add(idx as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub benchmark: String,
    pub arch: String,
    pub c: f64,
    pub router: RouterKind,
    pub opt_level: u8,
    pub trial: usize,
    pub seed: u64,
    pub status: Status,
    pub n_gate_orig: usize,
    pub n_gate: Option<usize>,
    pub depth_orig: usize,
    pub depth: Option<usize>,
    pub score_orig: f64,
    pub score: Option<f64>,
    pub norm_gates: Option<f64>,
    pub norm_depth: Option<f64>,
    pub norm_score: Option<f64>,
    pub t_trans_s: Option<f64>,
    pub t_sim_s: Option<f64>,
    pub norm_t_sim: Option<f64>,
    pub selected: bool,
}

/// Metrics of the architecture-free native form a benchmark is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub metrics: Metrics,
    pub t_sim_s: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

impl BenchmarkRecord {
    /// Fills the ratio columns from raw metrics and the baseline.
    pub fn normalize(&mut self) {
        self.norm_gates = self.n_gate.and_then(|n| ratio(n as f64, self.n_gate_orig as f64));
        self.norm_depth = self.depth.and_then(|d| ratio(d as f64, self.depth_orig as f64));
        self.norm_score = self.score.and_then(|s| ratio(s, self.score_orig));
    }

    fn sort_key(&self) -> (u8, usize, u64) {
        (self.opt_level, self.trial, self.seed)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[xs.len() / 2]
}

/// Median simulation time of `circuit` from |0...0>, excluding allocation.
fn timed_simulation(sim: &Simulator, circuit: &Circuit) -> Result<f64, SimError> {
    let mut times = Vec::with_capacity(SIM_REPEATS);
    for _ in 0..SIM_REPEATS {
        times.push(sim.simulate(circuit, InitialState::Basis(0))?.elapsed.as_secs_f64());
    }
    Ok(median(times))
}

/// Native, unconstrained form of `circuit` and its metrics.
pub fn baseline(circuit: &Circuit, model: &ErrorModel, sim: Option<&Simulator>) -> (Circuit, Baseline) {
    let native = transpiler::decompose_to_native(circuit);
    let metrics = Metrics::of(&native, model);
    let t_sim_s = sim.and_then(|s| timed_simulation(s, &native).ok());
    (native, Baseline { metrics, t_sim_s })
}

struct Job<'a> {
    bench: usize,
    arch: usize,
    router_idx: usize,
    level_idx: usize,
    trial: usize,
    circuit: &'a Circuit,
    device: &'a Architecture,
}

struct Produced {
    record: BenchmarkRecord,
    output: Option<(Circuit, Vec<usize>)>,
}

fn run_job(job: &Job, name: &str, base: &Baseline, protocol: &Protocol, model: &ErrorModel) -> Produced {
    let router = protocol.routers[job.router_idx];
    let opt_level = protocol.opt_levels[job.level_idx];
    let seed = protocol.seed(job.router_idx, job.level_idx, job.trial);
    let mut record = BenchmarkRecord {
        benchmark: name.to_string(),
        arch: job.device.name().to_string(),
        c: job.device.connectivity(),
        router,
        opt_level,
        trial: job.trial,
        seed,
        status: Status::Ok,
        n_gate_orig: base.metrics.n_gate,
        n_gate: None,
        depth_orig: base.metrics.depth,
        depth: None,
        score_orig: base.metrics.score,
        score: None,
        norm_gates: None,
        norm_depth: None,
        norm_score: None,
        t_trans_s: None,
        t_sim_s: None,
        norm_t_sim: None,
        selected: false,
    };
    let config = TranspileConfig { router, opt_level, seed, sabre: protocol.sabre.clone() };
    match transpiler::transpile(job.circuit, job.device, &config) {
        Ok(out) => {
            let m = Metrics::of(&out.circuit, model);
            record.n_gate = Some(m.n_gate);
            record.depth = Some(m.depth);
            record.score = Some(m.score);
            if protocol.timing {
                record.t_trans_s = Some(out.t_trans.as_secs_f64());
            }
            if let Err(e) = transpiler::validate_output(&out.circuit, job.device) {
                log::error!("{name} on {}: {e}", job.device.name());
                record.status = Status::Failed;
            }
            record.normalize();
            let layout = out.final_layout.logical_to_physical().to_vec();
            Produced { record, output: Some((out.circuit, layout)) }
        }
        Err(e) => {
            log::warn!("{name} on {}: {e}", job.device.name());
            record.status = Status::Failed;
            Produced { record, output: None }
        }
    }
}

/// Index of the best record: lowest score, then fewer gates, then lower seed.
pub fn select_best(records: &[BenchmarkRecord]) -> Option<usize> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status != Status::Failed && r.score.is_some())
        .min_by(|(_, a), (_, b)| {
            a.score
                .unwrap()
                .total_cmp(&b.score.unwrap())
                .then(a.n_gate.cmp(&b.n_gate))
                .then(a.seed.cmp(&b.seed))
        })
        .map(|(i, _)| i)
}

/// Simulates the selected output of one pair, checks it against the
/// original and fills the simulation columns.
fn simulate_selected(
    record: &mut BenchmarkRecord,
    original: &Circuit,
    output: &Circuit,
    final_layout: &[usize],
    base: &Baseline,
    sim: &Simulator,
    timing: bool,
) {
    let mut keep = output.active_qubits();
    keep.extend_from_slice(final_layout);
    keep.sort_unstable();
    keep.dedup();
    if sim.check_capacity(keep.len()).is_err() || sim.check_capacity(original.num_qubits()).is_err() {
        record.status = Status::Capacity;
        return;
    }
    match sim.equivalence(original, output, final_layout) {
        Ok(f) if f >= 1.0 - EQUIVALENCE_TOLERANCE => {}
        Ok(f) => {
            log::error!("{} on {}: fidelity {f}", record.benchmark, record.arch);
            record.status = Status::Failed;
            return;
        }
        Err(SimError::Capacity { .. } | SimError::OverBudget { .. }) => {
            record.status = Status::Capacity;
            return;
        }
        Err(e) => {
            log::error!("{} on {}: {e}", record.benchmark, record.arch);
            record.status = Status::Failed;
            return;
        }
    }
    if timing {
        let (small, _) = compact(output, &keep);
        match timed_simulation(sim, &small) {
            Ok(t) => {
                record.t_sim_s = Some(t);
                record.norm_t_sim = base.t_sim_s.and_then(|b| ratio(t, b));
            }
            Err(_) => record.status = Status::Capacity,
        }
    }
}

/// Runs the protocol over every (benchmark, architecture) pair. Records come
/// back grouped by benchmark then architecture (input order), then by
/// router, level and trial.
pub fn run_suite(
    benchmarks: &[(String, Circuit)],
    archs: &[Architecture],
    protocol: &Protocol,
    model: &ErrorModel,
) -> Vec<BenchmarkRecord> {
    let sim = Simulator::from_env();
    let timing_sim = (protocol.simulate && protocol.timing).then_some(&sim);
    let baselines: Vec<(Circuit, Baseline)> = benchmarks
        .par_iter()
        .map(|(_, c)| {
            let fits = sim.check_capacity(c.num_qubits()).is_ok();
            baseline(c, model, if fits { timing_sim } else { None })
        })
        .collect();

    let mut jobs = Vec::new();
    for (b, (_, circuit)) in benchmarks.iter().enumerate() {
        for (a, device) in archs.iter().enumerate() {
            for router_idx in 0..protocol.routers.len() {
                for level_idx in 0..protocol.opt_levels.len() {
                    for trial in 0..protocol.trials {
                        jobs.push(Job { bench: b, arch: a, router_idx, level_idx, trial, circuit, device });
                    }
                }
            }
        }
    }
    let produced: Vec<((usize, usize), Produced)> = jobs
        .par_iter()
        .map(|job| ((job.bench, job.arch), run_job(job, &benchmarks[job.bench].0, &baselines[job.bench].1, protocol, model)))
        .collect();

    let mut groups: Vec<Vec<Produced>> = (0..benchmarks.len() * archs.len()).map(|_| Vec::new()).collect();
    for ((b, a), p) in produced {
        groups[b * archs.len() + a].push(p);
    }
    let groups: Vec<Vec<BenchmarkRecord>> = groups
        .into_par_iter()
        .enumerate()
        .map(|(g, mut items)| {
            items.sort_by_key(|p| (p.record.router, p.record.sort_key()));
            let b = g / archs.len();
            let records: Vec<BenchmarkRecord> = items.iter().map(|p| p.record.clone()).collect();
            let mut records = records;
            if let Some(best) = select_best(&records) {
                records[best].selected = true;
                if protocol.simulate {
                    let (out, layout) = items[best].output.as_ref().expect("selected record has an output");
                    simulate_selected(
                        &mut records[best],
                        &benchmarks[b].1,
                        out,
                        layout,
                        &baselines[b].1,
                        &sim,
                        protocol.timing,
                    );
                }
            }
            log::info!("{} on {}: {} outputs", benchmarks[b].0, archs[g % archs.len()].name(), records.len());
            records
        })
        .collect();
    groups.into_iter().flatten().collect()
}

/// `%.9g`-style rendering: 9 significant digits, trailing zeros trimmed,
/// exponent form below 1e-4 or from 1e9.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (8 - exp) as usize, x))
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn opt_int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes records with a header row in [`CSV_COLUMNS`] order.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.benchmark.clone(),
            r.arch.clone(),
            format_float(r.c),
            r.router.to_string(),
            r.opt_level.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.status.to_string(),
            r.n_gate_orig.to_string(),
            opt_int(r.n_gate),
            r.depth_orig.to_string(),
            opt_int(r.depth),
            format_float(r.score_orig),
            opt_float(r.score),
            opt_float(r.norm_gates),
            opt_float(r.norm_depth),
            opt_float(r.norm_score),
            opt_float(r.t_trans_s),
            opt_float(r.t_sim_s),
            opt_float(r.norm_t_sim),
            (r.selected as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[BenchmarkRecord], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Parses a results CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(HarnessError::Format { line: 1, message: format!("expected columns {}", CSV_COLUMNS.join(",")) });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |col: &str, v: &str| HarnessError::Format { line, message: format!("bad {col} '{v}'") };
        let get = |i: usize| row.get(i).unwrap_or("");
        fn parse<T: FromStr>(v: &str) -> Option<T> {
            v.parse().ok()
        }
        let req_usize = |i: usize| parse::<usize>(get(i)).ok_or_else(|| err(CSV_COLUMNS[i], get(i)));
        let req_f64 = |i: usize| parse::<f64>(get(i)).ok_or_else(|| err(CSV_COLUMNS[i], get(i)));
        let opt_usize = |i: usize| -> Result<Option<usize>, HarnessError> {
            if get(i).is_empty() {
                Ok(None)
            } else {
                req_usize(i).map(Some)
            }
        };
        let opt_f64 = |i: usize| -> Result<Option<f64>, HarnessError> {
            if get(i).is_empty() {
                Ok(None)
            } else {
                req_f64(i).map(Some)
            }
        };
        out.push(BenchmarkRecord {
            benchmark: get(0).to_string(),
            arch: get(1).to_string(),
            c: req_f64(2)?,
            router: get(3).parse().map_err(|_| err("router", get(3)))?,
            opt_level: parse(get(4)).ok_or_else(|| err("opt_level", get(4)))?,
            trial: req_usize(5)?,
            seed: parse(get(6)).ok_or_else(|| err("seed", get(6)))?,
            status: get(7).parse().map_err(|_| err("status", get(7)))?,
            n_gate_orig: req_usize(8)?,
            n_gate: opt_usize(9)?,
            depth_orig: req_usize(10)?,
            depth: opt_usize(11)?,
            score_orig: req_f64(12)?,
            score: opt_f64(13)?,
            norm_gates: opt_f64(14)?,
            norm_depth: opt_f64(15)?,
            norm_score: opt_f64(16)?,
            t_trans_s: opt_f64(17)?,
            t_sim_s: opt_f64(18)?,
            norm_t_sim: opt_f64(19)?,
            selected: match get(20) {
                "1" => true,
                "0" => false,
                v => return Err(err("selected", v)),
            },
        });
    }
    Ok(out)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Vec<BenchmarkRecord>, HarnessError> {
    read_csv(fs::File::open(path)?)
}

/// How plot tables summarize the outputs of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// The selected output.
    Best,
    /// Mean over all successful outputs.
    Mean,
}

impl FromStr for Aggregate {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best" => Ok(Aggregate::Best),
            "mean" => Ok(Aggregate::Mean),
            other => Err(HarnessError::UnknownAggregate(other.to_string())),
        }
    }
}

/// Columns summarized into plot tables; time metrics also get a log10 column.
pub const PLOT_METRICS: [(&str, bool); 5] =
    [("norm_score", false), ("norm_gates", false), ("norm_depth", false), ("t_trans_s", true), ("norm_t_sim", true)];

fn metric(r: &BenchmarkRecord, name: &str) -> Option<f64> {
    match name {
        "norm_score" => r.norm_score,
        "norm_gates" => r.norm_gates,
        "norm_depth" => r.norm_depth,
        "t_trans_s" => r.t_trans_s,
        "norm_t_sim" => r.norm_t_sim,
        _ => None,
    }
}

/// One row of a plot table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub benchmark: String,
    pub arch: String,
    pub c: f64,
    pub value: Option<f64>,
}

/// Per-pair values of `metric`, in first-appearance order of the pairs.
pub fn plot_table(records: &[BenchmarkRecord], metric_name: &str, aggregate: Aggregate) -> Vec<PlotPoint> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in records {
        let k = (r.benchmark.as_str(), r.arch.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .filter_map(|(b, a)| {
            let pair: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.benchmark == b && r.arch == a).collect();
            let value = match aggregate {
                Aggregate::Best => {
                    let sel = pair.iter().find(|r| r.selected)?;
                    metric(sel, metric_name)
                }
                Aggregate::Mean => {
                    let vals: Vec<f64> = pair
                        .iter()
                        .filter(|r| r.status != Status::Failed)
                        .filter_map(|r| metric(r, metric_name))
                        .collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                }
            };
            Some(PlotPoint { benchmark: b.to_string(), arch: a.to_string(), c: pair[0].c, value })
        })
        .collect()
}

/// Writes `results.csv` and one `plot_<metric>.csv` per entry of
/// [`PLOT_METRICS`] into `dir`. Returns the written paths.
pub fn report(records: &[BenchmarkRecord], dir: impl AsRef<Path>, aggregate: Aggregate) -> Result<Vec<std::path::PathBuf>, HarnessError> {
    if !records.iter().any(|r| r.selected) {
        return Err(HarnessError::NothingSelected);
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let results = dir.join("results.csv");
    write_csv_file(records, &results)?;
    written.push(results);
    for (name, log_scale) in PLOT_METRICS {
        let path = dir.join(format!("plot_{name}.csv"));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["benchmark", "arch", "c", name];
        let log_col = format!("log10_{name}");
        if log_scale {
            header.push(&log_col);
        }
        w.write_record(&header)?;
        for p in plot_table(records, name, aggregate) {
            let mut row = vec![p.benchmark, p.arch, format_float(p.c), opt_float(p.value)];
            if log_scale {
                row.push(opt_float(p.value.filter(|v| *v > 0.0).map(f64::log10)));
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
