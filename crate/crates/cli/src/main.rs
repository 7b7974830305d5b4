use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qarch_core::arch::{self, Architecture};
use qarch_core::benchgen::{self, BenchmarkSpec, Generator};
use qarch_core::harness::{self, Aggregate, Protocol};
use qarch_core::scoring::{self, ErrorModel, Metrics};
use qarch_core::simulator::{compact, InitialState, Simulator};
use qarch_core::transpiler::{self, RouterKind, TranspileConfig};
use qarch_core::{qasm, Circuit};

#[derive(Parser)]
#[command(name = "qarch", version, about = "Benchmark quantum circuits across qubit coupling architectures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print qubit count, coupled-pair count and connectivity of every built-in architecture.
    ListArchs,
    /// Print one architecture as TOML, or as Graphviz DOT with --dot.
    ShowArch {
        /// Built-in name or path to an architecture file.
        name: String,
        #[arg(long)]
        dot: bool,
    },
    /// Write a generated benchmark circuit as OpenQASM 2.0.
    GenBench {
        /// qft, qpe, ising, surface, steane or code422.
        family: String,
        #[arg(long)]
        qubits: usize,
        /// Phase for qpe, in turns.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Transpile one circuit and print metrics as key=value lines.
    Transpile(TranspileArgs),
    /// Simulate a circuit from |0...0> and print the most likely basis states.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        top: usize,
    },
    /// Run the full protocol and write the results CSV.
    Run(RunArgs),
    /// Write plot-data tables from a results CSV.
    Report {
        results: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = AggregateArg::Best)]
        aggregate: AggregateArg,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// TOML file with e1q, e2q, beta, include_measure; flags override it.
    #[arg(long)]
    error_model: Option<PathBuf>,
    #[arg(long)]
    e1q: Option<f64>,
    #[arg(long)]
    e2q: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> Result<ErrorModel> {
        let mut m = match &self.error_model {
            Some(p) => ErrorModel::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => ErrorModel::default(),
        };
        if let Some(v) = self.e1q {
            m.e1q = v;
        }
        if let Some(v) = self.e2q {
            m.e2q = v;
        }
        if let Some(v) = self.beta {
            m.beta = v;
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Args)]
struct TranspileArgs {
    input: PathBuf,
    /// Where to write the transpiled circuit.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    arch: String,
    #[arg(long, default_value = "sabre")]
    router: RouterKind,
    #[arg(long, default_value_t = 1)]
    opt: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Best,
    Mean,
}

impl From<AggregateArg> for Aggregate {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::Best => Aggregate::Best,
            AggregateArg::Mean => Aggregate::Mean,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated names or files, or `all`.
    #[arg(long, default_value = "all")]
    archs: String,
    /// Comma-separated benchmark names (e.g. qft_12) or .qasm files, or `default`.
    #[arg(long, default_value = "default")]
    benches: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Seed base; trial seeds are this plus their index within the pair.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Simulate selected outputs that fit the simulator.
    #[arg(long)]
    simulate: bool,
    #[arg(long, value_delimiter = ',', default_value = "basic,sabre")]
    routers: Vec<RouterKind>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    levels: Vec<u8>,
    /// `off` leaves wall-clock columns empty so reruns are byte-identical.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    timing: Switch,
    #[command(flatten)]
    model: ModelArgs,
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match qasm::parse(&text) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                log::warn!("{}: {w}", path.display());
            }
            Ok(parsed.circuit)
        }
        Err(e) => {
            for d in &e.diagnostics {
                eprintln!("{}:{d}", path.display());
            }
            bail!("{} does not parse", path.display())
        }
    }
}

fn list_archs() {
    println!("{:<6} {:<10} {:>6} {:>6} {:>6}", "name", "family", "qubits", "n_con", "c");
    for a in arch::all_builtins() {
        println!("{:<6} {:<10} {:>6} {:>6} {:>6.4}", a.name(), a.family().as_str(), a.num_qubits(), a.n_con(), a.connectivity());
    }
}

fn show_arch(name: &str, dot: bool) -> Result<()> {
    let a = arch::resolve(name)?;
    if dot {
        print!("{}", a.to_dot());
    } else {
        print!("{}", arch::to_toml_string(&a));
    }
    Ok(())
}

fn gen_bench(family: &str, qubits: usize, theta: Option<f64>, output: &Path) -> Result<()> {
    let mut generator = Generator::for_size(family, qubits)?;
    if let Some(t) = theta {
        match &mut generator {
            Generator::Qpe { phase, .. } => *phase = t,
            _ => bail!("--theta applies to qpe only"),
        }
    }
    let circuit = generator.generate()?;
    fs::write(output, qasm::serialize(&circuit)).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn transpile_cmd(args: &TranspileArgs) -> Result<()> {
    let model = args.model.model()?;
    let circuit = read_circuit(&args.input)?;
    let device = arch::resolve(&args.arch)?;
    let config = TranspileConfig::new(args.router, args.opt, args.seed);
    let out = transpiler::transpile(&circuit, &device, &config)?;
    let (_, base) = harness::baseline(&circuit, &model, None);
    let m = Metrics::of(&out.circuit, &model);
    let ratio = |a: f64, b: f64| if b == 0.0 { String::new() } else { harness::format_float(a / b) };
    let join = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
    let lines = [
        ("arch", device.name().to_string()),
        ("c", harness::format_float(device.connectivity())),
        ("router", args.router.to_string()),
        ("opt_level", args.opt.to_string()),
        ("seed", args.seed.to_string()),
        ("t_trans_s", harness::format_float(out.t_trans.as_secs_f64())),
        ("swaps", out.swaps.to_string()),
        ("n_gate_orig", base.metrics.n_gate.to_string()),
        ("n_gate", m.n_gate.to_string()),
        ("depth_orig", base.metrics.depth.to_string()),
        ("depth", m.depth.to_string()),
        ("score_orig", harness::format_float(base.metrics.score)),
        ("score", harness::format_float(m.score)),
        ("score_full", harness::format_float(scoring::score_full(&out.circuit, &model))),
        ("norm_gates", ratio(m.n_gate as f64, base.metrics.n_gate as f64)),
        ("norm_depth", ratio(m.depth as f64, base.metrics.depth as f64)),
        ("norm_score", ratio(m.score, base.metrics.score)),
        ("initial_layout", join(out.initial_layout.logical_to_physical())),
        ("final_layout", join(out.final_layout.logical_to_physical())),
    ];
    for (k, v) in lines {
        println!("{k}={v}");
    }
    if let Some(path) = &args.output {
        fs::write(path, qasm::serialize(&out.circuit)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn simulate_cmd(input: &Path, top: usize) -> Result<()> {
    let mut circuit = read_circuit(input)?;
    let sim = Simulator::from_env();
    if sim.check_capacity(circuit.num_qubits()).is_err() {
        // transpiled files span the whole device; idle qubits stay in |0>
        let active = circuit.active_qubits();
        println!("qubits={}", active.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","));
        circuit = compact(&circuit, &active).0;
    }
    let out = sim.simulate(&circuit, InitialState::Basis(0))?;
    let qubits: Vec<usize> = (0..circuit.num_qubits()).collect();
    let dist = out.state.probabilities(&qubits);
    println!("t_sim_s={}", harness::format_float(out.elapsed.as_secs_f64()));
    for (outcome, p) in dist.top(top) {
        if p > 0.0 {
            println!("{} {}", dist.label(outcome), harness::format_float(p));
        }
    }
    Ok(())
}

fn resolve_archs(list: &str) -> Result<Vec<Architecture>> {
    if list == "all" {
        return Ok(arch::all_builtins());
    }
    list.split(',').map(|s| arch::resolve(s.trim()).with_context(|| format!("architecture '{s}'"))).collect()
}

fn resolve_benches(list: &str) -> Result<Vec<(String, Circuit)>> {
    if list == "default" {
        return Ok(benchgen::bundled().into_iter().map(|(n, c)| (n.to_string(), c)).collect());
    }
    list.split(',')
        .map(|s| {
            let s = s.trim();
            let path = Path::new(s);
            if path.extension().is_some_and(|e| e == "qasm") {
                let name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| s.to_string());
                Ok((name, read_circuit(path)?))
            } else {
                let spec: BenchmarkSpec = s.parse().with_context(|| format!("benchmark '{s}'"))?;
                Ok((spec.name.clone(), spec.generate()?))
            }
        })
        .collect()
}

fn run_cmd(args: &RunArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if let Some(l) = args.levels.iter().find(|&&l| l > transpiler::MAX_OPT_LEVEL) {
        bail!("optimization level {l} is out of range 0..=3");
    }
    let model = args.model.model()?;
    let archs = resolve_archs(&args.archs)?;
    let benches = resolve_benches(&args.benches)?;
    let protocol = Protocol {
        routers: args.routers.clone(),
        opt_levels: args.levels.clone(),
        trials: args.trials,
        simulate: args.simulate,
        seed_base: args.seed,
        timing: matches!(args.timing, Switch::On),
        ..Protocol::default()
    };
    let records = harness::run_suite(&benches, &archs, &protocol, &model);
    harness::write_csv_file(&records, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let failed = records.iter().filter(|r| r.status == harness::Status::Failed).count();
    let capacity = records.iter().filter(|r| r.status == harness::Status::Capacity).count();
    eprintln!(
        "{} records for {} pairs ({} failed, {} over simulator capacity) -> {}",
        records.len(),
        benches.len() * archs.len(),
        failed,
        capacity,
        args.out.display()
    );
    Ok(())
}

fn report_cmd(results: &Path, out_dir: &Path, aggregate: AggregateArg) -> Result<()> {
    let records = harness::read_csv_file(results).with_context(|| format!("reading {}", results.display()))?;
    for path in harness::report(&records, out_dir, aggregate.into())? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListArchs => {
            list_archs();
            Ok(())
        }
        Command::ShowArch { name, dot } => show_arch(name, *dot),
        Command::GenBench { family, qubits, theta, output } => gen_bench(family, *qubits, *theta, output),
        Command::Transpile(args) => transpile_cmd(args),
        Command::Simulate { input, top } => simulate_cmd(input, *top),
        Command::Run(args) => run_cmd(args),
        Command::Report { results, out_dir, aggregate } => report_cmd(results, out_dir, *aggregate),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
