//! `hea-bench`: exact energies, VQE runs, expressibility estimates and the
//! full benchmark suite from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-file error, 3 numerical
//! failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hea_core::bench::{
    correlation_study, median, noise_model_sweep, rank_circuits, vqe_grid, write_expressibility_csv,
    write_histogram_csv, write_ranking_csv, write_scatter_csv, write_sweep_csv, write_trace_csv,
    write_vqe_csv, BenchError, CircuitMetrics, OutlierPolicy, RankKey, VqeSettings,
};
use hea_core::expressibility::{
    estimate_expressibility, ExpressibilityError, ExpressibilityResult, ExpressibilitySettings,
    Sampler, DEFAULT_BINS, DEFAULT_SAMPLES,
};
use hea_core::spsa::SpsaConfig;
use hea_core::vqe::{VqeError, DEFAULT_SHOTS};
use hea_core::{
    build_noise_model, data, exact_ground_energy, jordan_wigner, CircuitError, DeviceCalibration,
    IntegralSet, NoiseModel, ParameterizedCircuit, PauliHamiltonian,
};

#[derive(Parser, Debug)]
#[command(name = "hea-bench", version, about = "Hardware-efficient ansatz benchmarks for molecular VQE")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Run with this single seed.
    #[arg(long, global = true, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seeds to run: a count N (seeds 0..N) or a comma-separated list.
    #[arg(long, global = true, default_value = "5")]
    seeds: String,
    /// Shots per energy evaluation.
    #[arg(long, global = true, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for CSV output; tables go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the exact ground-state energy of a Hamiltonian.
    Exact(ExactArgs),
    /// Map an integral file to a Pauli Hamiltonian file.
    Jw(JwArgs),
    /// Run VQE for one circuit over the seed list.
    Vqe(VqeArgs),
    /// Estimate a circuit's expressibility.
    Expressibility(ExprArgs),
    /// Run a study over the circuit zoo.
    Suite(SuiteArgs),
}

#[derive(Args, Debug)]
struct ExactArgs {
    /// Hamiltonian file; the shipped H2 Hamiltonian when omitted.
    #[arg(long, conflicts_with = "integrals")]
    ham: Option<PathBuf>,
    /// Integral file, mapped with Jordan-Wigner first.
    #[arg(long)]
    integrals: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct JwArgs {
    /// Integral file.
    #[arg(long)]
    integrals: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct SpsaArgs {
    /// SPSA iterations.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Fixed SPSA step magnitude `a` (calibrated when omitted).
    #[arg(long)]
    spsa_a: Option<f64>,
    /// SPSA perturbation magnitude `c`.
    #[arg(long, default_value_t = 0.1)]
    spsa_c: f64,
}

#[derive(Args, Debug)]
struct VqeArgs {
    /// Zoo circuit id (1-12) or path to a circuit file.
    #[arg(long)]
    circuit: String,
    /// Hamiltonian file; the shipped H2 Hamiltonian when omitted.
    #[arg(long)]
    ham: Option<PathBuf>,
    /// Device calibration file for noisy simulation.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Reference energy; the exact ground energy when omitted.
    #[arg(long)]
    reference: Option<f64>,
    #[command(flatten)]
    spsa: SpsaArgs,
}

#[derive(Args, Debug)]
struct ExprArgs {
    /// Zoo circuit id (1-12) or path to a circuit file.
    #[arg(long)]
    circuit: String,
    /// Fidelity samples.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Histogram bins on [0, 1].
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Parameter sampler.
    #[arg(long, default_value = "uniform")]
    sampler: Sampler,
    /// Device calibration file for noisy simulation.
    #[arg(long)]
    noise: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ideal,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Vqe,
    Expr,
    Correlate,
    Sweep,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value = "ideal")]
    mode: Mode,
    #[arg(long, value_enum)]
    what: What,
    /// Circuit ids (default: all twelve, or 1,2,9,10,11,12 for sweeps).
    #[arg(long, value_delimiter = ',')]
    circuits: Option<Vec<u32>>,
    /// Calibration for noisy mode; the shipped ibmqx2-like file when omitted.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Calibration files for sweeps; the seven shipped ones when omitted.
    #[arg(long, num_args = 0..)]
    cals: Option<Vec<PathBuf>>,
    /// Hamiltonian file; the shipped H2 Hamiltonian when omitted.
    #[arg(long)]
    ham: Option<PathBuf>,
    /// Fidelity samples for expressibility.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Histogram bins for expressibility.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[command(flatten)]
    spsa: SpsaArgs,
}

#[derive(Debug)]
enum AppError {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Input(_) => 2,
            AppError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Input(m) | AppError::Numerical(m) => m,
        }
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> AppError {
    AppError::Input(format!("{}: {e}", path.display()))
}

fn from_circuit_error(e: CircuitError) -> AppError {
    match e {
        CircuitError::UnknownZooId(_) => AppError::Usage(e.to_string()),
        CircuitError::Parse { .. } => AppError::Input(e.to_string()),
        other => AppError::Numerical(other.to_string()),
    }
}

fn from_vqe_error(e: VqeError) -> AppError {
    match e {
        VqeError::Width { .. } | VqeError::NoParameters | VqeError::Reference(_) => {
            AppError::Usage(e.to_string())
        }
        VqeError::Hamiltonian(hea_core::hamiltonian::HamiltonianError::Shots) => {
            AppError::Usage(e.to_string())
        }
        VqeError::Spsa(hea_core::spsa::SpsaError::InvalidConfig(_)) => {
            AppError::Usage(e.to_string())
        }
        other => AppError::Numerical(other.to_string()),
    }
}

fn from_bench_error(e: BenchError) -> AppError {
    match e {
        BenchError::Vqe(v) => from_vqe_error(v),
        BenchError::Io(_) => AppError::Input(e.to_string()),
        BenchError::Empty(_) => AppError::Usage(e.to_string()),
        other => AppError::Numerical(other.to_string()),
    }
}

fn from_expr_error(e: ExpressibilityError) -> AppError {
    match e {
        ExpressibilityError::Samples | ExpressibilityError::Bins => AppError::Usage(e.to_string()),
        ExpressibilityError::Circuit(c) => from_circuit_error(c),
        other => AppError::Numerical(other.to_string()),
    }
}

fn read(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| input_err(path, e))
}

fn seeds(global: &GlobalArgs) -> Result<Vec<u64>, AppError> {
    if let Some(s) = global.seed {
        return Ok(vec![s]);
    }
    let spec = global.seeds.trim();
    let bad = || AppError::Usage(format!("invalid --seeds `{spec}`: expected a count or a list"));
    let list: Vec<u64> = if spec.contains(',') {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    } else {
        let n: u64 = spec.parse().map_err(|_| bad())?;
        (0..n).collect()
    };
    if list.is_empty() {
        return Err(AppError::Usage("seed list is empty".into()));
    }
    Ok(list)
}

fn load_hamiltonian(path: Option<&Path>) -> Result<PauliHamiltonian, AppError> {
    match path {
        None => data::h2_hamiltonian().map_err(|e| AppError::Input(e.to_string())),
        Some(p) => PauliHamiltonian::parse(&read(p)?).map_err(|e| input_err(p, e)),
    }
}

fn load_circuit(spec: &str) -> Result<ParameterizedCircuit, AppError> {
    if let Ok(id) = spec.parse::<u32>() {
        return hea_core::zoo_circuit(id).map_err(from_circuit_error);
    }
    let path = Path::new(spec);
    let label = path
        .file_stem()
        .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    ParameterizedCircuit::parse(&read(path)?, label).map_err(|e| input_err(path, e))
}

fn load_noise(path: &Path) -> Result<NoiseModel, AppError> {
    let cal = DeviceCalibration::parse(&read(path)?).map_err(|e| input_err(path, e))?;
    build_noise_model(&cal).map_err(|e| input_err(path, e))
}

fn default_noisy_model() -> Result<NoiseModel, AppError> {
    let cal = data::calibration("ibmqx2-like")
        .expect("shipped calibration")
        .map_err(|e| AppError::Input(e.to_string()))?;
    build_noise_model(&cal).map_err(|e| AppError::Input(e.to_string()))
}

fn spsa_config(args: &SpsaArgs) -> Result<SpsaConfig, AppError> {
    let config = SpsaConfig {
        max_iterations: args.max_iter,
        a: args.spsa_a,
        c: args.spsa_c,
        ..SpsaConfig::default()
    };
    config
        .validate()
        .map_err(|e| AppError::Usage(e.to_string()))?;
    Ok(config)
}

fn reference(h: &PauliHamiltonian, given: Option<f64>) -> Result<f64, AppError> {
    match given {
        Some(r) => Ok(r),
        None => exact_ground_energy(h).map_err(|e| AppError::Usage(e.to_string())),
    }
}

/// Writes a table to `out/name`, or to stdout without `--out`.
fn emit(
    out: Option<&Path>,
    name: &str,
    write: impl FnOnce(&mut dyn Write) -> Result<(), BenchError>,
) -> Result<(), AppError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| input_err(dir, e))?;
            let path = dir.join(name);
            let mut file = fs::File::create(&path).map_err(|e| input_err(&path, e))?;
            write(&mut file).map_err(|e| input_err(&path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(from_bench_error)
        }
    }
}

fn cmd_exact(args: &ExactArgs) -> Result<(), AppError> {
    let h = match &args.integrals {
        Some(p) => {
            let ints = IntegralSet::parse(&read(p)?).map_err(|e| input_err(p, e))?;
            jordan_wigner(&ints).map_err(|e| input_err(p, e))?
        }
        None => load_hamiltonian(args.ham.as_deref())?,
    };
    let e = exact_ground_energy(&h).map_err(|e| AppError::Usage(e.to_string()))?;
    println!("{e:.10}");
    Ok(())
}

fn cmd_jw(args: &JwArgs, global: &GlobalArgs) -> Result<(), AppError> {
    let p = &args.integrals;
    let ints = IntegralSet::parse(&read(p)?).map_err(|e| input_err(p, e))?;
    let h = jordan_wigner(&ints).map_err(|e| input_err(p, e))?;
    emit(global.out.as_deref(), "hamiltonian.ham", |w| {
        write!(w, "{h}").map_err(BenchError::Io)
    })
}

fn cmd_vqe(args: &VqeArgs, global: &GlobalArgs) -> Result<(), AppError> {
    let circuit = load_circuit(&args.circuit)?;
    let h = load_hamiltonian(args.ham.as_deref())?;
    let noise = args.noise.as_deref().map(load_noise).transpose()?;
    let settings = VqeSettings {
        spsa: spsa_config(&args.spsa)?,
        shots: global.shots,
        seeds: seeds(global)?,
        reference_energy: reference(&h, args.reference)?,
        jobs: global.jobs,
    };
    let grid = vqe_grid(
        std::slice::from_ref(&circuit),
        &[noise.as_ref()],
        &h,
        &settings,
    )
    .map_err(from_bench_error)?;
    let runs = &grid[0][0];
    let model = noise.as_ref().map_or("ideal", |m| m.name());
    let rows: Vec<(&str, u64, _)> = settings
        .seeds
        .iter()
        .zip(runs)
        .map(|(s, r)| (model, *s, r))
        .collect();
    emit(global.out.as_deref(), "vqe.csv", |w| write_vqe_csv(w, &rows))?;
    if let Some(dir) = &global.out {
        for (seed, r) in settings.seeds.iter().zip(runs) {
            let name = format!("trace_{}_{}_seed{}.csv", circuit.label(), model, seed);
            emit(Some(dir), &name, |w| write_trace_csv(w, &r.trace))?;
        }
    }
    let diffs: Vec<f64> = runs.iter().map(|r| r.energy_difference).collect();
    eprintln!(
        "circuit {} ({model}): median energy difference {:.4} Ha over {} seed(s)",
        circuit.label(),
        median(&diffs),
        diffs.len()
    );
    Ok(())
}

fn expr_settings(samples: usize, bins: usize, sampler: Sampler, seed: u64) -> Result<ExpressibilitySettings, AppError> {
    if samples == 0 {
        return Err(AppError::Usage("--samples must be positive".into()));
    }
    if bins == 0 {
        return Err(AppError::Usage("--bins must be positive".into()));
    }
    Ok(ExpressibilitySettings {
        samples,
        bins,
        sampler,
        seed,
    })
}

fn cmd_expressibility(args: &ExprArgs, global: &GlobalArgs) -> Result<(), AppError> {
    let settings = expr_settings(args.samples, args.bins, args.sampler, 0)?;
    let circuit = load_circuit(&args.circuit)?;
    let noise = args.noise.as_deref().map(load_noise).transpose()?;
    let mut results = Vec::new();
    for seed in seeds(global)? {
        let s = ExpressibilitySettings { seed, ..settings };
        results.push(
            estimate_expressibility(&circuit, &s, noise.as_ref()).map_err(from_expr_error)?,
        );
    }
    emit(global.out.as_deref(), "expressibility.csv", |w| {
        write_expressibility_csv(w, &results)
    })?;
    if let Some(dir) = &global.out {
        for (r, seed) in results.iter().zip(seeds(global)?) {
            let name = format!("histogram_{}_{}_seed{}.csv", r.label, r.sampler, seed);
            emit(Some(dir), &name, |w| write_histogram_csv(w, &r.histogram))?;
        }
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    eprintln!(
        "circuit {} ({}, {}): median expressibility {:.4} over {} seed(s)",
        circuit.label(),
        results[0].mode,
        args.sampler,
        median(&values),
        values.len()
    );
    Ok(())
}

fn zoo(ids: &[u32]) -> Result<Vec<ParameterizedCircuit>, AppError> {
    ids.iter()
        .map(|&id| hea_core::zoo_circuit(id).map_err(from_circuit_error))
        .collect()
}

fn suite_expressibility(
    circuits: &[ParameterizedCircuit],
    args: &SuiteArgs,
    seeds: &[u64],
    noise: Option<&NoiseModel>,
) -> Result<Vec<ExpressibilityResult>, AppError> {
    let mut out = Vec::new();
    for c in circuits {
        for &seed in seeds {
            let s = expr_settings(args.samples, args.bins, Sampler::Uniform, seed)?;
            out.push(estimate_expressibility(c, &s, noise).map_err(from_expr_error)?);
        }
    }
    Ok(out)
}

fn metrics(
    circuits: &[ParameterizedCircuit],
    ids: &[u32],
    expr: Option<&[ExpressibilityResult]>,
    vqe: Option<&[Vec<hea_core::vqe::VqeResult>]>,
) -> Vec<CircuitMetrics> {
    circuits
        .iter()
        .zip(ids)
        .enumerate()
        .map(|(i, (c, &id))| {
            let expressibility = expr.map(|all| {
                let v: Vec<f64> = all
                    .iter()
                    .filter(|r| r.label == c.label())
                    .map(|r| r.value)
                    .collect();
                median(&v)
            });
            let (ground_energy, energy_difference) = match vqe {
                Some(runs) => {
                    let e: Vec<f64> = runs[i].iter().map(|r| r.best_energy).collect();
                    let d: Vec<f64> = runs[i].iter().map(|r| r.energy_difference).collect();
                    (Some(median(&e)), Some(median(&d)))
                }
                None => (None, None),
            };
            CircuitMetrics {
                id,
                label: c.label().to_string(),
                gates: c.gates_summary(),
                expressibility,
                ground_energy,
                energy_difference,
            }
        })
        .collect()
}

fn cmd_suite(args: &SuiteArgs, global: &GlobalArgs) -> Result<(), AppError> {
    let seed_list = seeds(global)?;
    let h = load_hamiltonian(args.ham.as_deref())?;
    let reference_energy = reference(&h, None)?;
    let settings = VqeSettings {
        spsa: spsa_config(&args.spsa)?,
        shots: global.shots,
        seeds: seed_list.clone(),
        reference_energy,
        jobs: global.jobs,
    };
    let out = global.out.as_deref();

    if args.what == What::Sweep {
        let ids = args.circuits.clone().unwrap_or_else(|| vec![1, 2, 9, 10, 11, 12]);
        let circuits = zoo(&ids)?;
        let models = match &args.cals {
            Some(paths) if paths.is_empty() => {
                return Err(AppError::Usage("empty calibration list for sweep".into()))
            }
            Some(paths) => paths.iter().map(|p| load_noise(p)).collect::<Result<Vec<_>, _>>()?,
            None => data::synthetic_calibrations()
                .map_err(|e| AppError::Input(e.to_string()))?
                .iter()
                .map(|c| build_noise_model(c).map_err(|e| AppError::Input(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let rows = noise_model_sweep(&circuits, &models, &h, &settings).map_err(from_bench_error)?;
        return emit(out, "sweep.csv", |w| write_sweep_csv(w, &rows));
    }

    let ids = args.circuits.clone().unwrap_or_else(|| (1..=12).collect());
    let circuits = zoo(&ids)?;
    let noise = match args.mode {
        Mode::Ideal => None,
        Mode::Noisy => Some(match &args.noise {
            Some(p) => load_noise(p)?,
            None => default_noisy_model()?,
        }),
    };
    let tag = match &noise {
        Some(m) => format!("noisy_{}", m.name()),
        None => "ideal".to_string(),
    };
    let run_vqe_grid = || -> Result<Vec<Vec<hea_core::vqe::VqeResult>>, AppError> {
        let mut grid = vqe_grid(&circuits, &[noise.as_ref()], &h, &settings)
            .map_err(from_bench_error)?;
        Ok(grid.remove(0))
    };

    match args.what {
        What::Vqe => {
            let runs = run_vqe_grid()?;
            let table = rank_circuits(&metrics(&circuits, &ids, None, Some(&runs)), RankKey::EnergyDifference)
                .map_err(from_bench_error)?;
            emit(out, &format!("ranking_vqe_{tag}.csv"), |w| write_ranking_csv(w, &table))?;
            if out.is_some() {
                let model = noise.as_ref().map_or("ideal", |m| m.name());
                let rows: Vec<(&str, u64, _)> = runs
                    .iter()
                    .flat_map(|per| seed_list.iter().zip(per).map(move |(s, r)| (model, *s, r)))
                    .collect();
                emit(out, &format!("vqe_{tag}.csv"), |w| write_vqe_csv(w, &rows))?;
            }
        }
        What::Expr => {
            let expr = suite_expressibility(&circuits, args, &seed_list, noise.as_ref())?;
            let table = rank_circuits(&metrics(&circuits, &ids, Some(&expr), None), RankKey::Expressibility)
                .map_err(from_bench_error)?;
            emit(out, &format!("ranking_expr_{tag}.csv"), |w| write_ranking_csv(w, &table))?;
        }
        What::Correlate => {
            let expr = suite_expressibility(&circuits, args, &seed_list, noise.as_ref())?;
            let runs = run_vqe_grid()?;
            let flat: Vec<hea_core::vqe::VqeResult> = runs.iter().flatten().cloned().collect();
            let report = correlation_study(&expr, &flat, OutlierPolicy::default())
                .map_err(from_bench_error)?;
            let table = rank_circuits(
                &metrics(&circuits, &ids, Some(&expr), Some(&runs)),
                RankKey::EnergyDifference,
            )
            .map_err(from_bench_error)?;
            emit(out, &format!("scatter_{tag}.csv"), |w| write_scatter_csv(w, &report))?;
            if out.is_some() {
                emit(out, &format!("ranking_{tag}.csv"), |w| write_ranking_csv(w, &table))?;
            }
            let excluded: Vec<&str> = report.excluded.iter().map(|(l, _)| l.as_str()).collect();
            eprintln!("pearson r = {:.4}; excluded: {excluded:?}", report.r);
        }
        What::Sweep => unreachable!("handled above"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    if cli.global.jobs > 0 {
        // ignore the error if a pool already exists (only possible in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global();
    }
    if cli.global.shots == 0 {
        return Err(AppError::Usage("--shots must be positive".into()));
    }
    match &cli.command {
        Command::Exact(a) => cmd_exact(a),
        Command::Jw(a) => cmd_jw(a, &cli.global),
        Command::Vqe(a) => cmd_vqe(a, &cli.global),
        Command::Expressibility(a) => cmd_expressibility(a, &cli.global),
        Command::Suite(a) => cmd_suite(a, &cli.global),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
