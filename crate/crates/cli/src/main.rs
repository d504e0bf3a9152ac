//! `submix`: build instruction-tuning data mixtures from the command line.
//!
//! Exit codes: 0 on success, 1 on validation or configuration errors, 2 on
//! I/O errors. Diagnostics go to stderr; machine output goes to stdout or
//! `--out`. `--seed` and `--out` fall back to `SUBMIX_SEED` and `SUBMIX_OUT`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use submix_core::allocate::taylor_softmax_allocate;
use submix_core::baselines::{run_baseline, BaselineConfig, BaselineStrategy};
use submix_core::formats::{load_manifest, to_canonical_json, validate_corpus};
use submix_core::pipeline::{
    allocate, run_instance_selection, run_task_selection, AllocationPlan, TaskSelection,
    DEFAULT_PER_TASK_CAP,
};
use submix_core::{run_mixture, Error, FunctionSpec, KernelConfig, KernelTransform, MixtureConfig};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (mixture format 1, dataset manifest 1, SMEB 1)"
);

#[derive(Parser)]
#[command(name = "submix", version = VERSION, about = "Submodular data-mixture construction")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run both stages and emit a mixture manifest.
    Mixture(MixtureArgs),
    /// Stage 1: rank tasks greedily and record their gains.
    SelectTasks(SelectTasksArgs),
    /// Turn a task selection (or raw gains) into instance budgets.
    Allocate(AllocateArgs),
    /// Stage 2: pick instances within each planned task.
    SelectInstances(SelectInstancesArgs),
    /// Examples-proportional or equal mixture.
    Baseline(BaselineArgs),
    /// Check a dataset manifest, its prompts and its embeddings.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FnKind {
    Fl,
    Gc,
    Logdet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Clamp,
    Affine,
    Identity,
}

impl From<Transform> for KernelTransform {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Clamp => KernelTransform::Clamp,
            Transform::Affine => KernelTransform::AffineRescale,
            Transform::Identity => KernelTransform::Identity,
        }
    }
}

#[derive(Args)]
struct FnParams {
    /// Graph-cut redundancy weight.
    #[arg(long, default_value_t = submix_core::submodular::DEFAULT_LAMBDA)]
    lambda: f64,
    /// Log-determinant diagonal jitter.
    #[arg(long, default_value_t = submix_core::submodular::DEFAULT_EPSILON)]
    epsilon: f64,
}

impl FnParams {
    fn spec(&self, kind: FnKind) -> FunctionSpec {
        match kind {
            FnKind::Fl => FunctionSpec::FacilityLocation,
            FnKind::Gc => FunctionSpec::GraphCut {
                lambda: self.lambda,
            },
            FnKind::Logdet => FunctionSpec::LogDeterminant {
                epsilon: self.epsilon,
            },
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file (stdout when absent).
    #[arg(long, env = "SUBMIX_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MixtureArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    f1: FnKind,
    #[arg(long, value_enum)]
    f2: FnKind,
    #[arg(long)]
    task_budget: usize,
    #[arg(long)]
    instance_budget: u64,
    #[arg(long, env = "SUBMIX_SEED")]
    seed: u64,
    #[arg(long, value_enum, default_value = "clamp")]
    kernel_transform: Transform,
    #[arg(long, default_value_t = DEFAULT_PER_TASK_CAP)]
    per_task_cap: usize,
    #[command(flatten)]
    params: FnParams,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SelectTasksArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    f1: FnKind,
    #[arg(long)]
    task_budget: usize,
    #[arg(long, value_enum, default_value = "clamp")]
    kernel_transform: Transform,
    #[command(flatten)]
    params: FnParams,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct AllocateArgs {
    /// Task selection JSON (stdin when absent).
    #[arg(long = "in", conflicts_with = "gains")]
    input: Option<PathBuf>,
    /// Dataset manifest; defaults to the one named in the selection.
    #[arg(long, conflicts_with = "gains")]
    manifest: Option<PathBuf>,
    /// Comma-separated gains, allocated without capacities.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gains: Option<Vec<f64>>,
    #[arg(long)]
    instance_budget: u64,
    #[arg(long, default_value_t = DEFAULT_PER_TASK_CAP)]
    per_task_cap: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SelectInstancesArgs {
    /// Allocation plan JSON (stdin when absent).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Dataset manifest; defaults to the one named in the plan.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    f2: FnKind,
    #[arg(long, env = "SUBMIX_SEED")]
    seed: u64,
    #[command(flatten)]
    params: FnParams,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Epm,
    Em,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    strategy: BaselineKind,
    #[arg(long)]
    instance_budget: u64,
    /// Repeat for several manifests; with `--out`, each seed gets its own
    /// file with a `.seed<S>` suffix.
    #[arg(long = "seed", env = "SUBMIX_SEED", required = true)]
    seeds: Vec<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    if let Some(k) = cli.threads {
        set_threads(k)?;
    }
    match cli.command {
        Command::Mixture(a) => mixture(a),
        Command::SelectTasks(a) => select_tasks(a),
        Command::Allocate(a) => allocate_cmd(a),
        Command::SelectInstances(a) => select_instances(a),
        Command::Baseline(a) => baseline(a),
        Command::Validate(a) => return validate(a),
    }?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(feature = "parallel")]
fn set_threads(k: usize) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::InvalidConfig("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(k: usize) -> Result<(), Error> {
    if k == 0 {
        return Err(Error::InvalidConfig("--threads must be positive".into()));
    }
    log::debug!("built without the parallel feature; ignoring --threads {k}");
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::io(Path::new("<stdout>"), e))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Stage artifacts keep full float precision so the stages compose exactly.
fn stage_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("stage artifacts serialize");
    s.push('\n');
    s
}

fn read_input<T: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<T, Error> {
    let (text, name) = match path {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            p.display().to_string(),
        ),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::io(Path::new("<stdin>"), e))?;
            (s, "<stdin>".to_string())
        }
    };
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{name}: {e}")))
}

fn mixture(a: MixtureArgs) -> Result<(), Error> {
    let config = MixtureConfig {
        f1: a.params.spec(a.f1),
        f2: a.params.spec(a.f2),
        task_budget: a.task_budget,
        instance_budget: a.instance_budget,
        seed: a.seed,
        kernel: KernelConfig {
            transform: a.kernel_transform.into(),
        },
        per_task_cap: a.per_task_cap,
    };
    config.validate()?;
    let manifest = load_manifest(&a.manifest)?;
    let out = run_mixture(&manifest, &a.manifest.to_string_lossy(), &config)?;
    emit(&out.to_canonical_json(), a.out.out.as_deref())
}

fn select_tasks(a: SelectTasksArgs) -> Result<(), Error> {
    let f1 = a.params.spec(a.f1);
    f1.validate()?;
    if a.task_budget == 0 {
        return Err(Error::InvalidConfig("task budget must be positive".into()));
    }
    let manifest = load_manifest(&a.manifest)?;
    let kernel = KernelConfig {
        transform: a.kernel_transform.into(),
    };
    let sel = run_task_selection(
        &manifest,
        &a.manifest.to_string_lossy(),
        f1,
        &kernel,
        a.task_budget,
    )?;
    emit(&stage_json(&sel), a.out.out.as_deref())
}

fn allocate_cmd(a: AllocateArgs) -> Result<(), Error> {
    if let Some(gains) = &a.gains {
        let plan = taylor_softmax_allocate(gains, a.instance_budget)?;
        return emit(&to_canonical_json(&plan), a.out.out.as_deref());
    }
    let sel: TaskSelection = read_input(a.input.as_deref())?;
    let path = a.manifest.unwrap_or_else(|| PathBuf::from(&sel.manifest));
    let manifest = load_manifest(&path)?;
    let plan = allocate(&sel, &manifest, a.instance_budget, a.per_task_cap)?;
    emit(&stage_json(&plan), a.out.out.as_deref())
}

fn select_instances(a: SelectInstancesArgs) -> Result<(), Error> {
    let plan: AllocationPlan = read_input(a.input.as_deref())?;
    let path = a.manifest.unwrap_or_else(|| PathBuf::from(&plan.manifest));
    let manifest = load_manifest(&path)?;
    let out = run_instance_selection(&plan, &manifest, a.params.spec(a.f2), a.seed)?;
    emit(&out.to_canonical_json(), a.out.out.as_deref())
}

fn seeded_path(out: &Path, seed: u64) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    out.with_file_name(name)
}

fn baseline(a: BaselineArgs) -> Result<(), Error> {
    let strategy = match a.strategy {
        BaselineKind::Epm => BaselineStrategy::Epm,
        BaselineKind::Em => BaselineStrategy::Em,
    };
    let manifest = load_manifest(&a.manifest)?;
    for &seed in &a.seeds {
        let out = run_baseline(
            &manifest,
            &BaselineConfig {
                strategy,
                instance_budget: a.instance_budget,
                seed,
            },
        )?;
        let target = match &a.out.out {
            Some(p) if a.seeds.len() > 1 => Some(seeded_path(p, seed)),
            other => other.clone(),
        };
        emit(&out.to_canonical_json(), target.as_deref())?;
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<ExitCode, Error> {
    let report = validate_corpus(&a.manifest)?;
    if report.is_clean() {
        emit(
            &format!(
                "OK: {} tasks, {} instances\n",
                report.tasks, report.instances
            ),
            None,
        )?;
        return Ok(ExitCode::SUCCESS);
    }
    for v in &report.violations {
        eprintln!("{v}");
    }
    eprintln!("{} violation(s)", report.violations.len());
    Ok(ExitCode::from(1))
}
