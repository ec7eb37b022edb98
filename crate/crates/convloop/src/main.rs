//! Command-line driver: `run` repairs a corpus against a backend, `doctor`
//! checks corpus health, `import-quixbugs` converts a QuixBugs checkout,
//! `sweep` repeats a run across max-chain-length settings.

use clap::{Args, Parser, Subcommand, ValueEnum};
use convloop::backend::http::API_KEY_ENV;
use convloop::corpus::{self, import::parse_exclusions, SkippedBug};
use convloop::orchestrator::BackendFactory;
use convloop::report::{Report, ReportFormat, SweepEntry, SweepReport};
use convloop::{
    doctor, load_suite, BugInstance, CommandBackend, FeedbackStyle, GenerationBackend,
    HealthStatus, HttpApi, HttpBackend, HttpBackendConfig, Labels, Language, RepairConfig,
    Validator, ValidatorConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_UNHEALTHY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ENVIRONMENT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "convloop",
    version,
    about = "Conversational automated program repair: sample, validate, feed the failure back, repeat"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair every bug in a corpus against a generation backend.
    Run(RunArgs),
    /// Check that each bug's reference patch passes and its buggy source fails.
    Doctor(DoctorArgs),
    /// Convert a QuixBugs checkout into the canonical corpus layout.
    ImportQuixbugs(ImportArgs),
    /// Run the corpus once per max-chain-length setting.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Http,
    Cmd,
    Script,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApiKind {
    Completion,
    Chat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StyleKind {
    None,
    Nl,
    Functional,
}

impl From<StyleKind> for FeedbackStyle {
    fn from(style: StyleKind) -> FeedbackStyle {
        match style {
            StyleKind::None => FeedbackStyle::NoTestcase,
            StyleKind::Nl => FeedbackStyle::NaturalLanguage,
            StyleKind::Functional => FeedbackStyle::Functional,
        }
    }
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Corpus directory of bug subdirectories.
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
    /// Repair only these bug ids (repeatable).
    #[arg(long = "bug", value_name = "ID")]
    bugs: Vec<String>,
    /// Skip these bug ids (repeatable).
    #[arg(long = "exclude", value_name = "ID")]
    excludes: Vec<String>,
    /// Downgrade unloadable bug directories to warnings.
    #[arg(long)]
    skip_broken: bool,
}

#[derive(Args, Clone)]
struct RunnerArgs {
    #[arg(long, default_value = "python3")]
    python_bin: String,
    #[arg(long, default_value = "javac")]
    javac_bin: String,
    #[arg(long, default_value = "java")]
    java_bin: String,
    /// Retain validation workspaces for debugging.
    #[arg(long)]
    keep_workdirs: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Generation backend.
    #[arg(long, value_enum)]
    backend: BackendKind,
    /// HTTP endpoint URL (http backend).
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent to the endpoint (http backend).
    #[arg(long)]
    model: Option<String>,
    /// OpenAI-compatible dialect (http backend).
    #[arg(long, value_enum, default_value = "completion")]
    api: ApiKind,
    /// Response script file (script backend).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Command line for the external-command backend, split on whitespace.
    #[arg(long)]
    cmd: Option<String>,

    /// Failure feedback style.
    #[arg(long, value_enum, default_value = "functional")]
    style: StyleKind,
    #[arg(long, default_value_t = 3)]
    max_chain_length: u32,
    /// Model samples per bug.
    #[arg(long, default_value_t = 50)]
    budget: u32,
    #[arg(long, default_value_t = 0.95)]
    top_p: f64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    /// Per-test wall-clock limit for validation.
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    /// Prompt token budget per chain.
    #[arg(long, default_value_t = 2048)]
    token_budget: u32,
    #[arg(long, default_value_t = 512)]
    max_gen_tokens: u32,
    /// Absolute tolerance for float comparisons.
    #[arg(long, default_value_t = 1e-6)]
    float_tol: f64,
    /// Bugs repaired concurrently.
    #[arg(long, default_value_t = 1)]
    parallelism: usize,

    /// Write the full JSON report here.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write the per-bug CSV here.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Labels file of human-approved patch hashes.
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,

    #[command(flatten)]
    runner: RunnerArgs,
}

#[derive(Args)]
struct DoctorArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 1e-6)]
    float_tol: f64,
    #[command(flatten)]
    runner: RunnerArgs,
}

#[derive(Args)]
struct ImportArgs {
    /// QuixBugs checkout root.
    src: PathBuf,
    /// Destination corpus directory.
    dst: PathBuf,
    #[arg(long, value_enum, default_value = "python")]
    language: ImportLanguage,
    /// Exclusion list file; defaults to the bundled quixbugs_excluded.txt.
    #[arg(long, value_name = "FILE")]
    exclude_file: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ImportLanguage {
    Python,
    Java,
    Both,
}

#[derive(Args)]
struct SweepArgs {
    /// Settings to sweep: a comma list (1,2,3) or a range (1..6).
    #[arg(long, value_name = "LENGTHS")]
    chain_lengths: String,
    #[command(flatten)]
    run: RunArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Doctor(args) => cmd_doctor(args),
        Command::ImportQuixbugs(args) => cmd_import(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    ExitCode::from(code)
}

fn fail_config(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_CONFIG
}

fn fail_environment(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_ENVIRONMENT
}

fn repair_config(args: &RunArgs) -> RepairConfig {
    RepairConfig {
        max_chain_length: args.max_chain_length,
        sample_budget: args.budget,
        feedback_style: args.style.into(),
        top_p: args.top_p,
        temperature: args.temperature,
        per_test_timeout_ms: args.timeout_ms,
        prompt_token_budget: args.token_budget,
        max_generation_tokens: args.max_gen_tokens,
        float_tolerance: args.float_tol,
    }
}

fn validator_config(args: &RunnerArgs) -> ValidatorConfig {
    ValidatorConfig {
        python_bin: args.python_bin.clone(),
        javac_bin: args.javac_bin.clone(),
        java_bin: args.java_bin.clone(),
        keep_workdirs: args.keep_workdirs,
    }
}

fn load_corpus(args: &CorpusArgs) -> Result<Vec<BugInstance>, u8> {
    let include = if args.bugs.is_empty() {
        None
    } else {
        Some(args.bugs.as_slice())
    };
    let (bugs, skipped) = load_suite(&args.corpus, include, &args.excludes, args.skip_broken)
        .map_err(fail_config)?;
    for SkippedBug { dir, error } in &skipped {
        eprintln!("warning: skipping {}: {error}", dir.display());
    }
    if bugs.is_empty() {
        return Err(fail_config(format!(
            "no bugs found under {}",
            args.corpus.display()
        )));
    }
    Ok(bugs)
}

/// Build one backend per bug; scripted backends must replay independently.
fn backend_factory(args: &RunArgs) -> Result<Box<BackendFactory<'static>>, u8> {
    match args.backend {
        BackendKind::Script => {
            let path = args
                .script
                .clone()
                .ok_or_else(|| fail_config("--backend script requires --script FILE"))?;
            Ok(Box::new(move |_: &BugInstance| {
                convloop::load_script(&path)
                    .map(|backend| Box::new(backend) as Box<dyn GenerationBackend>)
                    .map_err(|e| e.to_string())
            }))
        }
        BackendKind::Cmd => {
            let command = args
                .cmd
                .clone()
                .ok_or_else(|| fail_config("--backend cmd requires --cmd \"PROG ARGS\""))?;
            CommandBackend::from_command_line(&command).map_err(fail_config)?;
            Ok(Box::new(move |_: &BugInstance| {
                CommandBackend::from_command_line(&command)
                    .map(|backend| Box::new(backend) as Box<dyn GenerationBackend>)
                    .map_err(|e| e.to_string())
            }))
        }
        BackendKind::Http => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| fail_config("--backend http requires --endpoint URL"))?;
            let model = args
                .model
                .clone()
                .ok_or_else(|| fail_config("--backend http requires --model NAME"))?;
            let api = match args.api {
                ApiKind::Completion => HttpApi::Completions,
                ApiKind::Chat => HttpApi::ChatCompletions,
            };
            if std::env::var(API_KEY_ENV).is_err() {
                eprintln!("note: {API_KEY_ENV} is not set; sending unauthenticated requests");
            }
            let cfg = HttpBackendConfig::new(endpoint, model, api);
            Ok(Box::new(move |_: &BugInstance| {
                HttpBackend::new(cfg.clone())
                    .map(|backend| Box::new(backend) as Box<dyn GenerationBackend>)
                    .map_err(|e| e.to_string())
            }))
        }
    }
}

fn cmd_run(args: RunArgs) -> u8 {
    let cfg = repair_config(&args);
    if let Err(e) = cfg.validate() {
        return fail_config(e);
    }
    let bugs = match load_corpus(&args.corpus) {
        Ok(bugs) => bugs,
        Err(code) => return code,
    };
    let factory = match backend_factory(&args) {
        Ok(factory) => factory,
        Err(code) => return code,
    };
    let labels = match args.labels.as_deref().map(Labels::load).transpose() {
        Ok(labels) => labels,
        Err(e) => return fail_config(e),
    };
    let validator = Validator::new(validator_config(&args.runner));

    let records = convloop::repair_suite(&bugs, &cfg, factory.as_ref(), &validator, args.parallelism);
    let mut environment_fault = false;
    for record in &records {
        match &record.result {
            Ok(result) => match result.tries {
                Some(tries) => println!(
                    "{}: plausible tries={tries} correct_exact={} (chains={}, samples={})",
                    record.bug_id,
                    result.correct_exact.unwrap_or(false),
                    result.chains.len(),
                    result.samples_used,
                ),
                None => println!(
                    "{}: no plausible patch (chains={}, samples={})",
                    record.bug_id,
                    result.chains.len(),
                    result.samples_used,
                ),
            },
            Err(fault) => {
                environment_fault = true;
                println!("{}: HARNESS ERROR: {}", record.bug_id, fault.message);
            }
        }
    }

    let report = Report::new(&records, labels.as_ref());
    let summary = &report.summary;
    match summary.mean_tries_over_plausible {
        Some(mean) => println!(
            "plausible {}/{} (correct_exact {}, mean tries {mean})",
            summary.n_plausible, summary.n_bugs, summary.n_correct_exact
        ),
        None => println!("plausible 0/{}", summary.n_bugs),
    }

    if let Some(path) = &args.report {
        if let Err(e) = convloop::emit_report(&report, ReportFormat::Json, path) {
            return fail_environment(e);
        }
        println!("report written to {}", path.display());
    }
    if let Some(path) = &args.csv {
        if let Err(e) = convloop::emit_report(&report, ReportFormat::Csv, path) {
            return fail_environment(e);
        }
        println!("csv written to {}", path.display());
    }

    if environment_fault {
        EXIT_ENVIRONMENT
    } else {
        EXIT_OK
    }
}

fn cmd_doctor(args: DoctorArgs) -> u8 {
    let cfg = RepairConfig {
        per_test_timeout_ms: args.timeout_ms,
        float_tolerance: args.float_tol,
        ..RepairConfig::default()
    };
    let bugs = match load_corpus(&args.corpus) {
        Ok(bugs) => bugs,
        Err(code) => return code,
    };
    let validator = Validator::new(validator_config(&args.runner));

    let mut unhealthy = 0usize;
    let mut faults = 0usize;
    for bug in &bugs {
        let health = doctor(bug, &cfg, &validator);
        match health.status {
            HealthStatus::Healthy => println!(
                "{}: healthy (reference {}, buggy {} failing [{}])",
                health.bug_id,
                health.reference_kind,
                health.buggy_kind,
                health.buggy_failing.join(", "),
            ),
            HealthStatus::UnhealthyReference => {
                unhealthy += 1;
                println!(
                    "{}: UNHEALTHY(reference) - reference patch validates {}",
                    health.bug_id, health.reference_kind
                );
            }
            HealthStatus::UnhealthyNotABug => {
                unhealthy += 1;
                println!(
                    "{}: UNHEALTHY(not-a-bug) - buggy source passes the whole testsuite",
                    health.bug_id
                );
            }
            HealthStatus::HarnessFault => {
                faults += 1;
                println!(
                    "{}: HARNESS ERROR: {}",
                    health.bug_id,
                    health.detail.unwrap_or_default()
                );
            }
        }
    }
    println!(
        "{} bug(s): {} healthy, {unhealthy} unhealthy, {faults} harness fault(s)",
        bugs.len(),
        bugs.len() - unhealthy - faults,
    );
    if faults > 0 {
        EXIT_ENVIRONMENT
    } else if unhealthy > 0 {
        EXIT_UNHEALTHY
    } else {
        EXIT_OK
    }
}

fn cmd_import(args: ImportArgs) -> u8 {
    let exclusions = match &args.exclude_file {
        None => corpus::default_exclusions(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => parse_exclusions(&text),
            Err(e) => return fail_config(format!("cannot read {}: {e}", path.display())),
        },
    };
    if let Err(e) = std::fs::create_dir_all(&args.dst) {
        return fail_environment(format!("cannot create {}: {e}", args.dst.display()));
    }
    let languages: &[Language] = match args.language {
        ImportLanguage::Python => &[Language::Python],
        ImportLanguage::Java => &[Language::Java],
        ImportLanguage::Both => &[Language::Python, Language::Java],
    };
    let mut imported = 0usize;
    for language in languages {
        match corpus::import_quixbugs(&args.src, &args.dst, *language, &exclusions) {
            Ok(report) => {
                for (id, reason) in &report.skipped {
                    eprintln!("skipped {id} ({language}): {reason}");
                }
                println!("imported {} {language} bug(s)", report.imported.len());
                imported += report.imported.len();
            }
            Err(e) => return fail_config(e),
        }
    }
    println!("total imported: {imported} -> {}", args.dst.display());
    EXIT_OK
}

fn parse_chain_lengths(text: &str) -> Result<Vec<u32>, String> {
    let text = text.trim();
    let lengths: Vec<u32> = if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
        let hi: u32 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
        if lo > hi {
            return Err(format!("empty range {text:?}"));
        }
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| format!("bad chain length {part:?}"))
            })
            .collect::<Result<_, _>>()?
    };
    if lengths.is_empty() || lengths.iter().any(|l| *l < 1) {
        return Err("chain lengths must be >= 1".to_string());
    }
    Ok(lengths)
}

fn cmd_sweep(args: SweepArgs) -> u8 {
    let lengths = match parse_chain_lengths(&args.chain_lengths) {
        Ok(lengths) => lengths,
        Err(e) => return fail_config(e),
    };
    let base = repair_config(&args.run);
    if let Err(e) = base.validate() {
        return fail_config(e);
    }
    let bugs = match load_corpus(&args.run.corpus) {
        Ok(bugs) => bugs,
        Err(code) => return code,
    };
    let factory = match backend_factory(&args.run) {
        Ok(factory) => factory,
        Err(code) => return code,
    };
    let validator = Validator::new(validator_config(&args.run.runner));

    let mut entries = Vec::new();
    let mut environment_fault = false;
    for length in lengths {
        let cfg = RepairConfig {
            max_chain_length: length,
            ..base.clone()
        };
        let records =
            convloop::repair_suite(&bugs, &cfg, factory.as_ref(), &validator, args.run.parallelism);
        environment_fault |= records.iter().any(|r| r.result.is_err());
        let summary = convloop::summarize(&records, None);
        match summary.mean_tries_over_plausible {
            Some(mean) => println!(
                "max_chain_length={length}: plausible {}/{} (mean tries {mean})",
                summary.n_plausible, summary.n_bugs
            ),
            None => println!(
                "max_chain_length={length}: plausible 0/{}",
                summary.n_bugs
            ),
        }
        entries.push(SweepEntry {
            max_chain_length: length,
            summary,
        });
    }

    if let Some(path) = &args.run.report {
        let sweep = SweepReport { entries };
        let text = serde_json::to_string_pretty(&sweep).expect("sweep serialization");
        if let Err(e) = std::fs::write(path, text + "\n") {
            return fail_environment(format!("failed to write {}: {e}", path.display()));
        }
        println!("sweep report written to {}", path.display());
    }

    if environment_fault {
        EXIT_ENVIRONMENT
    } else {
        EXIT_OK
    }
}
