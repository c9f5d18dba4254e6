//! `ebicr`: synthetic block-sparse regression data, criterion-based support
//! selection, Monte Carlo sweeps, and Fisher-information diagnostics.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or numeric
//! error. Result files are written to a temp file and renamed, so a failed
//! command never leaves partial output. Block indices are 1-based on the
//! whole user surface.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ebicr::experiment::{parse_config_text, write_results, SweepResult};
use ebicr::io::format_full;
use ebicr::{
    ebicr_score, fim_normalization_diagnostic, io, model, run_bomp, select_model, sigma0_sq,
    sigma_sq_block, BlockStructure, BlockSupport, Dataset, SelectorConfig,
};

#[derive(Parser)]
#[command(
    name = "ebicr",
    version,
    about = "Block-sparse regression model selection: data synthesis, selection, sweeps, diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one synthetic dataset (A.csv, Y.csv, X.csv, meta.txt)
    Synth(SynthArgs),
    /// Select the block support of a dataset directory
    Select(SelectArgs),
    /// Run a Monte Carlo sweep described by a config file
    Experiment(ExperimentArgs),
    /// Fisher-information normalization report for one support
    Diag(DiagArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Sample count N
    #[arg(long, default_value_t = 150)]
    n: usize,
    /// Predictor count p
    #[arg(long, default_value_t = 1000)]
    p: usize,
    /// Response columns L
    #[arg(long, default_value_t = 5)]
    l: usize,
    /// Rows per block L_B
    #[arg(long, default_value_t = 10)]
    l_b: usize,
    /// True support cardinality K_B (support is blocks 1..=K_B)
    #[arg(long, default_value_t = 4)]
    k_b: usize,
    /// Signal-to-noise ratio in dB ("inf" for noiseless)
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to write the dataset into
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Dataset directory (as written by synth)
    #[arg(long)]
    in_dir: PathBuf,
    /// Greedy path length K; defaults to 2·K_B from the dataset metadata
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    zeta: f64,
    /// Also write the per-order score table to this CSV
    #[arg(long)]
    emit_scores: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Sweep config file (flat key = value format)
    #[arg(long)]
    config: PathBuf,
    /// Directory for results.csv and plot.csv
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; the EBICR_THREADS variable, then all cores, when absent
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DiagArgs {
    /// Dataset directory (as written by synth)
    #[arg(long)]
    in_dir: PathBuf,
    /// Comma-separated 1-based block indices, e.g. 1,2,7
    #[arg(long)]
    support: String,
}

/// Errors split by exit code: usage mistakes (1) versus bad data or failed
/// numerics (2).
enum AppError {
    Usage(String),
    Data(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
        }
    }
    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Usage(e.to_string())
}

fn data<E: std::fmt::Display>(e: E) -> AppError {
    AppError::Data(e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Select(args) => cmd_select(args),
        Cmd::Experiment(args) => cmd_experiment(args),
        Cmd::Diag(args) => cmd_diag(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), AppError> {
    let structure = BlockStructure::new(args.n, args.p, args.l, args.l_b).map_err(usage)?;
    if args.k_b < 1 || args.k_b > structure.p_b() {
        return Err(AppError::Usage(format!(
            "K_B must be in 1..={}, got {}",
            structure.p_b(),
            args.k_b
        )));
    }
    if args.k_b * args.l_b >= args.n {
        return Err(AppError::Usage(format!(
            "true support occupies K_B·L_B = {} rows; N = {} leaves no room for noise",
            args.k_b * args.l_b,
            args.n
        )));
    }
    let support = BlockSupport::first_blocks(args.k_b, structure.p_b()).map_err(usage)?;
    let mut rng = ebicr::rng::substream(args.seed, ebicr::rng::purpose::DATASET, 0, 0);
    let dataset =
        model::synthesize_dataset(&structure, &support, args.snr_db, &mut rng).map_err(data)?;
    io::write_dataset(&args.out_dir, &dataset, args.seed).map_err(data)?;
    let sigma2 = dataset.truth.as_ref().map(|t| t.sigma2).unwrap_or(f64::NAN);
    println!(
        "wrote A.csv Y.csv X.csv meta.txt to {} (N={}, p={}, L={}, L_B={}, K_B={}, snr_db={}, sigma2={})",
        args.out_dir.display(),
        args.n,
        args.p,
        args.l,
        args.l_b,
        args.k_b,
        args.snr_db,
        format_full(sigma2),
    );
    Ok(())
}

fn load_dataset(dir: &Path) -> Result<Dataset, AppError> {
    io::read_dataset(dir).map_err(data)
}

fn cmd_select(args: SelectArgs) -> Result<(), AppError> {
    if !(args.zeta >= 0.0) {
        return Err(AppError::Usage(format!(
            "zeta must be nonnegative, got {}",
            args.zeta
        )));
    }
    let dataset = load_dataset(&args.in_dir)?;
    let structure = dataset.structure;
    let k = match args.k {
        Some(k) => k,
        None => match &dataset.truth {
            Some(t) if t.support.k_b() > 0 => 2 * t.support.k_b(),
            _ => {
                return Err(AppError::Usage(
                    "dataset has no recorded true support; pass --k explicitly".into(),
                ))
            }
        },
    };
    if k < 1 || k * structure.l_b > structure.n {
        return Err(AppError::Usage(format!(
            "path length {k} is infeasible: K·L_B must be in 1..={}",
            structure.n / structure.l_b
        )));
    }
    let k = k.min(structure.p_b());
    let config = SelectorConfig {
        zeta: args.zeta,
        max_path: k,
        ..SelectorConfig::default()
    };
    let path = run_bomp(&dataset.a, &dataset.y, k, &structure).map_err(data)?;
    let (selected, scores) =
        select_model(&dataset.a, &dataset.y, &path, &config, &structure).map_err(data)?;
    let path_list: Vec<String> = path.blocks().iter().map(|b| b.to_string()).collect();
    println!("path = {}", path_list.join(","));
    println!("selected = {}", selected.to_list_string());
    if let Some(out) = &args.emit_scores {
        ebicr::criterion::write_scores_csv(out, &scores).map_err(data)?;
        println!("scores written to {}", out.display());
    }
    Ok(())
}

fn print_sweep_table(result: &SweepResult) {
    println!(
        "{:>12} {:>12} {:>10} {:>6} {:>8} {:>8} {:>7} {:>7}",
        "variable", "value", "method", "zeta", "pcms", "stderr", "trials", "mean_k"
    );
    for r in &result.rows {
        let zeta = match r.method {
            ebicr::experiment::Method::EbicR { zeta } => format!("{zeta}"),
            _ => "-".to_string(),
        };
        println!(
            "{:>12} {:>12} {:>10} {:>6} {:>8.4} {:>8.4} {:>7} {:>7.3}",
            r.grid_variable,
            r.grid_value,
            r.method.label(),
            zeta,
            r.pcms,
            r.stderr,
            r.trials,
            r.mean_k
        );
    }
    if result.excluded > 0 {
        println!(
            "excluded trials: {} (first: {})",
            result.excluded,
            result.first_exclusion.as_deref().unwrap_or("unknown")
        );
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| AppError::Usage(format!("{}: {e}", args.config.display())))?;
    let config = parse_config_text(&text)
        .map_err(|e| AppError::Usage(format!("{}: {e}", args.config.display())))?;
    let threads = match args.threads {
        Some(t) => t,
        None => match std::env::var("EBICR_THREADS") {
            Ok(v) => v.parse().map_err(|_| {
                AppError::Usage(format!("EBICR_THREADS must be a positive integer, got '{v}'"))
            })?,
            Err(_) => std::thread::available_parallelism()
                .map(|c| c.get())
                .unwrap_or(1),
        },
    };
    if threads < 1 {
        return Err(AppError::Usage("threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(data)?;
    let result = pool
        .install(|| ebicr::experiment::sweep(&config))
        .map_err(usage)?;
    let (results_path, plot_path) = write_results(&result, &args.out_dir).map_err(data)?;
    print_sweep_table(&result);
    println!(
        "results written to {} and {}",
        results_path.display(),
        plot_path.display()
    );
    Ok(())
}

fn cmd_diag(args: DiagArgs) -> Result<(), AppError> {
    let mut indices = Vec::new();
    for tok in args.support.split(',') {
        let j: usize = tok
            .trim()
            .parse()
            .map_err(|_| AppError::Usage(format!("bad block index '{}' in --support", tok.trim())))?;
        indices.push(j);
    }
    let dataset = load_dataset(&args.in_dir)?;
    let structure = dataset.structure;
    let support = BlockSupport::new(indices, structure.p_b()).map_err(usage)?;
    let s0 = sigma0_sq(&dataset.y, &structure).map_err(data)?;
    let s_hat = sigma_sq_block(&dataset.a, &dataset.y, &support, &structure).map_err(data)?;
    let diag =
        fim_normalization_diagnostic(&dataset.a, &support, s_hat, s0, &structure).map_err(data)?;
    let score = ebicr_score(
        &dataset.a,
        &dataset.y,
        &support,
        &SelectorConfig::default(),
        &structure,
    )
    .map_err(data)?;
    println!("support = {}", support.to_list_string());
    println!("m = {}", diag.m);
    println!("sigma2_0 = {}", format_full(s0));
    println!("sigma2_hat = {}", format_full(s_hat));
    println!("det_normalized = {}", format_full(diag.det_normalized));
    println!("log_det_q = {}", format_full(diag.log_det_q));
    println!("criterion_total = {}", format_full(score.total));
    Ok(())
}
