use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use besov_ch::{BesovParams, DyadicPartition, Exponent};
use besov_ch_cli::config::{ExperimentConfig, Overrides};
use besov_ch_cli::experiment::{
    run_inflation_sweep, run_smooth_baseline, run_verification_suite, Setup,
};
use besov_ch_cli::io::{read_field, write_field, write_manifest, write_records, Manifest};
use clap::{Args, Parser, Subcommand};
use log::info;

#[derive(Parser)]
#[command(
    name = "chlab",
    version,
    about = "Norm-inflation experiments for the higher-dimensional Camassa-Holm system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the lacunary datum over every (n, eps) cell and write sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Also dump u0 and every u(t) - u0 under <out>/fields.
        #[arg(long)]
        save_fields: bool,
    },
    /// The same t values from the single-block datum; writes baseline.csv.
    Baseline {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every check and exit nonzero if any fails.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Besov norm of a stored field.
    Norms {
        /// Coefficient dump written by `sweep --save-fields`; the sidecar sits next to it.
        field: PathBuf,
        #[arg(long, default_value_t = 4.5, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value = "2")]
        p: Exponent,
        #[arg(long, default_value = "inf")]
        r: Exponent,
        /// Print the weighted block sequence as well.
        #[arg(long)]
        blocks: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long = "N")]
    levels: Option<u32>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long = "grid-m")]
    grid_m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shift the ball cutoff (negative control for the partition checks).
    #[arg(long = "chi-shift", allow_negative_numbers = true)]
    chi_shift: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let cfg = self.resolve_parameters()?;
        cfg.validate_times()?;
        Ok(cfg)
    }

    fn resolve_parameters(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            d: self.d,
            k: self.k,
            levels: self.levels,
            sigma: self.sigma,
            p: self.p,
            grid_m: self.grid_m,
            eps: self.eps.clone(),
            n_list: self.n_list.clone(),
            out: self.out.clone(),
            chi_shift: self.chi_shift,
        });
        cfg.validate_parameters()?;
        std::fs::create_dir_all(&cfg.experiment.out_dir)
            .with_context(|| format!("creating {}", cfg.experiment.out_dir.display()))?;
        Ok(cfg)
    }
}

fn manifest<T: serde::Serialize>(
    cfg: &ExperimentConfig,
    command: &str,
    started: Instant,
    summary: T,
) -> Result<()> {
    let path = cfg
        .experiment
        .out_dir
        .join(format!("{command}_manifest.json"));
    write_manifest(
        &path,
        &Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            summary,
        },
    )
}

fn sweep(run: &RunArgs, save_fields: bool) -> Result<ExitCode> {
    let cfg = run.resolve()?;
    let started = Instant::now();
    let out = run_inflation_sweep(&cfg)?;
    let csv = cfg.experiment.out_dir.join("sweep.csv");
    write_records(&csv, &out.records)?;
    for r in &out.records {
        for v in r.violations() {
            log::warn!("record (n = {}, eps = {}): {v}", r.n, r.eps);
        }
    }
    if save_fields {
        save_sweep_fields(&cfg)?;
    }
    println!("wrote {} records to {}", out.records.len(), csv.display());
    println!("measured eps0 = inf block_norm / eps = {:.6e}", out.eps0);
    for (eps, n) in &out.crossover {
        match n {
            Some(n) => println!("eps = {eps}: v0_block >= 2 w_bound from n = {n}"),
            None => println!("eps = {eps}: v0_block < 2 w_bound at every probed n"),
        }
    }
    let halted = !out.halts.is_empty();
    manifest(&cfg, "sweep", started, &out)?;
    Ok(if halted {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn save_sweep_fields(cfg: &ExperimentConfig) -> Result<()> {
    let setup = Setup::for_sweep(cfg)?;
    let dir = cfg.experiment.out_dir.join("fields");
    std::fs::create_dir_all(&dir)?;
    write_field(&dir.join("u0.bin"), &setup.u0)?;
    for (n, eps) in cfg.cells() {
        let snap = setup.solver.advance(&setup.u0, cfg.time_for(n, eps))?;
        write_field(
            &dir.join(format!("diff_n{n}_eps{eps}.bin")),
            &snap.increment,
        )?;
    }
    info!("fields written to {}", dir.display());
    Ok(())
}

fn baseline(run: &RunArgs) -> Result<ExitCode> {
    let cfg = run.resolve()?;
    let started = Instant::now();
    let out = run_smooth_baseline(&cfg)?;
    let csv = cfg.experiment.out_dir.join("baseline.csv");
    write_records(&csv, &out.records)?;
    println!("wrote {} records to {}", out.records.len(), csv.display());
    println!(
        "baseline slope of ||u(t) - u0||_B^sigma against t: {:.4}",
        out.slope
    );
    let halted = !out.halts.is_empty();
    manifest(&cfg, "baseline", started, &out)?;
    Ok(if halted {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn verify(run: &RunArgs) -> Result<ExitCode> {
    let cfg = run.resolve_parameters()?;
    let started = Instant::now();
    let report = run_verification_suite(&cfg)?;
    for check in &report.checks {
        println!("{check}");
    }
    let passed = report.all_passed();
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", report.checks.len(), failed);
    manifest(&cfg, "verify", started, &report)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn norms(field: &Path, s: f64, p: Exponent, r: Exponent, blocks: bool) -> Result<ExitCode> {
    let f = read_field(field)?;
    let part = DyadicPartition::standard(f.grid());
    let norm = part.besov_norm(&f, BesovParams::new(s, p, r))?;
    println!("grid {}", f.grid());
    println!("B^{s}_{{{p},{r}}} norm = {norm:.12e}");
    if blocks {
        for (j, a) in part.besov_sequence(&f, s, p)? {
            println!("j = {j:>3}  2^(js) |Delta_j f|_p = {a:.6e}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { run, save_fields } => sweep(run, *save_fields),
        Command::Baseline { run } => baseline(run),
        Command::Verify { run } => verify(run),
        Command::Norms {
            field,
            s,
            p,
            r,
            blocks,
        } => norms(field, *s, *p, *r, *blocks),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
