use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bandit_bench::output::write_outputs;
use bandit_bench::{run_experiment, summarize, validate, ExperimentConfig};
use bandit_cluster_core::psi::{t_star_with, SolverConfig};
use bandit_cluster_core::{slink_cluster, MeanMatrix};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bandit-cluster", version, about = "Online clustering of bandit arms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, delta, trial) cell of an experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Characteristic time, optimal allocation and most confusing alternative.
    Tstar {
        /// JSON file with a row-major d x M array.
        #[arg(long)]
        means: PathBuf,
        #[arg(long)]
        k: usize,
        /// Seed for the multistart solver (d >= 2).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Single-linkage clustering of the means.
    Slink {
        #[arg(long)]
        means: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Run the oracle suites.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn read_means(path: &Path) -> Result<MeanMatrix<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).context("expected a JSON array of rows")?;
    Ok(MeanMatrix::from_rows(&rows)?)
}

fn run(config_path: &Path, out: Option<PathBuf>, jobs: Option<usize>) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let Some(out) = out.or_else(|| config.output_dir.clone()) else {
        bail!("no output directory: pass --out or set output_dir");
    };
    let instance = config.instance()?;
    if let Some(ds) = &instance.dataset {
        for (m, label) in ds.labels.iter().enumerate() {
            log::info!("arm {}: {label} n={} mean {:.4} -> {:.4}", m + 1, ds.pools[m].len(), ds.raw_means[m], ds.scaled_means[m]);
        }
    }
    let t_star = match t_star_with(instance.means(), config.k, &config.policy_config(0.5).solver) {
        Ok(t) => Some(t.t_star),
        Err(e) => {
            log::warn!("T* unavailable: {e}");
            None
        }
    };
    let output = run_experiment(&config, &instance, jobs)?;
    let summary = summarize(&output.records, t_star);
    write_outputs(&out, &output.records, &output.timings, &summary)?;
    for c in &summary.cells {
        println!(
            "{:<9} log(1/delta)={:<6.3} mean tau={:<10.1} stderr={:<8.2} error={:.3} capped={} failed={}",
            c.algorithm, c.log_inv_delta, c.mean_tau, c.stderr_tau, c.error_rate, c.capped, c.failures
        );
    }
    for s in &summary.slopes {
        if let Some(slope) = s.slope {
            println!("{:<9} slope={slope:.3} (2T* = {:?})", s.algorithm, s.upper_slope_reference);
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn tstar(means: &Path, k: usize, seed: u64, json: bool) -> Result<()> {
    let means = read_means(means)?;
    let config = SolverConfig { seed, ..SolverConfig::default() };
    let t = t_star_with(&means, k, &config)?;
    let spec = &t.psi.active_spec;
    if json {
        let v = serde_json::json!({
            "t_star": t.t_star,
            "w_star": t.w_star.as_slice(),
            "psi": t.psi.value,
            "relative_gap": t.relative_gap,
            "clustering": slink_cluster(&means, k)?.one_based(),
            "active_alternative": {
                "cluster": spec.cluster + 1,
                "part1": spec.part1.iter().map(|a| a + 1).collect::<Vec<_>>(),
                "part2": spec.part2.iter().map(|a| a + 1).collect::<Vec<_>>(),
                "arm_m": spec.arm_m + 1,
                "arm_n": spec.arm_n + 1,
            },
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("T* = {:.6}", t.t_star);
        let w: Vec<String> = t.w_star.as_slice().iter().map(|x| format!("{x:.4}")).collect();
        println!("w* = [{}]", w.join(", "));
        println!("active alternative: {spec}");
        println!("certified gap: {:.2e}", t.relative_gap);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, jobs } => run(&config, out, jobs),
        Command::Tstar { means, k, seed, json } => tstar(&means, k, seed, json),
        Command::Slink { means, k } => read_means(&means).and_then(|m| Ok(slink_cluster(&m, k)?)).map(|c| println!("{c}")),
        Command::Validate { seed } => {
            let reports = validate::run_all(seed);
            reports.iter().for_each(|r| println!("{}", r.line()));
            if reports.iter().all(|r| r.passed()) {
                return ExitCode::SUCCESS;
            }
            return ExitCode::FAILURE;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
