use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pacbayes_core::harness::{fit_single, run_experiment, write_outputs, ExperimentSpec, Fit, ProblemSpec};
use pacbayes_core::io::{write_dataset_csv, write_matrix_csv, write_samples};
use pacbayes_core::{Error, ParamPoint, Result};

#[derive(Parser)]
#[command(name = "pacbayes", version, about = "Gibbs-posterior classification experiments and PAC-Bayes bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir` in the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Cell {
    /// Sample size; the first grid size by default.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    replicate: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one training set.
    Gen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: Cell,
    },
    /// Fit one posterior and export draws or the learned matrix.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cell: Cell,
    },
    /// Evaluate the bound right-hand side over the grid (or at `--n`).
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the full rate experiment.
    Rate {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(ExperimentSpec, PathBuf)> {
    let text = fs::read_to_string(&common.config)?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    spec.validate()?;
    fs::create_dir_all(&out)?;
    Ok((spec, out))
}

fn gen(common: &Common, cell: &Cell) -> Result<()> {
    let (spec, out) = load(common)?;
    let n = cell.n.unwrap_or(spec.n_grid[0]);
    let data = spec.dataset(n, cell.replicate)?;
    let (model_seed, data_seed, ..) = spec.cell_seeds(n, cell.replicate);
    let header = json!({
        "problem": spec.problem,
        "n": n,
        "replicate": cell.replicate,
        "master_seed": spec.seed,
        "model_seed": model_seed,
        "data_seed": data_seed,
        "c_x": match &spec.problem {
            ProblemSpec::GaussianLinear { model, .. } | ProblemSpec::SparseLinear { model, .. } => Some(model.c_x()),
            ProblemSpec::FiniteClass { .. } => Some(1.0),
            ProblemSpec::MatComp { .. } => None,
        },
    });
    let path = out.join("dataset.csv");
    write_dataset_csv(&path, &data, &header)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn fit(common: &Common, cell: &Cell) -> Result<()> {
    let (spec, out) = load(common)?;
    let n = cell.n.unwrap_or(spec.n_grid[0]);
    let (_, fit) = fit_single(&spec, n, cell.replicate)?;
    let mean = fit.mean()?;
    let info = json!({"n": n, "replicate": cell.replicate, "lambda": spec.lambda(n), "seed": spec.seed});
    match &fit {
        Fit::Exact { thetas, weights } => {
            let report = json!({
                "fit": info,
                "classes": thetas.iter().map(ParamPoint::flatten).collect::<Vec<_>>(),
                "weights": weights,
                "posterior_mean": mean.flatten(),
            });
            write_json(&out.join("posterior.json"), &report)?;
        }
        Fit::Samples(s) => {
            write_samples(&out.join("samples.csv"), s, info.clone())?;
            if let Some(m) = mean.to_matrix() {
                write_matrix_csv(&out.join("matrix.csv"), &m)?;
                write_json(
                    &out.join("diagnostics.json"),
                    &json!({"fit": info, "method": "mcmc", "acceptance_rate": s.acceptance_rate, "draws": s.draws.len()}),
                )?;
            }
        }
        Fit::Variational(v) => {
            write_matrix_csv(&out.join("matrix.csv"), &v.family.mean_matrix())?;
            write_json(
                &out.join("diagnostics.json"),
                &json!({
                    "fit": info,
                    "method": "vb",
                    "final_objective": v.final_objective(),
                    "iterations": v.iterations,
                    "converged": v.converged,
                    "objective_trace": v.objective_trace,
                }),
            )?;
        }
    }
    println!("wrote fit for n={n} to {}", out.display());
    Ok(())
}

fn bound(common: &Common, n: Option<usize>) -> Result<()> {
    let (spec, out) = load(common)?;
    let grid = n.map_or(spec.n_grid.clone(), |n| vec![n]);
    let reports = grid.iter().map(|&n| spec.bound(n, 0)).collect::<Result<Vec<_>>>()?;
    for r in &reports {
        println!("n={} total={:.6e}", r.n, r.total);
    }
    write_json(&out.join("bound_report.json"), &reports)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Returns whether every cell succeeded.
fn rate(common: &Common) -> Result<bool> {
    let (spec, out) = load(common)?;
    let outcome = run_experiment(&spec)?;
    let summary = write_outputs(&out, &spec, &outcome)?;
    match (summary.slope, summary.half_width) {
        (Some(s), Some(h)) => println!("slope {s:.4} ± {h:.4}"),
        _ => println!("slope unavailable (too few positive points)"),
    }
    for f in &outcome.failures {
        eprintln!("cell n={} replicate={} seed={} failed: {}", f.n, f.replicate, f.seed, f.error);
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { common, cell } => gen(common, cell).map(|_| true),
        Command::Fit { common, cell } => fit(common, cell).map(|_| true),
        Command::Bound { common, n } => bound(common, *n).map(|_| true),
        Command::Rate { common } => rate(common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
