use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use krawczyk_track::bench::{run_suite, univariate_csv, validate_univariate, BenchmarkSuite, ModeSelection};
use krawczyk_track::homotopy::AffineHomotopy;
use krawczyk_track::krawczyk::krawczyk_test;
use krawczyk_track::polysys::PolySystem;
use krawczyk_track::tracker::{track, TrackMode, TrackOptions};
use krawczyk_track::{Error, Result};

#[derive(Parser)]
#[command(name = "krawczyk-track", version, about = "Certified homotopy path tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track start solutions of a homotopy to t = 1.
    Track {
        #[arg(long)]
        homotopy: PathBuf,
        /// JSON list of start points, each a list of [re, im] pairs.
        #[arg(long)]
        starts: PathBuf,
        #[arg(long, default_value = "apriori")]
        mode: TrackMode,
        #[arg(long, default_value_t = 0.125)]
        rho: f64,
        #[arg(long, default_value_t = 0.875)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track every path of a benchmark family and write per-path statistics.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 3)]
        min: usize,
        #[arg(long, default_value_t = 6)]
        max: usize,
        #[arg(long, default_value = "both")]
        mode: ModeSelection,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.125)]
        rho: f64,
        #[arg(long, default_value_t = 0.875)]
        tau: f64,
        /// Worker threads; 0 picks the number of cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Re-check every a priori step with the slab test.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write statistics and per-system averages as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare step counts with the exact path length on x^2 - 1 -> x^2 - m.
    ValidateUnivariate {
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        m: Vec<f64>,
        #[arg(long, default_value_t = 0.125)]
        rho: f64,
        #[arg(long, default_value_t = 0.875)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one Krawczyk test with Y = JF(x)^{-1}.
    Certify {
        #[arg(long)]
        system: PathBuf,
        /// JSON list of [re, im] pairs.
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.125)]
        rho: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            if text.ends_with('\n') {
                print!("{text}");
            } else {
                println!("{text}");
            }
            Ok(())
        }
    }
}

fn parse_point(v: Vec<[f64; 2]>) -> Vec<Complex64> {
    v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()
}

#[derive(Serialize)]
struct PathResult<T: Serialize> {
    path_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Track { homotopy, starts, mode, rho, tau, out } => {
            let h = AffineHomotopy::from_json_str(&read(&homotopy)?)?;
            let starts: Vec<Vec<[f64; 2]>> = serde_json::from_str(&read(&starts)?)?;
            let opts = TrackOptions { rho, tau, ..TrackOptions::default() };
            let mut ok = true;
            let results: Vec<_> = starts
                .into_iter()
                .enumerate()
                .map(|(path_id, s)| match track(&h, &parse_point(s), mode, &opts) {
                    Ok(tr) => PathResult { path_id, trace: Some(tr), error: None },
                    Err(e) => {
                        ok = false;
                        PathResult { path_id, trace: None, error: Some(e.to_string()) }
                    }
                })
                .collect();
            emit(out.as_deref(), &serde_json::to_string_pretty(&results)?)?;
            Ok(ok)
        }
        Command::Bench { suite, min, max, mode, seed, rho, tau, threads, verify, out, json } => {
            if min > max {
                return Err(Error::Usage(format!("--min {min} exceeds --max {max}")));
            }
            let s = BenchmarkSuite::by_name(&suite, min, max, seed)?;
            let opts = TrackOptions { rho, tau, verify_steps: verify, ..TrackOptions::default() };
            let res = run_suite(&s, mode, &opts, threads)?;
            emit(out.as_deref(), &res.to_csv())?;
            if let Some(j) = json {
                emit(Some(&j), &res.to_json_string())?;
            }
            for row in res.summary() {
                eprintln!(
                    "{:<10} {:<8} paths {:>3} failed {:>2} iters {:>10.2} steps {:>10.2} dt_min {:.1e} dt_med {:.1e} r_min {:.1e} r/r_th {:.1e} eta_max {:.1e}",
                    row.label,
                    row.mode.as_str(),
                    row.paths,
                    row.failures,
                    row.iterations,
                    row.steps,
                    row.dt_min,
                    row.dt_median,
                    row.r_min,
                    row.avg_r_ratio,
                    row.eta_max
                );
            }
            Ok(res.all_succeeded())
        }
        Command::ValidateUnivariate { m, rho, tau, out } => {
            let rows = validate_univariate(&m, rho, tau)?;
            emit(out.as_deref(), &univariate_csv(&rows))?;
            Ok(true)
        }
        Command::Certify { system, point, radius, rho } => {
            let f = PolySystem::from_json_str(&read(&system)?)?;
            let x = parse_point(serde_json::from_str(&read(&point)?)?);
            if x.len() != f.dim() {
                return Err(Error::Usage(format!("point has {} coordinates, system has {}", x.len(), f.dim())));
            }
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::Usage(format!("radius must be positive, got {radius}")));
            }
            let y = f.jacobian_point(&x).approx_inverse()?;
            let verdict = krawczyk_test(&f, &x, radius, &y, rho);
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            Ok(verdict.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Usage(_) | Error::Parse(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
