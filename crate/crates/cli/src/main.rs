//! `owc`: trace a scenario, allocate access points and wavelengths, and
//! report the result.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use owc_core::allocation::{build_milp, default_alpha, export_lp, solve_bnb, solve_exhaustive};
use owc_core::channel::{compute_channel_matrix, content_hash};
use owc_core::report::{emit_report, ReportFormat, ResultDocument};
use owc_core::{AllocationProblem, ChannelMatrix, ScenarioConfig, Scene, TraceParams};

use manifest::{RunManifest, ScenarioSource, SolverChoice, LP_FILE, RESULT_FILE};

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "owc",
    version,
    about = "Optical wireless channel tracing and WDMA allocation"
)]
struct Cli {
    /// Worker threads for tracing (default: one per core).
    #[arg(long, global = true, env = "OWC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the channel matrix and cache it in the output directory.
    Trace(RunArgs),
    /// Trace (or reuse the cache), solve and write the result and report.
    Allocate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "bnb")]
        solver: SolverChoice,
        /// Comma-separated report formats.
        #[arg(long, default_value = "csv,json,svg", value_delimiter = ',')]
        formats: Vec<ReportFormat>,
        /// Big-M constant for the exported MILP.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Regenerate report files from a stored result.
    Report {
        result: PathBuf,
        #[arg(long, default_value = "csv,json,svg", value_delimiter = ',')]
        formats: Vec<ReportFormat>,
        /// Defaults to the directory holding the result.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario: office, cabin or datacentre.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Impulse-response bin width, ps.
    #[arg(long)]
    bin_width: Option<f64>,
    /// Retrace even when an up-to-date cache exists.
    #[arg(long)]
    no_cache: bool,
}

impl RunArgs {
    fn manifest(&self, solver: SolverChoice) -> Result<RunManifest> {
        let source = match (&self.scenario, &self.config) {
            (Some(name), None) => ScenarioSource::Builtin(name.clone()),
            (None, Some(path)) => ScenarioSource::Config(path.clone()),
            _ => anyhow::bail!("give exactly one of --scenario and --config"),
        };
        let mut trace = TraceParams::default();
        if let Some(ps) = self.bin_width {
            trace.bin_width = ps * 1e-12;
        }
        let m = RunManifest {
            source,
            trace,
            solver,
            out: self.out.clone(),
            use_cache: !self.no_cache,
        };
        m.validate()?;
        Ok(m)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Trace(args) => {
            let m = args.manifest(SolverChoice::Bnb)?;
            let config = m.source.load()?;
            channel(&m, &config)?;
            Ok(0)
        }
        Command::Allocate {
            run,
            solver,
            formats,
            alpha,
        } => allocate(&run.manifest(solver)?, &formats, alpha),
        Command::Report { result, formats, out } => {
            let out = out.unwrap_or_else(|| result.parent().map(Path::to_path_buf).unwrap_or_default());
            report(&result, &formats, &out)
        }
    }
}

/// The cached matrix when fresh, otherwise a new trace written to the cache.
fn channel(m: &RunManifest, config: &ScenarioConfig) -> Result<ChannelMatrix> {
    let hash = content_hash(config, &m.trace);
    let path = m.cache_path();
    if m.use_cache {
        if let Some(matrix) = ChannelMatrix::load_if_fresh(&path, &hash) {
            log::info!("channel cache {} is up to date, skipping trace", path.display());
            return Ok(matrix);
        }
    }
    let start = Instant::now();
    let scene = Scene::build(config.clone())?;
    let matrix = compute_channel_matrix(&scene, &m.trace)?;
    log::info!(
        "traced {} links in {:.1} s",
        matrix.dims.links(),
        start.elapsed().as_secs_f64()
    );
    std::fs::create_dir_all(&m.out).with_context(|| format!("creating {}", m.out.display()))?;
    matrix.save(&path)?;
    log::info!("wrote {}", path.display());
    Ok(matrix)
}

fn allocate(m: &RunManifest, formats: &[ReportFormat], alpha: Option<f64>) -> Result<u8> {
    let config = m.source.load()?;
    let matrix = channel(m, &config)?;
    let problem = AllocationProblem::from_channel(&config, &matrix)?;

    let outcome = match m.solver {
        SolverChoice::ExportOnly => {
            let alpha = alpha.unwrap_or_else(|| default_alpha(&problem));
            let model = build_milp(&problem, alpha)?;
            let path = m.out.join(LP_FILE);
            std::fs::write(&path, export_lp(&model))
                .with_context(|| format!("writing {}", path.display()))?;
            log::info!(
                "wrote {} ({} variables, {} constraints)",
                path.display(),
                model.variables.len(),
                model.constraints.len()
            );
            return Ok(0);
        }
        SolverChoice::Bnb => solve_bnb(&problem)?,
        SolverChoice::Exhaustive => solve_exhaustive(&problem)?,
    };
    if let Some(r) = outcome.optimal() {
        log::info!(
            "{} solver: {} nodes in {:.3} s",
            r.stats.solver,
            r.stats.nodes,
            r.stats.wall_time.as_secs_f64()
        );
    }

    let doc = ResultDocument::new(&config, &matrix, &problem, &outcome)?;
    let path = m.out.join(RESULT_FILE);
    doc.save(&path)?;
    log::info!("wrote {}", path.display());
    finish(&doc, formats, &m.out)
}

fn report(result: &Path, formats: &[ReportFormat], out: &Path) -> Result<u8> {
    let doc = ResultDocument::load(result)?;
    finish(&doc, formats, out)
}

/// Print the summary, write report files and pick the exit status.
fn finish(doc: &ResultDocument, formats: &[ReportFormat], out: &Path) -> Result<u8> {
    if let Some(cert) = &doc.infeasibility {
        eprintln!("{}: {cert}", doc.scenario);
        return Ok(EXIT_INFEASIBLE);
    }
    print_summary(doc);
    for path in emit_report(&doc.rows, formats, doc.sinr_threshold_db, out)? {
        log::info!("wrote {}", path.display());
    }
    Ok(0)
}

fn print_summary(doc: &ResultDocument) {
    println!(
        "{:<8} {:>3} {:<8} {:>6} {:>9} {:>10} {:>10}",
        "user", "ap", "lambda", "branch", "SINR dB", "B3dB GHz", "rate Gbps"
    );
    for r in &doc.rows {
        let bw = format!(
            "{}{:.2}",
            if r.bandwidth_is_lower_bound { ">" } else { "" },
            r.bandwidth_hz / 1e9
        );
        println!(
            "{:<8} {:>3} {:<8} {:>6} {:>9.2} {:>10} {:>10.2}",
            r.user,
            r.ap,
            r.wavelength,
            r.branch,
            r.sinr_db,
            bw,
            r.rate_bps / 1e9
        );
    }
    if let Some(r) = &doc.result {
        println!("objective (sum of linear SINR): {:.6}", r.objective);
    }
}
