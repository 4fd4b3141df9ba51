use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use mixedness_cli::{experiments, plot, CliError, CliResult, Experiment, ExperimentConfig, Params};

/// Regenerates figure data as CSV.
///
/// Parameters come from the figure defaults, then `--config` (TOML, or JSON
/// for a `.json` extension), then the flags below. List-valued parameters
/// take comma-separated values.
#[derive(Parser, Debug)]
#[command(name = "mixedness", version)]
struct Cli {
    /// fig1 to fig7, or custom
    experiment: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Plain-text parameter file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    emit_plot: bool,
    /// Figure pipeline to run for `custom`.
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long = "delta_over_gamma", allow_negative_numbers = true)]
    delta_over_gamma: Option<f64>,
    #[arg(long = "omega_over_gamma", value_delimiter = ',')]
    omega_over_gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Number of spins.
    #[arg(long)]
    n: Option<usize>,
    /// Sizes of the kept block of spins.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// GHZ mixing weights.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long = "jz_over_j", allow_negative_numbers = true)]
    jz_over_j: Option<f64>,
    #[arg(long = "gamma_anis", allow_negative_numbers = true)]
    gamma_anis: Option<f64>,
    /// Transverse field of the chain.
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long = "t_max")]
    t_max: Option<f64>,
    /// Number of time samples, including t = 0.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long = "r_steps")]
    r_steps: Option<usize>,
    #[arg(long = "theta_steps")]
    theta_steps: Option<usize>,
    /// Finite-difference step in units of 1/γ.
    #[arg(long = "fd_step")]
    fd_step: Option<f64>,
}

impl Cli {
    fn flag_params(&self) -> CliResult<Params> {
        Ok(Params {
            pipeline: self.pipeline.as_deref().map(str::parse).transpose()?,
            delta_over_gamma: self.delta_over_gamma,
            omega_over_gamma: self.omega_over_gamma.clone(),
            r: self.r.clone(),
            theta: self.theta.clone(),
            phi: self.phi,
            n: self.n,
            k: self.k.clone(),
            p: self.p.clone(),
            j: self.j,
            jz_over_j: self.jz_over_j,
            gamma_anis: self.gamma_anis,
            h: self.h,
            t_max: self.t_max,
            steps: self.steps,
            r_steps: self.r_steps,
            theta_steps: self.theta_steps,
            fd_step: self.fd_step,
        })
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    let experiment: Experiment = cli.experiment.parse()?;
    let from_file = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    let cfg = ExperimentConfig::resolve(experiment, from_file.overridden_by(cli.flag_params()?))?;
    let table = experiments::run(&cfg)?;
    write(&cli.out, &table.render())?;
    if cli.emit_plot {
        let script = cli.out.with_extension("gp");
        write(&script, &plot::script(&cfg, &cli.out.to_string_lossy()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
