use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shortpulse_experiments::report::emit_report;
use shortpulse_experiments::single::single_run_with_state;
use shortpulse_experiments::{run_experiment, Experiment, Results, RunConfig};

/// Short-pulse experiments for semilinear wave equations.
///
/// Settings are layered: experiment defaults, then `--config`, then flags.
/// The exit status is 0 iff every verdict passes.
#[derive(Parser)]
#[command(name = "shortpulse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one pulse and record every diagnostic.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the evolved state to `<out>/state.ckpt`.
        #[arg(long)]
        checkpoint: bool,
    },
    /// Fit the norm hierarchy against delta over `delta_list`.
    Sweep(ConfigArgs),
    /// Convergence order against exact and manufactured solutions.
    Converge(ConfigArgs),
    /// Suprema on the last ingoing cone against delta.
    Prop61(ConfigArgs),
    /// Large-energy focusing pulse against the blowing-up ODE.
    Contrast(ConfigArgs),
    /// Sobolev ratios and energy-identity ledgers.
    Audit(ConfigArgs),
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Plain-text `key = value` file with `RunConfig` fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<String>,
    #[arg(long, alias = "u_end", allow_hyphen_values = true)]
    u_end: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long, alias = "n_u")]
    n_u: Option<String>,
    #[arg(long, alias = "n_ub")]
    n_ub: Option<String>,
    #[arg(long, alias = "n_theta")]
    n_theta: Option<String>,
    /// 2 or 3.
    #[arg(long)]
    dim: Option<String>,
    /// `sin4` or `bump`.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long, alias = "angular_mode")]
    angular_mode: Option<String>,
    /// `linear`, `defocusing:<k>`, `focusing:<k>` or `exp-focusing`.
    #[arg(long)]
    nonlinearity: Option<String>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, alias = "delta_list")]
    delta_list: Option<String>,
    /// Data energy to reach by amplitude selection, or `none`.
    #[arg(long, alias = "energy_target")]
    energy_target: Option<String>,
    #[arg(long)]
    headroom: Option<String>,
    #[arg(long, alias = "slope_tolerance")]
    slope_tolerance: Option<String>,
    #[arg(long, alias = "equality_tolerance")]
    equality_tolerance: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, alias = "order_tolerance")]
    order_tolerance: Option<String>,
    #[arg(long, alias = "energy_tolerance")]
    energy_tolerance: Option<String>,
    #[arg(long, alias = "refinement_tolerance")]
    refinement_tolerance: Option<String>,
    #[arg(long, alias = "csv_stride")]
    csv_stride: Option<String>,
    #[arg(long)]
    symmetry: Option<String>,
    #[arg(long, alias = "resolution_coupling")]
    resolution_coupling: Option<String>,
}

impl ConfigArgs {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("u0", &self.u0),
            ("u_end", &self.u_end),
            ("delta", &self.delta),
            ("n_u", &self.n_u),
            ("n_ub", &self.n_ub),
            ("n_theta", &self.n_theta),
            ("dim", &self.dim),
            ("profile", &self.profile),
            ("amplitude", &self.amplitude),
            ("angular_mode", &self.angular_mode),
            ("nonlinearity", &self.nonlinearity),
            ("delta_list", &self.delta_list),
            ("energy_target", &self.energy_target),
            ("headroom", &self.headroom),
            ("slope_tolerance", &self.slope_tolerance),
            ("equality_tolerance", &self.equality_tolerance),
            ("levels", &self.levels),
            ("order_tolerance", &self.order_tolerance),
            ("energy_tolerance", &self.energy_tolerance),
            ("refinement_tolerance", &self.refinement_tolerance),
            ("csv_stride", &self.csv_stride),
            ("out", &self.out),
            ("symmetry", &self.symmetry),
            ("resolution_coupling", &self.resolution_coupling),
        ]
    }

    fn resolve(&self, experiment: Experiment) -> anyhow::Result<RunConfig> {
        let mut config = RunConfig::for_experiment(experiment);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config
                .apply_text(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                config.set(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        config.experiment = experiment;
        config.validate()?;
        Ok(config)
    }
}

fn print_summary(results: &Results) {
    for f in &results.fits {
        let slope = f.slope.map_or("-".to_string(), |s| format!("{s:+.3}"));
        let spread = f.ratio_spread.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!(
            "fit   {:<28} p={:+.2} slope={slope:>7} spread={spread:>7} {}",
            f.quantity,
            f.exponent,
            f.verdict.label()
        );
    }
    for c in &results.checks {
        let mark = if c.passed { "ok" } else { "FAILED" };
        println!("check {:<44} {:.6e} ({}) {mark}", c.name, c.measured, c.criterion);
    }
    for r in &results.failures {
        println!("run   delta={} failed: {}", r.delta, r.message);
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let (experiment, args, checkpoint) = match &cli.command {
        Command::Run { config, checkpoint } => (Experiment::SingleRun, config, *checkpoint),
        Command::Sweep(a) => (Experiment::DeltaSweep, a, false),
        Command::Converge(a) => (Experiment::Convergence, a, false),
        Command::Prop61(a) => (Experiment::Prop61, a, false),
        Command::Contrast(a) => (Experiment::FocusingContrast, a, false),
        Command::Audit(a) => (Experiment::SobolevAudit, a, false),
    };
    let config = args.resolve(experiment)?;
    let results = if experiment == Experiment::SingleRun {
        let (results, state) = single_run_with_state(&config);
        if let (true, Some(state)) = (checkpoint, state) {
            std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
            state.write_checkpoint(&config.out.join("state.ckpt"))?;
        }
        results
    } else {
        run_experiment(&config)
    };
    let files = emit_report(&results, &config.out)?;
    print_summary(&results);
    println!(
        "wrote {}, {}, {}, {}",
        files.summary.display(),
        files.norms.display(),
        files.scaling.display(),
        files.plot.display()
    );
    if results.passed() {
        println!("{}: PASSED", experiment.name());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{}: FAILED", experiment.name());
        for name in results.failure_names() {
            println!("  {name}");
        }
        Ok(ExitCode::from(1))
    }
}
