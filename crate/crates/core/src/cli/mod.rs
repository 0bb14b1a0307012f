//! Command-line front end: `check`, `integrate`, `experiment`, `compose`
//! and `list`.

pub mod config;
pub mod registry;

use std::fmt::Write as _;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::composition::{compose_tableau, CompositionWeights, Family};
use crate::diagnostics::{
    convergence_order, energy_study, reference_solution, stability_sweep, ComponentMask, SweepScheme,
};
use crate::integrators::{drive, DriveOptions, StepStats};
use crate::systems::{PhaseState, SeparableSystem};
use crate::tableau::write_tableau;
use crate::{Error, Result};
use config::{RunConfig, Settings};
use registry::{CheckReport, Requirements};

#[derive(Debug, Parser)]
#[command(name = "smgark", version, about = "Symplectic multirate GARK integrators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify the order and structure conditions of a scheme or tableau file.
    Check(CheckArgs),
    /// Integrate a problem and write the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Run one of the benchmark studies.
    Experiment(ExperimentArgs),
    /// Write the tableau of a composed scheme.
    Compose(ComposeArgs),
    /// List schemes, composition families, problems and experiments.
    List,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Builtin scheme name or tableau file.
    pub target: String,
    #[arg(long = "M", default_value_t = 2)]
    pub multirate: usize,
    /// Order conditions up to this order must hold.
    #[arg(long)]
    pub order: Option<u8>,
    /// Extra properties to require, e.g. `explicit,decoupled`.
    #[arg(long, default_value = "")]
    pub require: String,
    #[arg(long, default_value_t = crate::conditions::DEFAULT_TOL)]
    pub tol: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Flags mirroring the configuration keys.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    /// Multirate factor.
    #[arg(long = "M")]
    pub multirate: Option<String>,
    /// Composition family: tj, sf, ac, ac* or none.
    #[arg(long)]
    pub compose: Option<String>,
    #[arg(long)]
    pub compose_order: Option<String>,
    #[arg(long)]
    pub problem: Option<String>,
    /// Number of stiff springs of the chain.
    #[arg(long = "m")]
    pub springs: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
    /// benchmark (alias paper) or explicit.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub p0: Option<String>,
    #[arg(long)]
    pub q0: Option<String>,
    /// Macro-step size.
    #[arg(long = "H")]
    pub step: Option<String>,
    #[arg(long)]
    pub t_end: Option<String>,
    #[arg(long)]
    pub newton_rel_tol: Option<String>,
    #[arg(long)]
    pub newton_abs_tol: Option<String>,
    #[arg(long)]
    pub max_iters: Option<String>,
    /// analytic or fd.
    #[arg(long)]
    pub jacobian: Option<String>,
    #[arg(long)]
    pub fuse_kicks: Option<String>,
    /// Also write the micro-grid states.
    #[arg(long)]
    pub micro: bool,
    /// Comma-separated macro-step sizes; `2^-k` is accepted.
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub omegas: Option<String>,
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub reference_step: Option<String>,
    #[arg(long)]
    pub reference_gate: Option<String>,
}

impl RunArgs {
    /// File settings overlaid by the flags given.
    pub fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::read(path)?,
            None => Settings::default(),
        };
        let flags = [
            ("scheme", &self.scheme),
            ("M", &self.multirate),
            ("compose", &self.compose),
            ("compose_order", &self.compose_order),
            ("problem", &self.problem),
            ("m", &self.springs),
            ("omega", &self.omega),
            ("initial", &self.initial),
            ("p0", &self.p0),
            ("q0", &self.q0),
            ("H", &self.step),
            ("t_end", &self.t_end),
            ("newton_rel_tol", &self.newton_rel_tol),
            ("newton_abs_tol", &self.newton_abs_tol),
            ("max_iters", &self.max_iters),
            ("jacobian", &self.jacobian),
            ("fuse_kicks", &self.fuse_kicks),
            ("steps", &self.steps),
            ("omegas", &self.omegas),
            ("schemes", &self.schemes),
            ("reference_step", &self.reference_step),
            ("reference_gate", &self.reference_gate),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v.clone());
            }
        }
        if self.micro {
            s.set("micro", "true");
        }
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Hamiltonian and oscillatory energies over a long run.
    Energy,
    /// Order of the global slow-component error.
    Convergence,
    /// Global errors over stiffness and step size.
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Energy => "energy",
            Experiment::Convergence => "convergence",
            Experiment::Sweep => "sweep",
        }
    }

    /// Settings under the configuration file and flags.
    pub fn defaults(self) -> Settings {
        match self {
            Experiment::Energy => Settings::from_pairs([("M", "50"), ("t_end", "220")]),
            Experiment::Convergence => Settings::from_pairs([
                ("t_end", "3"),
                ("steps", "2^-5,2^-6,2^-7,2^-8,2^-9"),
            ]),
            Experiment::Sweep => Settings::from_pairs([
                ("t_end", "3"),
                ("steps", "2^-5,2^-6,2^-7,2^-8,2^-9,2^-10,2^-11,2^-12,2^-13"),
                ("omegas", "50,500,5000,10000"),
                ("schemes", "mr-imex2,mr-imim2"),
                ("compose", "tj"),
            ]),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub experiment: Experiment,
    #[command(flatten)]
    pub run: RunArgs,
    /// Directory receiving `<experiment>.csv`.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Builtin scheme name or tableau file.
    pub target: String,
    #[arg(long = "M", default_value_t = 1)]
    pub multirate: usize,
    #[arg(long, default_value = "tj")]
    pub family: String,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Custom weights file; overrides the family.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Runs a parsed command. `Ok(false)` means a check did not pass.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Check(a) => check(a, out),
        Command::Integrate(a) => {
            let mut cfg = RunConfig::from_settings(&a.run.settings()?)?;
            cfg.output = a.output.clone();
            integrate(&cfg, out).map(|_| true)
        }
        Command::Experiment(a) => experiment(a, out).map(|_| true),
        Command::Compose(a) => compose(a, out).map(|_| true),
        Command::List => list(out).map(|_| true),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<bool> {
    let t = registry::tableau(&a.target, a.multirate)?;
    let mut req = Requirements::for_scheme(&a.target).require(&a.require)?;
    if let Some(p) = a.order {
        req.order = p;
    }
    let report: CheckReport = registry::check_tableau(&t, &req, a.tol);
    emit(a.report.as_deref(), &report.to_csv(), out)?;
    for e in report.failing() {
        eprintln!("FAIL {} (residual {:e})", e.id, e.residual);
    }
    Ok(report.pass())
}

fn csv_header(n: usize) -> String {
    let mut s = String::from("t");
    (1..=n).for_each(|i| write!(s, ",p_{i}").unwrap());
    (1..=n).for_each(|i| write!(s, ",q_{i}").unwrap());
    s + ",H,I,slow_evals,fast_evals\n"
}

/// Writes the trajectory CSV; on a failed step the rows computed so far are
/// still written before the error is returned.
pub fn integrate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    registry::verify_builtin(&cfg.scheme.name, cfg.scheme.m)?;
    let (problem, y0) = cfg.problem.build()?;
    let stepper = registry::stepper(&cfg.scheme, cfg.solver)?;
    let opts = DriveOptions {
        fuse_kicks: cfg.fuse_kicks,
        micro: cfg.micro,
        t0: 0.0,
    };
    let mut csv = csv_header(problem.dim());
    let run = drive(
        &stepper,
        &problem,
        &y0,
        cfg.h,
        cfg.steps()?,
        &opts,
        &mut |t: f64, y: &PhaseState, stats: &StepStats| {
            write!(csv, "{t:.16e}").unwrap();
            y.p.iter().chain(y.q.iter()).for_each(|v| write!(csv, ",{v:.16e}").unwrap());
            let (_, i) = problem.oscillatory_energy(y);
            writeln!(
                csv,
                ",{:.16e},{i:.16e},{},{}",
                problem.hamiltonian(y),
                stats.slow_force_evals,
                stats.fast_force_evals
            )
            .unwrap();
            ControlFlow::Continue(())
        },
    );
    emit(cfg.output.as_deref(), &csv, out)?;
    run.map(|_| ())
}

fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let settings = a.experiment.defaults().overlay(&a.run.settings()?);
    let cfg = RunConfig::from_settings(&settings)?;
    std::fs::create_dir_all(&a.output_dir)?;
    let path = a.output_dir.join(format!("{}.csv", a.experiment.name()));
    let (problem, y0) = cfg.problem.build()?;
    let csv = match a.experiment {
        Experiment::Energy => {
            let stepper = registry::stepper(&cfg.scheme, cfg.solver)?;
            let s = energy_study(&stepper, &problem, &y0, cfg.h, cfg.t_end)?;
            writeln!(out, "scheme: {}", stepper.name())?;
            writeln!(out, "drift slope: {:e}", s.drift_slope)?;
            writeln!(out, "max |H(t) - H(0)|: {:e}", s.max_deviation)?;
            writeln!(out, "max |I(t) - I(0)|: {:e}", s.max_invariant_deviation)?;
            if let Some(f) = &s.failure {
                writeln!(out, "failed at step {} (t = {}): {}", f.step, f.time, f.message)?;
            }
            s.to_csv()
        }
        Experiment::Convergence => {
            let steps = settings.reals("steps")?;
            let mut reference = settings.reference()?;
            let mask = ComponentMask::slow(&problem);
            reference.mask = Some(mask.clone());
            let exact = reference_solution(&problem, &y0, cfg.t_end, &reference)?;
            let r = convergence_order(
                |_| registry::stepper(&cfg.scheme, cfg.solver),
                &problem,
                &y0,
                cfg.t_end,
                &steps,
                &exact,
                &mask,
            )?;
            writeln!(out, "slope: {:.4}", r.slope)?;
            r.to_csv()
        }
        Experiment::Sweep => {
            if problem.name() != "fpu" {
                return Err(Error::Config("the sweep runs on the fpu problem".into()));
            }
            let schemes = sweep_schemes(&settings, &cfg)?;
            let table = stability_sweep(
                &schemes,
                &settings.reals("omegas")?,
                &settings.reals("steps")?,
                cfg.t_end,
                cfg.problem.m,
                &settings.reference()?,
            )?;
            for s in &schemes {
                for omega in settings.reals("omegas")? {
                    writeln!(out, "{} omega={omega}: slope {:.3}", s.name, table.slope(&s.name, omega, 0.0, f64::INFINITY))?;
                }
            }
            table.to_csv()
        }
    };
    std::fs::write(&path, csv)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

/// Each base scheme of `schemes`, followed by its composition when one is
/// configured.
fn sweep_schemes(settings: &Settings, cfg: &RunConfig) -> Result<Vec<SweepScheme>> {
    let mut out = Vec::new();
    for name in settings.names("schemes")? {
        let mut spec = cfg.scheme.clone();
        spec.name = name.clone();
        let compose = spec.compose.take();
        out.push(SweepScheme::new(name.clone(), registry::stepper(&spec, cfg.solver)?));
        if let Some((family, order)) = compose {
            spec.compose = Some((family, order));
            let label = format!("{name}+{family}{order}");
            out.push(SweepScheme::new(label, registry::stepper(&spec, cfg.solver)?));
        }
    }
    Ok(out)
}

fn compose(a: &ComposeArgs, out: &mut dyn Write) -> Result<()> {
    let t = registry::tableau(&a.target, a.multirate)?;
    let w = match &a.weights {
        Some(path) => CompositionWeights::from_text(&std::fs::read_to_string(path)?)?,
        None => a.family.parse::<Family>()?.weights(a.order)?,
    };
    let composed = compose_tableau(&t, &w);
    let mut text = format!(
        "# {} composed with {} weights ({} substeps, order {})\n",
        a.target,
        w.family(),
        w.r(),
        w.order()
    );
    text += &write_tableau(&composed);
    emit(a.output.as_deref(), &text, out)
}

fn list(out: &mut dyn Write) -> Result<()> {
    writeln!(out, "schemes:")?;
    for name in registry::TABLEAU_SCHEMES.iter().chain(&registry::FOILS) {
        writeln!(out, "  {name:<14} {}", registry::describe(name))?;
    }
    writeln!(out, "composition families (order: base steps per macro-step):")?;
    for family in ["tj", "sf", "ac", "ac*"] {
        let f: Family = family.parse()?;
        let counts = [4, 6, 8, 10]
            .into_iter()
            .filter_map(|p| f.weights(p).ok().map(|w| format!("{p}:{}", w.r())))
            .collect::<Vec<_>>();
        writeln!(out, "  {family:<4} {}", counts.join(" "))?;
    }
    writeln!(out, "problems:")?;
    writeln!(out, "  fpu            chain with m stiff springs of stiffness omega")?;
    writeln!(out, "  harmonic       oscillator with frequency omega")?;
    writeln!(out, "experiments: energy, convergence, sweep")?;
    Ok(())
}
