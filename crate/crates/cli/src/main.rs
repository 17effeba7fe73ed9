//! `protmeas`: parameter sweeps, coupling-profile data, verification and
//! experiment design for protective spin measurements.

mod output;
mod sweep;
mod verify;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use protmeas::design::{derive_report, required_gradient, xi_budget, LabConfig};
use protmeas::dyson::reduction_ratio;
use protmeas::exact::reversal_probability;
use protmeas::multimeas::{simultaneous_amplitude, successive_amplitude, MultiFieldConfig};
use protmeas::oracle::oracle_amplitude;
use protmeas::reconstruct::{corrupted_reconstruction, measurement_frame, reconstruct_state, ExpectationTriple};
use protmeas::{CouplingKind, CouplingProfile, FieldSpec, MeasurementGeometry};
use serde_json::json;

use output::{emit_json, emit_table, Cell, Format, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(protmeas::Error),
    Io(std::io::Error),
    Verification,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Verification => f.write_str("verification failed"),
        }
    }
}

impl From<protmeas::Error> for CliError {
    fn from(e: protmeas::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "protmeas", version, about = "State disturbance in protective spin measurements")]
struct Cli {
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for randomized verification geometries.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transition probability along one parameter axis.
    Sweep(sweep::SweepArgs),
    /// Coupling profiles and their disturbance reduction.
    #[command(subcommand)]
    Coupling(CouplingCommand),
    /// Three fields at once versus one after another.
    Multi(MultiArgs),
    /// Momentum-shift reversal probability.
    Reversal(ReversalArgs),
    /// Density-matrix reconstruction from three expectation values.
    Reconstruct(ReconstructArgs),
    /// Dimensionless parameters and disturbance for a lab configuration.
    Design(DesignArgs),
    /// Cross-check closed forms against the numerical propagator.
    Verify(verify::VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum CouplingCommand {
    /// g·T over t/T in [0, 1] for the built-in profiles.
    Shape {
        #[arg(long, default_value_t = 101)]
        count: usize,
    },
    /// Envelope reduction ratio versus omega0T (log spaced).
    Ratio {
        #[arg(long, default_value_t = 40.0)]
        min: f64,
        #[arg(long, default_value_t = 4000.0)]
        max: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Debug, Args)]
struct MultiArgs {
    /// Three field strengths.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    xi: Vec<f64>,
    /// Three polar angles in degrees.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    gamma: Vec<f64>,
    /// Three azimuths in degrees.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    eta: Vec<f64>,
    #[arg(long = "omega0T", alias = "omega0t")]
    omega0_t: f64,
    /// Accept directions that are not mutually orthogonal.
    #[arg(long)]
    relaxed: bool,
    /// Add oracle amplitudes of the combined and successive schedules.
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct ReversalArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    xi: Vec<f64>,
    /// Polar angles in degrees.
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    /// Measured expectation values along the frame directions; without this
    /// the corrupted reconstruction of |+> is tabulated instead.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Polar angles in degrees: of n3 when reconstructing `--values`, or the
    /// grid for the corrupted reconstruction.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    /// Azimuths in degrees, as for `--gamma`.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// JSON lab configuration.
    config: PathBuf,
}

fn three(values: &[f64], name: &str) -> Result<[f64; 3], CliError> {
    values.try_into().map_err(|_| CliError::usage(format!("--{name} needs exactly three values, got {}", values.len())))
}

fn coupling(cmd: &CouplingCommand) -> Result<Table, CliError> {
    match *cmd {
        CouplingCommand::Shape { count } => {
            if count < 2 {
                return Err(CliError::usage("--count must be at least 2"));
            }
            let profiles: Vec<CouplingProfile> =
                CouplingKind::BUILT_IN.iter().map(|k| CouplingProfile::built_in(*k)).collect::<Result<_, _>>()?;
            let mut t = Table::new(&["s", "constant", "raised_cosine", "optimized"]);
            for i in 0..count {
                let s = i as f64 / (count - 1) as f64;
                let mut row: Vec<Cell> = vec![s.into()];
                row.extend(profiles.iter().map(|p| Cell::from(p.eval(s))));
                t.push(row);
            }
            Ok(t)
        }
        CouplingCommand::Ratio { min, max, count } => {
            if count < 2 || !(min > 0.0 && min < max) {
                return Err(CliError::usage("need --count >= 2 and 0 < --min < --max"));
            }
            let mut t = Table::new(&["omega0_t", "raised_cosine", "optimized"]);
            let (a, b) = (min.ln(), max.ln());
            for i in 0..count {
                let x = if i + 1 == count { max } else { (a + (b - a) * i as f64 / (count - 1) as f64).exp() };
                t.push(vec![
                    x.into(),
                    reduction_ratio(CouplingKind::RaisedCosine, x)?.into(),
                    reduction_ratio(CouplingKind::Optimized, x)?.into(),
                ]);
            }
            Ok(t)
        }
    }
}

fn multi(args: &MultiArgs) -> Result<Table, CliError> {
    let (xi, gamma, eta) = (three(&args.xi, "xi")?, three(&args.gamma, "gamma")?, three(&args.eta, "eta")?);
    let mut fields = Vec::with_capacity(3);
    for k in 0..3 {
        fields.push(FieldSpec::new(k as u8 + 1, xi[k], gamma[k].to_radians(), eta[k].to_radians())?);
    }
    let fields = [fields[0], fields[1], fields[2]];
    let config = if args.relaxed {
        MultiFieldConfig::relaxed(fields, args.omega0_t)?
    } else {
        MultiFieldConfig::new(fields, args.omega0_t)?
    };
    let mut t = Table::new(&["procedure", "amplitude_re", "amplitude_im", "probability"]);
    let mut push = |name: &str, a: protmeas::C64| t.push(vec![name.into(), a.re.into(), a.im.into(), a.norm_sqr().into()]);
    push("simultaneous", simultaneous_amplitude(&config));
    push("successive", successive_amplitude(&config));
    if args.oracle {
        push("simultaneous_oracle", oracle_amplitude(&config.combined_schedule()?)?);
        push("successive_oracle", oracle_amplitude(&config.successive_schedule()?)?);
    }
    Ok(t)
}

fn reversal(args: &ReversalArgs) -> Result<Table, CliError> {
    let mut t = Table::new(&["xi", "gamma_deg", "exact", "leading_order", "ratio"]);
    for &xi in &args.xi {
        for &g in &args.gamma {
            let r = reversal_probability(&MeasurementGeometry::new(xi, g.to_radians(), 0.0, 0.0)?)?;
            let ratio = if r.leading_order > 0.0 { r.exact / r.leading_order } else { f64::NAN };
            t.push(vec![xi.into(), g.into(), r.exact.into(), r.leading_order.into(), ratio.into()]);
        }
    }
    Ok(t)
}

fn reconstruct(args: &ReconstructArgs) -> Result<Table, CliError> {
    let header = ["gamma_deg", "eta_deg", "clipped", "fidelity", "rho00", "rho11", "rho01_re", "rho01_im"];
    let mut t = Table::new(&header);
    let entries = |rho: &protmeas::reconstruct::DensityMatrix| {
        let m = rho.entries();
        [m[0][0].re, m[1][1].re, m[0][1].re, m[0][1].im]
    };
    match &args.values {
        Some(values) => {
            let one = |v: &[f64], name| match v {
                [] => Ok(0.0),
                [x] => Ok(*x),
                _ => Err(CliError::usage(format!("--{name} takes one angle with --values"))),
            };
            let (g, e) = (one(&args.gamma, "gamma")?, one(&args.eta, "eta")?);
            let data = ExpectationTriple::new(measurement_frame(g.to_radians(), e.to_radians()), three(values, "values")?)?;
            let r = reconstruct_state(&data)?;
            let mut row: Vec<Cell> = vec![g.into(), e.into(), r.clipped.to_string().into(), f64::NAN.into()];
            row.extend(entries(&r.rho).map(Cell::from));
            t.push(row);
        }
        None => {
            let gammas = if args.gamma.is_empty() { vec![0.0, 22.5, 45.0, 90.0] } else { args.gamma.clone() };
            let etas = if args.eta.is_empty() { vec![0.0] } else { args.eta.clone() };
            for &g in &gammas {
                for &e in &etas {
                    let c = corrupted_reconstruction(g.to_radians(), e.to_radians())?;
                    let mut row: Vec<Cell> = vec![g.into(), e.into(), "false".into(), c.fidelity.into()];
                    row.extend(entries(&c.rho).map(Cell::from));
                    t.push(row);
                }
            }
        }
    }
    Ok(t)
}

fn design(args: &DesignArgs) -> Result<serde_json::Value, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config = LabConfig::from_json(&text).map_err(|e| CliError::usage(e.to_string()))?;
    let lab = config.lab().map_err(|e| CliError::usage(e.to_string()))?;
    let mut out = json!({ "report": derive_report(&lab)? });
    if let Some(ds) = config.target_displacement_meter {
        out["required_gradient_tesla_per_meter"] = json!(required_gradient(ds, &lab)?);
    }
    if let Some(p) = config.p_max {
        let g = xi_budget(p, &lab)?;
        // JSON has no infinity.
        out["gradient_budget_tesla_per_meter"] = if g.is_finite() { json!(g) } else { json!("inf") };
    }
    Ok(out)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.output.as_deref();
    let table = match &cli.command {
        Command::Sweep(args) => {
            let t = sweep::run(args)?;
            if let Some(path) = &args.gnuplot {
                let data = cli.output.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "sweep.csv".into());
                fs::write(path, sweep::gnuplot_script(args, &t, &data))?;
            }
            t
        }
        Command::Coupling(cmd) => coupling(cmd)?,
        Command::Multi(args) => multi(args)?,
        Command::Reversal(args) => reversal(args)?,
        Command::Reconstruct(args) => reconstruct(args)?,
        Command::Design(args) => {
            emit_json(&design(args)?, out)?;
            return Ok(());
        }
        Command::Verify(args) => {
            let report = verify::run(args, cli.seed);
            emit_json(&serde_json::to_value(&report).expect("report serializes"), out)?;
            return if report.passed { Ok(()) } else { Err(CliError::Verification) };
        }
    };
    emit_table(&table, cli.format, out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
