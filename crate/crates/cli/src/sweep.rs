use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use protmeas::dyson::first_order_amplitude;
use protmeas::exact::{amplitude_envelope, amplitude_exact, probability_taylor};
use protmeas::oracle::{oracle_amplitude, HamiltonianSchedule};
use protmeas::{CouplingKind, CouplingProfile, MeasurementGeometry, ProfileTable};
use rayon::prelude::*;

use crate::output::{Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Xi,
    Gamma,
    #[value(name = "omega0T", alias = "omega0t")]
    Omega0T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Envelope,
    Taylor,
    FirstOrder,
    Oracle,
    All,
}

impl MethodArg {
    fn column(self) -> &'static str {
        match self {
            MethodArg::Exact => "p_exact",
            MethodArg::Envelope => "p_envelope",
            MethodArg::Taylor => "p_taylor",
            MethodArg::FirstOrder => "p_first_order",
            MethodArg::Oracle => "p_oracle",
            MethodArg::All => unreachable!(),
        }
    }

    fn closed_form(self) -> bool {
        matches!(self, MethodArg::Exact | MethodArg::Envelope | MethodArg::Taylor)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Swept variable.
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long)]
    pub min: f64,
    #[arg(long)]
    pub max: f64,
    #[arg(long, default_value_t = 101)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub spacing: Spacing,
    /// Fixed ξ values (comma separated) when not swept.
    #[arg(long, value_delimiter = ',')]
    pub xi: Vec<f64>,
    /// Fixed polar angles in degrees.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Fixed azimuths in degrees.
    #[arg(long, value_delimiter = ',')]
    pub eta: Vec<f64>,
    #[arg(long = "omega0T", alias = "omega0t", value_delimiter = ',')]
    pub omega0_t: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "envelope")]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value = "constant")]
    pub profile: CouplingKind,
    /// Two-column `s g` file for `--profile tabulated`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Also write a gnuplot script plotting the CSV output.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

fn grid(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if args.count < 2 {
        return Err(CliError::usage(format!("--count must be at least 2, got {}", args.count)));
    }
    if !(args.min.is_finite() && args.max.is_finite() && args.min < args.max) {
        return Err(CliError::usage(format!("need --min < --max, got {} and {}", args.min, args.max)));
    }
    let n = args.count - 1;
    Ok(match args.spacing {
        Spacing::Linear => {
            (0..=n).map(|i| if i == n { args.max } else { args.min + (args.max - args.min) * i as f64 / n as f64 }).collect()
        }
        Spacing::Log => {
            if args.min <= 0.0 {
                return Err(CliError::usage("log spacing needs --min > 0"));
            }
            let (a, b) = (args.min.ln(), args.max.ln());
            (0..=n).map(|i| if i == n { args.max } else { (a + (b - a) * i as f64 / n as f64).exp() }).collect()
        }
    })
}

fn methods(args: &SweepArgs) -> Result<Vec<MethodArg>, CliError> {
    let constant = args.profile == CouplingKind::Constant;
    let mut out: Vec<MethodArg> = Vec::new();
    for m in &args.methods {
        let expanded: Vec<MethodArg> = if *m == MethodArg::All {
            [MethodArg::Exact, MethodArg::Envelope, MethodArg::Taylor, MethodArg::FirstOrder, MethodArg::Oracle]
                .into_iter()
                .filter(|m| constant || !m.closed_form())
                .collect()
        } else {
            if m.closed_form() && !constant {
                return Err(CliError::usage(format!(
                    "method {} applies to constant coupling only",
                    m.column().trim_start_matches("p_")
                )));
            }
            vec![*m]
        };
        for m in expanded {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    Ok(out)
}

fn profile(args: &SweepArgs) -> Result<CouplingProfile, CliError> {
    match (args.profile, &args.table) {
        (CouplingKind::Tabulated, Some(path)) => Ok(CouplingProfile::Tabulated(ProfileTable::from_path(path)?)),
        (CouplingKind::Tabulated, None) => Err(CliError::usage("--profile tabulated needs --table")),
        (_, Some(_)) => Err(CliError::usage("--table only applies to --profile tabulated")),
        (kind, None) => Ok(CouplingProfile::built_in(kind)?),
    }
}

// Fixed values for one parameter: error if it is also the axis.
fn fixed(values: &[f64], default: f64, name: &str, swept: bool) -> Result<Vec<f64>, CliError> {
    match (swept, values.is_empty()) {
        (true, false) => Err(CliError::usage(format!("--{name} conflicts with --axis {name}"))),
        (true, true) => Ok(vec![f64::NAN]),
        (false, true) => Ok(vec![default]),
        (false, false) => Ok(values.to_vec()),
    }
}

struct Point {
    xi: f64,
    gamma_deg: f64,
    eta_deg: f64,
    omega0_t: f64,
}

fn evaluate(p: &Point, methods: &[MethodArg], profile: &CouplingProfile) -> Result<Vec<Cell>, CliError> {
    let geom = MeasurementGeometry::new(p.xi, p.gamma_deg.to_radians(), p.eta_deg.to_radians(), p.omega0_t)?;
    let mut row: Vec<Cell> = vec![p.xi.into(), p.gamma_deg.into(), p.eta_deg.into(), p.omega0_t.into()];
    for m in methods {
        let v = match m {
            MethodArg::Exact => amplitude_exact(&geom).probability_minus,
            MethodArg::Envelope => amplitude_envelope(&geom).probability_minus,
            MethodArg::Taylor => probability_taylor(&geom),
            MethodArg::FirstOrder => first_order_amplitude(profile, &geom).amplitude.norm_sqr(),
            MethodArg::Oracle => oracle_amplitude(&HamiltonianSchedule::single(geom, profile.clone()))?.norm_sqr(),
            MethodArg::All => unreachable!(),
        };
        row.push(v.into());
    }
    Ok(row)
}

pub fn run(args: &SweepArgs) -> Result<Table, CliError> {
    let axis_values = grid(args)?;
    let methods = methods(args)?;
    let profile = profile(args)?;
    let xis = fixed(&args.xi, 0.1, "xi", args.axis == Axis::Xi)?;
    let gammas = fixed(&args.gamma, 90.0, "gamma", args.axis == Axis::Gamma)?;
    let etas = if args.eta.is_empty() { vec![0.0] } else { args.eta.clone() };
    let omegas = fixed(&args.omega0_t, 1000.0, "omega0T", args.axis == Axis::Omega0T)?;

    let mut points = Vec::new();
    for &xi in &xis {
        for &gamma_deg in &gammas {
            for &eta_deg in &etas {
                for &omega0_t in &omegas {
                    for &v in &axis_values {
                        let mut p = Point { xi, gamma_deg, eta_deg, omega0_t };
                        match args.axis {
                            Axis::Xi => p.xi = v,
                            Axis::Gamma => p.gamma_deg = v,
                            Axis::Omega0T => p.omega0_t = v,
                        }
                        points.push(p);
                    }
                }
            }
        }
    }

    let rows: Vec<Vec<Cell>> =
        points.par_iter().map(|p| evaluate(p, &methods, &profile)).collect::<Result<_, _>>()?;
    let mut headers = vec!["xi", "gamma_deg", "eta_deg", "omega0_t"];
    headers.extend(methods.iter().map(|m| m.column()));
    let mut table = Table::new(&headers);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

pub fn gnuplot_script(args: &SweepArgs, table: &Table, data_file: &str) -> String {
    let x_col = match args.axis {
        Axis::Xi => 1,
        Axis::Gamma => 2,
        Axis::Omega0T => 4,
    };
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{}'", table.headers[x_col - 1]);
    let _ = writeln!(s, "set ylabel 'transition probability'");
    if args.spacing == Spacing::Log {
        let _ = writeln!(s, "set logscale x");
    }
    let plots: Vec<String> = (5..=table.headers.len())
        .map(|c| format!("'{data_file}' using {x_col}:{c} with lines"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(axis: Axis, min: f64, max: f64, count: usize) -> SweepArgs {
        SweepArgs {
            axis,
            min,
            max,
            count,
            spacing: Spacing::Linear,
            xi: vec![],
            gamma: vec![],
            eta: vec![],
            omega0_t: vec![],
            methods: vec![MethodArg::Envelope],
            profile: CouplingKind::Constant,
            table: None,
            gnuplot: None,
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = grid(&args(Axis::Xi, 0.0, 1.0, 11)).unwrap();
        assert_eq!((g[0], g[10]), (0.0, 1.0));
        let mut a = args(Axis::Omega0T, 40.0, 4000.0, 3);
        a.spacing = Spacing::Log;
        let g = grid(&a).unwrap();
        assert!((g[1] - 400.0).abs() < 1e-9);
        assert_eq!(g[2], 4000.0);
    }

    #[test]
    fn invalid_grids() {
        assert!(grid(&args(Axis::Xi, 0.0, 1.0, 1)).is_err());
        assert!(grid(&args(Axis::Xi, 1.0, 1.0, 5)).is_err());
        let mut a = args(Axis::Xi, 0.0, 1.0, 5);
        a.spacing = Spacing::Log;
        assert!(grid(&a).is_err());
    }

    #[test]
    fn all_methods_depend_on_profile() {
        let mut a = args(Axis::Xi, 0.0, 1.0, 2);
        a.methods = vec![MethodArg::All];
        assert_eq!(methods(&a).unwrap().len(), 5);
        a.profile = CouplingKind::Optimized;
        assert_eq!(methods(&a).unwrap(), vec![MethodArg::FirstOrder, MethodArg::Oracle]);
        a.methods = vec![MethodArg::Exact];
        assert!(methods(&a).is_err());
    }
}
