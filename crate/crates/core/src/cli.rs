//! The `limbsys` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 infeasible transport
//! problem, 3 non-extremal coupling (or cyclic support), 4 infeasible
//! reconstruction.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::circle::{run_demo, DemoConfig};
use crate::error::{Error, Result};
use crate::extremality::{criteria, is_extremal, support_graph};
use crate::io::{
    coupling_from_json, coupling_to_json, demo_report_to_json, duals_to_json, problem_from_json, read_cost_csv,
    read_json, system_from_json, system_to_json, to_canonical_string, witness_to_json, write_cost_csv,
    write_support_csv, JsonScalar,
};
use crate::limb::{decompose, limb_count, reconstruct, Infeasibility, MarginalSide};
use crate::lp::solvers;
use crate::measure::ToleranceConfig;
use crate::scalar::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE_LP: i32 = 2;
pub const EXIT_NON_EXTREMAL: i32 = 3;
pub const EXIT_RECONSTRUCTION_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "limbsys", version, about = "Finite optimal transport, extremal couplings and numbered limb systems")]
pub struct Cli {
    /// Masses at or below this count as zero
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub eps_mass: f64,
    /// Reduced costs at or below this count as zero
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub eps_cost: f64,
    /// Exact rational arithmetic; masses are written as "p/q" strings
    #[arg(long, global = true)]
    pub rational: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a transportation problem
    Solve(SolveArgs),
    /// Decide whether a coupling is an extreme point of its polytope
    CheckExtremal(CheckArgs),
    /// Split an acyclic support into a numbered limb system
    Decompose(DecomposeArgs),
    /// Rebuild the coupling a limb system admits for given marginals
    Reconstruct(ReconstructArgs),
    /// Write a convex-split witness for a non-extremal coupling
    Witness(WitnessArgs),
    /// Run the circle example with opposed peaked densities
    DemoCircle(DemoArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem JSON: {"mu": [..], "nu": [..], "cost": [[..]]}
    pub problem: PathBuf,
    /// Read the cost matrix from this CSV instead of the problem file
    #[arg(long)]
    pub cost_csv: Option<PathBuf>,
    /// Write the cost matrix as CSV
    #[arg(long)]
    pub export_cost: Option<PathBuf>,
    /// Coupling output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dual potentials output
    #[arg(long)]
    pub duals: Option<PathBuf>,
    #[arg(long, default_value = "network-simplex")]
    pub solver: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub coupling: PathBuf,
    /// Write a convex-split witness when the coupling is not extremal
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long, default_value = "acyclic")]
    pub criterion: String,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub coupling: PathBuf,
    /// Limb-system output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub system: PathBuf,
    pub problem: PathBuf,
    /// Coupling output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub coupling: PathBuf,
    /// Witness output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub mu_center: f64,
    #[arg(long, default_value_t = 4.0)]
    pub mu_kappa: f64,
    #[arg(long, default_value_t = 3.0 * std::f64::consts::FRAC_PI_2)]
    pub nu_center: f64,
    #[arg(long, default_value_t = 4.0)]
    pub nu_kappa: f64,
    /// Common denominator of the snapped densities under --rational
    #[arg(long, default_value_t = 1 << 20)]
    pub denominator: u64,
    #[arg(long, default_value = "network-simplex")]
    pub solver: String,
    /// Report output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot data: theta, phi, mass, limb_kind per support cell
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command, returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = ToleranceConfig::new(cli.eps_mass, cli.eps_cost).and_then(|tol| {
        check_paths(&cli.command)?;
        if cli.rational {
            dispatch::<Rational>(&cli.command, &tol)
        } else {
            dispatch::<f64>(&cli.command, &tol)
        }
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Unbalanced { .. } => EXIT_INFEASIBLE_LP,
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Inputs must be readable files and outputs must land in existing directories.
fn check_paths(cmd: &Command) -> Result<()> {
    let (inputs, outputs): (Vec<&Path>, Vec<&Path>) = match cmd {
        Command::Solve(a) => (
            [Some(&a.problem), a.cost_csv.as_ref()].into_iter().flatten().map(PathBuf::as_path).collect(),
            [&a.out, &a.duals, &a.export_cost].into_iter().flatten().map(PathBuf::as_path).collect(),
        ),
        Command::CheckExtremal(a) => (vec![&a.coupling], a.witness.iter().map(PathBuf::as_path).collect()),
        Command::Decompose(a) => (vec![&a.coupling], a.out.iter().map(PathBuf::as_path).collect()),
        Command::Reconstruct(a) => (vec![&a.system, &a.problem], a.out.iter().map(PathBuf::as_path).collect()),
        Command::Witness(a) => (vec![&a.coupling], a.out.iter().map(PathBuf::as_path).collect()),
        Command::DemoCircle(a) => (vec![], [&a.out, &a.plot].into_iter().flatten().map(PathBuf::as_path).collect()),
    };
    for path in inputs {
        if !path.is_file() {
            return Err(Error::InvalidInput(format!("input {} is not a readable file", path.display())));
        }
    }
    for path in outputs {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(Error::InvalidInput(format!("output directory {} does not exist", dir.display())));
        }
        if path.is_dir() {
            return Err(Error::InvalidInput(format!("output {} is a directory", path.display())));
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Value> {
    read_json(path).map_err(|e| match e {
        Error::Json(err) => Error::InvalidInput(format!("{}: malformed JSON: {err}", path.display())),
        Error::Io(err) => Error::InvalidInput(format!("{}: {err}", path.display())),
        other => other,
    })
}

fn emit(path: Option<&PathBuf>, v: &Value) -> Result<()> {
    let text = to_canonical_string(v);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch<T: JsonScalar>(cmd: &Command, tol: &ToleranceConfig) -> Result<i32> {
    match cmd {
        Command::Solve(a) => {
            let mut raw = load(&a.problem)?;
            if let Some(csv_path) = &a.cost_csv {
                let cost = read_cost_csv::<T, _>(File::open(csv_path)?)?;
                let rows: Vec<Value> = (0..cost.rows())
                    .map(|i| Value::Array(cost.row(i).iter().map(T::to_json).collect()))
                    .collect();
                raw["cost"] = Value::Array(rows);
            }
            let p = problem_from_json::<T>(&raw)?;
            let reg = solvers::<T>();
            let rep = reg.get(&a.solver)?.solve(&p.mu, &p.nu, &p.cost, tol)?;
            if let Some(path) = &a.export_cost {
                write_cost_csv(BufWriter::new(File::create(path)?), &p.cost)?;
            }
            if let Some(path) = &a.duals {
                emit(Some(path), &duals_to_json(&rep.potentials, &rep.dual_value))?;
            }
            emit(a.out.as_ref(), &coupling_to_json(&rep.coupling))?;
            if a.out.is_some() {
                println!(
                    "optimal value {} ({} pivots, {} support cells)",
                    rep.primal_value,
                    rep.iterations,
                    rep.coupling.len()
                );
            }
            Ok(EXIT_OK)
        }
        Command::CheckExtremal(a) => {
            let gamma = coupling_from_json::<T>(&load(&a.coupling)?)?;
            let reg = criteria();
            let criterion = reg.get(&a.criterion)?;
            if criterion.is_extremal_support(&support_graph(&gamma, tol))? {
                println!("extremal");
                return Ok(EXIT_OK);
            }
            let cert = is_extremal(&gamma, tol);
            let cycle = cert.cycle.as_ref().expect("criteria agree on non-extremal supports");
            println!("non-extremal: cycle {:?}", cycle.edges());
            if let (Some(path), Some((g0, g1))) = (&a.witness, &cert.split) {
                emit(Some(path), &witness_to_json(cycle, g0, g1))?;
            }
            Ok(EXIT_NON_EXTREMAL)
        }
        Command::Witness(a) => {
            let gamma = coupling_from_json::<T>(&load(&a.coupling)?)?;
            let cert = is_extremal(&gamma, tol);
            match (&cert.cycle, &cert.split) {
                (Some(cycle), Some((g0, g1))) => {
                    emit(a.out.as_ref(), &witness_to_json(cycle, g0, g1))?;
                    if a.out.is_some() {
                        println!("non-extremal: witness over {} cells written", cycle.len());
                    }
                }
                _ => println!("extremal: no witness exists"),
            }
            Ok(EXIT_OK)
        }
        Command::Decompose(a) => {
            let gamma = coupling_from_json::<T>(&load(&a.coupling)?)?;
            match decompose(&support_graph(&gamma, tol)) {
                Ok(sys) => {
                    emit(a.out.as_ref(), &system_to_json(&sys))?;
                    if a.out.is_some() {
                        println!("{} limbs", limb_count(&sys));
                    }
                    Ok(EXIT_OK)
                }
                Err(Error::Cyclic(cycle)) => {
                    eprintln!("error: support is not acyclic: cycle {:?}", cycle.edges());
                    Ok(EXIT_NON_EXTREMAL)
                }
                Err(e) => Err(e),
            }
        }
        Command::Reconstruct(a) => {
            let sys = system_from_json(&load(&a.system)?)?;
            let p = problem_from_json::<T>(&load(&a.problem)?)?;
            let rep = reconstruct(&sys, &p.mu, &p.nu, tol)?;
            match &rep.infeasibility {
                None => {
                    emit(a.out.as_ref(), &coupling_to_json(&rep.coupling))?;
                    Ok(EXIT_OK)
                }
                Some(Infeasibility::NegativeEta { limb, point, value }) => {
                    let side = if limb % 2 == 1 { "x" } else { "y" };
                    eprintln!("infeasible: residual mass {value} at {side}{point} feeding limb {limb}");
                    Ok(EXIT_RECONSTRUCTION_INFEASIBLE)
                }
                Some(Infeasibility::MarginalMismatch { side, point, deviation }) => {
                    let side = match side {
                        MarginalSide::Mu => "mu",
                        MarginalSide::Nu => "nu",
                    };
                    eprintln!("infeasible: {side} missed by {deviation} at point {point}");
                    Ok(EXIT_RECONSTRUCTION_INFEASIBLE)
                }
            }
        }
        Command::DemoCircle(a) => {
            let cfg = DemoConfig {
                n: a.n,
                mu_center: a.mu_center,
                mu_kappa: a.mu_kappa,
                nu_center: a.nu_center,
                nu_kappa: a.nu_kappa,
                denominator: a.denominator,
                tol: *tol,
            };
            cfg.validate()?;
            let reg = solvers::<T>();
            let rep = run_demo::<T>(&cfg, reg.get(&a.solver)?)?;
            if let Some(path) = &a.plot {
                write_support_csv(BufWriter::new(File::create(path)?), &rep.support_points())?;
            }
            emit(a.out.as_ref(), &demo_report_to_json(&rep))?;
            if a.out.is_some() {
                match &rep.cross_mass {
                    Some(mass) => println!("two limbs; cross-mass {mass}"),
                    None => println!("no two-limb split; breadth-first decomposition has {} limbs", rep.limb_count),
                }
            }
            Ok(EXIT_OK)
        }
    }
}
