//! Batch front end: parse a JSON problem file, dispatch to the solver and
//! certification toolkit, emit a machine-readable result on stdout.
//!
//! Exit codes: 0 success, 2 parse error or missing fields, 3 infeasible
//! (cut witness in the output), 4 numerical failure, 5 verification failure
//! (witness in the output). Human-readable diagnostics go to stderr only.

mod io;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndarray::Array1;

use otkit::analysis::{cost_norm, dual_cost_norm, marginal_dual_norm};
use otkit::certificates::{
    build_certificate, cyclical_monotonicity_check, diagnostics, verify_certificate,
    verify_strengthened_certificate, CertificateCheck, CertificateClause, Monotonicity, SupportSet,
};
use otkit::duality::{duality_gap, extract_potentials, strengthen_potentials};
use otkit::solver::{
    finite_cost_feasible_with_tol, solve_mk, Feasibility, MkSolution, SolveConfig,
};
use otkit::PotentialPair;

use io::{
    exit_code_for, matrix_from_rows, plan_to_rows, CutOut, ExtNum, NormsOut, ProblemFile,
    ResultFile, WitnessOut,
};

#[derive(Parser)]
#[command(
    name = "otkit",
    version,
    about = "Discrete optimal-transport solver and certificate checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Problem file (JSON).
    path: PathBuf,
    /// Numerical tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Mass threshold above which a cell counts as support.
    #[arg(long, default_value_t = 1e-10)]
    support_threshold: f64,
    /// Write the result file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timing in the result (off by default so identical
    /// inputs produce identical bytes).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the transport problem and certify the optimum.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        /// Also strengthen the potentials to the two-sided bound.
        #[arg(long)]
        strengthen: bool,
    },
    /// Verify a stored plan/potential bundle.
    Verify {
        #[command(flatten)]
        common: CommonOpts,
        /// Additionally check the strengthened two-sided certificate.
        #[arg(long)]
        strengthened: bool,
    },
    /// Check cyclical monotonicity of a support.
    Cyclic {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Decide finite-cost feasibility of the marginals over the mask.
    Feasible {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate the cost-weighted norms in the file.
    Norms {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let (common, outcome) = match &cli.command {
        Command::Solve { common, strengthen } => (common, cmd_solve(common, *strengthen)),
        Command::Verify {
            common,
            strengthened,
        } => (common, cmd_verify(common, *strengthened)),
        Command::Cyclic { common } => (common, cmd_cyclic(common)),
        Command::Feasible { common } => (common, cmd_feasible(common)),
        Command::Norms { common } => (common, cmd_norms(common)),
    };

    let (mut result, code) = match outcome {
        Ok(pair) => pair,
        Err(CmdError { message, code }) => {
            eprintln!("error: {message}");
            std::process::exit(code);
        }
    };
    if common.timing {
        result.timing_ms = Some(started.elapsed().as_millis() as u64);
    }

    let mut rendered = serde_json::to_string_pretty(&result).expect("result serializes");
    rendered.push('\n');
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                std::process::exit(4);
            }
        }
        None => print!("{rendered}"),
    }
    std::process::exit(code);
}

struct CmdError {
    message: String,
    code: i32,
}

impl CmdError {
    fn parse(message: impl Into<String>) -> Self {
        CmdError {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<otkit::Error> for CmdError {
    fn from(e: otkit::Error) -> Self {
        CmdError {
            message: e.to_string(),
            code: exit_code_for(&e),
        }
    }
}

type CmdResult = Result<(ResultFile, i32), CmdError>;

fn load(common: &CommonOpts) -> Result<ProblemFile, CmdError> {
    let text = std::fs::read_to_string(&common.path)
        .map_err(|e| CmdError::parse(format!("cannot read {}: {e}", common.path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::parse(format!("{}: {e}", common.path.display())))
}

fn config(common: &CommonOpts) -> Result<SolveConfig, CmdError> {
    let cfg = SolveConfig {
        tolerance: common.tol,
        max_iterations: None,
        support_threshold: common.support_threshold,
    };
    cfg.validate().map_err(|e| CmdError::parse(e.to_string()))?;
    Ok(cfg)
}

fn cmd_solve(common: &CommonOpts, strengthen: bool) -> CmdResult {
    let file = load(common)?;
    let cfg = config(common)?;
    let (mu, nu) = file.marginals().map_err(CmdError::parse)?;
    let c = file.cost_matrix().map_err(CmdError::parse)?;

    let solution = solve_mk(&mu, &nu, &c, &cfg)?;
    let solved = match solution {
        MkSolution::Infeasible(cut) => {
            eprintln!(
                "infeasible: rows {:?} carry mass {} but their finite-cost columns absorb only {}",
                cut.a_subset, cut.mu_mass, cut.nu_mass
            );
            let mut out = ResultFile::empty("infeasible");
            out.cut = Some(CutOut::from(&cut));
            return Ok((out, 3));
        }
        MkSolution::Optimal(r) => *r,
    };

    let (_, shift) = c.normalize()?;
    let mut potentials = extract_potentials(&solved.plan, &c, &cfg)?;
    if strengthen {
        let (c_norm, s) = c.normalize()?;
        let seed = PotentialPair::new(potentials.phi().clone(), potentials.psi().mapv(|x| x + s))?;
        let strong = strengthen_potentials(&solved.plan, &c_norm, &seed)?;
        potentials = PotentialPair::new(strong.phi().clone(), strong.psi().mapv(|x| x - s))?;
    }

    let cert = build_certificate(&mu, &nu, &c, &solved.plan, &potentials, &cfg)?;
    let diag = diagnostics(&mu, &nu, &c)?;

    let mut out = ResultFile::empty("optimal");
    out.value = Some(ExtNum::from(solved.value));
    out.shift = Some(shift);
    out.plan = Some(plan_to_rows(&solved.plan));
    out.phi = Some(potentials.phi().to_vec());
    out.psi = Some(potentials.psi().to_vec());
    out.gap = Some(ExtNum(cert.gap));
    out.verdicts = Some(cert.verdicts.into());
    out.diagnostics = Some(diag.into());
    eprintln!(
        "optimal: value {} with gap {} after {} pivots",
        solved.value, cert.gap, solved.iterations
    );
    Ok((out, 0))
}

fn cmd_verify(common: &CommonOpts, strengthened: bool) -> CmdResult {
    let file = load(common)?;
    let cfg = config(common)?;
    let (mu, nu) = file.marginals().map_err(CmdError::parse)?;
    let c = file.cost_matrix().map_err(CmdError::parse)?;
    let plan = file
        .plan(&mu, &nu, cfg.tolerance)
        .map_err(CmdError::parse)?;
    let potentials = file.potentials().map_err(CmdError::parse)?;

    let basic = verify_certificate(&plan, &c, &potentials, cfg.tolerance, cfg.support_threshold)?;
    let mut failure = match basic {
        CertificateCheck::Pass => None,
        CertificateCheck::Fail { cell, clause } => Some((cell, clause, "basic")),
    };
    if strengthened && failure.is_none() {
        let (c_norm, s) = c.normalize()?;
        let shifted =
            PotentialPair::new(potentials.phi().clone(), potentials.psi().mapv(|x| x + s))?;
        match verify_strengthened_certificate(
            &plan,
            &c_norm,
            &shifted,
            cfg.tolerance,
            cfg.support_threshold,
        )? {
            CertificateCheck::Pass => {}
            CertificateCheck::Fail { cell, clause } => {
                failure = Some((cell, clause, "strengthened"));
            }
        }
    }

    let report = duality_gap(&mu, &nu, &c, &plan, &potentials, &cfg)?;
    let cert = build_certificate(&mu, &nu, &c, &plan, &potentials, &cfg)?;
    let diag = diagnostics(&mu, &nu, &c)?;

    let mut out = ResultFile::empty(if failure.is_none() { "pass" } else { "fail" });
    out.value = Some(ExtNum::from(report.primal_value));
    out.gap = Some(ExtNum(report.gap));
    out.verdicts = Some(cert.verdicts.into());
    out.diagnostics = Some(diag.into());
    match failure {
        None => {
            eprintln!("pass: gap {}", report.gap);
            Ok((out, 0))
        }
        Some((cell, clause, kind)) => {
            let clause = match clause {
                CertificateClause::Feasibility => "feasibility",
                CertificateClause::Tightness => "tightness",
            };
            eprintln!("fail: {kind} {clause} clause broken at cell {cell:?}");
            out.witness = Some(WitnessOut {
                cell,
                clause: format!("{kind}:{clause}"),
            });
            Ok((out, 5))
        }
    }
}

fn cmd_cyclic(common: &CommonOpts) -> CmdResult {
    let file = load(common)?;
    let cfg = config(common)?;
    let (mu, nu) = file.marginals().map_err(CmdError::parse)?;
    let c = file.cost_matrix().map_err(CmdError::parse)?;

    let support = match (&file.support, &file.plan) {
        (Some(pairs), _) => SupportSet::new(pairs.clone(), c.rows(), c.cols())
            .map_err(|e| CmdError::parse(e.to_string()))?,
        (None, Some(_)) => {
            let plan = file
                .plan(&mu, &nu, cfg.tolerance)
                .map_err(CmdError::parse)?;
            SupportSet::from_plan(&plan, cfg.support_threshold)
        }
        (None, None) => return Err(CmdError::parse("missing field: support or plan")),
    };

    match cyclical_monotonicity_check(&support, &c, cfg.tolerance)? {
        Monotonicity::Monotone => {
            eprintln!("monotone: {} support pairs", support.len());
            Ok((ResultFile::empty("monotone"), 0))
        }
        Monotonicity::Violating(cycle) => {
            eprintln!("violating cycle of length {}", cycle.len());
            let mut out = ResultFile::empty("violating");
            out.cycle = Some(cycle);
            Ok((out, 5))
        }
    }
}

fn cmd_feasible(common: &CommonOpts) -> CmdResult {
    let file = load(common)?;
    let cfg = config(common)?;
    let (mu, nu) = file.marginals().map_err(CmdError::parse)?;
    let c = file.cost_matrix().map_err(CmdError::parse)?;

    match finite_cost_feasible_with_tol(&mu, &nu, &c, cfg.tolerance)? {
        Feasibility::Feasible => {
            eprintln!("feasible");
            Ok((ResultFile::empty("feasible"), 0))
        }
        Feasibility::Infeasible(cut) => {
            eprintln!(
                "infeasible: rows {:?} carry mass {} but their finite-cost columns absorb only {}",
                cut.a_subset, cut.mu_mass, cut.nu_mass
            );
            let mut out = ResultFile::empty("infeasible");
            out.cut = Some(CutOut::from(&cut));
            Ok((out, 3))
        }
    }
}

fn cmd_norms(common: &CommonOpts) -> CmdResult {
    let file = load(common)?;
    let c = file.cost_matrix().map_err(CmdError::parse)?;

    let u_norm = match &file.u {
        Some(rows) => {
            let u = matrix_from_rows(rows, "u").map_err(CmdError::parse)?;
            Some(ExtNum(cost_norm(&u, &c)?))
        }
        None => None,
    };
    let ell_norm = match &file.ell {
        Some(rows) => {
            let ell = matrix_from_rows(rows, "ell").map_err(CmdError::parse)?;
            Some(ExtNum::from(dual_cost_norm(&ell, &c)?))
        }
        None => None,
    };
    // explicit signed marginals take precedence; (mu, nu) is the default pair
    let (k1, k2) = match (&file.kappa1, &file.kappa2) {
        (Some(a), Some(b)) => (Array1::from(a.clone()), Array1::from(b.clone())),
        (None, None) => (Array1::from(file.mu.clone()), Array1::from(file.nu.clone())),
        _ => return Err(CmdError::parse("kappa1 and kappa2 must be given together")),
    };
    let marginal_norm = Some(ExtNum::from(marginal_dual_norm(&k1, &k2, &c)?));

    let mut out = ResultFile::empty("ok");
    out.norms = Some(NormsOut {
        cost_norm: u_norm,
        dual_cost_norm: ell_norm,
        marginal_dual_norm: marginal_norm,
    });
    eprintln!("norms computed");
    Ok((out, 0))
}
