//! Command dispatch: one instance in, one report out.

use std::fmt;
use std::str::FromStr;

use krein_core::contractive::{extremal_extensions, interval_member, uniqueness};
use krein_core::kvn::kvn_extension;
use krein_core::numerics::{is_psd, loewner_leq, spectral_norm, Subspace};
use krein_core::partial_op::{dstar, has_bounded_psd_extension, theorem1_report};
use krein_core::psd_equation::{check_solvable, solve_min};
use krein_core::shorted::{kvn_monotone_check, short_to};
use krein_core::{ContractivePartialF64, MatrixF64, PartialOperatorF64, ToleranceProfileF64};

use crate::error::{CliError, Result};
use crate::instance::{Instance, ToleranceOverrides};
use crate::report::Report;
use crate::verify::{self, stream};

pub const DEFAULT_SAMPLES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Kvn,
    Short,
    Interval,
    Unique,
    Solve,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Check,
        Command::Kvn,
        Command::Short,
        Command::Interval,
        Command::Unique,
        Command::Solve,
        Command::VerifyAll,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Kvn => "kvn",
            Command::Short => "short",
            Command::Interval => "interval",
            Command::Unique => "unique",
            Command::Solve => "solve",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub tol: ToleranceProfileF64,
    pub samples: usize,
    pub seed: u64,
}

/// Tolerances from, in increasing precedence: built-in defaults, the profile
/// file named by the environment, the instance, the command line.
pub fn resolve_tolerances(
    profile: Option<&ToleranceOverrides>,
    instance: &Instance,
    flags: &ToleranceOverrides,
) -> Result<ToleranceProfileF64> {
    let mut tol = ToleranceProfileF64::default();
    if let Some(p) = profile {
        tol = p.apply(tol);
    }
    tol = flags.apply(instance.tolerances.apply(tol));
    tol.validate().map_err(CliError::core("tolerances"))?;
    Ok(tol)
}

pub fn run_command(cmd: Command, inst: &Instance, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new(cmd.name(), opts.tol);
    match cmd {
        Command::Check => check(inst, opts, &mut report)?,
        Command::Kvn => kvn(inst, opts, &mut report)?,
        Command::Short => short(inst, opts, &mut report)?,
        Command::Interval => interval(inst, opts, &mut report)?,
        Command::Unique => unique(inst, opts, &mut report)?,
        Command::Solve => solve(inst, opts, &mut report)?,
        Command::VerifyAll => verify_all(inst, opts, &mut report)?,
    }
    Ok(report)
}

fn positive(inst: &Instance, tol: ToleranceProfileF64) -> Result<PartialOperatorF64> {
    PartialOperatorF64::new(inst.domain()?, inst.image()?, tol).map_err(CliError::core("positive partial operator"))
}

fn contraction(inst: &Instance, tol: ToleranceProfileF64) -> Result<ContractivePartialF64> {
    ContractivePartialF64::new(inst.domain()?, inst.image()?, tol).map_err(CliError::core("contraction"))
}

fn domain_subspace(inst: &Instance, tol: &ToleranceProfileF64) -> Result<Subspace<f64>> {
    Ok(Subspace::span(inst.domain()?, tol))
}

fn check(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let p = positive(inst, report.tolerances)?;
    let t = theorem1_report(&p);
    let (exists, gamma) = has_bounded_psd_extension(&p);
    report.verdict("extension_exists", exists);
    report.verdict("cond_dstar_dense", t.cond_dstar_dense);
    report.verdict("cond_perp_ran", t.cond_perp_ran);
    report.verdict("cond_pos_closable", t.cond_pos_closable);
    report.verdict("all_agree", t.all_agree);
    report.scalar("dstar_dim", dstar(&p).dim() as f64);
    if let Some(g) = gamma {
        report.scalar("gamma", g);
    }
    let (ok, d) = verify::theorem1_equivalence(&p);
    report.check("theorem1_equivalence", ok, d);
    if !exists {
        let (outcome, f) = verify::obstruction_certificate(&p);
        if let Some(f) = f {
            report.matrix("certificate", MatrixF64::from_column_slice(f.len(), 1, f.as_slice()));
        }
        report.check("obstruction_certificate", outcome.0, outcome.1);
        report.infeasible = true;
    }
    Ok(())
}

fn kvn(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let p = positive(inst, report.tolerances)?;
    let (exists, gamma) = has_bounded_psd_extension(&p);
    report.verdict("extension_exists", exists);
    let Some(gamma) = gamma else {
        report.infeasible = true;
        return Ok(());
    };
    let tn = kvn_extension(&p).map_err(CliError::core("kvn"))?;
    report.scalar("gamma", gamma);
    report.scalar("norm_T_N", spectral_norm(&tn));
    let (ok, d) = verify::kvn_extends(&p, &tn);
    report.check("kvn_extends", ok, d);
    let (ok, d) = verify::kvn_norm_is_gamma(&tn, gamma, &report.tolerances);
    report.check("kvn_norm_gamma", ok, d);
    report.matrix("T_N", tn);
    Ok(())
}

fn short(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let tol = report.tolerances;
    let s = inst.full_operator()?;
    let d = domain_subspace(inst, &tol)?;
    let r = short_to(s, &d, &tol).map_err(CliError::core("short"))?;
    report.scalar("norm_shorted", spectral_norm(&r.shorted));
    let (ok, disc) = verify::shorted_schur(s, &d, &tol);
    report.check("shorted_schur", ok, disc);
    let (ok, disc) = verify::shorted_bounds(s, &d, &tol);
    report.check("shorted_bounds", ok, disc);
    let ((ok, disc), dim) = verify::root_range_identity(s, &d, &tol);
    if let Some(dim) = dim {
        report.scalar("root_range_dim", dim as f64);
    }
    report.check("root_range_identity", ok, disc);
    report.matrix("shorted", r.shorted);
    report.matrix("kvn_part", r.kvn_part);
    Ok(())
}

fn interval(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let c = contraction(inst, report.tolerances)?;
    let iv = extremal_extensions(&c);
    report.verdict("norm_attained", c.norm_attained());
    if let Some(s) = &inst.full_operator {
        let member = interval_member(s, &c).map_err(CliError::core("interval membership"))?;
        report.verdict("member", member);
    }
    report.scalar("norm_on_domain", c.operator_norm_on_d());
    report.scalar("width", spectral_norm(&iv.width()));
    let (ok, d) = verify::interval_endpoints(&c);
    report.check("interval_endpoints", ok, d);
    report.matrix("s_m", iv.s_m);
    report.matrix("s_M", iv.s_big_m);
    Ok(())
}

fn unique(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let c = contraction(inst, report.tolerances)?;
    let r = uniqueness(&c).map_err(CliError::core("uniqueness"))?;
    report.verdict("unique", r.unique);
    report.verdict("interval_collapse", r.interval_collapse);
    report.verdict("range_route", r.range_route);
    if let Some(v) = r.sup_route {
        report.verdict("sup_route", v);
    }
    report.verdict("norm_attained", r.norm_attained);
    report.scalar("gap", r.gap);
    report.scalar("intersection_dim", r.intersection_dim as f64);
    if let Some(d) = r.finite_sup_dim {
        report.scalar("finite_sup_dim", d as f64);
    }
    Ok(())
}

fn solve(inst: &Instance, _opts: &RunOptions, report: &mut Report) -> Result<()> {
    let tol = report.tolerances;
    let eq = inst.equation()?;
    let s = check_solvable(&eq.a, &eq.b, &tol).map_err(CliError::core("solve"))?;
    report.verdict("solvable", s.solvable);
    report.verdict("well_defined", s.well_defined);
    report.verdict("symmetric_form", s.symmetric_form);
    report.verdict("positive_form", s.positive_form);
    report.verdict("bounded_condition", s.bounded_condition);
    if s.solvable {
        let sn = solve_min(&eq.a, &eq.b, &tol).map_err(CliError::core("solve"))?;
        let (ok, d) = verify::equation_solution(&sn, &eq.a, &eq.b, &tol);
        report.check("equation_residual", ok, d);
        report.matrix("S_N", sn);
    } else {
        report.infeasible = true;
        if s.certificate.is_some() {
            let (ok, d) = verify::equation_certificate(&s, &eq.a, &eq.b, &tol);
            report.check("equation_certificate", ok, d);
        }
        if let Some(x) = s.certificate {
            report.matrix("certificate", MatrixF64::from_column_slice(x.len(), 1, x.as_slice()));
        }
    }
    Ok(())
}

/// Every check that applies to the sections present. Infeasibility is a finding
/// here, not a failure; only oracle disagreements fail.
fn verify_all(inst: &Instance, opts: &RunOptions, report: &mut Report) -> Result<()> {
    let tol = report.tolerances;
    let n = opts.samples;
    let seed = opts.seed;
    let mut ran_any = false;

    if inst.domain.is_some() {
        match positive(inst, tol) {
            Ok(p) => {
                ran_any = true;
                report.verdict("positive_valid", true);
                verify_positive(&p, opts, report);
            }
            Err(_) => report.verdict("positive_valid", false),
        }
        match contraction(inst, tol) {
            Ok(c) => {
                ran_any = true;
                report.verdict("contraction_valid", true);
                let r = verify::interval_endpoints(&c);
                report.check("interval_endpoints", r.0, r.1);
                let r = verify::interval_sampling(&c, n, &mut stream(seed, 20));
                report.check("interval_sampling", r.0, r.1);
                let r = verify::interval_converse(&c, n, &mut stream(seed, 21));
                report.check("interval_converse", r.0, r.1);
                let r = verify::uniqueness_routes(&c);
                report.check("uniqueness_routes", r.0, r.1);
                if let Ok(u) = uniqueness(&c) {
                    report.verdict("unique", u.unique);
                }
            }
            Err(_) => report.verdict("contraction_valid", false),
        }
    }

    if let Some(s) = &inst.full_operator {
        let psd = is_psd(s, &tol) && spectral_norm(&(s - s.transpose())) <= tol.residual * spectral_norm(s).max(1.0);
        report.verdict("full_operator_psd", psd);
        if psd && inst.domain.is_some() {
            ran_any = true;
            let d = domain_subspace(inst, &tol)?;
            let r = verify::shorted_schur(s, &d, &tol);
            report.check("shorted_schur", r.0, r.1);
            let r = verify::shorted_bounds(s, &d, &tol);
            report.check("shorted_bounds", r.0, r.1);
            let r = verify::shorted_variational(s, &d, &tol, n, 20, &mut stream(seed, 30));
            report.check("shorted_variational", r.0, r.1);
            let (r, _) = verify::root_range_identity(s, &d, &tol);
            report.check("root_range_identity", r.0, r.1);
            verify_monotone(s, inst, &tol, report)?;
        }
    }

    if let Some(eq) = &inst.equation {
        ran_any = true;
        let s = check_solvable(&eq.a, &eq.b, &tol).map_err(CliError::core("solve"))?;
        report.verdict("solvable", s.solvable);
        report.infeasible |= !s.solvable;
        if s.solvable {
            let sn = solve_min(&eq.a, &eq.b, &tol).map_err(CliError::core("solve"))?;
            let r = verify::equation_solution(&sn, &eq.a, &eq.b, &tol);
            report.check("equation_residual", r.0, r.1);
            let r = verify::equation_minimal(&sn, &eq.a, &eq.b, &tol, n, &mut stream(seed, 40));
            report.check("equation_minimal", r.0, r.1);
        } else if s.certificate.is_some() {
            let r = verify::equation_certificate(&s, &eq.a, &eq.b, &tol);
            report.check("equation_certificate", r.0, r.1);
        }
    }

    if !ran_any {
        return Err(CliError::MissingSection("domain"));
    }
    Ok(())
}

fn verify_positive(p: &PartialOperatorF64, opts: &RunOptions, report: &mut Report) {
    let (n, seed) = (opts.samples, opts.seed);
    let r = verify::theorem1_equivalence(p);
    report.check("theorem1_equivalence", r.0, r.1);
    let (exists, gamma) = has_bounded_psd_extension(p);
    report.verdict("extension_exists", exists);
    let Some(gamma) = gamma else {
        report.infeasible = true;
        let (r, _) = verify::obstruction_certificate(p);
        report.check("obstruction_certificate", r.0, r.1);
        return;
    };
    let Ok(tn) = kvn_extension(p) else {
        report.check("kvn_extends", false, f64::MAX);
        return;
    };
    report.scalar("gamma", gamma);
    let r = verify::kvn_extends(p, &tn);
    report.check("kvn_extends", r.0, r.1);
    let r = verify::kvn_norm_is_gamma(&tn, gamma, p.tol());
    report.check("kvn_norm_gamma", r.0, r.1);
    let r = verify::gamma_minimal(p, gamma);
    report.check("gamma_minimal", r.0, r.1);
    let r = verify::kvn_minimality(p, &tn, n, &mut stream(seed, 10));
    report.check("kvn_minimality", r.0, r.1);
    let r = verify::kvn_schur_route(p, &tn, &mut stream(seed, 11));
    report.check("kvn_schur_route", r.0, r.1);
    let r = verify::variational_identity(p, &tn, n, 4, &mut stream(seed, 12));
    report.check("variational_identity", r.0, r.1);
    let r = verify::characterization(p, &tn, 10 * n, &mut stream(seed, 13));
    report.check("characterization", r.0, r.1);
    let r = verify::range_criterion(p, &tn, n, &mut stream(seed, 14));
    report.check("range_criterion", r.0, r.1);
}

/// Compare the Krein–von Neumann extension of `S|_D` with that of the instance
/// operator: the monotonicity report must agree with the direct order test.
fn verify_monotone(s: &MatrixF64, inst: &Instance, tol: &ToleranceProfileF64, report: &mut Report) -> Result<()> {
    let Ok(pt) = positive(inst, *tol) else {
        return Ok(());
    };
    let basis = pt.dom_basis().clone();
    let Ok(ps) = PartialOperatorF64::new(&basis, &(s * &basis), *tol) else {
        return Ok(());
    };
    let Ok(m) = kvn_monotone_check(&ps, &pt) else {
        return Ok(());
    };
    let (Ok(sn), Ok(tn)) = (kvn_extension(&ps), kvn_extension(&pt)) else {
        return Ok(());
    };
    let ordered = loewner_leq(&sn, &tn, tol);
    report.verdict("restriction_form_dominated", m.form_dominance);
    report.verdict("restriction_range_included", m.range_inclusion);
    report.verdict("restriction_kvn_below", ordered);
    report.check(
        "monotone_criterion",
        m.holds() == ordered,
        (m.holds() != ordered) as u8 as f64,
    );
    Ok(())
}
