//! Reports written by every command.
//!
//! ```text
//! krein-report 1
//! command kvn
//! tolerance rank_rel 1.0000000000000000e-10
//! tolerance psd_slack 1.0000000000000001e-9
//! tolerance residual 1.0000000000000000e-8
//! verdict extension_exists true
//! scalar gamma 2.0000000000000000e0
//! matrix T_N 2 2
//! 1.0000000000000000e0 1.0000000000000000e0
//! 1.0000000000000000e0 1.0000000000000000e0
//! check kvn_extends pass 0.0000000000000000e0
//! ```
//!
//! Lines come in the order shown, and in insertion order within each kind.

use std::fmt::Write as _;

use krein_core::{MatrixF64, ToleranceProfileF64};

use crate::instance::{fmt_float, write_matrix};

pub const REPORT_HEADER: &str = "krein-report 1";

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    /// Size of the disagreement, always finite.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub tolerances: ToleranceProfileF64,
    pub verdicts: Vec<(String, bool)>,
    pub scalars: Vec<(String, f64)>,
    pub matrices: Vec<(String, MatrixF64)>,
    pub checks: Vec<OracleCheck>,
    /// Set when the question has answer "no" (no extension, no solution).
    pub infeasible: bool,
}

impl Report {
    pub fn new(command: &str, tolerances: ToleranceProfileF64) -> Self {
        Self {
            command: command.to_string(),
            tolerances,
            verdicts: Vec::new(),
            scalars: Vec::new(),
            matrices: Vec::new(),
            checks: Vec::new(),
            infeasible: false,
        }
    }

    pub fn verdict(&mut self, name: &str, value: bool) {
        self.verdicts.push((name.to_string(), value));
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.push((name.to_string(), value));
    }

    pub fn matrix(&mut self, name: &str, value: MatrixF64) {
        self.matrices.push((name.to_string(), value));
    }

    pub fn check(&mut self, name: &str, passed: bool, discrepancy: f64) {
        // a NaN discrepancy would be unprintable and means the check did not hold
        let (passed, discrepancy) = if discrepancy.is_finite() {
            (passed, discrepancy)
        } else {
            (false, f64::MAX)
        };
        self.checks.push(OracleCheck {
            name: name.to_string(),
            passed,
            discrepancy,
        });
    }

    pub fn get_verdict(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn get_scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn get_matrix(&self, name: &str) -> Option<&MatrixF64> {
        self.matrices.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn get_check(&self, name: &str) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when everything holds, 2 for an infeasible instance, 3 if any oracle
    /// check failed.
    pub fn exit_code(&self) -> i32 {
        if !self.all_checks_pass() {
            3
        } else if self.infeasible {
            2
        } else {
            0
        }
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{REPORT_HEADER}").unwrap();
        writeln!(out, "command {}", self.command).unwrap();
        let t = &self.tolerances;
        for (name, v) in [
            ("rank_rel", t.rank_rel),
            ("psd_slack", t.psd_slack),
            ("residual", t.residual),
        ] {
            writeln!(out, "tolerance {name} {}", fmt_float(v)).unwrap();
        }
        for (name, v) in &self.verdicts {
            writeln!(out, "verdict {name} {v}").unwrap();
        }
        for (name, v) in &self.scalars {
            writeln!(out, "scalar {name} {}", fmt_float(*v)).unwrap();
        }
        for (name, m) in &self.matrices {
            write_matrix(&mut out, &format!("matrix {name}"), m);
        }
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "fail" };
            writeln!(out, "check {} {status} {}", c.name, fmt_float(c.discrepancy)).unwrap();
        }
        out
    }
}
