//! Line-oriented instance files.
//!
//! ```text
//! krein-instance 1
//! # comments run to the end of the line
//! dim 2
//! domain 1 2          # k vectors of length n, one per line
//! 1.0000000000000000e0 0.0000000000000000e0
//! image 1 2
//! 1.0000000000000000e0 1.0000000000000000e0
//! full_operator 2 2   # row-major
//! ...
//! equation_a 2 1
//! ...
//! equation_b 2 1
//! ...
//! tol_rank_rel 1.0000000000000000e-10
//! tol_psd_slack 1.0000000000000001e-9
//! tol_residual 1.0000000000000000e-8
//! seed 7
//! ```
//!
//! Every section is optional except `dim`, may appear once, and must agree with
//! `dim`. Floats are written with 17 significant digits so they round-trip.

use std::fmt::Write as _;

use krein_core::{MatrixF64, ToleranceProfileF64};
use nalgebra::DMatrix;

use crate::error::{CliError, Result};

pub const INSTANCE_HEADER: &str = "krein-instance 1";

/// Tolerance entries present in a file; unset fields fall through to the next
/// source.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ToleranceOverrides {
    pub rank_rel: Option<f64>,
    pub psd_slack: Option<f64>,
    pub residual: Option<f64>,
}

impl ToleranceOverrides {
    pub fn is_empty(&self) -> bool {
        self.rank_rel.is_none() && self.psd_slack.is_none() && self.residual.is_none()
    }

    pub fn apply(&self, base: ToleranceProfileF64) -> ToleranceProfileF64 {
        ToleranceProfileF64 {
            rank_rel: self.rank_rel.unwrap_or(base.rank_rel),
            psd_slack: self.psd_slack.unwrap_or(base.psd_slack),
            residual: self.residual.unwrap_or(base.residual),
        }
    }

    /// Parse a file holding only `tol_*` lines (the profile named by the
    /// environment).
    pub fn parse_profile(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            if !out.take(&words, i + 1)? {
                return Err(CliError::parse(i + 1, format!("unknown key `{}`", words[0])));
            }
        }
        Ok(out)
    }

    /// Consume a `tol_*` line; `false` if the key is not a tolerance.
    fn take(&mut self, words: &[&str], line: usize) -> Result<bool> {
        let slot = match words[0] {
            "tol_rank_rel" => &mut self.rank_rel,
            "tol_psd_slack" => &mut self.psd_slack,
            "tol_residual" => &mut self.residual,
            _ => return Ok(false),
        };
        if slot.is_some() {
            return Err(CliError::parse(line, format!("duplicate key `{}`", words[0])));
        }
        expect_args(words, 1, line)?;
        *slot = Some(parse_float(words[1], line)?);
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub a: MatrixF64,
    pub b: MatrixF64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub dim: usize,
    /// Domain vectors as columns (`n × k`).
    pub domain: Option<MatrixF64>,
    /// Images of the domain vectors as columns (`n × k`).
    pub image: Option<MatrixF64>,
    pub full_operator: Option<MatrixF64>,
    pub equation: Option<Equation>,
    pub tolerances: ToleranceOverrides,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            domain: None,
            image: None,
            full_operator: None,
            equation: None,
            tolerances: ToleranceOverrides::default(),
            seed: None,
        }
    }

    pub fn domain(&self) -> Result<&MatrixF64> {
        self.domain.as_ref().ok_or(CliError::MissingSection("domain"))
    }

    pub fn image(&self) -> Result<&MatrixF64> {
        self.image.as_ref().ok_or(CliError::MissingSection("image"))
    }

    pub fn full_operator(&self) -> Result<&MatrixF64> {
        self.full_operator
            .as_ref()
            .ok_or(CliError::MissingSection("full_operator"))
    }

    pub fn equation(&self) -> Result<&Equation> {
        self.equation.as_ref().ok_or(CliError::MissingSection("equation_a"))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, strip_comment(l)))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let mut it = lines.into_iter().peekable();
        match it.next() {
            Some((_, h)) if h.split_whitespace().collect::<Vec<_>>().join(" ") == INSTANCE_HEADER => {}
            Some((n, _)) => return Err(CliError::parse(n, format!("expected header `{INSTANCE_HEADER}`"))),
            None => return Err(CliError::parse(0, "empty instance")),
        }

        let mut dim = None;
        let mut domain = None;
        let mut image = None;
        let mut full = None;
        let mut eq_a = None;
        let mut eq_b = None;
        let mut tolerances = ToleranceOverrides::default();
        let mut seed = None;

        while let Some((line, text)) = it.next() {
            let words: Vec<&str> = text.split_whitespace().collect();
            if tolerances.take(&words, line)? {
                continue;
            }
            match words[0] {
                "dim" => {
                    expect_args(&words, 1, line)?;
                    set_once(&mut dim, parse_usize(words[1], line)?, "dim", line)?;
                }
                "seed" => {
                    expect_args(&words, 1, line)?;
                    let s = words[1]
                        .parse::<u64>()
                        .map_err(|_| CliError::parse(line, format!("bad seed `{}`", words[1])))?;
                    set_once(&mut seed, s, "seed", line)?;
                }
                key @ ("domain" | "image" | "full_operator" | "equation_a" | "equation_b") => {
                    expect_args(&words, 2, line)?;
                    let rows = parse_usize(words[1], line)?;
                    let cols = parse_usize(words[2], line)?;
                    let m = read_rows(&mut it, rows, cols, line)?;
                    let slot = match key {
                        "domain" => &mut domain,
                        "image" => &mut image,
                        "full_operator" => &mut full,
                        "equation_a" => &mut eq_a,
                        _ => &mut eq_b,
                    };
                    set_once(slot, (line, m), key, line)?;
                }
                other => return Err(CliError::parse(line, format!("unknown key `{other}`"))),
            }
        }

        let n = dim.ok_or(CliError::MissingSection("dim"))?;
        let mut inst = Instance::new(n);
        inst.tolerances = tolerances;
        inst.seed = seed;

        // vectors are listed as rows; store them as columns
        let as_columns = |entry: Option<(usize, MatrixF64)>, name: &str| -> Result<Option<MatrixF64>> {
            entry
                .map(|(line, m)| {
                    if m.ncols() != n {
                        return Err(CliError::parse(
                            line,
                            format!("{name} vectors have length {}, dim is {n}", m.ncols()),
                        ));
                    }
                    Ok(m.transpose())
                })
                .transpose()
        };
        inst.domain = as_columns(domain, "domain")?;
        inst.image = as_columns(image.clone(), "image")?;
        match (&inst.domain, &inst.image) {
            (Some(d), Some(i)) if d.ncols() != i.ncols() => {
                let line = image.map(|(l, _)| l).unwrap_or(0);
                return Err(CliError::parse(
                    line,
                    format!("{} domain vectors but {} images", d.ncols(), i.ncols()),
                ));
            }
            (Some(_), None) => return Err(CliError::MissingSection("image")),
            (None, Some(_)) => return Err(CliError::MissingSection("domain")),
            _ => {}
        }
        if let Some((line, m)) = full {
            if m.shape() != (n, n) {
                return Err(CliError::parse(line, format!("full_operator must be {n}x{n}")));
            }
            inst.full_operator = Some(m);
        }
        inst.equation = match (eq_a, eq_b) {
            (None, None) => None,
            (Some(_), None) => return Err(CliError::MissingSection("equation_b")),
            (None, Some(_)) => return Err(CliError::MissingSection("equation_a")),
            (Some((la, a)), Some((lb, b))) => {
                if a.nrows() != n {
                    return Err(CliError::parse(la, format!("equation_a must have {n} rows")));
                }
                if b.shape() != a.shape() {
                    return Err(CliError::parse(lb, "equation_b must have the shape of equation_a"));
                }
                Some(Equation { a, b })
            }
        };
        Ok(inst)
    }

    /// Canonical text form; `parse(write())` reproduces the instance exactly.
    pub fn write(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{INSTANCE_HEADER}").unwrap();
        writeln!(out, "dim {}", self.dim).unwrap();
        if let (Some(d), Some(i)) = (&self.domain, &self.image) {
            write_matrix(&mut out, "domain", &d.transpose());
            write_matrix(&mut out, "image", &i.transpose());
        }
        if let Some(s) = &self.full_operator {
            write_matrix(&mut out, "full_operator", s);
        }
        if let Some(eq) = &self.equation {
            write_matrix(&mut out, "equation_a", &eq.a);
            write_matrix(&mut out, "equation_b", &eq.b);
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("tol_rank_rel", t.rank_rel),
            ("tol_psd_slack", t.psd_slack),
            ("tol_residual", t.residual),
        ] {
            if let Some(v) = v {
                writeln!(out, "{key} {}", fmt_float(v)).unwrap();
            }
        }
        if let Some(seed) = self.seed {
            writeln!(out, "seed {seed}").unwrap();
        }
        out
    }
}

/// 17 significant digits, with negative zero folded into zero.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub(crate) fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    writeln!(out, "{name} {} {}", m.nrows(), m.ncols()).unwrap();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

fn expect_args(words: &[&str], n: usize, line: usize) -> Result<()> {
    if words.len() != n + 1 {
        return Err(CliError::parse(line, format!("`{}` takes {n} argument(s)", words[0])));
    }
    Ok(())
}

fn set_once<T>(slot: &mut Option<T>, value: T, key: &str, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(CliError::parse(line, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_usize(word: &str, line: usize) -> Result<usize> {
    word.parse()
        .map_err(|_| CliError::parse(line, format!("expected a non-negative integer, got `{word}`")))
}

fn parse_float(word: &str, line: usize) -> Result<f64> {
    let x: f64 = word
        .parse()
        .map_err(|_| CliError::parse(line, format!("expected a number, got `{word}`")))?;
    if !x.is_finite() {
        return Err(CliError::parse(line, format!("non-finite value `{word}`")));
    }
    Ok(x)
}

fn read_rows<'a, I>(it: &mut I, rows: usize, cols: usize, header: usize) -> Result<MatrixF64>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (line, text) = it
            .next()
            .ok_or_else(|| CliError::parse(header, format!("expected {rows} rows, found {r}")))?;
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != cols {
            return Err(CliError::parse(
                line,
                format!("expected {cols} entries, found {}", words.len()),
            ));
        }
        for (c, w) in words.iter().enumerate() {
            m[(r, c)] = parse_float(w, line)?;
        }
    }
    Ok(m)
}
