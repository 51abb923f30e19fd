//! Seeded instance generation.

use std::fmt;
use std::str::FromStr;

use krein_core::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::instance::{Equation, Instance};

pub const MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Positive partial operator.
    Positive,
    /// Symmetric contraction on a subspace.
    Contraction,
    /// PSD matrix together with its restriction to a random subspace.
    PsdFull,
    /// Pair `(A, B)` for `S·A = B`.
    Equation,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Positive, Kind::Contraction, Kind::PsdFull, Kind::Equation];
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "positive" => Ok(Kind::Positive),
            "contraction" => Ok(Kind::Contraction),
            "psd_full" => Ok(Kind::PsdFull),
            "equation" => Ok(Kind::Equation),
            _ => Err(format!(
                "unknown kind `{s}` (positive, contraction, psd_full, equation)"
            )),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Positive => "positive",
            Kind::Contraction => "contraction",
            Kind::PsdFull => "psd_full",
            Kind::Equation => "equation",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub kind: Kind,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    /// Plant an obstruction: a non-extendible operator or an unsolvable
    /// equation.
    pub degenerate: bool,
    /// Scale a contraction to norm exactly one.
    pub attain_norm: bool,
}

pub fn gen_instance(p: &GenParams) -> Result<Instance> {
    if p.k < 1 || p.k > p.n || p.n > MAX_DIM {
        return Err(CliError::BadShape(format!(
            "need 1 <= k <= n <= {MAX_DIM}, got n = {}, k = {}",
            p.n, p.k
        )));
    }
    if p.degenerate && !matches!(p.kind, Kind::Positive | Kind::Equation) {
        return Err(CliError::BadShape(format!("kind {} has no degenerate variant", p.kind)));
    }
    if p.degenerate && p.k == p.n {
        return Err(CliError::BadShape("a degenerate instance needs k < n".into()));
    }
    if p.attain_norm && p.kind != Kind::Contraction {
        return Err(CliError::BadShape("--attain-norm applies to contractions only".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut inst = Instance::new(p.n);
    inst.seed = Some(p.seed);
    match p.kind {
        Kind::Positive => {
            let (dom, image) = sampling::positive_instance::<f64, _>(p.n, p.k, p.degenerate, &mut rng);
            inst.domain = Some(dom);
            inst.image = Some(image);
        }
        Kind::Contraction => {
            let (dom, image) = sampling::contraction_instance::<f64, _>(p.n, p.k, p.attain_norm, &mut rng);
            inst.domain = Some(dom);
            inst.image = Some(image);
        }
        Kind::PsdFull => {
            let s = sampling::psd_random_rank::<f64, _>(p.n, &mut rng);
            let dom = sampling::orthonormal::<f64, _>(p.n, p.k, &mut rng);
            inst.image = Some(&s * &dom);
            inst.domain = Some(dom);
            inst.full_operator = Some(s);
        }
        Kind::Equation => {
            let (a, b, _) = sampling::equation_instance::<f64, _>(p.n, p.k, p.degenerate, &mut rng);
            inst.equation = Some(Equation { a, b });
        }
    }
    Ok(inst)
}
