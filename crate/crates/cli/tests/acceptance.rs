//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::process::Command as Process;
use std::time::Instant;

use krein_cli::verify::{self, stream};
use krein_cli::{gen_instance, GenParams, Kind};
use krein_core::contractive::uniqueness;
use krein_core::kvn::kvn_extension;
use krein_core::numerics::{loewner_leq, spectral_norm, Subspace, SymEigen};
use krein_core::psd_equation::{check_solvable, equation_residual, solve_min};
use krein_core::shorted::{kvn_monotone_check, schur_oracle, short_to};
use krein_core::{sampling, ContractivePartialF64, PartialOperatorF64, ToleranceProfileF64};
use nalgebra::dmatrix;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 500;

type Criterion = fn() -> (bool, String);

fn tol() -> ToleranceProfileF64 {
    ToleranceProfileF64::default()
}

struct Tally {
    total: usize,
    passed: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            total: 0,
            passed: 0,
            worst: 0.0,
        }
    }

    fn add(&mut self, (ok, disc): (bool, f64)) {
        self.total += 1;
        self.passed += ok as usize;
        self.worst = self.worst.max(disc);
    }

    fn all(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }

    fn summary(&self) -> String {
        format!(
            "{}/{} pass, worst discrepancy {:.2e}",
            self.passed, self.total, self.worst
        )
    }
}

fn positive(rng: &mut ChaCha8Rng, degenerate: bool) -> PartialOperatorF64 {
    let n = rng.random_range(2..=8);
    let k = if degenerate {
        rng.random_range(1..n)
    } else {
        rng.random_range(0..=n)
    };
    let (dom, image) = sampling::positive_instance::<f64, _>(n, k, degenerate, rng);
    PartialOperatorF64::new(&dom, &image, tol()).unwrap()
}

fn random_subspace(n: usize, rng: &mut ChaCha8Rng) -> Subspace<f64> {
    let k = rng.random_range(0..=n);
    Subspace::from_orthonormal(sampling::orthonormal::<f64, _>(n, k, rng), &tol()).unwrap()
}

fn contraction(rng: &mut ChaCha8Rng, attain: bool) -> ContractivePartialF64 {
    let n = rng.random_range(1..=8);
    let k = rng.random_range(0..=n);
    let (dom, image) = sampling::contraction_instance::<f64, _>(n, k, attain, rng);
    ContractivePartialF64::new(&dom, &image, tol()).unwrap()
}

fn equivalence() -> (bool, String) {
    let mut rng = stream(1, 1);
    let mut t = Tally::new();
    let mut degenerate = 0;
    for i in 0..INSTANCES {
        let planted = i % 10 == 0;
        degenerate += planted as usize;
        let p = positive(&mut rng, planted);
        t.add(verify::theorem1_equivalence(&p));
    }
    (t.all(), format!("{} ({degenerate} planted degenerate)", t.summary()))
}

fn minimality() -> (bool, String) {
    let mut rng = stream(1, 2);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let p = positive(&mut rng, false);
        let tn = kvn_extension(&p).unwrap();
        t.add(verify::kvn_extends(&p, &tn));
        t.add(verify::kvn_minimality(&p, &tn, 50, &mut rng));
    }
    (t.all(), t.summary())
}

fn variational() -> (bool, String) {
    let mut rng = stream(1, 3);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let p = positive(&mut rng, false);
        let tn = kvn_extension(&p).unwrap();
        t.add(verify::variational_identity(&p, &tn, 2, 200, &mut rng));
    }
    (t.all(), t.summary())
}

fn characterization() -> (bool, String) {
    let mut rng = stream(1, 4);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let p = positive(&mut rng, false);
        let tn = kvn_extension(&p).unwrap();
        t.add(verify::characterization(&p, &tn, 500, &mut rng));
    }
    (t.all(), format!("{} (500 candidates each)", t.summary()))
}

fn range_criterion() -> (bool, String) {
    let mut rng = stream(1, 5);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let p = positive(&mut rng, false);
        let tn = kvn_extension(&p).unwrap();
        t.add(verify::range_criterion(&p, &tn, 20, &mut rng));
    }
    (t.all(), t.summary())
}

fn schur() -> (bool, String) {
    let mut rng = stream(1, 6);
    let mut t = Tally::new();
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let p = rng.random_range(0..=n);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = Subspace::coordinate(n, &(0..p).collect::<Vec<_>>());
        let shorted = short_to(&s, &d, &tol()).unwrap().shorted;
        let oracle = schur_oracle(&s, p, &tol()).unwrap();
        let scale = spectral_norm(&s);
        let diff = spectral_norm(&(&shorted - &oracle));
        let rel = if scale > 0.0 { diff / scale } else { diff };
        t.add((diff <= 1e-8 * scale, rel));
    }
    (t.all(), t.summary())
}

fn shorted_infimum() -> (bool, String) {
    let mut rng = stream(1, 7);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let n = rng.random_range(1..=8);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        t.add(verify::shorted_variational(&s, &d, &tol(), 2, 200, &mut rng));
    }
    (t.all(), t.summary())
}

/// The shortening of a PSD extension `S` of `T` to `D` is `S − T_N`, so its root
/// range is compared against `ran S^{1/2} ∩ D^⊥`.
fn root_range() -> (bool, String) {
    let mut rng = stream(1, 8);
    let mut t = Tally::new();
    for _ in 0..INSTANCES {
        let p = positive(&mut rng, false);
        let tn = kvn_extension(&p).unwrap();
        let s = &tn + sampling::psd_on_complement::<f64, _>(&p.domain(), &mut rng);
        t.add(verify::root_range_identity(&s, &p.domain(), &tol()).0);
        let shorted = short_to(&s, &p.domain(), &tol()).unwrap().shorted;
        let d = spectral_norm(&(&s - &tn - shorted)) / spectral_norm(&s).max(1.0);
        t.add((d <= tol().residual, d));
    }
    (t.all(), t.summary())
}

fn interval() -> (bool, String) {
    let mut rng = stream(1, 9);
    let mut t = Tally::new();
    for i in 0..INSTANCES {
        let c = contraction(&mut rng, i % 2 == 0);
        t.add(verify::interval_endpoints(&c));
        t.add(verify::interval_sampling(&c, 50, &mut rng));
        t.add(verify::interval_converse(&c, 50, &mut rng));
    }
    (t.all(), t.summary())
}

fn uniqueness_routes() -> (bool, String) {
    let mut rng = stream(1, 10);
    let mut t = Tally::new();
    let (mut unique, mut not_unique) = (0, 0);
    for _ in 0..INSTANCES {
        let c = contraction(&mut rng, true);
        match uniqueness(&c) {
            Ok(r) => {
                let three = r.sup_route.is_some() || !r.norm_attained;
                t.add((three, 0.0));
                unique += r.unique as usize;
                not_unique += !r.unique as usize;
            }
            Err(_) => t.add((false, 1.0)),
        }
    }
    let e1 = dmatrix![1.0; 0.0];
    let flip = ContractivePartialF64::new(&e1, &dmatrix![0.0; 1.0], tol()).unwrap();
    let ident = ContractivePartialF64::new(&e1, &e1, tol()).unwrap();
    let pinned = matches!(uniqueness(&flip), Ok(r) if r.unique && r.range_route && r.sup_route == Some(true))
        && matches!(uniqueness(&ident), Ok(r) if !r.unique && !r.range_route && r.sup_route == Some(false));
    let ok = t.all() && pinned && unique > 0 && not_unique > 0;
    (
        ok,
        format!("{} ({unique} unique, {not_unique} not), pinned {pinned}", t.summary()),
    )
}

fn counterexample() -> (bool, String) {
    let e1 = dmatrix![1.0; 0.0];
    let ps = PartialOperatorF64::new(&e1, &e1, tol()).unwrap();
    let pt = PartialOperatorF64::new(&e1, &dmatrix![1.0; 1.0], tol()).unwrap();
    let report = kvn_monotone_check(&ps, &pt).unwrap();
    let sn = kvn_extension(&ps).unwrap();
    let tn = kvn_extension(&pt).unwrap();
    let min = SymEigen::new(&(&tn - &sn)).min();
    let ok = report.form_dominance && !report.holds() && !loewner_leq(&sn, &tn, &tol()) && min < -0.6;
    (
        ok,
        format!(
            "form dominance {}, ordered {}, min eigenvalue {min:.4}",
            report.form_dominance,
            loewner_leq(&sn, &tn, &tol())
        ),
    )
}

fn equation() -> (bool, String) {
    let mut rng = stream(1, 12);
    let mut t = Tally::new();
    let mut infeasible = 0;
    for i in 0..INSTANCES {
        let n = rng.random_range(2..=8);
        let degenerate = i % 2 == 1;
        let m = if degenerate {
            rng.random_range(1..n)
        } else {
            rng.random_range(1..=n)
        };
        let (a, b, s0) = sampling::equation_instance::<f64, _>(n, m, degenerate, &mut rng);
        match s0 {
            Some(s0) => {
                let Ok(s) = solve_min(&a, &b, &tol()) else {
                    t.add((false, f64::MAX));
                    continue;
                };
                let scale = spectral_norm(&a).max(1.0);
                let r = equation_residual(&s, &a, &b) / scale;
                t.add((r <= 1e-8 && loewner_leq(&s, &s0, &tol()), r));
            }
            None => {
                infeasible += 1;
                let report = check_solvable(&a, &b, &tol()).unwrap();
                let cert = verify::equation_certificate(&report, &a, &b, &tol());
                t.add((!report.solvable && cert.0, cert.1));
            }
        }
    }
    (t.all(), format!("{} ({infeasible} infeasible)", t.summary()))
}

fn determinism() -> (bool, String) {
    let exe = env!("CARGO_BIN_EXE_krein");
    let dir = std::env::temp_dir().join(format!("krein-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut runs = 0;
    let mut same = true;
    for (i, kind) in Kind::ALL.iter().enumerate() {
        for seed in 0..3u64 {
            let inst = gen_instance(&GenParams {
                kind: *kind,
                n: 6,
                k: 3,
                seed,
                degenerate: false,
                attain_norm: *kind == Kind::Contraction && seed % 2 == 0,
            })
            .unwrap();
            let path = dir.join(format!("{i}-{seed}.txt"));
            std::fs::write(&path, inst.write()).unwrap();
            let run = || {
                Process::new(exe)
                    .args(["verify-all", path.to_str().unwrap(), "--seed", "11"])
                    .output()
                    .unwrap()
            };
            let (a, b) = (run(), run());
            same &= a.status.code() == Some(0) && a.status == b.status && a.stdout == b.stdout && !a.stdout.is_empty();
            runs += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    (same, format!("{runs} instances, reports byte-identical: {same}"))
}

fn main() {
    let criteria: [(&str, Criterion); 13] = [
        ("extendibility conditions agree", equivalence),
        ("minimal extension extends and is minimal", minimality),
        ("closed-form quadratic form", variational),
        ("order characterization of extensions", characterization),
        ("square-root range criterion", range_criterion),
        ("shortening equals Schur complement", schur),
        ("shorted quadratic form infimum", shorted_infimum),
        ("shorted root range identity", root_range),
        ("contractive extension interval", interval),
        ("uniqueness routes agree", uniqueness_routes),
        ("form dominance does not order extensions", counterexample),
        ("PSD equation solutions and certificates", equation),
        ("verify-all determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = run();
        failed += !ok as usize;
        println!(
            "{} criterion {:>2}: {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria pass in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
