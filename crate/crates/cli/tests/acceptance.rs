//! End-to-end acceptance checks. One line per criterion; exits non-zero if
//! any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cvft_core::cluster::{build_lattice, min_inseparability_squeezing, nullifier_variances, LatticeSpec};
use cvft_core::ft::{baseline, optimize_aspect, rep_failure_z, rep_success_z, threshold_db, RepetitionSpec};
use cvft_core::gates::squeezing_budget;
use cvft_core::gkp::{gkp_success, noise_variances, pauli_probs, Convention, GkpLattice, NoiseKind, NoiseModel, QuadratureNoise};
use cvft_core::mc::{estimate_pe, SamplingMode, TrialConfig};
use cvft_core::squeezing::r_from_db;

const MODELS: [NoiseKind; 2] = [NoiseKind::GateNoise, NoiseKind::ResourceOnly];
const CONVENTIONS: [Convention; 2] = [Convention::HalfVacuum, Convention::Literal];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Check = fn() -> Result<Outcome, String>;

fn core<T>(r: cvft_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn model(kind: NoiseKind, db: f64) -> Result<NoiseModel, String> {
    core(NoiseModel::from_db(kind, db, Convention::HalfVacuum))
}

fn vlf_threshold() -> Result<Outcome, String> {
    let db = core(min_inseparability_squeezing())?;
    Ok(Outcome::new((db - 4.52).abs() <= 0.05, format!("{db:.4} dB (want 4.52 ± 0.05)")))
}

fn nullifier_variance() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut bins = 0;
    for db in [2.0, 5.0, 10.0, 15.0, 20.0] {
        let spec = core(LatticeSpec::from_db(db, 10, 24, false))?;
        let state = core(build_lattice(&spec))?;
        let want = (-2.0 * r_from_db(db)).exp() / 2.0;
        for k in spec.interior_bins() {
            let (vx, vp) = core(nullifier_variances(&state, &spec, k))?;
            worst = worst.max((vx - want).abs()).max((vp - want).abs());
            bins += 1;
        }
    }
    Ok(Outcome::new(bins > 0 && worst <= 1e-9, format!("{bins} bins, max |Var − e^(−2r)/2| = {worst:.2e} (want ≤ 1e-9)")))
}

fn squeezing_budget_at_ten() -> Result<Outcome, String> {
    let b = core(squeezing_budget(r_from_db(10.0)))?;
    let residual_ok = |v: f64| (-0.3..=0.2).contains(&v);
    Ok(Outcome::new(
        (b.cluster_db - 7.03).abs() <= 0.05 && residual_ok(b.residual_x_db) && residual_ok(b.residual_p_db),
        format!(
            "cluster {:.3} dB (want 7.03 ± 0.05), residual x {:+.3} dB, p {:+.3} dB (want [−0.3, +0.2])",
            b.cluster_db, b.residual_x_db, b.residual_p_db
        ),
    ))
}

fn gkp_anchor() -> Result<Outcome, String> {
    let noise = core(noise_variances(&model(NoiseKind::GateNoise, 15.0)?))?;
    let fail = 1.0 - gkp_success(GkpLattice::square(), noise);
    Ok(Outcome::new((fail - 0.082).abs() <= 0.008, format!("1 − p_succ = {fail:.6} (want 0.082 ± 0.008)")))
}

fn thresholds() -> Result<Outcome, String> {
    let target = |kind| match kind {
        NoiseKind::GateNoise => 12.3,
        NoiseKind::ResourceOnly => 9.4,
    };
    let mut table = Vec::new();
    for kind in MODELS {
        for conv in CONVENTIONS {
            let t = core(threshold_db(kind, conv))?;
            table.push((kind, conv, t.db, (t.db - target(kind)).abs() <= 0.5));
        }
    }
    let default_ok = table.iter().filter(|t| t.1 == Convention::HalfVacuum).all(|t| t.3);
    let any_ok = |kind| table.iter().any(|t| t.0 == kind && t.3);
    let pass = MODELS.iter().all(|&k| any_ok(k));

    let mut detail: Vec<String> = table
        .iter()
        .filter(|t| t.1 == Convention::HalfVacuum)
        .map(|t| format!("{} {:.2} dB (want {} ± 0.5)", t.0.name(), t.2, target(t.0)))
        .collect();
    if !default_ok {
        detail.push("outside tolerance under half-vacuum; convention sensitivity:".into());
        detail.push(format!("{:>16} {:>12} {:>12} {:>8}", "model", "convention", "threshold_db", "in_tol"));
        for (kind, conv, db, ok) in &table {
            detail.push(format!("{:>16} {:>12} {:>12.2} {:>8}", kind.name(), conv.name(), db, ok));
        }
    }
    Ok(Outcome::new(pass, detail.join("\n      ")))
}

fn region_structure() -> Result<Outcome, String> {
    let spec = |n| core(RepetitionSpec::new(n));
    let grid: Vec<f64> = (0..=36).map(|i| 2.0 + 0.5 * i as f64).collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for kind in MODELS {
        let mut repetition_hurts = None;
        let mut ordered_after = None;
        let mut gain = Vec::new();
        for &db in &grid {
            let m = model(kind, db)?;
            let p1 = core(baseline(&m))?.pe;
            let p3 = core(optimize_aspect(spec(3)?, &m))?.point.pe;
            let p101 = core(optimize_aspect(spec(101)?, &m))?.point.pe;
            let fail1 = 1.0 - gkp_success(GkpLattice::square(), core(noise_variances(&m))?);
            if p3 > p1 && repetition_hurts.is_none() {
                repetition_hurts = Some(db);
            }
            if p101 < p3 && p3 < p1 && repetition_hurts.is_some_and(|h| db > h) && ordered_after.is_none() {
                ordered_after = Some(db);
            }
            if db >= 14.0 {
                gain.push((db, p101, fail1));
            }
        }
        let worst = gain.iter().max_by(|a, b| (a.1 / a.2).total_cmp(&(b.1 / b.2))).copied().unwrap();
        let two_orders = gain.iter().all(|g| g.1 <= 1e-2 * g.2);
        let ok = repetition_hurts.is_some() && ordered_after.is_some() && two_orders;
        pass &= ok;
        let fmt = |v: Option<f64>| v.map_or("none".to_string(), |d| format!("{d} dB"));
        lines.push(format!(
            "{}: Pe(3)>Pe(1) from {}, Pe(101)<Pe(3)<Pe(1) from {}; at ≥14 dB worst Pe(101,R*)/[1−p_succ] = {:.3e} at {} dB ({:.4e} / {:.4e}, want ≤ 1e-2) [{}]",
            kind.name(),
            fmt(repetition_hurts),
            fmt(ordered_after),
            worst.1 / worst.2,
            worst.0,
            worst.1,
            worst.2,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Ok(Outcome::new(pass, lines.join("\n      ")))
}

fn oracle_agreement() -> Result<Outcome, String> {
    let mut worst = (0.0f64, String::new());
    let mut seed = 2024;
    for kind in MODELS {
        for db in [10.0, 13.0, 16.0] {
            let m = model(kind, db)?;
            let noise = core(noise_variances(&m))?;
            for n in [1, 3, 11] {
                let aspect = if n == 1 { 1.0 } else { core(optimize_aspect(core(RepetitionSpec::new(n))?, &m))?.point.aspect };
                let cfg = TrialConfig {
                    n,
                    aspect,
                    sigma_x: noise.sigma_x,
                    sigma_p: noise.sigma_p,
                    trials: 1_000_000,
                    seed,
                    mode: SamplingMode::IndependentMarginals,
                };
                seed += 1;
                let analytic = core(cfg.analytic_pe())?;
                let dev = core(estimate_pe(&cfg))?.deviation(analytic);
                if dev >= worst.0 {
                    worst = (dev, format!("{} {db} dB n={n} R={aspect:.3}", kind.name()));
                }
            }
        }
    }
    Ok(Outcome::new(worst.0 < 5.0, format!("18 points, worst {:.2} SE at {} (want < 5)", worst.0, worst.1)))
}

fn binomial(n: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn even_count_identity() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for n in (1..=15).step_by(2) {
        let spec = core(RepetitionSpec::new(n))?;
        for i in 0..=10 {
            let pz = 0.05 * i as f64;
            let explicit: f64 = (0..=n)
                .step_by(2)
                .map(|j| binomial(n, j) * pz.powi(j as i32) * (1.0 - pz).powi((n - j) as i32))
                .sum();
            worst = worst.max((rep_success_z(spec, pz) - explicit).abs()).max((1.0 - rep_failure_z(spec, pz) - explicit).abs());
        }
    }
    Ok(Outcome::new(worst <= 1e-12, format!("max deviation {worst:.2e} over 88 points (want ≤ 1e-12)")))
}

fn completeness() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for aspect in [0.5, 1.0, 2.0, 5.0, 20.0] {
        for sigma in [0.05, 0.3, 0.6, 1.5] {
            let (lattice, noise) = (core(GkpLattice::new(aspect))?, core(QuadratureNoise::symmetric(sigma))?);
            let p = pauli_probs(lattice, noise);
            let total = gkp_success(lattice, noise) + p.px + p.pz + p.py;
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok(Outcome::new(worst <= 1e-10, format!("max |Σ − 1| = {worst:.2e} over 20 points (want ≤ 1e-10)")))
}

fn cli(args: &[&str]) -> Result<(Vec<u8>, Duration), String> {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_cvft")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("cvft {args:?}: {}", String::from_utf8_lossy(&o.stderr).trim()));
    }
    Ok((o.stdout, t.elapsed()))
}

fn cli_determinism() -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("mc.csv");
    let path = path.to_str().ok_or("non-UTF-8 temp path")?;
    let mut slowest = Duration::ZERO;
    let mut identical = true;

    let stdout_run = ["mc", "--n", "3", "--squeezing-db", "13", "--trials", "200000", "--seed", "17"];
    let (a, ta) = cli(&stdout_run)?;
    let (b, tb) = cli(&stdout_run)?;
    identical &= !a.is_empty() && a == b;
    slowest = slowest.max(ta).max(tb);

    let file_run = ["mc", "--n", "11", "--model", "resource-only", "--trials", "200000", "--seed", "5", "-o", path];
    let mut files = Vec::new();
    for _ in 0..2 {
        let (_, t) = cli(&file_run)?;
        slowest = slowest.max(t);
        files.push(std::fs::read(path).map_err(|e| e.to_string())?);
    }
    identical &= !files[0].is_empty() && files[0] == files[1];

    let fig = ["fig7c", "--squeezing-db", "10:16:1"];
    let (c, tc) = cli(&fig)?;
    let (d, td) = cli(&fig)?;
    identical &= c == d;
    slowest = slowest.max(tc).max(td);

    Ok(Outcome::new(
        identical && slowest < Duration::from_secs(1),
        format!("stdout, file and figure runs byte-identical: {identical}; slowest invocation {:.3} s (want < 1 s)", slowest.as_secs_f64()),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check, Duration); 10] = [
        ("1 VLF inseparability threshold", vlf_threshold, Duration::from_secs(1)),
        ("2 nullifier variances vs closed form", nullifier_variance, Duration::from_secs(10)),
        ("3 squeezing budget at 10 dB", squeezing_budget_at_ten, Duration::from_secs(1)),
        ("4 GKP failure at 15 dB, R = 1", gkp_anchor, Duration::from_secs(1)),
        ("5 squeezing thresholds", thresholds, Duration::from_secs(120)),
        ("6 repetition-code region structure", region_structure, Duration::from_secs(120)),
        ("7 Monte Carlo vs analytic", oracle_agreement, Duration::from_secs(300)),
        ("8 even-count closed form", even_count_identity, Duration::from_secs(1)),
        ("9 outcome completeness", completeness, Duration::from_secs(1)),
        ("10 CLI determinism", cli_determinism, Duration::from_secs(10)),
    ];

    let mut failed = 0;
    for (name, check, budget) in checks {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && took <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name} [{:.2} s / {:.0} s]\n      {detail}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs_f64()
        );
    }
    println!("\n{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
