//! Acceptance suite. Runs every exit criterion at full scale and prints one
//! PASS/FAIL line per criterion; the process fails if any criterion fails.
//!
//! Run alone with `cargo test --release --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use fasris::analytic::{
    block_max_cdf, cdf_gamma_star_bc, cdf_gamma_star_iid, cdf_snr, outage_probability, prepare, FitSpec, IidBlockMax,
    MaxGainCdf,
};
use fasris::correlation::{build_sigma, fit_block_partition, DEFAULT_LAMBDA_TH, DEFAULT_MU};
use fasris::exec::Execution;
use fasris::moments::{cascade_moments, envelope_cross_moment, eta};
use fasris::presets::{crossover_of, Preset, PresetOptions, ELEMENT_GRID};
use fasris::simulator::{simulate_scenario_with, McSpec, PortSampler};
use fasris::sweep::{run_sweep, SweepRow};
use fasris::{Method, QuadratureSpec, Scenario, SystemConfig};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials per point for the oracle-equivalence and closed-form checks.
const FULL_TRIALS: u64 = 1_000_000;
/// Trials per point on the figure grids.
const PRESET_TRIALS: u64 = 100_000;
/// Samples for the surrogate and moment oracles.
const ORACLE_SAMPLES: u64 = 10_000_000;
const RESIDUAL_LIMIT: f64 = 1e-6;
/// Slack allowed to analytic curves when checking orderings.
const ANALYTIC_SLACK: f64 = 1e-6;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn full_mc() -> McSpec {
    McSpec {
        trials: FULL_TRIALS,
        ..McSpec::default()
    }
}

fn acceptance_grid() -> Vec<SystemConfig> {
    let mut out = Vec::new();
    for p in [0.0, 10.0, 20.0, 30.0] {
        for m in [16, 64] {
            for n in [5, 20] {
                out.push(SystemConfig {
                    p_dbm: p,
                    omega_db: 5.0,
                    elements: m,
                    ports: n,
                    ..SystemConfig::reference()
                });
            }
        }
    }
    out
}

/// Oracle equivalence on the acceptance grid. Also returns the worst
/// quadrature residual seen, which the hygiene criterion reuses.
fn oracle_equivalence(residuals: &mut Vec<(String, f64)>) -> Verdict {
    let q = QuadratureSpec::default();
    let fit = FitSpec::default();
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for cfg in acceptance_grid() {
        let label = format!("P={} M={} N={}", cfg.p_dbm, cfg.elements, cfg.ports);
        let bc = match outage_probability(&cfg, Method::BcAnalytic, &q, &fit) {
            Ok(r) => r,
            Err(e) => return verdict(false, format!("{label}: {e}")),
        };
        match outage_probability(&cfg, Method::IidAnalytic, &q, &fit) {
            Ok(r) => residuals.push((format!("{label} iid"), r.residual)),
            Err(e) => return verdict(false, format!("{label}: {e}")),
        }
        residuals.push((format!("{label} bc"), bc.residual));
        let mc = simulate_scenario_with(&cfg, &full_mc(), Scenario::FasAris, Execution::default()).unwrap();
        let gap = (bc.op - mc.op_hat).abs();
        let tol = 0.02f64.max(0.15 * mc.op_hat);
        worst_gap = worst_gap.max(gap / tol);
        if gap > tol {
            failures.push(format!("{label}: bc {:.6} vs mc {:.6}", bc.op, mc.op_hat));
        }
    }
    verdict(
        failures.is_empty(),
        format!("16 points, worst |bc - mc| / tol = {worst_gap:.3}; {}", failures.join("; ")),
    )
}

fn surrogate_cdf() -> Verdict {
    let q = QuadratureSpec::default();
    let cfg = SystemConfig::reference();
    let model = prepare(&cfg, &FitSpec::default()).unwrap();
    let s = model.surrogate;
    let ys: Vec<f64> = (0..21).map(|i| s.e_gamma + (i as f64 * 0.4 - 4.0) * s.sd()).collect();
    let n = ORACLE_SAMPLES;
    let sup = |analytic: &[f64], empirical: &[f64]| -> (f64, bool) {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for (&a, &e) in analytic.iter().zip(empirical) {
            let se = ((a * (1.0 - a)).max(1.0 / n as f64) / n as f64).sqrt();
            worst = worst.max((a - e).abs() / se);
            ok &= (a - e).abs() <= 3.0 * se;
        }
        (worst, ok)
    };
    let bc: Vec<f64> = ys.iter().map(|&y| cdf_gamma_star_bc(y, &s, &model.partition, &q).unwrap()).collect();
    let bc_emp =
        common::block_gaussian_max_cdf(s.e_gamma, s.sd(), s.rho1, s.rho0, &model.partition.block_sizes, &ys, n, 0xb10c);
    let blocks = model.partition.block_count();
    let iid: Vec<f64> = ys.iter().map(|&y| cdf_gamma_star_iid(y, &s, blocks, &q).unwrap()).collect();
    let iid_emp = common::iid_gaussian_max_cdf(s.e_gamma, s.sd(), s.rho0, blocks, &ys, n, 0x11d);
    let (wb, okb) = sup(&bc, &bc_emp);
    let (wi, oki) = sup(&iid, &iid_emp);
    verdict(okb && oki, format!("sup error in standard errors: bc {wb:.2}, iid {wi:.2} (limit 3)"))
}

fn moment_identities() -> Verdict {
    let eta0 = (eta(0.0, 1.0, 1.0).unwrap() - PI / (4.0 + PI)).abs();
    let eta1 = (eta(1.0, 1.0, 1.0).unwrap() - 1.0).abs();
    let cross = (envelope_cross_moment(0.5, 1.0).unwrap() - common::rayleigh_cross_moment(0.5)).abs();

    let cfg = SystemConfig {
        elements: 64,
        ports: 1,
        ..SystemConfig::reference()
    };
    let mut sampler = PortSampler::new(&cfg, &DMatrix::identity(1, 1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a1);
    let mut g = [0.0];
    let stats = common::moment_stats((0..ORACLE_SAMPLES).map(|_| {
        sampler.sample_into(&mut rng, &mut g);
        g[0]
    }));
    let (e, v) = cascade_moments(64, cfg.eps1, cfg.eps2);
    let zm = (stats.mean - e) / stats.mean_se;
    let zv = (stats.var - v) / stats.var_se;
    let ok = eta0 < 1e-6 && eta1 < 1e-9 && cross < 1e-6 && zm.abs() <= 3.0 && zv.abs() <= 3.0;
    verdict(
        ok,
        format!(
            "|eta(0) - pi/(4+pi)| {eta0:.1e}, |eta(1) - 1| {eta1:.1e}, cross moment vs series {cross:.1e}, \
             mean {zm:+.2} se, variance {zv:+.2} se"
        ),
    )
}

fn preset_rows(preset: Preset, methods: &[Method], trials: u64) -> Vec<(String, Vec<SweepRow>)> {
    let opts = PresetOptions {
        methods: methods.to_vec(),
        mc: McSpec {
            trials,
            ..McSpec::default()
        },
        timing: false,
        ..PresetOptions::default()
    };
    preset
        .series(&SystemConfig::reference(), &opts)
        .into_iter()
        .map(|s| {
            let rows = run_sweep(&s.base, &s.spec, Execution::default()).unwrap();
            (s.name, rows)
        })
        .collect()
}

fn landmark(fig1: &[(String, Vec<SweepRow>)]) -> Verdict {
    let find = |name: &str| &fig1.iter().find(|(n, _)| n == name).unwrap().1;
    let aris0 = find("fig1_aris_omega0");
    let ris = find("fig1_ris");
    let mut lines = Vec::new();
    let mut ok = true;
    for method in Method::ALL {
        let c = crossover_of(aris0, ris, method.name());
        let at = c.at.map_or("none".to_string(), |x| format!("{x:.2} dBm"));
        if method == Method::BcAnalytic {
            ok = c.strict && c.at.is_some_and(|x| (10.0..=20.0).contains(&x));
        }
        lines.push(format!("{}: {at}{}", method.name(), if c.strict { " (strict)" } else { "" }));
    }
    let max_gap = aris0
        .iter()
        .zip(ris)
        .map(|(a, b)| (a.op - b.op).abs())
        .fold(0.0, f64::max);
    verdict(ok, format!("crossover {}; max |aris(0 dB) - ris| {max_gap:.1e}", lines.join(", ")))
}

fn by_method<'a>(rows: &'a [SweepRow], method: &str) -> Vec<&'a SweepRow> {
    rows.iter().filter(|r| r.method == method).collect()
}

/// `a <= b` up to sampling or quadrature noise.
fn not_above(a: &SweepRow, b: &SweepRow) -> bool {
    if a.method == Method::MonteCarlo.name() {
        a.op <= b.op + a.ci_half_width + b.ci_half_width
    } else {
        a.op <= b.op + ANALYTIC_SLACK
    }
}

fn nonincreasing(label: &str, rows: &[SweepRow], failures: &mut Vec<String>) {
    for method in Method::ALL {
        let curve = by_method(rows, method.name());
        for w in curve.windows(2) {
            if !not_above(w[1], w[0]) {
                failures.push(format!(
                    "{label} {}: {:.6} at {} > {:.6} at {}",
                    method.name(),
                    w[1].op,
                    w[1].value,
                    w[0].op,
                    w[0].value
                ));
            }
        }
    }
}

fn ordered(label: &str, low: &[SweepRow], high: &[SweepRow], failures: &mut Vec<String>) {
    for method in Method::ALL {
        for (a, b) in by_method(low, method.name()).into_iter().zip(by_method(high, method.name())) {
            if !not_above(a, b) {
                failures.push(format!("{label} {} at {}: {:.6} > {:.6}", method.name(), a.value, a.op, b.op));
            }
        }
    }
}

fn monotonicity(fig1: &[(String, Vec<SweepRow>)]) -> Verdict {
    let get = |set: &[(String, Vec<SweepRow>)], name: &str| set.iter().find(|(n, _)| n == name).unwrap().1.clone();
    let mut failures = Vec::new();

    let aris5 = get(fig1, "fig1_aris_omega5");
    let aris0 = get(fig1, "fig1_aris_omega0");
    nonincreasing("P (omega 5 dB)", &aris5, &mut failures);
    nonincreasing("P (omega 0 dB)", &aris0, &mut failures);
    ordered("omega 5 dB vs 0 dB", &aris5, &aris0, &mut failures);

    let fig2 = preset_rows(Preset::Fig2, &Method::ALL, PRESET_TRIALS);
    let n5 = get(&fig2, "fig2_n5");
    let n20 = get(&fig2, "fig2_n20");
    nonincreasing("M (N = 5)", &n5, &mut failures);
    nonincreasing("M (N = 20)", &n20, &mut failures);
    ordered("N = 20 vs N = 5", &n20, &n5, &mut failures);

    let fig3 = preset_rows(Preset::Fig3, &Method::ALL, PRESET_TRIALS);
    let aris = get(&fig3, "fig3_fas_aris");
    let ris = get(&fig3, "fig3_fas_ris");
    let no_ris = get(&fig3, "fig3_no_ris");
    let no_fas = get(&fig3, "fig3_no_fas");
    ordered("fas_aris <= fas_ris", &aris, &ris, &mut failures);
    ordered("fas_ris <= no_ris", &ris, &no_ris, &mut failures);
    ordered("fas_aris <= no_fas", &aris, &no_fas, &mut failures);

    let mut tally: Vec<(String, usize)> = Vec::new();
    for f in &failures {
        let check = f.split(" bc_").next().unwrap().split(" iid_").next().unwrap().split(" monte_").next().unwrap();
        match tally.iter_mut().find(|(c, _)| c == check) {
            Some((_, n)) => *n += 1,
            None => tally.push((check.to_string(), 1)),
        }
    }
    let tally: Vec<String> = tally.iter().map(|(c, n)| format!("{c} x{n}")).collect();
    let shown: Vec<&str> = failures.iter().take(6).map(String::as_str).collect();
    verdict(
        failures.is_empty(),
        format!(
            "P grid 0:30:2, M grid {:?}, N in {{5, 20}}, omega in {{0, 5}} dB, scenario grid 0:60:5; {} violations [{}]{}{}",
            ELEMENT_GRID,
            failures.len(),
            tally.join(", "),
            if shown.is_empty() { "" } else { "; e.g. " },
            shown.join("; ")
        ),
    )
}

fn closed_form_baseline() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in [30.0, 35.0, 40.0, 45.0, 50.0] {
        let cfg = SystemConfig {
            p_dbm: p,
            ..SystemConfig::reference()
        };
        let watts = |dbm: f64| 10f64.powf((dbm - 30.0) / 10.0);
        let amp = 10f64.powf(cfg.omega_db / 20.0);
        let noise = amp * amp * watts(cfg.sigma_k2_dbm) + watts(cfg.sigma_r2_dbm);
        let d_sd = ((cfg.rx_pos[0] - cfg.bs_pos[0]).powi(2) + (cfg.rx_pos[1] - cfg.bs_pos[1]).powi(2)).sqrt();
        let snr_bar = watts(p) * cfg.eps3 / noise * (d_sd / cfg.d0).powf(-cfg.alpha);
        let beta = 2f64.powf(cfg.rate) - 1.0;
        let truth = common::rayleigh_outage(beta, snr_bar);
        let est = simulate_scenario_with(&cfg, &full_mc(), Scenario::NoFasNoRis, Execution::default()).unwrap();
        let se = (truth * (1.0 - truth) / FULL_TRIALS as f64).sqrt();
        let z = (est.op_hat - truth).abs() / se;
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    verdict(ok, format!("P in 30:50:5 dBm, worst deviation {worst:.2} standard errors (limit 3)"))
}

fn numerical_hygiene(residuals: &[(String, f64)]) -> Verdict {
    let q = QuadratureSpec::default();
    let fit = FitSpec::default();
    let (worst_label, worst) = residuals
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, r)| (l.clone(), *r))
        .unwrap_or_default();
    let residual_ok = !residuals.is_empty() && worst < RESIDUAL_LIMIT;

    let mut cdf_ok = true;
    for cfg in acceptance_grid() {
        let model = prepare(&cfg, &fit).unwrap();
        let s = model.surrogate;
        let bc = block_max_cdf(&s, &model.partition, &q).unwrap();
        let iid = IidBlockMax::new(&s, model.partition.block_count(), &q).unwrap();
        let curves: [&dyn MaxGainCdf; 2] = [bc.as_ref(), &iid];
        for star in curves {
            let mut prev = 0.0;
            for k in 0..=100 {
                let f = star.cdf(s.e_gamma + (k as f64 / 10.0 - 5.0) * s.sd());
                cdf_ok &= (0.0..=1.0).contains(&f) && f >= prev - 1e-12;
                prev = f;
            }
            let mut prev = 0.0;
            for k in 0..=40 {
                let t = model.link.beta * 10f64.powf(k as f64 / 5.0 - 4.0);
                let f = cdf_snr(t, star, &model.link, cfg.eps3, &q).unwrap();
                cdf_ok &= (0.0..=1.0).contains(&f) && f >= prev - 1e-9;
                prev = f;
            }
        }
    }

    let mut fits = 0;
    let mut fit_failures = Vec::new();
    for n in 1..=12 {
        for w in [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
            let sigma = build_sigma(n, w).unwrap();
            for (mu, th) in [(DEFAULT_MU, DEFAULT_LAMBDA_TH), (0.9, 0.5), (0.8, 1.0), (0.5, 0.05)] {
                let Ok(greedy) = fit_block_partition(&sigma, th, mu) else { continue };
                let (best, sizes) = common::exhaustive_block_fit(sigma.eigenvalues(), greedy.block_count(), mu);
                fits += 1;
                if greedy.fit_distance > best + 1e-12 * (1.0 + best) {
                    fit_failures.push(format!("N={n} W={w}: {:?} vs {sizes:?}", greedy.block_sizes));
                }
            }
        }
    }
    verdict(
        residual_ok && cdf_ok && fit_failures.is_empty(),
        format!(
            "worst residual {worst:.2e} ({worst_label}); CDF probes {}; greedy = exhaustive on {}/{fits} matrices{}",
            if cdf_ok { "monotone in [0, 1]" } else { "VIOLATED" },
            fits - fit_failures.len(),
            fit_failures.first().map(|f| format!(" (first mismatch {f})")).unwrap_or_default()
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: Option<&str>| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fasris"));
        cmd.args([
            "op",
            "--set",
            "P_dBm=30",
            "--set",
            "M=16",
            "--set",
            "N=5",
            "--methods",
            "monte_carlo",
            "--trials",
            "1000000",
            "--no-timing",
            "--csv",
            path.to_str().unwrap(),
        ]);
        match workers {
            Some(w) => cmd.env("FASRIS_WORKERS", w),
            None => cmd.env_remove("FASRIS_WORKERS"),
        };
        let out = cmd.output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let runs: Result<Vec<_>, _> = [run("a.csv", None), run("b.csv", None), run("c.csv", Some("1"))]
        .into_iter()
        .collect();
    match runs {
        Ok(r) => verdict(
            r[0] == r[1] && r[1] == r[2],
            format!("3 runs of P=30 M=16 N=5 at 1e6 trials, {} byte CSVs identical: {}", r[0].len(), r[0] == r[1] && r[1] == r[2]),
        ),
        Err(e) => verdict(false, e),
    }
}

fn main() {
    let started = Instant::now();
    let mut verdicts: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut report = |id: u8, name: &'static str, v: Verdict| {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name}: {}", v.detail);
        verdicts.push((id, name, v));
    };

    let mut residuals = Vec::new();
    report(1, "oracle equivalence", oracle_equivalence(&mut residuals));
    report(2, "surrogate CDF equivalence", surrogate_cdf());
    report(3, "moment identities", moment_identities());
    let fig1 = preset_rows(Preset::Fig1, &Method::ALL, PRESET_TRIALS);
    report(4, "crossover landmark", landmark(&fig1));
    report(5, "monotonicity and scenario ordering", monotonicity(&fig1));
    report(6, "closed-form direct link", closed_form_baseline());
    report(7, "numerical hygiene", numerical_hygiene(&residuals));
    report(8, "determinism", determinism());

    let failed: Vec<u8> = verdicts.iter().filter(|(_, _, v)| !v.passed).map(|(id, _, _)| *id).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0} s",
        verdicts.len() - failed.len(),
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
