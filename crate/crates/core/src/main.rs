use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fasris::analytic::Method;
use fasris::config::RunConfig;
use fasris::correlation::{build_sigma, fit_block_partition};
use fasris::exec::{init_workers_from_env, Execution};
use fasris::plot::emit_plot;
use fasris::presets::{crossover_of, Preset, PresetOptions};
use fasris::scenario::Scenario;
use fasris::sweep::{evaluate, parse_values, run_sweep, write_csv, SweepRow, SweepSpec, Variable};
use fasris::validate::run_checks;
use fasris::{Error, Result};

/// Outage probability of a fluid-antenna receiver behind an active RIS.
///
/// Settings are layered: built-in reference values, then the config file,
/// then each `--set key=value` in order, then dedicated flags such as
/// `--trials`.
#[derive(Parser, Debug)]
#[command(name = "fasris", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one configuration with each requested method.
    Op {
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        run: RunArgs,
        /// Also write the rows as CSV (variable column is P_dBm).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep one parameter and write a CSV.
    Sweep {
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        run: RunArgs,
        /// P_dBm, omega_dB, M, N, W or R.
        #[arg(long)]
        variable: String,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        values: String,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Regenerate one of the reference figures as CSVs (and SVG).
    Preset {
        /// fig1, fig2 or fig3.
        name: String,
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Skip the SVG.
        #[arg(long)]
        no_plot: bool,
    },
    /// Print the correlation spectrum and the fitted block sizes.
    FitBlocks {
        #[command(flatten)]
        settings: Settings,
    },
    /// Run the reduced-scale self checks; exit 1 if any fails.
    Validate {
        #[command(flatten)]
        settings: Settings,
    },
    /// Render sweep CSVs as a log-scale SVG.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Settings {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set P_dBm=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shards: Option<usize>,
    /// Quadrature nodes.
    #[arg(long)]
    u: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Comma-separated subset of bc_analytic, iid_analytic, monte_carlo.
    #[arg(long, default_value = "bc_analytic,iid_analytic,monte_carlo")]
    methods: String,
    /// fas_aris, fas_ris, no_ris, no_fas or no_fas_no_ris.
    #[arg(long, default_value = "fas_aris")]
    scenario: String,
    /// Write zero in the runtime column so output depends only on inputs.
    #[arg(long)]
    no_timing: bool,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::reference(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(t) = self.trials {
            cfg.mc.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.mc.seed = s;
        }
        if let Some(s) = self.shards {
            cfg.mc.shards = s;
        }
        if let Some(u) = self.u {
            cfg.quad.u = u;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunArgs {
    fn methods(&self) -> Result<Vec<Method>> {
        self.methods.split(',').map(|m| m.trim().parse()).collect()
    }
}

fn print_rows(rows: &[SweepRow]) {
    println!(
        "{:<14} {:>14} {:>22} {:>12} {:>12} {:>10} {:>12}",
        "method", rows.first().map_or("value", |r| r.variable.as_str()), "op", "ci_half", "residual", "trials", "runtime_ms"
    );
    for r in rows {
        println!(
            "{:<14} {:>14} {:>22.15e} {:>12.3e} {:>12.3e} {:>10} {:>12.3}",
            r.method, r.value, r.op, r.ci_half_width, r.diag_residual, r.trials, r.runtime_ms
        );
    }
}

fn run_op(settings: &Settings, run: &RunArgs, csv: Option<&Path>) -> Result<()> {
    let cfg = settings.resolve()?;
    let scenario: Scenario = run.scenario.parse()?;
    let mut methods = run.methods()?;
    methods.sort_by_key(|m| Method::ALL.iter().position(|x| x == m));
    methods.dedup();
    let mut rows = Vec::new();
    for method in methods {
        let r = evaluate(&cfg.system, scenario, method, &cfg.mc, &cfg.quad, &cfg.fit, Execution::default())?;
        let mut row = SweepRow::from_result(Variable::Power, cfg.system.p_dbm, &r);
        if run.no_timing {
            row.runtime_ms = 0.0;
        }
        rows.push(row);
    }
    print_rows(&rows);
    if let Some(path) = csv {
        write_csv(path, &rows)?;
    }
    Ok(())
}

fn run_sweep_cmd(settings: &Settings, run: &RunArgs, variable: &str, values: &str, out: &Path) -> Result<()> {
    let cfg = settings.resolve()?;
    let spec = SweepSpec {
        scenario: run.scenario.parse()?,
        mc: cfg.mc,
        quad: cfg.quad,
        fit: cfg.fit,
        timing: !run.no_timing,
        ..SweepSpec::new(variable.parse()?, parse_values(values)?, run.methods()?)
    };
    let rows = run_sweep(&cfg.system, &spec, Execution::default())?;
    write_csv(out, &rows)?;
    print_rows(&rows);
    Ok(())
}

fn run_preset(name: &str, settings: &Settings, run: &RunArgs, out_dir: &Path, plot: bool) -> Result<()> {
    let preset: Preset = name.parse()?;
    let cfg = settings.resolve()?;
    let opts = PresetOptions {
        methods: run.methods()?,
        mc: cfg.mc,
        quad: cfg.quad,
        fit: cfg.fit,
        timing: !run.no_timing,
    };
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Output {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut outputs = Vec::new();
    for series in preset.series(&cfg.system, &opts) {
        let rows = run_sweep(&series.base, &series.spec, Execution::default())?;
        let path = out_dir.join(format!("{}.csv", series.name));
        write_csv(&path, &rows)?;
        println!("wrote {}", path.display());
        outputs.push((series.name, path, rows));
    }
    if preset == Preset::Fig1 {
        let mut report = String::from("curve,reference,method,crossover_P_dBm,strict\n");
        let ris = &outputs[2].2;
        for (name, _, rows) in &outputs[..2] {
            for method in opts.methods.iter().map(|m| m.name()) {
                let c = crossover_of(rows, ris, method);
                let at = c.at.map_or("none".to_string(), |x| format!("{x:e}"));
                report.push_str(&format!("{name},{},{method},{at},{}\n", outputs[2].0, c.strict));
            }
        }
        let path = out_dir.join("fig1_crossover.csv");
        std::fs::write(&path, &report).map_err(|source| Error::Output { path: path.clone(), source })?;
        print!("{report}");
    }
    if plot {
        let svg = out_dir.join(format!("{}.svg", preset.name()));
        let csvs: Vec<PathBuf> = outputs.iter().map(|(_, p, _)| p.clone()).collect();
        emit_plot(&csvs, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn run_fit(settings: &Settings) -> Result<()> {
    let cfg = settings.resolve()?;
    let sigma = build_sigma(cfg.system.ports, cfg.system.aperture)?;
    println!("eigenvalues (N = {}, W = {}):", cfg.system.ports, cfg.system.aperture);
    for (i, l) in sigma.eigenvalues().iter().enumerate() {
        println!("  {:>3} {l:.12e}", i + 1);
    }
    let p = fit_block_partition(&sigma, cfg.fit.lambda_th, cfg.fit.mu)?;
    println!("mu = {}, lambda_th = {}", p.mu, p.lambda_th);
    println!("B = {}", p.block_count());
    println!("block sizes = {:?}", p.block_sizes);
    println!("spectrum distance = {:.6e}", p.fit_distance);
    Ok(())
}

fn run_validate(settings: &Settings) -> Result<bool> {
    let cfg = settings.resolve()?;
    let report = run_checks(&cfg);
    for check in &report.checks {
        println!("{check}");
    }
    if !report.all_passed() {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        eprintln!("failed checks: {}", names.join(", "));
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_workers_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Op { settings, run, csv } => run_op(settings, run, csv.as_deref()).map(|_| true),
        Command::Sweep {
            settings,
            run,
            variable,
            values,
            out,
        } => run_sweep_cmd(settings, run, variable, values, out).map(|_| true),
        Command::Preset {
            name,
            settings,
            run,
            out_dir,
            no_plot,
        } => run_preset(name, settings, run, out_dir, !no_plot).map(|_| true),
        Command::FitBlocks { settings } => run_fit(settings).map(|_| true),
        Command::Validate { settings } => run_validate(settings),
        Command::Plot { csv, out } => emit_plot(csv, out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
