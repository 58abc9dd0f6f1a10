//! Parameter sweeps and the CSV format they produce.
//!
//! A sweep varies one physical parameter over a grid and evaluates every
//! requested method at each point. Points run on the worker pool; rows come
//! back in a fixed order (ascending value, then method in canonical order)
//! whatever the completion order.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::analytic::{scenario_outage, FitSpec, Method, OutageResult};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::SystemConfig;
use crate::quadrature::QuadratureSpec;
use crate::scenario::Scenario;
use crate::simulator::{simulate_scenario_with, McSpec};

pub const CSV_HEADER: [&str; 8] = [
    "variable",
    "value",
    "method",
    "op",
    "ci_half_width",
    "diag_residual",
    "trials",
    "runtime_ms",
];

/// The parameter on a sweep's x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Power,
    Gain,
    Elements,
    Ports,
    Aperture,
    Rate,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::Power,
        Variable::Gain,
        Variable::Elements,
        Variable::Ports,
        Variable::Aperture,
        Variable::Rate,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Variable::Power => "P_dBm",
            Variable::Gain => "omega_dB",
            Variable::Elements => "M",
            Variable::Ports => "N",
            Variable::Aperture => "W",
            Variable::Rate => "R",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut out = cfg.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::config(self.key(), format!("sweep value {v} is not a positive integer")))
            }
        };
        match self {
            Variable::Power => out.p_dbm = value,
            Variable::Gain => out.omega_db = value,
            Variable::Elements => out.elements = count(value)?,
            Variable::Ports => out.ports = count(value)?,
            Variable::Aperture => out.aperture = value,
            Variable::Rate => out.rate = value,
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| v.key() == s)
            .ok_or_else(|| Error::config("variable", format!("`{s}` is not one of P_dBm, omega_dB, M, N, W, R")))
    }
}

/// `start, start + step, …` up to `stop` inclusive (with a relative slack
/// of `1e-9` steps so that `0:30:2` ends on 30).
pub fn range_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(Error::config("values", format!("bad range {start}:{stop}:{step}")));
    }
    if stop < start {
        return Err(Error::config("values", format!("range stop {stop} is below start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// Parses `start:stop:step` or a comma-separated list.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::config("values", format!("`{}` is not a number", s.trim())))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => range_values(num(start)?, num(stop)?, num(step)?),
        [list] => list.split(',').filter(|s| !s.trim().is_empty()).map(num).collect(),
        _ => Err(Error::config("values", format!("`{text}` is neither start:stop:step nor a list"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub scenario: Scenario,
    pub mc: McSpec,
    pub quad: QuadratureSpec,
    pub fit: FitSpec,
    /// When false every `runtime_ms` is written as zero, making output a
    /// pure function of the inputs.
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(variable: Variable, values: Vec<f64>, methods: Vec<Method>) -> Self {
        SweepSpec {
            variable,
            values,
            methods,
            scenario: Scenario::FasAris,
            mc: McSpec::default(),
            quad: QuadratureSpec::default(),
            fit: FitSpec::default(),
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::config("values", format!("non-finite sweep value {v}")));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "sweep needs at least one method"));
        }
        if self.methods.contains(&Method::MonteCarlo) {
            self.mc.validate()?;
        }
        self.quad.validate()?;
        self.fit.validate()
    }

    fn grid(&self) -> (Vec<f64>, Vec<Method>) {
        let mut values = self.values.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let methods = Method::ALL.into_iter().filter(|m| self.methods.contains(m)).collect();
        (values, methods)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: String,
    pub value: f64,
    pub method: String,
    pub op: f64,
    pub ci_half_width: f64,
    pub diag_residual: f64,
    pub trials: u64,
    pub runtime_ms: f64,
}

impl SweepRow {
    pub fn from_result(variable: Variable, value: f64, r: &OutageResult) -> Self {
        SweepRow {
            variable: variable.key().to_string(),
            value,
            method: r.method.name().to_string(),
            op: r.op,
            ci_half_width: r.ci_half_width,
            diag_residual: r.residual,
            trials: r.trials,
            runtime_ms: r.runtime_ms,
        }
    }

    fn fields(&self) -> [String; 8] {
        [
            self.variable.clone(),
            format!("{:e}", self.value),
            self.method.clone(),
            format!("{:e}", self.op),
            format!("{:e}", self.ci_half_width),
            format!("{:e}", self.diag_residual),
            self.trials.to_string(),
            format!("{:e}", self.runtime_ms),
        ]
    }
}

/// Evaluates one method for one scenario.
pub fn evaluate(
    cfg: &SystemConfig,
    scenario: Scenario,
    method: Method,
    mc: &McSpec,
    quad: &QuadratureSpec,
    fit: &FitSpec,
    exec: Execution,
) -> Result<OutageResult> {
    match method {
        Method::MonteCarlo => {
            let start = Instant::now();
            let est = simulate_scenario_with(cfg, mc, scenario, exec)?;
            Ok(OutageResult {
                op: est.op_hat,
                method,
                ci_half_width: est.ci_half_width,
                residual: 0.0,
                trials: est.trials,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        }
        _ => scenario_outage(cfg, scenario, method, quad, fit),
    }
}

pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let (values, methods) = spec.grid();
    let configs = values
        .iter()
        .map(|&v| spec.variable.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Method)> = (0..values.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect();
    let results = exec.map(jobs.len(), |j| {
        let (i, method) = jobs[j];
        evaluate(&configs[i], spec.scenario, method, &spec.mc, &spec.quad, &spec.fit, exec)
    });
    jobs.iter()
        .zip(results)
        .map(|(&(i, _), r)| {
            let mut row = SweepRow::from_result(spec.variable, values[i], &r?);
            if !spec.timing {
                row.runtime_ms = 0.0;
            }
            Ok(row)
        })
        .collect()
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let io = |source| Error::Output {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    write_rows(rows, std::io::BufWriter::new(file)).map_err(|e| io(e.into()))
}

fn malformed(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedCsv {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Parses sweep CSV text. `path` is only used in error messages.
pub fn parse_rows(path: &Path, text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    match records.next() {
        None => return Err(malformed(path, 1, "empty file")),
        Some(Err(e)) => return Err(malformed(path, 1, e.to_string())),
        Some(Ok(h)) if h.iter().ne(CSV_HEADER) => {
            return Err(malformed(path, 1, format!("header must be `{}`", CSV_HEADER.join(","))))
        }
        Some(Ok(_)) => {}
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CSV_HEADER.len() {
            return Err(malformed(path, line, format!("expected 8 fields, found {}", rec.len())));
        }
        let real = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| malformed(path, line, format!("`{}` is not a number in column {}", &rec[i], CSV_HEADER[i])))
        };
        let method = rec[2].to_string();
        if method.is_empty() {
            return Err(malformed(path, line, "empty method"));
        }
        rows.push(SweepRow {
            variable: rec[0].to_string(),
            value: real(1)?,
            method,
            op: real(3)?,
            ci_half_width: real(4)?,
            diag_residual: real(5)?,
            trials: rec[6]
                .parse()
                .map_err(|_| malformed(path, line, format!("`{}` is not a trial count", &rec[6])))?,
            runtime_ms: real(7)?,
        });
    }
    if rows.is_empty() {
        return Err(malformed(path, 2, "no data rows"));
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Input {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rows(path, &text)
}
