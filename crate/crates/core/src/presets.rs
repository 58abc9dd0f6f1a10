//! Canned sweeps reproducing the three reference figures, and the
//! crossover search used on the first one.

use std::fmt;
use std::str::FromStr;

use crate::analytic::{FitSpec, Method};
use crate::error::{Error, Result};
use crate::params::SystemConfig;
use crate::quadrature::QuadratureSpec;
use crate::scenario::Scenario;
use crate::simulator::McSpec;
use crate::sweep::{range_values, SweepRow, SweepSpec, Variable};

/// Surface sizes on the x-axis of the element sweep.
pub const ELEMENT_GRID: [f64; 8] = [16.0, 32.0, 48.0, 64.0, 80.0, 96.0, 112.0, 128.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Power sweep, active surface at 0 and 5 dB against the passive one.
    Fig1,
    /// Element sweep for 5 and 20 ports.
    Fig2,
    /// Power sweep over every comparison scenario.
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            _ => Err(Error::config("preset", format!("`{s}` is not one of fig1, fig2, fig3"))),
        }
    }
}

/// Settings shared by every series of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    pub methods: Vec<Method>,
    pub mc: McSpec,
    pub quad: QuadratureSpec,
    pub fit: FitSpec,
    pub timing: bool,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            methods: Method::ALL.to_vec(),
            mc: McSpec::default(),
            quad: QuadratureSpec::default(),
            fit: FitSpec::default(),
            timing: true,
        }
    }
}

/// One curve: its file stem, the base configuration and the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub base: SystemConfig,
    pub spec: SweepSpec,
}

impl Preset {
    /// The curves this preset draws, derived from `base` (normally the
    /// reference configuration).
    pub fn series(self, base: &SystemConfig, opts: &PresetOptions) -> Vec<Series> {
        let make = |name: &str, base: SystemConfig, variable, values: Vec<f64>, scenario| Series {
            name: format!("{}_{name}", self.name()),
            base,
            spec: SweepSpec {
                scenario,
                mc: opts.mc,
                quad: opts.quad,
                fit: opts.fit,
                timing: opts.timing,
                ..SweepSpec::new(variable, values, opts.methods.clone())
            },
        };
        let with_gain = |db: f64| SystemConfig {
            omega_db: db,
            ..base.clone()
        };
        match self {
            Preset::Fig1 => {
                let p = range_values(0.0, 30.0, 2.0).expect("static range");
                vec![
                    make("aris_omega0", with_gain(0.0), Variable::Power, p.clone(), Scenario::FasAris),
                    make("aris_omega5", with_gain(5.0), Variable::Power, p.clone(), Scenario::FasAris),
                    make("ris", base.clone(), Variable::Power, p, Scenario::FasRis),
                ]
            }
            Preset::Fig2 => [5usize, 20]
                .into_iter()
                .map(|n| {
                    let cfg = SystemConfig {
                        p_dbm: 10.0,
                        omega_db: 5.0,
                        ports: n,
                        ..base.clone()
                    };
                    make(&format!("n{n}"), cfg, Variable::Elements, ELEMENT_GRID.to_vec(), Scenario::FasAris)
                })
                .collect(),
            Preset::Fig3 => {
                let p = range_values(0.0, 60.0, 5.0).expect("static range");
                Scenario::ALL
                    .into_iter()
                    .map(|s| make(s.name(), base.clone(), Variable::Power, p.clone(), s))
                    .collect()
            }
        }
    }
}

/// Where one curve drops below another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    /// Linear interpolation of the first sign change of `a - b` from
    /// positive to non-positive.
    pub at: Option<f64>,
    /// `a > b` at every grid point before `at` and `a < b` at every point
    /// after it, each by more than the per-point tolerance.
    pub strict: bool,
}

/// Searches for the point where `a` goes from above `b` to below it.
/// Differences within `tol[i]` of zero count as ties.
pub fn find_crossover(x: &[f64], a: &[f64], b: &[f64], tol: &[f64]) -> Crossover {
    let n = x.len().min(a.len()).min(b.len()).min(tol.len());
    let d: Vec<f64> = (0..n).map(|i| a[i] - b[i]).collect();
    let at = (0..n.saturating_sub(1)).find(|&i| d[i] > 0.0 && d[i + 1] <= 0.0).map(|i| {
        if d[i + 1] == 0.0 {
            x[i + 1]
        } else {
            x[i] + (x[i + 1] - x[i]) * d[i] / (d[i] - d[i + 1])
        }
    });
    let strict = at.is_some_and(|c| (0..n).all(|i| if x[i] < c { d[i] > tol[i] } else { d[i] < -tol[i] }));
    Crossover { at, strict }
}

/// Crossover of two sweep outputs for one method, matching rows by value.
/// Monte Carlo rows treat differences inside the summed CI half-widths as
/// ties.
pub fn crossover_of(a: &[SweepRow], b: &[SweepRow], method: &str) -> Crossover {
    let mut x = Vec::new();
    let mut ya = Vec::new();
    let mut yb = Vec::new();
    let mut tol = Vec::new();
    for ra in a.iter().filter(|r| r.method == method) {
        if let Some(rb) = b.iter().find(|r| r.method == method && r.value == ra.value) {
            x.push(ra.value);
            ya.push(ra.op);
            yb.push(rb.op);
            tol.push(ra.ci_half_width + rb.ci_half_width);
        }
    }
    find_crossover(&x, &ya, &yb, &tol)
}
