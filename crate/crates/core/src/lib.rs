//! Outage probability of a fluid-antenna receiver served by an active
//! reconfigurable surface plus a direct link.
//!
//! Three estimators share one parameter set:
//!
//! * [`analytic::Method::BcAnalytic`]: block-correlation fit of the Clarke
//!   port correlation, Gaussian surrogate of the port gains, nested
//!   Gauss–Chebyshev quadrature.
//! * [`analytic::Method::IidAnalytic`]: the same with perfectly correlated
//!   blocks, i.e. `B` independent effective antennas.
//! * [`analytic::Method::MonteCarlo`]: the channel simulated directly.

pub mod analytic;
pub mod config;
pub mod correlation;
pub mod error;
pub mod exec;
pub mod moments;
pub mod params;
pub mod plot;
pub mod presets;
pub mod quadrature;
pub mod scenario;
pub mod simulator;
pub mod special;
pub mod sweep;
pub mod validate;

pub use analytic::{outage_probability, FitSpec, Method, OutageResult};
pub use error::{Error, Result};
pub use params::{link_budget, LinkBudget, SystemConfig};
pub use quadrature::QuadratureSpec;
pub use scenario::Scenario;
pub use simulator::{simulate_op, McEstimate, McSpec};
