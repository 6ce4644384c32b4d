//! Energy-coverage analysis for clustered millimeter-wave power-beacon
//! networks: closed-form coverage probabilities evaluated by adaptive
//! quadrature, plus an independent Monte Carlo simulator to check them
//! against. Everything is generic over the scalar type; the aliases at the
//! crate root pin the common entry points to double precision.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod interp;
pub mod montecarlo;
pub mod pointprocess;
pub mod quad;
pub mod real;
pub mod scenario;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use real::{real, Real};

/// Double-precision scenario description.
pub type Scenario = scenario::ScenarioConfig<f64>;
/// Double-precision quadrature controls.
pub type Quadrature = scenario::QuadratureSpec<f64>;
/// Double-precision analytic coverage result.
pub type Report = analytic::CoverageReport<f64>;
/// Double-precision simulated coverage result.
pub type Estimate = montecarlo::CoverageEstimate<f64>;
