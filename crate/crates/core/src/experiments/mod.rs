//! Seeded verification suites driven by a TOML config, producing JSON
//! reports and optional per-sample CSV.
//!
//! ```
//! use specular::experiments::{run_suite, ExperimentConfig, Suite};
//!
//! let mut cfg = ExperimentConfig::from_toml_str(
//!     "[obstacle]\nkind = \"sphere\"\ncenter = [0.0, 1.0, 0.0]\nradius = 1.0",
//! )
//! .unwrap();
//! cfg.seed = 1;
//! let report = run_suite(Suite::GrazingScan, &cfg).unwrap();
//! assert!(report.passed());
//! ```

mod collision;
mod config;
mod duhamel;
mod grazing;
mod holder;
mod integrability;
mod jacobian;
mod report;
mod seminorm;
mod singular;
pub mod sampling;

pub use collision::{run_collision_parts, run_collision_suite, CollisionPart};
pub use config::{
    AveragingSettings, CollisionSettings, DuhamelSettings, ExperimentConfig, GrazingScanSettings, GridSettings,
    HolderSettings, IntegrabilitySettings, JacobianFdSettings, OdeSettings, OutputSettings, SeminormSettings, Suite,
    SuiteSettings,
};
pub use duhamel::{duhamel_evaluate, duhamel_quadrature, picard_sweep, run_duhamel_toy, DuhamelTerms, DuhamelValue, PhaseField, PicardReport};
pub use grazing::run_grazing_scan;
pub use holder::{exit_time_exponent, holder_measure, run_holder_trajectory, sample_pair, HolderMeasure, HolderPair, HOLDER_CHECKS};
pub use integrability::run_integrability_suite;
pub use jacobian::{jacobian_fd_errors, run_jacobian_fd, sample_state, JacobianState, BLOCKS};
pub use seminorm::{estimate_seminorm, spatial_quotient, velocity_quotient, SeminormEstimate, SeminormKind, SeminormTarget};
pub use singular::{run_averaging_suite, run_ode_suite, sample_frame};
pub use report::{digest, digest_text, CheckRow, ExperimentReport, FittedConstant, Verdict, SCHEMA_ID};

use crate::{Error, Result};

/// Digest of the canonical TOML form of a config.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    digest_text(&cfg.to_toml_string())
}

/// Runs one suite. Timing is only recorded when `cfg.output.timing` is set.
pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let mut report = match suite {
        Suite::GrazingScan => run_grazing_scan(cfg),
        Suite::JacobianFd => run_jacobian_fd(cfg),
        Suite::HolderTrajectory => run_holder_trajectory(cfg),
        Suite::OdeSuite => run_ode_suite(cfg),
        Suite::AveragingSuite => run_averaging_suite(cfg),
        Suite::IntegrabilitySuite => run_integrability_suite(cfg),
        Suite::CollisionSuite => run_collision_suite(cfg),
        Suite::DuhamelToy => run_duhamel_toy(cfg),
    }?;
    if cfg.output.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

/// Process exit code for a suite outcome: 0 pass, 1 bound violation,
/// 2 usage or config error.
pub fn exit_code(outcome: &Result<ExperimentReport>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_)) => 2,
        Err(_) => 1,
    }
}
