//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//!
//! [obstacle]
//! kind = "ellipsoid"
//! center = [0.0, 0.0, 0.0]
//! semi_axes = [1.0, 2.0, 1.0]
//!
//! [kernel]
//! c = 0.5
//! beta = 0.45
//! varpi = 0.1
//! vartheta = 0.125
//!
//! [suite.jacobian_fd]
//! samples = 500
//! ```
//!
//! Every section and key is optional and falls back to the documented
//! default. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collision::{CarlemanGrid, KernelParams};
use crate::geometry::{ConvexObstacle, ObstacleKind};
use crate::{Error, Result};

/// The verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    GrazingScan,
    JacobianFd,
    HolderTrajectory,
    OdeSuite,
    AveragingSuite,
    IntegrabilitySuite,
    CollisionSuite,
    DuhamelToy,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::GrazingScan,
        Suite::JacobianFd,
        Suite::HolderTrajectory,
        Suite::OdeSuite,
        Suite::AveragingSuite,
        Suite::IntegrabilitySuite,
        Suite::CollisionSuite,
        Suite::DuhamelToy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GrazingScan => "grazing_scan",
            Suite::JacobianFd => "jacobian_fd",
            Suite::HolderTrajectory => "holder_trajectory",
            Suite::OdeSuite => "ode_suite",
            Suite::AveragingSuite => "averaging_suite",
            Suite::IntegrabilitySuite => "integrability_suite",
            Suite::CollisionSuite => "collision_suite",
            Suite::DuhamelToy => "duhamel_toy",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::GrazingScan => "square-root law of the exit point near a tangent ray",
            Suite::JacobianFd => "closed-form flow Jacobians against central differences",
            Suite::HolderTrajectory => "half-Hölder bounds on t_b, X and V with a fitted constant",
            Suite::OdeSuite => "differential inequalities of the specular singularities",
            Suite::AveragingSuite => "averaged inverse singularity against its bound",
            Suite::IntegrabilitySuite => "singular velocity integral: convergence threshold and growth",
            Suite::CollisionSuite => "Carleman forms, equilibrium identity, negativity, symmetry",
            Suite::DuhamelToy => "mild formula along characteristics and a toy Picard sweep",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrazingScanSettings {
    pub k_min: u32,
    pub k_max: u32,
    /// Absolute tolerance on the tangential gap.
    pub tolerance: f64,
    pub slope_tolerance: f64,
}

impl Default for GrazingScanSettings {
    fn default() -> Self {
        GrazingScanSettings { k_min: 4, k_max: 20, tolerance: 1e-8, slope_tolerance: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobianFdSettings {
    pub samples: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Lower bound on `|v̂·n(x_b)|` for sampled states.
    pub min_incidence: f64,
}

impl Default for JacobianFdSettings {
    fn default() -> Self {
        JacobianFdSettings { samples: 500, step: 1e-5, tolerance: 1e-4, min_incidence: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderSettings {
    pub samples: usize,
    /// Share of pairs drawn next to a tangent ray.
    pub grazing_fraction: f64,
    /// Largest `t − s`.
    pub max_time: f64,
    /// Allowed relative drift of fitted constants when samples double.
    pub refinement_tolerance: f64,
    pub exponent_min: f64,
    pub exponent_max: f64,
}

impl Default for HolderSettings {
    fn default() -> Self {
        HolderSettings {
            samples: 4000,
            grazing_fraction: 0.2,
            max_time: 2.0,
            refinement_tolerance: 0.05,
            exponent_min: 0.45,
            exponent_max: 0.55,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSettings {
    /// Admissible `(frame, τ)` samples per mode.
    pub samples: usize,
    pub pass_fraction: f64,
    /// Relative slack of a residual against the local scale.
    pub residual_tolerance: f64,
    /// Boundary samples used to estimate the convexity margin.
    pub margin_samples: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings { samples: 10_000, pass_fraction: 0.99, residual_tolerance: 1e-3, margin_samples: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AveragingSettings {
    /// Frames per mode.
    pub samples: usize,
    /// Gauss–Legendre panels per integration piece.
    pub panels: usize,
    /// `τ*` values per frame, geometric toward `τ₋`.
    pub tau_points: usize,
    pub refinement_tolerance: f64,
}

impl Default for AveragingSettings {
    fn default() -> Self {
        AveragingSettings { samples: 1000, panels: 4, tau_points: 16, refinement_tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrabilitySettings {
    /// Monte Carlo draws at the coarsest level.
    pub samples: usize,
    /// Number of sample doublings after the coarsest level.
    pub doublings: usize,
    pub r_power: f64,
    /// `β` expected to give a convergent integral.
    pub beta_convergent: f64,
    /// `β` expected to give a divergent integral.
    pub beta_divergent: f64,
    pub stability_tolerance: f64,
    /// Speeds `|v|` of the growth sweep.
    pub speeds: Vec<f64>,
    pub slope_slack: f64,
}

impl Default for IntegrabilitySettings {
    fn default() -> Self {
        IntegrabilitySettings {
            samples: 40_000,
            doublings: 3,
            r_power: 0.0,
            beta_convergent: 0.45,
            beta_divergent: 0.55,
            stability_tolerance: 0.05,
            speeds: vec![0.0, 1.0, 2.0, 4.0],
            slope_slack: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionSettings {
    /// Random velocities for the Carleman comparison.
    pub velocities: usize,
    pub max_speed: f64,
    pub carleman_tolerance: f64,
    pub equilibrium_tolerance: f64,
    pub negativity_samples: usize,
    /// Boundary points for the symmetry check.
    pub symmetry_points: usize,
    pub symmetry_tolerance: f64,
    pub grid: GridSettings,
}

impl Default for CollisionSettings {
    fn default() -> Self {
        CollisionSettings {
            velocities: 20,
            max_speed: 2.0,
            carleman_tolerance: 1e-3,
            equilibrium_tolerance: 2e-3,
            negativity_samples: 100_000,
            symmetry_points: 10,
            symmetry_tolerance: 2e-3,
            grid: GridSettings::default(),
        }
    }
}

/// Carleman quadrature sizes; the radius comes from the kernel parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub radial_panels: usize,
    pub polar: usize,
    pub azimuth: usize,
    pub plane_panels: usize,
    pub plane_angular: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        let g = CarlemanGrid::new(1.0);
        GridSettings {
            radial_panels: g.radial_panels,
            polar: g.polar,
            azimuth: g.azimuth,
            plane_panels: g.plane_panels,
            plane_angular: g.plane_angular,
        }
    }
}

impl GridSettings {
    pub fn grid(&self, radius: f64) -> CarlemanGrid {
        CarlemanGrid {
            radius,
            radial_panels: self.radial_panels,
            polar: self.polar,
            azimuth: self.azimuth,
            plane_panels: self.plane_panels,
            plane_angular: self.plane_angular,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        for (k, v) in [
            ("radial_panels", self.radial_panels),
            ("polar", self.polar),
            ("azimuth", self.azimuth),
            ("plane_panels", self.plane_panels),
            ("plane_angular", self.plane_angular),
        ] {
            count(&format!("{what}.{k}"), v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuhamelSettings {
    /// Largest admissible `t`.
    pub horizon: f64,
    /// Gauss–Legendre nodes of the time integrals.
    pub time_nodes: usize,
    /// Phase points at which Picard residuals are measured.
    pub sample_points: usize,
    pub sweeps: usize,
    /// Chebyshev nodes of the radial tables.
    pub radial_nodes: usize,
    /// Chebyshev nodes of the tables in time.
    pub table_time_nodes: usize,
    /// Speeds covered by the tables; sample velocities stay below it.
    pub table_speed: f64,
    /// Residual bound of the equilibrium sweep.
    pub tolerance: f64,
    pub grid: GridSettings,
}

impl Default for DuhamelSettings {
    fn default() -> Self {
        DuhamelSettings {
            horizon: 0.1,
            time_nodes: 16,
            sample_points: 200,
            sweeps: 1,
            radial_nodes: 24,
            table_time_nodes: 6,
            table_speed: 6.0,
            tolerance: 5e-3,
            grid: GridSettings { radial_panels: 2, polar: 6, azimuth: 12, plane_panels: 2, plane_angular: 16 },
        }
    }
}

/// Sizes used by seminorm estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeminormSettings {
    pub pairs: usize,
    pub radial_panels: usize,
    pub polar: usize,
    pub azimuth: usize,
    /// Velocities are drawn with `|v| ≤ max_speed`.
    pub max_speed: f64,
}

impl Default for SeminormSettings {
    fn default() -> Self {
        SeminormSettings { pairs: 32, radial_panels: 16, polar: 12, azimuth: 24, max_speed: 2.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSettings {
    pub grazing_scan: GrazingScanSettings,
    pub jacobian_fd: JacobianFdSettings,
    pub holder_trajectory: HolderSettings,
    pub ode_suite: OdeSettings,
    pub averaging_suite: AveragingSettings,
    pub integrability_suite: IntegrabilitySettings,
    pub collision_suite: CollisionSettings,
    pub duhamel_toy: DuhamelSettings,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Record wall time in the report (makes reports non-reproducible).
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub obstacle: ObstacleKind,
    pub kernel: KernelParams,
    pub suite: SuiteSettings,
    pub seminorm: SeminormSettings,
    pub output: OutputSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 20_240_601,
            obstacle: ObstacleKind::Sphere { center: [0.0; 3], radius: 1.0 },
            kernel: KernelParams::default(),
            suite: SuiteSettings::default(),
            seminorm: SeminormSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

fn count(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Config(format!("{name} = {x} must be positive")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn build_obstacle(&self) -> Result<ConvexObstacle> {
        ConvexObstacle::from_kind(&self.obstacle).map_err(|e| Error::Config(format!("obstacle: {e}")))
    }

    /// Checks counts, tolerances, kernel parameters and the obstacle.
    pub fn validate(&self) -> Result<()> {
        self.build_obstacle()?;
        self.kernel.validate().map_err(|e| Error::Config(format!("kernel: {e}")))?;
        let s = &self.suite;

        let g = &s.grazing_scan;
        if g.k_min > g.k_max || g.k_max > 40 {
            return Err(Error::Config(format!("grazing_scan: need k_min <= k_max <= 40, got {}..{}", g.k_min, g.k_max)));
        }
        if g.k_max - g.k_min < 1 {
            return Err(Error::Config("grazing_scan: slope fit needs at least two scales".into()));
        }
        positive("grazing_scan.tolerance", g.tolerance)?;
        positive("grazing_scan.slope_tolerance", g.slope_tolerance)?;

        let j = &s.jacobian_fd;
        count("jacobian_fd.samples", j.samples)?;
        positive("jacobian_fd.step", j.step)?;
        positive("jacobian_fd.tolerance", j.tolerance)?;
        if !(j.min_incidence > 0.0 && j.min_incidence < 1.0) {
            return Err(Error::Config("jacobian_fd.min_incidence must lie in (0, 1)".into()));
        }

        let h = &s.holder_trajectory;
        count("holder_trajectory.samples", h.samples)?;
        if !(0.0..=1.0).contains(&h.grazing_fraction) {
            return Err(Error::Config("holder_trajectory.grazing_fraction must lie in [0, 1]".into()));
        }
        positive("holder_trajectory.max_time", h.max_time)?;
        positive("holder_trajectory.refinement_tolerance", h.refinement_tolerance)?;
        if !(h.exponent_min < h.exponent_max) {
            return Err(Error::Config("holder_trajectory: exponent_min must be below exponent_max".into()));
        }

        let o = &s.ode_suite;
        count("ode_suite.samples", o.samples)?;
        count("ode_suite.margin_samples", o.margin_samples)?;
        positive("ode_suite.residual_tolerance", o.residual_tolerance)?;
        if !(o.pass_fraction > 0.0 && o.pass_fraction <= 1.0) {
            return Err(Error::Config("ode_suite.pass_fraction must lie in (0, 1]".into()));
        }

        let a = &s.averaging_suite;
        count("averaging_suite.samples", a.samples)?;
        count("averaging_suite.panels", a.panels)?;
        if a.tau_points < 2 {
            return Err(Error::Config("averaging_suite.tau_points must be at least 2".into()));
        }
        positive("averaging_suite.refinement_tolerance", a.refinement_tolerance)?;

        let i = &s.integrability_suite;
        count("integrability_suite.samples", i.samples)?;
        count("integrability_suite.doublings", i.doublings)?;
        positive("integrability_suite.stability_tolerance", i.stability_tolerance)?;
        positive("integrability_suite.slope_slack", i.slope_slack)?;
        for (name, b) in [("beta_convergent", i.beta_convergent), ("beta_divergent", i.beta_divergent)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("integrability_suite.{name} must lie in (0, 1)")));
            }
        }
        if i.speeds.len() < 2 || i.speeds.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("integrability_suite.speeds needs two or more non-negative entries".into()));
        }

        let c = &s.collision_suite;
        count("collision_suite.velocities", c.velocities)?;
        count("collision_suite.negativity_samples", c.negativity_samples)?;
        count("collision_suite.symmetry_points", c.symmetry_points)?;
        positive("collision_suite.max_speed", c.max_speed)?;
        positive("collision_suite.carleman_tolerance", c.carleman_tolerance)?;
        positive("collision_suite.equilibrium_tolerance", c.equilibrium_tolerance)?;
        positive("collision_suite.symmetry_tolerance", c.symmetry_tolerance)?;
        c.grid.validate("collision_suite.grid")?;

        let d = &s.duhamel_toy;
        positive("duhamel_toy.horizon", d.horizon)?;
        count("duhamel_toy.time_nodes", d.time_nodes)?;
        count("duhamel_toy.sample_points", d.sample_points)?;
        count("duhamel_toy.sweeps", d.sweeps)?;
        positive("duhamel_toy.tolerance", d.tolerance)?;
        positive("duhamel_toy.table_speed", d.table_speed)?;
        if d.radial_nodes < 2 || d.table_time_nodes < 2 {
            return Err(Error::Config("duhamel_toy table node counts must be at least 2".into()));
        }
        if d.sweeps > 3 {
            return Err(Error::Config("duhamel_toy.sweeps is at most 3".into()));
        }
        if d.sample_points > 200 {
            return Err(Error::Config("duhamel_toy.sample_points is at most 200".into()));
        }
        d.grid.validate("duhamel_toy.grid")?;

        let m = &self.seminorm;
        count("seminorm.pairs", m.pairs)?;
        count("seminorm.radial_panels", m.radial_panels)?;
        count("seminorm.polar", m.polar)?;
        count("seminorm.azimuth", m.azimuth)?;
        positive("seminorm.max_speed", m.max_speed)?;
        Ok(())
    }
}
