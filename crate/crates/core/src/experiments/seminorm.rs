//! Sampled estimates of the kernel-weighted difference seminorms
//!
//! ```text
//! 𝔥_sp  = sup_{0<|x−x̄|≤1} e^{−ϖ⟨v⟩²s} ∫ 𝐤_c(v, v, ζ) |f(x, v+ζ) − f(x̄, v+ζ)| / |x−x̄|^{2β} dζ
//! 𝔥_vel = sup_{0<|v−v̄|≤1} e^{−ϖ⟨v⟩²s} ∫ 𝐤_c(v, v̄, ζ) |f(x, v+ζ) − f(x, v̄+ζ)| / |v−v̄|^{2β} dζ
//! ```
//!
//! The `ζ` integral runs in spherical coordinates about `ζ = 0`, where the
//! volume element `r²dr` absorbs the `1/|ζ|` of the kernel.

use rand::Rng;

use super::config::ExperimentConfig;
use super::sampling::{gaussian_vector, shell_point, stream_rng, unit_vector};
use crate::collision::{kernel_bold, VelocityField};
use crate::quad::{pairwise_sum, Rule, SphereRule};
use crate::{Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormKind {
    /// Differences in `x` at fixed `v`.
    HSp,
    /// Differences in `v` at fixed `x`.
    HVel,
}

/// What the supremum runs over: position pairs at a fixed velocity, or
/// velocity pairs at a fixed position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeminormTarget {
    Spatial { v: Vec3 },
    Velocity { x: Vec3 },
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SeminormEstimate {
    pub kind: SeminormKind,
    pub beta: f64,
    pub varpi: f64,
    pub value: f64,
    pub samples: usize,
}

struct ZetaRule {
    radial: Rule,
    dirs: SphereRule,
}

impl ZetaRule {
    fn new(cfg: &ExperimentConfig) -> Self {
        let m = &cfg.seminorm;
        ZetaRule {
            radial: Rule::composite(m.radial_panels, 8, 0.0, cfg.kernel.truncation_radius()),
            dirs: SphereRule::new(m.polar, m.azimuth, &Vec3::z()),
        }
    }

    /// `∫ 𝐤_c(v, v̄, ζ) h(ζ) dζ`.
    fn integrate(&self, c: f64, v: &Vec3, v_bar: &Vec3, h: impl Fn(&Vec3) -> f64) -> f64 {
        let mut terms = Vec::with_capacity(self.dirs.dirs.len());
        for (d, wd) in self.dirs.dirs.iter().zip(&self.dirs.weights) {
            let mut radial = Vec::with_capacity(self.radial.len());
            for (r, wr) in self.radial.nodes.iter().zip(&self.radial.weights) {
                let z = d * *r;
                let hz = h(&z);
                if hz == 0.0 {
                    radial.push(0.0);
                    continue;
                }
                // nodes are interior, so ζ ≠ 0
                let k = kernel_bold(c, v, v_bar, &z).expect("non-zero node");
                radial.push(wr * r * r * k * hz);
            }
            terms.push(wd * pairwise_sum(&radial));
        }
        pairwise_sum(&terms)
    }
}

fn time_weight(cfg: &ExperimentConfig, v: &Vec3, s: f64) -> f64 {
    (-cfg.kernel.varpi * (1.0 + v.norm_squared()) * s).exp()
}

/// The spatial quotient for one pair `x, x̄` at velocity `v` and time `s`.
pub fn spatial_quotient(cfg: &ExperimentConfig, f: &dyn VelocityField, v: &Vec3, x: &Vec3, x_bar: &Vec3, s: f64) -> f64 {
    let rule = ZetaRule::new(cfg);
    spatial_with(&rule, cfg, f, v, x, x_bar, s)
}

fn spatial_with(rule: &ZetaRule, cfg: &ExperimentConfig, f: &dyn VelocityField, v: &Vec3, x: &Vec3, x_bar: &Vec3, s: f64) -> f64 {
    let gap = (x - x_bar).norm();
    let integral = rule.integrate(cfg.kernel.c, v, v, |z| {
        let u = v + z;
        (f.value(x, &u) - f.value(x_bar, &u)).abs()
    });
    time_weight(cfg, v, s) * integral / gap.powf(2.0 * cfg.kernel.beta)
}

/// The velocity quotient for one pair `v, v̄` at position `x` and time `s`.
pub fn velocity_quotient(cfg: &ExperimentConfig, f: &dyn VelocityField, x: &Vec3, v: &Vec3, v_bar: &Vec3, s: f64) -> f64 {
    let rule = ZetaRule::new(cfg);
    velocity_with(&rule, cfg, f, x, v, v_bar, s)
}

fn velocity_with(rule: &ZetaRule, cfg: &ExperimentConfig, f: &dyn VelocityField, x: &Vec3, v: &Vec3, v_bar: &Vec3, s: f64) -> f64 {
    let gap = (v - v_bar).norm();
    let integral = rule.integrate(cfg.kernel.c, v, v_bar, |z| (f.value(x, &(v + z)) - f.value(x, &(v_bar + z))).abs());
    time_weight(cfg, v, s) * integral / gap.powf(2.0 * cfg.kernel.beta)
}

/// Gap log-uniform in `[10⁻³, 1]`.
fn gap<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(-3.0 * rng.random::<f64>())
}

/// Largest quotient over `cfg.seminorm.pairs` seeded pairs. Spatial pairs
/// have `x` in the sampling shell and `x̄` outside the obstacle; velocity
/// pairs have `|v| ≤ max_speed`.
pub fn estimate_seminorm(cfg: &ExperimentConfig, f: &dyn VelocityField, target: SeminormTarget, s: f64) -> Result<SeminormEstimate> {
    let obs = cfg.build_obstacle()?;
    let rule = ZetaRule::new(cfg);
    let m = &cfg.seminorm;
    let mut value = 0.0f64;
    for i in 0..m.pairs {
        let mut rng = stream_rng(cfg.seed ^ 0x686e_6f72, i as u64);
        let q = match target {
            SeminormTarget::Spatial { v } => {
                let (x, x_bar) = loop {
                    let x = shell_point(&obs, &mut rng);
                    let x_bar = x + unit_vector(&mut rng) * gap(&mut rng);
                    if obs.xi(&x_bar) <= 0.0 {
                        break (x, x_bar);
                    }
                };
                spatial_with(&rule, cfg, f, &v, &x, &x_bar, s)
            }
            SeminormTarget::Velocity { x } => {
                let v = loop {
                    let v = gaussian_vector(&mut rng);
                    if v.norm() <= m.max_speed {
                        break v;
                    }
                };
                let v_bar = v + unit_vector(&mut rng) * gap(&mut rng);
                velocity_with(&rule, cfg, f, &x, &v, &v_bar, s)
            }
        };
        value = value.max(q);
    }
    let kind = match target {
        SeminormTarget::Spatial { .. } => SeminormKind::HSp,
        SeminormTarget::Velocity { .. } => SeminormKind::HVel,
    };
    Ok(SeminormEstimate { kind, beta: cfg.kernel.beta, varpi: cfg.kernel.varpi, value, samples: m.pairs })
}
