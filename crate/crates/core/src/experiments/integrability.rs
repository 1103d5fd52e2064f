//! Convergence threshold and growth rate of the singular velocity integral
//! at a boundary point.

use super::config::ExperimentConfig;
use super::report::{digest, CheckRow, ExperimentReport, FittedConstant};
use super::sampling::log_log_slope;
use crate::collision::{singular_velocity_integral, unit_sphere_rest_value, IntegralMode, KernelParams};
use crate::geometry::{ConvexObstacle, ObstacleKind};
use crate::{any_orthogonal, japanese, Result, Vec3};

/// Estimates at `samples·2ᵏ` draws for `k = 0..=doublings`.
fn doubling_series(obs: &ConvexObstacle, params: &KernelParams, x: &Vec3, v: &Vec3, r: f64, samples: usize, doublings: usize, seed: u64) -> Result<Vec<f64>> {
    (0..=doublings)
        .map(|k| singular_velocity_integral(obs, params, x, v, r, IntegralMode::Plain, samples << k, seed).map(|e| e.mean))
        .collect()
}

/// Largest relative change between consecutive estimates.
fn max_relative_change(series: &[f64]) -> f64 {
    series.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max)
}

pub fn run_integrability_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.suite.integrability_suite;
    let obs = cfg.build_obstacle()?;
    let mut report = ExperimentReport::new("integrability_suite", cfg.seed, super::config_digest(cfg));
    let x = obs.boundary_point(&Vec3::x());
    let n_out = -obs.outward_unit_normal(&x)?;
    let at = |beta: f64| KernelParams { beta, ..cfg.kernel };
    let rest = Vec3::zeros();

    let conv = doubling_series(&obs, &at(s.beta_convergent), &x, &rest, s.r_power, s.samples, s.doublings, cfg.seed)?;
    let div = doubling_series(&obs, &at(s.beta_divergent), &x, &rest, s.r_power, s.samples, s.doublings, cfg.seed)?;
    for (name, series) in [("convergent", &conv), ("divergent", &div)] {
        for (k, v) in series.iter().enumerate() {
            report.stat(&format!("{name}_estimate_{k}"), *v);
        }
    }
    let dc = digest(&[s.beta_convergent, s.r_power, s.samples as f64]);
    let dd = digest(&[s.beta_divergent, s.r_power, s.samples as f64]);
    report.rows.push(CheckRow::bound("convergent_stability", dc.clone(), max_relative_change(&conv), s.stability_tolerance));
    report.rows.push(
        CheckRow::at_least("divergent_instability", dd, max_relative_change(&div), s.stability_tolerance)
            .with_note("estimates keep moving when the integral diverges"),
    );
    let last = conv.len() - 1;
    report.fitted.push(FittedConstant::new("convergent_integral", conv[last - 1], conv[last], s.stability_tolerance));

    // closed form on the unit sphere at rest with r = 0
    if let ObstacleKind::Sphere { radius, .. } = cfg.obstacle {
        if radius == 1.0 && s.r_power == 0.0 {
            let exact = unit_sphere_rest_value(cfg.kernel.c, s.beta_convergent);
            report.rows.push(CheckRow::within("unit_sphere_closed_form", dc, conv[last], exact, s.stability_tolerance * exact));
        }
    }

    // growth in ⟨v⟩ along the normal and a tangent direction
    let tangent = any_orthogonal(&n_out);
    let limit = s.r_power + 1.0 - 2.0 * s.beta_convergent + s.slope_slack;
    let top = s.samples << s.doublings;
    for (name, dir) in [("outward", n_out), ("inward", -n_out), ("tangent", tangent)] {
        let mut jv = Vec::with_capacity(s.speeds.len());
        let mut est = Vec::with_capacity(s.speeds.len());
        for sp in &s.speeds {
            let v = dir * *sp;
            let e = singular_velocity_integral(&obs, &at(s.beta_convergent), &x, &v, s.r_power, IntegralMode::Plain, top, cfg.seed)?;
            jv.push(japanese(&v));
            est.push(e.mean);
            report.stat(&format!("growth_{name}_{sp}"), e.mean);
        }
        let slope = log_log_slope(&jv, &est);
        report.rows.push(CheckRow::bound(format!("growth_slope_{name}"), digest(&s.speeds), slope, limit));
    }
    report.finalize();
    Ok(report)
}
