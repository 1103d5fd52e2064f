//! Exit points of a ray tangent to a circle and of its parallel shifts.
//!
//! With the sphere of radius 1 about `(0, 1, 0)` and `v = (1, 0, 0)`, the ray
//! from `(1, 0, 0)` touches the sphere at the origin, while the ray from
//! `(1, ε, 0)` enters at `(√(2ε−ε²), ε, 0)`. The exit point therefore moves by
//! `√(2ε)` for a shift `ε`.

use super::config::ExperimentConfig;
use super::report::{digest, CheckRow, ExperimentReport, FittedConstant};
use super::sampling::log_log_slope;
use crate::characteristics::backward_exit;
use crate::geometry::ObstacleKind;
use crate::{Error, Result, Vec3};

fn require_embedding(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.obstacle {
        ObstacleKind::Sphere { center, radius } if center == [0.0, 1.0, 0.0] && radius == 1.0 => Ok(()),
        _ => Err(Error::Config("grazing_scan needs the sphere with center [0, 1, 0] and radius 1".into())),
    }
}

/// Exit point of the backward ray from `(1, ε, 0)` along `−(1, 0, 0)`.
fn exit_point(cfg: &ExperimentConfig, eps: f64) -> Result<Vec3> {
    let obs = cfg.build_obstacle()?;
    let hit = backward_exit(&obs, &Vec3::new(1.0, eps, 0.0), &Vec3::x())?.ok_or(Error::NoBounce)?;
    Ok(hit.x_b)
}

fn displacement_slope(cfg: &ExperimentConfig, ks: &[f64], base: &Vec3) -> Result<f64> {
    let mut eps = Vec::with_capacity(ks.len());
    let mut disp = Vec::with_capacity(ks.len());
    for k in ks {
        let e = 2f64.powf(-k);
        eps.push(e);
        disp.push((exit_point(cfg, e)? - base).norm());
    }
    Ok(log_log_slope(&eps, &disp))
}

pub fn run_grazing_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    require_embedding(cfg)?;
    let s = &cfg.suite.grazing_scan;
    let mut report = ExperimentReport::new("grazing_scan", cfg.seed, super::config_digest(cfg));

    let base = exit_point(cfg, 0.0)?;
    report.rows.push(CheckRow::within("tangency_point", digest(&[0.0]), base.norm(), 0.0, 0.0));

    for k in s.k_min..=s.k_max {
        let eps = 2f64.powi(-(k as i32));
        let xb = exit_point(cfg, eps)?;
        let expected = (2.0 * eps - eps * eps).sqrt();
        let gap = (xb.x - base.x).abs();
        report.rows.push(CheckRow::within(format!("tangential_gap_k{k}"), digest(&[eps]), gap, expected, s.tolerance));
        report.samples.push(
            CheckRow::bound(format!("displacement_k{k}"), digest(&[eps]), (xb - base).norm(), (2.0 * eps).sqrt())
                .optional(),
        );
    }

    let coarse: Vec<f64> = (s.k_min..=s.k_max).map(f64::from).collect();
    let fine: Vec<f64> = (0..=2 * (s.k_max - s.k_min)).map(|i| s.k_min as f64 + 0.5 * i as f64).collect();
    let slope = displacement_slope(cfg, &coarse, &base)?;
    let refined = displacement_slope(cfg, &fine, &base)?;
    report.stat("slope", slope);
    report.rows.push(CheckRow::within("displacement_slope", digest(&coarse), slope, 0.5, s.slope_tolerance));
    report.fitted.push(
        FittedConstant::new("displacement_exponent", slope, refined, s.slope_tolerance)
            .in_range(0.5 - s.slope_tolerance, 0.5 + s.slope_tolerance),
    );
    report.finalize();
    Ok(report)
}
