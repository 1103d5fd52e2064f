//! Carleman forms, the equilibrium identity, uniform negativity and
//! specular symmetry.

use rand::Rng;

use super::config::ExperimentConfig;
use super::report::{digest, CheckRow, ExperimentReport};
use super::sampling::{boundary_sample, gaussian_vector, par_samples, stream_rng, unit_vector};
use crate::collision::{
    collision_frequency, gain_carleman, gain_direct, negativity_check, specular_symmetry_check, sqrt_mu, FnField,
    CarlemanGrid, FrequencyGrid, Representation,
};
use crate::{Result, Vec3};

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn vec_inputs(v: &Vec3) -> Vec<f64> {
    v.as_slice().to_vec()
}

/// Velocity `i` of the comparison set, uniform in the ball of radius `max_speed`.
fn test_velocity(seed: u64, i: usize, max_speed: f64) -> Vec3 {
    let mut rng = stream_rng(seed, i as u64);
    unit_vector(&mut rng) * (max_speed * rng.random::<f64>().cbrt())
}

/// The two halves of the collision suite, timed separately by callers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionPart {
    /// Carleman forms, direct form, equilibrium identity, grid refinement.
    Carleman,
    /// Uniform negativity and specular symmetry.
    NegativitySymmetry,
}

pub fn run_collision_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_collision_parts(cfg, &[CollisionPart::Carleman, CollisionPart::NegativitySymmetry])
}

pub fn run_collision_parts(cfg: &ExperimentConfig, parts: &[CollisionPart]) -> Result<ExperimentReport> {
    let s = &cfg.suite.collision_suite;
    cfg.kernel.validate()?;
    let mut report = ExperimentReport::new("collision_suite", cfg.seed, super::config_digest(cfg));
    let radius = cfg.kernel.truncation_radius();
    let grid = s.grid.grid(radius);
    report.stat("truncation_radius", radius);
    report.stat("tail_bound", grid.tail_bound());
    for part in parts {
        match part {
            CollisionPart::Carleman => carleman_checks(cfg, &grid, &mut report),
            CollisionPart::NegativitySymmetry => negativity_symmetry_checks(cfg, &grid, &mut report)?,
        }
    }
    report.finalize();
    Ok(report)
}

fn carleman_checks(cfg: &ExperimentConfig, grid: &CarlemanGrid, report: &mut ExperimentReport) {
    let s = &cfg.suite.collision_suite;
    let fgrid = FrequencyGrid::new(grid.radius);
    // A against B on Gaussian data
    let gauss = |u: &Vec3| (-u.norm_squared()).exp();
    let mut worst_ab = 0.0f64;
    for i in 0..s.velocities {
        let v = test_velocity(cfg.seed, i, s.max_speed);
        let a = gain_carleman(&gauss, &gauss, &v, Representation::A, grid);
        let b = gain_carleman(&gauss, &gauss, &v, Representation::B, grid);
        let e = relative(a, b);
        worst_ab = worst_ab.max(e);
        report.samples.push(CheckRow::bound("carleman_ab", digest(&vec_inputs(&v)), e, s.carleman_tolerance));
    }
    report.rows.push(CheckRow::bound("carleman_ab_max", digest(&[cfg.seed as f64, s.velocities as f64]), worst_ab, s.carleman_tolerance));

    // distinct arguments, with the direct (u, ω) form as a third opinion
    let shift = Vec3::new(0.5, -0.25, 0.0);
    let other = move |u: &Vec3| (-0.5 * (u - shift).norm_squared()).exp();
    let mut worst_mixed = 0.0f64;
    let mut worst_direct = 0.0f64;
    for i in 0..s.velocities.min(4) {
        let v = test_velocity(cfg.seed, i, s.max_speed);
        let a = gain_carleman(&gauss, &other, &v, Representation::A, grid);
        let b = gain_carleman(&gauss, &other, &v, Representation::B, grid);
        let d = gain_direct(&gauss, &other, &v, grid);
        worst_mixed = worst_mixed.max(relative(a, b));
        worst_direct = worst_direct.max(relative(a, d));
    }
    let dm = digest(&[cfg.seed as f64, shift.x, shift.y, shift.z]);
    report.rows.push(CheckRow::bound("carleman_ab_mixed", dm.clone(), worst_mixed, s.carleman_tolerance));
    report.rows.push(CheckRow::bound("carleman_direct_mixed", dm, worst_direct, s.carleman_tolerance));

    // equilibrium: Γ_gain(√μ, √μ) = ν(√μ)√μ
    for v in [Vec3::zeros(), Vec3::new(1.5, 0.0, 0.0), Vec3::new(0.0, -0.8, 2.2)] {
        let gain = gain_carleman(&sqrt_mu, &sqrt_mu, &v, Representation::A, grid);
        let loss = collision_frequency(&sqrt_mu, &v, &fgrid) * sqrt_mu(&v);
        report.rows.push(CheckRow::bound(
            format!("equilibrium_{:.1}", v.norm()),
            digest(&vec_inputs(&v)),
            relative(gain, loss),
            s.equilibrium_tolerance,
        ));
    }

    // halving every step changes the gain by less than the comparison tolerance
    let v0 = test_velocity(cfg.seed, 0, s.max_speed);
    let coarse = gain_carleman(&gauss, &gauss, &v0, Representation::A, grid);
    let fine = gain_carleman(&gauss, &gauss, &v0, Representation::A, &grid.refined());
    report.rows.push(CheckRow::bound("grid_refinement", digest(&vec_inputs(&v0)), relative(coarse, fine), s.carleman_tolerance));
}

fn negativity_symmetry_checks(cfg: &ExperimentConfig, grid: &CarlemanGrid, report: &mut ExperimentReport) -> Result<()> {
    let s = &cfg.suite.collision_suite;
    let params = cfg.kernel;
    let obs = cfg.build_obstacle()?;
    let fgrid = FrequencyGrid::new(grid.radius);

    // negativity at ϖs = 0.9·(√20 − 4)c/2
    let ws = 0.9 * (20f64.sqrt() - 4.0) * params.c / 2.0;
    let time = if params.varpi > 0.0 { ws / params.varpi } else { 0.0 };
    report.stat("negativity_time", time);
    let flags = par_samples(s.negativity_samples, |i| {
        let mut rng = stream_rng(cfg.seed ^ 0x6e65_6761, i as u64);
        let v = gaussian_vector(&mut rng) * 2.0;
        let v_bar = v + unit_vector(&mut rng) * rng.random::<f64>().cbrt();
        let zeta = gaussian_vector(&mut rng) * 2.0;
        negativity_check(&params, time, &v, &v_bar, &zeta)
    });
    let mut counts = [[0usize; 2]; 3];
    for f in &flags {
        for (k, flag) in [f.ws_nega, f.ws_nega_bar, f.bf_nega].into_iter().enumerate() {
            if let Some(ok) = flag {
                counts[k][0] += 1;
                counts[k][1] += ok as usize;
            }
        }
    }
    let dn = digest(&[cfg.seed as f64, s.negativity_samples as f64, time]);
    for (k, name) in ["ws_nega", "ws_nega_bar", "bf_nega"].iter().enumerate() {
        report.stat(&format!("{name}_checked"), counts[k][0] as f64);
        report.rows.push(CheckRow::bound(format!("{name}_violations"), dn.clone(), (counts[k][0] - counts[k][1]) as f64, 0.0));
        report.rows.push(CheckRow::at_least(format!("{name}_checked"), dn.clone(), counts[k][0] as f64, s.negativity_samples as f64));
    }

    // specular symmetry with a radial field
    let radial = FnField::new(1.0, |_x: &Vec3, u: &Vec3| (-0.5 * u.norm_squared()).exp() * (1.0 + 0.3 * u.norm_squared()));
    let mut worst = [0.0f64; 2];
    for i in 0..s.symmetry_points {
        let mut rng = stream_rng(cfg.seed ^ 0x7379_6d6d, i as u64);
        let (x, _) = boundary_sample(&obs, &mut rng);
        let v = gaussian_vector(&mut rng);
        let r = specular_symmetry_check(&obs, &radial, &x, &v, grid, &fgrid)?;
        worst[0] = worst[0].max(r.gain);
        worst[1] = worst[1].max(r.loss);
        let d = digest(&[x.x, x.y, x.z, v.x, v.y, v.z]);
        report.samples.push(CheckRow::bound("symmetry_gain", d.clone(), r.gain, s.symmetry_tolerance));
        report.samples.push(CheckRow::bound("symmetry_loss", d, r.loss, s.symmetry_tolerance));
    }
    let ds = digest(&[cfg.seed as f64, s.symmetry_points as f64]);
    report.rows.push(CheckRow::bound("symmetry_gain_max", ds.clone(), worst[0], s.symmetry_tolerance));
    report.rows.push(CheckRow::bound("symmetry_loss_max", ds, worst[1], s.symmetry_tolerance));
    Ok(())
}
