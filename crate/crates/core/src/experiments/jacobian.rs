//! Closed-form flow Jacobians against central finite differences.

use rand::Rng;

use super::config::ExperimentConfig;
use super::report::{digest, CheckRow, ExperimentReport};
use super::sampling::{boundary_sample, cone_direction, par_samples, stream_rng};
use crate::characteristics::{backward_exit, flow, flow_jacobians, FlowJacobians};
use crate::geometry::ConvexObstacle;
use crate::{Error, Mat3, Result, Vec3};

/// Names of the nine blocks, in the order of [`jacobian_fd_errors`].
pub const BLOCKS: [&str; 9] = ["dtb_dx", "dtb_dv", "dxb_dx", "dxb_dv", "dn_dx", "dv_dx", "dv_dv", "dx_dx", "dx_dv"];

/// A non-grazing state on the reflected leg: `(t, x, v)` with `s = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianState {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
}

/// Draws a state whose backward ray meets the boundary with `|v̂·n| ≥ min_incidence`.
pub fn sample_state<R: Rng>(obs: &ConvexObstacle, min_incidence: f64, rng: &mut R) -> JacobianState {
    let (p, n_out) = boundary_sample(obs, rng);
    let d = cone_direction(&n_out, min_incidence, rng);
    let speed = rng.random_range(0.5..2.0);
    let t_b = rng.random_range(0.2..2.0);
    let v = d * speed;
    let x = p + v * t_b;
    let t = t_b + rng.random_range(0.5..2.0);
    JacobianState { t, x, v }
}

struct Exit {
    t_b: f64,
    x_b: Vec3,
    n: Vec3,
    xs: Vec3,
    vs: Vec3,
}

fn evaluate(obs: &ConvexObstacle, st: &JacobianState, x: &Vec3, v: &Vec3) -> Result<Exit> {
    let b = backward_exit(obs, x, v)?.ok_or(Error::NoBounce)?;
    let f = flow(obs, st.t, x, v, 0.0)?;
    Ok(Exit { t_b: b.t_b, x_b: b.x_b, n: b.normal(), xs: f.x, vs: f.v })
}

fn rel_err(exact: &[f64], approx: &[f64]) -> f64 {
    let num: f64 = exact.iter().zip(approx).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = exact.iter().map(|a| a * a).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn flat(m: &Mat3) -> Vec<f64> {
    m.iter().copied().collect()
}

/// Frobenius relative errors of the nine blocks against central
/// differences with step `h`, at `s = 0`.
pub fn jacobian_fd_errors(obs: &ConvexObstacle, st: &JacobianState, h: f64) -> Result<[f64; 9]> {
    let j: FlowJacobians = flow_jacobians(obs, st.t, &st.x, &st.v, 0.0)?;
    // columns of the difference quotients, by input coordinate
    let mut fd_tb_x = Vec3::zeros();
    let mut fd_tb_v = Vec3::zeros();
    let mut fd = [Mat3::zeros(); 7];
    for k in 0..3 {
        let e = Vec3::ith(k, h);
        for wrt_v in [false, true] {
            let (xp, vp, xm, vm) =
                if wrt_v { (st.x, st.v + e, st.x, st.v - e) } else { (st.x + e, st.v, st.x - e, st.v) };
            let a = evaluate(obs, st, &xp, &vp)?;
            let b = evaluate(obs, st, &xm, &vm)?;
            let d = |p: f64, q: f64| (p - q) / (2.0 * h);
            let dv = |p: &Vec3, q: &Vec3| (p - q) / (2.0 * h);
            if wrt_v {
                fd_tb_v[k] = d(a.t_b, b.t_b);
                fd[1].set_column(k, &dv(&a.x_b, &b.x_b));
                fd[4].set_column(k, &dv(&a.vs, &b.vs));
                fd[6].set_column(k, &dv(&a.xs, &b.xs));
            } else {
                fd_tb_x[k] = d(a.t_b, b.t_b);
                fd[0].set_column(k, &dv(&a.x_b, &b.x_b));
                fd[2].set_column(k, &dv(&a.n, &b.n));
                fd[3].set_column(k, &dv(&a.vs, &b.vs));
                fd[5].set_column(k, &dv(&a.xs, &b.xs));
            }
        }
    }
    Ok([
        rel_err(j.dtb_dx.as_slice(), fd_tb_x.as_slice()),
        rel_err(j.dtb_dv.as_slice(), fd_tb_v.as_slice()),
        rel_err(&flat(&j.dxb_dx), &flat(&fd[0])),
        rel_err(&flat(&j.dxb_dv), &flat(&fd[1])),
        rel_err(&flat(&j.dn_dx), &flat(&fd[2])),
        rel_err(&flat(&j.dv_dx), &flat(&fd[3])),
        rel_err(&flat(&j.dv_dv), &flat(&fd[4])),
        rel_err(&flat(&j.dx_dx), &flat(&fd[5])),
        rel_err(&flat(&j.dx_dv), &flat(&fd[6])),
    ])
}

pub fn run_jacobian_fd(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.suite.jacobian_fd;
    let obs = cfg.build_obstacle()?;
    let mut report = ExperimentReport::new("jacobian_fd", cfg.seed, super::config_digest(cfg));

    // closed-form anchors on the unit ball
    let ball = ConvexObstacle::sphere(Vec3::zeros(), 1.0)?;
    let j = flow_jacobians(&ball, 2.0, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x(), 0.0)?;
    report.rows.push(CheckRow::within("radial_dtb_dx", digest(&[2.0, 1.0]), (j.dtb_dx - Vec3::x()).norm(), 0.0, 1e-15));
    report.rows.push(CheckRow::within("radial_dtb_dv", digest(&[2.0, 1.0]), (j.dtb_dv + Vec3::x()).norm(), 0.0, 1e-15));

    let results = par_samples(s.samples, |i| {
        let st = sample_state(&obs, s.min_incidence, &mut stream_rng(cfg.seed, i as u64));
        (st, jacobian_fd_errors(&obs, &st, s.step))
    });

    let mut worst: Vec<(f64, String)> = vec![(0.0, String::new()); 9];
    let mut failures = 0usize;
    for (st, errs) in &results {
        let d = digest(&[st.t, st.x.x, st.x.y, st.x.z, st.v.x, st.v.y, st.v.z]);
        match errs {
            Ok(errs) => {
                for (b, e) in errs.iter().enumerate() {
                    if *e >= worst[b].0 {
                        worst[b] = (*e, d.clone());
                    }
                    report.samples.push(CheckRow::bound(BLOCKS[b], d.clone(), *e, s.tolerance));
                }
            }
            Err(e) => {
                failures += 1;
                report.samples.push(CheckRow::inapplicable("state", d, e.to_string()));
            }
        }
    }
    for (name, (e, d)) in BLOCKS.iter().zip(worst) {
        report.rows.push(CheckRow::bound(format!("max_rel_err_{name}"), d, e, s.tolerance));
    }
    report.stat("states", s.samples as f64);
    report.stat("rejected_states", failures as f64);
    report.rows.push(CheckRow::bound("rejected_states", digest(&[s.samples as f64]), failures as f64, 0.0));
    report.finalize();
    Ok(report)
}
