//! Specular symmetry of `Γ_gain` and of the loss term `ν(f)f` at a boundary
//! point.

use super::{collision_frequency, gain_carleman, CarlemanGrid, FrequencyGrid, Representation, VelocityField};
use crate::characteristics::reflection_matrix;
use crate::geometry::ConvexObstacle;
use crate::quad::SphereRule;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SymmetryResiduals {
    /// `|Γ(v) − Γ(R_x v)| / |Γ(v)|`.
    pub gain: f64,
    /// Same for `ν(f)(v) f(v)`.
    pub loss: f64,
    pub gain_value: f64,
    pub loss_value: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares the gain and loss terms at `v` and `R_x v` for an `f` with
/// `f(x, u) = f(x, R_x u)`; the symmetry of `f` is verified on sample
/// velocities first.
pub fn specular_symmetry_check(
    obs: &ConvexObstacle,
    f: &dyn VelocityField,
    x: &Vec3,
    v: &Vec3,
    carleman: &CarlemanGrid,
    frequency: &FrequencyGrid,
) -> Result<SymmetryResiduals> {
    let n = obs.outward_unit_normal(x)?;
    let r = reflection_matrix(&n);
    let probe = SphereRule::new(6, 12, &Vec3::new(0.3, 0.5, 0.8));
    for d in &probe.dirs {
        for scale in [0.5, 1.5, 3.0] {
            let u = d * scale;
            let (a, b) = (f.value(x, &u), f.value(x, &(r * u)));
            if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::Precondition("f is not invariant under the boundary reflection".into()));
            }
        }
    }
    let g = |u: &Vec3| f.value(x, u);
    let rv = r * v;
    let gain_v = gain_carleman(&g, &g, v, Representation::A, carleman);
    let gain_r = gain_carleman(&g, &g, &rv, Representation::A, carleman);
    let loss_v = collision_frequency(&g, v, frequency) * g(v);
    let loss_r = collision_frequency(&g, &rv, frequency) * g(&rv);
    Ok(SymmetryResiduals {
        gain: relative(gain_v, gain_r),
        loss: relative(loss_v, loss_r),
        gain_value: gain_v,
        loss_value: loss_v,
    })
}
