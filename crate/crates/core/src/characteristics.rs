//! Backward exit map, specular reflection and the one-bounce characteristic flow.
//!
//! For `(t, x, v)` the backward trajectory is `x − (t−s)v` until it meets ∂𝒪
//! at time `s = t − t_b`; before that (in backward time) it continues along the
//! reflected velocity `R_{x_b} v`:
//!
//! ```text
//! X(s) = x − (t−s) v                       for s ∈ (t − t_b, t]
//! X(s) = x_b − (t − t_b − s) R_{x_b} v     for s ≤ t − t_b
//! ```

use crate::geometry::ConvexObstacle;
use crate::{Error, Mat3, Result, Vec3};

/// Relative incidence below which a bounce counts as grazing.
pub const GRAZING_THRESHOLD: f64 = 1e-8;

/// A phase-space point with its time stamp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
}

/// Backward exit data of a ray that meets the obstacle.
///
/// A ray that misses is represented by `None` from [`backward_exit`]
/// (`t_b = ∞`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BounceEvent {
    pub t_b: f64,
    pub x_b: Vec3,
    /// `∇ξ(x_b)`.
    pub normal_grad: Vec3,
    /// `v · ∇ξ(x_b)`, non-positive for an entering backward ray.
    pub incidence: f64,
    pub grazing: bool,
}

impl BounceEvent {
    /// `t¹ = t − t_b`.
    pub fn t1(&self, t: f64) -> f64 {
        t - self.t_b
    }

    /// `n(x_b) = ∇ξ(x_b)/|∇ξ(x_b)|`.
    pub fn normal(&self) -> Vec3 {
        self.normal_grad / self.normal_grad.norm()
    }
}

/// Smallest `τ ≥ 0` with `ξ(x − τv) = 0`, if the backward ray meets 𝒪̄.
pub fn backward_exit(obs: &ConvexObstacle, x: &Vec3, v: &Vec3) -> Result<Option<BounceEvent>> {
    let xi = obs.xi(x);
    if xi > obs.boundary_tolerance() {
        return Err(Error::InsideObstacle(xi));
    }
    if v.norm_squared() == 0.0 || !v.norm_squared().is_finite() {
        return Err(Error::ZeroVelocity);
    }
    let a_mat = obs.form();
    let d = x - obs.center();
    let av = a_mat * v;
    // ξ(x − τv) = 0  ⇔  a τ² − 2 b τ + c0 = 0
    let a = v.dot(&av);
    let b = d.dot(&av);
    let c0 = d.dot(&(a_mat * d)) - obs.level();
    let disc = b * b - a * c0;
    if b <= 0.0 || disc < 0.0 {
        return Ok(None);
    }
    // product of the roots is c0/a; this form avoids cancellation in the small root
    let t_b = c0.max(0.0) / (b + disc.sqrt());
    let x_b = x - v * t_b;
    let g = obs.gradient(&x_b);
    let incidence = v.dot(&g);
    let grazing = incidence.abs() <= GRAZING_THRESHOLD * v.norm() * g.norm();
    Ok(Some(BounceEvent { t_b, x_b, normal_grad: g, incidence, grazing }))
}

/// Specular reflection `v − 2(n·v)n` with `n = normal_grad/|normal_grad|`.
pub fn reflect(normal_grad: &Vec3, v: &Vec3) -> Vec3 {
    let n = normal_grad / normal_grad.norm();
    v - n * (2.0 * n.dot(v))
}

/// Matrix of the reflection `R = I − 2 n⊗n`.
pub fn reflection_matrix(normal_grad: &Vec3) -> Mat3 {
    let n = normal_grad / normal_grad.norm();
    Mat3::identity() - 2.0 * n * n.transpose()
}

/// A backward characteristic from `(t, x, v)` with its (at most one) bounce.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Characteristic {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
    pub bounce: Option<BounceEvent>,
    /// `R_{x_b} v` when the ray bounces.
    pub reflected: Option<Vec3>,
}

impl Characteristic {
    pub fn new(obs: &ConvexObstacle, t: f64, x: &Vec3, v: &Vec3) -> Result<Self> {
        let bounce = backward_exit(obs, x, v)?;
        let reflected = match &bounce {
            Some(b) => {
                let rv = reflect(&b.normal_grad, v);
                if let Some(second) = backward_exit(obs, &b.x_b, &rv)? {
                    if second.t_b > obs.boundary_tolerance() {
                        return Err(Error::SecondBounce);
                    }
                }
                Some(rv)
            }
            None => None,
        };
        Ok(Characteristic { t, x: *x, v: *v, bounce, reflected })
    }

    /// `t¹ = t − t_b`, or `−∞` when the ray misses.
    pub fn t1(&self) -> f64 {
        self.bounce.map_or(f64::NEG_INFINITY, |b| b.t1(self.t))
    }

    /// State at time `s ≤ t`. At `s = t − t_b` the free branch is used, so the
    /// reported velocity is the pre-reflection one.
    pub fn at(&self, s: f64) -> Result<PhaseState> {
        if s > self.t {
            return Err(Error::TimeOrder { s, t: self.t });
        }
        match (&self.bounce, &self.reflected) {
            (Some(b), Some(rv)) if s < b.t1(self.t) => Ok(PhaseState {
                t: s,
                x: b.x_b - rv * (b.t1(self.t) - s),
                v: *rv,
            }),
            _ => Ok(PhaseState { t: s, x: self.x - self.v * (self.t - s), v: self.v }),
        }
    }

    /// Velocity on the reflected leg, i.e. the left limit at `s = t − t_b`.
    pub fn post_reflection_velocity(&self) -> Option<Vec3> {
        self.reflected
    }
}

/// `(X(s;t,x,v), V(s;t,x,v))`.
pub fn flow(obs: &ConvexObstacle, t: f64, x: &Vec3, v: &Vec3, s: f64) -> Result<PhaseState> {
    if s > t {
        return Err(Error::TimeOrder { s, t });
    }
    Characteristic::new(obs, t, x, v)?.at(s)
}

/// First derivatives of the exit data and of the reflected leg of the flow.
///
/// Row `i`, column `j` of each matrix is `∂(output)_i/∂(input)_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowJacobians {
    pub dtb_dx: Vec3,
    pub dtb_dv: Vec3,
    pub dxb_dx: Mat3,
    pub dxb_dv: Mat3,
    /// Derivative of `x ↦ n(x_b(x, v))`.
    pub dn_dx: Mat3,
    pub dv_dx: Mat3,
    pub dv_dv: Mat3,
    pub dx_dx: Mat3,
    pub dx_dv: Mat3,
}

/// Closed-form Jacobians on the reflected leg `s ≤ t − t_b`.
pub fn flow_jacobians(obs: &ConvexObstacle, t: f64, x: &Vec3, v: &Vec3, s: f64) -> Result<FlowJacobians> {
    if s > t {
        return Err(Error::TimeOrder { s, t });
    }
    let b = backward_exit(obs, x, v)?.ok_or(Error::NoBounce)?;
    if b.grazing {
        return Err(Error::SingularJacobian(b.incidence));
    }
    let t1 = b.t1(t);
    if s > t1 {
        return Err(Error::FreeLeg { s, t1 });
    }
    let g = b.normal_grad;
    let gn = g.norm();
    let n = g / gn;
    let vn = v.dot(&n);
    let h = obs.hessian();
    let r = reflection_matrix(&g);
    let eye = Mat3::identity();

    let dtb_dx = g / g.dot(v);
    let dtb_dv = -b.t_b * dtb_dx;
    let p = eye - v * n.transpose() / vn;
    let dxb_dx = p;
    let dxb_dv = -b.t_b * p;
    let dn_dx = (eye - n * n.transpose()) * h * p / gn;
    let core = (vn * r + n * v.transpose()) * h * p / gn;
    let dv_dx = -2.0 * core;
    let dv_dv = r + 2.0 * b.t_b * core;
    let lag = t1 - s;
    let dx_dx = r - lag * dv_dx;
    let dx_dv = -b.t_b * r - lag * dv_dv;
    Ok(FlowJacobians { dtb_dx, dtb_dv, dxb_dx, dxb_dv, dn_dx, dv_dx, dv_dv, dx_dx, dx_dv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_ball() -> ConvexObstacle {
        ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap()
    }

    #[test]
    fn head_on_exit() {
        let b = backward_exit(&unit_ball(), &Vec3::new(2.0, 0.0, 0.0), &Vec3::new(1.0, 0.0, 0.0))
            .unwrap()
            .unwrap();
        assert_eq!(b.t_b, 1.0);
        assert_eq!(b.x_b, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(b.incidence, -2.0);
        assert!(!b.grazing);
    }

    #[test]
    fn missing_ray() {
        let r = backward_exit(&unit_ball(), &Vec3::new(2.0, 0.0, 0.0), &Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn grazing_circle_example() {
        let o = ConvexObstacle::sphere(Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
        let eps = 1e-4f64;
        let b = backward_exit(&o, &Vec3::new(1.0, eps, 0.0), &Vec3::x()).unwrap().unwrap();
        let gap = (2.0 * eps - eps * eps).sqrt();
        assert_relative_eq!(b.t_b, 1.0 - gap, epsilon = 1e-14);
        assert_relative_eq!(b.x_b, Vec3::new(gap, eps, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn exact_tangency_is_grazing() {
        let o = ConvexObstacle::sphere(Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
        let b = backward_exit(&o, &Vec3::new(1.0, 0.0, 0.0), &Vec3::x()).unwrap().unwrap();
        assert_eq!(b.x_b, Vec3::zeros());
        assert!(b.grazing);
    }

    #[test]
    fn rejects_bad_input() {
        let o = unit_ball();
        assert!(matches!(backward_exit(&o, &Vec3::zeros(), &Vec3::x()), Err(Error::InsideObstacle(_))));
        assert!(matches!(
            backward_exit(&o, &Vec3::new(2.0, 0.0, 0.0), &Vec3::zeros()),
            Err(Error::ZeroVelocity)
        ));
        assert!(matches!(
            flow(&o, 1.0, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x(), 2.0),
            Err(Error::TimeOrder { .. })
        ));
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(reflect(&Vec3::y(), &Vec3::new(1.0, -1.0, 0.0)), Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(reflect(&Vec3::new(-1.0, 0.0, 0.0), &Vec3::new(3.0, 4.0, 0.0)), Vec3::new(-3.0, 4.0, 0.0));
        assert_eq!(reflect(&Vec3::new(0.0, 0.0, 5.0), &Vec3::new(1.0, 2.0, 0.0)), Vec3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn retroreflection_flow() {
        let o = unit_ball();
        let st = flow(&o, 2.0, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x(), 0.0).unwrap();
        assert_eq!(st.x, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(st.v, Vec3::new(-1.0, 0.0, 0.0));
        let c = Characteristic::new(&o, 2.0, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x()).unwrap();
        let at = c.at(1.0).unwrap();
        assert_eq!(at.x, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(at.v, Vec3::x());
        assert_eq!(c.post_reflection_velocity(), Some(Vec3::new(-1.0, 0.0, 0.0)));
    }

    #[test]
    fn free_transport_when_missing() {
        let o = unit_ball();
        let x = Vec3::new(2.0, 0.0, 0.0);
        let v = Vec3::new(0.0, 0.3, 1.0);
        for s in [-3.0, 0.0, 0.7] {
            let st = flow(&o, 1.0, &x, &v, s).unwrap();
            assert_eq!(st.x, x - v * (1.0 - s));
            assert_eq!(st.v, v);
        }
    }

    #[test]
    fn radial_jacobian_example() {
        let j = flow_jacobians(&unit_ball(), 3.0, &Vec3::new(2.0, 0.0, 0.0), &Vec3::x(), 0.0).unwrap();
        assert_eq!(j.dtb_dx, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(j.dtb_dv, Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn grazing_jacobian_is_rejected() {
        let o = ConvexObstacle::sphere(Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            flow_jacobians(&o, 3.0, &Vec3::new(1.0, 0.0, 0.0), &Vec3::x(), 0.0),
            Err(Error::SingularJacobian(_))
        ));
    }
}
