//! Shifted positions and velocities, their one-parameter curves, and the
//! grazing parameters `τ₋ < τ₀ < τ₊` along them.
//!
//! Position mode moves the base point along `x(τ) = (1−τ)x̃ + τx` with the
//! velocity fixed; velocity mode keeps `x` and rotates `v(τ)` on the circle of
//! radius `|v+ζ|` from `ṽ+ζ` to `v+ζ`. In both cases the perturbation is
//! orthogonal to the ray (`ẋ·v = 0`, `v̇(τ)·v(τ) = 0`).
//!
//! Along the curve the backward ray meets 𝒪 for `τ ∈ [τ₋, τ₊]`. The exit data
//! are continued smoothly across that whole window, including parameters
//! outside `[0, 1]` whose base point would sit inside 𝒪: `x_b` is always the
//! point where the line, travelled along `−v`, enters 𝒪.

use crate::geometry::ConvexObstacle;
use crate::{unit, Error, Mat3, Result, Vec3};

/// Bisection tolerance for `τ₋`, `τ₀`, `τ₊`.
pub const TAU_TOL: f64 = 1e-10;

/// Number of arc-length samples in a [`CrossSection`].
pub const CURVE_SAMPLES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMode {
    Position,
    Velocity,
}

/// The unperturbed data a frame is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameBase {
    Position { x: Vec3, x_bar: Vec3, v: Vec3 },
    Velocity { x: Vec3, v: Vec3, v_bar: Vec3, zeta: Vec3 },
}

/// Which part of `[0, 1]` produces boundary hits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitCase {
    /// Every `τ ∈ [0, 1]` hits.
    Full,
    /// Hits on `[τ₋, 1]` only.
    Upper,
    /// Hits on `[0, τ₊]` only.
    Lower,
    /// Hits on `[τ₋, τ₊] ⊂ (0, 1)`.
    Interior,
    None,
}

/// `x̄ + ((x−x̄)·v̂)v̂`.
pub fn shift_position(x: &Vec3, x_bar: &Vec3, v: &Vec3) -> Result<Vec3> {
    let gap = x - x_bar;
    let vh = unit(v).ok_or(Error::DegenerateShift("zero velocity"))?;
    if gap.norm() == 0.0 {
        return Err(Error::DegenerateShift("x equals x_bar"));
    }
    let shifted = x_bar + vh * gap.dot(&vh);
    if (x - shifted).norm() <= 1e-12 * gap.norm() {
        return Err(Error::DegenerateShift("x - x_bar is parallel to v"));
    }
    Ok(shifted)
}

/// `ṽ` with `ṽ + ζ = |v+ζ|·unit(v̄+ζ)`.
pub fn shift_velocity(v: &Vec3, v_bar: &Vec3, zeta: &Vec3) -> Result<Vec3> {
    let w = v + zeta;
    let wb = v_bar + zeta;
    let a = unit(&wb).ok_or(Error::DegenerateShift("v_bar + zeta vanishes"))?;
    if w.norm() == 0.0 {
        return Err(Error::DegenerateShift("v + zeta vanishes"));
    }
    Ok(a * w.norm() - zeta)
}

/// Exit data along a frame curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveExit {
    /// Signed distance parameter along `−v`; negative only in the continued
    /// range where the base point lies inside 𝒪.
    pub t_b: f64,
    pub x_b: Vec3,
    pub grad: Vec3,
}

/// Entry point of the line `p − s·dir` into 𝒪. With `backward_only` the root
/// must satisfy `s ≥ 0` on the side of a ray that actually travels toward 𝒪.
fn line_entry(obs: &ConvexObstacle, p: &Vec3, dir: &Vec3, backward_only: bool) -> Option<CurveExit> {
    let m = obs.form();
    let d = p - obs.center();
    let md = m * dir;
    let a = dir.dot(&md);
    let b = d.dot(&md);
    let c0 = d.dot(&(m * d)) - obs.level();
    let disc = b * b - a * c0;
    if disc < 0.0 || a <= 0.0 || (backward_only && b <= 0.0) {
        return None;
    }
    let sq = disc.sqrt();
    let s = if b > 0.0 { c0 / (b + sq) } else { (b - sq) / a };
    let s = if backward_only { s.max(0.0) } else { s };
    let x_b = p - dir * s;
    Some(CurveExit { t_b: s, x_b, grad: obs.gradient(&x_b) })
}

/// A shifted frame with its grazing window.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftFrame {
    pub obstacle: ConvexObstacle,
    pub base: FrameBase,
    /// `x̃` or `ṽ`.
    pub shifted: Vec3,
    pub plane_origin: Vec3,
    pub plane_basis: [Vec3; 2],
    /// Arc angle of the velocity curve; zero in position mode.
    pub theta: f64,
    /// `R_{(v,v̄,ζ)}`; identity in position mode.
    pub rotation: Mat3,
    pub tau_minus: f64,
    pub tau_zero: f64,
    pub tau_plus: f64,
    pub valid: bool,
    pub case: UnitCase,
    speed: f64,
}

impl ShiftFrame {
    pub fn position(obs: &ConvexObstacle, x: &Vec3, x_bar: &Vec3, v: &Vec3) -> Result<ShiftFrame> {
        build_frame(obs, FrameBase::Position { x: *x, x_bar: *x_bar, v: *v })
    }

    pub fn velocity(obs: &ConvexObstacle, x: &Vec3, v: &Vec3, v_bar: &Vec3, zeta: &Vec3) -> Result<ShiftFrame> {
        build_frame(obs, FrameBase::Velocity { x: *x, v: *v, v_bar: *v_bar, zeta: *zeta })
    }

    pub fn mode(&self) -> ShiftMode {
        match self.base {
            FrameBase::Position { .. } => ShiftMode::Position,
            FrameBase::Velocity { .. } => ShiftMode::Velocity,
        }
    }

    /// Base point `x(τ)`.
    pub fn point(&self, tau: f64) -> Vec3 {
        match self.base {
            FrameBase::Position { x, .. } => self.shifted + (x - self.shifted) * tau,
            FrameBase::Velocity { x, .. } => x,
        }
    }

    /// `ẋ = x − x̃` (zero in velocity mode).
    pub fn x_dot(&self) -> Vec3 {
        match self.base {
            FrameBase::Position { x, .. } => x - self.shifted,
            FrameBase::Velocity { .. } => Vec3::zeros(),
        }
    }

    /// Velocity `v(τ)` (with `ζ` included in velocity mode).
    pub fn velocity_at(&self, tau: f64) -> Vec3 {
        match self.base {
            FrameBase::Position { v, .. } => v,
            FrameBase::Velocity { .. } => {
                let p = tau * self.theta;
                self.rotation * Vec3::new(p.cos(), p.sin(), 0.0) * self.speed
            }
        }
    }

    /// `v̇(τ)` (zero in position mode).
    pub fn velocity_dot(&self, tau: f64) -> Vec3 {
        match self.base {
            FrameBase::Position { .. } => Vec3::zeros(),
            FrameBase::Velocity { .. } => {
                let p = tau * self.theta;
                self.rotation * Vec3::new(-p.sin(), p.cos(), 0.0) * (self.speed * self.theta)
            }
        }
    }

    /// Direction of the perturbation at `τ`: `ẋ` or `v̇(τ)`.
    pub fn tangent(&self, tau: f64) -> Vec3 {
        match self.mode() {
            ShiftMode::Position => self.x_dot(),
            ShiftMode::Velocity => self.velocity_dot(tau),
        }
    }

    /// Exit data at `τ`, continued across the whole window `[τ₋, τ₊]`.
    pub fn exit_at(&self, tau: f64) -> Option<CurveExit> {
        let p = self.point(tau);
        let v = self.velocity_at(tau);
        line_entry(&self.obstacle, &p, &v, self.mode() == ShiftMode::Velocity)
    }

    /// Whether the (continued) ray at `τ` meets 𝒪.
    pub fn hits(&self, tau: f64) -> bool {
        self.exit_at(tau).is_some()
    }

    /// Whether a genuine backward exit exists at `τ ∈ [0, 1]`.
    pub fn hits_unit(&self, tau: f64) -> bool {
        match self.case {
            UnitCase::None => false,
            _ => (0.0..=1.0).contains(&tau) && tau >= self.tau_minus && tau <= self.tau_plus,
        }
    }

    /// `ẋ·∇ξ(x_b)` or `v̇(τ)·∇ξ(x_b)`.
    pub fn denominator(&self, tau: f64) -> Option<f64> {
        self.exit_at(tau).map(|e| self.tangent(tau).dot(&e.grad))
    }

    /// `v(τ)·∇ξ(x_b)`.
    pub fn incidence(&self, tau: f64) -> Option<f64> {
        self.exit_at(tau).map(|e| self.velocity_at(tau).dot(&e.grad))
    }

    /// Sub-interval of `[0, 1]` that hits, if any.
    pub fn unit_window(&self) -> Option<(f64, f64)> {
        match self.case {
            UnitCase::None => None,
            UnitCase::Full => Some((0.0, 1.0)),
            UnitCase::Upper => Some((self.tau_minus, 1.0)),
            UnitCase::Lower => Some((0.0, self.tau_plus)),
            UnitCase::Interior => Some((self.tau_minus, self.tau_plus)),
        }
    }

    pub fn cross_section(&self) -> Result<CrossSection> {
        cross_section(&self.obstacle, &self.plane_origin, &self.plane_basis)
    }
}

fn invalid(obs: &ConvexObstacle, base: FrameBase, shifted: Vec3, origin: Vec3, basis: [Vec3; 2], theta: f64, rotation: Mat3, speed: f64) -> ShiftFrame {
    ShiftFrame {
        obstacle: obs.clone(),
        base,
        shifted,
        plane_origin: origin,
        plane_basis: basis,
        theta,
        rotation,
        tau_minus: f64::NAN,
        tau_zero: f64::NAN,
        tau_plus: f64::NAN,
        valid: false,
        case: UnitCase::None,
        speed,
    }
}

/// Bisection between a parameter where `pred` is false and one where it is true.
/// Returns the end on the `true` side.
fn bisect(mut off: f64, mut on: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while (on - off).abs() > TAU_TOL {
        let mid = 0.5 * (on + off);
        if pred(mid) {
            on = mid;
        } else {
            off = mid;
        }
    }
    on
}

/// Builds a frame and locates `τ₋`, `τ₀`, `τ₊`.
///
/// Degenerate shifts are errors; an empty cross-section, a base point inside
/// 𝒪 or a shifted segment that cuts through 𝒪 give `valid = false`.
pub fn build_frame(obs: &ConvexObstacle, base: FrameBase) -> Result<ShiftFrame> {
    let tol = obs.boundary_tolerance();
    let (mut frame, tau_hit, reach) = match base {
        FrameBase::Position { x, x_bar, v } => {
            let shifted = shift_position(&x, &x_bar, &v)?;
            let xd = x - shifted;
            let e1 = v.normalize();
            let e2 = xd.normalize();
            let basis = [e1, e2];
            let frame = invalid(obs, base, shifted, x, basis, 0.0, Mat3::identity(), v.norm());
            if obs.xi(&x) > tol || obs.max_xi_on_segment(&shifted, &x) > tol {
                return Ok(frame);
            }
            let (p, level) = obs.plane_section(&x, &e1, &e2);
            if level <= 0.0 {
                return Ok(frame);
            }
            let tau_h = (p - shifted).dot(&xd) / xd.norm_squared();
            // lines further than the bounding diameter apart cannot both touch 𝒪
            let reach = 2.0 * obs.bounding_radius / xd.norm() + 1.0;
            (frame, tau_h, reach)
        }
        FrameBase::Velocity { x, v, v_bar, zeta } => {
            let shifted = shift_velocity(&v, &v_bar, &zeta)?;
            let w = v + zeta;
            let speed = w.norm();
            let a = (v_bar + zeta).normalize();
            let wh = w / speed;
            let cos = wh.dot(&a).clamp(-1.0, 1.0);
            let axw = a.cross(&w);
            if axw.norm() <= 1e-12 * speed {
                return Err(Error::DegenerateShift("v + zeta is parallel to v_bar + zeta"));
            }
            let theta = cos.acos();
            let sin = theta.sin();
            // columns (a, ŵ, a×w/|a×w|) mapped back through the arc matrix
            let cols = Mat3::from_columns(&[a, wh, axw.normalize()]);
            let arc = Mat3::new(1.0, cos, 0.0, 0.0, sin, 0.0, 0.0, 0.0, 1.0);
            let rotation = cols * arc.try_inverse().ok_or(Error::DegenerateShift("zero arc angle"))?;
            let b = rotation.column(1).into_owned();
            let frame = invalid(obs, base, shifted, x, [a, b], theta, rotation, speed);
            if obs.xi(&x) > tol {
                return Ok(frame);
            }
            let (p, level) = obs.plane_section(&x, &a, &b);
            if level <= 0.0 {
                return Ok(frame);
            }
            let u = x - p;
            let mut ang = u.dot(&b).atan2(u.dot(&a));
            let period = std::f64::consts::TAU;
            while ang - 0.5 * theta > std::f64::consts::PI {
                ang -= period;
            }
            while ang - 0.5 * theta < -std::f64::consts::PI {
                ang += period;
            }
            // half a turn away the ray points away from 𝒪
            (frame, ang / theta, std::f64::consts::PI / theta)
        }
    };
    if !frame.hits(tau_hit) {
        return Ok(frame);
    }
    let tau_minus = bisect(tau_hit - reach, tau_hit, |t| frame.hits(t));
    let tau_plus = bisect(tau_hit + reach, tau_hit, |t| frame.hits(t));
    frame.tau_minus = tau_minus;
    frame.tau_plus = tau_plus;
    // sign of the denominator: positive near τ₋ in position mode, negative in velocity mode
    let lead = frame.denominator(tau_minus).unwrap_or(0.0);
    let trail = frame.denominator(tau_plus).unwrap_or(0.0);
    let lead_sign = if lead != 0.0 { lead.signum() } else { -trail.signum() };
    frame.tau_zero = bisect(tau_plus, tau_minus, |t| {
        frame.denominator(t).map_or(false, |d| d * lead_sign > 0.0)
    });
    frame.valid = true;
    frame.case = classify(&frame);
    Ok(frame)
}

fn classify(frame: &ShiftFrame) -> UnitCase {
    let (lo, hi) = (frame.tau_minus, frame.tau_plus);
    if let FrameBase::Position { .. } = frame.base {
        // the backward ray must travel toward 𝒪, not away from it
        let mid = (lo.max(0.0) + hi.min(1.0)) * 0.5;
        let p = frame.point(mid);
        let v = frame.velocity_at(mid);
        if line_entry(&frame.obstacle, &p, &v, true).is_none() {
            return UnitCase::None;
        }
    }
    if hi < 0.0 || lo > 1.0 {
        UnitCase::None
    } else if lo <= 0.0 && hi >= 1.0 {
        UnitCase::Full
    } else if lo > 0.0 && hi >= 1.0 {
        UnitCase::Upper
    } else if lo <= 0.0 {
        UnitCase::Lower
    } else {
        UnitCase::Interior
    }
}

/// Arc-length samples of `∂𝒪 ∩ S` with projected normals and curvatures.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossSection {
    pub plane_origin: Vec3,
    pub plane_basis: [Vec3; 2],
    pub boundary_curve: Vec<Vec3>,
    /// `n − (n·ν)ν` with `ν` the unit normal of the plane.
    pub projected_normals: Vec<Vec3>,
    pub curvatures: Vec<f64>,
    pub length: f64,
}

impl CrossSection {
    fn extent(xs: impl Iterator<Item = f64>) -> (f64, f64) {
        xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }

    /// Range of `|n_∥|`.
    pub fn normal_range(&self) -> (f64, f64) {
        Self::extent(self.projected_normals.iter().map(|n| n.norm()))
    }

    /// Range of the curvature `|𝔯″|`.
    pub fn curvature_range(&self) -> (f64, f64) {
        Self::extent(self.curvatures.iter().copied())
    }
}

/// Samples `∂𝒪 ∩ {o + αe₁ + βe₂}` at [`CURVE_SAMPLES`] points equally spaced
/// in arc length.
pub fn cross_section(obs: &ConvexObstacle, origin: &Vec3, basis: &[Vec3; 2]) -> Result<CrossSection> {
    let e1 = basis[0].normalize();
    let e2 = (basis[1] - e1 * e1.dot(&basis[1])).normalize();
    let (center, level) = obs.plane_section(origin, &e1, &e2);
    if !(level > obs.boundary_tolerance()) {
        return Err(Error::NoHitWindow);
    }
    let m = obs.form();
    // polar description around the section center
    let point = |phi: f64| {
        let u = e1 * phi.cos() + e2 * phi.sin();
        center + u * (level / u.dot(&(m * u))).sqrt()
    };
    let speed = |phi: f64| {
        let u = e1 * phi.cos() + e2 * phi.sin();
        let du = e2 * phi.cos() - e1 * phi.sin();
        let q = u.dot(&(m * u));
        let r = (level / q).sqrt();
        let dr = -r * du.dot(&(m * u)) / q;
        (du * r + u * dr).norm()
    };
    let fine = 4 * CURVE_SAMPLES;
    let dphi = std::f64::consts::TAU / fine as f64;
    let gl = crate::quad::Rule::gauss_legendre(8, 0.0, dphi);
    let mut cumulative = vec![0.0; fine + 1];
    for i in 0..fine {
        let lo = dphi * i as f64;
        cumulative[i + 1] = cumulative[i] + gl.integrate(|s| speed(lo + s));
    }
    let length = cumulative[fine];
    let step = length / CURVE_SAMPLES as f64;
    let mut curve = Vec::with_capacity(CURVE_SAMPLES);
    for k in 0..CURVE_SAMPLES {
        let target = step * k as f64;
        let i = cumulative.partition_point(|c| *c <= target).clamp(1, fine) - 1;
        let lo = dphi * i as f64;
        let mut phi = lo + dphi * (target - cumulative[i]) / (cumulative[i + 1] - cumulative[i]);
        // Newton on the arc length inside the fine cell
        for _ in 0..4 {
            let arc = cumulative[i] + crate::quad::Rule::gauss_legendre(8, lo, phi).integrate(speed);
            phi -= (arc - target) / speed(phi);
        }
        curve.push(point(phi));
    }
    let nu = e1.cross(&e2);
    let projected_normals = curve
        .iter()
        .map(|p| {
            let g = obs.gradient(p);
            let n = g / g.norm();
            n - nu * n.dot(&nu)
        })
        .collect();
    let curvatures = (0..CURVE_SAMPLES)
        .map(|k| {
            let a = curve[(k + CURVE_SAMPLES - 1) % CURVE_SAMPLES];
            let b = curve[k];
            let c = curve[(k + 1) % CURVE_SAMPLES];
            // circumcircle: κ = 4·area / (|ab||bc||ca|)
            let area2 = (b - a).cross(&(c - a)).norm();
            2.0 * area2 / ((b - a).norm() * (c - b).norm() * (a - c).norm())
        })
        .collect();
    Ok(CrossSection {
        plane_origin: *origin,
        plane_basis: [e1, e2],
        boundary_curve: curve,
        projected_normals,
        curvatures,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn position_shift_examples() {
        let s = shift_position(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(s, Vec3::new(1.0, 0.0, 1.0));
        let s = shift_position(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(1.0, 0.0, 1.0), &Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(s, Vec3::new(1.0, 0.0, 1.0));
        assert!(shift_position(&Vec3::new(0.0, 0.0, 1.0), &Vec3::zeros(), &Vec3::z()).is_err());
    }

    #[test]
    fn velocity_shift_examples() {
        let s = shift_velocity(&Vec3::new(0.0, 2.0, 0.0), &Vec3::x(), &Vec3::zeros()).unwrap();
        assert_eq!(s, Vec3::new(2.0, 0.0, 0.0));
        let v = Vec3::new(0.3, -1.0, 2.0);
        let s = shift_velocity(&v, &v, &Vec3::new(0.1, 0.0, 0.0)).unwrap();
        assert_relative_eq!(s, v, epsilon = 1e-15);
    }

    fn unit_ball() -> ConvexObstacle {
        ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap()
    }

    #[test]
    fn symmetric_position_frame() {
        // x and x̄ mirror images across the axis of the ball along v
        let f = ShiftFrame::position(&unit_ball(), &Vec3::new(3.0, 0.5, 0.0), &Vec3::new(3.0, -0.5, 0.0), &Vec3::x()).unwrap();
        assert!(f.valid);
        assert_relative_eq!(f.tau_minus, -0.5, epsilon = 1e-9);
        assert_relative_eq!(f.tau_plus, 1.5, epsilon = 1e-9);
        assert_relative_eq!(f.tau_zero, 0.5 * (f.tau_minus + f.tau_plus), epsilon = 1e-6);
        assert_eq!(f.case, UnitCase::Full);
    }

    #[test]
    fn rotation_matches_orthonormal_frame() {
        let f = ShiftFrame::velocity(&unit_ball(), &Vec3::new(3.0, 0.0, 0.0), &Vec3::new(1.0, 0.2, 0.1), &Vec3::new(1.0, -0.3, 0.0), &Vec3::new(0.0, 0.0, 0.2)).unwrap();
        let r = f.rotation;
        assert_relative_eq!(r.transpose() * r, Mat3::identity(), epsilon = 1e-12);
        let a = f.plane_basis[0];
        let b = f.plane_basis[1];
        assert_relative_eq!(r.column(2).into_owned(), a.cross(&b), epsilon = 1e-12);
        assert_relative_eq!(f.velocity_at(1.0), Vec3::new(1.0, 0.2, 0.3), epsilon = 1e-12);
        assert_relative_eq!(f.velocity_at(0.0), f.shifted + Vec3::new(0.0, 0.0, 0.2), epsilon = 1e-12);
    }

    #[test]
    fn sections_of_the_sphere() {
        let o = unit_ball();
        let c = cross_section(&o, &Vec3::zeros(), &[Vec3::x(), Vec3::y()]).unwrap();
        let (lo, hi) = c.normal_range();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.length, std::f64::consts::TAU, epsilon = 1e-10);
        let c = cross_section(&o, &Vec3::new(0.0, 0.0, 0.5), &[Vec3::x(), Vec3::y()]).unwrap();
        let (lo, hi) = c.normal_range();
        assert_relative_eq!(lo, 0.75f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(hi, 0.75f64.sqrt(), epsilon = 1e-12);
        let (klo, khi) = c.curvature_range();
        assert_relative_eq!(klo, 1.0 / 0.75f64.sqrt(), epsilon = 1e-9);
        assert_relative_eq!(khi, 1.0 / 0.75f64.sqrt(), epsilon = 1e-9);
        assert!(cross_section(&o, &Vec3::new(0.0, 0.0, 1.5), &[Vec3::x(), Vec3::y()]).is_err());
    }
}
