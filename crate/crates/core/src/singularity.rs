//! Specular singularities along shift frames, their differential
//! inequalities, averaged inverse singularities and the difference-quotient
//! bounds built on them.
//!
//! With `g(τ) = ∇ξ(x_b)` along the frame curve:
//!
//! ```text
//! 𝔖_sp(τ)  = −g·v / |ẋ̂·g|
//! 𝔖_vel(τ) = −g·v(τ) / (t_b |v̇̂(τ)·g|)
//! 𝔖̃_vel(τ) = t_b/|v̇(τ)| · 𝔖_vel(τ) = −g·v(τ) / |v̇(τ)·g|
//! ```
//!
//! All three vanish at `τ₋`, `τ₊` and blow up at `τ₀`.

use crate::characteristics::Characteristic;
use crate::quad::Rule;
use crate::shiftframe::{ShiftFrame, ShiftMode, UnitCase, TAU_TOL};
use crate::{Error, Result};

/// A singularity value; `Infinite` marks the blow-up at `τ₀` and is never
/// used in arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingValue {
    Finite(f64),
    Infinite,
}

impl SingValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            SingValue::Finite(v) => Some(v),
            SingValue::Infinite => None,
        }
    }

    /// `1/𝔖`, zero at the blow-up.
    pub fn reciprocal(self) -> f64 {
        match self {
            SingValue::Finite(v) => 1.0 / v,
            SingValue::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, SingValue::Infinite)
    }
}

struct Raw {
    /// `−v(τ)·g`
    num: f64,
    /// `ẋ·g` or `v̇(τ)·g`
    den: f64,
    tangent_norm: f64,
    t_b: f64,
}

fn raw(frame: &ShiftFrame, tau: f64) -> Result<Raw> {
    if !frame.valid {
        return Err(Error::NoHitWindow);
    }
    let e = frame.exit_at(tau).ok_or(Error::NoBounce)?;
    let tangent = frame.tangent(tau);
    Ok(Raw {
        num: -frame.velocity_at(tau).dot(&e.grad),
        den: tangent.dot(&e.grad),
        tangent_norm: tangent.norm(),
        t_b: e.t_b,
    })
}

fn at_blow_up(frame: &ShiftFrame, tau: f64, r: &Raw) -> bool {
    r.den == 0.0 || (tau - frame.tau_zero).abs() <= TAU_TOL
}

/// `𝔖_sp(τ)` for a position frame.
pub fn singularity_sp(frame: &ShiftFrame, tau: f64) -> Result<SingValue> {
    if frame.mode() != ShiftMode::Position {
        return Err(Error::Precondition("position frame required".into()));
    }
    let r = raw(frame, tau)?;
    if at_blow_up(frame, tau, &r) {
        return Ok(SingValue::Infinite);
    }
    Ok(SingValue::Finite(r.num * r.tangent_norm / r.den.abs()))
}

/// `(𝔖_vel(τ), 𝔖̃_vel(τ))` for a velocity frame.
pub fn singularity_vel(frame: &ShiftFrame, tau: f64) -> Result<(SingValue, SingValue)> {
    if frame.mode() != ShiftMode::Velocity {
        return Err(Error::Precondition("velocity frame required".into()));
    }
    let r = raw(frame, tau)?;
    if at_blow_up(frame, tau, &r) {
        return Ok((SingValue::Infinite, SingValue::Infinite));
    }
    let tilde = r.num / r.den.abs();
    Ok((SingValue::Finite(tilde * r.tangent_norm / r.t_b), SingValue::Finite(tilde)))
}

/// The singularity whose reciprocal is averaged: `𝔖_sp` or `𝔖_vel`.
pub fn singularity(frame: &ShiftFrame, tau: f64) -> Result<SingValue> {
    match frame.mode() {
        ShiftMode::Position => singularity_sp(frame, tau),
        ShiftMode::Velocity => singularity_vel(frame, tau).map(|p| p.0),
    }
}

/// Samples of the singularity on a uniform grid over `[τ₋, τ₊]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityProfile {
    pub tau_grid: Vec<f64>,
    pub values: Vec<SingValue>,
    /// `𝔖̃_vel`; empty in position mode.
    pub tilde_values: Vec<SingValue>,
    pub denominators: Vec<f64>,
    pub tb_values: Vec<f64>,
}

pub fn profile(frame: &ShiftFrame, n: usize) -> Result<SingularityProfile> {
    if !frame.valid {
        return Err(Error::NoHitWindow);
    }
    let n = n.max(2);
    let (lo, hi) = (frame.tau_minus, frame.tau_plus);
    let mut out = SingularityProfile {
        tau_grid: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        tilde_values: Vec::new(),
        denominators: Vec::with_capacity(n),
        tb_values: Vec::with_capacity(n),
    };
    for i in 0..n {
        let tau = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let r = raw(frame, tau)?;
        out.tau_grid.push(tau);
        out.denominators.push(r.den);
        out.tb_values.push(r.t_b);
        match frame.mode() {
            ShiftMode::Position => out.values.push(singularity_sp(frame, tau)?),
            ShiftMode::Velocity => {
                let (s, st) = singularity_vel(frame, tau)?;
                out.values.push(s);
                out.tilde_values.push(st);
            }
        }
    }
    Ok(out)
}

/// One finite-difference check of the singularity ODE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeResidual {
    pub tau: f64,
    /// `+1` on `(τ₋, τ₀)`, `−1` on `(τ₀, τ₊)` where the singularity decreases.
    pub orientation: f64,
    /// Oriented central difference of `𝔖_sp` or `𝔖̃_vel`.
    pub derivative: f64,
    /// The lower bound as stated for the inequality.
    pub bound: f64,
    /// Sharp lower bound from direct differentiation (velocity mode keeps the
    /// `θ²` terms the stated bound leaves out; equals `bound` in position mode).
    pub sharp_bound: f64,
    pub residual: f64,
}

impl OdeResidual {
    /// Residual non-negative up to `rel` of the local scale.
    pub fn passes(&self, rel: f64) -> bool {
        self.residual >= -rel * (self.derivative.abs() + self.bound.abs())
    }

    pub fn passes_sharp(&self, rel: f64) -> bool {
        self.derivative - self.sharp_bound >= -rel * (self.derivative.abs() + self.sharp_bound.abs())
    }
}

/// Relative exclusion half-width around `τ₋`, `τ₀`, `τ₊`.
pub const ODE_EXCLUSION: f64 = 1e-3;

fn ode_value(frame: &ShiftFrame, tau: f64) -> Result<f64> {
    let v = match frame.mode() {
        ShiftMode::Position => singularity_sp(frame, tau)?,
        ShiftMode::Velocity => singularity_vel(frame, tau)?.1,
    };
    v.finite().ok_or(Error::Excluded(tau))
}

/// Checks the lower bound on `d𝔖_sp/dτ` (position) or `d𝔖̃_vel/dτ`
/// (velocity) at `τ` with central step `h`:
///
/// ```text
/// d𝔖_sp/dτ  ≥ (1/𝔖_sp) θ_Ω |ẋ|²/|ẋ·g| (|v|² + 𝔖_sp²)
/// d𝔖̃_vel/dτ ≥ 1 + θ_Ω t_b |v|² (1 + 𝔖̃²) / |v·g|
/// ```
pub fn ode_residual(frame: &ShiftFrame, tau: f64, h: f64, theta_omega: f64) -> Result<OdeResidual> {
    if !frame.valid {
        return Err(Error::NoHitWindow);
    }
    let width = frame.tau_plus - frame.tau_minus;
    let excl = ODE_EXCLUSION * width;
    let near = |c: f64| (tau - c).abs() < excl + h;
    if near(frame.tau_minus) || near(frame.tau_zero) || near(frame.tau_plus) || tau < frame.tau_minus || tau > frame.tau_plus {
        return Err(Error::Excluded(tau));
    }
    let orientation = if tau < frame.tau_zero { 1.0 } else { -1.0 };
    let derivative = orientation * (ode_value(frame, tau + h)? - ode_value(frame, tau - h)?) / (2.0 * h);
    let r = raw(frame, tau)?;
    let s = ode_value(frame, tau)?;
    let v = frame.velocity_at(tau);
    let (bound, sharp_bound) = match frame.mode() {
        ShiftMode::Position => {
            let xd2 = r.tangent_norm * r.tangent_norm;
            let b = theta_omega * xd2 / r.den.abs() * (v.norm_squared() + s * s) / s;
            (b, b)
        }
        ShiftMode::Velocity => {
            let k = theta_omega * r.t_b * v.norm_squared() / r.num.abs();
            let th2 = frame.theta * frame.theta;
            (1.0 + k * (1.0 + s * s), (1.0 + k) * (1.0 + th2 * s * s))
        }
    };
    Ok(OdeResidual { tau, orientation, derivative, bound, sharp_bound, residual: derivative - bound })
}

fn inverse(frame: &ShiftFrame, tau: f64) -> Result<f64> {
    Ok(singularity(frame, tau)?.reciprocal())
}

/// `∫_a^b dτ/𝔖` for `[a, b] ⊂ [τ₋, τ₊]`, split at `τ₀`. Pieces that touch
/// `τ₋` or `τ₊` use `τ = τ₋ + u²` or `τ = τ₊ − u²` to absorb the inverse
/// square-root endpoint behaviour. `panels` 8-point Gauss–Legendre panels are
/// used per piece.
pub fn integrate_inverse(frame: &ShiftFrame, a: f64, b: f64, panels: usize) -> Result<f64> {
    if !frame.valid {
        return Err(Error::NoHitWindow);
    }
    let (lo, hi) = (frame.tau_minus, frame.tau_plus);
    let a = a.max(lo);
    let b = b.min(hi);
    if b <= a {
        return Ok(0.0);
    }
    let edge = 4.0 * TAU_TOL;
    let mut pieces = Vec::with_capacity(2);
    if a < frame.tau_zero && b > frame.tau_zero {
        pieces.push((a, frame.tau_zero));
        pieces.push((frame.tau_zero, b));
    } else {
        pieces.push((a, b));
    }
    let mut total = 0.0;
    for (p, q) in pieces {
        let value = if p - lo <= edge {
            let rule = Rule::composite(panels, 8, 0.0, (q - p).sqrt());
            let mut err = None;
            let v = rule.integrate(|u| match inverse(frame, p + u * u) {
                Ok(f) => 2.0 * u * f,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            err.map_or(Ok(v), Err)?
        } else if hi - q <= edge {
            let rule = Rule::composite(panels, 8, 0.0, (q - p).sqrt());
            let mut err = None;
            let v = rule.integrate(|u| match inverse(frame, q - u * u) {
                Ok(f) => 2.0 * u * f,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            err.map_or(Ok(v), Err)?
        } else {
            let rule = Rule::composite(panels, 8, p, q);
            let mut err = None;
            let v = rule.integrate(|t| match inverse(frame, t) {
                Ok(f) => f,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            err.map_or(Ok(v), Err)?
        };
        total += value;
    }
    if !(total > 0.0) {
        return Err(Error::VanishingSingularity);
    }
    Ok(total)
}

/// Average of `1/𝔖` against the right-hand side of the averaging bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AverageBound {
    pub integral: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `min_τ |v(τ)| t_b(x, v(τ))` over `[τ₋, τ₊]`; `t_b` is smallest at `τ₀`.
pub fn min_speed_tb(frame: &ShiftFrame) -> Result<f64> {
    let speed = frame.velocity_at(frame.tau_zero).norm();
    let mut m = raw(frame, frame.tau_zero)?.t_b;
    for i in 0..=32 {
        let tau = frame.tau_minus + (frame.tau_plus - frame.tau_minus) * i as f64 / 32.0;
        if let Ok(r) = raw(frame, tau) {
            m = m.min(r.t_b);
        }
    }
    Ok(speed * m)
}

/// `∫_{τ₋}^{τ_*} dτ/𝔖` and its ratio to
///
/// ```text
/// (τ_* − τ₋)/|v·∇ξ(x_b(τ_*))|                                (position)
/// (τ_* − τ₋)/|v(τ_*)·∇ξ(x_b(τ_*))| · (1 + min|v|t_b)/|v|     (velocity)
/// ```
pub fn average_inverse_singularity(frame: &ShiftFrame, tau_star: f64, panels: usize) -> Result<AverageBound> {
    if !frame.valid || !(tau_star > frame.tau_minus && tau_star <= frame.tau_plus) {
        return Err(Error::NoHitWindow);
    }
    let integral = integrate_inverse(frame, frame.tau_minus, tau_star, panels)?;
    let r = raw(frame, tau_star)?;
    let mut rhs = (tau_star - frame.tau_minus) / r.num.abs();
    if frame.mode() == ShiftMode::Velocity {
        let speed = frame.velocity_at(tau_star).norm();
        rhs *= (1.0 + min_speed_tb(frame)?) / speed;
    }
    Ok(AverageBound { integral, rhs, ratio: integral / rhs })
}

/// Indicator-weighted average `𝒯_sp` or `𝒯_vel` over the unit interval.
///
/// The three branches are: hits on all of `[0, 1]`; hits on `[τ₋, 1]`; hits on
/// `[0, τ]` for the upper transition `τ = τ₊ < 1`. A window strictly inside
/// `(0, 1)` fires none of them. In velocity mode a branch also needs
/// `min t_b ≤ t − s` on its window.
pub fn averaged_t(frame: &ShiftFrame, t: f64, s: f64, panels: usize) -> Result<f64> {
    let (a, b) = match frame.case {
        UnitCase::Full | UnitCase::Upper | UnitCase::Lower => frame.unit_window().expect("hit window"),
        UnitCase::Interior | UnitCase::None => return Ok(0.0),
    };
    if frame.mode() == ShiftMode::Velocity {
        let mut m = f64::INFINITY;
        for tau in [a, b, frame.tau_zero] {
            if tau >= a && tau <= b {
                m = m.min(raw(frame, tau)?.t_b);
            }
        }
        for i in 0..=32 {
            m = m.min(raw(frame, a + (b - a) * i as f64 / 32.0)?.t_b);
        }
        if m > t - s {
            return Ok(0.0);
        }
    }
    Ok(integrate_inverse(frame, a, b, panels)? / (b - a))
}

/// One measured difference-quotient bound.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct QuotientRow {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub applicable: bool,
}

impl QuotientRow {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        QuotientRow { name, lhs, rhs, ratio, applicable: true }
    }

    fn inapplicable(name: &'static str) -> Self {
        QuotientRow { name, lhs: f64::NAN, rhs: f64::NAN, ratio: f64::NAN, applicable: false }
    }
}

/// Measures the quotient bounds for the pair of trajectories at the frame
/// ends (`τ = 1` and `τ = 0`), at times `s ≤ t`. The returned rows are, in
/// order, the `V` quotient, the `X` quotient and the `t¹` window bound.
pub fn quotient_bounds(frame: &ShiftFrame, t: f64, s: f64, panels: usize) -> Result<[QuotientRow; 3]> {
    let obs = &frame.obstacle;
    let (p1, w1) = (frame.point(1.0), frame.velocity_at(1.0));
    let (p0, w0) = (frame.point(0.0), frame.velocity_at(0.0));
    let c1 = Characteristic::new(obs, t, &p1, &w1)?;
    let c0 = Characteristic::new(obs, t, &p0, &w0)?;
    let position = frame.mode() == ShiftMode::Position;
    let names = if position { ["est_v_x", "est_x_x", "est_l_x"] } else { ["est_v_v", "est_x_v", "est_l_v"] };
    let gap = if position { (p1 - p0).norm() } else { (w1 - w0).norm() };
    let speed = w1.norm();
    let dt = t - s;
    let hit1 = c1.bounce.is_some();
    let hit0 = c0.bounce.is_some();
    let integral = || -> Result<f64> {
        if frame.case == UnitCase::Full {
            integrate_inverse(frame, 0.0, 1.0, panels)
        } else {
            Err(Error::NoHitWindow)
        }
    };

    let (t1, t0) = (c1.t1(), c0.t1());
    let both_free = s > t1.max(t0);
    let both_reflected = hit1 && hit0 && s <= t1.min(t0);
    let mut rows = [QuotientRow::inapplicable(names[0]), QuotientRow::inapplicable(names[1]), QuotientRow::inapplicable(names[2])];
    if (hit1 && hit0 && (both_free || both_reflected)) || (!hit1 && !hit0) {
        let a = c1.at(s)?;
        let b = c0.at(s)?;
        let lv = (a.v - b.v).norm() / gap;
        let lx = (a.x - b.x).norm() / gap;
        let int = if both_reflected { integral()? } else { integral().unwrap_or(0.0) };
        let (rv, rx) = if position {
            (speed + speed * speed * int, 1.0 + speed * dt + speed * speed * dt * int)
        } else {
            (1.0 + speed * dt + speed * speed * int, dt + speed * dt * dt + speed * speed * dt * int)
        };
        rows[0] = QuotientRow::new(names[0], lv, rv);
        rows[1] = QuotientRow::new(names[1], lx, rx);
    }
    if hit1 && hit0 && t0 < s && s <= t1 {
        rows[2] = QuotientRow::new(names[2], t1 - s, gap * integral()?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexObstacle;
    use crate::Vec3;
    use approx::assert_relative_eq;

    fn symmetric_frame() -> ShiftFrame {
        let o = ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap();
        ShiftFrame::position(&o, &Vec3::new(3.0, 0.5, 0.0), &Vec3::new(3.0, -0.5, 0.0), &Vec3::x()).unwrap()
    }

    #[test]
    fn vanishes_at_grazing_and_blows_up_at_tau_zero() {
        let f = symmetric_frame();
        let s = singularity_sp(&f, f.tau_minus).unwrap().finite().unwrap();
        assert!(s.abs() < 1e-4, "{s}");
        assert!(singularity_sp(&f, f.tau_zero).unwrap().is_infinite());
        assert!(singularity_sp(&f, f.tau_plus + 0.1).is_err());
    }

    #[test]
    fn sphere_value_from_raw_dot_products() {
        let f = symmetric_frame();
        // x(τ) = (3, τ − 0.5, 0); backward ray along −x̂ enters at (√(1−y²), y, 0)
        let tau = 0.1;
        let y: f64 = tau - 0.5;
        let xb = Vec3::new((1.0 - y * y).sqrt(), y, 0.0);
        let g = -2.0 * xb;
        let expected = -g.dot(&Vec3::x()) / g.dot(&Vec3::y()).abs();
        let got = singularity_sp(&f, tau).unwrap().finite().unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
    }

    #[test]
    fn integral_survives_blow_up() {
        let f = symmetric_frame();
        // y = τ − 1/2 ∈ [−1, 1]: 1/𝔖 = |y|/√(1−y²), integral over [−1, 1] is 2
        let whole = integrate_inverse(&f, f.tau_minus, f.tau_plus, 8).unwrap();
        assert_relative_eq!(whole, 2.0, max_relative = 1e-6);
    }
}
