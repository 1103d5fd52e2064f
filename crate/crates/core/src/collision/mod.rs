//! Hard-sphere collision machinery: the kernels `k_c` and `𝐤_c`, the Carleman
//! forms of the gain term, the collision frequency `ν`, the uniform
//! negativity inequalities, specular symmetry and the singular velocity
//! integral.
//!
//! Throughout, `μ(v) = e^{−|v|²/2}` so that `√μ(v) = e^{−|v|²/4}`.

mod carleman;
mod frequency;
mod integrability;
mod negativity;
mod symmetry;

pub use carleman::{gain_carleman, gain_direct, CarlemanGrid, Representation};
pub use frequency::{collision_frequency, constant_frequency_oracle, FrequencyGrid};
pub use integrability::{singular_velocity_integral, unit_sphere_rest_value, IntegralMode, McEstimate};
pub use negativity::{negativity_check, NegativityFlags};
pub use symmetry::{specular_symmetry_check, SymmetryResiduals};

use crate::{Error, Result, Vec3};

/// `√μ(v) = e^{−|v|²/4}`.
pub fn sqrt_mu(v: &Vec3) -> f64 {
    (-0.25 * v.norm_squared()).exp()
}

/// Parameters of the kernels and weights.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    /// Kernel decay `c > 0`.
    pub c: f64,
    /// Hölder exponent `β`; weights use `2β`.
    pub beta: f64,
    /// Time weight rate `ϖ ≥ 0`.
    pub varpi: f64,
    /// Gaussian weight exponent `ϑ ∈ (0, 1/4)` in `w(v) = e^{ϑ|v|²}`.
    pub vartheta: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { c: 0.5, beta: 0.45, varpi: 0.1, vartheta: 0.125 }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("c = {} must be positive", self.c)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {} outside (0, 1)", self.beta)));
        }
        if !(self.varpi >= 0.0) {
            return Err(Error::InvalidParameter(format!("varpi = {} must be non-negative", self.varpi)));
        }
        if !(self.vartheta > 0.0 && self.vartheta < 0.25) {
            return Err(Error::InvalidParameter(format!("vartheta = {} outside (0, 1/4)", self.vartheta)));
        }
        Ok(())
    }

    /// `R = 6/√min(c, ϑ, 1/4)`.
    pub fn truncation_radius(&self) -> f64 {
        6.0 / self.c.min(self.vartheta).min(0.25).sqrt()
    }

    /// `w(v) = e^{ϑ|v|²}`.
    pub fn weight(&self, v: &Vec3) -> f64 {
        (self.vartheta * v.norm_squared()).exp()
    }
}

/// A phase-space function `f(x, v)` with a declared bound on `‖wf‖_∞`.
pub trait VelocityField: Sync {
    fn value(&self, x: &Vec3, v: &Vec3) -> f64;

    fn weight_bound(&self) -> f64 {
        f64::INFINITY
    }
}

/// [`VelocityField`] from a closure.
pub struct FnField<F> {
    pub f: F,
    pub bound: f64,
}

impl<F: Fn(&Vec3, &Vec3) -> f64 + Sync> FnField<F> {
    pub fn new(bound: f64, f: F) -> Self {
        FnField { f, bound }
    }
}

impl<F: Fn(&Vec3, &Vec3) -> f64 + Sync> VelocityField for FnField<F> {
    fn value(&self, x: &Vec3, v: &Vec3) -> f64 {
        (self.f)(x, v)
    }

    fn weight_bound(&self) -> f64 {
        self.bound
    }
}

/// `(|v|² − |v+ζ|²)²/|ζ|² = (2v·ζ̂ + |ζ|)²`, zero at `ζ = 0`.
pub(crate) fn energy_quotient(v: &Vec3, zeta: &Vec3) -> f64 {
    let r = zeta.norm();
    if r == 0.0 {
        return 0.0;
    }
    let q = 2.0 * v.dot(zeta) / r + r;
    q * q
}

/// Exponent of `k_c(v, v+ζ)`: `−c|ζ|² − c(|v|²−|v+ζ|²)²/|ζ|²`.
pub(crate) fn kernel_exponent(c: f64, v: &Vec3, zeta: &Vec3) -> f64 {
    -c * (zeta.norm_squared() + energy_quotient(v, zeta))
}

/// `k_c(v, v+ζ) = |ζ|⁻¹ exp(−c|ζ|² − c(|v|²−|v+ζ|²)²/|ζ|²)`.
pub fn kernel_kc(c: f64, v: &Vec3, zeta: &Vec3) -> Result<f64> {
    let r = zeta.norm();
    if r == 0.0 {
        return Err(Error::InvalidParameter("kernel evaluated at zeta = 0".into()));
    }
    Ok(kernel_exponent(c, v, zeta).exp() / r)
}

/// `𝐤_c(v, v̄, ζ) = k_c(v, v+ζ) + k_c(v̄, v̄+ζ)`.
pub fn kernel_bold(c: f64, v: &Vec3, v_bar: &Vec3, zeta: &Vec3) -> Result<f64> {
    Ok(kernel_kc(c, v, zeta)? + kernel_kc(c, v_bar, zeta)?)
}
