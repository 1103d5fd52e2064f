//! Gain term `Γ_gain(g₁, g₂)(v)` for hard spheres.
//!
//! Two Carleman forms (constant 2, `q₀* ≡ 1`):
//!
//! ```text
//! A: 2 ∫_{ℝ³} du/|u| ∫_{z⊥u} dz  g₁(v+z) g₂(v+u) e^{−|u+v+z|²/4}
//! B: 2 ∫_{ℝ³} dz/|z| ∫_{u⊥z} du  g₁(v+z) g₂(v+u) e^{−|u+v+z|²/4}
//! ```
//!
//! and the direct form over `(u, ω)` with post-collisional velocities
//! `u' = u + ((v−u)·ω)ω`, `v' = v − ((v−u)·ω)ω`:
//!
//! ```text
//! ∫_{ℝ³} du ∫_{S²} dω |(v−u)·ω| √μ(u) g₁(u') g₂(v')
//! ```

use rayon::prelude::*;

use crate::quad::{pairwise_sum, Rule, SphereRule};
use crate::{any_orthogonal, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Representation {
    A,
    B,
}

/// Quadrature grid for the gain term. Radial directions use composite
/// 8-point Gauss–Legendre panels on `[0, radius]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlemanGrid {
    pub radius: f64,
    pub radial_panels: usize,
    pub polar: usize,
    pub azimuth: usize,
    pub plane_panels: usize,
    pub plane_angular: usize,
}

impl CarlemanGrid {
    pub fn new(radius: f64) -> Self {
        CarlemanGrid { radius, radial_panels: 4, polar: 10, azimuth: 20, plane_panels: 4, plane_angular: 24 }
    }

    /// Every node count doubled.
    pub fn refined(&self) -> Self {
        CarlemanGrid {
            radius: self.radius,
            radial_panels: 2 * self.radial_panels,
            polar: 2 * self.polar,
            azimuth: 2 * self.azimuth,
            plane_panels: 2 * self.plane_panels,
            plane_angular: 2 * self.plane_angular,
        }
    }

    /// Bound on the Gaussian tail dropped by the truncation.
    pub fn tail_bound(&self) -> f64 {
        (-0.25 * self.radius * self.radius).exp()
    }
}

type Field<'a> = &'a (dyn Fn(&Vec3) -> f64 + Sync);

/// Carleman form `repr` of `Γ_gain(g₁, g₂)(v)`.
pub fn gain_carleman(g1: Field, g2: Field, v: &Vec3, repr: Representation, grid: &CarlemanGrid) -> f64 {
    let axis = if v.norm() > 0.0 { *v } else { Vec3::z() };
    let radial = Rule::composite(grid.radial_panels, 8, 0.0, grid.radius);
    let dirs = SphereRule::new(grid.polar, grid.azimuth, &axis);
    let plane_r = Rule::composite(grid.plane_panels, 8, 0.0, grid.radius);
    let plane_phi = Rule::periodic(grid.plane_angular);
    let v = *v;
    let terms: Vec<f64> = (0..dirs.dirs.len())
        .into_par_iter()
        .map(|k| {
            let w = dirs.dirs[k];
            let e1 = any_orthogonal(&w);
            let e2 = w.cross(&e1);
            let mut outer = Vec::with_capacity(radial.len());
            for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
                // r² dr from the volume element over 1/|p|
                let p = w * *r;
                let mut inner = Vec::with_capacity(plane_r.len() * plane_phi.len());
                for (rho, wrho) in plane_r.nodes.iter().zip(&plane_r.weights) {
                    for (phi, wphi) in plane_phi.nodes.iter().zip(&plane_phi.weights) {
                        let q = (e1 * phi.cos() + e2 * phi.sin()) * *rho;
                        let (u, z) = match repr {
                            Representation::A => (p, q),
                            Representation::B => (q, p),
                        };
                        let e = (-0.25 * (u + v + z).norm_squared()).exp();
                        inner.push(wrho * wphi * rho * g1(&(v + z)) * g2(&(v + u)) * e);
                    }
                }
                outer.push(wr * r * pairwise_sum(&inner));
            }
            dirs.weights[k] * pairwise_sum(&outer)
        })
        .collect();
    2.0 * pairwise_sum(&terms)
}

/// Direct `(u, ω)` form of `Γ_gain(g₁, g₂)(v)`; an independent check of the
/// Carleman forms. The `ω` grid is aligned with `v − u` and split at the
/// kink of `|(v−u)·ω|`.
pub fn gain_direct(g1: Field, g2: Field, v: &Vec3, grid: &CarlemanGrid) -> f64 {
    let radial = Rule::composite(grid.radial_panels, 8, 0.0, grid.radius);
    let dirs = SphereRule::new(grid.polar, grid.azimuth, &Vec3::z());
    let cos_rule = Rule::gauss_legendre(grid.plane_panels * 4, 0.0, 1.0);
    let phi_rule = Rule::periodic(grid.plane_angular);
    let v = *v;
    let terms: Vec<f64> = (0..dirs.dirs.len())
        .into_par_iter()
        .map(|k| {
            let d = dirs.dirs[k];
            let mut outer = Vec::with_capacity(radial.len());
            for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
                let u = d * *r;
                let rel = v - u;
                let rn = rel.norm();
                if rn == 0.0 {
                    outer.push(0.0);
                    continue;
                }
                let a = rel / rn;
                let e1 = any_orthogonal(&a);
                let e2 = a.cross(&e1);
                let mut inner = Vec::with_capacity(cos_rule.len() * phi_rule.len());
                for (t, wt) in cos_rule.nodes.iter().zip(&cos_rule.weights) {
                    let s = (1.0 - t * t).max(0.0).sqrt();
                    for (phi, wphi) in phi_rule.nodes.iter().zip(&phi_rule.weights) {
                        let omega = a * *t + (e1 * phi.cos() + e2 * phi.sin()) * s;
                        let shift = omega * rel.dot(&omega);
                        inner.push(wt * wphi * rn * t * g1(&(u + shift)) * g2(&(v - shift)));
                    }
                }
                // ω and −ω give the same post-collisional pair
                outer.push(wr * r * r * 2.0 * super::sqrt_mu(&u) * pairwise_sum(&inner));
            }
            dirs.weights[k] * pairwise_sum(&outer)
        })
        .collect();
    pairwise_sum(&terms)
}
