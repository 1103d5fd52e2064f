//! Collision frequency `ν(f)(v) = ∬ |(v−u)·ω| √μ(u) f(u) dω du`.
//!
//! The `ω` integral is done in closed form, `∫_{S²}|w·ω| dω = 2π|w|`, and the
//! remaining `u` integral runs on a spherical grid centred at `v`, where the
//! factor `|v−u|` is smooth in the radial variable.

use rayon::prelude::*;

use crate::quad::{pairwise_sum, Rule, SphereRule};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub radius: f64,
    pub radial_panels: usize,
    pub polar: usize,
    pub azimuth: usize,
}

impl FrequencyGrid {
    pub fn new(radius: f64) -> Self {
        FrequencyGrid { radius, radial_panels: 8, polar: 24, azimuth: 48 }
    }

    pub fn refined(&self) -> Self {
        FrequencyGrid {
            radius: self.radius,
            radial_panels: 2 * self.radial_panels,
            polar: 2 * self.polar,
            azimuth: 2 * self.azimuth,
        }
    }
}

/// `ν(f)(v)`; the grid covers `|u| ≤ radius`.
pub fn collision_frequency(f: &(dyn Fn(&Vec3) -> f64 + Sync), v: &Vec3, grid: &FrequencyGrid) -> f64 {
    let axis = if v.norm() > 0.0 { -*v } else { Vec3::z() };
    let radial = Rule::composite(grid.radial_panels, 8, 0.0, grid.radius + v.norm());
    let dirs = SphereRule::new(grid.polar, grid.azimuth, &axis);
    let two_pi = std::f64::consts::TAU;
    let terms: Vec<f64> = (0..dirs.dirs.len())
        .into_par_iter()
        .map(|k| {
            let d = dirs.dirs[k];
            let row: Vec<f64> = radial
                .nodes
                .iter()
                .zip(&radial.weights)
                .map(|(rho, w)| {
                    let u = v + d * *rho;
                    w * two_pi * rho * rho * rho * super::sqrt_mu(&u) * f(&u)
                })
                .collect();
            dirs.weights[k] * pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `ν(1)(v)` by a one-dimensional radial integral with the angular part in
/// closed form: `∫_{S²} √μ(v+ρŝ) dŝ = 2π(e^{−(ρ−|v|)²/4} − e^{−(ρ+|v|)²/4})/(ρ|v|/2)`.
pub fn constant_frequency_oracle(v: &Vec3) -> f64 {
    let s = v.norm();
    let shell = |rho: f64| {
        if s * rho < 1e-8 {
            4.0 * std::f64::consts::PI * (-(rho * rho + s * s) / 4.0).exp()
        } else {
            let a = 0.5 * s * rho;
            2.0 * std::f64::consts::PI * ((-(rho - s).powi(2) / 4.0).exp() - (-(rho + s).powi(2) / 4.0).exp()) / a
        }
    };
    let rule = Rule::composite(200, 10, 0.0, s + 40.0);
    std::f64::consts::TAU * rule.integrate(|rho| rho.powi(3) * shell(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn oracle_at_rest() {
        // 2π · 4π ∫ r³ e^{−r²/4} dr = 64π²
        let pi = std::f64::consts::PI;
        assert_relative_eq!(constant_frequency_oracle(&Vec3::zeros()), 64.0 * pi * pi, max_relative = 1e-12);
    }

    #[test]
    fn constant_field_matches_oracle() {
        let grid = FrequencyGrid::new(12.0);
        for v in [Vec3::zeros(), Vec3::new(1.5, 0.0, 0.0), Vec3::new(-0.4, 2.0, 1.0)] {
            let nu = collision_frequency(&|_| 1.0, &v, &grid);
            assert_relative_eq!(nu, constant_frequency_oracle(&v), max_relative = 1e-4);
        }
        assert_eq!(collision_frequency(&|_| 0.0, &Vec3::x(), &grid), 0.0);
    }
}
