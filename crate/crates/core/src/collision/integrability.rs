//! Monte Carlo estimate of the singular velocity integral
//!
//! ```text
//! ∫_{ζ : x_b(x, v+ζ) ∈ ∂Ω} e^{−c|ζ|²}/|ζ| · ⟨v+ζ⟩^r / |(v+ζ)·∇ξ(x_b)|^{2β} [· |v+ζ|^{−2β}] dζ
//! ```
//!
//! Coordinates split `ζ` along an axis `a` (the outward normal at a boundary
//! point) and its orthogonal plane. The normal component `w_a = (v+ζ)·a`
//! controls the grazing singularity, so it is sampled from a mixture: inside
//! the layer `|w_a| ≤ 0.1` a power map `w_a = ±0.1·u^{10}` concentrates samples
//! at grazing; outside it `ζ_a` is Gaussian. With this density the weights are
//! bounded in the layer for `2β ≤ 0.9` and have infinite mean for `2β > 1`,
//! which is exactly the convergence threshold of the integral.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use super::KernelParams;
use crate::characteristics::backward_exit;
use crate::geometry::ConvexObstacle;
use crate::quad::pairwise_sum;
use crate::{any_orthogonal, japanese, Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMode {
    Plain,
    /// Extra factor `|v+ζ|^{−2β}`.
    ExtraInverse,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

const LAYER: f64 = 0.1;
const LAYER_POWER: f64 = 10.0;
const LAYER_PROB: f64 = 0.5;

/// Estimate with `samples` draws; draw `i` uses its own ChaCha8 stream `i`.
#[allow(clippy::too_many_arguments)]
pub fn singular_velocity_integral(
    obs: &ConvexObstacle,
    params: &KernelParams,
    x: &Vec3,
    v: &Vec3,
    r_power: f64,
    mode: IntegralMode,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let c = params.c;
    let two_beta = 2.0 * params.beta;
    let axis = if obs.xi(x).abs() <= obs.boundary_tolerance() {
        -obs.outward_unit_normal(x)?
    } else {
        (x - obs.center()).normalize()
    };
    let e1 = any_orthogonal(&axis);
    let e2 = axis.cross(&e1);
    let va = v.dot(&axis);
    let sigma = (0.5 / c).sqrt();
    let cdf = NormalCdf::new(va, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let z_out = 1.0 - (cdf.cdf(LAYER) - cdf.cdf(-LAYER));
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let gauss_pdf = |t: f64| (-(t * t) / (2.0 * sigma * sigma)).exp() / (sigma * std::f64::consts::TAU.sqrt());

    let weights: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            // plane part: density (c/π) e^{−c|ζ⊥|²}
            let rr = (-(1.0 - rng.random::<f64>()).ln() / c).sqrt();
            let ang = std::f64::consts::TAU * rng.random::<f64>();
            let perp = (e1 * ang.cos() + e2 * ang.sin()) * rr;
            let pdf_perp = c / std::f64::consts::PI * (-c * rr * rr).exp();
            let (wa, pdf_a) = if rng.random::<f64>() < LAYER_PROB {
                let u: f64 = rng.random::<f64>();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let wa = sign * LAYER * u.powf(LAYER_POWER);
                let t = wa.abs() / LAYER;
                let layer_pdf = 0.5 * t.powf(1.0 / LAYER_POWER - 1.0) / (LAYER_POWER * LAYER);
                (wa, LAYER_PROB * layer_pdf)
            } else {
                let wa = loop {
                    let wa = va + normal.sample(&mut rng);
                    if wa.abs() > LAYER {
                        break wa;
                    }
                };
                (wa, (1.0 - LAYER_PROB) * gauss_pdf(wa - va) / z_out)
            };
            if !(pdf_a > 0.0) {
                return 0.0;
            }
            let zeta = perp + axis * (wa - va);
            let w = v + zeta;
            let zn = zeta.norm();
            if zn == 0.0 || w.norm() == 0.0 {
                return 0.0;
            }
            let Ok(Some(b)) = backward_exit(obs, x, &w) else { return 0.0 };
            let inc = b.incidence.abs();
            if inc == 0.0 {
                return 0.0;
            }
            let mut val = (-c * zn * zn).exp() / zn * japanese(&w).powf(r_power) / inc.powf(two_beta);
            if mode == IntegralMode::ExtraInverse {
                val /= w.norm().powf(two_beta);
            }
            val / (pdf_perp * pdf_a)
        })
        .collect();
    let n = samples as f64;
    let mean = pairwise_sum(&weights) / n;
    let sq: Vec<f64> = weights.iter().map(|w| (w - mean) * (w - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0).max(1.0);
    Ok(McEstimate { mean, std_err: (var / n).sqrt(), samples })
}

/// Closed form of the plain integral for the unit sphere at a boundary point
/// with `v = 0` and `r = 0`:
/// `2π·2^{−2β}/(1−2β) · Γ(1−β)/(2c^{1−β})`.
pub fn unit_sphere_rest_value(c: f64, beta: f64) -> f64 {
    let gamma = statrs::function::gamma::gamma(1.0 - beta);
    std::f64::consts::TAU * 2f64.powf(-2.0 * beta) / (1.0 - 2.0 * beta) * gamma / (2.0 * c.powf(1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_form_at_rest() {
        let obs = ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap();
        let p = KernelParams { beta: 0.3, ..KernelParams::default() };
        let est = singular_velocity_integral(&obs, &p, &Vec3::x(), &Vec3::zeros(), 0.0, IntegralMode::Plain, 200_000, 3).unwrap();
        let exact = unit_sphere_rest_value(p.c, p.beta);
        assert!((est.mean - exact).abs() < 5.0 * est.std_err + 1e-3 * exact, "{est:?} vs {exact}");
    }
}
