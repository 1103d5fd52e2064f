//! Seeded sampling helpers. Sample `i` of a suite always draws from its own
//! ChaCha8 stream, so results do not depend on scheduling and the first `N`
//! samples of a `2N` run are the `N` samples of the smaller run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::geometry::ConvexObstacle;
use crate::{any_orthogonal, Vec3};

/// Generator for sample `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maps `f` over `0..n` in parallel, preserving order.
pub fn par_samples<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

pub fn gaussian_vector<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let g = gaussian_vector(rng);
        let n = g.norm();
        if n > 1e-8 {
            return g / n;
        }
    }
}

/// A point with `ξ` uniform in `[−(2r)², −tol]`, `r` the bounding radius.
pub fn shell_point<R: Rng>(obs: &ConvexObstacle, rng: &mut R) -> Vec3 {
    let r = obs.bounding_radius;
    let tol = obs.boundary_tolerance();
    let xi = -tol - rng.random::<f64>() * (4.0 * r * r - tol);
    let dir = unit_vector(rng);
    let q = dir.dot(&(obs.form() * dir));
    obs.center() + dir * ((obs.level() - xi) / q).sqrt()
}

/// A boundary point and the unit normal pointing away from the obstacle.
pub fn boundary_sample<R: Rng>(obs: &ConvexObstacle, rng: &mut R) -> (Vec3, Vec3) {
    let p = obs.boundary_point(&unit_vector(rng));
    let g = obs.gradient(&p);
    (p, -g / g.norm())
}

/// Unit vector orthogonal to `n`, uniform on that circle.
pub fn tangent_direction<R: Rng>(n: &Vec3, rng: &mut R) -> Vec3 {
    let e1 = any_orthogonal(n);
    let e2 = n.normalize().cross(&e1);
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    e1 * phi.cos() + e2 * phi.sin()
}

/// Unit vector `d` with `d·n ∈ [min_cos, 1]` (uniform in the cosine).
pub fn cone_direction<R: Rng>(n: &Vec3, min_cos: f64, rng: &mut R) -> Vec3 {
    let c = min_cos + (1.0 - min_cos) * rng.random::<f64>();
    let s = (1.0 - c * c).max(0.0).sqrt();
    n.normalize() * c + tangent_direction(n, rng) * s
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
