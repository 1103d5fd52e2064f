//! The Duhamel right-hand side along a specular characteristic,
//!
//! ```text
//! f(t,x,v) = e^{−∫₀ᵗ ν(f)} f(0, X(0), V(0)) + ∫₀ᵗ e^{−∫ₛᵗ ν(f)} Γ_gain(f,f)(s, X(s), V(s)) ds,
//! ```
//!
//! with `ν(f)` and `Γ_gain` evaluated at `(τ, X(τ), V(τ))`, and a few Picard
//! sweeps of it at toy scale.
//!
//! [`duhamel_evaluate`] works for general phase-space data. [`picard_sweep`]
//! restricts to spatially homogeneous radial data `f(t, |v|)`, where the
//! collision terms only depend on `(t, |v|)` and can be tabulated once per
//! sweep on a Chebyshev grid.

use rand::Rng;

use super::config::{DuhamelSettings, ExperimentConfig};
use super::report::{digest, CheckRow, ExperimentReport};
use super::sampling::{gaussian_vector, par_samples, shell_point, stream_rng};
use crate::characteristics::Characteristic;
use crate::collision::{collision_frequency, gain_carleman, sqrt_mu, CarlemanGrid, FrequencyGrid, Representation};
use crate::geometry::ConvexObstacle;
use crate::quad::Rule;
use crate::{Error, Result, Vec3};

/// Time-dependent phase-space data `f(s, x, u)`.
pub type PhaseField<'a> = &'a (dyn Fn(f64, &Vec3, &Vec3) -> f64 + Sync);

/// Which collision terms enter the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DuhamelTerms {
    pub gain: bool,
    pub loss: bool,
}

impl DuhamelTerms {
    pub const FULL: DuhamelTerms = DuhamelTerms { gain: true, loss: true };
    pub const TRANSPORT: DuhamelTerms = DuhamelTerms { gain: false, loss: false };
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DuhamelValue {
    pub value: f64,
    /// `e^{−∫₀ᵗ ν} f(0, X(0), V(0))`.
    pub transport_term: f64,
    pub gain_term: f64,
    /// `e^{−∫₀ᵗ ν}`.
    pub damping: f64,
}

/// The right-hand side for given rates along one characteristic:
/// `nu(s)` and `gain(s)` at the point `(s, X(s), V(s))`, `initial` the
/// value `f(0, X(0), V(0))`. Both time integrals use `nodes`-point
/// Gauss–Legendre rules.
pub fn duhamel_quadrature(t: f64, nodes: usize, initial: f64, nu: impl Fn(f64) -> f64, gain: impl Fn(f64) -> f64) -> DuhamelValue {
    if t == 0.0 {
        return DuhamelValue { value: initial, transport_term: initial, gain_term: 0.0, damping: 1.0 };
    }
    let outer = Rule::gauss_legendre(nodes, 0.0, t);
    let damp_from = |s: f64| (-Rule::gauss_legendre(nodes, s, t).integrate(&nu)).exp();
    let damping = damp_from(0.0);
    let gain_term = outer.integrate(|s| {
        let g = gain(s);
        if g == 0.0 {
            0.0
        } else {
            damp_from(s) * g
        }
    });
    let transport_term = damping * initial;
    DuhamelValue { value: transport_term + gain_term, transport_term, gain_term, damping }
}

fn check_time(s: &DuhamelSettings, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= s.horizon) {
        return Err(Error::Config(format!("t = {t} outside the toy horizon [0, {}]", s.horizon)));
    }
    Ok(())
}

fn carleman_grid(cfg: &ExperimentConfig) -> CarlemanGrid {
    cfg.suite.duhamel_toy.grid.grid(cfg.kernel.truncation_radius())
}

/// Right-hand side at `(t, x, v)` for data `f`, with `ν(f)` and
/// `Γ_gain(f, f)` computed by direct quadrature at every time node.
pub fn duhamel_evaluate(cfg: &ExperimentConfig, f: PhaseField, t: f64, x: &Vec3, v: &Vec3, terms: DuhamelTerms) -> Result<DuhamelValue> {
    let s = &cfg.suite.duhamel_toy;
    check_time(s, t)?;
    let obs = cfg.build_obstacle()?;
    let ch = Characteristic::new(&obs, t, x, v)?;
    let start = ch.at(0.0)?;
    let grid = carleman_grid(cfg);
    let fgrid = FrequencyGrid::new(grid.radius);
    let state = |tau: f64| ch.at(tau).expect("time inside [0, t]");
    let nu = |tau: f64| {
        if !terms.loss {
            return 0.0;
        }
        let p = state(tau);
        collision_frequency(&|u: &Vec3| f(tau, &p.x, u), &p.v, &fgrid)
    };
    let gain = |tau: f64| {
        if !terms.gain {
            return 0.0;
        }
        let p = state(tau);
        let g = |u: &Vec3| f(tau, &p.x, u);
        gain_carleman(&g, &g, &p.v, Representation::A, &grid)
    };
    Ok(duhamel_quadrature(t, s.time_nodes, f(0.0, &start.x, &start.v), nu, gain))
}

/// Barycentric interpolation on Chebyshev–Lobatto nodes of `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
struct Chebyshev {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    fn new(n: usize, a: f64, b: f64) -> Self {
        let m = (n - 1) as f64;
        let nodes = (0..n).map(|j| a + (b - a) * 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / m).cos())).collect();
        let weights = (0..n)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect();
        Chebyshev { a, b, nodes, weights }
    }

    /// Interpolates `values` (one per node) at `x`, clamped to `[a, b]`.
    fn eval(&self, values: &[f64], x: f64) -> f64 {
        let x = x.clamp(self.a, self.b);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((xj, wj), fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return *fj;
            }
            num += wj / d * fj;
            den += wj / d;
        }
        num / den
    }
}

/// Values of a radial homogeneous iterate and its collision terms on the
/// `(t, |v|)` grid. The iterate itself enters as `f/√μ`, frozen beyond the
/// last speed node.
struct Tables {
    time: Chebyshev,
    speed: Chebyshev,
    nu: Vec<Vec<f64>>,
    gain: Vec<Vec<f64>>,
}

fn radial_value(speed: &Chebyshev, ratio: &[f64], u: &Vec3) -> f64 {
    speed.eval(ratio, u.norm()) * sqrt_mu(u)
}

impl Tables {
    fn interp(&self, table: &[Vec<f64>], t: f64, r: f64) -> f64 {
        let along: Vec<f64> = table.iter().map(|row| self.speed.eval(row, r)).collect();
        self.time.eval(&along, t)
    }

    /// Collision terms of the iterate whose `f/√μ` values are `ratio`.
    fn build(cfg: &ExperimentConfig, time: Chebyshev, speed: Chebyshev, ratio: Vec<Vec<f64>>) -> Tables {
        let grid = carleman_grid(cfg);
        let fgrid = FrequencyGrid::new(grid.radius);
        let nt = time.nodes.len();
        let nr = speed.nodes.len();
        let cells = par_samples(nt * nr, |k| {
            let (i, j) = (k / nr, k % nr);
            let g = |u: &Vec3| radial_value(&speed, &ratio[i], u);
            let v = Vec3::z() * speed.nodes[j];
            (collision_frequency(&g, &v, &fgrid), gain_carleman(&g, &g, &v, Representation::A, &grid))
        });
        let nu = (0..nt).map(|i| (0..nr).map(|j| cells[i * nr + j].0).collect()).collect();
        let gain = (0..nt).map(|i| (0..nr).map(|j| cells[i * nr + j].1).collect()).collect();
        Tables { time, speed, nu, gain }
    }

    /// Next iterate at `(t, x, v)`.
    fn next(&self, obs: &ConvexObstacle, nodes: usize, f0: &(dyn Fn(f64) -> f64 + Sync), t: f64, x: &Vec3, v: &Vec3) -> Result<DuhamelValue> {
        let ch = Characteristic::new(obs, t, x, v)?;
        let start = ch.at(0.0)?;
        let r = v.norm();
        Ok(duhamel_quadrature(t, nodes, f0(start.v.norm()), |s| self.interp(&self.nu, s, r), |s| self.interp(&self.gain, s, r)))
    }
}

/// Sup-residuals `max |f_{k+1} − f_k|` of Picard sweeps started from the
/// radial profile `f0(|v|)`, measured on seeded phase points.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PicardReport {
    pub residuals: Vec<f64>,
    pub points: usize,
}

/// Runs `n_iter ≤ 3` sweeps for the homogeneous radial initial profile `f0`.
pub fn picard_sweep(cfg: &ExperimentConfig, f0: &(dyn Fn(f64) -> f64 + Sync), n_iter: usize) -> Result<PicardReport> {
    let s = &cfg.suite.duhamel_toy;
    if n_iter == 0 || n_iter > 3 {
        return Err(Error::Config(format!("picard_sweep takes 1 to 3 sweeps, got {n_iter}")));
    }
    let obs = cfg.build_obstacle()?;
    let time = Chebyshev::new(s.table_time_nodes, 0.0, s.horizon);
    let speed = Chebyshev::new(s.radial_nodes, 0.0, s.table_speed);

    let points: Vec<(f64, Vec3, Vec3)> = (0..s.sample_points)
        .map(|i| {
            let mut rng = stream_rng(cfg.seed ^ 0x6475_6861, i as u64);
            let t = s.horizon * (1.0 - rng.random::<f64>());
            let x = shell_point(&obs, &mut rng);
            let v = loop {
                let v = gaussian_vector(&mut rng);
                if v.norm() < s.table_speed {
                    break v;
                }
            };
            (t, x, v)
        })
        .collect();

    // iterate 0 is f0 at every time
    let ratio0: Vec<Vec<f64>> = time
        .nodes
        .iter()
        .map(|_| speed.nodes.iter().map(|r| f0(*r) / (-0.25 * r * r).exp()).collect())
        .collect();
    let mut tables = Tables::build(cfg, time.clone(), speed.clone(), ratio0);
    let mut previous: Vec<f64> = points.iter().map(|(_, _, v)| f0(v.norm())).collect();
    let mut residuals = Vec::with_capacity(n_iter);
    for k in 0..n_iter {
        let current = points
            .iter()
            .map(|(t, x, v)| tables.next(&obs, s.time_nodes, f0, *t, x, v).map(|d| d.value))
            .collect::<Result<Vec<f64>>>()?;
        residuals.push(current.iter().zip(&previous).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        previous = current;
        if k + 1 < n_iter {
            let ratio = time
                .nodes
                .iter()
                .map(|t| {
                    speed
                        .nodes
                        .iter()
                        .map(|r| {
                            let v = Vec3::z() * *r;
                            let d = duhamel_quadrature(
                                *t,
                                s.time_nodes,
                                f0(*r),
                                |q| tables.interp(&tables.nu, q, *r),
                                |q| tables.interp(&tables.gain, q, *r),
                            );
                            d.value / sqrt_mu(&v)
                        })
                        .collect()
                })
                .collect();
            tables = Tables::build(cfg, time.clone(), speed.clone(), ratio);
        }
    }
    Ok(PicardReport { residuals, points: points.len() })
}

pub fn run_duhamel_toy(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = &cfg.suite.duhamel_toy;
    let obs = cfg.build_obstacle()?;
    let mut report = ExperimentReport::new("duhamel_toy", cfg.seed, super::config_digest(cfg));
    let mut rng = stream_rng(cfg.seed, 0);
    let x = shell_point(&obs, &mut rng);
    let v = gaussian_vector(&mut rng);
    let t = s.horizon;
    let d = digest(&[t, x.x, x.y, x.z, v.x, v.y, v.z]);

    // pure transport returns the initial datum at the foot of the characteristic
    let a = Vec3::new(0.3, -0.2, 0.1);
    let tilted = move |_s: f64, y: &Vec3, u: &Vec3| (-(u - a).norm_squared()).exp() * (1.0 + 0.1 * y.x);
    let pure = duhamel_evaluate(cfg, &tilted, t, &x, &v, DuhamelTerms::TRANSPORT)?;
    let foot = Characteristic::new(&obs, t, &x, &v)?.at(0.0)?;
    report.rows.push(CheckRow::within("pure_transport", d.clone(), pure.value, tilted(0.0, &foot.x, &foot.v), 0.0));

    // constant rates: f = e^{−λt} f₀ + g(1 − e^{−λt})/λ
    let (lambda, g, f0) = (3.0, 0.7, 1.3);
    let q = duhamel_quadrature(t, s.time_nodes, f0, |_| lambda, |_| g);
    let exact = (-lambda * t).exp() * f0 + g * (1.0 - (-lambda * t).exp()) / lambda;
    report.rows.push(CheckRow::within("constant_rates", digest(&[lambda, g, f0, t]), q.value, exact, 1e-12 * exact));

    // equilibrium through direct quadrature, and its damping factors
    let eq = |_s: f64, _y: &Vec3, u: &Vec3| sqrt_mu(u);
    let mut last = 1.0;
    for frac in [0.25, 0.5, 1.0] {
        let r = duhamel_evaluate(cfg, &eq, frac * t, &x, &v, DuhamelTerms::FULL)?;
        let ok = r.damping > 0.0 && r.damping <= 1.0 && r.damping <= last;
        last = r.damping;
        let mut row = CheckRow::bound(format!("damping_{frac}"), d.clone(), r.damping, 1.0).with_note("in (0, 1], non-increasing in t");
        row.pass = ok;
        report.rows.push(row);
        if frac == 1.0 {
            report.rows.push(CheckRow::within("equilibrium_direct", d.clone(), r.value, sqrt_mu(&v), s.tolerance));
        }
    }

    // Picard sweeps from the equilibrium
    let sweep = picard_sweep(cfg, &|r: f64| (-0.25 * r * r).exp(), s.sweeps)?;
    for (k, res) in sweep.residuals.iter().enumerate() {
        report.rows.push(CheckRow::bound(format!("picard_residual_{}", k + 1), digest(&[cfg.seed as f64, k as f64]), *res, s.tolerance));
    }
    report.stat("picard_points", sweep.points as f64);
    report.finalize();
    Ok(report)
}
