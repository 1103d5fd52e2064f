//! Uniformly convex obstacles described by a quadratic level set.
//!
//! Every supported kind has the form `ξ(x) = k − (x−c)ᵀA(x−c)` with `A`
//! symmetric positive definite, so `ξ > 0` inside the obstacle 𝒪, the exterior
//! domain is `Ω = {ξ < 0}`, `∇ξ(x) = −2A(x−c)` and `∇²ξ = −2A`.
//!
//! | kind      | k   | A            |
//! |-----------|-----|--------------|
//! | sphere    | r²  | I            |
//! | ellipsoid | 1   | diag(1/aᵢ²)  |
//! | quadric   | 1   | user matrix  |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Mat3, Result, Vec3};

/// Shape parameters as supplied by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleKind {
    Sphere { center: [f64; 3], radius: f64 },
    Ellipsoid { center: [f64; 3], semi_axes: [f64; 3] },
    Quadric { center: [f64; 3], matrix: [[f64; 3]; 3] },
}

/// A uniformly convex obstacle with its level-set data precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexObstacle {
    pub kind: ObstacleKind,
    /// Smallest eigenvalue of `−∇²ξ`, i.e. the uniform convexity constant θ_Ω.
    pub theta_lower: f64,
    /// Radius of a ball about the center containing 𝒪.
    pub bounding_radius: f64,
    center: Vec3,
    level: f64,
    a: Mat3,
    lambda_max: f64,
}

/// Value, gradient and Hessian of ξ at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSample {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: Mat3,
}

impl ConvexObstacle {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
        }
        Ok(Self::assemble(
            ObstacleKind::Sphere { center: center.into(), radius },
            center,
            radius * radius,
            Mat3::identity(),
            2.0,
            2.0,
        ))
    }

    pub fn ellipsoid(center: Vec3, semi_axes: Vec3) -> Result<Self> {
        if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid semi-axes {:?}",
                semi_axes.as_slice()
            )));
        }
        let d = semi_axes.map(|a| 1.0 / (a * a));
        let lmin = d.min();
        let lmax = d.max();
        Ok(Self::assemble(
            ObstacleKind::Ellipsoid { center: center.into(), semi_axes: semi_axes.into() },
            center,
            1.0,
            Mat3::from_diagonal(&d),
            2.0 * lmin,
            2.0 * lmax,
        ))
    }

    /// `ξ(x) = 1 − (x−c)ᵀA(x−c)`; `A` must be symmetric positive definite.
    pub fn quadric(center: Vec3, a: Mat3) -> Result<Self> {
        let asym = (a - a.transpose()).abs().max();
        if !(asym <= 1e-12 * a.abs().max().max(1.0)) {
            return Err(Error::InvalidParameter("quadric matrix is not symmetric".into()));
        }
        let eig = a.symmetric_eigen().eigenvalues;
        let lmin = eig.min();
        if !(lmin > 0.0) {
            return Err(Error::NotConvex(format!(
                "quadric matrix has eigenvalue {lmin:e}"
            )));
        }
        let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| a[(i, j)]));
        Ok(Self::assemble(
            ObstacleKind::Quadric { center: center.into(), matrix: rows },
            center,
            1.0,
            a,
            2.0 * lmin,
            2.0 * eig.max(),
        ))
    }

    pub fn from_kind(kind: &ObstacleKind) -> Result<Self> {
        match kind {
            ObstacleKind::Sphere { center, radius } => Self::sphere(Vec3::from(*center), *radius),
            ObstacleKind::Ellipsoid { center, semi_axes } => {
                Self::ellipsoid(Vec3::from(*center), Vec3::from(*semi_axes))
            }
            ObstacleKind::Quadric { center, matrix } => {
                let m = Mat3::from_fn(|i, j| matrix[i][j]);
                Self::quadric(Vec3::from(*center), m)
            }
        }
    }

    fn assemble(kind: ObstacleKind, center: Vec3, level: f64, a: Mat3, theta: f64, hmax: f64) -> Self {
        // the farthest boundary point lies along the eigenvector of the smallest eigenvalue of A
        let bounding_radius = (level / (0.5 * theta)).sqrt();
        ConvexObstacle {
            kind,
            theta_lower: theta,
            bounding_radius,
            center,
            level,
            a,
            lambda_max: 0.5 * hmax,
        }
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// The matrix `A` of the quadratic form.
    pub fn form(&self) -> &Mat3 {
        &self.a
    }

    /// The constant `k` in `ξ = k − (x−c)ᵀA(x−c)`.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// Tolerance for "x is on the boundary": `|ξ(x)| ≤ 1e−9·(1 + R²)`.
    pub fn boundary_tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.bounding_radius * self.bounding_radius)
    }

    pub fn xi(&self, x: &Vec3) -> f64 {
        let d = x - self.center;
        self.level - d.dot(&(self.a * d))
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        -2.0 * (self.a * (x - self.center))
    }

    pub fn hessian(&self) -> Mat3 {
        -2.0 * self.a
    }

    /// Upper bound of `|∇ξ|` over the boundary.
    pub fn grad_sup(&self) -> f64 {
        // |∇ξ| = 2|A d| ≤ 2 λ_max |d| with |d| ≤ bounding radius on ∂𝒪
        2.0 * self.lambda_max * self.bounding_radius
    }

    pub fn evaluate_level_set(&self, x: &Vec3) -> LevelSample {
        LevelSample {
            value: self.xi(x),
            gradient: self.gradient(x),
            hessian: self.hessian(),
        }
    }

    /// `n(x) = ∇ξ(x)/|∇ξ(x)|` at a boundary point. For the sign convention used
    /// here (ξ > 0 inside 𝒪) this vector points into the obstacle.
    pub fn outward_unit_normal(&self, x: &Vec3) -> Result<Vec3> {
        let v = self.xi(x);
        if v.abs() > self.boundary_tolerance() {
            return Err(Error::NotOnBoundary(v));
        }
        let g = self.gradient(x);
        Ok(g / g.norm())
    }

    /// Boundary point in direction `dir` from the center.
    pub fn boundary_point(&self, dir: &Vec3) -> Vec3 {
        let q = dir.dot(&(self.a * dir));
        self.center + dir * (self.level / q).sqrt()
    }

    /// Minimum over sampled boundary points of the smallest eigenvalue of `−∇²ξ`.
    pub fn convexity_margin(&self, n_samples: usize, seed: u64) -> Result<f64> {
        if n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut margin = f64::INFINITY;
        for _ in 0..n_samples {
            let d = Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let p = self.boundary_point(&d);
            let h = -self.evaluate_level_set(&p).hessian;
            let h = 0.5 * (h + h.transpose());
            let lmin = h.symmetric_eigen().eigenvalues.min();
            if !(lmin > 0.0) {
                return Err(Error::NotConvex(format!("eigenvalue {lmin:e} at {p:?}")));
            }
            margin = margin.min(lmin);
        }
        Ok(margin)
    }

    /// Largest value of ξ on the segment `[p, q]` (ξ is concave along lines).
    pub fn max_xi_on_segment(&self, p: &Vec3, q: &Vec3) -> f64 {
        let e = q - p;
        let ee = e.dot(&(self.a * e));
        if ee <= 0.0 {
            return self.xi(p);
        }
        let d = p - self.center;
        let lam = (-e.dot(&(self.a * d)) / ee).clamp(0.0, 1.0);
        self.xi(&(p + e * lam))
    }

    /// Center of the planar section `∂𝒪 ∩ {o + αe₁ + βe₂}` and the level
    /// `k − q(center)`; the section is a non-degenerate closed curve iff the
    /// level is positive.
    pub fn plane_section(&self, origin: &Vec3, e1: &Vec3, e2: &Vec3) -> (Vec3, f64) {
        let m = nalgebra::Matrix2::new(
            e1.dot(&(self.a * e1)),
            e1.dot(&(self.a * e2)),
            e2.dot(&(self.a * e1)),
            e2.dot(&(self.a * e2)),
        );
        let d = origin - self.center;
        let rhs = nalgebra::Vector2::new(-e1.dot(&(self.a * d)), -e2.dot(&(self.a * d)));
        let ab = m.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector2::zeros);
        let p = origin + e1 * ab.x + e2 * ab.y;
        (p, self.xi(&p))
    }
}
