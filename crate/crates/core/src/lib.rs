//! Specular characteristics outside a uniformly convex obstacle, the geometric
//! quantities that control their Hölder regularity, and the hard-sphere
//! collision quadratures used to test kinetic estimates numerically.
//!
//! The crate is organised along the dependency chain of the computations:
//!
//! - [`geometry`]: level-set obstacles ξ with exact first and second derivatives.
//! - [`characteristics`]: backward exit map, specular reflection, the one-bounce
//!   flow and its closed-form Jacobians.
//! - [`shiftframe`]: shifted positions and velocities, the curves x(τ), v(τ)
//!   and the grazing parameters τ₋ < τ₀ < τ₊.
//! - [`singularity`]: the specular singularities, their ODE inequalities,
//!   averaged inverse singularities and difference-quotient bounds.
//! - [`collision`]: kernels, Carleman forms of the gain term, collision
//!   frequency, negativity and symmetry checks, singular velocity integrals.
//! - [`experiments`]: seeded verification suites, config files and reports.
//!
//! ```
//! use specular::geometry::ConvexObstacle;
//! use specular::characteristics::backward_exit;
//! use specular::Vec3;
//!
//! let ball = ConvexObstacle::sphere(Vec3::zeros(), 1.0).unwrap();
//! let hit = backward_exit(&ball, &Vec3::new(2.0, 0.0, 0.0), &Vec3::new(1.0, 0.0, 0.0))
//!     .unwrap()
//!     .expect("head-on ray hits");
//! assert!((hit.t_b - 1.0).abs() < 1e-15);
//! assert_eq!(hit.incidence, -2.0);
//! ```

pub mod characteristics;
pub mod collision;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod quad;
pub mod shiftframe;
pub mod singularity;

pub use error::{Error, Result};

/// Three-vector used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for Hessians and Jacobians.
pub type Mat3 = nalgebra::Matrix3<f64>;

/// `⟨v⟩ = √(1 + |v|²)`.
pub fn japanese(v: &Vec3) -> f64 {
    (1.0 + v.norm_squared()).sqrt()
}

/// Unit vector in the direction of `v`, or `None` for a (numerically) zero vector.
pub fn unit(v: &Vec3) -> Option<Vec3> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v / n)
    } else {
        None
    }
}

/// Some unit vector orthogonal to `n` (which need not be normalised).
pub fn any_orthogonal(n: &Vec3) -> Vec3 {
    let a = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    n.cross(&a).normalize()
}
