use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies inside the obstacle (xi = {0:e})")]
    InsideObstacle(f64),
    #[error("point is not on the boundary (xi = {0:e})")]
    NotOnBoundary(f64),
    #[error("velocity must be non-zero")]
    ZeroVelocity,
    #[error("singular Jacobian at grazing incidence (v . grad xi = {0:e})")]
    SingularJacobian(f64),
    #[error("backward ray misses the obstacle")]
    NoBounce,
    #[error("time s = {s} is later than t = {t}")]
    TimeOrder { s: f64, t: f64 },
    #[error("s = {s} lies on the free leg; t - t_b = {t1}")]
    FreeLeg { s: f64, t1: f64 },
    #[error("reflected ray re-enters the obstacle")]
    SecondBounce,
    #[error("degenerate shift: {0}")]
    DegenerateShift(&'static str),
    #[error("obstacle is not uniformly convex: {0}")]
    NotConvex(String),
    #[error("frame has no usable hit window")]
    NoHitWindow,
    #[error("tau = {0} lies in an excluded zone")]
    Excluded(f64),
    #[error("singularity vanishes on a subinterval")]
    VanishingSingularity,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
