use thiserror::Error;

use crate::kinematics::ParticleRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} outside worldline domain [{t_min}, 0]")]
    TimeOutOfDomain { t: f64, t_min: f64 },

    #[error("no retarded emission inside [{t_min}, 0] for {particle}")]
    NoEmissionInWindow { particle: ParticleRef, t_min: f64 },

    #[error("non-finite value while evaluating {context}")]
    NonFinite { context: String },

    #[error("quadratic for the retarded time has no real non-positive root")]
    NoRealRoot,

    #[error("boost speed {speed} is not below c = {c}")]
    SuperluminalBoost { speed: f64, c: f64 },

    #[error("point with y = {y} lies at or behind the pinhole")]
    BehindPinhole { y: f64 },

    #[error("film coordinate V = {v} is degenerate (image point at infinity)")]
    DegenerateV { v: f64 },

    #[error("rail abscissa {x} outside [{a}, {b}]")]
    XOutOfDomain { x: f64, a: f64, b: f64 },

    #[error("rail passes at or behind the pinhole near x = {x}")]
    RailBehindPinhole { x: f64 },

    #[error("co-moving route needs a uniform worldline")]
    NotUniform,

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("scene schema: {0}")]
    Schema(String),

    #[error("{particle} reaches speed {speed} above the limit {limit}")]
    SuperluminalWorldline {
        particle: ParticleRef,
        speed: f64,
        limit: f64,
    },

    #[error("bad tolerance: {0}")]
    BadTolerance(String),

    #[error("speed profile reaches |beta| = {beta} above {limit}")]
    BetaOutOfRange { beta: f64, limit: f64 },

    #[error("rail is too short: arclength {needed} requested, {available} available")]
    RailTooShort { needed: f64, available: f64 },

    #[error("unknown demo scene `{0}`")]
    UnknownDemo(String),

    #[error("region role mismatch: expected {expected}, found {found}")]
    RoleMismatch { expected: String, found: String },

    #[error("time {t} outside photographic interval [{t_l}, {t_u}]")]
    TimeOutsideInterval { t: f64, t_l: f64, t_u: f64 },

    #[error("scene has no rail")]
    NoRail,

    #[error("scene does not have the rods-and-connector box layout: {0}")]
    NotABoxScene(String),

    #[error("degenerate section: {0}")]
    DegenerateSection(String),

    #[error("raster window is empty or degenerate")]
    EmptyWindow,

    #[error("integration did not converge: {0}")]
    NoConvergence(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TimeOutOfDomain { .. }
                | Error::NoEmissionInWindow { .. }
                | Error::NonFinite { .. }
                | Error::NoRealRoot
                | Error::BehindPinhole { .. }
                | Error::DegenerateV { .. }
                | Error::XOutOfDomain { .. }
                | Error::RailBehindPinhole { .. }
                | Error::NoConvergence(_)
                | Error::TimeOutsideInterval { .. }
                | Error::DegenerateSection(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
