use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample count {0} must be a power of two and at least 8")]
    Size(usize),

    #[error("boundary map e^(i(x + {lambda} sin({k}x))) is not a homeomorphism: |lambda|k = {product} > 1")]
    NonHomeomorphism { lambda: f64, k: u32, product: f64 },

    #[error("point {z} lies outside the closed unit disk")]
    Domain { z: Complex64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("point {w} lies outside the target domain")]
    Membership { w: Complex64 },

    #[error("Newton inversion of the conformal map did not converge at {w}")]
    Inversion { w: Complex64 },

    #[error("degenerate domain: boundary derivative modulus {lower} is not bounded away from zero")]
    DegenerateDomain { lower: f64 },

    #[error("hypothesis violation: {}", .0.join("; "))]
    Hypothesis(Vec<String>),

    #[error("w_z vanishes at {z}")]
    Degeneracy { z: Complex64 },

    #[error("boundary values do not lie on the target boundary (max deviation {deviation:e})")]
    DomainMismatch { deviation: f64 },

    #[error("malformed boundary file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
