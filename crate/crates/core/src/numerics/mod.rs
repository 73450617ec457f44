//! Dimension-generic numerical machinery shared by every other module:
//! adaptive Gauss-Kronrod quadrature, spherical integrals, counter-based Monte
//! Carlo and monotone root bracketing.

mod mc;
mod quadrature;
mod root;
pub mod special;
mod sphere;

pub use mc::{
    mc_estimate, par_map_chunks, sample_sphere, stream_rng, uniform_ball_point, uniform_direction,
    McConfig, McEstimate, StreamRng, CHUNK_SIZE,
};
pub use quadrature::{
    integrate_1d, integrate_breaks, integrate_semi_infinite, integrate_tail, try_integrate_1d,
    try_integrate_breaks, try_integrate_tail, QuadratureSpec,
};
pub use root::{bisect_monotone, try_bisect_monotone};
pub use sphere::{
    sphere_integral, sphere_integral_mc, sphere_integral_zonal, unit_sphere_area, SphereDirection,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature did not converge: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand produced a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("decay hint must be positive and finite, got {0}")]
    InvalidDecayHint(f64),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid Monte-Carlo config: {0}")]
    InvalidMcConfig(&'static str),
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { got: usize, min: usize },
    #[error("not a unit vector: norm {norm}")]
    NotUnit { norm: f64 },
    #[error("could not bracket target {target}: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    BracketFailure {
        target: f64,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
}

pub type Result<T, E = NumericsError> = std::result::Result<T, E>;

/// Euclidean dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
