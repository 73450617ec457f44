//! Fermi-type integrals and the moment-ratio function.
//!
//! * `I_s(t) = int_0^inf r^s / (1 + t e^{r^2}) dr`
//! * `J_s(t) = int_0^inf r^s e^{r^2} / (1 + t e^{r^2})^2 dr = -dI_s/dt`
//! * `K_s(rho) = int_0^inf u^{s/2} / (1 + e^{rho (u - 1)}) du`
//! * `P(t) = I_{n+1}(t) / I_{n-1}(t)^{(n+2)/n}`
//!
//! Integrands are evaluated through `ln t` so that the small-`t` regime
//! (where the integrand approaches the indicator of `r^2 < -ln t`) neither
//! overflows nor loses the location of the step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    try_integrate_breaks, try_integrate_tail, unit_sphere_area, NumericsError, QuadratureSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FermiError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("integral order must be finite and nonnegative, got {0}")]
    InvalidOrder(f64),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = FermiError> = std::result::Result<T, E>;

/// Velocity-space dimension, `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(FermiError::InvalidDimension(n));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// The exponent `(n + 2) / n` that appears in every moment ratio.
    pub fn ratio_exponent(self) -> f64 {
        (self.0 as f64 + 2.0) / self.0 as f64
    }
}

impl TryFrom<usize> for Dimension {
    type Error = FermiError;
    fn try_from(n: usize) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Power of `r` in the Fermi integrands, `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FermiIntegralOrder(f64);

impl FermiIntegralOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(FermiError::InvalidOrder(s));
        }
        Ok(FermiIntegralOrder(s))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_area(n: Dimension) -> f64 {
    unit_sphere_area(n.get())
}

/// `|S^{n-2}|`, the area of the equator of `S^{n-1}`; 2 when `n = 2`.
pub fn sphere_area_codim(n: Dimension) -> f64 {
    unit_sphere_area(n.get() - 1)
}

/// `1 / (1 + e^x)` without overflow.
#[inline]
pub(crate) fn fermi_weight(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn check_t(t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(FermiError::DomainError(format!(
            "t must be positive and finite, got {t}"
        )));
    }
    Ok(t.ln())
}

fn step_breaks(ln_t: f64) -> Vec<f64> {
    if ln_t < 0.0 {
        vec![(-ln_t).sqrt()]
    } else {
        Vec::new()
    }
}

#[inline]
fn pow_r(r: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        r.powf(s)
    }
}

/// `I_s(t)` given `ln t`.
pub fn fermi_i_log(s: FermiIntegralOrder, ln_t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !ln_t.is_finite() {
        return Err(FermiError::DomainError(format!(
            "ln t must be finite, got {ln_t}"
        )));
    }
    let s = s.get();
    let v = try_integrate_tail(
        |r| Ok(pow_r(r, s) * fermi_weight(r * r + ln_t)),
        0.0,
        &step_breaks(ln_t),
        spec,
        1.0,
    )?;
    Ok(v)
}

/// `I_s(t) = int_0^inf r^s / (1 + t e^{r^2}) dr` for `t > 0`.
pub fn fermi_i(s: FermiIntegralOrder, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    fermi_i_log(s, check_t(t)?, spec)
}

/// `J_s(t)` given `ln t`.
pub fn fermi_j_log(s: FermiIntegralOrder, ln_t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !ln_t.is_finite() {
        return Err(FermiError::DomainError(format!(
            "ln t must be finite, got {ln_t}"
        )));
    }
    let s = s.get();
    let inv_t = (-ln_t).exp();
    // e^{r^2} / (1 + t e^{r^2})^2 = L (1 - L) / t with L = 1 / (1 + t e^{r^2})
    let v = try_integrate_tail(
        |r| {
            let x = r * r + ln_t;
            Ok(pow_r(r, s) * fermi_weight(x) * fermi_weight(-x) * inv_t)
        },
        0.0,
        &step_breaks(ln_t),
        spec,
        1.0,
    )?;
    Ok(v)
}

/// `J_s(t) = int_0^inf r^s e^{r^2} / (1 + t e^{r^2})^2 dr`, which equals `-dI_s/dt`.
pub fn fermi_j(s: FermiIntegralOrder, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    fermi_j_log(s, check_t(t)?, spec)
}

/// `P` evaluated at `t = e^{ln_t}`.
pub fn fermi_p_log(ln_t: f64, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    let nf = n.as_f64();
    let upper = fermi_i_log(FermiIntegralOrder(nf + 1.0), ln_t, spec)?;
    let lower = fermi_i_log(FermiIntegralOrder(nf - 1.0), ln_t, spec)?;
    Ok(upper / lower.powf(n.ratio_exponent()))
}

/// `P(t) = I_{n+1}(t) / I_{n-1}(t)^{(n+2)/n}`, strictly increasing from
/// `n^{(n+2)/n}/(n+2)` at `0+` to infinity.
pub fn fermi_p(t: f64, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    fermi_p_log(check_t(t)?, n, spec)
}

/// Exact small-`t` limit of `P`: `n^{(n+2)/n} / (n + 2)`.
pub fn p_zero_limit(n: Dimension) -> f64 {
    let nf = n.as_f64();
    nf.powf(n.ratio_exponent()) / (nf + 2.0)
}

/// Classification threshold `c_n = n/(n+2) (n / |S^{n-1}|)^{2/n}`: the
/// smallest value of `M_2 / M_0^{(n+2)/n}` over admissible densities.
pub fn threshold(n: Dimension) -> f64 {
    let nf = n.as_f64();
    nf / (nf + 2.0) * (nf / sphere_area(n)).powf(2.0 / nf)
}

/// `K_s(rho) = int_0^inf u^{s/2} / (1 + e^{rho (u - 1)}) du` for `rho > 0`.
///
/// Split at `u = 1`; the tail uses `u = 1 + w^2`, which turns the exponential
/// decay into Gaussian decay with rate `rho`.
pub fn k_integral(s: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    let s = FermiIntegralOrder::new(s)?.get();
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(FermiError::DomainError(format!(
            "rho must be positive and finite, got {rho}"
        )));
    }
    let half = 0.5 * s;
    let head = try_integrate_breaks(
        |u| Ok(pow_r(u, half) * fermi_weight(rho * (u - 1.0))),
        &[0.0, 1.0],
        spec,
    )?;
    let tail = try_integrate_tail(
        |w| Ok(2.0 * w * pow_r(1.0 + w * w, half) * fermi_weight(rho * w * w)),
        0.0,
        &[],
        spec,
        rho,
    )?;
    Ok(head + tail)
}

/// Values of `rho` (with `t = e^{-rho}`) used to extrapolate `P(0+)`.
pub const P_LIMIT_RHOS: [f64; 3] = [20.0, 40.0, 80.0];

/// Richardson extrapolation of `P(e^{-rho})` to `rho -> inf`.
///
/// `P(e^{-rho})` has an expansion in even powers of `1/rho` (plus terms of
/// order `e^{-rho}`); doubling `rho` twice removes the `rho^-2` and `rho^-4`
/// terms.
pub fn extrapolate_p_zero(n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    let mut table = P_LIMIT_RHOS
        .iter()
        .map(|&rho| fermi_p_log(-rho, n, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    Ok(table[0])
}

/// `int F_{a,b}(v) |v - v0|^k dv = |S^{n-1}| b^{-(n+k)/2} I_{n-1+k}(1/a)`.
pub fn fermi_dirac_moment(
    k: f64,
    a: f64,
    b: f64,
    n: Dimension,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(FermiError::DomainError(format!(
            "a, b must be positive, got ({a}, {b})"
        )));
    }
    let nf = n.as_f64();
    let i = fermi_i_log(FermiIntegralOrder::new(nf - 1.0 + k)?, -a.ln(), spec)?;
    Ok(sphere_area(n) * b.powf(-(nf + k) / 2.0) * i)
}
