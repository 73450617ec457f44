use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::gamma;
use super::{
    mc_estimate, try_integrate_1d, McConfig, McEstimate, NumericsError, QuadratureSpec, Result,
};

/// A point of the unit sphere `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphereDirection(Vec<f64>);

impl SphereDirection {
    /// Accepts `components` if their norm is 1 within 1e-12.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(NumericsError::InvalidDimension {
                got: components.len(),
                min: 2,
            });
        }
        let norm = super::norm(&components);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(NumericsError::NotUnit { norm });
        }
        Ok(SphereDirection(components))
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        let norm = super::norm(v);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(NumericsError::NotUnit { norm });
        }
        SphereDirection::new(v.iter().map(|x| x / norm).collect())
    }

    pub(crate) fn from_normalized(v: Vec<f64>) -> Self {
        SphereDirection(v)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> SphereDirection {
        SphereDirection(self.0.iter().map(|x| -x).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SphereDirection {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Area of the unit sphere `S^{m-1}` in `R^m`, `2 pi^{m/2} / Gamma(m/2)`.
/// `m = 1` gives the two-point sphere `S^0` with area 2.
pub fn unit_sphere_area(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Integral over `S^{n-1}` of a zonal function `g(<omega, sigma>)`:
/// `|S^{n-2}| int_0^pi sin^{n-2}(theta) g(cos theta) d theta`.
pub fn sphere_integral_zonal<G>(mut g: G, n: usize, spec: &QuadratureSpec) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    if n < 2 {
        return Err(NumericsError::InvalidDimension { got: n, min: 2 });
    }
    let k = (n - 2) as i32;
    let inner = try_integrate_1d(|th: f64| Ok(th.sin().powi(k) * g(th.cos())), 0.0, PI, spec)?;
    Ok(unit_sphere_area(n - 1) * inner)
}

/// Integral of `g` over `S^{n-1}` by nested quadrature in hyperspherical
/// coordinates: peel off one polar angle per level, ending with the circle.
pub fn sphere_integral<G>(g: G, n: usize, spec: &QuadratureSpec) -> Result<f64>
where
    G: Fn(&[f64]) -> f64,
{
    if n < 2 {
        return Err(NumericsError::InvalidDimension { got: n, min: 2 });
    }
    let point = vec![0.0; n];
    sphere_level(&g, n, 1.0, &point, spec)
}

// Integrates over the sphere of the first `m` coordinates of `point`, which is
// scaled by `scale` (the product of the sines of the outer polar angles).
fn sphere_level<G>(g: &G, m: usize, scale: f64, point: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    G: Fn(&[f64]) -> f64,
{
    if m == 2 {
        let mut p = point.to_vec();
        return try_integrate_1d(
            |phi: f64| {
                p[0] = scale * phi.cos();
                p[1] = scale * phi.sin();
                Ok(g(&p))
            },
            0.0,
            2.0 * PI,
            spec,
        );
    }
    let inner_spec = spec.nested(0.1);
    let k = (m - 2) as i32;
    let mut p = point.to_vec();
    try_integrate_1d(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            p[m - 1] = scale * c;
            let inner = sphere_level(g, m - 1, scale * s, &p, &inner_spec)?;
            Ok(s.powi(k) * inner)
        },
        0.0,
        PI,
        spec,
    )
}

/// Monte-Carlo integral of `g` over `S^{n-1}` with uniform directions.
pub fn sphere_integral_mc<G>(g: G, n: usize, mc: &McConfig) -> Result<McEstimate>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if n < 2 {
        return Err(NumericsError::InvalidDimension { got: n, min: 2 });
    }
    let area = unit_sphere_area(n);
    let [est] = mc_estimate(mc, |_, rng| [area * g(&super::uniform_direction(rng, n))])?;
    Ok(est)
}
