//! Collision map, gain/loss functionals and entropy dissipation.
//!
//! Post-collision velocities are
//! `v' = (v + v*)/2 + |v - v*| sigma / 2`, `v*' = (v + v*)/2 - |v - v*| sigma / 2`,
//! and the angular kernel is `b(t) = 1 - t^2` evaluated at `|<n, sigma>|`
//! with `n = (v - v*) / |v - v*|`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{Density, DensityError};
use crate::fermi::{sphere_area, sphere_area_codim, Dimension};
use crate::numerics::special::wallis;
use crate::numerics::{
    self, mc_estimate, try_integrate_breaks, try_integrate_tail, uniform_ball_point,
    uniform_direction, McConfig, McEstimate, NumericsError, QuadratureSpec, SphereDirection,
    StreamRng,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollisionError {
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{count} sampled dissipation terms are infinite")]
    InfiniteDissipation { count: u64 },
    #[error("invalid argument: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = CollisionError> = std::result::Result<T, E>;

fn check_dim(v: &[f64], n: Dimension) -> Result<()> {
    if v.len() != n.get() {
        return Err(CollisionError::DimensionMismatch {
            expected: n.get(),
            got: v.len(),
        });
    }
    Ok(())
}

/// The angular kernel `b(t) = 1 - t^2` on `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelB;

impl KernelB {
    pub fn eval(self, t: f64) -> f64 {
        1.0 - t * t
    }

    /// `b(|<n, sigma>|)` for a pre-collision pair; zero when `v = v*`.
    pub fn for_pair(self, v: &[f64], v_star: &[f64], sigma: &[f64]) -> f64 {
        let d = numerics::dist(v, v_star);
        if d == 0.0 {
            return 0.0;
        }
        let c: f64 = v
            .iter()
            .zip(v_star)
            .zip(sigma)
            .map(|((a, b), s)| (a - b) * s)
            .sum::<f64>()
            / d;
        self.eval(c.abs().min(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionPair {
    pub v: Vec<f64>,
    pub v_star: Vec<f64>,
    pub sigma: SphereDirection,
    pub n: Dimension,
}

impl CollisionPair {
    pub fn new(v: Vec<f64>, v_star: Vec<f64>, sigma: SphereDirection) -> Result<Self> {
        let n =
            Dimension::new(v.len()).map_err(|e| CollisionError::InvalidParameter(e.to_string()))?;
        check_dim(&v_star, n)?;
        check_dim(sigma.components(), n)?;
        Ok(CollisionPair {
            v,
            v_star,
            sigma,
            n,
        })
    }
}

/// `(v', v*')` for `sigma` given as a unit vector.
pub fn collide(v: &[f64], v_star: &[f64], sigma: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h = 0.5 * numerics::dist(v, v_star);
    let mut vp = Vec::with_capacity(v.len());
    let mut vsp = Vec::with_capacity(v.len());
    for ((a, b), s) in v.iter().zip(v_star).zip(sigma) {
        let m = 0.5 * (a + b);
        vp.push(m + h * s);
        vsp.push(m - h * s);
    }
    (vp, vsp)
}

pub fn post_collision(p: &CollisionPair) -> (Vec<f64>, Vec<f64>) {
    collide(&p.v, &p.v_star, p.sigma.components())
}

/// Largest absolute momentum defect and absolute energy defect of a collision.
pub fn conservation_residuals(v: &[f64], v_star: &[f64], vp: &[f64], vsp: &[f64]) -> (f64, f64) {
    let mut momentum = 0.0f64;
    for i in 0..v.len() {
        momentum = momentum.max(((vp[i] + vsp[i]) - (v[i] + v_star[i])).abs());
    }
    let sq = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>();
    let before = sq(v) + sq(v_star);
    let after = sq(vp) + sq(vsp);
    (momentum, (after - before).abs())
}

/// `(2^{n+2} + 2) |S^{n-2}| int_0^{pi/2} sin^n`, the Lipschitz constant of
/// `f -> I_f(v), J_f(v)` in `L^1`.
pub fn lipschitz_constant(n: Dimension) -> f64 {
    let k = n.get() as i32;
    (2f64.powi(k + 2) + 2.0) * sphere_area_codim(n) * wallis(n.as_f64())
}

/// Gaussian importance density for `v*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl Envelope {
    pub fn new(center: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CollisionError::InvalidParameter(format!(
                "envelope scale must be positive, got {scale}"
            )));
        }
        Ok(Envelope { center, scale })
    }

    /// Centered on `f` with scale `R / sqrt(2)`, `R` the 99.99%-mass radius.
    pub fn for_density(f: &Density, spec: &QuadratureSpec) -> Result<Self> {
        let reach = match f.mass_radius(0.9999, spec) {
            Ok(r) => r,
            Err(DensityError::ZeroMass) => f.support_radius().unwrap_or(1.0),
            Err(e) => return Err(e.into()),
        };
        Envelope::new(f.center().into_owned(), reach / 2f64.sqrt())
    }

    /// Draws `v*` and returns it with `1 / pdf(v*)`.
    fn draw(&self, rng: &mut StreamRng) -> (Vec<f64>, f64) {
        let n = self.center.len();
        let mut z2 = 0.0;
        let v: Vec<f64> = self
            .center
            .iter()
            .map(|c| {
                let z: f64 = rng.sample(StandardNormal);
                z2 += z * z;
                c + self.scale * z
            })
            .collect();
        let inv_pdf = (2.0 * PI * self.scale * self.scale).powf(0.5 * n as f64) * (0.5 * z2).exp();
        (v, inv_pdf)
    }
}

/// Estimates of `I_f(v)`, `J_f(v)` and `f(v)(I_f + J_f) - I_f` from the
/// same draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionTerms {
    pub gain: McEstimate,
    pub loss: McEstimate,
    pub residual: McEstimate,
}

pub fn collision_terms_with(
    f: &Density,
    v: &[f64],
    env: &Envelope,
    mc: &McConfig,
) -> Result<CollisionTerms> {
    let n = f.dim();
    check_dim(v, n)?;
    check_dim(&env.center, n)?;
    let area = sphere_area(n);
    let fv = f.value_at(v);
    let gv = f.complement_at(v);
    let [gain, loss, residual] = mc_estimate(mc, |_, rng| {
        let (vs, inv_pdf) = env.draw(rng);
        let sigma = uniform_direction(rng, n.get());
        let w = area * inv_pdf * KernelB.for_pair(v, &vs, &sigma);
        let (vp, vsp) = collide(v, &vs, &sigma);
        let i = w * f.value_at(&vp) * f.value_at(&vsp) * f.complement_at(&vs);
        let j = w * f.value_at(&vs) * f.complement_at(&vp) * f.complement_at(&vsp);
        [i, j, fv * j - gv * i]
    })?;
    Ok(CollisionTerms {
        gain,
        loss,
        residual,
    })
}

pub fn collision_terms(
    f: &Density,
    v: &[f64],
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<CollisionTerms> {
    collision_terms_with(f, v, &Envelope::for_density(f, spec)?, mc)
}

/// `I_f(v) = int int b f(v') f(v*') (1 - f(v*)) dv* d sigma`.
pub fn gain_functional_i(
    f: &Density,
    v: &[f64],
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<McEstimate> {
    Ok(collision_terms(f, v, spec, mc)?.gain)
}

/// `J_f(v) = int int b f(v*) (1 - f(v')) (1 - f(v*')) dv* d sigma`.
pub fn loss_functional_j(
    f: &Density,
    v: &[f64],
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<McEstimate> {
    Ok(collision_terms(f, v, spec, mc)?.loss)
}

/// `I_f(v) - I_g(v)` from common draws.
pub fn gain_difference(
    f: &Density,
    g: &Density,
    v: &[f64],
    env: &Envelope,
    mc: &McConfig,
) -> Result<McEstimate> {
    let n = f.dim();
    check_dim(v, n)?;
    check_dim(&env.center, g.dim())?;
    let area = sphere_area(n);
    let [d] = mc_estimate(mc, |_, rng| {
        let (vs, inv_pdf) = env.draw(rng);
        let sigma = uniform_direction(rng, n.get());
        let w = area * inv_pdf * KernelB.for_pair(v, &vs, &sigma);
        let (vp, vsp) = collide(v, &vs, &sigma);
        let i_f = f.value_at(&vp) * f.value_at(&vsp) * f.complement_at(&vs);
        let i_g = g.value_at(&vp) * g.value_at(&vsp) * g.complement_at(&vs);
        [w * (i_f - i_g)]
    })?;
    Ok(d)
}

/// Radial weight `Psi` in the angular reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Psi {
    /// `1_{[0, delta]}`
    Indicator { delta: f64 },
    /// `e^{-r^2 / scale^2}`
    Gaussian { scale: f64 },
}

impl Psi {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            Psi::Indicator { delta } => {
                if r <= delta {
                    1.0
                } else {
                    0.0
                }
            }
            Psi::Gaussian { scale } => (-(r * r) / (scale * scale)).exp(),
        }
    }

    fn validate(self) -> Result<()> {
        let p = match self {
            Psi::Indicator { delta } => delta,
            Psi::Gaussian { scale } => scale,
        };
        if !(p > 0.0 && p.is_finite()) {
            return Err(CollisionError::InvalidParameter(format!("{self:?}")));
        }
        Ok(())
    }
}

/// `2^{n-1} |S^{n-2}| int_0^{pi/2} sin^{n-2}/cos^2 b(|cos 2 theta|)
/// int Psi(|v - v*| / cos theta) f(v*) dv* d theta`, by nested quadrature.
///
/// This equals `int int b Psi(|v - v*|) f(v') dv* d sigma`.
pub fn angular_reduction(psi: Psi, f: &Density, v: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    psi.validate()?;
    let n = f.dim();
    check_dim(v, n)?;
    let k = n.get() as i32;
    let d = numerics::dist(v, &f.center());
    let area = sphere_area(n);
    let mut rho_breaks: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .chain(f.support_radius())
        .flat_map(|beta| [(d - beta).abs(), d + beta])
        .filter(|r| *r > 0.0)
        .collect();
    rho_breaks.sort_by(f64::total_cmp);
    rho_breaks.dedup();
    let inner = spec.nested(0.1);
    let innermost = inner.nested(0.1);

    let shell = |theta: f64| -> numerics::Result<f64> {
        let c = theta.cos();
        if c <= 0.0 {
            return Ok(0.0);
        }
        let integrand = |rho: f64| -> numerics::Result<f64> {
            let weight = psi.eval(rho / c);
            if weight == 0.0 {
                return Ok(0.0);
            }
            let avg = f
                .spherical_average_about(v, rho, &innermost)
                .map_err(|e| match e {
                    DensityError::Numerics(e) => e,
                    _ => NumericsError::InvalidSpec("spherical average failed"),
                })?;
            Ok(rho.powi(k - 1) * weight * area * avg)
        };
        match psi {
            Psi::Indicator { delta } => {
                let top = delta * c;
                let mut pts = vec![0.0];
                pts.extend(rho_breaks.iter().copied().filter(|r| *r < top));
                pts.push(top);
                try_integrate_breaks(integrand, &pts, &inner)
            }
            Psi::Gaussian { scale } => {
                let hint = 1.0 / (scale * scale * c * c);
                try_integrate_tail(integrand, 0.0, &rho_breaks, &inner, hint)
            }
        }
    };
    // b(|cos 2 theta|) / cos^2 theta = 4 sin^2 theta
    let outer = try_integrate_breaks(
        |theta: f64| {
            let s = theta.sin();
            Ok(s.powi(k - 2) * 4.0 * s * s * shell(theta)?)
        },
        &[0.0, 0.5 * PI],
        spec,
    )?;
    Ok(2f64.powi(k - 1) * sphere_area_codim(n) * outer)
}

/// Monte-Carlo estimate of `int int b Psi(|v - v*|) f(v') dv* d sigma`.
///
/// With `use_star`, `f(v*')` replaces `f(v')`; both have the same value.
pub fn angular_reduction_mc(
    psi: Psi,
    f: &Density,
    v: &[f64],
    use_star: bool,
    mc: &McConfig,
) -> Result<McEstimate> {
    psi.validate()?;
    let n = f.dim();
    check_dim(v, n)?;
    let k = n.get();
    let area = sphere_area(n);
    let [est] = mc_estimate(mc, |_, rng| {
        let (vs, w) = match psi {
            Psi::Indicator { delta } => {
                let vol = area * delta.powi(k as i32) / k as f64;
                (uniform_ball_point(rng, v, delta), vol)
            }
            Psi::Gaussian { scale } => {
                // Psi itself is a Gaussian density up to (pi scale^2)^{n/2}
                let sd = scale / 2f64.sqrt();
                let vs: Vec<f64> = v
                    .iter()
                    .map(|c| c + sd * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                (vs, (PI * scale * scale).powf(0.5 * k as f64))
            }
        };
        let sigma = uniform_direction(rng, k);
        let (vp, vsp) = collide(v, &vs, &sigma);
        let target = if use_star { &vsp } else { &vp };
        [area * w * KernelB.for_pair(v, &vs, &sigma) * f.value_at(target)]
    })?;
    Ok(est)
}

/// Velocities along the coordinate axes at evenly spaced distances from the
/// center, starting at the center itself.
pub fn probe_velocities(f: &Density, count: usize, spec: &QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    let n = f.dim().get();
    let c = f.center().into_owned();
    let reach = Envelope::for_density(f, spec)?.scale * 2f64.sqrt();
    Ok((0..count)
        .map(|i| {
            let mut v = c.clone();
            v[i % n] += reach * i as f64 / count as f64;
            v
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub v: Vec<f64>,
    pub f: f64,
    pub terms: CollisionTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max_v |f(v)(I_f + J_f) - I_f| / max_v (I_f + J_f)`
    pub residual: f64,
    /// Largest residual standard error, on the same scale.
    pub mc_error: f64,
    /// Relative quadrature tolerance in effect.
    pub quadrature_error: f64,
    pub points: Vec<ResidualPoint>,
}

impl ResidualReport {
    pub fn combined_error(&self) -> f64 {
        self.mc_error + self.quadrature_error
    }
}

/// Normalized residual of `f(v)[I_f(v) + J_f(v)] = I_f(v)` over `v_samples`.
pub fn equilibrium_residual(
    f: &Density,
    v_samples: &[Vec<f64>],
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<ResidualReport> {
    if v_samples.is_empty() {
        return Err(CollisionError::InvalidParameter(
            "no velocity samples".into(),
        ));
    }
    let env = Envelope::for_density(f, spec)?;
    let mut points = Vec::with_capacity(v_samples.len());
    for v in v_samples {
        let terms = collision_terms_with(f, v, &env, mc)?;
        points.push(ResidualPoint {
            v: v.clone(),
            f: f.value_at(v),
            terms,
        });
    }
    let scale = points
        .iter()
        .map(|p| p.terms.gain.mean + p.terms.loss.mean)
        .fold(0.0f64, f64::max);
    let worst = points
        .iter()
        .map(|p| p.terms.residual.mean.abs())
        .fold(0.0f64, f64::max);
    let worst_se = points
        .iter()
        .map(|p| p.terms.residual.std_error)
        .fold(0.0f64, f64::max);
    let (residual, mc_error) = if scale > 0.0 {
        (worst / scale, worst_se / scale)
    } else {
        (0.0, 0.0)
    };
    Ok(ResidualReport {
        residual,
        mc_error,
        quadrature_error: spec.rel_tol,
        points,
    })
}

/// Arguments below this are treated as exact zeros.
pub const GAMMA_ZERO: f64 = 1e-300;

/// `Gamma(a, b) = (a - b) ln(a / b)`; `+inf` if exactly one argument is 0,
/// 0 if both are.
pub fn gamma_rate(a: f64, b: f64) -> f64 {
    let a0 = a < GAMMA_ZERO;
    let b0 = b < GAMMA_ZERO;
    match (a0, b0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => (a - b) * (a / b).ln(),
    }
}

/// Products agreeing to this relative precision are treated as equal inside
/// the dissipation integrand; their difference is below evaluation error.
pub const DISSIPATION_ROUNDING: f64 = 1e-12;

/// Monte-Carlo estimate of
/// `D(f) = 1/4 int int int b Gamma(f' f*' (1-f)(1-f*), f f* (1-f')(1-f*')) dv* d sigma dv`
/// with `v, v*` uniform in the ball holding 99.99% of the mass.
///
/// Any infinite sampled term gives `InfiniteDissipation`.
pub fn dissipation_estimate(
    f: &Density,
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<McEstimate> {
    let n = f.dim();
    let k = n.get();
    let area = sphere_area(n);
    let reach = f.mass_radius(0.9999, spec)?;
    let c = f.center().into_owned();
    let vol = area * reach.powi(k as i32) / k as f64;
    let weight = 0.25 * vol * vol * area;
    let [value, infinite] = mc_estimate(mc, |_, rng| {
        let v = uniform_ball_point(rng, &c, reach);
        let vs = uniform_ball_point(rng, &c, reach);
        let sigma = uniform_direction(rng, k);
        let b = KernelB.for_pair(&v, &vs, &sigma);
        let (vp, vsp) = collide(&v, &vs, &sigma);
        let gain = f.value_at(&vp) * f.value_at(&vsp) * f.complement_at(&v) * f.complement_at(&vs);
        let loss = f.value_at(&v) * f.value_at(&vs) * f.complement_at(&vp) * f.complement_at(&vsp);
        if (gain - loss).abs() <= DISSIPATION_ROUNDING * gain.max(loss) {
            return [0.0, 0.0];
        }
        let g = gamma_rate(gain, loss);
        if g.is_infinite() {
            if b > 0.0 {
                return [0.0, 1.0];
            }
            return [0.0, 0.0];
        }
        [weight * b * g, 0.0]
    })?;
    if infinite.mean > 0.0 {
        return Err(CollisionError::InfiniteDissipation {
            count: (infinite.mean * mc.samples as f64).round() as u64,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{AnnulusDensity, BallDensity, FermiDiracDensity};
    use crate::numerics::stream_rng;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn head_on_collision() {
        let p = CollisionPair::new(
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            SphereDirection::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let (vp, vsp) = post_collision(&p);
        assert_eq!(vp, vec![0.0, 1.0]);
        assert_eq!(vsp, vec![0.0, -1.0]);
    }

    #[test]
    fn grazing_direction_is_identity() {
        let v = [0.3, -1.2, 2.0];
        let vs = [1.1, 0.4, -0.5];
        let n = SphereDirection::normalize(&[v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]]).unwrap();
        let (vp, vsp) = collide(&v, &vs, n.components());
        for i in 0..3 {
            assert!((vp[i] - v[i]).abs() < 1e-15 && (vsp[i] - vs[i]).abs() < 1e-15);
        }
        assert_eq!(KernelB.for_pair(&v, &vs, n.components()), 0.0);
    }

    #[test]
    fn random_collisions_conserve() {
        let mut rng = stream_rng(11, 0);
        for n in 2..=4 {
            for _ in 0..1000 {
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let vs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let s = uniform_direction(&mut rng, n);
                let (vp, vsp) = collide(&v, &vs, &s);
                let (p, e) = conservation_residuals(&v, &vs, &vp, &vsp);
                assert!(p <= 1e-12 && e <= 1e-12);
            }
        }
    }

    #[test]
    fn kernel_on_doubled_angle() {
        for th in [0.1, 0.7, 1.3] {
            let lhs = KernelB.eval((2.0f64 * th).cos().abs());
            assert!((lhs - (2.0 * th).sin().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn lipschitz_constants() {
        assert!((lipschitz_constant(dim(2)) - 9.0 * PI).abs() < 1e-12);
        assert!((lipschitz_constant(dim(3)) - 34.0 * 2.0 * PI * 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn gamma_rate_conventions() {
        assert_eq!(gamma_rate(1.0, 1.0), 0.0);
        assert!((gamma_rate(2.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(gamma_rate(1.0, 0.0), f64::INFINITY);
        assert_eq!(gamma_rate(0.0, 1e-301 * 5.0), 0.0);
        assert_eq!(gamma_rate(0.0, 3.0), f64::INFINITY);
    }

    #[test]
    fn gain_and_loss_vanish_for_empty_density() {
        let zero: Density = crate::density::RadialGridDensity::new(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![0.0; 2],
            dim(2),
        )
        .unwrap()
        .into();
        let mc = McConfig::new(1, 2000, 1).unwrap();
        let t = collision_terms(&zero, &[0.2, 0.1], &spec(), &mc).unwrap();
        assert_eq!(t.gain.mean, 0.0);
        assert_eq!(t.loss.mean, 0.0);
    }

    #[test]
    fn fermi_dirac_gain_loss_positive_and_bounded() {
        let f: Density = FermiDiracDensity::centered(1.0, 1.0, dim(2))
            .unwrap()
            .into();
        let mc = McConfig::new(5, 40_000, 2).unwrap();
        let mass = f.compute_moments(&spec()).unwrap().m0;
        let bound = lipschitz_constant(dim(2)) * mass;
        for v in [[0.0, 0.0], [1.0, 0.5], [2.5, 0.0]] {
            let t = collision_terms(&f, &v, &spec(), &mc).unwrap();
            assert!(t.gain.mean > 0.0 && t.loss.mean > 0.0);
            assert!(t.gain.mean <= bound && t.loss.mean <= bound);
        }
    }

    #[test]
    fn ball_loses_nothing_inside() {
        let f: Density = BallDensity::centered(1.0, dim(2)).unwrap().into();
        let mc = McConfig::new(9, 20_000, 1).unwrap();
        let t = collision_terms(&f, &[0.1, 0.0], &spec(), &mc).unwrap();
        assert_eq!(t.loss.mean, 0.0);
        assert!(t.gain.mean > 0.0);
    }

    #[test]
    fn swapping_post_collision_slots_gives_same_integral() {
        let f: Density = FermiDiracDensity::new(2.0, 0.5, vec![0.2, -0.1], dim(2))
            .unwrap()
            .into();
        let psi = Psi::Indicator { delta: 1.5 };
        let mc = McConfig::new(21, 100_000, 2).unwrap();
        let a = angular_reduction_mc(psi, &f, &[0.4, 0.3], false, &mc).unwrap();
        let b = angular_reduction_mc(psi, &f, &[0.4, 0.3], true, &mc).unwrap();
        let se = a.std_error.hypot(b.std_error);
        assert!((a.mean - b.mean).abs() < 3.0 * se);
    }

    #[test]
    fn reduction_of_zero_weight_and_zero_density() {
        let zero: Density = crate::density::RadialGridDensity::new(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![0.0; 2],
            dim(2),
        )
        .unwrap()
        .into();
        let v =
            angular_reduction(Psi::Indicator { delta: 1.0 }, &zero, &[0.0, 0.0], &spec()).unwrap();
        assert_eq!(v, 0.0);
        let ball: Density = BallDensity::centered(1.0, dim(2)).unwrap().into();
        let far =
            angular_reduction(Psi::Indicator { delta: 0.5 }, &ball, &[5.0, 0.0], &spec()).unwrap();
        assert_eq!(far, 0.0);
    }

    // f = 1 on the reachable region: vol(B_delta) |S^{n-2}| int_0^pi sin^n.
    #[test]
    fn reduction_for_locally_constant_density() {
        let ball: Density = BallDensity::centered(10.0, dim(3)).unwrap().into();
        let delta = 0.5;
        let v =
            angular_reduction(Psi::Indicator { delta }, &ball, &[0.0, 0.0, 0.0], &spec()).unwrap();
        let exact = 4.0 * PI * delta.powi(3) / 3.0 * (2.0 * PI * 4.0 / 3.0);
        assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
    }

    #[test]
    fn dissipation_of_equilibria_and_annulus() {
        let mc = McConfig::new(3, 100_000, 4).unwrap();
        let fd: Density = FermiDiracDensity::centered(1.0, 1.0, dim(2))
            .unwrap()
            .into();
        let d = dissipation_estimate(&fd, &spec(), &mc).unwrap();
        assert!(d.mean.abs() <= 3.0 * d.std_error);
        let ball: Density = BallDensity::centered(1.0, dim(2)).unwrap().into();
        let d = dissipation_estimate(&ball, &spec(), &mc).unwrap();
        assert_eq!(d.mean, 0.0);
        let ann: Density = AnnulusDensity::new(0.5, dim(2)).unwrap().into();
        match dissipation_estimate(&ann, &spec(), &mc) {
            Err(CollisionError::InfiniteDissipation { count }) => assert!(count > 0),
            Ok(d) => assert!(d.mean > 3.0 * d.std_error),
            Err(e) => panic!("{e}"),
        }
    }
}
