//! Geometric characterizations of balls by the collision map.
//!
//! The condition checker is a falsifier: a failed triple is a certificate
//! that the shape is not a ball, while passing only means no counterexample
//! was sampled.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collision::collide;
use crate::density::{Density, DensityError};
use crate::fermi::{sphere_area, sphere_area_codim, Dimension};
use crate::numerics::special::wallis;
use crate::numerics::{
    self, mc_estimate, par_map_chunks, stream_rng, try_integrate_1d, try_integrate_breaks,
    try_integrate_tail, uniform_ball_point, uniform_direction, McConfig, McEstimate, NumericsError,
    QuadratureSpec, SphereDirection, StreamRng,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("v and v* coincide")]
    DegeneratePair,
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("boundary sampler failed its spot check at {0:?}")]
    BoundarySampler(Vec<f64>),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

fn check_dim(v: &[f64], n: Dimension) -> Result<()> {
    if v.len() != n.get() {
        return Err(GeometryError::DimensionMismatch {
            expected: n.get(),
            got: v.len(),
        });
    }
    Ok(())
}

/// A compact set given by membership and samplers.
pub trait ShapeOracle: Sync {
    fn dim(&self) -> Dimension;

    /// Closed-set membership.
    fn contains(&self, x: &[f64]) -> bool;

    /// Euclidean distance to the set, 0 inside.
    fn distance(&self, x: &[f64]) -> f64;

    /// A boundary point and the outward unit normal there.
    fn boundary_point(&self, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>);

    /// A point uniform in the set.
    fn interior_point(&self, rng: &mut StreamRng) -> Vec<f64>;

    fn diameter_bound(&self) -> f64;

    /// Boundary sample number `index` of the stream for `seed`.
    fn boundary_sample(&self, seed: u64, index: u64) -> Vec<f64> {
        self.boundary_point(&mut stream_rng(seed, index)).0
    }
}

/// Checks that sampled boundary points are members and that stepping
/// `delta` along the outward normal leaves the set.
pub fn spot_check_boundary<K: ShapeOracle + ?Sized>(k: &K, samples: u64, delta: f64) -> Result<()> {
    for i in 0..samples {
        let (x, normal) = k.boundary_point(&mut stream_rng(0x5EED, i));
        let out: Vec<f64> = x.iter().zip(&normal).map(|(a, b)| a + delta * b).collect();
        if !k.contains(&x) && k.distance(&x) > 1e-12 * k.diameter_bound() || k.contains(&out) {
            return Err(GeometryError::BoundarySampler(x));
        }
    }
    Ok(())
}

const SPOT_CHECKS: u64 = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallShape {
    pub center: Vec<f64>,
    pub radius: f64,
    n: Dimension,
}

impl BallShape {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n =
            Dimension::new(center.len()).map_err(|e| GeometryError::InvalidShape(e.to_string()))?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidShape(format!("radius {radius}")));
        }
        let b = BallShape { center, radius, n };
        spot_check_boundary(&b, SPOT_CHECKS, 1e-6 * radius)?;
        Ok(b)
    }

    pub fn unit(n: Dimension) -> Self {
        BallShape {
            center: vec![0.0; n.get()],
            radius: 1.0,
            n,
        }
    }
}

impl ShapeOracle for BallShape {
    fn dim(&self) -> Dimension {
        self.n
    }

    fn contains(&self, x: &[f64]) -> bool {
        numerics::dist(x, &self.center) <= self.radius
    }

    fn distance(&self, x: &[f64]) -> f64 {
        (numerics::dist(x, &self.center) - self.radius).max(0.0)
    }

    fn boundary_point(&self, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>) {
        let d = uniform_direction(rng, self.n.get());
        let x = self
            .center
            .iter()
            .zip(&d)
            .map(|(c, u)| c + self.radius * u)
            .collect();
        (x, d)
    }

    fn interior_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        uniform_ball_point(rng, &self.center, self.radius)
    }

    fn diameter_bound(&self) -> f64 {
        2.0 * self.radius
    }
}

/// `eps <= |x| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusShape {
    pub eps: f64,
    n: Dimension,
}

impl AnnulusShape {
    pub fn new(eps: f64, n: Dimension) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(GeometryError::InvalidShape(format!("inner radius {eps}")));
        }
        let a = AnnulusShape { eps, n };
        spot_check_boundary(&a, SPOT_CHECKS, 1e-6 * eps)?;
        Ok(a)
    }
}

impl ShapeOracle for AnnulusShape {
    fn dim(&self) -> Dimension {
        self.n
    }

    fn contains(&self, x: &[f64]) -> bool {
        let r = numerics::norm(x);
        r >= self.eps && r <= 1.0
    }

    fn distance(&self, x: &[f64]) -> f64 {
        let r = numerics::norm(x);
        (self.eps - r).max(r - 1.0).max(0.0)
    }

    fn boundary_point(&self, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>) {
        let inner_share = self.eps.powi(self.n.get() as i32 - 1);
        let pick_inner = rng.random::<f64>() * (1.0 + inner_share) < inner_share;
        let d = uniform_direction(rng, self.n.get());
        if pick_inner {
            (
                d.iter().map(|u| self.eps * u).collect(),
                d.iter().map(|u| -u).collect(),
            )
        } else {
            (d.clone(), d)
        }
    }

    fn interior_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        loop {
            let x = uniform_ball_point(rng, &vec![0.0; self.n.get()], 1.0);
            if numerics::norm(&x) >= self.eps {
                return x;
            }
        }
    }

    fn diameter_bound(&self) -> f64 {
        2.0
    }
}

/// Intersection of the three disks of radius `width` centered at the
/// vertices of an equilateral triangle of side `width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuleauxTriangle {
    pub vertices: [[f64; 2]; 3],
    pub width: f64,
}

impl ReuleauxTriangle {
    /// Vertices at angles 90, 210 and 330 degrees about the origin.
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(GeometryError::InvalidShape(format!("width {width}")));
        }
        let circum = width / 3f64.sqrt();
        let vertices = [90.0f64, 210.0, 330.0].map(|deg| {
            let a = deg.to_radians();
            [circum * a.cos(), circum * a.sin()]
        });
        let k = ReuleauxTriangle { vertices, width };
        spot_check_boundary(&k, SPOT_CHECKS, 1e-6 * width)?;
        Ok(k)
    }

    /// Vertex 0, the opposite boundary point on the symmetry axis, and a
    /// direction orthogonal to their difference. Neither post-collision
    /// point of this triple lies in the triangle.
    pub fn witness(&self) -> (Vec<f64>, Vec<f64>, SphereDirection) {
        let a = self.vertices[0];
        let centroid = [0.0, 0.0];
        let axis = [centroid[0] - a[0], centroid[1] - a[1]];
        let len = axis[0].hypot(axis[1]);
        let b = [
            a[0] + self.width * axis[0] / len,
            a[1] + self.width * axis[1] / len,
        ];
        let sigma = SphereDirection::normalize(&[-axis[1], axis[0]]).expect("nonzero axis");
        (a.to_vec(), b.to_vec(), sigma)
    }

    fn arc_range(&self, i: usize) -> (f64, f64) {
        // arc centered at vertex i joins the two other vertices
        let c = self.vertices[i];
        let p = self.vertices[(i + 1) % 3];
        let q = self.vertices[(i + 2) % 3];
        let ap = (p[1] - c[1]).atan2(p[0] - c[0]);
        let mut aq = (q[1] - c[1]).atan2(q[0] - c[0]);
        while aq < ap {
            aq += 2.0 * PI;
        }
        if aq - ap > PI {
            (aq, ap + 2.0 * PI)
        } else {
            (ap, aq)
        }
    }
}

impl ShapeOracle for ReuleauxTriangle {
    fn dim(&self) -> Dimension {
        Dimension::new(2).unwrap()
    }

    fn contains(&self, x: &[f64]) -> bool {
        let r = self.width * (1.0 + 4.0 * f64::EPSILON);
        self.vertices
            .iter()
            .all(|p| (x[0] - p[0]).hypot(x[1] - p[1]) <= r)
    }

    fn distance(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        // nearest point is a vertex or the radial projection onto an arc
        let mut best = f64::INFINITY;
        for p in &self.vertices {
            best = best.min((x[0] - p[0]).hypot(x[1] - p[1]));
        }
        for p in &self.vertices {
            let d = (x[0] - p[0]).hypot(x[1] - p[1]);
            if d == 0.0 {
                continue;
            }
            let q = [
                p[0] + self.width * (x[0] - p[0]) / d,
                p[1] + self.width * (x[1] - p[1]) / d,
            ];
            let inside = self
                .vertices
                .iter()
                .all(|v| (q[0] - v[0]).hypot(q[1] - v[1]) <= self.width * (1.0 + 1e-12));
            if inside {
                best = best.min((d - self.width).abs());
            }
        }
        best
    }

    fn boundary_point(&self, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>) {
        let i = rng.random_range(0..3usize);
        let (lo, hi) = self.arc_range(i);
        let t = lo + (hi - lo) * rng.random::<f64>();
        let c = self.vertices[i];
        let normal = vec![t.cos(), t.sin()];
        (
            vec![c[0] + self.width * normal[0], c[1] + self.width * normal[1]],
            normal,
        )
    }

    fn interior_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        let r = self.width;
        loop {
            let x = vec![rng.random_range(-r..r), rng.random_range(-r..r)];
            if self.contains(&x) {
                return x;
            }
        }
    }

    fn diameter_bound(&self) -> f64 {
        self.width
    }
}

/// A triple for which neither post-collision point is in the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
    pub candidate1: Vec<f64>,
    pub candidate2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub pairs_tested: u64,
    pub failures: Vec<Witness>,
    pub pass: bool,
}

/// Default membership slack, relative to the diameter bound.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Tests one triple; a point within `slack` of the set counts as inside.
pub fn check_triple<K: ShapeOracle + ?Sized>(
    k: &K,
    x: &[f64],
    y: &[f64],
    sigma: &[f64],
    slack: f64,
) -> Option<Witness> {
    let (c1, c2) = collide(x, y, sigma);
    if k.distance(&c1) <= slack || k.distance(&c2) <= slack {
        return None;
    }
    Some(Witness {
        x: x.to_vec(),
        y: y.to_vec(),
        sigma: sigma.to_vec(),
        candidate1: c1,
        candidate2: c2,
    })
}

/// Samples `mc.samples` triples `(x, y, sigma)` with `x, y` on the boundary
/// and `sigma` uniform, and collects the triples where both
/// `(x+y)/2 +- |x-y| sigma / 2` miss the set.
pub fn check_condition_41<K: ShapeOracle + ?Sized>(
    k: &K,
    mc: &McConfig,
    slack: f64,
) -> Result<ConditionReport> {
    let n = k.dim().get();
    let chunks = par_map_chunks(mc, |range| {
        let mut found = Vec::new();
        for i in range {
            let mut rng = stream_rng(mc.seed, i);
            let (x, _) = k.boundary_point(&mut rng);
            let (y, _) = k.boundary_point(&mut rng);
            let sigma = uniform_direction(&mut rng, n);
            if let Some(w) = check_triple(k, &x, &y, &sigma, slack) {
                found.push(w);
            }
        }
        found
    })?;
    let failures: Vec<Witness> = chunks.into_iter().flatten().collect();
    Ok(ConditionReport {
        pairs_tested: mc.samples,
        pass: failures.is_empty(),
        failures,
    })
}

/// `|m + h sigma - x0|^2 + |m - h sigma - x0|^2 - |x - x0|^2 - |y - x0|^2`
/// in absolute value, with `m = (x+y)/2`, `h = |x-y|/2`.
pub fn necessity_identity_residual(
    x: &[f64],
    y: &[f64],
    x0: &[f64],
    sigma: &SphereDirection,
) -> f64 {
    let (p, q) = collide(x, y, sigma.components());
    let sq = |a: &[f64]| numerics::dist(a, x0).powi(2);
    ((sq(&p) + sq(&q)) - (sq(x) + sq(y))).abs()
}

/// Share of directions `sigma` for which `v'` or `v*'` lies in `e`.
pub fn sphere_fraction<K: ShapeOracle + ?Sized>(
    e: &K,
    v: &[f64],
    v_star: &[f64],
    mc: &McConfig,
) -> Result<McEstimate> {
    let n = e.dim();
    check_dim(v, n)?;
    check_dim(v_star, n)?;
    if numerics::dist(v, v_star) == 0.0 {
        return Err(GeometryError::DegeneratePair);
    }
    let [est] = mc_estimate(mc, |_, rng| {
        [hit(e, v, v_star, &uniform_direction(rng, n.get()))]
    })?;
    Ok(est)
}

fn hit<K: ShapeOracle + ?Sized>(e: &K, v: &[f64], v_star: &[f64], sigma: &[f64]) -> f64 {
    let (p, q) = collide(v, v_star, sigma);
    if e.contains(&p) || e.contains(&q) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    /// Minimum sampled sphere fraction; biased low as an estimate of the
    /// essential infimum.
    pub lambda_hat: f64,
    /// Binomial standard error of the minimizing pair's fraction.
    pub std_error: f64,
    pub pairs: u64,
    pub directions_per_pair: u64,
    pub worst_pair: (Vec<f64>, Vec<f64>),
}

/// Minimum over `mc.samples` pairs `(v, v*)` uniform in `e` of the sphere
/// fraction, each estimated from `directions_per_pair` directions.
pub fn lambda_estimate<K: ShapeOracle + ?Sized>(
    e: &K,
    directions_per_pair: u64,
    mc: &McConfig,
) -> Result<LambdaEstimate> {
    if directions_per_pair == 0 {
        return Err(
            NumericsError::InvalidMcConfig("directions_per_pair must be at least 1").into(),
        );
    }
    let n = e.dim().get();
    let m = directions_per_pair as f64;
    let per_chunk = par_map_chunks(mc, |range| {
        let mut best: Option<(f64, u64, Vec<f64>, Vec<f64>)> = None;
        for i in range {
            let mut rng = stream_rng(mc.seed, i);
            let v = e.interior_point(&mut rng);
            let vs = e.interior_point(&mut rng);
            let hits: f64 = (0..directions_per_pair)
                .map(|_| hit(e, &v, &vs, &uniform_direction(&mut rng, n)))
                .sum();
            let p = hits / m;
            if best.as_ref().is_none_or(|b| p < b.0) {
                best = Some((p, i, v, vs));
            }
        }
        best
    })?;
    let (p, _, v, vs) = per_chunk
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one pair");
    Ok(LambdaEstimate {
        lambda_hat: p,
        std_error: (p * (1.0 - p) / m).sqrt(),
        pairs: mc.samples,
        directions_per_pair,
        worst_pair: (v, vs),
    })
}

/// Lower bound on the sphere fraction over pairs in the annulus
/// `eps <= |v| <= 1`:
/// `int_0^x (1-t^2)^{(n-3)/2} dt / int_0^1 (1-t^2)^{(n-3)/2} dt`,
/// `x = (1 - eps^2)/(1 + eps^2)`, evaluated after `t = sin u`.
pub fn annulus_lambda_bound(eps: f64, n: Dimension, spec: &QuadratureSpec) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GeometryError::InvalidShape(format!("inner radius {eps}")));
    }
    let x = (1.0 - eps * eps) / (1.0 + eps * eps);
    let k = n.get() as i32 - 2;
    let top = try_integrate_1d(|u: f64| Ok(u.cos().powi(k)), 0.0, x.asin(), spec)?;
    Ok(top / wallis(k as f64))
}

/// How far from `v` the last argument of `F` may reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reach {
    /// `F(c, x, y) = 0` whenever `|y - v| > radius`.
    Ball { radius: f64 },
    /// `F(c, x, y)` decays at least like `exp(-|y - v|^2 / (2 scale^2))`.
    Gaussian { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: McEstimate,
    pub rhs: f64,
}

impl IdentityCheck {
    /// `|lhs - rhs|` in units of the Monte-Carlo standard error.
    pub fn z_score(&self) -> f64 {
        if self.lhs.std_error > 0.0 {
            (self.lhs.mean - self.rhs).abs() / self.lhs.std_error
        } else if self.lhs.mean == self.rhs {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

// An orthonormal basis of the complement of the unit vector `w`.
fn complement_basis(w: &[f64]) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let mut proj = numerics::dot(&e, w);
        for (x, a) in e.iter_mut().zip(w) {
            *x -= proj * a;
        }
        for b in &basis {
            proj = numerics::dot(&e, b);
            for (x, a) in e.iter_mut().zip(b) {
                *x -= proj * a;
            }
        }
        let len = numerics::norm(&e);
        if len > 1e-6 {
            basis.push(e.into_iter().map(|x| x / len).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Both sides of the change of variables
/// `int int F(<n, sigma>, v*', v*) dv* d sigma =
///  2^{n-1} int dv* int_0^{pi/2} sin^{n-2}/cos^2 int_{S^{n-2}(n)}
///  F(cos 2 theta, v*, v* + |v - v*| tan(theta) s) ds d theta`,
/// `n = (v - v*)/|v - v*|`, `v*' = (v+v*)/2 - |v-v*| sigma/2`.
///
/// The left side is sampled, the right side is nested quadrature.
pub fn lemma54_identity_check<F>(
    f: F,
    reach: Reach,
    v: &[f64],
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<IdentityCheck>
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Sync,
{
    let n = Dimension::new(v.len()).map_err(|e| GeometryError::InvalidShape(e.to_string()))?;
    let k = n.get();
    let area = sphere_area(n);

    let [lhs] = mc_estimate(mc, |_, rng| {
        let (vs, w) = match reach {
            Reach::Ball { radius } => (
                uniform_ball_point(rng, v, radius),
                area * radius.powi(k as i32) / k as f64,
            ),
            Reach::Gaussian { scale } => {
                let mut z2 = 0.0;
                let vs: Vec<f64> = v
                    .iter()
                    .map(|c| {
                        let z: f64 = rng.sample(StandardNormal);
                        z2 += z * z;
                        c + scale * z
                    })
                    .collect();
                (
                    vs,
                    (2.0 * PI * scale * scale).powf(0.5 * k as f64) * (0.5 * z2).exp(),
                )
            }
        };
        let sigma = uniform_direction(rng, k);
        let d = numerics::dist(v, &vs);
        if d == 0.0 {
            return [0.0];
        }
        let c = v
            .iter()
            .zip(&vs)
            .zip(&sigma)
            .map(|((a, b), s)| (a - b) * s)
            .sum::<f64>()
            / d;
        let (_, vsp) = collide(v, &vs, &sigma);
        [area * w * f(c, &vsp, &vs)]
    })?;

    let l1 = spec.nested(0.1);
    let l2 = l1.nested(0.1);
    let l3 = l2.nested(0.1);
    let fail = |e: NumericsError| e;

    // innermost: the sphere S^{n-2} orthogonal to n = -omega
    let fiber = |c: f64, vs: &[f64], omega: &[f64], step: f64| -> numerics::Result<f64> {
        let basis = complement_basis(omega);
        let point = |u: &[f64]| -> Vec<f64> {
            let mut w = vs.to_vec();
            for (b, t) in basis.iter().zip(u) {
                for (x, e) in w.iter_mut().zip(b) {
                    *x += step * t * e;
                }
            }
            w
        };
        if k == 2 {
            Ok(f(c, vs, &point(&[1.0])) + f(c, vs, &point(&[-1.0])))
        } else {
            numerics::sphere_integral(|u| f(c, vs, &point(u)), k - 1, &l3)
        }
    };
    let shell = |theta: f64| -> numerics::Result<f64> {
        let (s, cth) = theta.sin_cos();
        if cth <= 0.0 {
            return Ok(0.0);
        }
        let c2 = (2.0 * theta).cos();
        let radial = |rho: f64| -> numerics::Result<f64> {
            if rho == 0.0 {
                return Ok(0.0);
            }
            let err = std::cell::RefCell::new(None);
            let ang = numerics::sphere_integral(
                |omega| {
                    let vs: Vec<f64> = v.iter().zip(omega).map(|(a, o)| a + rho * o).collect();
                    match fiber(c2, &vs, omega, rho * s / cth) {
                        Ok(x) => x,
                        Err(e) => {
                            err.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                k,
                &l2,
            );
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            Ok(rho.powi(k as i32 - 1) * ang?)
        };
        let inner = match reach {
            Reach::Ball { radius } => try_integrate_1d(radial, 0.0, radius * cth, &l1)?,
            Reach::Gaussian { scale } => try_integrate_tail(
                radial,
                0.0,
                &[],
                &l1,
                1.0 / (2.0 * scale * scale * cth * cth),
            )?,
        };
        Ok(s.powi(k as i32 - 2) / (cth * cth) * inner)
    };
    let rhs = try_integrate_breaks(shell, &[0.0, 0.5 * PI], spec).map_err(fail)?;
    Ok(IdentityCheck {
        lhs,
        rhs: 2f64.powi(k as i32 - 1) * rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallAverageCheck {
    /// `r^{-n} int_{B_r(v)} f`
    pub lhs: f64,
    pub rhs: McEstimate,
}

impl BallAverageCheck {
    pub fn holds(&self, sigmas: f64) -> bool {
        self.lhs >= self.rhs.mean - sigmas * self.rhs.std_error
    }
}

/// Both sides of
/// `r^{-n} int_{B_r(v)} f >= int int sqrt(1 - <w,s>^2) / (2^{n+1} |S^{n-2}|)
///  (f(v + r(w+s)/2) + f(v + r(w-s)/2)) ds dw`.
pub fn ball_average_inequality_check(
    f: &Density,
    v: &[f64],
    r: f64,
    spec: &QuadratureSpec,
    mc: &McConfig,
) -> Result<BallAverageCheck> {
    let n = f.dim();
    check_dim(v, n)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeometryError::InvalidShape(format!("radius {r}")));
    }
    let k = n.get();
    let area = sphere_area(n);
    let d = numerics::dist(v, &f.center());
    let mut pts = vec![0.0];
    let mut extra: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .chain(f.support_radius())
        .flat_map(|b| [(d - b).abs(), d + b])
        .filter(|x| *x > 0.0 && *x < r)
        .collect();
    extra.sort_by(f64::total_cmp);
    pts.extend(extra);
    pts.push(r);
    pts.dedup();
    let inner = spec.nested(0.1);
    let mass = try_integrate_breaks(
        |rho| {
            let avg = f
                .spherical_average_about(v, rho, &inner)
                .map_err(|e| match e {
                    DensityError::Numerics(e) => e,
                    _ => NumericsError::InvalidSpec("spherical average failed"),
                })?;
            Ok(rho.powi(k as i32 - 1) * area * avg)
        },
        &pts,
        spec,
    )?;
    let lhs = mass / r.powi(k as i32);
    let norm = 2f64.powi(k as i32 + 1) * sphere_area_codim(n);
    let [rhs] = mc_estimate(mc, |_, rng| {
        let w = uniform_direction(rng, k);
        let s = uniform_direction(rng, k);
        let c = numerics::dot(&w, &s);
        let p: Vec<f64> = (0..k).map(|i| v[i] + 0.5 * r * (w[i] + s[i])).collect();
        let q: Vec<f64> = (0..k).map(|i| v[i] + 0.5 * r * (w[i] - s[i])).collect();
        [area * area * (1.0 - c * c).max(0.0).sqrt() / norm * (f.value_at(&p) + f.value_at(&q))]
    })?;
    Ok(BallAverageCheck { lhs, rhs })
}
