//! Admissible densities `0 <= f <= 1` on `R^n`, all radial about a center.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fermi::{fermi_weight, sphere_area, sphere_area_codim, Dimension, FermiError};
use crate::numerics::{
    self, try_bisect_monotone, try_integrate_breaks, try_integrate_tail, NumericsError,
    QuadratureSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid density: {0}")]
    InvalidParameter(String),
    #[error("density has zero mass")]
    ZeroMass,
    #[error("degenerate radial profile: {0}")]
    DegenerateProfile(String),
    #[error("could not read radial grid: {0}")]
    Input(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Fermi(#[from] FermiError),
}

pub type Result<T, E = DensityError> = std::result::Result<T, E>;

/// Default relative tolerance for declaring the moment inequality an equality.
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-8;

fn invalid(msg: impl Into<String>) -> DensityError {
    DensityError::InvalidParameter(msg.into())
}

fn check_center(v0: &[f64], n: Dimension) -> Result<()> {
    if v0.len() != n.get() {
        return Err(DensityError::DimensionMismatch {
            expected: n.get(),
            got: v0.len(),
        });
    }
    if v0.iter().any(|x| !x.is_finite()) {
        return Err(invalid("center must be finite"));
    }
    Ok(())
}

/// `a e^{-b|v-v0|^2} / (1 + a e^{-b|v-v0|^2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiDiracDensity {
    pub a: f64,
    pub b: f64,
    pub v0: Vec<f64>,
    pub n: Dimension,
}

impl FermiDiracDensity {
    pub fn new(a: f64, b: f64, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("need a > 0 and b > 0, got a={a}, b={b}")));
        }
        check_center(&v0, n)?;
        Ok(FermiDiracDensity { a, b, v0, n })
    }

    pub fn centered(a: f64, b: f64, n: Dimension) -> Result<Self> {
        Self::new(a, b, vec![0.0; n.get()], n)
    }

    pub fn profile(&self, r: f64) -> f64 {
        fermi_weight(self.b * r * r - self.a.ln())
    }
}

/// Indicator of the closed ball `|v - v0| <= R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDensity {
    pub radius: f64,
    pub v0: Vec<f64>,
    pub n: Dimension,
}

impl BallDensity {
    pub fn new(radius: f64, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        check_center(&v0, n)?;
        Ok(BallDensity { radius, v0, n })
    }

    pub fn centered(radius: f64, n: Dimension) -> Result<Self> {
        Self::new(radius, vec![0.0; n.get()], n)
    }

    pub fn profile(&self, r: f64) -> f64 {
        if r <= self.radius {
            1.0
        } else {
            0.0
        }
    }
}

/// Indicator of `eps <= |v| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDensity {
    pub eps: f64,
    pub n: Dimension,
}

impl AnnulusDensity {
    pub fn new(eps: f64, n: Dimension) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!(
                "annulus inner radius must lie in (0, 1), got {eps}"
            )));
        }
        Ok(AnnulusDensity { eps, n })
    }

    pub fn profile(&self, r: f64) -> f64 {
        if r >= self.eps && r <= 1.0 {
            1.0
        } else {
            0.0
        }
    }
}

/// Piecewise-linear radial profile about `v0`, zero beyond the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGridDensity {
    radii: Vec<f64>,
    values: Vec<f64>,
    v0: Vec<f64>,
    n: Dimension,
}

impl RadialGridDensity {
    pub fn new(radii: Vec<f64>, values: Vec<f64>, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(invalid("radii and values differ in length"));
        }
        if radii.len() < 2 {
            return Err(invalid("a radial grid needs at least two nodes"));
        }
        if !(radii[0] >= 0.0) || radii.iter().any(|r| !r.is_finite()) {
            return Err(invalid("radii must be finite and nonnegative"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("radii must be strictly increasing"));
        }
        if let Some(y) = values.iter().find(|y| !(**y >= 0.0 && **y <= 1.0)) {
            return Err(invalid(format!("values must lie in [0, 1], got {y}")));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(invalid("the last value must be 0 (compact support)"));
        }
        check_center(&v0, n)?;
        Ok(RadialGridDensity {
            radii,
            values,
            v0,
            n,
        })
    }

    /// Reads `r,value` rows; a non-numeric first row is taken as a header.
    pub fn from_csv_reader<R: Read>(reader: R, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| DensityError::Input(e.to_string()))?;
            if record.len() != 2 {
                return Err(DensityError::Input(format!(
                    "row {}: expected 2 columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(r), Ok(y)) => {
                    radii.push(r);
                    values.push(y);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(DensityError::Input(format!(
                        "row {}: not a number",
                        line + 1
                    )));
                }
            }
        }
        Self::new(radii, values, v0, n)
    }

    pub fn from_csv_path(path: &Path, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| DensityError::Input(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file, v0, n)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn profile(&self, r: f64) -> f64 {
        let (rs, ys) = (&self.radii, &self.values);
        if r <= rs[0] {
            return ys[0];
        }
        if r >= rs[rs.len() - 1] {
            return 0.0;
        }
        let k = rs.partition_point(|x| *x <= r);
        let (r0, r1) = (rs[k - 1], rs[k]);
        let w = (r - r0) / (r1 - r0);
        (1.0 - w) * ys[k - 1] + w * ys[k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    FermiDirac(FermiDiracDensity),
    Ball(BallDensity),
    Annulus(AnnulusDensity),
    RadialGrid(RadialGridDensity),
}

impl From<FermiDiracDensity> for Density {
    fn from(d: FermiDiracDensity) -> Self {
        Density::FermiDirac(d)
    }
}

impl From<BallDensity> for Density {
    fn from(d: BallDensity) -> Self {
        Density::Ball(d)
    }
}

impl From<AnnulusDensity> for Density {
    fn from(d: AnnulusDensity) -> Self {
        Density::Annulus(d)
    }
}

impl From<RadialGridDensity> for Density {
    fn from(d: RadialGridDensity) -> Self {
        Density::RadialGrid(d)
    }
}

/// Mass and centered second moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub m0: f64,
    pub m2: f64,
    pub v0: Vec<f64>,
    pub n: Dimension,
}

impl Moments {
    pub fn new(m0: f64, m2: f64, v0: Vec<f64>, n: Dimension) -> Result<Self> {
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(DensityError::ZeroMass);
        }
        if !(m2 > 0.0 && m2.is_finite()) {
            return Err(invalid(format!("second moment must be positive, got {m2}")));
        }
        check_center(&v0, n)?;
        Ok(Moments { m0, m2, v0, n })
    }

    pub fn centered(m0: f64, m2: f64, n: Dimension) -> Result<Self> {
        Self::new(m0, m2, vec![0.0; n.get()], n)
    }

    /// `M_2 / M_0^{(n+2)/n}`, invariant under translation and the scaling
    /// `f(v) -> f(lambda v)`.
    pub fn ratio(&self) -> f64 {
        self.m2 / self.m0.powf(self.n.ratio_exponent())
    }
}

impl Density {
    pub fn dim(&self) -> Dimension {
        match self {
            Density::FermiDirac(d) => d.n,
            Density::Ball(d) => d.n,
            Density::Annulus(d) => d.n,
            Density::RadialGrid(d) => d.n,
        }
    }

    /// Center of radial symmetry, which is also the barycenter.
    pub fn center(&self) -> std::borrow::Cow<'_, [f64]> {
        match self {
            Density::FermiDirac(d) => (&d.v0[..]).into(),
            Density::Ball(d) => (&d.v0[..]).into(),
            Density::Annulus(d) => vec![0.0; d.n.get()].into(),
            Density::RadialGrid(d) => (&d.v0[..]).into(),
        }
    }

    /// Value at distance `r` from the center.
    pub fn profile(&self, r: f64) -> f64 {
        match self {
            Density::FermiDirac(d) => d.profile(r),
            Density::Ball(d) => d.profile(r),
            Density::Annulus(d) => d.profile(r),
            Density::RadialGrid(d) => d.profile(r),
        }
    }

    /// Radii where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::FermiDirac(d) if d.a > 1.0 => vec![(d.a.ln() / d.b).sqrt()],
            Density::FermiDirac(_) => Vec::new(),
            Density::Ball(d) => vec![d.radius],
            Density::Annulus(d) => vec![d.eps, 1.0],
            Density::RadialGrid(d) => d.radii.clone(),
        }
    }

    /// Radius of the support about the center, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Density::FermiDirac(_) => None,
            Density::Ball(d) => Some(d.radius),
            Density::Annulus(_) => Some(1.0),
            Density::RadialGrid(d) => Some(*d.radii.last().unwrap()),
        }
    }

    fn decay_hint(&self) -> f64 {
        match self {
            Density::FermiDirac(d) => d.b,
            _ => 1.0,
        }
    }

    /// `f(v)` without the dimension check.
    pub fn value_at(&self, v: &[f64]) -> f64 {
        self.profile(numerics::dist(v, &self.center()))
    }

    /// `1 - f(v)`, accurate also where `f` is close to 1.
    pub fn complement_at(&self, v: &[f64]) -> f64 {
        match self {
            Density::FermiDirac(d) => {
                let r = numerics::dist(v, &d.v0);
                fermi_weight(d.a.ln() - d.b * r * r)
            }
            _ => 1.0 - self.value_at(v),
        }
    }

    pub fn evaluate(&self, v: &[f64]) -> Result<f64> {
        let n = self.dim().get();
        if v.len() != n {
            return Err(DensityError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        Ok(self.value_at(v))
    }

    /// `|S^{n-1}| int_0^inf r^{n-1} g(r, f(r)) dr`.
    pub fn radial_integral<G>(&self, mut g: G, spec: &QuadratureSpec) -> Result<f64>
    where
        G: FnMut(f64, f64) -> f64,
    {
        let n = self.dim();
        let k = n.get() as i32 - 1;
        let breaks = self.breakpoints();
        let mut integrand = |r: f64| Ok(r.powi(k) * g(r, self.profile(r)));
        let v = match self.support_radius() {
            Some(s) => {
                let mut pts = vec![0.0];
                pts.extend(breaks.into_iter().filter(|b| *b > 0.0 && *b < s));
                pts.push(s);
                try_integrate_breaks(&mut integrand, &pts, spec)?
            }
            None => try_integrate_tail(&mut integrand, 0.0, &breaks, spec, self.decay_hint())?,
        };
        Ok(sphere_area(n) * v)
    }

    /// `int f(v) |v - v0|^k dv`.
    pub fn radial_moment(&self, k: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.radial_integral(|r, y| if k == 0.0 { y } else { r.powf(k) * y }, spec)
    }

    pub fn compute_moments(&self, spec: &QuadratureSpec) -> Result<Moments> {
        let m0 = self.radial_moment(0.0, spec)?;
        if !(m0 > 0.0) {
            return Err(DensityError::ZeroMass);
        }
        let m2 = self.radial_moment(2.0, spec)?;
        Moments::new(m0, m2, self.center().into_owned(), self.dim())
    }

    /// `int -(1-f) ln(1-f) - f ln f dv`, with `y ln y = 0` at `y in {0, 1}`.
    pub fn entropy(&self, spec: &QuadratureSpec) -> Result<f64> {
        self.radial_integral(|_, y| fermi_entropy_density(y), spec)
    }

    /// Average of `f` over the sphere of radius `rho` about `point`.
    pub fn spherical_average_about(
        &self,
        point: &[f64],
        rho: f64,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        let n = self.dim();
        if point.len() != n.get() {
            return Err(DensityError::DimensionMismatch {
                expected: n.get(),
                got: point.len(),
            });
        }
        if !(rho >= 0.0) {
            return Err(invalid(format!("radius must be nonnegative, got {rho}")));
        }
        let d = numerics::dist(point, &self.center());
        if d == 0.0 || rho == 0.0 {
            return Ok(self.profile(d.max(rho)));
        }
        // zonal integral over the angle phi between (w - point) and (center - point)
        let mut pts = vec![0.0];
        for beta in self.breakpoints() {
            let c = (d * d + rho * rho - beta * beta) / (2.0 * d * rho);
            if c > -1.0 && c < 1.0 {
                pts.push(c.acos());
            }
        }
        pts.push(PI);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let k = n.get() as i32 - 2;
        let v = try_integrate_breaks(
            |phi| {
                let r2 = d * d + rho * rho - 2.0 * d * rho * phi.cos();
                Ok(phi.sin().powi(k) * self.profile(r2.max(0.0).sqrt()))
            },
            &pts,
            spec,
        )?;
        Ok(sphere_area_codim(n) * v / sphere_area(n))
    }

    /// Spherical average about the barycenter.
    pub fn radial_average(&self, r: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.spherical_average_about(&self.center(), r, spec)
    }

    /// Smallest radius about the center holding `fraction` of the mass.
    pub fn mass_radius(&self, fraction: f64, spec: &QuadratureSpec) -> Result<f64> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(invalid(format!(
                "mass fraction must lie in (0, 1], got {fraction}"
            )));
        }
        if let Some(s) = self.support_radius() {
            if fraction == 1.0 {
                return Ok(s);
            }
        }
        let total = self.radial_moment(0.0, spec)?;
        if !(total > 0.0) {
            return Err(DensityError::ZeroMass);
        }
        let n = self.dim();
        let k = n.get() as i32 - 1;
        let breaks = self.breakpoints();
        let cumulative = |big_r: f64| -> numerics::Result<f64> {
            let mut pts = vec![0.0];
            pts.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < big_r));
            pts.push(big_r);
            let m = try_integrate_breaks(|r| Ok(r.powi(k) * self.profile(r)), &pts, spec)?;
            Ok(sphere_area(n) * m / total)
        };
        let scale = self.support_radius().unwrap_or_else(|| {
            let d = match self {
                Density::FermiDirac(d) => d,
                _ => unreachable!(),
            };
            (d.a.ln().max(0.0) + 1.0).sqrt() / d.b.sqrt()
        });
        let r = try_bisect_monotone(cumulative, fraction, (0.5 * scale, scale))?;
        Ok(match self.support_radius() {
            Some(s) => r.min(s),
            None => r,
        })
    }

    /// Checks the moment inequality on this density's radial profile.
    pub fn moment_inequality(
        &self,
        p: f64,
        q: f64,
        tol: f64,
        spec: &QuadratureSpec,
    ) -> Result<MomentInequality> {
        let mut breaks = self.breakpoints();
        if let Some(s) = self.support_radius() {
            breaks.push(s);
        }
        moment_inequality_check(|r| self.profile(r), &breaks, p, q, tol, spec)
    }
}

/// `-y ln y - (1 - y) ln(1 - y)`, zero at the endpoints.
pub fn fermi_entropy_density(y: f64) -> f64 {
    if !(y > 0.0 && y < 1.0) {
        return 0.0;
    }
    -y * y.ln() - (1.0 - y) * (-y).ln_1p()
}

/// `int |f - g| dv` for two densities radial about the same center.
pub fn l1_distance(f: &Density, g: &Density, spec: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    if g.dim() != n {
        return Err(DensityError::DimensionMismatch {
            expected: n.get(),
            got: g.dim().get(),
        });
    }
    if numerics::dist(&f.center(), &g.center()) != 0.0 {
        return Err(invalid("densities must share a center"));
    }
    let k = n.get() as i32 - 1;
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integrand = |r: f64| Ok(r.powi(k) * (f.profile(r) - g.profile(r)).abs());
    let v = match (f.support_radius(), g.support_radius()) {
        (Some(a), Some(b)) => {
            let s = a.max(b);
            let mut pts = vec![0.0];
            pts.extend(breaks.into_iter().filter(|x| *x > 0.0 && *x < s));
            pts.push(s);
            try_integrate_breaks(integrand, &pts, spec)?
        }
        _ => {
            let hint = f.decay_hint().min(g.decay_hint());
            try_integrate_tail(integrand, 0.0, &breaks, spec, hint)?
        }
    };
    Ok(sphere_area(n) * v)
}

/// Both sides of `(p int r^{p-1} phi)^{1/p} <= (q int r^{q-1} phi)^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentInequality {
    pub lhs: f64,
    pub rhs: f64,
    /// Sides agree to the relative tolerance, which happens only for
    /// indicators of `[0, R]`.
    pub is_indicator_equality: bool,
}

/// Evaluates both sides for a profile `phi: [0, inf) -> [0, 1]` with the
/// given breakpoints. Profiles without compact support should decay at least
/// like `e^{-r^2}`.
pub fn moment_inequality_check<F>(
    phi: F,
    breaks: &[f64],
    p: f64,
    q: f64,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<MomentInequality>
where
    F: Fn(f64) -> f64,
{
    if !(p > 0.0 && q > p && q.is_finite()) {
        return Err(invalid(format!("need 0 < p < q, got p={p}, q={q}")));
    }
    let moment = |s: f64| -> Result<f64> {
        Ok(s * try_integrate_tail(|r| Ok(r.powf(s - 1.0) * phi(r)), 0.0, breaks, spec, 1.0)?)
    };
    let mq = moment(q)?;
    if !(mq > 0.0 && mq.is_finite()) {
        return Err(DensityError::DegenerateProfile(format!("q-moment is {mq}")));
    }
    let lhs = moment(p)?.powf(1.0 / p);
    let rhs = mq.powf(1.0 / q);
    Ok(MomentInequality {
        lhs,
        rhs,
        is_indicator_equality: (rhs - lhs).abs() <= tol * rhs,
    })
}
