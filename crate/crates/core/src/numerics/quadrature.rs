use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{NumericsError, Result};

/// Tolerances for the adaptive integrators.
///
/// An integral is accepted once the summed error estimate drops below
/// `max(abs_tol, rel_tol * |estimate|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(NumericsError::InvalidSpec("abs_tol must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(NumericsError::InvalidSpec("rel_tol must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(NumericsError::InvalidSpec(
                "max_subdivisions must be at least 1",
            ));
        }
        Ok(())
    }

    /// Spec for an integral nested inside another one: tolerances shrink by
    /// `factor`, but never below what double precision can deliver.
    pub fn nested(&self, factor: f64) -> Self {
        QuadratureSpec {
            abs_tol: (self.abs_tol * factor).max(1e-300),
            rel_tol: (self.rel_tol * factor).max(REL_TOL_FLOOR),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

fn eval<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFinite { x })
    }
}

/// One Gauss-Kronrod 21 panel. Returns (estimate, error estimate) with the
/// QUADPACK error rescaling.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let habs = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * habs;
    let res_asc = res_asc * habs;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Relative tolerances below this are unreachable with the 50-epsilon error
/// floor of the Kronrod estimate and are raised to it.
const REL_TOL_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Globally adaptive integration over the union of the intervals delimited by
/// `points` (sorted, at least two). Interior points are where the integrand
/// may jump or kink.
pub fn try_integrate_breaks<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if points.len() < 2 {
        return Err(NumericsError::InvalidInterval {
            a: points.first().copied().unwrap_or(f64::NAN),
            b: f64::NAN,
        });
    }
    for w in points.windows(2) {
        if !(w[0] <= w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(NumericsError::InvalidInterval { a: w[0], b: w[1] });
        }
    }

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, error) = gk21(&mut f, w[0], w[1])?;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let sums = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    let (mut total, mut total_err) = sums(&heap);
    let rel_tol = spec.rel_tol.max(REL_TOL_FLOOR);
    let mut subdivisions = 0usize;
    loop {
        let estimate = total + frozen_value;
        let tol = spec.abs_tol.max(rel_tol * estimate.abs());
        if total_err + frozen_error <= tol {
            // running sums drift; confirm against a fresh summation
            let (v, e) = sums(&heap);
            total = v;
            total_err = e;
            let estimate = total + frozen_value;
            let tol = spec.abs_tol.max(rel_tol * estimate.abs());
            if total_err + frozen_error <= tol {
                return Ok(estimate);
            }
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Err(NumericsError::NonConvergence {
                    estimate,
                    error: frozen_error,
                    subdivisions,
                })
            }
        };
        if subdivisions >= spec.max_subdivisions {
            return Err(NumericsError::NonConvergence {
                estimate,
                error: total_err + frozen_error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        total -= worst.value;
        total_err -= worst.error;
        if mid <= worst.a || mid >= worst.b {
            // cannot be split further in floating point
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid)?;
        let (v2, e2) = gk21(&mut f, mid, worst.b)?;
        total += v1 + v2;
        total_err += e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

pub fn integrate_breaks<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_breaks(|x| Ok(f(x)), points, spec)
}

/// Fallible-integrand form of [`integrate_1d`], for nesting integrals.
/// `a == b` yields zero.
pub fn try_integrate_1d<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a <= b) {
        return Err(NumericsError::InvalidInterval { a, b });
    }
    if a == b {
        spec.validate()?;
        return Ok(0.0);
    }
    try_integrate_breaks(f, &[a, b], spec)
}

/// Adaptive Gauss-Kronrod (10/21) integration of `f` over `[a, b]`.
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_1d(|x| Ok(f(x)), a, b, spec)
}

/// `ln(1e16)`: the decay bound is followed until it falls below 1e-16.
const TAIL_LOG_RATIO: f64 = 36.841_361_487_904_734;
const MAX_TAIL_PANELS: usize = 100_000;

/// Integral of `f` over `[start, inf)` for integrands decaying at least like
/// `exp(-decay_hint * r^2)`.
///
/// The half line is cut into panels of width `1/sqrt(decay_hint)`. Panels are
/// added until the radius passes the point where `exp(-decay_hint r^2)`
/// drops below 1e-16 and the latest panel contributes less than 1e-16 of the
/// running estimate. Breakpoints in `breaks` (beyond `start`) are honoured.
pub fn try_integrate_tail<F>(
    mut f: F,
    start: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
    decay_hint: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(decay_hint > 0.0 && decay_hint.is_finite()) {
        return Err(NumericsError::InvalidDecayHint(decay_hint));
    }
    if !start.is_finite() {
        return Err(NumericsError::InvalidInterval {
            a: start,
            b: f64::INFINITY,
        });
    }
    spec.validate()?;
    let width = decay_hint.sqrt().recip();
    let r_decay = (TAIL_LOG_RATIO / decay_hint).sqrt();
    let mut interior: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > start && x.is_finite())
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();

    let mut total = 0.0;
    let mut lo = start;
    for panel in 0..MAX_TAIL_PANELS {
        let hi = start + (panel + 1) as f64 * width;
        let mut pts = vec![lo];
        pts.extend(interior.iter().copied().filter(|&x| x > lo && x < hi));
        pts.push(hi);
        let part = try_integrate_breaks(&mut f, &pts, spec)?;
        total += part;
        lo = hi;
        let beyond_breaks = interior.last().is_none_or(|&x| hi >= x);
        if hi >= r_decay && beyond_breaks && part.abs() <= 1e-16 * total.abs() {
            return Ok(total);
        }
    }
    Err(NumericsError::NonConvergence {
        estimate: total,
        error: f64::NAN,
        subdivisions: MAX_TAIL_PANELS,
    })
}

pub fn integrate_tail<F>(
    mut f: F,
    start: f64,
    spec: &QuadratureSpec,
    decay_hint: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_tail(|x| Ok(f(x)), start, &[], spec, decay_hint)
}

/// Integral of `f` over `[0, inf)`; see [`try_integrate_tail`].
pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec, decay_hint: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_tail(|x| Ok(f(x)), 0.0, &[], spec, decay_hint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    // Midpoint-rule oracle, independent of the Kronrod rule.
    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn linear_is_exact() {
        let v = integrate_1d(|x| x, 0.0, 1.0, &spec()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sin_squared_matches_closed_form_and_riemann() {
        let f = |x: f64| x.sin().powi(2);
        let v = integrate_1d(f, 0.0, FRAC_PI_2, &spec()).unwrap();
        assert!((v - FRAC_PI_4).abs() < 1e-12);
        let oracle = riemann(f, 0.0, FRAC_PI_2, 200_000);
        assert!((v - oracle).abs() < 1e-9);
    }

    #[test]
    fn fermi_step_to_ln2() {
        let v = integrate_1d(|x| 1.0 / (1.0 + x.exp()), 0.0, 50.0, &spec()).unwrap();
        assert!((v - LN_2).abs() < 1e-10, "{v}");
    }

    #[test]
    fn polynomials_up_to_degree_ten() {
        for deg in 0..=10 {
            let v = integrate_1d(|x| x.powi(deg), 0.0, 1.0, &spec()).unwrap();
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn discontinuity_with_and_without_breaks() {
        let step = |x: f64| if x <= 0.3 { 1.0 } else { 0.0 };
        let v = integrate_breaks(step, &[0.0, 0.3, 1.0], &spec()).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        let w = integrate_1d(step, 0.0, 1.0, &spec()).unwrap();
        assert!((w - 0.3).abs() < 1e-11, "{w}");
    }

    #[test]
    fn semi_infinite_gaussian_moments() {
        let v = integrate_semi_infinite(|r| r * (-r * r).exp(), &spec(), 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let g = integrate_semi_infinite(|r| (-r * r).exp(), &spec(), 1.0).unwrap();
        assert!((g - PI.sqrt() / 2.0).abs() < 1e-12);
        let z = integrate_semi_infinite(|_| 0.0, &spec(), 1.0).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn semi_infinite_rejects_bad_hint() {
        assert!(matches!(
            integrate_semi_infinite(|r| (-r * r).exp(), &spec(), 0.0),
            Err(NumericsError::InvalidDecayHint(_))
        ));
    }

    #[test]
    fn non_convergence_is_reported() {
        let tight = QuadratureSpec::new(1e-300, 1e-300, 1).unwrap();
        let r = integrate_1d(|x| (1.0 / (x + 1e-3)).sin(), 0.0, 1.0, &tight);
        assert!(matches!(r, Err(NumericsError::NonConvergence { .. })));
    }

    #[test]
    fn invalid_spec_and_interval() {
        assert!(QuadratureSpec::new(0.0, 1e-10, 10).is_err());
        assert!(QuadratureSpec::new(1e-12, 1e-10, 0).is_err());
        assert!(integrate_1d(|x| x, 1.0, 0.0, &spec()).is_err());
        assert!(integrate_1d(|_| f64::NAN, 0.0, 1.0, &spec()).is_err());
    }
}
