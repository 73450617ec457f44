use super::{NumericsError, Result};

const EXPANSION_LIMIT: f64 = 1.606_938_044_258_990_3e60; // 2^200
const REL_WIDTH: f64 = 1e-12;

/// Solves `g(x) = target` for `g` strictly increasing on `(0, inf)`.
///
/// The seed bracket is widened geometrically (halving the lower end, doubling
/// the upper end) until it straddles the target, then bisected to relative
/// width 1e-12. Bisection is geometric while the bracket spans more than a
/// factor of two, so brackets covering many decades close quickly.
pub fn try_bisect_monotone<G>(mut g: G, target: f64, bracket_seed: (f64, f64)) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket_seed;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || !target.is_finite() {
        return Err(NumericsError::InvalidInterval { a: lo, b: hi });
    }
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    let fail = |lo, hi, g_lo, g_hi| NumericsError::BracketFailure {
        target,
        lo,
        hi,
        g_lo,
        g_hi,
    };
    while g_lo > target {
        if lo < EXPANSION_LIMIT.recip() {
            return Err(fail(lo, hi, g_lo, g_hi));
        }
        hi = lo;
        g_hi = g_lo;
        lo *= 0.5;
        g_lo = g(lo)?;
    }
    while g_hi < target {
        if hi > EXPANSION_LIMIT {
            return Err(fail(lo, hi, g_lo, g_hi));
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi)?;
    }
    if g_lo == target {
        return Ok(lo);
    }
    if g_hi == target {
        return Ok(hi);
    }
    while hi - lo > REL_WIDTH * hi {
        let mid = if hi > 2.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == target {
            return Ok(mid);
        }
        if g_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`try_bisect_monotone`] for infallible `g`.
pub fn bisect_monotone<G>(mut g: G, target: f64, bracket_seed: (f64, f64)) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    try_bisect_monotone(|x| Ok(g(x)), target, bracket_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponential_root() {
        let x = bisect_monotone(f64::exp, std::f64::consts::E, (0.1, 1.0)).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_root() {
        let x = bisect_monotone(|x| x * x * x, 8.0, (1.0, 2.0)).unwrap();
        assert!((x - 2.0).abs() < 1e-11);
    }

    #[test]
    fn target_below_range_fails() {
        let r = bisect_monotone(|x| x, -1.0, (0.5, 1.0));
        assert!(matches!(r, Err(NumericsError::BracketFailure { .. })));
    }

    #[test]
    fn target_above_bounded_range_fails() {
        let r = bisect_monotone(|x| x / (1.0 + x), 2.0, (0.5, 1.0));
        assert!(matches!(r, Err(NumericsError::BracketFailure { .. })));
    }

    #[test]
    fn bad_seed() {
        assert!(bisect_monotone(|x| x, 1.0, (0.0, 1.0)).is_err());
        assert!(bisect_monotone(|x| x, 1.0, (2.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn recovers_interior_point(x0 in 1e-6f64..1e6, p in 0.2f64..4.0, lo in 1e-3f64..10.0) {
            let g = |x: f64| x.powf(p) + x.ln();
            let x = bisect_monotone(g, g(x0), (lo, 2.0 * lo)).unwrap();
            prop_assert!(((x - x0) / x0).abs() < 1e-10);
        }
    }
}
