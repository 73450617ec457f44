//! Classification of `(M_0, M_2)` into Fermi-Dirac and ball equilibria.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{l1_distance, BallDensity, Density, DensityError, FermiDiracDensity, Moments};
use crate::fermi::{
    fermi_i_log, fermi_p_log, sphere_area, threshold, Dimension, FermiError, FermiIntegralOrder,
};
use crate::numerics::{try_bisect_monotone, NumericsError, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("moment ratio {ratio} is below the admissible minimum {threshold}")]
    InfeasibleMoments { ratio: f64, threshold: f64 },
    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Fermi(#[from] FermiError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = EquilibriumError> = std::result::Result<T, E>;

/// Default relative tolerance on `|ratio - threshold|` for the ball case.
pub const DEFAULT_REGIME_TOL: f64 = 1e-9;

/// Bracket seed for the bisection in `t = 1/a`.
pub const INVERSION_SEED: (f64, f64) = (1e-8, 1e8);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime")]
pub enum Regime {
    /// Fermi-Dirac with coefficients `a`, `b`.
    RegimeI {
        a: f64,
        b: f64,
    },
    /// Ball indicator of radius `radius`.
    RegimeII {
        radius: f64,
    },
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    #[serde(flatten)]
    pub regime: Regime,
    pub ratio: f64,
    pub threshold: f64,
    pub tolerance: f64,
}

impl Classification {
    /// The equilibrium density with the classified moments, centered at `v0`.
    pub fn equilibrium(&self, v0: Vec<f64>, n: Dimension) -> Result<Option<Density>> {
        Ok(match self.regime {
            Regime::RegimeI { a, b } => Some(FermiDiracDensity::new(a, b, v0, n)?.into()),
            Regime::RegimeII { radius } => Some(BallDensity::new(radius, v0, n)?.into()),
            Regime::Infeasible => None,
        })
    }
}

fn relative_gap(ratio: f64, thr: f64) -> f64 {
    (ratio - thr) / thr
}

/// Like [`classify`], but reports moments below the admissible minimum as
/// [`Regime::Infeasible`] instead of failing.
pub fn assess(m: &Moments, tol: f64, spec: &QuadratureSpec) -> Result<Classification> {
    let n = m.n;
    let thr = threshold(n);
    let ratio = m.ratio();
    let gap = relative_gap(ratio, thr);
    let regime = if gap.abs() <= tol {
        Regime::RegimeII {
            radius: ball_radius(m.m0, n)?,
        }
    } else if gap < 0.0 {
        Regime::Infeasible
    } else {
        let (a, b) = invert_parameters(m, spec)?;
        Regime::RegimeI { a, b }
    };
    Ok(Classification {
        regime,
        ratio,
        threshold: thr,
        tolerance: tol,
    })
}

/// Classifies moments: strictly above the threshold gives the Fermi-Dirac
/// regime with inverted `(a, b)`; equal within `tol` (relative) gives a ball.
pub fn classify(m: &Moments, tol: f64, spec: &QuadratureSpec) -> Result<Classification> {
    let c = assess(m, tol, spec)?;
    if c.regime == Regime::Infeasible {
        return Err(EquilibriumError::InfeasibleMoments {
            ratio: c.ratio,
            threshold: c.threshold,
        });
    }
    Ok(c)
}

/// Finds `(a, b)` such that the Fermi-Dirac density `F_{a,b}` has moments
/// `(M_0, M_2)`.
///
/// `P(1/a) = |S^{n-1}|^{2/n} M_2 / M_0^{(n+2)/n}` is solved by bisection in
/// `t = 1/a`, then `b = (I_{n-1}(1/a) |S^{n-1}| / M_0)^{2/n}`. Ratios too
/// close to the threshold for the bracket to close give `BracketFailure`.
pub fn invert_parameters(m: &Moments, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let n = m.n;
    let thr = threshold(n);
    let ratio = m.ratio();
    if ratio <= thr {
        return Err(EquilibriumError::InfeasibleMoments {
            ratio,
            threshold: thr,
        });
    }
    let nf = n.as_f64();
    let area = sphere_area(n);
    let target = area.powf(2.0 / nf) * ratio;
    let t = try_bisect_monotone(
        |t| fermi_p_log(t.ln(), n, spec).map_err(into_numerics),
        target,
        INVERSION_SEED,
    )?;
    let i = fermi_i_log(FermiIntegralOrder::new(nf - 1.0)?, t.ln(), spec)?;
    let b = (i * area / m.m0).powf(2.0 / nf);
    Ok((1.0 / t, b))
}

fn into_numerics(e: FermiError) -> NumericsError {
    match e {
        FermiError::Numerics(e) => e,
        _ => NumericsError::InvalidSpec("Fermi integral outside its domain"),
    }
}

fn ball_radius(m0: f64, n: Dimension) -> Result<f64> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(EquilibriumError::InvalidMass(m0));
    }
    Ok((n.as_f64() * m0 / sphere_area(n)).powf(1.0 / n.as_f64()))
}

/// The centered ball of mass `m0`, radius `(n M_0 / |S^{n-1}|)^{1/n}`.
pub fn ball_from_mass(m0: f64, n: Dimension) -> Result<BallDensity> {
    Ok(BallDensity::centered(ball_radius(m0, n)?, n)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Allowed `max |f - F_{a,b}|` in the Fermi-Dirac case, and allowed
    /// `||f - 1_B||_1 / M_0` in the ball case.
    pub form_tol: f64,
    /// Entropy below `entropy_tol * M_0` counts as zero.
    pub entropy_tol: f64,
    pub grid_nodes: usize,
    pub mass_fraction: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            form_tol: 1e-6,
            entropy_tol: 1e-9,
            grid_nodes: 256,
            mass_fraction: 0.9999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub classification: Classification,
    pub entropy: Leg,
    pub ratio: Leg,
    pub functional_form: Leg,
    pub pass: bool,
}

/// Checks entropy sign, moment ratio and functional form of `f` against the
/// regime of `c`.
pub fn verify_classification(
    f: &Density,
    c: &Classification,
    opts: &VerifyOptions,
    spec: &QuadratureSpec,
) -> Result<VerificationReport> {
    let n = f.dim();
    let m = f.compute_moments(spec)?;
    let s = f.entropy(spec)?;
    let gap = relative_gap(m.ratio(), threshold(n));
    let v0 = f.center().into_owned();
    let (entropy, ratio, functional_form) = match c.regime {
        Regime::RegimeI { a, b } => {
            let model = FermiDiracDensity::new(a, b, v0.clone(), n)?;
            let reach = f.mass_radius(opts.mass_fraction, spec)?;
            let nodes = opts.grid_nodes.max(2);
            let mut worst = 0.0f64;
            let mut v = v0.clone();
            for i in 0..nodes {
                let r = reach * i as f64 / (nodes - 1) as f64;
                v[0] = v0[0] + r;
                worst = worst.max((f.value_at(&v) - model.profile(r)).abs());
            }
            (
                Leg {
                    name: "entropy_positive".into(),
                    value: s,
                    pass: s > opts.entropy_tol * m.m0,
                },
                Leg {
                    name: "ratio_above_threshold".into(),
                    value: gap,
                    pass: gap > c.tolerance,
                },
                Leg {
                    name: "fermi_dirac_form".into(),
                    value: worst,
                    pass: worst <= opts.form_tol,
                },
            )
        }
        Regime::RegimeII { radius } => {
            let ball: Density = BallDensity::new(radius, v0, n)?.into();
            let sym = l1_distance(f, &ball, spec)? / m.m0;
            (
                Leg {
                    name: "entropy_zero".into(),
                    value: s,
                    pass: s <= opts.entropy_tol * m.m0,
                },
                Leg {
                    name: "ratio_at_threshold".into(),
                    value: gap,
                    pass: gap.abs() <= c.tolerance,
                },
                Leg {
                    name: "ball_indicator".into(),
                    value: sym,
                    pass: sym <= opts.form_tol,
                },
            )
        }
        Regime::Infeasible => (
            Leg {
                name: "entropy".into(),
                value: s,
                pass: false,
            },
            Leg {
                name: "ratio_feasible".into(),
                value: gap,
                pass: false,
            },
            Leg {
                name: "functional_form".into(),
                value: f64::NAN,
                pass: false,
            },
        ),
    };
    let pass = entropy.pass && ratio.pass && functional_form.pass;
    Ok(VerificationReport {
        classification: *c,
        entropy,
        ratio,
        functional_form,
        pass,
    })
}
