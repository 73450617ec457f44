use std::io::Write;

use fermi_equilibria::density::{Density, DensityError, RadialGridDensity};
use fermi_equilibria::equilibrium::{assess, Regime};
use fermi_equilibria::fermi::Dimension;
use fermi_equilibria::numerics::QuadratureSpec;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn load(text: &str, n: usize) -> Result<RadialGridDensity, DensityError> {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    RadialGridDensity::from_csv_path(file.path(), vec![0.0; n], dim(n))
}

#[test]
fn header_is_optional() {
    let with = load("r,value\n0,0.5\n1,0.25\n2,0\n", 2).unwrap();
    let without = load("# a comment\n0, 0.5\n1, 0.25\n2, 0\n", 2).unwrap();
    assert_eq!(with.radii(), without.radii());
    assert_eq!(with.values(), without.values());
    assert_eq!(with.profile(0.5), 0.375);
}

#[test]
fn rejects_malformed_rows() {
    assert!(matches!(load("0,1\n1\n", 2), Err(DensityError::Input(_))));
    assert!(matches!(load("0,1\nx,0\n", 2), Err(DensityError::Input(_))));
    assert!(load("0,1\n1,1\n", 2).is_err());
    assert!(load("0,1.5\n1,0\n", 2).is_err());
    assert!(load("1,1\n0,0\n", 2).is_err());
    assert!(RadialGridDensity::from_csv_path(
        std::path::Path::new("/nonexistent.csv"),
        vec![0.0; 2],
        dim(2)
    )
    .is_err());
}

#[test]
fn smooth_grid_is_regime_one() {
    let rows: String = (0..=40)
        .map(|i| {
            let r = i as f64 * 0.1;
            let y = if i == 40 {
                0.0
            } else {
                1.0 / (1.0 + (r * r - 1.0f64).exp())
            };
            format!("{r},{y}\n")
        })
        .collect();
    let g: Density = load(&rows, 3).unwrap().into();
    let spec = QuadratureSpec::default();
    let m = g.compute_moments(&spec).unwrap();
    let c = assess(&m, 1e-8, &spec).unwrap();
    assert!(matches!(c.regime, Regime::RegimeI { .. }));
    assert!(g.entropy(&spec).unwrap() > 0.0);
}
