use fermi_equilibria::collision::{collide, conservation_residuals, KernelB};
use fermi_equilibria::density::{Density, FermiDiracDensity, RadialGridDensity};
use fermi_equilibria::equilibrium::invert_parameters;
use fermi_equilibria::fermi::{
    fermi_i, fermi_j, fermi_p, threshold, Dimension, FermiIntegralOrder,
};
use fermi_equilibria::numerics::{sample_sphere, McConfig, QuadratureSpec, SphereDirection};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

#[test]
fn sphere_sampler_moments() {
    let samples = 200_000u64;
    for n in 2..=5 {
        let mc = McConfig::new(3, samples, 1).unwrap();
        let mut mean = vec![0.0; n];
        let mut sq = 0.0;
        for d in sample_sphere(n, mc).unwrap() {
            let c = d.components();
            let norm: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for (m, x) in mean.iter_mut().zip(c) {
                *m += x;
            }
            sq += c[0] * c[0];
        }
        let bound = 3.0 / (samples as f64).sqrt();
        for m in &mean {
            assert!((m / samples as f64).abs() < bound, "n={n}: mean {m}");
        }
        let second = sq / samples as f64;
        assert!(
            (second - 1.0 / n as f64).abs() < 5e-3,
            "n={n}: E[s1^2] = {second}"
        );
    }
}

#[test]
fn sphere_sampler_is_reproducible() {
    let mc = McConfig::new(17, 100, 1).unwrap();
    let a: Vec<SphereDirection> = sample_sphere(3, mc).unwrap().collect();
    let b: Vec<SphereDirection> = sample_sphere(3, mc).unwrap().collect();
    assert_eq!(a, b);
    let c: Vec<SphereDirection> = sample_sphere(3, mc.with_seed(18)).unwrap().collect();
    assert_ne!(a, c);
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collisions_conserve_and_kernel_is_bounded(
        (v, vs, s) in (2usize..=5).prop_flat_map(|n| (vector(n), vector(n), vector(n)))
    ) {
        prop_assume!(s.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let sigma = SphereDirection::normalize(&s).unwrap();
        let (vp, vsp) = collide(&v, &vs, sigma.components());
        let (p, e) = conservation_residuals(&v, &vs, &vp, &vsp);
        prop_assert!(p <= 1e-12 && e <= 1e-12);
        let b = KernelB.for_pair(&v, &vs, sigma.components());
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn parts_identity(s in 0.5f64..6.0, ln_t in -4.0f64..4.0) {
        let t = ln_t.exp();
        let i = fermi_i(FermiIntegralOrder::new(s).unwrap(), t, &spec()).unwrap();
        let j = fermi_j(FermiIntegralOrder::new(s + 2.0).unwrap(), t, &spec()).unwrap();
        prop_assert!((i - 2.0 * t / (s + 1.0) * j).abs() <= 1e-9 * i);
    }

    #[test]
    fn p_is_increasing(n in 2usize..=6, ln_t in -5.0f64..5.0, step in 0.01f64..1.0) {
        let lo = fermi_p(ln_t.exp(), dim(n), &spec()).unwrap();
        let hi = fermi_p((ln_t + step).exp(), dim(n), &spec()).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn inversion_round_trip(n in 2usize..=5, ln_a in -3.0f64..3.0, ln_b in -2.0f64..2.0) {
        let (a, b) = (ln_a.exp(), ln_b.exp());
        let f: Density = FermiDiracDensity::centered(a, b, dim(n)).unwrap().into();
        let m = f.compute_moments(&spec()).unwrap();
        let (a2, b2) = invert_parameters(&m, &spec()).unwrap();
        prop_assert!(((a2 - a) / a).abs() < 1e-7, "a {a} -> {a2}");
        prop_assert!(((b2 - b) / b).abs() < 1e-7, "b {b} -> {b2}");
    }

    #[test]
    fn grids_respect_the_moment_bound(
        n in 2usize..=4,
        steps in prop::collection::vec((0.01f64..1.0, 0.0f64..=1.0), 1..10),
    ) {
        let mut radii = vec![0.0];
        let mut values = Vec::new();
        for (dr, y) in &steps {
            values.push(*y);
            radii.push(radii.last().unwrap() + dr);
        }
        values.push(0.0);
        prop_assume!(values.iter().any(|y| *y > 1e-3));
        let g: Density = RadialGridDensity::new(radii, values, vec![0.0; n], dim(n)).unwrap().into();
        let m = g.compute_moments(&spec()).unwrap();
        prop_assert!(m.ratio() >= threshold(dim(n)) - 1e-9);
    }
}
