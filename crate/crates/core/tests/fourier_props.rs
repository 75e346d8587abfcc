use fourier3::fourier::{
    decompose, differentiate, gradient_energy, grid_steps, regular_grid, spectral_mass, synthesize_regular, DomainBox,
    GridSize, PhysicalField, SpectralField,
};
use ndarray::Array3;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn config() -> Config {
    Config {
        cases: 48,
        failure_persistence: None,
        ..Config::default()
    }
}

prop_compose! {
    fn domain()(a in prop::array::uniform3(-5.0f64..5.0), len in prop::array::uniform3(0.5f64..8.0)) -> DomainBox {
        DomainBox::new(a, std::array::from_fn(|d| a[d] + len[d])).unwrap()
    }
}

prop_compose! {
    fn field()(dom in domain(), half in prop::array::uniform3(1usize..5))
        (values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), half[0] * half[1] * half[2] * 8),
         dom in Just(dom), half in Just(half)) -> PhysicalField {
        let n = half.map(|h| 2 * h);
        let values = values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        PhysicalField::new(dom, Array3::from_shape_vec((n[0], n[1], n[2]), values).unwrap()).unwrap()
    }
}

fn max_diff<'a>(a: impl Iterator<Item = &'a Complex64>, b: impl Iterator<Item = &'a Complex64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn round_trip(f in field()) {
        let back = synthesize_regular(&decompose(&f));
        prop_assert!(max_diff(back.values().iter(), f.values().iter()) < 1e-13);
    }

    #[test]
    fn decompose_is_linear(f in field(), seed in any::<u64>(), alpha in (-2.0f64..2.0, -2.0f64..2.0)) {
        let alpha = Complex64::new(alpha.0, alpha.1);
        let g = f.values().mapv(|v| Complex64::new(v.im, (seed % 7) as f64 * 0.1 - v.re));
        let g = PhysicalField::new(*f.domain(), g).unwrap();
        let combo = PhysicalField::new(*f.domain(), f.values().mapv(|v| alpha * v) + g.values()).unwrap();
        let lhs = decompose(&combo);
        let rhs = decompose(&f).coeffs().mapv(|c| alpha * c) + decompose(&g).coeffs();
        let scale = lhs.coefficient_l1().max(1.0);
        prop_assert!(max_diff(lhs.coeffs().iter(), rhs.iter()) < 1e-14 * scale);
    }

    #[test]
    fn parseval(f in field()) {
        let spec = decompose(&f);
        let cell: f64 = grid_steps(f.domain(), &f.size()).iter().product();
        let quad = cell * f.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
        prop_assert!((spectral_mass(&spec) - quad).abs() <= 1e-12 * quad);
        prop_assert!((f.discrete_mass() - quad).abs() <= 1e-12 * quad);
    }

    /// `∫|∇ψ|² = -∫ Δψ ψ̄`, the right side by synthesizing second
    /// derivatives and summing on the grid.
    #[test]
    fn gradient_energy_is_minus_laplacian_pairing(f in field()) {
        let spec = decompose(&f);
        let mut lap = Array3::<Complex64>::zeros(f.values().raw_dim());
        for d in 0..3 {
            lap = lap + synthesize_regular(&differentiate(&differentiate(&spec, d), d)).values();
        }
        let cell: f64 = grid_steps(f.domain(), &f.size()).iter().product();
        let pairing: Complex64 = lap.iter().zip(f.values().iter()).map(|(l, v)| -l * v.conj()).sum::<Complex64>() * cell;
        let e = gradient_energy(&spec);
        prop_assert!((pairing.re - e).abs() <= 1e-12 * e.max(1e-300), "{} vs {e}", pairing.re);
        prop_assert!(pairing.im.abs() <= 1e-12 * e.max(1e-300));
    }
}

#[test]
fn single_mode_derivative_and_coefficient() {
    // ψ = exp(2πi 2 (x - a)/L) on one axis has one coefficient sqrt(V) at k' = (2, 0, 0).
    let domain = DomainBox::new([1.0, 0.0, -1.0], [4.0, 2.0, 1.0]).unwrap();
    let size = GridSize::new([8, 4, 6]).unwrap();
    let l = domain.length(0);
    let psi = PhysicalField::from_fn(domain, size, |x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 2.0 * (x[0] - 1.0) / l));
    let spec = decompose(&psi);
    let v = domain.volume().sqrt();
    assert!((spec.mode([2, 0, 0]) - v).norm() < 1e-13);
    assert!(spec.coefficient_l1() - v < 1e-12);
    let dpsi = synthesize_regular(&differentiate(&spec, 0));
    let k = 2.0 * std::f64::consts::PI * 2.0 / l;
    for (d, p) in dpsi.values().iter().zip(psi.values()) {
        assert!((d - Complex64::new(0.0, k) * p).norm() < 1e-12);
    }
    let x = regular_grid(&domain, &size);
    assert_eq!(x[0][0], 1.0);
    assert_eq!(x[2].len(), 6);
}

#[test]
fn zero_field_and_mode_access() {
    let domain = DomainBox::unit();
    let mut spec = SpectralField::zeros(domain, GridSize::cube(4).unwrap());
    *spec.mode_mut([-2, 1, 0]) = Complex64::new(3.0, 0.0);
    assert_eq!(spec.coeffs()[[0, 3, 2]], Complex64::new(3.0, 0.0));
    assert_eq!(spectral_mass(&spec), 9.0);
}
