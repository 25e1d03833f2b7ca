use std::f64::consts::PI;

use dtn_core::coefficients::{
    grad_carleson_norm, grad_measure, holder_quotient, unit_directions, validate, CoefTensor, CoefficientField,
    MultiplierField,
};
use dtn_core::geometry::{triangulate, DomainPreset, PolygonalDomain};
use dtn_core::{Error, Point};
use proptest::prelude::*;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<Point> {
    let step = (hi - lo) / n as f64;
    (0..=n).flat_map(|i| (0..=n).map(move |j| Point::new(lo + i as f64 * step, lo + j as f64 * step))).collect()
}

fn presets() -> Vec<CoefficientField> {
    let unit = [0.0, 1.0, 0.0, 1.0];
    vec![
        CoefficientField::identity(1).unwrap(),
        CoefficientField::identity(2).unwrap(),
        CoefficientField::scalar_smooth(1, PI).unwrap(),
        CoefficientField::scalar_smooth(2, 2.0).unwrap(),
        CoefficientField::rotated_anisotropic(1, PI / 6.0, 4.0).unwrap(),
        CoefficientField::rotated_anisotropic(2, 0.5, 0.25).unwrap(),
        CoefficientField::system_coupled(0.3).unwrap(),
        CoefficientField::system_coupled(-0.2).unwrap(),
        CoefficientField::affine(1, 2.0, [1.0, 0.5], unit).unwrap(),
        CoefficientField::skew(1, 1.0, 0.3).unwrap(),
    ]
}

#[test]
fn every_preset_meets_its_declared_constants() {
    let samples = grid(0.0, 1.0, 12);
    for a in presets() {
        let dirs = unit_directions(a.m(), 128, 5);
        let report = validate(&a, &samples, &dirs).unwrap();
        assert!(report.mu_emp >= a.mu() * (1.0 - 1e-10), "{:?}: {} < {}", a.preset(), report.mu_emp, a.mu());
        assert!(report.violations.is_empty(), "{:?}: {:?}", a.preset(), report.violations);
        assert_eq!(report.symmetric, a.is_symmetric(), "{:?}", a.preset());
    }
}

#[test]
fn rotated_anisotropic_form_minimum_is_the_small_eigenvalue() {
    let a = CoefficientField::rotated_anisotropic(1, PI / 6.0, 4.0).unwrap();
    let t = a.eval(Point::new(0.3, 0.4));
    let eig = t.as_matrix().symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
    let dirs = unit_directions(1, 4096, 1);
    let report = validate(&a, &[Point::new(0.3, 0.4)], &dirs).unwrap();
    assert!(report.mu_emp >= 1.0 - 1e-12 && report.mu_emp < 1.0 + 1e-3, "{}", report.mu_emp);
}

#[test]
fn scalar_smooth_minimum_and_holder_bound() {
    // On [-1, 1]² the factor sin πx₁ sin πx₂ reaches −1 at (−½, ½).
    let a = CoefficientField::scalar_smooth(1, PI).unwrap();
    let samples = grid(-1.0, 1.0, 40);
    let report = validate(&a, &samples, &unit_directions(1, 16, 2)).unwrap();
    assert!((report.mu_emp - 1.0).abs() < 1e-12, "{}", report.mu_emp);
    // |∇a| ≤ π and the tensor carries a on two diagonal entries.
    assert!(report.holder_emp <= PI * 2.0f64.sqrt() * (1.0 + 1e-12));
    assert!(report.holder_emp > 0.9 * PI * 2.0f64.sqrt());
}

#[test]
fn affine_gradient_measure_is_twice_delta() {
    let domain = PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap();
    let mesh = triangulate(&domain, 0.1).unwrap();
    let a = CoefficientField::affine(1, 2.0, [1.0, 0.0], [0.0, 1.0, 0.0, 1.0]).unwrap();
    let nu = grad_measure(&a, &mesh);
    for t in 0..mesh.triangle_count() {
        let expected = 2.0 * domain.delta(mesh.centroid(t)) * mesh.area(t);
        assert!((nu.weights()[t] - expected).abs() < 1e-12 * expected.max(1e-12));
    }

    // Exhaustive sweep over boundary nodes and radii h·2^k.
    let mut radii = Vec::new();
    let mut r = mesh.h();
    while r < domain.diameter() {
        radii.push(r);
        r *= 2.0;
    }
    radii.push(domain.diameter());
    let mut best: f64 = 0.0;
    for q in mesh.boundary_points() {
        for &r in &radii {
            let mass: f64 = (0..mesh.triangle_count())
                .filter(|&t| (mesh.centroid(t) - q).norm() < r)
                .map(|t| nu.weights()[t])
                .sum();
            best = best.max(mass / r);
        }
    }
    let norm = grad_carleson_norm(&a, &mesh);
    assert!((norm - best).abs() <= 1e-12 * best, "{norm} vs {best}");
}

#[test]
fn constant_fields_have_no_gradient_measure() {
    let mesh = triangulate(&PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap(), 0.25).unwrap();
    assert_eq!(grad_carleson_norm(&CoefficientField::identity(1).unwrap(), &mesh), 0.0);
    let rotated = CoefficientField::rotated_anisotropic(2, 0.3, 3.0).unwrap();
    assert_eq!(grad_carleson_norm(&rotated, &mesh), 0.0);
}

#[test]
fn gradient_norm_is_quadratic_in_the_perturbation() {
    let mesh = triangulate(&PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap(), 0.1).unwrap();
    let field = |t: f64| CoefficientField::affine(1, 3.0, [t, -0.5 * t], [0.0, 1.0, 0.0, 1.0]).unwrap();
    let unit = grad_carleson_norm(&field(1.0), &mesh);
    for t in [0.25, 0.5, 2.0] {
        let v = grad_carleson_norm(&field(t), &mesh);
        assert!((v - t * t * unit).abs() <= 1e-10 * unit, "t = {t}: {v} vs {}", t * t * unit);
    }
}

#[test]
fn matrix_multipliers_must_commute() {
    let mesh = triangulate(&PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap(), 0.25).unwrap();
    let a = CoefficientField::system_coupled(0.3).unwrap();
    let scalar = MultiplierField::matrix_from_fn(&mesh, 2, |p| [1.0 + p.x, 0.0, 0.0, 1.0 + p.x]);
    assert!(scalar.check_commutes(&a, &mesh).is_ok());
    let shear = MultiplierField::matrix_from_fn(&mesh, 2, |_| [1.0, 0.2, 0.0, 1.0]);
    assert!(matches!(shear.check_commutes(&a, &mesh), Err(Error::NonCommutingMultiplier { .. })));
    // Identity blocks commute with everything.
    let id = CoefficientField::identity(2).unwrap();
    assert!(shear.check_commutes(&id, &mesh).is_ok());
}

#[test]
fn adjoint_swaps_index_pairs() {
    let a = CoefficientField::skew(1, 1.0, 0.4).unwrap();
    let p = Point::new(0.2, 0.7);
    let (t, s) = (a.eval(p), a.adjoint().eval(p));
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(s.get(i, j, 0, 0), t.get(j, i, 0, 0));
        }
    }
    assert!(!a.is_symmetric());
}

proptest! {
    #[test]
    fn holder_quotient_is_monotone_in_the_sample_set(keep in prop::collection::vec(any::<bool>(), 49), eta in 0.2..1.0f64) {
        let a = CoefficientField::scalar_smooth(1, 2.0).unwrap();
        let samples = grid(0.0, 1.0, 6);
        let tensors: Vec<CoefTensor> = samples.iter().map(|&p| a.eval(p)).collect();
        let (sub, subt): (Vec<Point>, Vec<CoefTensor>) = samples
            .iter()
            .zip(&tensors)
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|((p, t), _)| (*p, *t))
            .unzip();
        prop_assert!(holder_quotient(&sub, &subt, eta) <= holder_quotient(&samples, &tensors, eta));
    }

    #[test]
    fn form_is_symmetric_for_symmetric_presets(x in 0.0..1.0f64, y in 0.0..1.0f64, seed in 0u64..1000) {
        for a in presets().into_iter().filter(CoefficientField::is_symmetric) {
            let t = a.eval(Point::new(x, y));
            let d = unit_directions(a.m(), 2, seed);
            let (ab, ba) = (t.form(&d[0], &d[1]), t.form(&d[1], &d[0]));
            prop_assert!((ab - ba).abs() <= 1e-14 * t.frobenius());
        }
    }
}
