use dtn_core::coefficients::CoefficientField;
use dtn_core::extensions::{harmonic_extension, hessian_measure, lipschitz_extension, matrix_extension, ChartCover};
use dtn_core::fem::BoundaryTrace;
use dtn_core::geometry::{triangulate, DomainPreset, PolygonalDomain, TriMesh};
use dtn_core::Point;

fn mesh(preset: DomainPreset, h: f64) -> TriMesh {
    triangulate(&PolygonalDomain::build(preset).unwrap(), h).unwrap()
}

#[test]
fn harmonic_extension_on_the_disk() {
    let mut errors = Vec::new();
    for h in [0.1, 0.05] {
        let disk = mesh(DomainPreset::Ngon { n: 128, radius: 1.0 }, h);
        let exact = |p: Point| {
            let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
            r.powi(3) * (3.0 * t).cos()
        };
        let v = harmonic_extension(&BoundaryTrace::scalar_from_fn(&disk, exact)).unwrap();
        errors.push((0..disk.node_count()).map(|i| (v.values()[i] - exact(disk.node(i))).abs()).fold(0.0, f64::max));
    }
    assert!(errors[1] < 0.02 && errors[1] < errors[0], "{errors:?}");
}

#[test]
fn harmonic_extension_respects_mesh_symmetry() {
    let sq = mesh(DomainPreset::Square { side: 1.0 }, 0.1);
    let g = |p: Point| (p.x - 0.5).powi(2) - (p.y - 0.5).powi(2);
    let v = harmonic_extension(&BoundaryTrace::scalar_from_fn(&sq, g)).unwrap();
    let center = (0..sq.node_count()).find(|&i| (sq.node(i) - Point::new(0.5, 0.5)).norm() < 1e-12).unwrap();
    let trace = v.trace();
    let avg = sq.boundary_mass().iter().zip(trace.values()).map(|(m, t)| m * t).sum::<f64>() / 4.0;
    assert!((v.values()[center] - avg).abs() < 1e-10, "{} vs {avg}", v.values()[center]);
}

#[test]
fn lipschitz_extension_of_constants_and_linear_data() {
    let sq = mesh(DomainPreset::Square { side: 1.0 }, 0.025);
    let cover = ChartCover::new(&sq).unwrap();

    let c = lipschitz_extension(&BoundaryTrace::constant(&sq, 1, 1.5), &cover).unwrap();
    assert!(c.v.values().iter().all(|x| (x - 1.5).abs() < 1e-12));
    assert!(c.grad_sup < 1e-10 && c.hessian_carleson < 1e-18);
    assert_eq!(c.boundary_defect, 0.0);

    let ell = |p: Point| 0.3 + p.x - 0.5 * p.y;
    let slope = (1.0f64 + 0.25).sqrt();
    let ratios: Vec<f64> = [0.025, 0.0125]
        .iter()
        .map(|&h| {
            let sq = mesh(DomainPreset::Square { side: 1.0 }, h);
            let ext =
                lipschitz_extension(&BoundaryTrace::scalar_from_fn(&sq, ell), &ChartCover::new(&sq).unwrap()).unwrap();
            assert_eq!(ext.boundary_defect, 0.0);
            ext.grad_sup / slope
        })
        .collect();
    eprintln!("grad_sup / |∇ℓ| = {ratios:?}");
    assert!(ratios.iter().all(|r| r.is_finite()));
    assert!((ratios[0] - ratios[1]).abs() < 0.15 * ratios[0].min(ratios[1]), "{ratios:?}");
}

#[test]
fn hessian_measure_of_affine_fields_is_small() {
    let sq = mesh(DomainPreset::Square { side: 1.0 }, 0.05);
    let v = harmonic_extension(&BoundaryTrace::scalar_from_fn(&sq, |p| 2.0 * p.x - p.y)).unwrap();
    assert!(hessian_measure(&v).unwrap().total_mass() < 1e-18);
}

#[test]
fn matrix_extension_of_constant_coefficients() {
    let sq = mesh(DomainPreset::Square { side: 1.0 }, 0.1);
    for a in
        [CoefficientField::rotated_anisotropic(1, 0.4, 3.0).unwrap(), CoefficientField::system_coupled(0.3).unwrap()]
    {
        let b = matrix_extension(&a, &sq).unwrap();
        assert!(b.deviation_profile < 1e-10 && b.grad_bound_profile < 1e-10, "{:?}", a.preset());
        assert!(b.mu_emp >= a.mu() * (1.0 - 1e-10));
        assert!(b.inherits_ellipticity(a.mu(), 1e-10));
    }
}

#[test]
fn matrix_extension_profiles_are_stable_for_a_smooth_preset() {
    let a = CoefficientField::scalar_smooth(1, 2.0).unwrap();
    let profiles: Vec<(f64, f64)> = [0.05, 0.025]
        .iter()
        .map(|&h| {
            let sq = mesh(DomainPreset::Square { side: 1.0 }, h);
            let b = matrix_extension(&a, &sq).unwrap();
            (b.deviation_profile, b.grad_bound_profile)
        })
        .collect();
    let drift = |x: f64, y: f64| (x - y).abs() / x.min(y);
    assert!(drift(profiles[0].0, profiles[1].0) < 0.15, "{profiles:?}");
    assert!(drift(profiles[0].1, profiles[1].1) < 0.15, "{profiles:?}");
}
