use dtn_core::coefficients::CoefficientField;
use dtn_core::fem::{assemble, DiscreteField};
use dtn_core::functionals::{
    bilinear_sides, carleson_embedding_check, carleson_sup, nt_max, square_function_integral, BilinearVariant,
    CellMeasure, ConeIndex,
};
use dtn_core::geometry::{triangulate, ConeParams, DomainPreset, PolygonalDomain, TriMesh};
use dtn_core::Point;
use proptest::prelude::*;

fn mesh(preset: DomainPreset, h: f64) -> TriMesh {
    triangulate(&PolygonalDomain::build(preset).unwrap(), h).unwrap()
}

fn square(h: f64) -> TriMesh {
    mesh(DomainPreset::Square { side: 1.0 }, h)
}

fn brute_carleson(centers: &[Point], weights: &[f64], boundary: &[Point], radii: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for q in boundary {
        for &r in radii {
            let mass: f64 = centers.iter().zip(weights).filter(|(c, _)| (*c - q).norm() < r).map(|(_, w)| w).sum();
            best = best.max(mass / r);
        }
    }
    best
}

#[test]
fn lebesgue_norm_is_bounded_and_stable() {
    let domain = PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap();
    let coarse = CellMeasure::lebesgue(&square(0.1)).carleson_norm();
    let fine = CellMeasure::lebesgue(&square(0.05)).carleson_norm();
    assert!(coarse <= std::f64::consts::PI * domain.diameter());
    assert!((coarse - fine).abs() <= 0.1 * fine, "{coarse} vs {fine}");
}

#[test]
fn embedding_with_unit_weight() {
    let mesh = mesh(DomainPreset::LShape { side: 1.0 }, 0.1);
    let cones = ConeIndex::new(&mesh, ConeParams::for_domain(mesh.domain()));
    let one = DiscreteField::scalar_from_fn(&mesh, |_| 1.0);
    let nu = CellMeasure::from_density(&mesh, |t| mesh.centroid_delta()[t]).unwrap();
    let check = carleson_embedding_check(&one, &nu, &cones);
    assert!((check.lhs - nu.total_mass()).abs() <= 1e-12 * check.lhs);
    let perimeter = mesh.domain().perimeter();
    assert!((check.rhs - nu.carleson_norm() * perimeter).abs() <= 1e-12 * check.rhs);
    assert!(!check.coverage_defect);

    let zero = CellMeasure::new(&mesh, vec![0.0; mesh.triangle_count()]).unwrap();
    let check = carleson_embedding_check(&one, &zero, &cones);
    assert_eq!((check.lhs, check.c_emp), (0.0, 0.0));
}

#[test]
fn cone_index_matches_exhaustive_scan() {
    for preset in [DomainPreset::Square { side: 1.0 }, DomainPreset::LShape { side: 1.0 }] {
        let mesh = mesh(preset, 0.05);
        let cone = ConeParams::new(2.0).unwrap();
        let index = ConeIndex::new(&mesh, cone);
        for q in 0..mesh.boundary_count() {
            let mut fast = index.members(q).to_vec();
            fast.sort_unstable();
            let slow = mesh.cone_of(q, cone);
            if index.degenerate().contains(&q) {
                assert!(slow.is_empty() && fast.len() == 1);
            } else {
                assert_eq!(fast, slow, "slot {q}");
            }
        }
    }
}

#[test]
fn nt_max_dominates_cone_values() {
    let disk = mesh(DomainPreset::Ngon { n: 64, radius: 1.0 }, 0.1);
    let w = DiscreteField::scalar_from_fn(&disk, |p| {
        let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
        r.powi(3) * (3.0 * t).cos()
    });
    let cone = ConeParams::for_domain(disk.domain());
    let star = nt_max(&w, &ConeIndex::new(&disk, cone));
    for q in 0..disk.boundary_count() {
        let scan = disk.cone_of(q, cone).iter().map(|&i| w.values()[i].abs()).fold(0.0, f64::max);
        assert_eq!(star.values()[q], scan);
    }
}

#[test]
fn square_function_of_x_converges_to_one_sixth() {
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let mesh = square(h);
            let u = DiscreteField::scalar_from_fn(&mesh, |p| p.x);
            (square_function_integral(&u) - 1.0 / 6.0).abs()
        })
        .collect();
    assert!(errors[2] < 5e-3, "{errors:?}");
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
}

#[test]
fn bilinear_sides_closed_forms() {
    let mesh = square(0.1);
    let sys = assemble(&mesh, &CoefficientField::identity(1).unwrap()).unwrap();
    let cones = ConeIndex::new(&mesh, ConeParams::for_domain(mesh.domain()));
    let u = DiscreteField::scalar_from_fn(&mesh, |p| p.x + 2.0 * p.y);
    let v = DiscreteField::from_fn(&mesh, 2, |_| [0.3, -0.1, 0.0, 0.0]);
    for variant in [BilinearVariant::SquareWeight, BilinearVariant::BoundaryL2] {
        let s = bilinear_sides(&sys, &u, &v, &cones, variant).unwrap();
        assert!((s.lhs - 0.1).abs() < 1e-12, "{}", s.lhs);
        assert!((s.v_bracket - 0.1 * 4.0).abs() < 1e-12, "{}", s.v_bracket);
        assert!(s.is_harmonic());
        let zero = DiscreteField::from_fn(&mesh, 2, |_| [0.0; 4]);
        let s = bilinear_sides(&sys, &u, &zero, &cones, variant).unwrap();
        assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
    }
}

type Cloud = (Vec<(f64, f64, f64)>, Vec<(f64, f64)>, f64);

fn cloud() -> impl Strategy<Value = Cloud> {
    (
        prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..2.0f64), 1..400),
        prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..20),
        0.01..0.3f64,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bucketed_sup_equals_brute_force((pts, bdry, h) in cloud()) {
        let centers: Vec<Point> = pts.iter().map(|&(x, y, _)| Point::new(x, y)).collect();
        let weights: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let boundary: Vec<Point> = bdry.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let radii = dtn_core::functionals::dyadic_radii(h, 2f64.sqrt());
        let fast = carleson_sup(&centers, &weights, &boundary, &radii).value;
        let slow = brute_carleson(&centers, &weights, &boundary, &radii);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0), "{} vs {}", fast, slow);
    }

    #[test]
    fn carleson_norm_is_homogeneous_and_monotone(
        seed in prop::collection::vec(0.0..1.0f64, 50),
        bump in prop::collection::vec(0.0..1.0f64, 50),
        t in 0.01..100.0f64,
    ) {
        let mesh = square(0.2);
        let n = mesh.triangle_count();
        let w: Vec<f64> = (0..n).map(|k| seed[k % seed.len()] * mesh.area(k)).collect();
        let nu = CellMeasure::new(&mesh, w.clone()).unwrap();
        let base = nu.carleson_norm();
        prop_assert!((nu.scaled(t).unwrap().carleson_norm() - t * base).abs() <= 1e-12 * t * base.max(1e-300));
        let larger = CellMeasure::new(&mesh, w.iter().enumerate().map(|(k, v)| v + bump[k % bump.len()]).collect()).unwrap();
        prop_assert!(larger.carleson_norm() >= base);
    }

    #[test]
    fn square_function_ignores_constants_and_is_quadratic(c in -10.0..10.0f64, t in -5.0..5.0f64) {
        let mesh = square(0.2);
        let u = DiscreteField::scalar_from_fn(&mesh, |p| (2.0 * p.x).sin() + p.x * p.y);
        let base = square_function_integral(&u);
        let shifted = square_function_integral(&u.add_constant(c));
        prop_assert!((shifted - base).abs() <= 1e-12 * base);
        prop_assert!((square_function_integral(&u.scaled(t)) - t * t * base).abs() <= 1e-12 * base * t * t + 1e-300);
    }

    #[test]
    fn nt_max_grows_with_aperture(a0 in 1.05..3.0f64, extra in 0.0..3.0f64) {
        let mesh = mesh(DomainPreset::LShape { side: 1.0 }, 0.1);
        let w = DiscreteField::scalar_from_fn(&mesh, |p| (3.0 * p.x).cos() * p.y);
        let small = nt_max(&w, &ConeIndex::new(&mesh, ConeParams::new(a0).unwrap()));
        let large = nt_max(&w, &ConeIndex::new(&mesh, ConeParams::new(a0 + extra).unwrap()));
        let idx = ConeIndex::new(&mesh, ConeParams::new(a0).unwrap());
        for q in 0..mesh.boundary_count() {
            if !idx.degenerate().contains(&q) {
                prop_assert!(large.values()[q] >= small.values()[q]);
            }
        }
    }
}
