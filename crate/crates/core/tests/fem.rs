use dtn_core::coefficients::CoefficientField;
use dtn_core::fem::{
    assemble, local_stiffness, solve_dirichlet, solve_div_source, weighted_cell_norm, weighted_grad_norm,
    BoundaryTrace, CellField, DiscreteField,
};
use dtn_core::geometry::{triangulate, DomainPreset, PolygonalDomain, TriMesh};
use dtn_core::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square_mesh(h: f64) -> TriMesh {
    triangulate(&PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap(), h).unwrap()
}

fn random_field<'a>(mesh: &'a TriMesh, m: usize, seed: u64, interior_only: bool) -> DiscreteField<'a> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..mesh.node_count() * m)
        .map(|d| if interior_only && mesh.is_boundary(d / m) { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect();
    DiscreteField::new(mesh, m, values).unwrap()
}

fn smooth_trace<'a>(mesh: &'a TriMesh, m: usize) -> BoundaryTrace<'a> {
    BoundaryTrace::from_fn(mesh, m, |p| [(3.0 * p.x).sin() + p.y * p.y, (2.0 * p.y).cos() * p.x, 0.0, 0.0])
}

#[test]
fn local_stiffness_matches_hand_integration() {
    let domain =
        PolygonalDomain::custom(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
    let mesh = TriMesh::from_parts(
        domain,
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
        vec![[0, 1, 2]],
        1.0,
    )
    .unwrap();
    let a = CoefficientField::identity(1).unwrap().eval(Point::origin());
    let k = local_stiffness(&mesh, 0, &a);
    let expected = [1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5];
    for (x, y) in k.iter().zip(expected) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn galerkin_orthogonality() {
    let mesh = square_mesh(0.1);
    let cases = [
        CoefficientField::identity(1).unwrap(),
        CoefficientField::scalar_smooth(1, 3.0).unwrap(),
        CoefficientField::skew(1, 2.0, 0.4).unwrap(),
        CoefficientField::system_coupled(0.3).unwrap(),
        CoefficientField::rotated_anisotropic(2, 0.4, 3.0).unwrap(),
    ];
    for a in cases {
        let sys = assemble(&mesh, &a).unwrap();
        let u = solve_dirichlet(&sys, &smooth_trace(&mesh, a.m())).unwrap();
        let scale = sys.form(&u, &u).abs();
        for seed in 0..4 {
            let w = random_field(&mesh, a.m(), seed, true);
            assert!(sys.form(&u, &w).abs() <= 1e-10 * scale.max(1.0), "{:?}", a.preset());
        }
    }
}

#[test]
fn constants_are_in_the_kernel() {
    let mesh = square_mesh(0.125);
    for a in [CoefficientField::scalar_smooth(1, 2.0).unwrap(), CoefficientField::system_coupled(0.2).unwrap()] {
        let sys = assemble(&mesh, &a).unwrap();
        let ones = vec![1.0; mesh.node_count() * a.m()];
        let ku = sys.matrix().mul_vec(&ones);
        assert!(ku.iter().all(|v| v.abs() < 1e-12 * sys.matrix().max_abs()));
        let u = solve_dirichlet(&sys, &BoundaryTrace::constant(&mesh, a.m(), 2.5)).unwrap();
        assert!(u.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
    }
}

#[test]
fn energy_does_not_increase_under_refinement() {
    // x₁x₂ is linear along every edge of the square, so boundary data are nested.
    let mut mesh = square_mesh(0.25);
    let a = CoefficientField::scalar_smooth(1, 3.0).unwrap();
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        let sys = assemble(&mesh, &a).unwrap();
        let u = solve_dirichlet(&sys, &BoundaryTrace::scalar_from_fn(&mesh, |p| p.x * p.y)).unwrap();
        let energy = sys.form(&u, &u);
        assert!(energy <= last * (1.0 + 1e-10), "{energy} > {last}");
        last = energy;
        mesh = mesh.refine().unwrap();
    }
}

#[test]
fn disk_quadratic_harmonic() {
    let disk = PolygonalDomain::build(DomainPreset::Ngon { n: 256, radius: 1.0 }).unwrap();
    let mesh = triangulate(&disk, 0.1).unwrap();
    let sys = assemble(&mesh, &CoefficientField::identity(1).unwrap()).unwrap();
    let exact = |p: Point| p.x * p.x - p.y * p.y;
    let u = solve_dirichlet(&sys, &BoundaryTrace::scalar_from_fn(&mesh, exact)).unwrap();
    let err = (0..mesh.node_count()).map(|i| (u.values()[i] - exact(mesh.node(i))).abs()).fold(0.0, f64::max);
    assert!(err < 0.5 * mesh.h() * mesh.h(), "max nodal error {err}");
}

#[test]
fn bubble_source_converges_at_second_order() {
    let bubble = |p: Point| p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
    let minus_grad =
        |p: Point| [-(1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), -p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y), 0.0, 0.0];
    let mut mesh = square_mesh(0.125);
    let mut errors = Vec::new();
    for _ in 0..3 {
        let sys = assemble(&mesh, &CoefficientField::identity(1).unwrap()).unwrap();
        let u = solve_div_source(&sys, &CellField::from_fn(&mesh, 2, minus_grad)).unwrap();
        errors.push((0..mesh.node_count()).map(|i| (u.values()[i] - bubble(mesh.node(i))).abs()).fold(0.0, f64::max));
        mesh = mesh.refine().unwrap();
    }
    for w in errors.windows(2) {
        assert!(w[0] / w[1] > 3.0, "errors {errors:?}");
    }
}

#[test]
fn zero_source_gives_zero() {
    let mesh = square_mesh(0.25);
    let sys = assemble(&mesh, &CoefficientField::identity(2).unwrap()).unwrap();
    let u = solve_div_source(&sys, &CellField::from_fn(&mesh, 4, |_| [0.0; 4])).unwrap();
    assert!(u.values().iter().all(|&v| v == 0.0));
}

#[test]
fn weights_reduce_to_plain_norms() {
    let mesh = square_mesh(0.1);
    let u = DiscreteField::scalar_from_fn(&mesh, |p| (2.0 * p.x).sin() * p.y);
    let plain: f64 = (0..mesh.triangle_count()).map(|t| u.cell_gradient_sq(t) * mesh.area(t)).sum();
    assert!((weighted_grad_norm(&u, 0.0, false) - plain).abs() < 1e-14 * plain);
    let constant = DiscreteField::scalar_from_fn(&mesh, |_| 4.0);
    assert_eq!(weighted_grad_norm(&constant, 1.0, true), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symmetric_forms_are_symmetric(seed in 0u64..10_000, omega in 0.5..4.0f64) {
        let mesh = square_mesh(0.2);
        let sys = assemble(&mesh, &CoefficientField::scalar_smooth(1, omega).unwrap()).unwrap();
        let (u, w) = (random_field(&mesh, 1, seed, false), random_field(&mesh, 1, seed + 1, false));
        let (uw, wu) = (sys.form(&u, &w), sys.form(&w, &u));
        prop_assert!((uw - wu).abs() <= 1e-12 * uw.abs().max(wu.abs()).max(1.0));
    }

    #[test]
    fn energy_estimate_holds_for_random_sources(seed in 0u64..10_000) {
        let mesh = square_mesh(0.1);
        let a = CoefficientField::scalar_smooth(1, 3.0).unwrap();
        let sys = assemble(&mesh, &a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CellField::new(&mesh, 2, (0..2 * mesh.triangle_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let u = solve_div_source(&sys, &f).unwrap();
        let lhs = a.mu() * weighted_grad_norm(&u, 0.0, false).sqrt();
        prop_assert!(lhs <= weighted_cell_norm(&mesh, &f, 0.0, false).sqrt() * (1.0 + 1e-10));
    }
}
