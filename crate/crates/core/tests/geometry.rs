use dtn_core::geometry::{
    sawtooth, segment_distance, triangulate, ConeParams, DomainPreset, GraphMap, Mollifier, PiecewiseLinear,
    PolygonalDomain,
};
use dtn_core::Point;
use proptest::prelude::*;

fn square() -> PolygonalDomain {
    PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap()
}

fn lshape() -> PolygonalDomain {
    PolygonalDomain::build(DomainPreset::LShape { side: 1.0 }).unwrap()
}

fn brute_delta(domain: &PolygonalDomain, p: Point) -> f64 {
    domain.edges().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

#[test]
fn delta_matches_edge_scan() {
    let d = square();
    assert_eq!(d.delta(Point::new(0.5, 0.5)), 0.5);
    for p in [Point::new(0.1, 0.7), Point::new(0.9, 0.95), Point::new(0.3, 0.3)] {
        assert!((d.delta(p) - brute_delta(&d, p)).abs() < 1e-15);
    }
    let l = lshape();
    // Nearest boundary point is the reentrant corner.
    let p = Point::new(0.45, 0.45);
    assert!((l.distance(p).value - 0.05 * 2.0f64.sqrt()).abs() < 1e-14);
    assert!(l.distance(p).inside);
    let outside = l.distance(Point::new(0.6, 0.7));
    assert!(!outside.inside && (outside.value - 0.1).abs() < 1e-14);
}

#[test]
fn delta_vanishes_on_the_boundary() {
    for d in [square(), lshape(), PolygonalDomain::build(DomainPreset::Ngon { n: 12, radius: 1.0 }).unwrap()] {
        for (a, b) in d.edges() {
            for k in 0..=8 {
                let p = a + (b - a) * (k as f64 / 8.0);
                assert!(d.delta(p) < 1e-14, "δ = {} on the boundary", d.delta(p));
            }
        }
    }
}

#[test]
fn ngon_perimeter_and_area() {
    let d = PolygonalDomain::build(DomainPreset::Ngon { n: 256, radius: 1.0 }).unwrap();
    let n = 256.0;
    let perimeter = 2.0 * n * (std::f64::consts::PI / n).sin();
    assert!((d.perimeter() - perimeter).abs() < 1e-12);
    let area = 0.5 * n * (2.0 * std::f64::consts::PI / n).sin();
    assert!((d.area() - area).abs() < 1e-12);
}

#[test]
fn triangulations_partition_their_polygons() {
    let domains = [
        (square(), 0.1),
        (lshape(), 0.1),
        (PolygonalDomain::build(DomainPreset::Sawtooth { slope: 0.8, teeth: 4 }).unwrap(), 0.05),
        (PolygonalDomain::build(DomainPreset::Ngon { n: 64, radius: 1.0 }).unwrap(), 0.1),
    ];
    for (d, h) in domains {
        let mesh = triangulate(&d, h).unwrap();
        let total: f64 = (0..mesh.triangle_count()).map(|t| mesh.area(t)).sum();
        assert!((total - d.area()).abs() <= 1e-12 * d.area(), "{total} vs {}", d.area());
        assert!(mesh.h() <= 1.5 * h);
        let fine = mesh.refine().unwrap();
        assert_eq!(fine.triangle_count(), 4 * mesh.triangle_count());
        assert!((fine.h() - 0.5 * mesh.h()).abs() < 1e-12);
    }
}

#[test]
fn unit_square_cone_example() {
    let mesh = triangulate(&square(), 0.1).unwrap();
    let q = (0..mesh.boundary_count())
        .find(|&q| (mesh.node(mesh.boundary_nodes()[q]) - Point::new(0.5, 0.0)).norm() < 1e-12)
        .unwrap();
    let target = (0..mesh.node_count()).find(|&i| (mesh.node(i) - Point::new(0.5, 0.3)).norm() < 1e-12).unwrap();
    let cone = mesh.cone_of(q, ConeParams::new(2.0).unwrap());
    assert!(cone.contains(&target));
    assert!(cone.iter().all(|&i| !mesh.is_boundary(i)));
}

#[test]
fn cones_cover_the_interior_above_the_threshold() {
    for d in [square(), lshape()] {
        let mesh = triangulate(&d, 0.1).unwrap();
        let cone = ConeParams::new(mesh.cone_threshold() * (1.0 + 1e-9)).unwrap();
        let mut covered = vec![false; mesh.node_count()];
        for q in 0..mesh.boundary_count() {
            for i in mesh.cone_of(q, cone) {
                covered[i] = true;
            }
        }
        for i in 0..mesh.node_count() {
            assert_eq!(covered[i], !mesh.is_boundary(i), "node {i}");
        }
        assert!(mesh.uncovered_nodes(cone).is_empty());
        assert!(mesh.uncovered_nodes(ConeParams::for_domain(&d)).is_empty());
    }
}

/// `∫ η(z) |z| dz` by composite Simpson.
fn eta_first_moment() -> f64 {
    let n = 2000;
    let h = 2.0 / n as f64;
    let f = |i: usize| {
        let z = -1.0 + i as f64 * h;
        Mollifier::eta(z) * z.abs()
    };
    (1..n).map(|i| if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) }).sum::<f64>() * h / 3.0 + (f(0) + f(n)) * h / 3.0
}

#[test]
fn corner_height_against_quadrature() {
    let psi = PiecewiseLinear::from_knots(vec![-2.0, 0.0, 2.0], vec![2.0, 0.0, 2.0]).unwrap();
    let map = GraphMap::new(psi);
    let e = map.eval(0.0, 1.0).unwrap();
    let expected = map.stretch() + eta_first_moment();
    assert!((e.value.y - expected).abs() < 1e-10, "{} vs {expected}", e.value.y);
    assert!(e.value.y > map.stretch());
}

fn sawtooth_map(slope: f64, teeth: usize) -> GraphMap {
    let period = 1.0 / teeth as f64;
    let n = (10.0 / period).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| -2.0 + 0.5 * period * k as f64).collect();
    let ys = xs.iter().map(|&x| sawtooth(x, slope, teeth)).collect();
    GraphMap::new(PiecewiseLinear::from_knots(xs, ys).unwrap())
}

#[test]
fn jacobian_singular_values_within_reported_bounds() {
    let map = sawtooth_map(0.8, 4);
    let (lo, hi) = map.singular_value_bounds();
    assert!(lo > 0.0);
    for i in 0..=40 {
        for j in 1..=20 {
            let e = map.eval(i as f64 / 40.0, 0.5 * j as f64 / 20.0).unwrap();
            let (smin, smax) = e.singular_values();
            assert!(smin >= lo - 1e-12 && smax <= hi + 1e-12);
            assert!(e.df_ds() >= 1.0);
        }
    }
}

#[test]
fn strip_measure_is_refinement_stable() {
    let map = sawtooth_map(0.8, 4);
    let coarse = map.hessian_strip_measure(0.0, 1.0, 0.5, 20, 10).unwrap().carleson_norm();
    let fine = map.hessian_strip_measure(0.0, 1.0, 0.5, 40, 20).unwrap().carleson_norm();
    assert!(coarse.is_finite() && fine.is_finite());
    assert!((coarse - fine).abs() / coarse.min(fine) < 0.10, "{coarse} vs {fine}");
}

proptest! {
    #[test]
    fn delta_is_one_lipschitz(ax in 0.0..1.0f64, ay in 0.0..1.0f64, bx in 0.0..1.0f64, by in 0.0..1.0f64) {
        for d in [square(), lshape()] {
            let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
            prop_assert!((d.delta(a) - d.delta(b)).abs() <= (a - b).norm() + 1e-14);
        }
    }

    #[test]
    fn cones_grow_with_aperture(a0 in 1.01..4.0f64, extra in 0.0..3.0f64, q in 0usize..40) {
        let mesh = triangulate(&lshape(), 0.1).unwrap();
        let q = q % mesh.boundary_count();
        let small = mesh.cone_of(q, ConeParams::new(a0).unwrap());
        let large = mesh.cone_of(q, ConeParams::new(a0 + extra).unwrap());
        prop_assert!(small.iter().all(|i| large.contains(i)));
    }

    #[test]
    fn stretch_keeps_df_ds_above_one(y in -0.5..1.5f64, s in 1e-3..1.0f64, slope in 0.1..2.0f64) {
        let map = sawtooth_map(slope, 3);
        prop_assert!(map.eval(y, s).unwrap().df_ds() >= 1.0);
    }
}
