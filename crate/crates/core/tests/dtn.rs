use std::f64::consts::PI;

use dtn_core::coefficients::{CoefficientField, MultiplierField};
use dtn_core::dtn::{
    apply_commutator, boundary_norm, boundary_seminorm, commutator_matrix, operator_norm, steklov_poincare,
    trilinear_residual, BoundaryNormKind, DtNOperator,
};
use dtn_core::fem::{assemble, BoundaryTrace, DiscreteField};
use dtn_core::geometry::{triangulate, DomainPreset, PolygonalDomain, TriMesh};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(preset: DomainPreset, h: f64) -> TriMesh {
    triangulate(&PolygonalDomain::build(preset).unwrap(), h).unwrap()
}

fn square(h: f64) -> TriMesh {
    mesh(DomainPreset::Square { side: 1.0 }, h)
}

fn dtn<'a>(mesh: &'a TriMesh, a: &CoefficientField) -> DtNOperator<'a> {
    steklov_poincare(&assemble(mesh, a).unwrap()).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn angle(mesh: &TriMesh) -> Vec<f64> {
    mesh.boundary_points().iter().map(|p| p.y.atan2(p.x)).collect()
}

#[test]
fn disk_modes_are_eigenvectors() {
    let disk = mesh(DomainPreset::Ngon { n: 256, radius: 1.0 }, 0.05);
    let l = dtn(&disk, &CoefficientField::identity(1).unwrap());
    let theta = angle(&disk);
    for k in 1..=8 {
        let f: Vec<f64> = theta.iter().map(|t| (k as f64 * t).cos()).collect();
        let lf = l.apply_vec(&f);
        let diff: Vec<f64> = lf.iter().zip(&f).map(|(a, b)| a - k as f64 * b).collect();
        let rel = (l.inner(&diff, &diff) / l.inner(&f, &f)).sqrt() / k as f64;
        assert!(rel <= 0.05, "k = {k}: relative error {rel}");
    }
}

#[test]
fn truncated_disk_operator_norm_is_the_top_mode() {
    let disk = mesh(DomainPreset::Ngon { n: 128, radius: 1.0 }, 0.1);
    let l = dtn(&disk, &CoefficientField::identity(1).unwrap());
    let theta = angle(&disk);
    let n = 6;
    // Mass-orthonormal basis of span{1, cos kθ, sin kθ : k ≤ n}.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut raw = vec![vec![1.0; theta.len()]];
    for k in 1..=n {
        raw.push(theta.iter().map(|t| (k as f64 * t).cos()).collect());
        raw.push(theta.iter().map(|t| (k as f64 * t).sin()).collect());
    }
    for mut v in raw {
        for b in &basis {
            let c = l.inner(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = l.inner(&v, &v).sqrt();
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let dim = basis.len();
    let lb: Vec<Vec<f64>> = basis.iter().map(|b| l.apply_vec(b)).collect();
    let projected = DMatrix::from_fn(dim, dim, |r, c| l.inner(&basis[r], &lb[c]));
    let top = projected.singular_values().max();
    assert!((top - n as f64).abs() <= 0.05 * n as f64, "{top}");
}

#[test]
fn structure_invariants_for_symmetric_presets() {
    let cases = [
        CoefficientField::identity(1).unwrap(),
        CoefficientField::scalar_smooth(1, PI).unwrap(),
        CoefficientField::rotated_anisotropic(1, 0.5, 4.0).unwrap(),
        CoefficientField::identity(2).unwrap(),
        CoefficientField::system_coupled(0.3).unwrap(),
    ];
    for domain in [DomainPreset::Square { side: 1.0 }, DomainPreset::LShape { side: 1.0 }] {
        let mesh = mesh(domain, 0.125);
        for a in &cases {
            let l = dtn(&mesh, a);
            let inv = l.invariants();
            assert!(inv.mass_symmetry <= 1e-10, "{:?}", a.preset());
            let top = l.spectrum().last().copied().unwrap();
            assert!(inv.min_form >= -1e-10 * top, "{:?}: {}", a.preset(), inv.min_form);
            if let Some(k) = inv.constant_kernel {
                assert!(k <= 1e-9, "{:?}: {k}", a.preset());
            }
        }
    }
}

#[test]
fn adjoint_dtn_is_the_mass_transpose() {
    let mesh = square(0.125);
    let a = CoefficientField::skew(1, 2.0, 0.5).unwrap();
    let (l, ls) = (dtn(&mesh, &a), dtn(&mesh, &a.adjoint()));
    assert!(!l.is_symmetric());
    for seed in 0..3 {
        let (f, w) = (random_vec(l.dim(), seed), random_vec(l.dim(), seed + 10));
        let (lhs, rhs) = (l.inner(&l.apply_vec(&f), &w), l.inner(&f, &ls.apply_vec(&w)));
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn commutator_of_constants_vanishes() {
    let mesh = square(0.125);
    let l = dtn(&mesh, &CoefficientField::scalar_smooth(1, 2.0).unwrap());
    let c = commutator_matrix(&l, &MultiplierField::scalar_from_fn(&mesh, |_| 3.7)).unwrap();
    assert_eq!(c.amax(), 0.0);
    assert_eq!(operator_norm(&c, l.dof_mass()).unwrap(), 0.0);
}

#[test]
fn operator_norm_of_identity_ignores_mass() {
    let mesh = square(0.125);
    let l = dtn(&mesh, &CoefficientField::identity(1).unwrap());
    let id = DMatrix::identity(l.dim(), l.dim());
    assert!((operator_norm(&id, l.dof_mass()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn boundary_norm_examples() {
    let mesh = square(0.125);
    let one = BoundaryTrace::constant(&mesh, 1, 1.0);
    assert!((boundary_norm(&one, BoundaryNormKind::L2) - 2.0).abs() < 1e-12);
    assert_eq!(boundary_seminorm(&one, BoundaryNormKind::H1), 0.0);
    assert!((boundary_norm(&one, BoundaryNormKind::H1) - 2.0).abs() < 1e-12);
    // x is arclength along the bottom and top faces and constant on the sides.
    let x = BoundaryTrace::scalar_from_fn(&mesh, |p| p.x);
    assert!((boundary_seminorm(&x, BoundaryNormKind::C01) - 1.0).abs() < 1e-12);
    assert!((boundary_norm(&x, BoundaryNormKind::C01) - 2.0).abs() < 1e-12);
    assert!((boundary_norm(&x, BoundaryNormKind::Linf) - 1.0).abs() < 1e-15);
    assert!((boundary_seminorm(&x, BoundaryNormKind::H1) - 2.0f64.sqrt()).abs() < 1e-12);
}

#[test]
fn trilinear_identity_for_constant_and_linear_g() {
    let mesh = square(0.125);
    let a = CoefficientField::identity(1).unwrap();
    let sys = assemble(&mesh, &a).unwrap();
    let l = steklov_poincare(&sys).unwrap();
    let f = BoundaryTrace::scalar_from_fn(&mesh, |p| p.x - 0.3 * p.y);
    let hb = BoundaryTrace::scalar_from_fn(&mesh, |p| 0.5 + p.y);

    let gc = MultiplierField::scalar_from_fn(&mesh, |_| 2.0);
    let vc = DiscreteField::scalar_from_fn(&mesh, |_| 2.0);
    let s = trilinear_residual(&sys, &l, &f, &gc, &hb, &vc).unwrap();
    assert!(s.lhs.abs() <= 1e-10 && s.rhs.abs() <= 1e-10);

    let gl = MultiplierField::scalar_from_fn(&mesh, |p| 0.2 + p.y);
    let vl = DiscreteField::scalar_from_fn(&mesh, |p| 0.2 + p.y);
    let s = trilinear_residual(&sys, &l, &f, &gl, &hb, &vl).unwrap();
    assert!(s.residual <= 1e-8 * (s.lhs.abs() + s.rhs.abs() + 1.0), "{s:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commutator_is_mass_skew_adjoint(seed in 0u64..10_000, omega in 0.5..4.0f64) {
        let mesh = square(0.2);
        let l = dtn(&mesh, &CoefficientField::scalar_smooth(1, omega).unwrap());
        let gv = random_vec(mesh.boundary_count(), seed);
        let g = MultiplierField::Scalar(gv);
        let f = BoundaryTrace::new(&mesh, 1, random_vec(l.dim(), seed + 1)).unwrap();
        let w = BoundaryTrace::new(&mesh, 1, random_vec(l.dim(), seed + 2)).unwrap();
        let cf = apply_commutator(&l, &g, &f).unwrap();
        let cw = apply_commutator(&l, &g, &w).unwrap();
        let (a, b) = (l.inner(cf.values(), w.values()), l.inner(f.values(), cw.values()));
        prop_assert!((a + b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn commutator_is_linear_in_g(seed in 0u64..10_000) {
        let mesh = square(0.2);
        let l = dtn(&mesh, &CoefficientField::rotated_anisotropic(1, 0.3, 2.0).unwrap());
        let gv = random_vec(mesh.boundary_count(), seed);
        let doubled = MultiplierField::Scalar(gv.iter().map(|x| 2.0 * x).collect());
        let f = BoundaryTrace::new(&mesh, 1, random_vec(l.dim(), seed + 1)).unwrap();
        let once = apply_commutator(&l, &MultiplierField::Scalar(gv), &f).unwrap();
        let twice = apply_commutator(&l, &doubled, &f).unwrap();
        for (x, y) in once.values().iter().zip(twice.values()) {
            prop_assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative(seed in 0u64..10_000) {
        let mesh = mesh(DomainPreset::LShape { side: 1.0 }, 0.125);
        let l = dtn(&mesh, &CoefficientField::system_coupled(0.3).unwrap());
        let f = random_vec(l.dim(), seed);
        prop_assert!(l.inner(&l.apply_vec(&f), &f) >= -1e-10 * l.inner(&f, &f));
    }
}
