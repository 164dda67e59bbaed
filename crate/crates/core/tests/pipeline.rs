#[path = "../src/testutil.rs"]
mod testutil;

use multipole::algebra;
use multipole::conic::ProjPoint2;
use multipole::deconstruct::{full_decompose, Strategy};
use multipole::harmonic::harmonic_project;
use multipole::maxwell::maxwell_poly;
use multipole::planar::{fiber_enumerate, project_divisor, ConicDivisor, PencilCenter};
use multipole::sylvester::conic_roots;
use multipole::{CVec3, QuadForm, Tolerances};
use proptest::prelude::*;
use testutil::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn surface_sequence_matches_polynomial(d in 0usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_quadform(&mut r);
        let p = random_poly(&mut r, d);
        let seqs = full_decompose(&p, &q, Strategy::Canonical, &tol()).unwrap();
        prop_assert_eq!(seqs.len(), 1);
        for _ in 0..10 {
            let x = random_surface_point(&mut r, &q);
            prop_assert!((seqs[0].eval(&x) - p.eval(&x)).norm() <= 1e-8 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn real_sequence_is_among_all_sequences(d in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = QuadForm::sphere();
        let p = random_real_poly(&mut r, d);
        let real = full_decompose(&p, &q, Strategy::RealUnique, &tol()).unwrap();
        prop_assert!(real[0].is_real(1e-9));
        let all = full_decompose(&p, &q, Strategy::Enumerate, &tol()).unwrap();
        let x = random_surface_point(&mut r, &q);
        let target = real[0].eval(&x);
        prop_assert!(all.iter().any(|s| (s.eval(&x) - target).norm() <= 1e-8 * (1.0 + p.norm())));
    }

    #[test]
    fn maxwell_polynomials_are_their_own_projection(d in 2usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_quadform(&mut r);
        let vs: Vec<CVec3> = (0..d).map(|_| random_cvec3(&mut r)).collect();
        let m = maxwell_poly(&q, &vs).unwrap();
        let (h, rest) = harmonic_project(&m, &q, 1e-9).unwrap();
        prop_assert!((&h - &m).norm() <= 1e-9 * m.norm());
        prop_assert!(rest.norm() <= 1e-9 * m.norm());
    }

    #[test]
    fn conic_roots_lie_in_the_fiber_of_their_projection(d in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_quadform(&mut r);
        let p = random_homog(&mut r, d);
        let roots = conic_roots(&p, &q, &tol()).unwrap();
        let points = roots
            .clusters
            .iter()
            .map(|c| (ProjPoint2::new(roots.param.eval(&c.point)).unwrap(), c.multiplicity))
            .collect();
        let divisor = ConicDivisor { points };
        let center = loop {
            if let Ok(c) = PencilCenter::new(ProjPoint2::new(random_cvec3(&mut r)).unwrap(), &q) {
                break c;
            }
        };
        let e = project_divisor(&divisor, &center, 1e-6);
        prop_assert_eq!(e.degree(), 2 * d);
        let fiber = fiber_enumerate(&e, &center, &q, 1e-6).unwrap();
        prop_assert!(fiber.iter().any(|f| f.approx_eq(&divisor, 1e-6)));
    }
}

#[test]
fn quadric_points_are_on_the_surface() {
    let mut r = rng(0);
    for _ in 0..20 {
        let q = random_quadform(&mut r);
        let x = random_surface_point(&mut r, &q);
        assert!((q.eval(&x) - 1.0).norm() < 1e-12);
    }
}
