//! Structural invariants checked on random inputs.

use ineqlab::complexify::{complexification_norm, DEFAULT_NODES};
use ineqlab::embeddings::{distortion, Metric};
use ineqlab::families::{random_grid, random_vectors, seeded};
use ineqlab::lattice::gap_moment;
use ineqlab::linalg::{random_gaussian, random_orthogonal, random_psd, Mat};
use ineqlab::operators::{box_average, BoxAverageKind};
use ineqlab::schatten::{schatten_pow, trace_power};
use ineqlab::{Displacement, SamplePlan};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn displacements() -> impl Strategy<Value = Displacement> {
    prop_oneof![
        Just(Displacement::Diagonal),
        Just(Displacement::SymmetricDiagonal),
        (0usize..2).prop_map(Displacement::Edge),
        (1i64..4).prop_map(|scale| Displacement::ShiftedSet { set: vec![0], scale }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gap_moment_is_translation_invariant(seed in any::<u64>(), disp in displacements(), v in proptest::collection::vec(-9i64..9, 2), p in 1.0f64..5.0) {
        let f = random_grid(8, 2, 2, p, seed).unwrap();
        let plan = SamplePlan::exhaustive();
        let a = gap_moment(&f, &disp, &plan).unwrap();
        let b = gap_moment(&f.translate(&v), &disp, &plan).unwrap();
        prop_assert!(close(a, b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn gap_moment_scales_with_power_p(seed in any::<u64>(), disp in displacements(), lambda in -3.0f64..3.0, p in 1.0f64..5.0) {
        let f = random_grid(8, 2, 2, p, seed).unwrap();
        let plan = SamplePlan::exhaustive();
        let a = gap_moment(&f, &disp, &plan).unwrap();
        let b = gap_moment(&f.affine(lambda, &[0.0, 0.0]), &disp, &plan).unwrap();
        prop_assert!(close(b, lambda.abs().powf(p) * a, 1e-11), "{b} vs {}", lambda.abs().powf(p) * a);
    }

    #[test]
    fn gap_moment_ignores_constant_shift(seed in any::<u64>(), disp in displacements(), c in proptest::collection::vec(-5.0f64..5.0, 2)) {
        let f = random_grid(8, 2, 2, 3.0, seed).unwrap();
        let plan = SamplePlan::exhaustive();
        let a = gap_moment(&f, &disp, &plan).unwrap();
        let b = gap_moment(&f.affine(1.0, &c), &disp, &plan).unwrap();
        prop_assert!(close(a, b, 1e-10), "{a} vs {b}");
    }

    #[test]
    fn box_averaging_contracts_gap_moments(seed in any::<u64>(), disp in displacements(), radius in prop_oneof![Just(1usize), Just(3usize)], which in 0usize..3, p in 1.0f64..5.0) {
        let f = random_grid(8, 2, 2, p, seed).unwrap();
        let kind = [BoxAverageKind::A, BoxAverageKind::Bj(1), BoxAverageKind::DS(vec![0])][which].clone();
        let g = box_average(&f, &kind, radius).unwrap();
        let plan = SamplePlan::exhaustive();
        let (a, b) = (gap_moment(&f, &disp, &plan).unwrap(), gap_moment(&g, &disp, &plan).unwrap());
        prop_assert!(b <= a * (1.0 + 1e-12) + 1e-14, "{b} > {a}");
    }

    #[test]
    fn box_averaging_commutes_with_translation(seed in any::<u64>(), v in proptest::collection::vec(-9i64..9, 2), which in 0usize..4) {
        let f = random_grid(8, 2, 1, 2.0, seed).unwrap();
        let kind = [BoxAverageKind::A, BoxAverageKind::Bj(0), BoxAverageKind::DS(vec![1]), BoxAverageKind::DeltaT(vec![0])][which].clone();
        let left = box_average(&f.translate(&v), &kind, 3).unwrap();
        let right = box_average(&f, &kind, 3).unwrap().translate(&v);
        for (a, b) in left.values().iter().zip(right.values()) {
            prop_assert!(close(*a, *b, 1e-13));
        }
    }

    #[test]
    fn schatten_norm_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..6, p in 1.0f64..6.0) {
        let mut rng = seeded(seed);
        let a = random_gaussian(&mut rng, d, d);
        let (u, v) = (random_orthogonal(&mut rng, d), random_orthogonal(&mut rng, d));
        let rotated: Mat = u.mul(&a).mul(&v);
        let (x, y) = (schatten_pow(&a, p).unwrap(), schatten_pow(&rotated, p).unwrap());
        prop_assert!(close(x, y, 1e-9), "{x} vs {y}");
    }

    #[test]
    fn trace_power_is_monotone_on_psd_order(seed in any::<u64>(), d in 1usize..6, q in 1.0f64..6.0) {
        let mut rng = seeded(seed);
        let a = random_psd(&mut rng, d);
        let b = a.add(&random_psd(&mut rng, d)).unwrap();
        let (x, y) = (trace_power(&a, q).unwrap(), trace_power(&b, q).unwrap());
        prop_assert!(x <= y * (1.0 + 1e-10), "{x} > {y}");
    }

    #[test]
    fn complexified_norm_is_complex_homogeneous(u in proptest::collection::vec(-2.0f64..2.0, 3), v in proptest::collection::vec(-2.0f64..2.0, 3), re in -2.0f64..2.0, im in -2.0f64..2.0, p in 1.0f64..6.0) {
        // (re + i im)(u + i v) = (re u − im v) + i (im u + re v)
        let su: Vec<f64> = u.iter().zip(&v).map(|(a, b)| re * a - im * b).collect();
        let sv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| im * a + re * b).collect();
        let base = complexification_norm(&u, &v, p, DEFAULT_NODES).unwrap();
        let scaled = complexification_norm(&su, &sv, p, DEFAULT_NODES).unwrap();
        prop_assert!(close(scaled, (re * re + im * im).sqrt() * base, 1e-9), "{scaled} vs {}", (re * re + im * im).sqrt() * base);
    }

    #[test]
    fn complexified_norm_satisfies_triangle_inequality(w in proptest::collection::vec(-2.0f64..2.0, 12), p in 1.0f64..6.0) {
        let (u1, v1, u2, v2) = (&w[0..3], &w[3..6], &w[6..9], &w[9..12]);
        let su: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| a + b).collect();
        let sv: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| a + b).collect();
        let n = |u: &[f64], v: &[f64]| complexification_norm(u, v, p, DEFAULT_NODES).unwrap();
        prop_assert!(n(&su, &sv) <= (n(u1, v1) + n(u2, v2)) * (1.0 + 1e-10));
    }

    #[test]
    fn distortion_is_monotone_under_restriction(seed in any::<u64>(), keep in 2usize..12) {
        let src = random_vectors(12, 2, seed);
        let img = random_vectors(12, 3, seed.wrapping_add(1));
        let (a, b) = (Metric::lp(2.0), Metric::lp(1.0));
        let full = distortion(&src, &a, &img, &b).unwrap().distortion;
        let part = distortion(&src[..keep], &a, &img[..keep], &b).unwrap().distortion;
        prop_assert!(part <= full * (1.0 + 1e-12));
    }
}
