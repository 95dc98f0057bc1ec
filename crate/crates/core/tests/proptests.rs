use faer::Mat;
use proptest::prelude::*;

use fluxindex::fock::{build_basis, second_quantize, Statistics};
use fluxindex::lattice::{build_torus, Region};
use fluxindex::linalg::{self, c64};
use fluxindex::models::Flux;
use fluxindex::sparse::SparseMatrix;
use fluxindex::spectral_filter::{make_filter_with_profile, FilterProfile};
use fluxindex::transport::fractional_offset;

fn profile() -> impl Strategy<Value = FilterProfile> {
    prop_oneof![
        Just(FilterProfile::Smoothstep),
        Just(FilterProfile::Smootherstep),
        Just(FilterProfile::Bump)
    ]
}

fn hermitian(n: usize) -> impl Strategy<Value = Mat<c64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
        let a = Mat::from_fn(n, n, |i, j| c64::new(v[i * n + j], v[n * n + i * n + j]));
        linalg::hermitian_part(a.as_ref())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn region_algebra(a in 0u64..(1 << 12), b in 0u64..(1 << 12)) {
        let t = build_torus(4, 3).unwrap();
        let sites = |m: u64| (0..12).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>();
        let ra = Region::from_sites(&t, "a", &sites(a)).unwrap();
        let rb = Region::from_sites(&t, "b", &sites(b)).unwrap();
        prop_assert_eq!(ra.union(&rb).len() + ra.intersection(&rb).len(), ra.len() + rb.len());
        prop_assert_eq!(ra.complement().complement().mask(), ra.mask());
        prop_assert_eq!(ra.difference(&rb).mask(), ra.intersection(&rb.complement()).mask());
        prop_assert!(ra.intersection(&rb).is_subset(&ra));
        prop_assert_eq!(ra.intersects(&rb), !ra.intersection(&rb).is_empty());
        let moved = ra.translated(&t, (1, 2)).translated(&t, (-1, -2));
        prop_assert_eq!(moved.mask(), ra.mask());
    }

    #[test]
    fn flux_display_roundtrip(p in -50i64..50, q in 1i64..50) {
        let f = Flux::new(p, q);
        let back: Flux = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<Flux>(&json).unwrap(), f);
    }

    #[test]
    fn filter_weight_shape(pr in profile(), gap in 0.01f64..10.0, x in -3.0f64..3.0) {
        let f = make_filter_with_profile(gap, pr).unwrap();
        let w = f.weight(x * gap);
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert_eq!(w, f.weight(-x * gap));
        if x.abs() >= 1.0 {
            prop_assert_eq!(w, 1.0);
        }
        prop_assert!(f.weight(x.abs() * gap * 0.9) <= w + 1e-15);
    }

    #[test]
    fn offset_ignores_integer_shifts(v in prop::collection::vec(-0.2f64..0.2, 1..8), k in prop::collection::vec(-5i32..5, 8), c in -0.4f64..0.4) {
        let shifted: Vec<f64> = v.iter().zip(&k).map(|(x, n)| x + c + *n as f64).collect();
        let base: Vec<f64> = v.iter().map(|x| x + c).collect();
        let (a1, s1) = fractional_offset(&base);
        let (a2, s2) = fractional_offset(&shifted);
        prop_assert!(linalg::dist_to_integer(a1 - a2) < 1e-9);
        prop_assert!((s1 - s2).abs() < 1e-9);
    }

    #[test]
    fn sparse_products_match_dense(t in prop::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 0..20),
                                   u in prop::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0), 0..20)) {
        let a = SparseMatrix::from_triplets(6, t.iter().map(|&(r, c, x, y)| (r, c, c64::new(x, y))).collect());
        let b = SparseMatrix::from_triplets(6, u.iter().map(|&(r, c, x)| (r, c, c64::new(x, 0.0))).collect());
        let (da, db) = (a.to_dense(), b.to_dense());
        let diff = a.matmul(&b).to_dense() - &da * &db;
        prop_assert!(diff.norm_max() < 1e-12);
        prop_assert!((a.mul_dense(db.as_ref()) - &da * &db).norm_max() < 1e-12);
        prop_assert!((b.dense_mul(da.as_ref()) - &da * &db).norm_max() < 1e-12);
        prop_assert!((a.adjoint().to_dense() - da.adjoint()).norm_max() < 1e-15);
    }

    #[test]
    fn expm_is_unitary(a in hermitian(5), theta in -10.0f64..10.0) {
        let u = linalg::expm_i(a.as_ref(), theta).unwrap();
        prop_assert!(linalg::unitarity_defect(u.as_ref()) < 1e-12);
        let back = linalg::expm_i(a.as_ref(), -theta).unwrap();
        prop_assert!((&u * &back - Mat::<c64>::identity(5, 5)).norm_max() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn second_quantization_is_a_lie_homomorphism(a in hermitian(6), b in hermitian(6), n in 1usize..5) {
        let t = build_torus(3, 2).unwrap();
        let basis = build_basis(&t, Statistics::Fermion, n).unwrap();
        let da = second_quantize(&basis, a.as_ref()).unwrap();
        let db = second_quantize(&basis, b.as_ref()).unwrap();
        prop_assert!(da.number_commutator(&basis) < 1e-12);
        let (ma, mb) = (da.to_dense(), db.to_dense());
        let lhs = &ma * &mb - &mb * &ma;
        let ab = &a * &b - &b * &a;
        let rhs = second_quantize(&basis, ab.as_ref()).unwrap().to_dense();
        prop_assert!((lhs - rhs).norm_max() < 1e-10);
    }
}
