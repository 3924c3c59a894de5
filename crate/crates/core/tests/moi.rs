mod common;

use common::random_pair;
use proptest::prelude::*;
use shiftlab::besov::{member, SmoothFunction};
use shiftlab::matcore::{eigh, matfun, CMatrix, HermitianOperator};
use shiftlab::moi::{
    derivative, finite_difference, finite_difference_paths, moi_eval, perturbation_difference,
    perturbation_difference_paths, taylor_remainder, taylor_remainder_paths, trace_derivative,
    MoiProblem,
};
use shiftlab::Error;

fn power(k: &CMatrix, m: usize) -> CMatrix {
    (1..m).fold(k.clone(), |acc, _| acc.matmul(k))
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

fn fm(f: &SmoothFunction, a: &HermitianOperator) -> CMatrix {
    matfun(f, a).unwrap().into_matrix()
}

#[test]
fn moi_examples() {
    let (a, k) = random_pair(1, 4);
    let d = eigh(&a).unwrap();
    for m in 1..=4 {
        let low =
            moi_eval(&MoiProblem::uniform(SmoothFunction::monomial(m - 1), &d, &k, m).unwrap())
                .unwrap();
        assert!(low.max_abs() <= 1e-12, "m={m}");
        let top = moi_eval(&MoiProblem::uniform(SmoothFunction::monomial(m), &d, &k, m).unwrap())
            .unwrap();
        assert!(
            top.max_abs_diff(&power(k.matrix(), m)) <= 1e-10 * (1.0 + top.max_abs()),
            "m={m}"
        );
    }
    let sq =
        moi_eval(&MoiProblem::uniform(SmoothFunction::monomial(2), &d, &k, 1).unwrap()).unwrap();
    let want = &a.matrix().matmul(k.matrix()) + &k.matrix().matmul(a.matrix());
    assert!(sq.max_abs_diff(&want) <= 1e-10);
}

#[test]
fn moi_rejects_bad_shapes_and_budget() {
    let (a, k) = random_pair(2, 3);
    let d = eigh(&a).unwrap();
    let f = member("gauss").unwrap();
    assert!(MoiProblem::new(f.clone(), vec![d.clone()], vec![k.clone()]).is_err());
    let other = HermitianOperator::from_real_diag(&[1.0, 2.0]);
    assert!(matches!(
        MoiProblem::new(f.clone(), vec![d.clone(), d.clone()], vec![other]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        MoiProblem::uniform(f.clone(), &d, &k, 5),
        Err(Error::OrderOutOfRange { .. })
    ));

    let big = HermitianOperator::from_real_diag(&(0..64).map(|i| i as f64).collect::<Vec<_>>());
    let db = eigh(&big).unwrap();
    let res = moi_eval(&MoiProblem::uniform(f, &db, &big, 4).unwrap());
    assert!(matches!(res, Err(Error::Budget { .. })), "{res:?}");
}

#[test]
fn perturbation_difference_examples() {
    let (a, k) = random_pair(3, 6);
    let g = member("gauss").unwrap();
    assert_eq!(
        perturbation_difference(&g, &a, &HermitianOperator::zeros(6))
            .unwrap()
            .max_abs(),
        0.0
    );
    let id = perturbation_difference(&SmoothFunction::monomial(1), &a, &k).unwrap();
    assert!(id.max_abs_diff(k.matrix()) <= 1e-12);
    let p = perturbation_difference_paths(&g, &a, &k).unwrap();
    assert!(p.max_residual() <= 1e-9);
}

#[test]
fn derivative_examples() {
    let (a, k) = random_pair(4, 5);
    for m in 1..=4 {
        let d = derivative(&SmoothFunction::monomial(m), &a, &k, m, 0.7).unwrap();
        let want = power(k.matrix(), m).scale(factorial(m));
        assert!(
            d.max_abs_diff(&want) <= 1e-10 * (1.0 + want.max_abs()),
            "m={m}"
        );
        assert!(
            derivative(&SmoothFunction::monomial(m - 1), &a, &k, m, 0.2)
                .unwrap()
                .max_abs()
                <= 1e-12
        );
        let tr = trace_derivative(&SmoothFunction::monomial(m), &a, &k, m, 0.0).unwrap();
        assert!((tr - want.trace().re).abs() <= 1e-10 * (1.0 + tr.abs()));
    }
    let zero = HermitianOperator::from_real_diag(&[0.0]);
    for (c, s) in [(0.5, 1.0), (-2.0, 0.3)] {
        let d = derivative(
            &SmoothFunction::exp(),
            &zero,
            &HermitianOperator::from_real_diag(&[c]),
            1,
            s,
        )
        .unwrap();
        assert!((d[(0, 0)].re - c * (s * c).exp()).abs() <= 1e-14);
    }
}

#[test]
fn finite_difference_and_taylor_examples() {
    let (a, k) = random_pair(5, 4);
    let g = member("gauss").unwrap();
    let b = a.add_scaled(&k, 1.0).unwrap();
    let first = &fm(&g, &b) - &fm(&g, &a);
    assert!(
        finite_difference(&g, &a, &k, 1)
            .unwrap()
            .max_abs_diff(&first)
            <= 1e-12
    );
    assert!(
        taylor_remainder(&g, &a, &k, 1)
            .unwrap()
            .max_abs_diff(&first)
            <= 1e-10
    );
    for m in 1..=4 {
        let p = SmoothFunction::monomial(m - 1);
        assert!(
            finite_difference(&p, &a, &k, m).unwrap().max_abs()
                <= 1e-9 * (1.0 + a.matrix().max_abs()).powi(m as i32)
        );
        assert!(taylor_remainder(&p, &a, &k, m).unwrap().max_abs() <= 1e-9);
        assert_eq!(
            taylor_remainder(&g, &a, &HermitianOperator::zeros(4), m)
                .unwrap()
                .max_abs(),
            0.0
        );
    }
    let p = finite_difference_paths(&g, &a, &k, 2).unwrap();
    assert!(p.max_residual() <= 1e-9 * p.scale());
}

#[test]
fn trace_derivative_examples() {
    let alpha = [0.3, -1.0, 2.0];
    let lam = [0.5, 1.5, -0.7];
    let a = HermitianOperator::from_real_diag(&alpha);
    let k = HermitianOperator::from_real_diag(&lam);
    for f in ["gauss", "rational", "sin"].map(|l| member(l).unwrap()) {
        for m in 1..=3 {
            let s = 0.4;
            let want: f64 = (0..3)
                .map(|j| lam[j].powi(m as i32) * f.deriv(m, alpha[j] + s * lam[j]).unwrap())
                .sum();
            let got = trace_derivative(&f, &a, &k, m, s).unwrap();
            assert!(
                (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
                "{} m={m}",
                f.label()
            );
        }
    }
    let a = HermitianOperator::from_real_diag(&[0.0, 1.0]);
    let off = HermitianOperator::new(CMatrix::from_parts(2, &[0.0, 1.0, 1.0, 0.0], None).unwrap())
        .unwrap();
    assert!(
        trace_derivative(&SmoothFunction::exp(), &a, &off, 1, 0.0)
            .unwrap()
            .abs()
            <= 1e-15
    );
}

fn labels() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["gauss", "rational", "fejer1", "sin", "gauss_shifted"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_is_homogeneous(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3, c in prop::sample::select(vec![-2.0, 0.5, 3.0, 1.0 / 3.0]), label in labels()) {
        let (a, k) = random_pair(seed, n);
        let f = member(label).unwrap();
        let d1 = derivative(&f, &a, &k, m, 0.0).unwrap();
        let dc = derivative(&f, &a, &k.scale(c), m, 0.0).unwrap();
        let scaled = d1.scale(c.powi(m as i32));
        prop_assert!(dc.max_abs_diff(&scaled) <= 1e-12 * (1.0 + scaled.max_abs()));
    }

    #[test]
    fn trace_derivative_matches_trace_of_derivative(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3, s in -1.0f64..1.0, label in labels()) {
        let (a, k) = random_pair(seed, n);
        let f = member(label).unwrap();
        let d = derivative(&f, &a, &k, m, s).unwrap();
        let tr = trace_derivative(&f, &a, &k, m, s).unwrap();
        prop_assert!((tr - d.trace().re).abs() <= 1e-10 * (1.0 + d.frobenius()));
        prop_assert!(d.trace().im.abs() <= 1e-10 * (1.0 + d.frobenius()));
    }

    #[test]
    fn taylor_and_difference_paths_agree(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3, label in labels()) {
        let (a, k) = random_pair(seed, n);
        let f = member(label).unwrap();
        let t = taylor_remainder_paths(&f, &a, &k, m).unwrap();
        prop_assert!(t.frobenius_residual() <= 1e-9 * (1.0 + t.direct.frobenius()));
        let d = finite_difference_paths(&f, &a, &k, m).unwrap();
        prop_assert!(d.max_residual() <= 1e-9 * d.scale());
    }

    #[test]
    fn telescoping(seed in any::<u64>(), m in 2usize..=3, label in labels()) {
        let (a, k) = random_pair(seed, 4);
        let f = member(label).unwrap();
        let ea = eigh(&a).unwrap();
        let eb = eigh(&a.add_scaled(&k, 1.0).unwrap()).unwrap();
        let moi = |first: &_, order: usize| {
            let mut measures = vec![Clone::clone(first)];
            measures.extend(std::iter::repeat_n(ea.clone(), order));
            moi_eval(&MoiProblem::new(f.clone(), measures, vec![k.clone(); order]).unwrap()).unwrap()
        };
        let lhs = &moi(&eb, m - 1) - &moi(&ea, m - 1);
        let rhs = moi(&eb, m);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn moi_of_hermitian_data_is_hermitian_when_symmetric(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=3) {
        let (a, k) = random_pair(seed, n);
        let d = derivative(&member("gauss").unwrap(), &a, &k, m, 0.0).unwrap();
        let skew = &d - &d.adjoint();
        prop_assert!(skew.max_abs() <= 1e-10 * (1.0 + d.max_abs()));
    }
}
