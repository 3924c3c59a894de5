mod common;

use common::random_hermitian;
use num_complex::Complex64;
use proptest::prelude::*;
use shiftlab::besov::{corpus, SmoothFunction};
use shiftlab::matcore::{
    a_t, eigh, matfun, schatten, truncate_spectrum, CMatrix, HermitianOperator, MatrixFile,
    SchattenIndex,
};
use shiftlab::verify::rng::SplitMix64;
use shiftlab::Error;

fn hermitian(seed: u64, n: usize) -> HermitianOperator {
    random_hermitian(&mut SplitMix64::new(seed), n)
}

fn unitarity_defect(u: &CMatrix) -> f64 {
    u.adjoint()
        .matmul(u)
        .max_abs_diff(&CMatrix::identity(u.dim()))
}

#[test]
fn eigh_examples() {
    let d = eigh(&HermitianOperator::from_real_diag(&[1.0, 1.0])).unwrap();
    assert_eq!(d.eigenvalues, vec![1.0, 1.0]);
    assert_eq!(d.vectors, CMatrix::identity(2));

    let x = CMatrix::from_parts(2, &[0.0, 1.0, 1.0, 0.0], None).unwrap();
    let d = eigh(&HermitianOperator::new(x).unwrap()).unwrap();
    assert!((d.eigenvalues[0] + 1.0).abs() < 1e-15 && (d.eigenvalues[1] - 1.0).abs() < 1e-15);

    let a = hermitian(8, 8);
    let d = eigh(&a).unwrap();
    let au = a.matrix().matmul(&d.vectors);
    let ul = d.vectors.matmul(&CMatrix::from_real_diag(&d.eigenvalues));
    assert!(au.max_abs_diff(&ul) <= 1e-10);
}

#[test]
fn hermitian_tolerance() {
    let mut m = CMatrix::from_parts(2, &[1.0, 2.0, 2.0, 3.0], None).unwrap();
    m[(0, 1)] += Complex64::new(1e-13, 0.0);
    let h = HermitianOperator::new(m.clone()).unwrap();
    assert_eq!(h.matrix().max_asymmetry(), 0.0);
    m[(0, 1)] += Complex64::new(1e-6, 0.0);
    assert!(matches!(
        HermitianOperator::new(m),
        Err(Error::NotHermitian { .. })
    ));
    let complex_diag = CMatrix::from_fn(2, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    assert!(HermitianOperator::new(complex_diag).is_err());
}

#[test]
fn functional_calculus_examples() {
    let a = hermitian(3, 5);
    assert!(
        matfun(&SmoothFunction::monomial(1), &a)
            .unwrap()
            .matrix()
            .max_abs_diff(a.matrix())
            < 1e-12
    );
    let e = matfun(
        &SmoothFunction::exp(),
        &HermitianOperator::from_real_diag(&[0.0, 2f64.ln()]),
    )
    .unwrap();
    assert!(
        e.matrix()
            .max_abs_diff(&CMatrix::from_real_diag(&[1.0, 2.0]))
            < 1e-15
    );
    let sq = matfun(&SmoothFunction::monomial(2), &a).unwrap();
    assert!(sq.matrix().max_abs_diff(&a.matrix().matmul(a.matrix())) <= 1e-10);
}

#[test]
fn schatten_and_path_examples() {
    let d = HermitianOperator::from_real_diag(&[3.0, -4.0]);
    assert_eq!(schatten(&d, SchattenIndex::ONE).unwrap(), 7.0);
    assert_eq!(schatten(&d, SchattenIndex::TWO).unwrap(), 5.0);
    assert_eq!(schatten(&d, SchattenIndex::INFINITY).unwrap(), 4.0);

    let a = HermitianOperator::from_real_diag(&[0.0, 1.0]);
    let k = HermitianOperator::from_real_diag(&[1.0, 2.0]);
    assert_eq!(
        a_t(&a, &k, 0.5).unwrap(),
        HermitianOperator::from_real_diag(&[0.5, 2.0])
    );
    assert_eq!(
        a_t(&a, &k, 1.0).unwrap(),
        HermitianOperator::from_real_diag(&[1.0, 3.0])
    );

    let t = truncate_spectrum(&HermitianOperator::from_real_diag(&[-5.0, 1.0, 7.0]), 2.0).unwrap();
    assert!(
        t.matrix()
            .max_abs_diff(&CMatrix::from_real_diag(&[0.0, 1.0, 0.0]))
            < 1e-14
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_is_a_sorted_unitary_decomposition(seed in any::<u64>(), n in 1usize..=8) {
        let a = hermitian(seed, n);
        let d = eigh(&a).unwrap();
        prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(unitarity_defect(&d.vectors) <= 1e-10);
        let au = a.matrix().matmul(&d.vectors);
        let ul = d.vectors.matmul(&CMatrix::from_real_diag(&d.eigenvalues));
        prop_assert!(au.max_abs_diff(&ul) <= 1e-10 * (1.0 + a.matrix().max_abs()));
    }

    #[test]
    fn eigenvector_phase_is_fixed(seed in any::<u64>(), n in 1usize..=6) {
        let d = eigh(&hermitian(seed, n)).unwrap();
        for j in 0..n {
            let col = d.vectors.column(j);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = col.iter().find(|z| z.norm() >= big * (1.0 - 1e-12)).unwrap();
            prop_assert!(lead.re > 0.0 && lead.im.abs() <= 1e-12, "{lead}");
        }
    }

    #[test]
    fn decomposition_is_idempotent(seed in any::<u64>(), n in 1usize..=6) {
        let d = eigh(&hermitian(seed, n)).unwrap();
        let b = HermitianOperator::new(d.reconstruct()).unwrap();
        let e = eigh(&b).unwrap();
        for (x, y) in d.eigenvalues.iter().zip(&e.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        prop_assert!(e.reconstruct().max_abs_diff(b.matrix()) <= 1e-9);
    }

    #[test]
    fn matfun_trace_and_linearity(seed in any::<u64>(), n in 1usize..=6, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let a = hermitian(seed, n);
        let d = eigh(&a).unwrap();
        let fs = corpus(3);
        for f in &fs {
            let want: f64 = d.eigenvalues.iter().map(|&l| f.eval(l)).sum();
            let got = matfun(f, &a).unwrap().trace();
            prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{}", f.label());
        }
        let (f, g) = (&fs[0], &fs[2]);
        let lhs = matfun(&SmoothFunction::linear_combination(alpha, f, beta, g), &a).unwrap();
        let rhs = &matfun(f, &a).unwrap().matrix().scale(alpha) + &matfun(g, &a).unwrap().matrix().scale(beta);
        prop_assert!(lhs.matrix().max_abs_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn hoelder_for_traces(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let k1 = random_hermitian(&mut rng, n);
        let k2 = random_hermitian(&mut rng, n);
        let tr = k1.matrix().matmul(k2.matrix()).trace().norm();
        let bound = schatten(&k1, SchattenIndex::TWO).unwrap() * schatten(&k2, SchattenIndex::TWO).unwrap();
        prop_assert!(tr <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn matrix_file_round_trip_is_bit_exact(
        n in 1usize..=5,
        entries in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 50),
    ) {
        let m = CMatrix::from_fn(n, |i, j| Complex64::new(entries[i * n + j], entries[25 + i * n + j]));
        let back = MatrixFile::parse(&MatrixFile::render(&m)).unwrap();
        for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn truncation_converges_strongly(seed in any::<u64>(), n in 2usize..=6) {
        let a = hermitian(seed, n);
        let u: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 / (i + 1) as f64, 0.25)).collect();
        let au = a.matrix().mat_vec(&u);
        let radius = eigh(&a).unwrap().spectral_radius();
        let mut last = f64::INFINITY;
        for step in 0..=8 {
            let j = radius * step as f64 / 8.0 + 1e-9;
            let aj = truncate_spectrum(&a, j).unwrap();
            let err = aj.matrix().mat_vec(&u).iter().zip(&au).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(err <= last + 1e-12);
            last = err;
        }
        prop_assert!(last < 1e-10);
    }
}
