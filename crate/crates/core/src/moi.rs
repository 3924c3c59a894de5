//! Multiple operator integrals with divided-difference symbols, and the
//! derivatives, finite differences and Taylor remainders built from them.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::besov::SmoothFunction;
use crate::divdiff::{divided_difference, NodeMultiset};
use crate::error::{Error, Result};
use crate::matcore::{
    a_t, eigh, matfun_decomposed, transfer, CMatrix, HermitianOperator, SpectralDecomposition,
};
use crate::par;

pub const MIN_ORDER: usize = 1;
pub const MAX_ORDER: usize = 4;
/// Largest admissible number of multi-index terms.
pub const TERM_BUDGET: u128 = 100_000_000;
/// Relative agreement demanded between the two evaluation paths of an identity.
pub const PATH_AGREEMENT_RTOL: f64 = 1e-9;

fn factorial(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

pub(crate) fn check_order(m: usize) -> Result<()> {
    if (MIN_ORDER..=MAX_ORDER).contains(&m) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange {
            value: m,
            min: MIN_ORDER,
            max: MAX_ORDER,
        })
    }
}

pub(crate) fn check_budget(n: usize, exponent: usize) -> Result<()> {
    let terms = (n as u128).pow(exponent as u32);
    if terms > TERM_BUDGET {
        return Err(Error::Budget {
            terms,
            cap: TERM_BUDGET,
        });
    }
    Ok(())
}

/// Divided differences memoized by the sorted node tuple.
pub(crate) struct DividedDifferenceMemo<'a> {
    f: &'a SmoothFunction,
    cache: HashMap<[u64; MAX_ORDER + 1], f64>,
}

impl<'a> DividedDifferenceMemo<'a> {
    pub(crate) fn new(f: &'a SmoothFunction) -> Self {
        Self {
            f,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, nodes: &[f64]) -> Result<f64> {
        let mut sorted = [0.0; MAX_ORDER + 1];
        let len = nodes.len();
        sorted[..len].copy_from_slice(nodes);
        sorted[..len].sort_by(f64::total_cmp);
        let mut key = [u64::MAX; MAX_ORDER + 1];
        for (k, v) in key.iter_mut().zip(&sorted[..len]) {
            *k = v.to_bits();
        }
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = divided_difference(self.f, &NodeMultiset::new(&sorted[..len]))?;
        self.cache.insert(key, v);
        Ok(v)
    }
}

/// `Σ 𝔇^m f(λ_{i_1}, …, λ_{i_{m+1}}) P_{i_1} K_1 P_{i_2} ⋯ K_m P_{i_{m+1}}` over
/// the eigenprojections of `m + 1` spectral decompositions.
#[derive(Debug, Clone)]
pub struct MoiProblem {
    order: usize,
    f: SmoothFunction,
    measures: Vec<SpectralDecomposition>,
    middles: Vec<CMatrix>,
}

impl MoiProblem {
    pub fn new(
        f: SmoothFunction,
        measures: Vec<SpectralDecomposition>,
        middles: Vec<HermitianOperator>,
    ) -> Result<Self> {
        let order = middles.len();
        check_order(order)?;
        if measures.len() != order + 1 {
            return Err(Error::InvalidInput(format!(
                "{} middle operators need {} spectral measures, got {}",
                order,
                order + 1,
                measures.len()
            )));
        }
        let n = measures[0].dim();
        for d in measures
            .iter()
            .map(|m| m.dim())
            .chain(middles.iter().map(|k| k.dim()))
        {
            if d != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d,
                });
            }
        }
        Ok(Self {
            order,
            f,
            measures,
            middles: middles
                .into_iter()
                .map(HermitianOperator::into_matrix)
                .collect(),
        })
    }

    /// All `m + 1` measures from `a`, all middles `k`.
    pub fn uniform(
        f: SmoothFunction,
        a: &SpectralDecomposition,
        k: &HermitianOperator,
        m: usize,
    ) -> Result<Self> {
        Self::new(f, vec![a.clone(); m + 1], vec![k.clone(); m])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim()
    }
}

/// Evaluates the multiple operator integral; rows of the eigenbasis sum run in
/// parallel, each summed in lexicographic multi-index order.
pub fn moi_eval(problem: &MoiProblem) -> Result<CMatrix> {
    let m = problem.order;
    let n = problem.dim();
    check_budget(n, m + 1)?;
    problem.f.require_order(m)?;
    let transfers: Vec<CMatrix> = (0..m)
        .map(|k| {
            transfer(
                &problem.measures[k],
                &problem.middles[k],
                &problem.measures[k + 1],
            )
        })
        .collect();
    let spectra: Vec<&[f64]> = problem
        .measures
        .iter()
        .map(|d| d.eigenvalues.as_slice())
        .collect();

    let rows = par::map_range(n, |i1| -> Result<Vec<Complex64>> {
        let mut memo = DividedDifferenceMemo::new(&problem.f);
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        let mut idx = vec![0usize; m + 1];
        idx[0] = i1;
        let mut nodes = vec![0.0; m + 1];
        nodes[0] = spectra[0][i1];
        accumulate_row(
            1,
            Complex64::new(1.0, 0.0),
            &mut idx,
            &mut nodes,
            &transfers,
            &spectra,
            &mut memo,
            &mut row,
        )?;
        Ok(row)
    });
    let mut x = CMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let first = &problem.measures[0].vectors;
    let last = &problem.measures[m].vectors;
    Ok(first.matmul(&x).matmul(&last.adjoint()))
}

#[allow(clippy::too_many_arguments)]
fn accumulate_row(
    level: usize,
    partial: Complex64,
    idx: &mut [usize],
    nodes: &mut [f64],
    transfers: &[CMatrix],
    spectra: &[&[f64]],
    memo: &mut DividedDifferenceMemo<'_>,
    row: &mut [Complex64],
) -> Result<()> {
    let m = transfers.len();
    let t = &transfers[level - 1];
    for j in 0..t.dim() {
        let p = partial * t[(idx[level - 1], j)];
        if p == Complex64::new(0.0, 0.0) {
            continue;
        }
        idx[level] = j;
        nodes[level] = spectra[level][j];
        if level == m {
            row[j] += p * memo.get(nodes)?;
        } else {
            accumulate_row(level + 1, p, idx, nodes, transfers, spectra, memo, row)?;
        }
    }
    Ok(())
}

/// Two independent evaluations of the same operator identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComparison {
    /// Multiple-operator-integral form.
    pub moi: CMatrix,
    /// Direct functional-calculus form.
    pub direct: CMatrix,
}

impl PathComparison {
    pub fn max_residual(&self) -> f64 {
        self.moi.max_abs_diff(&self.direct)
    }

    pub fn frobenius_residual(&self) -> f64 {
        self.moi.frobenius_diff(&self.direct)
    }

    /// `1 + ‖direct‖_max`
    pub fn scale(&self) -> f64 {
        1.0 + self.direct.max_abs()
    }

    fn assert_agree(self, what: &str) -> Result<Self> {
        let residual = self.max_residual() / self.scale();
        if residual <= PATH_AGREEMENT_RTOL {
            Ok(self)
        } else {
            Err(Error::Verification {
                what: what.to_string(),
                residual,
                tolerance: PATH_AGREEMENT_RTOL,
            })
        }
    }
}

fn function_of(f: &SmoothFunction, d: &SpectralDecomposition) -> Result<CMatrix> {
    Ok(matfun_decomposed(f, d)?.into_matrix())
}

pub fn perturbation_difference_paths(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
) -> Result<PathComparison> {
    let b = a.add_scaled(k, 1.0)?;
    let (ea, eb) = (eigh(a)?, eigh(&b)?);
    let moi = moi_eval(&MoiProblem::new(
        f.clone(),
        vec![eb.clone(), ea.clone()],
        vec![k.clone()],
    )?)?;
    let direct = &function_of(f, &eb)? - &function_of(f, &ea)?;
    Ok(PathComparison { moi, direct })
}

/// `f(A + K) - f(A)` in its first-order integral form, checked against the direct difference.
pub fn perturbation_difference(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
) -> Result<CMatrix> {
    Ok(perturbation_difference_paths(f, a, k)?
        .assert_agree("perturbation difference")?
        .moi)
}

/// `d^m/dt^m f(A + tK)` at `t = s`.
pub fn derivative(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    s: f64,
) -> Result<CMatrix> {
    check_order(m)?;
    let d = eigh(&a_t(a, k, s)?)?;
    derivative_decomposed(f, &d, k, m)
}

pub(crate) fn derivative_decomposed(
    f: &SmoothFunction,
    d: &SpectralDecomposition,
    k: &HermitianOperator,
    m: usize,
) -> Result<CMatrix> {
    Ok(moi_eval(&MoiProblem::uniform(f.clone(), d, k, m)?)?.scale(factorial(m)))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn finite_difference_paths(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
) -> Result<PathComparison> {
    check_order(m)?;
    let measures = (0..=m)
        .map(|j| eigh(&a.add_scaled(k, j as f64)?))
        .collect::<Result<Vec<_>>>()?;
    let n = a.dim();
    let mut direct = CMatrix::zeros(n);
    for (j, d) in measures.iter().enumerate() {
        let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        direct = &direct + &function_of(f, d)?.scale(sign * binomial(m, j));
    }
    let moi =
        moi_eval(&MoiProblem::new(f.clone(), measures, vec![k.clone(); m])?)?.scale(factorial(m));
    Ok(PathComparison { moi, direct })
}

/// `Δ^m_K f(A) = Σ_j (-1)^{m-j} C(m, j) f(A + jK)`, checked against the staggered integral.
pub fn finite_difference(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
) -> Result<CMatrix> {
    Ok(finite_difference_paths(f, a, k, m)?
        .assert_agree("finite difference")?
        .direct)
}

pub fn taylor_remainder_paths(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
) -> Result<PathComparison> {
    check_order(m)?;
    let ea = eigh(a)?;
    let eb = eigh(&a.add_scaled(k, 1.0)?)?;
    let mut measures = vec![eb.clone()];
    measures.extend(std::iter::repeat_n(ea.clone(), m));
    let moi = moi_eval(&MoiProblem::new(f.clone(), measures, vec![k.clone(); m])?)?;

    let mut direct = &function_of(f, &eb)? - &function_of(f, &ea)?;
    for j in 1..m {
        direct = &direct - &derivative_decomposed(f, &ea, k, j)?.scale(1.0 / factorial(j));
    }
    Ok(PathComparison { moi, direct })
}

/// `f(A + K) - Σ_{k<m} (1/k!) d^k/dt^k f(A + tK)|_0`, in integral form, checked against the direct sum.
pub fn taylor_remainder(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
) -> Result<CMatrix> {
    Ok(taylor_remainder_paths(f, a, k, m)?
        .assert_agree("Taylor remainder")?
        .moi)
}

/// Calls `visit(indices, product)` for every cyclic multi-index `(i_1, …, i_m)`
/// with a nonzero product `K̃_{i_1 i_2} ⋯ K̃_{i_m i_1}`, in lexicographic order.
pub(crate) fn for_each_cycle<F>(kt: &CMatrix, m: usize, first: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize], Complex64) -> Result<()>,
{
    fn walk<F>(
        kt: &CMatrix,
        m: usize,
        level: usize,
        partial: Complex64,
        idx: &mut [usize],
        visit: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[usize], Complex64) -> Result<()>,
    {
        if level == m {
            let p = partial * kt[(idx[m - 1], idx[0])];
            if p != Complex64::new(0.0, 0.0) {
                visit(idx, p)?;
            }
            return Ok(());
        }
        for j in 0..kt.dim() {
            let p = partial * kt[(idx[level - 1], j)];
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            idx[level] = j;
            walk(kt, m, level + 1, p, idx, visit)?;
        }
        Ok(())
    }
    let mut idx = vec![0; m];
    idx[0] = first;
    walk(kt, m, 1, Complex64::new(1.0, 0.0), &mut idx, &mut visit)
}

/// `trace d^m/dt^m f(A + tK)` at `t = s`, contracted in the eigenbasis of `A_s`.
pub fn trace_derivative(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    s: f64,
) -> Result<f64> {
    check_order(m)?;
    let d = eigh(&a_t(a, k, s)?)?;
    trace_derivative_decomposed(f, &d, k, m)
}

pub(crate) fn trace_derivative_decomposed(
    f: &SmoothFunction,
    d: &SpectralDecomposition,
    k: &HermitianOperator,
    m: usize,
) -> Result<f64> {
    let n = d.dim();
    check_budget(n, m)?;
    f.require_order(m)?;
    let kt = d.to_eigenbasis(k.matrix());
    let lambda = &d.eigenvalues;
    let rows = par::map_range(n, |i1| -> Result<f64> {
        let mut memo = DividedDifferenceMemo::new(f);
        let mut nodes = vec![0.0; m + 1];
        let mut acc = 0.0;
        for_each_cycle(&kt, m, i1, |idx, p| {
            for (slot, &i) in nodes.iter_mut().zip(idx) {
                *slot = lambda[i];
            }
            nodes[m] = lambda[idx[0]];
            acc += p.re * memo.get(&nodes)?;
            Ok(())
        })?;
        Ok(acc)
    });
    let rows = rows.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(factorial(m) * par::pairwise_sum(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::matfun;
    use crate::verify::rng::SplitMix64;

    fn random_hermitian(rng: &mut SplitMix64, n: usize) -> HermitianOperator {
        let mut m = CMatrix::from_fn(n, |_, _| Complex64::new(rng.normal(), rng.normal()));
        m = &m + &m.adjoint();
        HermitianOperator::new(m.scale(0.5)).unwrap()
    }

    #[test]
    fn polynomial_below_order_gives_zero() {
        let mut rng = SplitMix64::new(3);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let d = eigh(&a).unwrap();
        let x = moi_eval(&MoiProblem::uniform(SmoothFunction::monomial(1), &d, &k, 2).unwrap())
            .unwrap();
        assert!(x.max_abs() < 1e-12);
    }

    #[test]
    fn monomial_of_matching_degree_gives_power() {
        let mut rng = SplitMix64::new(4);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let d = eigh(&a).unwrap();
        let x = moi_eval(&MoiProblem::uniform(SmoothFunction::monomial(3), &d, &k, 3).unwrap())
            .unwrap();
        let km = k.matrix().matmul(k.matrix()).matmul(k.matrix());
        assert!(x.max_abs_diff(&km) < 1e-10 * (1.0 + km.max_abs()));
    }

    #[test]
    fn first_order_square_is_anticommutator() {
        let mut rng = SplitMix64::new(5);
        let (a, k) = (random_hermitian(&mut rng, 5), random_hermitian(&mut rng, 5));
        let got = derivative(&SmoothFunction::monomial(2), &a, &k, 1, 0.0).unwrap();
        let want = &a.matrix().matmul(k.matrix()) + &k.matrix().matmul(a.matrix());
        assert!(got.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn scalar_exponential_derivative() {
        let a = HermitianOperator::zeros(1);
        let c = 0.7;
        let k = HermitianOperator::from_real_diag(&[c]);
        let s = 0.4;
        let got = derivative(&SmoothFunction::exp(), &a, &k, 1, s).unwrap();
        assert!((got[(0, 0)].re - c * (s * c).exp()).abs() < 1e-14);
    }

    #[test]
    fn order_outside_range_rejected() {
        let a = HermitianOperator::zeros(2);
        assert!(matches!(
            derivative(&SmoothFunction::exp(), &a, &a, 5, 0.0),
            Err(Error::OrderOutOfRange { value: 5, .. })
        ));
    }

    #[test]
    fn budget_enforced() {
        assert!(check_budget(100, 4).is_ok());
        assert!(matches!(check_budget(101, 4), Err(Error::Budget { .. })));
    }

    #[test]
    fn perturbation_difference_cases() {
        let mut rng = SplitMix64::new(6);
        let (a, k) = (random_hermitian(&mut rng, 6), random_hermitian(&mut rng, 6));
        let zero = HermitianOperator::zeros(6);
        let g = SmoothFunction::gaussian(1.0, 0.0);
        assert!(perturbation_difference(&g, &a, &zero).unwrap().max_abs() < 1e-14);
        let id = perturbation_difference(&SmoothFunction::monomial(1), &a, &k).unwrap();
        assert!(id.max_abs_diff(k.matrix()) < 1e-12);
        let p = perturbation_difference_paths(&g, &a, &k).unwrap();
        assert!(p.max_residual() <= 1e-9 * p.scale());
    }

    #[test]
    fn finite_difference_identity() {
        let mut rng = SplitMix64::new(7);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let g = SmoothFunction::gaussian(1.0, 0.0);
        let p = finite_difference_paths(&g, &a, &k, 2).unwrap();
        assert!(p.max_residual() <= 1e-9 * p.scale(), "{}", p.max_residual());
        let one = finite_difference(&g, &a, &k, 1).unwrap();
        let direct = &matfun(&g, &a.add_scaled(&k, 1.0).unwrap())
            .unwrap()
            .into_matrix()
            - &matfun(&g, &a).unwrap().into_matrix();
        assert!(one.max_abs_diff(&direct) < 1e-14);
        assert!(
            finite_difference(&SmoothFunction::monomial(1), &a, &k, 2)
                .unwrap()
                .max_abs()
                < 1e-10
        );
    }

    #[test]
    fn taylor_remainder_cases() {
        let mut rng = SplitMix64::new(8);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let r = SmoothFunction::rational(1.0, 0.0);
        for m in 1..=3 {
            let p = taylor_remainder_paths(&r, &a, &k, m).unwrap();
            assert!(
                p.frobenius_residual() <= 1e-9 * (1.0 + p.direct.frobenius()),
                "m={m}"
            );
        }
        assert!(
            taylor_remainder(&SmoothFunction::monomial(2), &a, &k, 3)
                .unwrap()
                .max_abs()
                < 1e-10
        );
        assert!(
            taylor_remainder(&r, &a, &HermitianOperator::zeros(4), 2)
                .unwrap()
                .max_abs()
                == 0.0
        );
    }

    #[test]
    fn trace_derivative_matches_trace_of_derivative() {
        let mut rng = SplitMix64::new(9);
        let (a, k) = (random_hermitian(&mut rng, 5), random_hermitian(&mut rng, 5));
        let g = SmoothFunction::gaussian(0.5, 0.7);
        for m in 1..=3 {
            let full = derivative(&g, &a, &k, m, 0.3).unwrap().trace().re;
            let tr = trace_derivative(&g, &a, &k, m, 0.3).unwrap();
            assert!(
                (full - tr).abs() <= 1e-10 * (1.0 + full.abs()),
                "m={m}: {full} vs {tr}"
            );
        }
    }

    #[test]
    fn trace_derivative_of_monomial() {
        let mut rng = SplitMix64::new(10);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let k2 = k.matrix().matmul(k.matrix());
        let got = trace_derivative(&SmoothFunction::monomial(2), &a, &k, 2, 0.0).unwrap();
        assert!((got - 2.0 * k2.trace().re).abs() < 1e-10);
    }

    #[test]
    fn trace_derivative_off_diagonal_perturbation_vanishes() {
        let a = HermitianOperator::from_real_diag(&[0.0, 1.0]);
        let k =
            HermitianOperator::new(CMatrix::from_parts(2, &[0.0, 1.0, 1.0, 0.0], None).unwrap())
                .unwrap();
        assert!(
            trace_derivative(&SmoothFunction::exp(), &a, &k, 1, 0.0)
                .unwrap()
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn commuting_trace_derivative() {
        let alpha = [0.3, -1.0, 2.0];
        let lam = [0.5, 1.5, -0.7];
        let a = HermitianOperator::from_real_diag(&alpha);
        let k = HermitianOperator::from_real_diag(&lam);
        let g = SmoothFunction::gaussian(1.0, 0.0);
        let s = 0.25;
        for m in 1..=3 {
            let want: f64 = (0..3)
                .map(|j| lam[j].powi(m as i32) * g.deriv(m, alpha[j] + s * lam[j]).unwrap())
                .sum();
            let got = trace_derivative(&g, &a, &k, m, s).unwrap();
            assert!((got - want).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn telescoping_between_orders() {
        let mut rng = SplitMix64::new(12);
        for _ in 0..3 {
            let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
            let f = SmoothFunction::gaussian(1.0, 0.0);
            let ea = eigh(&a).unwrap();
            let eb = eigh(&a.add_scaled(&k, 1.0).unwrap()).unwrap();
            for m in 2..=3 {
                let mixed = |order: usize| {
                    let mut ms = vec![eb.clone()];
                    ms.extend(std::iter::repeat_n(ea.clone(), order));
                    moi_eval(&MoiProblem::new(f.clone(), ms, vec![k.clone(); order]).unwrap())
                        .unwrap()
                };
                let lower = &mixed(m - 1)
                    - &moi_eval(&MoiProblem::uniform(f.clone(), &ea, &k, m - 1).unwrap()).unwrap();
                let upper = mixed(m);
                assert!(lower.max_abs_diff(&upper) <= 1e-9 * (1.0 + upper.max_abs()));
            }
        }
    }

    #[test]
    fn homogeneity_in_perturbation() {
        let mut rng = SplitMix64::new(13);
        let (a, k) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let f = SmoothFunction::rational(1.0, 0.0);
        for m in 1..=3 {
            let base = derivative(&f, &a, &k, m, 0.0).unwrap();
            for c in [2.0, 1.0 / 3.0] {
                let scaled = derivative(&f, &a, &k.scale(c), m, 0.0).unwrap();
                let want = base.scale(f64::powi(c, m as i32));
                assert!(
                    scaled.max_abs_diff(&want) <= 1e-12 * (1.0 + want.max_abs()),
                    "m={m} c={c}"
                );
            }
        }
    }
}
