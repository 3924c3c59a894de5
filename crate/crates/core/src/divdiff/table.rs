use super::nodes::NodeMultiset;
use crate::besov::SmoothFunction;
use crate::error::Result;

/// Node groups narrower than this are evaluated from a Taylor expansion
/// about their mean rather than by difference quotients.
pub const TAYLOR_SPREAD: f64 = 0.05;
/// The product formula is used only when every gap exceeds this fraction of the spread.
pub const PRODUCT_GAP_RTOL: f64 = 1e-4;

fn factorial(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

/// Order-m divided difference `[x_0, …, x_m] f`.
///
/// Permutation invariant by construction: nodes are sorted and clustered
/// before any arithmetic.
pub fn divided_difference(f: &SmoothFunction, nodes: &NodeMultiset) -> Result<f64> {
    let m = nodes.order();
    if m == 0 {
        return Ok(f.eval(nodes.canonical()[0]));
    }
    let needed = nodes.max_multiplicity() - 1;
    f.require_order(needed)?;

    let clusters = nodes.clusters();
    if clusters.len() == 1 {
        return Ok(f.deriv(m, clusters[0].0)? / factorial(m));
    }
    if let Some(degree) = f.polynomial_degree() {
        if degree < m {
            return Ok(0.0);
        }
        // the expansion about the mean terminates, so it is exact up to rounding
        if let Some(v) = taylor_divided_difference(f, nodes.canonical()) {
            return Ok(v);
        }
    }
    let spread = nodes.spread();
    if nodes.max_multiplicity() == 1
        && nodes.min_gap() > (PRODUCT_GAP_RTOL * spread).max(TAYLOR_SPREAD)
    {
        return Ok(product_formula(f, nodes.canonical()));
    }
    hermite_table(f, nodes.canonical())
}

/// `Σ_i f(x_i) / Π_{j≠i} (x_i - x_j)` for distinct nodes.
fn product_formula(f: &SmoothFunction, x: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let mut denom = 1.0;
        for (j, &xj) in x.iter().enumerate() {
            if i != j {
                denom *= xi - xj;
            }
        }
        sum += f.eval(xi) / denom;
    }
    sum
}

/// Newton table over sorted nodes; entries whose node range is narrow are fed
/// from derivatives (Hermite entries for exact repeats, Taylor sums otherwise).
fn hermite_table(f: &SmoothFunction, z: &[f64]) -> Result<f64> {
    let m = z.len() - 1;
    // q[i] holds [z_{i-j}, …, z_i] f for the current column j
    let mut q: Vec<f64> = z.iter().map(|&x| f.eval(x)).collect();
    for j in 1..=m {
        for i in (j..=m).rev() {
            let lo = z[i - j];
            let hi = z[i];
            let width = hi - lo;
            q[i] = if width == 0.0 {
                f.deriv(j, lo)? / factorial(j)
            } else if width <= TAYLOR_SPREAD {
                match taylor_divided_difference(f, &z[i - j..=i]) {
                    Some(v) => v,
                    None => (q[i] - q[i - 1]) / width,
                }
            } else {
                (q[i] - q[i - 1]) / width
            };
        }
    }
    Ok(q[m])
}

/// `Σ_{p≥0} f^{(j+p)}(c)/(j+p)! · h_p(y - c)` where `h_p` is the complete
/// homogeneous symmetric polynomial. Returns `None` if the available
/// derivatives run out before the series settles.
pub(crate) fn taylor_divided_difference(f: &SmoothFunction, y: &[f64]) -> Option<f64> {
    let j = y.len() - 1;
    let c = y.iter().sum::<f64>() / y.len() as f64;
    let d: Vec<f64> = y.iter().map(|v| v - c).collect();
    let max_p = f.k_max().saturating_sub(j).min(40);

    // h[k][p] = h_p(d_0..d_k), built column by column in p
    let mut h_prev = vec![1.0; d.len()];
    let mut fact = factorial(j);
    let mut sum = f.deriv_unchecked(j, c) / fact;
    let mut small = 0;
    for p in 1..=max_p {
        let mut h_cur = vec![0.0; d.len()];
        for k in 0..d.len() {
            let below = if k == 0 { 0.0 } else { h_cur[k - 1] };
            h_cur[k] = below + d[k] * h_prev[k];
        }
        fact *= (j + p) as f64;
        let term = f.deriv_unchecked(j + p, c) / fact * h_cur[d.len() - 1];
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            small += 1;
            if small >= 2 {
                return Some(sum);
            }
        } else {
            small = 0;
        }
        h_prev = h_cur;
    }
    if d.iter().all(|&v| v == 0.0) {
        Some(sum)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn dd(f: &SmoothFunction, x: &[f64]) -> f64 {
        divided_difference(f, &NodeMultiset::new(x)).unwrap()
    }

    #[test]
    fn leading_coefficient_of_square() {
        assert!((dd(&SmoothFunction::monomial(2), &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn low_degree_polynomials_vanish() {
        let f = SmoothFunction::monomial(2);
        assert!(dd(&f, &[0.1, -0.7, 1.9, 2.5]).abs() < 1e-14);
        assert!(dd(&f, &[0.1, 0.1, 0.1 + 1e-3, 2.5]).abs() < 1e-12);
    }

    #[test]
    fn confluent_exp() {
        assert!((dd(&SmoothFunction::exp(), &[0.0, 0.0]) - 1.0).abs() < 1e-15);
        let want = 1.0f64.exp() / 6.0;
        assert!((dd(&SmoothFunction::exp(), &[1.0; 4]) - want).abs() < 1e-15);
    }

    #[test]
    fn missing_derivative_names_order() {
        let f = SmoothFunction::gaussian(1.0, 0.0).with_k_max(0);
        match divided_difference(&f, &NodeMultiset::new(&[0.0, 0.0, 1.0])) {
            Err(Error::MissingDerivative { required: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tight_cluster_matches_exact_polynomial_value() {
        // [x_0..x_3] x^5 = h_2(x_0..x_3)
        let f = SmoothFunction::monomial(5);
        let x = [1.0, 1.0 + 1e-6, 1.0 + 2e-6, 1.0 + 3.5e-6];
        let mut h2 = 0.0;
        for a in 0..4 {
            for b in a..4 {
                h2 += x[a] * x[b];
            }
        }
        assert!((dd(&f, &x) - h2).abs() < 1e-12 * h2);
    }

    #[test]
    fn mixed_tight_and_separated_groups() {
        let f = SmoothFunction::rational(1.0, 0.0);
        let x = [0.3, 0.3 + 1e-5, 2.0, 2.0 + 2e-5, -1.0];
        let shifted = [0.3, 0.3 + 1e-5 * 0.999, 2.0, 2.0 + 2e-5, -1.0];
        let a = dd(&f, &x);
        let b = dd(&f, &shifted);
        assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
    }
}
