use serde::{Deserialize, Serialize};

use super::nodes::NodeMultiset;
use crate::besov::SmoothFunction;
use crate::quad::GaussLegendre;

/// Knot intervals longer than this are split into panels before quadrature.
const MAX_PANEL: f64 = 0.5;

/// Unit-integral B-spline `M` on the node multiset, with
/// `[x_0..x_m] f = weight · ∫ f^{(m)}(s) M(s) ds` and `weight = 1/m!`.
/// When all knots coincide the kernel is a unit atom at the common knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeanoKernel {
    knots: Vec<f64>,
    weight: f64,
    is_atom: bool,
}

pub fn peano_kernel(nodes: &NodeMultiset) -> PeanoKernel {
    let m = nodes.order();
    PeanoKernel {
        knots: nodes.canonical().to_vec(),
        weight: 1.0 / (2..=m).map(|i| i as f64).product::<f64>(),
        is_atom: nodes.is_fully_confluent(),
    }
}

impl PeanoKernel {
    /// Indicator-style spline of order 1 on `[a, b]`, or an atom when `a == b`.
    pub fn interval(a: f64, b: f64) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == hi {
            return Self::atom(lo);
        }
        PeanoKernel {
            knots: vec![lo, hi],
            weight: 1.0,
            is_atom: false,
        }
    }

    pub fn atom(at: f64) -> Self {
        PeanoKernel {
            knots: vec![at],
            weight: 1.0,
            is_atom: true,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_atom(&self) -> bool {
        self.is_atom
    }

    /// Spline order (polynomial degree plus one); zero for atoms.
    pub fn order(&self) -> usize {
        if self.is_atom {
            0
        } else {
            self.knots.len() - 1
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Density value `M(s)`; zero for atoms.
    pub fn density(&self, s: f64) -> f64 {
        if self.is_atom {
            return 0.0;
        }
        spline_density(&self.knots, s)
    }

    /// Knots relative to the first one; exact for clustered knots.
    fn local_knots(&self) -> Vec<f64> {
        let t0 = self.knots[0];
        self.knots.iter().map(|t| t - t0).collect()
    }

    /// Mass of the kernel inside `[a, b]`; exact for the piecewise polynomial.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if self.is_atom {
            let x = self.knots[0];
            return if a <= x && x < b { 1.0 } else { 0.0 };
        }
        let t0 = self.knots[0];
        let local = self.local_knots();
        let rule = GaussLegendre::get(self.order() + 2);
        pieces(&local)
            .filter_map(|(lo, hi)| {
                let l = lo.max(a - t0);
                let h = hi.min(b - t0);
                (h > l).then(|| rule.integrate(l, h, |u| spline_density(&local, u)))
            })
            .sum()
    }
}

/// Distinct consecutive knot intervals of positive length.
fn pieces(t: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    t.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1]))
}

/// Unit-integral B-spline on knots `t` by the Curry–Schoenberg recurrence.
fn spline_density(t: &[f64], s: f64) -> f64 {
    let k = t.len() - 1;
    let (lo, hi) = (t[0], t[k]);
    if s < lo || s > hi {
        return 0.0;
    }
    // order-1 seeds; the right end of the support belongs to the last nonempty interval
    let last = (0..k).rev().find(|&i| t[i + 1] > t[i]).unwrap_or(0);
    let mut m: Vec<f64> = (0..k)
        .map(|i| {
            let inside = (t[i] <= s && s < t[i + 1]) || (i == last && s == t[i + 1]);
            if inside && t[i + 1] > t[i] {
                1.0 / (t[i + 1] - t[i])
            } else {
                0.0
            }
        })
        .collect();
    for r in 2..=k {
        for i in 0..=(k - r) {
            let span = t[i + r] - t[i];
            m[i] = if span > 0.0 {
                r as f64 * ((s - t[i]) * m[i] + (t[i + r] - s) * m[i + 1]) / ((r - 1) as f64 * span)
            } else {
                0.0
            };
        }
    }
    m[0]
}

/// `∫ g dM` by Gauss–Legendre per knot interval; atoms evaluate `g` at the knot.
pub fn kernel_integrate(kernel: &PeanoKernel, g: &SmoothFunction) -> f64 {
    integrate_with(kernel, |s| g.eval(s))
}

pub(crate) fn integrate_with<F: Fn(f64) -> f64>(kernel: &PeanoKernel, g: F) -> f64 {
    if kernel.is_atom {
        return g(kernel.knots[0]);
    }
    let t0 = kernel.knots[0];
    let local = kernel.local_knots();
    let rule = GaussLegendre::get((kernel.order() + 2).max(16));
    let mut sum = 0.0;
    for (lo, hi) in pieces(&local) {
        let panels = ((hi - lo) / MAX_PANEL).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            let b = if p + 1 == panels { hi } else { a + h };
            sum += rule.integrate(a, b, |u| spline_density(&local, u) * g(t0 + u));
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(x: &[f64]) -> PeanoKernel {
        peano_kernel(&NodeMultiset::new(x))
    }

    #[test]
    fn two_nodes_give_indicator() {
        let k = kernel(&[1.0, 0.0]);
        assert_eq!(k.density(0.3), 1.0);
        assert_eq!(k.density(1.5), 0.0);
        assert!((kernel_integrate(&k, &SmoothFunction::monomial(0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hat_function() {
        let k = kernel(&[0.0, 1.0, 2.0]);
        assert!((k.density(1.0) - 1.0).abs() < 1e-15);
        assert!((k.density(0.5) - 0.5).abs() < 1e-15);
        assert!((kernel_integrate(&k, &SmoothFunction::monomial(1)) - 1.0).abs() < 1e-14);
        assert!((k.weight() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coincident_nodes_give_atom() {
        let k = kernel(&[0.0, 0.0, 0.0]);
        assert!(k.is_atom());
        assert_eq!(kernel_integrate(&k, &SmoothFunction::exp()), 1.0);
    }

    #[test]
    fn repeated_knot_density_is_nonnegative_and_normalized() {
        let k = kernel(&[0.0, 0.0, 1.0, 3.0, 3.0]);
        for i in 0..=300 {
            assert!(k.density(i as f64 * 0.01) >= 0.0);
        }
        assert!((k.mass_between(-1.0, 4.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mass_between_splits_additively() {
        let k = kernel(&[-1.0, 0.2, 0.5, 2.0]);
        let total = k.mass_between(-1.0, 0.0) + k.mass_between(0.0, 1.3) + k.mass_between(1.3, 2.0);
        assert!((total - 1.0).abs() < 1e-13);
    }
}
