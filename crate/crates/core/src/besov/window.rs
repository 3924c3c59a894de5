/// Smooth dyadic window supported on `[1/2, 2]` with `w(x) + w(x/2) = 1` on `[1, 2]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Window;

pub fn make_window() -> Window {
    Window
}

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn step(x: f64) -> f64 {
    let a = bump(x);
    let b = bump(1.0 - x);
    a / (a + b)
}

impl Window {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.5 || x >= 2.0 {
            0.0
        } else if x <= 1.0 {
            step(2.0 * x - 1.0)
        } else {
            1.0 - step(x - 1.0)
        }
    }

    /// `w(|ξ|/2^n)`, the symmetric dyadic multiplier of piece `n`.
    pub fn multiplier(&self, xi: f64, n: i32) -> f64 {
        self.eval(xi.abs() * 2f64.powi(-n))
    }

    /// `Σ_n w(x/2^n)` over the (at most two) nonzero terms.
    pub fn partition_sum(&self, x: f64) -> f64 {
        assert!(x > 0.0);
        let k = x.log2().floor() as i32;
        (k - 2..=k + 2).map(|n| self.eval(x * 2f64.powi(-n))).sum()
    }
}
