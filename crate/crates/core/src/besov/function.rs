//! Scalar test functions with exact derivative oracles and Fourier metadata.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Source of exact derivatives `f^{(k)}(x)`.
pub trait Oracle: Send + Sync {
    fn deriv(&self, k: usize, x: f64) -> f64;
}

/// Fourier transform `Ff(ξ) = ∫ f(x) e^{-ixξ} dx`, so that
/// `f(x) = (2π)^{-1} ∫ Ff(ξ) e^{ixξ} dξ`.
#[derive(Clone)]
pub enum Spectrum {
    /// Absolutely integrable transform given pointwise.
    Density(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    /// Finitely many spectral lines: `f(x) = Σ a_k e^{i ω_k x}`.
    Lines(Vec<(f64, Complex64)>),
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Density(_) => write!(f, "Spectrum::Density(..)"),
            Spectrum::Lines(l) => write!(f, "Spectrum::Lines({l:?})"),
        }
    }
}

impl Spectrum {
    fn differentiate(&self, m: usize) -> Spectrum {
        let im = move |xi: f64| Complex64::new(0.0, xi).powu(m as u32);
        match self {
            Spectrum::Density(d) => {
                let d = d.clone();
                Spectrum::Density(Arc::new(move |xi| im(xi) * d(xi)))
            }
            Spectrum::Lines(lines) => {
                Spectrum::Lines(lines.iter().map(|&(w, a)| (w, a * im(w))).collect())
            }
        }
    }

    fn dilate(&self, sigma: f64) -> Spectrum {
        match self {
            Spectrum::Density(d) => {
                let d = d.clone();
                Spectrum::Density(Arc::new(move |xi| d(xi / sigma) / sigma))
            }
            Spectrum::Lines(lines) => {
                Spectrum::Lines(lines.iter().map(|&(w, a)| (w * sigma, a)).collect())
            }
        }
    }
}

/// A real scalar function with derivative oracles up to `k_max`.
#[derive(Clone)]
pub struct SmoothFunction {
    label: String,
    oracle: Arc<dyn Oracle>,
    k_max: usize,
    band_limit: Option<f64>,
    spectrum: Option<Spectrum>,
    /// Positive frequencies where the spectral density is not smooth.
    spectral_kinks: Vec<f64>,
    polynomial_degree: Option<usize>,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("label", &self.label)
            .field("k_max", &self.k_max)
            .field("band_limit", &self.band_limit)
            .field("polynomial_degree", &self.polynomial_degree)
            .finish()
    }
}

fn normalized_kinks(mut kinks: Vec<f64>) -> Vec<f64> {
    kinks.retain(|k| k.is_finite() && *k > 0.0);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    kinks
}

/// Derivative budget attached to the analytic closed-form members.
pub const ANALYTIC_ORDER: usize = 24;

impl SmoothFunction {
    pub fn new(label: impl Into<String>, oracle: Arc<dyn Oracle>, k_max: usize) -> Self {
        Self {
            label: label.into(),
            oracle,
            k_max,
            band_limit: None,
            spectrum: None,
            spectral_kinks: Vec::new(),
            polynomial_degree: None,
        }
    }

    /// Function from a closure `(k, x) -> f^{(k)}(x)`.
    pub fn from_fn<F>(label: impl Into<String>, k_max: usize, f: F) -> Self
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, Arc::new(ClosureOracle(f)), k_max)
    }

    pub fn with_spectrum(mut self, spectrum: Spectrum) -> Self {
        self.spectrum = Some(spectrum);
        self
    }

    /// Records frequencies where the spectral density has a kink, so that
    /// quadrature panels can end there.
    pub fn with_spectral_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.spectral_kinks = normalized_kinks(kinks);
        self
    }

    pub fn spectral_kinks(&self) -> &[f64] {
        &self.spectral_kinks
    }

    pub fn with_band_limit(mut self, sigma: f64) -> Self {
        self.band_limit = Some(sigma);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Caps the advertised derivative order.
    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = self.k_max.min(k_max);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn band_limit(&self) -> Option<f64> {
        self.band_limit
    }

    pub fn spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.as_ref()
    }

    pub fn polynomial_degree(&self) -> Option<usize> {
        self.polynomial_degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial_degree.is_some()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.oracle.deriv(0, x)
    }

    /// `f^{(k)}(x)` without checking the advertised order.
    pub fn deriv_unchecked(&self, k: usize, x: f64) -> f64 {
        self.oracle.deriv(k, x)
    }

    pub fn deriv(&self, k: usize, x: f64) -> Result<f64> {
        self.require_order(k)?;
        Ok(self.oracle.deriv(k, x))
    }

    pub fn require_order(&self, k: usize) -> Result<()> {
        if k > self.k_max {
            Err(Error::MissingDerivative {
                label: self.label.clone(),
                required: k,
                available: self.k_max,
            })
        } else {
            Ok(())
        }
    }

    /// `f^{(m)}` as a function in its own right.
    pub fn derivative(&self, m: usize) -> Result<SmoothFunction> {
        self.require_order(m)?;
        Ok(SmoothFunction {
            label: format!("{}^({m})", self.label),
            oracle: Arc::new(Derived {
                inner: self.oracle.clone(),
                m,
            }),
            k_max: self.k_max - m,
            band_limit: self.band_limit,
            spectrum: self.spectrum.as_ref().map(|s| s.differentiate(m)),
            spectral_kinks: self.spectral_kinks.clone(),
            polynomial_degree: self.polynomial_degree.map(|d| d.saturating_sub(m)),
        })
    }

    /// `x ↦ f(σx)`.
    pub fn dilate(&self, sigma: f64) -> SmoothFunction {
        SmoothFunction {
            label: format!("{}(σ={sigma})", self.label),
            oracle: Arc::new(Dilated {
                inner: self.oracle.clone(),
                sigma,
            }),
            k_max: self.k_max,
            band_limit: self.band_limit.map(|b| b * sigma.abs()),
            spectrum: self.spectrum.as_ref().map(|s| s.dilate(sigma)),
            spectral_kinks: normalized_kinks(
                self.spectral_kinks
                    .iter()
                    .map(|k| k * sigma.abs())
                    .collect(),
            ),
            polynomial_degree: self.polynomial_degree,
        }
    }

    /// `α f + β g`.
    pub fn linear_combination(
        alpha: f64,
        f: &SmoothFunction,
        beta: f64,
        g: &SmoothFunction,
    ) -> SmoothFunction {
        let spectrum = match (&f.spectrum, &g.spectrum) {
            (Some(Spectrum::Density(a)), Some(Spectrum::Density(b))) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Spectrum::Density(Arc::new(move |xi| {
                    a(xi) * alpha + b(xi) * beta
                })))
            }
            (Some(Spectrum::Lines(a)), Some(Spectrum::Lines(b))) => Some(Spectrum::Lines(
                a.iter()
                    .map(|&(w, c)| (w, c * alpha))
                    .chain(b.iter().map(|&(w, c)| (w, c * beta)))
                    .collect(),
            )),
            _ => None,
        };
        let band_limit = match (f.band_limit, g.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let polynomial_degree = match (f.polynomial_degree, g.polynomial_degree) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        SmoothFunction {
            label: format!("{alpha}*{}+{beta}*{}", f.label, g.label),
            oracle: Arc::new(LinearCombination {
                terms: vec![(alpha, f.oracle.clone()), (beta, g.oracle.clone())],
            }),
            k_max: f.k_max.min(g.k_max),
            band_limit,
            spectrum,
            spectral_kinks: normalized_kinks(
                f.spectral_kinks
                    .iter()
                    .chain(&g.spectral_kinks)
                    .copied()
                    .collect(),
            ),
            polynomial_degree,
        }
    }

    /// `exp(-a (x - c)^2)`
    pub fn gaussian(a: f64, c: f64) -> SmoothFunction {
        let spectrum = Spectrum::Density(Arc::new(move |xi: f64| {
            Complex64::from_polar((PI / a).sqrt() * (-xi * xi / (4.0 * a)).exp(), -c * xi)
        }));
        SmoothFunction::new(
            format!("gauss(a={a},c={c})"),
            Arc::new(Gaussian { a, c }),
            ANALYTIC_ORDER,
        )
        .with_spectrum(spectrum)
    }

    /// `1 / ((x - c)^2 + b^2)`
    pub fn rational(b: f64, c: f64) -> SmoothFunction {
        let spectrum = Spectrum::Density(Arc::new(move |xi: f64| {
            Complex64::from_polar(PI / b * (-b * xi.abs()).exp(), -c * xi)
        }));
        SmoothFunction::new(
            format!("rational(b={b},c={c})"),
            Arc::new(Rational { b, c }),
            ANALYTIC_ORDER,
        )
        .with_spectrum(spectrum)
    }

    /// `sin(ωx + φ)`
    pub fn sine(omega: f64, phase: f64) -> SmoothFunction {
        // sin θ = (e^{iθ} - e^{-iθ}) / 2i
        let half_i = Complex64::new(0.0, 2.0);
        let lines = vec![
            (omega, Complex64::from_polar(1.0, phase) / half_i),
            (-omega, -Complex64::from_polar(1.0, -phase) / half_i),
        ];
        SmoothFunction::new(
            format!("sin({omega}x+{phase})"),
            Arc::new(Trig { omega, phase }),
            ANALYTIC_ORDER,
        )
        .with_spectrum(Spectrum::Lines(lines))
        .with_band_limit(omega.abs())
    }

    /// `cos(ωx + φ)`
    pub fn cosine(omega: f64, phase: f64) -> SmoothFunction {
        let lines = vec![
            (omega, Complex64::from_polar(0.5, phase)),
            (-omega, Complex64::from_polar(0.5, -phase)),
        ];
        SmoothFunction::new(
            format!("cos({omega}x+{phase})"),
            Arc::new(Trig {
                omega,
                phase: phase + FRAC_PI_2,
            }),
            ANALYTIC_ORDER,
        )
        .with_spectrum(Spectrum::Lines(lines))
        .with_band_limit(omega.abs())
    }

    /// Fejér kernel `(sin(σx/2) / (σx/2))^2`, band-limited to `[-σ, σ]`.
    pub fn fejer(sigma: f64) -> SmoothFunction {
        let spectrum = Spectrum::Density(Arc::new(move |xi: f64| {
            let v = (1.0 - xi.abs() / sigma).max(0.0);
            Complex64::new(2.0 * PI / sigma * v, 0.0)
        }));
        SmoothFunction::new(
            format!("fejer(σ={sigma})"),
            Arc::new(Fejer { sigma }),
            ANALYTIC_ORDER,
        )
        .with_spectrum(spectrum)
        .with_spectral_kinks(vec![sigma.abs()])
        .with_band_limit(sigma)
    }

    /// `x^k`
    pub fn monomial(k: usize) -> SmoothFunction {
        let mut f = SmoothFunction::new(format!("x^{k}"), Arc::new(Monomial { k }), usize::MAX / 2);
        f.polynomial_degree = Some(k);
        f
    }

    pub fn exp() -> SmoothFunction {
        SmoothFunction::from_fn("exp", usize::MAX / 2, |_, x| x.exp())
    }

    /// Compares each derivative with central differences of the one below it.
    pub fn consistency_check(&self, max_order: usize) -> Result<()> {
        let h = 1e-4;
        let top = self.k_max.min(max_order);
        for k in 1..=top {
            let probes: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64 + 0.123).collect();
            let exact: Vec<f64> = probes.iter().map(|&x| self.deriv_unchecked(k, x)).collect();
            let scale = 1.0 + exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (&x, &e) in probes.iter().zip(&exact) {
                let fd = (self.deriv_unchecked(k - 1, x + h) - self.deriv_unchecked(k - 1, x - h))
                    / (2.0 * h);
                let residual = (fd - e).abs() / scale;
                if !(residual <= 1e-6) {
                    return Err(Error::Verification {
                        what: format!("derivative {k} of `{}` at x={x}", self.label),
                        residual,
                        tolerance: 1e-6,
                    });
                }
            }
        }
        Ok(())
    }
}

struct ClosureOracle<F>(F);

impl<F: Fn(usize, f64) -> f64 + Send + Sync> Oracle for ClosureOracle<F> {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        (self.0)(k, x)
    }
}

struct Derived {
    inner: Arc<dyn Oracle>,
    m: usize,
}

impl Oracle for Derived {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.inner.deriv(k + self.m, x)
    }
}

struct Dilated {
    inner: Arc<dyn Oracle>,
    sigma: f64,
}

impl Oracle for Dilated {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.sigma.powi(k as i32) * self.inner.deriv(k, self.sigma * x)
    }
}

struct LinearCombination {
    terms: Vec<(f64, Arc<dyn Oracle>)>,
}

impl Oracle for LinearCombination {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.terms.iter().map(|(c, o)| c * o.deriv(k, x)).sum()
    }
}

struct Gaussian {
    a: f64,
    c: f64,
}

impl Oracle for Gaussian {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        // d^k/dx^k e^{-u^2} = (-√a)^k H_k(u) e^{-u^2}, u = √a (x - c)
        let s = self.a.sqrt();
        let u = s * (x - self.c);
        let (mut h0, mut h1) = (1.0, 2.0 * u);
        let hk = match k {
            0 => h0,
            _ => {
                for j in 1..k {
                    let h2 = 2.0 * u * h1 - 2.0 * j as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            }
        };
        (-s).powi(k as i32) * hk * (-u * u).exp()
    }
}

struct Rational {
    b: f64,
    c: f64,
}

impl Oracle for Rational {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        // f = Im(1 / (y - ib)) / b
        let z = Complex64::new(x - self.c, -self.b);
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let p = z.inv().powu(k as u32 + 1);
        sign * fact * p.im / self.b
    }
}

struct Trig {
    omega: f64,
    phase: f64,
}

impl Oracle for Trig {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let arg = self.omega * x + self.phase;
        let base = match k % 4 {
            0 => arg.sin(),
            1 => arg.cos(),
            2 => -arg.sin(),
            _ => -arg.cos(),
        };
        self.omega.powi(k as i32) * base
    }
}

struct Fejer {
    sigma: f64,
}

impl Oracle for Fejer {
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.sigma.powi(k as i32) * fejer_profile(k, self.sigma * x)
    }
}

/// k-th derivative of `F(a) = 2 (1 - cos a) / a^2`.
pub(crate) fn fejer_profile(k: usize, a: f64) -> f64 {
    if a.abs() <= 8.0 {
        // F(a) = 2 ∫_0^1 (1 - s) cos(as) ds, expanded in powers of a
        let mut sum = 0.0;
        let mut pow = 1.0; // a^j / j!
        for j in 0..400 {
            if j > 0 {
                pow *= a / j as f64;
            }
            if (k + j).is_multiple_of(2) {
                let sign = if ((k + j) / 2).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                let n = (k + j) as f64;
                sum += sign * pow / ((n + 1.0) * (n + 2.0));
            }
            if j as f64 > a.abs() + 10.0 && pow.abs() < 1e-20 {
                break;
            }
        }
        2.0 * sum
    } else {
        // Leibniz rule on (1 - cos a) · a^{-2}
        let mut sum = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            let g = if j == 0 {
                2.0 * (0.5 * a).sin().powi(2)
            } else {
                -(a + j as f64 * FRAC_PI_2).cos()
            };
            let r = k - j;
            let mut fact = 1.0;
            for i in 2..=r + 1 {
                fact *= i as f64;
            }
            let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
            sum += binom * g * sign * fact * a.powi(-2 - r as i32);
        }
        2.0 * sum
    }
}

struct Monomial {
    k: usize,
}

impl Oracle for Monomial {
    fn deriv(&self, d: usize, x: f64) -> f64 {
        if d > self.k {
            return 0.0;
        }
        let mut coef = 1.0;
        for j in 0..d {
            coef *= (self.k - j) as f64;
        }
        coef * x.powi((self.k - d) as i32)
    }
}
