use super::function::SmoothFunction;

/// Deterministic test-function list: Gaussians, bounded rationals, sinusoids,
/// Fejér kernels and the monomials `x^k`, `k ≤ m_max`.
pub fn corpus(m_max: usize) -> Vec<SmoothFunction> {
    let mut out: Vec<SmoothFunction> = NAMED.iter().filter_map(|l| member(l)).collect();
    out.extend((0..=m_max).map(SmoothFunction::monomial));
    out
}

const NAMED: [&str; 8] = [
    "gauss",
    "gauss_shifted",
    "rational",
    "rational_shifted",
    "sin",
    "cos",
    "fejer1",
    "fejer4",
];

/// Looks up a corpus member (or `exp`, `x^k`) by label.
pub fn member(label: &str) -> Option<SmoothFunction> {
    let f = match label {
        "gauss" => SmoothFunction::gaussian(1.0, 0.0),
        "gauss_shifted" => SmoothFunction::gaussian(0.5, 0.7),
        "rational" => SmoothFunction::rational(1.0, 0.0),
        "rational_shifted" => SmoothFunction::rational(0.5, -0.3),
        "sin" => SmoothFunction::sine(1.0, 0.0),
        "cos" => SmoothFunction::cosine(1.0, 0.0),
        "fejer1" => SmoothFunction::fejer(1.0),
        "fejer4" => SmoothFunction::fejer(4.0),
        "exp" => SmoothFunction::exp(),
        _ => {
            let k: usize = label.strip_prefix("x^")?.parse().ok()?;
            return Some(SmoothFunction::monomial(k));
        }
    };
    Some(f.with_label(label))
}

/// Labels accepted by [`member`] besides `x^k`.
pub fn labels() -> Vec<&'static str> {
    let mut l = NAMED.to_vec();
    l.push("exp");
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn has_band_limited_member() {
        assert!(corpus(3).iter().any(|f| f.band_limit().is_some()));
    }

    #[test]
    fn all_members_pass_consistency_gate() {
        for f in corpus(4) {
            f.consistency_check(4).unwrap();
        }
    }

    #[test]
    fn rational_at_zero() {
        assert_eq!(member("rational").unwrap().eval(0.0), 1.0);
    }

    #[test]
    fn monomials_flagged() {
        let c = corpus(2);
        assert_eq!(c.iter().filter(|f| f.is_polynomial()).count(), 3);
        assert_eq!(member("x^3").unwrap().eval(2.0), 8.0);
    }
}
