//! One-dimensional quadrature rules shared by the velocity-space integrals.

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights mapped onto `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    if n <= 1 {
        return vec![(mid, b - a)];
    }
    let rule = GaussLegendre::new(n).expect("degree >= 2");
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs
}

/// Composite Gauss-Legendre rule: `panels` equal sub-intervals of `[a, b]`, `n` nodes each.
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * width;
            gauss_legendre(n, lo, lo + width)
        })
        .collect()
}

/// Integrate `f` over `[a, b]` with a composite Gauss-Legendre rule.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    composite_gauss_legendre(n, panels, a, b).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Scalar root of a monotone-bracketed function by bisection.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 4, 1);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn nodes_are_sorted_and_inside() {
        let rule = gauss_legendre(16, 0.0, 1.0);
        assert!(rule.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(rule.iter().all(|&(x, _)| x > 0.0 && x < 1.0));
        let total: f64 = rule.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
