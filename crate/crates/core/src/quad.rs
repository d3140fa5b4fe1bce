//! Adaptive quadrature: double-exponential rule with interval bisection when
//! the rule's own error estimate misses the target.

const MAX_DEPTH: u32 = 12;

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    recurse(&f, a, b, abs_tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth >= MAX_DEPTH {
        return out.integral;
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_and_oscillatory() {
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-14);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let w = 30.0;
        let v = integrate(|x: f64| (w * x).cos(), 0.0, 1.0, 1e-14);
        assert!((v - (w.sin() / w)).abs() < 1e-13);
    }

    #[test]
    fn kinked_integrand() {
        let v = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-11);
    }
}
