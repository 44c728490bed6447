//! Gegenbauer (ultraspherical) polynomials, sphere constants and the
//! connection coefficients between monomials and Gegenbauer families.
//!
//! The normalized polynomials `c_n(d, x) = C_n^{((d-1)/2)}(x) / C_n^{((d-1)/2)}(1)`
//! are the workhorse of the crate. They are evaluated by a three-term
//! recurrence on the normalized sequence itself, so no intermediate value
//! ever exceeds the `[-1, 1]` range, and `c_n(d, 1) == 1` holds exactly.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Tolerance within which an argument just outside `[-1, 1]` is clipped
/// back onto the interval.
pub const BOUNDARY_CLIP: f64 = 1e-12;

/// Above this many factors, Pochhammer-type products switch to log-gamma.
const DIRECT_PRODUCT_LIMIT: usize = 30;

/// Clips `x` onto `[-1, 1]` when it is within [`BOUNDARY_CLIP`] of the
/// boundary. Farther out (or NaN) is a domain error.
pub fn clip_unit(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("argument is NaN"));
    }
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + BOUNDARY_CLIP {
        Ok(x.signum())
    } else {
        Err(Error::domain(format!("argument {x} outside [-1, 1]")))
    }
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    if n > DIRECT_PRODUCT_LIMIT && a > 0.0 {
        return ln_pochhammer(a, n).exp();
    }
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// `ln (a)_n` for `a > 0`.
pub fn ln_pochhammer(a: f64, n: usize) -> f64 {
    debug_assert!(a > 0.0);
    if n == 0 {
        return 0.0;
    }
    ln_gamma(a + n as f64) - ln_gamma(a)
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    if n > DIRECT_PRODUCT_LIMIT {
        return (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp();
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unnormalized Gegenbauer polynomial `C_n^{(lambda)}(x)`.
///
/// For `lambda = 0` this is the Chebyshev polynomial `T_n(x)`, the
/// convention under which the generating function
/// `(1 - x r) / (1 - 2 x r + r^2)` replaces `(1 - 2 x r + r^2)^{-lambda}`.
pub fn gegenbauer_eval(lambda: f64, n: usize, x: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda = {lambda} must be finite and >= 0")));
    }
    let x = clip_unit(x)?;
    if lambda == 0.0 {
        return Ok(chebyshev_t(n, x));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * lambda * x;
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * (k + lambda - 1.0) * x * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn chebyshev_t(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for _ in 2..=n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Gegenbauer polynomial `C_n^{(lambda)}(x) / C_n^{(lambda)}(1)`
/// for any `lambda >= 0`; no argument checking.
pub(crate) fn normalized_gegenbauer(lambda: f64, n: usize, x: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * (k + lambda - 1.0) * x * cur - (k - 1.0) * prev) / (k + 2.0 * lambda - 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `c_n(d, x)` without argument checks.
pub(crate) fn ultraspherical(d: usize, n: usize, x: f64) -> f64 {
    normalized_gegenbauer((d as f64 - 1.0) / 2.0, n, x)
}

/// Fills `out[n] = c_n(d, x)` for `n = 0..out.len()` in one recurrence pass.
pub(crate) fn ultraspherical_all(d: usize, x: f64, out: &mut [f64]) {
    let lambda = (d as f64 - 1.0) / 2.0;
    if out.is_empty() {
        return;
    }
    if x == 1.0 {
        out.iter_mut().for_each(|v| *v = 1.0);
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = (2.0 * (kf + lambda - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2])
            / (kf + 2.0 * lambda - 1.0);
    }
}

/// Dimension `N_n(d)` of the space of degree-`n` spherical harmonics on the
/// `d`-sphere, computed exactly in integer arithmetic.
pub fn harmonic_dim(d: usize, n: usize) -> Result<u128> {
    if d < 1 {
        return Err(Error::domain("sphere dimension must be >= 1"));
    }
    if n == 0 {
        return Ok(1);
    }
    if d == 1 {
        return Ok(2);
    }
    // N_n(d) = C(n+d-2, n) (2n+d-1) / (d-1)
    let overflow = || Error::domain(format!("N_{n}({d}) overflows u128"));
    let top = (n + d - 2) as u128;
    let k = (d - 2) as u128;
    let mut binom: u128 = 1;
    for i in 0..k {
        binom = binom.checked_mul(top - i).ok_or_else(overflow)? / (i + 1);
    }
    let scaled = binom.checked_mul((2 * n + d - 1) as u128).ok_or_else(overflow)?;
    Ok(scaled / (d as u128 - 1))
}

/// `N_n(d)` as a float; log-gamma route for large degrees.
pub fn harmonic_dim_f64(d: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if d == 1 {
        return 2.0;
    }
    let tail = (2 * n + d - 1) as f64;
    if n > DIRECT_PRODUCT_LIMIT {
        return (ln_pochhammer(d as f64, n - 1) - ln_factorial(n)).exp() * tail;
    }
    let ratio = (0..n - 1).fold(1.0, |acc, i| acc * (d + i) as f64 / (i + 1) as f64) / n as f64;
    ratio * tail
}

/// Total surface measure `sigma_d` of the unit `d`-sphere; `sigma_0 = 2`.
pub fn sphere_surface(d: usize) -> f64 {
    let half = (d as f64 + 1.0) / 2.0;
    if d > 100 {
        return 2.0 * (half * PI.ln() - ln_gamma(half)).exp();
    }
    2.0 * PI.powf(half) / gamma(half)
}

/// `sigma_d / sigma_{d-1}`, which equals the total mass of the weight
/// `(1 - x^2)^{d/2 - 1}` on `[-1, 1]`.
pub fn sphere_ratio(d: usize) -> f64 {
    match d {
        1 => PI,
        2 => 2.0,
        _ => {
            let d = d as f64;
            (0.5 * PI.ln() + ln_gamma(d / 2.0) - ln_gamma((d + 1.0) / 2.0)).exp()
        }
    }
}

/// `h_{n,d} = sigma_d / (N_n(d) sigma_{d-1})`, the squared norm of
/// `c_n(d, .)` against the weight `(1 - x^2)^{d/2 - 1}`.
pub fn norm_constant(d: usize, n: usize) -> f64 {
    sphere_ratio(d) / harmonic_dim_f64(d, n)
}

/// Normalized ultraspherical polynomials attached to the `d`-sphere, up to
/// a fixed maximal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrasphericalBasis {
    d: usize,
    n_max: usize,
    norm_constants: Vec<f64>,
}

impl UltrasphericalBasis {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("sphere dimension must be >= 1"));
        }
        let norm_constants = (0..=n_max).map(|n| norm_constant(d, n)).collect();
        Ok(Self { d, n_max, norm_constants })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn norm_constants(&self) -> &[f64] {
        &self.norm_constants
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::DegreeOutOfRange { n, n_max: self.n_max });
        }
        Ok(())
    }

    /// `c_n(d, x)`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check_degree(n)?;
        let x = clip_unit(x)?;
        Ok(ultraspherical(self.d, n, x))
    }

    /// `c_0(d, x), ..., c_{n_max}(d, x)`.
    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>> {
        let x = clip_unit(x)?;
        let mut out = vec![0.0; self.n_max + 1];
        ultraspherical_all(self.d, x, &mut out);
        Ok(out)
    }

    /// Derivative in `x` of `c_n(d, x)`, via `d c_n'(d, x) = n (n+d-1) c_{n-1}(d+2, x)`.
    pub fn derivative(&self, n: usize, x: f64) -> Result<f64> {
        self.check_degree(n)?;
        let x = clip_unit(x)?;
        Ok(ultraspherical_derivative_unchecked(self.d, n, x))
    }
}

pub(crate) fn ultraspherical_derivative_unchecked(d: usize, n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (nf, df) = (n as f64, d as f64);
    nf * (nf + df - 1.0) / df * ultraspherical(d + 2, n - 1, x)
}

/// Convenience wrapper: `c_n(d, x)` with full argument checking.
pub fn ultraspherical_eval(basis: &UltrasphericalBasis, n: usize, x: f64) -> Result<f64> {
    basis.eval(n, x)
}

pub fn ultraspherical_derivative(basis: &UltrasphericalBasis, n: usize, x: f64) -> Result<f64> {
    basis.derivative(n, x)
}

/// Coefficients of a degree-`n` polynomial in a family `{P_n, P_{n-2}, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRow {
    pub n: usize,
    /// `(target_degree, value)` for target degrees `n, n-2, n-4, ...`.
    pub coeffs: Vec<(usize, f64)>,
}

impl ConnectionRow {
    pub fn sum(&self) -> f64 {
        self.coeffs.iter().map(|&(_, v)| v).sum()
    }

    /// Value of the coefficient at `target` degree, zero when absent.
    pub fn get(&self, target: usize) -> f64 {
        self.coeffs.iter().find(|&&(m, _)| m == target).map_or(0.0, |&(_, v)| v)
    }

    /// Re-expands the row against a family evaluated by `family(m)`.
    pub fn expand(&self, mut family: impl FnMut(usize) -> f64) -> f64 {
        self.coeffs.iter().map(|&(m, v)| v * family(m)).sum()
    }
}

/// Gegenbauer's connection formula: coefficients of `C_n^{(lambda)}` in the
/// basis `C_{n-2k}^{(mu)}`. Nonnegative whenever `lambda >= mu`.
pub fn gegenbauer_connection(lambda: f64, mu: f64, n: usize) -> Result<ConnectionRow> {
    if !(lambda > 0.0 && mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::domain(format!(
            "connection parameters must be positive, got lambda = {lambda}, mu = {mu}"
        )));
    }
    let coeffs = (0..=n / 2)
        .map(|k| {
            let m = n - 2 * k;
            // (lambda - mu)_k / k!, which may vanish or change sign
            let shifted = (0..k).fold(1.0, |acc, i| acc * (lambda - mu + i as f64) / (i + 1) as f64);
            let ratio = if n > DIRECT_PRODUCT_LIMIT {
                (ln_pochhammer(lambda, n - k) - ln_pochhammer(mu, n - k + 1)).exp()
            } else {
                pochhammer(lambda, n - k) / pochhammer(mu, n - k + 1)
            };
            (m, ratio * shifted * (m as f64 + mu))
        })
        .collect();
    Ok(ConnectionRow { n, coeffs })
}

/// `gamma^{(d)}(n, k)`: coefficient of `c_{n-2k}(d, .)` in the expansion of `x^n`.
pub fn gamma_coefficient(d: usize, n: usize, k: usize) -> f64 {
    debug_assert!(d >= 1 && 2 * k <= n);
    let m = n - 2 * k;
    if d == 1 {
        let n_m = if m == 0 { 1.0 } else { 2.0 };
        let scale = if n > DIRECT_PRODUCT_LIMIT {
            (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) - n as f64 * 2f64.ln()).exp()
        } else {
            binomial(n, k) / 2f64.powi(n as i32)
        };
        return scale * n_m;
    }
    let mu = (d as f64 - 1.0) / 2.0;
    if n > DIRECT_PRODUCT_LIMIT {
        let ln = ln_factorial(n) - ln_factorial(k) - ln_factorial(m) + ln_pochhammer(d as f64 - 1.0, m)
            - n as f64 * 2f64.ln()
            - ln_pochhammer(mu, n - k + 1);
        return ln.exp() * (m as f64 + mu);
    }
    // n! / (k! (n-2k)!) as a running product to stay exact for small n
    let multinomial = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        * (0..k).fold(1.0, |acc, i| acc * (n - k - i) as f64);
    multinomial * pochhammer(d as f64 - 1.0, m) * (m as f64 + mu)
        / (2f64.powi(n as i32) * pochhammer(mu, n - k + 1))
}

/// Expansion `x^n = sum_k gamma^{(d)}(n, k) c_{n-2k}(d, x)`.
pub fn monomial_connection(d: usize, n: usize) -> Result<ConnectionRow> {
    if d < 1 {
        return Err(Error::domain("sphere dimension must be >= 1"));
    }
    let coeffs = (0..=n / 2).map(|k| (n - 2 * k, gamma_coefficient(d, n, k))).collect();
    Ok(ConnectionRow { n, coeffs })
}

/// `|c_n^{(lambda)}(x) - x^n|`; shrinks to zero as `lambda` grows.
pub fn lambda_limit_gap(lambda: f64, n: usize, x: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("lambda = {lambda} must be >= 0")));
    }
    let x = clip_unit(x)?;
    Ok((normalized_gegenbauer(lambda, n, x) - x.powi(n as i32)).abs())
}

/// Power-basis coefficients `a_k` with `c_n(d, x) = sum_k a_k x^k`.
pub(crate) fn ultraspherical_power_coefficients(d: usize, n: usize) -> Vec<f64> {
    let lambda = (d as f64 - 1.0) / 2.0;
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 2..=n {
        let kf = k as f64;
        let a = 2.0 * (kf + lambda - 1.0) / (kf + 2.0 * lambda - 1.0);
        let b = (kf - 1.0) / (kf + 2.0 * lambda - 1.0);
        let mut next = vec![0.0; k + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += a * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= b * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gegenbauer_examples() {
        assert_relative_eq!(gegenbauer_eval(1.0, 2, 1.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_relative_eq!(gegenbauer_eval(0.0, 3, 0.5).unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(gegenbauer_eval(2.5, 1, 0.3).unwrap(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn gegenbauer_domain_errors() {
        assert!(gegenbauer_eval(-0.1, 2, 0.0).is_err());
        assert!(gegenbauer_eval(1.0, 2, 1.1).is_err());
        assert!(gegenbauer_eval(1.0, 2, f64::NAN).is_err());
        // within the clipping band
        assert_eq!(gegenbauer_eval(1.0, 2, 1.0 + 1e-13).unwrap(), 3.0);
    }

    #[test]
    fn gegenbauer_matches_generating_function() {
        // Partial sums of (1 - 2xr + r^2)^{-lambda} = sum C_n r^n at |r| <= 0.5.
        for &lambda in &[0.5, 1.0, 2.5, 4.0] {
            for &x in &[-0.9f64, -0.3, 0.0, 0.4, 0.95] {
                for &r in &[-0.5, 0.25, 0.5] {
                    let exact = (1.0 - 2.0 * x * r + r * r).powf(-lambda);
                    let series: f64 = (0..120)
                        .map(|n| gegenbauer_eval(lambda, n, x).unwrap() * r.powi(n as i32))
                        .sum();
                    assert_relative_eq!(series, exact, max_relative = 1e-12);
                }
            }
        }
        // lambda = 0 branch: (1 - x r) / (1 - 2 x r + r^2)
        for &x in &[-0.7, 0.2, 0.9] {
            let r = 0.5;
            let exact = (1.0 - x * r) / (1.0 - 2.0 * x * r + r * r);
            let series: f64 = (0..120).map(|n| gegenbauer_eval(0.0, n, x).unwrap() * r.powi(n as i32)).sum();
            assert_relative_eq!(series, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn ultraspherical_examples() {
        let b2 = UltrasphericalBasis::new(2, 5).unwrap();
        assert_eq!(b2.eval(5, 1.0).unwrap(), 1.0);
        assert_relative_eq!(b2.eval(2, 0.0).unwrap(), -0.5, epsilon = 1e-15);
        let b7 = UltrasphericalBasis::new(7, 3).unwrap();
        assert_relative_eq!(b7.eval(1, 0.42).unwrap(), 0.42, epsilon = 1e-15);
        assert!(matches!(b7.eval(4, 0.1), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn d1_is_chebyshev() {
        for n in 0..30 {
            for &x in &[-1.0, -0.6, 0.0, 0.33, 0.999] {
                let t = (n as f64 * f64::acos(x)).cos();
                assert_relative_eq!(ultraspherical(1, n, x), t, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn legendre_three_term_oracle() {
        // Independent Legendre recurrence (d = 2).
        let x = 0.37;
        let mut p = vec![1.0, x];
        for n in 2..25 {
            let nf = n as f64;
            p.push(((2.0 * nf - 1.0) * x * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf);
        }
        for (n, &pn) in p.iter().enumerate() {
            assert_relative_eq!(ultraspherical(2, n, x), pn, epsilon = 1e-14);
        }
    }

    #[test]
    fn harmonic_dim_examples() {
        assert_eq!(harmonic_dim(2, 0).unwrap(), 1);
        assert_eq!(harmonic_dim(1, 4).unwrap(), 2);
        assert_eq!(harmonic_dim(2, 2).unwrap(), 5);
        assert_eq!(harmonic_dim(2, 3).unwrap(), 7);
        // N_n(3) = (n+1)^2
        for n in 0..40 {
            assert_eq!(harmonic_dim(3, n).unwrap(), ((n + 1) * (n + 1)) as u128);
        }
        assert!(harmonic_dim(0, 2).is_err());
    }

    #[test]
    fn harmonic_dim_float_agrees_with_integer() {
        for d in 1..10 {
            for n in 0..60 {
                let exact = harmonic_dim(d, n).unwrap() as f64;
                assert_relative_eq!(harmonic_dim_f64(d, n), exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_surface_examples() {
        assert_relative_eq!(sphere_surface(0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(sphere_surface(1), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_surface(2), 4.0 * PI, epsilon = 1e-13);
        for d in 1..30 {
            assert_relative_eq!(sphere_ratio(d), sphere_surface(d) / sphere_surface(d - 1), max_relative = 1e-13);
        }
    }

    #[test]
    fn derivative_examples() {
        let b3 = UltrasphericalBasis::new(3, 2).unwrap();
        assert_relative_eq!(b3.derivative(1, 0.7).unwrap(), 1.0, epsilon = 1e-15);
        let b2 = UltrasphericalBasis::new(2, 2).unwrap();
        assert_relative_eq!(b2.derivative(2, 0.4).unwrap(), 1.2, epsilon = 1e-14);
        let b1 = UltrasphericalBasis::new(1, 3).unwrap();
        assert_relative_eq!(b1.derivative(3, 0.5).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(b1.derivative(0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for d in 1..6 {
            for n in 1..15 {
                let x = 0.31;
                let fd = (ultraspherical(d, n, x + h) - ultraspherical(d, n, x - h)) / (2.0 * h);
                let exact = ultraspherical_derivative_unchecked(d, n, x);
                assert_relative_eq!(exact, fd, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn gegenbauer_connection_examples() {
        let row = gegenbauer_connection(1.0, 0.5, 2).unwrap();
        assert_relative_eq!(row.get(2), 8.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(row.get(0), 1.0 / 3.0, epsilon = 1e-14);

        let row = gegenbauer_connection(1.3, 1.3, 3).unwrap();
        assert_relative_eq!(row.get(3), 1.0, epsilon = 1e-14);
        assert_eq!(row.get(1), 0.0);

        let row = gegenbauer_connection(2.0, 1.0, 1).unwrap();
        assert_eq!(row.coeffs.len(), 1);
        assert_relative_eq!(row.get(1), 2.0, epsilon = 1e-14);

        assert!(gegenbauer_connection(0.0, 1.0, 2).is_err());
        assert!(gegenbauer_connection(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn gegenbauer_connection_reexpands() {
        for &(lambda, mu) in &[(2.0, 0.5), (1.5, 1.0), (0.75, 3.0), (4.0, 0.25)] {
            for n in 0..25 {
                let row = gegenbauer_connection(lambda, mu, n).unwrap();
                if lambda > mu {
                    assert!(row.coeffs.iter().all(|&(_, v)| v >= 0.0));
                }
                for i in 0..=20 {
                    let x = -1.0 + 0.1 * i as f64;
                    let lhs = gegenbauer_eval(lambda, n, x).unwrap();
                    let rhs = row.expand(|m| gegenbauer_eval(mu, m, x).unwrap());
                    assert_relative_eq!(lhs, rhs, epsilon = 1e-10 * (1.0 + lhs.abs()));
                }
            }
        }
    }

    #[test]
    fn monomial_connection_examples() {
        let row = monomial_connection(1, 3).unwrap();
        assert_relative_eq!(row.get(3), 0.25, epsilon = 1e-15);
        assert_relative_eq!(row.get(1), 0.75, epsilon = 1e-15);
        let row = monomial_connection(2, 1).unwrap();
        assert_relative_eq!(row.get(1), 1.0, epsilon = 1e-15);
        let row = monomial_connection(5, 0).unwrap();
        assert_eq!(row.coeffs, vec![(0, 1.0)]);
        assert!(monomial_connection(0, 1).is_err());
    }

    #[test]
    fn monomial_connection_log_route_is_continuous() {
        // rows just above the direct-product limit still sum to one
        for d in 1..8 {
            for n in 28..40 {
                let row = monomial_connection(d, n).unwrap();
                assert_relative_eq!(row.sum(), 1.0, max_relative = 1e-11);
                assert!(row.coeffs.iter().all(|&(_, v)| v >= 0.0));
            }
        }
    }

    #[test]
    fn lambda_gap_examples() {
        assert_eq!(lambda_limit_gap(0.5, 0, 0.3).unwrap(), 0.0);
        assert!(lambda_limit_gap(2.0, 1, 0.7).unwrap() < 1e-15);
        assert!(lambda_limit_gap(50.0, 3, 0.5).unwrap() < lambda_limit_gap(5.0, 3, 0.5).unwrap());
    }

    #[test]
    fn power_coefficients_reproduce_values() {
        for d in 1..6 {
            for n in 0..12 {
                let coeffs = ultraspherical_power_coefficients(d, n);
                for &x in &[-0.8f64, 0.1, 0.65] {
                    let v: f64 = coeffs.iter().enumerate().map(|(k, a)| a * x.powi(k as i32)).sum();
                    assert_relative_eq!(v, ultraspherical(d, n, x), epsilon = 1e-12);
                }
            }
        }
    }
}
