//! Gauss–Jacobi rules for the weight `(1 - x^2)^{d/2 - 1}` on `[-1, 1]`.
//!
//! Nodes come from the eigenvalues of the symmetric Jacobi matrix
//! (Golub–Welsch), polished by a Newton step on the orthonormal recurrence;
//! weights are the Christoffel numbers `1 / sum_k p_k(x_i)^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_functions::sphere_ratio;

/// Largest node count the refinement ladder will try.
pub const LADDER_CAP: usize = 2048;

/// Relative agreement between successive ladder estimates.
pub const LADDER_TOL: f64 = 1e-10;

const QL_MAX_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    d: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// The `q`-point rule for the `d`-sphere weight, exact for polynomials of
    /// degree `<= 2q - 1`.
    pub fn new(d: usize, q: usize) -> Result<Self> {
        if d < 1 || q < 1 {
            return Err(Error::domain(format!("quadrature needs d >= 1 and q >= 1, got d = {d}, q = {q}")));
        }
        let off = jacobi_off_diagonal(d, q + 1);
        let mut diag = vec![0.0; q];
        let mut sub: Vec<f64> = off[..q].to_vec();
        sub[q - 1] = 0.0;
        tridiagonal_eigenvalues(&mut diag, &mut sub)?;
        diag.sort_by(|a, b| a.total_cmp(b));

        let mass = sphere_ratio(d);
        let p0 = mass.sqrt().recip();
        let mut nodes = Vec::with_capacity(q);
        let mut weights = Vec::with_capacity(q);
        for &x0 in &diag {
            let (pq, dpq, _) = orthonormal_at(&off, q, p0, x0);
            let x = if dpq != 0.0 { x0 - pq / dpq } else { x0 };
            let x = if (x - x0).abs() < 1e-8 && x.abs() < 1.0 { x } else { x0 };
            let (_, _, sum_sq) = orthonormal_at(&off, q, p0, x);
            nodes.push(x);
            weights.push(sum_sq.recip());
        }

        // the weight is even: enforce exact mirror symmetry
        for i in 0..q / 2 {
            let j = q - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Ok(Self { d, nodes, weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, mut g: impl FnMut(f64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| g(x) * w).sum()
    }

    pub fn integrate_real(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    pub fn try_integrate(&self, mut g: impl FnMut(f64) -> Result<Complex64>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += g(x)? * w;
        }
        Ok(acc)
    }
}

/// Shorthand for [`QuadratureRule::new`].
pub fn build_rule(d: usize, q: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(d, q)
}

/// Runs `estimate` on rules with `q, 2q, 4q, ...` nodes until two successive
/// estimates agree to [`LADDER_TOL`] relative to their largest entry.
/// Returns the last estimate and the node count that produced it.
pub fn refine<F>(d: usize, q_start: usize, mut estimate: F) -> Result<(Vec<Complex64>, usize)>
where
    F: FnMut(&QuadratureRule) -> Result<Vec<Complex64>>,
{
    let mut q = q_start.clamp(1, LADDER_CAP);
    let mut previous = estimate(&QuadratureRule::new(d, q)?)?;
    while q < LADDER_CAP {
        q = (2 * q).min(LADDER_CAP);
        let current = estimate(&QuadratureRule::new(d, q)?)?;
        let scale = current.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff <= LADDER_TOL * scale.max(f64::MIN_POSITIVE) || diff == 0.0 {
            return Ok((current, q));
        }
        previous = current;
    }
    Err(Error::QuadratureConvergence(format!(
        "estimates still changing at q = {LADDER_CAP} (d = {d})"
    )))
}

/// Off-diagonal entries `b_1, ..., b_len` of the Jacobi matrix for the
/// Gegenbauer weight with `lambda = (d - 1) / 2`; index `k - 1` holds `b_k`.
fn jacobi_off_diagonal(d: usize, len: usize) -> Vec<f64> {
    let lambda = (d as f64 - 1.0) / 2.0;
    (1..=len)
        .map(|k| {
            if d == 1 {
                if k == 1 {
                    std::f64::consts::FRAC_1_SQRT_2
                } else {
                    0.5
                }
            } else {
                let k = k as f64;
                (k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))).sqrt()
            }
        })
        .collect()
}

/// Evaluates the orthonormal polynomials at `x`: returns `p_q(x)`, `p_q'(x)`
/// and `sum_{k < q} p_k(x)^2`.
fn orthonormal_at(off: &[f64], q: usize, p0: f64, x: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, p0);
    let (mut dp_prev, mut dp) = (0.0, 0.0);
    let mut sum_sq = 0.0;
    for k in 0..q {
        sum_sq += p * p;
        let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
        let b_next = off[k];
        let p_next = (x * p - b_prev * p_prev) / b_next;
        let dp_next = (p + x * dp - b_prev * dp_prev) / b_next;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp, sum_sq)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues only.
/// `diag` is overwritten by the eigenvalues, `off[i]` couples rows `i` and
/// `i + 1` (last entry ignored).
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = (diag[m].abs() + diag[m + 1].abs()).max(f64::EPSILON);
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::EigenConvergence(QL_MAX_ITER));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn chebyshev_three_point() {
        let rule = build_rule(1, 3).unwrap();
        let s = 3f64.sqrt() / 2.0;
        for (x, e) in rule.nodes().iter().zip([-s, 0.0, s]) {
            assert_relative_eq!(*x, e, epsilon = 1e-15);
        }
        for w in rule.weights() {
            assert_relative_eq!(*w, PI / 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn one_point_legendre() {
        let rule = build_rule(2, 1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_relative_eq!(rule.weights()[0], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn legendre_nodes_match_known_values() {
        // 2-point Gauss-Legendre: +-1/sqrt(3), weights 1
        let rule = build_rule(2, 2).unwrap();
        assert_relative_eq!(rule.nodes()[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(rule.weights()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn total_mass_and_positivity() {
        for d in 1..10 {
            for q in [1, 2, 5, 16, 33, 100] {
                let rule = build_rule(d, q).unwrap();
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
                assert!(rule.nodes().iter().all(|x| x.abs() < 1.0));
                let total: f64 = rule.weights().iter().sum();
                assert_relative_eq!(total, sphere_ratio(d), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let rule = build_rule(2, 4).unwrap();
        assert_relative_eq!(rule.integrate_real(|_| 1.0), 2.0, max_relative = 1e-14);

        let rule = build_rule(2, 8).unwrap();
        let basis = crate::special_functions::UltrasphericalBasis::new(2, 3).unwrap();
        let v = rule.integrate_real(|x| basis.eval(3, x).unwrap().powi(2));
        assert_relative_eq!(v, 2.0 / 7.0, max_relative = 1e-13);

        for d in [1, 2, 3, 6] {
            let rule = build_rule(d, 7).unwrap();
            assert!(rule.integrate(|x| Complex64::new(x, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn large_rules_build() {
        let rule = build_rule(3, LADDER_CAP).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert_relative_eq!(total, sphere_ratio(3), max_relative = 1e-12);
    }

    #[test]
    fn ladder_converges_for_smooth_integrand() {
        let (v, q) = refine(2, 4, |rule| Ok(vec![rule.integrate(|x| Complex64::new(x.exp(), 0.0))])).unwrap();
        assert_relative_eq!(v[0].re, 1f64.exp() - (-1f64).exp(), max_relative = 1e-13);
        assert!(q <= 32);
    }

    #[test]
    fn ladder_reports_non_convergence() {
        // a jump discontinuity defeats every rule in the ladder
        let err = refine(2, 4, |rule| {
            Ok(vec![rule.integrate(|x| Complex64::new(if x > 0.6 { 1.0 } else { 0.0 }, 0.0))])
        })
        .unwrap_err();
        assert!(matches!(err, Error::QuadratureConvergence(_)));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_rule(0, 3).is_err());
        assert!(build_rule(2, 0).is_err());
    }
}
