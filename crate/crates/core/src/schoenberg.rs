//! Schoenberg coefficient functions of kernels on `S^d x G`.
//!
//! A continuous `f: [-1, 1] x G -> C` is positive definite on `S^d x G`
//! exactly when `f(x, u) = sum_n phi_{n,d}(u) c_n(d, x)` with every
//! `phi_{n,d}` positive definite on `G` and `sum_n phi_{n,d}(e) < inf`.
//! This module extracts the `phi_{n,d}` from a kernel, synthesizes kernels
//! back from them, moves between dimensions `d -> d + 2` and `inf -> d`, and
//! handles the analogous double expansion on `S^d x S^{d'}`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{validate_pd_at, GroupElement, GroupModel, PdFunction, PdValidation};
use crate::kernels::{KernelSpec, SpatialFactor};
use crate::quadrature::{refine, QuadratureRule};
use crate::special_functions::{
    clip_unit, gamma_coefficient, norm_constant, ultraspherical_all, ultraspherical_derivative_unchecked,
    ultraspherical_power_coefficients,
};

/// Identity values below `-INVARIANT_TOL` are reported as diagnostics.
pub const INVARIANT_TOL: f64 = 1e-10;

/// Identity values below `-NONMEMBER_TOL` certify non-membership.
pub const NONMEMBER_TOL: f64 = 1e-8;

/// Grid elements closer than this are the same element.
const GRID_TOL: f64 = 1e-12;

/// Sphere dimension tag: finite `d >= 1`, or the Hilbert sphere, whose
/// expansions are power series in `x`. JSON: an integer or `"infinity"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "DimensionRepr", into = "DimensionRepr")]
pub enum Dimension {
    Finite(usize),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DimensionRepr {
    Finite(usize),
    Symbol(String),
}

impl From<DimensionRepr> for Dimension {
    fn from(r: DimensionRepr) -> Self {
        match r {
            DimensionRepr::Finite(d) => Dimension::Finite(d),
            // anything non-numeric is read as infinity; validate() rejects other strings
            DimensionRepr::Symbol(s) if s.eq_ignore_ascii_case("infinity") || s == "inf" => Dimension::Infinity,
            DimensionRepr::Symbol(_) => Dimension::Finite(0),
        }
    }
}

impl From<Dimension> for DimensionRepr {
    fn from(d: Dimension) -> Self {
        match d {
            Dimension::Finite(d) => DimensionRepr::Finite(d),
            Dimension::Infinity => DimensionRepr::Symbol("infinity".into()),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(d) => write!(f, "{d}"),
            Dimension::Infinity => write!(f, "infinity"),
        }
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(Dimension::Infinity),
            other => match other.parse::<usize>() {
                Ok(d) if d >= 1 => Ok(Dimension::Finite(d)),
                _ => Err(Error::Parse(format!("invalid dimension {s:?}"))),
            },
        }
    }
}

/// Fills `out` with the spatial basis at `x`: `c_n(d, x)` or `x^n`.
pub(crate) fn spatial_basis(dim: Dimension, x: f64, out: &mut [f64]) {
    match dim {
        Dimension::Finite(d) => ultraspherical_all(d, x, out),
        Dimension::Infinity => {
            let mut p = 1.0;
            for v in out.iter_mut() {
                *v = p;
                p *= x;
            }
        }
    }
}

/// Values of a coefficient function on a fixed grid of group elements.
/// There is no interpolation: evaluation off the grid is an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericProfile {
    pub grid: Vec<GroupElement>,
    pub values: Vec<Complex64>,
}

impl NumericProfile {
    pub fn new(model: &GroupModel, grid: Vec<GroupElement>, values: Vec<Complex64>) -> Result<Self> {
        let profile = Self { grid, values };
        profile.validate(model, "$")?;
        Ok(profile)
    }

    pub fn validate(&self, model: &GroupModel, path: &str) -> Result<()> {
        if self.grid.len() != self.values.len() {
            return Err(Error::invalid(path, "grid and values differ in length"));
        }
        for (i, g) in self.grid.iter().enumerate() {
            model.coerce(g).map_err(|e| Error::invalid(&format!("{path}.grid[{i}]"), e.to_string()))?;
        }
        if self.position(model, &model.identity()).is_none() {
            return Err(Error::invalid(path, "grid must contain the identity"));
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid(path, "profile values must be finite"));
        }
        Ok(())
    }

    fn position(&self, model: &GroupModel, u: &GroupElement) -> Option<usize> {
        self.grid.iter().position(|g| model.approx_eq(g, u, GRID_TOL))
    }

    pub fn eval(&self, model: &GroupModel, u: &GroupElement) -> Result<Complex64> {
        self.position(model, u).map(|i| self.values[i]).ok_or_else(|| Error::OffGrid(u.to_string()))
    }

    /// A subset of grid points whose pairwise displacements all lie on the
    /// grid, grown greedily from the identity outward. The positive
    /// definiteness of a sampled function can only be tested on such a set.
    pub fn closed_subset(&self, model: &GroupModel) -> Vec<GroupElement> {
        let mut order: Vec<&GroupElement> = self.grid.iter().collect();
        order.sort_by(|a, b| {
            let ma = model.coerce(a).map(|e| model.magnitude(&e)).unwrap_or(f64::INFINITY);
            let mb = model.coerce(b).map(|e| model.magnitude(&e)).unwrap_or(f64::INFINITY);
            ma.total_cmp(&mb)
        });
        let mut chosen: Vec<GroupElement> = Vec::new();
        for g in order {
            let closed = chosen.iter().all(|p| {
                [model.displacement(p, g), model.displacement(g, p)]
                    .into_iter()
                    .all(|d| d.map(|d| self.position(model, &d).is_some()).unwrap_or(false))
            });
            if closed {
                chosen.push(g.clone());
            }
        }
        chosen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPd {
    pub weight: f64,
    pub function: PdFunction,
}

/// A coefficient function `phi_{n,d}`: either a real linear combination of
/// catalog functions, or sampled values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Parametric { terms: Vec<WeightedPd> },
    Sampled { profile: NumericProfile },
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Parametric { terms: Vec::new() }
    }

    pub fn from_pd(function: PdFunction) -> Self {
        Coefficient::Parametric { terms: vec![WeightedPd { weight: 1.0, function }] }
    }

    pub fn validate(&self, model: &GroupModel, path: &str) -> Result<()> {
        match self {
            Coefficient::Parametric { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    if !t.weight.is_finite() {
                        return Err(Error::invalid(&format!("{path}.terms[{i}].weight"), "weight must be finite"));
                    }
                    t.function.validate(model, &format!("{path}.terms[{i}].function"))?;
                }
                Ok(())
            }
            Coefficient::Sampled { profile } => profile.validate(model, &format!("{path}.profile")),
        }
    }

    pub fn eval(&self, model: &GroupModel, u: &GroupElement) -> Result<Complex64> {
        match self {
            Coefficient::Parametric { terms } => {
                let u = model.coerce(u)?;
                Ok(terms.iter().map(|t| t.function.eval_canonical(model, &u) * t.weight).sum())
            }
            Coefficient::Sampled { profile } => profile.eval(model, u),
        }
    }

    pub fn at_identity(&self, model: &GroupModel) -> Complex64 {
        self.eval(model, &model.identity()).unwrap_or_default()
    }

    pub fn scaled(&self, c: f64) -> Coefficient {
        match self {
            Coefficient::Parametric { terms } => Coefficient::Parametric {
                terms: terms
                    .iter()
                    .map(|t| WeightedPd { weight: t.weight * c, function: t.function.clone() })
                    .collect(),
            },
            Coefficient::Sampled { profile } => Coefficient::Sampled {
                profile: NumericProfile {
                    grid: profile.grid.clone(),
                    values: profile.values.iter().map(|v| v * c).collect(),
                },
            },
        }
    }

    fn sample_on(&self, model: &GroupModel, grid: &[GroupElement]) -> Result<NumericProfile> {
        let values = grid.iter().map(|g| self.eval(model, g)).collect::<Result<_>>()?;
        Ok(NumericProfile { grid: grid.to_vec(), values })
    }

    /// `self + other`. Sampled operands must share their grid; a parametric
    /// operand is sampled on the other's grid.
    pub fn add(&self, other: &Coefficient, model: &GroupModel) -> Result<Coefficient> {
        match (self, other) {
            (Coefficient::Parametric { terms: a }, Coefficient::Parametric { terms: b }) => {
                Ok(Coefficient::Parametric { terms: a.iter().chain(b).cloned().collect() })
            }
            (Coefficient::Sampled { profile: p }, Coefficient::Sampled { profile: q }) => {
                let same_grid = p.grid.len() == q.grid.len()
                    && p.grid.iter().zip(&q.grid).all(|(a, b)| model.approx_eq(a, b, GRID_TOL));
                if !same_grid {
                    return Err(Error::domain("cannot combine sampled coefficients on different grids"));
                }
                Ok(Coefficient::Sampled {
                    profile: NumericProfile {
                        grid: p.grid.clone(),
                        values: p.values.iter().zip(&q.values).map(|(a, b)| a + b).collect(),
                    },
                })
            }
            (param @ Coefficient::Parametric { .. }, Coefficient::Sampled { profile })
            | (Coefficient::Sampled { profile }, param @ Coefficient::Parametric { .. }) => {
                let sampled = param.sample_on(model, &profile.grid)?;
                Ok(Coefficient::Sampled {
                    profile: NumericProfile {
                        grid: profile.grid.clone(),
                        values: sampled.values.iter().zip(&profile.values).map(|(a, b)| a + b).collect(),
                    },
                })
            }
        }
    }

    /// `sum_i w_i c_i` over `(w_i, c_i)`.
    pub fn combination<'a>(
        parts: impl IntoIterator<Item = (f64, &'a Coefficient)>,
        model: &GroupModel,
    ) -> Result<Coefficient> {
        let mut acc = Coefficient::zero();
        for (w, c) in parts {
            if w != 0.0 {
                acc = acc.add(&c.scaled(w), model)?;
            }
        }
        Ok(acc)
    }

    /// Empirical positive definiteness on `G`. Sampled coefficients are
    /// tested on the largest displacement-closed subset of their grid;
    /// parametric ones on `n_points` draws from the model's distribution.
    pub fn validate_pd(&self, model: &GroupModel, n_points: usize, seed: u64) -> Result<PdValidation> {
        match self {
            Coefficient::Parametric { .. } => {
                crate::groups::validate_pd_on_samples(model, |u| self.eval(model, u), n_points, seed)
            }
            Coefficient::Sampled { profile } => {
                let points = profile.closed_subset(model);
                validate_pd_at(model, |u| profile.eval(model, u), &points)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// `phi_n(e) < 0`: the kernel is not positive definite at this dimension
    /// once the value is below `-NONMEMBER_TOL`.
    NegativeIdentity,
    /// `|phi_n(u)| > phi_n(e)` somewhere on the grid.
    ExceedsIdentity,
    /// `phi_n(e)` has a non-negligible imaginary part.
    ComplexIdentity,
}

/// Machine-readable finding attached to an extracted sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub degree: usize,
    pub kind: DiagnosticKind,
    pub value: f64,
    pub tolerance: f64,
}

impl Diagnostic {
    pub fn certifies_nonmembership(&self) -> bool {
        match self.kind {
            DiagnosticKind::NegativeIdentity => self.value < -NONMEMBER_TOL,
            DiagnosticKind::ExceedsIdentity | DiagnosticKind::ComplexIdentity => self.value > NONMEMBER_TOL,
        }
    }
}

/// A finitely truncated Schoenberg sequence `(phi_{n,d})_{n <= n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergSequence {
    pub d: Dimension,
    /// `coefficients[n]` is `phi_{n,d}`.
    pub coefficients: Vec<Coefficient>,
    /// Bound on the truncation error `sum_{n > n_max} phi_{n,d}(e)` when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

/// A synthesized value and the uniform truncation bound that applies to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthesis {
    pub value: Complex64,
    pub tail_bound: Option<f64>,
}

impl SchoenbergSequence {
    pub fn new(d: Dimension, coefficients: Vec<Coefficient>) -> Self {
        Self { d, coefficients, tail_bound: None, diagnostics: Vec::new() }
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn validate(&self, model: &GroupModel, path: &str) -> Result<()> {
        if self.d == Dimension::Finite(0) {
            return Err(Error::invalid(&format!("{path}.d"), "dimension must be >= 1 or \"infinity\""));
        }
        if self.coefficients.is_empty() {
            return Err(Error::invalid(path, "sequence has no coefficients"));
        }
        for (n, c) in self.coefficients.iter().enumerate() {
            c.validate(model, &format!("{path}.coefficients[{n}]"))?;
        }
        Ok(())
    }

    /// `phi_{n,d}(e)` for every retained degree.
    pub fn identity_values(&self, model: &GroupModel) -> Vec<Complex64> {
        self.coefficients.iter().map(|c| c.at_identity(model)).collect()
    }

    /// `sum_{n <= n_max} phi_{n,d}(e)`.
    pub fn tail_mass_at_identity(&self, model: &GroupModel) -> f64 {
        self.identity_values(model).iter().map(|v| v.re).sum()
    }

    /// Recomputes the diagnostics from the coefficients.
    pub fn diagnose(&mut self, model: &GroupModel) {
        let mut out = Vec::new();
        for (n, c) in self.coefficients.iter().enumerate() {
            let at_e = c.at_identity(model);
            if at_e.re < -INVARIANT_TOL {
                out.push(Diagnostic {
                    degree: n,
                    kind: DiagnosticKind::NegativeIdentity,
                    value: at_e.re,
                    tolerance: NONMEMBER_TOL,
                });
            }
            let scale = at_e.re.abs().max(1.0);
            if at_e.im.abs() > INVARIANT_TOL * scale {
                out.push(Diagnostic {
                    degree: n,
                    kind: DiagnosticKind::ComplexIdentity,
                    value: at_e.im.abs(),
                    tolerance: NONMEMBER_TOL,
                });
            }
            if let (Coefficient::Sampled { profile }, true) = (c, at_e.re >= -INVARIANT_TOL) {
                let excess = profile.values.iter().map(|v| v.norm() - at_e.re).fold(f64::NEG_INFINITY, f64::max);
                if excess > INVARIANT_TOL * scale {
                    out.push(Diagnostic {
                        degree: n,
                        kind: DiagnosticKind::ExceedsIdentity,
                        value: excess,
                        tolerance: NONMEMBER_TOL,
                    });
                }
            }
        }
        self.diagnostics = out;
    }

    /// True when some diagnostic certifies that the source kernel is not
    /// positive definite at this dimension.
    pub fn is_nonmember(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::certifies_nonmembership)
    }

    /// `sum_n phi_{n,d}(u) c_n(d, x)` (or `x^n` for the Hilbert sphere).
    pub fn synthesize(&self, model: &GroupModel, x: f64, u: &GroupElement) -> Result<Synthesis> {
        let x = clip_unit(x)?;
        let mut basis = vec![0.0; self.coefficients.len()];
        spatial_basis(self.d, x, &mut basis);
        let mut value = Complex64::new(0.0, 0.0);
        for (c, b) in self.coefficients.iter().zip(&basis) {
            value += c.eval(model, u)? * *b;
        }
        Ok(Synthesis { value, tail_bound: self.tail_bound })
    }

    /// `d/dx` of the truncated expansion, summed term by term.
    pub fn synthesize_derivative(&self, model: &GroupModel, x: f64, u: &GroupElement) -> Result<Complex64> {
        let x = clip_unit(x)?;
        let mut value = Complex64::new(0.0, 0.0);
        for (n, c) in self.coefficients.iter().enumerate().skip(1) {
            let slope = match self.d {
                Dimension::Finite(d) => ultraspherical_derivative_unchecked(d, n, x),
                Dimension::Infinity => n as f64 * x.powi(n as i32 - 1),
            };
            value += c.eval(model, u)? * slope;
        }
        Ok(value)
    }
}

/// Synthesizes `f(x, u)` from a sequence.
pub fn synthesize(seq: &SchoenbergSequence, model: &GroupModel, x: f64, u: &GroupElement) -> Result<Synthesis> {
    seq.synthesize(model, x, u)
}

/// Smallest node count making a degree-`total` integrand exact.
fn exact_nodes(total: usize) -> usize {
    (total + 2) / 2
}

/// Computes `phi_{n,d}(u) = (1 / h_{n,d}) int f(x, u) c_n(d, x) (1-x^2)^{d/2-1} dx`
/// for `n <= n_max` and every `u` in `u_grid`.
///
/// Band-limited kernels use a single Gauss–Jacobi rule that integrates them
/// exactly (`q` defaults to `n_max + 8`, raised if the kernel's degree
/// needs more; an explicit `q` that is too small is rejected). Other
/// kernels go through the doubling ladder of [`refine`].
pub fn extract(
    spec: &KernelSpec,
    model: &GroupModel,
    d: usize,
    n_max: usize,
    u_grid: &[GroupElement],
    q: Option<usize>,
) -> Result<SchoenbergSequence> {
    if d < 1 {
        return Err(Error::domain("sphere dimension must be >= 1"));
    }
    spec.validate(model, "kernel")?;
    let grid: Vec<GroupElement> = u_grid.iter().map(|u| model.coerce(u)).collect::<Result<_>>()?;
    let identity = model.identity();
    if !grid.iter().any(|g| model.approx_eq(g, &identity, GRID_TOL)) {
        return Err(Error::domain("u_grid must contain the identity"));
    }
    let norms: Vec<f64> = (0..=n_max).map(|n| norm_constant(d, n)).collect();

    let estimate = |rule: &QuadratureRule| -> Result<Vec<Complex64>> {
        let nodes = rule.nodes();
        let weights = rule.weights();
        // c_n(d, x_i) * w_i / h_n, shared across the grid
        let mut projector = vec![0.0; nodes.len() * (n_max + 1)];
        let mut basis = vec![0.0; n_max + 1];
        for (i, (&x, &w)) in nodes.iter().zip(weights).enumerate() {
            ultraspherical_all(d, x, &mut basis);
            for n in 0..=n_max {
                projector[n * nodes.len() + i] = basis[n] * w / norms[n];
            }
        }
        let per_u: Vec<Vec<Complex64>> = grid
            .par_iter()
            .map(|u| {
                let values: Vec<Complex64> =
                    nodes.iter().map(|&x| spec.eval_canonical(model, x, u)).collect::<Result<_>>()?;
                Ok((0..=n_max)
                    .map(|n| {
                        let row = &projector[n * nodes.len()..(n + 1) * nodes.len()];
                        row.iter().zip(&values).map(|(p, v)| v * *p).sum()
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(per_u.into_iter().flatten().collect())
    };

    let default_q = n_max + 8;
    let flat = match spec.spatial_degree() {
        Some(p) => {
            let needed = exact_nodes(p + n_max);
            let q = match q {
                Some(q) if q < needed => {
                    return Err(Error::domain(format!(
                        "q = {q} nodes cannot integrate degree {} exactly; need at least {needed}",
                        p + n_max
                    )))
                }
                Some(q) => q,
                None => default_q.max(needed),
            };
            estimate(&QuadratureRule::new(d, q)?)?
        }
        None => refine(d, q.unwrap_or(default_q), estimate)?.0,
    };

    let per_degree = n_max + 1;
    let coefficients: Vec<Coefficient> = (0..=n_max)
        .map(|n| Coefficient::Sampled {
            profile: NumericProfile {
                grid: grid.clone(),
                values: (0..grid.len()).map(|j| flat[j * per_degree + n]).collect(),
            },
        })
        .collect();

    let mut seq = SchoenbergSequence::new(Dimension::Finite(d), coefficients);
    seq.tail_bound = Some(match spec.spatial_degree() {
        Some(p) if p <= n_max => 0.0,
        _ => {
            let total = spec.eval_canonical(model, 1.0, &identity)?.re;
            (total - seq.tail_mass_at_identity(model)).max(0.0)
        }
    });
    seq.diagnose(model);
    Ok(seq)
}

/// `phi_{n,d+2}` from `phi_{n,d}`, for `n <= n_max - 2`.
///
/// `d = 1`: `phi_{0,3} = phi_{0,1} - phi_{2,1} / 2` and
/// `phi_{n,3} = (n+1)/2 (phi_{n,1} - phi_{n+2,1})`. `d >= 2`:
/// `phi_{n,d+2} = (n+d-1)(n+d) / (d(2n+d-1)) phi_{n,d} - (n+1)(n+2) / (d(2n+d+3)) phi_{n+2,d}`.
///
/// The result describes the kernel on `S^{d+2}`; negative identity values
/// in it are reported as non-membership diagnostics.
pub fn step_up(seq: &SchoenbergSequence, model: &GroupModel) -> Result<SchoenbergSequence> {
    let d = match seq.d {
        Dimension::Finite(d) if d >= 1 => d,
        _ => return Err(Error::domain("step_up needs a finite dimension tag")),
    };
    if seq.coefficients.len() < 3 {
        return Err(Error::domain("step_up needs coefficients up to degree >= 2"));
    }
    let n_out = seq.coefficients.len() - 2;
    let df = d as f64;
    let coefficients = (0..n_out)
        .map(|n| {
            let nf = n as f64;
            let (a, b) = if d == 1 {
                if n == 0 {
                    (1.0, 0.5)
                } else {
                    (0.5 * (nf + 1.0), 0.5 * (nf + 1.0))
                }
            } else {
                (
                    (nf + df - 1.0) * (nf + df) / (df * (2.0 * nf + df - 1.0)),
                    (nf + 1.0) * (nf + 2.0) / (df * (2.0 * nf + df + 3.0)),
                )
            };
            Coefficient::combination([(a, &seq.coefficients[n]), (-b, &seq.coefficients[n + 2])], model)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SchoenbergSequence::new(Dimension::Finite(d + 2), coefficients);
    out.diagnose(model);
    Ok(out)
}

/// `phi_{n,d} = sum_j phi_{n+2j} gamma^{(d)}(n+2j, j)` from the power-series
/// coefficients `phi_n` of a kernel on the Hilbert sphere. The sum is cut
/// at the last available coefficient; since every `gamma <= 1`, the input
/// tail bound carries over unchanged.
pub fn project_from_infty(
    power_seq: &SchoenbergSequence,
    model: &GroupModel,
    d_target: usize,
) -> Result<SchoenbergSequence> {
    if power_seq.d != Dimension::Infinity {
        return Err(Error::domain("project_from_infty needs a sequence tagged infinity"));
    }
    if d_target < 1 {
        return Err(Error::domain("target dimension must be >= 1"));
    }
    let len = power_seq.coefficients.len();
    let coefficients = (0..len)
        .map(|n| {
            let parts = (0..)
                .map(|j| n + 2 * j)
                .take_while(|&p| p < len)
                .map(|p| (gamma_coefficient(d_target, p, (p - n) / 2), &power_seq.coefficients[p]));
            Coefficient::combination(parts, model)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SchoenbergSequence::new(Dimension::Finite(d_target), coefficients);
    out.tail_bound = power_seq.tail_bound;
    out.diagnose(model);
    Ok(out)
}

/// `|phi_{n,d}(u) - phi_n(u)|` for a kernel with a known finite power
/// series `sum_n phi_n(u) x^n`; tends to zero as `d` grows.
pub fn infty_limit_gap(spec: &KernelSpec, model: &GroupModel, n: usize, u: &GroupElement, d: usize) -> Result<f64> {
    let power = spec.monomial_expansion(model)?;
    let limit = match power.coefficients.get(n) {
        Some(c) => c.eval(model, u)?,
        None => Complex64::new(0.0, 0.0),
    };
    let n_max = n.max(power.n_max());
    let grid = [model.identity(), model.coerce(u)?];
    let seq = extract(spec, model, d, n_max, &grid, None)?;
    Ok((seq.coefficients[n].eval(model, u)? - limit).norm())
}

/// A spatial kernel on `[-1, 1]^2`, the `x` side living on `S^d` and the
/// `y` side on `S^{d'}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BivariateSpec {
    /// `f(x) g(y)`
    Separable { x: SpatialFactor, y: SpatialFactor },
    Sum { terms: Vec<BivariateSpec> },
    Product { factors: Vec<BivariateSpec> },
    Scale { r: f64, child: Box<BivariateSpec> },
}

impl BivariateSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        match self {
            BivariateSpec::Separable { x, y } => {
                x.validate(&format!("{path}.x"))?;
                y.validate(&format!("{path}.y"))
            }
            BivariateSpec::Sum { terms } | BivariateSpec::Product { factors: terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid(path, "needs at least one child"));
                }
                let key = if matches!(self, BivariateSpec::Sum { .. }) { "terms" } else { "factors" };
                terms.iter().enumerate().try_for_each(|(i, t)| t.validate(&format!("{path}.{key}[{i}]")))
            }
            BivariateSpec::Scale { r, child } => {
                if !(*r >= 0.0 && r.is_finite()) {
                    return Err(Error::invalid(&format!("{path}.r"), format!("scale must be >= 0, got {r}")));
                }
                child.validate(&format!("{path}.child"))
            }
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            BivariateSpec::Separable { x: fx, y: fy } => fx.eval(x) * fy.eval(y),
            BivariateSpec::Sum { terms } => terms.iter().map(|t| t.eval(x, y)).sum(),
            BivariateSpec::Product { factors } => factors.iter().map(|t| t.eval(x, y)).product(),
            BivariateSpec::Scale { r, child } => r * child.eval(x, y),
        }
    }

    /// Polynomial degrees in `(x, y)`, `None` when not band-limited.
    pub fn degrees(&self) -> Option<(usize, usize)> {
        match self {
            BivariateSpec::Separable { x, y } => Some((x.degree()?, y.degree()?)),
            BivariateSpec::Sum { terms } => terms
                .iter()
                .map(|t| t.degrees())
                .try_fold((0, 0), |acc, d| d.map(|(a, b)| (acc.0.max(a), acc.1.max(b)))),
            BivariateSpec::Product { factors } => factors
                .iter()
                .map(|t| t.degrees())
                .try_fold((0, 0), |acc, d| d.map(|(a, b)| (acc.0 + a, acc.1 + b))),
            BivariateSpec::Scale { child, .. } => child.degrees(),
        }
    }
}

/// Double-expansion coefficients on `S^d x S^{d'}`; `coefficients[n][m]`
/// multiplies `c_n(d, x) c_m(d', y)` (or `x^n c_m(d', y)` when `d` is
/// infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSphereCoefficients {
    pub d: Dimension,
    pub d_prime: usize,
    pub coefficients: Vec<Vec<f64>>,
    pub total_mass: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negative_entries: Vec<(usize, usize, f64)>,
}

impl ProductSphereCoefficients {
    pub fn new(d: Dimension, d_prime: usize, coefficients: Vec<Vec<f64>>) -> Self {
        let total_mass = coefficients.iter().flatten().sum();
        let negative_entries = coefficients
            .iter()
            .enumerate()
            .flat_map(|(n, row)| row.iter().enumerate().map(move |(m, &v)| (n, m, v)))
            .filter(|&(_, _, v)| v < -INVARIANT_TOL)
            .collect();
        Self { d, d_prime, coefficients, total_mass, negative_entries }
    }

    /// True when some coefficient is negative beyond [`NONMEMBER_TOL`].
    pub fn is_nonmember(&self) -> bool {
        self.negative_entries.iter().any(|&(_, _, v)| v < -NONMEMBER_TOL)
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.coefficients.get(n).and_then(|row| row.get(m)).copied().unwrap_or(0.0)
    }
}

fn product_sphere_finite(
    f2: &BivariateSpec,
    d: usize,
    d_prime: usize,
    n_max: usize,
    m_max: usize,
    q: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let norms_x: Vec<f64> = (0..=n_max).map(|n| norm_constant(d, n)).collect();
    let norms_y: Vec<f64> = (0..=m_max).map(|m| norm_constant(d_prime, m)).collect();
    let estimate = |q: usize| -> Result<Vec<Complex64>> {
        let rx = QuadratureRule::new(d, q)?;
        let ry = QuadratureRule::new(d_prime, q)?;
        let basis_at = |dim: usize, len: usize, rule: &QuadratureRule| -> Vec<Vec<f64>> {
            rule.nodes()
                .iter()
                .map(|&x| {
                    let mut b = vec![0.0; len];
                    ultraspherical_all(dim, x, &mut b);
                    b
                })
                .collect()
        };
        let bx = basis_at(d, n_max + 1, &rx);
        let by = basis_at(d_prime, m_max + 1, &ry);
        // inner[i][m] = sum_j w'_j f(x_i, y_j) c_m(d', y_j)
        let inner: Vec<Vec<f64>> = rx
            .nodes()
            .par_iter()
            .map(|&x| {
                let mut acc = vec![0.0; m_max + 1];
                for ((&y, &w), b) in ry.nodes().iter().zip(ry.weights()).zip(&by) {
                    let fw = f2.eval(x, y) * w;
                    for (a, c) in acc.iter_mut().zip(b) {
                        *a += fw * c;
                    }
                }
                acc
            })
            .collect();
        let mut out = Vec::with_capacity((n_max + 1) * (m_max + 1));
        for n in 0..=n_max {
            for m in 0..=m_max {
                let s: f64 = rx
                    .weights()
                    .iter()
                    .zip(&bx)
                    .zip(&inner)
                    .map(|((w, b), row)| w * b[n] * row[m])
                    .sum();
                out.push(Complex64::new(s / (norms_x[n] * norms_y[m]), 0.0));
            }
        }
        Ok(out)
    };
    let flat = match f2.degrees() {
        Some((px, py)) => {
            let needed = exact_nodes(px + n_max).max(exact_nodes(py + m_max));
            let q = match q {
                Some(q) if q < needed => {
                    return Err(Error::domain(format!("q = {q} nodes too few for exact integration; need {needed}")))
                }
                Some(q) => q,
                None => (n_max.max(m_max) + 8).max(needed),
            };
            estimate(q)?
        }
        None => refine(d, q.unwrap_or(n_max.max(m_max) + 8), |rule| estimate(rule.len()))?.0,
    };
    Ok((0..=n_max).map(|n| (0..=m_max).map(|m| flat[n * (m_max + 1) + m].re).collect()).collect())
}

/// Coefficients `f_{n,m}` of `f(x, y) = sum f_{n,m} c_n(d, x) c_m(d', y)` by
/// tensor Gauss–Jacobi quadrature. For `d = Infinity` the `x` side is
/// expanded in powers of `x`; this needs `f` polynomial in `x`, and the
/// power coefficients are obtained exactly from a Chebyshev (`d = 1`)
/// extraction. Negative coefficients are reported, not rejected.
pub fn product_sphere_extract(
    f2: &BivariateSpec,
    d: Dimension,
    d_prime: usize,
    n_max: usize,
    m_max: usize,
    q: Option<usize>,
) -> Result<ProductSphereCoefficients> {
    f2.validate("kernel")?;
    if d_prime < 1 || d == Dimension::Finite(0) {
        return Err(Error::domain("sphere dimensions must be >= 1"));
    }
    let coefficients = match d {
        Dimension::Finite(d) => product_sphere_finite(f2, d, d_prime, n_max, m_max, q)?,
        Dimension::Infinity => {
            let px = f2.degrees().ok_or(Error::NotMonomialExpansion)?.0;
            let n_cheb = px.max(n_max);
            let cheb = product_sphere_finite(f2, 1, d_prime, n_cheb, m_max, q)?;
            let mut power = vec![vec![0.0; m_max + 1]; n_max + 1];
            for (n, row) in cheb.iter().enumerate() {
                for (k, a) in ultraspherical_power_coefficients(1, n).into_iter().enumerate() {
                    if k <= n_max && a != 0.0 {
                        for (m, v) in row.iter().enumerate() {
                            power[k][m] += a * v;
                        }
                    }
                }
            }
            power
        }
    };
    Ok(ProductSphereCoefficients::new(d, d_prime, coefficients))
}

/// `sum_{n,m} f_{n,m} c_n(d, x) c_m(d', y)`.
pub fn product_sphere_synthesize(coeffs: &ProductSphereCoefficients, x: f64, y: f64) -> Result<f64> {
    let x = clip_unit(x)?;
    let y = clip_unit(y)?;
    let n_len = coeffs.coefficients.len();
    let m_len = coeffs.coefficients.iter().map(Vec::len).max().unwrap_or(0);
    let mut bx = vec![0.0; n_len];
    let mut by = vec![0.0; m_len];
    spatial_basis(coeffs.d, x, &mut bx);
    ultraspherical_all(coeffs.d_prime, y, &mut by);
    Ok(coeffs
        .coefficients
        .iter()
        .zip(&bx)
        .map(|(row, cx)| cx * row.iter().zip(&by).map(|(v, cy)| v * cy).sum::<f64>())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::PdFunction;
    use crate::kernels::{KernelSpec, SpatialFactor};
    use approx::assert_relative_eq;

    fn real_grid() -> Vec<GroupElement> {
        (-8..=8).map(|i| GroupElement::Real(0.25 * i as f64)).collect()
    }

    fn tensor(spatial: SpatialFactor, temporal: PdFunction) -> KernelSpec {
        KernelSpec::TensorProduct { spatial, temporal }
    }

    const R: GroupModel = GroupModel::RealLine;

    #[test]
    fn extract_linear_tensor() {
        let spec = tensor(SpatialFactor::Monomial { n: 1 }, PdFunction::ExpDecay { a: 1.0 });
        let seq = extract(&spec, &R, 2, 4, &real_grid(), None).unwrap();
        for (n, c) in seq.coefficients.iter().enumerate() {
            for u in real_grid() {
                let v = c.eval(&R, &u).unwrap();
                let expected = if n == 1 { (-R.magnitude(&u)).exp() } else { 0.0 };
                assert!((v.re - expected).abs() < 1e-12, "n = {n}, u = {u}: {v}");
            }
        }
        assert_eq!(seq.tail_bound, Some(0.0));
        assert!(seq.diagnostics.is_empty());
    }

    #[test]
    fn extract_constant() {
        let spec = tensor(SpatialFactor::Monomial { n: 0 }, PdFunction::Constant { r: 1.0 });
        let seq = extract(&spec, &R, 3, 5, &real_grid(), None).unwrap();
        for u in real_grid() {
            assert_relative_eq!(seq.coefficients[0].eval(&R, &u).unwrap().re, 1.0, epsilon = 1e-14);
            for c in &seq.coefficients[1..] {
                assert!(c.eval(&R, &u).unwrap().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn extract_cubic_on_circle() {
        let spec = tensor(SpatialFactor::Monomial { n: 3 }, PdFunction::Constant { r: 1.0 });
        let seq = extract(&spec, &R, 1, 5, &[R.identity()], None).unwrap();
        let phi: Vec<f64> = seq.identity_values(&R).iter().map(|v| v.re).collect();
        let row = crate::special_functions::monomial_connection(1, 3).unwrap();
        assert_relative_eq!(phi[1], 0.75, epsilon = 1e-14);
        assert_relative_eq!(phi[3], 0.25, epsilon = 1e-14);
        assert_relative_eq!(phi[1], row.get(1), epsilon = 1e-14);
        for n in [0, 2, 4, 5] {
            assert!(phi[n].abs() < 1e-14);
        }
    }

    #[test]
    fn extract_requires_identity_and_enough_nodes() {
        let spec = tensor(SpatialFactor::Monomial { n: 6 }, PdFunction::Constant { r: 1.0 });
        assert!(extract(&spec, &R, 2, 4, &[GroupElement::Real(1.0)], None).is_err());
        assert!(extract(&spec, &R, 2, 4, &[R.identity()], Some(3)).is_err());
        assert!(extract(&spec, &R, 2, 4, &[R.identity()], Some(6)).is_ok());
    }

    #[test]
    fn extract_raw_form_converges_and_bounds_tail() {
        let spec = tensor(
            SpatialFactor::RawSpatial { form: crate::kernels::RawSpatial::PoweredExponential { a: 1.0, alpha: 2.0 } },
            PdFunction::Constant { r: 1.0 },
        );
        let seq = extract(&spec, &R, 2, 6, &[R.identity()], None).unwrap();
        let tail = seq.tail_bound.unwrap();
        let mass = seq.tail_mass_at_identity(&R);
        assert_relative_eq!(mass + tail, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn synthesize_examples() {
        let g = PdFunction::Gaussian { a: 0.7 };
        let seq = SchoenbergSequence::new(Dimension::Finite(2), vec![Coefficient::from_pd(PdFunction::Constant { r: 2.5 })]);
        assert_relative_eq!(seq.synthesize(&R, -0.3, &GroupElement::Real(1.0)).unwrap().value.re, 2.5);

        let seq = SchoenbergSequence::new(
            Dimension::Finite(3),
            vec![Coefficient::from_pd(g.clone()), Coefficient::from_pd(g.clone()).scaled(0.5)],
        );
        let u = GroupElement::Real(0.4);
        let at_one = seq.synthesize(&R, 1.0, &u).unwrap().value.re;
        assert_relative_eq!(at_one, 1.5 * g.eval(&R, &u).unwrap().re, epsilon = 1e-15);
        assert_relative_eq!(seq.synthesize(&R, 1.0, &R.identity()).unwrap().value.re, seq.tail_mass_at_identity(&R));
    }

    #[test]
    fn synthesize_off_grid_is_an_error() {
        let spec = tensor(SpatialFactor::Monomial { n: 1 }, PdFunction::ExpDecay { a: 1.0 });
        let seq = extract(&spec, &R, 2, 3, &real_grid(), None).unwrap();
        assert!(matches!(seq.synthesize(&R, 0.1, &GroupElement::Real(0.1)), Err(Error::OffGrid(_))));
    }

    #[test]
    fn step_up_examples() {
        let g = PdFunction::Gaussian { a: 1.0 };
        let seq = SchoenbergSequence::new(
            Dimension::Finite(1),
            vec![Coefficient::zero(), Coefficient::zero(), Coefficient::from_pd(g.clone())],
        );
        let up = step_up(&seq, &R).unwrap();
        assert_eq!(up.d, Dimension::Finite(3));
        assert_eq!(up.coefficients.len(), 1);
        assert_eq!(up.coefficients[0].at_identity(&R).re, -0.5);
        assert!(up.is_nonmember());

        for d in 2..6 {
            let seq = SchoenbergSequence::new(
                Dimension::Finite(d),
                vec![Coefficient::from_pd(g.clone()), Coefficient::zero(), Coefficient::zero()],
            );
            let up = step_up(&seq, &R).unwrap();
            assert_relative_eq!(up.coefficients[0].at_identity(&R).re, 1.0, epsilon = 1e-15);
            assert!(!up.is_nonmember());
        }
    }

    #[test]
    fn step_up_matches_direct_extraction() {
        let g = PdFunction::ExpDecay { a: 0.5 };
        let spec = KernelSpec::Sum {
            terms: vec![
                tensor(SpatialFactor::Monomial { n: 3 }, g.clone()),
                tensor(SpatialFactor::Ultraspherical { d: 6, n: 4 }, PdFunction::Gaussian { a: 2.0 }),
                tensor(SpatialFactor::ScaledShift, PdFunction::Constant { r: 0.3 }),
            ],
        };
        for d in 1..5 {
            let low = extract(&spec, &R, d, 8, &real_grid(), None).unwrap();
            let high = extract(&spec, &R, d + 2, 6, &real_grid(), None).unwrap();
            let up = step_up(&low, &R).unwrap();
            for n in 0..=6 {
                for u in real_grid() {
                    let a = up.coefficients[n].eval(&R, &u).unwrap();
                    let b = high.coefficients[n].eval(&R, &u).unwrap();
                    assert!((a - b).norm() < 1e-10, "d = {d}, n = {n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn project_examples() {
        let g = PdFunction::Gaussian { a: 1.0 };
        let power = SchoenbergSequence::new(
            Dimension::Infinity,
            vec![Coefficient::zero(), Coefficient::zero(), Coefficient::from_pd(g.clone())],
        );
        let p1 = project_from_infty(&power, &R, 1).unwrap();
        assert_relative_eq!(p1.coefficients[0].at_identity(&R).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(p1.coefficients[2].at_identity(&R).re, 0.5, epsilon = 1e-15);
        assert_eq!(p1.coefficients[1].at_identity(&R).re, 0.0);

        let constant = SchoenbergSequence::new(Dimension::Infinity, vec![Coefficient::from_pd(g.clone())]);
        for d in 1..10 {
            let p = project_from_infty(&constant, &R, d).unwrap();
            assert_eq!(p.coefficients[0], Coefficient::from_pd(g.clone()));
        }
        assert!(project_from_infty(&p1, &R, 2).is_err());
    }

    #[test]
    fn project_matches_extraction() {
        let g = PdFunction::Cosine { omega: 1.3.into() };
        let spec = tensor(SpatialFactor::Monomial { n: 2 }, g.clone());
        let power = spec.monomial_expansion(&R).unwrap();
        for d in [1, 2, 3, 5] {
            let projected = project_from_infty(&power, &R, d).unwrap();
            let direct = extract(&spec, &R, d, 2, &real_grid(), None).unwrap();
            for n in 0..=2 {
                for u in real_grid() {
                    let a = projected.coefficients[n].eval(&R, &u).unwrap();
                    let b = direct.coefficients[n].eval(&R, &u).unwrap();
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn limit_gap_examples() {
        let g = PdFunction::ExpDecay { a: 1.0 };
        let u = GroupElement::Real(0.5);
        let constant = tensor(SpatialFactor::Monomial { n: 0 }, g.clone());
        for d in [1, 2, 7] {
            assert!(infty_limit_gap(&constant, &R, 0, &u, d).unwrap() < 1e-14);
        }
        let square = tensor(SpatialFactor::Monomial { n: 2 }, g.clone());
        assert!(infty_limit_gap(&square, &R, 2, &u, 25).unwrap() < infty_limit_gap(&square, &R, 2, &u, 3).unwrap());
        let quartic = tensor(SpatialFactor::Monomial { n: 4 }, g.clone());
        let gaps: Vec<f64> = (1..=25).step_by(2).map(|d| infty_limit_gap(&quartic, &R, 0, &u, d).unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        let raw = KernelSpec::RawForm { form: crate::kernels::RawForm::GneitingExponential { a: 1.0, alpha: 1.0, c: 1.0, beta: 0.5 } };
        assert!(matches!(infty_limit_gap(&raw, &R, 0, &u, 3), Err(Error::NotMonomialExpansion)));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let spec = KernelSpec::Sum {
            terms: vec![
                tensor(SpatialFactor::Ultraspherical { d: 5, n: 5 }, PdFunction::Gaussian { a: 0.3 }),
                tensor(SpatialFactor::Monomial { n: 3 }, PdFunction::ExpDecay { a: 1.0 }),
            ],
        };
        let seq = extract(&spec, &R, 3, 8, &real_grid(), None).unwrap();
        let u = GroupElement::Real(0.75);
        let h = 1e-5;
        for &x in &[-0.8, -0.2, 0.3, 0.9] {
            let exact = seq.synthesize_derivative(&R, x, &u).unwrap().re;
            let fd = (seq.synthesize(&R, x + h, &u).unwrap().value.re - seq.synthesize(&R, x - h, &u).unwrap().value.re)
                / (2.0 * h);
            assert_relative_eq!(exact, fd, max_relative = 1e-6);
        }
    }

    fn monomial(n: usize) -> SpatialFactor {
        SpatialFactor::Monomial { n }
    }

    #[test]
    fn product_sphere_examples() {
        let xy = BivariateSpec::Separable { x: monomial(1), y: monomial(1) };
        let c = product_sphere_extract(&xy, Dimension::Finite(2), 2, 4, 4, None).unwrap();
        for n in 0..=4 {
            for m in 0..=4 {
                let expected = if (n, m) == (1, 1) { 1.0 } else { 0.0 };
                assert!((c.get(n, m) - expected).abs() < 1e-12);
            }
        }

        let one = BivariateSpec::Separable { x: monomial(0), y: monomial(0) };
        let c = product_sphere_extract(&one, Dimension::Finite(3), 5, 3, 3, None).unwrap();
        assert_relative_eq!(c.get(0, 0), 1.0, epsilon = 1e-13);
        assert_relative_eq!(c.total_mass, 1.0, epsilon = 1e-12);

        let sq = BivariateSpec::Separable { x: monomial(2), y: monomial(2) };
        let c = product_sphere_extract(&sq, Dimension::Finite(1), 1, 4, 4, None).unwrap();
        for n in 0..=4 {
            for m in 0..=4 {
                let expected = if n % 2 == 0 && m % 2 == 0 && n <= 2 && m <= 2 { 0.25 } else { 0.0 };
                assert!((c.get(n, m) - expected).abs() < 1e-12, "({n},{m}) = {}", c.get(n, m));
            }
        }
        assert_relative_eq!(product_sphere_synthesize(&c, 1.0, 1.0).unwrap(), c.total_mass, epsilon = 1e-14);
    }

    #[test]
    fn product_sphere_hilbert_side() {
        // f = x^2 (1+y)/2 + 0.5 x c_2(3, y)
        let f = BivariateSpec::Sum {
            terms: vec![
                BivariateSpec::Separable { x: monomial(2), y: SpatialFactor::ScaledShift },
                BivariateSpec::Scale {
                    r: 0.5,
                    child: Box::new(BivariateSpec::Separable { x: monomial(1), y: SpatialFactor::Ultraspherical { d: 3, n: 2 } }),
                },
            ],
        };
        let c = product_sphere_extract(&f, Dimension::Infinity, 3, 3, 3, None).unwrap();
        assert_relative_eq!(c.get(2, 0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(c.get(2, 1), 0.5, epsilon = 1e-12);
        assert_relative_eq!(c.get(1, 2), 0.5, epsilon = 1e-12);
        for &(x, y) in &[(0.3, -0.2), (-0.9, 0.7)] {
            assert_relative_eq!(product_sphere_synthesize(&c, x, y).unwrap(), f.eval(x, y), epsilon = 1e-12);
        }
    }

    #[test]
    fn product_sphere_flags_negative_coefficients() {
        // c_2(1, x) c_0: fine on S^1 but not on S^3
        let f = BivariateSpec::Separable { x: SpatialFactor::Ultraspherical { d: 1, n: 2 }, y: monomial(0) };
        let on_circle = product_sphere_extract(&f, Dimension::Finite(1), 2, 4, 2, None).unwrap();
        assert!(!on_circle.is_nonmember());
        let on_s3 = product_sphere_extract(&f, Dimension::Finite(3), 2, 4, 2, None).unwrap();
        assert!(on_s3.is_nonmember());
    }

    #[test]
    fn closed_subset_of_lattice() {
        let grid: Vec<GroupElement> = (-6..=6).map(|i| GroupElement::Real(0.5 * i as f64)).collect();
        let profile = NumericProfile::new(&R, grid.clone(), vec![Complex64::new(1.0, 0.0); grid.len()]).unwrap();
        let subset = profile.closed_subset(&R);
        assert!(subset.len() >= 7);
        for a in &subset {
            for b in &subset {
                assert!(profile.eval(&R, &R.displacement(a, b).unwrap()).is_ok());
            }
        }
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!("infinity".parse::<Dimension>().unwrap(), Dimension::Infinity);
        assert_eq!("4".parse::<Dimension>().unwrap(), Dimension::Finite(4));
        assert!("0".parse::<Dimension>().is_err());
        assert_eq!(serde_json::to_string(&Dimension::Infinity).unwrap(), "\"infinity\"");
        let d: Dimension = serde_json::from_str("3").unwrap();
        assert_eq!(d, Dimension::Finite(3));
    }
}
