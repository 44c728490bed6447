//! Kernel expressions `f(x, u)` on `[-1, 1] x G` and their Gram matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel, PdFunction};
use crate::schoenberg::{Coefficient, Dimension, SchoenbergSequence};
use crate::special_functions::{clip_unit, ultraspherical, ultraspherical_power_coefficients};

/// Points must have unit norm to this tolerance before renormalization.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Non-polynomial spatial profiles, in terms of the geodesic distance
/// `theta = arccos(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RawSpatial {
    /// `exp(-a theta^alpha)`, `0 < alpha <= 2`
    PoweredExponential { a: f64, alpha: f64 },
}

impl RawSpatial {
    fn validate(&self, path: &str) -> Result<()> {
        match *self {
            RawSpatial::PoweredExponential { a, alpha } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::invalid(&format!("{path}.a"), format!("a must be positive, got {a}")));
                }
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::invalid(&format!("{path}.alpha"), format!("alpha must lie in (0, 2], got {alpha}")));
                }
                Ok(())
            }
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            RawSpatial::PoweredExponential { a, alpha } => (-a * x.acos().powf(alpha)).exp(),
        }
    }
}

/// Functions of `x` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialFactor {
    /// `c_n(d, x)`, normalized so that `c_n(d, 1) = 1`. The factor keeps its
    /// own `d`, independent of the sphere it is evaluated on.
    Ultraspherical { d: usize, n: usize },
    /// `x^n`
    Monomial { n: usize },
    /// `(1 + x) / 2`
    ScaledShift,
    RawSpatial { form: RawSpatial },
}

impl SpatialFactor {
    pub fn validate(&self, path: &str) -> Result<()> {
        match self {
            SpatialFactor::Ultraspherical { d, .. } if *d < 1 => {
                Err(Error::invalid(&format!("{path}.d"), "dimension must be >= 1"))
            }
            SpatialFactor::RawSpatial { form } => form.validate(&format!("{path}.form")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SpatialFactor::Ultraspherical { d, n } => ultraspherical(d, n, x),
            SpatialFactor::Monomial { n } => x.powi(n as i32),
            SpatialFactor::ScaledShift => 0.5 * (1.0 + x),
            SpatialFactor::RawSpatial { ref form } => form.eval(x),
        }
    }

    /// Polynomial degree, `None` for raw profiles.
    pub fn degree(&self) -> Option<usize> {
        match *self {
            SpatialFactor::Ultraspherical { n, .. } | SpatialFactor::Monomial { n } => Some(n),
            SpatialFactor::ScaledShift => Some(1),
            SpatialFactor::RawSpatial { .. } => None,
        }
    }

    /// Coefficients of `x^0, x^1, ...`, `None` for raw profiles.
    pub fn power_coefficients(&self) -> Option<Vec<f64>> {
        match *self {
            SpatialFactor::Ultraspherical { d, n } => Some(ultraspherical_power_coefficients(d, n)),
            SpatialFactor::Monomial { n } => {
                let mut c = vec![0.0; n + 1];
                c[n] = 1.0;
                Some(c)
            }
            SpatialFactor::ScaledShift => Some(vec![0.5, 0.5]),
            SpatialFactor::RawSpatial { .. } => None,
        }
    }
}

/// Space-time forms that do not split into a spatial and a temporal factor.
/// Positive definiteness of these is not asserted; they exist to exercise
/// the membership tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RawForm {
    /// `psi^-1 exp(-a theta^alpha / psi^beta)` with `psi = 1 + (|u| / c)^2`
    GneitingExponential { a: f64, alpha: f64, c: f64, beta: f64 },
}

impl RawForm {
    fn validate(&self, path: &str) -> Result<()> {
        match *self {
            RawForm::GneitingExponential { a, alpha, c, beta } => {
                let bad = |name: &str, msg: String| Err(Error::invalid(&format!("{path}.{name}"), msg));
                if !(a > 0.0 && a.is_finite()) {
                    return bad("a", format!("a must be positive, got {a}"));
                }
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return bad("alpha", format!("alpha must lie in (0, 2], got {alpha}"));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return bad("c", format!("c must be positive, got {c}"));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return bad("beta", format!("beta must lie in [0, 1], got {beta}"));
                }
                Ok(())
            }
        }
    }

    fn eval(&self, model: &GroupModel, x: f64, u: &GroupElement) -> f64 {
        match *self {
            RawForm::GneitingExponential { a, alpha, c, beta } => {
                let psi = 1.0 + (model.magnitude(u) / c).powi(2);
                (-a * x.acos().powf(alpha) / psi.powf(beta)).exp() / psi
            }
        }
    }
}

/// A kernel `f(x, u)` built from catalog pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `s(x) g(u)`
    TensorProduct { spatial: SpatialFactor, temporal: PdFunction },
    Sum { terms: Vec<KernelSpec> },
    Product { factors: Vec<KernelSpec> },
    /// `r f`, `r >= 0`
    Scale { r: f64, child: Box<KernelSpec> },
    /// A truncated Schoenberg expansion.
    Expansion { sequence: SchoenbergSequence },
    RawForm { form: RawForm },
}

impl KernelSpec {
    pub fn validate(&self, model: &GroupModel, path: &str) -> Result<()> {
        match self {
            KernelSpec::TensorProduct { spatial, temporal } => {
                spatial.validate(&format!("{path}.spatial"))?;
                temporal.validate(model, &format!("{path}.temporal"))
            }
            KernelSpec::Sum { terms } | KernelSpec::Product { factors: terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid(path, "needs at least one child"));
                }
                let key = if matches!(self, KernelSpec::Sum { .. }) { "terms" } else { "factors" };
                for (i, t) in terms.iter().enumerate() {
                    t.validate(model, &format!("{path}.{key}[{i}]"))?;
                }
                if matches!(self, KernelSpec::Sum { .. }) {
                    let mut dims = Vec::new();
                    for t in terms {
                        t.collect_expansion_dims(&mut dims);
                    }
                    if dims.windows(2).any(|w| w[0] != w[1]) {
                        return Err(Error::invalid(path, "sum mixes expansions with different dimension tags"));
                    }
                }
                Ok(())
            }
            KernelSpec::Scale { r, child } => {
                if !(*r >= 0.0 && r.is_finite()) {
                    return Err(Error::invalid(&format!("{path}.r"), format!("scale must be >= 0, got {r}")));
                }
                child.validate(model, &format!("{path}.child"))
            }
            KernelSpec::Expansion { sequence } => sequence.validate(model, &format!("{path}.sequence")),
            KernelSpec::RawForm { form } => form.validate(&format!("{path}.form")),
        }
    }

    fn collect_expansion_dims(&self, out: &mut Vec<Dimension>) {
        match self {
            KernelSpec::Expansion { sequence } => out.push(sequence.d),
            KernelSpec::Sum { terms } | KernelSpec::Product { factors: terms } => {
                terms.iter().for_each(|t| t.collect_expansion_dims(out))
            }
            KernelSpec::Scale { child, .. } => child.collect_expansion_dims(out),
            KernelSpec::TensorProduct { .. } | KernelSpec::RawForm { .. } => {}
        }
    }

    /// `f(x, u)`.
    pub fn eval(&self, model: &GroupModel, x: f64, u: &GroupElement) -> Result<Complex64> {
        let x = clip_unit(x)?;
        let u = model.coerce(u)?;
        self.eval_canonical(model, x, &u)
    }

    /// `f(x, u)` for `x` already in `[-1, 1]` and `u` in canonical form.
    pub(crate) fn eval_canonical(&self, model: &GroupModel, x: f64, u: &GroupElement) -> Result<Complex64> {
        Ok(match self {
            KernelSpec::TensorProduct { spatial, temporal } => temporal.eval_canonical(model, u) * spatial.eval(x),
            KernelSpec::Sum { terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.eval_canonical(model, x, u)?;
                }
                acc
            }
            KernelSpec::Product { factors } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for t in factors {
                    acc *= t.eval_canonical(model, x, u)?;
                }
                acc
            }
            KernelSpec::Scale { r, child } => child.eval_canonical(model, x, u)? * *r,
            KernelSpec::Expansion { sequence } => sequence.synthesize(model, x, u)?.value,
            KernelSpec::RawForm { form } => Complex64::new(form.eval(model, x, u), 0.0),
        })
    }

    /// Polynomial degree in `x`, `None` when the kernel is not band-limited.
    pub fn spatial_degree(&self) -> Option<usize> {
        match self {
            KernelSpec::TensorProduct { spatial, .. } => spatial.degree(),
            KernelSpec::Sum { terms } => terms.iter().map(KernelSpec::spatial_degree).try_fold(0, |a, d| Some(a.max(d?))),
            KernelSpec::Product { factors } => factors.iter().map(KernelSpec::spatial_degree).try_fold(0, |a, d| Some(a + d?)),
            KernelSpec::Scale { child, .. } => child.spatial_degree(),
            KernelSpec::Expansion { sequence } => Some(sequence.n_max()),
            KernelSpec::RawForm { .. } => None,
        }
    }

    /// The power series `f(x, u) = sum_n phi_n(u) x^n` as a sequence tagged
    /// infinity. Available for sums and scalings of polynomial tensor
    /// products and expansions; otherwise [`Error::NotMonomialExpansion`].
    pub fn monomial_expansion(&self, model: &GroupModel) -> Result<SchoenbergSequence> {
        let mut coefficients: Vec<Coefficient> = Vec::new();
        let exact = self.accumulate_powers(model, 1.0, &mut coefficients)?;
        if coefficients.is_empty() {
            coefficients.push(Coefficient::zero());
        }
        let mut seq = SchoenbergSequence::new(Dimension::Infinity, coefficients);
        seq.tail_bound = exact.then_some(0.0);
        seq.diagnose(model);
        Ok(seq)
    }

    fn accumulate_powers(&self, model: &GroupModel, scale: f64, out: &mut Vec<Coefficient>) -> Result<bool> {
        let add = |k: usize, c: Coefficient, out: &mut Vec<Coefficient>| -> Result<()> {
            if out.len() <= k {
                out.resize(k + 1, Coefficient::zero());
            }
            out[k] = out[k].add(&c, model)?;
            Ok(())
        };
        match self {
            KernelSpec::TensorProduct { spatial, temporal } => {
                let powers = spatial.power_coefficients().ok_or(Error::NotMonomialExpansion)?;
                let g = Coefficient::from_pd(temporal.clone());
                for (k, a) in powers.into_iter().enumerate() {
                    if a != 0.0 {
                        add(k, g.scaled(a * scale), out)?;
                    }
                }
                Ok(true)
            }
            KernelSpec::Sum { terms } => {
                let mut exact = true;
                for t in terms {
                    exact &= t.accumulate_powers(model, scale, out)?;
                }
                Ok(exact)
            }
            KernelSpec::Scale { r, child } => child.accumulate_powers(model, scale * r, out),
            KernelSpec::Expansion { sequence } => {
                for (n, c) in sequence.coefficients.iter().enumerate() {
                    match sequence.d {
                        Dimension::Infinity => add(n, c.scaled(scale), out)?,
                        Dimension::Finite(d) => {
                            for (k, a) in ultraspherical_power_coefficients(d, n).into_iter().enumerate() {
                                if a != 0.0 {
                                    add(k, c.scaled(a * scale), out)?;
                                }
                            }
                        }
                    }
                }
                Ok(false)
            }
            KernelSpec::Product { .. } | KernelSpec::RawForm { .. } => Err(Error::NotMonomialExpansion),
        }
    }
}

/// A point `(xi, u)` of `S^d x G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub xi: Vec<f64>,
    pub u: GroupElement,
}

/// `[f(<xi_k, xi_l>, u_k^{-1} u_l)]_{k,l}`.
///
/// Spatial vectors must share a length and have unit norm within
/// [`UNIT_NORM_TOL`]; they are renormalized before use.
pub fn kernel_gram(spec: &KernelSpec, model: &GroupModel, points: &[SpaceTimePoint]) -> Result<DMatrix<Complex64>> {
    let n = points.len();
    let Some(first) = points.first() else {
        return Ok(DMatrix::zeros(0, 0));
    };
    let dim = first.xi.len();
    let mut unit = Vec::with_capacity(n);
    let mut elements = Vec::with_capacity(n);
    for (k, p) in points.iter().enumerate() {
        if p.xi.len() != dim {
            return Err(Error::domain(format!("point {k} has {} coordinates, expected {dim}", p.xi.len())));
        }
        let norm = p.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
            return Err(Error::domain(format!("point {k} has norm {norm}, not 1")));
        }
        unit.push(p.xi.iter().map(|v| v / norm).collect::<Vec<f64>>());
        elements.push(model.coerce(&p.u)?);
    }
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            (0..n)
                .map(|l| {
                    let x: f64 = unit[k].iter().zip(&unit[l]).map(|(a, b)| a * b).sum();
                    let u = model.displacement(&elements[k], &elements[l])?;
                    spec.eval_canonical(model, x.clamp(-1.0, 1.0), &u)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |k, l| rows[k][l]))
}
