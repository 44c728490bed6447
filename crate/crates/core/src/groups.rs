//! Abelian locally compact groups and a catalog of continuous positive
//! definite functions on them.
//!
//! Groups are written additively, so `u^{-1} v` is `v - u` (mod `m` for the
//! cyclic group).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on `|phi(u)| <= phi(e)` in the boundedness precheck.
pub const BOUND_TOL: f64 = 1e-10;

/// Integers are sampled uniformly from `-INTEGER_SAMPLE_RANGE..=INTEGER_SAMPLE_RANGE`.
pub const INTEGER_SAMPLE_RANGE: i64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupModel {
    RealLine,
    Integers,
    Cyclic { m: u64 },
    RealVector { k: usize },
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::RealLine => write!(f, "R"),
            GroupModel::Integers => write!(f, "Z"),
            GroupModel::Cyclic { m } => write!(f, "Z_{m}"),
            GroupModel::RealVector { k } => write!(f, "R^{k}"),
        }
    }
}

/// A group element. JSON form: a number, or an array for `R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupElement {
    Integer(i64),
    Real(f64),
    Vector(Vec<f64>),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(self).unwrap_or_else(|_| format!("{self:?}")))
    }
}

impl GroupModel {
    pub fn validate(&self, path: &str) -> Result<()> {
        match *self {
            GroupModel::Cyclic { m } if m < 1 => Err(Error::invalid(path, "cyclic group needs m >= 1")),
            GroupModel::RealVector { k } if k < 1 => Err(Error::invalid(path, "vector group needs k >= 1")),
            _ => Ok(()),
        }
    }

    /// Number of real coordinates a frequency must have.
    pub fn frequency_dim(&self) -> usize {
        match *self {
            GroupModel::RealVector { k } => k,
            _ => 1,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupModel::RealLine => GroupElement::Real(0.0),
            GroupModel::Integers | GroupModel::Cyclic { .. } => GroupElement::Integer(0),
            GroupModel::RealVector { k } => GroupElement::Vector(vec![0.0; k]),
        }
    }

    fn mismatch(&self, e: &GroupElement) -> Error {
        Error::GroupMismatch { model: self.to_string(), element: e.to_string() }
    }

    /// Brings an element into the canonical representation of this model,
    /// e.g. JSON `3` read for `R` becomes `Real(3.0)`. Rejects elements that
    /// do not belong to the group.
    pub fn coerce(&self, e: &GroupElement) -> Result<GroupElement> {
        match (*self, e) {
            (GroupModel::RealLine, GroupElement::Real(v)) if v.is_finite() => Ok(GroupElement::Real(*v)),
            (GroupModel::RealLine, GroupElement::Integer(v)) => Ok(GroupElement::Real(*v as f64)),
            (GroupModel::RealLine, GroupElement::Vector(v)) if v.len() == 1 && v[0].is_finite() => {
                Ok(GroupElement::Real(v[0]))
            }
            (GroupModel::Integers, GroupElement::Integer(v)) => Ok(GroupElement::Integer(*v)),
            (GroupModel::Integers, GroupElement::Real(v)) if v.fract() == 0.0 && v.abs() < 9.0e15 => {
                Ok(GroupElement::Integer(*v as i64))
            }
            (GroupModel::Cyclic { m }, GroupElement::Integer(v)) if *v >= 0 && (*v as u64) < m => {
                Ok(GroupElement::Integer(*v))
            }
            (GroupModel::Cyclic { m }, GroupElement::Real(v))
                if v.fract() == 0.0 && *v >= 0.0 && (*v as u64) < m =>
            {
                Ok(GroupElement::Integer(*v as i64))
            }
            (GroupModel::RealVector { k }, GroupElement::Vector(v)) if v.len() == k && v.iter().all(|x| x.is_finite()) => {
                Ok(GroupElement::Vector(v.clone()))
            }
            (GroupModel::RealVector { k: 1 }, GroupElement::Real(v)) => Ok(GroupElement::Vector(vec![*v])),
            (GroupModel::RealVector { k: 1 }, GroupElement::Integer(v)) => Ok(GroupElement::Vector(vec![*v as f64])),
            _ => Err(self.mismatch(e)),
        }
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.coerce(e).is_ok()
    }

    /// Parses an element from its JSON text.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let e: GroupElement = serde_json::from_str(text.trim())
            .map_err(|err| Error::Parse(format!("cannot parse group element {text:?}: {err}")))?;
        self.coerce(&e)
    }

    pub fn inverse(&self, u: &GroupElement) -> Result<GroupElement> {
        Ok(match (*self, self.coerce(u)?) {
            (GroupModel::Cyclic { m }, GroupElement::Integer(r)) => {
                GroupElement::Integer(((m - r as u64) % m) as i64)
            }
            (_, GroupElement::Real(v)) => GroupElement::Real(-v),
            (_, GroupElement::Integer(v)) => GroupElement::Integer(-v),
            (_, GroupElement::Vector(v)) => GroupElement::Vector(v.iter().map(|x| -x).collect()),
        })
    }

    pub fn compose(&self, u: &GroupElement, v: &GroupElement) -> Result<GroupElement> {
        Ok(match (*self, self.coerce(u)?, self.coerce(v)?) {
            (GroupModel::Cyclic { m }, GroupElement::Integer(a), GroupElement::Integer(b)) => {
                GroupElement::Integer(((a as u64 + b as u64) % m) as i64)
            }
            (_, GroupElement::Real(a), GroupElement::Real(b)) => GroupElement::Real(a + b),
            (_, GroupElement::Integer(a), GroupElement::Integer(b)) => GroupElement::Integer(a + b),
            (_, GroupElement::Vector(a), GroupElement::Vector(b)) => {
                GroupElement::Vector(a.iter().zip(&b).map(|(x, y)| x + y).collect())
            }
            _ => return Err(self.mismatch(u)),
        })
    }

    /// `u^{-1} v`.
    pub fn displacement(&self, u: &GroupElement, v: &GroupElement) -> Result<GroupElement> {
        Ok(match (*self, self.coerce(u)?, self.coerce(v)?) {
            (GroupModel::Cyclic { m }, GroupElement::Integer(a), GroupElement::Integer(b)) => {
                GroupElement::Integer(((b as u64 + m - a as u64) % m) as i64)
            }
            (_, GroupElement::Real(a), GroupElement::Real(b)) => GroupElement::Real(b - a),
            (_, GroupElement::Integer(a), GroupElement::Integer(b)) => GroupElement::Integer(b - a),
            (_, GroupElement::Vector(a), GroupElement::Vector(b)) => {
                GroupElement::Vector(a.iter().zip(&b).map(|(x, y)| y - x).collect())
            }
            _ => return Err(self.mismatch(u)),
        })
    }

    /// Distance of a canonical element from the identity: `|u|`, the
    /// Euclidean norm, or the cyclic distance `min(r, m - r)`.
    pub(crate) fn magnitude(&self, u: &GroupElement) -> f64 {
        match (*self, u) {
            (GroupModel::Cyclic { m }, GroupElement::Integer(r)) => (*r as u64).min(m - *r as u64) as f64,
            (_, GroupElement::Integer(v)) => v.unsigned_abs() as f64,
            (_, GroupElement::Real(v)) => v.abs(),
            (_, GroupElement::Vector(v)) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// `<omega, u>` for a canonical element. On `Z_m` the integer frequency
    /// `j` gives the character phase `2 pi j r / m`, with `r` taken in the
    /// symmetric range so that `phase(u^{-1}) == -phase(u)` exactly.
    pub(crate) fn phase(&self, omega: &[f64], u: &GroupElement) -> f64 {
        match (*self, u) {
            (GroupModel::Cyclic { m }, GroupElement::Integer(r)) => {
                let r = *r as u64;
                let signed = if 2 * r > m { -((m - r) as f64) } else { r as f64 };
                2.0 * PI * omega[0] * signed / m as f64
            }
            (_, GroupElement::Integer(v)) => omega[0] * *v as f64,
            (_, GroupElement::Real(v)) => omega[0] * v,
            (_, GroupElement::Vector(v)) => omega.iter().zip(v).map(|(w, x)| w * x).sum(),
        }
    }

    /// Draws elements from the model's validation distribution: standard
    /// normal on `R` and `R^k`, uniform on `{-50..50}` for `Z`, uniform
    /// residues for `Z_m`.
    pub fn sample_elements<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<GroupElement> {
        (0..n)
            .map(|_| match *self {
                GroupModel::RealLine => GroupElement::Real(rng.sample(StandardNormal)),
                GroupModel::Integers => {
                    GroupElement::Integer(rng.gen_range(-INTEGER_SAMPLE_RANGE..=INTEGER_SAMPLE_RANGE))
                }
                GroupModel::Cyclic { m } => GroupElement::Integer(rng.gen_range(0..m) as i64),
                GroupModel::RealVector { k } => {
                    GroupElement::Vector((0..k).map(|_| rng.sample(StandardNormal)).collect())
                }
            })
            .collect()
    }

    /// Element equality up to `tol` in each real coordinate.
    pub fn approx_eq(&self, a: &GroupElement, b: &GroupElement, tol: f64) -> bool {
        match (self.coerce(a), self.coerce(b)) {
            (Ok(GroupElement::Integer(x)), Ok(GroupElement::Integer(y))) => x == y,
            (Ok(GroupElement::Real(x)), Ok(GroupElement::Real(y))) => (x - y).abs() <= tol,
            (Ok(GroupElement::Vector(x)), Ok(GroupElement::Vector(y))) => {
                x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol)
            }
            _ => false,
        }
    }
}

/// A frequency: a scalar for one-parameter groups, a `k`-vector for `R^k`.
/// On `Z_m` it is the integer index of the character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FrequencyRepr", into = "FrequencyRepr")]
pub struct Frequency(pub Vec<f64>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FrequencyRepr {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl From<FrequencyRepr> for Frequency {
    fn from(r: FrequencyRepr) -> Self {
        match r {
            FrequencyRepr::Scalar(v) => Frequency(vec![v]),
            FrequencyRepr::Vector(v) => Frequency(v),
        }
    }
}

impl From<Frequency> for FrequencyRepr {
    fn from(f: Frequency) -> Self {
        if f.0.len() == 1 {
            FrequencyRepr::Scalar(f.0[0])
        } else {
            FrequencyRepr::Vector(f.0)
        }
    }
}

impl From<f64> for Frequency {
    fn from(v: f64) -> Self {
        Frequency(vec![v])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterTerm {
    pub weight: f64,
    pub omega: Frequency,
}

/// Continuous positive definite functions on a [`GroupModel`].
///
/// `|u|` below is the magnitude of the element (absolute value, Euclidean
/// norm, or cyclic distance). On `Z_m` the Gaussian is periodized, since a
/// Gaussian in the cyclic distance is not positive definite in general.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdFunction {
    /// `exp(-a |u|)`
    ExpDecay { a: f64 },
    /// `exp(-a u^2)`
    Gaussian { a: f64 },
    /// `cos(<omega, u>)`
    Cosine { omega: Frequency },
    /// `max(0, 1 - |u| / c)`
    Triangular { c: f64 },
    /// `r`
    Constant { r: f64 },
    /// `sum_j w_j exp(i <omega_j, u>)`
    CharacterMix { terms: Vec<CharacterTerm> },
}

impl PdFunction {
    /// Checks parameters and that the form is positive definite on `model`.
    pub fn validate(&self, model: &GroupModel, path: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(path, format!("{name} must be positive and finite, got {v}")))
            }
        };
        let check_freq = |omega: &Frequency, at: &str| -> Result<()> {
            if omega.0.len() != model.frequency_dim() {
                return Err(Error::invalid(
                    at,
                    format!("frequency needs {} coordinate(s) for {model}", model.frequency_dim()),
                ));
            }
            if omega.0.iter().any(|w| !w.is_finite()) {
                return Err(Error::invalid(at, "frequency must be finite"));
            }
            if matches!(model, GroupModel::Cyclic { .. }) && omega.0[0].fract() != 0.0 {
                return Err(Error::invalid(at, "frequencies on Z_m are integer character indices"));
            }
            Ok(())
        };
        match self {
            PdFunction::ExpDecay { a } | PdFunction::Gaussian { a } => positive("a", *a),
            PdFunction::Cosine { omega } => check_freq(omega, &format!("{path}.omega")),
            PdFunction::Triangular { c } => {
                positive("c", *c)?;
                match *model {
                    GroupModel::RealVector { k } if k > 1 => Err(Error::invalid(
                        path,
                        format!("triangular function is not positive definite on {model}"),
                    )),
                    GroupModel::Cyclic { m } if *c > m as f64 / 2.0 => Err(Error::invalid(
                        path,
                        format!("triangular support c = {c} exceeds half the cycle length on {model}"),
                    )),
                    _ => Ok(()),
                }
            }
            PdFunction::Constant { r } => {
                if *r >= 0.0 && r.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(path, format!("constant must be >= 0, got {r}")))
                }
            }
            PdFunction::CharacterMix { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    let at = format!("{path}.terms[{i}]");
                    if !(t.weight >= 0.0 && t.weight.is_finite()) {
                        return Err(Error::invalid(&at, format!("weight must be >= 0, got {}", t.weight)));
                    }
                    check_freq(&t.omega, &format!("{at}.omega"))?;
                }
                Ok(())
            }
        }
    }

    /// `phi(u)`.
    pub fn eval(&self, model: &GroupModel, u: &GroupElement) -> Result<Complex64> {
        let u = model.coerce(u)?;
        Ok(self.eval_canonical(model, &u))
    }

    pub(crate) fn eval_canonical(&self, model: &GroupModel, u: &GroupElement) -> Complex64 {
        let real = |v: f64| Complex64::new(v, 0.0);
        match self {
            PdFunction::ExpDecay { a } => real((-a * model.magnitude(u)).exp()),
            PdFunction::Gaussian { a } => match (*model, u) {
                (GroupModel::Cyclic { m }, GroupElement::Integer(r)) => real(wrapped_gaussian(*a, m, *r as u64)),
                _ => real((-a * model.magnitude(u).powi(2)).exp()),
            },
            PdFunction::Cosine { omega } => real(model.phase(&omega.0, u).cos()),
            PdFunction::Triangular { c } => real((1.0 - model.magnitude(u) / c).max(0.0)),
            PdFunction::Constant { r } => real(*r),
            PdFunction::CharacterMix { terms } => terms
                .iter()
                .map(|t| Complex64::from_polar(t.weight, model.phase(&t.omega.0, u)))
                .sum(),
        }
    }

    /// `phi(e)`, real and nonnegative for every catalog form.
    pub fn at_identity(&self, model: &GroupModel) -> f64 {
        self.eval_canonical(model, &model.identity()).re
    }
}

/// `sum_l exp(-a (r + l m)^2)` normalized to 1 at `r = 0`.
fn wrapped_gaussian(a: f64, m: u64, r: u64) -> f64 {
    let m = m as f64;
    let signed = if 2.0 * r as f64 > m { r as f64 - m } else { r as f64 };
    let reach = ((750.0 / a).sqrt() / m).ceil().min(10_000.0) as i64 + 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for l in -reach..=reach {
        let shift = l as f64 * m;
        num += (-a * (signed + shift).powi(2)).exp();
        den += (-a * shift * shift).exp();
    }
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdValidation {
    pub min_eig: f64,
    pub max_eig: f64,
    pub hermitian_gap: f64,
    pub bounded: bool,
    pub verdict: Verdict,
}

/// Builds `[phi(u_k^{-1} u_l)]` at the given points and eigen-tests it.
/// A boundedness violation `|phi(u)| > phi(e)` fails before the eigen test.
pub fn validate_pd_at<F>(model: &GroupModel, phi: F, points: &[GroupElement]) -> Result<PdValidation>
where
    F: Fn(&GroupElement) -> Result<Complex64>,
{
    let n = points.len();
    let at_e = phi(&model.identity())?;
    let mut bounded = at_e.im.abs() <= BOUND_TOL && at_e.re >= -BOUND_TOL;
    let mut gram = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        for l in 0..n {
            let value = phi(&model.displacement(&points[k], &points[l])?)?;
            if value.norm() > at_e.re + BOUND_TOL * at_e.re.abs().max(1.0) {
                bounded = false;
            }
            gram[(k, l)] = value;
        }
    }
    let hermitian_gap = linalg::hermitian_gap(&gram);
    let (min_eig, max_eig) = linalg::eigen_extremes(&gram)?;
    let verdict = Verdict::from_bool(bounded && linalg::psd_verdict(min_eig, max_eig));
    Ok(PdValidation { min_eig, max_eig, hermitian_gap, bounded, verdict })
}

/// Samples `n_points` elements from the model's validation distribution
/// (deterministic in `seed`) and runs [`validate_pd_at`].
pub fn validate_pd_on_samples<F>(model: &GroupModel, phi: F, n_points: usize, seed: u64) -> Result<PdValidation>
where
    F: Fn(&GroupElement) -> Result<Complex64>,
{
    if n_points < 1 {
        return Err(Error::domain("n_points must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = model.sample_elements(&mut rng, n_points);
    validate_pd_at(model, phi, &points)
}
