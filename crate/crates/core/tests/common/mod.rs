#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sphere_kernels::groups::{CharacterTerm, Frequency, GroupElement, GroupModel, PdFunction};
use sphere_kernels::kernels::{KernelSpec, SpatialFactor};

/// Smallest dimension of an ultraspherical factor in generated specs, so
/// that every spec is positive definite on `S^d` for `d <= 5`.
pub const MIN_FACTOR_DIM: usize = 5;

pub const MAX_DEGREE: usize = 10;

pub fn models() -> Vec<GroupModel> {
    vec![
        GroupModel::RealLine,
        GroupModel::Integers,
        GroupModel::Cyclic { m: 9 },
        GroupModel::RealVector { k: 2 },
    ]
}

/// A lattice grid containing the identity, closed enough under
/// displacement to test positive definiteness on it.
pub fn lattice(model: &GroupModel) -> Vec<GroupElement> {
    match *model {
        GroupModel::RealLine => (-12..=12).map(|i| GroupElement::Real(0.25 * i as f64)).collect(),
        GroupModel::Integers => (-15..=15).map(GroupElement::Integer).collect(),
        GroupModel::Cyclic { m } => (0..m as i64).map(GroupElement::Integer).collect(),
        GroupModel::RealVector { k } => {
            assert_eq!(k, 2);
            let mut out = Vec::new();
            for i in -2..=2 {
                for j in -2..=2 {
                    out.push(GroupElement::Vector(vec![0.5 * i as f64, 0.5 * j as f64]));
                }
            }
            out
        }
    }
}

fn frequency(rng: &mut ChaCha8Rng, model: &GroupModel) -> Frequency {
    match *model {
        GroupModel::Cyclic { m } => Frequency(vec![rng.gen_range(0..m) as f64]),
        _ => Frequency((0..model.frequency_dim()).map(|_| rng.gen_range(-2.0..2.0)).collect()),
    }
}

pub fn random_pd_function(rng: &mut ChaCha8Rng, model: &GroupModel) -> PdFunction {
    loop {
        let f = match rng.gen_range(0..6) {
            0 => PdFunction::ExpDecay { a: rng.gen_range(0.2..2.0) },
            1 => PdFunction::Gaussian { a: rng.gen_range(0.2..2.0) },
            2 => PdFunction::Cosine { omega: frequency(rng, model) },
            3 => PdFunction::Triangular { c: rng.gen_range(0.5..3.0) },
            4 => PdFunction::Constant { r: rng.gen_range(0.1..2.0) },
            _ => PdFunction::CharacterMix {
                terms: (0..rng.gen_range(1..=3))
                    .map(|_| CharacterTerm { weight: rng.gen_range(0.0..1.0), omega: frequency(rng, model) })
                    .collect(),
            },
        };
        if f.validate(model, "f").is_ok() {
            return f;
        }
    }
}

pub fn random_spatial(rng: &mut ChaCha8Rng, max_degree: usize) -> SpatialFactor {
    match rng.gen_range(0..3) {
        0 => SpatialFactor::Monomial { n: rng.gen_range(0..=max_degree) },
        1 if max_degree >= 1 => SpatialFactor::ScaledShift,
        _ => SpatialFactor::Ultraspherical {
            d: rng.gen_range(MIN_FACTOR_DIM..=MIN_FACTOR_DIM + 3),
            n: rng.gen_range(0..=max_degree),
        },
    }
}

fn tensor(rng: &mut ChaCha8Rng, model: &GroupModel, max_degree: usize) -> KernelSpec {
    KernelSpec::TensorProduct { spatial: random_spatial(rng, max_degree), temporal: random_pd_function(rng, model) }
}

/// A random band-limited kernel, positive definite on `S^d x G` for every
/// `d <= MIN_FACTOR_DIM`, of spatial degree at most [`MAX_DEGREE`].
pub fn random_pd_spec(rng: &mut ChaCha8Rng, model: &GroupModel) -> KernelSpec {
    let terms = (0..rng.gen_range(1..=3))
        .map(|_| match rng.gen_range(0..5) {
            0 => KernelSpec::Scale { r: rng.gen_range(0.0..2.0), child: Box::new(tensor(rng, model, MAX_DEGREE)) },
            1 => {
                let first = tensor(rng, model, MAX_DEGREE / 2);
                let second = tensor(rng, model, MAX_DEGREE / 2);
                KernelSpec::Product { factors: vec![first, second] }
            }
            _ => tensor(rng, model, MAX_DEGREE),
        })
        .collect();
    let spec = KernelSpec::Sum { terms };
    assert!(spec.spatial_degree().unwrap() <= MAX_DEGREE);
    spec
}

/// `u^{-1}`, used to check Hermitian symmetry `f(x, u^{-1}) = conj f(x, u)`.
pub fn inverse(model: &GroupModel, u: &GroupElement) -> GroupElement {
    model.inverse(u).unwrap()
}
