use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::problem::{AffineSet, BoxSet, Constraint, FeasibilityProblem};
use crate::cross::membership;
use crate::error::{Error, Result};
use crate::linalg::{inner, PairPoint, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Orthant,
    Affine,
    Box,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthant" => Ok(InstanceKind::Orthant),
            "affine" => Ok(InstanceKind::Affine),
            "box" => Ok(InstanceKind::Box),
            other => Err(Error::InvalidArgument(format!(
                "unknown instance kind {other:?}"
            ))),
        }
    }
}

/// A feasibility problem with a starting point and, for generated
/// instances, a known point of `C n B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub problem: FeasibilityProblem,
    pub start: PairPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairPoint>,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        let n = self.problem.dim();
        for p in std::iter::once(&self.start).chain(self.witness.as_ref()) {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: p.dim(),
                });
            }
        }
        Ok(())
    }
}

fn uniform(dim: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

/// A pair with disjoint supports, so `<x, y>` is exactly zero.
fn orthogonal_witness(dim: usize, rng: &mut ChaCha8Rng, nonneg: bool) -> PairPoint {
    let lo = if nonneg { 0.0 } else { -1.0 };
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for i in 0..dim {
        let v = rng.random_range(lo..1.0);
        if rng.random::<bool>() {
            x[i] = v;
        } else {
            y[i] = v;
        }
    }
    PairPoint::from_parts(Vector::from_raw(x), Vector::from_raw(y))
}

/// Gram-Schmidt on `k` Gaussian vectors, redrawing any that collapse.
fn orthonormal_basis(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v = Vector::from_raw((0..dim).map(|_| rng.sample(StandardNormal)).collect());
        // Two passes keep the result orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v).expect("same dimension");
                v = v.axpy(-c, b).expect("same dimension");
            }
        }
        if v.norm() > 1e-6 {
            basis.push(v.normalized().expect("nonzero"));
        }
    }
    basis
}

fn affine_through(point: &Vector, rng: &mut ChaCha8Rng) -> Result<AffineSet> {
    let n = point.dim();
    let k = rng.random_range(1..=n);
    AffineSet::new(point.clone(), orthonormal_basis(n, k, rng))
}

/// Deterministic feasible instance of the given kind; the same
/// `(kind, dim, seed)` always yields the same instance.
pub fn generate_instance(kind: InstanceKind, dim: usize, seed: u64) -> Result<Instance> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "instance dimension must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (problem, witness) = match kind {
        InstanceKind::Orthant => {
            let w = orthogonal_witness(dim, &mut rng, true);
            (FeasibilityProblem::orthant(dim)?, w)
        }
        InstanceKind::Affine => {
            let w = orthogonal_witness(dim, &mut rng, false);
            let x = affine_through(w.x(), &mut rng)?;
            let y = affine_through(w.y(), &mut rng)?;
            (
                FeasibilityProblem::new(dim, Constraint::AffinePair { x, y })?,
                w,
            )
        }
        InstanceKind::Box => {
            let w = orthogonal_witness(dim, &mut rng, false);
            let mut bounds = |c: &Vector| -> Result<BoxSet> {
                let below = uniform(dim, 0.0, 1.0, &mut rng);
                let above = uniform(dim, 0.0, 1.0, &mut rng);
                BoxSet::new(
                    Vector::from_raw(c.iter().zip(&below).map(|(v, d)| v - d).collect()),
                    Vector::from_raw(c.iter().zip(&above).map(|(v, d)| v + d).collect()),
                )
            };
            let x = bounds(w.x())?;
            let y = bounds(w.y())?;
            (
                FeasibilityProblem::new(dim, Constraint::BoxPair { x, y })?,
                w,
            )
        }
    };
    debug_assert!(membership(&witness, 0.0));
    let start = PairPoint::from_parts(
        Vector::from_raw(uniform(dim, -2.0, 2.0, &mut rng)),
        Vector::from_raw(uniform(dim, -2.0, 2.0, &mut rng)),
    );
    Ok(Instance {
        problem,
        start,
        witness: Some(witness),
    })
}
