use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, PairPoint, Vector};

/// Orthonormality slack accepted for affine bases.
const BASIS_TOL: f64 = 1e-10;

/// `point + span(basis)` with an orthonormal `basis` (possibly empty).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAffine")]
pub struct AffineSet {
    point: Vector,
    basis: Vec<Vector>,
}

#[derive(Deserialize)]
struct RawAffine {
    point: Vector,
    basis: Vec<Vector>,
}

impl TryFrom<RawAffine> for AffineSet {
    type Error = Error;
    fn try_from(raw: RawAffine) -> Result<Self> {
        AffineSet::new(raw.point, raw.basis)
    }
}

impl AffineSet {
    pub fn new(point: Vector, basis: Vec<Vector>) -> Result<Self> {
        let n = point.dim();
        if basis.len() > n {
            return Err(Error::InvalidArgument(format!(
                "affine basis has {} vectors in dimension {n}",
                basis.len()
            )));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.dim() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: b.dim(),
                });
            }
            for (j, c) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (inner(b, c)? - expected).abs() > BASIS_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "affine basis is not orthonormal at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(AffineSet { point, basis })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn point(&self) -> &Vector {
        &self.point
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn project(&self, z: &Vector) -> Result<Vector> {
        let offset = z.sub(&self.point)?;
        let mut out = self.point.clone();
        for b in &self.basis {
            out = out.axpy(inner(b, &offset)?, b)?;
        }
        Ok(out)
    }
}

/// Coordinate bounds `lower <= z <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

#[derive(Deserialize)]
struct RawBox {
    lower: Vector,
    upper: Vector,
}

impl TryFrom<RawBox> for BoxSet {
    type Error = Error;
    fn try_from(raw: RawBox) -> Result<Self> {
        BoxSet::new(raw.lower, raw.upper)
    }
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                left: lower.dim(),
                right: upper.dim(),
            });
        }
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidArgument(format!(
                "box bound {i} has lower > upper"
            )));
        }
        Ok(BoxSet { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn project(&self, z: &Vector) -> Vector {
        Vector::from_raw(
            z.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                .collect(),
        )
    }
}

/// The second set `B` of a feasibility problem `find z in C n B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `K x K^+` for the nonnegative orthant, which is self-dual.
    OrthantPair,
    AffinePair {
        x: AffineSet,
        y: AffineSet,
    },
    BoxPair {
        x: BoxSet,
        y: BoxSet,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct FeasibilityProblem {
    dim: usize,
    constraint: Constraint,
}

#[derive(Deserialize)]
struct RawProblem {
    dim: usize,
    constraint: Constraint,
}

impl TryFrom<RawProblem> for FeasibilityProblem {
    type Error = Error;
    fn try_from(raw: RawProblem) -> Result<Self> {
        FeasibilityProblem::new(raw.dim, raw.constraint)
    }
}

impl FeasibilityProblem {
    pub fn new(dim: usize, constraint: Constraint) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "problem dimension must be positive".into(),
            ));
        }
        let dims: Vec<usize> = match &constraint {
            Constraint::OrthantPair => vec![],
            Constraint::AffinePair { x, y } => vec![x.dim(), y.dim()],
            Constraint::BoxPair { x, y } => vec![x.dim(), y.dim()],
        };
        if let Some(&bad) = dims.iter().find(|&&d| d != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad,
            });
        }
        Ok(FeasibilityProblem { dim, constraint })
    }

    pub fn orthant(dim: usize) -> Result<Self> {
        Self::new(dim, Constraint::OrthantPair)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    /// Nearest point of `B`.
    pub fn project(&self, p: &PairPoint) -> Result<PairPoint> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: p.dim(),
            });
        }
        Ok(match &self.constraint {
            Constraint::OrthantPair => project_orthant_pair(p),
            Constraint::AffinePair { x, y } => {
                PairPoint::from_parts(x.project(p.x())?, y.project(p.y())?)
            }
            Constraint::BoxPair { x, y } => {
                PairPoint::from_parts(x.project(p.x()), y.project(p.y()))
            }
        })
    }

    pub fn distance(&self, p: &PairPoint) -> Result<f64> {
        p.dist(&self.project(p)?)
    }
}

/// Coordinate-wise `max(., 0)` on both components.
pub fn project_orthant_pair(p: &PairPoint) -> PairPoint {
    p.map_components(|v| Vector::from_raw(v.iter().map(|c| c.max(0.0)).collect()))
}
