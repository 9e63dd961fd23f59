//! Nearest-point projection onto the cross `C = {(x, y) : <x, y> = 0}`.
//!
//! Every query point falls into exactly one of three cases:
//!
//! * `<x0, y0> = 0`: the point is already in `C`.
//! * `<x0, y0> != 0` and `x0 != +-y0`: the projection is unique and is given
//!   by the block inverse at the smaller multiplier root `lambda_-`.
//! * `<x0, y0> != 0` and `x0 = +-y0`: the projection is the whole family
//!   `{(0, y0)} u {(<u,x0>u, y0 - <u,y0>u) : ||u|| = 1}`, all at squared
//!   half-distance `(||x0||^2 + ||y0||^2) / 4`.
//!
//! Floating point cannot decide the exact trichotomy, so classification uses
//! relative tolerance bands (see [`Tolerances`]) and the resulting tag is
//! reported with every result.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_solve, dot, inner, PairPoint, Vector};

/// Scale factor for feasibility checks: `|<x,y>| <= FEASIBILITY_TOL * (1 + ||x0|| ||y0||)`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Below this value of `|1 - lambda^2|` the block quotient is replaced by the
/// subspace form `(P_U x0, P_{U^perp} y0)`.
pub const ILL_CONDITIONED_BAND: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    Orthogonal,
    Generic,
    DegeneratePlus,
    DegenerateMinus,
}

impl CaseTag {
    pub fn is_degenerate(self) -> bool {
        matches!(self, CaseTag::DegeneratePlus | CaseTag::DegenerateMinus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Orthogonal => "Orthogonal",
            CaseTag::Generic => "Generic",
            CaseTag::DegeneratePlus => "DegeneratePlus",
            CaseTag::DegenerateMinus => "DegenerateMinus",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative classification bands.
///
/// Orthogonal iff `|<x0,y0>| <= orth * (1 + ||x0|| ||y0||)`; degenerate iff
/// `min(||x0 - y0||, ||x0 + y0||) <= deg * (||x0|| + ||y0||)`. Orthogonal
/// takes precedence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub orth: f64,
    pub deg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orth: 1e-12,
            deg: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("orth", self.orth), ("deg", self.deg)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Roots of `<x0,y0> l^2 - (||x0||^2 + ||y0||^2) l + <x0,y0> = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
}

/// The degenerate case: a sphere's worth of nearest points, kept lazily.
#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateFamily {
    base: PairPoint,
    x0: Vector,
    y0: Vector,
    half_dist_sq: f64,
    canonical: [PairPoint; 2],
}

impl DegenerateFamily {
    fn new(x0: &Vector, y0: &Vector) -> Self {
        let dim = x0.dim();
        let keep_y = PairPoint::from_parts(Vector::zeros(dim), y0.clone());
        let keep_x = PairPoint::from_parts(x0.clone(), Vector::zeros(dim));
        DegenerateFamily {
            base: keep_y.clone(),
            x0: x0.clone(),
            y0: y0.clone(),
            half_dist_sq: 0.25 * (x0.norm_sq() + y0.norm_sq()),
            canonical: [keep_y, keep_x],
        }
    }

    /// `(0, y0)`, the member for `U = {0}`.
    pub fn base(&self) -> &PairPoint {
        &self.base
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn y0(&self) -> &Vector {
        &self.y0
    }

    pub fn half_dist_sq(&self) -> f64 {
        self.half_dist_sq
    }

    /// The two canonical selections, `(0, y0)` first and `(x0, 0)` second.
    pub fn canonical(&self) -> &[PairPoint; 2] {
        &self.canonical
    }

    /// Applies `map` to the stored points and data. `map` must be linear
    /// (scaling, orthogonal maps) for the result to stay a projection family.
    pub(crate) fn map_points(
        &self,
        map: &mut impl FnMut(&PairPoint) -> PairPoint,
    ) -> DegenerateFamily {
        let data = map(&PairPoint::from_parts(self.x0.clone(), self.y0.clone()));
        DegenerateFamily {
            base: map(&self.base),
            x0: data.x().clone(),
            y0: data.y().clone(),
            half_dist_sq: self.half_dist_sq,
            canonical: [map(&self.canonical[0]), map(&self.canonical[1])],
        }
    }

    /// The member for `U = span{u}`: `(<u,x0>u, y0 - <u,y0>u)`.
    pub fn member(&self, u: &Vector) -> Result<PairPoint> {
        crate::family::member_for_direction(&self.x0, &self.y0, u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Singleton {
        point: PairPoint,
        lambda: f64,
        half_dist_sq: f64,
    },
    Family(DegenerateFamily),
}

/// Which canonical point to take from a set-valued projection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// `(0, y0)`.
    #[default]
    KeepY,
    /// `(x0, 0)`.
    KeepX,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub tag: CaseTag,
    pub body: Projection,
}

impl ProjectionResult {
    pub fn half_dist_sq(&self) -> f64 {
        match &self.body {
            Projection::Singleton { half_dist_sq, .. } => *half_dist_sq,
            Projection::Family(f) => f.half_dist_sq,
        }
    }

    /// `d_C^2(x0, y0)`.
    pub fn dist_sq(&self) -> f64 {
        2.0 * self.half_dist_sq()
    }

    pub fn lambda(&self) -> Option<f64> {
        match &self.body {
            Projection::Singleton { lambda, .. } => Some(*lambda),
            Projection::Family(_) => None,
        }
    }

    pub fn singleton(&self) -> Option<&PairPoint> {
        match &self.body {
            Projection::Singleton { point, .. } => Some(point),
            Projection::Family(_) => None,
        }
    }

    pub fn family(&self) -> Option<&DegenerateFamily> {
        match &self.body {
            Projection::Singleton { .. } => None,
            Projection::Family(f) => Some(f),
        }
    }

    /// The unique point, or the requested canonical selection.
    pub fn select(&self, selection: Selection) -> &PairPoint {
        match &self.body {
            Projection::Singleton { point, .. } => point,
            Projection::Family(f) => match selection {
                Selection::KeepY => &f.canonical[0],
                Selection::KeepX => &f.canonical[1],
            },
        }
    }

    /// Applies a linear `map` to every stored point, keeping tag and
    /// multiplier. Distances are not rescaled.
    pub fn map_points(&self, mut map: impl FnMut(&PairPoint) -> PairPoint) -> ProjectionResult {
        let body = match &self.body {
            Projection::Singleton {
                point,
                lambda,
                half_dist_sq,
            } => Projection::Singleton {
                point: map(point),
                lambda: *lambda,
                half_dist_sq: *half_dist_sq,
            },
            Projection::Family(f) => Projection::Family(f.map_points(&mut map)),
        };
        ProjectionResult {
            tag: self.tag,
            body,
        }
    }

    /// The unique point, or both canonical selections.
    pub fn points(&self) -> Vec<&PairPoint> {
        match &self.body {
            Projection::Singleton { point, .. } => vec![point],
            Projection::Family(f) => f.canonical.iter().collect(),
        }
    }
}

pub fn membership(p: &PairPoint, tol: f64) -> bool {
    p.cross_inner().abs() <= tol
}

/// The feasibility bound `FEASIBILITY_TOL * (1 + ||x0|| ||y0||)` used throughout.
pub fn feasibility_bound(x0: &Vector, y0: &Vector) -> f64 {
    FEASIBILITY_TOL * (1.0 + x0.norm() * y0.norm())
}

pub fn classify(x0: &Vector, y0: &Vector, tols: &Tolerances) -> Result<CaseTag> {
    let q = inner(x0, y0)?;
    let (nx, ny) = (x0.norm(), y0.norm());
    if q.abs() <= tols.orth * (1.0 + nx * ny) {
        return Ok(CaseTag::Orthogonal);
    }
    let minus = x0.sub(y0)?.norm();
    let plus = x0.add(y0)?.norm();
    let band = tols.deg * (nx + ny);
    if minus.min(plus) <= band {
        return Ok(if minus <= plus {
            CaseTag::DegeneratePlus
        } else {
            CaseTag::DegenerateMinus
        });
    }
    Ok(CaseTag::Generic)
}

/// Quantities shared by the root formula: `q = <x0,y0>`,
/// `s = ||x0||^2 + ||y0||^2`, `p = ||x0 + y0|| ||x0 - y0||` and the two
/// factors of `p`.
struct QuadraticData {
    q: f64,
    s: f64,
    p: f64,
    sum_norm: f64,
    diff_norm: f64,
}

fn quadratic_data(x0: &Vector, y0: &Vector) -> Result<QuadraticData> {
    let q = inner(x0, y0)?;
    let sum_norm = x0.add(y0)?.norm();
    let diff_norm = x0.sub(y0)?.norm();
    Ok(QuadraticData {
        q,
        s: x0.norm_sq() + y0.norm_sq(),
        p: sum_norm * diff_norm,
        sum_norm,
        diff_norm,
    })
}

/// Both multiplier roots. The discriminant is taken in factored form
/// `||x0 + y0|| ||x0 - y0||`, `lambda_+` from the `+` branch and
/// `lambda_- = 1 / lambda_+ = 2q / (s + p)`, which has no cancellation.
pub fn solve_lambda(x0: &Vector, y0: &Vector) -> Result<LambdaPair> {
    let d = quadratic_data(x0, y0)?;
    if d.q == 0.0 {
        return Err(Error::OrthogonalInput);
    }
    let denom = d.s + d.p;
    if !denom.is_finite() {
        return Err(Error::InvalidArgument(
            "norms overflow the floating-point range".into(),
        ));
    }
    Ok(LambdaPair {
        lambda_minus: 2.0 * d.q / denom,
        lambda_plus: denom / (2.0 * d.q),
    })
}

/// Solution of the stationarity system `x + lambda y = x0`, `y + lambda x = y0`.
pub fn candidate(lambda: f64, x0: &Vector, y0: &Vector) -> Result<PairPoint> {
    block_solve(lambda, &PairPoint::new(x0.clone(), y0.clone())?)
}

/// `1/2 ||x - x0||^2 + 1/2 ||y - y0||^2`.
pub fn objective(p: &PairPoint, x0: &Vector, y0: &Vector) -> Result<f64> {
    let dx = p.x().sub(x0)?;
    let dy = p.y().sub(y0)?;
    Ok(0.5 * (dx.norm_sq() + dy.norm_sq()))
}

pub fn project(x0: &Vector, y0: &Vector, tols: &Tolerances) -> Result<ProjectionResult> {
    tols.validate()?;
    if x0.dim() != y0.dim() {
        return Err(Error::DimensionMismatch {
            left: x0.dim(),
            right: y0.dim(),
        });
    }
    if !(x0.norm_sq() + y0.norm_sq()).is_finite() {
        return Err(Error::InvalidArgument(
            "norms overflow the floating-point range".into(),
        ));
    }
    let tag = classify(x0, y0, tols)?;
    let body = match tag {
        CaseTag::Orthogonal => Projection::Singleton {
            point: PairPoint::from_parts(x0.clone(), y0.clone()),
            lambda: 0.0,
            half_dist_sq: 0.0,
        },
        CaseTag::Generic => generic_projection(x0, y0)?,
        CaseTag::DegeneratePlus | CaseTag::DegenerateMinus => {
            Projection::Family(DegenerateFamily::new(x0, y0))
        }
    };
    Ok(ProjectionResult { tag, body })
}

fn generic_projection(x0: &Vector, y0: &Vector) -> Result<Projection> {
    let d = quadratic_data(x0, y0)?;
    let denom = d.s + d.p;
    let lambda = 2.0 * d.q / denom;
    let stable = StableQuotient::new(x0, y0, &d);

    let point = if stable.det.abs() >= ILL_CONDITIONED_BAND {
        let inv = 1.0 / stable.det;
        PairPoint::from_parts(
            Vector::from_raw(stable.num_x.iter().map(|v| v * inv).collect()),
            Vector::from_raw(stable.num_y.iter().map(|v| v * inv).collect()),
        )
    } else {
        // x is parallel to x0 - lambda y0; with U that line, the projection
        // is (P_U x0, P_{U^perp} y0).
        match Vector::from_raw(stable.num_x).normalized() {
            Some(u) => subspace_pair(&u, x0, y0),
            None => PairPoint::from_parts(Vector::zeros(x0.dim()), y0.clone()),
        }
    };
    if !point.is_finite() {
        return Err(Error::InvalidArgument(
            "projection overflowed the floating-point range".into(),
        ));
    }
    Ok(Projection::Singleton {
        point,
        lambda,
        half_dist_sq: 0.5 * lambda * d.q,
    })
}

/// `x0 - lambda y0`, `y0 - lambda x0` and `1 - lambda^2` at `lambda_-`.
/// For `|lambda_-| > 1/2` these are assembled from `x0 -+ y0` and
/// `1 -+ lambda` so that nothing cancels as `lambda_-` approaches `+-1`.
struct StableQuotient {
    num_x: Vec<f64>,
    num_y: Vec<f64>,
    det: f64,
}

impl StableQuotient {
    fn new(x0: &Vector, y0: &Vector, d: &QuadraticData) -> Self {
        let denom = d.s + d.p;
        let lambda = 2.0 * d.q / denom;
        let pairs = x0.iter().zip(y0.iter());
        if lambda.abs() <= 0.5 {
            StableQuotient {
                num_x: pairs.clone().map(|(a, b)| a - lambda * b).collect(),
                num_y: pairs.map(|(a, b)| b - lambda * a).collect(),
                det: 1.0 - lambda * lambda,
            }
        } else if d.q > 0.0 {
            // x0 - l y0 = (x0 - y0) + (1 - l) y0
            let one_minus = (d.diff_norm * d.diff_norm + d.p) / denom;
            StableQuotient {
                num_x: pairs
                    .clone()
                    .map(|(a, b)| (a - b) + one_minus * b)
                    .collect(),
                num_y: pairs.map(|(a, b)| (b - a) + one_minus * a).collect(),
                det: one_minus * (1.0 + lambda),
            }
        } else {
            // x0 - l y0 = (x0 + y0) - (1 + l) y0
            let one_plus = (d.sum_norm * d.sum_norm + d.p) / denom;
            StableQuotient {
                num_x: pairs.clone().map(|(a, b)| (a + b) - one_plus * b).collect(),
                num_y: pairs.map(|(a, b)| (a + b) - one_plus * a).collect(),
                det: one_plus * (1.0 - lambda),
            }
        }
    }
}

/// `(<u,x0>u, y0 - <u,y0>u)` for a unit `u` without the unit-norm check.
pub(crate) fn subspace_pair(u: &Vector, x0: &Vector, y0: &Vector) -> PairPoint {
    let (us, xs, ys) = (u.as_slice(), x0.as_slice(), y0.as_slice());
    let cx = dot(us, xs);
    let cy = dot(us, ys);
    let x = us.iter().map(|ui| cx * ui).collect();
    let y = ys.iter().zip(us).map(|(yi, ui)| yi - cy * ui).collect();
    PairPoint::from_parts(Vector::from_raw(x), Vector::from_raw(y))
}

/// `d_C^2(x0, y0)`.
///
/// In the generic case this is `(s - p) / 2`, evaluated as `lambda_- q`
/// (the same quantity after multiplying through by `s + p`).
pub fn distance_sq(x0: &Vector, y0: &Vector, tols: &Tolerances) -> Result<f64> {
    Ok(project(x0, y0, tols)?.dist_sq())
}

/// Projection for `X = R`, by direct comparison of `|x0|` and `|y0|`.
pub fn project_1d(x0: f64, y0: f64) -> Result<ProjectionResult> {
    let xv = Vector::new(vec![x0])?;
    let yv = Vector::new(vec![y0])?;
    if x0 == 0.0 || y0 == 0.0 {
        return Ok(ProjectionResult {
            tag: CaseTag::Orthogonal,
            body: Projection::Singleton {
                point: PairPoint::from_parts(xv, yv),
                lambda: 0.0,
                half_dist_sq: 0.0,
            },
        });
    }
    let (ax, ay) = (x0.abs(), y0.abs());
    if ax == ay {
        let tag = if x0 == y0 {
            CaseTag::DegeneratePlus
        } else {
            CaseTag::DegenerateMinus
        };
        return Ok(ProjectionResult {
            tag,
            body: Projection::Family(DegenerateFamily::new(&xv, &yv)),
        });
    }
    let (point, lambda, half_dist_sq) = if ax < ay {
        (
            PairPoint::from_parts(Vector::zeros(1), yv),
            x0 / y0,
            0.5 * x0 * x0,
        )
    } else {
        (
            PairPoint::from_parts(xv, Vector::zeros(1)),
            y0 / x0,
            0.5 * y0 * y0,
        )
    };
    Ok(ProjectionResult {
        tag: CaseTag::Generic,
        body: Projection::Singleton {
            point,
            lambda,
            half_dist_sq,
        },
    })
}
