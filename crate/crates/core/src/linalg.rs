//! Dense real linear algebra on `R^n`.
//!
//! Only what the projection formulas need: inner products, norms, the
//! rank-one projector onto `span{u}` and its complement, the reflector
//! `P_U - P_{U^perp}`, the inverse of the block operator
//! `[[I, lambda I], [lambda I, I]]`, and the spherical-coordinate map.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `||u||` from one for rank-one operators.
pub const UNIT_TOL: f64 = 1e-12;

/// `|1 - lambda^2| <= SINGULAR_BAND * (1 + lambda^2)` is treated as singular.
pub const SINGULAR_BAND: f64 = 1e-14;

/// A finite real coordinate vector of dimension at least one.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Vector(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// Zero vector; panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Vector(vec![0.0; dim])
    }

    /// `e_i` in `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    /// Wraps arithmetic output without re-validating. Overflow is caught by
    /// the public entry points that check `is_finite`.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|v| a * v).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Vector) -> Result<Vector> {
        check_dims(self, other)?;
        Ok(Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(s, o)| s + a * o)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.axpy(-1.0, other)
    }

    pub fn dist(&self, other: &Vector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Returns `self / ||self||`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        Vector::new(coords).map_err(serde::de::Error::custom)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(a: &Vector, b: &Vector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

fn check_unit(u: &Vector) -> Result<()> {
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// An element `(x, y)` of the product space `X x X`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct PairPoint {
    x: Vector,
    y: Vector,
}

#[derive(Deserialize)]
struct RawPair {
    x: Vector,
    y: Vector,
}

impl TryFrom<RawPair> for PairPoint {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        PairPoint::new(raw.x, raw.y)
    }
}

impl PairPoint {
    pub fn new(x: Vector, y: Vector) -> Result<Self> {
        check_dims(&x, &y)?;
        Ok(PairPoint { x, y })
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Result<Self> {
        Self::new(Vector::from_slice(x)?, Vector::from_slice(y)?)
    }

    pub(crate) fn from_parts(x: Vector, y: Vector) -> Self {
        debug_assert_eq!(x.dim(), y.dim());
        PairPoint { x, y }
    }

    pub fn zeros(dim: usize) -> Self {
        PairPoint::from_parts(Vector::zeros(dim), Vector::zeros(dim))
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn into_parts(self) -> (Vector, Vector) {
        (self.x, self.y)
    }

    /// `(y, x)`.
    pub fn swapped(&self) -> PairPoint {
        PairPoint::from_parts(self.y.clone(), self.x.clone())
    }

    /// `<x, y>`, the bilinear constraint value.
    pub fn cross_inner(&self) -> f64 {
        dot(self.x.as_slice(), self.y.as_slice())
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.norm_sq() + self.y.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(&self, a: f64) -> PairPoint {
        PairPoint::from_parts(self.x.scale(a), self.y.scale(a))
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &PairPoint) -> Result<PairPoint> {
        Ok(PairPoint::from_parts(
            self.x.axpy(a, &other.x)?,
            self.y.axpy(a, &other.y)?,
        ))
    }

    pub fn sub(&self, other: &PairPoint) -> Result<PairPoint> {
        self.axpy(-1.0, other)
    }

    /// Euclidean distance in the product space.
    pub fn dist(&self, other: &PairPoint) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Applies `map` to both components.
    pub fn map_components(&self, mut map: impl FnMut(&Vector) -> Vector) -> PairPoint {
        PairPoint::from_parts(map(&self.x), map(&self.y))
    }
}

impl fmt::Debug for PairPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    check_dims(x, y)?;
    Ok(dot(x.as_slice(), y.as_slice()))
}

/// `<u, z> u`, the orthogonal projection of `z` onto `span{u}`.
pub fn rank1_project(u: &Vector, z: &Vector) -> Result<Vector> {
    check_unit(u)?;
    let c = inner(u, z)?;
    Ok(u.scale(c))
}

/// `z - <u, z> u`, the projection onto the orthogonal complement of `span{u}`.
pub fn complement_project(u: &Vector, z: &Vector) -> Result<Vector> {
    check_unit(u)?;
    let c = inner(u, z)?;
    z.axpy(-c, u)
}

/// `2 <u, z> u - z`, the reflector `P_U - P_{U^perp}` for `U = span{u}`.
pub fn reflect(u: &Vector, z: &Vector) -> Result<Vector> {
    check_unit(u)?;
    let c = inner(u, z)?;
    Ok(Vector::from_raw(
        u.iter()
            .zip(z.iter())
            .map(|(ui, zi)| 2.0 * c * ui - zi)
            .collect(),
    ))
}

/// True when `|1 - lambda^2|` falls inside the singular guard band (NaN counts as singular).
pub fn is_singular_lambda(lambda: f64) -> bool {
    let l2 = lambda * lambda;
    lambda.is_nan() || (1.0 - l2).abs() <= SINGULAR_BAND * (1.0 + l2)
}

/// Solves `x + lambda y = a`, `y + lambda x = b` for `(x, y)` where
/// `rhs = (a, b)`, using the explicit inverse
/// `(1 - lambda^2)^{-1} [[I, -lambda I], [-lambda I, I]]`.
pub fn block_solve(lambda: f64, rhs: &PairPoint) -> Result<PairPoint> {
    if !lambda.is_finite() || is_singular_lambda(lambda) {
        return Err(Error::Singular { lambda });
    }
    let inv = 1.0 / (1.0 - lambda * lambda);
    let (a, b) = (rhs.x.as_slice(), rhs.y.as_slice());
    let x = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| inv * (ai - lambda * bi))
        .collect();
    let y = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| inv * (bi - lambda * ai))
        .collect();
    Ok(PairPoint::from_parts(
        Vector::from_raw(x),
        Vector::from_raw(y),
    ))
}

/// Radius and angles of a point on a sphere in `R^n`, `n >= 2`.
///
/// `thetas[0..n-2]` lie in `[0, pi]`; the last angle lies in `[0, 2pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalCoords {
    pub rho: f64,
    pub thetas: Vec<f64>,
}

impl SphericalCoords {
    pub fn new(rho: f64, thetas: Vec<f64>) -> Self {
        SphericalCoords { rho, thetas }
    }

    pub fn unit(thetas: Vec<f64>) -> Self {
        SphericalCoords { rho: 1.0, thetas }
    }
}

/// Maps spherical coordinates to Cartesian coordinates in `R^n`.
///
/// `x_i = rho cos(theta_i) prod_{j<i} sin(theta_j)` for `i <= n-2`, and the
/// last two coordinates use `cos`/`sin` of the azimuth `theta_{n-1}` times the
/// full sine product. Pole representations are not canonicalized.
pub fn sphere_point(sc: &SphericalCoords, n: usize) -> Result<Vector> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "spherical coordinates need n >= 2, got {n}"
        )));
    }
    if !(sc.rho > 0.0 && sc.rho.is_finite()) {
        return Err(Error::InvalidRadius(sc.rho));
    }
    if sc.thetas.len() != n - 1 {
        return Err(Error::AngleCount {
            dim: n,
            expected: n - 1,
            got: sc.thetas.len(),
        });
    }
    for (i, &t) in sc.thetas.iter().enumerate() {
        let in_range = if i + 1 < n - 1 {
            (0.0..=PI).contains(&t)
        } else {
            (0.0..TAU).contains(&t)
        };
        if !in_range {
            return Err(Error::AngleOutOfRange {
                index: i + 1,
                value: t,
            });
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut sin_prod = sc.rho;
    for &t in &sc.thetas[..n - 2] {
        out.push(sin_prod * t.cos());
        sin_prod *= t.sin();
    }
    let azimuth = sc.thetas[n - 2];
    out.push(sin_prod * azimuth.cos());
    out.push(sin_prod * azimuth.sin());
    Ok(Vector::from_raw(out))
}
