//! Direction samples on the unit sphere.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{sphere_point, SphericalCoords, Vector};

/// Uniform lattice in the spherical-coordinate box of `R^n`, `n >= 2`.
///
/// Polar angles take the midpoints `pi (k + 1/2) / m`, which keeps the
/// poles (where many angle tuples collapse to one point) out of the
/// lattice; the azimuth takes `2 pi k / m`. Lattice index `i` is read in
/// base `m` with `theta_1` as the least significant digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngleLattice {
    dim: usize,
    per_angle: usize,
}

impl AngleLattice {
    pub fn new(dim: usize, per_angle: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "angle lattice needs dimension >= 2, got {dim}"
            )));
        }
        if per_angle == 0 {
            return Err(Error::InvalidArgument(
                "lattice resolution must be positive".into(),
            ));
        }
        Ok(AngleLattice { dim, per_angle })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_angle(&self) -> usize {
        self.per_angle
    }

    /// `m^(n-1)`, or `None` on overflow.
    pub fn len(&self) -> Option<usize> {
        self.per_angle.checked_pow((self.dim - 1) as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn polar(&self, k: usize) -> f64 {
        PI * (k as f64 + 0.5) / self.per_angle as f64
    }

    pub fn azimuth(&self, k: usize) -> f64 {
        TAU * k as f64 / self.per_angle as f64
    }

    pub fn angles(&self, mut index: usize) -> Vec<f64> {
        let m = self.per_angle;
        let mut out = Vec::with_capacity(self.dim - 1);
        for slot in 0..self.dim - 1 {
            let k = index % m;
            index /= m;
            out.push(if slot + 2 == self.dim {
                self.azimuth(k)
            } else {
                self.polar(k)
            });
        }
        out
    }

    pub fn point(&self, index: usize) -> Vector {
        sphere_point(&SphericalCoords::unit(self.angles(index)), self.dim)
            .expect("lattice angles are in range")
    }

    /// Lattice directions in index order; unbounded lattices yield nothing
    /// past `usize::MAX`.
    pub fn iter(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.len().unwrap_or(usize::MAX)).map(move |i| self.point(i))
    }
}

/// The unit sphere of `R`: `{1, -1}`.
pub fn unit_sphere_1d() -> [Vector; 2] {
    [Vector::from_raw(vec![1.0]), Vector::from_raw(vec![-1.0])]
}

/// A uniformly distributed unit vector: normalized standard normal draws.
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    loop {
        let draw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = Vector::from_raw(draw).normalized() {
            return u;
        }
    }
}
