//! Independent checks on the closed-form projection.
//!
//! [`lagrangian_oracle`] enumerates every stationary point of the
//! constrained problem plus the canonical points and keeps the best feasible
//! one; its multiplier roots come from the textbook quadratic formula with
//! Newton polishing rather than the stable form used by [`crate::project`].
//!
//! [`subspace_oracle`] searches `(P_U x0, P_{U^perp} y0)` over `U = {0}` and
//! lines `U = span{u}`, which covers the cross because every orthogonal pair
//! lies in some `U x U^perp` with `dim U <= 1`. It only ever produces upper
//! bounds on the optimal value.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{
    candidate, feasibility_bound, membership, objective, project, Projection, Tolerances,
};
use crate::error::{Error, Result};
use crate::family::member_for_direction;
use crate::linalg::{dot, inner, sphere_point, PairPoint, SphericalCoords, Vector};
use crate::sphere::{random_unit, AngleLattice};

/// Objectives within `TIE_TOL * max(1, |best|)` of the best are ties.
pub const TIE_TOL: f64 = 1e-12;

/// Tie sets keep at most this many representative points.
pub const MAX_TIE_POINTS: usize = 8;

/// Largest sphere lattice the grid oracle will walk.
pub const MAX_GRID_POINTS: usize = 20_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Lagrangian,
    SubspaceGrid,
    SubspaceRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceMode {
    Grid,
    Random { seed: u64 },
}

/// Candidates whose objective ties the best one.
#[derive(Clone, Debug, PartialEq)]
pub struct TieSet {
    pub count: usize,
    pub points: Vec<PairPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub best_point: PairPoint,
    pub best_objective: f64,
    /// Oracle objective minus the closed-form objective.
    pub gap_vs_formula: f64,
    pub candidates_examined: usize,
    pub mode: OracleMode,
    pub ties: TieSet,
}

fn tie_threshold(best: f64) -> f64 {
    best + TIE_TOL * best.abs().max(1.0)
}

/// Objective of the closed-form projection (any member, for the family).
pub(crate) fn formula_objective(x0: &Vector, y0: &Vector) -> Result<f64> {
    let r = project(x0, y0, &Tolerances::default())?;
    match &r.body {
        Projection::Singleton { point, .. } => objective(point, x0, y0),
        Projection::Family(f) => Ok(f.half_dist_sq()),
    }
}

/// Roots of `q l^2 - s l + q` by the quadratic formula, each refined by
/// Newton steps on the same polynomial.
fn textbook_roots(q: f64, s: f64) -> [f64; 2] {
    let disc = (s * s - 4.0 * q * q).max(0.0).sqrt();
    let mut roots = [(s - disc) / (2.0 * q), (s + disc) / (2.0 * q)];
    for r in &mut roots {
        for _ in 0..6 {
            let slope = 2.0 * q * *r - s;
            if slope == 0.0 {
                break;
            }
            let step = (q * *r * *r - s * *r + q) / slope;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

pub fn lagrangian_oracle(x0: &Vector, y0: &Vector) -> Result<OracleReport> {
    let q = inner(x0, y0)?;
    let dim = x0.dim();
    let mut candidates = Vec::with_capacity(5);
    if q != 0.0 {
        let s = x0.norm_sq() + y0.norm_sq();
        for lambda in textbook_roots(q, s) {
            // lambda = +-1 only at x0 = +-y0, where the stationary system is singular.
            if let Ok(p) = candidate(lambda, x0, y0) {
                if p.is_finite() {
                    candidates.push(p);
                }
            }
        }
    }
    candidates.push(PairPoint::new(Vector::zeros(dim), y0.clone())?);
    candidates.push(PairPoint::new(x0.clone(), Vector::zeros(dim))?);
    candidates.push(PairPoint::new(x0.clone(), y0.clone())?);
    let examined = candidates.len();

    let tol = feasibility_bound(x0, y0);
    let scored: Vec<(f64, PairPoint)> = candidates
        .into_iter()
        .filter(|p| membership(p, tol))
        .map(|p| Ok((objective(&p, x0, y0)?, p)))
        .collect::<Result<_>>()?;

    let best = scored.iter().map(|(f, _)| *f).fold(f64::INFINITY, f64::min);
    let threshold = tie_threshold(best);
    let tied: Vec<PairPoint> = scored
        .into_iter()
        .filter(|(f, _)| *f <= threshold)
        .map(|(_, p)| p)
        .collect();
    let best_point = tied[0].clone();
    let best_objective = objective(&best_point, x0, y0)?;
    Ok(OracleReport {
        gap_vs_formula: best_objective - formula_objective(x0, y0)?,
        best_point,
        best_objective,
        candidates_examined: examined,
        mode: OracleMode::Lagrangian,
        ties: TieSet {
            count: tied.len(),
            points: tied,
        },
    })
}

/// Running tie state: the count and the lexicographically smallest
/// directions (`None`, i.e. `U = {0}`, sorts first).
#[derive(Default)]
struct Ties {
    count: usize,
    smallest: Vec<Option<Vec<f64>>>,
}

fn cmp_dir(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(a), Some(b)) => a
            .iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal),
    }
}

impl Ties {
    fn would_keep(&self, dir: &[f64]) -> bool {
        self.smallest.len() < MAX_TIE_POINTS
            || cmp_dir(&Some(dir.to_vec()), self.smallest.last().unwrap()) == Ordering::Less
    }

    fn insert(&mut self, dir: Option<Vec<f64>>) {
        let pos = self
            .smallest
            .binary_search_by(|probe| cmp_dir(probe, &dir))
            .unwrap_or_else(|e| e);
        self.smallest.insert(pos, dir);
        self.smallest.truncate(MAX_TIE_POINTS);
    }

    fn merge(mut self, other: Ties) -> Ties {
        self.count += other.count;
        for d in other.smallest {
            self.insert(d);
        }
        self
    }
}

/// `1/2 (||x0||^2 - <u,x0>^2 + <u,y0>^2)`: the objective of
/// `(<u,x0>u, y0 - <u,y0>u)` for unit `u`, by Pythagoras.
#[inline]
fn rank1_objective(half_x_sq: f64, ux: f64, uy: f64) -> f64 {
    half_x_sq - 0.5 * ux * ux + 0.5 * uy * uy
}

/// Walks an angle lattice carrying `<u, x0>` and `<u, y0>` from the last
/// coordinates inward, so each lattice point costs a few flops.
struct GridWalk<'a> {
    x: &'a [f64],
    y: &'a [f64],
    lattice: AngleLattice,
    cos_polar: Vec<f64>,
    sin_polar: Vec<f64>,
    half_x_sq: f64,
}

impl<'a> GridWalk<'a> {
    fn new(x0: &'a Vector, y0: &'a Vector, lattice: AngleLattice) -> Self {
        let m = lattice.per_angle();
        let (sin_polar, cos_polar) = (0..m).map(|k| lattice.polar(k).sin_cos()).unzip();
        GridWalk {
            x: x0.as_slice(),
            y: y0.as_slice(),
            lattice,
            cos_polar,
            sin_polar,
            half_x_sq: 0.5 * x0.norm_sq(),
        }
    }

    /// Visits every lattice point with azimuth digit `k`.
    fn azimuth_slice(&self, k: usize, visit: &mut impl FnMut(f64, &[usize])) {
        let n = self.lattice.dim();
        let (s, c) = self.lattice.azimuth(k).sin_cos();
        let gx = self.x[n - 2] * c + self.x[n - 1] * s;
        let gy = self.y[n - 2] * c + self.y[n - 1] * s;
        let mut digits = vec![0usize; n - 1];
        digits[n - 2] = k;
        self.descend(n as isize - 3, gx, gy, &mut digits, visit);
    }

    fn descend(
        &self,
        level: isize,
        gx: f64,
        gy: f64,
        digits: &mut [usize],
        visit: &mut impl FnMut(f64, &[usize]),
    ) {
        if level < 0 {
            visit(rank1_objective(self.half_x_sq, gx, gy), digits);
            return;
        }
        let j = level as usize;
        let (xj, yj) = (self.x[j], self.y[j]);
        if j == 0 {
            for k in 0..self.cos_polar.len() {
                let (c, s) = (self.cos_polar[k], self.sin_polar[k]);
                digits[0] = k;
                visit(
                    rank1_objective(self.half_x_sq, xj * c + s * gx, yj * c + s * gy),
                    digits,
                );
            }
            return;
        }
        for k in 0..self.cos_polar.len() {
            let (c, s) = (self.cos_polar[k], self.sin_polar[k]);
            digits[j] = k;
            self.descend(level - 1, xj * c + s * gx, yj * c + s * gy, digits, visit);
        }
    }

    fn direction(&self, digits: &[usize]) -> Vec<f64> {
        let n = self.lattice.dim();
        let angles = digits
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i + 2 == n {
                    self.lattice.azimuth(k)
                } else {
                    self.lattice.polar(k)
                }
            })
            .collect();
        sphere_point(&SphericalCoords::unit(angles), n)
            .expect("lattice angles are in range")
            .into_vec()
    }
}

fn grid_scan(x0: &Vector, y0: &Vector, lattice: AngleLattice) -> (f64, Ties) {
    let walk = GridWalk::new(x0, y0, lattice);
    let m = lattice.per_angle();
    let base = rank1_objective(walk.half_x_sq, 0.0, 0.0);

    let best = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut local = f64::INFINITY;
            walk.azimuth_slice(k, &mut |f, _| local = local.min(f));
            local
        })
        .reduce(|| base, f64::min);

    let threshold = tie_threshold(best);
    let mut ties = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut local = Ties::default();
            walk.azimuth_slice(k, &mut |f, digits| {
                if f <= threshold {
                    local.count += 1;
                    let dir = walk.direction(digits);
                    if local.would_keep(&dir) {
                        local.insert(Some(dir));
                    }
                }
            });
            local
        })
        .reduce(Ties::default, Ties::merge);
    if base <= threshold {
        ties.count += 1;
        ties.insert(None);
    }
    (best, ties)
}

fn direction_scan(x0: &Vector, y0: &Vector, dirs: &[Vector]) -> (f64, Ties) {
    let half_x_sq = 0.5 * x0.norm_sq();
    let score = |u: &Vector| {
        rank1_objective(
            half_x_sq,
            dot(u.as_slice(), x0.as_slice()),
            dot(u.as_slice(), y0.as_slice()),
        )
    };
    let base = rank1_objective(half_x_sq, 0.0, 0.0);
    let best = dirs.iter().map(score).fold(base, f64::min);
    let threshold = tie_threshold(best);
    let mut ties = Ties::default();
    if base <= threshold {
        ties.count += 1;
        ties.insert(None);
    }
    for u in dirs {
        if score(u) <= threshold {
            ties.count += 1;
            if ties.would_keep(u.as_slice()) {
                ties.insert(Some(u.as_slice().to_vec()));
            }
        }
    }
    (best, ties)
}

/// Best `(P_U x0, P_{U^perp} y0)` over `U = {0}` and sampled lines.
///
/// In grid mode `resolution` is the number of lattice values per angle; in
/// random mode it is the number of seeded uniform directions. In `R` the
/// search is exhaustive and `resolution` is ignored.
pub fn subspace_oracle(
    x0: &Vector,
    y0: &Vector,
    resolution: usize,
    mode: SubspaceMode,
) -> Result<OracleReport> {
    if x0.dim() != y0.dim() {
        return Err(Error::DimensionMismatch {
            left: x0.dim(),
            right: y0.dim(),
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument(
            "oracle resolution must be positive".into(),
        ));
    }
    let dim = x0.dim();
    let report_mode = match mode {
        SubspaceMode::Grid => OracleMode::SubspaceGrid,
        SubspaceMode::Random { .. } => OracleMode::SubspaceRandom,
    };

    let (examined, ties) = if dim == 1 {
        // Lines in R: only span{1}.
        let dirs = [Vector::from_raw(vec![1.0])];
        (2, direction_scan(x0, y0, &dirs).1)
    } else {
        match mode {
            SubspaceMode::Grid => {
                let lattice = AngleLattice::new(dim, resolution)?;
                let len = lattice
                    .len()
                    .filter(|&n| n <= MAX_GRID_POINTS)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "grid of {resolution} points per angle in dimension {dim} is too large; use random mode"
                        ))
                    })?;
                (len + 1, grid_scan(x0, y0, lattice).1)
            }
            SubspaceMode::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dirs: Vec<Vector> = (0..resolution)
                    .map(|_| random_unit(dim, &mut rng))
                    .collect();
                (resolution + 1, direction_scan(x0, y0, &dirs).1)
            }
        }
    };

    let to_point = |dir: &Option<Vec<f64>>| -> Result<PairPoint> {
        match dir {
            None => PairPoint::new(Vector::zeros(dim), y0.clone()),
            Some(u) => member_for_direction(x0, y0, &Vector::new(u.clone())?),
        }
    };
    let points = ties
        .smallest
        .iter()
        .map(to_point)
        .collect::<Result<Vec<_>>>()?;
    let best_point = points[0].clone();
    let best_objective = objective(&best_point, x0, y0)?;
    Ok(OracleReport {
        gap_vs_formula: best_objective - formula_objective(x0, y0)?,
        best_point,
        best_objective,
        candidates_examined: examined,
        mode: report_mode,
        ties: TieSet {
            count: ties.count,
            points,
        },
    })
}

/// Objectives of every rank-one candidate on a lattice (or the two lines in
/// `R`), for spread checks in the degenerate case.
pub fn subspace_objectives(x0: &Vector, y0: &Vector, resolution: usize) -> Result<Vec<f64>> {
    let dim = x0.dim();
    if dim == 1 {
        let u = Vector::from_raw(vec![1.0]);
        return Ok(vec![objective(&member_for_direction(x0, y0, &u)?, x0, y0)?]);
    }
    let lattice = AngleLattice::new(dim, resolution)?;
    lattice
        .iter()
        .map(|u| objective(&member_for_direction(x0, y0, &u)?, x0, y0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::membership;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn textbook_roots_polish_small_root() {
        // q tiny: the unpolished small root cancels to zero.
        let [lo, hi] = textbook_roots(1e-9, 2.0);
        assert!((lo - 5e-10).abs() < 1e-24, "{lo}");
        assert!((lo * hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_examples() {
        let r = lagrangian_oracle(&v(&[2.0]), &v(&[1.0])).unwrap();
        assert_eq!(
            r.best_point,
            PairPoint::from_slices(&[2.0], &[0.0]).unwrap()
        );
        assert_eq!(r.best_objective, 0.5);
        assert_eq!(r.gap_vs_formula, 0.0);
        assert_eq!(r.mode, OracleMode::Lagrangian);

        let r = lagrangian_oracle(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(
            r.best_point,
            PairPoint::from_slices(&[1.0, 0.0], &[0.0, 1.0]).unwrap()
        );
        assert_eq!(r.best_objective, 0.0);

        let x0 = v(&[1.0, 1.0]);
        let r = lagrangian_oracle(&x0, &x0).unwrap();
        assert_eq!(r.best_objective, 1.0);
        assert_eq!(
            r.best_point,
            PairPoint::from_slices(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
        );
        assert_eq!(r.ties.count, 2);
        assert_eq!(
            r.ties.points[1],
            PairPoint::from_slices(&[1.0, 1.0], &[0.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn subspace_exact_in_one_dimension() {
        for (a, b) in [(2.0, 1.0), (0.5, -3.0), (-1.0, 0.0)] {
            let (x0, y0) = (v(&[a]), v(&[b]));
            let r = subspace_oracle(&x0, &y0, 1, SubspaceMode::Grid).unwrap();
            assert_eq!(r.candidates_examined, 2);
            assert!(
                r.gap_vs_formula.abs() < 1e-15,
                "{a} {b}: {}",
                r.gap_vs_formula
            );
        }
    }

    #[test]
    fn subspace_grid_close_on_example() {
        let r =
            subspace_oracle(&v(&[1.0, 2.0]), &v(&[3.0, 1.0]), 10_000, SubspaceMode::Grid).unwrap();
        assert!(r.gap_vs_formula >= -1e-9);
        assert!(r.gap_vs_formula <= 1e-6, "{}", r.gap_vs_formula);
        assert!(membership(&r.best_point, 1e-9));
    }

    #[test]
    fn grid_walk_matches_direct_evaluation() {
        let x0 = v(&[0.3, -0.8, 0.5, 0.1]);
        let y0 = v(&[-0.2, 0.4, 0.9, -0.6]);
        let lattice = AngleLattice::new(4, 5).unwrap();
        let walk = GridWalk::new(&x0, &y0, lattice);
        let mut seen = 0;
        for k in 0..5 {
            walk.azimuth_slice(k, &mut |f, digits| {
                let u = Vector::new(walk.direction(digits)).unwrap();
                let p = member_for_direction(&x0, &y0, &u).unwrap();
                let direct = objective(&p, &x0, &y0).unwrap();
                assert!((f - direct).abs() < 1e-14, "{f} vs {direct}");
                seen += 1;
            });
        }
        assert_eq!(seen, 125);
    }

    #[test]
    fn degenerate_subspace_candidates_all_tie() {
        let x0 = v(&[1.0, 1.0]);
        for f in subspace_objectives(&x0, &x0, 37).unwrap() {
            assert!((f - 1.0).abs() < 1e-15);
        }
        let r = subspace_oracle(&x0, &x0, 37, SubspaceMode::Grid).unwrap();
        assert_eq!(r.ties.count, 38);
        assert_eq!(r.ties.points.len(), MAX_TIE_POINTS);
        // U = {0} is the smallest direction.
        assert_eq!(
            r.best_point,
            PairPoint::from_slices(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn random_mode_is_deterministic() {
        let x0 = v(&[0.3, -0.8, 0.5]);
        let y0 = v(&[-0.2, 0.4, 0.9]);
        let a = subspace_oracle(&x0, &y0, 500, SubspaceMode::Random { seed: 11 }).unwrap();
        let b = subspace_oracle(&x0, &y0, 500, SubspaceMode::Random { seed: 11 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mode, OracleMode::SubspaceRandom);
        assert!(a.gap_vs_formula >= -1e-9);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let x0 = v(&[0.3; 8]);
        let y0 = v(&[-0.2; 8]);
        assert!(subspace_oracle(&x0, &y0, 10_000, SubspaceMode::Grid).is_err());
        assert!(subspace_oracle(&x0, &y0, 0, SubspaceMode::Grid).is_err());
    }
}
