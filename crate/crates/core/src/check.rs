//! One-input verification: runs the projection, both oracles and the
//! algebraic invariants, and reports each as data rather than as an error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cross::{
    candidate, feasibility_bound, objective, project, solve_lambda, CaseTag, Projection,
    ProjectionResult, Selection, Tolerances,
};
use crate::error::Result;
use crate::family::{family_enumerate, FamilyMode};
use crate::linalg::{complement_project, inner, rank1_project, PairPoint, Vector};
use crate::oracle::{lagrangian_oracle, subspace_oracle, SubspaceMode};
use crate::sphere::random_unit;

/// Deliberate defects for confirming that the checks catch them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Use the larger multiplier root in the generic case.
    LambdaPlus,
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub tols: Tolerances,
    /// Points per angle for the grid oracle (`dim <= 2`), sample count for
    /// the random oracle otherwise.
    pub resolution: usize,
    pub seed: u64,
    /// Random multipliers per input for the closed-form identities.
    pub lambda_samples: usize,
    pub fault: Option<Fault>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tols: Tolerances::default(),
            resolution: 256,
            seed: 0,
            lambda_samples: 20,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckVerdict {
    pub tag: Option<CaseTag>,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckVerdict {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Uniform `[-1, 1]^dim` sample.
pub fn uniform_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_raw((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

/// Generator for trial `trial` of dimension `dim` under `seed`; independent
/// of how trials are scheduled.
pub fn trial_rng(seed: u64, dim: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((dim as u64) << 40) ^ trial);
    rng
}

/// The projection as computed under an optional injected fault.
pub fn faulty_project(
    x0: &Vector,
    y0: &Vector,
    tols: &Tolerances,
    fault: Option<Fault>,
) -> Result<ProjectionResult> {
    let mut r = project(x0, y0, tols)?;
    if let (Some(Fault::LambdaPlus), CaseTag::Generic) = (fault, r.tag) {
        let roots = solve_lambda(x0, y0)?;
        let lambda = roots.lambda_plus;
        r.body = Projection::Singleton {
            point: candidate(lambda, x0, y0)?,
            lambda,
            half_dist_sq: 0.5 * lambda * inner(x0, y0)?,
        };
    }
    Ok(r)
}

/// Householder reflection `z - 2 <v, z> v` for a unit `v`.
pub fn householder(v: &Vector, z: &Vector) -> Vector {
    let c = inner(v, z).expect("dimensions agree");
    z.axpy(-2.0 * c, v).expect("dimensions agree")
}

struct Recorder {
    outcomes: Vec<CheckOutcome>,
}

impl Recorder {
    fn push(&mut self, name: &'static str, residual: f64, threshold: f64) {
        self.outcomes.push(CheckOutcome {
            name,
            passed: residual <= threshold,
            residual,
            threshold,
        });
    }
}

fn pair_dist(a: &PairPoint, b: &PairPoint) -> f64 {
    a.dist(b).unwrap_or(f64::INFINITY)
}

/// Largest point distance between two results with matching shape, or
/// infinity when tags or shapes disagree.
fn result_dist(a: &ProjectionResult, b: &ProjectionResult) -> f64 {
    if a.tag != b.tag {
        return f64::INFINITY;
    }
    let (pa, pb) = (a.points(), b.points());
    if pa.len() != pb.len() {
        return f64::INFINITY;
    }
    pa.iter()
        .zip(&pb)
        .map(|(p, q)| pair_dist(p, q))
        .fold(0.0, f64::max)
}

pub fn check(x0: &Vector, y0: &Vector, config: &CheckConfig) -> Result<CheckVerdict> {
    let dim = x0.dim();
    inner(x0, y0)?;
    let mut rec = Recorder {
        outcomes: Vec::new(),
    };
    let tols = &config.tols;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 1.0 + (x0.norm_sq() + y0.norm_sq()).sqrt();
    let feas = feasibility_bound(x0, y0);

    let result = match faulty_project(x0, y0, tols, config.fault) {
        Ok(r) => r,
        Err(_) => {
            rec.push("projection", f64::INFINITY, 0.0);
            return Ok(CheckVerdict {
                tag: None,
                outcomes: rec.outcomes,
            });
        }
    };
    rec.push("projection", 0.0, 0.0);
    let tag = result.tag;
    let formula_obj = match &result.body {
        Projection::Singleton { point, .. } => objective(point, x0, y0)?,
        Projection::Family(f) => f.half_dist_sq(),
    };

    // Feasibility of every produced point, family samples included.
    let mut produced: Vec<PairPoint> = result.points().into_iter().cloned().collect();
    if let Some(fam) = result.family() {
        let members = family_enumerate(x0, y0, 16, FamilyMode::Grid, tols)?;
        let objs = members
            .iter()
            .map(|m| objective(&m.point, x0, y0))
            .collect::<Result<Vec<_>>>()?;
        let spread = objs
            .iter()
            .map(|f| rel_diff(*f, fam.half_dist_sq()))
            .fold(0.0, f64::max);
        rec.push("family_objective", spread, 1e-10);
        produced.extend(members.into_iter().map(|m| m.point));
    }
    let worst = produced
        .iter()
        .map(|p| p.cross_inner().abs())
        .fold(0.0, f64::max);
    rec.push("feasibility", worst / feas, 1.0);
    rec.push(
        "half_dist_sq_nonnegative",
        (-result.half_dist_sq()).max(0.0),
        0.0,
    );

    // Oracles.
    let lag = lagrangian_oracle(x0, y0)?;
    rec.push(
        "lagrangian_optimality",
        formula_obj - lag.best_objective,
        1e-9,
    );
    if tag == CaseTag::Generic {
        rec.push(
            "lagrangian_objective",
            rel_diff(lag.best_objective, formula_obj),
            1e-10,
        );
        let point = result.select(Selection::KeepY);
        rec.push(
            "lagrangian_point",
            pair_dist(&lag.best_point, point) / scale,
            1e-8,
        );
    }
    let mode = if dim <= 2 {
        SubspaceMode::Grid
    } else {
        SubspaceMode::Random { seed: config.seed }
    };
    let sub = subspace_oracle(x0, y0, config.resolution, mode)?;
    rec.push("subspace_envelope", formula_obj - sub.best_objective, 1e-9);

    let q = inner(x0, y0)?;
    let s = x0.norm_sq() + y0.norm_sq();
    if q != 0.0 {
        let roots = solve_lambda(x0, y0)?;
        rec.push(
            "vieta",
            (roots.lambda_minus * roots.lambda_plus - 1.0).abs(),
            1e-10,
        );
    }

    if let Projection::Singleton {
        point,
        lambda,
        half_dist_sq,
    } = &result.body
    {
        if tag == CaseTag::Generic {
            let rx = point.x().axpy(*lambda, point.y())?.sub(x0)?.norm();
            let ry = point.y().axpy(*lambda, point.x())?.sub(y0)?.norm();
            rec.push("stationarity", rx.max(ry) / scale, 1e-10);
            rec.push(
                "objective_identity",
                rel_diff(formula_obj, 0.5 * lambda * q),
                1e-10,
            );
            rec.push(
                "half_dist_identity",
                rel_diff(*half_dist_sq, formula_obj),
                1e-10,
            );
            // (P_U x0, P_{U^perp} y0) with U = span{x}, or equivalently
            // U = span{y}^perp; the longer component fixes the line reliably.
            let reduced = if point.x().norm() >= point.y().norm() {
                match point.x().normalized() {
                    Some(u) => PairPoint::new(rank1_project(&u, x0)?, complement_project(&u, y0)?)?,
                    None => PairPoint::new(Vector::zeros(dim), Vector::zeros(dim))?,
                }
            } else {
                let v = point.y().normalized().expect("longer component is nonzero");
                PairPoint::new(complement_project(&v, x0)?, rank1_project(&v, y0)?)?
            };
            rec.push(
                "subspace_reduction",
                pair_dist(&reduced, point) / scale,
                1e-9,
            );
        }
    }

    // Identities valid for every multiplier off +-1.
    if tag != CaseTag::Orthogonal {
        let mut worst_obj: f64 = 0.0;
        let mut worst_orth: f64 = 0.0;
        let mut mismatch = 0usize;
        for _ in 0..config.lambda_samples {
            let lambda = loop {
                let l: f64 = rng.random_range(-2.0..=2.0);
                if (1.0 - l * l).abs() >= 0.1 {
                    break l;
                }
            };
            let p = candidate(lambda, x0, y0)?;
            let closed = lambda * lambda / (2.0 * (1.0 - lambda * lambda).powi(2))
                * ((1.0 + lambda * lambda) * s - 4.0 * lambda * q);
            worst_obj = worst_obj.max(rel_diff(objective(&p, x0, y0)?, closed));

            let lhs = p.cross_inner() * (1.0 - lambda * lambda).powi(2);
            let rhs = (1.0 + lambda * lambda) * q - lambda * s;
            worst_orth = worst_orth.max((lhs - rhs).abs() / scale.powi(2));
            let zero_tol = 1e-10 * scale.powi(2);
            if (p.cross_inner().abs() <= zero_tol) != (rhs.abs() <= zero_tol) {
                mismatch += 1;
            }
        }
        rec.push("closed_form_objective", worst_obj, 1e-10);
        rec.push("orthogonality_identity", worst_orth, 1e-10);
        rec.push("orthogonality_biconditional", mismatch as f64, 0.0);
        if q != 0.0 && tag == CaseTag::Generic {
            let roots = solve_lambda(x0, y0)?;
            let mut worst_root: f64 = 0.0;
            for lambda in [roots.lambda_minus, roots.lambda_plus] {
                if let Ok(p) = candidate(lambda, x0, y0) {
                    let rhs = (1.0 + lambda * lambda) * q - lambda * s;
                    worst_root = worst_root
                        .max(p.cross_inner().abs() / feas)
                        .max(rhs.abs() / (1e-10 * scale.powi(2)));
                }
            }
            rec.push("orthogonality_at_roots", worst_root, 1.0);
            if let (Ok(pm), Ok(pp)) = (
                candidate(roots.lambda_minus, x0, y0),
                candidate(roots.lambda_plus, x0, y0),
            ) {
                let (fm, fp) = (objective(&pm, x0, y0)?, objective(&pp, x0, y0)?);
                rec.push("plus_root_worse", if fp > fm { 0.0 } else { fm - fp }, 0.0);
            }
        }
    }

    // Symmetries.
    let swapped = faulty_project(y0, x0, tols, config.fault)?;
    let swap_dist = if swapped.tag != tag {
        f64::INFINITY
    } else {
        match (&result.body, &swapped.body) {
            (
                Projection::Singleton {
                    point: a,
                    lambda: la,
                    ..
                },
                Projection::Singleton {
                    point: b,
                    lambda: lb,
                    ..
                },
            ) => pair_dist(&a.swapped(), b).max((la - lb).abs()),
            (Projection::Family(a), Projection::Family(b)) => {
                // Swapping exchanges the two canonical selections.
                pair_dist(&a.canonical()[0].swapped(), &b.canonical()[1])
                    .max(pair_dist(&a.canonical()[1].swapped(), &b.canonical()[0]))
            }
            _ => f64::INFINITY,
        }
    };
    rec.push("swap_symmetry", swap_dist / scale, 1e-9);

    let t = 2.0;
    let scaled = faulty_project(&x0.scale(t), &y0.scale(t), tols, config.fault)?;
    let mut hom = result_dist(&result.map_points(|p| p.scale(t)), &scaled) / (t * scale);
    if let (Some(a), Some(b)) = (result.lambda(), scaled.lambda()) {
        hom = hom.max((a - b).abs());
    }
    rec.push("homogeneity", hom, 1e-9);

    let v = random_unit(dim, &mut rng);
    let rotated = faulty_project(
        &householder(&v, x0),
        &householder(&v, y0),
        tols,
        config.fault,
    )?;
    let inv = result_dist(
        &result.map_points(|p| p.map_components(|z| householder(&v, z))),
        &rotated,
    ) / scale;
    rec.push("orthogonal_invariance", inv, 1e-9);

    Ok(CheckVerdict {
        tag: Some(tag),
        outcomes: rec.outcomes,
    })
}
