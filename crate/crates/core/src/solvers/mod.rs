//! Splitting methods for `find z in C n B`, using the cross projection as
//! the nonconvex prox step.

mod instance;
mod problem;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cross::{project, CaseTag, ProjectionResult, Selection, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::PairPoint;

pub use instance::{generate_instance, Instance, InstanceKind};
pub use problem::{project_orthant_pair, AffineSet, BoxSet, Constraint, FeasibilityProblem};

/// How to pick a single point when `P_C` is set-valued.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    #[default]
    KeepY,
    KeepX,
    /// `KeepY` on the first degenerate iterate, then flip each time.
    Alternate,
}

impl SelectionPolicy {
    fn selector(self) -> impl FnMut() -> Selection {
        let mut next = Selection::KeepY;
        move || match self {
            SelectionPolicy::KeepY => Selection::KeepY,
            SelectionPolicy::KeepX => Selection::KeepX,
            SelectionPolicy::Alternate => {
                let out = next;
                next = match next {
                    Selection::KeepY => Selection::KeepX,
                    Selection::KeepX => Selection::KeepY,
                };
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AlternatingProjections,
    DouglasRachford,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop once `d_C + d_B` of the monitored point is at most this.
    pub tol: f64,
    pub selection: SelectionPolicy,
    pub tols: Tolerances,
    /// Keep every `record_every`-th iterate in the trace (first and last always kept).
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 1000,
            tol: 1e-10,
            selection: SelectionPolicy::KeepY,
            tols: Tolerances::default(),
            record_every: 1,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        self.tols.validate()?;
        if self.max_iter == 0 || self.record_every == 0 {
            return Err(Error::InvalidArgument(
                "max_iter and record_every must be positive".into(),
            ));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid tolerance {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// The monitored point: the iterate for AP, the shadow `P_C z` for DR.
    pub point: PairPoint,
    pub residual_c: f64,
    pub residual_b: f64,
    pub case: CaseTag,
    /// Present when `P_C` was set-valued at this step.
    pub selection: Option<Selection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub method: Method,
    pub config: SolverConfig,
    pub records: Vec<TraceRecord>,
    pub converged: bool,
    /// Number of residual evaluations performed.
    pub iterations: usize,
    /// A point of `C`: the selected `P_C` of the last monitored point.
    pub final_point: PairPoint,
    pub degenerate_steps: usize,
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    method: Method,
    converged: bool,
    iterations: usize,
    final_residual: Option<f64>,
    degenerate_steps: usize,
    final_point: &'a PairPoint,
    config: &'a SolverConfig,
}

impl SolverTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.last().map(|r| r.residual_c + r.residual_b)
    }

    /// `iteration,residual_C,residual_B,case_tag`, one row per kept record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,residual_C,residual_B,case_tag\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{}",
                r.iteration, r.residual_c, r.residual_b, r.case
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let summary = TraceSummary {
            method: self.method,
            converged: self.converged,
            iterations: self.iterations,
            final_residual: self.final_residual(),
            degenerate_steps: self.degenerate_steps,
            final_point: &self.final_point,
            config: &self.config,
        };
        serde_json::to_string_pretty(&summary).expect("trace summary serializes")
    }
}

struct Recorder {
    trace: SolverTrace,
    pending: Option<TraceRecord>,
}

impl Recorder {
    fn new(method: Method, config: &SolverConfig, start: &PairPoint) -> Self {
        Recorder {
            trace: SolverTrace {
                method,
                config: config.clone(),
                records: Vec::new(),
                converged: false,
                iterations: 0,
                final_point: start.clone(),
                degenerate_steps: 0,
            },
            pending: None,
        }
    }

    fn push(&mut self, rec: TraceRecord) {
        self.trace.iterations = rec.iteration;
        if rec.selection.is_some() {
            self.trace.degenerate_steps += 1;
        }
        if rec.iteration == 1 || (rec.iteration - 1).is_multiple_of(self.trace.config.record_every)
        {
            self.trace.records.push(rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }
    }

    fn finish(mut self, converged: bool, final_point: PairPoint) -> SolverTrace {
        if let Some(rec) = self.pending.take() {
            self.trace.records.push(rec);
        }
        self.trace.converged = converged;
        self.trace.final_point = final_point;
        self.trace
    }

    fn diverged(self, iteration: usize, last: PairPoint) -> Error {
        Error::Diverged {
            iteration,
            trace: Box::new(self.finish(false, last)),
        }
    }
}

fn check_start(
    problem: &FeasibilityProblem,
    start: &PairPoint,
    config: &SolverConfig,
) -> Result<()> {
    config.validate()?;
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            left: problem.dim(),
            right: start.dim(),
        });
    }
    Ok(())
}

fn project_pair(p: &PairPoint, tols: &Tolerances) -> Result<ProjectionResult> {
    project(p.x(), p.y(), tols)
}

/// `z_{k+1} = P_B(P_C(z_k))`, residual `d_C(z_k) + d_B(z_k)`.
pub fn alternating_projections(
    problem: &FeasibilityProblem,
    start: &PairPoint,
    config: &SolverConfig,
) -> Result<SolverTrace> {
    check_start(problem, start, config)?;
    let mut select = config.selection.selector();
    let mut rec = Recorder::new(Method::AlternatingProjections, config, start);
    let mut z = start.clone();
    for k in 1..=config.max_iter {
        let pc = match project_pair(&z, &config.tols) {
            Ok(pc) => pc,
            Err(_) => return Err(rec.diverged(k, z)),
        };
        let selection = pc.family().map(|_| select());
        let chosen = pc.select(selection.unwrap_or_default()).clone();
        let residual_c = pc.dist_sq().sqrt();
        let residual_b = problem.distance(&z)?;
        rec.push(TraceRecord {
            iteration: k,
            point: z.clone(),
            residual_c,
            residual_b,
            case: pc.tag,
            selection,
        });
        if residual_c + residual_b <= config.tol {
            return Ok(rec.finish(true, chosen));
        }
        if k == config.max_iter {
            return Ok(rec.finish(false, chosen));
        }
        z = problem.project(&chosen)?;
        if !z.is_finite() {
            return Err(rec.diverged(k, z));
        }
    }
    unreachable!("max_iter is positive")
}

/// `z_{k+1} = (z_k + R_B R_C z_k) / 2`, monitored through the shadow
/// `s_k = P_C z_k` with residual `d_C(s_k) + d_B(s_k)`.
pub fn douglas_rachford(
    problem: &FeasibilityProblem,
    start: &PairPoint,
    config: &SolverConfig,
) -> Result<SolverTrace> {
    check_start(problem, start, config)?;
    let mut select = config.selection.selector();
    let mut rec = Recorder::new(Method::DouglasRachford, config, start);
    let mut z = start.clone();
    for k in 1..=config.max_iter {
        let pc = match project_pair(&z, &config.tols) {
            Ok(pc) => pc,
            Err(_) => return Err(rec.diverged(k, z)),
        };
        let selection = pc.family().map(|_| select());
        let shadow = pc.select(selection.unwrap_or_default()).clone();
        let shadow_pc = match project_pair(&shadow, &config.tols) {
            Ok(p) => p,
            Err(_) => return Err(rec.diverged(k, z)),
        };
        let residual_c = shadow_pc.dist_sq().sqrt();
        let residual_b = problem.distance(&shadow)?;
        rec.push(TraceRecord {
            iteration: k,
            point: shadow.clone(),
            residual_c,
            residual_b,
            case: pc.tag,
            selection,
        });
        if residual_c + residual_b <= config.tol || k == config.max_iter {
            return Ok(rec.finish(residual_c + residual_b <= config.tol, shadow));
        }
        let reflected_c = shadow.scale(2.0).sub(&z)?;
        let pb = problem.project(&reflected_c)?;
        let reflected_b = pb.scale(2.0).sub(&reflected_c)?;
        z = z.axpy(1.0, &reflected_b)?.scale(0.5);
        if !z.is_finite() {
            return Err(rec.diverged(k, z));
        }
    }
    unreachable!("max_iter is positive")
}

pub fn solve(
    method: Method,
    problem: &FeasibilityProblem,
    start: &PairPoint,
    config: &SolverConfig,
) -> Result<SolverTrace> {
    match method {
        Method::AlternatingProjections => alternating_projections(problem, start, config),
        Method::DouglasRachford => douglas_rachford(problem, start, config),
    }
}
