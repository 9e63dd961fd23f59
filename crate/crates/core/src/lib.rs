//! Nearest-point projection onto the cross `C = {(x, y) : <x, y> = 0}` of a
//! finite-dimensional Euclidean space, with brute-force oracles for
//! validation and two splitting solvers that use the projection.
//!
//! ```
//! use crossproj::{project, CaseTag, Tolerances, Vector};
//!
//! let x0 = Vector::new(vec![2.0]).unwrap();
//! let y0 = Vector::new(vec![1.0]).unwrap();
//! let res = project(&x0, &y0, &Tolerances::default()).unwrap();
//! assert_eq!(res.tag, CaseTag::Generic);
//! assert_eq!(res.dist_sq(), 1.0);
//! ```

pub mod check;
pub mod cross;
pub mod error;
pub mod family;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod solvers;
pub mod sphere;

pub use cross::{
    candidate, classify, distance_sq, feasibility_bound, membership, objective, project,
    project_1d, solve_lambda, CaseTag, DegenerateFamily, LambdaPair, Projection, ProjectionResult,
    Selection, Tolerances,
};
pub use error::{Error, Result};
pub use family::{degenerate_family, family_enumerate, FamilyMember, FamilyMode};
pub use linalg::{
    block_solve, complement_project, inner, rank1_project, reflect, sphere_point, PairPoint,
    SphericalCoords, Vector,
};
pub use oracle::{lagrangian_oracle, subspace_oracle, OracleReport, SubspaceMode};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
