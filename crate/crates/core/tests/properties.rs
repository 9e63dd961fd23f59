use proptest::prelude::*;

use crossproj::check::{check, CheckConfig};
use crossproj::io::{
    fmt_f64, parse_coord_list, parse_point_file, parse_result_points, ResultDocument,
};
use crossproj::oracle::{lagrangian_oracle, subspace_oracle, SubspaceMode};
use crossproj::solvers::{
    douglas_rachford, project_orthant_pair, FeasibilityProblem, SolverConfig,
};
use crossproj::{
    feasibility_bound, membership, objective, project, CaseTag, PairPoint, Selection, Tolerances,
    Vector,
};

fn pair(max_dim: usize) -> impl Strategy<Value = (Vector, Vector)> {
    (1..=max_dim).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
        )
            .prop_map(|(x, y)| (Vector::new(x).unwrap(), Vector::new(y).unwrap()))
    })
}

fn zeros_like(v: &Vector) -> Vector {
    Vector::zeros(v.dim())
}

proptest! {
    #[test]
    fn projection_lies_in_the_cross((x0, y0) in pair(8)) {
        let res = project(&x0, &y0, &Tolerances::default()).unwrap();
        let bound = feasibility_bound(&x0, &y0);
        for p in res.points() {
            prop_assert!(membership(p, bound), "{p:?}");
        }
        prop_assert!(res.half_dist_sq() >= 0.0);
    }

    #[test]
    fn projection_beats_the_trivial_points((x0, y0) in pair(8)) {
        let res = project(&x0, &y0, &Tolerances::default()).unwrap();
        let f = objective(res.select(Selection::KeepY), &x0, &y0).unwrap();
        let keep_y = objective(&PairPoint::new(zeros_like(&x0), y0.clone()).unwrap(), &x0, &y0).unwrap();
        let keep_x = objective(&PairPoint::new(x0.clone(), zeros_like(&y0)).unwrap(), &x0, &y0).unwrap();
        prop_assert!(f <= keep_y.min(keep_x) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn lagrangian_oracle_never_beats_the_formula((x0, y0) in pair(8)) {
        let report = lagrangian_oracle(&x0, &y0).unwrap();
        let formula = project(&x0, &y0, &Tolerances::default()).unwrap().half_dist_sq();
        let scale = 1.0 + x0.norm_sq() + y0.norm_sq();
        prop_assert!(report.best_objective - formula >= -1e-9 * scale);
        prop_assert!(membership(&report.best_point, feasibility_bound(&x0, &y0)));
    }

    #[test]
    fn random_subspace_oracle_is_an_upper_bound((x0, y0) in pair(6), seed in any::<u64>()) {
        let formula = project(&x0, &y0, &Tolerances::default()).unwrap().half_dist_sq();
        let a = subspace_oracle(&x0, &y0, 200, SubspaceMode::Random { seed }).unwrap();
        let b = subspace_oracle(&x0, &y0, 200, SubspaceMode::Random { seed }).unwrap();
        prop_assert!(a.best_objective >= formula - 1e-9 * (1.0 + formula));
        prop_assert_eq!(a.best_objective.to_bits(), b.best_objective.to_bits());
        prop_assert_eq!(a.best_point, b.best_point);
    }

    #[test]
    fn swapping_inputs_swaps_the_projection((x0, y0) in pair(6)) {
        let tols = Tolerances::default();
        let a = project(&x0, &y0, &tols).unwrap();
        let b = project(&y0, &x0, &tols).unwrap();
        prop_assert_eq!(a.tag, b.tag);
        let scale = 1.0 + (x0.norm_sq() + y0.norm_sq()).sqrt();
        let d = a.select(Selection::KeepY).swapped().dist(b.select(Selection::KeepX)).unwrap();
        prop_assert!(d <= 1e-12 * scale);
    }

    #[test]
    fn projection_is_positively_homogeneous((x0, y0) in pair(6), t in 0.01..100.0f64) {
        let tols = Tolerances::default();
        let a = project(&x0, &y0, &tols).unwrap();
        let b = project(&x0.scale(t), &y0.scale(t), &tols).unwrap();
        prop_assume!(a.tag == b.tag);
        let scale = t * (1.0 + (x0.norm_sq() + y0.norm_sq()).sqrt());
        let d = a.select(Selection::KeepY).scale(t).dist(b.select(Selection::KeepY)).unwrap();
        prop_assert!(d <= 1e-12 * scale, "{d}");
    }

    #[test]
    fn check_suite_passes((x0, y0) in pair(5)) {
        let cfg = CheckConfig { resolution: 64, ..CheckConfig::default() };
        let verdict = check(&x0, &y0, &cfg).unwrap();
        prop_assert!(verdict.passed(), "{:?}", verdict.failures().collect::<Vec<_>>());
    }

    #[test]
    fn result_documents_round_trip((x0, y0) in pair(6)) {
        let tols = Tolerances::default();
        let res = project(&x0, &y0, &tols).unwrap();
        let json = ResultDocument::new(&res, &x0, &y0, &tols).to_json();
        let points = parse_result_points(&json).unwrap();
        prop_assert_eq!(points.iter().collect::<Vec<_>>(), res.points());
        for p in &points {
            let again = project(p.x(), p.y(), &tols).unwrap();
            prop_assert_eq!(again.tag, CaseTag::Orthogonal);
            prop_assert!(again.dist_sq().sqrt() <= 1e-9);
        }
    }

    #[test]
    fn float_rendering_is_lossless(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn coordinate_lists_round_trip(coords in prop::collection::vec(-1e6..1e6f64, 1..10)) {
        let text = coords.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(",");
        let parsed = parse_coord_list(&text, "x0").unwrap();
        prop_assert_eq!(parsed.as_slice(), coords.as_slice());
    }

    #[test]
    fn point_file_parser_never_panics(text in ".{0,200}") {
        let _ = parse_point_file(&text);
        let _ = parse_coord_list(&text, "x0");
    }

    #[test]
    fn orthant_projection_is_nonnegative_and_idempotent((x0, y0) in pair(6)) {
        let p = project_orthant_pair(&PairPoint::new(x0, y0).unwrap());
        prop_assert!(p.x().iter().chain(p.y().iter()).all(|v| *v >= 0.0));
        prop_assert_eq!(project_orthant_pair(&p), p);
    }

    #[test]
    fn solvers_are_deterministic((x0, y0) in pair(4)) {
        let problem = FeasibilityProblem::orthant(x0.dim()).unwrap();
        let start = PairPoint::new(x0, y0).unwrap();
        let cfg = SolverConfig { max_iter: 50, ..SolverConfig::default() };
        let a = douglas_rachford(&problem, &start, &cfg).unwrap();
        let b = douglas_rachford(&problem, &start, &cfg).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        if a.converged {
            prop_assert!(a.final_residual().unwrap() <= cfg.tol);
            prop_assert!(membership(&a.final_point, 1e-9));
        }
    }
}
