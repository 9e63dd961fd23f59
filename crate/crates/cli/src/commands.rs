use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crossproj::check::{check, trial_rng, uniform_vector, CheckConfig, Fault};
use crossproj::io::{
    fmt_f64, parse_coord_list, parse_instance, parse_point_file, render_instance, ResultDocument,
};
use crossproj::oracle::lagrangian_oracle;
use crossproj::solvers::{
    generate_instance, solve, Instance, InstanceKind, Method, SelectionPolicy, SolverConfig,
};
use crossproj::{
    classify, family_enumerate, objective, project, Error, FamilyMode, Tolerances, Vector,
};

use crate::{
    exit, CliError, Command, FamilyModeArg, FaultArg, Format, MethodArg, PointArgs, SelectionArg,
    TolArgs,
};

type CmdResult = Result<u8, CliError>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Project {
            input,
            tols,
            format,
        } => cmd_project(&input, &tols, format),
        Command::Family {
            input,
            tols,
            count,
            mode,
        } => cmd_family(&input, &tols, count, mode),
        Command::Check {
            dims,
            trials,
            seed,
            resolution,
            tols,
            inject_fault,
        } => cmd_check(&dims, trials, seed, resolution, &tols, inject_fault),
        Command::Solve {
            instance,
            generate,
            method,
            max_iter,
            tol,
            selection,
            record_every,
            trace,
            summary,
            tols,
        } => {
            let inst = match (instance, generate) {
                (Some(path), _) => parse_instance(&read(&path)?)?,
                (None, Some(spec)) => generated(&spec)?,
                (None, None) => {
                    return Err(CliError::new(exit::PARSE, "need --instance or --generate"))
                }
            };
            let config = SolverConfig {
                max_iter,
                tol,
                selection: match selection {
                    SelectionArg::KeepY => SelectionPolicy::KeepY,
                    SelectionArg::KeepX => SelectionPolicy::KeepX,
                    SelectionArg::Alternate => SelectionPolicy::Alternate,
                },
                tols: tolerances(&tols)?,
                record_every,
            };
            let method = match method {
                MethodArg::Ap => Method::AlternatingProjections,
                MethodArg::Dr => Method::DouglasRachford,
            };
            cmd_solve(&inst, method, &config, trace.as_deref(), summary.as_deref())
        }
        Command::Generate {
            kind,
            dim,
            seed,
            out,
        } => {
            let kind: InstanceKind = kind
                .parse()
                .map_err(|e: Error| CliError::new(exit::PARSE, e.to_string()))?;
            let inst = generate_instance(kind, dim, seed)
                .map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
            emit(out.as_deref(), &(render_instance(&inst) + "\n"))?;
            Ok(exit::OK)
        }
        Command::Bench { dims, trials, seed } => cmd_bench(&dims, trials, seed),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::PARSE, format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::new(exit::PARSE, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tolerances(args: &TolArgs) -> Result<Tolerances, CliError> {
    let t = Tolerances {
        orth: args.tol_orth,
        deg: args.tol_deg,
    };
    t.validate()
        .map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
    Ok(t)
}

fn load_point(args: &PointArgs) -> Result<(Vector, Vector), CliError> {
    if let Some(path) = &args.input {
        return Ok(parse_point_file(&read(path)?)?);
    }
    match (&args.x0, &args.y0) {
        (Some(x), Some(y)) => {
            let x0 = parse_coord_list(x, "x0")?;
            let y0 = parse_coord_list(y, "y0")?;
            if x0.dim() != y0.dim() {
                return Err(CliError::new(
                    exit::PARSE,
                    format!("x0 has {} coordinates but y0 has {}", x0.dim(), y0.dim()),
                ));
            }
            Ok((x0, y0))
        }
        _ => Err(CliError::new(
            exit::PARSE,
            "need --input or both --x0 and --y0",
        )),
    }
}

fn generated(spec: &str) -> Result<Instance, CliError> {
    let bad = || {
        CliError::new(
            exit::PARSE,
            format!("--generate expects kind,dim,seed, got {spec:?}"),
        )
    };
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [kind, dim, seed] = parts.as_slice() else {
        return Err(bad());
    };
    let kind: InstanceKind = kind.parse().map_err(|_| bad())?;
    let dim: usize = dim.parse().map_err(|_| bad())?;
    let seed: u64 = seed.parse().map_err(|_| bad())?;
    generate_instance(kind, dim, seed).map_err(|e| CliError::new(exit::PARSE, e.to_string()))
}

fn joined(v: &Vector) -> String {
    v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(",")
}

fn cmd_project(input: &PointArgs, tols: &TolArgs, format: Format) -> CmdResult {
    let (x0, y0) = load_point(input)?;
    let tols = tolerances(tols)?;
    let result = project(&x0, &y0, &tols)?;
    let doc = ResultDocument::new(&result, &x0, &y0, &tols);
    let text = match format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
        Format::Plain => doc.to_plain(),
    };
    print!("{text}");
    Ok(exit::OK)
}

fn cmd_family(input: &PointArgs, tols: &TolArgs, count: usize, mode: FamilyModeArg) -> CmdResult {
    let (x0, y0) = load_point(input)?;
    let tols = tolerances(tols)?;
    let tag = classify(&x0, &y0, &tols)?;
    if !tag.is_degenerate() {
        return Err(CliError::new(
            exit::NOT_DEGENERATE,
            format!("input is {tag}, not degenerate; the projection is a single point"),
        ));
    }
    let mode = match mode {
        FamilyModeArg::Grid => FamilyMode::Grid,
        FamilyModeArg::Injective => FamilyMode::Injective,
    };
    let members = family_enumerate(&x0, &y0, count, mode, &tols)
        .map_err(|e| CliError::new(exit::PARSE, e.to_string()))?;
    let n = x0.dim();
    let mut out = String::new();
    let header: Vec<String> = ["u", "x", "y"]
        .iter()
        .flat_map(|c| (1..=n).map(move |i| format!("{c}_{i}")))
        .chain(std::iter::once("objective".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for m in members {
        let u = match &m.u {
            Some(u) => joined(u),
            None => vec![""; n].join(","),
        };
        let f = objective(&m.point, &x0, &y0)?;
        let _ = writeln!(
            out,
            "{u},{},{},{}",
            joined(m.point.x()),
            joined(m.point.y()),
            fmt_f64(f)
        );
    }
    print!("{out}");
    Ok(exit::OK)
}

struct CheckStats {
    name: &'static str,
    passed: u64,
    total: u64,
    max_residual: f64,
    threshold: f64,
}

fn cmd_check(
    dims: &[usize],
    trials: u64,
    seed: u64,
    resolution: usize,
    tols: &TolArgs,
    fault: Option<FaultArg>,
) -> CmdResult {
    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::new(
            exit::PARSE,
            "--dims must list positive dimensions",
        ));
    }
    let base = CheckConfig {
        tols: tolerances(tols)?,
        resolution,
        seed,
        fault: fault.map(|FaultArg::LambdaPlus| Fault::LambdaPlus),
        ..CheckConfig::default()
    };
    let mut stats: Vec<CheckStats> = Vec::new();
    let mut failures = Vec::new();
    for &dim in dims {
        for trial in 0..trials {
            let mut rng = trial_rng(seed, dim, trial);
            let x0 = uniform_vector(dim, &mut rng);
            let y0 = uniform_vector(dim, &mut rng);
            let config = CheckConfig {
                seed: seed ^ trial.rotate_left(32) ^ dim as u64,
                ..base.clone()
            };
            let verdict = check(&x0, &y0, &config)?;
            for o in &verdict.outcomes {
                let s = match stats.iter_mut().find(|s| s.name == o.name) {
                    Some(s) => s,
                    None => {
                        stats.push(CheckStats {
                            name: o.name,
                            passed: 0,
                            total: 0,
                            max_residual: 0.0,
                            threshold: o.threshold,
                        });
                        stats.last_mut().expect("just pushed")
                    }
                };
                s.total += 1;
                s.passed += o.passed as u64;
                s.max_residual = s.max_residual.max(o.residual);
            }
            if !verdict.passed() {
                let names: Vec<&str> = verdict.failures().map(|o| o.name).collect();
                failures.push(format!(
                    "FAIL dim={dim} trial={trial} seed={seed} checks={} x0={} y0={}",
                    names.join(";"),
                    joined(&x0),
                    joined(&y0)
                ));
            }
        }
    }
    println!("check,passed,total,max_residual,threshold");
    for s in &stats {
        println!(
            "{},{},{},{:.3e},{:.0e}",
            s.name, s.passed, s.total, s.max_residual, s.threshold
        );
    }
    for f in &failures {
        println!("{f}");
    }
    if failures.is_empty() {
        println!("all {} trials passed", trials * dims.len() as u64);
        Ok(exit::OK)
    } else {
        println!(
            "{} of {} trials failed",
            failures.len(),
            trials * dims.len() as u64
        );
        Ok(exit::CHECK_FAILED)
    }
}

fn cmd_solve(
    inst: &Instance,
    method: Method,
    config: &SolverConfig,
    trace_path: Option<&Path>,
    summary_path: Option<&Path>,
) -> CmdResult {
    let trace = match solve(method, &inst.problem, &inst.start, config) {
        Ok(t) => t,
        Err(Error::Diverged { iteration, trace }) => {
            if let Some(p) = trace_path {
                emit(Some(p), &trace.to_csv())?;
            }
            return Err(CliError::new(
                exit::NUMERIC,
                format!("iterate became non-finite at iteration {iteration}"),
            ));
        }
        Err(e) => return Err(CliError::new(exit::PARSE, e.to_string())),
    };
    if let Some(p) = trace_path {
        emit(Some(p), &trace.to_csv())?;
    }
    emit(summary_path, &(trace.summary_json() + "\n"))?;
    if trace.converged {
        Ok(exit::OK)
    } else {
        eprintln!(
            "not converged after {} iterations; final residual {}",
            trace.iterations,
            trace.final_residual().map_or("n/a".into(), fmt_f64)
        );
        Ok(exit::NOT_CONVERGED)
    }
}

fn percentile(sorted: &[u128], p: f64) -> u128 {
    let idx = ((sorted.len() as f64 - 1.0) * p).round() as usize;
    sorted[idx]
}

fn cmd_bench(dims: &[usize], trials: u64, seed: u64) -> CmdResult {
    if dims.contains(&0) {
        return Err(CliError::new(
            exit::PARSE,
            "--dims must list positive dimensions",
        ));
    }
    let tols = Tolerances::default();
    println!("dim,trials,project_median_ns,project_p99_ns,oracle_gap_min,oracle_gap_max");
    for &dim in dims {
        let mut times = Vec::with_capacity(trials as usize);
        let (mut gap_min, mut gap_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for trial in 0..trials {
            let mut rng = trial_rng(seed, dim, trial);
            let x0 = uniform_vector(dim, &mut rng);
            let y0 = uniform_vector(dim, &mut rng);
            let start = Instant::now();
            let result = project(&x0, &y0, &tols)?;
            times.push(start.elapsed().as_nanos());
            let gap = lagrangian_oracle(&x0, &y0)?.best_objective - result.half_dist_sq();
            gap_min = gap_min.min(gap);
            gap_max = gap_max.max(gap);
        }
        times.sort_unstable();
        println!(
            "{dim},{trials},{},{},{},{}",
            percentile(&times, 0.5),
            percentile(&times, 0.99),
            fmt_f64(gap_min),
            fmt_f64(gap_max)
        );
    }
    Ok(exit::OK)
}
