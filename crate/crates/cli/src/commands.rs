use std::path::PathBuf;

use entropic_map::{
    em_fit, fit_map, gen_synthetic, gen_synthetic_with_overlap, grid_map_search, linf_up_to_ties,
    CountVector, EmConfig, GridSpec, Init, NuSchedule, SimplexVector, SolverConfig,
};
use serde_json::json;

use crate::args::{CompareArgs, FitArgs, GenArgs, OracleArgs, PlsiArgs, SolverArgs};
use crate::io::{format_matrix, load_counts, parse_list, parse_matrix, read_text, write_file};
use crate::report::{CompareReport, CompareRow, GenReport, OracleReport, Payload, RunReport};
use crate::CliError;

/// Objective gaps above this are flagged in `compare` tables.
pub const COMPARE_GAP_THRESHOLD: f64 = 1e-4;

const DEFAULT_GEOMETRIC_MAX: f64 = 1000.0;

fn to_value<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("configuration types serialize to JSON")
}

fn report(command: &str, config: serde_json::Value, result: Payload) -> RunReport {
    RunReport {
        command: command.into(),
        config,
        result,
        exit_status: 0,
        wall_clock_ms: None,
    }
}

fn parse_init(text: &str) -> Result<Init, CliError> {
    match text {
        "smoothed-ml" | "smoothed_ml" => Ok(Init::SmoothedMl),
        "uniform" => Ok(Init::Uniform),
        list => {
            let values = parse_list(list, "--init").map_err(|e| CliError::Usage(e.to_string()))?;
            SimplexVector::new(values)
                .map(Init::Explicit)
                .map_err(|e| CliError::Usage(format!("--init: {e}")))
        }
    }
}

fn schedule(args: &SolverArgs) -> NuSchedule {
    let default = SolverConfig::default().schedule;
    match (args.nu, args.nu_init, args.nu_growth) {
        (None, None, None) => default,
        (Some(nu), None, None) => NuSchedule::Constant { nu },
        (max, initial, growth) => {
            let (d_initial, d_growth) = match default {
                NuSchedule::Geometric {
                    initial, growth, ..
                } => (initial, growth),
                NuSchedule::Constant { nu } => (nu, 1.5),
            };
            NuSchedule::Geometric {
                initial: initial.unwrap_or(d_initial),
                growth: growth.unwrap_or(d_growth),
                max: max.unwrap_or(DEFAULT_GEOMETRIC_MAX),
            }
        }
    }
}

/// Builds and validates a solver configuration from the shared flags.
pub fn solver_config(a: f64, args: &SolverArgs, seed: u64) -> Result<SolverConfig, CliError> {
    let base = SolverConfig::with_a(a);
    let config = SolverConfig {
        schedule: schedule(args),
        tol: args.tol.unwrap_or(base.tol),
        max_iter: args.max_iter.unwrap_or(base.max_iter),
        floor: args.floor.unwrap_or(base.floor),
        init: match &args.init {
            Some(text) => parse_init(text)?,
            None => base.init.clone(),
        },
        jitter: args.jitter.unwrap_or(base.jitter),
        seed,
        ..base
    };
    config.validate()?;
    Ok(config)
}

fn default_resolution(k: usize) -> f64 {
    match k {
        2 => 1e-6,
        3 => 1e-3,
        _ => 1e-2,
    }
}

pub fn fit(args: &FitArgs) -> Result<RunReport, CliError> {
    let counts = load_counts(args.input.counts.as_deref(), args.input.input.as_deref())?;
    let config = SolverConfig {
        record_trace: args.trace,
        ..solver_config(args.a, &args.solver, args.seed)?
    };
    let fit = fit_map(&counts, &config)?;
    if !fit.converged {
        eprintln!(
            "warning: no convergence after {} iterations (last theta change {:e})",
            fit.iterations, fit.final_theta_change
        );
    }
    let echo = json!({ "counts": counts, "solver": to_value(&config) });
    Ok(report("fit", echo, Payload::Fit(fit.into())))
}

pub fn oracle(args: &OracleArgs) -> Result<RunReport, CliError> {
    let counts = load_counts(args.input.counts.as_deref(), args.input.input.as_deref())?;
    let resolution = args
        .resolution
        .unwrap_or_else(|| default_resolution(counts.len()));
    let spec = GridSpec::new(resolution, counts.len())?;
    let result = grid_map_search(&counts, args.a, &spec)?;
    let echo = json!({ "counts": counts, "a": args.a, "resolution": resolution });
    Ok(report(
        "oracle",
        echo,
        Payload::Oracle(OracleReport::new(result, resolution)),
    ))
}

fn compare_row(
    counts: &CountVector,
    a: f64,
    solver: &SolverConfig,
    spec: &GridSpec,
) -> Result<(CompareRow, u64), CliError> {
    let oracle = grid_map_search(counts, a, spec)?;
    let fit = fit_map(
        counts,
        &SolverConfig {
            a,
            ..solver.clone()
        },
    )?;
    if !fit.converged {
        eprintln!("warning: solver did not converge for a = {a}");
    }
    let objective_gap = oracle.value - fit.log_joint_value;
    Ok((
        CompareRow {
            a,
            theta_distance: linf_up_to_ties(&fit.theta, &oracle.theta, counts),
            solver_log_joint: fit.log_joint_value,
            oracle_log_joint: oracle.value,
            objective_gap,
            flagged: objective_gap.is_nan() || objective_gap.abs() > COMPARE_GAP_THRESHOLD,
            iterations: fit.iterations,
            converged: fit.converged,
            solver_theta: fit.theta,
            oracle_theta: oracle.theta,
        },
        oracle.grid_points,
    ))
}

pub fn compare(args: &CompareArgs) -> Result<RunReport, CliError> {
    let counts = load_counts(args.input.counts.as_deref(), args.input.input.as_deref())?;
    let a_list =
        parse_list(&args.a_list, "--a-list").map_err(|e| CliError::Usage(e.to_string()))?;
    let resolution = args
        .resolution
        .unwrap_or_else(|| default_resolution(counts.len()));
    let spec = GridSpec::new(resolution, counts.len())?;
    let solver = solver_config(0.0, &args.solver, 0)?;
    for &a in &a_list {
        SolverConfig {
            a,
            ..solver.clone()
        }
        .validate()?;
    }
    let mut rows = Vec::with_capacity(a_list.len());
    let mut grid_points = 0;
    for &a in &a_list {
        let (row, points) = compare_row(&counts, a, &solver, &spec)?;
        if row.flagged {
            eprintln!(
                "note: a = {a}: objective gap {:e} vs oracle exceeds {COMPARE_GAP_THRESHOLD:e}",
                row.objective_gap
            );
        }
        grid_points = points;
        rows.push(row);
    }
    let echo = json!({
        "counts": counts,
        "a_list": a_list,
        "resolution": resolution,
        "solver": to_value(&solver),
    });
    Ok(report(
        "compare",
        echo,
        Payload::Compare(CompareReport {
            resolution,
            gap_threshold: COMPARE_GAP_THRESHOLD,
            grid_points,
            rows,
        }),
    ))
}

pub fn plsi(args: &PlsiArgs) -> Result<RunReport, CliError> {
    let base = EmConfig::default();
    let mut solver_args = args.solver.clone();
    if solver_args.floor.is_none() {
        solver_args.floor = Some(base.solver.floor);
    }
    let config = EmConfig {
        components: args.components,
        a: args.a,
        solver: solver_config(args.a, &solver_args, args.seed)?,
        em_iters: args.em_iters,
        seed: args.seed,
    };
    config.validate()?;
    let matrix = parse_matrix(&read_text(&args.matrix)?)?;
    let fit = em_fit(&matrix, &config)?;
    let unconverged: usize = fit
        .iterations
        .iter()
        .flat_map(|it| &it.activation_updates)
        .filter(|u| !u.converged)
        .count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} activation fits did not converge");
    }
    let echo = json!({
        "matrix": args.matrix,
        "features": matrix.features(),
        "columns": matrix.columns(),
        "em": to_value(&config),
    });
    Ok(report("plsi", echo, Payload::Plsi(fit)))
}

fn truth_path(args: &GenArgs) -> PathBuf {
    args.truth.clone().unwrap_or_else(|| {
        let mut name = args.output.clone().into_os_string();
        name.push(".truth.json");
        name.into()
    })
}

pub fn gen(args: &GenArgs) -> Result<RunReport, CliError> {
    let data = match args.overlap {
        Some(overlap) => gen_synthetic_with_overlap(
            args.features,
            args.columns,
            args.components,
            args.sparsity,
            overlap,
            args.seed,
        )?,
        None => gen_synthetic(
            args.features,
            args.columns,
            args.components,
            args.sparsity,
            args.seed,
        )?,
    };
    let truth = truth_path(args);
    write_file(&args.output, &format_matrix(&data.matrix))?;
    let truth_text = serde_json::to_string_pretty(&data.truth)
        .map_err(|e| CliError::Input(format!("cannot serialize factors: {e}")))?;
    write_file(&truth, &(truth_text + "\n"))?;
    let echo = json!({
        "features": args.features,
        "columns": args.columns,
        "components": args.components,
        "sparsity": args.sparsity,
        "overlap": args.overlap,
        "seed": args.seed,
    });
    Ok(report(
        "gen",
        echo,
        Payload::Gen(GenReport {
            matrix_path: args.output.clone(),
            truth_path: truth,
            features: data.matrix.features(),
            columns: data.matrix.columns(),
            components: args.components,
            total_count: data.matrix.grand_total(),
        }),
    ))
}
