//! Command-line front end: parse, analyze, report, and export witnesses.
//!
//! Exit codes: 0 = success / no inconsistency, 1 = inconsistencies found
//! (or invalid trajectory / unsatisfiable chart), 2 = usage, parse or
//! solver errors, 3 = inconclusive (solver returned unknown).

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tsc_core::checksat::{chart_bulletin, checksat_n, checksat_s, CheckConfig};
use tsc_core::consistency::analyze;
use tsc_core::dsl::{parse_spec, serialize_spec};
use tsc_core::report::{human_report, machine_report};
use tsc_core::smt::{resolve_backend, Status};
use tsc_core::spec::Specification;
use tsc_core::svg::render_svg;
use tsc_core::trajectory::{extract_witness, validate_trajectory, Trajectory};

#[derive(Parser)]
#[command(
    name = "tsca",
    about = "Consistency analysis for traffic sequence chart specifications",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// SMT solver executable (default: $TSCA_SOLVER, z3 on PATH, or the
    /// bundled engine).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Fixed step size in seconds for the sufficient check.
    #[arg(long)]
    step_size: Option<f64>,
    /// Unrolling depth for the sufficient check.
    #[arg(long)]
    depth: Option<usize>,
    /// Number of heading intervals.
    #[arg(long)]
    intervals: Option<usize>,
    /// Per-query solver timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Largest analyzed subset size.
    #[arg(long)]
    max_subset: Option<usize>,
    /// Directory receiving every emitted SMT-LIB2 script.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a specification for minimal inconsistent subsets.
    Check {
        /// Input .tsc files.
        files: Vec<PathBuf>,
        /// Output directory for reports and witness bundles.
        #[arg(long, default_value = "tsca-out")]
        out: PathBuf,
        /// Parallel solver jobs for cases of the same size.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run both satisfiability checks on one named chart.
    Satisfy {
        file: PathBuf,
        /// Name of a chart or requirement TSC in the file.
        chart: String,
        /// Output directory for the witness bundle.
        #[arg(long, default_value = "tsca-out")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Validate an exported witness trajectory against its specification.
    Validate {
        /// Witness trajectory (machine format).
        witness: PathBuf,
        /// Specification the witness belongs to.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Samples per spline segment.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Convert a witness trajectory to another format.
    Export {
        witness: PathBuf,
        /// Output format: csv, svg, or json.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Specification (needed for svg lane geometry).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampling rate in Hz for csv output.
        #[arg(long, default_value_t = 10.0)]
        rate: f64,
    },
    /// Parse and reprint a specification in canonical form.
    Format { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn load_spec(path: &Path) -> Result<Specification, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    let name = path.to_string_lossy();
    match parse_spec(&text, &name) {
        Ok(s) => Ok(s),
        Err(diags) => {
            for d in &diags {
                eprintln!("{}", d);
            }
            Err(format!("{} does not parse", path.display()))
        }
    }
}

fn merge_specs(files: &[PathBuf]) -> Result<Specification, String> {
    if files.is_empty() {
        return Err("no input files".to_string());
    }
    let mut merged = load_spec(&files[0])?;
    for f in &files[1..] {
        let other = load_spec(f)?;
        merged.objects.extend(other.objects);
        merged.views.extend(other.views);
        merged.charts.extend(other.charts);
        merged.tscs.extend(other.tscs);
        if merged.analysis == Default::default() {
            merged.analysis = other.analysis;
        }
    }
    Ok(merged)
}

/// A configured external solver must exist before analysis starts.
fn preflight_solver(cfg: &CheckConfig) -> Result<(), String> {
    if let tsc_core::smt::Backend::External(path) = &cfg.solver.backend {
        if !path.is_file() {
            return Err(format!("solver executable not found: {}", path.display()));
        }
    }
    Ok(())
}

fn build_config(spec: &Specification, args: &SolverArgs) -> CheckConfig {
    let mut cfg = CheckConfig::from_spec(spec);
    if let Some(s) = args.step_size {
        cfg.delta = num_rational::BigRational::from_float(s).unwrap_or_else(|| cfg.delta.clone());
    }
    if let Some(d) = args.depth {
        cfg.depth_s = d;
    }
    if let Some(i) = args.intervals {
        cfg.intervals = i;
    }
    if let Some(t) = args.timeout {
        cfg.solver.timeout = std::time::Duration::from_millis((t * 1000.0) as u64);
    }
    if let Some(m) = args.max_subset {
        cfg.max_subset = m;
    }
    cfg.solver.backend = resolve_backend(args.solver.as_deref());
    cfg.solver.dump_dir = args.dump_smt.clone();
    cfg
}

fn bulletin_names(spec: &Specification) -> BTreeSet<String> {
    spec.tscs
        .iter()
        .flat_map(|t| t.bulletin.iter().map(|(s, _)| s.clone()))
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check {
            files,
            out,
            jobs,
            solver,
        } => {
            let spec = merge_specs(&files)?;
            if spec.tscs.is_empty() {
                return Err("specification has no requirement TSC".to_string());
            }
            let cfg = build_config(&spec, &solver);
            preflight_solver(&cfg)?;
            let report = analyze(&spec, &cfg, jobs.max(1)).map_err(|e| e.message)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {}", out.display(), e))?;

            let mut witness_files = Vec::new();
            for (i, sub) in report.subsets.iter().enumerate() {
                match &sub.witness {
                    Some(traj) => {
                        let base = format!("witness-{:02}-{}", i + 1, sub.members.join("-"));
                        let json_path = out.join(format!("{}.json", base));
                        let svg_path = out.join(format!("{}.svg", base));
                        std::fs::write(&json_path, traj.to_json()).map_err(|e| e.to_string())?;
                        std::fs::write(&svg_path, render_svg(traj, &spec))
                            .map_err(|e| e.to_string())?;
                        witness_files.push(Some(format!("{}.json", base)));
                    }
                    None => witness_files.push(None),
                }
            }

            let human = human_report(&report);
            print!("{}", human);
            std::fs::write(out.join("report.txt"), &human).map_err(|e| e.to_string())?;
            let machine = machine_report(&report, &witness_files);
            let json = serde_json::to_string_pretty(&machine).map_err(|e| e.to_string())?;
            std::fs::write(out.join("report.json"), json).map_err(|e| e.to_string())?;

            Ok(if report.is_consistent() {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            })
        }
        Command::Satisfy {
            file,
            chart,
            out,
            solver,
        } => {
            let spec = load_spec(&file)?;
            let cfg = build_config(&spec, &solver);
            preflight_solver(&cfg)?;
            let chart_ast = match spec.chart(&chart) {
                Some(c) => c.clone(),
                None => match spec.tsc(&chart) {
                    Some(t) => tsc_core::consistency::build_hfc(t),
                    None => return Err(format!("unknown chart '{}'", chart)),
                },
            };
            let bulletin = chart_bulletin(&chart_ast, &spec);
            let vn = checksat_n(&chart_ast, &spec, &bulletin, &cfg);
            println!("necessary: {}", status_str(vn.status));
            if vn.status == Status::Unsat {
                return Ok(ExitCode::from(1));
            }
            let (vs, problem) = checksat_s(&chart_ast, &spec, &bulletin, &cfg);
            println!("sufficient: {}", status_str(vs.status));
            if vs.status == Status::Sat {
                if let (Some(model), Some(problem)) = (vs.model.as_ref(), problem.as_ref()) {
                    let traj = extract_witness(model, problem).map_err(|e| e.message)?;
                    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
                    let json_path = out.join(format!("witness-{}.json", chart));
                    std::fs::write(&json_path, traj.to_json()).map_err(|e| e.to_string())?;
                    std::fs::write(
                        out.join(format!("witness-{}.svg", chart)),
                        render_svg(&traj, &spec),
                    )
                    .map_err(|e| e.to_string())?;
                    println!("witness: {}", json_path.display());
                }
            }
            Ok(match (vn.status, vs.status) {
                (Status::Unknown, _) | (_, Status::Unknown) => ExitCode::from(3),
                _ => ExitCode::from(0),
            })
        }
        Command::Validate {
            witness,
            spec,
            samples,
        } => {
            let text = std::fs::read_to_string(&witness)
                .map_err(|e| format!("cannot read {}: {}", witness.display(), e))?;
            let traj = Trajectory::from_json(&text).map_err(|e| e.message)?;
            let spec = match spec {
                Some(p) => load_spec(&p)?,
                None => Specification::empty(),
            };
            let excluded = bulletin_names(&spec);
            let report = validate_trajectory(&traj, &spec, &excluded, samples, 1e-6)
                .map_err(|e| e.message)?;
            println!(
                "c1 gap: {:.3e}  |kappa| max: {:.4} (bound {:.4})  |v^2 k| max: {:.4} (bound {:.4})  view violations: {}/{}",
                report.c1_gap_max,
                report.kappa_max,
                report.kappa_bound,
                report.lat_acc_max,
                report.lat_acc_bound,
                report.view_violations,
                report.view_samples
            );
            println!("{}", if report.valid { "valid" } else { "invalid" });
            Ok(if report.valid {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            })
        }
        Command::Export {
            witness,
            format,
            spec,
            out,
            rate,
        } => {
            let text = std::fs::read_to_string(&witness)
                .map_err(|e| format!("cannot read {}: {}", witness.display(), e))?;
            let traj = Trajectory::from_json(&text).map_err(|e| e.message)?;
            let rendered = match format.as_str() {
                "csv" => traj.to_csv(rate, 1e-6),
                "json" => traj.to_json(),
                "svg" => {
                    let spec = match spec {
                        Some(p) => load_spec(&p)?,
                        None => Specification::empty(),
                    };
                    render_svg(&traj, &spec)
                }
                other => return Err(format!("unknown format '{}'", other)),
            };
            match out {
                Some(p) => std::fs::write(&p, rendered).map_err(|e| e.to_string())?,
                None => print!("{}", rendered),
            }
            Ok(ExitCode::from(0))
        }
        Command::Format { file } => {
            let spec = load_spec(&file)?;
            print!("{}", serialize_spec(&spec));
            Ok(ExitCode::from(0))
        }
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
        Status::Unknown => "unknown",
    }
}
