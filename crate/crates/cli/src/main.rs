//! Command-line front end: loads operator/cycle/cover files, runs spectral
//! computations, and emits machine-readable reports and plot data.
//!
//! Exit codes: 0 success (failed checks are reported in the JSON, not the
//! exit code), 2 parse error, 3 eigenvalue/contour conflict,
//! 4 non-integrable resolvent, 5 invalid cover, 6 inappropriate curve.

mod report;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spectral_cuts::calculus::{calculus_both, calculus_integral, calculus_restrict, FunctionExpr};
use spectral_cuts::contour::{Cycle, Region};
use spectral_cuts::cuts::{
    detect_singular_points, plain_spectral_cut, riesz_projection, verify_projection,
    ProjectionMatrix,
};
use spectral_cuts::decompose::{super_decompose, CoverPair};
use spectral_cuts::operators::OperatorModel;
use spectral_cuts::perturbation::{
    build_appropriate_grid, check_appropriate_curve, densify, series_calculus, series_projection,
    PerturbedDiagonal,
};
use spectral_cuts::quadrature::{QuadratureConfig, SingularPoint};
use spectral_cuts::{linalg, C64, SpectralCutError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spectral-cuts", version, about = "Contour spectral projections, functional calculus and decomposability witnesses for concrete operator models")]
struct Cli {
    /// Quadrature tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Gauss-Legendre nodes per panel
    #[arg(long, global = true, default_value_t = 16)]
    panel_order: usize,
    /// Maximum bisection depth per panel
    #[arg(long, global = true, default_value_t = 30)]
    max_depth: u32,
    /// Geometric grading ratio toward singular points, in (0,1)
    #[arg(long, global = true, default_value_t = 0.5)]
    grading: f64,
    /// Seed recorded in reports (no command draws random numbers yet)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Both,
    Restrict,
    Integral,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of an operator file: spectrum.json + scatter.csv
    Spectrum { operator: PathBuf },
    /// Spectral-cut projection along a cycle: projection.json, report.json,
    /// resolvent_norm.csv
    Cut {
        operator: PathBuf,
        cycle: PathBuf,
        /// "auto" detects touching points; or "x,y;x,y;…"
        #[arg(long, default_value = "auto")]
        singular: String,
    },
    /// Functional calculus along a cycle: calculus.json
    Calculus {
        operator: PathBuf,
        cycle: PathBuf,
        /// Function expression over z, e.g. "exp(z)*(z-1)/(z+3)"
        #[arg(long)]
        f: String,
        /// Region JSON file for the function's domain
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
    },
    /// Super-decomposability witness for a cover: witness.json
    Decompose { operator: PathBuf, cover: PathBuf },
    /// Series machinery for diagonal-plus-series operators
    Perturb {
        operator: PathBuf,
        #[command(subcommand)]
        action: PerturbAction,
    },
}

#[derive(Subcommand)]
enum PerturbAction {
    /// Appropriate grid: grid.json
    Grid {
        #[arg(long, default_value_t = 8)]
        nx: usize,
        #[arg(long, default_value_t = 8)]
        ny: usize,
        /// Membership cap (default 10³·summability + 10³)
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Checks that a curve is appropriate: report.json
    CurveCheck {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Series projection along an appropriate curve: report.json
    Project {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Series functional calculus along an appropriate curve: report.json
    Calculus {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        domain: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SPECTRAL_CUTS_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            spectral_cuts::par::init_global_threads(n);
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<SpectralCutError>() {
        return match e {
            SpectralCutError::EigenvalueOnContour { .. }
            | SpectralCutError::PointOnCycle { .. } => 3,
            SpectralCutError::NonIntegrableResolvent { .. } => 4,
            SpectralCutError::CoverInvalid { .. } | SpectralCutError::CoverTooTight { .. } => 5,
            SpectralCutError::NotAppropriateCurve { .. }
            | SpectralCutError::OnEigenvalueLine { .. } => 6,
            _ => 1,
        };
    }
    if err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    1
}

fn parse_file<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading {what} file {}", path.display()))?;
    let value: T = serde_json::from_str(&body)
        .with_context(|| format!("parsing {what} file {}", path.display()))?;
    Ok(value)
}

fn cfg_of(cli: &Cli) -> QuadratureConfig {
    QuadratureConfig {
        panel_order: cli.panel_order,
        tol: cli.tol,
        max_depth: cli.max_depth,
        grading_ratio: cli.grading,
        singular_points: Vec::new(),
    }
}

fn manifest_of(cli: &Cli, command: &str, inputs: &[(&str, &Path)], extra: Value) -> Value {
    let mut inputs_obj = serde_json::Map::new();
    for (k, p) in inputs {
        inputs_obj.insert(k.to_string(), json!(p.display().to_string()));
    }
    json!({
        "command": command,
        "inputs": Value::Object(inputs_obj),
        "config": {
            "tol": cli.tol,
            "panel_order": cli.panel_order,
            "max_depth": cli.max_depth,
            "grading": cli.grading,
        },
        "seed": cli.seed,
        "out": cli.out.display().to_string(),
        "extra": extra,
    })
}

fn meta_block(manifest: &Value) -> Value {
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "manifest": manifest,
        "manifest_hash": report::manifest_hash(manifest),
    })
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &ProjectionMatrix) -> Value {
    match m {
        ProjectionMatrix::Diagonal(d) => json!({
            "kind": "diagonal",
            "entries": d.iter().map(|v| complex_json(*v)).collect::<Vec<_>>(),
        }),
        ProjectionMatrix::Dense(m) => json!({
            "kind": "dense",
            "data": (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
    }
}

fn diagnostics_json(d: &spectral_cuts::cuts::ProjectionDiagnostics) -> Value {
    serde_json::to_value(d).expect("diagnostics serialize")
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Spectrum { operator } => cmd_spectrum(cli, operator),
        Command::Cut {
            operator,
            cycle,
            singular,
        } => cmd_cut(cli, operator, cycle, singular),
        Command::Calculus {
            operator,
            cycle,
            f,
            domain,
            route,
        } => cmd_calculus(cli, operator, cycle, f, domain, *route),
        Command::Decompose { operator, cover } => cmd_decompose(cli, operator, cover),
        Command::Perturb { operator, action } => cmd_perturb(cli, operator, action),
    }
}

fn cmd_spectrum(cli: &Cli, operator: &Path) -> Result<()> {
    let op: OperatorModel = parse_file(operator, "operator")?;
    let spectrum = op.spectrum()?;
    let manifest = manifest_of(cli, "spectrum", &[("operator", operator)], json!({}));
    let out = json!({
        "meta": meta_block(&manifest),
        "dimension": op.dim(),
        "eigenvalues": spectrum.eigenvalues.iter().map(|e| complex_json(*e)).collect::<Vec<_>>(),
    });
    report::write_json(&cli.out.join("spectrum.json"), &out)?;
    let mut csv = String::from("re,im\n");
    for e in &spectrum.eigenvalues {
        csv.push_str(&format!("{},{}\n", report::csv_num(e.re), report::csv_num(e.im)));
    }
    report::write_atomic(&cli.out.join("scatter.csv"), &csv)?;
    println!("spectrum: {} eigenvalues -> {}", spectrum.eigenvalues.len(), cli.out.display());
    Ok(())
}

fn parse_singular(spec: &str, op: &OperatorModel, cycle: &Cycle) -> Result<Vec<SingularPoint>> {
    if spec == "auto" {
        let threshold = 1e-2 * op.scale();
        return Ok(detect_singular_points(op, cycle, threshold)?);
    }
    if spec.trim().is_empty() || spec == "none" {
        return Ok(Vec::new());
    }
    let mut pts = Vec::new();
    for part in spec.split(';') {
        let coords: Vec<&str> = part.split(',').collect();
        if coords.len() != 2 {
            anyhow::bail!("--singular expects 'auto' or 'x,y;x,y;…', got '{part}'");
        }
        let re: f64 = coords[0].trim().parse().context("singular point re")?;
        let im: f64 = coords[1].trim().parse().context("singular point im")?;
        pts.push(SingularPoint::new(C64::new(re, im)));
    }
    Ok(pts)
}

/// Operator norm of the resolvent at a point, for the plot data.
fn resolvent_norm(op: &OperatorModel, z: C64) -> f64 {
    match op.diagonal_entries() {
        Some(entries) => entries
            .iter()
            .map(|l| 1.0 / (z - l).norm())
            .fold(0.0, f64::max),
        None => match op.resolvent_factor(z) {
            Ok(f) => linalg::operator_norm(&f.solve_identity(op.dim())),
            Err(_) => f64::INFINITY,
        },
    }
}

fn cmd_cut(cli: &Cli, operator: &Path, cycle_path: &Path, singular: &str) -> Result<()> {
    let op: OperatorModel = parse_file(operator, "operator")?;
    let cycle: Cycle = parse_file(cycle_path, "cycle")?;
    let mut cfg = cfg_of(cli);
    cfg.singular_points = parse_singular(singular, &op, &cycle)?;

    let result = plain_spectral_cut(&op, &cycle, &cfg)?;
    let verification = verify_projection(&op, &result, &cycle)?;

    let manifest = manifest_of(
        cli,
        "cut",
        &[("operator", operator), ("cycle", cycle_path)],
        json!({"singular": singular}),
    );
    let meta = meta_block(&manifest);

    let projection = json!({
        "meta": meta,
        "projection": matrix_json(&result.matrix),
        "diagnostics": diagnostics_json(&result.diagnostics),
    });
    report::write_json(&cli.out.join("projection.json"), &projection)?;

    let rep = json!({
        "meta": meta,
        "singular_points": cfg.singular_points.iter().map(|sp| json!({
            "point": complex_json(sp.point),
            "exclusion_radius": sp.exclusion_radius,
            "growth_exponent": sp.growth_exponent,
        })).collect::<Vec<_>>(),
        "checks": serde_json::to_value(&verification.checks)?,
        "all_pass": verification.all_pass,
        "diagnostics": diagnostics_json(&result.diagnostics),
    });
    report::write_json(&cli.out.join("report.json"), &rep)?;

    // resolvent norm samples along the cycle for plotting
    let mut csv = String::from("t,re,im,norm\n");
    let total_len: f64 = cycle.length();
    let mut acc = 0.0f64;
    for curve in &cycle.curves {
        for seg in &curve.segments {
            let samples = 64;
            for i in 0..samples {
                let t = (i as f64 + 0.5) / samples as f64;
                let z = seg.point_at(t);
                let frac = (acc + t * seg.length()) / total_len;
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    report::csv_num(frac),
                    report::csv_num(z.re),
                    report::csv_num(z.im),
                    report::csv_num(resolvent_norm(&op, z)),
                ));
            }
            acc += seg.length();
        }
    }
    report::write_atomic(&cli.out.join("resolvent_norm.csv"), &csv)?;
    println!(
        "cut: rank {} of {}, all checks pass: {} -> {}",
        result.diagnostics.rank,
        op.dim(),
        verification.all_pass,
        cli.out.display()
    );
    Ok(())
}

fn cmd_calculus(
    cli: &Cli,
    operator: &Path,
    cycle_path: &Path,
    f_src: &str,
    domain: &Path,
    route: Route,
) -> Result<()> {
    let op: OperatorModel = parse_file(operator, "operator")?;
    let cycle: Cycle = parse_file(cycle_path, "cycle")?;
    let region: Region = parse_file(domain, "domain region")?;
    let f = FunctionExpr::parse(f_src, region)?;
    let cfg = cfg_of(cli);

    let manifest = manifest_of(
        cli,
        "calculus",
        &[("operator", operator), ("cycle", cycle_path), ("domain", domain)],
        json!({"f": f_src, "route": match route { Route::Both => "both", Route::Restrict => "restrict", Route::Integral => "integral" }}),
    );

    let body = match route {
        Route::Both => {
            let (rr, ri) = calculus_both(&op, &cycle, &f, &cfg)?;
            json!({
                "restrict": matrix_json(&rr.matrix),
                "integral": matrix_json(&ri.matrix),
                "agreement": ri.agreement_with_other_route,
                "range_residual_restrict": rr.range_residual,
                "range_residual_integral": ri.range_residual,
            })
        }
        Route::Restrict => {
            let p = plain_spectral_cut(&op, &cycle, &cfg)?;
            let rr = calculus_restrict(&op, &p, &f, &cfg)?;
            json!({
                "restrict": matrix_json(&rr.matrix),
                "range_residual_restrict": rr.range_residual,
            })
        }
        Route::Integral => {
            let ri = calculus_integral(&op, &cycle, &f, &cfg)?;
            json!({
                "integral": matrix_json(&ri.matrix),
                "range_residual_integral": ri.range_residual,
            })
        }
    };
    let out = json!({
        "meta": meta_block(&manifest),
        "calculus": body,
    });
    report::write_json(&cli.out.join("calculus.json"), &out)?;
    println!("calculus -> {}", cli.out.display());
    Ok(())
}

fn cmd_decompose(cli: &Cli, operator: &Path, cover_path: &Path) -> Result<()> {
    let op: OperatorModel = parse_file(operator, "operator")?;
    let cover: CoverPair = parse_file(cover_path, "cover")?;
    let cfg = cfg_of(cli);
    let witness = super_decompose(&op, &cover, &cfg)?;
    let manifest = manifest_of(
        cli,
        "decompose",
        &[("operator", operator), ("cover", cover_path)],
        json!({}),
    );
    let mut body = json!({
        "meta": meta_block(&manifest),
        "cycle": serde_json::to_value(&witness.cycle)?,
        "projection": matrix_json(&witness.result.matrix),
        "diagnostics": diagnostics_json(&witness.result.diagnostics),
        "interior_spec_in_u": witness.interior_spec_in_u,
        "exterior_spec_in_v": witness.exterior_spec_in_v,
        "exterior_vacuous": witness.exterior_vacuous,
    });
    // series/dense comparison for diagonal-plus-series models
    if let OperatorModel::DiagonalPlusSeries(_) = &op {
        let dense = OperatorModel::Dense(op.to_dense());
        let dense_result = riesz_projection(&dense, &witness.cycle, &cfg)?;
        let delta = witness.result.matrix.distance(&dense_result.matrix);
        body["series_vs_dense"] = json!(delta);
    }
    report::write_json(&cli.out.join("witness.json"), &body)?;
    println!(
        "decompose: inclusions U:{} V:{} -> {}",
        witness.interior_spec_in_u,
        witness.exterior_spec_in_v,
        cli.out.display()
    );
    Ok(())
}

fn cmd_perturb(cli: &Cli, operator: &Path, action: &PerturbAction) -> Result<()> {
    let op: OperatorModel = parse_file(operator, "operator")?;
    let OperatorModel::DiagonalPlusSeries(dps) = &op else {
        anyhow::bail!("perturb commands need a diag_plus_series operator file");
    };
    let pd = PerturbedDiagonal::from_ops(dps.clone())?;
    let cfg = cfg_of(cli);

    match action {
        PerturbAction::Grid { nx, ny, cap } => {
            let cap = cap.unwrap_or_else(|| pd.default_cap());
            let grid = build_appropriate_grid(&pd, *nx, *ny, cap)?;
            let manifest = manifest_of(
                cli,
                "perturb-grid",
                &[("operator", operator)],
                json!({"nx": nx, "ny": ny, "cap": cap}),
            );
            let out = json!({
                "meta": meta_block(&manifest),
                "grid": serde_json::to_value(&grid)?,
                "summability": serde_json::to_value(pd.summability)?,
            });
            report::write_json(&cli.out.join("grid.json"), &out)?;
            println!("grid: {}x{} -> {}", grid.xs.len(), grid.ys.len(), cli.out.display());
        }
        PerturbAction::CurveCheck { curve } => {
            let cycle: Cycle = parse_file(curve, "curve")?;
            let cv = cycle
                .curves
                .first()
                .context("curve file holds no curves")?;
            check_appropriate_curve(&pd, cv, pd.default_cap())?;
            let manifest = manifest_of(
                cli,
                "perturb-curve-check",
                &[("operator", operator), ("curve", curve)],
                json!({}),
            );
            let out = json!({
                "meta": meta_block(&manifest),
                "appropriate": true,
            });
            report::write_json(&cli.out.join("report.json"), &out)?;
            println!("curve is appropriate -> {}", cli.out.display());
        }
        PerturbAction::Project { curve } => {
            let cycle: Cycle = parse_file(curve, "curve")?;
            let cv = cycle
                .curves
                .first()
                .context("curve file holds no curves")?;
            let result = series_projection(&pd, cv, &cfg)?;
            // dense oracle comparison
            let dense = densify(&pd);
            let oracle = riesz_projection(&dense, &Cycle::single(cv.clone()), &cfg)?;
            let delta = result.matrix.distance(&oracle.matrix);
            let manifest = manifest_of(
                cli,
                "perturb-project",
                &[("operator", operator), ("curve", curve)],
                json!({}),
            );
            let out = json!({
                "meta": meta_block(&manifest),
                "projection": matrix_json(&result.matrix),
                "diagnostics": diagnostics_json(&result.diagnostics),
                "series_vs_dense": delta,
            });
            report::write_json(&cli.out.join("report.json"), &out)?;
            println!("series projection: ‖series − dense‖ = {delta:.3e} -> {}", cli.out.display());
        }
        PerturbAction::Calculus { curve, f, domain } => {
            let cycle: Cycle = parse_file(curve, "curve")?;
            let cv = cycle
                .curves
                .first()
                .context("curve file holds no curves")?;
            let region: Region = parse_file(domain, "domain region")?;
            let fx = FunctionExpr::parse(f, region)?;
            let result = series_calculus(&pd, cv, &fx, &cfg)?;
            let manifest = manifest_of(
                cli,
                "perturb-calculus",
                &[("operator", operator), ("curve", curve), ("domain", domain)],
                json!({"f": f}),
            );
            let m = &result.matrix;
            let out = json!({
                "meta": meta_block(&manifest),
                "calculus": {
                    "kind": "dense",
                    "data": (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                },
                "dense_agreement": result.dense_agreement,
                "quadrature_error": result.quadrature_error,
            });
            report::write_json(&cli.out.join("report.json"), &out)?;
            println!(
                "series calculus: dense agreement {:.3e} -> {}",
                result.dense_agreement,
                cli.out.display()
            );
        }
    }
    Ok(())
}
