//! `adscurv`: runs the surface, approximation and verification checks and
//! writes JSON reports and CSV tables.

mod checks;
mod report;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use adscurv::conemetric::MetricTriangulation;
use adscurv::surface::{GeodesicMesh, MeshParams};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::checks::ApproxParams;
use crate::report::{Report, ReportSet};
use crate::spec::{FunctionSpec, RegionSpec, SourceSpec};

#[derive(Parser)]
#[command(name = "adscurv", version, about = "Checks for convex space-like graphs in AdS3 and cone-metric approximation")]
struct Cli {
    /// Seed for every random sample (recorded in reports).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, default_value = "adscurv-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Induced distance of a builtin height function against the hyperbolic distance.
    Surface(SurfaceArgs),
    /// Hyperbolic cone-metric approximation of a source metric for a list of eps.
    Approx(ApproxArgs),
    /// Runs the named property checks (all by default).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SurfaceArgs {
    /// zero | const:R | cone:h0 | smoothed-cone:h0,rho | envelope:seed=N
    #[arg(long = "fn")]
    function: FunctionSpec,
    /// Mesh covering radius.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// Neighbour stencil radius in lattice steps.
    #[arg(long, default_value_t = 16)]
    stencil: i32,
    /// octagon | disc:R
    #[arg(long, default_value = "octagon")]
    region: RegionSpec,
    /// Number of random vertex pairs.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Sample points for the minimal stretch K.
    #[arg(long, default_value_t = 4000)]
    samples: usize,
}

#[derive(Args)]
struct ApproxArgs {
    /// u0 | zero | const:R
    #[arg(long, default_value = "const:0.5235987755982988")]
    src: SourceSpec,
    /// Comma-separated triangulation sizes.
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1")]
    eps: Vec<f64>,
    /// Steiner points per edge; defaults to round(0.4 / eps).
    #[arg(long)]
    steiner: Option<usize>,
    /// Node pairs for the distance window.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Triangles sampled by the chord comparison.
    #[arg(long, default_value_t = 20)]
    triangles: usize,
    /// Chord pairs per triangle.
    #[arg(long, default_value_t = 100)]
    chord_pairs: usize,
    /// Metric triangulation JSON checked in addition to the source pipeline.
    #[arg(long)]
    triangulation: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// JSON file overriding the suite parameters.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parameters of the verification suite; a config file may set any subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerifyConfig {
    seed: u64,
    chart_lines: usize,
    chord_samples: usize,
    envelopes: usize,
    mesh_h: f64,
    mesh_stencil: i32,
    surface_pairs: usize,
    spacelike_samples: usize,
    eps: Vec<f64>,
    window_pairs: usize,
    chord_triangles: usize,
    chord_pairs: usize,
    constant_height: f64,
    rhos: Vec<f64>,
    strictify: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            chart_lines: 10_000,
            chord_samples: 100_000,
            envelopes: 3,
            mesh_h: 0.1,
            mesh_stencil: 10,
            surface_pairs: 40,
            spacelike_samples: 4000,
            eps: vec![0.4, 0.2],
            window_pairs: 100,
            chord_triangles: 20,
            chord_pairs: 100,
            constant_height: std::f64::consts::FRAC_PI_6,
            rhos: vec![0.2, 0.1, 0.05],
            strictify: 0.9,
        }
    }
}

const CHECKS: &[&str] = &[
    "causal",
    "chord-bound",
    "spacelike",
    "bounds",
    "invariance",
    "systole",
    "cone-angles",
    "chord-comparison",
    "distance-window",
    "smoothing",
    "smoothing-distances",
    "length-convergence",
];

/// Input or usage problem: exit code 2, nothing written.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn write_csv(dir: &Path, name: &str, text: &str) -> Result<(), InputError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn run_surface(a: &SurfaceArgs, seed: u64, out: &Path) -> Result<ReportSet, InputError> {
    if !(a.h > 0.0) || a.stencil < 1 || a.pairs == 0 {
        return Err(InputError("--h must be positive, --stencil and --pairs at least 1".into()));
    }
    let u = a.function.build()?;
    let mesh = Arc::new(GeodesicMesh::build(a.region.mesh_region(), MeshParams::new(a.h, a.stencil))?);
    let run = checks::surface_checks(&a.function, &u, mesh, &a.region, a.pairs, a.samples, seed)?;
    let config = json!({ "function": a.function.to_string(), "h": a.h, "stencil": a.stencil,
                         "region": a.region.to_string(), "pairs": a.pairs, "samples": a.samples });
    write_csv(out, "pairs.csv", &run.pairs_csv)?;
    write_csv(out, "distances.csv", &run.distances_csv)?;
    Ok(ReportSet::new("surface", seed, config, &[], run.reports))
}

fn run_approx(a: &ApproxArgs, seed: u64, out: &Path) -> Result<ReportSet, InputError> {
    let mut inputs = Vec::new();
    let file = match &a.triangulation {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            let mt = MetricTriangulation::from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            inputs.push(bytes);
            Some(mt)
        }
        None => None,
    };
    if a.eps.is_empty() || a.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(InputError("--eps needs positive values".into()));
    }
    let src = a.src.build()?;
    let params = ApproxParams {
        eps: a.eps.clone(),
        steiner: a.steiner,
        pairs: a.pairs,
        triangles: a.triangles,
        chord_pairs: a.chord_pairs,
        seed,
    };
    let mut run = checks::approx_checks(&a.src, &src, &params);
    if let Some(mt) = &file {
        run.reports.extend(checks::triangulation_file_checks(mt));
    }
    let config = json!({ "src": a.src.to_string(), "eps": a.eps, "steiner": a.steiner, "pairs": a.pairs,
                         "triangles": a.triangles, "chord_pairs": a.chord_pairs,
                         "triangulation": a.triangulation.as_ref().map(|p| p.display().to_string()) });
    write_csv(out, "error_vs_eps.csv", &run.table_csv)?;
    Ok(ReportSet::new("approx", seed, config, &inputs, run.reports))
}

fn run_verify(a: &VerifyArgs, seed: Option<u64>) -> Result<ReportSet, InputError> {
    let mut inputs = Vec::new();
    let mut cfg = match &a.config {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            let cfg: VerifyConfig = serde_json::from_slice(&bytes)
                .map_err(|e| InputError(format!("{}: schema error: {e}", path.display())))?;
            inputs.push(bytes);
            cfg
        }
        None => VerifyConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if cfg.eps.is_empty() || cfg.eps.iter().any(|e| !(*e > 0.0)) || !(cfg.mesh_h > 0.0) || cfg.mesh_stencil < 1 {
        return Err(InputError("config: eps must be a non-empty list of positive values, mesh_h positive, mesh_stencil at least 1".into()));
    }
    for name in &a.only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(InputError(format!("unknown check '{name}' (known: {})", CHECKS.join(", "))));
        }
    }
    let selected: Vec<&str> = CHECKS.iter().copied().filter(|c| a.only.is_empty() || a.only.iter().any(|o| o == c)).collect();
    let s = cfg.seed;
    let constant = SourceSpec::Constant(cfg.constant_height);
    let mut reports: Vec<Report> = Vec::new();
    for name in &selected {
        let started = Instant::now();
        match *name {
            "causal" => reports.push(checks::causal_check(cfg.chart_lines, s)),
            "chord-bound" => reports.push(checks::chord_bound_check(cfg.chord_samples, s)),
            "spacelike" => reports.push(checks::spacelike_report(cfg.envelopes, cfg.spacelike_samples, s)),
            "bounds" => reports.extend(checks::envelope_bounds(
                cfg.envelopes,
                &RegionSpec::Octagon,
                MeshParams::new(cfg.mesh_h, cfg.mesh_stencil),
                cfg.surface_pairs,
                cfg.spacelike_samples,
                s,
            )),
            "invariance" => reports.push(checks::invariance_report(s)),
            "systole" => reports.push(checks::systole_report()),
            "cone-angles" => {
                // identity and excess come with the cone angles, for both sources
                for src in [SourceSpec::Hyperbolic, constant] {
                    let tag = format!("@{src},eps={}", cfg.eps[0]);
                    let r = src.build().and_then(|m| {
                        let qt = adscurv::conemetric::triangulate_quotient(&m, cfg.eps[0])?;
                        adscurv::conemetric::build_cone_surface(qt.triangulation())
                    });
                    match r {
                        Ok(cs) => reports.extend(checks::cone_surface_reports(&tag, &cs, src.is_isometric())),
                        Err(e) => reports.push(Report::new(
                            format!("cone-angles{tag}"),
                            checks::ANCHOR_CONE_ANGLES,
                            false,
                            json!({ "error": e.to_string() }),
                            json!({}),
                        )),
                    }
                }
            }
            "chord-comparison" | "distance-window" => {
                let params = ApproxParams {
                    eps: if *name == "chord-comparison" { vec![cfg.eps[0]] } else { cfg.eps.clone() },
                    steiner: None,
                    pairs: cfg.window_pairs,
                    triangles: cfg.chord_triangles,
                    chord_pairs: cfg.chord_pairs,
                    seed: s,
                };
                let src = constant.build()?;
                let keep = if *name == "chord-comparison" { "chord-comparison" } else { "distance-window" };
                let run = checks::approx_checks(&constant, &src, &params);
                reports.extend(
                    run.reports
                        .into_iter()
                        .filter(|r| r.check.starts_with(keep) || r.check == "error-decrease" || r.check.starts_with("approximation")),
                );
            }
            "smoothing" => reports.push(checks::smoothing_check(&cfg.rhos, cfg.strictify)),
            "smoothing-distances" => reports.push(checks::smoothing_distance_report(&cfg.rhos)),
            "length-convergence" => reports.push(checks::length_convergence_report()),
            _ => unreachable!("names are validated"),
        }
        eprintln!("{name}: {:.1} s", started.elapsed().as_secs_f64());
    }
    let config = serde_json::to_value(&cfg)?;
    let config = json!({ "checks": selected, "suite": config });
    Ok(ReportSet::new("verify", s, config, &inputs, reports))
}

fn configure_threads() -> Result<(), InputError> {
    if let Ok(v) = std::env::var("ADSCURV_THREADS") {
        let n: usize = v.parse().map_err(|_| InputError(format!("ADSCURV_THREADS: '{v}' is not a count")))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let seed = cli.seed.unwrap_or(1);
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Surface(a) => run_surface(a, seed, &cli.out),
        Command::Approx(a) => run_approx(a, seed, &cli.out),
        Command::Verify(a) => run_verify(a, cli.seed),
    });
    let set = match result {
        Ok(set) => set,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = set.write(&cli.out) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    print!("{}", set.summary());
    eprintln!("runtime: {:.1} s", started.elapsed().as_secs_f64());
    match set.first_failure() {
        None => ExitCode::SUCCESS,
        Some(r) => {
            eprintln!("FAILED: {} ({})", r.check, r.anchor);
            ExitCode::from(1)
        }
    }
}
