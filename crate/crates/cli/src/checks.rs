//! The computations behind each command, returning reports.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use adscurv::ads3::{bilinear_form, chart_line_disc_crossing, classify_chart_line, CausalType, ChartPoint};
use adscurv::conemetric::{
    build_cone_surface, chord_bound_fuzz, chord_comparison_check, cone_angle_check, cone_distance, default_steiner,
    distance_window_check, excess_budget, sample_node_pairs, triangulate_quotient, ConeSurface, MetricTriangulation,
    ScaledHyperbolic,
};
use adscurv::fuchsian::{genus2_octagon_group, invariance_check, random_orbit_envelope, FuchsianCConvex};
use adscurv::hyp2::{h2_distance, H2Point, H2Polyline};
use adscurv::smoothing::{induced_curvature, smooth_cone, smoothing_distance_study, strictify, Patch};
use adscurv::surface::{
    length_convergence_check, mesh_tolerance, spacelike_check, CConvexFunction, ChartCone, GeodesicMesh,
    InducedDistanceField, MeshParams, MeshRegion, SupportPiece,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::Report;
use crate::spec::{FunctionSpec, RegionSpec, SourceSpec, ENVELOPE_BALL};

pub const ANCHOR_UPPER: &str = "induced distance is at most the hyperbolic distance";
pub const ANCHOR_LOWER: &str = "induced distance is at least K times the hyperbolic distance, K the minimal stretch";
pub const ANCHOR_SPACELIKE: &str = "graphs of C-convex functions are space-like";
pub const ANCHOR_SCALING: &str = "constant height R scales distances by cos R";
pub const ANCHOR_CAUSAL: &str = "time-like chart lines cross the disc";
pub const ANCHOR_CHORD_BOUND: &str = "isosceles chord with legs at most eps is at most sinh(eps) times the apex angle";
pub const ANCHOR_INVARIANCE: &str = "orbit envelopes are invariant under the group";
pub const ANCHOR_SYSTOLE: &str = "shortest closed geodesic of the regular genus-2 octagon surface";
pub const ANCHOR_CONE_ANGLES: &str = "cone angles are at least 2 pi, equal to 2 pi for hyperbolic sources";
pub const ANCHOR_IDENTITY: &str = "total excess equals cone defects plus 2 pi chi";
pub const ANCHOR_EXCESS: &str = "total excess is at least 2 pi chi";
pub const ANCHOR_CHORD_COMPARISON: &str = "comparison chords exceed source chords by at most -delta0 sinh(eps)";
pub const ANCHOR_WINDOW: &str = "cone distance error lies in [-2 eps, 2 eps - 2 pi chi sinh(eps)]";
pub const ANCHOR_ERROR_DECREASE: &str = "approximation error shrinks with eps";
pub const ANCHOR_SMOOTHING: &str = "smoothed cones keep curvature at most -1";
pub const ANCHOR_SMOOTHING_DISTANCE: &str = "smoothed cone distances converge to the cone distance";
pub const ANCHOR_LENGTH: &str = "lengths converge under uniform convergence of heights";

/// Roots of the sampled vertex pairs; each pair starts at one of them so
/// the shortest-path work stays bounded.
const PAIR_ROOTS: usize = 10;

fn error_report(check: &str, anchor: &'static str, err: impl std::fmt::Display) -> Report {
    Report::new(check, anchor, false, json!({ "error": err.to_string() }), json!({}))
}

pub fn random_vertex_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots: Vec<usize> = (0..PAIR_ROOTS.min(count).max(1)).map(|_| rng.gen_range(0..n)).collect();
    (0..count)
        .map(|k| {
            let a = roots[k % roots.len()];
            let mut b = rng.gen_range(0..n);
            while b == a && n > 1 {
                b = rng.gen_range(0..n);
            }
            (a, b)
        })
        .collect()
}

pub struct SurfaceRun {
    pub reports: Vec<Report>,
    /// `a,b,d_u,d_h2_graph,d_h2` per sampled pair.
    pub pairs_csv: String,
    /// Distance matrix between the pair roots.
    pub distances_csv: String,
}

/// Upper, lower, space-like and (for constant heights) scaling checks of
/// the induced distance of `spec` on `mesh`.
pub fn surface_checks(
    spec: &FunctionSpec,
    u: &CConvexFunction,
    mesh: Arc<GeodesicMesh>,
    region: &RegionSpec,
    pair_count: usize,
    samples: usize,
    seed: u64,
) -> adscurv::Result<SurfaceRun> {
    let label = spec.to_string();
    let pairs = random_vertex_pairs(mesh.vertex_count(), pair_count, seed);
    let roots: Vec<usize> = pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
    let mut field = InducedDistanceField::new(u, mesh.clone())?;
    field.compute_sources(&roots);
    let graph = mesh.hyperbolic_graph();
    let hyperbolic_rows: Vec<Vec<f64>> = roots.iter().map(|&r| graph.dijkstra(r)).collect();
    let spacelike = spacelike_check(u, samples, &region.sampler(), seed);
    let k = spacelike.min_ratio;
    let tol = mesh_tolerance(&mesh);

    let mut pairs_csv = String::from("a,b,d_u,d_h2_graph,d_h2\n");
    let (mut upper_worst, mut lower_worst, mut max_ratio) = (f64::NEG_INFINITY, f64::INFINITY, 0.0f64);
    let (mut upper_violations, mut lower_violations) = (0usize, 0usize);
    let mut scaling_err = 0.0f64;
    for &(a, b) in &pairs {
        let du = field.distance(a, b).expect("row computed");
        let dg = hyperbolic_rows[roots.binary_search(&a).expect("root")][b];
        let dh = h2_distance(&mesh.vertices()[a], &mesh.vertices()[b]);
        let _ = writeln!(pairs_csv, "{a},{b},{du:.12e},{dg:.12e},{dh:.12e}");
        upper_worst = upper_worst.max(du - dg);
        if du > dg {
            upper_violations += 1;
        }
        let lower_slack = du - (k * dh - tol);
        lower_worst = lower_worst.min(lower_slack);
        if lower_slack < 0.0 {
            lower_violations += 1;
        }
        if dh > 0.0 {
            max_ratio = max_ratio.max(du / dh);
        }
        if let Some(r) = spec.constant_height() {
            let target = r.cos() * dh;
            if target > 0.0 {
                scaling_err = scaling_err.max((du - target).abs() / target);
            }
        }
    }
    let common = json!({ "function": label, "pairs": pairs.len(), "vertices": mesh.vertex_count() });
    let mut reports = vec![
        Report::new(
            "upper-bound",
            ANCHOR_UPPER,
            upper_violations == 0,
            json!({ "run": common, "violations": upper_violations, "max_excess_over_mesh_h2": upper_worst,
                    "max_ratio_to_exact_h2": max_ratio }),
            json!({ "slack": 0.0, "reference": "hyperbolic distance on the same mesh" }),
        ),
        Report::new(
            "lower-bound",
            ANCHOR_LOWER,
            lower_violations == 0,
            json!({ "run": common, "violations": lower_violations, "min_margin": lower_worst, "K": k }),
            json!({ "mesh_slack": tol }),
        ),
        Report::new(
            "spacelike",
            ANCHOR_SPACELIKE,
            spacelike.pass,
            json!({ "function": label, "K": k, "samples": spacelike.samples, "skipped": spacelike.skipped }),
            json!({ "K_greater_than": 0.0 }),
        ),
    ];
    if let Some(r) = spec.constant_height() {
        reports.push(Report::new(
            "conformal-scaling",
            ANCHOR_SCALING,
            scaling_err < 1e-3,
            json!({ "run": common, "factor": r.cos(), "max_relative_error": scaling_err }),
            json!({ "relative": 1e-3 }),
        ));
    }
    let distances_csv = field.to_csv(&roots);
    Ok(SurfaceRun { reports, pairs_csv, distances_csv })
}

#[derive(Debug, Clone)]
pub struct ApproxParams {
    pub eps: Vec<f64>,
    pub steiner: Option<usize>,
    pub pairs: usize,
    pub triangles: usize,
    pub chord_pairs: usize,
    pub seed: u64,
}

pub struct ApproxRun {
    pub reports: Vec<Report>,
    pub table_csv: String,
}

const ANGLE_TOL: f64 = 1e-8;
const WINDOW_SLACK: f64 = 1e-9;

/// Cone angle, excess and identity reports of a cone surface.
pub fn cone_surface_reports(tag: &str, cs: &ConeSurface, exact_angles: bool) -> Vec<Report> {
    let mut out = Vec::new();
    let angles = cone_angle_check(cs);
    let worst_dev = cs.cone_angles().iter().map(|a| (a - 2.0 * PI).abs()).fold(0.0, f64::max);
    let ok = if exact_angles { worst_dev < ANGLE_TOL } else { angles.pass };
    out.push(Report::new(
        format!("cone-angles{tag}"),
        ANCHOR_CONE_ANGLES,
        ok,
        json!({ "min_angle": angles.min_angle, "max_deviation_from_2pi": worst_dev, "violators": angles.violators.len(),
                "vertices": cs.cone_angles().len() }),
        json!({ "angle": ANGLE_TOL, "exact": exact_angles }),
    ));
    let residual = cs.identity_residual();
    out.push(Report::new(
        format!("identity{tag}"),
        ANCHOR_IDENTITY,
        residual.abs() < ANGLE_TOL,
        json!({ "residual": residual }),
        json!({ "absolute": ANGLE_TOL }),
    ));
    if cs.triangulation().is_closed() {
        match excess_budget(cs) {
            Ok(ex) => {
                let ok = if exact_angles { (ex.total_excess - ex.bound).abs() < ANGLE_TOL } else { ex.pass };
                out.push(Report::new(
                    format!("excess{tag}"),
                    ANCHOR_EXCESS,
                    ok,
                    json!({ "total_excess": ex.total_excess, "two_pi_chi": ex.bound }),
                    json!({ "absolute": ANGLE_TOL, "exact": exact_angles }),
                ))
            }
            Err(e) => out.push(error_report(&format!("excess{tag}"), ANCHOR_EXCESS, e)),
        }
    }
    out
}

fn evenly_spaced(n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n).max(1);
    (0..k).map(|i| i * n / k).collect()
}

/// One approximation step at `eps`; returns the reports, the window
/// report's max |error| and a CSV row.
fn approx_step(
    src: &ScaledHyperbolic,
    spec: &SourceSpec,
    eps: f64,
    p: &ApproxParams,
) -> adscurv::Result<(Vec<Report>, f64, String)> {
    let tag = format!("@eps={eps}");
    let m = p.steiner.unwrap_or_else(|| default_steiner(eps));
    let qt = triangulate_quotient(src, eps)?;
    let mt = qt.triangulation();
    let cs = build_cone_surface(mt)?;
    let mut reports = cone_surface_reports(&tag, &cs, spec.is_isometric());

    let tris = evenly_spaced(mt.triangles().len(), p.triangles);
    let cc = chord_comparison_check(src, &qt, &tris, p.chord_pairs, p.seed)?;
    reports.push(Report::new(
        format!("chord-comparison{tag}"),
        ANCHOR_CHORD_COMPARISON,
        cc.pass,
        json!({ "triangles": cc.triangles, "samples": cc.samples, "min_gap": cc.min_gap,
                "max_bound_ratio": cc.max_bound_ratio, "violations": cc.violations }),
        json!({ "absolute": cc.tolerance }),
    ));

    let mut cdf = cone_distance(&cs, m)?;
    let pairs = sample_node_pairs(&cdf, p.pairs, PAIR_ROOTS, p.seed);
    let w = distance_window_check(src, &qt, &mut cdf, &pairs, WINDOW_SLACK)?;
    reports.push(Report::new(
        format!("distance-window{tag}"),
        ANCHOR_WINDOW,
        w.pass,
        json!({ "pairs": w.pairs, "steiner_per_edge": m, "min_error": w.min_error, "max_error": w.max_error,
                "max_abs_error": w.max_abs_error, "window": [w.window.0, w.window.1], "histogram": w.histogram }),
        json!({ "slack": w.slack }),
    ));
    let row = format!(
        "{eps},{m},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
        mt.vertex_count(),
        mt.triangles().len(),
        w.min_error,
        w.max_error,
        w.max_abs_error,
        w.window.0,
        w.window.1,
        cc.min_gap,
        cc.max_bound_ratio,
        cs.total_excess()
    );
    Ok((reports, w.max_abs_error, row))
}

pub fn approx_checks(spec: &SourceSpec, src: &ScaledHyperbolic, p: &ApproxParams) -> ApproxRun {
    let mut reports = Vec::new();
    let mut table_csv = String::from(
        "eps,steiner,vertices,triangles,min_error,max_error,max_abs_error,window_lo,window_hi,chord_min_gap,chord_max_bound_ratio,total_excess\n",
    );
    let mut errors = Vec::new();
    for &eps in &p.eps {
        match approx_step(src, spec, eps, p) {
            Ok((r, e, row)) => {
                reports.extend(r);
                errors.push((eps, e));
                table_csv.push_str(&row);
            }
            Err(e) => reports.push(error_report(&format!("approximation@eps={eps}"), ANCHOR_WINDOW, e)),
        }
    }
    if !spec.is_isometric() && errors.len() >= 2 {
        let mut sorted = errors.clone();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let ok = sorted.windows(2).all(|w| w[1].1 < w[0].1);
        reports.push(Report::new(
            "error-decrease",
            ANCHOR_ERROR_DECREASE,
            ok,
            json!({ "max_abs_error_by_eps": sorted }),
            json!({ "strict": true }),
        ));
    }
    ApproxRun { reports, table_csv }
}

/// Checks on a user-supplied metric triangulation.
pub fn triangulation_file_checks(mt: &MetricTriangulation) -> Vec<Report> {
    match build_cone_surface(mt) {
        Ok(cs) => cone_surface_reports("@file", &cs, false),
        Err(e) => vec![error_report("cone-surface@file", ANCHOR_CONE_ANGLES, e)],
    }
}

fn gram_class(a: &ChartPoint, b: &ChartPoint) -> (CausalType, f64) {
    let la = [1.0, a.xbar1, a.xbar2, a.xbar3];
    let lb = [1.0, b.xbar1, b.xbar2, b.xbar3];
    let (p, q, r) = (bilinear_form(&la, &la), bilinear_form(&la, &lb), bilinear_form(&lb, &lb));
    let rel = (p * r - q * q) / (p * r).abs().max(q * q);
    let class = if rel > 0.0 { CausalType::TimeLike } else { CausalType::SpaceLike };
    (class, rel)
}

/// Random chart lines against the Gram determinant of their lifts; lines
/// with a near-zero determinant are only required to agree on crossing.
pub fn causal_check(lines: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || loop {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        if let Ok(c) = ChartPoint::new(p[0], p[1], p[2]) {
            if c.boundary_value() < 0.999 {
                return c;
            }
        }
    };
    let (mut disagreements, mut misses, mut timelike, mut errors) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..lines {
        let (a, b) = (point(), point());
        let got = match classify_chart_line(&a, &b) {
            Ok(c) => c,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let (oracle, rel) = gram_class(&a, &b);
        if rel.abs() > 1e-8 && got != oracle {
            disagreements += 1;
        }
        if got == CausalType::TimeLike {
            timelike += 1;
            if !chart_line_disc_crossing(&a, &b).is_some_and(|z| z[0] * z[0] + z[1] * z[1] < 1.0) {
                misses += 1;
            }
        }
    }
    Report::new(
        "causal",
        ANCHOR_CAUSAL,
        disagreements == 0 && misses == 0 && errors == 0,
        json!({ "lines": lines, "timelike": timelike, "disagreements": disagreements, "disc_misses": misses,
                "errors": errors }),
        json!({ "discriminant": 1e-10, "oracle_margin": 1e-8 }),
    )
}

pub fn chord_bound_check(samples: usize, seed: u64) -> Report {
    let r = chord_bound_fuzz(samples, 2.0, seed);
    Report::new(
        "chord-bound",
        ANCHOR_CHORD_BOUND,
        r.violations == 0,
        json!({ "samples": r.samples, "violations": r.violations, "max_ratio": r.max_ratio, "worst": r.worst }),
        json!({ "absolute": 1e-12 }),
    )
}

pub fn invariance_report(seed: u64) -> Report {
    let g = genus2_octagon_group();
    match random_orbit_envelope(&g, seed, ENVELOPE_BALL) {
        Ok(u) => {
            let fc = FuchsianCConvex::new(u, g, 1e-9);
            let r = invariance_check(&fc, 300, seed);
            Report::new(
                "invariance",
                ANCHOR_INVARIANCE,
                r.pass,
                json!({ "sup_violation": r.sup_violation, "samples": r.samples, "sup_height": fc.sup_height(1000, seed) }),
                json!({ "absolute": r.tolerance }),
            )
        }
        Err(e) => error_report("invariance", ANCHOR_INVARIANCE, e),
    }
}

pub fn systole_report() -> Report {
    let expected = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    match genus2_octagon_group().systole_estimate(5) {
        Ok(s) => Report::new(
            "systole",
            ANCHOR_SYSTOLE,
            (s - expected).abs() < 1e-8,
            json!({ "estimate": s, "expected": expected }),
            json!({ "absolute": 1e-8 }),
        ),
        Err(e) => error_report("systole", ANCHOR_SYSTOLE, e),
    }
}

/// Curvature of capped cones on patches across the cap boundary, before
/// and after strictification.
pub fn smoothing_check(rhos: &[f64], lambda: f64) -> Report {
    let cone = match ChartCone::new(-1.0, [0.0, 0.0]) {
        Ok(c) => c,
        Err(e) => return error_report("smoothing", ANCHOR_SMOOTHING, e),
    };
    let mut rows = Vec::new();
    let mut ok = true;
    for &rho in rhos {
        let run = || -> adscurv::Result<serde_json::Value> {
            let u = smooth_cone(&cone, rho)?;
            let patch = Patch::new([rho, 0.0], rho / 2.0, rho / 80.0)?;
            let k = induced_curvature(&u, &patch)?;
            let s = strictify(&u, lambda)?.curvature(&patch)?;
            let pass = k.bounded_by(-1.0) && s.bounded_by(-1.0 / lambda);
            Ok(json!({ "rho": rho, "step": patch.step, "max_K": k.max_curvature(), "tolerance": k.tolerance(),
                       "max_K_strict": s.max_curvature(), "strict_tolerance": s.tolerance(), "pass": pass }))
        };
        match run() {
            Ok(v) => {
                ok &= v["pass"] == true;
                rows.push(v);
            }
            Err(e) => {
                ok = false;
                rows.push(json!({ "rho": rho, "error": e.to_string() }));
            }
        }
    }
    Report::new(
        "smoothing",
        ANCHOR_SMOOTHING,
        ok,
        json!({ "patches": rows }),
        json!({ "curvature": "10 step^2", "strictify_factor": lambda }),
    )
}

pub fn smoothing_distance_report(rhos: &[f64]) -> Report {
    let run = || -> adscurv::Result<Report> {
        let mesh = Arc::new(GeodesicMesh::build(MeshRegion::Disc(1.0), MeshParams::new(0.1, 10))?);
        let far: Vec<usize> = (0..mesh.vertex_count()).filter(|&i| mesh.vertices()[i].klein()[0].abs() > 0.3).collect();
        let pairs: Vec<(usize, usize)> =
            (0..12).map(|k| (far[(k * 37) % far.len()], far[(k * 101 + far.len() / 2) % far.len()])).collect();
        let rep = smoothing_distance_study(-1.0, rhos, mesh, &pairs)?;
        Ok(Report::new(
            "smoothing-distances",
            ANCHOR_SMOOTHING_DISTANCE,
            rep.monotone,
            json!({ "rhos": rep.rhos, "gaps": rep.gaps }),
            json!({ "mesh": rep.tolerance }),
        ))
    };
    run().unwrap_or_else(|e| error_report("smoothing-distances", ANCHOR_SMOOTHING_DISTANCE, e))
}

/// The constant sequence `u_n = u`, the constants `R (1 - 1/n)` against
/// their closed form, and cones truncated at level `-(1 - 1/n)`, with
/// n = 1..=64.
pub fn length_convergence_report() -> Report {
    let run = || -> adscurv::Result<Report> {
        let r = 1.0;
        let c = H2Polyline::new(vec![H2Point::from_polar(1.0, 0.0), H2Point::from_polar(1.0, 2.0)])?;
        let lim = CConvexFunction::constant(r)?;
        let constant = length_convergence_check(&vec![lim.clone(); 64], &lim, &c, 1e-4)?;
        let seq = (1..=64).map(|n| CConvexFunction::constant(r * (1.0 - 1.0 / n as f64))).collect::<Result<Vec<_>, _>>()?;
        let shrinking = length_convergence_check(&seq, &lim, &c, f64::INFINITY)?;
        let closed_form_gap = shrinking
            .lengths
            .iter()
            .enumerate()
            .map(|(i, l)| (l - (r * (1.0 - 1.0 / (i + 1) as f64)).cos() * c.length()).abs())
            .fold(0.0, f64::max);

        let cone = ChartCone::new(-1.0, [0.0, 0.0])?;
        let bound = 1.0f64.atan();
        let lim = CConvexFunction::envelope(vec![SupportPiece::Cone(cone)], bound, "cone")?;
        let seq = (1..=64)
            .map(|n| {
                let level = -(1.0 - 1.0 / n as f64);
                CConvexFunction::envelope(vec![SupportPiece::Cone(cone), SupportPiece::horizontal(level)], bound, "trunc")
            })
            .collect::<Result<Vec<_>, _>>()?;
        let c = H2Polyline::new(vec![H2Point::from_klein([-0.5, 0.05])?, H2Point::from_klein([0.5, 0.05])?])?;
        let envelope = length_convergence_check(&seq, &lim, &c, 1e-4)?;
        Ok(Report::new(
            "length-convergence",
            ANCHOR_LENGTH,
            constant.pass && envelope.pass && shrinking.pass && closed_form_gap < 1e-12,
            json!({ "constant_last_difference": constant.differences.last(),
                    "envelope_last_difference": envelope.differences.last(),
                    "shrinking_constants_closed_form_gap": closed_form_gap, "n": 64 }),
            json!({ "absolute": 1e-4, "closed_form": 1e-12 }),
        ))
    };
    run().unwrap_or_else(|e| error_report("length-convergence", ANCHOR_LENGTH, e))
}

/// Upper and lower bounds for `count` random orbit envelopes on one mesh;
/// the reports of all envelopes are folded into one per bound.
pub fn envelope_bounds(
    count: usize,
    region: &RegionSpec,
    params: MeshParams,
    pairs: usize,
    samples: usize,
    seed: u64,
) -> Vec<Report> {
    let mesh = match GeodesicMesh::build(region.mesh_region(), params) {
        Ok(m) => Arc::new(m),
        Err(e) => return vec![error_report("bounds", ANCHOR_UPPER, e)],
    };
    let mut upper = (0usize, f64::NEG_INFINITY, true);
    let mut lower = (0usize, f64::INFINITY, true);
    let mut ks = Vec::new();
    for i in 0..count {
        let spec = FunctionSpec::Envelope { seed: seed.wrapping_add(i as u64) };
        let run = spec.build().and_then(|u| surface_checks(&spec, &u, mesh.clone(), region, pairs, samples, seed));
        let run = match run {
            Ok(r) => r,
            Err(e) => return vec![error_report("bounds", ANCHOR_UPPER, format!("{spec}: {e}"))],
        };
        for r in &run.reports {
            match r.check.as_str() {
                "upper-bound" => {
                    upper.0 += r.measured["violations"].as_u64().unwrap_or(0) as usize;
                    upper.1 = upper.1.max(r.measured["max_excess_over_mesh_h2"].as_f64().unwrap_or(f64::NAN));
                    upper.2 &= r.passed();
                }
                "lower-bound" => {
                    lower.0 += r.measured["violations"].as_u64().unwrap_or(0) as usize;
                    lower.1 = lower.1.min(r.measured["min_margin"].as_f64().unwrap_or(f64::NAN));
                    lower.2 &= r.passed();
                    ks.push(r.measured["K"].as_f64().unwrap_or(f64::NAN));
                }
                _ => {}
            }
        }
    }
    let common = json!({ "envelopes": count, "pairs_each": pairs, "vertices": mesh.vertex_count() });
    vec![
        Report::new(
            "upper-bound",
            ANCHOR_UPPER,
            upper.2,
            json!({ "run": common, "violations": upper.0, "max_excess_over_mesh_h2": upper.1 }),
            json!({ "slack": 0.0 }),
        ),
        Report::new(
            "lower-bound",
            ANCHOR_LOWER,
            lower.2,
            json!({ "run": common, "violations": lower.0, "min_margin": lower.1, "K": ks }),
            json!({ "mesh_slack": mesh_tolerance(&mesh) }),
        ),
    ]
}

pub fn spacelike_report(count: usize, samples: usize, seed: u64) -> Report {
    let g = genus2_octagon_group();
    let region = RegionSpec::Octagon.sampler();
    let mut ks = Vec::new();
    let mut ok = true;
    for i in 0..count {
        match random_orbit_envelope(&g, seed.wrapping_add(i as u64), ENVELOPE_BALL) {
            Ok(u) => {
                let r = spacelike_check(&u, samples, &region, seed);
                ok &= r.pass;
                ks.push(r.min_ratio);
            }
            Err(e) => return error_report("spacelike", ANCHOR_SPACELIKE, e),
        }
    }
    Report::new(
        "spacelike",
        ANCHOR_SPACELIKE,
        ok,
        json!({ "envelopes": count, "samples_each": samples, "K": ks }),
        json!({ "K_greater_than": 0.0 }),
    )
}
