//! Subcommand implementations.
//!
//! Every command reads the validated [`Job`], writes its artifact(s) into
//! the output directory with fixed names and 17-significant-digit float
//! formatting, and prints a one-line summary. Identical configs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use helixlab_core::constructions::{
    extrude, extrusion_angle_report, plane_curve_surface, ruled_surface, PlaneCurveOptions,
};
use helixlab_core::curve::{frenet, ConstancyReport, SlantOptions};
use helixlab_core::expr::Expr;
use helixlab_core::grid;
use helixlab_core::surface::{
    fundamental_forms, geodesic, line_of_curvature, ConstantAngleOptions, SurfaceCurve,
    SurfaceError, SurfacePatch, TangentDirection, TraceOptions,
};
use helixlab_core::verify::{
    curvature_line_orthogonality, developability_equivalence, fmt_f64, geodesic_slant,
    plane_curve_surface_checks, vn_normal_slant, CurvatureLineOrthOptions, DevEquivOptions,
    GeodesicSlantOptions, PlaneCurveChecksOptions, Verdict, VerificationReport, VnSlantOptions,
};

use crate::config::{Job, JobObject};
use crate::mesh::{build_mesh, export_obj};
use crate::CliError;

fn numeric_err(e: impl std::fmt::Display) -> CliError {
    CliError::input(e.to_string())
}

fn ensure_out_dir(job: &Job) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&job.out_dir)
        .map_err(|e| CliError::input(format!("cannot create output dir: {e}")))?;
    Ok(job.out_dir.clone())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Builds the surface a surface-level subcommand operates on.
fn surface_of(job: &Job) -> Result<SurfacePatch, CliError> {
    match &job.object {
        JobObject::Curve(_) => Err(CliError::input(
            "this subcommand needs a surface object (plane-curve-surface, extrusion, or ruled)",
        )),
        JobObject::PlaneCurveSurface {
            alpha,
            theta,
            v_domain,
        } => Ok(
            plane_curve_surface(alpha, *theta, *v_domain, &PlaneCurveOptions::default())
                .map_err(numeric_err)?
                .patch,
        ),
        JobObject::Extrusion(spec) => extrude(spec).map_err(numeric_err),
        JobObject::Ruled(spec) => ruled_surface(spec, 64).map_err(numeric_err),
    }
}

fn constancy_text(report: &ConstancyReport, label: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "report: {label}");
    let _ = writeln!(out, "samples: {}", report.count());
    let _ = writeln!(out, "mean = {}", fmt_f64(report.mean));
    let _ = writeln!(out, "max_deviation = {}", fmt_f64(report.max_deviation));
    let _ = writeln!(out, "tolerance = {}", fmt_f64(report.tolerance));
    let _ = writeln!(out, "excluded: {}", report.excluded);
    let _ = writeln!(out, "absolute: {}", report.absolute);
    let _ = writeln!(out, "right-angle flag: {}", report.right_angle);
    let _ = writeln!(
        out,
        "verdict: {}",
        if report.is_constant() {
            "constant"
        } else {
            "not constant"
        }
    );
    out
}

// ---------------------------------------------------------------------------

/// `frenet`: CSV of frame vectors and curvatures along the job's curve.
pub fn cmd_frenet(job: &Job) -> Result<(), CliError> {
    let curve = job.curve()?;
    let n = curve.dim();
    let out_dir = ensure_out_dir(job)?;
    let (a, b) = curve.domain();
    let ts = grid::linspace(a, b, job.samples.max(2));

    let mut csv = String::new();
    csv.push('t');
    for i in 1..=n {
        for c in 1..=n {
            let _ = write!(csv, ",v{i}_{c}");
        }
    }
    for i in 1..n {
        let _ = write!(csv, ",k_{i}");
    }
    csv.push('\n');
    for &t in &ts {
        let fr = frenet(&curve, t)
            .map_err(|e| CliError::input(format!("frenet at t = {t}: {e}")))?;
        let _ = write!(csv, "{}", fmt_f64(t));
        for v in &fr.frame {
            for &x in v {
                let _ = write!(csv, ",{}", fmt_f64(x));
            }
        }
        for &k in &fr.curvatures {
            let _ = write!(csv, ",{}", fmt_f64(k));
        }
        csv.push('\n');
    }
    let path = out_dir.join("frenet.csv");
    write_file(&path, &csv)?;
    println!("wrote {} ({} rows)", path.display(), ts.len());
    Ok(())
}

/// `slant`: constancy report of ⟨V_i, X⟩ along the job's curve.
pub fn cmd_slant(job: &Job) -> Result<(), CliError> {
    let curve = job.curve()?;
    let (index, direction) = job
        .slant
        .clone()
        .ok_or_else(|| CliError::input("slant: section required for this subcommand"))?;
    let mut opts = SlantOptions::default();
    if let Some(tol) = job.constancy_tol {
        opts.tol_const = tol;
    }
    let report =
        helixlab_core::curve::slant_helix_report(&curve, index, &direction, job.samples, &opts)
            .map_err(numeric_err)?;
    let text = constancy_text(&report, "slant");
    let out_dir = ensure_out_dir(job)?;
    let path = out_dir.join("slant.txt");
    write_file(&path, &text)?;
    print!("{text}");
    println!("wrote {}", path.display());
    Ok(())
}

/// `surface-gen`: CSV of sampled surface points.
pub fn cmd_surface_gen(job: &Job) -> Result<(), CliError> {
    let patch = surface_of(job)?;
    let out_dir = ensure_out_dir(job)?;
    let [ud, vd] = patch.domain();
    let us = grid::linspace(ud.0, ud.1, job.grid.0);
    let vs = grid::linspace(vd.0, vd.1, job.grid.1);
    let dim = patch.dim();

    let mut csv = String::from("u,v");
    for i in 1..=dim {
        let _ = write!(csv, ",x_{i}");
    }
    csv.push('\n');
    for &u in &us {
        for &v in &vs {
            let p = patch
                .position(u, v)
                .map_err(|e| CliError::input(format!("at (u, v) = ({u}, {v}): {e}")))?;
            let _ = write!(csv, "{},{}", fmt_f64(u), fmt_f64(v));
            for &x in &p {
                let _ = write!(csv, ",{}", fmt_f64(x));
            }
            csv.push('\n');
        }
    }
    let path = out_dir.join("surface.csv");
    write_file(&path, &csv)?;
    println!(
        "wrote {} ({} points, dimension {dim})",
        path.display(),
        us.len() * vs.len()
    );
    Ok(())
}

/// `surface-report`: fundamental-forms grid CSV plus a summary.
pub fn cmd_surface_report(job: &Job) -> Result<(), CliError> {
    let patch = surface_of(job)?;
    if patch.dim() != 3 {
        return Err(CliError::input(
            "surface-report needs a surface in 3-space",
        ));
    }
    let out_dir = ensure_out_dir(job)?;
    let [ud, vd] = patch.domain();
    let us = grid::linspace(ud.0, ud.1, job.grid.0);
    let vs = grid::linspace(vd.0, vd.1, job.grid.1);
    let opts = job.surface_opts;

    let mut csv = String::from("u,v,E,F,G,L,M,N,K,H\n");
    let mut excluded = 0usize;
    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    for &u in &us {
        for &v in &vs {
            match fundamental_forms(&patch, u, v, &opts) {
                Ok(ff) => {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{},{}",
                        fmt_f64(u),
                        fmt_f64(v),
                        fmt_f64(ff.e),
                        fmt_f64(ff.f),
                        fmt_f64(ff.g),
                        fmt_f64(ff.l),
                        fmt_f64(ff.m),
                        fmt_f64(ff.n),
                        fmt_f64(ff.gauss),
                        fmt_f64(ff.mean)
                    );
                    k_min = k_min.min(ff.gauss);
                    k_max = k_max.max(ff.gauss);
                    h_min = h_min.min(ff.mean);
                    h_max = h_max.max(ff.mean);
                }
                Err(SurfaceError::Singular { .. }) => excluded += 1,
                Err(e) => {
                    return Err(CliError::input(format!("at (u, v) = ({u}, {v}): {e}")))
                }
            }
        }
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "grid: {} x {}", us.len(), vs.len());
    let _ = writeln!(summary, "regular points: {}", us.len() * vs.len() - excluded);
    let _ = writeln!(summary, "excluded (singular): {excluded}");
    let _ = writeln!(summary, "K min = {}", fmt_f64(k_min));
    let _ = writeln!(summary, "K max = {}", fmt_f64(k_max));
    let _ = writeln!(summary, "H min = {}", fmt_f64(h_min));
    let _ = writeln!(summary, "H max = {}", fmt_f64(h_max));

    let forms_path = out_dir.join("forms.csv");
    write_file(&forms_path, &csv)?;
    let summary_path = out_dir.join("summary.txt");
    write_file(&summary_path, &summary)?;
    print!("{summary}");
    println!("wrote {} and {}", forms_path.display(), summary_path.display());
    Ok(())
}

/// `geodesic`: trace CSV.
pub fn cmd_geodesic(job: &Job) -> Result<(), CliError> {
    let patch = surface_of(job)?;
    let params = job
        .geodesic
        .ok_or_else(|| CliError::input("geodesic: section required for this subcommand"))?;
    let trace = geodesic(
        &patch,
        params.start,
        &TangentDirection::Uv(params.direction),
        params.length,
        params.step,
        &TraceOptions {
            surface: job.surface_opts,
        },
    )
    .map_err(numeric_err)?;
    let out_dir = ensure_out_dir(job)?;
    let mut csv = String::from("s,u,v,x,y,z\n");
    for s in &trace.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(s.s),
            fmt_f64(s.u),
            fmt_f64(s.v),
            fmt_f64(s.ambient[0]),
            fmt_f64(s.ambient[1]),
            fmt_f64(s.ambient[2])
        );
    }
    let path = out_dir.join("geodesic.csv");
    write_file(&path, &csv)?;
    println!("wrote {} ({} samples)", path.display(), trace.samples.len());
    Ok(())
}

/// `curvature-line`: trace CSV including the followed eigenvalue.
pub fn cmd_curvature_line(job: &Job) -> Result<(), CliError> {
    let patch = surface_of(job)?;
    let params = job
        .curvature_line
        .ok_or_else(|| CliError::input("curvature_line: section required for this subcommand"))?;
    let trace = line_of_curvature(
        &patch,
        params.start,
        params.branch,
        params.length,
        params.step,
        &TraceOptions {
            surface: job.surface_opts,
        },
    )
    .map_err(numeric_err)?;
    let out_dir = ensure_out_dir(job)?;
    let mut csv = String::from("s,u,v,x,y,z,lambda\n");
    for s in &trace.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.s),
            fmt_f64(s.u),
            fmt_f64(s.v),
            fmt_f64(s.ambient[0]),
            fmt_f64(s.ambient[1]),
            fmt_f64(s.ambient[2]),
            fmt_f64(s.lambda)
        );
    }
    let path = out_dir.join("curvature_line.csv");
    write_file(&path, &csv)?;
    println!("wrote {} ({} samples)", path.display(), trace.samples.len());
    Ok(())
}

/// `mesh`: OBJ export of the surface grid.
pub fn cmd_mesh(job: &Job) -> Result<(), CliError> {
    let patch = surface_of(job)?;
    let mesh = build_mesh(
        &patch,
        job.grid.0,
        job.grid.1,
        job.mesh_normals,
        &job.surface_opts,
    )?;
    let out_dir = ensure_out_dir(job)?;
    let path = out_dir.join("mesh.obj");
    export_obj(&mesh, &path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    println!(
        "wrote {} ({}x{} grid, {} vertices, {} faces, {} excluded cells, {} singular vertices)",
        path.display(),
        mesh.nu,
        mesh.nv,
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.excluded_cells.len(),
        mesh.singular_vertices
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Runs the checks applicable to the job's object, optionally filtered by
/// check id. Returns whether every report avoided a `fail` verdict.
pub fn cmd_verify(job: &Job, check_filter: Option<&str>) -> Result<bool, CliError> {
    let reports = collect_reports(job, check_filter)?;
    if reports.is_empty() {
        return Err(CliError::input(match check_filter {
            Some(id) => format!("no check named `{id}` applies to this object"),
            None => "verify needs a surface-producing object".to_string(),
        }));
    }
    let mut text = String::new();
    for r in &reports {
        let _ = writeln!(text, "{r}");
        text.push('\n');
    }
    let out_dir = ensure_out_dir(job)?;
    let path = out_dir.join("verify.txt");
    write_file(&path, &text)?;
    print!("{text}");
    println!("wrote {}", path.display());
    Ok(reports.iter().all(|r| !r.verdict.is_failure()))
}

fn collect_reports(
    job: &Job,
    filter: Option<&str>,
) -> Result<Vec<VerificationReport>, CliError> {
    let wanted = |id: &str| filter.map(|f| f == id).unwrap_or(true);
    let mut reports = Vec::new();

    match &job.object {
        JobObject::Curve(_) => {}
        JobObject::PlaneCurveSurface {
            alpha,
            theta,
            v_domain,
        } => {
            let built =
                plane_curve_surface(alpha, *theta, *v_domain, &PlaneCurveOptions::default())
                    .map_err(numeric_err)?;
            let d = job
                .direction
                .clone()
                .unwrap_or_else(|| built.binormal.clone());

            if wanted("plane-curve-surface") {
                let mut opts = PlaneCurveChecksOptions::default();
                if let Some(tol) = job.constancy_tol {
                    opts.angle_tol = tol;
                }
                reports.push(
                    plane_curve_surface_checks(alpha, *theta, *v_domain, job.grid, &opts)
                        .map_err(numeric_err)?,
                );
            }
            if wanted("geodesic-slant") {
                if let Some(g) = job.geodesic {
                    reports.push(
                        geodesic_slant(
                            &built.patch,
                            &d,
                            g.start,
                            &TangentDirection::Uv(g.direction),
                            g.length,
                            g.step,
                            &GeodesicSlantOptions::default(),
                        )
                        .map_err(numeric_err)?,
                    );
                }
            }
            if wanted("curvature-line-orthogonality") {
                if let Some(c) = job.curvature_line {
                    for branch in [
                        helixlab_core::surface::Branch::Max,
                        helixlab_core::surface::Branch::Min,
                    ] {
                        reports.push(
                            curvature_line_orthogonality(
                                &built.patch,
                                &d,
                                c.start,
                                branch,
                                c.length,
                                c.step,
                                &CurvatureLineOrthOptions::default(),
                            )
                            .map_err(numeric_err)?,
                        );
                    }
                }
            }
            if wanted("normal-frame-slant") {
                // the directrix itself, as the v = v₀ parameter curve
                let t = Expr::parse("t", &["t"]).map_err(numeric_err)?;
                let v0 = t.lift(v_domain.0);
                let curve = SurfaceCurve::new(t, v0, alpha.domain()).map_err(numeric_err)?;
                reports.push(
                    vn_normal_slant(&built.patch, &d, &curve, &VnSlantOptions::default())
                        .map_err(numeric_err)?,
                );
            }
        }
        JobObject::Extrusion(spec) => {
            if wanted("extrusion-angle") {
                let mut opts = ConstantAngleOptions {
                    tol_const: 1e-8,
                    ..ConstantAngleOptions::default()
                };
                if let Some(tol) = job.constancy_tol {
                    opts.tol_const = tol;
                }
                let angle = extrusion_angle_report(spec, (job.grid.0, job.grid.0), job.grid.1, &opts)
                    .map_err(numeric_err)?;
                let mut rep = VerificationReport::new(
                    "extrusion-angle",
                    format!("extrusion at theta = {}", spec.theta),
                );
                rep.measure("angle_mean", angle.mean);
                rep.measure("angle_deviation", angle.max_deviation);
                rep.measure(
                    "angle_error_vs_sin_theta",
                    (angle.mean - spec.theta.sin()).abs(),
                );
                rep.excluded = angle.excluded;
                rep.verdict = if angle.is_constant()
                    && (angle.mean - spec.theta.sin()).abs() <= opts.tol_const
                {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                reports.push(rep);
            }
        }
        JobObject::Ruled(spec) => {
            if wanted("developability-equivalence") {
                reports.push(
                    developability_equivalence(spec, &DevEquivOptions::default())
                        .map_err(numeric_err)?,
                );
            }
        }
    }
    Ok(reports)
}
