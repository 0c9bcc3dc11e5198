//! Job configuration: TOML schema, validation, and the built-in preset.
//!
//! A job names one geometric object (`kind`) plus the sections the
//! subcommands need. Angle-valued fields (`theta`, domain bounds) accept
//! either numbers or exact `pi`-fraction strings. The special config value
//! `builtin:example-5.1` (usable as the whole `--config` argument or as
//! `kind` in a file) loads a preset plane-curve surface; file sections
//! override preset defaults.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Deserialize;

use helixlab_core::constructions::{ExtrusionSpec, Generator, NormalField, RuledSpec, RulingVariant};
use helixlab_core::curve::CurveN;
use helixlab_core::expr::Expr;
use helixlab_core::surface::Branch;

use crate::angle::parse_angle;
use crate::CliError;

pub const BUILTIN_NAME: &str = "builtin:example-5.1";

/// A number or an exact angle string such as `"pi/6"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Number(f64),
    Text(String),
}

impl AngleValue {
    fn resolve(&self, path: &str) -> Result<f64, CliError> {
        match self {
            AngleValue::Number(x) => Ok(*x),
            AngleValue::Text(s) => {
                parse_angle(s).map_err(|e| CliError::input(format!("{path}: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub kind: Option<String>,
    pub theta: Option<AngleValue>,
    pub direction: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub curve: Option<CurveSection>,
    pub generator: Option<CurveSection>,
    pub directrix: Option<CurveSection>,
    pub normal: Option<NormalSection>,
    pub surface: Option<SurfaceSection>,
    pub grid: Option<GridSection>,
    pub slant: Option<SlantSection>,
    pub geodesic: Option<GeodesicSection>,
    pub curvature_line: Option<CurvatureLineSection>,
    pub tolerances: Option<TolerancesSection>,
    pub output: Option<OutputSection>,
    pub mesh: Option<MeshSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub param: String,
    pub components: Vec<String>,
    pub domain: [AngleValue; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalSection {
    /// `"sphere"` (normals are position vectors) or `"explicit"`.
    pub kind: String,
    pub components: Option<Vec<String>>,
    /// `"normal"` (default) or `"tangent"` for the literal directrix-tangent
    /// ruling variant.
    pub ruling: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub v_domain: Option<[AngleValue; 2]>,
    pub s_domain: Option<[AngleValue; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlantSection {
    /// 1-based frame vector index.
    pub index: usize,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSection {
    pub start: [f64; 2],
    /// Coefficients of the start direction in the (φ_u, φ_v) basis.
    pub direction: [f64; 2],
    pub length: f64,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureLineSection {
    pub start: [f64; 2],
    /// `"max"` or `"min"` eigenvalue branch.
    pub branch: String,
    pub length: f64,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSection {
    pub constancy: Option<f64>,
    pub singular: Option<f64>,
    pub umbilic: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub normals: Option<bool>,
}

/// The geometric object a job operates on.
#[derive(Debug, Clone)]
pub enum JobObject {
    Curve(CurveN),
    PlaneCurveSurface {
        alpha: CurveN,
        theta: f64,
        v_domain: (f64, f64),
    },
    Extrusion(ExtrusionSpec),
    Ruled(RuledSpec),
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicParams {
    pub start: (f64, f64),
    pub direction: [f64; 2],
    pub length: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CurvatureLineParams {
    pub start: (f64, f64),
    pub branch: Branch,
    pub length: f64,
    pub step: f64,
}

/// Fully validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub object: JobObject,
    /// Reference direction for angle reports; `None` falls back to the
    /// object's natural axis where one exists.
    pub direction: Option<Vec<f64>>,
    pub grid: (usize, usize),
    pub samples: usize,
    pub slant: Option<(usize, Vec<f64>)>,
    pub geodesic: Option<GeodesicParams>,
    pub curvature_line: Option<CurvatureLineParams>,
    pub constancy_tol: Option<f64>,
    pub surface_opts: helixlab_core::surface::SurfaceOptions,
    pub out_dir: PathBuf,
    pub mesh_normals: bool,
}

fn builtin_raw() -> RawConfig {
    RawConfig {
        kind: Some("plane-curve-surface".into()),
        theta: Some(AngleValue::Text("pi/6".into())),
        direction: Some(vec![0.8, 0.0, -0.6]),
        samples: None,
        curve: Some(CurveSection {
            param: "u".into(),
            components: vec![
                "(3/5)*sin(u)".into(),
                "1 + cos(u)".into(),
                "(4/5)*sin(u)".into(),
            ],
            domain: [
                AngleValue::Number(0.0),
                AngleValue::Text("5pi".into()),
            ],
        }),
        surface: Some(SurfaceSection {
            v_domain: Some([AngleValue::Number(0.0), AngleValue::Text("pi".into())]),
            s_domain: None,
        }),
        geodesic: Some(GeodesicSection {
            start: [PI / 4.0, 0.2],
            direction: [1.0, 1.0],
            length: 1.0,
            step: Some(1e-3),
        }),
        curvature_line: Some(CurvatureLineSection {
            start: [PI / 4.0, 0.2],
            branch: "max".into(),
            length: 1.0,
            step: Some(1e-3),
        }),
        slant: Some(SlantSection {
            index: 3,
            direction: vec![0.8, 0.0, -0.6],
        }),
        ..RawConfig::default()
    }
}

fn merge(base: RawConfig, over: RawConfig) -> RawConfig {
    RawConfig {
        kind: over.kind.or(base.kind),
        theta: over.theta.or(base.theta),
        direction: over.direction.or(base.direction),
        samples: over.samples.or(base.samples),
        curve: over.curve.or(base.curve),
        generator: over.generator.or(base.generator),
        directrix: over.directrix.or(base.directrix),
        normal: over.normal.or(base.normal),
        surface: over.surface.or(base.surface),
        grid: over.grid.or(base.grid),
        slant: over.slant.or(base.slant),
        geodesic: over.geodesic.or(base.geodesic),
        curvature_line: over.curvature_line.or(base.curvature_line),
        tolerances: over.tolerances.or(base.tolerances),
        output: over.output.or(base.output),
        mesh: over.mesh.or(base.mesh),
    }
}

/// Loads a raw config from `--config`: either the builtin preset name or a
/// TOML file path (whose `kind` may itself request the preset as a base).
pub fn load_raw(config_arg: &str) -> Result<RawConfig, CliError> {
    if config_arg == BUILTIN_NAME {
        return Ok(builtin_raw());
    }
    let text = std::fs::read_to_string(config_arg)
        .map_err(|e| CliError::input(format!("cannot read config `{config_arg}`: {e}")))?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| CliError::input(format!("config `{config_arg}`: {e}")))?;
    if raw.kind.as_deref() == Some(BUILTIN_NAME) {
        return Ok(merge(builtin_raw(), RawConfig { kind: None, ..raw }));
    }
    Ok(raw)
}

fn parse_curve(section: &CurveSection, path: &str) -> Result<CurveN, CliError> {
    let lo = section.domain[0].resolve(&format!("{path}.domain[0]"))?;
    let hi = section.domain[1].resolve(&format!("{path}.domain[1]"))?;
    if !(lo < hi) {
        return Err(CliError::input(format!(
            "{path}.domain: upper bound must exceed lower bound"
        )));
    }
    let comps: Vec<&str> = section.components.iter().map(|s| s.as_str()).collect();
    if comps.is_empty() {
        return Err(CliError::input(format!("{path}.components: missing component expressions")));
    }
    CurveN::parse(&comps, &section.param, (lo, hi))
        .map_err(|e| CliError::input(format!("{path}: {e}")))
    }

fn resolve_pair(
    pair: &Option<[AngleValue; 2]>,
    path: &str,
) -> Result<Option<(f64, f64)>, CliError> {
    let Some([lo, hi]) = pair else { return Ok(None) };
    let lo = lo.resolve(&format!("{path}[0]"))?;
    let hi = hi.resolve(&format!("{path}[1]"))?;
    if !(lo < hi) {
        return Err(CliError::input(format!(
            "{path}: upper bound must exceed lower bound"
        )));
    }
    Ok(Some((lo, hi)))
}

/// Validates the raw config into a runnable job.
pub fn build_job(raw: RawConfig, config_arg: &str) -> Result<Job, CliError> {
    let raw = if config_arg == BUILTIN_NAME || raw.kind.as_deref() == Some(BUILTIN_NAME) {
        merge(builtin_raw(), raw)
    } else {
        raw
    };
    let kind = raw
        .kind
        .as_deref()
        .ok_or_else(|| CliError::input("kind: missing object kind"))?;

    let theta = match &raw.theta {
        Some(v) => {
            let t = v.resolve("theta")?;
            if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&t) {
                return Err(CliError::input(format!(
                    "theta: must lie in [0, pi/2], got {t}"
                )));
            }
            Some(t)
        }
        None => None,
    };

    let need_theta = |t: Option<f64>, kind: &str| {
        t.ok_or_else(|| CliError::input(format!("theta: required for kind `{kind}`")))
    };

    let object = match kind {
        "curve" => {
            let section = raw
                .curve
                .as_ref()
                .ok_or_else(|| CliError::input("curve: section required for kind `curve`"))?;
            JobObject::Curve(parse_curve(section, "curve")?)
        }
        "plane-curve-surface" => {
            let section = raw.curve.as_ref().ok_or_else(|| {
                CliError::input("curve: section required for kind `plane-curve-surface`")
            })?;
            let alpha = parse_curve(section, "curve")?;
            if alpha.dim() != 3 {
                return Err(CliError::input(format!(
                    "curve.components: need 3 components, got {}",
                    alpha.dim()
                )));
            }
            let v_domain = resolve_pair(
                &raw.surface.as_ref().and_then(|s| s.v_domain.clone()),
                "surface.v_domain",
            )?
            .ok_or_else(|| CliError::input("surface.v_domain: required for kind `plane-curve-surface`"))?;
            JobObject::PlaneCurveSurface {
                alpha,
                theta: need_theta(theta, kind)?,
                v_domain,
            }
        }
        "extrusion" => {
            let section = raw.generator.as_ref().ok_or_else(|| {
                CliError::input("generator: section required for kind `extrusion`")
            })?;
            let generator = parse_curve(section, "generator")?;
            if generator.dim() != 2 {
                return Err(CliError::input(format!(
                    "generator.components: need 2 components, got {}",
                    generator.dim()
                )));
            }
            let s_domain = resolve_pair(
                &raw.surface.as_ref().and_then(|s| s.s_domain.clone()),
                "surface.s_domain",
            )?
            .unwrap_or((0.0, 1.0));
            let spec = ExtrusionSpec::new(
                Generator::PlaneCurve(generator),
                need_theta(theta, kind)?,
                s_domain,
            )
            .map_err(|e| CliError::input(format!("extrusion: {e}")))?;
            JobObject::Extrusion(spec)
        }
        "ruled" => {
            let section = raw.directrix.as_ref().ok_or_else(|| {
                CliError::input("directrix: section required for kind `ruled`")
            })?;
            let directrix = parse_curve(section, "directrix")?;
            let normal_section = raw
                .normal
                .as_ref()
                .ok_or_else(|| CliError::input("normal: section required for kind `ruled`"))?;
            let normal = match normal_section.kind.as_str() {
                "sphere" => NormalField::SpherePosition,
                "explicit" => {
                    let comps = normal_section.components.as_ref().ok_or_else(|| {
                        CliError::input("normal.components: required for kind `explicit`")
                    })?;
                    if comps.len() != directrix.dim() {
                        return Err(CliError::input(format!(
                            "normal.components: need {} components, got {}",
                            directrix.dim(),
                            comps.len()
                        )));
                    }
                    let exprs = comps
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            Expr::parse(s, &[directrix.param()]).map_err(|e| {
                                CliError::input(format!("normal.components[{i}]: {e}"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    NormalField::Explicit(exprs)
                }
                other => {
                    return Err(CliError::input(format!(
                        "normal.kind: expected `sphere` or `explicit`, got `{other}`"
                    )))
                }
            };
            let s_domain = resolve_pair(
                &raw.surface.as_ref().and_then(|s| s.s_domain.clone()),
                "surface.s_domain",
            )?
            .unwrap_or((0.0, 1.0));
            let mut spec = RuledSpec::new(directrix, normal, need_theta(theta, kind)?, s_domain)
                .map_err(|e| CliError::input(format!("ruled: {e}")))?;
            match normal_section.ruling.as_deref() {
                None | Some("normal") => {}
                Some("tangent") => spec.ruling = RulingVariant::DirectrixTangent,
                Some(other) => {
                    return Err(CliError::input(format!(
                        "normal.ruling: expected `normal` or `tangent`, got `{other}`"
                    )))
                }
            }
            JobObject::Ruled(spec)
        }
        other => {
            return Err(CliError::input(format!(
                "kind: unknown object kind `{other}` (expected curve | plane-curve-surface | extrusion | ruled | {BUILTIN_NAME})"
            )))
        }
    };

    let grid = match raw.grid {
        Some(GridSection { nu, nv }) => {
            if nu < 2 || nv < 2 {
                return Err(CliError::input("grid: need at least 2 samples per direction"));
            }
            (nu, nv)
        }
        None => (60, 20),
    };

    if let Some(d) = &raw.direction {
        if d.is_empty() {
            return Err(CliError::input("direction: must not be empty"));
        }
    }

    let geodesic = match &raw.geodesic {
        Some(g) => {
            if g.length <= 0.0 {
                return Err(CliError::input("geodesic.length: must be positive"));
            }
            Some(GeodesicParams {
                start: (g.start[0], g.start[1]),
                direction: g.direction,
                length: g.length,
                step: g.step.unwrap_or(1e-3 * g.length),
            })
        }
        None => None,
    };

    let curvature_line = match &raw.curvature_line {
        Some(c) => {
            if c.length <= 0.0 {
                return Err(CliError::input("curvature_line.length: must be positive"));
            }
            let branch = match c.branch.as_str() {
                "max" => Branch::Max,
                "min" => Branch::Min,
                other => {
                    return Err(CliError::input(format!(
                        "curvature_line.branch: expected `max` or `min`, got `{other}`"
                    )))
                }
            };
            Some(CurvatureLineParams {
                start: (c.start[0], c.start[1]),
                branch,
                length: c.length,
                step: c.step.unwrap_or(1e-3 * c.length),
            })
        }
        None => None,
    };

    let slant = match &raw.slant {
        Some(s) => Some((s.index, s.direction.clone())),
        None => None,
    };

    let mut surface_opts = helixlab_core::surface::SurfaceOptions::default();
    if let Some(t) = raw.tolerances.and_then(|t| t.singular) {
        surface_opts.tol_sing = t;
    }
    if let Some(t) = raw.tolerances.and_then(|t| t.umbilic) {
        surface_opts.tol_umb = t;
    }

    Ok(Job {
        object,
        direction: raw.direction,
        grid,
        samples: raw.samples.unwrap_or(200),
        slant,
        geodesic,
        curvature_line,
        constancy_tol: raw.tolerances.and_then(|t| t.constancy),
        surface_opts,
        out_dir: PathBuf::from(
            raw.output
                .and_then(|o| o.dir)
                .unwrap_or_else(|| ".".to_string()),
        ),
        mesh_normals: raw.mesh.and_then(|m| m.normals).unwrap_or(false),
    })
}

impl Job {
    /// The curve the curve-level subcommands operate on.
    pub fn curve(&self) -> Result<CurveN, CliError> {
        Ok(match &self.object {
            JobObject::Curve(c) => c.clone(),
            JobObject::PlaneCurveSurface { alpha, .. } => alpha.clone(),
            JobObject::Extrusion(spec) => match &spec.generator {
                Generator::PlaneCurve(c) => c.clone(),
                Generator::Patch(_) => {
                    return Err(CliError::input(
                        "this extrusion generator is not a curve",
                    ))
                }
            },
            JobObject::Ruled(spec) => spec.directrix.clone(),
        })
    }

}
