//! Quad-grid tessellation of a patch and OBJ export.
//!
//! Vertices are sampled row-major over an inclusive nu × nv parameter grid.
//! Cells whose corners include a singular vertex are excluded: their faces
//! are omitted while the vertices stay in the file, so vertex indexing is
//! purely positional. Output is deterministic — fixed ordering, 17
//! significant digits.

use std::io::Write;
use std::path::Path;

use helixlab_core::grid;
use helixlab_core::surface::{normal, SurfaceError, SurfaceOptions, SurfacePatch};
use helixlab_core::verify::fmt_f64;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct MeshGrid {
    pub nu: usize,
    pub nv: usize,
    /// Row-major by the first parameter: vertex (i, j) is `i * nv + j`.
    pub vertices: Vec<[f64; 3]>,
    /// Unit normals per vertex; zero vector at singular vertices.
    pub normals: Option<Vec<[f64; 3]>>,
    /// Quad corners as 0-based vertex indices, counterclockwise.
    pub faces: Vec<[u32; 4]>,
    /// Grid cells dropped because a corner vertex is singular.
    pub excluded_cells: Vec<(u32, u32)>,
    pub singular_vertices: usize,
}

pub fn build_mesh(
    patch: &SurfacePatch,
    nu: usize,
    nv: usize,
    want_normals: bool,
    opts: &SurfaceOptions,
) -> Result<MeshGrid, CliError> {
    if patch.dim() != 3 {
        return Err(CliError::input(format!(
            "mesh export needs a surface in 3-space, got dimension {}",
            patch.dim()
        )));
    }
    if nu < 2 || nv < 2 {
        return Err(CliError::input("mesh grid needs at least 2 samples per direction"));
    }
    let [ud, vd] = patch.domain();
    let us = grid::linspace(ud.0, ud.1, nu);
    let vs = grid::linspace(vd.0, vd.1, nv);

    struct VertexEval {
        pos: [f64; 3],
        normal: Option<[f64; 3]>,
        singular: bool,
    }
    let evals = grid::map_grid(&us, &vs, |u, v| -> Result<VertexEval, CliError> {
        let p = patch
            .position(u, v)
            .map_err(|e| CliError::input(format!("mesh: at (u, v) = ({u}, {v}): {e}")))?;
        match normal(patch, u, v, opts) {
            Ok(z) => Ok(VertexEval {
                pos: [p[0], p[1], p[2]],
                normal: Some([z[0], z[1], z[2]]),
                singular: false,
            }),
            Err(SurfaceError::Singular { .. }) => Ok(VertexEval {
                pos: [p[0], p[1], p[2]],
                normal: None,
                singular: true,
            }),
            Err(e) => Err(CliError::input(format!(
                "mesh: at (u, v) = ({u}, {v}): {e}"
            ))),
        }
    });

    let mut vertices = Vec::with_capacity(nu * nv);
    let mut normals = Vec::with_capacity(nu * nv);
    let mut singular = Vec::with_capacity(nu * nv);
    let mut singular_vertices = 0;
    for e in evals {
        let e = e?;
        vertices.push(e.pos);
        normals.push(e.normal.unwrap_or([0.0, 0.0, 0.0]));
        if e.singular {
            singular_vertices += 1;
        }
        singular.push(e.singular);
    }

    let mut faces = Vec::with_capacity((nu - 1) * (nv - 1));
    let mut excluded_cells = Vec::new();
    let idx = |i: usize, j: usize| (i * nv + j) as u32;
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            let corners = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            if corners.iter().any(|&c| singular[c as usize]) {
                excluded_cells.push((i as u32, j as u32));
            } else {
                faces.push(corners);
            }
        }
    }

    Ok(MeshGrid {
        nu,
        nv,
        vertices,
        normals: want_normals.then_some(normals),
        faces,
        excluded_cells,
        singular_vertices,
    })
}

/// Writes the mesh as OBJ text: `v` lines in grid order, then optional `vn`
/// lines, then 1-based `f` lines.
pub fn export_obj(mesh: &MeshGrid, path: &Path) -> std::io::Result<()> {
    let mut out = Vec::with_capacity(mesh.vertices.len() * 64);
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2]))?;
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            writeln!(out, "vn {} {} {}", fmt_f64(n[0]), fmt_f64(n[1]), fmt_f64(n[2]))?;
        }
        for f in &mesh.faces {
            writeln!(
                out,
                "f {0}//{0} {1}//{1} {2}//{2} {3}//{3}",
                f[0] + 1,
                f[1] + 1,
                f[2] + 1,
                f[3] + 1
            )?;
        }
    } else {
        for f in &mesh.faces {
            writeln!(out, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1)?;
        }
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_plane_mesh() {
        let plane = SurfacePatch::parse(
            &["u", "v", "0"],
            ("u", "v"),
            [(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let mesh = build_mesh(&plane, 2, 2, false, &SurfaceOptions::default()).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.excluded_cells.len(), 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plane.obj");
        export_obj(&mesh, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
        assert_eq!(text.lines().next().unwrap(), "v 0.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0");
    }

    #[test]
    fn singular_cells_are_excluded_but_vertices_stay() {
        // the cone through the origin is singular at u = 0
        let cone = SurfacePatch::parse(
            &["u*cos(v)", "u*sin(v)", "u"],
            ("u", "v"),
            [(0.0, 1.0), (0.0, 3.0)],
        )
        .unwrap();
        let mesh = build_mesh(&cone, 3, 4, false, &SurfaceOptions::default()).unwrap();
        assert_eq!(mesh.vertices.len(), 12);
        // the u = 0 row is singular: 4 singular vertices, 3 excluded cells
        assert_eq!(mesh.singular_vertices, 4);
        assert_eq!(mesh.excluded_cells.len(), 3);
        assert_eq!(mesh.faces.len(), 2 * 3 - 3);
        for f in &mesh.faces {
            for &c in f {
                assert!(c >= 4, "face references a singular vertex");
            }
        }
    }
}
