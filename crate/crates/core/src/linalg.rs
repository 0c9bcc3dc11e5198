//! Small dense vector/matrix helpers.
//!
//! Everything here works on plain `&[f64]` slices so the curve and surface
//! code can stay dimension-generic without pulling in a matrix crate.

/// Dot product. Panics on length mismatch.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a += s * b` in place.
pub fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

/// Returns `a / ‖a‖`, or `None` when the norm is not above `tol`.
pub fn normalize(a: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > tol).then(|| scale(a, 1.0 / n))
}

/// 3-vector cross product.
pub fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert!(a.len() == 3 && b.len() == 3, "cross3 needs 3-vectors");
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Determinant of a square matrix given as rows, by LU with partial pivoting.
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    for r in rows {
        assert_eq!(r.len(), n, "det: matrix not square");
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut sign = 1.0;
    let mut result = 1.0;
    for k in 0..n {
        let (pivot, _) = (k..n)
            .map(|i| (i, m[i][k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            m.swap(pivot, k);
            sign = -sign;
        }
        result *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    sign * result
}

/// Generalized cross product of `n − 1` vectors in ℝⁿ.
///
/// Returns the unique vector `w` with `⟨w, u⟩ = det(u, v₁, …, v_{n−1})` for
/// every `u` (the inputs as the remaining rows, in order). `w` is orthogonal
/// to every input and its norm is the (n−1)-volume they span; linearly
/// dependent inputs give the zero vector.
pub fn generalized_cross(vs: &[Vec<f64>]) -> Vec<f64> {
    let n = vs.len() + 1;
    assert!(n >= 2, "generalized_cross needs at least one vector");
    for v in vs {
        assert_eq!(v.len(), n, "generalized_cross: vectors must live in ℝ^(k+1)");
    }
    if n == 2 {
        // ⟨w, u⟩ = det([u; v]) = u₀v₁ − u₁v₀
        return vec![vs[0][1], -vs[0][0]];
    }
    if n == 3 {
        return cross3(&vs[0], &vs[1]);
    }
    let mut w = vec![0.0; n];
    let mut minor = vec![vec![0.0; n - 1]; n - 1];
    for (j, wj) in w.iter_mut().enumerate() {
        for (r, v) in vs.iter().enumerate() {
            let mut c = 0;
            for (k, &x) in v.iter().enumerate() {
                if k != j {
                    minor[r][c] = x;
                    c += 1;
                }
            }
        }
        let cofactor = if j % 2 == 0 { 1.0 } else { -1.0 };
        *wj = cofactor * det(&minor);
    }
    w
}

/// Result of orthonormalizing a list of vectors in order.
#[derive(Debug, Clone)]
pub struct OrthoFrame {
    /// Orthonormal vectors produced before any rank drop.
    pub basis: Vec<Vec<f64>>,
    /// Residual norm ‖Eᵢ‖ of each input against the preceding basis.
    pub residual_norms: Vec<f64>,
    /// Index (0-based) of the first input whose residual fell below the
    /// threshold, if any. Inputs past it are not processed.
    pub degenerate_at: Option<usize>,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// `tol_rank` is relative to the largest input norm: an input is declared
/// dependent when its residual is below `tol_rank · max‖vᵢ‖`.
pub fn orthonormalize(inputs: &[Vec<f64>], tol_rank: f64) -> OrthoFrame {
    let scale_ref = inputs.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let threshold = tol_rank * scale_ref.max(f64::MIN_POSITIVE);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(inputs.len());
    let mut residual_norms = Vec::with_capacity(inputs.len());
    for (i, v) in inputs.iter().enumerate() {
        let mut e = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&e, b);
                axpy(&mut e, -c, b);
            }
        }
        let r = norm(&e);
        residual_norms.push(r);
        if r < threshold {
            return OrthoFrame {
                basis,
                residual_norms,
                degenerate_at: Some(i),
            };
        }
        basis.push(scale(&e, 1.0 / r));
    }
    OrthoFrame {
        basis,
        residual_norms,
        degenerate_at: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Cofactor expansion along the first row; independent of the LU path.
    fn det_cofactor(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        let mut acc = 0.0;
        for j in 0..n {
            let minor: Vec<Vec<f64>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * rows[0][j] * det_cofactor(&minor);
        }
        acc
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let m = vec![
            vec![2.0, -1.0, 0.5, 3.0],
            vec![0.0, 1.5, -2.0, 1.0],
            vec![4.0, 0.0, 1.0, -1.0],
            vec![-3.0, 2.0, 0.0, 2.5],
        ];
        assert!((det(&m) - det_cofactor(&m)).abs() < 1e-12);
    }

    #[test]
    fn cross_r3_basis() {
        let w = generalized_cross(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn cross_r3_dependent_inputs_give_zero() {
        let w = generalized_cross(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]);
        assert_eq!(w, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn cross_r4_determinant_identity() {
        // Oracle: ⟨w, eₖ⟩ must equal the cofactor-expanded 4×4 determinant
        // det(eₖ, v₁, v₂, v₃) for every basis vector eₖ.
        let vs = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let w = generalized_cross(&vs);
        for k in 0..4 {
            let mut e = vec![0.0; 4];
            e[k] = 1.0;
            let mut rows = vec![e.clone()];
            rows.extend(vs.iter().cloned());
            assert!(
                (w[k] - det_cofactor(&rows)).abs() < 1e-14,
                "component {k}: {} vs {}",
                w[k],
                det_cofactor(&rows)
            );
        }
    }

    #[test]
    fn cross_r4_generic_is_orthogonal() {
        let vs = vec![
            vec![1.0, 2.0, -0.5, 0.25],
            vec![0.0, 1.0, 3.0, -1.0],
            vec![2.0, 0.0, 1.0, 1.0],
        ];
        let w = generalized_cross(&vs);
        for v in &vs {
            assert!(dot(&w, v).abs() < 1e-12);
        }
        for k in 0..4 {
            let mut e = vec![0.0; 4];
            e[k] = 1.0;
            let mut rows = vec![e];
            rows.extend(vs.iter().cloned());
            assert!((w[k] - det_cofactor(&rows)).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_r2_rotates_clockwise() {
        // ⟨w, u⟩ = det([u; v]): for v = (0, 1) this gives w = (1, 0).
        let w = generalized_cross(&[vec![0.0, 1.0]]);
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn orthonormalize_full_rank() {
        let frame = orthonormalize(
            &[
                vec![1.0, 1.0, 0.0],
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0],
            ],
            1e-10,
        );
        assert!(frame.degenerate_at.is_none());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&frame.basis[i], &frame.basis[j]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthonormalize_reports_rank_drop() {
        let frame = orthonormalize(
            &[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0],
                vec![3.0, 4.0, 0.0],
            ],
            1e-10,
        );
        assert_eq!(frame.degenerate_at, Some(2));
        assert_eq!(frame.basis.len(), 2);
    }
}
