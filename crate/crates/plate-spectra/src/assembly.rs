//! Assembly of the symmetric form pencils `(Q, M)`.
//!
//! `Q` is the energy form `∫ D²u : D²v + uv dx` (the mass term is part of
//! the operator, so eigenvalues of the hinged and clamped pencils satisfy
//! `λ ≥ 1`), optionally plus `sign·γ·∫_W ∂_N u ∂_N v dx̄` on the top edge.
//! `M` is the plain mass form.
//!
//! The perturbed-domain form is assembled on the pulled-back space
//! `{φ ∘ Φ_ε : φ ∈ V_h(Ω)}`, which is conforming in
//! `W^{2,2}(Ω_ε) ∩ W^{1,2}_0(Ω_ε)` because `Φ_ε` maps `Ω_ε` onto `Ω`
//! diffeomorphically and carries the oscillating boundary onto the flat one.
//! Integration runs in reference coordinates: per quadrature node `r` the
//! physical point is `x = Φ_ε^{-1}(r)`, the pulled-back Hessian is
//! `DΦᵀ·D²φ(r)·DΦ − ∂_N φ(r)·D²h` evaluated at `x`, and the measure picks up
//! `|det DΦ(x)|^{-1}`. Below the matching line `x_N = −ε` the map is the
//! identity and the cached unperturbed element blocks are reused verbatim.

use crate::error::{Error, Result};
use crate::fem::{basis_value, build_dofmap, cell_dofs, BcKind, DofMap, Grid};
use crate::geometry::DomainSpec;
use crate::quadrature::{GAUSS5_NODES, GAUSS5_WEIGHTS};
use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

/// Admissible range of `det DΦ_ε` at quadrature points. The analysis only
/// needs the Jacobian bounded away from zero and infinity; the gate is
/// deliberately generous (the α = 3/2, ε ≤ 0.1 family stays within [1/2, 2]).
const JACOBIAN_GATE: f64 = 100.0;

/// Default number of vertical quadrature subdivisions in layer cells.
pub const DEFAULT_LAYER_SUBDIVISIONS: usize = 4;

/// Provenance and quadrature bookkeeping for an assembled pencil.
#[derive(Debug, Clone)]
pub struct PencilMeta {
    pub bc: BcKind,
    /// `None` for the limit domain, `Some(spec)` for a perturbed domain.
    pub domain: Option<DomainSpec>,
    /// (Gauss points per direction, layer subdivisions).
    pub quadrature: (usize, usize),
}

/// Symmetric pencil for the generalized eigenproblem `Q x = λ M x`.
pub struct FormPencil {
    pub q: SparseColMat<usize, f64>,
    pub m: SparseColMat<usize, f64>,
    pub dofmap: DofMap,
    pub meta: PencilMeta,
}

impl FormPencil {
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// Writes both matrices in `row col value` coordinate text format.
    pub fn dump_coordinate(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        for (name, mat) in [("Q", &self.q), ("M", &self.m)] {
            writeln!(out, "# {name} {} x {}", mat.nrows(), mat.ncols())?;
            for j in 0..mat.ncols() {
                for (i, v) in mat.row_idx_of_col(j).zip(mat.val_of_col(j).iter()) {
                    writeln!(out, "{name} {i} {j} {v:.17e}")?;
                }
            }
        }
        Ok(())
    }
}

/// 16×16 element blocks of the unperturbed bicubic element: energy
/// (bending + mass) and mass, exact under 5×5 Gauss.
fn standard_cell_blocks(grid: &Grid) -> ([[f64; 16]; 16], [[f64; 16]; 16]) {
    let mut k = [[0.0; 16]; 16];
    let mut m = [[0.0; 16]; 16];
    let scale = grid.hx() * grid.hy();
    for (gx, wx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
        for (gy, wy) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
            let w = wx * wy * scale;
            let mut vals = [[0.0; 4]; 16];
            for (dof, v) in vals.iter_mut().enumerate() {
                let local = (*gx, *gy);
                *v = [
                    basis_value(grid, local, dof, (0, 0)),
                    basis_value(grid, local, dof, (2, 0)),
                    basis_value(grid, local, dof, (1, 1)),
                    basis_value(grid, local, dof, (0, 2)),
                ];
            }
            for a in 0..16 {
                for b in a..16 {
                    let bend = vals[a][1] * vals[b][1]
                        + 2.0 * vals[a][2] * vals[b][2]
                        + vals[a][3] * vals[b][3];
                    let mass = vals[a][0] * vals[b][0];
                    k[a][b] += w * (bend + mass);
                    m[a][b] += w * mass;
                }
            }
        }
    }
    for a in 0..16 {
        for b in 0..a {
            k[a][b] = k[b][a];
            m[a][b] = m[b][a];
        }
    }
    (k, m)
}

/// 16×16 edge block of `∫ ∂_N u ∂_N v dx̄` along the top edge of a top-row
/// cell. Only the `u_y`/`u_xy` dofs of the two top corners survive.
fn top_edge_block(grid: &Grid) -> [[f64; 16]; 16] {
    let mut s = [[0.0; 16]; 16];
    for (gx, wx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
        let w = wx * grid.hx();
        let mut dy = [0.0; 16];
        for (dof, v) in dy.iter_mut().enumerate() {
            *v = basis_value(grid, (*gx, 1.0), dof, (0, 1));
        }
        for a in 0..16 {
            for b in a..16 {
                s[a][b] += w * dy[a] * dy[b];
            }
        }
    }
    for a in 0..16 {
        for b in 0..a {
            s[a][b] = s[b][a];
        }
    }
    s
}

/// Scatters a local block into reduced triplets, skipping constrained dofs.
fn scatter(
    dofmap: &DofMap,
    globals: &[usize; 16],
    block: &[[f64; 16]; 16],
    out: &mut Vec<Triplet<usize, usize, f64>>,
) {
    for a in 0..16 {
        let Some(fa) = dofmap.free_index(globals[a]) else {
            continue;
        };
        for b in 0..16 {
            let Some(fb) = dofmap.free_index(globals[b]) else {
                continue;
            };
            if block[a][b] != 0.0 {
                out.push(Triplet::new(fa, fb, block[a][b]));
            }
        }
    }
}

fn build_sparse(
    n: usize,
    triplets: &[Triplet<usize, usize, f64>],
) -> Result<SparseColMat<usize, f64>> {
    SparseColMat::try_new_from_triplets(n, n, triplets)
        .map_err(|e| Error::numerical(format!("sparse assembly failed: {e:?}")))
}

/// Assembles the limit pencil on `Ω` for any boundary-condition kind.
///
/// For `StrangeTerm { gamma, sign }` the energy gains
/// `sign·γ·∫_W ∂_N u ∂_N v dx̄` along the top edge — a 1D cubic Hermite line
/// form in the `u_y`/`u_xy` dofs. `γ = 0` reproduces the hinged pencil
/// entry for entry; negative `γ` is rejected.
pub fn assemble_limit(grid: Grid, bc: BcKind) -> Result<FormPencil> {
    if let BcKind::StrangeTerm { gamma, .. } = bc {
        if gamma < 0.0 {
            return Err(Error::invalid("strange-term gamma must be nonnegative"));
        }
    }
    let dofmap = build_dofmap(grid, bc);
    let (kcell, mcell) = standard_cell_blocks(&grid);
    let edge = match bc {
        BcKind::StrangeTerm { gamma, sign } if gamma != 0.0 => {
            let mut s = top_edge_block(&grid);
            for row in s.iter_mut() {
                for v in row.iter_mut() {
                    *v *= sign * gamma;
                }
            }
            Some(s)
        }
        _ => None,
    };

    let cells: Vec<usize> = (0..grid.cell_count()).collect();
    let per_cell: Vec<(Vec<Triplet<usize, usize, f64>>, Vec<Triplet<usize, usize, f64>>)> = cells
        .par_iter()
        .map(|&cell| {
            let globals = cell_dofs(&grid, cell);
            let mut tq = Vec::with_capacity(256);
            let mut tm = Vec::with_capacity(256);
            scatter(&dofmap, &globals, &kcell, &mut tq);
            scatter(&dofmap, &globals, &mcell, &mut tm);
            if let Some(edge) = &edge {
                let (_, cj) = grid.cell_coords(cell);
                if cj == grid.ny - 1 {
                    scatter(&dofmap, &globals, edge, &mut tq);
                }
            }
            (tq, tm)
        })
        .collect();

    let mut tq = Vec::new();
    let mut tm = Vec::new();
    for (a, b) in per_cell {
        tq.extend(a);
        tm.extend(b);
    }
    let n = dofmap.free_count();
    Ok(FormPencil {
        q: build_sparse(n, &tq)?,
        m: build_sparse(n, &tm)?,
        dofmap,
        meta: PencilMeta {
            bc,
            domain: None,
            quadrature: (5, 0),
        },
    })
}

/// Assembles the perturbed pencil on `Ω_ε` through the pullback, with the
/// default layer quadrature.
pub fn assemble_perturbed(spec: &DomainSpec, grid: Grid) -> Result<FormPencil> {
    assemble_perturbed_with(spec, grid, DEFAULT_LAYER_SUBDIVISIONS)
}

/// Same as [`assemble_perturbed`] with an explicit number of vertical
/// quadrature subdivisions in layer cells (the integrands there are smooth
/// but not polynomial, so the composite rule controls the quadrature error;
/// doubling the subdivisions is the robustness check).
pub fn assemble_perturbed_with(
    spec: &DomainSpec,
    grid: Grid,
    layer_subdivisions: usize,
) -> Result<FormPencil> {
    if (grid.length - spec.length()).abs() > 1e-12 {
        return Err(Error::invalid("grid and domain lengths differ"));
    }
    if !grid.has_line_at(spec.eps()) {
        return Err(Error::invalid(format!(
            "grid has no horizontal line at x_N = -{} (ny = {})",
            spec.eps(),
            grid.ny
        )));
    }
    if spec.eps() / grid.hx() < 8.0 * (1.0 - 1e-12) {
        return Err(Error::invalid(format!(
            "grid must resolve the oscillation period with at least 8 cells \
             (hx = {:.4e}, eps = {:.4e})",
            grid.hx(),
            spec.eps()
        )));
    }
    if layer_subdivisions == 0 {
        return Err(Error::invalid("layer quadrature needs at least 1 subcell"));
    }

    let bc = BcKind::Intermediate;
    let dofmap = build_dofmap(grid, bc);
    let (kcell, mcell) = standard_cell_blocks(&grid);
    // first cell row whose reference coordinates lie in the layer (−ε, 0)
    let layer_row = grid.ny - (spec.eps() * grid.ny as f64).round() as usize;

    let cells: Vec<usize> = (0..grid.cell_count()).collect();
    let per_cell: Vec<Result<(Vec<Triplet<usize, usize, f64>>, Vec<Triplet<usize, usize, f64>>)>> =
        cells
            .par_iter()
            .map(|&cell| {
                let globals = cell_dofs(&grid, cell);
                let (_, cj) = grid.cell_coords(cell);
                let mut tq = Vec::with_capacity(256);
                let mut tm = Vec::with_capacity(256);
                if cj < layer_row {
                    scatter(&dofmap, &globals, &kcell, &mut tq);
                    scatter(&dofmap, &globals, &mcell, &mut tm);
                } else {
                    let (kb, mb) = layer_cell_blocks(spec, &grid, cell, layer_subdivisions)?;
                    scatter(&dofmap, &globals, &kb, &mut tq);
                    scatter(&dofmap, &globals, &mb, &mut tm);
                }
                Ok((tq, tm))
            })
            .collect();

    let mut tq = Vec::new();
    let mut tm = Vec::new();
    for r in per_cell {
        let (a, b) = r?;
        tq.extend(a);
        tm.extend(b);
    }
    let n = dofmap.free_count();
    Ok(FormPencil {
        q: build_sparse(n, &tq)?,
        m: build_sparse(n, &tm)?,
        dofmap,
        meta: PencilMeta {
            bc,
            domain: Some(spec.clone()),
            quadrature: (5, layer_subdivisions),
        },
    })
}

/// Element blocks of a layer cell, integrated in reference coordinates with
/// `n_sub` vertical Gauss panels.
fn layer_cell_blocks(
    spec: &DomainSpec,
    grid: &Grid,
    cell: usize,
    n_sub: usize,
) -> Result<([[f64; 16]; 16], [[f64; 16]; 16])> {
    let (ci, cj) = grid.cell_coords(cell);
    let (hx, hy) = (grid.hx(), grid.hy());
    let x0 = grid.node_x(ci);
    let y0 = grid.node_y(cj);
    let mut k = [[0.0; 16]; 16];
    let mut m = [[0.0; 16]; 16];
    for (gx, wx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
        let x_bar = x0 + gx * hx;
        for sub in 0..n_sub {
            let eta0 = sub as f64 / n_sub as f64;
            for (gy, wy) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                let eta = eta0 + gy / n_sub as f64;
                let r_n = y0 + eta * hy;
                let x_n = spec.invert_phi(x_bar, r_n)?;
                let hx1 = spec.h_eps_unchecked(x_bar, x_n, 1, 0);
                let hn1 = spec.h_eps_unchecked(x_bar, x_n, 0, 1);
                let hxx = spec.h_eps_unchecked(x_bar, x_n, 2, 0);
                let hxn = spec.h_eps_unchecked(x_bar, x_n, 1, 1);
                let hnn = spec.h_eps_unchecked(x_bar, x_n, 0, 2);
                let det = 1.0 - hn1;
                if !(det > 1.0 / JACOBIAN_GATE && det < JACOBIAN_GATE) {
                    return Err(Error::numerical(format!(
                        "pullback Jacobian {det:.3e} at ({x_bar:.4}, {x_n:.4}) \
                         outside admissible range"
                    )));
                }
                let w = wx * wy * hx * hy / n_sub as f64 / det;
                // pulled-back value and Hessian per basis function
                let mut vals = [0.0f64; 16];
                let mut hess = [[0.0f64; 3]; 16];
                for dof in 0..16 {
                    let local = (*gx, eta);
                    let v = basis_value(grid, local, dof, (0, 0));
                    let gy_ = basis_value(grid, local, dof, (0, 1));
                    let h11 = basis_value(grid, local, dof, (2, 0));
                    let h12 = basis_value(grid, local, dof, (1, 1));
                    let h22 = basis_value(grid, local, dof, (0, 2));
                    // JᵀHJ with J = [[1, 0], [−h_x, 1 − h_n]]
                    let a00 = h11 - 2.0 * hx1 * h12 + hx1 * hx1 * h22;
                    let a01 = det * (h12 - hx1 * h22);
                    let a11 = det * det * h22;
                    vals[dof] = v;
                    hess[dof] = [a00 - gy_ * hxx, a01 - gy_ * hxn, a11 - gy_ * hnn];
                }
                for a in 0..16 {
                    for b in a..16 {
                        let bend = hess[a][0] * hess[b][0]
                            + 2.0 * hess[a][1] * hess[b][1]
                            + hess[a][2] * hess[b][2];
                        let mass = vals[a] * vals[b];
                        k[a][b] += w * (bend + mass);
                        m[a][b] += w * mass;
                    }
                }
            }
        }
    }
    for a in 0..16 {
        for b in 0..a {
            k[a][b] = k[b][a];
            m[a][b] = m[b][a];
        }
    }
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn dense_of(mat: &SparseColMat<usize, f64>) -> Vec<Vec<f64>> {
        let n = mat.nrows();
        let mut out = vec![vec![0.0; n]; n];
        for j in 0..mat.ncols() {
            for (i, v) in mat.row_idx_of_col(j).zip(mat.val_of_col(j).iter()) {
                out[i][j] += v;
            }
        }
        out
    }

    fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let mut m = 0.0f64;
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                m = m.max((x - y).abs());
            }
        }
        m
    }

    #[test]
    fn strange_term_at_zero_gamma_equals_intermediate() {
        let grid = Grid::new(6, 6, 1.0).unwrap();
        let a = assemble_limit(grid, BcKind::Intermediate).unwrap();
        let b = assemble_limit(
            grid,
            BcKind::StrangeTerm {
                gamma: 0.0,
                sign: -1.0,
            },
        )
        .unwrap();
        assert!(max_abs_diff(&dense_of(&a.q), &dense_of(&b.q)) < 1e-14);
        assert!(max_abs_diff(&dense_of(&a.m), &dense_of(&b.m)) < 1e-14);
    }

    #[test]
    fn negative_gamma_rejected() {
        let grid = Grid::new(4, 4, 1.0).unwrap();
        assert!(assemble_limit(
            grid,
            BcKind::StrangeTerm {
                gamma: -1.0,
                sign: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn pencils_are_symmetric() {
        let grid = Grid::new(8, 8, 1.0).unwrap();
        let spec = DomainSpec::new(1.0, 0.125, 1.5, Profile::cosine(0.2).unwrap()).unwrap();
        for pencil in [
            assemble_limit(grid, BcKind::DirichletOnW).unwrap(),
            assemble_perturbed(&spec, Grid::new(64, 8, 1.0).unwrap()).unwrap(),
        ] {
            for mat in [&pencil.q, &pencil.m] {
                let d = dense_of(mat);
                let mut sym = 0.0f64;
                let mut scale = 0.0f64;
                for i in 0..d.len() {
                    for j in 0..d.len() {
                        sym = sym.max((d[i][j] - d[j][i]).abs());
                        scale = scale.max(d[i][j].abs());
                    }
                }
                assert!(sym <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn flat_profile_reduces_to_limit_pencil() {
        let grid = Grid::new(64, 8, 1.0).unwrap();
        let spec = DomainSpec::new(1.0, 0.125, 2.0, Profile::flat()).unwrap();
        let a = assemble_limit(grid, BcKind::Intermediate).unwrap();
        let b = assemble_perturbed(&spec, grid).unwrap();
        let scale = dense_of(&a.q)
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(&dense_of(&a.q), &dense_of(&b.q)) < 1e-13 * scale);
        assert!(max_abs_diff(&dense_of(&a.m), &dense_of(&b.m)) < 1e-13);
    }

    #[test]
    fn perturbed_preconditions_enforced() {
        let spec = DomainSpec::new(1.0, 0.125, 1.5, Profile::cosine(0.2).unwrap()).unwrap();
        // no grid line at -eps
        assert!(assemble_perturbed(&spec, Grid::new(8, 7, 1.0).unwrap()).is_err());
        // too few cells per period
        assert!(assemble_perturbed(&spec, Grid::new(4, 8, 1.0).unwrap()).is_err());
    }

    #[test]
    fn coordinate_dump_has_both_matrices() {
        let grid = Grid::new(4, 4, 1.0).unwrap();
        let p = assemble_limit(grid, BcKind::Intermediate).unwrap();
        let mut buf = Vec::new();
        p.dump_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l.starts_with("Q 0 0 ")));
        assert!(text.lines().any(|l| l.starts_with("M 0 0 ")));
    }
}
