//! C¹-conforming plate elements on a structured, laterally periodic grid.
//!
//! Bogner–Fox–Schmit bicubic Hermite rectangles: four degrees of freedom per
//! node (value, both first partials, and the mixed second partial), giving
//! globally C¹ fields — conforming in `W^{2,2}`, so every discrete eigenvalue
//! is a variational upper bound by the Min-Max principle. Boundary conditions
//! are imposed by eliminating constrained degrees of freedom, keeping the
//! reduced pencil symmetric.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid of `nx × ny` rectangles on `Ω = (0, L) × (−1, 0)` with the
/// lateral direction identified periodically (node column `nx ≡ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, length: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("grid needs at least 2 cells per direction"));
        }
        if !(length > 0.0) {
            return Err(Error::invalid("grid length must be positive"));
        }
        Ok(Grid { nx, ny, length })
    }

    pub fn hx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    /// Nodes are periodic in x: `nx` distinct columns, `ny + 1` rows.
    pub fn node_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn dof_count(&self) -> usize {
        4 * self.node_count()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + (i % self.nx)
    }

    /// Global index of dof component `c` (0 = u, 1 = u_x, 2 = u_y, 3 = u_xy).
    pub fn dof_index(&self, i: usize, j: usize, c: usize) -> usize {
        4 * self.node_index(i, j) + c
    }

    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn node_y(&self, j: usize) -> f64 {
        -1.0 + j as f64 * self.hy()
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell `(ci, cj)` covers `[ci·hx, (ci+1)·hx] × [−1 + cj·hy, −1 + (cj+1)·hy]`.
    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    /// True when some horizontal grid line sits exactly at `x_N = −ε`
    /// (required so layer cells and bulk cells never straddle the matching
    /// line of the diffeomorphism).
    pub fn has_line_at(&self, eps: f64) -> bool {
        let pos = eps * self.ny as f64;
        (pos - pos.round()).abs() < 1e-9 && pos.round() >= 1.0
    }
}

/// Boundary-condition kind on the horizontal edges (the lateral direction is
/// periodic and never constrained).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcKind {
    /// Hinged on both edges: `u = 0` (trace and tangential derivative) while
    /// the normal derivative stays free.
    Intermediate,
    /// Hinged at the bottom, clamped on the top edge `W` (`u = ∂u/∂ν = 0`).
    DirichletOnW,
    /// Hinged plus the boundary form `sign·γ·∫_W ∂_N u ∂_N v dx̄` on the top
    /// edge. `sign` is the sign of the term added to the quadratic form;
    /// `gamma = 0` reduces to `Intermediate`.
    StrangeTerm { gamma: f64, sign: f64 },
}

impl BcKind {
    pub(crate) fn constrains_top_normal(&self) -> bool {
        matches!(self, BcKind::DirichletOnW)
    }
}

/// Map from full grid dofs to the reduced (free) index space.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub grid: Grid,
    pub bc: BcKind,
    free_of_full: Vec<Option<usize>>,
    full_of_free: Vec<usize>,
}

/// Builds the constraint map for a boundary-condition kind.
///
/// `Intermediate` (and `StrangeTerm`) eliminate `u` and `u_x` at every node
/// of both horizontal boundaries; `DirichletOnW` additionally eliminates
/// `u_y` and `u_xy` on the top boundary.
pub fn build_dofmap(grid: Grid, bc: BcKind) -> DofMap {
    let mut constrained = vec![false; grid.dof_count()];
    for i in 0..grid.nx {
        for j in [0, grid.ny] {
            constrained[grid.dof_index(i, j, 0)] = true;
            constrained[grid.dof_index(i, j, 1)] = true;
        }
        if bc.constrains_top_normal() {
            constrained[grid.dof_index(i, grid.ny, 2)] = true;
            constrained[grid.dof_index(i, grid.ny, 3)] = true;
        }
    }
    let mut free_of_full = vec![None; grid.dof_count()];
    let mut full_of_free = Vec::new();
    for (full, &c) in constrained.iter().enumerate() {
        if !c {
            free_of_full[full] = Some(full_of_free.len());
            full_of_free.push(full);
        }
    }
    DofMap {
        grid,
        bc,
        free_of_full,
        full_of_free,
    }
}

impl DofMap {
    pub fn free_count(&self) -> usize {
        self.full_of_free.len()
    }

    pub fn free_index(&self, full: usize) -> Option<usize> {
        self.free_of_full[full]
    }

    pub fn full_index(&self, free: usize) -> usize {
        self.full_of_free[free]
    }

    /// Expands a reduced coefficient vector to the full dof vector, with
    /// zeros in the constrained slots.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid.dof_count()];
        for (free, &v) in reduced.iter().enumerate() {
            full[self.full_of_free[free]] = v;
        }
        full
    }
}

/// Cubic Hermite shape values `[H, H', H'']` on the unit interval.
/// `side` selects the node (0 or 1), `kind` the dof type (0 = value,
/// 1 = derivative).
fn hermite1d(side: usize, kind: usize, t: f64) -> [f64; 3] {
    match (side, kind) {
        (0, 0) => [
            1.0 - 3.0 * t * t + 2.0 * t * t * t,
            -6.0 * t + 6.0 * t * t,
            -6.0 + 12.0 * t,
        ],
        (0, 1) => [
            t - 2.0 * t * t + t * t * t,
            1.0 - 4.0 * t + 3.0 * t * t,
            -4.0 + 6.0 * t,
        ],
        (1, 0) => [
            3.0 * t * t - 2.0 * t * t * t,
            6.0 * t - 6.0 * t * t,
            6.0 - 12.0 * t,
        ],
        (1, 1) => [-t * t + t * t * t, -2.0 * t + 3.0 * t * t, -2.0 + 6.0 * t],
        _ => unreachable!(),
    }
}

/// Local dof layout within a cell: node-major over corners
/// `(0,0), (1,0), (0,1), (1,1)`, component-minor `(u, u_x, u_y, u_xy)`.
#[inline]
pub fn local_dof(node: usize, comp: usize) -> usize {
    4 * node + comp
}

/// Global dof indices of a cell's 16 local dofs, in local order.
pub fn cell_dofs(grid: &Grid, cell: usize) -> [usize; 16] {
    let (ci, cj) = grid.cell_coords(cell);
    let mut out = [0usize; 16];
    for node in 0..4 {
        let (di, dj) = (node & 1, node >> 1);
        for comp in 0..4 {
            out[local_dof(node, comp)] = grid.dof_index(ci + di, cj + dj, comp);
        }
    }
    out
}

/// Evaluates one local Bogner–Fox–Schmit basis function on a cell.
///
/// `local` are reference coordinates `(ξ, η) ∈ [0,1]²`, `dof` a local index
/// from [`local_dof`], and `deriv = (dx, dy)` the partial-derivative order
/// with `dx + dy ≤ 2`. Derivative dofs carry the `hx`/`hy` scaling, so
/// coefficient vectors hold physical nodal derivatives.
pub fn basis_eval(
    grid: &Grid,
    cell: usize,
    local: (f64, f64),
    dof: usize,
    deriv: (u32, u32),
) -> Result<f64> {
    if cell >= grid.cell_count() {
        return Err(Error::invalid(format!("cell {cell} out of range")));
    }
    if dof >= 16 {
        return Err(Error::invalid(format!("local dof {dof} out of range")));
    }
    if deriv.0 + deriv.1 > 2 {
        return Err(Error::invalid("basis derivatives limited to order 2"));
    }
    Ok(basis_value(grid, local, dof, deriv))
}

/// Unchecked fast path used by the assembly kernels.
#[inline]
pub(crate) fn basis_value(grid: &Grid, local: (f64, f64), dof: usize, deriv: (u32, u32)) -> f64 {
    let (node, comp) = (dof / 4, dof % 4);
    let (side_x, side_y) = (node & 1, node >> 1);
    let (kind_x, kind_y) = (comp & 1, comp >> 1);
    let hx = grid.hx();
    let hy = grid.hy();
    let fx = hermite1d(side_x, kind_x, local.0)[deriv.0 as usize];
    let fy = hermite1d(side_y, kind_y, local.1)[deriv.1 as usize];
    // derivative dofs scale by h; each ∂/∂x brings a 1/h
    let sx = if kind_x == 1 { hx } else { 1.0 } / hx.powi(deriv.0 as i32);
    let sy = if kind_y == 1 { hy } else { 1.0 } / hy.powi(deriv.1 as i32);
    fx * fy * sx * sy
}

/// Evaluates a full-dof coefficient field at reference coordinates of a cell.
pub(crate) fn field_value_in_cell(
    grid: &Grid,
    coeffs: &[f64],
    cell: usize,
    local: (f64, f64),
    deriv: (u32, u32),
) -> f64 {
    let dofs = cell_dofs(grid, cell);
    let mut acc = 0.0;
    for (l, &g) in dofs.iter().enumerate() {
        let c = coeffs[g];
        if c != 0.0 {
            acc += c * basis_value(grid, local, l, deriv);
        }
    }
    acc
}

/// A piecewise-bicubic field over the grid, stored as full dof coefficients.
#[derive(Debug, Clone)]
pub struct FemField {
    pub grid: Grid,
    pub coeffs: Vec<f64>,
}

impl FemField {
    pub fn new(grid: Grid, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.dof_count() {
            return Err(Error::invalid("coefficient length mismatch"));
        }
        Ok(FemField { grid, coeffs })
    }

    /// Point evaluation anywhere on the (periodized) strip, derivatives up
    /// to second order.
    pub fn eval(&self, x: f64, y: f64, deriv: (u32, u32)) -> f64 {
        let g = &self.grid;
        let xw = x.rem_euclid(g.length);
        let y = y.clamp(-1.0, 0.0);
        let mut ci = (xw / g.hx()).floor() as usize;
        if ci >= g.nx {
            ci = g.nx - 1;
        }
        let mut cj = ((y + 1.0) / g.hy()).floor() as usize;
        if cj >= g.ny {
            cj = g.ny - 1;
        }
        let xi = (xw - ci as f64 * g.hx()) / g.hx();
        let eta = ((y + 1.0) - cj as f64 * g.hy()) / g.hy();
        field_value_in_cell(g, &self.coeffs, cj * g.nx + ci, (xi, eta), deriv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn grid() -> Grid {
        Grid::new(4, 4, 1.0).unwrap()
    }

    #[test]
    fn value_basis_is_cardinal_at_corners() {
        let g = grid();
        for node in 0..4 {
            let dof = local_dof(node, 0);
            for corner in 0..4 {
                let pt = ((corner & 1) as f64, (corner >> 1) as f64);
                let v = basis_eval(&g, 0, pt, dof, (0, 0)).unwrap();
                let expect = if corner == node { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v, expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn value_bases_partition_unity() {
        let g = grid();
        for &(xi, eta) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let sum: f64 = (0..4)
                .map(|n| basis_eval(&g, 0, (xi, eta), local_dof(n, 0), (0, 0)).unwrap())
                .sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bicubic_interpolation_reproduces_x3y3() {
        // q(x, y) = x³ y³ interpolated from nodal (q, q_x, q_y, q_xy) on one
        // cell is exact, including the Hessian
        let g = grid();
        let (hx, hy) = (g.hx(), g.hy());
        let q = |x: f64, y: f64| x.powi(3) * y.powi(3);
        let qx = |x: f64, y: f64| 3.0 * x * x * y.powi(3);
        let qy = |x: f64, y: f64| 3.0 * x.powi(3) * y * y;
        let qxy = |x: f64, y: f64| 9.0 * x * x * y * y;
        // cell (1,1): x ∈ [hx, 2hx], y ∈ [−1+hy, −1+2hy]
        let cell = g.nx + 1;
        let (x0, y0) = (hx, -1.0 + hy);
        let mut coeffs = [0.0; 16];
        for node in 0..4 {
            let (x, y) = (x0 + (node & 1) as f64 * hx, y0 + (node >> 1) as f64 * hy);
            coeffs[local_dof(node, 0)] = q(x, y);
            coeffs[local_dof(node, 1)] = qx(x, y);
            coeffs[local_dof(node, 2)] = qy(x, y);
            coeffs[local_dof(node, 3)] = qxy(x, y);
        }
        for &(xi, eta) in &[(0.2, 0.8), (0.6, 0.3), (0.95, 0.55)] {
            let (x, y) = (x0 + xi * hx, y0 + eta * hy);
            for (deriv, exact) in [
                ((0, 0), q(x, y)),
                ((2, 0), 6.0 * x * y.powi(3)),
                ((1, 1), qxy(x, y)),
                ((0, 2), 6.0 * x.powi(3) * y),
            ] {
                let v: f64 = (0..16)
                    .map(|l| coeffs[l] * basis_eval(&g, cell, (xi, eta), l, deriv).unwrap())
                    .sum();
                assert_abs_diff_eq!(v, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn dof_counts_match_constraint_arithmetic() {
        let g = grid();
        assert_eq!(g.dof_count(), 80);
        assert_eq!(build_dofmap(g, BcKind::Intermediate).free_count(), 64);
        assert_eq!(build_dofmap(g, BcKind::DirichletOnW).free_count(), 56);
        for gamma in [0.0, 3.7] {
            let st = build_dofmap(g, BcKind::StrangeTerm { gamma, sign: -1.0 });
            assert_eq!(st.free_count(), 64);
        }
    }

    fn random_constrained_field(g: Grid, bc: BcKind, seed: u64) -> FemField {
        let map = build_dofmap(g, bc);
        let mut rng = StdRng::seed_from_u64(seed);
        let reduced: Vec<f64> = (0..map.free_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FemField::new(g, map.expand(&reduced)).unwrap()
    }

    #[test]
    fn fields_are_c1_across_interior_edges() {
        let g = Grid::new(5, 3, 2.0).unwrap();
        let f = random_constrained_field(g, BcKind::Intermediate, 11);
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..50 {
            // vertical interior edge: approach from both sides
            let i = rng.gen_range(1..g.nx);
            let x = g.node_x(i);
            let y = rng.gen_range(-0.999..-0.001);
            for d in [(0, 0), (1, 0), (0, 1)] {
                let a = f.eval(x - 1e-12, y, d);
                let b = f.eval(x + 1e-12, y, d);
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "jump in {d:?}");
            }
            // horizontal interior edge
            let j = rng.gen_range(1..g.ny);
            let y = g.node_y(j);
            let x = rng.gen_range(0.0..g.length);
            for d in [(0, 0), (1, 0), (0, 1)] {
                let a = f.eval(x, y - 1e-12, d);
                let b = f.eval(x, y + 1e-12, d);
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "jump in {d:?}");
            }
        }
    }

    #[test]
    fn traces_vanish_according_to_bc() {
        let g = Grid::new(6, 4, 1.0).unwrap();
        let inter = random_constrained_field(g, BcKind::Intermediate, 3);
        let diri = random_constrained_field(g, BcKind::DirichletOnW, 4);
        for i in 0..=120 {
            let x = i as f64 / 120.0;
            assert!(inter.eval(x, 0.0, (0, 0)).abs() < 1e-12);
            assert!(inter.eval(x, -1.0, (0, 0)).abs() < 1e-12);
            assert!(diri.eval(x, 0.0, (0, 0)).abs() < 1e-12);
            assert!(diri.eval(x, 0.0, (0, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn lateral_periodicity_is_exact() {
        let g = Grid::new(6, 4, 1.0).unwrap();
        let f = random_constrained_field(g, BcKind::Intermediate, 9);
        for j in 0..=40 {
            let y = -(j as f64) / 40.0;
            let a = f.eval(0.0, y, (0, 0));
            let b = f.eval(g.length, y, (0, 0));
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn layer_line_detection() {
        let g = Grid::new(8, 32, 1.0).unwrap();
        assert!(g.has_line_at(0.125));
        assert!(g.has_line_at(1.0 / 32.0));
        assert!(!g.has_line_at(0.1));
    }
}
