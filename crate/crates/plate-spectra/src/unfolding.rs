//! Anisotropic unfolding of discrete fields and the boundary-layer
//! comparison against the strip cell solution.
//!
//! The unfolding of `u : Ω → ℝ` is
//! `û(x̄, ȳ, y_N) = u(ε⌊x̄/ε⌋ + εȳ, ε y_N)` on `W × Y × (a/ε, 0)`: it freezes
//! the oscillation cell containing `x̄` and rescales both microscopic
//! variables by `ε`. With `L/ε` integral the whole strip is tiled by full
//! cells and the exact integration identity
//! `∫_{W×(a,0)} u dx = ε ∫_{W×Y×(a/ε,0)} û dx̄ dy` is a plain change of
//! variables — numerically exact once the quadrature subdivides at the
//! field's own breakpoints.

use crate::cell::CellSolution;
use crate::error::{Error, Result};
use crate::fem::FemField;
use crate::geometry::DomainSpec;
use crate::quadrature::{GAUSS3_NODES, GAUSS3_WEIGHTS, GAUSS5_NODES, GAUSS5_WEIGHTS};

/// Scalar field on (a superset of) the strip `Ω`, with partial derivatives
/// up to the order each consumer needs.
pub trait Field {
    fn eval(&self, x_bar: f64, x_n: f64, deriv: (u32, u32)) -> f64;
}

impl Field for FemField {
    fn eval(&self, x_bar: f64, x_n: f64, deriv: (u32, u32)) -> f64 {
        FemField::eval(self, x_bar, x_n, deriv)
    }
}

/// Closure-backed field for synthetic constructions.
pub struct FnField<F: Fn(f64, f64, (u32, u32)) -> f64>(pub F);

impl<F: Fn(f64, f64, (u32, u32)) -> f64> Field for FnField<F> {
    fn eval(&self, x_bar: f64, x_n: f64, deriv: (u32, u32)) -> f64 {
        (self.0)(x_bar, x_n, deriv)
    }
}

/// A grid field composed with the flattening diffeomorphism:
/// `ψ = φ ∘ Φ_ε`, the conforming trial functions of the perturbed problem.
pub struct PulledBackField {
    pub spec: DomainSpec,
    pub base: FemField,
}

impl Field for PulledBackField {
    fn eval(&self, x_bar: f64, x_n: f64, deriv: (u32, u32)) -> f64 {
        let h = |dx, dn| self.spec.h_eps_unchecked(x_bar, x_n, dx, dn);
        let r_n = x_n - h(0, 0);
        let f = |dx, dn| self.base.eval(x_bar, r_n, (dx, dn));
        match deriv {
            (0, 0) => f(0, 0),
            (1, 0) => f(1, 0) - f(0, 1) * h(1, 0),
            (0, 1) => f(0, 1) * (1.0 - h(0, 1)),
            (2, 0) => {
                let hx = h(1, 0);
                f(2, 0) - 2.0 * hx * f(1, 1) + hx * hx * f(0, 2) - f(0, 1) * h(2, 0)
            }
            (1, 1) => {
                let hx = h(1, 0);
                let det = 1.0 - h(0, 1);
                det * (f(1, 1) - hx * f(0, 2)) - f(0, 1) * h(1, 1)
            }
            (0, 2) => {
                let det = 1.0 - h(0, 1);
                det * det * f(0, 2) - f(0, 1) * h(0, 2)
            }
            _ => panic!("pulled-back derivatives limited to order 2"),
        }
    }
}

/// Unfolded samples of a field on the tensor grid
/// `cell × ȳ-samples × y_N-samples`; constant in `x̄` within each ε-cell by
/// construction.
#[derive(Debug, Clone)]
pub struct UnfoldedField {
    pub eps: f64,
    /// Window depth `a < 0` in macroscopic units.
    pub depth: f64,
    pub y_bar: Vec<f64>,
    pub y_n: Vec<f64>,
    /// `values[cell][i][j] = û(cell, y_bar[i], y_n[j])`.
    pub values: Vec<Vec<Vec<f64>>>,
}

/// Samples the unfolding of `field` over every ε-cell of `(0, L)`.
///
/// Requires `L/ε` integral so that the cell family tiles the strip exactly.
pub fn unfold(
    field: &dyn Field,
    length: f64,
    eps: f64,
    depth: f64,
    n_y_bar: usize,
    n_y_n: usize,
) -> Result<UnfoldedField> {
    let cells = cell_count(length, eps)?;
    if !(depth < 0.0) {
        return Err(Error::invalid("window depth must be negative"));
    }
    let y_bar: Vec<f64> = (0..n_y_bar)
        .map(|i| (i as f64 + 0.5) / n_y_bar as f64)
        .collect();
    let y_n: Vec<f64> = (0..=n_y_n)
        .map(|j| depth / eps * (1.0 - j as f64 / n_y_n as f64))
        .collect();
    let values = (0..cells)
        .map(|k| {
            y_bar
                .iter()
                .map(|&yb| {
                    y_n.iter()
                        .map(|&yn| field.eval(eps * (k as f64 + yb), eps * yn, (0, 0)))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(UnfoldedField {
        eps,
        depth,
        y_bar,
        y_n,
        values,
    })
}

fn cell_count(length: f64, eps: f64) -> Result<usize> {
    let cells = length / eps;
    if (cells - cells.round()).abs() > 1e-9 || cells.round() < 1.0 {
        return Err(Error::invalid(format!(
            "L/eps = {cells} must be a positive integer"
        )));
    }
    Ok(cells.round() as usize)
}

/// Evaluates both sides of the exact integration identity
/// `∫_{W×(a,0)} u dx = ε ∫_{W×Y×(a/ε,0)} û dx̄ dy` and returns
/// `(lhs, rhs, |lhs − rhs|)`.
///
/// `panels_x` subdivides each ε-cell laterally and `panels_y` the vertical
/// window; choose them so the quadrature panels align with the field's own
/// piecewise-polynomial breakpoints (for a grid field: `panels_x = nx·ε/L`
/// and `panels_y` = grid rows in the window).
pub fn check_exact_integration(
    field: &dyn Field,
    length: f64,
    eps: f64,
    depth: f64,
    panels_x: usize,
    panels_y: usize,
) -> Result<(f64, f64, f64)> {
    let cells = cell_count(length, eps)?;
    if !(-1.0..0.0).contains(&depth) && depth != -1.0 {
        return Err(Error::invalid("depth must lie in [-1, 0)"));
    }

    // left side: direct quadrature over W × (a, 0), panels per ε-cell
    let mut lhs = 0.0;
    for k in 0..cells {
        for px in 0..panels_x {
            let x0 = eps * (k as f64 + px as f64 / panels_x as f64);
            let wx = eps / panels_x as f64;
            for (gx, wgx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                let x = x0 + gx * wx;
                for py in 0..panels_y {
                    let y0 = depth * (1.0 - py as f64 / panels_y as f64);
                    let hy = -depth / panels_y as f64;
                    for (gy, wgy) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                        let y = y0 + gy * hy;
                        lhs += wgx * wgy * wx * hy * field.eval(x, y, (0, 0));
                    }
                }
            }
        }
    }

    // right side: ε × the unfolded integral, same panel structure carried to
    // (ȳ, y_N) so both quadratures see the same breakpoints
    let mut rhs = 0.0;
    for k in 0..cells {
        for px in 0..panels_x {
            let yb0 = px as f64 / panels_x as f64;
            let wyb = 1.0 / panels_x as f64;
            for (gx, wgx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                let yb = yb0 + gx * wyb;
                for py in 0..panels_y {
                    let yn0 = depth / eps * (1.0 - py as f64 / panels_y as f64);
                    let hyn = -depth / eps / panels_y as f64;
                    for (gy, wgy) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
                        let yn = yn0 + gy * hyn;
                        let u = field.eval(eps * (k as f64 + yb), eps * yn, (0, 0));
                        // the x̄ integral over one cell contributes a factor ε
                        rhs += eps * wgx * wgy * wyb * hyn * u * eps;
                    }
                }
            }
        }
    }

    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Depth (in `y_N` units) of the boundary-layer comparison window; the cell
/// modes decay at least like `e^{2π y_N}`, so deeper windows add nothing at
/// the tolerances in play.
const WINDOW_DEPTH: f64 = -2.0;
const WINDOW_PANELS_Y: usize = 32;
const PANELS_PER_CELL: usize = 8;

/// Relative distance between the rescaled unfolded boundary layer of a
/// perturbed solution and the cell-solution prediction.
///
/// Per ε-cell the field is unfolded, its trace mean and trace-gradient mean
/// at `y_N = 0` are projected out, and the remainder is rescaled by
/// `ε^{-3/2}`. The prediction is `(V − b̂₀)·∂_N v(x̄, 0)` with the per-cell
/// affine slack `a(x̄)·y_N` fitted out by least squares, so the result does
/// not depend on the slack convention of the cell solution. Both fields must
/// arrive normalized and sign-aligned; a cosine similarity below 0.9 is
/// rejected as a branch/normalization mismatch.
pub fn boundary_layer_error(
    spec: &DomainSpec,
    v_eps: &dyn Field,
    cell: &CellSolution,
    v_limit: &dyn Field,
) -> Result<f64> {
    let eps = spec.eps();
    let length = spec.length();
    let cells = cell_count(length, eps)?;

    // normalization / branch guard on the strip
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    let probe = 96usize;
    for i in 0..probe {
        let x = length * (i as f64 + 0.5) / probe as f64;
        for j in 0..64 {
            let y = -(j as f64 + 0.5) / 64.0;
            let a = v_eps.eval(x, y, (0, 0));
            let b = v_limit.eval(x, y, (0, 0));
            aa += a * a;
            bb += b * b;
            ab += a * b;
        }
    }
    let cosine = ab / (aa.sqrt() * bb.sqrt()).max(1e-300);
    if cosine < 0.9 {
        return Err(Error::invalid(format!(
            "fields are not matched (cosine similarity {cosine:.3}); normalize \
             and sign-align the same eigenvalue branch first"
        )));
    }

    let scale = eps.powf(1.5);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..cells {
        let xk = |yb: f64| eps * (k as f64 + yb);

        // trace means over Y at y_N = 0
        let (mut m0, mut mgx, mut mgn) = (0.0, 0.0, 0.0);
        for p in 0..PANELS_PER_CELL {
            for (g, w) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                let yb = (p as f64 + g) / PANELS_PER_CELL as f64;
                let w = w / PANELS_PER_CELL as f64;
                m0 += w * v_eps.eval(xk(yb), 0.0, (0, 0));
                mgx += w * eps * v_eps.eval(xk(yb), 0.0, (1, 0));
                mgn += w * eps * v_eps.eval(xk(yb), 0.0, (0, 1));
            }
        }

        let slope = v_limit.eval(eps * (k as f64 + 0.5), 0.0, (0, 1));

        // quadrature over Y × (WINDOW_DEPTH, 0): residual and target norms,
        // with the per-cell y_N slack fitted out of the residual
        let (mut rr, mut tt, mut ry, mut yy) = (0.0, 0.0, 0.0, 0.0);
        let mut samples = Vec::new();
        for p in 0..PANELS_PER_CELL {
            for (g, wg) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                let yb = (p as f64 + g) / PANELS_PER_CELL as f64;
                let wyb = wg / PANELS_PER_CELL as f64;
                for q in 0..WINDOW_PANELS_Y {
                    for (gy, wgy) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                        let yn = WINDOW_DEPTH * (1.0 - (q as f64 + gy) / WINDOW_PANELS_Y as f64);
                        let w = wyb * wgy * (-WINDOW_DEPTH) / WINDOW_PANELS_Y as f64;
                        let unfolded = v_eps.eval(xk(yb), eps * yn, (0, 0));
                        let e = (unfolded - m0 - mgx * yb - mgn * yn) / scale;
                        let v_proj = cell.eval(yb, yn) - cell.mean - cell.mean_slope * yn;
                        let t = v_proj * slope;
                        let r = e - t;
                        ry += w * r * yn;
                        yy += w * yn * yn;
                        tt += w * t * t;
                        samples.push((w, r, yn));
                    }
                }
            }
        }
        let a_fit = ry / yy;
        for (w, r, yn) in samples {
            let r = r - a_fit * yn;
            rr += w * r * r;
        }
        num += eps * rr;
        den += eps * tt;
    }

    if den.sqrt() < 1e-14 {
        // degenerate prediction (flat profile or vanishing trace slope):
        // report the absolute residual
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cell;
    use crate::fem::{Grid, FemField};
    use crate::profile::Profile;
    use approx::assert_abs_diff_eq;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::f64::consts::TAU;

    #[test]
    fn unfold_constant_and_linear_fields() {
        let one = FnField(|_, _, d: (u32, u32)| if d == (0, 0) { 1.0 } else { 0.0 });
        let u = unfold(&one, 1.0, 0.25, -1.0, 4, 4).unwrap();
        for cell in &u.values {
            for row in cell {
                for v in row {
                    assert_eq!(*v, 1.0);
                }
            }
        }
        // u = x_N unfolds to ε y_N
        let lin = FnField(|_, xn, d: (u32, u32)| match d {
            (0, 0) => xn,
            (0, 1) => 1.0,
            _ => 0.0,
        });
        let eps = 0.125;
        let u = unfold(&lin, 1.0, eps, -0.5, 3, 5).unwrap();
        for cell in &u.values {
            for row in cell {
                for (j, v) in row.iter().enumerate() {
                    assert_abs_diff_eq!(*v, eps * u.y_n[j], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn unfold_oscillatory_field_is_cell_independent() {
        let eps = 0.125;
        let osc = FnField(move |x, y, d: (u32, u32)| {
            assert_eq!(d, (0, 0));
            (TAU * x / eps).sin() * (y / eps).exp()
        });
        let u = unfold(&osc, 1.0, eps, -0.5, 6, 6).unwrap();
        for (i, &yb) in u.y_bar.iter().enumerate() {
            for (j, &yn) in u.y_n.iter().enumerate() {
                let expect = (TAU * yb).sin() * yn.exp();
                for cell in &u.values {
                    assert_abs_diff_eq!(cell[i][j], expect, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn unfold_requires_integer_cell_count() {
        let one = FnField(|_, _, _| 1.0);
        assert!(unfold(&one, 1.0, 0.3, -1.0, 2, 2).is_err());
    }

    #[test]
    fn exact_integration_on_simple_fields() {
        let one = FnField(|_, _, _| 1.0);
        let (l, r, d) = check_exact_integration(&one, 1.0, 0.25, -1.0, 2, 3).unwrap();
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-13);
        assert!(d <= 1e-12);
        let _ = r;

        // u = x̄ on W = (0,1): both sides 1/2
        let xb = FnField(|x, _, _| x);
        let (l, r, d) = check_exact_integration(&xb, 1.0, 0.25, -1.0, 2, 2).unwrap();
        assert_abs_diff_eq!(l, 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-13);
        assert!(d <= 1e-12);
    }

    #[test]
    fn exact_integration_on_random_bicubic_field() {
        let grid = Grid::new(32, 8, 1.0).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let coeffs: Vec<f64> = (0..grid.dof_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = FemField::new(grid, coeffs).unwrap();
        let eps = 0.25;
        // panels: 8 grid cells per ε-cell, 8 rows over the full depth
        let (l, _r, d) = check_exact_integration(&field, 1.0, eps, -1.0, 8, 8).unwrap();
        assert!(d <= 1e-10 * l.abs().max(1.0), "diff {d:.3e} vs lhs {l:.3e}");
    }

    #[test]
    fn planted_boundary_layer_is_recovered() {
        let profile = Profile::cosine(0.2).unwrap();
        let cellsol = solve_cell(&profile);
        let eps = 1.0 / 16.0;
        let spec = DomainSpec::new(1.0, eps, 1.5, profile).unwrap();
        // staircase amplitude per ε-cell + a bulk linear in x_N
        let amp = move |x: f64| 1.0 + 0.3 * (TAU * (eps * (x / eps).floor() + eps / 2.0)).sin();
        let cs = cellsol.clone();
        let planted = FnField(move |x, xn, d: (u32, u32)| {
            let s = eps.powf(1.5);
            match d {
                (0, 0) => s * cs.eval(x / eps, xn / eps) * amp(x) + 0.7 * xn,
                (1, 0) => s / eps * cs.eval_grad(x / eps, xn / eps).0 * amp(x),
                (0, 1) => s / eps * cs.eval_grad(x / eps, xn / eps).1 * amp(x) + 0.7,
                _ => panic!("planted field sampled up to first order only"),
            }
        });
        let v_limit = FnField(move |x, xn, d: (u32, u32)| match d {
            (0, 0) => xn * amp(x),
            (0, 1) => amp(x),
            _ => 0.0,
        });
        let dist = boundary_layer_error(&spec, &planted, &cellsol, &v_limit).unwrap();
        assert!(dist <= 1e-3, "planted recovery distance {dist:.3e}");

        // invariance under the cell-solution slack
        let slacked = cellsol.clone().with_mean_slope(0.8);
        let dist2 = boundary_layer_error(&spec, &planted, &slacked, &v_limit).unwrap();
        assert!((dist - dist2).abs() <= 1e-12);
    }

    #[test]
    fn flat_profile_layer_vanishes() {
        // with b ≡ 0 there is no microscopic layer: the per-cell affine
        // projector annihilates an affine bulk exactly
        let spec = DomainSpec::new(1.0, 0.125, 1.5, Profile::flat()).unwrap();
        let cellsol = solve_cell(&Profile::flat());
        let lin = FnField(|_, xn, d: (u32, u32)| match d {
            (0, 0) => 0.4 * xn,
            (0, 1) => 0.4,
            _ => 0.0,
        });
        let dist = boundary_layer_error(&spec, &lin, &cellsol, &lin).unwrap();
        assert!(dist <= 1e-12, "distance {dist:.3e}");
    }

    #[test]
    fn mismatched_normalization_rejected() {
        let spec = DomainSpec::new(1.0, 0.125, 1.5, Profile::cosine(0.2).unwrap()).unwrap();
        let cellsol = solve_cell(spec.profile());
        let a = FnField(|_, xn, _| xn);
        let b = FnField(|_, xn, _| -xn);
        assert!(boundary_layer_error(&spec, &a, &cellsol, &b).is_err());
    }
}
