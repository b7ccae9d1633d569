//! Microscopic cell problem on the semi-infinite periodic strip and the
//! strange boundary coefficient `γ`.
//!
//! The biharmonic cell problem (`Δ²V = 0` on `Y × (−∞, 0)`, `V(ȳ, 0) = b(ȳ)`,
//! `∂²V/∂y_N²(ȳ, 0) = 0`, second derivatives square-summable) reduces per
//! lateral Fourier mode `k ≠ 0` to `(d²/dt² − μ²)² c_k = 0` with `μ = 2π|k|`.
//! The decaying solution family is `(A + Bt)e^{μt}`; the two boundary
//! conditions fix `A = b̂_k`, `B = −μA/2`. The `k = 0` mode is affine with a
//! free slope: the solution is unique only up to adding `a·y_N`, and the
//! canonical representative here takes `a = 0`.
//!
//! `γ` is computed two ways that must agree: as the Hessian energy of `V`
//! ([`gamma_energy`]) and as a boundary flux pairing against `b`
//! ([`gamma_flux`]). A truncated-strip finite-difference solver
//! ([`solve_cell_truncated`]) provides an independent oracle for both.

use crate::error::{Error, Result};
use crate::profile::Profile;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// One lateral Fourier mode of the cell solution: `c(t) = (a + b t) e^{μ t}`
/// for the `+k` harmonic; the `−k` harmonic is the complex conjugate.
#[derive(Debug, Clone, Serialize)]
pub struct CellMode {
    pub k: u32,
    pub mu: f64,
    pub coeff_a: Complex64,
    pub coeff_b: Complex64,
}

impl CellMode {
    /// `c(t)` for the `+k` harmonic.
    pub fn value(&self, t: f64) -> Complex64 {
        (self.coeff_a + self.coeff_b * t) * (self.mu * t).exp()
    }

    /// Coefficients of the `d`-th derivative, still in `(A + Bt)e^{μt}` form.
    pub fn derivative_coeffs(&self, d: u32) -> (Complex64, Complex64) {
        let mut a = self.coeff_a;
        let mut b = self.coeff_b;
        for _ in 0..d {
            (a, b) = (self.mu * a + b, self.mu * b);
        }
        (a, b)
    }
}

/// Cell solution `V(ȳ, y_N) = mean + mean_slope·y_N + Σ_{k≥1} 2 Re(c_k(y_N) e^{2πik ȳ})`
/// together with its Hessian energy `γ`.
#[derive(Debug, Clone, Serialize)]
pub struct CellSolution {
    pub mean: f64,
    /// Slope `a` of the affine `k = 0` part; any value is admissible, zero is
    /// canonical. It carries no Hessian energy, so `γ` does not depend on it.
    pub mean_slope: f64,
    pub modes: Vec<CellMode>,
    pub gamma: f64,
}

impl CellSolution {
    /// Pointwise value of `V` at `(ȳ, y_N)` with `y_N ≤ 0`.
    pub fn eval(&self, y_bar: f64, y_n: f64) -> f64 {
        let mut v = self.mean + self.mean_slope * y_n;
        for m in &self.modes {
            let phase = Complex64::from_polar(1.0, TAU * m.k as f64 * y_bar);
            v += 2.0 * (m.value(y_n) * phase).re;
        }
        v
    }

    /// Same solution with a different affine slack; `γ` is untouched.
    pub fn with_mean_slope(mut self, a: f64) -> Self {
        self.mean_slope = a;
        self
    }

    /// Gradient `(∂V/∂ȳ, ∂V/∂y_N)` at `(ȳ, y_N)`.
    pub fn eval_grad(&self, y_bar: f64, y_n: f64) -> (f64, f64) {
        let mut gy = 0.0;
        let mut gn = self.mean_slope;
        for m in &self.modes {
            let phase = Complex64::from_polar(1.0, TAU * m.k as f64 * y_bar);
            let c = m.value(y_n);
            let (a1, b1) = m.derivative_coeffs(1);
            let c1 = (a1 + b1 * y_n) * (m.mu * y_n).exp();
            gy += 2.0 * (c * phase * Complex64::new(0.0, TAU * m.k as f64)).re;
            gn += 2.0 * (c1 * phase).re;
        }
        (gy, gn)
    }
}

/// Solves the cell problem mode by mode, exactly for trigonometric profiles.
pub fn solve_cell(profile: &Profile) -> CellSolution {
    let mut modes = Vec::new();
    for k in 1..=profile.max_mode() as u32 {
        let bk = profile.fourier_coefficient(k as i64);
        if bk.norm() == 0.0 {
            continue;
        }
        let mu = TAU * k as f64;
        modes.push(CellMode {
            k,
            mu,
            coeff_a: bk,
            coeff_b: -0.5 * mu * bk,
        });
    }
    let mut sol = CellSolution {
        mean: profile.fourier_coefficient(0).re,
        mean_slope: 0.0,
        modes,
        gamma: 0.0,
    };
    sol.gamma = gamma_energy(&sol);
    sol
}

/// `∫_{−∞}^0 |A + Bt|² e^{2μt} dt` in closed form.
fn poly_exp_l2(a: Complex64, b: Complex64, mu: f64) -> f64 {
    let cross = (a.conj() * b).re;
    a.norm_sqr() / (2.0 * mu) - cross / (2.0 * mu * mu) + b.norm_sqr() / (4.0 * mu.powi(3))
}

/// `γ = ∫_{Y×(−∞,0)} |D²V|² dy`, evaluated per mode as
/// `Σ_{k≠0} ∫ (μ⁴|c_k|² + 2μ²|c_k'|² + |c_k''|²) dt` with every integral in
/// closed form.
pub fn gamma_energy(sol: &CellSolution) -> f64 {
    let mut g = 0.0;
    for m in &sol.modes {
        let (a0, b0) = (m.coeff_a, m.coeff_b);
        let (a1, b1) = m.derivative_coeffs(1);
        let (a2, b2) = m.derivative_coeffs(2);
        let mode = m.mu.powi(4) * poly_exp_l2(a0, b0, m.mu)
            + 2.0 * m.mu * m.mu * poly_exp_l2(a1, b1, m.mu)
            + poly_exp_l2(a2, b2, m.mu);
        // the ±k harmonics contribute equally
        g += 2.0 * mode;
    }
    g
}

/// `γ = −∫_Y b · ∂_{y_N}(Δ_ȳ V + Δ V) dȳ` at `y_N = 0`, via the mode
/// coefficients: each harmonic contributes `−conj(b̂_k)·(c_k'''(0) − 2μ² c_k'(0))`.
pub fn gamma_flux(sol: &CellSolution) -> f64 {
    let mut g = 0.0;
    for m in &sol.modes {
        let (a1, _) = m.derivative_coeffs(1);
        let (a3, _) = m.derivative_coeffs(3);
        let term = -m.coeff_a.conj() * (a3 - 2.0 * m.mu * m.mu * a1);
        g += 2.0 * term.re;
    }
    g
}

/// Truncated-strip oracle output at one resolution pair.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedCellSolution {
    pub depth: f64,
    pub n: usize,
    /// Richardson extrapolation of the two resolutions below.
    pub gamma: f64,
    pub gamma_fine: f64,
    pub gamma_coarse: f64,
    pub modes: Vec<TruncatedMode>,
}

/// Sampled unit-boundary profile of one mode (`c_k = b̂_k · unit_profile`).
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedMode {
    pub k: u32,
    pub mu: f64,
    pub step: f64,
    pub depth: f64,
    pub unit_profile: Vec<f64>,
}

impl TruncatedMode {
    /// Linear interpolation of the sampled profile at `t ∈ [depth, 0]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let pos = (t - self.depth) / self.step;
        let i = (pos.floor() as usize).min(self.unit_profile.len() - 2);
        let frac = pos - i as f64;
        self.unit_profile[i] * (1.0 - frac) + self.unit_profile[i + 1] * frac
    }
}

/// Independent oracle: per-mode fourth-order two-point boundary value
/// problems on `(depth, 0)` solved by second-order finite differences with
/// clamped artificial conditions `c(d) = c'(d) = 0`, and `γ` assembled by
/// numerical quadrature. Reports the Richardson extrapolation over `n` and
/// `n/2` (both solves are cheap banded eliminations).
pub fn solve_cell_truncated(
    profile: &Profile,
    depth: f64,
    n: usize,
) -> Result<TruncatedCellSolution> {
    if !(depth <= -4.0) {
        return Err(Error::invalid("truncation depth must satisfy d ≤ −4"));
    }
    if n < 200 {
        return Err(Error::invalid("truncated solve needs n ≥ 200"));
    }
    let fine = truncated_gamma(profile, depth, n)?;
    let coarse = truncated_gamma(profile, depth, n / 2)?;
    Ok(TruncatedCellSolution {
        depth,
        n,
        gamma: (4.0 * fine.0 - coarse.0) / 3.0,
        gamma_fine: fine.0,
        gamma_coarse: coarse.0,
        modes: fine.1,
    })
}

fn truncated_gamma(profile: &Profile, depth: f64, n: usize) -> Result<(f64, Vec<TruncatedMode>)> {
    let h = -depth / n as f64;
    let mut gamma = 0.0;
    let mut modes = Vec::new();
    for k in 1..=profile.max_mode() as u32 {
        let bk = profile.fourier_coefficient(k as i64);
        if bk.norm() == 0.0 {
            continue;
        }
        let mu = TAU * k as f64;
        let w = solve_mode_fd(mu, h, n)?;
        gamma += 2.0 * bk.norm_sqr() * mode_energy_fd(&w, mu, h);
        modes.push(TruncatedMode {
            k,
            mu,
            step: h,
            depth,
            unit_profile: w,
        });
    }
    Ok((gamma, modes))
}

/// FD solve of `(d²/dt² − μ²)² w = 0` on `(d, 0)`, `w(d) = w'(d) = 0`,
/// `w(0) = 1`, `w''(0) = 0`, with one-sided second-order boundary stencils.
fn solve_mode_fd(mu: f64, h: f64, n: usize) -> Result<Vec<f64>> {
    let dim = n + 1;
    let mut band = BandMatrix::new(dim, 2, 2);
    let mut rhs = vec![0.0; dim];
    band.set(0, 0, 1.0); // w(d) = 0
    band.set(1, 0, -3.0); // w'(d) = 0, one-sided
    band.set(1, 1, 4.0);
    band.set(1, 2, -1.0);
    let m2 = 2.0 * mu * mu * h * h;
    let m4 = mu.powi(4) * h.powi(4);
    for i in 2..n - 1 {
        band.set(i, i - 2, 1.0);
        band.set(i, i - 1, -4.0 - m2);
        band.set(i, i, 6.0 + 2.0 * m2 + m4);
        band.set(i, i + 1, -4.0 - m2);
        band.set(i, i + 2, 1.0);
    }
    // w''(0) = 0, one-sided
    band.set(n - 1, n - 3, -1.0);
    band.set(n - 1, n - 2, 4.0);
    band.set(n - 1, n - 1, -5.0);
    band.set(n - 1, n, 2.0);
    band.set(n, n, 1.0); // w(0) = 1
    rhs[n] = 1.0;
    band.solve(&mut rhs)?;
    Ok(rhs)
}

/// `∫_d^0 (μ⁴ w² + 2μ² w'² + w''²) dt` with central differences inside and
/// one-sided second-order stencils at the ends, composite trapezoid weights.
fn mode_energy_fd(w: &[f64], mu: f64, h: f64) -> f64 {
    let n = w.len() - 1;
    let d1 = |i: usize| -> f64 {
        if i == 0 {
            (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h)
        } else if i == n {
            (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * h)
        } else {
            (w[i + 1] - w[i - 1]) / (2.0 * h)
        }
    };
    let d2 = |i: usize| -> f64 {
        if i == 0 {
            (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / (h * h)
        } else if i == n {
            (2.0 * w[n] - 5.0 * w[n - 1] + 4.0 * w[n - 2] - w[n - 3]) / (h * h)
        } else {
            (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h)
        }
    };
    let mut acc = 0.0;
    for i in 0..=n {
        let f = mu.powi(4) * w[i] * w[i] + 2.0 * mu * mu * d1(i).powi(2) + d2(i).powi(2);
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += weight * h * f;
    }
    acc
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals, LU-factorized with
/// partial pivoting (pivoting widens the upper band by `kl`).
struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// column-major; element `(i, j)` sits at `data[j*ldab + kl + ku + i − j]`
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.idx(i, j);
        self.data[p] = v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    /// In-place LU with partial pivoting followed by the triangular solves.
    fn solve(mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        let width = self.kl + self.ku;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let imax = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=imax {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::numerical("singular banded system"));
            }
            pivots[k] = p;
            let jmax = (k + width).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let diag = self.get(k, k);
            for i in k + 1..=imax {
                let l = self.get(i, k) / diag;
                self.set(i, k, l);
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let v = self.get(i, j) - l * self.get(k, j);
                        self.set(i, j, v);
                    }
                }
            }
        }
        // forward substitution with the recorded row swaps
        for k in 0..n {
            rhs.swap(k, pivots[k]);
            let imax = (k + self.kl).min(n - 1);
            for i in k + 1..=imax {
                rhs[i] -= self.get(i, k) * rhs[k];
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let jmax = (k + width).min(n - 1);
            let mut v = rhs[k];
            for j in k + 1..=jmax {
                v -= self.get(k, j) * rhs[j];
            }
            rhs[k] = v / self.get(k, k);
        }
        Ok(())
    }
}
