//! High-accuracy reference eigenvalues for the limit operators.
//!
//! Lateral Fourier reduction on the periodic strip turns `Δ² + 1` into the
//! family of fourth-order two-point problems
//!
//! `φ'''' − 2μ² φ'' + μ⁴ φ + φ = λ φ` on `(−1, 0)`, `μ = 2πk/L`,
//!
//! with a hinged bottom (`φ(−1) = φ''(−1) = 0`) and a top condition that
//! selects the operator: hinged, clamped, or the Robin-type condition carrying
//! the strange coefficient. Eigenvalues are located as the roots of the 4×4
//! boundary-condition determinant built from closed-form characteristic
//! solutions — a code path with nothing in common with the plate FEM, so
//! agreement between the two is evidence rather than tautology.
//!
//! Sign convention: `form_sign` is the sign of the boundary term `γ·S` added
//! to the quadratic form. The induced natural condition is
//! `φ''(0) + form_sign·γ·φ'(0) = 0`; the literal reading of the critical-case
//! limit problem (`Δu − γ ∂u/∂ν = 0`) is `form_sign = −1`.

use crate::error::{Error, Result};
use crate::fem::BcKind;
use num_complex::Complex64;

/// Top boundary condition of a lateral mode problem (bottom is always hinged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopBc {
    /// `φ(0) = 0`, `φ''(0) = 0`.
    Hinged,
    /// `φ(0) = 0`, `φ'(0) = 0`.
    Clamped,
    /// `φ(0) = 0`, `φ''(0) + form_sign·γ·φ'(0) = 0`.
    Robin { gamma: f64, form_sign: f64 },
}

/// One lateral mode `μ = 2πk/L` of a limit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProblem {
    pub mu: f64,
    pub top: TopBc,
}

/// A labelled line of a limit spectrum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectrumLine {
    pub lambda: f64,
    /// Lateral mode number `k ≥ 0`.
    pub k: u32,
    /// Vertical mode index within the lateral mode, 1-based.
    pub n: u32,
    /// 1 for `k = 0`, 2 for `k ≠ 0` (the `±k` degeneracy).
    pub multiplicity: u32,
}

/// One characteristic solution of the constant-coefficient mode ODE,
/// normalized to magnitude ≤ 1 on `[−1, 0]` for conditioning.
enum BasisFun {
    /// `Re` or `Im` of `e^{r (t + shift)}`.
    Exp {
        r: Complex64,
        shift: f64,
        take_im: bool,
    },
    /// `t^pow`, `pow ≤ 3`.
    Poly { pow: u32 },
    /// `t · e^{r (t + shift)}` for the double-root case.
    TExp { r: f64, shift: f64 },
    /// `cosh(√d t)` continued through `d ≤ 0` as `cos(√−d t)`; entire in `d`,
    /// so the determinant stays continuous across `d = 0`.
    CoshLike { d: f64 },
    /// `sinh(√d t)/√d` continued as `sin(√−d t)/√−d` and as `t` at `d = 0`.
    SinhcLike { d: f64 },
}

fn cosh_like(d: f64, t: f64) -> f64 {
    if d > 1e-8 {
        (d.sqrt() * t).cosh()
    } else if d < -1e-8 {
        ((-d).sqrt() * t).cos()
    } else {
        let x = d * t * t;
        1.0 + x / 2.0 + x * x / 24.0
    }
}

fn sinhc_like(d: f64, t: f64) -> f64 {
    if d > 1e-8 {
        let q = d.sqrt();
        (q * t).sinh() / q
    } else if d < -1e-8 {
        let q = (-d).sqrt();
        (q * t).sin() / q
    } else {
        let x = d * t * t;
        t * (1.0 + x / 6.0 + x * x / 120.0)
    }
}

impl BasisFun {
    /// Values `[f, f', f'', f''']` at `t`.
    fn eval(&self, t: f64) -> [f64; 4] {
        match *self {
            BasisFun::Exp { r, shift, take_im } => {
                let z = (r * (t + shift)).exp();
                let mut out = [0.0; 4];
                let mut rz = z;
                for (j, slot) in out.iter_mut().enumerate() {
                    if j > 0 {
                        rz *= r;
                    }
                    *slot = if take_im { rz.im } else { rz.re };
                }
                out
            }
            BasisFun::Poly { pow } => {
                let mut out = [0.0; 4];
                let p = pow as i32;
                let mut coeff = 1.0;
                for (j, slot) in out.iter_mut().enumerate() {
                    let e = p - j as i32;
                    if e < 0 {
                        break;
                    }
                    *slot = coeff * t.powi(e);
                    coeff *= e as f64;
                }
                out
            }
            BasisFun::TExp { r, shift } => {
                let e = (r * (t + shift)).exp();
                [
                    t * e,
                    (1.0 + r * t) * e,
                    (2.0 * r + r * r * t) * e,
                    (3.0 * r * r + r * r * r * t) * e,
                ]
            }
            // derivative chains: C' = d·S, S' = C
            BasisFun::CoshLike { d } => {
                let c = cosh_like(d, t);
                let s = sinhc_like(d, t);
                [c, d * s, d * c, d * d * s]
            }
            BasisFun::SinhcLike { d } => {
                let c = cosh_like(d, t);
                let s = sinhc_like(d, t);
                [s, c, d * s, d * c]
            }
        }
    }
}

/// Near-degenerate threshold for the characteristic exponents.
const DEGENERATE_TOL: f64 = 1e-11;

/// Characteristic basis of `φ'''' − 2μ²φ'' + (μ⁴ + 1 − λ)φ = 0`.
///
/// With `κ = λ − 1` the exponents satisfy `r² = μ² ± √κ` (for `κ ≥ 0`) or
/// `r² = μ² ± i√(−κ)` (for `κ < 0`, reachable only with a negative form
/// sign and large `γ`).
fn characteristic_basis(mu: f64, lambda: f64) -> [BasisFun; 4] {
    let kappa = lambda - 1.0;
    if kappa > DEGENERATE_TOL {
        let s = kappa.sqrt();
        let p = (mu * mu + s).sqrt();
        let e_plus = BasisFun::Exp {
            r: Complex64::new(p, 0.0),
            shift: 0.0,
            take_im: false,
        };
        let e_minus = BasisFun::Exp {
            r: Complex64::new(-p, 0.0),
            shift: 1.0,
            take_im: false,
        };
        let d = mu * mu - s;
        [
            e_plus,
            e_minus,
            BasisFun::CoshLike { d },
            BasisFun::SinhcLike { d },
        ]
    } else if kappa < -DEGENERATE_TOL {
        let r = Complex64::new(mu * mu, (-kappa).sqrt()).sqrt();
        [
            BasisFun::Exp {
                r,
                shift: 0.0,
                take_im: false,
            },
            BasisFun::Exp {
                r,
                shift: 0.0,
                take_im: true,
            },
            BasisFun::Exp {
                r: -r,
                shift: 1.0,
                take_im: false,
            },
            BasisFun::Exp {
                r: -r,
                shift: 1.0,
                take_im: true,
            },
        ]
    } else if mu > DEGENERATE_TOL {
        [
            BasisFun::Exp {
                r: Complex64::new(mu, 0.0),
                shift: 0.0,
                take_im: false,
            },
            BasisFun::Exp {
                r: Complex64::new(-mu, 0.0),
                shift: 1.0,
                take_im: false,
            },
            BasisFun::TExp { r: mu, shift: 0.0 },
            BasisFun::TExp { r: -mu, shift: 1.0 },
        ]
    } else {
        [
            BasisFun::Poly { pow: 0 },
            BasisFun::Poly { pow: 1 },
            BasisFun::Poly { pow: 2 },
            BasisFun::Poly { pow: 3 },
        ]
    }
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let minor = |col: usize| -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (oi, i) in (1..4).enumerate() {
            let mut oj = 0;
            for j in 0..4 {
                if j == col {
                    continue;
                }
                out[oi][oj] = m[i][j];
                oj += 1;
            }
        }
        out
    };
    m[0][0] * det3(minor(0)) - m[0][1] * det3(minor(1)) + m[0][2] * det3(minor(2))
        - m[0][3] * det3(minor(3))
}

/// Boundary-condition matrix at `λ`: rows are the four BC functionals, one
/// column per characteristic solution.
fn bc_matrix_raw(p: &ModeProblem, lambda: f64) -> [[f64; 4]; 4] {
    let basis = characteristic_basis(p.mu, lambda);
    let mut m = [[0.0; 4]; 4];
    for (j, f) in basis.iter().enumerate() {
        let bot = f.eval(-1.0);
        let top = f.eval(0.0);
        m[0][j] = bot[0];
        m[1][j] = bot[2];
        m[2][j] = top[0];
        m[3][j] = match p.top {
            TopBc::Hinged => top[2],
            TopBc::Clamped => top[1],
            TopBc::Robin { gamma, form_sign } => top[2] + form_sign * gamma * top[1],
        };
    }
    m
}

/// Sign-stable determinant: columns rescaled to unit max entry (a positive
/// factor, so roots and sign changes are preserved).
fn determinant(p: &ModeProblem, lambda: f64) -> f64 {
    let mut m = bc_matrix_raw(p, lambda);
    for j in 0..4 {
        let scale = m.iter().map(|row| row[j].abs()).fold(0.0, f64::max);
        if scale > 0.0 {
            for row in m.iter_mut() {
                row[j] /= scale;
            }
        }
    }
    det4(&m)
}

/// Bisection refinement of a sign-change bracket to 1e−12 relative.
fn bisect(p: &ModeProblem, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.abs().max(1.0) {
            return mid;
        }
        let fm = determinant(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans `[lo, hi]` with the given step, bisecting every sign change; near
/// local minima of `|D|` without a sign change the scan is refined once at
/// a 32× finer step to pick up close root pairs.
fn scan_segment(
    p: &ModeProblem,
    lo: f64,
    hi: f64,
    step: f64,
    roots: &mut Vec<f64>,
    refine: bool,
    need: usize,
) {
    if hi <= lo || roots.len() >= need {
        return;
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut prev_x = lo;
    let mut prev_f = determinant(p, lo);
    let mut window = [f64::INFINITY; 3];
    // the refinement pass can rediscover a root already bracketed by the
    // main sweep; keep the collection duplicate-free as it grows
    let push = |roots: &mut Vec<f64>, x: f64| {
        if !roots
            .iter()
            .any(|r| (r - x).abs() <= 1e-8 * x.abs().max(1.0))
        {
            roots.push(x);
        }
    };
    for i in 1..=n {
        let x = (lo + i as f64 * step).min(hi);
        let f = determinant(p, x);
        if f == 0.0 {
            push(roots, x);
        } else if (f > 0.0) != (prev_f > 0.0) {
            push(roots, bisect(p, prev_x, x, prev_f));
        } else if refine {
            // a dip in |D| without sign change may hide a close pair
            window = [window[1], window[2], f.abs()];
            if window[1] < window[0] && window[1] < window[2] && i >= 3 {
                let a = lo + (i as f64 - 3.0) * step;
                let b = x;
                scan_segment(p, a, b, step / 32.0, roots, false, need);
            }
        }
        if roots.len() >= need {
            return;
        }
        prev_x = x;
        prev_f = f;
    }
}

/// Hard ceiling of the eigenvalue scan; the scan stops early once enough
/// roots are bracketed, so the ceiling is only reached for large requests.
const SCAN_MAX: f64 = 2e6;

/// The `count` smallest eigenvalues of a mode problem, ascending, located by
/// scanning + bisection of the boundary-condition determinant.
pub fn mode_eigenvalues(p: &ModeProblem, count: usize) -> Result<Vec<f64>> {
    if count == 0 || count > 10 {
        return Err(Error::invalid("mode eigenvalue count must be in 1..=10"));
    }
    // with a negative form sign the form is not bounded below by the mass, so
    // the scan must start below λ = 1; the trace bound gives λ ≥ 1 − 2γ⁴
    let lo = match p.top {
        TopBc::Robin { gamma, form_sign } if form_sign < 0.0 => {
            1.0 - 2.0 * gamma.powi(4) - 10.0
        }
        _ => 1.0,
    };
    // at λ = 1 the two characteristic pairs coincide and the determinant
    // degenerates without an eigenvalue; keep a small dead zone around it
    let mut cuts: Vec<f64> = vec![lo];
    if 1.0 > lo {
        cuts.push(1.0);
    }
    cuts.push(SCAN_MAX);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut roots = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0] + 1e-6, pair[1] - 1e-6);
        scan_segment(p, a, b, 1.0, &mut roots, true, count);
        if roots.len() >= count {
            break;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    if roots.len() < count {
        return Err(Error::numerical(format!(
            "found only {} of {} eigenvalues scanning λ ∈ [{:.3e}, {:.3e}] at μ = {} (step 1.0)",
            roots.len(),
            count,
            lo,
            SCAN_MAX,
            p.mu
        )));
    }
    roots.truncate(count);
    Ok(roots)
}

/// Sampled eigenfunction shape for a located eigenvalue (null vector of the
/// boundary-condition matrix via the adjugate), normalized to unit max.
pub fn mode_shape(p: &ModeProblem, lambda: f64, samples: usize) -> Vec<(f64, f64)> {
    // the raw matrix is the singular one at an eigenvalue (the determinant
    // path rescales columns, which would shift the null space)
    let m = bc_matrix_raw(p, lambda);
    // columns of adj(M) span the null space when rank(M) = 3
    let mut best = [0.0; 4];
    let mut best_norm = -1.0;
    for col in 0..4 {
        let mut v = [0.0; 4];
        for row in 0..4 {
            // cofactor C_{col,row} (adjugate is the transposed cofactor matrix)
            let mut sub = [[0.0; 3]; 3];
            let mut si = 0;
            for i in 0..4 {
                if i == col {
                    continue;
                }
                let mut sj = 0;
                for j in 0..4 {
                    if j == row {
                        continue;
                    }
                    sub[si][sj] = m[i][j];
                    sj += 1;
                }
                si += 1;
            }
            let det3 = sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
                - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
                + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
            v[row] = if (col + row) % 2 == 0 { det3 } else { -det3 };
        }
        let norm: f64 = v.iter().map(|x| x * x).sum();
        if norm > best_norm {
            best_norm = norm;
            best = v;
        }
    }
    let basis = characteristic_basis(p.mu, lambda);
    let raw: Vec<(f64, f64)> = (0..=samples)
        .map(|i| {
            let t = -1.0 + i as f64 / samples as f64;
            let v: f64 = basis
                .iter()
                .zip(best)
                .map(|(f, c)| c * f.eval(t)[0])
                .sum();
            (t, v)
        })
        .collect();
    let peak = raw
        .iter()
        .map(|(_, v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    raw.into_iter().map(|(t, v)| (t, v / peak)).collect()
}

fn top_bc_of(bc: &BcKind) -> TopBc {
    match *bc {
        BcKind::Intermediate => TopBc::Hinged,
        BcKind::DirichletOnW => TopBc::Clamped,
        BcKind::StrangeTerm { gamma, sign } => TopBc::Robin {
            gamma,
            form_sign: sign,
        },
    }
}

/// Merged limit spectrum over lateral modes `k = 0, 1, 2, …` until the
/// requested number of eigenvalues (counted with multiplicity) is certified:
/// each mode's fundamental eigenvalue grows with `k`, so merging stops once
/// the next mode opens above everything kept.
pub fn limit_spectrum(bc: &BcKind, length: f64, count: usize) -> Result<Vec<SpectrumLine>> {
    if count == 0 || count > 32 {
        return Err(Error::invalid("spectrum count must be in 1..=32"));
    }
    if !(length > 0.0) {
        return Err(Error::invalid("length must be positive"));
    }
    let top = top_bc_of(bc);
    let mut lines: Vec<SpectrumLine> = Vec::new();
    let per_mode = count.min(10);
    for k in 0u32.. {
        if k > 200 {
            return Err(Error::numerical("lateral mode merge did not close"));
        }
        let mu = std::f64::consts::TAU * k as f64 / length;
        let p = ModeProblem { mu, top };
        let evs = mode_eigenvalues(&p, per_mode)?;
        let certified = {
            let mut flat: Vec<f64> = lines
                .iter()
                .flat_map(|l| std::iter::repeat(l.lambda).take(l.multiplicity as usize))
                .collect();
            flat.sort_by(f64::total_cmp);
            flat.len() >= count && evs[0] > flat[count - 1]
        };
        if certified {
            break;
        }
        for (i, &lambda) in evs.iter().enumerate() {
            lines.push(SpectrumLine {
                lambda,
                k,
                n: (i + 1) as u32,
                multiplicity: if k == 0 { 1 } else { 2 },
            });
        }
    }
    lines.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    // keep exactly enough lines to cover `count` with multiplicity
    let mut acc = 0;
    let mut keep = 0;
    for l in &lines {
        keep += 1;
        acc += l.multiplicity as usize;
        if acc >= count {
            break;
        }
    }
    lines.truncate(keep);
    Ok(lines)
}

/// Flattens labelled lines into an eigenvalue sequence with multiplicity.
pub fn expand_spectrum(lines: &[SpectrumLine], count: usize) -> Vec<f64> {
    let mut flat: Vec<f64> = lines
        .iter()
        .flat_map(|l| std::iter::repeat(l.lambda).take(l.multiplicity as usize))
        .collect();
    flat.sort_by(f64::total_cmp);
    flat.truncate(count);
    flat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn hinged_hinged_reproduces_closed_form() {
        for &k in &[0u32, 1, 2] {
            let mu = std::f64::consts::TAU * k as f64;
            let p = ModeProblem {
                mu,
                top: TopBc::Hinged,
            };
            let evs = mode_eigenvalues(&p, 3).unwrap();
            for (n, ev) in evs.iter().enumerate() {
                let exact = ((n as f64 + 1.0) * PI).powi(2) + mu * mu;
                let exact = exact * exact + 1.0;
                assert!(
                    (ev - exact).abs() <= 1e-12 * exact,
                    "k={k} n={} got {ev} want {exact}",
                    n + 1
                );
            }
        }
    }

    #[test]
    fn clamped_pinned_matches_tan_tanh_root() {
        let p = ModeProblem {
            mu: 0.0,
            top: TopBc::Clamped,
        };
        let evs = mode_eigenvalues(&p, 2).unwrap();
        // first positive root of tan ω = tanh ω by bisection
        let f = |w: f64| w.tan() - w.tanh();
        let (mut lo, mut hi) = (PI + 0.5, 1.5 * PI - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let omega1 = 0.5 * (lo + hi);
        assert_abs_diff_eq!(omega1, 3.926_602_312_047_919, epsilon = 1e-9);
        let exact = omega1.powi(4) + 1.0;
        assert!((evs[0] - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn robin_limits_recover_hinged_and_clamped() {
        let hinged = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Hinged,
            },
            3,
        )
        .unwrap();
        let clamped = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Clamped,
            },
            3,
        )
        .unwrap();
        let tiny = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Robin {
                    gamma: 1e-9,
                    form_sign: 1.0,
                },
            },
            3,
        )
        .unwrap();
        for (a, b) in tiny.iter().zip(&hinged) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0) + 1e-6);
        }
        let huge = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Robin {
                    gamma: 1e6,
                    form_sign: 1.0,
                },
            },
            3,
        )
        .unwrap();
        for (a, b) in huge.iter().zip(&clamped) {
            assert!((a - b).abs() < 1e-3 * b);
        }
    }

    #[test]
    fn robin_interlacing_and_monotonicity() {
        let hinged = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Hinged,
            },
            3,
        )
        .unwrap();
        let clamped = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Clamped,
            },
            3,
        )
        .unwrap();
        let mut prev = hinged.clone();
        for gamma in [0.5, 2.0, 8.0, 30.0] {
            let robin = mode_eigenvalues(
                &ModeProblem {
                    mu: 0.0,
                    top: TopBc::Robin {
                        gamma,
                        form_sign: 1.0,
                    },
                },
                3,
            )
            .unwrap();
            for i in 0..3 {
                assert!(hinged[i] <= robin[i] + 1e-9);
                assert!(robin[i] <= clamped[i] + 1e-9);
                assert!(robin[i] >= prev[i] - 1e-9, "monotone in gamma");
            }
            prev = robin;
        }
        // negative form sign pulls every eigenvalue below the hinged one
        let minus = mode_eigenvalues(
            &ModeProblem {
                mu: 0.0,
                top: TopBc::Robin {
                    gamma: 0.5,
                    form_sign: -1.0,
                },
            },
            3,
        )
        .unwrap();
        for i in 0..3 {
            assert!(minus[i] <= hinged[i] + 1e-9);
        }
    }

    #[test]
    fn robin_minus_large_gamma_dips_below_one() {
        // with γ = 7.44 the negative-sign form is indefinite: the scan must
        // pick up an eigenvalue far below λ = 1
        let p = ModeProblem {
            mu: 0.0,
            top: TopBc::Robin {
                gamma: 7.44,
                form_sign: -1.0,
            },
        };
        let evs = mode_eigenvalues(&p, 1).unwrap();
        assert!(evs[0] < 1.0, "got {}", evs[0]);
    }

    #[test]
    fn limit_spectrum_ordering_and_multiplicity() {
        let lines = limit_spectrum(&BcKind::Intermediate, 1.0, 4).unwrap();
        let flat = expand_spectrum(&lines, 4);
        let pi4 = PI.powi(4);
        assert!((flat[0] - (pi4 + 1.0)).abs() < 1e-9 * pi4);
        assert!((flat[1] - (16.0 * pi4 + 1.0)).abs() < 1e-8 * pi4);
        assert!((flat[2] - (25.0 * pi4 + 1.0)).abs() < 1e-8 * pi4);
        assert!((flat[3] - (25.0 * pi4 + 1.0)).abs() < 1e-8 * pi4);
        // the doubled line is labelled k = 1, n = 1
        let l = lines.iter().find(|l| l.k == 1).unwrap();
        assert_eq!((l.n, l.multiplicity), (1, 2));

        let clamped = limit_spectrum(&BcKind::DirichletOnW, 1.0, 1).unwrap();
        assert_abs_diff_eq!(clamped[0].lambda, 238.721_067_531, epsilon = 1e-4);

        let zero_gamma = limit_spectrum(
            &BcKind::StrangeTerm {
                gamma: 0.0,
                sign: -1.0,
            },
            1.0,
            4,
        )
        .unwrap();
        for (a, b) in zero_gamma.iter().zip(&lines) {
            assert!((a.lambda - b.lambda).abs() < 1e-9 * b.lambda);
        }
    }

    #[test]
    fn mode_shape_satisfies_boundary_conditions() {
        let p = ModeProblem {
            mu: 0.0,
            top: TopBc::Hinged,
        };
        let ev = mode_eigenvalues(&p, 1).unwrap()[0];
        let shape = mode_shape(&p, ev, 64);
        assert!(shape[0].1.abs() < 1e-6);
        assert!(shape[64].1.abs() < 1e-6);
        // first hinged mode is sin(π(t+1)) up to sign; peak at the middle
        let mid = shape[32].1.abs();
        assert!((mid - 1.0).abs() < 1e-6);
    }
}
