//! wasm-bindgen surface for the browser demo (`www/index.html`).
//!
//! Three interactive operations, all pure and fast enough for keystroke-rate
//! recomputation: the strip cell problem with its strange term γ, the
//! oscillation-regime classifier, and 1D limit spectra with mode shapes.
//! Every function returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never traps.

use plate_spectra::cell::{gamma_flux, solve_cell};
use plate_spectra::fem::BcKind;
use plate_spectra::geometry::classify_regime;
use plate_spectra::oracle1d::{limit_spectrum, mode_eigenvalues, mode_shape, ModeProblem, TopBc};
use plate_spectra::profile::Profile;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn render<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| format!(r#"{{"error":"{e}"}}"#))
}

fn render_error(msg: impl std::fmt::Display) -> String {
    render(&serde_json::json!({ "error": msg.to_string() }))
}

#[derive(Serialize)]
struct CellExplorerOut {
    gamma: f64,
    gamma_flux: f64,
    /// Sampled profile curve `(y, b(y))`.
    profile: Vec<(f64, f64)>,
    /// Cell solution `V` sampled on `Y × (depth, 0)`, row-major in `y_N`.
    heatmap: Heatmap,
    modes: Vec<ModeOut>,
}

#[derive(Serialize)]
struct Heatmap {
    n_y_bar: usize,
    n_y_n: usize,
    depth: f64,
    values: Vec<f64>,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct ModeOut {
    k: u32,
    mu: f64,
    amplitude: f64,
    /// Mode energy share of γ.
    gamma_share: f64,
}

/// Solves the strip cell problem for the profile with the given cosine and
/// sine amplitudes and reports γ by both formulas plus plot data.
#[wasm_bindgen]
pub fn cell_explorer(cos: Vec<f64>, sin: Vec<f64>) -> String {
    let profile = match Profile::new(cos, sin) {
        Ok(p) => p,
        Err(e) => return render_error(e),
    };
    let sol = solve_cell(&profile);
    let n_y_bar = 96usize;
    let n_y_n = 64usize;
    let depth = -1.5f64;
    let mut values = Vec::with_capacity(n_y_bar * n_y_n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n_y_n {
        let yn = depth * (1.0 - j as f64 / (n_y_n - 1) as f64);
        for i in 0..n_y_bar {
            let yb = i as f64 / (n_y_bar - 1) as f64;
            let v = sol.eval(yb, yn);
            lo = lo.min(v);
            hi = hi.max(v);
            values.push(v);
        }
    }
    let total = sol.gamma.max(1e-300);
    let modes = sol
        .modes
        .iter()
        .map(|m| {
            let single = plate_spectra::cell::CellSolution {
                mean: 0.0,
                mean_slope: 0.0,
                modes: vec![m.clone()],
                gamma: 0.0,
            };
            ModeOut {
                k: m.k,
                mu: m.mu,
                amplitude: 2.0 * m.coeff_a.norm(),
                gamma_share: plate_spectra::cell::gamma_energy(&single) / total,
            }
        })
        .collect();
    render(&CellExplorerOut {
        gamma: sol.gamma,
        gamma_flux: gamma_flux(&sol),
        profile: (0..=256)
            .map(|i| {
                let y = i as f64 / 256.0;
                (y, profile.eval(y, 0).unwrap_or(0.0))
            })
            .collect(),
        heatmap: Heatmap {
            n_y_bar,
            n_y_n,
            depth,
            values,
            min: lo,
            max: hi,
        },
        modes,
    })
}

#[derive(Serialize)]
struct RegimeOut {
    regime: String,
    window: Option<(f64, f64)>,
    limit: String,
}

/// Classifies the oscillation exponent α and describes the limit problem.
#[wasm_bindgen]
pub fn regime_report(alpha: f64) -> String {
    match classify_regime(alpha) {
        Ok(r) => render(&RegimeOut {
            regime: format!("{:?}", r.regime),
            window: r.theta_window,
            limit: match r.regime {
                plate_spectra::geometry::Regime::Supercritical => {
                    "hinged plate on the flat strip".into()
                }
                plate_spectra::geometry::Regime::Critical => {
                    "hinged plate with the strange boundary coefficient γ".into()
                }
                plate_spectra::geometry::Regime::Subcritical => {
                    "plate clamped along the oscillating side".into()
                }
            },
        }),
        Err(e) => render_error(e),
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    lines: Vec<LineOut>,
    shapes: Vec<ShapeOut>,
}

#[derive(Serialize)]
struct LineOut {
    lambda: f64,
    k: u32,
    n: u32,
    multiplicity: u32,
}

#[derive(Serialize)]
struct ShapeOut {
    lambda: f64,
    k: u32,
    points: Vec<(f64, f64)>,
}

/// Limit spectrum for `kind ∈ {hinged, clamped, robin}`; for `robin`,
/// `gamma` and `form_sign` select the strange-term boundary condition. Also
/// returns the vertical mode shapes of the lowest lines.
#[wasm_bindgen]
pub fn limit_spectrum_json(
    kind: String,
    gamma: f64,
    form_sign: f64,
    length: f64,
    count: usize,
) -> String {
    let bc = match kind.as_str() {
        "hinged" => BcKind::Intermediate,
        "clamped" => BcKind::DirichletOnW,
        "robin" => BcKind::StrangeTerm {
            gamma,
            sign: form_sign,
        },
        other => return render_error(format!("unknown boundary kind '{other}'")),
    };
    let lines = match limit_spectrum(&bc, length, count) {
        Ok(l) => l,
        Err(e) => return render_error(e),
    };
    let mut shapes = Vec::new();
    for line in lines.iter().take(4) {
        let p = ModeProblem {
            mu: std::f64::consts::TAU * line.k as f64 / length,
            top: match bc {
                BcKind::Intermediate => TopBc::Hinged,
                BcKind::DirichletOnW => TopBc::Clamped,
                BcKind::StrangeTerm { gamma, sign } => TopBc::Robin {
                    gamma,
                    form_sign: sign,
                },
            },
        };
        shapes.push(ShapeOut {
            lambda: line.lambda,
            k: line.k,
            points: mode_shape(&p, line.lambda, 128),
        });
    }
    render(&SpectrumOut {
        lines: lines
            .iter()
            .map(|l| LineOut {
                lambda: l.lambda,
                k: l.k,
                n: l.n,
                multiplicity: l.multiplicity,
            })
            .collect(),
        shapes,
    })
}

/// First eigenvalues as a function of γ (for the interpolation plot from the
/// hinged to the clamped spectrum). Returns `{gammas: [...], branches: [[...]]}`.
#[wasm_bindgen]
pub fn robin_continuation(form_sign: f64, gamma_max: f64, steps: usize, branches: usize) -> String {
    if !(gamma_max > 0.0) || steps < 2 || branches == 0 || branches > 5 || steps > 400 {
        return render_error("bad continuation parameters");
    }
    let mut gammas = Vec::new();
    let mut values = vec![Vec::new(); branches];
    for i in 0..steps {
        // log-spaced so both the hinged and clamped ends are visible
        let t = i as f64 / (steps - 1) as f64;
        let gamma = gamma_max.powf(t) - 1.0 + t * 1e-6;
        let p = ModeProblem {
            mu: 0.0,
            top: TopBc::Robin { gamma, form_sign },
        };
        match mode_eigenvalues(&p, branches) {
            Ok(evs) => {
                gammas.push(gamma);
                for (b, v) in values.iter_mut().zip(evs) {
                    b.push(v);
                }
            }
            Err(e) => return render_error(e),
        }
    }
    render(&serde_json::json!({ "gammas": gammas, "branches": values }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_explorer_reports_reference_gamma() {
        let out = cell_explorer(vec![0.2, 0.2], vec![]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let gamma = v["gamma"].as_f64().unwrap();
        assert!((gamma - 0.24 * std::f64::consts::PI.powi(3)).abs() < 1e-10);
        assert_eq!(v["modes"].as_array().unwrap().len(), 1);
        assert!(v["heatmap"]["values"].as_array().unwrap().len() == 96 * 64);
    }

    #[test]
    fn cell_explorer_rejects_bad_profiles() {
        let out = cell_explorer(vec![0.9], vec![]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["error"].as_str().is_some());
    }

    #[test]
    fn regime_report_covers_the_trichotomy() {
        for (alpha, expect) in [(2.0, "Supercritical"), (1.5, "Critical"), (1.2, "Subcritical")] {
            let v: serde_json::Value = serde_json::from_str(&regime_report(alpha)).unwrap();
            assert_eq!(v["regime"].as_str().unwrap(), expect);
        }
        let v: serde_json::Value = serde_json::from_str(&regime_report(2.0)).unwrap();
        let w = v["window"].as_array().unwrap();
        assert!((w[0].as_f64().unwrap() - 0.0).abs() < 1e-12);
        assert!((w[1].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_json_matches_closed_form() {
        let v: serde_json::Value =
            serde_json::from_str(&limit_spectrum_json("hinged".into(), 0.0, 1.0, 1.0, 3)).unwrap();
        let first = v["lines"][0]["lambda"].as_f64().unwrap();
        assert!((first - (std::f64::consts::PI.powi(4) + 1.0)).abs() < 1e-6);
        assert!(!v["shapes"].as_array().unwrap().is_empty());
    }

    #[test]
    fn continuation_is_monotone_for_positive_sign() {
        let v: serde_json::Value =
            serde_json::from_str(&robin_continuation(1.0, 100.0, 16, 2)).unwrap();
        let b0: Vec<f64> = v["branches"][0]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert!(b0.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}
