//! Domain family and the boundary-flattening diffeomorphism.
//!
//! The reference domain is the laterally periodic strip
//! `Ω = (ℝ/LZ) × (−1, 0)`; the perturbed domain `Ω_ε` replaces the top edge
//! by the graph `x_N = g_ε(x̄) = ε^α b(x̄/ε)`. The map
//! `Φ_ε(x̄, x_N) = (x̄, x_N − h_ε(x̄, x_N))` carries `Ω̄_ε` onto `Ω̄`, is the
//! identity below `x_N = −ε`, and matches C² across that line because the
//! cubic factor in `h_ε` vanishes to second order there.

use crate::error::{Error, Result};
use crate::profile::Profile;
use serde::{Deserialize, Serialize};

/// Inverse-map residual target; far below any quadrature error in play.
const INVERT_TOL: f64 = 1e-13;

/// Geometry of one perturbed-domain instance.
///
/// `length` is the lateral period `L` of the strip (the experiment drivers
/// keep `L/ε` integral so that whole oscillation cells tile the strip).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpecRepr", into = "DomainSpecRepr")]
pub struct DomainSpec {
    length: f64,
    eps: f64,
    alpha: f64,
    profile: Profile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DomainSpecRepr {
    #[serde(rename = "L")]
    length: f64,
    eps: f64,
    alpha: f64,
    profile: Profile,
}

impl TryFrom<DomainSpecRepr> for DomainSpec {
    type Error = Error;
    fn try_from(r: DomainSpecRepr) -> Result<Self> {
        DomainSpec::new(r.length, r.eps, r.alpha, r.profile)
    }
}

impl From<DomainSpec> for DomainSpecRepr {
    fn from(d: DomainSpec) -> Self {
        DomainSpecRepr {
            length: d.length,
            eps: d.eps,
            alpha: d.alpha,
            profile: d.profile,
        }
    }
}

impl DomainSpec {
    /// Validates `L > 0`, `ε ∈ (0, 1)`, `α ≥ 1` and the layer ordering
    /// `max g_ε < ε` required for the diffeomorphism to be well defined.
    ///
    /// The profile invariant `b < 1/2` makes the ordering automatic for
    /// `α ≥ 1`, but it is checked concretely rather than asymptotically.
    pub fn new(length: f64, eps: f64, alpha: f64, profile: Profile) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid("domain length must be positive"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid("eps must lie in (0, 1)"));
        }
        if !(alpha >= 1.0) {
            return Err(Error::invalid("alpha must be at least 1"));
        }
        let spec = DomainSpec {
            length,
            eps,
            alpha,
            profile,
        };
        let gmax = spec.max_oscillation();
        if !(gmax < eps) {
            return Err(Error::invalid(format!(
                "max g_eps = {gmax:.3e} must stay below eps = {eps:.3e}"
            )));
        }
        Ok(spec)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Sampled maximum of `g_ε`. The profile certificate `b < 1/2` already
    /// forces `g_ε < ε/2` for `α ≥ 1`; this keeps the gate concrete.
    fn max_oscillation(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..512 {
            m = m.max(self.profile.eval(i as f64 / 512.0, 0).unwrap());
        }
        self.eps.powf(self.alpha) * m
    }

    /// Boundary graph `g_ε(x̄) = ε^α b(x̄/ε)` and its first two derivatives.
    pub fn g_eps(&self, x_bar: f64, deriv: u32) -> Result<f64> {
        let scale = self.eps.powf(self.alpha - deriv as f64);
        Ok(scale * self.profile.eval(x_bar / self.eps, deriv)?)
    }

    fn check_in_domain(&self, x_bar: f64, x_n: f64) -> Result<()> {
        let top = self.g_eps(x_bar, 0)?;
        if x_n < -1.0 - 1e-12 || x_n > top + 1e-12 {
            return Err(Error::out_of_domain(format!(
                "x_N = {x_n:.6} outside [-1, g_eps(x̄) = {top:.6}]"
            )));
        }
        Ok(())
    }

    /// Partial derivative `∂^{dx}_{x̄} ∂^{dn}_{x_N} h_ε` with `dx + dn ≤ 2`.
    ///
    /// `h_ε = 0` for `x_N ≤ −ε` and
    /// `h_ε = g_ε · ((x_N + ε)/(g_ε + ε))³` above; the function and both
    /// first and second partials are continuous across `x_N = −ε`.
    pub fn h_eps(&self, x_bar: f64, x_n: f64, dx: u32, dn: u32) -> Result<f64> {
        if dx + dn > 2 {
            return Err(Error::invalid("h_eps derivatives limited to order 2"));
        }
        self.check_in_domain(x_bar, x_n)?;
        Ok(self.h_eps_unchecked(x_bar, x_n, dx, dn))
    }

    /// Same as [`DomainSpec::h_eps`] without the domain check; assembly
    /// kernels call this with points already known to be admissible.
    pub(crate) fn h_eps_unchecked(&self, x_bar: f64, x_n: f64, dx: u32, dn: u32) -> f64 {
        if x_n <= -self.eps {
            return 0.0;
        }
        let f = self.g_eps(x_bar, 0).unwrap();
        let f1 = self.g_eps(x_bar, 1).unwrap();
        let f2 = self.g_eps(x_bar, 2).unwrap();
        let s = x_n + self.eps;
        let rho = f + self.eps;
        let u = s / rho;
        match (dx, dn) {
            (0, 0) => f * u * u * u,
            (0, 1) => 3.0 * f * s * s / rho.powi(3),
            (0, 2) => 6.0 * f * s / rho.powi(3),
            // ρ − 3f = ε − 2f and 2f − ρ = f − ε keep the expressions short
            (1, 0) => f1 * s.powi(3) * (self.eps - 2.0 * f) / rho.powi(4),
            (1, 1) => 3.0 * f1 * s * s * (self.eps - 2.0 * f) / rho.powi(4),
            (2, 0) => {
                f2 * s.powi(3) * (self.eps - 2.0 * f) / rho.powi(4)
                    + 6.0 * f1 * f1 * s.powi(3) * (f - self.eps) / rho.powi(5)
            }
            _ => unreachable!("order checked above"),
        }
    }

    /// `Φ_ε(x̄, x_N) = (x̄, x_N − h_ε(x̄, x_N))`, mapping `Ω̄_ε` onto `Ω̄`.
    pub fn phi_eps(&self, x_bar: f64, x_n: f64) -> Result<(f64, f64)> {
        Ok((x_bar, x_n - self.h_eps(x_bar, x_n, 0, 0)?))
    }

    /// `det DΦ_ε = 1 − ∂_{x_N} h_ε`, always in `(0, 1]` for valid specs.
    pub fn det_dphi(&self, x_bar: f64, x_n: f64) -> Result<f64> {
        Ok(1.0 - self.h_eps(x_bar, x_n, 0, 1)?)
    }

    /// Solves `x_N − h_ε(x̄, x_N) = s` for the unique `x_N`, by Newton
    /// safeguarded with bisection on `[−ε, g_ε(x̄)]`. Identity for `s ≤ −ε`.
    pub fn invert_phi(&self, x_bar: f64, s: f64) -> Result<f64> {
        if !(-1.0 - 1e-12..=1e-12).contains(&s) {
            return Err(Error::out_of_domain(format!(
                "reference coordinate s = {s} outside [-1, 0]"
            )));
        }
        if s <= -self.eps {
            return Ok(s);
        }
        let mut lo = -self.eps;
        let mut hi = self.g_eps(x_bar, 0)?;
        let mut x = s.clamp(lo, hi);
        for _ in 0..100 {
            let res = x - self.h_eps_unchecked(x_bar, x, 0, 0) - s;
            if res.abs() <= INVERT_TOL {
                return Ok(x);
            }
            if res > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = 1.0 - self.h_eps_unchecked(x_bar, x, 0, 1);
            let newton = x - res / slope;
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::numerical(format!(
            "invert_phi stalled at x̄ = {x_bar}, s = {s}"
        )))
    }
}

/// The three asymptotic regimes of the oscillation exponent `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `α > 3/2`: the limit keeps the hinged boundary condition.
    Supercritical,
    /// `α = 3/2`: the limit carries the strange boundary coefficient `γ`.
    Critical,
    /// `α < 3/2`: the limit is clamped on the oscillating side.
    Subcritical,
}

/// Classification of `α` together with the feasibility window of exponents
/// `θ` for which `κ_ε = ε^θ` satisfies the spectral-stability conditions of
/// the supercritical regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Open interval `(4 − 2α, 2α/3) ∩ (0, α)`, empty unless `α > 3/2`.
    pub theta_window: Option<(f64, f64)>,
}

/// Classifies the oscillation exponent and derives the `κ_ε = ε^θ` window.
///
/// For `g_ε = ε^α b(·/ε)`, `‖D^β g_ε‖_∞ = ε^{α−|β|} ‖D^β b‖_∞`, so the
/// vanishing conditions on `‖D^β g_ε‖ / κ_ε^{2−|β|−1/2}` for `|β| ≤ 2`
/// become the linear inequalities `α − |β| > θ(3/2 − |β|)`; together with
/// `0 < θ < α` the feasible set is `(4 − 2α, 2α/3) ∩ (0, α)` (the `|β| = 1`
/// constraint `θ < 2α − 2` is inactive whenever the set is nonempty).
pub fn classify_regime(alpha: f64) -> Result<RegimeReport> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let regime = if alpha > 1.5 {
        Regime::Supercritical
    } else if alpha == 1.5 {
        Regime::Critical
    } else {
        Regime::Subcritical
    };
    let lo = (4.0 - 2.0 * alpha).max(0.0);
    let hi = (2.0 * alpha / 3.0).min(alpha);
    let theta_window = if lo < hi { Some((lo, hi)) } else { None };
    Ok(RegimeReport {
        regime,
        theta_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec() -> DomainSpec {
        DomainSpec::new(1.0, 0.125, 1.5, Profile::cosine(0.2).unwrap()).unwrap()
    }

    #[test]
    fn constructor_gates() {
        let p = Profile::cosine(0.2).unwrap();
        assert!(DomainSpec::new(0.0, 0.1, 2.0, p.clone()).is_err());
        assert!(DomainSpec::new(1.0, 0.0, 2.0, p.clone()).is_err());
        assert!(DomainSpec::new(1.0, 0.1, 0.9, p.clone()).is_err());
        assert!(DomainSpec::new(1.0, 0.1, 1.0, p).is_ok());
    }

    #[test]
    fn h_vanishes_below_layer() {
        let s = spec();
        for (dx, dn) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            assert_eq!(s.h_eps(0.3, -0.5, dx, dn).unwrap(), 0.0);
        }
    }

    #[test]
    fn h_matches_g_on_the_boundary() {
        let s = spec();
        for i in 0..17 {
            let x = i as f64 / 17.0;
            let g = s.g_eps(x, 0).unwrap();
            assert_abs_diff_eq!(s.h_eps(x, g, 0, 0).unwrap(), g, epsilon = 1e-15);
        }
    }

    #[test]
    fn h_rejects_out_of_domain() {
        let s = spec();
        assert!(s.h_eps(0.1, 0.2, 0, 0).is_err());
        assert!(s.h_eps(0.1, -1.2, 0, 0).is_err());
    }

    /// All six partials against central finite differences, including points
    /// near the C² matching line x_N = −ε.
    #[test]
    fn h_derivatives_match_finite_differences() {
        let s = spec();
        let h = 1e-5;
        let pts = [
            (0.07, -0.01),
            (0.33, -0.06),
            (0.5, -0.124),
            (0.81, -0.02),
            (0.2, -0.124999),
        ];
        for &(x, y) in &pts {
            let f = |x: f64, y: f64| s.h_eps_unchecked(x, y, 0, 0);
            let fd_x = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let fd_n = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            let fd_xx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let fd_nn = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
            let fd_xn = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
                / (4.0 * h * h);
            // second differences straddling the matching line only converge
            // at O(h); the tolerances below cover both cases
            assert_abs_diff_eq!(s.h_eps(x, y, 1, 0).unwrap(), fd_x, epsilon = 1e-6);
            assert_abs_diff_eq!(s.h_eps(x, y, 0, 1).unwrap(), fd_n, epsilon = 1e-6);
            assert_abs_diff_eq!(s.h_eps(x, y, 2, 0).unwrap(), fd_xx, epsilon = 2e-4);
            assert_abs_diff_eq!(s.h_eps(x, y, 0, 2).unwrap(), fd_nn, epsilon = 2e-4);
            assert_abs_diff_eq!(s.h_eps(x, y, 1, 1).unwrap(), fd_xn, epsilon = 2e-4);
        }
    }

    #[test]
    fn phi_identity_below_layer_and_boundary_to_boundary() {
        let s = spec();
        assert_eq!(s.phi_eps(0.4, -1.0).unwrap(), (0.4, -1.0));
        assert_eq!(s.phi_eps(0.4, -0.7).unwrap(), (0.4, -0.7));
        let g = s.g_eps(0.13, 0).unwrap();
        let (_, r) = s.phi_eps(0.13, g).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn phi_monotone_in_vertical_direction() {
        let s = spec();
        for i in 0..9 {
            let x = 0.11 * i as f64;
            let mut prev = f64::NEG_INFINITY;
            let top = s.g_eps(x, 0).unwrap();
            for j in 0..=300 {
                let xn = -1.0 + (top + 1.0) * j as f64 / 300.0;
                let (_, r) = s.phi_eps(x, xn).unwrap();
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn invert_phi_identity_and_boundary() {
        let s = spec();
        assert_eq!(s.invert_phi(0.3, -0.7).unwrap(), -0.7);
        let x = s.invert_phi(0.3, 0.0).unwrap();
        assert_abs_diff_eq!(x, s.g_eps(0.3, 0).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn invert_phi_round_trip() {
        let s = spec();
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for _ in 0..200 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 11) as f64 / (1u64 << 53) as f64;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = -((state >> 11) as f64 / (1u64 << 53) as f64);
            let xn = s.invert_phi(x, r).unwrap();
            let (_, back) = s.phi_eps(x, xn).unwrap();
            assert_abs_diff_eq!(back, r, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_bounded_for_moderate_eps() {
        // alpha = 1.5, eps ≤ 0.1: det DΦ stays within [1/2, 2]
        let s = DomainSpec::new(1.0, 0.1, 1.5, Profile::cosine(0.2).unwrap()).unwrap();
        for i in 0..200 {
            let x = i as f64 / 200.0;
            let top = s.g_eps(x, 0).unwrap();
            for j in 0..=100 {
                let xn = -1.0 + (top + 1.0) * j as f64 / 100.0;
                let d = s.det_dphi(x, xn).unwrap();
                assert!((0.5..=2.0).contains(&d), "det = {d} at ({x}, {xn})");
            }
        }
    }

    #[test]
    fn regime_classification_and_window() {
        let r = classify_regime(2.0).unwrap();
        assert_eq!(r.regime, Regime::Supercritical);
        let (lo, hi) = r.theta_window.unwrap();
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 4.0 / 3.0, epsilon = 1e-15);

        let r = classify_regime(1.5).unwrap();
        assert_eq!(r.regime, Regime::Critical);
        assert!(r.theta_window.is_none());

        let r = classify_regime(1.2).unwrap();
        assert_eq!(r.regime, Regime::Subcritical);
        assert!(r.theta_window.is_none());

        // window endpoints are exactly 4 − 2α and 2α/3 when interior
        let r = classify_regime(1.8).unwrap();
        let (lo, hi) = r.theta_window.unwrap();
        assert_eq!(lo, 4.0 - 2.0 * 1.8);
        assert_eq!(hi, 2.0 * 1.8 / 3.0);
    }
}
