//! Periodic oscillation profile `b` as a real trigonometric polynomial.
//!
//! Restricting profiles to trigonometric polynomials makes the Fourier
//! coefficients exact and reduces the strip cell problem to finitely many
//! modes. Constructors reject any profile leaving `[0, 1/2)`: clamping would
//! silently change the strange term, so violating profiles are an error.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// 1-periodic profile `b(y) = Σ_k a_k cos(2πky) + Σ_k s_k sin(2πky)`.
///
/// `cosine_coeffs[k]` is `a_k` for `k = 0..=K`; `sine_coeffs[k-1]` is `s_k`
/// for `k = 1..=K`. The represented function always satisfies
/// `b(y) ∈ [0, 1/2)` and `b(y + 1) = b(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct Profile {
    cosine_coeffs: Vec<f64>,
    sine_coeffs: Vec<f64>,
}

/// Wire format: `{"cos": [a_0, ..., a_K], "sin": [s_1, ..., s_K]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileRepr {
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TryFrom<ProfileRepr> for Profile {
    type Error = Error;
    fn try_from(r: ProfileRepr) -> Result<Self> {
        Profile::new(r.cos, r.sin)
    }
}

impl From<Profile> for ProfileRepr {
    fn from(p: Profile) -> Self {
        ProfileRepr {
            cos: p.cosine_coeffs,
            sin: p.sine_coeffs,
        }
    }
}

const RANGE_SAMPLES: usize = 8192;

impl Profile {
    /// Builds a profile from cosine amplitudes `a_0..a_K` and sine amplitudes
    /// `s_1..s_K`, verifying `0 ≤ b < 1/2` on the whole period.
    ///
    /// The range check samples `b` densely and tightens the sampled extrema
    /// with a Bernstein-type derivative bound `‖b'‖_∞ ≤ 2π Σ k(|a_k|+|s_k|)`,
    /// so acceptance is a certificate, not a heuristic.
    pub fn new(cosine_coeffs: Vec<f64>, sine_coeffs: Vec<f64>) -> Result<Self> {
        if cosine_coeffs.is_empty() {
            return Err(Error::invalid("profile needs at least the constant term"));
        }
        if sine_coeffs.len() + 1 > cosine_coeffs.len() + 16 {
            // no structural reason to forbid it, but it is almost surely a
            // swapped-argument bug; keep the degrees comparable
            return Err(Error::invalid(
                "sine coefficient list much longer than cosine list",
            ));
        }
        let p = Profile {
            cosine_coeffs,
            sine_coeffs,
        };
        // per-sample Taylor certificate: between samples,
        // b ≥ b(yᵢ) − |b'(yᵢ)| h/2 − ‖b''‖ h²/8. Admissible profiles may
        // touch 0 exactly (b' vanishes there too), so the lower gate keeps a
        // tiny tolerance for the residual quadratic slack.
        let h = 1.0 / RANGE_SAMPLES as f64;
        let d2 = p.second_derivative_bound();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..RANGE_SAMPLES {
            let y = i as f64 * h;
            let v = p.eval(y, 0)?;
            let slack = p.eval(y, 1)?.abs() * h / 2.0 + d2 * h * h / 8.0;
            lo = lo.min(v - slack);
            hi = hi.max(v + slack);
        }
        if lo < -1e-7 {
            return Err(Error::invalid(format!(
                "profile may reach {lo:.3e} < 0"
            )));
        }
        if hi >= 0.5 {
            return Err(Error::invalid(format!(
                "profile may reach {hi:.3e} ≥ 1/2"
            )));
        }
        Ok(p)
    }

    /// The zero profile (flat boundary).
    pub fn flat() -> Self {
        Profile {
            cosine_coeffs: vec![0.0],
            sine_coeffs: vec![],
        }
    }

    /// `amp · (1 + cos 2πy)`, the reference profile used throughout the
    /// experiments. Requires `amp ∈ [0, 1/4)`.
    pub fn cosine(amp: f64) -> Result<Self> {
        Profile::new(vec![amp, amp], vec![])
    }

    pub fn cosine_coeffs(&self) -> &[f64] {
        &self.cosine_coeffs
    }

    pub fn sine_coeffs(&self) -> &[f64] {
        &self.sine_coeffs
    }

    /// Number of the highest retained harmonic.
    pub fn max_mode(&self) -> usize {
        (self.cosine_coeffs.len() - 1).max(self.sine_coeffs.len())
    }

    /// `‖b''‖_∞ ≤ (2π)² Σ_k k² (|a_k| + |s_k|)`.
    fn second_derivative_bound(&self) -> f64 {
        let mut s = 0.0;
        for (k, a) in self.cosine_coeffs.iter().enumerate().skip(1) {
            s += (k * k) as f64 * a.abs();
        }
        for (km1, b) in self.sine_coeffs.iter().enumerate() {
            let k = km1 + 1;
            s += (k * k) as f64 * b.abs();
        }
        TAU * TAU * s
    }

    /// Value of `d^deriv b / dy^deriv` at `y`, exact for the trigonometric
    /// representation. `deriv` must be 0, 1 or 2.
    pub fn eval(&self, y: f64, deriv: u32) -> Result<f64> {
        if deriv > 2 {
            return Err(Error::invalid(format!(
                "derivative order {deriv} not in 0..=2"
            )));
        }
        let mut acc = 0.0;
        for (k, &a) in self.cosine_coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let w = TAU * k as f64;
            let phase = w * y;
            acc += a * match deriv {
                0 => phase.cos(),
                1 => -w * phase.sin(),
                _ => -w * w * phase.cos(),
            };
        }
        for (km1, &s) in self.sine_coeffs.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let w = TAU * (km1 + 1) as f64;
            let phase = w * y;
            acc += s * match deriv {
                0 => phase.sin(),
                1 => w * phase.cos(),
                _ => -w * w * phase.sin(),
            };
        }
        Ok(acc)
    }

    /// Exact Fourier coefficient `b̂_k = ∫_0^1 b(y) e^{-2πiky} dy`.
    ///
    /// For the trigonometric representation: `b̂_0 = a_0` and
    /// `b̂_{±k} = (a_k ∓ i s_k)/2`.
    pub fn fourier_coefficient(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(self.cosine_coeffs[0], 0.0);
        }
        let ka = k.unsigned_abs() as usize;
        let a = self.cosine_coeffs.get(ka).copied().unwrap_or(0.0);
        let s = self.sine_coeffs.get(ka - 1).copied().unwrap_or(0.0);
        if k > 0 {
            Complex64::new(a / 2.0, -s / 2.0)
        } else {
            Complex64::new(a / 2.0, s / 2.0)
        }
    }

    /// All nonzero-band Fourier coefficients, `|k| ≤ K`.
    pub fn fourier(&self) -> BTreeMap<i64, Complex64> {
        let kmax = self.max_mode() as i64;
        (-kmax..=kmax)
            .map(|k| (k, self.fourier_coefficient(k)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn reference() -> Profile {
        Profile::cosine(0.2).unwrap()
    }

    #[test]
    fn eval_matches_direct_substitution() {
        let p = reference();
        assert_abs_diff_eq!(p.eval(0.0, 0).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(
            p.eval(0.25, 1).unwrap(),
            -0.4 * std::f64::consts::PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn deriv_out_of_range_rejected() {
        assert!(reference().eval(0.3, 3).is_err());
    }

    #[test]
    fn range_check_rejects_out_of_band_profiles() {
        // reaches 0.5 at y = 0
        assert!(Profile::new(vec![0.25, 0.25], vec![]).is_err());
        // dips below zero
        assert!(Profile::new(vec![0.1, 0.2], vec![]).is_err());
        // boundary case: constant exactly at the open upper end
        assert!(Profile::new(vec![0.5], vec![]).is_err());
        assert!(Profile::new(vec![0.499], vec![]).is_ok());
    }

    #[test]
    fn fourier_coefficients_exact() {
        let p = reference();
        assert_eq!(p.fourier_coefficient(0), Complex64::new(0.2, 0.0));
        assert_eq!(p.fourier_coefficient(1), Complex64::new(0.1, 0.0));
        assert_eq!(p.fourier_coefficient(-1), Complex64::new(0.1, 0.0));
        assert_eq!(p.fourier_coefficient(5), Complex64::new(0.0, 0.0));

        let q = Profile::new(vec![0.2], vec![0.1]).unwrap();
        assert_eq!(q.fourier_coefficient(1), Complex64::new(0.0, -0.05));
        assert_eq!(q.fourier_coefficient(-1), Complex64::new(0.0, 0.05));
        assert_eq!(q.fourier_coefficient(0), Complex64::new(0.2, 0.0));

        let c = Profile::new(vec![0.3], vec![]).unwrap();
        let f = c.fourier();
        assert_eq!(f.len(), 1);
        assert_eq!(f[&0], Complex64::new(0.3, 0.0));
    }

    #[test]
    fn serde_round_trip() {
        let p = Profile::new(vec![0.1, 0.05, 0.02], vec![0.03, -0.01]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"cos\""));
        let q: Profile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        // deserialization re-validates
        assert!(serde_json::from_str::<Profile>(r#"{"cos":[0.9],"sin":[]}"#).is_err());
    }

    fn small_profiles() -> impl Strategy<Value = Profile> {
        // constant term keeps b strictly inside (0, 1/2)
        (
            proptest::collection::vec(-0.02f64..0.02, 0..4),
            proptest::collection::vec(-0.02f64..0.02, 0..4),
        )
            .prop_map(|(mut cos, sin)| {
                cos.insert(0, 0.2);
                Profile::new(cos, sin).unwrap()
            })
    }

    proptest! {
        #[test]
        fn periodicity(p in small_profiles(), y in -3.0f64..3.0, d in 0u32..3) {
            let a = p.eval(y, d).unwrap();
            let b = p.eval(y + 1.0, d).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn parseval_against_quadrature(p in small_profiles()) {
            // Σ_k |b̂_k|² = ∫_0^1 b²
            let sum: f64 = p.fourier().values().map(|c| c.norm_sqr()).sum();
            let quad = crate::quadrature::integrate_g5(0.0, 1.0, 64, |y| {
                let v = p.eval(y, 0).unwrap();
                v * v
            });
            prop_assert!((sum - quad).abs() <= 1e-10);
        }

        #[test]
        fn first_derivative_matches_central_difference(p in small_profiles(), y in 0.0f64..1.0) {
            let h = 1e-4;
            let fd = (p.eval(y + h, 0).unwrap() - p.eval(y - h, 0).unwrap()) / (2.0 * h);
            prop_assert!((fd - p.eval(y, 1).unwrap()).abs() < 1e-6);
        }
    }
}
