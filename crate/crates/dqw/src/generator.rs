//! Fourier-space infinitesimal generator and propagator of the two-particle
//! dynamics.
//!
//! Rates absorb ħ: the model is specified by `omega_rate = Ω/ħ` and
//! `d_rate = D = Γ² k_B T / ħ`, both with dimension 1/time. Everything
//! downstream works with the dimensionless combinations `t_Ω = (Ω/ħ) t`,
//! `t_D = 2 D t` and `r_D = 2D / (Ω/ħ)`.

use num_complex::Complex64;

use crate::{DqwError, Result};

/// Physical rates of the model (ħ absorbed). The cutoff frequency of the
/// Ohmic bath is fixed to zero; there is deliberately no knob for it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    /// Hopping rate Ω/ħ ≥ 0.
    pub omega_rate: f64,
    /// Dissipation rate D = Γ² k_B T / ħ ≥ 0.
    pub d_rate: f64,
}

impl ModelParams {
    pub fn new(omega_rate: f64, d_rate: f64) -> Result<Self> {
        if !(omega_rate.is_finite() && omega_rate >= 0.0) {
            return Err(DqwError::domain(format!(
                "omega_rate must be finite and >= 0, got {omega_rate}"
            )));
        }
        if !(d_rate.is_finite() && d_rate >= 0.0) {
            return Err(DqwError::domain(format!(
                "d_rate must be finite and >= 0, got {d_rate}"
            )));
        }
        Ok(Self { omega_rate, d_rate })
    }

    /// Construct from the dimensionless ratio `r_D = 2D/(Ω/ħ)` with the
    /// hopping rate normalized to 1, the convention of every sweep.
    pub fn from_r_d(r_d: f64) -> Result<Self> {
        if !(r_d.is_finite() && r_d >= 0.0) {
            return Err(DqwError::domain(format!("r_D must be >= 0, got {r_d}")));
        }
        Self::new(1.0, r_d / 2.0)
    }

    /// Dimensionless hopping time `t_Ω = (Ω/ħ) t`.
    pub fn t_omega(&self, t: f64) -> f64 {
        self.omega_rate * t
    }

    /// Dimensionless dissipation time `t_D = 2 D t`.
    pub fn t_d(&self, t: f64) -> f64 {
        2.0 * self.d_rate * t
    }

    /// `r_D = 2D/(Ω/ħ)`. `None` in the strong-dissipation mode Ω = 0.
    pub fn r_d(&self) -> Option<f64> {
        (self.omega_rate > 0.0).then(|| 2.0 * self.d_rate / self.omega_rate)
    }
}

/// Quartet of quasi-momenta, each in the Brillouin zone [-π, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumQuad {
    pub k1: f64,
    pub k1p: f64,
    pub k2: f64,
    pub k2p: f64,
}

impl MomentumQuad {
    pub fn new(k1: f64, k1p: f64, k2: f64, k2p: f64) -> Result<Self> {
        for k in [k1, k1p, k2, k2p] {
            if !(k >= -std::f64::consts::PI && k < std::f64::consts::PI) {
                return Err(DqwError::domain(format!(
                    "quasi-momentum {k} outside [-pi, pi)"
                )));
            }
        }
        Ok(Self { k1, k1p, k2, k2p })
    }
}

/// Free-particle eigenenergy over ħ: `E_k/ħ = (Ω/ħ)(1 - cos k) >= 0`.
pub fn dispersion(k: f64, params: &ModelParams) -> f64 {
    params.omega_rate * (1.0 - k.cos())
}

/// Bath-induced coupling kernel `C(k_a, k_b) = cos(k_a - k_b)`.
pub fn coupling(k_a: f64, k_b: f64) -> f64 {
    (k_a - k_b).cos()
}

/// One-particle generator
/// `F⁽¹⁾(k, k') = -i (E_k - E_{k'})/ħ + 2D (cos(k - k') - 1)`.
pub fn one_part_gen(k: f64, kp: f64, params: &ModelParams) -> Complex64 {
    let re = 2.0 * params.d_rate * (coupling(k, kp) - 1.0);
    let im = -(dispersion(k, params) - dispersion(kp, params));
    Complex64::new(re, im)
}

/// Pure-interaction exponent
/// `I = 2D [C(k1,k2') + C(k2,k1') - C(k1,k2) - C(k1',k2')]`.
pub fn interaction_gen(q: &MomentumQuad, params: &ModelParams) -> f64 {
    2.0 * params.d_rate
        * (coupling(q.k1, q.k2p) + coupling(q.k2, q.k1p)
            - coupling(q.k1, q.k2)
            - coupling(q.k1p, q.k2p))
}

/// Full two-particle generator
/// `F = F⁽¹⁾(k1,k1') + F⁽¹⁾(k2,k2') + I(k1,k2,k1',k2')`.
pub fn two_part_gen(q: &MomentumQuad, params: &ModelParams) -> Complex64 {
    one_part_gen(q.k1, q.k1p, params)
        + one_part_gen(q.k2, q.k2p, params)
        + interaction_gen(q, params)
}

/// Propagator `exp(F t)` of a Fourier matrix element.
pub fn propagator_k(q: &MomentumQuad,t: f64, params: &ModelParams) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(DqwError::domain(format!("time must be >= 0, got {t}")));
    }
    Ok((two_part_gen(q, params) * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const OM: ModelParams = ModelParams {
        omega_rate: 1.3,
        d_rate: 0.6,
    };

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(0.0, &OM), 0.0);
        assert!((dispersion(-PI, &OM) - 2.0 * OM.omega_rate).abs() < 1e-15);
        let half = dispersion(PI / 2.0, &OM);
        assert!((half - OM.omega_rate).abs() < 1e-15);
    }

    #[test]
    fn coupling_values() {
        assert_eq!(coupling(0.7, 0.7), 1.0);
        assert!((coupling(0.0, -PI) + 1.0).abs() < 1e-15);
        assert!((coupling(0.3, 0.1) - 0.2f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn one_part_gen_cases() {
        let diag = one_part_gen(0.4, 0.4, &OM);
        assert_eq!(diag, Complex64::new(0.0, 0.0));

        // Pure phase at D = 0: sign per -i (E_k - E_{k'})/ħ.
        let free = ModelParams::new(1.0, 0.0).unwrap();
        let v = one_part_gen(0.0, -PI, &free);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);

        // Pure decay at Ω = 0.
        let diss = ModelParams::new(0.0, 1.0).unwrap();
        let v = one_part_gen(0.0, -PI, &diss);
        assert!((v - Complex64::new(-4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_part_gen_structure() {
        // Diagonal quartet: exactly zero (momentum-like conservation).
        let q = MomentumQuad::new(0.3, 0.3, -1.1, -1.1).unwrap();
        assert_eq!(two_part_gen(&q, &OM), Complex64::new(0.0, 0.0));

        // D = 0: purely imaginary, matching the dispersion combination.
        let free = ModelParams::new(0.7, 0.0).unwrap();
        let q = MomentumQuad::new(0.2, -0.9, 1.4, 0.5).unwrap();
        let f = two_part_gen(&q, &free);
        assert!(f.re.abs() < 1e-15);
        let want = -(dispersion(0.2, &free) - dispersion(-0.9, &free)
            + dispersion(1.4, &free)
            - dispersion(0.5, &free));
        assert!((f.im - want).abs() < 1e-14);

        // Interaction term is what is left after removing both one-particle
        // generators (algebraic-decomposition oracle).
        let q = MomentumQuad::new(0.11, -2.0, 2.3, 0.77).unwrap();
        let f = two_part_gen(&q, &OM);
        let resid = f - one_part_gen(q.k1, q.k1p, &OM) - one_part_gen(q.k2, q.k2p, &OM);
        assert!((resid.im).abs() < 1e-15);
        assert!((resid.re - interaction_gen(&q, &OM)).abs() < 1e-13);

        // k1 = k1' = 0, k2 = k2' = -pi: the four couplings cancel exactly.
        let q = MomentumQuad::new(0.0, 0.0, -PI, -PI).unwrap();
        assert!(interaction_gen(&q, &OM).abs() < 1e-13);
    }

    /// Dense-grid scan oracle: max Re F over a uniform 33^4 grid stays
    /// non-positive (contractivity of the propagator).
    #[test]
    fn re_f_nonpositive_on_grid() {
        let n = 33usize;
        let ks: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
        let mut max_re = f64::NEG_INFINITY;
        for &k1 in &ks {
            for &k1p in &ks {
                for &k2 in &ks {
                    for &k2p in &ks {
                        let q = MomentumQuad { k1, k1p, k2, k2p };
                        let re = two_part_gen(&q, &OM).re;
                        if re > max_re {
                            max_re = re;
                        }
                    }
                }
            }
        }
        assert!(max_re <= 1e-12, "max Re F = {max_re}");

        // Same scan for the strong-dissipation mode.
        let diss = ModelParams::new(0.0, 0.9).unwrap();
        let mut max_re = f64::NEG_INFINITY;
        for &k1 in &ks {
            for &k1p in &ks {
                for &k2 in &ks {
                    for &k2p in &ks {
                        let q = MomentumQuad { k1, k1p, k2, k2p };
                        let f = two_part_gen(&q, &diss);
                        assert!(f.im == 0.0);
                        max_re = max_re.max(f.re);
                    }
                }
            }
        }
        assert!(max_re <= 1e-12, "Ω=0 max Re F = {max_re}");
    }

    #[test]
    fn propagator_cases() {
        let q = MomentumQuad::new(0.2, -0.9, 1.4, 0.5).unwrap();
        assert_eq!(propagator_k(&q, 0.0, &OM).unwrap(), Complex64::new(1.0, 0.0));
        assert!(propagator_k(&q, -1.0, &OM).is_err());

        let diag = MomentumQuad::new(0.2, 0.2, 1.4, 1.4).unwrap();
        assert_eq!(
            propagator_k(&diag, 7.7, &OM).unwrap(),
            Complex64::new(1.0, 0.0)
        );

        let free = ModelParams::new(0.7, 0.0).unwrap();
        let v = propagator_k(&q, 2.5, &free).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn prop_generator_symmetries(
            k1 in -PI..PI, k1p in -PI..PI, k2 in -PI..PI, k2p in -PI..PI,
            om in 0.0f64..3.0, d in 0.0f64..3.0,
        ) {
            let p = ModelParams::new(om, d).unwrap();
            let q = MomentumQuad { k1, k1p, k2, k2p };
            let f = two_part_gen(&q, &p);

            // Contractivity.
            prop_assert!(f.re <= 1e-12);

            // Particle exchange: (k1<->k2, k1'<->k2').
            let swapped = MomentumQuad { k1: k2, k1p: k2p, k2: k1, k2p: k1p };
            let fs = two_part_gen(&swapped, &p);
            prop_assert!((f - fs).norm() < 1e-13);

            // Hermiticity: swapping primed and unprimed conjugates F.
            let conj = MomentumQuad { k1: k1p, k1p: k1, k2: k2p, k2p: k2 };
            let fc = two_part_gen(&conj, &p);
            prop_assert!((fc - f.conj()).norm() < 1e-13);

            // Propagator magnitude never exceeds 1.
            let w = propagator_k(&q, 1.7, &p).unwrap();
            prop_assert!(w.norm() <= 1.0 + 1e-12);
        }
    }
}
