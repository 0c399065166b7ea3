//! Device parameter sets.
//!
//! The `reference()` constructors carry the characterization of the
//! reference device this toolkit was written around: two nominally
//! identical transmons at ω/2π = 5.9945 GHz with anharmonicity
//! α/2π = −246.9 MHz and inter-transmon coupling g/2π = 296.4 MHz, and
//! the measured decay rates of the two single-excitation collective
//! modes into both waveguides.

use crate::error::{Error, Result};
use crate::units::rad_per_sec_from_hz;
use crate::Real;

/// Bare parameters of the two-transmon molecule.
///
/// All frequencies in rad/s; anharmonicities are negative for transmons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams<T> {
    pub omega1: T,
    pub omega2: T,
    pub alpha1: T,
    pub alpha2: T,
    /// Inter-transmon coupling rate (≥ 0).
    pub g: T,
    /// Levels kept per transmon (≥ 2); 3 covers the two-excitation
    /// manifold exactly.
    pub n_levels: usize,
}

impl<T: Real> MoleculeParams<T> {
    /// Identical-transmon constructor.
    pub fn identical(omega: T, alpha: T, g: T, n_levels: usize) -> Self {
        Self {
            omega1: omega,
            omega2: omega,
            alpha1: alpha,
            alpha2: alpha,
            g,
            n_levels,
        }
    }

    /// Reference-device values (identical transmons, 3 levels each).
    pub fn reference() -> Self {
        Self::identical(
            rad_per_sec_from_hz(5.9945e9),
            rad_per_sec_from_hz(-246.9e6),
            rad_per_sec_from_hz(296.4e6),
            3,
        )
    }

    pub fn is_identical(&self) -> bool {
        self.omega1 == self.omega2 && self.alpha1 == self.alpha2
    }

    /// Hilbert-space dimension of the product basis.
    pub fn dim(&self) -> usize {
        self.n_levels * self.n_levels
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::InvalidParameter {
                name: "n_levels",
                reason: format!("need at least 2 levels per transmon, got {}", self.n_levels),
            });
        }
        if self.g < T::zero() {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: "inter-transmon coupling must be >= 0".into(),
            });
        }
        for (name, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("g", self.g),
        ] {
            if !v.as_f64().is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }
}

/// Decay and dephasing rates of the two single-excitation collective
/// modes, resolved by waveguide.
///
/// `gamma_s` / `gamma_a` are the direct rates of the symmetric mode into
/// waveguide S and of the antisymmetric mode into waveguide A;
/// `gamma_s_cross` / `gamma_a_cross` are the residual decays into the
/// waveguide of the opposite symmetry. Derived totals are computed, never
/// stored: Γ₁ = Γ + Γ′ and Γ₂ = Γ₁/2 + Γ_φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCouplings<T> {
    pub gamma_s: T,
    pub gamma_a: T,
    pub gamma_s_cross: T,
    pub gamma_a_cross: T,
    pub gamma_phi_s: T,
    pub gamma_phi_a: T,
}

impl<T: Real> PortCouplings<T> {
    /// Reference-device rates. The pure dephasing rates default to zero:
    /// the reflectance fits of the reference device are fully accounted
    /// for by the two waveguides.
    pub fn reference() -> Self {
        Self {
            gamma_s: rad_per_sec_from_hz(1.388e6),
            gamma_a: rad_per_sec_from_hz(0.311e6),
            gamma_s_cross: rad_per_sec_from_hz(29.8e3),
            gamma_a_cross: rad_per_sec_from_hz(8.8e3),
            gamma_phi_s: T::zero(),
            gamma_phi_a: T::zero(),
        }
    }

    /// Total relaxation rate Γ₁ of the symmetric mode.
    pub fn gamma1_s(&self) -> T {
        self.gamma_s + self.gamma_s_cross
    }

    /// Total relaxation rate Γ₁ of the antisymmetric mode.
    pub fn gamma1_a(&self) -> T {
        self.gamma_a + self.gamma_a_cross
    }

    /// Coherence decay rate Γ₂ of the symmetric mode.
    pub fn gamma2_s(&self) -> T {
        self.gamma1_s() / T::of(2.0) + self.gamma_phi_s
    }

    /// Coherence decay rate Γ₂ of the antisymmetric mode.
    pub fn gamma2_a(&self) -> T {
        self.gamma1_a() / T::of(2.0) + self.gamma_phi_a
    }

    /// Symmetry selectivity Γ/Γ′ of each mode, `(s, a)`.
    pub fn selectivity(&self) -> (T, T) {
        (
            self.gamma_s / self.gamma_s_cross,
            self.gamma_a / self.gamma_a_cross,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_s", self.gamma_s),
            ("gamma_a", self.gamma_a),
            ("gamma_s_cross", self.gamma_s_cross),
            ("gamma_a_cross", self.gamma_a_cross),
            ("gamma_phi_s", self.gamma_phi_s),
            ("gamma_phi_a", self.gamma_phi_a),
        ] {
            if v < T::zero() || !v.as_f64().is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("rates must be finite and >= 0, got {:e}", v.as_f64()),
                });
            }
        }
        Ok(())
    }
}
