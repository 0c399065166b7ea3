//! Simulation and analysis toolkit for an artificial molecule made of two
//! strongly coupled transmons, each waveguide addressing one permutation
//! symmetry sector of the collective states.
//!
//! The crate is organized around the physical layers of such a device:
//!
//! - [`molecule`]: the two-transmon Hamiltonian, its eigenstructure,
//!   permutation-symmetry labels, transition dipole matrices and the
//!   resulting selection rules.
//! - [`scattering`]: the power-dependent single-tone reflectance of a
//!   single collective mode, magic-power analysis, IQ circles, and global
//!   least-squares extraction of coupling rates from reflectance data.
//! - [`raman`]: the effective two-level non-Hermitian model of the
//!   two-photon process coupling the symmetric and antisymmetric single
//!   excitations through a detuned doubly-excited state, used for
//!   cross-waveguide frequency conversion.
//! - [`dynamics`]: a Lindblad master-equation engine for pulse sequences,
//!   two-time output-field correlations, temporal mode matching,
//!   pump-calibration spectroscopy, and shot-level moment estimation of
//!   the emitted photonic modes.
//!
//! All core math is generic over the scalar type through the [`Real`]
//! trait; concrete `f64` aliases are exported at the crate root. All
//! frequencies and rates are stored internally in angular units (rad/s);
//! conversion from cyclic units (Hz, the "/2π" convention used at every
//! interface) lives in [`units`].
//!
//! ```
//! use twinmon::scattering::{magic_amplitude, Mode};
//! use twinmon::units::{cyclic, to_cyclic};
//! use twinmon::PortCouplings;
//!
//! // drive amplitude cancelling the reflection of the antisymmetric
//! // mode, for the bundled reference-device rates
//! let couplings = PortCouplings::<f64>::reference();
//! let magic = magic_amplitude(&couplings, Mode::Antisym).unwrap();
//! assert!((to_cyclic(magic) - 0.2198e6).abs() < 1e3);
//!
//! // matched conversion across the waveguides at 300 MHz pump detuning
//! let opt = twinmon::raman::optimal_pump(&couplings, cyclic(300e6)).unwrap();
//! assert!((opt.peak_t2 - 0.952).abs() < 0.001);
//! ```

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod molecule;
pub mod params;
pub mod raman;
pub mod scattering;
pub mod units;

pub use error::{Error, Result};
pub use params::{MoleculeParams, PortCouplings};

use num_complex::Complex;

/// Scalar type the core math is generic over: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy
{
    /// Conversion from an `f64` constant or parameter.
    fn of(x: f64) -> Self;
    /// Lossless widening (or lossy narrowing for exotic scalars) to `f64`.
    fn as_f64(self) -> f64;
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self { x as $t }
            #[inline]
            fn as_f64(self) -> f64 { self as f64 }
        }
    )*};
}

impl_real!(f32, f64);

/// Complex number over the generic scalar.
pub type C<T> = Complex<T>;

/// |z| for a complex number over the generic scalar.
#[inline]
pub fn cmag<T: Real>(z: C<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// |z|² for a complex number over the generic scalar.
#[inline]
pub fn cmag_sq<T: Real>(z: C<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Default concrete scalar used by the command-line tools and tests.
pub type R64 = f64;
/// Complex number over the default scalar.
pub type C64 = Complex<f64>;

/// Ports of the two waveguides coupled to the molecule.
///
/// Port `S` drives symmetry-preserving transitions (it couples to
/// `b₁ + b₂ + h.c.`), port `A` drives symmetry-inverting ones
/// (`b₁ − b₂ + h.c.`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// Waveguide coupled to the symmetric combination of the transmons.
    S,
    /// Waveguide coupled to the antisymmetric combination.
    A,
}

impl Port {
    /// The other waveguide.
    pub fn opposite(self) -> Port {
        match self {
            Port::S => Port::A,
            Port::A => Port::S,
        }
    }
}

impl std::fmt::Display for Port {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Port::S => write!(f, "S"),
            Port::A => write!(f, "A"),
        }
    }
}
