//! Power-dependent single-tone reflectance of one collective mode.
//!
//! A mode probed through a waveguide it is coupled to at rate Γ, with
//! every other decay channel lumped into Γ′, reflects a coherent tone of
//! Rabi amplitude Ω as
//!
//! ```text
//! r(ω) = 1 − i Γ Γ₁ (ω − ω₀ − iΓ₂) / (Ω² Γ₂ + Γ₁ [(ω − ω₀)² + Γ₂²])
//! ```
//!
//! with Γ₁ = Γ + Γ′ and Γ₂ = Γ₁/2 + Γ_φ. This is the steady state of the
//! driven two-level master equation combined with input–output theory
//! (the [`crate::dynamics`] engine reproduces it; see the cross-check
//! tests there). On resonance and in the weak-drive limit
//! r → (Γ′ − Γ)/(Γ + Γ′); over-coupled modes therefore dip through zero
//! at the "magic" amplitude Ω² = Γ₁(Γ − Γ₂) where reflected and
//! coherently scattered fields cancel.

use crate::error::{Error, Result};
use crate::params::PortCouplings;
use crate::{cmag, Port, Real, C};
use num_complex::Complex;

/// The two single-excitation collective modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// |s⟩, couples directly to waveguide S.
    Sym,
    /// |a⟩, couples directly to waveguide A.
    Antisym,
}

impl Mode {
    /// The waveguide this mode is over-coupled to.
    pub fn home_port(self) -> Port {
        match self {
            Mode::Sym => Port::S,
            Mode::Antisym => Port::A,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Sym => write!(f, "s"),
            Mode::Antisym => write!(f, "a"),
        }
    }
}

/// A coherent drive applied to one waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTone<T> {
    pub port: Port,
    /// Carrier frequency, rad/s.
    pub frequency: T,
    /// Rabi amplitude Ω, rad/s (≥ 0).
    pub amplitude: T,
    /// Drive phase, radians.
    pub phase: T,
}

impl<T: Real> DriveTone<T> {
    pub fn new(port: Port, frequency: T, amplitude: T) -> Self {
        Self {
            port,
            frequency,
            amplitude,
            phase: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitude < T::zero() {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: "drive amplitude must be >= 0".into(),
            });
        }
        Ok(())
    }
}

/// Frequency-resolved complex spectrum with its acquisition metadata.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum<T> {
    /// (probe frequency rad/s, complex amplitude), frequencies strictly
    /// increasing.
    pub points: Vec<(T, C<T>)>,
    pub port: Port,
    /// Rabi amplitude of the drive the spectrum was taken at, rad/s.
    pub drive_amplitude: T,
    /// Identifier of the model that produced the spectrum.
    pub model: &'static str,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn frequencies(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter {
                    name: "points",
                    reason: "frequencies must be strictly increasing".into(),
                });
            }
        }
        Ok(())
    }
}

/// (Γ, Γ′, Γ_φ) as seen from `probed_port`: probing a mode through the
/// opposite waveguide exchanges the roles of the direct and cross rates.
pub fn effective_rates<T: Real>(
    couplings: &PortCouplings<T>,
    mode: Mode,
    probed_port: Port,
) -> (T, T, T) {
    let (direct, cross, phi) = match mode {
        Mode::Sym => (
            couplings.gamma_s,
            couplings.gamma_s_cross,
            couplings.gamma_phi_s,
        ),
        Mode::Antisym => (
            couplings.gamma_a,
            couplings.gamma_a_cross,
            couplings.gamma_phi_a,
        ),
    };
    if probed_port == mode.home_port() {
        (direct, cross, phi)
    } else {
        (cross, direct, phi)
    }
}

/// Complex reflectance of `mode` probed through `probed_port`.
pub fn reflectance<T: Real>(
    mode_freq: T,
    couplings: &PortCouplings<T>,
    mode: Mode,
    probed_port: Port,
    tone: &DriveTone<T>,
) -> Result<C<T>> {
    couplings.validate()?;
    tone.validate()?;
    if tone.port != probed_port {
        return Err(Error::InvalidParameter {
            name: "tone.port",
            reason: format!(
                "tone drives port {} but the spectrum is probed on {probed_port}",
                tone.port
            ),
        });
    }
    let (gamma, gamma_cross, gamma_phi) = effective_rates(couplings, mode, probed_port);
    let g1 = gamma + gamma_cross;
    let g2 = g1 / T::of(2.0) + gamma_phi;
    let delta = tone.frequency - mode_freq;
    let om2 = tone.amplitude * tone.amplitude;
    let num = Complex::new(T::zero(), -(gamma * g1)) * Complex::new(delta, -g2);
    let den = om2 * g2 + g1 * (delta * delta + g2 * g2);
    Ok(Complex::new(T::one(), T::zero()) + num / Complex::new(den, T::zero()))
}

/// Drive amplitude at which the on-resonance reflectance crosses zero.
///
/// Exists only in the over-coupled regime Γ > Γ₂; with Γ_φ = 0 it reduces
/// to √((Γ² − Γ′²)/2). The mode is assumed probed through its home port.
pub fn magic_amplitude<T: Real>(couplings: &PortCouplings<T>, mode: Mode) -> Result<T> {
    couplings.validate()?;
    let (gamma, gamma_cross, gamma_phi) = effective_rates(couplings, mode, mode.home_port());
    let g1 = gamma + gamma_cross;
    let g2 = g1 / T::of(2.0) + gamma_phi;
    let om2 = g1 * (gamma - g2);
    if om2 < T::zero() {
        return Err(Error::Undercoupled {
            gamma: gamma.as_f64(),
            gamma2: g2.as_f64(),
        });
    }
    Ok(om2.sqrt())
}

/// Reflectance swept symmetrically across the mode frequency, for
/// Im(r)-vs-Re(r) plots. At weak drive and Γ_φ = 0 the locus is a circle
/// through +1 of diameter 2Γ/Γ₁ on the real axis.
pub fn iq_circle<T: Real>(
    mode_freq: T,
    couplings: &PortCouplings<T>,
    mode: Mode,
    port: Port,
    amplitude: T,
    freq_span: T,
    n_points: usize,
) -> Result<ComplexSpectrum<T>> {
    if n_points < 3 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            reason: format!("need at least 3 points, got {n_points}"),
        });
    }
    let mut points = Vec::with_capacity(n_points);
    let step = freq_span / T::of((n_points - 1) as f64);
    let start = mode_freq - freq_span / T::of(2.0);
    for k in 0..n_points {
        let f = start + step * T::of(k as f64);
        let tone = DriveTone::new(port, f, amplitude);
        points.push((f, reflectance(mode_freq, couplings, mode, port, &tone)?));
    }
    Ok(ComplexSpectrum {
        points,
        port,
        drive_amplitude: amplitude,
        model: MODEL_ID,
    })
}

/// Model identifier recorded in spectra produced by this module.
pub const MODEL_ID: &str = "single-tone-reflectance/1";

/// Largest |1 − r| over a spectrum; for a weak-drive sweep this is the
/// IQ-circle diameter.
pub fn circle_diameter<T: Real>(spectrum: &ComplexSpectrum<T>) -> T {
    spectrum
        .points
        .iter()
        .map(|&(_, r)| cmag(Complex::new(T::one(), T::zero()) - r))
        .fold(T::zero(), |a, b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::cyclic;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table() -> PortCouplings<f64> {
        PortCouplings::reference()
    }

    fn tone(port: Port, f: f64, om: f64) -> DriveTone<f64> {
        DriveTone::new(port, f, om)
    }

    #[test]
    fn weak_resonant_reflectance_antisym() {
        let c = table();
        let w = cyclic(5.6981e9);
        let r = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w, 0.0)).unwrap();
        assert!((r.re - (-0.945)).abs() < 0.005, "{r}");
        assert!(r.im.abs() < 1e-12);
    }

    #[test]
    fn saturation_and_off_resonance_limits() {
        let c = table();
        let w = cyclic(5.6981e9);
        let r = reflectance(
            w,
            &c,
            Mode::Antisym,
            Port::A,
            &tone(Port::A, w, cyclic(1e12)),
        )
        .unwrap();
        assert!((r - num_complex::Complex::new(1.0, 0.0)).norm() < 1e-6);
        let far = w + cyclic(1e12);
        let r = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, far, 0.0)).unwrap();
        assert!((r - num_complex::Complex::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn magic_amplitude_reference_value() {
        let c = table();
        let om = magic_amplitude(&c, Mode::Antisym).unwrap();
        assert!(
            (om / (2.0 * std::f64::consts::PI * 1e6) - 0.2199).abs() < 5e-4,
            "{om}"
        );
        // self-consistency: reflectance vanishes there
        let w = cyclic(5.6981e9);
        let r = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w, om)).unwrap();
        assert!(r.norm() < 1e-10, "{r}");
    }

    #[test]
    fn magic_amplitude_critical_and_undercoupled() {
        let mut c = table();
        c.gamma_a_cross = c.gamma_a;
        assert_relative_eq!(magic_amplitude(&c, Mode::Antisym).unwrap(), 0.0);
        c.gamma_a_cross = 2.0 * c.gamma_a;
        assert!(matches!(
            magic_amplitude(&c, Mode::Antisym),
            Err(Error::Undercoupled { .. })
        ));
    }

    #[test]
    fn ideal_mirror_circle() {
        let mut c = table();
        c.gamma_a_cross = 0.0;
        let w = cyclic(5.6981e9);
        let span = cyclic(200.0 * 0.311e6);
        let spec = iq_circle(w, &c, Mode::Antisym, Port::A, 0.0, span, 4001).unwrap();
        spec.validate().unwrap();
        assert!((circle_diameter(&spec) - 2.0).abs() < 1e-3);
        let min_re = spec.points.iter().map(|p| p.1.re).fold(f64::MAX, f64::min);
        assert!((min_re + 1.0).abs() < 1e-3);
    }

    #[test]
    fn reference_circle_diameter_sym() {
        let c = table();
        let w = cyclic(6.2909e9);
        let span = cyclic(400.0 * 1.388e6);
        let spec = iq_circle(w, &c, Mode::Sym, Port::S, 0.0, span, 8001).unwrap();
        assert!((circle_diameter(&spec) - 1.958).abs() < 0.002);
    }

    #[test]
    fn circle_shrinks_monotonically_with_power() {
        let c = table();
        let w = cyclic(5.6981e9);
        let span = cyclic(60.0 * 0.311e6);
        let mut last = f64::MAX;
        for k in 0..8 {
            let om = cyclic(0.311e6) * (0.2 * k as f64);
            let spec = iq_circle(w, &c, Mode::Antisym, Port::A, om, span, 2001).unwrap();
            let d = circle_diameter(&spec);
            assert!(d < last + 1e-12, "diameter must shrink: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn undercoupled_small_dip_from_exchanged_rates() {
        // probing |s⟩ from waveguide A exchanges (Γ, Γ′)
        let c = table();
        let w = cyclic(6.2909e9);
        let r = reflectance(w, &c, Mode::Sym, Port::A, &tone(Port::A, w, 0.0)).unwrap();
        let expect = (c.gamma_s - c.gamma_s_cross) / (c.gamma_s + c.gamma_s_cross);
        assert_relative_eq!(r.re, expect, max_relative = 1e-12);
        let dip_db = -20.0 * r.norm().log10();
        assert!(dip_db > 0.2 && dip_db < 0.6, "small dip, got {dip_db} dB");
    }

    #[test]
    fn port_mismatch_is_rejected() {
        let c = table();
        let w = cyclic(6.2909e9);
        let err = reflectance(w, &c, Mode::Sym, Port::S, &tone(Port::A, w, 0.0));
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn passivity(
            gamma in 1e3f64..1e8,
            ratio_cross in 0.0f64..2.0,
            ratio_phi in 0.0f64..2.0,
            delta_rel in -100.0f64..100.0,
            om_rel in 0.0f64..100.0,
        ) {
            let c = PortCouplings {
                gamma_s: gamma,
                gamma_a: gamma,
                gamma_s_cross: gamma * ratio_cross,
                gamma_a_cross: gamma * ratio_cross,
                gamma_phi_s: gamma * ratio_phi,
                gamma_phi_a: gamma * ratio_phi,
            };
            let w = cyclic(6.0e9);
            let t = tone(Port::S, w + gamma * delta_rel, gamma * om_rel);
            let r = reflectance(w, &c, Mode::Sym, Port::S, &t).unwrap();
            prop_assert!(r.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn detuning_symmetry(
            delta_rel in 0.0f64..50.0,
            om_rel in 0.0f64..10.0,
            ratio_phi in 0.0f64..1.0,
        ) {
            let mut c = table();
            c.gamma_phi_a = c.gamma_a * ratio_phi;
            let w = cyclic(5.6981e9);
            let d = c.gamma_a * delta_rel;
            let om = c.gamma_a * om_rel;
            let rp = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w + d, om)).unwrap();
            let rm = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w - d, om)).unwrap();
            prop_assert!((rp.norm() - rm.norm()).abs() < 1e-12);
        }

        #[test]
        fn saturation_monotone_on_resonance(om0_rel in 0.0f64..30.0) {
            let c = table();
            let w = cyclic(5.6981e9);
            let om0 = c.gamma_a * om0_rel;
            let om1 = om0 * 1.1 + c.gamma_a * 0.01;
            let r0 = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w, om0)).unwrap();
            let r1 = reflectance(w, &c, Mode::Antisym, Port::A, &tone(Port::A, w, om1)).unwrap();
            let one = num_complex::Complex::new(1.0, 0.0);
            prop_assert!((one - r1).norm() <= (one - r0).norm() + 1e-12);
        }
    }
}
