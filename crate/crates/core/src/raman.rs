//! Two-photon frequency conversion between the two collective modes.
//!
//! Two pumps, one per waveguide, address the |s⟩ ↔ |2−⟩ and |a⟩ ↔ |2−⟩
//! transitions at a common detuning δ from the doubly-excited state. In
//! the doubly-rotating frame the single-excitation pair {|s⟩, |a⟩}
//! becomes resonant and is described by the non-Hermitian Hamiltonian
//!
//! ```text
//!       ⎛ −Ω₊²/2δ − iγ_s     −Ω₊Ω₋/2δ      ⎞
//! H_R = ⎜                                   ⎟ ,  γ_i = (Γᵢ + Γ′ᵢ)/2
//!       ⎝ −Ω₊Ω₋/2δ       −Ω₋²/2δ − iγ_a    ⎠
//! ```
//!
//! A weak probe on waveguide S reflects and converts through the
//! resolvent K(ω) = (H_R − ωI)⁻¹:
//!
//! ```text
//! r(ω) = 1 + i Γ_s K₁₁(ω)          t(ω) = i √(Γ_s Γ_a) K₁₂(ω)
//! ```
//!
//! where ω is the probe detuning from the bare |s⟩ resonance and the
//! converted tone leaves waveguide A at ω_t = ω_p + ω₊ − ω₋. The unity
//! term in r is the directly reflected field; dropping it would break
//! |r| ≤ 1. Conversion is matched when the Raman coupling Ω₊Ω₋/2δ equals
//! √(γ_s γ_a), where |t|² peaks at Γ_sΓ_a/((Γ_s+Γ′_s)(Γ_a+Γ′_a)).

use nalgebra::Matrix2;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::PortCouplings;
use crate::{cmag_sq, Real, C};

/// Pump configuration of the conversion process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanConfig<T> {
    /// Pump frequency on waveguide S (lab frame, rad/s).
    pub omega_plus: T,
    /// Pump frequency on waveguide A (lab frame, rad/s).
    pub omega_minus: T,
    /// Pump Rabi amplitude on waveguide S, rad/s.
    pub amp_plus: T,
    /// Pump Rabi amplitude on waveguide A, rad/s.
    pub amp_minus: T,
    /// Detuning of the virtual level from |2−⟩, rad/s. Positive δ puts
    /// the virtual level below |2−⟩; only δ enters the model.
    pub delta: T,
    pub couplings: PortCouplings<T>,
    /// Bare |s⟩ frequency, rad/s (for lab-frame bookkeeping).
    pub omega_s: T,
    /// Bare |a⟩ frequency, rad/s.
    pub omega_a: T,
}

impl<T: Real> RamanConfig<T> {
    /// Equal-amplitude pumps at detuning δ with lab frequencies placed at
    /// the Raman-resonance condition for the given mode frequencies.
    pub fn symmetric_pumps(
        couplings: PortCouplings<T>,
        omega_s: T,
        omega_a: T,
        e_double_odd: T,
        delta: T,
        amp: T,
    ) -> Self {
        Self {
            omega_plus: e_double_odd - delta - omega_a,
            omega_minus: e_double_odd - delta - omega_s,
            amp_plus: amp,
            amp_minus: amp,
            delta,
            couplings,
            omega_s,
            omega_a,
        }
    }

    /// Frequency offset ω₊ − ω₋ added to a probe tone by the conversion.
    pub fn conversion_offset(&self) -> T {
        self.omega_plus - self.omega_minus
    }

    pub fn validate(&self) -> Result<()> {
        self.couplings.validate()?;
        if self.delta == T::zero() {
            return Err(Error::ZeroDivision {
                context: "raman model",
                quantity: "delta",
            });
        }
        if self.amp_plus < T::zero() || self.amp_minus < T::zero() {
            return Err(Error::InvalidParameter {
                name: "amp_plus/amp_minus",
                reason: "pump amplitudes must be >= 0".into(),
            });
        }
        Ok(())
    }
}

/// Conversion spectra on a probe-detuning grid.
#[derive(Debug, Clone)]
pub struct ConversionSpectra<T> {
    /// Probe detuning from the bare |s⟩ resonance, rad/s.
    pub detuning: Vec<T>,
    pub r: Vec<C<T>>,
    pub t: Vec<C<T>>,
    pub r2: Vec<T>,
    pub t2: Vec<T>,
    /// Lab-frame offset of the transmitted tone: ω_t = ω_p + offset.
    pub converted_offset: T,
}

/// Effective two-level non-Hermitian Hamiltonian in the {|s⟩, |a⟩} basis.
pub fn raman_hamiltonian<T: Real>(config: &RamanConfig<T>) -> Result<Matrix2<C<T>>> {
    config.validate()?;
    let c = &config.couplings;
    let two_delta = T::of(2.0) * config.delta;
    let stark_s = -(config.amp_plus * config.amp_plus) / two_delta;
    let stark_a = -(config.amp_minus * config.amp_minus) / two_delta;
    let coupling = -(config.amp_plus * config.amp_minus) / two_delta;
    let gs = (c.gamma_s + c.gamma_s_cross) / T::of(2.0);
    let ga = (c.gamma_a + c.gamma_a_cross) / T::of(2.0);
    Ok(Matrix2::new(
        Complex::new(stark_s, -gs),
        Complex::new(coupling, T::zero()),
        Complex::new(coupling, T::zero()),
        Complex::new(stark_a, -ga),
    ))
}

fn resolvent<T: Real>(h: &Matrix2<C<T>>, omega: T) -> Result<Matrix2<C<T>>> {
    let m = Matrix2::new(
        h[(0, 0)] - Complex::new(omega, T::zero()),
        h[(0, 1)],
        h[(1, 0)],
        h[(1, 1)] - Complex::new(omega, T::zero()),
    );
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if cmag_sq(det) == T::zero() {
        return Err(Error::Singular("raman resolvent"));
    }
    let inv_det = Complex::new(T::one(), T::zero()) / det;
    Ok(Matrix2::new(
        m[(1, 1)] * inv_det,
        -m[(0, 1)] * inv_det,
        -m[(1, 0)] * inv_det,
        m[(0, 0)] * inv_det,
    ))
}

fn rt_at<T: Real>(
    h: &Matrix2<C<T>>,
    couplings: &PortCouplings<T>,
    omega: T,
) -> Result<(C<T>, C<T>)> {
    let k = resolvent(h, omega)?;
    let i = Complex::new(T::zero(), T::one());
    let r = Complex::new(T::one(), T::zero()) + i * Complex::from(couplings.gamma_s) * k[(0, 0)];
    let t = i * Complex::from((couplings.gamma_s * couplings.gamma_a).sqrt()) * k[(0, 1)];
    Ok((r, t))
}

/// Reflectance and conversion transmittance over a probe-detuning grid
/// (probe on waveguide S, converted output on waveguide A).
pub fn conversion_spectra<T: Real>(
    config: &RamanConfig<T>,
    probe_grid: &[T],
) -> Result<ConversionSpectra<T>> {
    if probe_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "probe_grid",
            reason: "grid must be nonempty".into(),
        });
    }
    let h = raman_hamiltonian(config)?;
    let mut r = Vec::with_capacity(probe_grid.len());
    let mut t = Vec::with_capacity(probe_grid.len());
    for &w in probe_grid {
        let (rw, tw) = rt_at(&h, &config.couplings, w)?;
        r.push(rw);
        t.push(tw);
    }
    let r2 = r.iter().map(|z| cmag_sq(*z)).collect();
    let t2 = t.iter().map(|z| cmag_sq(*z)).collect();
    Ok(ConversionSpectra {
        detuning: probe_grid.to_vec(),
        r,
        t,
        r2,
        t2,
        converted_offset: config.conversion_offset(),
    })
}

/// Mirrored configuration: probe on waveguide A, conversion into S.
/// Obtained by swapping the roles of the two modes in the 2×2 model.
pub fn conversion_spectra_mirrored<T: Real>(
    config: &RamanConfig<T>,
    probe_grid: &[T],
) -> Result<ConversionSpectra<T>> {
    let mut swapped = *config;
    swapped.couplings.gamma_s = config.couplings.gamma_a;
    swapped.couplings.gamma_s_cross = config.couplings.gamma_a_cross;
    swapped.couplings.gamma_a = config.couplings.gamma_s;
    swapped.couplings.gamma_a_cross = config.couplings.gamma_s_cross;
    swapped.amp_plus = config.amp_minus;
    swapped.amp_minus = config.amp_plus;
    swapped.omega_plus = config.omega_minus;
    swapped.omega_minus = config.omega_plus;
    conversion_spectra(&swapped, probe_grid)
}

/// Optimal common pump amplitude for matched conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPump<T> {
    /// (Γ_aΓ_s)^¼ √δ: matched coupling neglecting the cross rates.
    pub closed_form: T,
    /// Numerically maximized amplitude with the cross rates included;
    /// equals ((Γ_s+Γ′_s)(Γ_a+Γ′_a)/4)^¼ √δ up to search resolution.
    pub corrected: T,
    /// Peak |t|² at the corrected optimum.
    pub peak_t2: T,
}

/// Peak |t|² over the probe grid at a given pump amplitude.
fn peak_conversion<T: Real>(couplings: &PortCouplings<T>, delta: T, amp: T) -> T {
    let config = RamanConfig {
        omega_plus: T::zero(),
        omega_minus: T::zero(),
        amp_plus: amp,
        amp_minus: amp,
        delta,
        couplings: *couplings,
        omega_s: T::zero(),
        omega_a: T::zero(),
    };
    let h = match raman_hamiltonian(&config) {
        Ok(h) => h,
        Err(_) => return T::zero(),
    };
    let stark = (amp * amp) / (T::of(2.0) * delta);
    let coupling = stark; // equal pumps
    let gs = (couplings.gamma_s + couplings.gamma_s_cross) / T::of(2.0);
    let ga = (couplings.gamma_a + couplings.gamma_a_cross) / T::of(2.0);
    let halfwidth = coupling + gs + ga;
    // scan around the Stark-shifted resonance, then refine the best point
    let n = 801;
    let lo = -stark - T::of(3.0) * halfwidth;
    let hi = -stark + T::of(3.0) * halfwidth;
    let step = (hi - lo) / T::of((n - 1) as f64);
    let mut best = T::zero();
    let mut best_w = lo;
    for k in 0..n {
        let w = lo + step * T::of(k as f64);
        let t2 = rt_at(&h, couplings, w)
            .map(|rt| cmag_sq(rt.1))
            .unwrap_or(T::zero());
        if t2 > best {
            best = t2;
            best_w = w;
        }
    }
    // parabolic refinement
    let f = |w: T| {
        rt_at(&h, couplings, w)
            .map(|rt| cmag_sq(rt.1))
            .unwrap_or(T::zero())
    };
    let (fm, f0, fp) = (f(best_w - step), best, f(best_w + step));
    let denom = fm - T::of(2.0) * f0 + fp;
    if denom < T::zero() {
        let dw = step * T::of(0.5) * (fm - fp) / denom;
        best = best.max(f(best_w + dw));
    }
    best
}

/// Closed-form and numerically optimized common pump amplitude.
pub fn optimal_pump<T: Real>(couplings: &PortCouplings<T>, delta: T) -> Result<OptimalPump<T>> {
    couplings.validate()?;
    if delta <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "pump detuning must be > 0".into(),
        });
    }
    let closed_form = (couplings.gamma_a * couplings.gamma_s).sqrt().sqrt() * delta.sqrt();

    // golden-section maximization of the peak conversion over the pump
    // amplitude, bracketed around the closed form
    let golden = T::of(0.618_033_988_749_894_9);
    let mut a = closed_form * T::of(0.5);
    let mut b = closed_form * T::of(2.0);
    let mut x1 = b - golden * (b - a);
    let mut x2 = a + golden * (b - a);
    let mut f1 = peak_conversion(couplings, delta, x1);
    let mut f2 = peak_conversion(couplings, delta, x2);
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = peak_conversion(couplings, delta, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = peak_conversion(couplings, delta, x1);
        }
    }
    let corrected = (a + b) / T::of(2.0);
    Ok(OptimalPump {
        closed_form,
        corrected,
        peak_t2: peak_conversion(couplings, delta, corrected),
    })
}

/// 2D conversion map over (pump amplitude, probe detuning).
#[derive(Debug, Clone)]
pub struct PumpSweep<T> {
    pub amp_grid: Vec<T>,
    pub probe_grid: Vec<T>,
    /// `t2[i][j]` = |t|² at amplitude `amp_grid[i]`, detuning
    /// `probe_grid[j]`.
    pub t2: Vec<Vec<T>>,
    pub r2: Vec<Vec<T>>,
}

/// Sweep the common pump amplitude Ω = Ω₊ = Ω₋ over `amp_grid`,
/// evaluating the spectra on `probe_grid` (parallel over amplitudes).
pub fn sweep_pump_amplitude<T: Real + Send + Sync>(
    config_template: &RamanConfig<T>,
    amp_grid: &[T],
    probe_grid: &[T],
) -> Result<PumpSweep<T>> {
    if amp_grid.is_empty() || probe_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "amp_grid/probe_grid",
            reason: "grids must be nonempty".into(),
        });
    }
    let rows: Result<Vec<(Vec<T>, Vec<T>)>> = amp_grid
        .par_iter()
        .map(|&amp| {
            let mut cfg = *config_template;
            cfg.amp_plus = amp;
            cfg.amp_minus = amp;
            let spec = conversion_spectra(&cfg, probe_grid)?;
            Ok((spec.t2, spec.r2))
        })
        .collect();
    let rows = rows?;
    Ok(PumpSweep {
        amp_grid: amp_grid.to_vec(),
        probe_grid: probe_grid.to_vec(),
        t2: rows.iter().map(|r| r.0.clone()).collect(),
        r2: rows.into_iter().map(|r| r.1).collect(),
    })
}
