//! Temporal mode matching of the emitted photons.
//!
//! A state decaying at total rate Γ emits a photon with temporal
//! envelope √Γ e^{−Γt/2}. Projecting the output field onto the
//! normalized matched filter f(t) ∝ e^{−Γt/2} on a finite acquisition
//! window [0, T] captures the fraction
//!
//! ```text
//! η = 1 − e^{−ΓT}
//! ```
//!
//! of the photon. The filter here is normalized analytically
//! (∫₀ᵀ f² dt = 1), so matched-mode moments need no further rescaling
//! beyond the physics normalizations handled by the caller.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::UniformGrid;
use crate::error::{Error, Result};
use crate::{Real, C};

/// A normalized temporal filter sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct ModeMatchResult<T: Real> {
    pub grid: UniformGrid<T>,
    /// Filter samples f(t_k), real for the exponential filter.
    pub filter: Vec<T>,
    /// Acquisition window length T, seconds.
    pub window: T,
    /// Capture efficiency η = 1 − e^{−ΓT} of the truncated mode.
    pub eta: T,
    /// Decay rate the filter is matched to, rad/s.
    pub decay_rate: T,
}

/// Closed-form capture efficiency of the truncated exponential mode.
pub fn capture_efficiency<T: Real>(gamma: T, window: T) -> T {
    T::one() - (-gamma * window).exp()
}

/// Matched exponential filter f(t) = √(Γ/η) e^{−Γt/2} on [0, T] with `n`
/// samples (odd, for Simpson quadrature).
pub fn exponential_filter<T: Real>(gamma: T, window: T, n: usize) -> Result<ModeMatchResult<T>> {
    if window <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: "acquisition window must be > 0".into(),
        });
    }
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("Simpson quadrature needs an odd sample count >= 3, got {n}"),
        });
    }
    let grid = UniformGrid::over_window(window, n)?;
    let eta = capture_efficiency(gamma, window);
    let amp = (gamma / eta).sqrt();
    let filter = (0..n)
        .map(|k| amp * (-gamma * grid.at(k) / T::of(2.0)).exp())
        .collect();
    Ok(ModeMatchResult {
        grid,
        filter,
        window,
        eta,
        decay_rate: gamma,
    })
}

/// Convenience: filter plus its capture efficiency.
pub fn mode_match<T: Real>(gamma: T, window: T, n: usize) -> Result<ModeMatchResult<T>> {
    exponential_filter(gamma, window, n)
}

/// Composite-Simpson weights for `n` (odd) samples spaced `dt`.
pub fn simpson_weights<T: Real>(n: usize, dt: T) -> Vec<T> {
    let third = dt / T::of(3.0);
    (0..n)
        .map(|k| {
            let c = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            T::of(c) * third
        })
        .collect()
}

impl<T: Real> ModeMatchResult<T> {
    fn weights(&self) -> Vec<T> {
        simpson_weights(self.grid.n, self.grid.dt)
    }

    /// ⟨â⟩ = ∫ f*(t) g(t) dt for field-amplitude samples g(t_k)
    /// (the caller supplies g = ⟨a_out(t)⟩ including its √Γ factor).
    pub fn first_moment(&self, samples: &[C<T>]) -> C<T> {
        assert_eq!(samples.len(), self.grid.n, "sample count mismatch");
        let w = self.weights();
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..self.grid.n {
            acc += samples[k] * Complex::new(w[k] * self.filter[k], T::zero());
        }
        acc
    }

    /// Double filtered integral ∫∫ f_i(t) f_j(t′) G(t, t′) dt dt′ over a
    /// two-time kernel sampled on the same grid.
    pub fn second_moment(&self, other: &ModeMatchResult<T>, kernel: &DMatrix<C<T>>) -> C<T> {
        assert_eq!(kernel.nrows(), self.grid.n, "kernel rows mismatch");
        assert_eq!(kernel.ncols(), other.grid.n, "kernel cols mismatch");
        let wi = self.weights();
        let wj = other.weights();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.grid.n {
            let fi = wi[i] * self.filter[i];
            for j in 0..other.grid.n {
                acc += kernel[(i, j)] * Complex::new(fi * wj[j] * other.filter[j], T::zero());
            }
        }
        acc
    }

    /// Numerically integrated capture: the matched second moment of the
    /// ideal single-emitter kernel Γ e^{−Γ(t+t′)/2}, which equals η up
    /// to quadrature error. Used to cross-check the closed form.
    pub fn numeric_capture(&self) -> T {
        let g = self.decay_rate;
        let n = self.grid.n;
        let mut kernel = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let e = (-g * (self.grid.at(i) + self.grid.at(j)) / T::of(2.0)).exp();
                kernel[(i, j)] = Complex::new(g * e, T::zero());
            }
        }
        self.second_moment(self, &kernel).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::cyclic;

    #[test]
    fn reference_window_efficiencies() {
        let window = 1.02e-6;
        let eta_a: f64 = capture_efficiency(cyclic(0.311e6), window);
        let eta_s: f64 = capture_efficiency(cyclic(1.388e6), window);
        assert!((eta_a - 0.864).abs() < 5e-4, "{eta_a}");
        assert!((eta_s - 0.9999).abs() < 1e-4, "{eta_s}");
    }

    #[test]
    fn infinite_window_captures_everything() {
        let gamma: f64 = cyclic(0.311e6);
        let eta = capture_efficiency(gamma, 1e3 / gamma);
        assert!((eta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_numeric_flux_integral() {
        for (gamma, window) in [
            (cyclic(0.311e6), 1.02e-6),
            (cyclic(1.388e6), 1.02e-6),
            (cyclic(0.311e6), 5.0e-6),
        ] {
            let mm = exponential_filter::<f64>(gamma, window, 2001).unwrap();
            let numeric = mm.numeric_capture();
            assert!(
                (numeric - mm.eta).abs() < 1e-9,
                "gamma {gamma}: numeric {numeric} vs closed {0}",
                mm.eta
            );
        }
    }

    #[test]
    fn filter_is_normalized() {
        let mm = exponential_filter::<f64>(cyclic(0.311e6), 1.02e-6, 801).unwrap();
        let w = simpson_weights(mm.grid.n, mm.grid.dt);
        let norm: f64 = (0..mm.grid.n)
            .map(|k| w[k] * mm.filter[k] * mm.filter[k])
            .sum();
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
    }

    #[test]
    fn even_sample_count_is_rejected() {
        assert!(exponential_filter::<f64>(1.0, 1.0, 100).is_err());
    }
}
