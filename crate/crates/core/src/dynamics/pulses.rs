//! Pulse sequences: instantaneous rotations, shaped drives, free decay.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::{MoleculeModel, N_STATES};
use crate::error::{Error, Result};
use crate::molecule::StateLabel;
use crate::{Port, Real, C};

/// One step of a pulse sequence.
#[derive(Debug, Clone)]
pub enum PulseStep<T> {
    /// Instantaneous rotation by `angle` on the (lower, upper) transition
    /// driven through `port`. Phase 0 is the real rotation
    /// |l⟩ → cos(θ/2)|l⟩ + sin(θ/2)|u⟩.
    Rotation {
        lower: StateLabel,
        upper: StateLabel,
        port: Port,
        angle: T,
        phase: T,
    },
    /// Drive with an arbitrary envelope under the rotating-wave
    /// approximation. `envelope` holds uniform samples of the Rabi
    /// amplitude on the port's reference transition over `duration`;
    /// other transitions on the port are driven at the dipole-scaled
    /// amplitude and their detuning from `carrier`.
    ShapedDrive {
        port: Port,
        envelope: Vec<T>,
        /// Carrier frequency, rad/s (lab frame).
        carrier: T,
        duration: T,
    },
    /// Dissipation only.
    FreeDecay { duration: T },
}

/// Ordered pulse steps.
#[derive(Debug, Clone, Default)]
pub struct PulseSequence<T> {
    pub steps: Vec<PulseStep<T>>,
}

impl<T: Real> PulseSequence<T> {
    pub fn new(steps: Vec<PulseStep<T>>) -> Self {
        Self { steps }
    }

    /// The entanglement sequence: optional π/2 on 0↔a through waveguide
    /// A, then a θ rotation on 0↔s through waveguide S, then free decay.
    pub fn bell(theta: T, with_pi2: bool, decay_window: T) -> Self {
        let mut steps = Vec::new();
        if with_pi2 {
            steps.push(PulseStep::Rotation {
                lower: StateLabel::Ground,
                upper: StateLabel::SingleOdd,
                port: Port::A,
                angle: T::pi() / T::of(2.0),
                phase: T::zero(),
            });
        }
        steps.push(PulseStep::Rotation {
            lower: StateLabel::Ground,
            upper: StateLabel::SingleEven,
            port: Port::S,
            angle: theta,
            phase: T::zero(),
        });
        steps.push(PulseStep::FreeDecay {
            duration: decay_window,
        });
        Self::new(steps)
    }

    pub fn validate(&self, model: &MoleculeModel<T>) -> Result<()> {
        for step in &self.steps {
            match step {
                PulseStep::Rotation {
                    lower, upper, port, ..
                } => {
                    if !model.transition_allowed(*lower, *upper, *port) {
                        return Err(Error::InvalidTransition {
                            transition: format!("{lower}<->{upper}"),
                            port: *port,
                        });
                    }
                }
                PulseStep::ShapedDrive {
                    envelope, duration, ..
                } => {
                    if envelope.len() < 2 {
                        return Err(Error::InvalidParameter {
                            name: "envelope",
                            reason: "need at least 2 samples".into(),
                        });
                    }
                    if *duration <= T::zero() {
                        return Err(Error::InvalidParameter {
                            name: "duration",
                            reason: "shaped drive duration must be > 0".into(),
                        });
                    }
                }
                PulseStep::FreeDecay { duration } => {
                    if *duration < T::zero() {
                        return Err(Error::InvalidParameter {
                            name: "duration",
                            reason: "decay duration must be >= 0".into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Unitary of an instantaneous Rabi rotation on one transition.
pub fn rotation_unitary<T: Real>(
    lower: StateLabel,
    upper: StateLabel,
    angle: T,
    phase: T,
) -> DMatrix<C<T>> {
    let (l, u) = (lower.canonical_index(), upper.canonical_index());
    let mut m = DMatrix::<C<T>>::identity(N_STATES, N_STATES);
    let half = angle / T::of(2.0);
    let (c, s) = (half.cos(), half.sin());
    let e_pos = Complex::new(phase.cos(), phase.sin());
    m[(l, l)] = Complex::new(c, T::zero());
    m[(u, u)] = Complex::new(c, T::zero());
    m[(u, l)] = e_pos * Complex::new(s, T::zero());
    m[(l, u)] = -e_pos.conj() * Complex::new(s, T::zero());
    m
}

/// Rotating-frame drive Hamiltonian of a shaped pulse: every transition
/// on the port beats against the carrier at its own detuning.
pub fn drive_hamiltonian<'a, T: Real>(
    model: &'a MoleculeModel<T>,
    port: Port,
    envelope: &'a [T],
    carrier: T,
    duration: T,
) -> impl Fn(T) -> DMatrix<C<T>> + 'a {
    let (d_ref, _) = match port {
        Port::S => (
            model.dipole(StateLabel::Ground, StateLabel::SingleEven, Port::S),
            (),
        ),
        Port::A => (
            model.dipole(StateLabel::Ground, StateLabel::SingleOdd, Port::A),
            (),
        ),
    };
    let lines: Vec<(usize, usize, T, T)> = model
        .transitions
        .iter()
        .filter(|tr| tr.port == port)
        .map(|tr| {
            (
                tr.from.canonical_index(),
                tr.to.canonical_index(),
                tr.amplitude / d_ref,
                tr.frequency - carrier,
            )
        })
        .collect();
    let envelope = envelope.to_vec();
    move |t: T| {
        // linear interpolation of the envelope
        let frac = (t / duration).clamp(T::zero(), T::one());
        let pos = frac * T::of((envelope.len() - 1) as f64);
        let k = pos.floor().as_f64() as usize;
        let k1 = (k + 1).min(envelope.len() - 1);
        let w = pos - T::of(k as f64);
        let omega = envelope[k] * (T::one() - w) + envelope[k1] * w;
        let mut h = DMatrix::<C<T>>::zeros(N_STATES, N_STATES);
        for &(lo, hi, weight, detuning) in &lines {
            let amp = omega * weight / T::of(2.0);
            let ph = detuning * t;
            let z = Complex::new(ph.cos(), -ph.sin()) * Complex::new(amp, T::zero());
            h[(hi, lo)] += z;
            h[(lo, hi)] += z.conj();
        }
        h
    }
}
