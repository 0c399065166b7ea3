//! Time-domain open-system engine for the molecule.
//!
//! Everything here works in the frame co-rotating with each transition's
//! carrier, where the free Hamiltonian vanishes and only dissipation and
//! drives act. That is exactly the frame heterodyne detection measures
//! when all conversion stages share one local oscillator, and it is safe
//! for the dissipators: a jump operator |j⟩⟨i| only picks up a phase
//! under any diagonal frame change, which leaves its dissipator
//! unchanged.
//!
//! The state space is the six-level canonical eigenbasis
//! (|0⟩, |a⟩, |s⟩, |2−⟩, |2+⟩_L, |2+⟩_U). Jump operators carry one decay
//! channel each, per transition and per waveguide. The single-excitation
//! rates are the measured [`PortCouplings`]; rates out of the
//! two-excitation manifold are not separately measured and default to
//! the port reference rate scaled by the squared dipole ratio,
//! Γ(i→j, P) = Γ_ref(P) · (d_ij / d_ref)², a flat-spectral-density
//! assumption.

pub mod autler;
pub mod bell;
pub mod correlations;
pub mod lindblad;
pub mod modematch;
pub mod pulses;
pub mod shots;

pub use autler::{autler_townes_spectrum, AutlerResult};
pub use bell::{bell_sequence_moments, state_vector_oracle, BellOptions, MomentSet};
pub use correlations::two_time_correlation;
pub use lindblad::{
    lindblad_evolve, EvolveOptions, IntegratorOptions, JumpTerm, Liouvillian, Propagator,
    Trajectory,
};
pub use modematch::{capture_efficiency, exponential_filter, mode_match, ModeMatchResult};
pub use pulses::{PulseSequence, PulseStep};
pub use shots::{shot_estimator, MomentErrors};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::molecule::{
    build_hamiltonian, diagonalize, dipole_matrices, transition_table, DipoleMatrices, EigenSystem,
    StateLabel, Transition,
};
use crate::params::{MoleculeParams, PortCouplings};
use crate::{Port, Real, C};

/// Number of canonically labelled states the engine evolves.
pub const N_STATES: usize = 6;

/// Uniform time grid on [t0, t0 + (n−1)·dt].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid<T> {
    pub t0: T,
    pub dt: T,
    pub n: usize,
}

impl<T: Real> UniformGrid<T> {
    /// Grid spanning [0, window] with `n` points (n ≥ 2).
    pub fn over_window(window: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "grid needs at least 2 points".into(),
            });
        }
        if window <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: "window must be > 0".into(),
            });
        }
        Ok(Self {
            t0: T::zero(),
            dt: window / T::of((n - 1) as f64),
            n,
        })
    }

    pub fn at(&self, k: usize) -> T {
        self.t0 + self.dt * T::of(k as f64)
    }

    pub fn end(&self) -> T {
        self.at(self.n - 1)
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.n).map(|k| self.at(k)).collect()
    }
}

/// Density matrix of a canonical pure state.
pub fn pure_state<T: Real>(label: StateLabel) -> DMatrix<C<T>> {
    let mut rho = DMatrix::zeros(N_STATES, N_STATES);
    let k = label.canonical_index();
    rho[(k, k)] = Complex::new(T::one(), T::zero());
    rho
}

/// Lowering operator |to⟩⟨from| in the canonical basis.
pub fn lowering<T: Real>(from: StateLabel, to: StateLabel) -> DMatrix<C<T>> {
    let mut op = DMatrix::zeros(N_STATES, N_STATES);
    op[(to.canonical_index(), from.canonical_index())] = Complex::new(T::one(), T::zero());
    op
}

/// Verify the defining properties of a density matrix: Hermitian, unit
/// trace within `trace_tol`, eigenvalues above `-eig_floor`.
pub fn check_density<T: Real>(rho: &DMatrix<C<T>>, trace_tol: T, eig_floor: T) -> Result<()> {
    let herm = (rho - rho.adjoint())
        .iter()
        .map(|z| crate::cmag(*z))
        .fold(T::zero(), |a, b| a.max(b));
    if herm > trace_tol {
        return Err(Error::Integration(format!(
            "state lost Hermiticity by {:e}",
            herm.as_f64()
        )));
    }
    let tr = rho.diagonal().iter().fold(T::zero(), |a, z| a + z.re);
    if (tr - T::one()).abs() > trace_tol {
        return Err(Error::Integration(format!(
            "trace drifted to {} (tolerance {:e})",
            tr.as_f64(),
            trace_tol.as_f64()
        )));
    }
    let eig = nalgebra::SymmetricEigen::new(rho.clone());
    let min = eig
        .eigenvalues
        .iter()
        .fold(T::of(f64::MAX), |a, b| a.min(*b));
    if min < -eig_floor {
        return Err(Error::Integration(format!(
            "state developed negative population {:e}",
            min.as_f64()
        )));
    }
    Ok(())
}

/// Tr(A·B).
pub fn trace_product<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> C<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in 0..n {
        for l in 0..n {
            acc += a[(k, l)] * b[(l, k)];
        }
    }
    acc
}

/// Molecule + coupling rates assembled for time-domain work.
#[derive(Debug, Clone)]
pub struct MoleculeModel<T: Real> {
    pub params: MoleculeParams<T>,
    pub couplings: PortCouplings<T>,
    pub eigen: EigenSystem<T>,
    pub dipoles: DipoleMatrices<T>,
    pub transitions: Vec<Transition<T>>,
    /// Measured second-manifold rates taking precedence over the
    /// dipole-ratio scaling, keyed by (upper, lower, port).
    decay_overrides: Vec<(StateLabel, StateLabel, Port, T)>,
}

impl<T: Real> MoleculeModel<T> {
    pub fn new(params: MoleculeParams<T>, couplings: PortCouplings<T>) -> Result<Self> {
        couplings.validate()?;
        if params.n_levels < 3 {
            return Err(Error::InvalidParameter {
                name: "n_levels",
                reason: "the six-level engine needs n_levels >= 3".into(),
            });
        }
        let h = build_hamiltonian(&params)?;
        let eigen = diagonalize(&h, &params)?;
        let dipoles = dipole_matrices(&eigen, &params)?;
        let transitions = transition_table(&eigen, &dipoles)?;
        Ok(Self {
            params,
            couplings,
            eigen,
            dipoles,
            transitions,
            decay_overrides: Vec::new(),
        })
    }

    /// Pin one second-manifold decay rate to a measured value instead of
    /// the dipole-ratio default.
    pub fn with_decay_override(
        mut self,
        from: StateLabel,
        to: StateLabel,
        port: Port,
        rate: T,
    ) -> Self {
        self.decay_overrides
            .retain(|o| (o.0, o.1, o.2) != (from, to, port));
        self.decay_overrides.push((from, to, port, rate));
        self
    }

    /// Reference-device model.
    pub fn reference() -> Self {
        Self::new(MoleculeParams::reference(), PortCouplings::reference())
            .expect("reference parameters are valid")
    }

    /// Dipole element between two canonical states on the given port.
    pub fn dipole(&self, a: StateLabel, b: StateLabel, port: Port) -> T {
        let d = match port {
            Port::S => &self.dipoles.d_s,
            Port::A => &self.dipoles.d_a,
        };
        d[(a.canonical_index(), b.canonical_index())]
    }

    /// Reference dipole and rate of a port (its single-excitation line).
    fn port_reference(&self, port: Port) -> (T, T) {
        match port {
            Port::S => (
                self.dipole(StateLabel::Ground, StateLabel::SingleEven, Port::S),
                self.couplings.gamma_s,
            ),
            Port::A => (
                self.dipole(StateLabel::Ground, StateLabel::SingleOdd, Port::A),
                self.couplings.gamma_a,
            ),
        }
    }

    /// Radiative decay rate of `from → to` into waveguide `port`:
    /// an explicit override when one is set, otherwise the port
    /// reference rate scaled by the squared dipole ratio.
    pub fn scaled_decay_rate(&self, from: StateLabel, to: StateLabel, port: Port) -> T {
        if let Some(o) = self
            .decay_overrides
            .iter()
            .find(|o| (o.0, o.1, o.2) == (from, to, port))
        {
            return o.3;
        }
        let (d_ref, g_ref) = self.port_reference(port);
        let d = self.dipole(from, to, port);
        let ratio = d / d_ref;
        g_ref * ratio * ratio
    }

    /// Whether (a ↔ b) is dipole-allowed on `port`.
    pub fn transition_allowed(&self, a: StateLabel, b: StateLabel, port: Port) -> bool {
        self.dipole(a, b, port).abs() > T::of(crate::molecule::DIPOLE_ZERO_TOL)
    }

    /// Transition frequency E_b − E_a between canonical states, rad/s.
    pub fn transition_frequency(&self, a: StateLabel, b: StateLabel) -> T {
        self.eigen.energy(b).unwrap() - self.eigen.energy(a).unwrap()
    }

    /// The full decay-channel list: measured single-excitation rates
    /// (direct and cross) plus dipole-scaled two-excitation rates.
    pub fn jump_terms(&self) -> Vec<JumpTerm<T>> {
        use StateLabel::*;
        let c = &self.couplings;
        let mut terms = vec![
            JumpTerm::decay(SingleEven, Ground, Port::S, c.gamma_s),
            JumpTerm::decay(SingleEven, Ground, Port::A, c.gamma_s_cross),
            JumpTerm::decay(SingleOdd, Ground, Port::A, c.gamma_a),
            JumpTerm::decay(SingleOdd, Ground, Port::S, c.gamma_a_cross),
        ];
        for port in [Port::S, Port::A] {
            for &upper in &[DoubleOdd, DoubleEvenLower, DoubleEvenUpper] {
                for &lower in &[SingleOdd, SingleEven] {
                    let overridden = self
                        .decay_overrides
                        .iter()
                        .any(|o| (o.0, o.1, o.2) == (upper, lower, port));
                    if self.transition_allowed(upper, lower, port) || overridden {
                        let rate = self.scaled_decay_rate(upper, lower, port);
                        if rate > T::zero() {
                            terms.push(JumpTerm::decay(upper, lower, port, rate));
                        }
                    }
                }
            }
        }
        if c.gamma_phi_s > T::zero() {
            terms.push(JumpTerm::dephasing(SingleEven, c.gamma_phi_s));
        }
        if c.gamma_phi_a > T::zero() {
            terms.push(JumpTerm::dephasing(SingleOdd, c.gamma_phi_a));
        }
        terms
    }

    /// Lindblad generator of free decay in the rotating frame (H = 0).
    pub fn free_liouvillian(&self) -> Liouvillian<T> {
        let jumps = self
            .jump_terms()
            .iter()
            .map(|t| t.operator())
            .collect::<Vec<_>>();
        Liouvillian::new(DMatrix::zeros(N_STATES, N_STATES), jumps)
    }
}
