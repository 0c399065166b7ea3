//! Lindblad generator, propagators, and the adaptive master-equation
//! integrator.
//!
//! dρ/dt = −i[H, ρ] + Σ_k ( L_k ρ L_k† − ½{L_k†L_k, ρ} )
//!
//! Time stepping uses an embedded Dormand–Prince 5(4) pair with a
//! max-norm error controller. The trace is never renormalized: drift
//! beyond the configured tolerance surfaces as an error so integration
//! problems stay visible.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::{check_density, lowering, pure_state, MoleculeModel, N_STATES};
use crate::error::{Error, Result};
use crate::molecule::StateLabel;
use crate::{Port, Real, C};

/// One decay or dephasing channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpTerm<T> {
    pub from: StateLabel,
    pub to: StateLabel,
    /// Waveguide receiving the emission; `None` marks pure dephasing.
    pub port: Option<Port>,
    pub rate: T,
}

impl<T: Real> JumpTerm<T> {
    pub fn decay(from: StateLabel, to: StateLabel, port: Port, rate: T) -> Self {
        Self {
            from,
            to,
            port: Some(port),
            rate,
        }
    }

    /// Dephasing of one level: L = √(2Γ_φ)|i⟩⟨i| dephases coherences
    /// with every other level at Γ_φ.
    pub fn dephasing(level: StateLabel, rate: T) -> Self {
        Self {
            from: level,
            to: level,
            port: None,
            rate,
        }
    }

    /// The jump operator with its rate folded in.
    pub fn operator(&self) -> DMatrix<C<T>> {
        let scale = if self.port.is_some() {
            self.rate.sqrt()
        } else {
            (T::of(2.0) * self.rate).sqrt()
        };
        let mut op: DMatrix<C<T>> = lowering(self.from, self.to);
        op *= Complex::new(scale, T::zero());
        op
    }
}

/// A fixed Lindblad generator.
#[derive(Debug, Clone)]
pub struct Liouvillian<T: Real> {
    pub hamiltonian: DMatrix<C<T>>,
    pub jumps: Vec<DMatrix<C<T>>>,
    /// H − (i/2) Σ L†L, the non-Hermitian drift.
    h_nh: DMatrix<C<T>>,
}

impl<T: Real> Liouvillian<T> {
    pub fn new(hamiltonian: DMatrix<C<T>>, jumps: Vec<DMatrix<C<T>>>) -> Self {
        let dim = hamiltonian.nrows();
        let mut damp = DMatrix::<C<T>>::zeros(dim, dim);
        for l in &jumps {
            damp += l.adjoint() * l;
        }
        let h_nh = &hamiltonian - damp * Complex::new(T::zero(), T::of(0.5));
        Self {
            hamiltonian,
            jumps,
            h_nh,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Right-hand side of the master equation.
    pub fn apply(&self, rho: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        let i = Complex::new(T::zero(), T::one());
        let mut out = (&self.h_nh * rho - rho * self.h_nh.adjoint()) * (-i);
        for l in &self.jumps {
            out += l * rho * l.adjoint();
        }
        out
    }

    /// Column-stacking superoperator matrix (dim² × dim²).
    pub fn superoperator(&self) -> DMatrix<C<T>> {
        let d = self.dim();
        let id = DMatrix::<C<T>>::identity(d, d);
        let i = Complex::new(T::zero(), T::one());
        // vec(Hρ) = (I ⊗ H) vec(ρ); vec(ρK) = (Kᵀ ⊗ I) vec(ρ)
        let mut sup = id.kronecker(&self.h_nh) * (-i);
        sup += self.h_nh.adjoint().transpose().kronecker(&id) * i;
        for l in &self.jumps {
            let l_conj = l.map(|z| z.conj());
            sup += l_conj.kronecker(l);
        }
        sup
    }

    /// Exact time-step propagator exp(L·dt) for this constant generator.
    pub fn propagator(&self, dt: T) -> Propagator<T> {
        let m = (self.superoperator() * Complex::new(dt, T::zero())).exp();
        Propagator { m, dim: self.dim() }
    }
}

/// exp(L·dt) acting on column-stacked matrices.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    m: DMatrix<C<T>>,
    dim: usize,
}

impl<T: Real> Propagator<T> {
    pub fn apply(&self, rho: &DMatrix<C<T>>) -> DMatrix<C<T>> {
        let v = nalgebra::DVector::from_column_slice(rho.as_slice());
        let w = &self.m * v;
        DMatrix::from_column_slice(self.dim, self.dim, w.as_slice())
    }
}

/// Adaptive integrator controls.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Allowed drift of Tr ρ from 1 at checkpoints.
    pub trace_tol: T,
    /// Eigenvalue floor for the positivity monitor.
    pub positivity_floor: T,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::of(1e-9),
            atol: T::of(1e-12),
            max_steps: 1_000_000,
            trace_tol: T::of(1e-8),
            positivity_floor: T::of(1e-8),
        }
    }
}

// Dormand-Prince 5(4) tableau
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate dρ/dt = rhs(t, ρ) from `t0` to `t1` adaptively.
pub fn integrate_adaptive<T: Real, F>(
    rhs: F,
    rho0: &DMatrix<C<T>>,
    t0: T,
    t1: T,
    opts: &IntegratorOptions<T>,
) -> Result<DMatrix<C<T>>>
where
    F: Fn(T, &DMatrix<C<T>>) -> DMatrix<C<T>>,
{
    let mut t = t0;
    let mut y = rho0.clone();
    let span = t1 - t0;
    if span <= T::zero() {
        return Ok(y);
    }
    let mut k1 = rhs(t, &y);
    // initial step from the RHS magnitude
    let rhs_scale = k1
        .iter()
        .map(|z| crate::cmag(*z))
        .fold(T::zero(), |a, b| a.max(b))
        .max(T::of(1e-300));
    let mut h = (T::of(0.1) / rhs_scale).min(span);
    let min_step = span * T::of(1e-14);

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        if h > t1 - t {
            h = t1 - t;
        }
        let hc = Complex::new(h, T::zero());
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        for stage in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    ys += kj * (hc * Complex::new(T::of(a), T::zero()));
                }
            }
            k.push(rhs(t + h * T::of(DP_C[stage]), &ys));
        }
        // 5th-order solution is stage 6's argument (FSAL structure)
        let mut y5 = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = DP_A[5][j];
            if a != 0.0 {
                y5 += kj * (hc * Complex::new(T::of(a), T::zero()));
            }
        }
        // embedded error estimate
        let mut err = DMatrix::<C<T>>::zeros(y.nrows(), y.ncols());
        for (j, kj) in k.iter().enumerate() {
            let e = DP_E[j];
            if e != 0.0 {
                err += kj * (hc * Complex::new(T::of(e), T::zero()));
            }
        }
        let mut ratio_max = T::zero();
        for (idx, e) in err.iter().enumerate() {
            let tol = opts.atol + opts.rtol * crate::cmag(y5[idx]).max(crate::cmag(y[idx]));
            ratio_max = ratio_max.max(crate::cmag(*e) / tol);
        }
        if ratio_max <= T::one() {
            t += h;
            y = y5;
            k1 = k.pop().unwrap(); // FSAL: last stage is rhs at (t+h, y5)
        }
        let factor = if ratio_max > T::zero() {
            (T::one() / ratio_max).powf(T::of(0.2)) * T::of(0.9)
        } else {
            T::of(5.0)
        };
        h *= factor.clamp(T::of(0.2), T::of(5.0));
        if h < min_step {
            return Err(Error::Integration(format!(
                "step size underflow at t = {:e} s",
                t.as_f64()
            )));
        }
    }
    Err(Error::Integration(format!(
        "step budget of {} exhausted before t = {:e} s",
        opts.max_steps,
        t1.as_f64()
    )))
}

/// Time-stamped density-matrix trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DMatrix<C<T>>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &DMatrix<C<T>> {
        self.states.last().expect("trajectory never empty")
    }

    /// Population of a canonical state over the trajectory.
    pub fn population(&self, label: StateLabel) -> Vec<T> {
        let k = label.canonical_index();
        self.states.iter().map(|r| r[(k, k)].re).collect()
    }
}

/// Evolution controls.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<T> {
    pub integrator: IntegratorOptions<T>,
    /// Trajectory samples recorded per free-decay or shaped-drive step.
    pub samples_per_step: usize,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            samples_per_step: 64,
        }
    }
}

/// Run a pulse sequence from `rho0` through the molecule's Lindblad
/// dynamics, in the rotating frame.
pub fn lindblad_evolve<T: Real>(
    model: &MoleculeModel<T>,
    rho0: &DMatrix<C<T>>,
    sequence: &super::pulses::PulseSequence<T>,
    options: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    sequence.validate(model)?;
    if rho0.nrows() != N_STATES || rho0.ncols() != N_STATES {
        return Err(Error::InvalidParameter {
            name: "rho0",
            reason: format!("expected a {N_STATES}x{N_STATES} density matrix"),
        });
    }
    check_density(
        rho0,
        options.integrator.trace_tol,
        options.integrator.positivity_floor,
    )?;

    let liouv = model.free_liouvillian();
    let mut t = T::zero();
    let mut rho = rho0.clone();
    let mut times = vec![t];
    let mut states = vec![rho.clone()];
    let samples = options.samples_per_step.max(1);

    for step in &sequence.steps {
        match step {
            super::pulses::PulseStep::Rotation {
                lower,
                upper,
                port: _,
                angle,
                phase,
            } => {
                let u = super::pulses::rotation_unitary::<T>(*lower, *upper, *angle, *phase);
                rho = &u * rho * u.adjoint();
                times.push(t);
                states.push(rho.clone());
            }
            super::pulses::PulseStep::FreeDecay { duration } => {
                let dt = *duration / T::of(samples as f64);
                for _ in 0..samples {
                    rho = integrate_adaptive(
                        |_, r| liouv.apply(r),
                        &rho,
                        T::zero(),
                        dt,
                        &options.integrator,
                    )?;
                    t += dt;
                    times.push(t);
                    states.push(rho.clone());
                }
            }
            super::pulses::PulseStep::ShapedDrive {
                port,
                envelope,
                carrier,
                duration,
            } => {
                let h_of_t =
                    super::pulses::drive_hamiltonian(model, *port, envelope, *carrier, *duration);
                let dt = *duration / T::of(samples as f64);
                let mut t_local = T::zero();
                for _ in 0..samples {
                    let ht = &h_of_t;
                    rho = integrate_adaptive(
                        |tau, r| {
                            let mut d = liouv.apply(r);
                            let h = ht(t_local + tau);
                            let i = Complex::new(T::zero(), T::one());
                            d += (&h * r - r * &h) * (-i);
                            d
                        },
                        &rho,
                        T::zero(),
                        dt,
                        &options.integrator,
                    )?;
                    t_local += dt;
                    t += dt;
                    times.push(t);
                    states.push(rho.clone());
                }
            }
        }
        check_density(
            &rho,
            options.integrator.trace_tol,
            options.integrator.positivity_floor,
        )?;
    }
    Ok(Trajectory { times, states })
}

/// Density matrix of the molecule's ground state (canonical basis).
pub fn ground_state<T: Real>() -> DMatrix<C<T>> {
    pure_state(StateLabel::Ground)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::StateLabel;
    use proptest::prelude::*;

    fn random_liouvillian(rates: &[f64; 6]) -> Liouvillian<f64> {
        use StateLabel::*;
        let pairs = [
            (SingleEven, Ground, Port::S),
            (SingleEven, Ground, Port::A),
            (SingleOdd, Ground, Port::A),
            (DoubleOdd, SingleOdd, Port::S),
            (DoubleEvenLower, SingleEven, Port::S),
            (DoubleEvenUpper, SingleOdd, Port::A),
        ];
        let jumps = pairs
            .iter()
            .zip(rates)
            .map(|((from, to, port), &rate)| JumpTerm::decay(*from, *to, *port, rate).operator())
            .collect();
        Liouvillian::new(DMatrix::zeros(N_STATES, N_STATES), jumps)
    }

    fn random_pure_state(angles: &[f64; 3]) -> DMatrix<C<f64>> {
        use StateLabel::*;
        let u1 = super::super::pulses::rotation_unitary::<f64>(Ground, SingleOdd, angles[0], 0.3);
        let u2 = super::super::pulses::rotation_unitary::<f64>(Ground, SingleEven, angles[1], 0.0);
        let u3 =
            super::super::pulses::rotation_unitary::<f64>(SingleEven, DoubleOdd, angles[2], 1.1);
        let rho = pure_state::<f64>(Ground);
        let u = u3 * u2 * u1;
        &u * rho * u.adjoint()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn propagator_preserves_trace_and_positivity(
            r in proptest::array::uniform6(1e4f64..1e7),
            angles in proptest::array::uniform3(0.0f64..std::f64::consts::PI),
            steps in 1usize..40,
        ) {
            let liouv = random_liouvillian(&r);
            let rho0 = random_pure_state(&angles);
            let max_rate = r.iter().cloned().fold(0.0, f64::max);
            let step = liouv.propagator(0.25 / max_rate);
            let mut rho = rho0;
            for _ in 0..steps {
                rho = step.apply(&rho);
            }
            prop_assert!(check_density(&rho, 1e-8, 1e-8).is_ok());
        }

        #[test]
        fn adaptive_integrator_matches_the_exact_propagator(
            r in proptest::array::uniform6(1e4f64..1e7),
            angles in proptest::array::uniform3(0.0f64..std::f64::consts::PI),
        ) {
            let liouv = random_liouvillian(&r);
            let rho0 = random_pure_state(&angles);
            let max_rate = r.iter().cloned().fold(0.0, f64::max);
            let t = 2.0 / max_rate;
            let exact = liouv.propagator(t).apply(&rho0);
            let stepped = integrate_adaptive(
                |_, rho| liouv.apply(rho),
                &rho0,
                0.0,
                t,
                &IntegratorOptions::default(),
            )
            .unwrap();
            let dev = (&exact - &stepped)
                .iter()
                .map(|z| crate::cmag(*z))
                .fold(0.0, f64::max);
            prop_assert!(dev < 1e-7, "deviation {dev}");
        }
    }
}
