//! Global least-squares extraction of coupling rates from power-dependent
//! reflectance spectra.
//!
//! A single spectrum cannot separate Γ′ from Γ_φ (both broaden the line),
//! so the fit requires at least two spectra at distinct drive amplitudes
//! and shares (ω₀, Γ, Γ′, Γ_φ) plus one amplitude-scale factor across all
//! of them. Residuals are complex (real and imaginary parts enter
//! jointly): the phase information of the IQ circles is what pins the
//! Γ/Γ′ split. The solver is a coarse (Γ, Γ′) grid seed, a Nelder–Mead
//! refinement on square-root-transformed rates, and a final
//! Levenberg–Marquardt polish that also yields parameter standard errors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::params::PortCouplings;
use crate::scattering::{reflectance, ComplexSpectrum, DriveTone, Mode};
use crate::{Port, Real};

/// One measured (or synthetic) spectrum with the nominal drive amplitude
/// it was recorded at. The fit maps nominal amplitudes to Rabi rates
/// through a single shared scale factor, since the absolute
/// power-to-Rabi conversion of a measurement chain is generally unknown.
#[derive(Debug, Clone)]
pub struct ReflectanceDataset<T> {
    pub spectrum: ComplexSpectrum<T>,
    /// Nominal drive amplitude in arbitrary units (for example the
    /// square root of the applied power).
    pub nominal_amplitude: T,
}

/// Physical parameter vector of the global reflectance model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams<T> {
    /// Mode frequency, rad/s.
    pub mode_freq: T,
    /// Direct decay rate into the probing waveguide, rad/s.
    pub gamma: T,
    /// Decay rate into all other channels, rad/s.
    pub gamma_cross: T,
    /// Pure dephasing rate, rad/s.
    pub gamma_phi: T,
    /// Rabi rate per unit of nominal amplitude.
    pub amp_scale: T,
}

impl<T: Real> FitParams<T> {
    fn to_vec(self, fit_phi: bool) -> Vec<T> {
        let mut v = vec![self.mode_freq, self.gamma, self.gamma_cross, self.amp_scale];
        if fit_phi {
            v.push(self.gamma_phi);
        }
        v
    }

    fn from_vec(v: &[T], fit_phi: bool) -> Self {
        Self {
            mode_freq: v[0],
            gamma: v[1],
            gamma_cross: v[2],
            amp_scale: v[3],
            gamma_phi: if fit_phi { v[4] } else { T::zero() },
        }
    }
}

/// Solver options.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Also fit the pure dephasing rate (default off: it is degenerate
    /// with Γ′ unless the power range is wide).
    pub fit_dephasing: bool,
    pub max_iterations: usize,
    /// Convergence threshold on the relative decrease of the cost.
    pub cost_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            fit_dephasing: false,
            max_iterations: 400,
            cost_tolerance: 1e-14,
        }
    }
}

/// Fit outcome with per-parameter standard errors.
#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub params: FitParams<T>,
    /// Euclidean norm of the stacked complex residual vector.
    pub residual_norm: T,
    /// 1σ errors for (mode_freq, gamma, gamma_cross, gamma_phi,
    /// amp_scale); zero entries for parameters held fixed.
    pub std_errors: FitParams<T>,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

struct Problem<'a, T> {
    datasets: &'a [ReflectanceDataset<T>],
    port: Port,
    mode: Mode,
}

impl<T: Real> Problem<'_, T> {
    fn n_residuals(&self) -> usize {
        2 * self
            .datasets
            .iter()
            .map(|d| d.spectrum.points.len())
            .sum::<usize>()
    }

    fn residuals(&self, p: &FitParams<T>) -> Vec<T> {
        let couplings = couplings_for(self.mode, p);
        let mut out = Vec::with_capacity(self.n_residuals());
        for ds in self.datasets {
            let om = p.amp_scale * ds.nominal_amplitude;
            for &(f, z) in &ds.spectrum.points {
                let tone = DriveTone::new(self.port, f, om.abs());
                let model = reflectance(p.mode_freq, &couplings, self.mode, self.port, &tone)
                    .unwrap_or_else(|_| num_complex::Complex::new(T::of(f64::NAN), T::zero()));
                out.push(model.re - z.re);
                out.push(model.im - z.im);
            }
        }
        out
    }

    fn cost(&self, p: &FitParams<T>) -> T {
        self.residuals(p)
            .iter()
            .fold(T::zero(), |acc, r| acc + *r * *r)
    }
}

/// Embed fitted rates into a full coupling struct so the scattering
/// model can be reused directly: the probed mode carries (Γ, Γ′, Γ_φ)
/// as seen from its home port.
fn couplings_for<T: Real>(mode: Mode, p: &FitParams<T>) -> PortCouplings<T> {
    let mut c = PortCouplings {
        gamma_s: T::zero(),
        gamma_a: T::zero(),
        gamma_s_cross: T::zero(),
        gamma_a_cross: T::zero(),
        gamma_phi_s: T::zero(),
        gamma_phi_a: T::zero(),
    };
    match mode {
        Mode::Sym => {
            c.gamma_s = p.gamma.abs();
            c.gamma_s_cross = p.gamma_cross.abs();
            c.gamma_phi_s = p.gamma_phi.abs();
        }
        Mode::Antisym => {
            c.gamma_a = p.gamma.abs();
            c.gamma_a_cross = p.gamma_cross.abs();
            c.gamma_phi_a = p.gamma_phi.abs();
        }
    }
    c
}

/// Jointly fit mode frequency, Γ, Γ′, optionally Γ_φ, and the shared
/// amplitude-scale factor to spectra taken at ≥ 2 distinct powers.
///
/// The spectra are assumed probed through the mode's home port (probing
/// the opposite port just exchanges the meaning of Γ and Γ′ in the
/// returned parameters).
pub fn fit_reflectance<T: Real>(
    datasets: &[ReflectanceDataset<T>],
    mode: Mode,
    initial: Option<FitParams<T>>,
    options: &FitOptions,
) -> Result<FitResult<T>> {
    if datasets.len() < 2 {
        return Err(Error::InsufficientData(
            "need spectra at >= 2 drive amplitudes to separate saturation from linewidth".into(),
        ));
    }
    let mut amps: Vec<f64> = datasets
        .iter()
        .map(|d| d.nominal_amplitude.as_f64())
        .collect();
    amps.sort_by(f64::total_cmp);
    if amps.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-30) {
        return Err(Error::InsufficientData(
            "drive amplitudes must be distinct".into(),
        ));
    }
    for d in datasets {
        d.spectrum.validate()?;
        if d.spectrum.points.is_empty() {
            return Err(Error::InsufficientData("empty spectrum".into()));
        }
    }
    let port = datasets[0].spectrum.port;
    let problem = Problem {
        datasets,
        port,
        mode,
    };

    let seed = initial.unwrap_or_else(|| seed_guess(&problem));
    if std::env::var("TWINMON_FIT_DEBUG").is_ok() {
        eprintln!(
            "[fit] seed: w0={:e} g={:e} gx={:e} k={:e} cost={:e}",
            seed.mode_freq.as_f64(),
            seed.gamma.as_f64(),
            seed.gamma_cross.as_f64(),
            seed.amp_scale.as_f64(),
            problem.cost(&seed).as_f64()
        );
    }

    // Nelder-Mead on sqrt-transformed rates keeps them nonnegative
    let encode = |p: &FitParams<T>| -> Vec<T> {
        let mut v = vec![
            p.mode_freq,
            p.gamma.abs().sqrt(),
            p.gamma_cross.abs().sqrt(),
            p.amp_scale.abs().sqrt(),
        ];
        if options.fit_dephasing {
            v.push(p.gamma_phi.abs().sqrt());
        }
        v
    };
    let decode = |v: &[T]| -> FitParams<T> {
        FitParams {
            mode_freq: v[0],
            gamma: v[1] * v[1],
            gamma_cross: v[2] * v[2],
            amp_scale: v[3] * v[3],
            gamma_phi: if options.fit_dephasing {
                v[4] * v[4]
            } else {
                T::zero()
            },
        }
    };

    let x0 = encode(&seed);
    let scales: Vec<T> = {
        let g = seed.gamma.abs().sqrt();
        let mut s = vec![
            seed.gamma.abs() * T::of(0.3),
            g * T::of(0.3),
            g * T::of(0.3),
        ];
        s.push(seed.amp_scale.abs().sqrt() * T::of(0.3) + T::of(1e-6));
        if options.fit_dephasing {
            s.push(g * T::of(0.3));
        }
        s
    };
    let nm = nelder_mead(
        |v| problem.cost(&decode(v)),
        &x0,
        &scales,
        options.max_iterations,
        T::of(options.cost_tolerance),
    );
    let mut p = decode(&nm.0);
    let mut iterations = nm.1;
    if std::env::var("TWINMON_FIT_DEBUG").is_ok() {
        eprintln!(
            "[fit] after NM: w0={:e} g={:e} gx={:e} k={:e} cost={:e} evals={}",
            p.mode_freq.as_f64(),
            p.gamma.as_f64(),
            p.gamma_cross.as_f64(),
            p.amp_scale.as_f64(),
            problem.cost(&p).as_f64(),
            iterations
        );
    }

    // Levenberg-Marquardt polish on the physical parameters
    let lm = levenberg_marquardt(&problem, p, options, &mut iterations)?;
    p = lm.params;

    Ok(FitResult {
        params: p,
        residual_norm: lm.residual_norm,
        std_errors: lm.std_errors,
        converged: lm.converged,
        iterations,
        warnings: lm.warnings,
    })
}

/// Evaluate the stacked complex-residual norm of the model at `params`
/// (used by consistency tests and for reporting).
pub fn residual_norm_at<T: Real>(
    datasets: &[ReflectanceDataset<T>],
    mode: Mode,
    params: &FitParams<T>,
) -> T {
    let port = datasets[0].spectrum.port;
    let problem = Problem {
        datasets,
        port,
        mode,
    };
    problem.cost(params).sqrt()
}

fn seed_guess<T: Real>(problem: &Problem<'_, T>) -> FitParams<T> {
    // lowest-amplitude dataset shows the least saturated dip
    let ds = problem
        .datasets
        .iter()
        .min_by(|a, b| {
            a.nominal_amplitude
                .partial_cmp(&b.nominal_amplitude)
                .unwrap()
        })
        .unwrap();
    // locate the resonance from the scattered amplitude |1 - r|, which
    // peaks strongly on resonance even when the |r| dip is shallow
    let (mut w0, mut max_scatter) = (T::zero(), T::of(-1.0));
    let mut fmin = T::of(f64::MAX);
    let mut fmax = T::of(f64::MIN);
    let one = num_complex::Complex::new(T::one(), T::zero());
    for &(f, z) in &ds.spectrum.points {
        let scatter = crate::cmag(one - z);
        if scatter > max_scatter {
            max_scatter = scatter;
            w0 = f;
        }
        fmin = fmin.min(f);
        fmax = fmax.max(f);
    }
    let span = fmax - fmin;

    // coarse grid over (Γ, Γ′); scale starts at 1 so nominal amplitudes
    // are taken as Rabi rates until the fit says otherwise
    let mut best = FitParams {
        mode_freq: w0,
        gamma: span / T::of(20.0),
        gamma_cross: span / T::of(200.0),
        gamma_phi: T::zero(),
        amp_scale: T::one(),
    };
    let mut best_cost = T::of(f64::MAX);
    for i in 0..8 {
        let gamma = span / T::of(2.0) * T::of(10f64.powf(-(i as f64) / 2.0));
        for j in 0..6 {
            let cross = gamma * T::of(10f64.powf(-(j as f64) / 1.5));
            let p = FitParams {
                gamma,
                gamma_cross: cross,
                ..best
            };
            let c = problem.cost(&p);
            if c < best_cost {
                best_cost = c;
                best = p;
            }
        }
    }
    best
}

/// Generic Nelder-Mead simplex minimizer; returns (best point, evals).
fn nelder_mead<T: Real, F: Fn(&[T]) -> T>(
    f: F,
    x0: &[T],
    scales: &[T],
    max_iter: usize,
    tol: T,
) -> (Vec<T>, usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scales[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= tol * (T::of(1e-30) + best.abs()) {
            break;
        }
        let mut centroid = vec![T::zero(); n];
        for s in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(&s.0) {
                *c += *v / T::of(n as f64);
            }
        }
        let mirror = |coef: T, from: &[T]| -> Vec<T> {
            centroid
                .iter()
                .zip(from)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };
        let xr = mirror(alpha, &simplex[n].0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = mirror(gamma, &simplex[n].0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = mirror(-rho, &simplex[n].0);
            let fc = f(&xc);
            evals += 1;
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    for (v, b) in s.0.iter_mut().zip(&x_best) {
                        *v = *b + sigma * (*v - *b);
                    }
                    s.1 = f(&s.0);
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    (simplex[0].0.clone(), evals)
}

struct LmOutcome<T> {
    params: FitParams<T>,
    residual_norm: T,
    std_errors: FitParams<T>,
    converged: bool,
    warnings: Vec<String>,
}

fn levenberg_marquardt<T: Real>(
    problem: &Problem<'_, T>,
    start: FitParams<T>,
    options: &FitOptions,
    iterations: &mut usize,
) -> Result<LmOutcome<T>> {
    let fit_phi = options.fit_dephasing;
    let n = if fit_phi { 5 } else { 4 };
    let mut x = start.to_vec(fit_phi);
    let mut cost = problem.cost(&FitParams::from_vec(&x, fit_phi));
    let mut lambda = T::of(1e-3);
    let mut converged = false;
    let mut warnings = Vec::new();

    let jacobian = |x: &[T]| -> (DMatrix<T>, DVector<T>) {
        let p = FitParams::from_vec(x, fit_phi);
        let r0 = problem.residuals(&p);
        let m = r0.len();
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let scale = x[k].abs().max(T::of(1e-3) * x[1].abs()).max(T::of(1e-30));
            let h = scale * T::of(1e-6);
            let mut xp = x.to_vec();
            xp[k] += h;
            let rp = problem.residuals(&FitParams::from_vec(&xp, fit_phi));
            let mut xm = x.to_vec();
            xm[k] -= h;
            let rm = problem.residuals(&FitParams::from_vec(&xm, fit_phi));
            for i in 0..m {
                jac[(i, k)] = (rp[i] - rm[i]) / (T::of(2.0) * h);
            }
        }
        (jac, DVector::from_vec(r0))
    };

    for _ in 0..options.max_iterations {
        *iterations += 1;
        let (jac, r) = jacobian(&x);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let jtr = &jt * &r;
        let grad_small = jtr.iter().fold(T::zero(), |a, b| a.max(b.abs()))
            < T::of(options.cost_tolerance) * (T::one() + cost);
        if grad_small {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for k in 0..n {
                lhs[(k, k)] += lambda * jtj[(k, k)].max(T::of(1e-30));
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= T::of(10.0);
                continue;
            };
            let step = chol.solve(&jtr);
            let mut xt = x.clone();
            for k in 0..n {
                xt[k] -= step[k];
            }
            // keep rates physical
            for item in xt.iter_mut().skip(1) {
                *item = item.abs();
            }
            let ct = problem.cost(&FitParams::from_vec(&xt, fit_phi));
            if ct < cost {
                let rel = (cost - ct) / (cost + T::of(1e-300));
                x = xt;
                cost = ct;
                lambda = (lambda * T::of(0.3)).max(T::of(1e-12));
                improved = true;
                if rel < T::of(options.cost_tolerance) {
                    converged = true;
                }
                break;
            }
            lambda *= T::of(10.0);
        }
        if !improved {
            converged = true; // local minimum at solver resolution
            break;
        }
        if converged {
            break;
        }
    }

    let params = FitParams::from_vec(&x, fit_phi);
    let (jac, r) = jacobian(&x);
    let m = r.len();
    let residual_norm = r.norm();
    let jtj = jac.transpose() * &jac;

    // standard errors from the local quadratic model
    let mut errs = FitParams {
        mode_freq: T::zero(),
        gamma: T::zero(),
        gamma_cross: T::zero(),
        gamma_phi: T::zero(),
        amp_scale: T::zero(),
    };
    // degeneracy check on the relative parameterization: column k of
    // the Jacobian scaled by |x_k| measures the response to a fractional
    // parameter change, which puts all parameters in common units
    let mut scaled = jtj.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= x[i].abs().max(T::of(1e-300)) * x[j].abs().max(T::of(1e-300));
        }
    }
    let svd = scaled.svd(false, false);
    let smax = svd.singular_values.iter().fold(T::zero(), |a, b| a.max(*b));
    let smin = svd
        .singular_values
        .iter()
        .fold(T::of(f64::MAX), |a, b| a.min(*b));
    if smin <= smax * T::of(1e-16) {
        warnings.push("rank-deficient fit: parameters are degenerate".into());
    }
    if m > n {
        let sigma2 = residual_norm * residual_norm / T::of((m - n) as f64);
        if let Some(inv) = jtj.try_inverse() {
            let e = |k: usize| (inv[(k, k)].abs() * sigma2).sqrt();
            errs.mode_freq = e(0);
            errs.gamma = e(1);
            errs.gamma_cross = e(2);
            errs.amp_scale = e(3);
            if fit_phi {
                errs.gamma_phi = e(4);
            }
        }
    }

    if !converged {
        return Err(Error::FitDiverged {
            iterations: *iterations,
            residual: residual_norm.as_f64(),
        });
    }
    Ok(LmOutcome {
        params,
        residual_norm,
        std_errors: errs,
        converged,
        warnings,
    })
}
