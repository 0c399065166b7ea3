//! Shot-level moment estimation with reference-run noise subtraction.
//!
//! A phase-preserving measurement chain hands back one complex amplitude
//! per shot and mode, S = a + h†, where h is a thermal noise mode of
//! mean photon number n̄ (the +h† ordering makes S a normal operator, so
//! the two modes are jointly measurable). Moments of h are estimated
//! from interleaved reference runs with the signal off and subtracted:
//!
//! ```text
//! ⟨a⟩      = E[S]        − E[R]
//! ⟨a†a⟩    = E[|S|²]     − E[|R|²]        (E[|R|²] = n̄ + 1)
//! ⟨a₋†a₊⟩  = E[S₋* S₊]   − E[R₋* R₊]
//! ⟨a₋a₊⟩   = E[S₋ S₊]    − E[R₋ R₊]
//! ```
//!
//! The sampler draws (S₋, S₊) from the joint Gaussian with the exact
//! first and second moments the true state dictates (including the
//! amplifier's n̄ + 1), which is all a second-order estimator can see.
//! Shots are partitioned into fixed-size blocks, one RNG stream per
//! block, and the block sums are reduced in block order, so results are
//! bit-identical for a given seed regardless of the worker count.

use nalgebra::{Cholesky, Matrix4, Vector4};
use num_complex::Complex;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::bell::{MomentSet, Normalization};
use crate::error::{Error, Result};
use crate::{Real, C};

/// Per-component 1σ statistical errors of an estimated [`MomentSet`].
/// Complex entries carry (σ_Re, σ_Im) in their two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentErrors<T> {
    pub a_minus: C<T>,
    pub a_plus: C<T>,
    pub n_minus: T,
    pub n_plus: T,
    pub cross: C<T>,
    pub anomalous: C<T>,
}

const BLOCK: u64 = 1 << 16;
/// Stream offset separating signal and reference runs.
const REFERENCE_STREAM_BASE: u64 = 1 << 40;

/// Per-shot accumulator: sums and sums of squares of the six per-shot
/// statistics (complex split into re/im).
#[derive(Clone, Copy)]
struct Sums<T> {
    n: f64,
    s: [[T; 2]; 6],
    s2: [[T; 2]; 6],
}

impl<T: Real> Sums<T> {
    fn zero() -> Self {
        Self {
            n: 0.0,
            s: [[T::zero(); 2]; 6],
            s2: [[T::zero(); 2]; 6],
        }
    }

    fn add(&mut self, vals: [C<T>; 6]) {
        self.n += 1.0;
        for (k, v) in vals.iter().enumerate() {
            self.s[k][0] += v.re;
            self.s[k][1] += v.im;
            self.s2[k][0] += v.re * v.re;
            self.s2[k][1] += v.im * v.im;
        }
    }

    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for k in 0..6 {
            for c in 0..2 {
                self.s[k][c] += other.s[k][c];
                self.s2[k][c] += other.s2[k][c];
            }
        }
    }

    fn mean(&self, k: usize) -> C<T> {
        let n = T::of(self.n);
        Complex::new(self.s[k][0] / n, self.s[k][1] / n)
    }

    /// Standard error of the mean, per component.
    fn sem(&self, k: usize) -> C<T> {
        let n = T::of(self.n);
        let var = |c: usize| {
            let m = self.s[k][c] / n;
            ((self.s2[k][c] / n - m * m).max(T::zero()) / n).sqrt()
        };
        Complex::new(var(0), var(1))
    }
}

/// Cholesky factor of the measured 4-quadrature covariance implied by a
/// true moment set plus amplifier noise (n̄ per mode).
fn quadrature_sampler<T: Real>(
    truth: &MomentSet<T>,
    noise_photons: T,
) -> Result<(Vector4<T>, Matrix4<T>)> {
    let half = T::of(0.5);
    // centered normally-ordered second moments of the signal
    let nm_c = truth.n_minus - crate::cmag_sq(truth.a_minus);
    let np_c = truth.n_plus - crate::cmag_sq(truth.a_plus);
    let cross_c = truth.cross - truth.a_minus.conj() * truth.a_plus;
    let anom_c = truth.anomalous - truth.a_minus * truth.a_plus;

    // covariance Σ_ij = E[δS_i δS_j*] and pseudo-covariance P_ij = E[δS_i δS_j]
    let vacuum = noise_photons + T::one();
    let sigma = [
        [Complex::new(nm_c + vacuum, T::zero()), cross_c.conj()],
        [cross_c, Complex::new(np_c + vacuum, T::zero())],
    ];
    let pseudo = [
        [Complex::new(T::zero(), T::zero()), anom_c],
        [anom_c, Complex::new(T::zero(), T::zero())],
    ];

    // real 4-vector (Re S₋, Im S₋, Re S₊, Im S₊)
    let mut cov = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let (s, p) = (sigma[i][j], pseudo[i][j]);
            cov[(2 * i, 2 * j)] = half * (s.re + p.re);
            cov[(2 * i + 1, 2 * j + 1)] = half * (s.re - p.re);
            cov[(2 * i, 2 * j + 1)] = half * (p.im - s.im);
            cov[(2 * i + 1, 2 * j)] = half * (p.im + s.im);
        }
    }
    // symmetrize away rounding
    let cov = (cov + cov.transpose()) * half;
    let chol = Cholesky::new(cov).ok_or(Error::InvalidParameter {
        name: "truth",
        reason: "moment set is not realizable as a Gaussian measurement record".into(),
    })?;
    let mean = Vector4::new(
        truth.a_minus.re,
        truth.a_minus.im,
        truth.a_plus.re,
        truth.a_plus.im,
    );
    Ok((mean, chol.l()))
}

fn run_blocks<T>(
    n_shots: u64,
    seed: u64,
    stream_base: u64,
    mean: Vector4<T>,
    l: Matrix4<T>,
) -> Sums<T>
where
    T: Real + Send + Sync,
    StandardNormal: Distribution<T>,
{
    let n_blocks = n_shots.div_ceil(BLOCK);
    let partials: Vec<Sums<T>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + b);
            let mut sums = Sums::zero();
            let in_block = BLOCK.min(n_shots - b * BLOCK);
            for _ in 0..in_block {
                let g = Vector4::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                let q = mean + l * g;
                let s_minus = Complex::new(q[0], q[1]);
                let s_plus = Complex::new(q[2], q[3]);
                sums.add([
                    s_minus,
                    s_plus,
                    Complex::new(crate::cmag_sq(s_minus), T::zero()),
                    Complex::new(crate::cmag_sq(s_plus), T::zero()),
                    s_minus.conj() * s_plus,
                    s_minus * s_plus,
                ]);
            }
            sums
        })
        .collect();
    let mut total = Sums::zero();
    for p in &partials {
        total.merge(p);
    }
    total
}

/// Simulate `n_shots` heterodyne shots of the two modes (plus an
/// equal-size reference run with the signal off) and return the
/// noise-subtracted moment estimates with their standard errors.
/// Deterministic for a given seed, independent of the worker count.
pub fn shot_estimator<T>(
    truth: &MomentSet<T>,
    noise_photons: T,
    n_shots: u64,
    seed: u64,
) -> Result<MomentSet<T>>
where
    T: Real + Send + Sync,
    StandardNormal: Distribution<T>,
{
    if n_shots == 0 {
        return Err(Error::InvalidParameter {
            name: "n_shots",
            reason: "need at least one shot".into(),
        });
    }
    if noise_photons < T::zero() {
        return Err(Error::InvalidParameter {
            name: "noise_photons",
            reason: "mean noise photon number must be >= 0".into(),
        });
    }
    let (mean, l) = quadrature_sampler(truth, noise_photons)?;
    let vacuum_only = {
        let blank = MomentSet {
            a_minus: Complex::new(T::zero(), T::zero()),
            a_plus: Complex::new(T::zero(), T::zero()),
            n_minus: T::zero(),
            n_plus: T::zero(),
            cross: Complex::new(T::zero(), T::zero()),
            anomalous: Complex::new(T::zero(), T::zero()),
            normalization: Normalization::unit("reference run"),
            errors: None,
        };
        quadrature_sampler(&blank, noise_photons)?
    };

    let sig = run_blocks(n_shots, seed, 0, mean, l);
    let refr = run_blocks(
        n_shots,
        seed,
        REFERENCE_STREAM_BASE,
        vacuum_only.0,
        vacuum_only.1,
    );

    let est = |k: usize| sig.mean(k) - refr.mean(k);
    let err = |k: usize| {
        let (a, b) = (sig.sem(k), refr.sem(k));
        Complex::new(
            (a.re * a.re + b.re * b.re).sqrt(),
            (a.im * a.im + b.im * b.im).sqrt(),
        )
    };

    Ok(MomentSet {
        a_minus: est(0),
        a_plus: est(1),
        n_minus: est(2).re,
        n_plus: est(3).re,
        cross: est(4),
        anomalous: est(5),
        normalization: Normalization {
            n_minus: T::one(),
            n_plus: T::one(),
            note: format!(
                "reference-subtracted estimate: {n_shots} shots + {n_shots} reference shots, \
                 noise photons {:.3}, seed {seed}",
                noise_photons.as_f64()
            ),
        },
        errors: Some(MomentErrors {
            a_minus: err(0),
            a_plus: err(1),
            n_minus: err(2).re,
            n_plus: err(3).re,
            cross: err(4),
            anomalous: err(5),
        }),
    })
}
