//! Two-transmon molecule: Hamiltonian, eigenstructure, symmetry labels,
//! transition dipoles and selection rules.
//!
//! The molecule Hamiltonian in the bare product basis |n₁,n₂⟩ is
//!
//! ```text
//! H = Σᵢ ωᵢ bᵢ†bᵢ + (αᵢ/2) bᵢ†bᵢ†bᵢbᵢ  +  g (b₁†b₂ + b₁b₂†)
//! ```
//!
//! For identical transmons H commutes with the transmon-swap permutation
//! P, so every eigenstate carries a parity label ±1. The two waveguides
//! couple through `d_S = b₁ + b₂ + h.c.` and `d_A = b₁ − b₂ + h.c.`;
//! since P d_S P = d_S and P d_A P = −d_A, waveguide S drives only
//! symmetry-preserving transitions and waveguide A only
//! symmetry-inverting ones.
//!
//! The six canonically labelled states are the ground state, the
//! antisymmetric and symmetric single excitations
//! |a⟩, |s⟩ = (|10⟩ ∓ |01⟩)/√2 at ω ∓ g, the antisymmetric double
//! excitation |2−⟩ = (|20⟩ − |02⟩)/√2 at 2ω + α, and the two symmetric
//! double excitations |2+⟩_{L,U} at ½(4ω + α ∓ √(16g² + α²)).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::MoleculeParams;
use crate::{Port, Real, C};

/// Permutation parity of an eigenstate under transmon swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Even,
    Odd,
    /// Not a parity eigenstate (non-identical transmons).
    None,
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Symmetry::Even => write!(f, "even"),
            Symmetry::Odd => write!(f, "odd"),
            Symmetry::None => write!(f, "none"),
        }
    }
}

/// The canonically labelled low-lying collective states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    /// |0⟩
    Ground,
    /// |a⟩, odd single excitation
    SingleOdd,
    /// |s⟩, even single excitation
    SingleEven,
    /// |2−⟩, odd double excitation
    DoubleOdd,
    /// |2+⟩_L, lower even double excitation
    DoubleEvenLower,
    /// |2+⟩_U, upper even double excitation
    DoubleEvenUpper,
}

impl StateLabel {
    /// Canonical index order used by [`DipoleMatrices`] and reports.
    pub const CANONICAL: [StateLabel; 6] = [
        StateLabel::Ground,
        StateLabel::SingleOdd,
        StateLabel::SingleEven,
        StateLabel::DoubleOdd,
        StateLabel::DoubleEvenLower,
        StateLabel::DoubleEvenUpper,
    ];

    pub fn canonical_index(self) -> usize {
        Self::CANONICAL.iter().position(|&l| l == self).unwrap()
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StateLabel::Ground => "0",
            StateLabel::SingleOdd => "a",
            StateLabel::SingleEven => "s",
            StateLabel::DoubleOdd => "2-",
            StateLabel::DoubleEvenLower => "2+L",
            StateLabel::DoubleEvenUpper => "2+U",
        };
        write!(f, "{s}")
    }
}

/// Diagonalized molecule.
///
/// States are stored sorted by (excitation manifold, energy), with the
/// tie at g = 0 broken even-before-odd. `canonical` maps the six
/// [`StateLabel`]s onto storage indices.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Real> {
    /// Eigenfrequencies in rad/s, nondecreasing within each manifold.
    pub energies: Vec<T>,
    /// Eigenvectors in the bare product basis, one column per state,
    /// phase-fixed so the largest-magnitude amplitude is real positive.
    pub states: DMatrix<C<T>>,
    /// Permutation parity per state.
    pub symmetry: Vec<Symmetry>,
    /// Total excitation number per state (exact: H conserves it).
    pub manifold: Vec<u32>,
    /// Storage index of each canonical label, when the truncation holds
    /// the full two-excitation manifold (n_levels ≥ 3).
    pub canonical: Option<[usize; 6]>,
    /// Levels per transmon of the underlying basis.
    pub n_levels: usize,
    /// Diagnostics (degenerate-pair labelling ambiguities and similar).
    pub warnings: Vec<String>,
}

impl<T: Real> EigenSystem<T> {
    /// Energy of a canonical state, in rad/s.
    pub fn energy(&self, label: StateLabel) -> Option<T> {
        let map = self.canonical?;
        Some(self.energies[map[label.canonical_index()]])
    }

    /// Eigenvector of a canonical state.
    pub fn state(&self, label: StateLabel) -> Option<DVector<C<T>>> {
        let map = self.canonical?;
        Some(
            self.states
                .column(map[label.canonical_index()])
                .into_owned(),
        )
    }
}

/// Transition dipole matrices of the two drive operators in the
/// eigenbasis, restricted to the six canonical states.
///
/// `d_s[(i, j)]` is ⟨i| b₁+b₂+h.c. |j⟩ between normalized eigenstates in
/// canonical order; `d_a` likewise for b₁−b₂+h.c. The `rescaled_*`
/// matrices carry the same elements rescaled by the norms of the
/// conventional unnormalized state compositions (|10⟩±|01⟩ and so on), a
/// convention common in device reports; they exist only for identical
/// transmons. Signs follow the eigenvector phase convention.
#[derive(Debug, Clone)]
pub struct DipoleMatrices<T: Real> {
    pub d_s: DMatrix<T>,
    pub d_a: DMatrix<T>,
    pub rescaled_d_s: Option<DMatrix<T>>,
    pub rescaled_d_a: Option<DMatrix<T>>,
}

/// One dipole-allowed transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<T> {
    /// Lower-energy state.
    pub from: StateLabel,
    /// Higher-energy state.
    pub to: StateLabel,
    /// Transition frequency in rad/s (always positive).
    pub frequency: T,
    /// Waveguide driving this transition.
    pub port: Port,
    /// Dipole amplitude between normalized eigenstates.
    pub amplitude: T,
}

/// Closed-form second-manifold coupling coefficients for identical
/// transmons, in the unnormalized-composition convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCoefficients<T> {
    /// c_{S−}: couples |s⟩ ↔ |2+⟩_L through waveguide S.
    pub c_s_minus: T,
    /// c_{S+}: couples |s⟩ ↔ |2+⟩_U through waveguide S.
    pub c_s_plus: T,
    /// c_{A−}: couples |a⟩ ↔ |2+⟩_U through waveguide A.
    pub c_a_minus: T,
    /// c_{A+}: couples |a⟩ ↔ |2+⟩_L through waveguide A.
    pub c_a_plus: T,
}

/// Annihilation operator of one truncated transmon.
fn ladder<T: Real>(n: usize) -> DMatrix<T> {
    let mut b = DMatrix::zeros(n, n);
    for k in 1..n {
        b[(k - 1, k)] = T::of(k as f64).sqrt();
    }
    b
}

fn kron_id<T: Real>(m: &DMatrix<T>, n: usize, first: bool) -> DMatrix<T> {
    let id = DMatrix::<T>::identity(n, n);
    if first {
        m.kronecker(&id)
    } else {
        id.kronecker(m)
    }
}

/// Real-symmetric form of the molecule Hamiltonian.
fn hamiltonian_real<T: Real>(p: &MoleculeParams<T>) -> DMatrix<T> {
    let n = p.n_levels;
    let b = ladder::<T>(n);
    let b1 = kron_id(&b, n, true);
    let b2 = kron_id(&b, n, false);
    let half = T::of(0.5);
    let n1 = b1.transpose() * &b1;
    let n2 = b2.transpose() * &b2;
    let mut h = &n1 * p.omega1 + &n2 * p.omega2;
    // (α/2) b†b†bb = (α/2) n(n−1)
    h += (&n1 * &n1 - &n1) * (p.alpha1 * half);
    h += (&n2 * &n2 - &n2) * (p.alpha2 * half);
    let hop = b1.transpose() * &b2;
    h += (&hop + hop.transpose()) * p.g;
    h
}

/// Build the molecule Hamiltonian in the bare product basis |n₁,n₂⟩
/// (index n₁·n_levels + n₂). The result is Hermitian and block-diagonal
/// in the total excitation number.
pub fn build_hamiltonian<T: Real>(params: &MoleculeParams<T>) -> Result<DMatrix<C<T>>> {
    params.validate()?;
    Ok(hamiltonian_real(params).map(|x| Complex::new(x, T::zero())))
}

/// Transmon-swap permutation operator P|n₁,n₂⟩ = |n₂,n₁⟩.
pub fn permutation_operator<T: Real>(n_levels: usize) -> DMatrix<T> {
    let dim = n_levels * n_levels;
    let mut p = DMatrix::zeros(dim, dim);
    for n1 in 0..n_levels {
        for n2 in 0..n_levels {
            p[(n2 * n_levels + n1, n1 * n_levels + n2)] = T::one();
        }
    }
    p
}

/// Total-excitation-number operator, diagonal in the bare basis.
fn excitation_numbers(n_levels: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n_levels * n_levels);
    for n1 in 0..n_levels {
        for n2 in 0..n_levels {
            out.push((n1 + n2) as u32);
        }
    }
    out
}

/// Two eigenvalues closer than this (rad/s) are treated as degenerate
/// when ordering and labelling states.
fn degeneracy_tol<T: Real>() -> T {
    T::of(2.0 * std::f64::consts::PI * 1e3)
}

/// Diagonalize a Hermitian molecule Hamiltonian.
///
/// Eigenpairs are sorted by (manifold, energy), degenerate pairs ordered
/// even-before-odd, global phases fixed so the largest-magnitude
/// amplitude of each state is real positive, and permutation-parity
/// labels assigned from ⟨ψ|P|ψ⟩.
pub fn diagonalize<T: Real>(
    h: &DMatrix<C<T>>,
    params: &MoleculeParams<T>,
) -> Result<EigenSystem<T>> {
    params.validate()?;
    let dim = params.dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("expected {dim}x{dim} matrix"),
        });
    }
    let scale = h
        .iter()
        .map(|z| crate::cmag(*z))
        .fold(T::zero(), |a, b| a.max(b));
    let herm_dev = (h - h.adjoint())
        .iter()
        .map(|z| crate::cmag(*z))
        .fold(T::zero(), |a, b| a.max(b));
    if herm_dev > T::of(1e-10) * scale.max(T::one()) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!(
                "matrix is not Hermitian (deviation {:e})",
                herm_dev.as_f64()
            ),
        });
    }

    let eig = SymmetricEigen::new(h.clone());
    let exc = excitation_numbers(params.n_levels);

    // per-state excitation manifold (exact integer up to numerics)
    let mut rec: Vec<(u32, T, DVector<C<T>>)> = Vec::with_capacity(dim);
    for k in 0..dim {
        let v = eig.eigenvectors.column(k).into_owned();
        let mut n_exp = T::zero();
        for (i, &n) in exc.iter().enumerate() {
            n_exp += crate::cmag_sq(v[i]) * T::of(n as f64);
        }
        let m = n_exp.as_f64().round() as u32;
        rec.push((m, eig.eigenvalues[k], v));
    }

    let p_op = permutation_operator::<T>(params.n_levels).map(|x| Complex::new(x, T::zero()));
    let parity = |v: &DVector<C<T>>| -> T {
        let pv = &p_op * v;
        let mut acc = C::new(T::zero(), T::zero());
        for i in 0..dim {
            acc += v[i].conj() * pv[i];
        }
        acc.re
    };

    // sort by (manifold, energy)
    let tol = degeneracy_tol::<T>();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| {
        rec[a].0.cmp(&rec[b].0).then_with(|| {
            rec[a]
                .1
                .partial_cmp(&rec[b].1)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut rec: Vec<(u32, T, DVector<C<T>>)> = idx.into_iter().map(|k| rec[k].clone()).collect();

    // within a degenerate block the solver returns arbitrary mixtures, so
    // purify each block into permutation-parity eigenvectors; this also
    // implements the even-before-odd ordering of exact ties (g = 0)
    if params.is_identical() {
        let mut start = 0;
        while start < dim {
            let mut end = start + 1;
            while end < dim
                && rec[end].0 == rec[start].0
                && (rec[end].1 - rec[end - 1].1).abs() < tol
            {
                end += 1;
            }
            if end - start > 1 {
                let k = end - start;
                let mut q = DMatrix::<C<T>>::zeros(dim, k);
                for (c, r) in (start..end).enumerate() {
                    q.set_column(c, &rec[r].2);
                }
                let m = q.adjoint() * &p_op * &q;
                let sub = SymmetricEigen::new(m);
                // even (parity +1) before odd
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| {
                    sub.eigenvalues[b]
                        .partial_cmp(&sub.eigenvalues[a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let rotated = &q * &sub.eigenvectors;
                for (slot, &c) in order.iter().enumerate() {
                    rec[start + slot].2 = rotated.column(c).into_owned();
                }
            }
            start = end;
        }
    }

    let mut energies = Vec::with_capacity(dim);
    let mut manifold = Vec::with_capacity(dim);
    let mut states = DMatrix::<C<T>>::zeros(dim, dim);
    let mut symmetry = Vec::with_capacity(dim);
    let mut warnings = Vec::new();

    let parity_tol = T::of(1e-9);
    for (col, entry) in rec.iter().enumerate() {
        let (m, e, ref v) = *entry;
        let mut v = v.clone();
        // phase fix: largest-magnitude amplitude real positive; ties
        // (within 1e-9 relative) resolved toward the lowest bare index
        let max_mag = v
            .iter()
            .map(|z| crate::cmag(*z))
            .fold(T::zero(), |a, b| a.max(b));
        let pick = (0..dim)
            .find(|&i| crate::cmag(v[i]) >= max_mag * (T::one() - T::of(1e-9)))
            .unwrap();
        let phase = v[pick] / Complex::new(crate::cmag(v[pick]), T::zero());
        for z in v.iter_mut() {
            *z /= phase;
        }
        let par = parity(&v);
        let sym = if params.is_identical() && par.abs() > T::one() - parity_tol {
            if par > T::zero() {
                Symmetry::Even
            } else {
                Symmetry::Odd
            }
        } else {
            Symmetry::None
        };
        energies.push(e);
        manifold.push(m);
        states.set_column(col, &v);
        symmetry.push(sym);
    }

    // degenerate-pair warning for non-identical transmons
    if !params.is_identical() {
        for i in 1..dim {
            if manifold[i] == manifold[i - 1] && (energies[i] - energies[i - 1]).abs() < tol {
                warnings.push(format!(
                    "near-degenerate pair at {:.6e} rad/s: symmetry labelling ambiguous \
                     for non-identical transmons",
                    energies[i].as_f64()
                ));
            }
        }
    }

    let canonical = canonical_map(&energies, &manifold, &symmetry, &mut warnings);

    Ok(EigenSystem {
        energies,
        states,
        symmetry,
        manifold,
        canonical,
        n_levels: params.n_levels,
        warnings,
    })
}

fn canonical_map<T: Real>(
    energies: &[T],
    manifold: &[u32],
    symmetry: &[Symmetry],
    warnings: &mut Vec<String>,
) -> Option<[usize; 6]> {
    let in_manifold =
        |m: u32| -> Vec<usize> { (0..energies.len()).filter(|&i| manifold[i] == m).collect() };
    let ground = *in_manifold(0).first()?;
    let singles = in_manifold(1);
    let doubles = in_manifold(2);
    if singles.len() != 2 || doubles.len() != 3 {
        return None;
    }
    let labelled = symmetry.iter().all(|&s| s != Symmetry::None);
    let (odd1, even1, odd2, even_lo, even_hi);
    if labelled {
        odd1 = *singles.iter().find(|&&i| symmetry[i] == Symmetry::Odd)?;
        even1 = *singles.iter().find(|&&i| symmetry[i] == Symmetry::Even)?;
        odd2 = *doubles.iter().find(|&&i| symmetry[i] == Symmetry::Odd)?;
        let evens: Vec<usize> = doubles
            .iter()
            .copied()
            .filter(|&i| symmetry[i] == Symmetry::Even)
            .collect();
        if evens.len() != 2 {
            return None;
        }
        even_lo = evens[0];
        even_hi = evens[1];
    } else {
        // no parity labels: fall back to the energy pattern of the
        // weakly perturbed identical molecule (lower/middle/upper)
        warnings
            .push("canonical labels assigned by energy position only (no parity labels)".into());
        odd1 = singles[0];
        even1 = singles[1];
        even_lo = doubles[0];
        odd2 = doubles[1];
        even_hi = doubles[2];
    }
    Some([ground, odd1, even1, odd2, even_lo, even_hi])
}

/// Closed-form eigenfrequencies of the canonical states for identical
/// transmons: (E_a, E_s, E_{2−}, E_{2+L}, E_{2+U}).
pub fn closed_form_energies<T: Real>(params: &MoleculeParams<T>) -> (T, T, T, T, T) {
    let (w, a, g) = (params.omega1, params.alpha1, params.g);
    let root = (T::of(16.0) * g * g + a * a).sqrt();
    let half = T::of(0.5);
    (
        w - g,
        w + g,
        T::of(2.0) * w + a,
        half * (T::of(4.0) * w + a - root),
        half * (T::of(4.0) * w + a + root),
    )
}

/// Closed-form second-manifold coupling coefficients
///
/// ```text
/// c_{S±} = (−α ± √(α² + 16g²) + 4g) / (√2 g)
/// c_{A±} = ( α ± √(α² + 16g²) + 4g) / (√2 g)
/// ```
pub fn coupling_coefficients<T: Real>(
    params: &MoleculeParams<T>,
) -> Result<CouplingCoefficients<T>> {
    params.validate()?;
    if !params.is_identical() {
        return Err(Error::InvalidParameter {
            name: "params",
            reason: "closed-form coupling coefficients require identical transmons".into(),
        });
    }
    if params.g == T::zero() {
        return Err(Error::ZeroDivision {
            context: "coupling_coefficients",
            quantity: "g",
        });
    }
    let (a, g) = (params.alpha1, params.g);
    let root = (a * a + T::of(16.0) * g * g).sqrt();
    let den = T::of(2.0).sqrt() * g;
    let four_g = T::of(4.0) * g;
    Ok(CouplingCoefficients {
        c_s_minus: (-a - root + four_g) / den,
        c_s_plus: (-a + root + four_g) / den,
        c_a_minus: (a - root + four_g) / den,
        c_a_plus: (a + root + four_g) / den,
    })
}

/// Norms of the conventional unnormalized compositions of the six
/// canonical states, used to rescale dipole elements between the
/// normalized and report conventions.
fn composition_norms<T: Real>(params: &MoleculeParams<T>) -> [T; 6] {
    let (a, g) = (params.alpha1, params.g);
    let root = (a * a + T::of(16.0) * g * g).sqrt();
    let two_sqrt2_g = T::of(2.0) * T::of(2.0).sqrt() * g;
    let c_lo = (a + root) / two_sqrt2_g;
    let c_hi = (a - root) / two_sqrt2_g;
    let sqrt2 = T::of(2.0).sqrt();
    [
        T::one(),
        sqrt2,
        sqrt2,
        sqrt2,
        (T::of(2.0) + c_lo * c_lo).sqrt(),
        (T::of(2.0) + c_hi * c_hi).sqrt(),
    ]
}

/// Matrix elements of the two drive operators between the six canonical
/// eigenstates.
pub fn dipole_matrices<T: Real>(
    eigensys: &EigenSystem<T>,
    params: &MoleculeParams<T>,
) -> Result<DipoleMatrices<T>> {
    let map = eigensys.canonical.ok_or_else(|| Error::InvalidParameter {
        name: "eigensys",
        reason: "canonical six states unavailable; need n_levels >= 3".into(),
    })?;
    let n = eigensys.n_levels;
    let b = ladder::<T>(n);
    let b1 = kron_id(&b, n, true);
    let b2 = kron_id(&b, n, false);
    let d_s_bare =
        (&b1 + &b2 + b1.transpose() + b2.transpose()).map(|x| Complex::new(x, T::zero()));
    let d_a_bare =
        (&b1 - &b2 + b1.transpose() - b2.transpose()).map(|x| Complex::new(x, T::zero()));

    let project = |op: &DMatrix<C<T>>| -> DMatrix<T> {
        let mut out = DMatrix::zeros(6, 6);
        for (i, &si) in map.iter().enumerate() {
            let vi = eigensys.states.column(si);
            for (j, &sj) in map.iter().enumerate() {
                let mut acc = C::new(T::zero(), T::zero());
                let ov = op * eigensys.states.column(sj);
                for k in 0..vi.len() {
                    acc += vi[k].conj() * ov[k];
                }
                debug_assert!(acc.im.abs() < T::of(1e-9));
                out[(i, j)] = acc.re;
            }
        }
        out
    };

    let d_s = project(&d_s_bare);
    let d_a = project(&d_a_bare);

    let (rescaled_d_s, rescaled_d_a) = if params.is_identical() {
        let norms = composition_norms(params);
        let rescale = |m: &DMatrix<T>| -> DMatrix<T> {
            let mut out = m.clone();
            for i in 0..6 {
                for j in 0..6 {
                    out[(i, j)] *= norms[i] * norms[j];
                }
            }
            out
        };
        (Some(rescale(&d_s)), Some(rescale(&d_a)))
    } else {
        (None, None)
    };

    Ok(DipoleMatrices {
        d_s,
        d_a,
        rescaled_d_s,
        rescaled_d_a,
    })
}

/// Amplitudes below this threshold count as dipole-forbidden.
pub const DIPOLE_ZERO_TOL: f64 = 1e-9;

/// Enumerate the dipole-allowed transitions among the six canonical
/// states with their frequencies and driving ports.
pub fn transition_table<T: Real>(
    eigensys: &EigenSystem<T>,
    dipoles: &DipoleMatrices<T>,
) -> Result<Vec<Transition<T>>> {
    let map = eigensys.canonical.ok_or_else(|| Error::InvalidParameter {
        name: "eigensys",
        reason: "canonical six states unavailable; need n_levels >= 3".into(),
    })?;
    let tol = T::of(DIPOLE_ZERO_TOL);
    let mut out = Vec::new();
    for (port, d) in [(Port::S, &dipoles.d_s), (Port::A, &dipoles.d_a)] {
        for i in 0..6 {
            for j in (i + 1)..6 {
                let amp = d[(i, j)];
                if amp.abs() <= tol {
                    continue;
                }
                let (ei, ej) = (eigensys.energies[map[i]], eigensys.energies[map[j]]);
                let (from, to, frequency) = if ei <= ej {
                    (StateLabel::CANONICAL[i], StateLabel::CANONICAL[j], ej - ei)
                } else {
                    (StateLabel::CANONICAL[j], StateLabel::CANONICAL[i], ei - ej)
                };
                out.push(Transition {
                    from,
                    to,
                    frequency,
                    port,
                    amplitude: amp,
                });
            }
        }
    }
    out.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::cyclic;
    use approx::assert_relative_eq;

    fn reference() -> MoleculeParams<f64> {
        MoleculeParams::reference()
    }

    fn eigen(p: &MoleculeParams<f64>) -> EigenSystem<f64> {
        diagonalize(&build_hamiltonian(p).unwrap(), p).unwrap()
    }

    #[test]
    fn decoupled_two_level_spectrum() {
        let w = cyclic(5.0e9);
        let p = MoleculeParams::identical(w, -cyclic(0.2e9), 0.0, 2);
        let h = build_hamiltonian(&p).unwrap();
        let es = diagonalize(&h, &p).unwrap();
        let expect = [0.0, w, w, 2.0 * w];
        for (e, x) in es.energies.iter().zip(expect) {
            assert_relative_eq!(*e, x, max_relative = 1e-12);
        }
        // g = 0 tie-break: even before odd
        assert_eq!(es.symmetry[1], Symmetry::Even);
        assert_eq!(es.symmetry[2], Symmetry::Odd);
    }

    proptest::proptest! {
        #[test]
        fn excitation_number_block_structure(
            w1 in 3.0e9f64..9.0e9,
            w2 in 3.0e9f64..9.0e9,
            a1 in -0.5e9f64..0.0,
            a2 in -0.5e9f64..0.0,
            g in 0.0f64..1.0e9,
            n_levels in 2usize..5,
        ) {
            let p = MoleculeParams {
                omega1: cyclic(w1),
                omega2: cyclic(w2),
                alpha1: cyclic(a1),
                alpha2: cyclic(a2),
                g: cyclic(g),
                n_levels,
            };
            let h = build_hamiltonian(&p).unwrap();
            // total excitation number of each bare state
            let exc: Vec<usize> = (0..p.dim())
                .map(|i| i / n_levels + i % n_levels)
                .collect();
            let scale = h.iter().map(|z| crate::cmag(*z)).fold(0.0, f64::max);
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    if exc[i] != exc[j] {
                        proptest::prop_assert!(h[(i, j)].norm() < 1e-14 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn non_identical_degenerate_pair_warns() {
        // two slightly detuned transmons at g = 0: the single-excitation
        // pair is nearly degenerate and carries no parity labels
        let w = cyclic(6.0e9);
        let p = MoleculeParams {
            omega1: w,
            omega2: w + cyclic(100.0),
            alpha1: -cyclic(0.25e9),
            alpha2: -cyclic(0.25e9),
            g: 0.0,
            n_levels: 3,
        };
        let es = eigen(&p);
        assert!(es.symmetry.iter().all(|&s| s == Symmetry::None));
        assert!(
            es.warnings.iter().any(|w| w.contains("ambiguous")),
            "{:?}",
            es.warnings
        );
    }

    #[test]
    fn hermiticity_is_exact() {
        let p = reference();
        let h = build_hamiltonian(&p).unwrap();
        let dev = (&h - h.adjoint())
            .iter()
            .map(|z| crate::cmag(*z))
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn commutes_with_permutation() {
        let p = reference();
        let h = build_hamiltonian(&p).unwrap();
        let perm =
            permutation_operator::<f64>(p.n_levels).map(|x| num_complex::Complex::new(x, 0.0));
        let comm = &h * &perm - &perm * &h;
        let dev = comm.iter().map(|z| crate::cmag(*z)).fold(0.0, f64::max);
        let scale = h.iter().map(|z| crate::cmag(*z)).fold(0.0, f64::max);
        assert!(dev < 1e-12 * scale);
    }

    #[test]
    fn reference_energies_match_characterization() {
        let es = eigen(&reference());
        let ghz = |l: StateLabel| es.energy(l).unwrap() / (2.0 * std::f64::consts::PI * 1e9);
        let half_mhz = 0.5e-3;
        assert!((ghz(StateLabel::SingleOdd) - 5.6981).abs() < half_mhz);
        assert!((ghz(StateLabel::SingleEven) - 6.2909).abs() < half_mhz);
        assert!((ghz(StateLabel::DoubleOdd) - 11.7421).abs() < half_mhz);
        assert!((ghz(StateLabel::DoubleEvenLower) - 11.2600).abs() < half_mhz);
        assert!((ghz(StateLabel::DoubleEvenUpper) - 12.4711).abs() < half_mhz);
    }

    #[test]
    fn numerics_match_closed_forms() {
        let p = reference();
        let es = eigen(&p);
        let (ea, e_s, e2m, e2l, e2u) = closed_form_energies(&p);
        let one_hz = 2.0 * std::f64::consts::PI;
        for (label, x) in [
            (StateLabel::SingleOdd, ea),
            (StateLabel::SingleEven, e_s),
            (StateLabel::DoubleOdd, e2m),
            (StateLabel::DoubleEvenLower, e2l),
            (StateLabel::DoubleEvenUpper, e2u),
        ] {
            assert!(
                (es.energy(label).unwrap() - x).abs() < one_hz,
                "{label}: {} vs {}",
                es.energy(label).unwrap(),
                x
            );
        }
    }

    #[test]
    fn truncation_stability() {
        let mut p = reference();
        let e3: Vec<f64> = {
            let es = eigen(&p);
            StateLabel::CANONICAL
                .iter()
                .map(|&l| es.energy(l).unwrap())
                .collect()
        };
        p.n_levels = 5;
        let es5 = eigen(&p);
        let one_khz = 2.0 * std::f64::consts::PI * 1e3;
        for (&l, &e) in StateLabel::CANONICAL.iter().zip(&e3) {
            assert!((es5.energy(l).unwrap() - e).abs() < one_khz);
        }
    }

    #[test]
    fn orthonormality_and_parity() {
        let es = eigen(&reference());
        let dim = es.energies.len();
        for i in 0..dim {
            let vi = es.states.column(i);
            for j in 0..dim {
                let vj = es.states.column(j);
                let mut ov = num_complex::Complex::new(0.0, 0.0);
                for k in 0..dim {
                    ov += vi[k].conj() * vj[k];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ov.norm() - expect).abs() < 1e-10);
            }
            assert_ne!(es.symmetry[i], Symmetry::None);
        }
    }

    #[test]
    fn degenerate_singles_at_zero_coupling() {
        let p = MoleculeParams::identical(cyclic(6.0e9), -cyclic(0.25e9), 0.0, 3);
        let es = eigen(&p);
        let map = es.canonical.unwrap();
        assert_relative_eq!(
            es.energies[map[1]],
            es.energies[map[2]],
            max_relative = 1e-12
        );
        assert_relative_eq!(es.energies[map[1]], cyclic(6.0e9), max_relative = 1e-12);
    }

    #[test]
    fn coupling_coefficients_reference_values() {
        let c = coupling_coefficients(&reference()).unwrap();
        assert!((c.c_s_minus - 0.53).abs() < 0.01, "{}", c.c_s_minus);
        assert!((c.c_s_plus - 6.31).abs() < 0.01, "{}", c.c_s_plus);
        assert!((c.c_a_minus + 0.65).abs() < 0.01, "{}", c.c_a_minus);
        assert!((c.c_a_plus - 5.13).abs() < 0.01, "{}", c.c_a_plus);
    }

    #[test]
    fn coupling_coefficients_harmonic_limit() {
        let p = MoleculeParams::identical(cyclic(6.0e9), 0.0, cyclic(0.3e9), 3);
        let c = coupling_coefficients(&p).unwrap();
        let four_sqrt2 = 4.0 * 2.0_f64.sqrt();
        assert_relative_eq!(c.c_s_minus, 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.c_a_minus, 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.c_s_plus, four_sqrt2, max_relative = 1e-12);
        assert_relative_eq!(c.c_a_plus, four_sqrt2, max_relative = 1e-12);
    }

    #[test]
    fn coupling_coefficients_strong_coupling_limit() {
        let alpha: f64 = -cyclic(0.25e9);
        let p = MoleculeParams::identical(cyclic(6.0e9), alpha, 1e6 * alpha.abs(), 3);
        let c = coupling_coefficients(&p).unwrap();
        let four_sqrt2 = 4.0 * 2.0_f64.sqrt();
        assert!(c.c_s_minus.abs() < 1e-5);
        assert!((c.c_s_plus - four_sqrt2).abs() < 1e-5);
        assert!(c.c_a_minus.abs() < 1e-5);
        assert!((c.c_a_plus - four_sqrt2).abs() < 1e-5);
    }

    #[test]
    fn coupling_coefficients_zero_g_is_an_error() {
        let p = MoleculeParams::identical(cyclic(6.0e9), -cyclic(0.25e9), 0.0, 3);
        assert!(matches!(
            coupling_coefficients(&p),
            Err(Error::ZeroDivision { .. })
        ));
    }

    #[test]
    fn dipole_zero_pattern_matches_selection_rules() {
        let p = reference();
        let es = eigen(&p);
        let d = dipole_matrices(&es, &p).unwrap();
        // allowed entries (upper triangle, canonical order 0,a,s,2-,2+L,2+U)
        let s_allowed = [(0, 2), (1, 3), (2, 4), (2, 5)];
        let a_allowed = [(0, 1), (2, 3), (1, 4), (1, 5)];
        for i in 0..6 {
            for j in 0..6 {
                assert!((d.d_s[(i, j)] - d.d_s[(j, i)]).abs() < 1e-12);
                assert!((d.d_a[(i, j)] - d.d_a[(j, i)]).abs() < 1e-12);
                if i == j {
                    assert!(d.d_s[(i, j)].abs() < 1e-12);
                    assert!(d.d_a[(i, j)].abs() < 1e-12);
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let in_s = s_allowed.contains(&(lo, hi));
                let in_a = a_allowed.contains(&(lo, hi));
                if !in_s {
                    assert!(d.d_s[(i, j)].abs() < 1e-9, "dS[{i}{j}]={}", d.d_s[(i, j)]);
                }
                if !in_a {
                    assert!(d.d_a[(i, j)].abs() < 1e-9, "dA[{i}{j}]={}", d.d_a[(i, j)]);
                }
            }
        }
        // the two selection rules from the single-excitation manifold
        assert!(d.d_s[(0, 1)].abs() < 1e-9);
        assert!(d.d_a[(0, 2)].abs() < 1e-9);
    }

    fn canonical_manifold(l: StateLabel) -> u32 {
        match l {
            StateLabel::Ground => 0,
            StateLabel::SingleOdd | StateLabel::SingleEven => 1,
            _ => 2,
        }
    }

    #[test]
    fn dipole_values_match_closed_forms() {
        let p = reference();
        let es = eigen(&p);
        let d = dipole_matrices(&es, &p).unwrap();
        let c = coupling_coefficients(&p).unwrap();
        let rs = d.rescaled_d_s.as_ref().unwrap();
        let ra = d.rescaled_d_a.as_ref().unwrap();
        assert_relative_eq!(rs[(0, 2)].abs(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(rs[(1, 3)].abs(), 2.0 * 2.0_f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(ra[(0, 1)].abs(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(rs[(2, 4)].abs(), c.c_s_minus.abs(), max_relative = 1e-9);
        assert_relative_eq!(rs[(2, 5)].abs(), c.c_s_plus.abs(), max_relative = 1e-9);
        assert_relative_eq!(ra[(1, 4)].abs(), c.c_a_plus.abs(), max_relative = 1e-9);
        assert_relative_eq!(ra[(1, 5)].abs(), c.c_a_minus.abs(), max_relative = 1e-9);
        // convention-independent ratio
        let ratio = (rs[(2, 5)] / rs[(2, 4)]).abs();
        assert!((ratio / (6.31 / 0.53) - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn swapping_relative_sign_exchanges_zero_patterns() {
        // d_A of the molecule equals d_S of the relabelled molecule, so the
        // two zero-patterns must be exact mirror images
        let p = reference();
        let es = eigen(&p);
        let d = dipole_matrices(&es, &p).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let mi = canonical_manifold(StateLabel::CANONICAL[i]);
                let mj = canonical_manifold(StateLabel::CANONICAL[j]);
                let s_zero = d.d_s[(i, j)].abs() < 1e-9;
                let a_zero = d.d_a[(i, j)].abs() < 1e-9;
                if mi.abs_diff(mj) == 1 {
                    assert!(
                        s_zero != a_zero,
                        "entry ({i},{j}) must be driven by exactly one port"
                    );
                } else {
                    assert!(
                        s_zero && a_zero,
                        "entry ({i},{j}) must be dark on both ports"
                    );
                }
            }
        }
    }

    #[test]
    fn transition_table_reference_values() {
        let p = reference();
        let es = eigen(&p);
        let d = dipole_matrices(&es, &p).unwrap();
        let table = transition_table(&es, &d).unwrap();
        assert_eq!(table.len(), 8);
        let ghz = 2.0 * std::f64::consts::PI * 1e9;
        let find = |from: StateLabel, to: StateLabel| {
            table
                .iter()
                .find(|t| t.from == from && t.to == to)
                .unwrap_or_else(|| panic!("missing {from}->{to}"))
        };
        let t = find(StateLabel::Ground, StateLabel::SingleOdd);
        assert_eq!(t.port, Port::A);
        assert!((t.frequency / ghz - 5.6981).abs() < 1e-3);
        let t = find(StateLabel::Ground, StateLabel::SingleEven);
        assert_eq!(t.port, Port::S);
        assert!((t.frequency / ghz - 6.2909).abs() < 1e-3);
        let t = find(StateLabel::SingleOdd, StateLabel::DoubleOdd);
        assert_eq!(t.port, Port::S);
        assert!((t.frequency / ghz - 6.0440).abs() < 1e-3);
        // no port-S transition between states of opposite symmetry
        let parity = |l: StateLabel| match l {
            StateLabel::SingleOdd | StateLabel::DoubleOdd => Symmetry::Odd,
            _ => Symmetry::Even,
        };
        for t in &table {
            match t.port {
                Port::S => assert_eq!(parity(t.from), parity(t.to)),
                Port::A => assert_ne!(parity(t.from), parity(t.to)),
            }
        }
    }
}
