//! Two-time correlation functions via the quantum regression theorem.
//!
//! For a Markovian master equation with propagator Λ_τ, the same
//! generator that evolves ρ also evolves conditioned operators:
//!
//! ```text
//! ⟨A(t) B(t′)⟩ = Tr[ B Λ_{t′−t}( ρ(t) A ) ]   for t′ ≥ t
//! ⟨A(t) B(t′)⟩ = Tr[ A Λ_{t−t′}( B ρ(t′) ) ]  for t′ <  t
//! ```
//!
//! Output-field correlators follow through input–output theory,
//! a_out = √Γ σ with σ the transition's lowering operator, so the caller
//! multiplies by the appropriate √Γ factors.

use nalgebra::DMatrix;

use super::lindblad::Liouvillian;
use super::{trace_product, UniformGrid};
use crate::error::{Error, Result};
use crate::{Real, C};

/// G[(i, j)] = ⟨A(t_i) B(t_j)⟩ on a uniform grid, starting from ρ0 at
/// the grid origin, with the generator held fixed over the window.
pub fn two_time_correlation<T: Real>(
    liouv: &Liouvillian<T>,
    rho0: &DMatrix<C<T>>,
    op_a: &DMatrix<C<T>>,
    op_b: &DMatrix<C<T>>,
    grid: &UniformGrid<T>,
) -> Result<DMatrix<C<T>>> {
    let d = liouv.dim();
    if rho0.nrows() != d || op_a.nrows() != d || op_b.nrows() != d {
        return Err(Error::InvalidParameter {
            name: "operators",
            reason: "dimension mismatch with the generator".into(),
        });
    }
    let n = grid.n;
    let step = liouv.propagator(grid.dt);

    // diagonal of states ρ(t_i)
    let mut states = Vec::with_capacity(n);
    states.push(rho0.clone());
    for i in 1..n {
        let next = step.apply(&states[i - 1]);
        states.push(next);
    }

    let mut g = DMatrix::zeros(n, n);
    // upper triangle including the diagonal: rows of conditioned ρ(t_i)·A
    for i in 0..n {
        let mut m = &states[i] * op_a;
        g[(i, i)] = trace_product(op_b, &m);
        for j in (i + 1)..n {
            m = step.apply(&m);
            g[(i, j)] = trace_product(op_b, &m);
        }
    }
    // strict lower triangle: columns of conditioned B·ρ(t_j)
    for j in 0..n {
        let mut m = op_b * &states[j];
        for i in (j + 1)..n {
            m = step.apply(&m);
            g[(i, j)] = trace_product(op_a, &m);
        }
    }
    Ok(g)
}
