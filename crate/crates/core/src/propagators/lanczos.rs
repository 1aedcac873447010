//! Short iterative Lanczos propagation.
//!
//! `exp(-i tau H) psi` is approximated by `exp(-i tau P H P) psi`, where `P`
//! projects on the Krylov space spanned by `psi, H psi, ..., H^(N-1) psi`.
//! The Lanczos vectors are generated with the plain three-term recurrence,
//! without reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{apply_into, norm_bound, TermSet};
use crate::hilbert::StateVector;

/// Relative residual below which the Krylov space is taken to be invariant.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-12;

/// Overlap `|<q_1, q_N>|` above which orthogonality is reported as lost.
pub const ORTHOGONALITY_WARNING: f64 = 1e-6;

/// What happened inside one Lanczos step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosInfo {
    /// Krylov dimension actually used (smaller than requested on breakdown).
    pub krylov_dim: usize,
    pub breakdown: bool,
    /// `|<q_1, q_m>|` for the last Lanczos vector `q_m`.
    pub orthogonality_loss: f64,
}

impl LanczosInfo {
    pub fn orthogonality_degraded(&self) -> bool {
        self.orthogonality_loss > ORTHOGONALITY_WARNING
    }
}

/// One step `exp(-i tau H) psi` in an `krylov_n`-dimensional Krylov space.
pub fn sil_step(
    terms: &TermSet,
    state: &StateVector,
    tau: f64,
    krylov_n: usize,
) -> Result<StateVector> {
    sil_step_with_info(terms, state, tau, krylov_n).map(|(s, _)| s)
}

pub fn sil_step_with_info(
    terms: &TermSet,
    state: &StateVector,
    tau: f64,
    krylov_n: usize,
) -> Result<(StateVector, LanczosInfo)> {
    terms.check_state(state)?;
    let dim = state.dim();
    if krylov_n < 2 || krylov_n > dim {
        return Err(Error::InvalidPropagator(format!(
            "Krylov dimension {krylov_n} must lie in [2, {dim}]"
        )));
    }
    let phase = C64::from_polar(1.0, -tau * terms.offset());
    let (q0, scale) = state.normalized();
    let radius = norm_bound(terms);
    if scale == 0.0 || radius == 0.0 {
        let mut out = state.clone();
        out.scale(phase);
        return Ok((
            out,
            LanczosInfo {
                krylov_dim: 1,
                breakdown: true,
                orthogonality_loss: 0.0,
            },
        ));
    }

    let offset = terms.offset();
    let threshold = BREAKDOWN_TOLERANCE * radius;
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(krylov_n);
    basis.push(q0.into_amplitudes());
    let mut alpha = Vec::with_capacity(krylov_n);
    let mut beta: Vec<f64> = Vec::with_capacity(krylov_n);
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut breakdown = false;

    loop {
        let j = basis.len() - 1;
        apply_into(terms, &basis[j], &mut w, offset);
        let a: f64 = basis[j]
            .iter()
            .zip(&w)
            .map(|(q, x)| (q.conj() * x).re)
            .sum();
        alpha.push(a);
        for (x, q) in w.iter_mut().zip(&basis[j]) {
            *x -= q * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, q) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= q * b;
            }
        }
        if basis.len() == krylov_n {
            break;
        }
        let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if b < threshold {
            breakdown = true;
            break;
        }
        beta.push(b);
        let inv = 1.0 / b;
        basis.push(w.iter().map(|x| x * inv).collect());
    }

    let m = basis.len();
    let orthogonality_loss = if m > 1 {
        basis[0]
            .iter()
            .zip(&basis[m - 1])
            .map(|(x, y)| x.conj() * y)
            .sum::<C64>()
            .norm()
    } else {
        0.0
    };

    let mut t = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        t[(k, k)] = alpha[k];
        if k + 1 < m {
            t[(k, k + 1)] = beta[k];
            t[(k + 1, k)] = beta[k];
        }
    }
    let eig = SymmetricEigen::new(t);
    // y = W exp(-i tau Theta) W^T e_1
    let weights: Vec<C64> = (0..m)
        .map(|k| C64::from_polar(eig.eigenvectors[(0, k)], -tau * eig.eigenvalues[k]))
        .collect();
    let coeffs: Vec<C64> = (0..m)
        .map(|r| {
            (0..m)
                .map(|k| weights[k] * eig.eigenvectors[(r, k)])
                .sum::<C64>()
                * phase
                * scale
        })
        .collect();

    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (q, c) in basis.iter().zip(&coeffs) {
        for (o, x) in out.iter_mut().zip(q) {
            *o += x * c;
        }
    }
    Ok((
        StateVector::from_amplitudes(out)?,
        LanczosInfo {
            krylov_dim: m,
            breakdown,
            orthogonality_loss,
        },
    ))
}
