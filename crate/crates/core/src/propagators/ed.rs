//! Exact propagation through the full eigendecomposition of `H`.
//!
//! The model matrix is real symmetric in the `S^z` basis and splits into
//! blocks that no term connects (the total-`S^z` sectors for the central-spin
//! model). Each block is diagonalized on its own; together the blocks form the
//! complete `D x D` eigenvector matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{diagonal_element, TermSet, DENSE_CAP};
use crate::hilbert::StateVector;

#[derive(Debug, Clone)]
struct EdBlock {
    indices: Vec<usize>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Eigenvalues and eigenvectors of a [`TermSet`], computed once and reused
/// for any number of propagations.
#[derive(Debug, Clone)]
pub struct EdCache {
    dim: usize,
    blocks: Vec<EdBlock>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl EdCache {
    pub fn build(terms: &TermSet) -> Result<Self> {
        Self::build_with_cap(terms, DENSE_CAP)
    }

    pub fn build_with_cap(terms: &TermSet, cap: usize) -> Result<Self> {
        let dim = terms.dim();
        if dim > cap {
            return Err(Error::DenseCapExceeded { dim, cap });
        }

        // Off-diagonal couplings: (mask, element on aligned pair, on anti pair).
        let flips: Vec<(usize, usize, usize, f64, f64)> = terms
            .pair_terms()
            .iter()
            .map(|t| {
                (
                    t.a.0,
                    t.b.0,
                    t.flip_mask(),
                    0.25 * (t.jx - t.jy),
                    0.25 * (t.jx + t.jy),
                )
            })
            .collect();
        let element = |i: usize, a: usize, b: usize, al: f64, an: f64| {
            if ((i >> a) ^ (i >> b)) & 1 == 0 {
                al
            } else {
                an
            }
        };

        let mut parent: Vec<usize> = (0..dim).collect();
        for i in 0..dim {
            for &(a, b, mask, al, an) in &flips {
                if element(i, a, b, al, an) != 0.0 {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, i ^ mask));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_of = vec![usize::MAX; dim];
        for i in 0..dim {
            let r = find(&mut parent, i);
            if group_of[r] == usize::MAX {
                group_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[group_of[r]].push(i);
        }

        let mut position = vec![0usize; dim];
        let blocks = groups
            .into_iter()
            .map(|indices| {
                for (p, &i) in indices.iter().enumerate() {
                    position[i] = p;
                }
                let n = indices.len();
                let mut h = DMatrix::<f64>::zeros(n, n);
                for (col, &i) in indices.iter().enumerate() {
                    h[(col, col)] = diagonal_element(terms, i);
                    for &(a, b, mask, al, an) in &flips {
                        let v = element(i, a, b, al, an);
                        if v != 0.0 {
                            h[(position[i ^ mask], col)] += v;
                        }
                    }
                }
                let eig = SymmetricEigen::new(h);
                EdBlock {
                    indices,
                    eigenvalues: eig.eigenvalues,
                    eigenvectors: eig.eigenvectors,
                }
            })
            .collect();
        Ok(EdCache { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sizes of the independently diagonalized blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// All eigenvalues, in the column order of [`EdCache::eigenvectors`].
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .collect()
    }

    /// The full `D x D` eigenvector matrix (columns are eigenvectors).
    pub fn eigenvectors(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.dim, self.dim);
        let mut col = 0;
        for b in &self.blocks {
            for k in 0..b.indices.len() {
                for (r, &i) in b.indices.iter().enumerate() {
                    v[(i, col)] = b.eigenvectors[(r, k)];
                }
                col += 1;
            }
        }
        v
    }

    /// Eigenvector `k` as a state, in [`EdCache::eigenvalues`] order.
    pub fn eigenstate(&self, k: usize) -> Result<StateVector> {
        let mut rest = k;
        for b in &self.blocks {
            let n = b.indices.len();
            if rest < n {
                let mut amps = vec![C64::new(0.0, 0.0); self.dim];
                for (r, &i) in b.indices.iter().enumerate() {
                    amps[i] = C64::new(b.eigenvectors[(r, rest)], 0.0);
                }
                return StateVector::from_amplitudes(amps);
            }
            rest -= n;
        }
        Err(Error::DimensionMismatch {
            expected: self.dim,
            actual: k + 1,
        })
    }

    /// `V diag(exp(-i t E)) V^T psi`.
    pub fn propagate(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: state.dim(),
            });
        }
        let psi = state.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for b in &self.blocks {
            let re = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i].re));
            let im = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i].im));
            let c_re = b.eigenvectors.tr_mul(&re);
            let c_im = b.eigenvectors.tr_mul(&im);
            let mut p_re = DVector::zeros(b.indices.len());
            let mut p_im = DVector::zeros(b.indices.len());
            for k in 0..b.indices.len() {
                let c = C64::new(c_re[k], c_im[k]) * C64::from_polar(1.0, -t * b.eigenvalues[k]);
                p_re[k] = c.re;
                p_im[k] = c.im;
            }
            let o_re = &b.eigenvectors * p_re;
            let o_im = &b.eigenvectors * p_im;
            for (r, &i) in b.indices.iter().enumerate() {
                out[i] = C64::new(o_re[r], o_im[r]);
            }
        }
        StateVector::from_amplitudes(out)
    }
}

/// `exp(-i t H) psi` from a prebuilt [`EdCache`].
pub fn ed_propagate(cache: &EdCache, state: &StateVector, t: f64) -> Result<StateVector> {
    cache.propagate(state, t)
}
