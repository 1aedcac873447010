//! The central-spin Hamiltonian as a list of two-spin couplings.
//!
//! `J0 (S1 + S2)^2` is stored as `3 J0 / 2 + 2 J0 S1.S2`, so every term of the
//! model is a pair coupling `Jx Sx_a Sx_b + Jy Sy_a Sy_b + Jz Sz_a Sz_b` and
//! the remainder is a scalar offset.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{dimension_for_spins, inner_product, SpinIndex, StateVector};

/// Largest dimension for which a dense matrix or full eigendecomposition is
/// built (about 14 spins).
pub const DENSE_CAP: usize = 1 << 14;

/// Couplings of the central-spin model: `J0` between the central spins and
/// one `J_n` per bath spin.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub j0: f64,
    pub couplings: Vec<f64>,
}

impl ModelParams {
    pub fn uniform(bath: usize, j0: f64, j: f64) -> Self {
        ModelParams {
            j0,
            couplings: vec![j; bath],
        }
    }

    #[inline]
    pub fn bath_size(&self) -> usize {
        self.couplings.len()
    }

    pub fn num_spins(&self) -> usize {
        self.couplings.len() + 2
    }

    pub fn validate(&self) -> Result<()> {
        if !self.j0.is_finite() {
            return Err(Error::InvalidModel(format!("J0 = {} is not finite", self.j0)));
        }
        if let Some((n, j)) = self
            .couplings
            .iter()
            .enumerate()
            .find(|(_, j)| !j.is_finite())
        {
            return Err(Error::InvalidModel(format!(
                "bath coupling J_{} = {j} is not finite",
                n + 1
            )));
        }
        dimension_for_spins(self.num_spins())?;
        Ok(())
    }

    /// The common bath coupling, if all `J_n` are equal.
    pub fn uniform_coupling(&self) -> Option<f64> {
        let first = *self.couplings.first()?;
        self.couplings.iter().all(|&j| j == first).then_some(first)
    }
}

/// Spatial component of a spin operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// `jx Sx_a Sx_b + jy Sy_a Sy_b + jz Sz_a Sz_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub a: SpinIndex,
    pub b: SpinIndex,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl PairTerm {
    pub fn isotropic(a: usize, b: usize, j: f64) -> Self {
        PairTerm {
            a: SpinIndex(a),
            b: SpinIndex(b),
            jx: j,
            jy: j,
            jz: j,
        }
    }

    pub fn coupling(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.jx,
            Axis::Y => self.jy,
            Axis::Z => self.jz,
        }
    }

    /// The common coupling of an isotropic term.
    pub fn isotropic_coupling(&self) -> Option<f64> {
        (self.jx == self.jy && self.jy == self.jz).then_some(self.jx)
    }

    #[inline]
    pub(crate) fn flip_mask(&self) -> usize {
        self.a.mask() | self.b.mask()
    }
}

/// The Hamiltonian as pair terms plus a scalar offset.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSet {
    num_spins: usize,
    pair_terms: Vec<PairTerm>,
    offset: f64,
}

impl TermSet {
    pub fn new(num_spins: usize, pair_terms: Vec<PairTerm>, offset: f64) -> Result<Self> {
        dimension_for_spins(num_spins)?;
        let mut seen = HashSet::new();
        for t in &pair_terms {
            for site in [t.a, t.b] {
                if site.0 >= num_spins {
                    return Err(Error::SiteOutOfRange {
                        site: site.0,
                        num_spins,
                    });
                }
            }
            if t.a == t.b {
                return Err(Error::SameSite(t.a.0));
            }
            if !seen.insert((t.a.min(t.b), t.a.max(t.b))) {
                return Err(Error::DuplicatePair(t.a.0, t.b.0));
            }
            if !(t.jx.is_finite() && t.jy.is_finite() && t.jz.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "non-finite coupling on pair ({}, {})",
                    t.a.0, t.b.0
                )));
            }
        }
        if !offset.is_finite() {
            return Err(Error::InvalidModel("non-finite offset".into()));
        }
        Ok(TermSet {
            num_spins,
            pair_terms,
            offset,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.num_spins
    }

    pub fn pair_terms(&self) -> &[PairTerm] {
        &self.pair_terms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub(crate) fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        Ok(())
    }
}

/// Builds `J0 (S1+S2)^2 + sum_n J_n I_n.(S1+S2)`.
///
/// Term order: the central pair `(0, 1)` first, then `(s, 0), (s, 1)` for each
/// bath site `s = 2, 3, ...`.
pub fn build_model(params: &ModelParams) -> Result<TermSet> {
    params.validate()?;
    let mut terms = Vec::with_capacity(2 * params.bath_size() + 1);
    terms.push(PairTerm::isotropic(0, 1, 2.0 * params.j0));
    for (n, &j) in params.couplings.iter().enumerate() {
        let site = SpinIndex::bath(n + 1).0;
        terms.push(PairTerm::isotropic(site, 0, j));
        terms.push(PairTerm::isotropic(site, 1, j));
    }
    TermSet::new(params.num_spins(), terms, 1.5 * params.j0)
}

/// Diagonal matrix element of `sum jz Sz_a Sz_b + offset` on basis state `i`.
#[inline]
pub(crate) fn diagonal_element(terms: &TermSet, i: usize) -> f64 {
    let mut d = terms.offset;
    for t in &terms.pair_terms {
        let aligned = ((i >> t.a.0) ^ (i >> t.b.0)) & 1 == 0;
        d += if aligned { 0.25 * t.jz } else { -0.25 * t.jz };
    }
    d
}

/// Element `<i ^ mask| jx SxSx + jy SySy |i>`: the two flipped spins pick up
/// `(jx - jy)/4` if they were aligned and `(jx + jy)/4` otherwise.
#[inline]
fn flip_element(t: &PairTerm, i: usize) -> f64 {
    let aligned = ((i >> t.a.0) ^ (i >> t.b.0)) & 1 == 0;
    if aligned {
        0.25 * (t.jx - t.jy)
    } else {
        0.25 * (t.jx + t.jy)
    }
}

/// Matrix-free `H psi`, offset included.
pub fn apply(terms: &TermSet, state: &StateVector) -> Result<StateVector> {
    terms.check_state(state)?;
    let mut out = StateVector::zeros(terms.num_spins)?;
    apply_into(terms, state.amplitudes(), out.amplitudes_mut(), 0.0);
    Ok(out)
}

/// `out = (H - shift) psi` without allocating.
pub(crate) fn apply_into(terms: &TermSet, psi: &[C64], out: &mut [C64], shift: f64) {
    debug_assert_eq!(psi.len(), out.len());
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = psi[i] * (diagonal_element(terms, i) - shift);
        for t in &terms.pair_terms {
            // Flip elements are symmetric in i <-> i ^ mask, so gather.
            let j = i ^ t.flip_mask();
            acc += psi[j] * flip_element(t, j);
        }
        *o = acc;
    }
}

/// Dense `D x D` matrix of the Hamiltonian, built from explicit single-spin
/// operator matrices.
pub fn dense_matrix(terms: &TermSet) -> Result<DMatrix<C64>> {
    dense_matrix_with_cap(terms, DENSE_CAP)
}

pub fn dense_matrix_with_cap(terms: &TermSet, cap: usize) -> Result<DMatrix<C64>> {
    let dim = terms.dim();
    if dim > cap {
        return Err(Error::DenseCapExceeded { dim, cap });
    }
    let zero = C64::new(0.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);
    // Single-spin matrices indexed [out_bit][in_bit], bit 1 = up.
    let single = |axis: Axis| -> [[C64; 2]; 2] {
        match axis {
            Axis::X => [[zero, half], [half, zero]],
            // Sy|up> = (i/2)|down>, Sy|down> = (-i/2)|up>.
            Axis::Y => [[zero, ihalf], [-ihalf, zero]],
            Axis::Z => [[-half, zero], [zero, half]],
        }
    };

    let mut h = DMatrix::<C64>::from_diagonal_element(dim, dim, C64::new(terms.offset, 0.0));
    for t in &terms.pair_terms {
        for axis in Axis::ALL {
            let j = t.coupling(axis);
            if j == 0.0 {
                continue;
            }
            let m = single(axis);
            let (ma, mb) = (t.a.mask(), t.b.mask());
            for col in 0..dim {
                let ba = (col >> t.a.0) & 1;
                let bb = (col >> t.b.0) & 1;
                let rest = col & !(ma | mb);
                for oa in 0..2 {
                    for ob in 0..2 {
                        let v = m[oa][ba] * m[ob][bb];
                        if v != zero {
                            let row = rest | (oa << t.a.0) | (ob << t.b.0);
                            h[(row, col)] += v * j;
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// `sum_terms (|jx| + |jy| + |jz|) / 4`, an upper bound on `||H - offset||`.
pub fn norm_bound(terms: &TermSet) -> f64 {
    terms
        .pair_terms
        .iter()
        .map(|t| 0.25 * (t.jx.abs() + t.jy.abs() + t.jz.abs()))
        .sum()
}

/// `Re <psi|H|psi> / <psi|psi>`.
pub fn energy(terms: &TermSet, state: &StateVector) -> Result<f64> {
    let h_psi = apply(terms, state)?;
    let e = inner_product(state, &h_psi)? / state.norm_sqr();
    debug_assert!(
        e.im.abs() < 1e-12 * (1.0 + e.re.abs()),
        "energy has imaginary part {}",
        e.im
    );
    Ok(e.re)
}
