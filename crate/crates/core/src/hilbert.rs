//! Pure states of `L + 2` spin-1/2 particles.
//!
//! Basis convention: bit `s` of a basis index holds the z-projection of spin
//! `s`, with `1` meaning up (+1/2). Sites 0 and 1 are the central spins, sites
//! `2..L+2` are the bath spins.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Largest supported spin count; keeps basis indices and amplitude buffers
/// addressable on 64-bit hosts.
pub const MAX_SPINS: usize = 40;

/// Hilbert-space dimension `2^(L+2)` for a bath of `bath` spins.
pub fn dimension(bath: usize) -> Result<usize> {
    let num_spins = bath
        .checked_add(2)
        .ok_or(Error::SizeOverflow { num_spins: usize::MAX })?;
    dimension_for_spins(num_spins)
}

pub(crate) fn dimension_for_spins(num_spins: usize) -> Result<usize> {
    if num_spins > MAX_SPINS {
        return Err(Error::SizeOverflow { num_spins });
    }
    1usize
        .checked_shl(num_spins as u32)
        .ok_or(Error::SizeOverflow { num_spins })
}

/// A spin site; 0 and 1 are the central pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinIndex(pub usize);

impl SpinIndex {
    pub const CENTRAL_1: SpinIndex = SpinIndex(0);
    pub const CENTRAL_2: SpinIndex = SpinIndex(1);

    /// Site of the `n`-th bath spin, `n` counted from 1.
    pub fn bath(n: usize) -> SpinIndex {
        assert!(n >= 1, "bath spins are numbered from 1");
        SpinIndex(n + 1)
    }

    #[inline]
    pub fn mask(self) -> usize {
        1 << self.0
    }
}

/// Complex amplitudes over the `2^num_spins` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    num_spins: usize,
}

impl StateVector {
    pub fn zeros(num_spins: usize) -> Result<Self> {
        let dim = dimension_for_spins(num_spins)?;
        Ok(StateVector {
            amplitudes: vec![C64::new(0.0, 0.0); dim],
            num_spins,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_spins: usize, index: usize) -> Result<Self> {
        let mut s = Self::zeros(num_spins)?;
        if index >= s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                actual: index + 1,
            });
        }
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps an amplitude buffer whose length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidModel(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let num_spins = dim.trailing_zeros() as usize;
        if num_spins > MAX_SPINS {
            return Err(Error::SizeOverflow { num_spins });
        }
        Ok(StateVector {
            amplitudes,
            num_spins,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, factor: C64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// Returns `self` scaled to unit norm together with the original norm.
    pub fn normalized(&self) -> (StateVector, f64) {
        let n = self.norm();
        let mut out = self.clone();
        if n > 0.0 {
            out.scale(C64::new(1.0 / n, 0.0));
        }
        (out, n)
    }

    pub(crate) fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_site(&self, site: SpinIndex) -> Result<()> {
        if site.0 >= self.num_spins {
            return Err(Error::SiteOutOfRange {
                site: site.0,
                num_spins: self.num_spins,
            });
        }
        Ok(())
    }
}

/// Product state `|up>_0 |down>_1 (x)_n |chi_n>` with Haar-random bath spins.
///
/// Each bath spin is `cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>` with
/// `cos(theta)` uniform on `[-1, 1]` and `phi` uniform on `[0, 2 pi)`, drawn
/// in site order from a ChaCha20 stream seeded with `seed`.
pub fn prepare_initial_state(bath: usize, seed: u64) -> Result<StateVector> {
    let num_spins = bath + 2;
    let mut state = StateVector::zeros(num_spins)?;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let spinors: Vec<(C64, C64)> = (0..bath)
        .map(|_| {
            let cos_theta: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let phi: f64 = 2.0 * PI * rng.random::<f64>();
            let half = 0.5 * cos_theta.clamp(-1.0, 1.0).acos();
            let up = C64::new(half.cos(), 0.0);
            let down = C64::from_polar(half.sin(), phi);
            (up, down)
        })
        .collect();

    // Central spins fixed at bit0 = 1, bit1 = 0; every other index stays zero.
    let central = SpinIndex::CENTRAL_1.mask();
    for bath_bits in 0..(1usize << bath) {
        let mut amp = C64::new(1.0, 0.0);
        for (n, (up, down)) in spinors.iter().enumerate() {
            amp *= if bath_bits >> n & 1 == 1 { *up } else { *down };
        }
        state.amplitudes[central | (bath_bits << 2)] = amp;
    }
    Ok(state)
}

/// `<S^z>` of one site, normalized by `<psi|psi>`.
pub fn measure_sz(state: &StateVector, site: SpinIndex) -> Result<f64> {
    state.check_site(site)?;
    let mask = site.mask();
    let weighted: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = a.norm_sqr();
            if i & mask != 0 {
                0.5 * p
            } else {
                -0.5 * p
            }
        })
        .sum();
    Ok(weighted / state.norm_sqr())
}

/// `<S^z_total>` summed over all sites, normalized by `<psi|psi>`.
pub fn total_sz(state: &StateVector) -> f64 {
    let n = state.num_spins as i64;
    let weighted: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let up = i.count_ones() as i64;
            0.5 * (2 * up - n) as f64 * a.norm_sqr()
        })
        .sum();
    weighted / state.norm_sqr()
}

/// `<a|b> = sum_i conj(a_i) b_i`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.check_same_dim(b)?;
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}
