//! Suzuki product formulas with pair and XYZ splittings.
//!
//! Every factor is the exact exponential of a two-spin operator. In the
//! basis of the two affected bits such an operator is block diagonal: one
//! 2x2 block on `{|up up>, |down down>}` and one on `{|up down>, |down up>}`,
//! each of the form `d I + f sigma_x`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Axis, PairTerm, TermSet};
use crate::hilbert::{SpinIndex, StateVector};

/// Fourth-order coefficient `1 / (4 - 4^(1/3))`.
pub fn u4_coefficient() -> f64 {
    1.0 / (4.0 - 4f64.cbrt())
}

/// How the Hamiltonian is split into exactly exponentiable pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decomposition {
    /// One factor per spin pair.
    Pair,
    /// One factor per pair and spin component, grouped x, then y, then z.
    Xyz,
}

/// `d I + f sigma_x` on a two-state block.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Block {
    d: f64,
    f: f64,
}

/// A two-spin operator split into its aligned and anti-aligned blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairOperator {
    a: usize,
    b: usize,
    aligned: Block,
    anti: Block,
}

impl PairOperator {
    fn new(a: SpinIndex, b: SpinIndex, aligned: Block, anti: Block) -> Result<Self> {
        if a == b {
            return Err(Error::SameSite(a.0));
        }
        Ok(PairOperator {
            a: a.0,
            b: b.0,
            aligned,
            anti,
        })
    }

    fn from_term(t: &PairTerm) -> Result<Self> {
        Self::new(
            t.a,
            t.b,
            Block {
                d: 0.25 * t.jz,
                f: 0.25 * (t.jx - t.jy),
            },
            Block {
                d: -0.25 * t.jz,
                f: 0.25 * (t.jx + t.jy),
            },
        )
    }

    fn from_axis(a: SpinIndex, b: SpinIndex, j: f64, axis: Axis) -> Result<Self> {
        let q = 0.25 * j;
        let (aligned, anti) = match axis {
            Axis::X => (Block { d: 0.0, f: q }, Block { d: 0.0, f: q }),
            Axis::Y => (Block { d: 0.0, f: -q }, Block { d: 0.0, f: q }),
            Axis::Z => (Block { d: q, f: 0.0 }, Block { d: -q, f: 0.0 }),
        };
        Self::new(a, b, aligned, anti)
    }

    /// Applies `exp(-i tau op)` in place.
    fn exp_apply(&self, psi: &mut [C64], tau: f64) {
        if tau == 0.0 {
            return;
        }
        let (g_al, h_al) = block_exp(self.aligned, tau);
        let (g_an, h_an) = block_exp(self.anti, tau);
        let ma = 1usize << self.a;
        let mb = 1usize << self.b;
        let both = ma | mb;
        for base in 0..psi.len() {
            if base & both != 0 {
                continue;
            }
            let (i00, i11) = (base, base | both);
            let (i10, i01) = (base | ma, base | mb);

            let (u, v) = (psi[i11], psi[i00]);
            psi[i11] = g_al * u + h_al * v;
            psi[i00] = h_al * u + g_al * v;

            let (u, v) = (psi[i10], psi[i01]);
            psi[i10] = g_an * u + h_an * v;
            psi[i01] = h_an * u + g_an * v;
        }
    }
}

/// `exp(-i tau (d I + f sigma_x)) = g I + h sigma_x`.
#[inline]
fn block_exp(block: Block, tau: f64) -> (C64, C64) {
    let phase = C64::from_polar(1.0, -tau * block.d);
    let (s, c) = (tau * block.f).sin_cos();
    (phase * c, phase * C64::new(0.0, -s))
}

/// Applies `exp(-i tau J S_a.S_b)` in place: the triplet picks up
/// `exp(-i tau J / 4)` and the singlet `exp(3 i tau J / 4)`.
pub fn pair_factor_apply(
    state: &mut StateVector,
    a: SpinIndex,
    b: SpinIndex,
    j: f64,
    tau: f64,
) -> Result<()> {
    state.check_site(a)?;
    state.check_site(b)?;
    let op = PairOperator::from_term(&PairTerm {
        a,
        b,
        jx: j,
        jy: j,
        jz: j,
    })?;
    op.exp_apply(state.amplitudes_mut(), tau);
    Ok(())
}

/// Applies `exp(-i tau J S^axis_a S^axis_b)` in place.
pub fn axis_factor_apply(
    state: &mut StateVector,
    a: SpinIndex,
    b: SpinIndex,
    j: f64,
    axis: Axis,
    tau: f64,
) -> Result<()> {
    state.check_site(a)?;
    state.check_site(b)?;
    PairOperator::from_axis(a, b, j, axis)?.exp_apply(state.amplitudes_mut(), tau);
    Ok(())
}

/// Precomputed factor list of one decomposition of a [`TermSet`].
#[derive(Debug, Clone)]
pub struct SplitOperator {
    factors: Vec<PairOperator>,
    offset: f64,
    dim: usize,
}

impl SplitOperator {
    /// Factor order: pair terms in [`TermSet`] order; for XYZ all x factors,
    /// then all y, then all z, each in pair order.
    pub fn new(terms: &TermSet, decomposition: Decomposition) -> Result<Self> {
        let factors = match decomposition {
            Decomposition::Pair => terms
                .pair_terms()
                .iter()
                .map(PairOperator::from_term)
                .collect::<Result<Vec<_>>>()?,
            Decomposition::Xyz => {
                let mut out = Vec::with_capacity(3 * terms.pair_terms().len());
                for axis in Axis::ALL {
                    for t in terms.pair_terms() {
                        out.push(PairOperator::from_axis(t.a, t.b, t.coupling(axis), axis)?);
                    }
                }
                out
            }
        };
        Ok(SplitOperator {
            factors,
            offset: terms.offset(),
            dim: terms.dim(),
        })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: state.dim(),
            });
        }
        Ok(())
    }

    /// Symmetric second-order step; the two middle half steps are merged.
    fn u2_in_place(&self, psi: &mut [C64], tau: f64) {
        let Some((last, rest)) = self.factors.split_last() else {
            scale_phase(psi, tau * self.offset);
            return;
        };
        for f in rest {
            f.exp_apply(psi, 0.5 * tau);
        }
        last.exp_apply(psi, tau);
        for f in rest.iter().rev() {
            f.exp_apply(psi, 0.5 * tau);
        }
        scale_phase(psi, tau * self.offset);
    }

    fn u4_in_place(&self, psi: &mut [C64], tau: f64) {
        let a = u4_coefficient();
        self.u2_in_place(psi, a * tau);
        self.u2_in_place(psi, a * tau);
        self.u2_in_place(psi, (1.0 - 4.0 * a) * tau);
        self.u2_in_place(psi, a * tau);
        self.u2_in_place(psi, a * tau);
    }

    pub fn u2_step(&self, state: &mut StateVector, tau: f64) -> Result<()> {
        self.check(state)?;
        self.u2_in_place(state.amplitudes_mut(), tau);
        Ok(())
    }

    pub fn u4_step(&self, state: &mut StateVector, tau: f64) -> Result<()> {
        self.check(state)?;
        self.u4_in_place(state.amplitudes_mut(), tau);
        Ok(())
    }
}

fn scale_phase(psi: &mut [C64], angle: f64) {
    if angle == 0.0 {
        return;
    }
    let p = C64::from_polar(1.0, -angle);
    for x in psi {
        *x *= p;
    }
}

/// One second-order step `U2(tau)` including the offset phase.
pub fn u2_step(
    terms: &TermSet,
    decomposition: Decomposition,
    state: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    let mut out = state.clone();
    SplitOperator::new(terms, decomposition)?.u2_step(&mut out, tau)?;
    Ok(out)
}

/// One fourth-order step `U4(tau)` built from five `U2` substeps.
pub fn u4_step(
    terms: &TermSet,
    decomposition: Decomposition,
    state: &StateVector,
    tau: f64,
) -> Result<StateVector> {
    let mut out = state.clone();
    SplitOperator::new(terms, decomposition)?.u4_step(&mut out, tau)?;
    Ok(out)
}
