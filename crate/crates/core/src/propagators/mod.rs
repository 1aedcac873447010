//! Time evolution behind a single interface.
//!
//! Seven algorithms are available: exact diagonalization, the second- and
//! fourth-order Suzuki formulas with pair or XYZ splitting, the Chebyshev
//! expansion and short iterative Lanczos. All of them apply the scalar
//! offset of the [`TermSet`] as the same global phase `exp(-i t offset)`, so
//! their states can be compared amplitude by amplitude.

pub mod chebyshev;
pub mod ed;
pub mod lanczos;
pub mod suzuki;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use chebyshev::{bessel_coefficients, chebyshev_propagate};
pub use ed::{ed_propagate, EdCache};
pub use lanczos::sil_step;
pub use suzuki::{axis_factor_apply, pair_factor_apply, u2_step, u4_step, Decomposition, SplitOperator};

use crate::error::{Error, Result};
use crate::hamiltonian::{energy, TermSet};
use crate::hilbert::{measure_sz, total_sz, SpinIndex, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    Ed,
    SpPairU2,
    SpPairU4,
    SpXyzU2,
    SpXyzU4,
    Cp,
    Sil,
}

impl PropagatorKind {
    pub const ALL: [PropagatorKind; 7] = [
        PropagatorKind::Ed,
        PropagatorKind::SpPairU2,
        PropagatorKind::SpPairU4,
        PropagatorKind::SpXyzU2,
        PropagatorKind::SpXyzU4,
        PropagatorKind::Cp,
        PropagatorKind::Sil,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropagatorKind::Ed => "ED",
            PropagatorKind::SpPairU2 => "SP_PAIR_U2",
            PropagatorKind::SpPairU4 => "SP_PAIR_U4",
            PropagatorKind::SpXyzU2 => "SP_XYZ_U2",
            PropagatorKind::SpXyzU4 => "SP_XYZ_U4",
            PropagatorKind::Cp => "CP",
            PropagatorKind::Sil => "SIL",
        }
    }

    fn split(self) -> Option<(Decomposition, Order)> {
        match self {
            PropagatorKind::SpPairU2 => Some((Decomposition::Pair, Order::Second)),
            PropagatorKind::SpPairU4 => Some((Decomposition::Pair, Order::Fourth)),
            PropagatorKind::SpXyzU2 => Some((Decomposition::Xyz, Order::Second)),
            PropagatorKind::SpXyzU4 => Some((Decomposition::Xyz, Order::Fourth)),
            _ => None,
        }
    }

    pub fn is_suzuki(self) -> bool {
        self.split().is_some()
    }
}

impl FromStr for PropagatorKind {
    type Err = Error;

    /// Accepts the canonical names and the table labels, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        let kind = match key.as_str() {
            "ED" => PropagatorKind::Ed,
            "SPPAIRU2" => PropagatorKind::SpPairU2,
            "SPPAIRU4" => PropagatorKind::SpPairU4,
            "SPXYZU2" => PropagatorKind::SpXyzU2,
            "SPXYZU4" => PropagatorKind::SpXyzU4,
            "CP" => PropagatorKind::Cp,
            "SIL" => PropagatorKind::Sil,
            _ => {
                return Err(Error::InvalidPropagator(format!("unknown algorithm {s:?}")));
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Second,
    Fourth,
}

/// How Chebyshev runs reach intermediate sample times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChebyshevSampling {
    /// Leap from the previous sample to the next one.
    #[default]
    Successive,
    /// Leap from the initial state straight to every sample time.
    Independent,
}

/// Algorithm choice with its parameters.
///
/// `tau` is the split step for Suzuki and Lanczos and the sampling interval
/// unit for ED and Chebyshev.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    pub kind: PropagatorKind,
    pub tau: f64,
    pub krylov_n: usize,
    pub cp_sampling: ChebyshevSampling,
}

impl PropagatorSpec {
    pub const DEFAULT_TAU: f64 = 0.05;
    pub const DEFAULT_KRYLOV_N: usize = 5;

    pub fn new(kind: PropagatorKind, tau: f64) -> Self {
        PropagatorSpec {
            kind,
            tau,
            krylov_n: Self::DEFAULT_KRYLOV_N,
            cp_sampling: ChebyshevSampling::default(),
        }
    }

    pub fn sil(tau: f64, krylov_n: usize) -> Self {
        PropagatorSpec {
            krylov_n,
            ..Self::new(PropagatorKind::Sil, tau)
        }
    }

    /// Row label in the comparison table, e.g. `SP-Pair(U4)` or `SIL(10)`.
    pub fn label(&self) -> String {
        match self.kind {
            PropagatorKind::Ed => "ED".into(),
            PropagatorKind::SpPairU2 => "SP-Pair(U2)".into(),
            PropagatorKind::SpPairU4 => "SP-Pair(U4)".into(),
            PropagatorKind::SpXyzU2 => "SP-XYZ(U2)".into(),
            PropagatorKind::SpXyzU4 => "SP-XYZ(U4)".into(),
            PropagatorKind::Cp => "CP".into(),
            PropagatorKind::Sil => format!("SIL({})", self.krylov_n),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidPropagator(format!(
                "{}: tau must be positive, got {}",
                self.label(),
                self.tau
            )));
        }
        if self.kind == PropagatorKind::Sil && (self.krylov_n < 2 || self.krylov_n > dim) {
            return Err(Error::InvalidPropagator(format!(
                "{}: Krylov dimension must lie in [2, {dim}]",
                self.label()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PropagatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A propagator bound to one Hamiltonian, holding any precomputed data.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    spec: PropagatorSpec,
    terms: &'a TermSet,
    ed: Option<Arc<EdCache>>,
    split: Option<SplitOperator>,
}

impl<'a> Propagator<'a> {
    pub fn new(spec: PropagatorSpec, terms: &'a TermSet) -> Result<Self> {
        Self::with_cache(spec, terms, None)
    }

    /// Like [`Propagator::new`] but reuses an eigendecomposition for ED.
    pub fn with_cache(
        spec: PropagatorSpec,
        terms: &'a TermSet,
        cache: Option<Arc<EdCache>>,
    ) -> Result<Self> {
        spec.validate(terms.dim())?;
        let ed = match spec.kind {
            PropagatorKind::Ed => match cache {
                Some(c) if c.dim() == terms.dim() => Some(c),
                Some(c) => {
                    return Err(Error::DimensionMismatch {
                        expected: terms.dim(),
                        actual: c.dim(),
                    })
                }
                None => Some(Arc::new(EdCache::build(terms)?)),
            },
            _ => None,
        };
        let split = match spec.kind.split() {
            Some((d, _)) => Some(SplitOperator::new(terms, d)?),
            None => None,
        };
        Ok(Propagator {
            spec,
            terms,
            ed,
            split,
        })
    }

    pub fn spec(&self) -> &PropagatorSpec {
        &self.spec
    }

    pub fn ed_cache(&self) -> Option<&Arc<EdCache>> {
        self.ed.as_ref()
    }

    /// Number of `tau` steps used to cover `duration`; the step is shrunk
    /// uniformly when `duration` is not a multiple of `tau`.
    fn step_count(&self, duration: f64) -> usize {
        let ratio = duration / self.spec.tau;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Advances `state` by `duration >= 0`.
    pub fn evolve(&self, state: &StateVector, duration: f64) -> Result<StateVector> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidPropagator(format!(
                "duration must be finite and >= 0, got {duration}"
            )));
        }
        self.terms.check_state(state)?;
        if duration == 0.0 {
            return Ok(state.clone());
        }
        match self.spec.kind {
            PropagatorKind::Ed => self.ed.as_ref().expect("ED cache").propagate(state, duration),
            PropagatorKind::Cp => chebyshev_propagate(self.terms, state, duration),
            PropagatorKind::Sil => {
                let steps = self.step_count(duration);
                let tau = duration / steps as f64;
                let mut s = state.clone();
                for _ in 0..steps {
                    s = sil_step(self.terms, &s, tau, self.spec.krylov_n)?;
                }
                Ok(s)
            }
            kind => {
                let (_, order) = kind.split().expect("Suzuki kind");
                let split = self.split.as_ref().expect("split operator");
                let steps = self.step_count(duration);
                let tau = duration / steps as f64;
                let mut s = state.clone();
                for _ in 0..steps {
                    match order {
                        Order::Second => split.u2_step(&mut s, tau)?,
                        Order::Fourth => split.u4_step(&mut s, tau)?,
                    }
                }
                Ok(s)
            }
        }
    }
}

/// Observables at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub sz1: f64,
    pub sz2: f64,
    pub sz_total: f64,
    pub norm: f64,
    pub energy: f64,
}

impl TrajectoryRecord {
    pub fn measure(terms: &TermSet, state: &StateVector, t: f64) -> Result<Self> {
        Ok(TrajectoryRecord {
            t,
            sz1: measure_sz(state, SpinIndex::CENTRAL_1)?,
            sz2: measure_sz(state, SpinIndex::CENTRAL_2)?,
            sz_total: total_sz(state),
            norm: state.norm(),
            energy: energy(terms, state)?,
        })
    }
}

/// Sampled observables plus the state at the final time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: StateVector,
}

impl Trajectory {
    pub fn sz1(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sz1).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Sample times `0, dt, 2 dt, ..., t_final` with `dt = sample_every * tau`;
/// the last interval is shortened to end exactly on `t_final`.
pub fn sample_times(tau: f64, sample_every: usize, t_final: f64) -> Vec<f64> {
    let dt = tau * sample_every.max(1) as f64;
    let mut times = vec![0.0];
    if t_final <= 0.0 {
        return times;
    }
    let ratio = t_final / dt;
    let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    for k in 1..n {
        times.push(k as f64 * dt);
    }
    times.push(t_final);
    times
}

/// Runs `spec` from `state` to `t_final`, recording observables every
/// `sample_every` steps of `tau`.
pub fn propagate(
    spec: PropagatorSpec,
    terms: &TermSet,
    state: &StateVector,
    t_final: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let prop = Propagator::new(spec, terms)?;
    propagate_with(&prop, state, t_final, sample_every)
}

pub fn propagate_with(
    prop: &Propagator<'_>,
    state: &StateVector,
    t_final: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidPropagator(format!(
            "t_final must be finite and >= 0, got {t_final}"
        )));
    }
    if sample_every == 0 {
        return Err(Error::InvalidPropagator("sample_every must be >= 1".into()));
    }
    let terms = prop.terms;
    let times = sample_times(prop.spec.tau, sample_every, t_final);
    let mut records = Vec::with_capacity(times.len());
    records.push(TrajectoryRecord::measure(terms, state, 0.0)?);

    // ED and independent Chebyshev leaps start from the initial state every
    // time; everything else continues from the previous sample.
    let from_start = match prop.spec.kind {
        PropagatorKind::Ed => true,
        PropagatorKind::Cp => prop.spec.cp_sampling == ChebyshevSampling::Independent,
        _ => false,
    };
    let mut current = state.clone();
    for w in times.windows(2) {
        let (t_prev, t_next) = (w[0], w[1]);
        current = if from_start {
            prop.evolve(state, t_next)?
        } else {
            prop.evolve(&current, t_next - t_prev)?
        };
        records.push(TrajectoryRecord::measure(terms, &current, t_next)?);
    }
    Ok(Trajectory {
        records,
        final_state: current,
    })
}
