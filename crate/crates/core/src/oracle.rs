//! Reference results that do not depend on the propagators.
//!
//! [`exact_magnetization`] is the closed-form large-bath magnetization for
//! uniform couplings. It describes the average over random bath states, so
//! [`averaged_magnetization`] is the quantity to compare it against.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_model, ModelParams};
use crate::hilbert::{measure_sz, prepare_initial_state, SpinIndex};
use crate::propagators::{Propagator, PropagatorKind, PropagatorSpec};

/// Uniform-coupling parameters of the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactParams {
    pub bath: usize,
    pub j: f64,
    pub j0: f64,
}

impl ExactParams {
    /// `None` unless every bath coupling is the same.
    pub fn from_model(params: &ModelParams) -> Option<Self> {
        let j = params.uniform_coupling().unwrap_or(0.0);
        if params.bath_size() > 0 && params.uniform_coupling().is_none() {
            return None;
        }
        Some(ExactParams {
            bath: params.bath_size(),
            j,
            j0: params.j0,
        })
    }

    fn gamma_sq(&self, t: f64) -> f64 {
        self.bath as f64 * self.j * self.j * t * t
    }
}

/// The bracket `1 + 2 (1 - L J^2 t^2) exp(-L J^2 t^2 / 2)`, which sets the
/// oscillation envelope (divided by 6).
pub fn envelope_bracket(p: &ExactParams, t: f64) -> f64 {
    let g = p.gamma_sq(t);
    1.0 + 2.0 * (1.0 - g) * (-0.5 * g).exp()
}

/// `<S1^z(t)> = (1/6) [1 + 2 (1 - L J^2 t^2) exp(-L J^2 t^2 / 2)] cos(2 (J0 - J) t)`.
pub fn exact_magnetization(p: &ExactParams, t: f64) -> f64 {
    envelope_bracket(p, t) / 6.0 * (2.0 * (p.j0 - p.j) * t).cos()
}

/// Seed-averaged `<S1^z>` with its standard error at each grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMagnetization {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub seeds: usize,
}

/// Runs one trajectory per seed on the nondecreasing grid `times` and
/// reduces them to mean and standard error.
pub fn averaged_magnetization(
    params: &ModelParams,
    spec: PropagatorSpec,
    times: &[f64],
    seeds: &[u64],
) -> Result<AveragedMagnetization> {
    if seeds.is_empty() {
        return Err(Error::InvalidModel("at least one seed is required".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidPropagator(
            "time grid must be finite, nonnegative and nondecreasing".into(),
        ));
    }
    let terms = build_model(params)?;
    let prop = Propagator::new(spec, &terms)?;
    let from_start = spec.kind == PropagatorKind::Ed;

    let run = |seed: u64| -> Result<Vec<f64>> {
        let initial = prepare_initial_state(params.bath_size(), seed)?;
        let mut state = initial.clone();
        let mut t_prev = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            state = if from_start {
                prop.evolve(&initial, t)?
            } else {
                prop.evolve(&state, t - t_prev)?
            };
            t_prev = t;
            out.push(measure_sz(&state, SpinIndex::CENTRAL_1)?);
        }
        Ok(out)
    };

    let runs: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            run(seed).map_err(|e| Error::SeedFailed {
                seed,
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;

    let m = runs.len() as f64;
    let mut mean = vec![0.0; times.len()];
    for r in &runs {
        for (acc, v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m;
    }
    let std_error = (0..times.len())
        .map(|k| {
            if runs.len() < 2 {
                return 0.0;
            }
            let var = runs.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    Ok(AveragedMagnetization {
        times: times.to_vec(),
        mean,
        std_error,
        seeds: runs.len(),
    })
}
