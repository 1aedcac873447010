//! Trajectory, benchmark and ensemble-average runs with CSV output.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

pub use config::{parse_config, ConfigError, ConfigErrorKind, Mode, RunConfig};

use crate::error::{Error, Result};
use crate::hamiltonian::build_model;
use crate::hamiltonian::{ModelParams, TermSet};
use crate::hilbert::{inner_product, prepare_initial_state, StateVector};
use crate::oracle::{averaged_magnetization, exact_magnetization, AveragedMagnetization, ExactParams};
use crate::propagators::{
    propagate_with, sample_times, EdCache, Propagator, PropagatorKind, PropagatorSpec, Trajectory,
};

/// Largest tolerated `| ||psi|| - 1 |` over a run.
pub const NORM_TOLERANCE: f64 = 1e-10;

pub const TRAJECTORY_HEADER: &str = "t,sz1,sz2,sz_total,norm,energy";
pub const BENCHMARK_HEADER: &str = "algorithm,error,error_phase_free,wall_seconds";
pub const AVERAGE_HEADER: &str = "t,sz1_mean,sz1_stderr,sz1_exact";

/// `||a - b||`.
pub fn error_norm(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `min_phi ||a - e^{i phi} b||`.
pub fn phase_free_error(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = inner_product(a, b)?.norm();
    Ok((a.norm_sqr() + b.norm_sqr() - 2.0 * overlap).max(0.0).sqrt())
}

/// Seventeen significant digits, scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub kind: PropagatorKind,
    pub error: f64,
    pub error_phase_free: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub model: ModelParams,
    pub tau: f64,
    pub t_final: f64,
    pub seed: u64,
    pub host_note: String,
    /// Soft checks that failed; these never abort a run.
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn row(&self, label: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCHMARK_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.label,
                format_number(r.error),
                format_number(r.error_phase_free),
                format_number(r.wall_seconds)
            );
        }
        out
    }

    /// Human-readable table; errors at round-off level print as `-MP-`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "L={} J0={} tau={} t={} seed={} ({})",
            self.model.bath_size(),
            self.model.j0,
            self.tau,
            self.t_final,
            self.seed,
            self.host_note
        );
        let _ = writeln!(out, "{:<14}|{:>12} |{:>12}", "Method", "Error", "Wall time");
        let _ = writeln!(out, "{}", "-".repeat(42));
        for r in &self.rows {
            let err = if r.kind == PropagatorKind::Ed {
                "-".to_string()
            } else if r.error < 1e-10 {
                "-MP-".to_string()
            } else {
                format!("{:.2e}", r.error)
            };
            let _ = writeln!(out, "{:<14}|{:>12} |{:>11.3}s", r.label, err, r.wall_seconds);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_norm: f64,
    pub wall_seconds: f64,
    pub rows: usize,
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in &tr.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_number(r.t),
            format_number(r.sz1),
            format_number(r.sz2),
            format_number(r.sz_total),
            format_number(r.norm),
            format_number(r.energy)
        );
    }
    out
}

pub fn average_csv(avg: &AveragedMagnetization, exact: Option<&ExactParams>) -> String {
    let mut out = String::from(AVERAGE_HEADER);
    out.push('\n');
    for ((t, m), e) in avg.times.iter().zip(&avg.mean).zip(&avg.std_error) {
        let x = exact
            .map(|p| format_number(exact_magnetization(p, *t)))
            .unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", format_number(*t), format_number(*m), format_number(*e), x);
    }
    out
}

fn check_norm(tr: &Trajectory, label: &str) -> Result<()> {
    let drift = tr
        .records
        .iter()
        .map(|r| (r.norm - 1.0).abs())
        .fold(0.0, f64::max);
    if drift > NORM_TOLERANCE {
        return Err(Error::Numerical(format!(
            "{label}: norm drifted by {drift:e} (tolerance {NORM_TOLERANCE:e})"
        )));
    }
    Ok(())
}

fn with_context(label: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Numerical(m) => Error::Numerical(format!("{label}: {m}")),
        other => other,
    }
}

/// Computes the trajectory described by `cfg`.
pub fn trajectory(cfg: &RunConfig) -> Result<(Trajectory, RunSummary)> {
    let terms = build_model(&cfg.model)?;
    let state = prepare_initial_state(cfg.model.bath_size(), cfg.seed)?;
    let spec = *cfg.spec();
    let label = spec.label();
    let prop = Propagator::new(spec, &terms)?;
    let start = Instant::now();
    let tr = propagate_with(&prop, &state, cfg.t_final, cfg.sample_every).map_err(with_context(&label))?;
    let wall_seconds = start.elapsed().as_secs_f64();
    check_norm(&tr, &label)?;
    let summary = RunSummary {
        final_norm: tr.final_state.norm(),
        wall_seconds,
        rows: tr.records.len(),
    };
    Ok((tr, summary))
}

/// Runs a trajectory and writes its CSV to `output`.
pub fn run_trajectory(cfg: &RunConfig, output: &Path) -> Result<RunSummary> {
    let (tr, summary) = trajectory(cfg)?;
    write_file(output, &trajectory_csv(&tr))?;
    Ok(summary)
}

fn time_row(
    spec: PropagatorSpec,
    terms: &TermSet,
    cache: &Arc<EdCache>,
    state: &StateVector,
    t_final: f64,
) -> Result<(StateVector, f64)> {
    let prop = Propagator::with_cache(spec, terms, Some(cache.clone()))?;
    let start = Instant::now();
    let out = prop.evolve(state, t_final)?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Errors `||psi_ED(t_final) - psi_X(t_final)||` and wall times of every
/// configured algorithm, sequentially timed.
pub fn benchmark(cfg: &RunConfig) -> Result<BenchReport> {
    let terms = build_model(&cfg.model)?;
    let state = prepare_initial_state(cfg.model.bath_size(), cfg.seed)?;

    let start = Instant::now();
    let cache = Arc::new(EdCache::build(&terms)?);
    let ed_build = start.elapsed().as_secs_f64();
    let (reference, ed_apply) = time_row(
        PropagatorSpec::new(PropagatorKind::Ed, cfg.tau()),
        &terms,
        &cache,
        &state,
        cfg.t_final,
    )?;

    let mut rows = Vec::with_capacity(cfg.specs.len());
    for spec in &cfg.specs {
        let label = spec.label();
        let row = if spec.kind == PropagatorKind::Ed {
            BenchRow {
                label,
                kind: spec.kind,
                error: 0.0,
                error_phase_free: 0.0,
                wall_seconds: ed_build + ed_apply,
            }
        } else {
            let (psi, wall) =
                time_row(*spec, &terms, &cache, &state, cfg.t_final).map_err(with_context(&label))?;
            let drift = (psi.norm() - 1.0).abs();
            if drift > NORM_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "{label}: norm drifted by {drift:e}"
                )));
            }
            BenchRow {
                label,
                kind: spec.kind,
                error: error_norm(&reference, &psi)?,
                error_phase_free: phase_free_error(&reference, &psi)?,
                wall_seconds: wall,
            }
        };
        rows.push(row);
    }

    let mut warnings = Vec::new();
    let cp = rows.iter().find(|r| r.kind == PropagatorKind::Cp);
    let u4 = rows.iter().find(|r| r.kind == PropagatorKind::SpPairU4);
    if let (Some(cp), Some(u4)) = (cp, u4) {
        if cp.wall_seconds >= u4.wall_seconds {
            warnings.push(format!(
                "CP ({:.3}s) was not faster than SP-Pair(U4) ({:.3}s)",
                cp.wall_seconds, u4.wall_seconds
            ));
        }
    }

    Ok(BenchReport {
        rows,
        model: cfg.model.clone(),
        tau: cfg.tau(),
        t_final: cfg.t_final,
        seed: cfg.seed,
        host_note: format!("{} {}", std::env::consts::OS, std::env::consts::ARCH),
        warnings,
    })
}

/// Runs the benchmark and writes its CSV to `output`.
pub fn run_benchmark(cfg: &RunConfig, output: &Path) -> Result<BenchReport> {
    let report = benchmark(cfg)?;
    write_file(output, &report.to_csv())?;
    Ok(report)
}

/// Seed average of `<S1^z>` on the sampling grid of `cfg`.
pub fn average(cfg: &RunConfig) -> Result<AveragedMagnetization> {
    let times = sample_times(cfg.tau(), cfg.sample_every, cfg.t_final);
    averaged_magnetization(&cfg.model, *cfg.spec(), &times, &cfg.seeds)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}
