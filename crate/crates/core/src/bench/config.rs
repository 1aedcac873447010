//! Flat `key = value` run configuration.
//!
//! ```text
//! # Fig. 1 style comparison
//! mode = benchmark
//! L = 10
//! J0 = 8
//! J = 0.128
//! tau = 0.05
//! t_final = 20
//! seed = 1
//! ```
//!
//! Keys: `L`, `J0`, `J` (uniform bath coupling) or `J_list` (comma separated,
//! one per bath spin), `algorithm` (repeatable), `tau`, `krylov_N`,
//! `t_final`, `sample_every`, `seed`, `seeds`, `mode`, `output`,
//! `cp_sampling`. Blank lines and `#` comments are ignored.

use std::fmt;
use std::path::PathBuf;

use crate::hamiltonian::{ModelParams, DENSE_CAP};
use crate::hilbert::dimension;
use crate::propagators::{ChebyshevSampling, PropagatorKind, PropagatorSpec};

pub const DEFAULT_SAMPLE_EVERY: usize = 1;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Trajectory,
    Benchmark,
    Average,
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    Type,
    Constraint,
    Missing,
    /// The requested system is too large for a dense reference.
    DimensionCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub key: Option<String>,
    /// 1-based line in the config file; `None` for `--set` overrides and
    /// missing keys.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.key, self.line) {
            (Some(k), Some(l)) => write!(f, "line {l}, key {k:?}: {}", self.message),
            (Some(k), None) => write!(f, "key {k:?}: {}", self.message),
            (None, Some(l)) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub specs: Vec<PropagatorSpec>,
    pub t_final: f64,
    pub sample_every: usize,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    pub mode: Mode,
}

impl RunConfig {
    /// The first (for trajectory and average modes, the only) spec.
    pub fn spec(&self) -> &PropagatorSpec {
        &self.specs[0]
    }

    pub fn tau(&self) -> f64 {
        self.specs[0].tau
    }
}

/// Rows of the comparison table in their canonical order.
pub fn default_benchmark_specs(tau: f64) -> Vec<PropagatorSpec> {
    let mut specs: Vec<PropagatorSpec> = [
        PropagatorKind::Ed,
        PropagatorKind::SpPairU2,
        PropagatorKind::SpPairU4,
        PropagatorKind::SpXyzU2,
        PropagatorKind::SpXyzU4,
        PropagatorKind::Cp,
    ]
    .into_iter()
    .map(|k| PropagatorSpec::new(k, tau))
    .collect();
    specs.push(PropagatorSpec::sil(tau, 5));
    specs.push(PropagatorSpec::sil(tau, 10));
    specs
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: Option<usize>,
}

const KEYS: &[&str] = &[
    "L",
    "J0",
    "J",
    "J_list",
    "algorithm",
    "tau",
    "krylov_N",
    "t_final",
    "sample_every",
    "seed",
    "seeds",
    "mode",
    "output",
    "cp_sampling",
];

fn split_entry(text: &str, line: Option<usize>) -> Result<Option<Entry>, ConfigError> {
    let content = text.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let Some((k, v)) = content.split_once('=') else {
        return Err(ConfigError {
            kind: ConfigErrorKind::Syntax,
            key: None,
            line,
            message: format!("expected key = value, got {content:?}"),
        });
    };
    let key = k.trim().to_string();
    if !KEYS.contains(&key.as_str()) {
        return Err(ConfigError {
            kind: ConfigErrorKind::UnknownKey,
            key: Some(key),
            line,
            message: "unknown key".into(),
        });
    }
    Ok(Some(Entry {
        key,
        value: v.trim().to_string(),
        line,
    }))
}

/// Parses a config document; `overrides` are `key=value` strings applied
/// after it (a repeated scalar key takes its last value). Overriding
/// `algorithm` replaces every `algorithm` line of the document.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(e) = split_entry(line, Some(n + 1))? {
            entries.push(e);
        }
    }
    let mut extra = Vec::new();
    for o in overrides {
        if let Some(e) = split_entry(o, None)? {
            extra.push(e);
        }
    }
    if extra.iter().any(|e| e.key == "algorithm") {
        entries.retain(|e| e.key != "algorithm");
    }
    entries.extend(extra);
    build(&entries)
}

fn err(kind: ConfigErrorKind, e: &Entry, message: impl Into<String>) -> ConfigError {
    ConfigError {
        kind,
        key: Some(e.key.clone()),
        line: e.line,
        message: message.into(),
    }
}

fn last<'a>(entries: &'a [Entry], key: &str) -> Option<&'a Entry> {
    entries.iter().rev().find(|e| e.key == key)
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = e
        .value
        .parse()
        .map_err(|_| err(ConfigErrorKind::Type, e, format!("expected a number, got {:?}", e.value)))?;
    if !v.is_finite() {
        return Err(err(ConfigErrorKind::Constraint, e, "value must be finite"));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(e: &Entry, what: &str) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| {
        err(
            ConfigErrorKind::Type,
            e,
            format!("expected {what}, got {:?}", e.value),
        )
    })
}

fn parse_seeds(e: &Entry) -> Result<Vec<u64>, ConfigError> {
    let v = e.value.trim();
    if let Some((a, b)) = v.split_once("..") {
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| err(ConfigErrorKind::Type, e, format!("bad seed range {v:?}")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if b <= a {
            return Err(err(ConfigErrorKind::Constraint, e, "empty seed range"));
        }
        return Ok((a..b).collect());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| err(ConfigErrorKind::Type, e, format!("bad seed {s:?}")))
        })
        .collect()
}

/// `CP`, `SP_PAIR_U4`, `SP-Pair(U4)`, `SIL`, `SIL(10)`, ...
fn parse_algorithm(
    e: &Entry,
    tau: f64,
    krylov_n: usize,
    sampling: ChebyshevSampling,
) -> Result<PropagatorSpec, ConfigError> {
    let v = e.value.trim();
    let (name, n) = match v.split_once('(') {
        Some((head, tail)) if head.trim().eq_ignore_ascii_case("SIL") => {
            let inner = tail.trim_end_matches(')').trim();
            let n = inner.parse::<usize>().map_err(|_| {
                err(ConfigErrorKind::Type, e, format!("bad Krylov dimension in {v:?}"))
            })?;
            ("SIL", Some(n))
        }
        _ => (v, None),
    };
    let kind: PropagatorKind = name
        .parse()
        .map_err(|_| err(ConfigErrorKind::Type, e, format!("unknown algorithm {v:?}")))?;
    let mut spec = PropagatorSpec::new(kind, tau);
    spec.krylov_n = n.unwrap_or(krylov_n);
    spec.cp_sampling = sampling;
    Ok(spec)
}

fn build(entries: &[Entry]) -> Result<RunConfig, ConfigError> {
    let missing = |key: &str| ConfigError {
        kind: ConfigErrorKind::Missing,
        key: Some(key.into()),
        line: None,
        message: "required key is missing".into(),
    };

    let l_entry = last(entries, "L").ok_or_else(|| missing("L"))?;
    let bath: i64 = parse_int(l_entry, "an integer")?;
    if bath < 0 {
        return Err(err(ConfigErrorKind::Constraint, l_entry, "bath size must be >= 0"));
    }
    let bath = bath as usize;
    if dimension(bath).is_err() {
        return Err(err(
            ConfigErrorKind::DimensionCap,
            l_entry,
            format!("{} spins exceed the addressable basis", bath + 2),
        ));
    }

    let j0_entry = last(entries, "J0").ok_or_else(|| missing("J0"))?;
    let j0 = parse_f64(j0_entry)?;

    let couplings = match (last(entries, "J"), last(entries, "J_list")) {
        (Some(a), Some(_)) => {
            return Err(err(ConfigErrorKind::Constraint, a, "give either J or J_list, not both"));
        }
        (Some(e), None) => vec![parse_f64(e)?; bath],
        (None, Some(e)) => {
            let list = e
                .value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let v: f64 = s.trim().parse().map_err(|_| {
                        err(ConfigErrorKind::Type, e, format!("bad coupling {s:?}"))
                    })?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(err(ConfigErrorKind::Constraint, e, "couplings must be finite"))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            if list.len() != bath {
                return Err(err(
                    ConfigErrorKind::Constraint,
                    e,
                    format!("expected {bath} couplings, got {}", list.len()),
                ));
            }
            list
        }
        (None, None) if bath == 0 => Vec::new(),
        (None, None) => return Err(missing("J")),
    };
    let model = ModelParams { j0, couplings };

    let mode = match last(entries, "mode") {
        None => Mode::Trajectory,
        Some(e) => match e.value.to_ascii_lowercase().as_str() {
            "trajectory" => Mode::Trajectory,
            "benchmark" => Mode::Benchmark,
            "average" => Mode::Average,
            _ => {
                return Err(err(
                    ConfigErrorKind::Type,
                    e,
                    "mode must be trajectory, benchmark or average",
                ))
            }
        },
    };

    let tau = match last(entries, "tau") {
        None => PropagatorSpec::DEFAULT_TAU,
        Some(e) => {
            let v = parse_f64(e)?;
            if v <= 0.0 {
                return Err(err(ConfigErrorKind::Constraint, e, "tau must be > 0"));
            }
            v
        }
    };

    let dim = 1usize << (bath + 2);
    let krylov_n = match last(entries, "krylov_N") {
        None => PropagatorSpec::DEFAULT_KRYLOV_N,
        Some(e) => {
            let n: usize = parse_int(e, "a positive integer")?;
            if n < 2 || n > dim {
                return Err(err(
                    ConfigErrorKind::Constraint,
                    e,
                    format!("krylov_N must lie in [2, {dim}]"),
                ));
            }
            n
        }
    };

    let sampling = match last(entries, "cp_sampling") {
        None => ChebyshevSampling::default(),
        Some(e) => match e.value.to_ascii_lowercase().as_str() {
            "successive" => ChebyshevSampling::Successive,
            "independent" => ChebyshevSampling::Independent,
            _ => {
                return Err(err(
                    ConfigErrorKind::Type,
                    e,
                    "cp_sampling must be successive or independent",
                ))
            }
        },
    };

    let algorithm_entries: Vec<&Entry> = entries.iter().filter(|e| e.key == "algorithm").collect();
    let mut specs = Vec::new();
    for e in &algorithm_entries {
        let spec = parse_algorithm(e, tau, krylov_n, sampling)?;
        if spec.kind == PropagatorKind::Sil && (spec.krylov_n < 2 || spec.krylov_n > dim) {
            return Err(err(
                ConfigErrorKind::Constraint,
                e,
                format!("Krylov dimension must lie in [2, {dim}]"),
            ));
        }
        specs.push(spec);
    }
    if specs.is_empty() {
        specs = match mode {
            Mode::Benchmark => default_benchmark_specs(tau)
                .into_iter()
                .filter(|s| s.kind != PropagatorKind::Sil || s.krylov_n <= dim)
                .collect(),
            _ => vec![PropagatorSpec {
                cp_sampling: sampling,
                ..PropagatorSpec::new(PropagatorKind::Cp, tau)
            }],
        };
    } else if mode != Mode::Benchmark && specs.len() > 1 {
        return Err(err(
            ConfigErrorKind::Constraint,
            algorithm_entries[1],
            "only benchmark mode accepts more than one algorithm",
        ));
    }

    let t_entry = last(entries, "t_final").ok_or_else(|| missing("t_final"))?;
    let t_final = parse_f64(t_entry)?;
    if t_final < 0.0 {
        return Err(err(ConfigErrorKind::Constraint, t_entry, "t_final must be >= 0"));
    }

    let sample_every = match last(entries, "sample_every") {
        None => DEFAULT_SAMPLE_EVERY,
        Some(e) => {
            let n: usize = parse_int(e, "a positive integer")?;
            if n == 0 {
                return Err(err(ConfigErrorKind::Constraint, e, "sample_every must be >= 1"));
            }
            n
        }
    };

    let seed = match last(entries, "seed") {
        None => DEFAULT_SEED,
        Some(e) => parse_int(e, "an unsigned 64-bit integer")?,
    };
    let seeds = match last(entries, "seeds") {
        None => vec![seed],
        Some(e) => {
            let s = parse_seeds(e)?;
            if s.is_empty() {
                return Err(err(ConfigErrorKind::Constraint, e, "seed list is empty"));
            }
            s
        }
    };

    let output = last(entries, "output").map(|e| PathBuf::from(&e.value));

    let needs_dense = mode == Mode::Benchmark || specs.iter().any(|s| s.kind == PropagatorKind::Ed);
    if needs_dense && dim > DENSE_CAP {
        let e = l_entry;
        return Err(err(
            ConfigErrorKind::DimensionCap,
            e,
            format!("dimension {dim} exceeds the dense cap {DENSE_CAP} needed for ED"),
        ));
    }

    Ok(RunConfig {
        model,
        specs,
        t_final,
        sample_every,
        seed,
        seeds,
        output,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("L=10\nJ0=8\nJ=0.128\nalgorithm=CP\nt_final=20\n", &[]).unwrap();
        assert_eq!(cfg.model, ModelParams::uniform(10, 8.0, 0.128));
        assert_eq!(cfg.mode, Mode::Trajectory);
        assert_eq!(cfg.specs.len(), 1);
        assert_eq!(cfg.spec().kind, PropagatorKind::Cp);
        assert_eq!(cfg.tau(), 0.05);
        assert_eq!(cfg.sample_every, 1);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.t_final, 20.0);
        assert!(cfg.output.is_none());
    }

    #[test]
    fn negative_bath_size_names_key() {
        let e = parse_config("L=-1\nJ0=8\nJ=0.1\nt_final=1\n", &[]).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("L"));
        assert_eq!(e.line, Some(1));
        assert_eq!(e.kind, ConfigErrorKind::Constraint);
    }

    #[test]
    fn benchmark_rejects_large_systems() {
        let e = parse_config("mode=benchmark\nL=20\nJ0=8\nJ=0.1\nt_final=1\n", &[]).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::DimensionCap);
        // The same system is fine for a Chebyshev trajectory.
        assert!(parse_config("L=20\nJ0=8\nJ=0.1\nt_final=1\n", &[]).is_ok());
    }

    #[test]
    fn benchmark_defaults_to_table_rows() {
        let cfg = parse_config("mode = benchmark\nL=10\nJ0=8\nJ=0.128\nt_final=20\n", &[]).unwrap();
        let labels: Vec<String> = cfg.specs.iter().map(|s| s.label()).collect();
        assert_eq!(
            labels,
            [
                "ED",
                "SP-Pair(U2)",
                "SP-Pair(U4)",
                "SP-XYZ(U2)",
                "SP-XYZ(U4)",
                "CP",
                "SIL(5)",
                "SIL(10)"
            ]
        );
    }

    #[test]
    fn unknown_key_and_type_errors() {
        let e = parse_config("L=2\nJ0=1\nJ=1\nt_final=1\ncolour=red\n", &[]).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::UnknownKey);
        assert_eq!(e.line, Some(5));
        let e = parse_config("L=2\nJ0=abc\nJ=1\nt_final=1\n", &[]).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Type);
        assert_eq!(e.key.as_deref(), Some("J0"));
        let e = parse_config("L=2\nJ0=1\nJ=1\n", &[]).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Missing);
        let e = parse_config("L=2\nJ0 1\n", &[]).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Syntax);
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = parse_config(
            "L=3 # comment\nJ0=1\nJ=0.5\nt_final=1\n",
            &["tau=0.01".into(), "L=2".into(), "algorithm=SIL(6)".into()],
        )
        .unwrap();
        assert_eq!(cfg.model.bath_size(), 2);
        assert_eq!(cfg.tau(), 0.01);
        assert_eq!(cfg.spec().kind, PropagatorKind::Sil);
        assert_eq!(cfg.spec().krylov_n, 6);
        let e = parse_config("L=3\nJ0=1\nJ=0.5\nt_final=1\n", &["tau=0".into()]).unwrap_err();
        assert_eq!(e.line, None);
        assert_eq!(e.key.as_deref(), Some("tau"));
        let cfg = parse_config("L=1\nJ0=1\nJ=1\nt_final=1\nalgorithm=CP\n", &["algorithm=ED".into()])
            .unwrap();
        assert_eq!(cfg.specs.len(), 1);
        assert_eq!(cfg.spec().kind, PropagatorKind::Ed);
    }

    #[test]
    fn coupling_list_and_seeds() {
        let cfg = parse_config(
            "mode=average\nL=3\nJ0=1\nJ_list=0.1, 0.2,0.3\nt_final=1\nseeds=5..8\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.model.couplings, vec![0.1, 0.2, 0.3]);
        assert_eq!(cfg.seeds, vec![5, 6, 7]);
        let e = parse_config("L=3\nJ0=1\nJ_list=0.1,0.2\nt_final=1\n", &[]).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("J_list"));
        let cfg = parse_config("L=1\nJ0=1\nJ=1\nt_final=1\nseeds=3,1,4\n", &[]).unwrap();
        assert_eq!(cfg.seeds, vec![3, 1, 4]);
    }

    #[test]
    fn multiple_algorithms_only_in_benchmark() {
        let text = "L=2\nJ0=1\nJ=1\nt_final=1\nalgorithm=CP\nalgorithm=ED\n";
        let e = parse_config(text, &[]).unwrap_err();
        assert_eq!(e.line, Some(6));
        let cfg = parse_config(&format!("{text}mode=benchmark\n"), &[]).unwrap();
        assert_eq!(cfg.specs.len(), 2);
    }
}
