//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits with status 1 if any criterion fails.
//!
//! Run with `cargo test --release -p spin-decohere --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use spin_decohere::bench::{self, error_norm, parse_config};
use spin_decohere::hamiltonian::{energy, norm_bound};
use spin_decohere::hilbert::total_sz;
use spin_decohere::oracle::{averaged_magnetization, exact_magnetization, ExactParams};
use spin_decohere::propagators::chebyshev::truncation_order;
use spin_decohere::propagators::{chebyshev_propagate, Propagator};
use spin_decohere::{
    build_model, prepare_initial_state, propagate, EdCache, ModelParams, PropagatorKind,
    PropagatorSpec, Result, StateVector, TermSet,
};

const BENCH_CONFIG: &str = "mode = benchmark\nL = 10\nJ0 = 8\nJ = 0.128\ntau = 0.05\nt_final = 20\nseed = 1\n";
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn bench_model() -> ModelParams {
    ModelParams::uniform(10, 8.0, 0.128)
}

fn within_decade(value: f64, reference: f64) -> bool {
    value >= reference / 10.0 && value <= reference * 10.0
}

fn error_table() -> Result<Outcome> {
    let cfg = parse_config(BENCH_CONFIG, &[]).expect("built-in config parses");
    let report = bench::benchmark(&cfg)?;
    let bands = [
        ("SP-Pair(U2)", 2.6e-4),
        ("SP-Pair(U4)", 4.2e-9),
        ("SP-XYZ(U2)", 9.7e-2),
        ("SP-XYZ(U4)", 2.3e-5),
        ("SIL(5)", 2.9e-6),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, reference) in bands {
        let e = report.row(label).expect("row present").error;
        let ok = within_decade(e, reference);
        pass &= ok;
        parts.push(format!("{label} {e:.2e} (ref {reference:.1e}{})", if ok { "" } else { ", out of band" }));
    }
    for label in ["CP", "SIL(10)"] {
        let e = report.row(label).expect("row present").error;
        let ok = e < 1e-10;
        pass &= ok;
        parts.push(format!("{label} {e:.2e}{}", if ok { "" } else { " (not below 1e-10)" }));
    }
    let cp = report.row("CP").unwrap().wall_seconds;
    let u4 = report.row("SP-Pair(U4)").unwrap().wall_seconds;
    parts.push(format!("CP {cp:.2}s vs SP-Pair(U4) {u4:.2}s"));
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

/// Amplitude of the `omega` component of `sz` near each sample, from a
/// least-squares fit of `a cos + b sin + c` over `half` samples either side.
fn local_amplitude(times: &[f64], sz: &[f64], omega: f64, half: usize) -> Vec<f64> {
    (0..times.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(times.len());
            let mut ata = Matrix3::<f64>::zeros();
            let mut atb = Vector3::<f64>::zeros();
            for k in lo..hi {
                let row = Vector3::new((omega * times[k]).cos(), (omega * times[k]).sin(), 1.0);
                ata += row * row.transpose();
                atb += row * sz[k];
            }
            match ata.lu().solve(&atb) {
                Some(c) => c[0].hypot(c[1]),
                None => f64::NAN,
            }
        })
        .collect()
}

fn decoherence_signature() -> Result<Outcome> {
    let terms = build_model(&bench_model())?;
    let psi0 = prepare_initial_state(10, SEED)?;
    let spec = PropagatorSpec::new(PropagatorKind::Cp, 0.05);
    let tr = propagate(spec, &terms, &psi0, 20.0, 1)?;
    let t = tr.times();
    let sz = tr.sz1();

    let late = t
        .iter()
        .zip(&sz)
        .filter(|(t, _)| **t >= 15.0 - 1e-9)
        .map(|(_, m)| m.abs())
        .fold(0.0, f64::max);
    // one bare central-pair period, 2 pi / (2 J0), spans about eight samples
    let env = local_amplitude(&t, &sz, 16.0, 4);
    let (t_min, env_min) = t
        .iter()
        .zip(&env)
        .filter(|(t, _)| (3.0..=12.0).contains(*t))
        .fold((0.0, f64::INFINITY), |acc, (t, e)| if *e < acc.1 { (*t, *e) } else { acc });
    let pass = (0.10..=0.23).contains(&late) && env_min < 0.07;
    Ok(Outcome {
        pass,
        detail: format!(
            "late max |sz1| {late:.4} (band [0.10, 0.23]); min envelope on [3, 12] {env_min:.4} at t = {t_min:.2} (limit 0.07)"
        ),
    })
}

fn closed_form_convergence() -> Result<Outcome> {
    let times: Vec<f64> = (0..=600).map(|k| 0.05 * k as f64).collect();
    let seeds: Vec<u64> = (1..=100).collect();
    let spec = PropagatorSpec::new(PropagatorKind::SpPairU2, 0.05);
    let mut rms = Vec::new();
    let mut rms_half = Vec::new();
    for bath in [8usize, 10, 12] {
        let params = ModelParams::uniform(bath, 8.0, 0.1);
        let exact = ExactParams::from_model(&params).expect("uniform couplings");
        // diagnostic only: the same closed form evaluated at J / 2
        let half = ExactParams { j: exact.j / 2.0, ..exact };
        let avg = averaged_magnetization(&params, spec, &times, &seeds)?;
        let rms_against = |p: &ExactParams| {
            let ms = avg
                .times
                .iter()
                .zip(&avg.mean)
                .map(|(&t, m)| (m - exact_magnetization(p, t)).powi(2))
                .sum::<f64>()
                / times.len() as f64;
            ms.sqrt()
        };
        rms.push(rms_against(&exact));
        rms_half.push(rms_against(&half));
    }
    let monotone = rms.windows(2).all(|w| w[1] < w[0]);
    let pass = monotone && rms[2] < 0.05;
    Ok(Outcome {
        pass,
        detail: format!(
            "RMS L=8 {:.4}, L=10 {:.4}, L=12 {:.4}; decreasing: {monotone}; L=12 limit 0.05; \
             against the form at J/2 (not gated): {:.4}, {:.4}, {:.4}",
            rms[0], rms[1], rms[2], rms_half[0], rms_half[1], rms_half[2]
        ),
    })
}

fn order_model() -> ModelParams {
    ModelParams {
        j0: 2.0,
        couplings: vec![0.6, -0.4, 0.8, 0.3],
    }
}

fn order_of_accuracy() -> Result<Outcome> {
    let params = order_model();
    let terms = build_model(&params)?;
    let cache = Arc::new(EdCache::build(&terms)?);
    let psi0 = prepare_initial_state(params.bath_size(), 3)?;
    let reference = cache.propagate(&psi0, 1.0)?;
    let cases = [
        (PropagatorKind::SpPairU2, 4.0),
        (PropagatorKind::SpPairU4, 16.0),
        (PropagatorKind::SpXyzU2, 4.0),
        (PropagatorKind::SpXyzU4, 16.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, expect) in cases {
        let mut errs = [0.0; 2];
        for (e, tau) in errs.iter_mut().zip([0.02, 0.01]) {
            let prop = Propagator::new(PropagatorSpec::new(kind, tau), &terms)?;
            *e = error_norm(&reference, &prop.evolve(&psi0, 1.0)?)?;
        }
        let ratio = errs[0] / errs[1];
        let ok = (ratio / expect - 1.0).abs() <= 0.3;
        pass &= ok;
        parts.push(format!(
            "{} {ratio:.3} (expect {expect})",
            PropagatorSpec::new(kind, 0.01).label()
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

struct Drift {
    norm: f64,
    energy: f64,
    sz: f64,
}

fn drift(terms: &TermSet, spec: PropagatorSpec, psi0: &StateVector, sample_every: usize) -> Result<(Drift, StateVector)> {
    let tr = propagate(spec, terms, psi0, 20.0, sample_every)?;
    let e0 = energy(terms, psi0)?;
    let sz0 = total_sz(psi0);
    let mut d = Drift {
        norm: 0.0,
        energy: 0.0,
        sz: 0.0,
    };
    for r in &tr.records {
        d.norm = d.norm.max((r.norm - psi0.norm()).abs());
        d.energy = d.energy.max((r.energy - e0).abs() / e0.abs());
        d.sz = d.sz.max((r.sz_total - sz0).abs());
    }
    Ok((d, tr.final_state))
}

fn conservation() -> Result<Outcome> {
    let models = [
        (bench_model(), 100usize),
        (
            ModelParams {
                j0: 3.0,
                couplings: vec![0.9, -0.5, 0.35, 1.2, -0.8, 0.6],
            },
            10,
        ),
    ];
    let mut pass = true;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (params, sample_every) in models {
        let terms = build_model(&params)?;
        let cache = Arc::new(EdCache::build(&terms)?);
        let psi0 = prepare_initial_state(params.bath_size(), SEED)?;
        let reference = cache.propagate(&psi0, 20.0)?;
        let e0 = energy(&terms, &psi0)?.abs();
        for spec in bench::config::default_benchmark_specs(0.05) {
            let (d, last) = drift(&terms, spec, &psi0, sample_every)?;
            let energy_limit = match spec.kind {
                // U2 is held to the bound implied by its state error:
                // |<H>_a - <H>_b| <= 2 ||H - offset|| ||a - b|| for unit vectors.
                PropagatorKind::SpPairU2 | PropagatorKind::SpXyzU2 => {
                    2.0 * norm_bound(&terms) * error_norm(&reference, &last)? / e0
                }
                _ => 1e-8,
            };
            checked += 1;
            let label = format!("L={} {}", params.bath_size(), spec.label());
            let mut bad = Vec::new();
            if d.norm >= 1e-10 {
                bad.push(format!("norm {:.1e}", d.norm));
            }
            if d.energy >= energy_limit {
                bad.push(format!("energy {:.1e} (limit {energy_limit:.1e})", d.energy));
            }
            if d.sz >= 1e-10 {
                bad.push(format!("total Sz {:.1e}", d.sz));
            }
            if !bad.is_empty() {
                pass = false;
                failures.push(format!("{label}: {}", bad.join(", ")));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{checked} runs within norm 1e-10, energy 1e-8, total Sz 1e-10")
    } else {
        format!("{} of {checked} runs drift: {}", failures.len(), failures.join("; "))
    };
    Ok(Outcome { pass, detail })
}

fn worst_errors_vs_ed(couplings: &[f64]) -> Result<[f64; 4]> {
    let mut worst = [0.0f64; 4];
    for bath in 0..=3usize {
        let params = ModelParams {
            j0: 8.0,
            couplings: couplings[..bath].to_vec(),
        };
        let terms = build_model(&params)?;
        let cache = Arc::new(EdCache::build(&terms)?);
        let specs = [
            (PropagatorSpec::new(PropagatorKind::Cp, 0.05), 0),
            (PropagatorSpec::sil(0.05, terms.dim()), 1),
            (PropagatorSpec::new(PropagatorKind::SpPairU4, 0.01), 2),
            (PropagatorSpec::new(PropagatorKind::SpXyzU4, 0.01), 2),
            (PropagatorSpec::new(PropagatorKind::SpPairU2, 0.01), 3),
            (PropagatorSpec::new(PropagatorKind::SpXyzU2, 0.01), 3),
        ];
        let props: Vec<(Propagator<'_>, usize)> = specs
            .iter()
            .map(|(s, g)| Propagator::new(*s, &terms).map(|p| (p, *g)))
            .collect::<Result<_>>()?;
        for seed in 1..=10 {
            let psi0 = prepare_initial_state(bath, seed)?;
            let reference = cache.propagate(&psi0, 5.0)?;
            for (prop, group) in &props {
                let e = error_norm(&reference, &prop.evolve(&psi0, 5.0)?)?;
                worst[*group] = worst[*group].max(e);
            }
        }
    }
    Ok(worst)
}

fn oracle_equivalence() -> Result<Outcome> {
    let limits = [1e-9, 1e-9, 1e-6, 1e-3];
    let worst = worst_errors_vs_ed(&[0.128; 3])?;
    // not gated: the splitting error grows with the couplings
    let strong = worst_errors_vs_ed(&[0.45, -0.3, 0.7])?;
    let pass = worst.iter().zip(&limits).all(|(w, l)| w < l);
    Ok(Outcome {
        pass,
        detail: format!(
            "worst error CP {:.1e}, SIL(N=D) {:.1e}, U4 {:.1e}, U2 {:.1e} (limits 1e-9, 1e-9, 1e-6, 1e-3); \
             with couplings up to 0.7: U4 {:.1e}, U2 {:.1e}",
            worst[0], worst[1], worst[2], worst[3], strong[2], strong[3]
        ),
    })
}

fn chebyshev_internals() -> Result<Outcome> {
    let z = 278.4;
    let c = spin_decohere::propagators::bessel_coefficients(z, truncation_order(z))?;
    let sum = c[0] + 2.0 * c.iter().skip(2).step_by(2).sum::<f64>();
    let identity = (sum - 1.0).abs();

    let terms = build_model(&bench_model())?;
    let psi0 = prepare_initial_state(10, SEED)?;
    let one = chebyshev_propagate(&terms, &psi0, 20.0)?;
    let half = chebyshev_propagate(&terms, &psi0, 10.0)?;
    let two = chebyshev_propagate(&terms, &half, 10.0)?;
    let leap = error_norm(&one, &two)?;
    Ok(Outcome {
        pass: identity < 1e-12 && leap < 1e-10,
        detail: format!(
            "|J0 + 2 sum J2k - 1| = {identity:.1e} at z = {z} (limit 1e-12); one vs two leaps {leap:.1e} (limit 1e-10)"
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 7] = [
        ("error table bands", error_table),
        ("decoherence signature", decoherence_signature),
        ("closed-form convergence", closed_form_convergence),
        ("order of accuracy", order_of_accuracy),
        ("conservation", conservation),
        ("agreement with ED", oracle_equivalence),
        ("Chebyshev internals", chebyshev_internals),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{}] {} {name} ({:.1}s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            n + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
