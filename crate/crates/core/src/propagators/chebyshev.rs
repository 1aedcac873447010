//! Chebyshev expansion of `exp(-i t H)`.
//!
//! With `X = (H - offset) / r` and `z = t r`, where `r` bounds the spectral
//! radius of `H - offset`,
//!
//! ```text
//! exp(-i t H) psi = exp(-i t offset) [J_0(z) + 2 sum_k J_k(z) T_k] psi
//! T_0 psi = psi,  T_1 psi = -i X psi,  T_{k+1} psi = -2 i X T_k psi + T_{k-1} psi
//! ```
//!
//! The series is cut at `K = floor(z) + 100`, past which every `|J_k(z)|` is
//! below double precision.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{apply_into, norm_bound, TermSet};
use crate::hilbert::StateVector;

/// Series terms past `floor(z)`.
pub const TRUNCATION_MARGIN: usize = 100;

/// Minimum margin `K - z` that [`bessel_coefficients`] accepts.
pub const MIN_ORDER_MARGIN: f64 = 50.0;

/// Coefficients smaller than this are dropped.
pub const COEFFICIENT_FLOOR: f64 = 1e-300;

const RESCALE_THRESHOLD: f64 = 1e250;

/// Truncation order `floor(z) + 100`.
pub fn truncation_order(z: f64) -> usize {
    z.floor() as usize + TRUNCATION_MARGIN
}

/// `J_0(z), ..., J_K(z)` by Miller's backward recurrence normalized with
/// `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_coefficients(z: f64, order: usize) -> Result<Vec<f64>> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::Numerical(format!("Bessel argument {z} must be finite and >= 0")));
    }
    if (order as f64) < z + MIN_ORDER_MARGIN {
        return Err(Error::BesselOrderTooSmall { z, order });
    }
    let mut out = vec![0.0; order + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }

    // Start far enough above `order` that the seed's error has died out by
    // the time the recurrence reaches it.
    let extra = ((160.0 * order as f64).sqrt() as usize).max(40);
    let start = (order + extra + 1) | 1;

    let mut above = 0.0; // J_{k+1}
    let mut current = 1.0; // J_k up to scale, k = start
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        if k <= order {
            out[k] = current;
        }
        if k % 2 == 0 {
            even_sum += current;
        }
        let below = (2.0 * k as f64 / z) * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            current *= s;
            above *= s;
            even_sum *= s;
            for v in out.iter_mut().skip(k.min(order + 1)) {
                *v *= s;
            }
        }
    }
    out[0] = current;

    let norm = current + 2.0 * even_sum;
    for v in &mut out {
        *v /= norm;
        if v.abs() < COEFFICIENT_FLOOR {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// Per-call information about the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevInfo {
    pub z: f64,
    pub order: usize,
}

/// `exp(-i t H) psi` as a single leap.
pub fn chebyshev_propagate(terms: &TermSet, state: &StateVector, t: f64) -> Result<StateVector> {
    chebyshev_propagate_with_info(terms, state, t).map(|(s, _)| s)
}

pub fn chebyshev_propagate_with_info(
    terms: &TermSet,
    state: &StateVector,
    t: f64,
) -> Result<(StateVector, ChebyshevInfo)> {
    terms.check_state(state)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidPropagator(format!(
            "Chebyshev leap needs a finite t >= 0, got {t}"
        )));
    }
    let radius = norm_bound(terms);
    let z = t * radius;
    let order = truncation_order(z);
    let info = ChebyshevInfo { z, order };
    let phase = C64::from_polar(1.0, -t * terms.offset());

    if radius == 0.0 || t == 0.0 {
        let mut out = state.clone();
        out.scale(phase);
        return Ok((out, info));
    }

    let coeffs = bessel_coefficients(z, order)?;
    let dim = state.dim();
    let offset = terms.offset();
    let minus_i_over_r = C64::new(0.0, -1.0 / radius);

    let mut prev = state.amplitudes().to_vec();
    let mut cur = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];

    // T_1 = -i X psi
    apply_into(terms, &prev, &mut cur, offset);
    for c in &mut cur {
        *c *= minus_i_over_r;
    }
    let mut acc: Vec<C64> = prev
        .iter()
        .zip(&cur)
        .map(|(p, c)| p * coeffs[0] + c * (2.0 * coeffs[1]))
        .collect();

    let two_minus_i_over_r = minus_i_over_r * 2.0;
    for &ck in &coeffs[2..] {
        apply_into(terms, &cur, &mut next, offset);
        let w = 2.0 * ck;
        for ((n, p), a) in next.iter_mut().zip(&prev).zip(acc.iter_mut()) {
            *n = *n * two_minus_i_over_r + p;
            *a += *n * w;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }

    for a in &mut acc {
        *a *= phase;
    }
    Ok((StateVector::from_amplitudes(acc)?, info))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_k(z) = (1/pi) int_0^pi cos(k th - z sin th) d th`, evaluated with
    /// the trapezoidal rule, which converges geometrically for this periodic
    /// integrand once the node count exceeds `z + k`.
    fn bessel_quadrature(k: usize, z: f64) -> f64 {
        let n = 4096;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.5 * (1.0 + (k as f64 * std::f64::consts::PI).cos());
        for j in 1..n {
            let th = j as f64 * h;
            s += (k as f64 * th - z * th.sin()).cos();
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn zero_argument() {
        let c = bessel_coefficients(0.0, 60).unwrap();
        assert_eq!(c[0], 1.0);
        assert!(c[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn order_must_exceed_argument() {
        assert!(matches!(
            bessel_coefficients(100.0, 120),
            Err(Error::BesselOrderTooSmall { .. })
        ));
        assert!(bessel_coefficients(-1.0, 100).is_err());
    }

    #[test]
    fn high_precision_values() {
        // Reference values from a 40-digit evaluation.
        let cases: &[(f64, usize, f64)] = &[
            (1.0, 0, 0.765_197_686_557_966_55),
            (1.0, 1, 0.440_050_585_744_933_52),
            (1.0, 5, 2.497_577_302_112_344_3e-4),
            (10.0, 3, 0.058_379_379_305_186_812),
            (278.4, 0, 0.019_358_949_931_373_895),
            (278.4, 1, 0.043_760_532_707_949_499),
            (278.4, 100, 0.044_241_707_048_223_807),
            (278.4, 278, 0.072_366_672_696_692_864),
            (278.4, 300, 1.311_381_293_488_118_8e-4),
            (278.4, 350, 5.659_543_850_889_256_7e-17),
            (278.4, 378, 2.610_918_911_457_318_9e-26),
            (50.0, 120, 4.303_026_521_767_697_9e-34),
        ];
        for &(z, k, expect) in cases {
            let order = truncation_order(z).max(k);
            let c = bessel_coefficients(z, order).unwrap();
            let rel = (c[k] - expect).abs() / expect.abs();
            assert!(rel < 1e-13, "J_{k}({z}) = {} vs {expect}, rel {rel:e}", c[k]);
        }
    }

    #[test]
    fn agrees_with_quadrature() {
        for z in [0.5, 3.7, 42.0, 150.25] {
            let order = truncation_order(z);
            let c = bessel_coefficients(z, order).unwrap();
            for k in [0, 1, 2, 7, order / 3, order / 2] {
                assert!((c[k] - bessel_quadrature(k, z)).abs() < 1e-13, "J_{k}({z})");
            }
        }
    }

    #[test]
    fn normalization_identity() {
        for z in [0.3, 17.0, 278.4] {
            let c = bessel_coefficients(z, truncation_order(z)).unwrap();
            let s = c[0] * c[0] + 2.0 * c[1..].iter().map(|x| x * x).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "z = {z}: {s}");
        }
    }

    #[test]
    fn truncation_for_reference_model() {
        assert_eq!(truncation_order(278.4), 378);
        assert_eq!(truncation_order(0.0), 100);
    }
}
