//! WKB asymptotics of Hermite functions.
//!
//! With `λ = √(2n+1)` and the phase `φ_n(x) = ∫_0^x √(λ² − t²) dt`,
//!
//! ```text
//! h_n(x) = h_n(0) (λ²/(λ²−x²))^{1/4} cos φ_n(x)
//!        + h_n′(0) sin φ_n(x) / (λ²(λ²−x²))^{1/4} + E_n(x)
//! ```
//!
//! and, for `|x| ≤ T` with `n ≥ 2T²`, the simpler form
//! `h_n(x) = (−1)^p/(√π p^{1/4}) · {cos, sin} φ_n(x) + Ẽ_n(x)` with `p = ⌊n/2⌋`.
//! This module evaluates the main terms, measures `E_n` and `Ẽ_n` against
//! [`crate::hermite_eval`], and checks the accompanying inequalities on grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{hermite_eval, hermite_zero_value, HermiteRecurrence};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
/// Below this `|x|/λ` the defect is summed as a power series.
const SERIES_CUTOFF: f64 = 0.5;

fn lambda_sq(n: usize) -> f64 {
    (2 * n + 1) as f64
}

/// Phase quantities at one `(n, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseData {
    pub n: usize,
    pub x: f64,
    pub lambda: f64,
    /// `√(λ² − x²)`
    pub p: f64,
    pub phi: f64,
    /// `λx − φ_n(x)`
    pub e: f64,
}

impl PhaseData {
    pub fn new(n: usize, x: f64) -> Result<Self> {
        let l2 = lambda_sq(n);
        let lambda = l2.sqrt();
        if !x.is_finite() || x.abs() > lambda {
            return Err(Error::domain(
                "phase",
                format!("|x| = {} exceeds the turning point √(2n+1) = {lambda}", x.abs()),
            ));
        }
        let p = (-x).mul_add(x, l2).max(0.0).sqrt();
        let ax = x.abs();
        let s = ax / lambda;
        let (phi_abs, e_abs) = if s < SERIES_CUTOFF {
            // e = λ² Σ c_k s^{2k+1}/(2k+1), 1 − √(1−u²) = Σ c_k u^{2k}
            let s2 = s * s;
            let mut c = 0.5;
            let mut pow = s * s2;
            let mut sum = 0.0;
            let mut k = 1.0;
            loop {
                let term = c * pow / (2.0 * k + 1.0);
                sum += term;
                if term <= sum * 1e-18 {
                    break;
                }
                c *= (2.0 * k - 1.0) / (2.0 * k + 2.0);
                pow *= s2;
                k += 1.0;
            }
            let e = l2 * sum;
            (lambda * ax - e, e)
        } else {
            let phi = 0.5 * l2 * s.min(1.0).asin() + 0.5 * ax * p;
            (phi, lambda * ax - phi)
        };
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        Ok(PhaseData {
            n,
            x,
            lambda,
            p,
            phi: sign * phi_abs,
            e: sign * e_abs,
        })
    }
}

/// `φ_n(x) = (2n+1)/2 · asin(x/√(2n+1)) + (x/2)√(2n+1−x²)` for `|x| ≤ √(2n+1)`.
pub fn phase_phi(n: usize, x: f64) -> Result<f64> {
    PhaseData::new(n, x).map(|d| d.phi)
}

/// `e_n(x) = √(2n+1)·x − φ_n(x)`, free of cancellation for small `x`.
pub fn phase_defect(n: usize, x: f64) -> Result<f64> {
    PhaseData::new(n, x).map(|d| d.e)
}

fn main_term_from(n: usize, d: &PhaseData) -> Result<f64> {
    let l2 = lambda_sq(n);
    let p2 = d.p * d.p;
    if n.is_multiple_of(2) {
        Ok(hermite_zero_value(n)? * (l2 / p2).powf(0.25) * d.phi.cos())
    } else {
        Ok(hermite_zero_value(n)? * d.phi.sin() / (l2 * p2).powf(0.25))
    }
}

/// Main term of the WKB approximation, `|x| < √(2n+1)`.
pub fn wkb_main_term(n: usize, x: f64) -> Result<f64> {
    let d = PhaseData::new(n, x)?;
    if d.p == 0.0 {
        return Err(Error::domain("wkb_main_term", "x is at the turning point"));
    }
    main_term_from(n, &d)
}

fn check_corollary(n: usize, x: f64, t: f64) -> Result<()> {
    if !(t >= 1.0) {
        return Err(Error::domain("wkb_simplified_term", format!("T = {t} < 1")));
    }
    if !(x.abs() <= t) {
        return Err(Error::domain("wkb_simplified_term", format!("|x| = {} > T = {t}", x.abs())));
    }
    if (n as f64) < 2.0 * t * t {
        return Err(Error::domain("wkb_simplified_term", format!("n = {n} < 2T² = {}", 2.0 * t * t)));
    }
    Ok(())
}

fn simplified_from(n: usize, phi: f64) -> f64 {
    let p = n / 2;
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let amp = sign * FRAC_1_SQRT_PI / (p as f64).powf(0.25);
    if n.is_multiple_of(2) {
        amp * phi.cos()
    } else {
        amp * phi.sin()
    }
}

/// `(−1)^p/(√π p^{1/4}) cos φ_n(x)` for `n = 2p`, `sin` for `n = 2p+1`.
/// Requires `T ≥ 1`, `|x| ≤ T` and `n ≥ 2T²`.
pub fn wkb_simplified_term(n: usize, x: f64, t: f64) -> Result<f64> {
    check_corollary(n, x, t)?;
    Ok(simplified_from(n, phase_phi(n, x)?))
}

/// Which of the two `E_n` envelopes applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `|x| < λ`
    Generic,
    /// `|x| ≤ λ/2`
    Half,
}

/// `(5/4)(λ/(λ²−x²))^{5/2}`
pub fn generic_envelope_bound(n: usize, x: f64) -> f64 {
    let l2 = lambda_sq(n);
    1.25 * (l2.sqrt() / (-x).mul_add(x, l2)).powf(2.5)
}

/// `2/(2n+1)^{3/2}`
pub fn half_envelope_bound(n: usize) -> f64 {
    2.0 / lambda_sq(n).powf(1.5)
}

/// Bound on `|Ẽ_n|`: `2T²/(2n+1)^{5/4}` for `T ≥ 2`, `3T²/(2n+1)^{5/4}` for `1 ≤ T < 2`.
pub fn corollary_bound(n: usize, t: f64) -> f64 {
    let c = if t >= 2.0 { 2.0 } else { 3.0 };
    c * t * t / lambda_sq(n).powf(1.25)
}

/// Lipschitz constant of `Ẽ_n`: `3T²/(2n+1)^{3/4}` for `T ≥ 2`, `8T²/(2n+1)^{3/4}` for `1 ≤ T < 2`.
pub fn corollary_lipschitz(n: usize, t: f64) -> f64 {
    let c = if t >= 2.0 { 3.0 } else { 8.0 };
    c * t * t / lambda_sq(n).powf(0.75)
}

/// `Ẽ_n` at one point, with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollaryEnvelope {
    pub t: f64,
    pub simplified_term: f64,
    pub e_measured: f64,
    pub e_bound: f64,
}

/// Measured WKB remainder against its envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WkbEnvelope {
    pub n: usize,
    pub x: f64,
    pub main_term: f64,
    pub e_measured: f64,
    /// Envelope of the active regime.
    pub e_bound: f64,
    /// `(5/4)(λ/(λ²−x²))^{5/2}`, valid in both regimes.
    pub generic_bound: f64,
    pub regime: Regime,
    pub corollary: Option<CorollaryEnvelope>,
}

/// `E_n(x) = h_n(x) − main term` and, when `t` is given, `Ẽ_n(x)`.
///
/// For `1 ≤ T < 2` the corollary bound needs `n ≥ 6`.
pub fn wkb_envelope(n: usize, x: f64, t: Option<f64>) -> Result<WkbEnvelope> {
    let h = hermite_eval(n, x)?;
    envelope_with(n, x, h, t)
}

fn envelope_with(n: usize, x: f64, h: f64, t: Option<f64>) -> Result<WkbEnvelope> {
    let d = PhaseData::new(n, x)?;
    if d.p == 0.0 {
        return Err(Error::domain("wkb_envelope", "x is at the turning point"));
    }
    let main_term = main_term_from(n, &d)?;
    let generic_bound = generic_envelope_bound(n, x);
    let regime = if x.abs() <= 0.5 * d.lambda {
        Regime::Half
    } else {
        Regime::Generic
    };
    let e_bound = match regime {
        Regime::Half => half_envelope_bound(n),
        Regime::Generic => generic_bound,
    };
    let corollary = match t {
        None => None,
        Some(t) => {
            check_corollary(n, x, t)?;
            if t < 2.0 && n < 6 {
                return Err(Error::domain("wkb_envelope", format!("n = {n} < 6 with T = {t} < 2")));
            }
            let simplified_term = simplified_from(n, d.phi);
            Some(CorollaryEnvelope {
                t,
                simplified_term,
                e_measured: h - simplified_term,
                e_bound: corollary_bound(n, t),
            })
        }
    };
    Ok(WkbEnvelope {
        n,
        x,
        main_term,
        e_measured: h - main_term,
        e_bound,
        generic_bound,
        regime,
        corollary,
    })
}

/// Envelopes at many points for a single `n`, sharing one recurrence per point.
pub fn wkb_envelopes(n: usize, xs: &[f64], t: Option<f64>) -> Result<Vec<WkbEnvelope>> {
    xs.par_iter()
        .map(|&x| {
            let h = HermiteRecurrence::new(x)
                .nth(n)
                .expect("recurrence is infinite")
                .to_f64();
            envelope_with(n, x, h, t)
        })
        .collect()
}

/// Largest observed `lhs/rhs` and where it occurred.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorstRatio {
    pub ratio: f64,
    pub x: f64,
    pub y: f64,
}

impl WorstRatio {
    const NONE: WorstRatio = WorstRatio {
        ratio: 0.0,
        x: f64::NAN,
        y: f64::NAN,
    };

    fn offer(&mut self, ratio: f64, x: f64, y: f64) {
        if ratio > self.ratio || (self.x.is_nan() && ratio >= self.ratio) {
            *self = WorstRatio { ratio, x, y };
        }
    }

    fn merge(&mut self, other: WorstRatio) {
        if !other.x.is_nan() {
            self.offer(other.ratio, other.x, other.y);
        }
    }
}

/// Identifiers of the audited inequalities, in report order.
///
/// | id | inequality |
/// |----|------------|
/// | `phase-step` | `\|φ_{n+1}(x) − φ_n(x)\| ≤ 3T/λ` |
/// | `phase-step-lip` | `\|Δφ(x) − Δφ(y)\| ≤ 3\|x−y\|/λ` |
/// | `phase-step-sum` | `\|Δφ(x) + Δφ(y)\| ≤ 5T/λ` |
/// | `defect-pair-lip` | `\|(e_{n+1}+e_n)(x) − (e_{n+1}+e_n)(y)\| ≤ T²\|x−y\|/λ` |
/// | `phase-lip` | `\|φ_n(x) − φ_n(y)\| ≤ (5/4)λ\|x−y\|` |
/// | `defect` | `\|e_n(x)\| ≤ T³/(3λ)` |
/// | `defect-lip` | `\|e_n(x) − e_n(y)\| ≤ T²\|x−y\|/λ` |
/// | `simplified-remainder` | `\|Ẽ_n(x)\|` against [`corollary_bound`] (only when `n ≥ 2T²`) |
/// | `simplified-remainder-lip` | Lipschitz ratio of `Ẽ_n` against [`corollary_lipschitz`] (only when `n ≥ 2T²`) |
pub const LEMMA_IDS: [&str; 9] = [
    "phase-step",
    "phase-step-lip",
    "phase-step-sum",
    "defect-pair-lip",
    "phase-lip",
    "defect",
    "defect-lip",
    "simplified-remainder",
    "simplified-remainder-lip",
];

/// Worst ratios of the phase inequalities over a uniform grid of `[−T, T]²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub n: usize,
    pub t: f64,
    pub grid_points: usize,
    pub worst_ratios: BTreeMap<String, WorstRatio>,
}

impl LemmaReport {
    pub fn max_ratio(&self) -> f64 {
        self.worst_ratios.values().map(|w| w.ratio).fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.max_ratio() <= 1.0
    }
}

/// Default grid resolution per axis for [`verify_phase_lemma`].
pub const DEFAULT_LEMMA_GRID: usize = 64;

/// Uniform grid of `points` values on `[a, b]`, endpoints included.
pub fn uniform_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => {
            let h = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { b } else { a + i as f64 * h })
                .collect()
        }
    }
}

struct PointData {
    x: f64,
    e0: f64,
    e1: f64,
    /// `φ_{n+1}(x) − φ_n(x)`
    dphi: f64,
    phi0: f64,
    tilde: Option<f64>,
}

/// Checks the phase-difference inequalities for `|x|, |y| ≤ T ≤ λ/2`,
/// the `e_n` bounds, and (when `n ≥ 2T²`) the `Ẽ_n` bounds, with
/// `scale` multiplying every stated right-hand side (1 for the statement as
/// printed).
pub fn verify_phase_lemma(n: usize, t: f64, grid_points: usize) -> Result<LemmaReport> {
    verify_phase_lemma_scaled(n, t, grid_points, 1.0)
}

/// As [`verify_phase_lemma`] with every right-hand side multiplied by `scale`.
pub fn verify_phase_lemma_scaled(n: usize, t: f64, grid_points: usize, scale: f64) -> Result<LemmaReport> {
    let lambda = lambda_sq(n).sqrt();
    if !(t >= 2.0 && t <= 0.5 * lambda) {
        return Err(Error::domain(
            "verify_phase_lemma",
            format!("need 2 ≤ T ≤ √(2n+1)/2 = {}, got T = {t}", 0.5 * lambda),
        ));
    }
    if grid_points < 2 {
        return Err(Error::domain("verify_phase_lemma", "grid_points < 2"));
    }
    let lambda1 = lambda_sq(n + 1).sqrt();
    let dl = 2.0 / (lambda + lambda1);
    let with_tilde = (n as f64) >= 2.0 * t * t;
    let xs = uniform_grid(-t, t, grid_points);
    let pts: Vec<PointData> = xs
        .par_iter()
        .map(|&x| {
            let d0 = PhaseData::new(n, x)?;
            let d1 = PhaseData::new(n + 1, x)?;
            let tilde = if with_tilde {
                Some(hermite_eval(n, x)? - simplified_from(n, d0.phi))
            } else {
                None
            };
            Ok(PointData {
                x,
                e0: d0.e,
                e1: d1.e,
                dphi: dl * x - (d1.e - d0.e),
                phi0: d0.phi,
                tilde,
            })
        })
        .collect::<Result<_>>()?;

    let rhs_step = scale * 3.0 * t / lambda;
    let rhs_step_lip = scale * 3.0 / lambda;
    let rhs_step_sum = scale * 5.0 * t / lambda;
    let rhs_pair_lip = scale * t * t / lambda;
    let rhs_phase_lip = scale * 1.25 * lambda;
    let rhs_defect = scale * t.powi(3) / (3.0 * lambda);
    let rhs_defect_lip = scale * t * t / lambda;
    let rhs_rem = scale * corollary_bound(n, t);
    let rhs_rem_lip = scale * corollary_lipschitz(n, t);

    let rows: Vec<[WorstRatio; 9]> = pts
        .par_iter()
        .map(|a| {
            let mut w = [WorstRatio::NONE; 9];
            w[0].offer(a.dphi.abs() / rhs_step, a.x, a.x);
            w[5].offer(a.e0.abs() / rhs_defect, a.x, a.x);
            if let Some(tl) = a.tilde {
                w[7].offer(tl.abs() / rhs_rem, a.x, a.x);
            }
            for b in &pts {
                let dxy = a.x - b.x;
                w[2].offer((a.dphi + b.dphi).abs() / rhs_step_sum, a.x, b.x);
                if dxy == 0.0 {
                    continue;
                }
                let adx = dxy.abs();
                w[1].offer((a.dphi - b.dphi).abs() / (rhs_step_lip * adx), a.x, b.x);
                let eps = -((a.e1 + a.e0) - (b.e1 + b.e0));
                w[3].offer(eps.abs() / (rhs_pair_lip * adx), a.x, b.x);
                w[4].offer((a.phi0 - b.phi0).abs() / (rhs_phase_lip * adx), a.x, b.x);
                w[6].offer((a.e0 - b.e0).abs() / (rhs_defect_lip * adx), a.x, b.x);
                if let (Some(ta), Some(tb)) = (a.tilde, b.tilde) {
                    w[8].offer((ta - tb).abs() / (rhs_rem_lip * adx), a.x, b.x);
                }
            }
            w
        })
        .collect();

    let mut worst = [WorstRatio::NONE; 9];
    for row in rows {
        for (acc, r) in worst.iter_mut().zip(row) {
            acc.merge(r);
        }
    }
    let worst_ratios = LEMMA_IDS
        .iter()
        .zip(worst)
        .filter(|(id, _)| with_tilde || !id.starts_with("simplified"))
        .map(|(id, w)| (id.to_string(), w))
        .collect();
    Ok(LemmaReport {
        n,
        t,
        grid_points,
        worst_ratios,
    })
}

/// Sampled Lipschitz ratios of `E_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeLipschitzReport {
    pub n: usize,
    /// `|E_n(x)−E_n(y)| / (8|x−y|/(2n+1)^{5/4})` over `|x|, |y| ≤ λ/2`.
    pub half_regime: WorstRatio,
    /// `|E_n(x)−E_n(y)| / (5|x−y|/(2n+1)^{1/4})` over `|x|, |y| ≤ (1−η)λ`,
    /// `η = (2n+1)^{-1/10}`.
    pub eta_regime: WorstRatio,
}

/// Pairwise Lipschitz sampling of `E_n` on uniform grids with `points` nodes.
pub fn verify_envelope_lipschitz(n: usize, points: usize) -> Result<EnvelopeLipschitzReport> {
    if points < 2 {
        return Err(Error::domain("verify_envelope_lipschitz", "points < 2"));
    }
    let l2 = lambda_sq(n);
    let lambda = l2.sqrt();
    let eta = l2.powf(-0.1);
    let worst = |half_width: f64, rhs: f64| -> Result<WorstRatio> {
        let xs = uniform_grid(-half_width, half_width, points);
        let es: Vec<f64> = wkb_envelopes(n, &xs, None)?.iter().map(|e| e.e_measured).collect();
        let rows: Vec<WorstRatio> = (0..xs.len())
            .into_par_iter()
            .map(|i| {
                let mut w = WorstRatio::NONE;
                for j in 0..xs.len() {
                    if i != j {
                        w.offer((es[i] - es[j]).abs() / (rhs * (xs[i] - xs[j]).abs()), xs[i], xs[j]);
                    }
                }
                w
            })
            .collect();
        let mut acc = WorstRatio::NONE;
        rows.into_iter().for_each(|r| acc.merge(r));
        Ok(acc)
    };
    Ok(EnvelopeLipschitzReport {
        n,
        half_regime: worst(0.5 * lambda, 8.0 / l2.powf(1.25))?,
        eta_regime: worst((1.0 - eta) * lambda, 5.0 / l2.powf(0.25))?,
    })
}

/// Phase at the turning point, `π(2n+1)/4`.
pub fn turning_point_phase(n: usize) -> f64 {
    0.25 * PI * lambda_sq(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn phase_special_values() {
        assert_eq!(phase_phi(7, 0.0).unwrap(), 0.0);
        let l = 15f64.sqrt();
        assert_relative_eq!(phase_phi(7, l).unwrap(), turning_point_phase(7), max_relative = 1e-15);
        assert_relative_eq!(phase_phi(7, -l).unwrap(), -turning_point_phase(7), max_relative = 1e-15);
        // 50-digit reference for (1/2)asin(1/2) + (1/4)√(3/4)
        assert_relative_eq!(phase_phi(0, 0.5).unwrap(), 0.478_305_738_745_259_1, max_relative = 1e-15);
        assert!(phase_phi(3, 2.7).is_err());
        assert!(phase_phi(3, f64::NAN).is_err());
    }

    #[test]
    fn defect_small_x_series() {
        // 50-digit λx − φ at n = 50, x = 0.01
        let want = 1.658_395_563_313_07e-8;
        assert_relative_eq!(phase_defect(50, 0.01).unwrap(), want, max_relative = 1e-14);
        let leading = 0.01f64.powi(3) / (6.0 * 101f64.sqrt());
        assert_relative_eq!(phase_defect(50, 0.01).unwrap(), leading, max_relative = 1e-6);
        assert_eq!(phase_defect(50, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn defect_within_e_bound() {
        let t = 1.0;
        assert!(phase_defect(8, 1.0).unwrap() <= t * t * t / (3.0 * 17f64.sqrt()));
    }

    #[test]
    fn series_and_closed_form_agree_at_cutoff() {
        for n in [0, 5, 100, 10_000] {
            let l = lambda_sq(n).sqrt();
            let below = PhaseData::new(n, SERIES_CUTOFF * l * (1.0 - 1e-15)).unwrap();
            let above = PhaseData::new(n, SERIES_CUTOFF * l).unwrap();
            assert_relative_eq!(below.e, above.e, max_relative = 1e-13);
        }
    }

    #[test]
    fn phase_additivity() {
        for n in [0, 3, 50, 999] {
            let l = lambda_sq(n).sqrt();
            for i in 0..=200 {
                let x = -l + 2.0 * l * i as f64 / 200.0;
                let d = PhaseData::new(n, x).unwrap();
                let lx = d.lambda * x;
                assert!((d.phi + d.e - lx).abs() <= 2.0 * f64::EPSILON * lx.abs().max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn main_term_at_origin() {
        assert_eq!(wkb_main_term(7, 0.0).unwrap(), 0.0);
        assert_relative_eq!(wkb_main_term(8, 0.0).unwrap(), hermite_zero_value(8).unwrap(), max_relative = 1e-15);
        assert!(wkb_main_term(4, 3.0).is_err());
    }

    #[test]
    fn envelope_holds_at_n20() {
        let e = wkb_envelope(20, 1.0, None).unwrap();
        assert!(e.e_measured.abs() <= e.e_bound);
        assert_eq!(e.regime, Regime::Half);
        assert_relative_eq!(e.main_term + e.e_measured, hermite_eval(20, 1.0).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn regime_classification() {
        let e = wkb_envelope(12, 0.25, Some(1.0)).unwrap();
        assert_eq!(e.regime, Regime::Half);
        assert_eq!(e.e_bound, half_envelope_bound(12));
        let c = e.corollary.unwrap();
        assert_eq!(c.e_bound, 3.0 / 25f64.powf(1.25));
        let g = wkb_envelope(12, 4.0, None).unwrap();
        assert_eq!(g.regime, Regime::Generic);
        assert_eq!(g.e_bound, g.generic_bound);
    }

    #[test]
    fn simplified_term_values() {
        // 50-digit reference
        assert_relative_eq!(wkb_simplified_term(9, 0.5, 2.0).unwrap(), 0.328_388_373_643_468_3, max_relative = 1e-14);
        assert_relative_eq!(
            wkb_simplified_term(10, 0.0, 2.0).unwrap(),
            -FRAC_1_SQRT_PI / 5f64.powf(0.25),
            max_relative = 1e-15
        );
        assert_eq!(wkb_simplified_term(11, 0.0, 2.0).unwrap(), 0.0);
        assert!(wkb_simplified_term(7, 0.5, 2.0).is_err());
        assert!(wkb_simplified_term(9, 2.5, 2.0).is_err());
        assert!(wkb_simplified_term(9, 0.5, 0.5).is_err());
    }

    #[test]
    fn corollary_at_origin_with_unit_t() {
        for n in (6..60).step_by(2) {
            let c = wkb_envelope(n, 0.0, Some(1.0)).unwrap().corollary.unwrap();
            assert!(c.e_measured.abs() <= 3.0 / lambda_sq(n).powf(1.25));
        }
        assert!(wkb_envelope(4, 0.0, Some(1.0)).is_err());
    }

    #[test]
    fn lemma_report_holds() {
        for n in [50, 200] {
            let r = verify_phase_lemma(n, 2.0, DEFAULT_LEMMA_GRID).unwrap();
            assert_eq!(r.worst_ratios.len(), LEMMA_IDS.len());
            assert!(r.holds(), "{r:?}");
        }
        assert!(verify_phase_lemma(4, 2.0, 64).is_err());
        assert!(verify_phase_lemma(50, 1.5, 64).is_err());
    }

    #[test]
    fn lemma_scale_detects_violation() {
        let r = verify_phase_lemma_scaled(50, 2.0, 16, 1e-3).unwrap();
        assert!(!r.holds());
    }

    #[test]
    fn envelope_lipschitz_small_n() {
        let r = verify_envelope_lipschitz(30, 200).unwrap();
        assert!(r.half_regime.ratio <= 1.0, "{r:?}");
        assert!(r.half_regime.ratio > 0.0);
        assert!(r.eta_regime.ratio.is_finite());
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_abs_diff_eq!(uniform_grid(0.0, 1.0, 80)[79], 1.0);
    }
}
