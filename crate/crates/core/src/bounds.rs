//! Closed-form right-hand sides of the projection error bounds, with their
//! hypotheses checked.
//!
//! All bounds are relative to `‖f‖_{L²(ℝ)}`. `eps_t` is the time concentration
//! of `f` at `T0` and `eps_omega` its band concentration at `Omega0` (for the
//! scaled bound: at `c·α`).

use serde::Serialize;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expansion::{
    band_concentration, expand, l1_norm, outer_projection_error_from, projection_error_from, time_concentration,
    CoefficientVector, Signal,
};
use crate::kernel::{residual_hs_norm, residual_operator_norm, sinc_frequency, DEFAULT_HS_ORDER};

/// How the unscaled hypotheses are read: `n ≥ max(2T², 2Ω0²)` with the
/// evaluation half-width `T ≥ T0`.
pub const HYPOTHESIS_READING: &str = "n >= max(2T^2, 2*Omega0^2) with evaluation half-width T >= T0";

/// Inputs shared by all bound evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInput {
    pub n: usize,
    /// Evaluation half-width.
    pub t: f64,
    pub t0: f64,
    pub omega0: f64,
    pub eps_t: f64,
    pub eps_omega: f64,
    /// Basis scale of `h_k^α(x) = α^{1/2} h_k(αx)`.
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub hs_norm: Option<f64>,
}

impl BoundInput {
    /// `T0 = Ω0 = 2`, zero concentrations, no scaling.
    pub fn new(n: usize, t: f64) -> Self {
        BoundInput {
            n,
            t,
            t0: 2.0,
            omega0: 2.0,
            eps_t: 0.0,
            eps_omega: 0.0,
            alpha: None,
            c: None,
            hs_norm: None,
        }
    }

    fn lambda(&self) -> f64 {
        ((2 * self.n + 1) as f64).sqrt()
    }

    fn check_eps(&self, op: &'static str) -> Result<()> {
        for (name, v) in [("eps_T", self.eps_t), ("eps_Omega", self.eps_omega)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(op, format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::domain(op, format!("T = {} must be positive", self.t)));
        }
        Ok(())
    }

    fn check_unscaled(&self, op: &'static str, t_min: f64) -> Result<()> {
        self.check_eps(op)?;
        if !(self.t0 >= 2.0) {
            return Err(Error::domain(op, format!("T0 = {} violates T0 ≥ 2", self.t0)));
        }
        if !(self.omega0 >= 2.0) {
            return Err(Error::domain(op, format!("Omega0 = {} violates Omega0 ≥ 2", self.omega0)));
        }
        if !(self.t >= t_min) {
            return Err(Error::domain(op, format!("T = {} violates T ≥ {t_min}", self.t)));
        }
        let need = (2.0 * self.t * self.t).max(2.0 * self.omega0 * self.omega0);
        if (self.n as f64) < need {
            return Err(Error::domain(
                op,
                format!("n = {} violates n ≥ max(2T², 2Omega0²) = {need}", self.n),
            ));
        }
        Ok(())
    }
}

/// `2ε_T + ε_Ω + 34T³/√(2n+1)`, bounding `‖f − K_n f‖_{L²([−T,T])}`.
pub fn local_projection_bound(b: &BoundInput) -> Result<f64> {
    b.check_unscaled("local_projection_bound", b.t0)?;
    Ok(2.0 * b.eps_t + b.eps_omega + 34.0 * b.t.powi(3) / b.lambda())
}

/// `ε_Ω + ‖R_n^T‖_HS + 2ε_T`.
///
/// Needs the Hilbert–Schmidt norm, `T ≥ T0` and a sinc frequency
/// `N = (√(2n+1)+√(2n+3))/2 ≥ Ω0`.
pub fn local_projection_bound_hs(b: &BoundInput) -> Result<f64> {
    const OP: &str = "local_projection_bound_hs";
    b.check_eps(OP)?;
    let hs = b.hs_norm.ok_or_else(|| Error::domain(OP, "hs_norm is missing"))?;
    if !(hs >= 0.0 && hs.is_finite()) {
        return Err(Error::domain(OP, format!("hs_norm = {hs} must be non-negative")));
    }
    if !(b.t >= b.t0) {
        return Err(Error::domain(OP, format!("T = {} violates T ≥ T0 = {}", b.t, b.t0)));
    }
    let freq = sinc_frequency(b.n);
    if !(b.omega0 <= freq) {
        return Err(Error::domain(OP, format!("Omega0 = {} violates Omega0 ≤ N = {freq}", b.omega0)));
    }
    Ok(b.eps_omega + hs + 2.0 * b.eps_t)
}

/// `(2ε_T + 1/(2√T) + 12T^{5/2} ln(2n+1)/√(2n+1))^{1/2}`, bounding
/// `‖f − K_n f‖_{L²(ℝ∖[−T,T])}` for `T ≥ 2T0`.
pub fn global_projection_bound(b: &BoundInput) -> Result<f64> {
    b.check_unscaled("global_projection_bound", 2.0 * b.t0)?;
    let l = b.lambda();
    Ok((2.0 * b.eps_t + 0.5 / b.t.sqrt() + 12.0 * b.t.powf(2.5) * (l * l).ln() / l).sqrt())
}

/// `ε_T + ε_{cα} + 24(αT)³/√(2n+1)`, bounding `‖f − K_n^α f‖_{L²([−T,T])}`.
///
/// Requires `T ≥ 2`, `c ≥ 2α` and `n ≥ max(2(αT)², 2c²)`; `eps_omega` must be
/// the band concentration at `c·α`.
pub fn scaled_projection_bound(b: &BoundInput) -> Result<f64> {
    const OP: &str = "scaled_projection_bound";
    b.check_eps(OP)?;
    let alpha = b.alpha.ok_or_else(|| Error::domain(OP, "alpha is missing"))?;
    let c = b.c.ok_or_else(|| Error::domain(OP, "c is missing"))?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(OP, format!("alpha = {alpha} must be positive")));
    }
    if !(b.t >= 2.0) {
        return Err(Error::domain(OP, format!("T = {} violates T ≥ 2", b.t)));
    }
    if !(c >= 2.0 * alpha) {
        return Err(Error::domain(OP, format!("c = {c} violates c ≥ 2α = {}", 2.0 * alpha)));
    }
    let at = alpha * b.t;
    let need = (2.0 * at * at).max(2.0 * c * c);
    if (b.n as f64) < need {
        return Err(Error::domain(OP, format!("n = {} violates n ≥ max(2(αT)², 2c²) = {need}", b.n)));
    }
    Ok(b.eps_t + b.eps_omega + 24.0 * at.powi(3) / b.lambda())
}

/// `17 T^{5/2} ‖f‖_{L¹([−T,T])} / √n`, bounding `‖P_T R_n^T P_T f‖_{L²}`.
pub fn l1_residual_bound(n: usize, t: f64, l1_norm: f64) -> Result<f64> {
    if n == 0 || !(t > 0.0) || !(l1_norm >= 0.0) {
        return Err(Error::domain(
            "l1_residual_bound",
            format!("need n > 0, T > 0, l1 ≥ 0; got n = {n}, T = {t}, l1 = {l1_norm}"),
        ));
    }
    Ok(17.0 * t.powf(2.5) * l1_norm / (n as f64).sqrt())
}

/// Which evaluator [`min_n_for`] inverts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Local,
    Global,
    Scaled,
}

impl BoundKind {
    pub fn evaluate(self, b: &BoundInput) -> Result<f64> {
        match self {
            BoundKind::Local => local_projection_bound(b),
            BoundKind::Global => global_projection_bound(b),
            BoundKind::Scaled => scaled_projection_bound(b),
        }
    }
}

/// Smallest `n` for which the bound of `kind` holds with value `≤ target`,
/// other inputs taken from `base`.
pub fn min_n_for(target: f64, kind: BoundKind, base: &BoundInput) -> Result<usize> {
    const OP: &str = "min_n_for";
    const CEILING: usize = 1 << 52;
    let ok = |n: usize| -> Result<Option<f64>> {
        let b = BoundInput { n, ..*base };
        match kind.evaluate(&b) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Domain { reason, .. }) if reason.starts_with("n = ") => Ok(None),
            Err(e) => Err(e),
        }
    };
    let meets = |n: usize| -> Result<bool> { Ok(ok(n)?.is_some_and(|v| v <= target)) };
    let mut hi = 1usize;
    while !meets(hi)? {
        if hi >= CEILING {
            return Err(Error::domain(OP, format!("no n ≤ 2^52 brings the {kind:?} bound to {target}")));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if meets(lo)? {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One measured error compared with one bound evaluator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessCell {
    pub signal: String,
    pub bound: &'static str,
    pub n: usize,
    pub t: f64,
    pub alpha: f64,
    /// Relative to `‖f‖_{L²(ℝ)}`, except for `l1`, which is absolute like its bound.
    pub measured: f64,
    pub bound_value: f64,
}

impl SoundnessCell {
    pub fn ratio(&self) -> f64 {
        self.measured / self.bound_value
    }

    pub fn holds(&self) -> bool {
        self.measured <= self.bound_value
    }
}

/// A cell whose hypotheses fail, with the violated inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCell {
    pub signal: String,
    pub bound: &'static str,
    pub n: usize,
    pub alpha: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub cells: Vec<SoundnessCell>,
    pub skipped: Vec<SkippedCell>,
}

impl SoundnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &SoundnessCell> {
        self.cells.iter().filter(|c| !c.holds())
    }

    pub fn worst(&self) -> Option<&SoundnessCell> {
        self.cells.iter().max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
    }

    pub fn extend(&mut self, other: SoundnessReport) {
        self.cells.extend(other.cells);
        self.skipped.extend(other.skipped);
    }
}

/// Measured projection errors of `f` against every bound evaluator.
///
/// Parameter choices per `n`:
/// `local` uses `T = T0 = Ω0 = 2`; `global` uses `T = 4`, `T0 = Ω0 = 2`;
/// `hs` uses `T = T0 = 1`, `Ω0 = N`; `scaled` uses `T = 2`, `c = 2α` for each
/// entry of `alphas`; `l1` uses `T = 1`. Cells whose hypotheses fail are
/// listed in [`SoundnessReport::skipped`] and not measured.
pub fn soundness_audit(f: &Signal, ns: &[usize], alphas: &[f64]) -> Result<SoundnessReport> {
    let label = f.label();
    let norm = f.l2_norm();
    let mut report = SoundnessReport::default();
    let mut cache: HashMap<(usize, u64), CoefficientVector> = HashMap::new();
    let mut coeffs = |n: usize, alpha: f64| -> Result<CoefficientVector> {
        if let Some(c) = cache.get(&(n, alpha.to_bits())) {
            return Ok(c.clone());
        }
        let c = expand(f, n, alpha)?;
        cache.insert((n, alpha.to_bits()), c.clone());
        Ok(c)
    };
    let mut record = |bound: &'static str, n: usize, t: f64, alpha: f64, value: Result<f64>| -> Result<bool> {
        match value {
            Ok(bound_value) => {
                report.cells.push(SoundnessCell {
                    signal: label.clone(),
                    bound,
                    n,
                    t,
                    alpha,
                    measured: f64::NAN,
                    bound_value,
                });
                Ok(true)
            }
            Err(Error::Domain { reason, .. }) => {
                report.skipped.push(SkippedCell {
                    signal: label.clone(),
                    bound,
                    n,
                    alpha,
                    reason,
                });
                Ok(false)
            }
            Err(e) => Err(e),
        }
    };
    let concentrations = |t: f64, omega: f64| -> Result<(f64, f64)> {
        Ok((time_concentration(f, t)?, band_concentration(f, omega)?))
    };
    let mut measured = Vec::new();
    for &n in ns {
        let (et, eo) = concentrations(2.0, 2.0)?;
        let local = BoundInput {
            eps_t: et,
            eps_omega: eo,
            ..BoundInput::new(n, 2.0)
        };
        if record("local", n, 2.0, 1.0, local_projection_bound(&local))? {
            measured.push(projection_error_from(f, &coeffs(n, 1.0)?, 2.0)? / norm);
        }
        let global = BoundInput { t: 4.0, ..local };
        if record("global", n, 4.0, 1.0, global_projection_bound(&global))? {
            measured.push(outer_projection_error_from(f, &coeffs(n, 1.0)?, 4.0)? / norm);
        }
        let omega0 = sinc_frequency(n);
        let hs_input = BoundInput {
            t0: 1.0,
            omega0,
            ..BoundInput::new(n, 1.0)
        };
        let hs_value = match residual_hs_norm(n, 1.0, DEFAULT_HS_ORDER) {
            Ok(hs) => {
                let (et, eo) = concentrations(1.0, omega0)?;
                local_projection_bound_hs(&BoundInput {
                    eps_t: et,
                    eps_omega: eo,
                    hs_norm: Some(hs),
                    ..hs_input
                })
            }
            Err(e) => Err(e),
        };
        if record("hs", n, 1.0, 1.0, hs_value)? {
            measured.push(projection_error_from(f, &coeffs(n, 1.0)?, 1.0)? / norm);
        }
        for &alpha in alphas {
            let c = 2.0 * alpha;
            let (et, eo) = concentrations(2.0, c * alpha)?;
            let b = BoundInput {
                eps_t: et,
                eps_omega: eo,
                alpha: Some(alpha),
                c: Some(c),
                ..BoundInput::new(n, 2.0)
            };
            if record("scaled", n, 2.0, alpha, scaled_projection_bound(&b))? {
                measured.push(projection_error_from(f, &coeffs(n, alpha)?, 2.0)? / norm);
            }
        }
        let l1 = l1_norm(f, 1.0)?;
        if record("l1", n, 1.0, 1.0, l1_residual_bound(n, 1.0, l1))? {
            let g = f.clone();
            measured.push(residual_operator_norm(n, 1.0, move |x| g.value(x), &f.breakpoints())?);
        }
    }
    for (cell, m) in report.cells.iter_mut().zip(measured) {
        cell.measured = m;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn local_arithmetic() {
        let b = BoundInput::new(800, 2.0);
        assert_relative_eq!(local_projection_bound(&b).unwrap(), 34.0 * 8.0 / 1601f64.sqrt(), max_relative = 1e-15);
        let far = BoundInput {
            eps_t: 0.1,
            eps_omega: 0.05,
            ..BoundInput::new(1 << 50, 2.0)
        };
        assert!((local_projection_bound(&far).unwrap() - 0.25).abs() < 1e-5);
    }

    #[test]
    fn local_gates() {
        assert!(local_projection_bound(&BoundInput::new(7, 2.0)).is_err());
        assert!(local_projection_bound(&BoundInput { t0: 1.0, ..BoundInput::new(100, 2.0) }).is_err());
        assert!(local_projection_bound(&BoundInput { omega0: 8.0, ..BoundInput::new(100, 2.0) }).is_err());
        assert!(local_projection_bound(&BoundInput { t0: 3.0, ..BoundInput::new(100, 2.0) }).is_err());
        assert!(local_projection_bound(&BoundInput { eps_t: 1.5, ..BoundInput::new(100, 2.0) }).is_err());
        let err = local_projection_bound(&BoundInput::new(7, 2.0)).unwrap_err().to_string();
        assert!(err.contains("2T²"), "{err}");
    }

    #[test]
    fn hs_variant() {
        let b = BoundInput {
            t0: 1.0,
            hs_norm: Some(0.051),
            ..BoundInput::new(10, 1.0)
        };
        assert_relative_eq!(local_projection_bound_hs(&b).unwrap(), 0.051);
        assert!(local_projection_bound_hs(&BoundInput::new(10, 2.0)).is_err());
        let wide = BoundInput {
            omega0: 6.0,
            ..b
        };
        assert!(local_projection_bound_hs(&wide).is_err());
    }

    #[test]
    fn global_limit() {
        let b = BoundInput::new(1 << 60, 4.0);
        assert!((global_projection_bound(&b).unwrap() - 0.5).abs() < 1e-4);
        let b = BoundInput {
            eps_t: 0.01,
            ..BoundInput::new(1000, 4.0)
        };
        let want = (0.02 + 0.25 + 12.0 * 32.0 * 2001f64.ln() / 2001f64.sqrt()).sqrt();
        assert_relative_eq!(global_projection_bound(&b).unwrap(), want, max_relative = 1e-15);
        assert!(global_projection_bound(&BoundInput::new(1000, 3.0)).is_err());
    }

    #[test]
    fn scaled_examples() {
        let b = BoundInput {
            alpha: Some(0.5),
            c: Some(1.0),
            ..BoundInput::new(12, 2.0)
        };
        assert_relative_eq!(scaled_projection_bound(&b).unwrap(), 4.8, max_relative = 1e-15);
        // α = 1/T, c = TΩ
        let (t, omega) = (4.0, 3.0);
        let b = BoundInput {
            alpha: Some(1.0 / t),
            c: Some(t * omega),
            eps_t: 0.01,
            eps_omega: 0.02,
            ..BoundInput::new(400, t)
        };
        assert_relative_eq!(scaled_projection_bound(&b).unwrap(), 0.03 + 24.0 / 801f64.sqrt(), max_relative = 1e-14);
        assert!(scaled_projection_bound(&BoundInput { c: Some(0.4), ..b }).is_err());
        assert!(scaled_projection_bound(&BoundInput { alpha: None, ..b }).is_err());
        assert!(scaled_projection_bound(&BoundInput { n: 100, ..b }).is_err());
    }

    #[test]
    fn l1_arithmetic() {
        assert_relative_eq!(l1_residual_bound(100, 1.0, 1.0).unwrap(), 1.7, max_relative = 1e-15);
        assert_eq!(l1_residual_bound(100, 1.0, 0.0).unwrap(), 0.0);
        assert!(l1_residual_bound(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_search() {
        let base = BoundInput::new(0, 2.0);
        let n = min_n_for(1.0, BoundKind::Local, &base).unwrap();
        assert!(local_projection_bound(&BoundInput { n, ..base }).unwrap() <= 1.0);
        assert!(local_projection_bound(&BoundInput { n: n - 1, ..base }).unwrap() > 1.0);
        // preconditions dominate when the target is loose
        assert_eq!(min_n_for(1e9, BoundKind::Local, &base).unwrap(), 8);
        let stuck = BoundInput { eps_t: 0.5, ..base };
        assert!(min_n_for(0.5, BoundKind::Local, &stuck).is_err());
    }
}
