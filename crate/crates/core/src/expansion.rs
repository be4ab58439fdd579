//! Signals, Hermite expansion coefficients, truncated projections and
//! time/band concentration.
//!
//! The scaled basis is `h_k^α(x) = α^{1/2} h_k(αx)`, so `α > 1` concentrates
//! the first `n+1` functions on `[−√(2n+1)/α, √(2n+1)/α]` while widening their
//! band, and the projection is `K_n^α f = Σ_{k≤n} ⟨f, h_k^α⟩ h_k^α`. In terms
//! of the dilation `δ_a f(x) = a^{-1/2} f(x/a)` this basis is `δ_{1/α} h_k`, and
//! `⟨f, h_k^α⟩ = ⟨δ_α f, h_k⟩`. Fourier transforms use the unitary
//! normalization `f̂(ω) = (2π)^{-1/2} ∫ f(t) e^{-itω} dt`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{HermiteRecurrence, DEFAULT_MAX_DEGREE};
use crate::quadrature::{quad_integrate, CompositeRule, Neumaier, QuadMeta};

/// Extra half-width past the turning point beyond which `h_k` is negligible.
const HERMITE_TAIL_MARGIN: f64 = 10.0;
/// Nodes handled per parallel work item in [`expand`].
const CHUNK: usize = 64;

/// The undilated profile of a [`Signal`].
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `1_{[a,b]}`
    Indicator { a: f64, b: f64 },
    /// `(1 − |x−center|/half_width)₊`
    Hat { center: f64, half_width: f64 },
    /// `exp(−x²/(2σ²))`
    Gaussian { sigma: f64 },
    /// `h_k`
    Hermite { k: usize },
    /// Piecewise-linear interpolant of the samples, zero outside them.
    Sampled { xs: Arc<[f64]>, values: Arc<[f64]> },
}

/// Support of a signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Interval(f64, f64),
    Unbounded,
}

/// `δ_d s(x) = d^{-1/2} s(x/d)` for a [`Shape`] `s`; `d = 1` unless dilated.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    shape: Shape,
    dilation: f64,
}

fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {v} must be positive and finite")))
    }
}

impl Signal {
    fn from_shape(shape: Shape) -> Self {
        Signal { shape, dilation: 1.0 }
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain("indicator", format!("need a < b, got [{a}, {b}]")));
        }
        Ok(Self::from_shape(Shape::Indicator { a, b }))
    }

    pub fn hat(center: f64, half_width: f64) -> Result<Self> {
        positive("hat", "half_width", half_width)?;
        if !center.is_finite() {
            return Err(Error::domain("hat", "center is not finite"));
        }
        Ok(Self::from_shape(Shape::Hat { center, half_width }))
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("gaussian", "sigma", sigma)?;
        Ok(Self::from_shape(Shape::Gaussian { sigma }))
    }

    pub fn hermite(k: usize) -> Result<Self> {
        if k > DEFAULT_MAX_DEGREE {
            return Err(Error::Capacity { n: k, max: DEFAULT_MAX_DEGREE });
        }
        Ok(Self::from_shape(Shape::Hermite { k }))
    }

    /// Samples with strictly increasing, finite abscissae.
    pub fn sampled(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let bad = |reason: String| Error::Data {
            source_name: "samples".into(),
            reason,
        };
        if xs.len() != values.len() {
            return Err(bad(format!("{} abscissae but {} values", xs.len(), values.len())));
        }
        if xs.len() < 2 {
            return Err(bad("need at least two samples".into()));
        }
        if let Some(i) = xs.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(bad(format!("non-finite entry at position {i}")));
        }
        if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
            return Err(bad(format!("abscissae not strictly increasing at row {}", i + 2)));
        }
        Ok(Self::from_shape(Shape::Sampled {
            xs: xs.into(),
            values: values.into(),
        }))
    }

    /// Two-column `x,value` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |reason: String| Error::Data {
                source_name: source_name.to_string(),
                reason,
            };
            if rec.len() != 2 {
                return Err(bad(format!("row {} has {} columns, expected 2", i + 1, rec.len())));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if i == 0 => continue,
                _ => return Err(bad(format!("row {} is not numeric", i + 1))),
            }
        }
        Self::sampled(xs, vs).map_err(|e| match e {
            Error::Data { reason, .. } => Error::Data {
                source_name: source_name.to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(BufReader::new(file), &path.display().to_string())
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    /// `δ_α f(x) = α^{-1/2} f(x/α)`; preserves the `L²` norm.
    pub fn dilated(&self, alpha: f64) -> Result<Self> {
        positive("dilated", "alpha", alpha)?;
        Ok(Signal {
            shape: self.shape.clone(),
            dilation: self.dilation * alpha,
        })
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        let base = match &self.shape {
            Shape::Indicator { a, b } => format!("indicator[{a},{b}]"),
            Shape::Hat { center, half_width } => format!("hat(center={center},half_width={half_width})"),
            Shape::Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
            Shape::Hermite { k } => format!("hermite({k})"),
            Shape::Sampled { xs, .. } => format!("sampled({} points)", xs.len()),
        };
        if self.dilation == 1.0 {
            base
        } else {
            format!("dilate({base},{})", self.dilation)
        }
    }

    fn base_value(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Indicator { a, b } => {
                if *a <= u && u <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Hat { center, half_width } => (1.0 - (u - center).abs() / half_width).max(0.0),
            Shape::Gaussian { sigma } => (-0.5 * (u / sigma).powi(2)).exp(),
            Shape::Hermite { k } => HermiteRecurrence::new(u).nth(*k).unwrap().to_f64(),
            Shape::Sampled { xs, values } => interpolate(xs, values, u),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = self.dilation;
        if d == 1.0 {
            self.base_value(x)
        } else {
            self.base_value(x / d) / d.sqrt()
        }
    }

    fn base_support(&self) -> Support {
        match &self.shape {
            Shape::Indicator { a, b } => Support::Interval(*a, *b),
            Shape::Hat { center, half_width } => Support::Interval(center - half_width, center + half_width),
            Shape::Gaussian { .. } | Shape::Hermite { .. } => Support::Unbounded,
            Shape::Sampled { xs, .. } => Support::Interval(xs[0], xs[xs.len() - 1]),
        }
    }

    pub fn support(&self) -> Support {
        match self.base_support() {
            Support::Interval(a, b) => Support::Interval(a * self.dilation, b * self.dilation),
            Support::Unbounded => Support::Unbounded,
        }
    }

    /// Interval carrying all but a negligible part of the undilated profile.
    fn base_extent(&self) -> (f64, f64) {
        match (&self.shape, self.base_support()) {
            (_, Support::Interval(a, b)) => (a, b),
            (Shape::Gaussian { sigma }, _) => {
                // exp(−x²/(2σ²)) < 10⁻¹⁶ beyond this
                let l = sigma * (2.0 * 16.0 * std::f64::consts::LN_10).sqrt();
                (-l, l)
            }
            (Shape::Hermite { k }, _) => {
                let l = ((2 * k + 1) as f64).sqrt() + HERMITE_TAIL_MARGIN;
                (-l, l)
            }
            _ => unreachable!("only gaussian and hermite shapes are unbounded"),
        }
    }

    fn extent(&self) -> (f64, f64) {
        let (a, b) = self.base_extent();
        (a * self.dilation, b * self.dilation)
    }

    fn base_breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Indicator { a, b } => vec![*a, *b],
            Shape::Hat { center, half_width } => vec![center - half_width, *center, center + half_width],
            Shape::Gaussian { .. } | Shape::Hermite { .. } => vec![],
            Shape::Sampled { xs, .. } => xs.to_vec(),
        }
    }

    /// Points where the signal or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.base_breakpoints().into_iter().map(|t| t * self.dilation).collect()
    }

    /// Oscillation frequency of the signal itself, for panel sizing.
    fn own_frequency(&self) -> f64 {
        match &self.shape {
            Shape::Hermite { k } => ((2 * k + 1) as f64).sqrt() / self.dilation,
            Shape::Gaussian { sigma } => 1.0 / (sigma * self.dilation),
            _ => 0.0,
        }
    }

    /// `‖f‖_{L²(ℝ)}`, in closed form for every shape.
    pub fn l2_norm(&self) -> f64 {
        match &self.shape {
            Shape::Indicator { a, b } => (b - a).sqrt(),
            Shape::Hat { half_width, .. } => (2.0 * half_width / 3.0).sqrt(),
            Shape::Gaussian { sigma } => (sigma * PI.sqrt()).sqrt(),
            Shape::Hermite { .. } => 1.0,
            Shape::Sampled { xs, values } => {
                let s: Neumaier = xs
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(x, v)| (x[1] - x[0]) / 3.0 * (v[0] * v[0] + v[0] * v[1] + v[1] * v[1]))
                    .collect();
                s.sum().sqrt()
            }
        }
    }

    fn nonzero_norm(&self, op: &'static str) -> Result<f64> {
        let l2 = self.l2_norm();
        if l2 > 0.0 {
            Ok(l2)
        } else {
            Err(Error::domain(op, "signal has zero L² norm"))
        }
    }
}

fn interpolate(xs: &[f64], values: &[f64], u: f64) -> f64 {
    if !(u >= xs[0] && u <= xs[xs.len() - 1]) {
        return 0.0;
    }
    let i = xs.partition_point(|&t| t <= u);
    if i == xs.len() {
        return values[xs.len() - 1];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    v0 + (v1 - v0) * (u - x0) / (x1 - x0)
}

/// `⟨f, h_k^α⟩` for `k = 0..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub alpha: f64,
    pub n: usize,
    pub coeffs: Vec<f64>,
    pub quad_meta: QuadMeta,
}

impl CoefficientVector {
    /// `Σ c_k²`, the squared norm of the projection.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).collect::<Neumaier>().sum()
    }

    /// `# n=…,alpha=…,panel_width=…,nodes_per_panel=…,a=…,b=…`, then `k,coeff` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = &self.quad_meta;
        writeln!(
            out,
            "# n={},alpha={},panel_width={},nodes_per_panel={},a={},b={}",
            self.n, self.alpha, m.panel_width, m.nodes_per_panel, m.a, m.b
        )
        .map_err(|e| Error::Csv(e.into()))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "coeff"])?;
        for (k, c) in self.coeffs.iter().enumerate() {
            w.write_record([k.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let bad = |reason: String| Error::Data {
            source_name: source_name.to_string(),
            reason,
        };
        let mut buf = BufReader::new(reader);
        let mut first = String::new();
        buf.read_line(&mut first).map_err(|e| Error::Csv(e.into()))?;
        let meta = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| bad("missing '#' metadata line".into()))?;
        let mut get = std::collections::HashMap::new();
        for kv in meta.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("malformed metadata '{kv}'")))?;
            get.insert(k.trim().to_string(), v.trim().to_string());
        }
        let field = |k: &str| -> Result<&String> { get.get(k).ok_or_else(|| bad(format!("metadata lacks {k}"))) };
        let num = |k: &str| -> Result<f64> { field(k)?.parse().map_err(|_| bad(format!("metadata {k} is not a number"))) };
        let n: usize = field("n")?.parse().map_err(|_| bad("metadata n is not an integer".into()))?;
        let nodes_per_panel: usize = field("nodes_per_panel")?
            .parse()
            .map_err(|_| bad("metadata nodes_per_panel is not an integer".into()))?;
        let quad_meta = QuadMeta {
            panel_width: num("panel_width")?,
            nodes_per_panel,
            a: num("a")?,
            b: num("b")?,
        };
        let mut coeffs = Vec::new();
        for (i, rec) in csv::Reader::from_reader(buf).records().enumerate() {
            let rec = rec?;
            let k: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("bad k on row {}", i + 1)))?;
            if k != i {
                return Err(bad(format!("row {} has k = {k}", i + 1)));
            }
            coeffs.push(rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("bad coeff on row {}", i + 1)))?);
        }
        if coeffs.len() != n + 1 {
            return Err(bad(format!("{} coefficients for n = {n}", coeffs.len())));
        }
        Ok(CoefficientVector {
            alpha: num("alpha")?,
            n,
            coeffs,
            quad_meta,
        })
    }
}

fn basis_extent(n: usize, alpha: f64) -> f64 {
    (((2 * n + 1) as f64).sqrt() + HERMITE_TAIL_MARGIN) / alpha
}

/// Quadrature layout shared by [`expand`] and the projection errors.
fn projection_rule(f: &Signal, n: usize, alpha: f64, interval: (f64, f64)) -> Result<CompositeRule> {
    let freq = (((2 * n + 1) as f64).sqrt() * alpha).max(f.own_frequency());
    CompositeRule::new(interval.0, interval.1, freq, &f.breakpoints())
}

/// Coefficients `⟨f, h_k^α⟩`, `k = 0..=n`.
pub fn expand(f: &Signal, n: usize, alpha: f64) -> Result<CoefficientVector> {
    positive("expand", "alpha", alpha)?;
    if n >= DEFAULT_MAX_DEGREE {
        return Err(Error::Capacity { n, max: DEFAULT_MAX_DEGREE });
    }
    let (mut lo, mut hi) = f.extent();
    if f.support() == Support::Unbounded {
        let l = basis_extent(n, alpha);
        lo = lo.max(-l);
        hi = hi.min(l);
    }
    let rule = projection_rule(f, n, alpha, (lo, hi))?;
    let scale = alpha.sqrt();
    let partials: Vec<Vec<f64>> = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(rule.weights.par_chunks(CHUNK))
        .map(|(xs, ws)| {
            let mut acc = vec![0.0; n + 1];
            for (&x, &w) in xs.iter().zip(ws) {
                let fx = f.value(x);
                if !fx.is_finite() {
                    return Err(Error::Integration { location: x });
                }
                if fx == 0.0 {
                    continue;
                }
                let c = w * fx * scale;
                for (slot, h) in acc.iter_mut().zip(HermiteRecurrence::new(x * alpha)) {
                    *slot += c * h.to_f64();
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut coeffs = vec![0.0; n + 1];
    for p in partials {
        for (c, v) in coeffs.iter_mut().zip(p) {
            *c += v;
        }
    }
    Ok(CoefficientVector {
        alpha,
        n,
        coeffs,
        quad_meta: rule.meta,
    })
}

fn basis_sum(coeffs: &[f64], alpha: f64, x: f64) -> f64 {
    let s: f64 = coeffs
        .iter()
        .zip(HermiteRecurrence::new(x * alpha))
        .map(|(c, h)| c * h.to_f64())
        .sum();
    s * alpha.sqrt()
}

/// `K_n^α f` at each point of `xs`.
pub fn reconstruct(c: &CoefficientVector, xs: &[f64]) -> Vec<f64> {
    xs.par_iter().map(|&x| basis_sum(&c.coeffs, c.alpha, x)).collect()
}

fn squared_error_on(f: &Signal, c: &CoefficientVector, interval: (f64, f64)) -> Result<f64> {
    if interval.0 >= interval.1 {
        return Ok(0.0);
    }
    let rule = projection_rule(f, c.n, c.alpha, interval)?;
    let vals: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&x| {
            let r = f.value(x) - basis_sum(&c.coeffs, c.alpha, x);
            r * r
        })
        .collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::Integration { location: rule.nodes[i] });
    }
    Ok(vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect::<Neumaier>().sum())
}

/// `‖f − K_n^α f‖_{L²([−T,T])}` for precomputed coefficients.
pub fn projection_error_from(f: &Signal, c: &CoefficientVector, t: f64) -> Result<f64> {
    positive("projection_error", "T", t)?;
    Ok(squared_error_on(f, c, (-t, t))?.sqrt())
}

/// `‖f − K_n^α f‖_{L²([−T,T])}`.
pub fn projection_error(f: &Signal, n: usize, alpha: f64, t: f64) -> Result<f64> {
    positive("projection_error", "T", t)?;
    projection_error_from(f, &expand(f, n, alpha)?, t)
}

/// `‖f − K_n^α f‖_{L²(ℝ∖[−T,T])}` for precomputed coefficients.
pub fn outer_projection_error_from(f: &Signal, c: &CoefficientVector, t: f64) -> Result<f64> {
    positive("outer_projection_error", "T", t)?;
    let (lo, hi) = f.extent();
    let l = basis_extent(c.n, c.alpha).max(lo.abs()).max(hi.abs());
    let right = squared_error_on(f, c, (t, l))?;
    let left = squared_error_on(f, c, (-l, -t))?;
    Ok((left + right).sqrt())
}

/// `‖f − K_n^α f‖_{L²(ℝ∖[−T,T])}`.
pub fn outer_projection_error(f: &Signal, n: usize, alpha: f64, t: f64) -> Result<f64> {
    outer_projection_error_from(f, &expand(f, n, alpha)?, t)
}

/// `∫_{−T}^{T} |f|`.
pub fn l1_norm(f: &Signal, t: f64) -> Result<f64> {
    positive("l1_norm", "T", t)?;
    let rule = CompositeRule::new(-t, t, f.own_frequency(), &f.breakpoints())?;
    rule.integrate(|x| f.value(x).abs())
}

/// `ε_T = (∫_{|t|>T} |f|² / ‖f‖²)^{1/2}`, integrating the tail directly.
pub fn time_concentration(f: &Signal, t: f64) -> Result<f64> {
    positive("time_concentration", "T", t)?;
    let l2 = f.nonzero_norm("time_concentration")?;
    let u = t / f.dilation;
    let ratio = match &f.shape {
        Shape::Gaussian { sigma } => libm::erfc(u / sigma),
        _ => base_tail_energy(f, u)? / (l2 * l2),
    };
    Ok(ratio.clamp(0.0, 1.0).sqrt())
}

/// `∫_{|u|>T} |s(u)|²` for the undilated profile.
fn base_tail_energy(f: &Signal, t: f64) -> Result<f64> {
    let (lo, hi) = f.base_extent();
    let freq = match f.shape {
        Shape::Hermite { k } => 2.0 * ((2 * k + 1) as f64).sqrt(),
        _ => 0.0,
    };
    let breaks = f.base_breakpoints();
    let piece = |a: f64, b: f64| -> Result<f64> {
        if a >= b {
            return Ok(0.0);
        }
        CompositeRule::new(a, b, freq, &breaks)?.integrate(|u| f.base_value(u).powi(2))
    };
    Ok(piece(t, hi)? + piece(lo, -t)?)
}

/// `π/2 − Si(x)` for `x ≥ 0`.
pub fn sine_integral_complement(x: f64) -> f64 {
    if x > 50.0 {
        // π/2 − Si(x) = f(x) cos x + g(x) sin x, asymptotic auxiliary functions
        let inv2 = 1.0 / (x * x);
        let (mut f, mut g) = (0.0, 0.0);
        let (mut tf, mut tg) = (1.0 / x, inv2);
        for k in 0..30 {
            f += tf;
            g += tg;
            let k = k as f64;
            let nf = -tf * (2.0 * k + 1.0) * (2.0 * k + 2.0) * inv2;
            let ng = -tg * (2.0 * k + 2.0) * (2.0 * k + 3.0) * inv2;
            if nf.abs() >= tf.abs() || nf.abs() < 1e-18 * f.abs() {
                break;
            }
            tf = nf;
            tg = ng;
        }
        f * x.cos() + g * x.sin()
    } else if x <= 0.0 {
        0.5 * PI
    } else {
        let si = quad_integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, (0.0, x), 0.0).expect("finite integrand");
        0.5 * PI - si
    }
}

fn sinc4(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - 2.0 * u * u / 3.0
    } else {
        (u.sin() / u).powi(4)
    }
}

/// `∫_z^∞ (sin u/u)⁴ du`, `z ≥ 0`.
fn sinc4_tail(z: f64) -> f64 {
    let zz = z + 400.0;
    let head = quad_integrate(sinc4, (z, zz), 0.0).expect("finite integrand");
    // sin⁴ = (3 − 4cos 2u + cos 4u)/8 and ∫_Z^∞ cos(au)/u⁴ ≈ −sin(aZ)/(aZ⁴)
    let z4 = zz.powi(4);
    let tail = (3.0 / (3.0 * zz.powi(3)) + 4.0 * (2.0 * zz).sin() / (2.0 * z4) - (4.0 * zz).sin() / (4.0 * z4)) / 8.0;
    head + tail
}

/// `ε_Ω = (∫_{|ω|>Ω} |f̂|² / ‖f‖²)^{1/2}`.
pub fn band_concentration(f: &Signal, omega: f64) -> Result<f64> {
    positive("band_concentration", "Omega", omega)?;
    f.nonzero_norm("band_concentration")?;
    // ε_Ω(δ_d s) = ε_{dΩ}(s)
    let w = omega * f.dilation;
    let ratio = match &f.shape {
        Shape::Indicator { a, b } => {
            let z = 0.5 * w * (b - a);
            2.0 / PI * (z.sin().powi(2) / z + sine_integral_complement(2.0 * z))
        }
        Shape::Hat { half_width, .. } => 3.0 / PI * sinc4_tail(0.5 * w * half_width),
        Shape::Gaussian { sigma } => libm::erfc(sigma * w),
        Shape::Hermite { .. } => base_tail_energy(f, w)?,
        Shape::Sampled { xs, values } => sampled_band_ratio(xs, values, w, |_| 1.0)?.0,
    };
    Ok(ratio.clamp(0.0, 1.0).sqrt())
}

/// Minimum DFT length for sampled signals.
pub const MIN_DFT_LEN: usize = 1 << 14;
const MAX_DFT_LEN: usize = 1 << 23;
/// Zero-padded window length, in multiples of the sample span.
const DFT_PADDING: f64 = 4.0;
/// Resampling step as a fraction of the sample span.
const DFT_RESOLUTION: f64 = 16384.0;

/// Energy fraction above `omega` and the weighted energy `Σ weight(ω)|F|² / Σ|F|²`
/// of the piecewise-linear signal, via a zero-padded DFT.
///
/// The in-band energy integrates the sampled spectrum exactly: with the
/// discrete autocorrelation `r_m` (inverse DFT of `|F|²`),
/// `∫_{−Ω}^{Ω} |F(ω)|² dω ∝ 2Ω r_0 + Σ_{m≠0} r_m · 2 sin(Ωmh)/(mh)`.
fn sampled_band_ratio(
    xs: &[f64],
    values: &[f64],
    omega: f64,
    weight: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let span = x1 - x0;
    let window = DFT_PADDING * span;
    let target = (PI / (4.0 * omega)).min(span / DFT_RESOLUTION);
    let len = ((window / target).ceil() as usize).next_power_of_two().max(MIN_DFT_LEN);
    if len > MAX_DFT_LEN {
        return Err(Error::domain("band_concentration", format!("Omega = {omega} needs a DFT longer than 2^23")));
    }
    let h = window / len as f64;
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|m| {
            let x = x0 + m as f64 * h;
            Complex::new(if x <= x1 { interpolate(xs, values, x) } else { 0.0 }, 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let dw = 2.0 * PI / window;
    let mut total = Neumaier::default();
    let mut weighted = Neumaier::default();
    for (j, c) in buf.iter_mut().enumerate() {
        let idx = if j < len / 2 { j as f64 } else { j as f64 - len as f64 };
        let e = c.norm_sqr();
        total.add(e);
        weighted.add(weight((idx * dw).abs()) * e);
        *c = Complex::new(e, 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let r0 = buf[0].re;
    let mut band = Neumaier::default();
    band.add(omega * h / PI);
    for (m, r) in buf.iter().enumerate().take(len / 2).skip(1) {
        let m = m as f64;
        band.add(2.0 / PI * (r.re / r0) * (omega * m * h).sin() / m);
    }
    Ok((1.0 - band.sum(), weighted.sum() / total.sum()))
}

/// `‖f‖_{H^s} = (∫ (1+|ω|)^{2s} |f̂(ω)|² dω)^{1/2}`.
///
/// Indicators lie in `H^s` only for `s < 1/2` and hats for `s < 3/2`.
pub fn sobolev_norm(f: &Signal, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain("sobolev_norm", format!("s = {s} must be non-negative")));
    }
    let l2 = f.nonzero_norm("sobolev_norm")?;
    let d = f.dilation;
    // |f̂_d(ω)|² = d |ŝ(dω)|², so ∫ (1+|u|/d)^{2s} |ŝ(u)|² du
    let weight = |u: f64| (1.0 + u.abs() / d).powf(2.0 * s);
    let sq = match &f.shape {
        Shape::Indicator { a, b } => {
            let w = b - a;
            let density = move |u: f64| {
                if u.abs() < 1e-8 {
                    w * w / (2.0 * PI)
                } else {
                    2.0 / PI * (0.5 * u * w).sin().powi(2) / (u * u)
                }
            };
            spectral_with_tail(density, weight, w, 1.0 / PI, 2, s, d)?
        }
        Shape::Hat { half_width, .. } => {
            let w = *half_width;
            let density = move |u: f64| w * w / (2.0 * PI) * sinc4(0.5 * u * w);
            spectral_with_tail(density, weight, w, 3.0 / (PI * w * w), 4, s, d)?
        }
        Shape::Gaussian { sigma } => {
            let l = 9.0 / sigma;
            2.0 * quad_integrate(|u| weight(u) * sigma * sigma * (-(sigma * u).powi(2)).exp(), (0.0, l), 0.0)?
        }
        Shape::Hermite { k } => {
            let l = ((2 * k + 1) as f64).sqrt() + HERMITE_TAIL_MARGIN;
            let freq = 2.0 * ((2 * k + 1) as f64).sqrt();
            quad_integrate(|u| weight(u) * HermiteRecurrence::new(u).nth(*k).unwrap().to_f64().powi(2), (-l, l), freq)?
        }
        Shape::Sampled { xs, values } => {
            let base_l2 = l2;
            let (_, weighted) = sampled_band_ratio(xs, values, 1.0, weight)?;
            base_l2 * base_l2 * weighted
        }
    };
    Ok(sq.sqrt())
}

/// `2∫_0^∞ weight·density` where `density(u) ≈ c/u^m` on average for large `u`.
fn spectral_with_tail(
    density: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
    width: f64,
    c: f64,
    m: i32,
    s: f64,
    d: f64,
) -> Result<f64> {
    let m = m as f64;
    if 2.0 * s >= m - 1.0 {
        return Err(Error::domain(
            "sobolev_norm",
            format!("signal is not in H^s for s = {s} (needs s < {})", 0.5 * (m - 1.0)),
        ));
    }
    let cut = (1e4 / width).max(10.0 * d);
    let head = quad_integrate(|u| weight(u) * density(u), (0.0, cut), width)?;
    // (1+u/d)^{2s} = d^{-2s} u^{2s} Σ_j C(2s, j) (d/u)^j, valid for u > d
    let mut tail = 0.0;
    let mut binom = 1.0;
    for j in 0..200 {
        let jf = j as f64;
        let term = binom * d.powf(jf) * cut.powf(2.0 * s - m - jf + 1.0) / (m + jf - 1.0 - 2.0 * s);
        tail += term;
        if term.abs() < 1e-17 * tail.abs() {
            break;
        }
        binom *= (2.0 * s - jf) / (jf + 1.0);
    }
    Ok(2.0 * (head + c * d.powf(-2.0 * s) * tail))
}

/// `‖f‖_{H^s} / ((1+Ω)^s ‖f‖_{L²})`, an upper bound for `ε_Ω`.
pub fn sobolev_band_bound(hs_norm: f64, l2_norm: f64, s: f64, omega: f64) -> f64 {
    hs_norm / ((1.0 + omega).powf(s) * l2_norm)
}

/// Time and band concentration of one signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub t: f64,
    pub eps_t: f64,
    pub omega: f64,
    pub eps_omega: f64,
    pub l2_norm: f64,
}

pub fn concentration_report(f: &Signal, t: f64, omega: f64) -> Result<ConcentrationReport> {
    Ok(ConcentrationReport {
        t,
        eps_t: time_concentration(f, t)?,
        omega,
        eps_omega: band_concentration(f, omega)?,
        l2_norm: f.l2_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_eval;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn hermite_signal_has_unit_coefficient() {
        let c = expand(&Signal::hermite(3).unwrap(), 6, 1.0).unwrap();
        for (k, v) in c.coeffs.iter().enumerate() {
            assert_abs_diff_eq!(*v, if k == 3 { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn indicator_coefficients() {
        let f = Signal::indicator(-0.5, 0.5).unwrap();
        let c = expand(&f, 4, 1.0).unwrap();
        assert_abs_diff_eq!(c.coeffs[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.coeffs[3], 0.0, epsilon = 1e-15);
        // π^{-1/4} √(2π) (Φ(1/2) − Φ(−1/2)), 50 digits
        assert_relative_eq!(c.coeffs[0], 0.720_968_182_787_399_5, max_relative = 1e-14);
        assert_eq!(c.quad_meta.nodes_per_panel, 10);
    }

    #[test]
    fn reconstruct_basis_element() {
        let c = expand(&Signal::hermite(2).unwrap(), 5, 1.0).unwrap();
        let xs = [-2.0, -0.3, 0.0, 0.7, 3.1];
        for (x, v) in xs.iter().zip(reconstruct(&c, &xs)) {
            assert_abs_diff_eq!(v, hermite_eval(2, *x).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_error_of_basis_element() {
        let e = projection_error(&Signal::hermite(4).unwrap(), 6, 1.0, 2.0).unwrap();
        assert!(e < 1e-10, "{e}");
    }

    #[test]
    fn scaling_covariance() {
        let f = Signal::hat(0.1, 0.8).unwrap();
        for alpha in [0.5, 3.0] {
            let direct = expand(&f, 12, alpha).unwrap();
            let moved = expand(&f.dilated(alpha).unwrap(), 12, 1.0).unwrap();
            for (a, b) in direct.coeffs.iter().zip(&moved.coeffs) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn scaled_basis_reproduces_itself() {
        // √α h_3(αx) = δ_{1/α} h_3
        let f = Signal::hermite(3).unwrap().dilated(0.25).unwrap();
        let c = expand(&f, 5, 4.0).unwrap();
        assert_abs_diff_eq!(c.coeffs[3], 1.0, epsilon = 1e-12);
        assert!(projection_error_from(&f, &c, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn closed_form_norms() {
        assert_relative_eq!(Signal::indicator(-0.5, 1.5).unwrap().l2_norm(), 2f64.sqrt());
        assert_relative_eq!(Signal::hat(0.0, 1.0).unwrap().l2_norm(), (2.0f64 / 3.0).sqrt());
        let g = Signal::gaussian(0.7).unwrap();
        let q = quad_integrate(|x| g.value(x).powi(2), (-10.0, 10.0), 0.0).unwrap();
        assert_relative_eq!(g.l2_norm().powi(2), q, max_relative = 1e-13);
        let s = Signal::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(s.l2_norm(), (2.0f64 / 3.0).sqrt(), max_relative = 1e-15);
        let d = Signal::hat(0.0, 1.0).unwrap().dilated(3.0).unwrap();
        let q = quad_integrate_with(&d);
        assert_relative_eq!(d.l2_norm().powi(2), q, max_relative = 1e-13);
    }

    fn quad_integrate_with(f: &Signal) -> f64 {
        let (a, b) = f.extent();
        CompositeRule::new(a, b, 0.0, &f.breakpoints()).unwrap().integrate(|x| f.value(x).powi(2)).unwrap()
    }

    #[test]
    fn time_concentration_examples() {
        let f = Signal::indicator(-0.5, 0.5).unwrap();
        assert_eq!(time_concentration(&f, 0.5).unwrap(), 0.0);
        assert_relative_eq!(time_concentration(&f, 0.25).unwrap(), 0.5f64.sqrt(), max_relative = 1e-14);
        assert_eq!(time_concentration(&Signal::hat(0.0, 1.0).unwrap(), 1.0).unwrap(), 0.0);
        let g = Signal::gaussian(1.0).unwrap();
        assert!(time_concentration(&g, 10.0).unwrap() < 1e-20);
        let s = Signal::sampled(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(time_concentration(&s, 1.0).is_err());
    }

    #[test]
    fn hermite_band_equals_time() {
        let f = Signal::hermite(5).unwrap();
        for w in [0.5, 2.0, 4.0] {
            assert_eq!(band_concentration(&f, w).unwrap(), time_concentration(&f, w).unwrap());
        }
    }

    #[test]
    fn indicator_band_matches_quadrature() {
        // direct quadrature of |f̂|² = (2/π) sin²(ω/2)/ω² up to a wide cutoff plus tail 2/(π W)
        let f = Signal::indicator(-0.5, 0.5).unwrap();
        let w = 3.0;
        let big = 4000.0;
        let q = quad_integrate(|o: f64| 2.0 / PI * (0.5 * o).sin().powi(2) / (o * o), (w, big), 1.0).unwrap();
        let direct = (2.0 * (q + 1.0 / (PI * big))).sqrt();
        assert_relative_eq!(band_concentration(&f, w).unwrap(), direct, max_relative = 1e-6);
        assert!(band_concentration(&f, 10.0).unwrap() < band_concentration(&f, 5.0).unwrap());
    }

    #[test]
    fn sine_integral_branches_meet() {
        for x in [50.0, 60.0, 120.0] {
            let q = 0.5 * PI - quad_integrate(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, (0.0, x), 0.0).unwrap();
            assert_abs_diff_eq!(sine_integral_complement(x + 1e-12), q, epsilon = 1e-13);
        }
        // Si(1) = 0.946083070367183…
        assert_abs_diff_eq!(0.5 * PI - sine_integral_complement(1.0), 0.946_083_070_367_183, epsilon = 1e-15);
    }

    #[test]
    fn hat_band_against_sampled_dft() {
        let hat = Signal::hat(0.0, 1.0).unwrap();
        let xs = crate::wkb::uniform_grid(-1.0, 1.0, 4001);
        let vs: Vec<f64> = xs.iter().map(|&x| hat.value(x)).collect();
        let s = Signal::sampled(xs, vs).unwrap();
        for w in [1.0, 4.0, 10.0] {
            let exact = band_concentration(&hat, w).unwrap();
            let dft = band_concentration(&s, w).unwrap();
            assert_abs_diff_eq!(exact, dft, epsilon = 1e-4);
        }
    }

    #[test]
    fn indicator_band_against_sampled_dft() {
        let d = 1e-6;
        let s = Signal::sampled(vec![-0.5 - d, -0.5, 0.5, 0.5 + d], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = Signal::indicator(-0.5, 0.5).unwrap();
        for w in [2.0, 10.0, 40.0] {
            assert_abs_diff_eq!(band_concentration(&f, w).unwrap(), band_concentration(&s, w).unwrap(), epsilon = 1e-4);
        }
    }

    #[test]
    fn gaussian_band_and_dilation() {
        let g = Signal::gaussian(1.0).unwrap();
        assert!(band_concentration(&g, 12.0).unwrap() < 1e-20);
        let f = Signal::indicator(-0.5, 0.5).unwrap();
        let d = f.dilated(2.0).unwrap();
        assert_eq!(band_concentration(&d, 3.0).unwrap(), band_concentration(&f, 6.0).unwrap());
    }

    #[test]
    fn sobolev_bound_dominates() {
        let g = Signal::hat(0.0, 1.0).unwrap();
        let hs = sobolev_norm(&g, 1.4).unwrap();
        let b = sobolev_band_bound(hs, g.l2_norm(), 1.4, 10.0);
        assert!(b >= band_concentration(&g, 10.0).unwrap());
        assert_eq!(sobolev_band_bound(1.0, 1.0, 0.7, 0.0), 1.0);
        assert_eq!(sobolev_band_bound(2.0, 1.0, 1.0, 1.0), 1.0);
        assert!(sobolev_norm(&g, 1.5).is_err());
        assert!(sobolev_norm(&Signal::indicator(0.0, 1.0).unwrap(), 0.5).is_err());
        // s = 0 recovers the L² norm
        assert_relative_eq!(sobolev_norm(&g, 0.0).unwrap(), g.l2_norm(), max_relative = 1e-5);
    }

    #[test]
    fn coefficient_csv_roundtrip() {
        let c = expand(&Signal::hat(0.0, 1.0).unwrap(), 7, 1.5).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = CoefficientVector::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, c);
        assert!(CoefficientVector::read_csv("k,coeff\n0,1\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn sampled_csv_parsing() {
        let s = Signal::from_csv_reader("x,value\n0,1\n1,2\n2,0\n".as_bytes(), "mem").unwrap();
        assert_eq!(s.value(0.5), 1.5);
        assert_eq!(s.value(-0.1), 0.0);
        assert!(Signal::from_csv_reader("0,1\n0,2\n".as_bytes(), "mem").is_err());
        assert!(Signal::from_csv_reader("0,1\nx,2\n".as_bytes(), "mem").is_err());
        assert!(Signal::from_csv_reader("0,1,3\n".as_bytes(), "mem").is_err());
    }
}
