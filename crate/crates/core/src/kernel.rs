//! The Christoffel–Darboux kernel `k_n(x,y) = Σ_{k≤n} h_k(x)h_k(y)` and its
//! sinc approximant `(1/π) sin N(x−y)/(x−y)`, `N = (√(2n+1)+√(2n+3))/2`.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{HermiteRecurrence, DEFAULT_MAX_DEGREE};
use crate::quadrature::{CompositeRule, Neumaier, NODES_PER_PANEL};

/// Frequency `N` of the sinc approximant to `k_n`.
pub fn sinc_frequency(n: usize) -> f64 {
    0.5 * (((2 * n + 1) as f64).sqrt() + ((2 * n + 3) as f64).sqrt())
}

/// Switch-over distance to the diagonal formula.
fn near_diagonal_tau(x: f64, y: f64) -> f64 {
    1e-6 * (1.0 + x.abs().max(y.abs()))
}

/// `h_{n−1}, h_n, h_{n+1}` at one abscissa.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KernelPoint {
    x: f64,
    below: f64,
    at: f64,
    above: f64,
}

impl KernelPoint {
    pub(crate) fn new(n: usize, x: f64) -> Self {
        let mut it = HermiteRecurrence::new(x);
        let below = if n == 0 { 0.0 } else { it.nth(n - 1).unwrap().to_f64() };
        let at = it.next().unwrap().to_f64();
        let above = it.next().unwrap().to_f64();
        KernelPoint { x, below, at, above }
    }

    /// `k_n(x,x) = (n+1)h_n² − √(n(n+1)) h_{n−1}h_{n+1}`
    fn diagonal(&self, n: usize) -> f64 {
        let n1 = (n + 1) as f64;
        n1 * self.at * self.at - (n as f64 * n1).sqrt() * self.below * self.above
    }
}

pub(crate) fn kernel_between(n: usize, a: &KernelPoint, b: &KernelPoint) -> f64 {
    let d = a.x - b.x;
    if d == 0.0 {
        return a.diagonal(n);
    }
    if d.abs() < near_diagonal_tau(a.x, b.x) {
        return KernelPoint::new(n, 0.5 * (a.x + b.x)).diagonal(n);
    }
    let c = (0.5 * (n + 1) as f64).sqrt();
    c * (a.above * b.at - b.above * a.at) / d
}

fn check_finite(op: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().find(|t| !t.is_finite()) {
        Some(t) => Err(Error::domain(op, format!("argument {t} is not finite"))),
        None => Ok(()),
    }
}

/// `k_n(x, y)` by the Christoffel–Darboux quotient, or its derivative limit
/// at the midpoint when `|x−y| < 10⁻⁶(1+max(|x|,|y|))`.
pub fn cd_kernel(n: usize, x: f64, y: f64) -> Result<f64> {
    check_finite("cd_kernel", &[x, y])?;
    if n + 1 > DEFAULT_MAX_DEGREE {
        return Err(Error::Capacity {
            n: n + 1,
            max: DEFAULT_MAX_DEGREE,
        });
    }
    Ok(kernel_between(n, &KernelPoint::new(n, x), &KernelPoint::new(n, y)))
}

/// `(1/π) sin(N(x−y))/(x−y)`, with a two-term series for `|x−y| < 10⁻⁸`.
pub fn sinc_kernel(freq: f64, x: f64, y: f64) -> Result<f64> {
    if !(freq > 0.0) {
        return Err(Error::domain("sinc_kernel", format!("N = {freq} must be positive")));
    }
    Ok(sinc_value(freq, x - y))
}

fn sinc_value(freq: f64, d: f64) -> f64 {
    if d.abs() < 1e-8 {
        let nd = freq * d;
        freq / PI * (1.0 - nd * nd / 6.0)
    } else {
        (freq * d).sin() / (PI * d)
    }
}

/// `17T²/√(2n+1)`, the uniform bound on `|k_n − sinc|` over `[−T,T]²`.
pub fn residual_bound(n: usize, t: f64) -> f64 {
    17.0 * t * t / ((2 * n + 1) as f64).sqrt()
}

/// `2/(π²T) + 12T² ln(2n+1)/√(2n+1)`, bounding the kernel mass outside `[−2T, 2T]`.
pub fn tail_bound(n: usize, t: f64) -> f64 {
    let l2 = (2 * n + 1) as f64;
    2.0 / (PI * PI * t) + 12.0 * t * t * l2.ln() / l2.sqrt()
}

/// Checks `T ≥ 1`, `n ≥ 2T²`, and `n ≥ 6` when `T < 2`.
pub fn check_residual_preconditions(n: usize, t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::domain("kernel residual", format!("T = {t} violates T ≥ 1")));
    }
    if (n as f64) < 2.0 * t * t {
        return Err(Error::domain(
            "kernel residual",
            format!("n = {n} violates n ≥ 2T² = {}", 2.0 * t * t),
        ));
    }
    if t < 2.0 && n < 6 {
        return Err(Error::domain("kernel residual", format!("n = {n} violates n ≥ 6 for T < 2")));
    }
    Ok(())
}

/// `k_n`, the sinc approximant and their difference on a tensor grid.
#[derive(Clone, Debug)]
pub struct KernelGrid {
    pub n: usize,
    pub t: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub k_values: Array2<f64>,
    pub sinc_values: Array2<f64>,
    pub residual: Array2<f64>,
    /// `N = (√(2n+1)+√(2n+3))/2`
    pub freq: f64,
    pub sup_residual: f64,
    pub hs_norm: Option<f64>,
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    y: f64,
    k: f64,
    sinc: f64,
    residual: f64,
}

impl KernelGrid {
    /// Evaluates on `xs × ys` without checking preconditions.
    pub fn evaluate(n: usize, t: f64, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let freq = sinc_frequency(n);
        let px: Vec<KernelPoint> = xs.par_iter().map(|&x| KernelPoint::new(n, x)).collect();
        let py: Vec<KernelPoint> = ys.par_iter().map(|&y| KernelPoint::new(n, y)).collect();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = px
            .par_iter()
            .map(|a| {
                let k: Vec<f64> = py.iter().map(|b| kernel_between(n, a, b)).collect();
                let s: Vec<f64> = py.iter().map(|b| sinc_value(freq, a.x - b.x)).collect();
                (k, s)
            })
            .collect();
        let shape = (xs.len(), ys.len());
        let k_values = Array2::from_shape_vec(shape, rows.iter().flat_map(|r| r.0.iter().copied()).collect())
            .expect("row lengths match");
        let sinc_values = Array2::from_shape_vec(shape, rows.iter().flat_map(|r| r.1.iter().copied()).collect())
            .expect("row lengths match");
        let residual = &k_values - &sinc_values;
        let sup_residual = residual.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        KernelGrid {
            n,
            t,
            xs,
            ys,
            k_values,
            sinc_values,
            residual,
            freq,
            sup_residual,
            hs_norm: None,
        }
    }

    /// Writes `x, y, k, sinc, residual`, one row per grid point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &y) in self.ys.iter().enumerate() {
                w.serialize(GridRow {
                    x,
                    y,
                    k: self.k_values[[i, j]],
                    sinc: self.sinc_values[[i, j]],
                    residual: self.residual[[i, j]],
                })?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Residual `k_n − sinc` on a uniform `g × g` grid of `[−T, T]²`.
pub fn residual_grid(n: usize, t: f64, grid_points_per_axis: usize) -> Result<KernelGrid> {
    check_residual_preconditions(n, t)?;
    if grid_points_per_axis < 2 {
        return Err(Error::domain("residual_grid", "need at least 2 points per axis"));
    }
    let xs = crate::wkb::uniform_grid(-t, t, grid_points_per_axis);
    Ok(KernelGrid::evaluate(n, t, xs.clone(), xs))
}

/// Tensor rule on `[−T, T]` with panels no wider than `π/N`.
fn residual_rule(n: usize, t: f64, quad_order: usize) -> Result<CompositeRule> {
    CompositeRule::with_order(-t, t, PI / sinc_frequency(n), quad_order, &[])
}

/// Default nodes per panel for [`residual_hs_norm`].
pub const DEFAULT_HS_ORDER: usize = NODES_PER_PANEL;

/// `‖k_n − sinc‖_{L²([−T,T]²)}` by tensor Gauss–Legendre.
pub fn residual_hs_norm(n: usize, t: f64, quad_order: usize) -> Result<f64> {
    check_residual_preconditions(n, t)?;
    let rule = residual_rule(n, t, quad_order)?;
    let freq = sinc_frequency(n);
    let pts: Vec<KernelPoint> = rule.nodes.par_iter().map(|&x| KernelPoint::new(n, x)).collect();
    let rows: Vec<f64> = pts
        .par_iter()
        .map(|a| {
            pts.iter()
                .zip(&rule.weights)
                .map(|(b, &w)| {
                    let r = kernel_between(n, a, b) - sinc_value(freq, a.x - b.x);
                    w * r * r
                })
                .collect::<Neumaier>()
                .sum()
        })
        .collect();
    let total: Neumaier = rows.iter().zip(&rule.weights).map(|(r, w)| r * w).collect();
    Ok(total.sum().max(0.0).sqrt())
}

/// `∫_ℝ k_n(x,y)² dy`, which equals `k_n(x,x)` by reproduction.
pub fn kernel_row_mass(n: usize, x: f64) -> Result<f64> {
    cd_kernel(n, x, x)
}

/// Kernel mass of one row outside `[−2T, 2T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub t: f64,
    pub x: f64,
    pub row_mass: f64,
    pub tail_mass: f64,
    pub bound: f64,
}

impl TailReport {
    pub fn margin(&self) -> f64 {
        self.bound - self.tail_mass
    }
}

/// `∫_{|y|≥2T} k_n(x,y)² dy = k_n(x,x) − ∫_{−2T}^{2T} k_n(x,y)² dy`.
pub fn tail_mass(n: usize, t: f64, x: f64) -> Result<TailReport> {
    if !(t >= 2.0 && t.is_finite()) {
        return Err(Error::domain("tail_mass", format!("T = {t} violates T ≥ 2")));
    }
    if (n as f64) < 2.0 * t * t {
        return Err(Error::domain("tail_mass", format!("n = {n} violates n ≥ 2T² = {}", 2.0 * t * t)));
    }
    if !(x.abs() <= t) {
        return Err(Error::domain("tail_mass", format!("|x| = {} violates |x| ≤ T = {t}", x.abs())));
    }
    let row_mass = kernel_row_mass(n, x)?;
    let inner = row_integral(n, x, (-2.0 * t, 2.0 * t))?;
    Ok(TailReport {
        n,
        t,
        x,
        row_mass,
        tail_mass: (row_mass - inner).clamp(0.0, row_mass),
        bound: tail_bound(n, t),
    })
}

/// `∫_a^b k_n(x,y)² dy` by panel quadrature resolving `2N`.
pub fn row_integral(n: usize, x: f64, interval: (f64, f64)) -> Result<f64> {
    let a = KernelPoint::new(n, x);
    let rule = CompositeRule::new(interval.0, interval.1, 2.0 * sinc_frequency(n), &[x])?;
    let vals: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&y| {
            let k = kernel_between(n, &a, &KernelPoint::new(n, y));
            k * k
        })
        .collect();
    Ok(vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect::<Neumaier>().sum())
}

/// `∫_{−L}^{L} k_n(x,y) k_n(z,y) dy`.
pub fn reproducing_integral(n: usize, x: f64, z: f64, half_width: f64) -> Result<f64> {
    let a = KernelPoint::new(n, x);
    let c = KernelPoint::new(n, z);
    let rule = CompositeRule::new(-half_width, half_width, 2.0 * sinc_frequency(n), &[x, z])?;
    let vals: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&y| {
            let b = KernelPoint::new(n, y);
            kernel_between(n, &a, &b) * kernel_between(n, &c, &b)
        })
        .collect();
    Ok(vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect::<Neumaier>().sum())
}

/// `‖P_T R_n^T P_T f‖_{L²}` for `(R_n^T f)(x) = ∫_{−T}^{T} (k_n − sinc)(x,y) f(y) dy`.
///
/// `breakpoints` marks kinks or jumps of `f` inside `[−T, T]`.
pub fn residual_operator_norm<F>(n: usize, t: f64, f: F, breakpoints: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain("residual_operator_norm", format!("T = {t} must be positive")));
    }
    let freq = sinc_frequency(n);
    let inner = CompositeRule::new(-t, t, 2.0 * freq, breakpoints)?;
    let outer = CompositeRule::new(-t, t, 2.0 * freq, &[])?;
    let fy: Vec<f64> = inner.nodes.iter().map(|&y| f(y)).collect();
    if let Some(i) = fy.iter().position(|v| !v.is_finite()) {
        return Err(Error::Integration { location: inner.nodes[i] });
    }
    let py: Vec<KernelPoint> = inner.nodes.par_iter().map(|&y| KernelPoint::new(n, y)).collect();
    let applied: Vec<f64> = outer
        .nodes
        .par_iter()
        .map(|&x| {
            let a = KernelPoint::new(n, x);
            py.iter()
                .zip(&inner.weights)
                .zip(&fy)
                .map(|((b, &w), &v)| w * v * (kernel_between(n, &a, b) - sinc_value(freq, x - b.x)))
                .collect::<Neumaier>()
                .sum()
        })
        .collect();
    let sq: Neumaier = applied.iter().zip(&outer.weights).map(|(g, w)| w * g * g).collect();
    Ok(sq.sum().sqrt())
}
