//! Composite Gauss–Legendre quadrature with oscillation-aware panels.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes per panel.
pub const NODES_PER_PANEL: usize = 10;
/// Panel width used when the integrand is not oscillatory.
pub const DEFAULT_PANEL_WIDTH: f64 = 0.5;

fn legendre_pairs(order: usize) -> Vec<(f64, f64)> {
    let mut pairs = GaussLegendre::new(NonZeroUsize::new(order).expect("order ≥ 1"))
        .as_node_weight_pairs()
        .to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_pairs(NODES_PER_PANEL))
}

/// How a [`CompositeRule`] was laid out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadMeta {
    /// Largest panel width actually used.
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub a: f64,
    pub b: f64,
}

/// Panel width for a given oscillation frequency (radians per unit length).
pub fn panel_width_for(oscillation_freq: f64) -> f64 {
    if oscillation_freq > 0.0 {
        DEFAULT_PANEL_WIDTH.min(std::f64::consts::PI / oscillation_freq)
    } else {
        DEFAULT_PANEL_WIDTH
    }
}

/// Nodes and weights of a composite rule on `[a, b]`, in increasing node order.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub meta: QuadMeta,
}

impl CompositeRule {
    /// Builds the rule for `[a, b]` with panels no wider than
    /// `panel_width_for(oscillation_freq)`. Interior `breakpoints` become panel
    /// edges, so piecewise-smooth integrands keep full order.
    pub fn new(a: f64, b: f64, oscillation_freq: f64, breakpoints: &[f64]) -> Result<Self> {
        Self::with_width(a, b, panel_width_for(oscillation_freq), breakpoints)
    }

    pub fn with_width(a: f64, b: f64, max_width: f64, breakpoints: &[f64]) -> Result<Self> {
        Self::with_order(a, b, max_width, NODES_PER_PANEL, breakpoints)
    }

    /// Fully explicit layout: `order` Gauss–Legendre nodes on each panel.
    pub fn with_order(a: f64, b: f64, max_width: f64, order: usize, breakpoints: &[f64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("quadrature", "zero nodes per panel"));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain("quadrature", format!("invalid interval ({a}, {b})")));
        }
        if !(max_width > 0.0 && max_width.is_finite()) {
            return Err(Error::domain("quadrature", format!("invalid panel width {max_width}")));
        }
        let mut edges = vec![a];
        let mut interior: Vec<f64> = breakpoints.iter().copied().filter(|&t| t > a && t < b).collect();
        interior.sort_by(f64::total_cmp);
        interior.dedup();
        edges.extend(interior);
        edges.push(b);

        let owned;
        let rule: &[(f64, f64)] = if order == NODES_PER_PANEL {
            reference_rule()
        } else {
            owned = legendre_pairs(order);
            &owned
        };
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut widest: f64 = 0.0;
        for seg in edges.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            widest = widest.max(h);
            for p in 0..panels {
                let p_lo = lo + p as f64 * h;
                let p_hi = if p + 1 == panels { hi } else { lo + (p + 1) as f64 * h };
                let (mid, half) = (0.5 * (p_lo + p_hi), 0.5 * (p_hi - p_lo));
                for &(t, w) in rule {
                    nodes.push(mid + half * t);
                    weights.push(half * w);
                }
            }
        }
        Ok(CompositeRule {
            nodes,
            weights,
            meta: QuadMeta {
                panel_width: widest,
                nodes_per_panel: order,
                a,
                b,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule; the first non-finite integrand value aborts.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = Neumaier::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Integration { location: x });
            }
            acc.add(w * v);
        }
        Ok(acc.sum())
    }
}

/// `∫_a^b f` by composite Gauss–Legendre, panels at most
/// `min(0.5, π / oscillation_freq)` wide.
pub fn quad_integrate<F: FnMut(f64) -> f64>(f: F, interval: (f64, f64), oscillation_freq: f64) -> Result<f64> {
    quad_integrate_with_breaks(f, interval, oscillation_freq, &[])
}

/// As [`quad_integrate`], splitting additionally at `breakpoints`.
pub fn quad_integrate_with_breaks<F: FnMut(f64) -> f64>(
    f: F,
    interval: (f64, f64),
    oscillation_freq: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if !(oscillation_freq >= 0.0) {
        return Err(Error::domain("quadrature", format!("oscillation frequency {oscillation_freq} < 0")));
    }
    CompositeRule::new(interval.0, interval.1, oscillation_freq, breakpoints)?.integrate(f)
}

/// Compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn constants_and_odd_monomials() {
        assert_abs_diff_eq!(quad_integrate(|_| 1.0, (0.0, 1.0), 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(quad_integrate(|x| x.powi(9), (-1.0, 1.0), 0.0).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn oscillatory_square() {
        let v = quad_integrate(|x| (50.0 * x).sin().powi(2), (0.0, 2.0 * PI), 50.0).unwrap();
        assert_abs_diff_eq!(v, PI, epsilon = 1e-12);
    }

    #[test]
    fn breakpoints_restore_accuracy() {
        let f = |x: f64| (1.0 - x.abs()).max(0.0);
        let v = quad_integrate_with_breaks(f, (-1.3, 1.7), 0.0, &[-1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn panel_layout() {
        let r = CompositeRule::new(0.0, 1.0, 0.0, &[]).unwrap();
        assert_eq!(r.len(), 2 * NODES_PER_PANEL);
        assert_eq!(r.meta.panel_width, 0.5);
        let r = CompositeRule::new(0.0, 1.0, 20.0, &[]).unwrap();
        assert!(r.meta.panel_width <= PI / 20.0);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn custom_order() {
        let r = CompositeRule::with_order(0.0, 2.0, 1.0, 4, &[]).unwrap();
        assert_eq!(r.len(), 8);
        // 4-point Gauss is exact to degree 7
        assert_abs_diff_eq!(r.integrate(|x| x.powi(7)).unwrap(), 32.0, epsilon = 1e-12);
        assert!(CompositeRule::with_order(0.0, 1.0, 1.0, 0, &[]).is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            quad_integrate(|x| 1.0 / x, (0.0, 1.0), 0.0).and_then(|_| quad_integrate(|_| f64::NAN, (0.0, 1.0), 0.0)),
            Err(Error::Integration { .. })
        ));
        assert!(quad_integrate(|x| x, (1.0, 0.0), 0.0).is_err());
        assert!(quad_integrate(|x| x, (0.0, 1.0), -1.0).is_err());
    }
}
