//! Orthonormal Hermite functions
//!
//! `h_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}` is evaluated with the
//! normalized three-term recurrence
//!
//! ```text
//! h_{k+1}(x) = x √(2/(k+1)) h_k(x) − √(k/(k+1)) h_{k−1}(x)
//! ```
//!
//! seeded with `h_0 = π^{-1/4} e^{-x²/2}` and `h_1 = √2 x h_0`. The running
//! pair carries a shared binary exponent, so values far outside the `f64`
//! range (large `|x|` past the turning point `√(2n+1)`) remain representable
//! as [`HermiteValue`]s.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest degree accepted by the free functions of this module.
pub const DEFAULT_MAX_DEGREE: usize = 1_000_000;

/// `π^{-1/4}`
pub const PI_POW_M_QUARTER: f64 = 0.751_125_544_464_942_5;

const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

/// A real number stored as `mantissa · 2^exponent` with `|mantissa| ∈ [1, 2)`
/// (or exactly zero).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HermiteValue {
    mantissa: f64,
    exponent: i64,
}

impl HermiteValue {
    pub const ZERO: HermiteValue = HermiteValue {
        mantissa: 0.0,
        exponent: 0,
    };

    /// Builds the normalized representation of `value · 2^exponent`.
    pub fn new(value: f64, exponent: i64) -> Self {
        debug_assert!(value.is_finite());
        if value == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(value);
        HermiteValue {
            mantissa: m,
            exponent: e + exponent,
        }
    }

    pub fn from_f64(value: f64) -> Self {
        Self::new(value, 0)
    }

    pub fn mantissa(self) -> f64 {
        self.mantissa
    }

    pub fn exponent(self) -> i64 {
        self.exponent
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    /// Nearest `f64`; underflows to zero (through subnormals) and overflows to
    /// infinity like ordinary floating point.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mantissa, self.exponent)
    }

    /// `log2 |value|`, or `-∞` for zero.
    pub fn log2_abs(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exponent as f64 + self.mantissa.abs().log2()
        }
    }

    pub fn signum(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    pub fn abs(self) -> Self {
        HermiteValue {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }
}

impl fmt::Display for HermiteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·2^{}", self.mantissa, self.exponent)
    }
}

impl Neg for HermiteValue {
    type Output = HermiteValue;
    fn neg(self) -> Self {
        HermiteValue {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Mul for HermiteValue {
    type Output = HermiteValue;
    fn mul(self, rhs: Self) -> Self {
        HermiteValue::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Mul<f64> for HermiteValue {
    type Output = HermiteValue;
    fn mul(self, rhs: f64) -> Self {
        HermiteValue::new(self.mantissa * rhs, self.exponent)
    }
}

impl Add for HermiteValue {
    type Output = HermiteValue;
    fn add(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = small.exponent - big.exponent;
        if shift < -60 {
            return big;
        }
        HermiteValue::new(big.mantissa + ldexp(small.mantissa, shift), big.exponent)
    }
}

impl Sub for HermiteValue {
    type Output = HermiteValue;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Splits a finite nonzero `v` into `(m, e)` with `v = m · 2^e`, `|m| ∈ [1, 2)`.
fn frexp(v: f64) -> (f64, i64) {
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(v * 18_446_744_073_709_551_616.0); // 2^64
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff_u64 << 52)) | (1023_u64 << 52));
    (m, biased - 1023)
}

fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    if m == 0.0 {
        return m;
    }
    while e > 1023 {
        m *= pow2(1023);
        e -= 1023;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1022 {
        m *= pow2(-1022);
        e += 1022;
        if m == 0.0 {
            return m;
        }
    }
    m * pow2(e)
}

/// `π^{-1/4} e^{-x²/2}` as `(value, binary exponent)`.
///
/// `x²/2` is formed exactly as a double-double and reduced modulo `ln 2`, so
/// the seed keeps full relative precision even where `e^{-x²/2}` underflows.
fn seed(x: f64) -> (f64, i64) {
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    let sq = x * x;
    let sq_lo = x.mul_add(x, -sq);
    let (q_hi, q_lo) = (0.5 * sq, 0.5 * sq_lo);
    let k = (q_hi / std::f64::consts::LN_2).round();
    let r = (q_hi - k * LN2_HI) - k * LN2_LO + q_lo;
    (PI_POW_M_QUARTER * (-r).exp(), -(k as i64))
}

/// Unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    /// `√(a/b)` for exactly representable `a`, `b`.
    fn sqrt_ratio(a: f64, b: f64) -> Self {
        let q = a / b;
        let q = fast_two_sum(q, (-q).mul_add(b, a) / b);
        let r = q.hi.sqrt();
        fast_two_sum(r, ((-r).mul_add(r, q.hi) + q.lo) / (2.0 * r))
    }

    fn mul(self, o: Dd) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        fast_two_sum(p, e)
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        fast_two_sum(p, self.hi.mul_add(b, -p) + self.lo * b)
    }

    fn sub(self, o: Dd) -> Self {
        let s = two_sum(self.hi, -o.hi);
        let t = two_sum(self.lo, -o.lo);
        let s = fast_two_sum(s.hi, s.lo + t.hi);
        fast_two_sum(s.hi, s.lo + t.lo)
    }

    fn scale(self, f: f64) -> Self {
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }
}

fn compensated(n: usize, x: f64) -> HermiteValue {
    let (h0, mut scale) = seed(x);
    let mut prev = Dd::from_f64(0.0);
    let mut curr = Dd::from_f64(h0);
    for k in 0..n {
        let next = if k == 0 {
            Dd::sqrt_ratio(2.0, 1.0).mul_f64(x).mul(curr)
        } else {
            let kf = k as f64;
            let a = Dd::sqrt_ratio(2.0, kf + 1.0).mul_f64(x);
            let b = Dd::sqrt_ratio(kf, kf + 1.0);
            a.mul(curr).sub(b.mul(prev))
        };
        prev = curr;
        curr = next;
        let big = prev.hi.abs().max(curr.hi.abs());
        if big != 0.0 && !(RESCALE_LO..=RESCALE_HI).contains(&big) {
            let (_, e) = frexp(big);
            let f = pow2(-e);
            prev = prev.scale(f);
            curr = curr.scale(f);
            scale += e;
        }
    }
    HermiteValue::new(curr.hi + curr.lo, scale)
}

/// Three-term recurrence yielding `h_0(x), h_1(x), …` in scaled form.
#[derive(Clone, Debug)]
pub struct HermiteRecurrence {
    x: f64,
    k: usize,
    prev: f64,
    curr: f64,
    scale: i64,
}

impl HermiteRecurrence {
    pub fn new(x: f64) -> Self {
        let (h0, scale) = seed(x);
        HermiteRecurrence {
            x,
            k: 0,
            prev: 0.0,
            curr: h0,
            scale,
        }
    }

    fn renormalize(&mut self) {
        let big = self.prev.abs().max(self.curr.abs());
        if big == 0.0 || (RESCALE_LO..=RESCALE_HI).contains(&big) {
            return;
        }
        let (_, e) = frexp(big);
        let f = pow2(-e);
        self.prev *= f;
        self.curr *= f;
        self.scale += e;
    }
}

impl Iterator for HermiteRecurrence {
    type Item = HermiteValue;

    fn next(&mut self) -> Option<HermiteValue> {
        let out = HermiteValue::new(self.curr, self.scale);
        let k = self.k as f64;
        let next = if self.k == 0 {
            std::f64::consts::SQRT_2 * self.x * self.curr
        } else {
            self.x * (2.0 / (k + 1.0)).sqrt() * self.curr - (k / (k + 1.0)).sqrt() * self.prev
        };
        self.prev = self.curr;
        self.curr = next;
        self.k += 1;
        self.renormalize();
        Some(out)
    }
}

/// `h_0(x) … h_{n_max}(x)` from one recurrence pass, optionally with
/// derivatives from the ladder identity `h_k′ = √(2k) h_{k−1} − x h_k`.
#[derive(Clone, Debug)]
pub struct HermiteSlice {
    pub n_max: usize,
    pub x: f64,
    pub values: Vec<HermiteValue>,
    pub derivatives: Option<Vec<HermiteValue>>,
}

impl HermiteSlice {
    pub fn value(&self, k: usize) -> f64 {
        self.values[k].to_f64()
    }

    pub fn derivative(&self, k: usize) -> Option<f64> {
        self.derivatives.as_ref().map(|d| d[k].to_f64())
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }
}

/// Evaluator with a configurable degree limit.
#[derive(Clone, Copy, Debug)]
pub struct Hermite {
    max_degree: usize,
}

impl Default for Hermite {
    fn default() -> Self {
        Hermite {
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

impl Hermite {
    pub fn with_max_degree(max_degree: usize) -> Self {
        Hermite { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check(&self, n: usize, x: f64) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::Capacity {
                n,
                max: self.max_degree,
            });
        }
        if !x.is_finite() {
            return Err(Error::domain("hermite_eval", format!("x = {x} is not finite")));
        }
        Ok(())
    }

    /// `h_n(x)` by the recurrence carried in double-double arithmetic, so the
    /// result keeps full relative precision next to the zeros of `h_n`.
    pub fn eval_scaled(&self, n: usize, x: f64) -> Result<HermiteValue> {
        self.check(n, x)?;
        Ok(compensated(n, x))
    }

    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.eval_scaled(n, x).map(HermiteValue::to_f64)
    }

    pub fn slice(&self, n_max: usize, x: f64, with_derivatives: bool) -> Result<HermiteSlice> {
        self.check(n_max, x)?;
        let values: Vec<HermiteValue> = HermiteRecurrence::new(x).take(n_max + 1).collect();
        let derivatives = with_derivatives.then(|| {
            let mx = -x;
            (0..=n_max)
                .map(|k| {
                    let down = if k == 0 {
                        HermiteValue::ZERO
                    } else {
                        values[k - 1] * (2.0 * k as f64).sqrt()
                    };
                    down + values[k] * mx
                })
                .collect()
        });
        Ok(HermiteSlice {
            n_max,
            x,
            values,
            derivatives,
        })
    }

    /// `h_n(0)` for even `n`, `h_n′(0)` for odd `n`.
    pub fn zero_value(&self, n: usize) -> Result<f64> {
        if n > self.max_degree {
            return Err(Error::Capacity {
                n,
                max: self.max_degree,
            });
        }
        let p = n / 2;
        // ln((2p−1)!!/(2p)!!) = Σ_{j≤p} ln(1 − 1/(2j)), Neumaier-compensated
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for j in 1..=p {
            let term = (-0.5 / j as f64).ln_1p();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        let even = sign * PI_POW_M_QUARTER * (0.5 * (sum + comp)).exp();
        if n.is_multiple_of(2) {
            Ok(even)
        } else {
            Ok(even * ((4 * p + 2) as f64).sqrt())
        }
    }
}

/// `h_n(x)`.
pub fn hermite_eval(n: usize, x: f64) -> Result<f64> {
    Hermite::default().eval(n, x)
}

/// `h_n(x)` without range loss.
pub fn hermite_eval_scaled(n: usize, x: f64) -> Result<HermiteValue> {
    Hermite::default().eval_scaled(n, x)
}

pub fn hermite_eval_slice(n_max: usize, x: f64, with_derivatives: bool) -> Result<HermiteSlice> {
    Hermite::default().slice(n_max, x, with_derivatives)
}

/// Closed-form special values: `h_{2p}(0) = (−1)^p π^{-1/4} √((2p−1)!!/(2p)!!)`
/// and `h′_{2p+1}(0) = (−1)^p √(4p+2) π^{-1/4} √((2p−1)!!/(2p)!!)`.
pub fn hermite_zero_value(n: usize) -> Result<f64> {
    Hermite::default().zero_value(n)
}

/// Central-difference residual of `h″ + (2n+1−x²) h = 0`.
pub fn ode_residual(n: usize, x: f64, h_step: f64) -> Result<f64> {
    if !(h_step > 0.0 && h_step.is_finite()) {
        return Err(Error::domain("ode_residual", format!("step {h_step} must be positive")));
    }
    let h = Hermite::default();
    let mid = h.eval(n, x)?;
    let lo = h.eval(n, x - h_step)?;
    let hi = h.eval(n, x + h_step)?;
    let second = (lo - 2.0 * mid + hi) / (h_step * h_step);
    Ok(second + (2.0 * n as f64 + 1.0 - x * x) * mid)
}
