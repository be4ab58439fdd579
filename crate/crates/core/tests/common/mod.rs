//! Extended-precision oracle shared by the integration tests.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use hermite_approx::HermiteValue;

const PREC: usize = 512;
const RM: RoundingMode = RoundingMode::ToEven;

/// `h_n(x)` by the orthonormal recurrence carried in 512-bit arithmetic.
pub fn oracle_hermite(n: usize, x: f64) -> BigFloat {
    let mut cc = Consts::new().expect("constants cache");
    let bx = BigFloat::from_f64(x, PREC);
    let pi = cc.pi(PREC, RM);
    let quarter_root = pi.sqrt(PREC, RM).sqrt(PREC, RM);
    let half_sq = bx.mul(&bx, PREC, RM).div(&BigFloat::from_f64(-2.0, PREC), PREC, RM);
    let mut prev = half_sq.exp(PREC, RM, &mut cc).div(&quarter_root, PREC, RM);
    if n == 0 {
        return prev;
    }
    let two = BigFloat::from_f64(2.0, PREC);
    let mut cur = two.sqrt(PREC, RM).mul(&bx, PREC, RM).mul(&prev, PREC, RM);
    for k in 1..n {
        let kp1 = BigFloat::from_f64((k + 1) as f64, PREC);
        let a = two.div(&kp1, PREC, RM).sqrt(PREC, RM);
        let b = BigFloat::from_f64(k as f64, PREC).div(&kp1, PREC, RM).sqrt(PREC, RM);
        let next = a.mul(&bx, PREC, RM).mul(&cur, PREC, RM).sub(&b.mul(&prev, PREC, RM), PREC, RM);
        prev = cur;
        cur = next;
    }
    cur
}

/// `|ours − oracle| / |oracle|`, computed without leaving extended precision.
pub fn relative_error(ours: HermiteValue, oracle: &BigFloat) -> f64 {
    let mut mine = BigFloat::from_f64(ours.mantissa(), PREC);
    if let Some(e) = mine.exponent() {
        mine.set_exponent(e + ours.exponent() as i32);
    }
    if oracle.is_zero() {
        return if mine.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let rel = mine.sub(oracle, PREC, RM).div(oracle, PREC, RM);
    to_f64(&rel).abs()
}

/// Nearest `f64` of a finite `BigFloat` of moderate exponent.
pub fn to_f64(v: &BigFloat) -> f64 {
    v.to_string().parse::<f64>().unwrap_or(f64::NAN)
}
