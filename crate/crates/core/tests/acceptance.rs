//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use hermite_approx::bounds::soundness_audit;
use hermite_approx::expansion::{expand, projection_error_from, Signal};
use hermite_approx::kernel::{
    cd_kernel, reproducing_integral, residual_bound, residual_grid, residual_hs_norm, row_integral, tail_mass,
    DEFAULT_HS_ORDER,
};
use hermite_approx::quadrature::CompositeRule;
use hermite_approx::wkb::{verify_phase_lemma, wkb_envelopes, Regime, DEFAULT_LEMMA_GRID};
use hermite_approx::{hermite_eval_scaled, HermiteRecurrence};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE_NS: [usize; 5] = [10, 25, 50, 75, 100];
const SUP_ROW: [f64; 5] = [0.067, 0.039, 0.025, 0.023, 0.022];
const HS_ROW: [f64; 5] = [0.051, 0.034, 0.022, 0.019, 0.017];
const TABLE_TOL: f64 = 0.005;
const AUDIT_NS: [usize; 5] = [20, 40, 50, 80, 800];
const AUDIT_ALPHAS: [f64; 3] = [0.5, 1.0, 10.0];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for (&n, &want) in EXAMPLE_NS.iter().zip(&SUP_ROW) {
        let got = residual_grid(n, 1.0, 80).map_err(|e| e.to_string())?.sup_residual;
        worst = worst.max((got - want).abs());
        cells.push(format!("{n}:{got:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("sup row [{}], max deviation {worst:.4}, {secs:.1}s", cells.join(" "));
    if worst <= TABLE_TOL && secs <= 30.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for (&n, &want) in EXAMPLE_NS.iter().zip(&HS_ROW) {
        let got = residual_hs_norm(n, 1.0, DEFAULT_HS_ORDER).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        cells.push(format!("{n}:{got:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("HS row [{}], max deviation {worst:.4}, {secs:.1}s", cells.join(" "));
    if worst <= TABLE_TOL && secs <= 120.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Outcome {
    let cells = (6..=200).map(|n| (1.0, n)).chain((8..=400).map(|n| (2.0, n)));
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (t, n) in cells {
        let grid = residual_grid(n, t, 80).map_err(|e| e.to_string())?;
        let ratio = grid.sup_residual / residual_bound(n, t);
        worst = worst.max(ratio);
        count += 1;
        if ratio > 1.0 {
            violations.push(format!("(T={t}, n={n})"));
        }
    }
    let msg = format!("{count} cells, worst sup/bound {worst:.4}, {} violations", violations.len());
    if violations.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", violations.join(" ")))
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut violations = Vec::new();
    let (mut worst_env, mut worst_cor) = (0.0f64, 0.0f64);
    for n in (6..=500).step_by(7) {
        let lambda = ((2 * n + 1) as f64).sqrt();
        // open interval (−λ, λ)
        let xs: Vec<f64> = (0..1000).map(|i| lambda * (2.0 * (i as f64 + 0.5) / 1000.0 - 1.0)).collect();
        for env in wkb_envelopes(n, &xs, None).map_err(|e| e.to_string())? {
            checked += 1;
            let mut ratio = env.e_measured.abs() / env.generic_bound;
            if env.regime == Regime::Half {
                ratio = ratio.max(env.e_measured.abs() / env.e_bound);
            }
            worst_env = worst_env.max(ratio);
            if ratio > 1.0 {
                violations.push(format!("E(n={n}, x={:.4})", env.x));
            }
        }
        for t in [1.0f64, 2.0, 3.0] {
            if (n as f64) < 2.0 * t * t {
                continue;
            }
            let xs: Vec<f64> = (0..1000).map(|i| -t + 2.0 * t * i as f64 / 999.0).collect();
            for env in wkb_envelopes(n, &xs, Some(t)).map_err(|e| e.to_string())? {
                let c = env.corollary.expect("corollary requested");
                checked += 1;
                let ratio = c.e_measured.abs() / c.e_bound;
                worst_cor = worst_cor.max(ratio);
                if ratio > 1.0 {
                    violations.push(format!("Ẽ(n={n}, T={t}, x={:.4})", env.x));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "{checked} points, worst |E|/envelope {worst_env:.4}, worst |Ẽ|/bound {worst_cor:.4}, {} violations, {secs:.1}s",
        violations.len()
    );
    if violations.is_empty() && secs <= 60.0 {
        Ok(msg)
    } else {
        Err(format!("{msg} {}", violations.iter().take(5).cloned().collect::<Vec<_>>().join(" ")))
    }
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut failing = Vec::new();
    for n in [50, 100, 200, 400] {
        let report = verify_phase_lemma(n, 2.0, DEFAULT_LEMMA_GRID).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_ratio());
        for (id, w) in &report.worst_ratios {
            if w.ratio > 1.0 {
                failing.push(format!("{id}@n={n}:{:.4}", w.ratio));
            }
        }
    }
    let msg = format!("n in {{50,100,200,400}}, T=2, worst ratio {worst:.4}");
    if failing.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {}", failing.join(" ")))
    }
}

fn criterion_6() -> Outcome {
    let t = 2.0;
    let mut worst_ratio = 0.0f64;
    let mut worst_diff = 0.0f64;
    let mut problems = Vec::new();
    for n in [32usize, 64, 128, 256] {
        let wide = ((2 * n + 1) as f64).sqrt() + 12.0;
        for x in [0.0, 1.0, 1.9] {
            let r = tail_mass(n, t, x).map_err(|e| e.to_string())?;
            let direct = row_integral(n, x, (-wide, -2.0 * t)).map_err(|e| e.to_string())?
                + row_integral(n, x, (2.0 * t, wide)).map_err(|e| e.to_string())?;
            let ratio = r.tail_mass / r.bound;
            let diff = (r.tail_mass - direct).abs();
            worst_ratio = worst_ratio.max(ratio);
            worst_diff = worst_diff.max(diff);
            if ratio > 1.0 || diff > 1e-6 {
                problems.push(format!("(n={n}, x={x}: ratio {ratio:.4}, diff {diff:.2e})"));
            }
        }
    }
    let msg = format!("worst tail/bound {worst_ratio:.4}, worst |subtraction − wide window| {worst_diff:.2e}");
    if problems.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg} {}", problems.join(" ")))
    }
}

fn criterion_7() -> Outcome {
    const K: usize = 100;
    let half_width = 2.0 * ((2 * K + 3) as f64).sqrt();
    let freq = ((2 * K + 1) as f64).sqrt();
    let rule = CompositeRule::new(-half_width, half_width, freq, &[]).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| HermiteRecurrence::new(x).take(K + 1).map(|h| h.to_f64()).collect())
        .collect();
    let mut worst = 0.0f64;
    for j in 0..=K {
        for k in j..=K {
            let g: f64 = rows.iter().zip(&rule.weights).map(|(r, w)| w * r[j] * r[k]).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    let msg = format!("max |<h_j,h_k> − δ_jk| over j,k ≤ {K}: {worst:.2e} ({} nodes)", rule.len());
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b65726e);
    let mut worst = 0.0f64;
    for n in [10usize, 50, 100] {
        let lambda = ((2 * n + 1) as f64).sqrt();
        for _ in 0..100 {
            let x = rng.random_range(-lambda..lambda);
            let z = rng.random_range(-lambda..lambda);
            let lhs = reproducing_integral(n, x, z, lambda + 12.0).map_err(|e| e.to_string())?;
            let rhs = cd_kernel(n, x, z).map_err(|e| e.to_string())?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    let msg = format!("300 pairs, max |∫k(x,·)k(z,·) − k(x,z)| {worst:.2e}");
    if worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Outcome {
    let f = Signal::indicator(-0.5, 0.5).map_err(|e| e.to_string())?;
    let err = |n: usize, alpha: f64| -> Result<f64, String> {
        let c = expand(&f, n, alpha).map_err(|e| e.to_string())?;
        projection_error_from(&f, &c, 1.0).map_err(|e| e.to_string())
    };
    let scaled: Vec<f64> = [20, 40, 80].iter().map(|&n| err(n, 10.0)).collect::<Result<_, _>>()?;
    let unscaled = err(40, 1.0)?;
    let monotone = scaled.windows(2).all(|w| w[1] < w[0]);
    let beats = scaled[1] < unscaled;

    let mut report = soundness_audit(&f, &AUDIT_NS, &AUDIT_ALPHAS).map_err(|e| e.to_string())?;
    let hat = Signal::hat(0.0, 0.5).map_err(|e| e.to_string())?;
    report.extend(soundness_audit(&hat, &AUDIT_NS, &AUDIT_ALPHAS).map_err(|e| e.to_string())?);
    let violations: Vec<String> = report
        .violations()
        .map(|c| format!("{} {} n={} α={}: {:.4} > {:.4}", c.signal, c.bound, c.n, c.alpha, c.measured, c.bound_value))
        .collect();
    let tightest = report
        .worst()
        .map(|c| format!("{} {} n={} ({:.4}/{:.4})", c.signal, c.bound, c.n, c.measured, c.bound_value))
        .unwrap_or_default();
    let msg = format!(
        "α=10 errors {:.4} > {:.4} > {:.4}, α=1 n=40 error {unscaled:.4}; {} bound cells ({} skipped), tightest {tightest}",
        scaled[0],
        scaled[1],
        scaled[2],
        report.cells.len(),
        report.skipped.len()
    );
    if monotone && beats && violations.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; monotone={monotone} scaled_beats={beats} {}", violations.join("; ")))
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x68657266);
    let mut worst = 0.0f64;
    let mut at = (0, 0.0);
    for _ in 0..200 {
        let n = rng.random_range(0..=1000usize);
        let lambda = ((2 * n + 1) as f64).sqrt();
        let x = rng.random_range(-1.5 * lambda..=1.5 * lambda);
        let ours = hermite_eval_scaled(n, x).map_err(|e| e.to_string())?;
        let rel = common::relative_error(ours, &common::oracle_hermite(n, x));
        if rel > worst {
            worst = rel;
            at = (n, x);
        }
    }
    let msg = format!("200 pairs, worst relative error {worst:.2e} at n={}, x={:.6}", at.0, at.1);
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sup-residual table row", criterion_1),
        ("Hilbert-Schmidt table row", criterion_2),
        ("kernel residual bound soundness", criterion_3),
        ("WKB envelope soundness", criterion_4),
        ("phase inequality audit", criterion_5),
        ("kernel tail soundness", criterion_6),
        ("orthonormality", criterion_7),
        ("reproducing identity", criterion_8),
        ("projection pipeline", criterion_9),
        ("extended-precision cross-check", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
