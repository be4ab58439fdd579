//! The experiment drivers behind each subcommand.

use hermite_approx::bounds::{min_n_for, soundness_audit, BoundInput, BoundKind, SoundnessReport, HYPOTHESIS_READING};
use hermite_approx::expansion::{expand, projection_error_from, reconstruct, time_concentration, Signal};
use hermite_approx::kernel::{residual_bound, residual_grid, residual_hs_norm, DEFAULT_HS_ORDER};
use hermite_approx::wkb::{uniform_grid, verify_envelope_lipschitz, verify_phase_lemma_scaled};

use crate::config::{BoundArg, Experiment, Params};
use crate::error::CliError;
use crate::output::{Cell, OutputDir, Table};
use crate::svg::{self, Series};

/// Half-width of profile windows, in units of `T`.
const PROFILE_SPAN: f64 = 1.5;
/// Distance from a breakpoint below which profile errors count as "near".
const NEAR_BREAK: f64 = 0.1;

pub fn run(params: &Params) -> Result<(), CliError> {
    let mut out = OutputDir::create(&params.out, params.format)?;
    let (notes, verdict) = match params.experiment {
        Experiment::Example1 => (example1(params, &mut out)?, Ok(())),
        Experiment::Example2 => {
            let f = Signal::indicator(-0.5, 0.5)?;
            let alpha = params.alpha.unwrap_or(10.0);
            let mut configs: Vec<(f64, usize)> = params.n.iter().map(|&n| (alpha, n)).collect();
            if alpha != 1.0 {
                configs.extend(params.n.iter().map(|&n| (1.0, n)));
            }
            (profiles(params, &mut out, &f, &configs)?, Ok(()))
        }
        Experiment::Example3 => {
            let f = Signal::hat(0.0, 1.0)?;
            let alphas = match params.alpha {
                Some(a) => vec![a],
                None => vec![10f64.sqrt(), 50f64.sqrt()],
            };
            let configs: Vec<(f64, usize)> =
                alphas.iter().flat_map(|&a| params.n.iter().map(move |&n| (a, n))).collect();
            (profiles(params, &mut out, &f, &configs)?, Ok(()))
        }
        Experiment::Custom => {
            let f = parse_signal(params.signal.as_deref().unwrap_or_default())?;
            let alpha = params.alpha.unwrap_or(1.0);
            let configs: Vec<(f64, usize)> = params.n.iter().map(|&n| (alpha, n)).collect();
            (profiles(params, &mut out, &f, &configs)?, Ok(()))
        }
        Experiment::LemmaAudit => lemma_audit(params, &mut out)?,
        Experiment::BoundAudit => bound_audit(params, &mut out)?,
        Experiment::MinN => (min_n(params, &mut out)?, Ok(())),
    };
    out.finish(params, &notes)?;
    verdict
}

fn example1(params: &Params, out: &mut OutputDir) -> Result<Notes, CliError> {
    let t = params.t;
    let mut table = Table::new(&["n", "sup_residual", "hs_norm", "theorem_bound"]);
    let (mut ns, mut sups, mut hss) = (vec![], vec![], vec![]);
    for &n in &params.n {
        let grid = residual_grid(n, t, params.grid)?;
        let hs = residual_hs_norm(n, t, DEFAULT_HS_ORDER)?;
        let mut bytes = Vec::new();
        grid.write_csv(&mut bytes)?;
        out.write(&format!("grids/n{n}.csv"), &bytes)?;
        table.push(vec![n.into(), grid.sup_residual.into(), hs.into(), residual_bound(n, t).into()]);
        ns.push(n as f64);
        sups.push(grid.sup_residual);
        hss.push(hs);
    }
    out.table("table", &table)?;
    print!("{}", table.to_csv());
    if params.svg {
        let plot = svg::render(
            &format!("kernel residual, T={t}"),
            &[
                Series { label: "sup |k_n - sinc|", xs: &ns, ys: &sups },
                Series { label: "HS norm", xs: &ns, ys: &hss },
            ],
        )?;
        out.write("residual.svg", plot.as_bytes())?;
    }
    Ok(vec![])
}

fn label_alpha(alpha: f64) -> String {
    if alpha.fract() == 0.0 {
        format!("{alpha}")
    } else {
        format!("{alpha:.4}")
    }
}

fn profiles(
    params: &Params,
    out: &mut OutputDir,
    f: &Signal,
    configs: &[(f64, usize)],
) -> Result<Notes, CliError> {
    let t = params.t;
    let xs = uniform_grid(-PROFILE_SPAN * t, PROFILE_SPAN * t, params.grid);
    let fx: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect();
    let breaks = f.breakpoints();
    let eps_t = time_concentration(f, t)?;
    let norm = f.l2_norm();
    let mut summary = Table::new(&[
        "signal",
        "alpha",
        "n",
        "l2_error",
        "relative_l2_error",
        "max_abs_error",
        "max_abs_error_near_breaks",
        "max_abs_error_away",
        "eps_T",
    ]);
    for &(alpha, n) in configs {
        let coeffs = expand(f, n, alpha)?;
        let approx = reconstruct(&coeffs, &xs);
        let err: Vec<f64> = fx.iter().zip(&approx).map(|(a, b)| a - b).collect();
        let l2 = projection_error_from(f, &coeffs, t)?;
        let (mut near, mut away, mut all) = (0.0f64, 0.0f64, 0.0f64);
        for (&x, &e) in xs.iter().zip(&err) {
            let e = e.abs();
            all = all.max(e);
            if breaks.iter().any(|b| (x - b).abs() < NEAR_BREAK) {
                near = near.max(e);
            } else {
                away = away.max(e);
            }
        }
        let dir = format!("alpha{}_n{n}", label_alpha(alpha));
        let mut prof = Table::new(&["x", "f", "approx", "error"]);
        for i in 0..xs.len() {
            prof.push(vec![xs[i].into(), fx[i].into(), approx[i].into(), err[i].into()]);
        }
        out.table(&format!("{dir}/profile"), &prof)?;
        let mut bytes = Vec::new();
        coeffs.write_csv(&mut bytes)?;
        out.write(&format!("{dir}/coefficients.csv"), &bytes)?;
        if params.svg {
            let title = format!("n={n}, alpha={}", label_alpha(alpha));
            let a = svg::render(
                &title,
                &[Series { label: "f", xs: &xs, ys: &fx }, Series { label: "K_n^alpha f", xs: &xs, ys: &approx }],
            )?;
            out.write(&format!("{dir}/profile.svg"), a.as_bytes())?;
            let e = svg::render(&format!("error, {title}"), &[Series { label: "f - K_n^alpha f", xs: &xs, ys: &err }])?;
            out.write(&format!("{dir}/error.svg"), e.as_bytes())?;
        }
        summary.push(vec![
            f.label().into(),
            alpha.into(),
            n.into(),
            l2.into(),
            (l2 / norm).into(),
            all.into(),
            near.into(),
            away.into(),
            eps_t.into(),
        ]);
    }
    out.table("summary", &summary)?;
    print!("{}", summary.to_csv());
    Ok(vec![("signal", f.label())])
}

/// `indicator:A,B`, `hat:C,W`, `gaussian:S`, `hermite:K` or `csv:PATH`,
/// with an optional `@D` suffix applying the dilation `δ_D`.
pub fn parse_signal(spec: &str) -> Result<Signal, CliError> {
    let bad = |m: &str| CliError::Config(format!("signal '{spec}': {m}"));
    let (body, dilation) = match spec.rsplit_once('@') {
        Some((b, d)) => match d.trim().parse::<f64>() {
            Ok(v) => (b, Some(v)),
            Err(_) => (spec, None),
        },
        None => (spec, None),
    };
    let (kind, args) = body.split_once(':').ok_or_else(|| bad("expected KIND:ARGS"))?;
    let nums = || -> Result<Vec<f64>, CliError> {
        args.split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad("arguments must be numbers")))
            .collect()
    };
    let signal = match kind.trim() {
        "indicator" => match nums()?[..] {
            [a, b] => Signal::indicator(a, b)?,
            _ => return Err(bad("indicator takes A,B")),
        },
        "hat" => match nums()?[..] {
            [c, w] => Signal::hat(c, w)?,
            _ => return Err(bad("hat takes CENTER,HALF_WIDTH")),
        },
        "gaussian" => match nums()?[..] {
            [s] => Signal::gaussian(s)?,
            _ => return Err(bad("gaussian takes SIGMA")),
        },
        "hermite" => Signal::hermite(args.trim().parse().map_err(|_| bad("hermite takes an integer K"))?)?,
        "csv" => Signal::from_csv_path(args.trim())?,
        other => return Err(bad(&format!("unknown kind '{other}'"))),
    };
    match dilation {
        Some(d) => Ok(signal.dilated(d)?),
        None => Ok(signal),
    }
}

type Verdict = Result<(), CliError>;
/// Extra `key: value` lines recorded in the manifest.
type Notes = Vec<(&'static str, String)>;

fn lemma_audit(params: &Params, out: &mut OutputDir) -> Result<(Notes, Verdict), CliError> {
    let t = params.t;
    let scale = params.constant_scale;
    let mut report = Table::new(&["n", "T", "inequality", "worst_ratio", "x", "y", "holds"]);
    let mut skipped = Table::new(&["n", "T", "reason"]);
    let mut worst = (0.0f64, String::new());
    for &n in &params.n {
        let lemma = match verify_phase_lemma_scaled(n, t, params.grid, scale) {
            Ok(r) => r,
            Err(hermite_approx::Error::Domain { reason, .. }) => {
                skipped.push(vec![n.into(), t.into(), reason.into()]);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let lip = verify_envelope_lipschitz(n, params.grid)?;
        let rows = lemma
            .worst_ratios
            .iter()
            .map(|(id, w)| (id.clone(), *w))
            .chain([
                ("envelope-lip-half".to_string(), lip.half_regime),
                ("envelope-lip-eta".to_string(), lip.eta_regime),
            ]);
        for (id, mut w) in rows {
            if id.starts_with("envelope") {
                w.ratio /= scale;
            }
            if w.ratio > worst.0 {
                worst = (w.ratio, format!("{id} at n={n}, x={}, y={}", w.x, w.y));
            }
            report.push(vec![
                n.into(),
                t.into(),
                id.into(),
                w.ratio.into(),
                w.x.into(),
                w.y.into(),
                (w.ratio <= 1.0).into(),
            ]);
        }
    }
    out.table("skipped", &skipped)?;
    if report.rows.is_empty() {
        return Err(CliError::Config("every lemma-audit cell was filtered out by its preconditions".into()));
    }
    out.table("report", &report)?;
    println!("lemma audit: {} ratios, worst {:.6} ({})", report.rows.len(), worst.0, worst.1);
    let verdict = if worst.0 > 1.0 {
        Err(CliError::Audit(format!("worst ratio {} > 1: {}", worst.0, worst.1)))
    } else {
        Ok(())
    };
    Ok((vec![("worst", format!("{} {}", worst.0, worst.1))], verdict))
}

/// Built-in signals of the bound audit.
fn audit_signals() -> Result<Vec<Signal>, CliError> {
    Ok(vec![
        Signal::indicator(-0.5, 0.5)?,
        Signal::hat(0.0, 1.0)?,
        Signal::gaussian(0.5)?,
        Signal::hermite(2)?,
    ])
}

fn bound_audit(params: &Params, out: &mut OutputDir) -> Result<(Notes, Verdict), CliError> {
    let alphas = match params.alpha {
        Some(a) => vec![a],
        None => vec![0.5, 1.0],
    };
    let mut all = SoundnessReport::default();
    for f in audit_signals()? {
        all.extend(soundness_audit(&f, &params.n, &alphas)?);
    }
    for cell in &mut all.cells {
        cell.bound_value *= params.constant_scale;
    }
    let mut report = Table::new(&["signal", "bound", "n", "T", "alpha", "measured", "bound_value", "ratio", "holds"]);
    for c in &all.cells {
        report.push(vec![
            c.signal.clone().into(),
            c.bound.into(),
            c.n.into(),
            c.t.into(),
            c.alpha.into(),
            c.measured.into(),
            c.bound_value.into(),
            c.ratio().into(),
            c.holds().into(),
        ]);
    }
    let mut skipped = Table::new(&["signal", "bound", "n", "alpha", "reason"]);
    for s in &all.skipped {
        skipped.push(vec![s.signal.clone().into(), s.bound.into(), s.n.into(), s.alpha.into(), s.reason.clone().into()]);
    }
    out.table("skipped", &skipped)?;
    if all.cells.is_empty() {
        return Err(CliError::Config("every bound-audit cell was filtered out by its preconditions".into()));
    }
    out.table("report", &report)?;
    let worst = all.worst().expect("nonempty");
    let summary = format!("{} {} n={} alpha={} ratio {:.6}", worst.signal, worst.bound, worst.n, worst.alpha, worst.ratio());
    println!(
        "bound audit: {} cells, {} skipped, tightest {summary}",
        all.cells.len(),
        all.skipped.len()
    );
    let violations = all.violations().count();
    let verdict = if violations > 0 {
        Err(CliError::Audit(format!("{violations} cells exceed their bound; tightest {summary}")))
    } else {
        Ok(())
    };
    Ok((vec![("hypothesis_reading", HYPOTHESIS_READING.to_string())], verdict))
}

fn min_n(params: &Params, out: &mut OutputDir) -> Result<Notes, CliError> {
    let target = params.target.expect("validated");
    let kind = match params.bound {
        BoundArg::Local => BoundKind::Local,
        BoundArg::Global => BoundKind::Global,
        BoundArg::Scaled => BoundKind::Scaled,
    };
    let alpha = params.alpha;
    let base = BoundInput {
        t0: params.t0,
        omega0: params.omega0,
        eps_t: params.eps_t,
        eps_omega: params.eps_omega,
        alpha,
        c: params.c.or(alpha.map(|a| 2.0 * a)),
        ..BoundInput::new(0, params.t)
    };
    let n = min_n_for(target, kind, &base)?;
    let value = kind.evaluate(&BoundInput { n, ..base })?;
    let mut table = Table::new(&["bound", "target", "n_min", "bound_value"]);
    let name = match kind {
        BoundKind::Local => "local",
        BoundKind::Global => "global",
        BoundKind::Scaled => "scaled",
    };
    table.push(vec![Cell::from(name), target.into(), n.into(), value.into()]);
    out.table("result", &table)?;
    print!("{}", table.to_csv());
    Ok(vec![("hypothesis_reading", HYPOTHESIS_READING.to_string())])
}
