use crate::args::{Cli, Command};
use crate::output::{Report, Table};
use etadist::arith::PrimePowerTable;
use etadist::charfun::{density_grid, MarginalInverter};
use etadist::cumulant::{
    a_m, a_sigma, c_m, falling_factor, gn_quadrature, solve_saddle_with, tail_asymptotic, tail_saddle_with,
    tilted_density_at, CumulantEngine, SaddleOptions,
};
use etadist::random_model::{exact_mixed_moment, mc_tail, sample_p_my};
use etadist::zeta_line::{
    bs_discrepancy_crosscheck, default_cutoff, discrepancy, empirical_measure, exact_time_moment, smoothing_length,
    Rectangle, RectangleFamily,
};
use etadist::{Error, ModelPoint, Result, Truncation};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

/// Default prime cutoff cap for t-sampling; each sample costs one term per prime power.
const EMPIRICAL_Y_CAP: f64 = 1e4;

pub fn run(cli: &Cli) -> Result<Report> {
    let mp = ModelPoint::new(cli.sigma, cli.m, cli.alpha)?;
    match cli.command {
        Command::Density => density(cli, &mp),
        Command::Marginal => marginal(cli, &mp),
        Command::Tail => tail(cli, &mp),
        Command::Saddle => saddle(cli, &mp),
        Command::Empirical => empirical(cli, &mp),
        Command::Moments => moments(cli, &mp),
        Command::Constants => constants(cli),
        Command::SelbergCheck => selberg_check(cli, &mp),
    }
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn require_tau(cli: &Cli) -> Result<f64> {
    cli.tau.ok_or_else(|| Error::Parameter(format!("{:?} needs --tau", cli.command).to_lowercase()))
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(hi > lo && step > 0.0) {
        return Err(Error::Parameter(format!("need x-min < x-max and x-step > 0, got {lo}, {hi}, {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > 10_000_000 {
        return Err(Error::Capacity(format!("{n} abscissae requested")));
    }
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

fn density(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let tol = cli.tol.unwrap_or(1e-4);
    let g = density_grid(mp, cli.extent, cli.step, tol)?;
    let mut cols = vec![Vec::with_capacity(g.n * g.n); 4];
    for j in 0..g.n {
        for i in 0..g.n {
            cols[0].push(g.coord(i));
            cols[1].push(g.coord(j));
            cols[2].push(g.at(i, j));
            cols[3].push(g.raw_values[j * g.n + i]);
        }
    }
    Ok(Report {
        result: json!({
            "n": g.n,
            "extent": g.extent,
            "step": g.step,
            "normalization": g.normalization,
            "cutoff_y": g.cutoff_y,
            "tail_correction": g.tail_correction,
            "inversion_radius": g.inversion_radius,
            "w_step": g.w_step,
        }),
        error_budget: json!({
            "tol": tol,
            "normalization_residual": (g.normalization - 1.0).abs(),
            "truncation_residual": g.truncation_residual,
            "min_raw": g.min_raw,
        }),
        table: Some(Table::new(vec!["x", "y", "value", "raw_value"], cols)),
    })
}

fn marginal(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let tol = cli.tol.unwrap_or(1e-8);
    let xs = grid(cli.x_min.unwrap_or(-4.0), cli.x_max.unwrap_or(4.0), cli.x_step.unwrap_or(0.05))?;
    let inv = MarginalInverter::new(mp, Truncation::Full, tol)?;
    let dens: Vec<f64> = xs.iter().map(|&x| inv.density(x)).collect();
    let cdf: Vec<f64> = xs.iter().map(|&x| inv.cdf(x)).collect();
    let min_raw = dens.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Report {
        result: json!({ "points": xs.len(), "t_max": inv.t_max, "dt": inv.dt }),
        error_budget: json!({ "tol": tol, "min_raw_density": min_raw }),
        table: Some(Table::new(vec!["x", "density", "cdf"], vec![xs, dens.iter().map(|v| v.max(0.0)).collect(), cdf])),
    })
}

fn saddle_options(cli: &Cli) -> SaddleOptions {
    SaddleOptions {
        tol: cli.tol.unwrap_or(1e-10),
        kappa_min: cli.kappa_min,
        table_limit: cli.table_limit,
        ..SaddleOptions::default()
    }
}

fn tail(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let tau = require_tau(cli)?;
    let opts = saddle_options(cli);
    let engine = CumulantEngine::with_table(mp, opts.table_limit)?;
    let r = tail_saddle_with(&engine, tau, &opts)?;
    let asymptotic = if r.kappa >= cli.kappa_floor && tau > std::f64::consts::E && mp.in_critical_strip() {
        json!(tail_asymptotic(mp, tau)?)
    } else {
        Value::Null
    };
    let mc = if cli.mc_samples > 0 {
        let y = cli.y.unwrap_or(EMPIRICAL_Y_CAP);
        let table = PrimePowerTable::up_to(y)?;
        let s = sample_p_my(mp, &table, cli.seed, cli.mc_samples as usize)?;
        let e = mc_tail(&s, mp.alpha, tau);
        json!({ "Y": y, "seed": cli.seed, "estimate": e })
    } else {
        Value::Null
    };
    Ok(Report {
        result: json!({ "saddle": r, "asymptotic": asymptotic, "monte_carlo": mc }),
        error_budget: json!({
            "error_scale": r.error_scale,
            "cumulant_error": r.cumulant_error,
            "tail_correction": r.tail_correction,
            "root_tol": opts.tol,
        }),
        table: None,
    })
}

fn saddle(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let tau = require_tau(cli)?;
    let opts = SaddleOptions { kappa_min: 0.0, ..saddle_options(cli) };
    let engine = CumulantEngine::with_table(mp, opts.table_limit)?;
    let r = solve_saddle_with(&engine, tau, &opts)?;
    let sd = r.f2.sqrt();
    let (lo, hi) = (cli.x_min.unwrap_or(-6.0 * sd), cli.x_max.unwrap_or(6.0 * sd));
    let xs = grid(lo, hi, cli.x_step.unwrap_or((hi - lo) / 240.0))?;
    let td = tilted_density_at(mp, r.clone(), &xs, 1e-10)?;
    Ok(Report {
        result: json!({ "saddle": r, "t_max": td.t_max }),
        error_budget: json!({
            "error_scale": r.error_scale,
            "cumulant_error": r.cumulant_error,
            "tail_correction": r.tail_correction,
            "root_tol": opts.tol,
        }),
        table: Some(Table::new(vec!["x", "tilted", "gaussian"], vec![xs, td.values, td.gaussian])),
    })
}

fn empirical(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let y = cli.y.unwrap_or_else(|| default_cutoff(mp.sigma, cli.t, EMPIRICAL_Y_CAP));
    let table = PrimePowerTable::up_to(y)?;
    let em = empirical_measure(mp, &table, cli.t, cli.n_samples as usize)?;
    let n = em.samples.len() as f64;
    let mean: C64 = em.samples.iter().sum::<C64>() / n;
    let second = em.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    let exact_second = exact_time_moment(mp, &table, 1, 1, cli.t)?.re;
    let report = if cli.discrepancy {
        let dg = density_grid(mp, cli.extent, cli.step, cli.tol.unwrap_or(1e-4))?;
        let rf = RectangleFamily::default_for(cli.t, 41, 100_000)?;
        json!(discrepancy(&em, &dg, &rf)?)
    } else {
        Value::Null
    };
    let cols = vec![
        (0..em.samples.len()).map(|j| em.t(j)).collect(),
        em.samples.iter().map(|z| z.re).collect(),
        em.samples.iter().map(|z| z.im).collect(),
    ];
    Ok(Report {
        result: json!({
            "T": em.t_len,
            "Y": em.cutoff_y,
            "t_step": em.t_step,
            "n_samples": em.samples.len(),
            "mean": pair(mean),
            "second_moment": second,
            "exact_second_moment": exact_second,
            "discrepancy": report,
        }),
        error_budget: json!({
            "second_moment_gap": (second - exact_second).abs(),
            "note": "consecutive t-samples are correlated; no standard error is claimed",
        }),
        table: Some(Table::new(vec!["t", "re", "im"], cols)),
    })
}

fn moments(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let y = cli.y.unwrap_or(10.0);
    let table = PrimePowerTable::up_to(y)?;
    let a = exact_time_moment(mp, &table, cli.k, cli.l, cli.t)?;
    let b = exact_mixed_moment(mp, &table, cli.k, cli.l)?;
    let budget = (2f64.powi(mp.m as i32) * y).powi(2 * (cli.k + cli.l) as i32) / cli.t;
    let diff = (a - b).norm();
    Ok(Report {
        result: json!({
            "k": cli.k,
            "l": cli.l,
            "Y": y,
            "T": cli.t,
            "time_moment": pair(a),
            "model_moment": pair(b),
            "difference": diff,
            "budget": budget,
            "within_budget": diff <= budget,
        }),
        error_budget: json!({ "budget": budget }),
        table: None,
    })
}

fn constants(cli: &Cli) -> Result<Report> {
    let s = cli.sigma;
    let g = gn_quadrature(s, cli.n_max as usize)?;
    let g1 = *g.values.get(1).unwrap_or(&(g.values[0] / s));
    let ns: Vec<f64> = (0..g.values.len()).map(|n| n as f64).collect();
    let falling: Vec<f64> = (0..g.values.len()).map(|n| falling_factor(s, n)).collect();
    Ok(Report {
        result: json!({
            "sigma": s,
            "m": cli.m,
            "g": g.values,
            "G_sigma": g.g0_alias_g,
            "A_sigma": a_sigma(s, g.g0_alias_g),
            "A_m": a_m(s, cli.m, g1),
            "C_m": c_m(s, cli.m, g1),
            "g1_direct": g.g1_direct,
        }),
        error_budget: json!({ "g1_consistency": (g.g1_direct - g.values[0] / s).abs() / g.g1_direct.abs() }),
        table: Some(Table::new(vec!["n", "g_n", "G_n"], vec![ns, g.values.clone(), falling])),
    })
}

fn selberg_check(cli: &Cli, mp: &ModelPoint) -> Result<Report> {
    let y = cli.y.unwrap_or_else(|| default_cutoff(mp.sigma, cli.t, EMPIRICAL_Y_CAP));
    let table = PrimePowerTable::up_to(y)?;
    let em = empirical_measure(mp, &table, cli.t, cli.n_samples as usize)?;
    let rect = Rectangle::new(cli.c1, cli.d1, cli.c2, cli.d2)?;
    let l = cli.smoothing.unwrap_or_else(|| smoothing_length(mp, cli.t, 1.0));
    let r = bs_discrepancy_crosscheck(&em, &rect, l)?;
    Ok(Report {
        result: json!({
            "L": l,
            "Y": y,
            "rectangle": rect,
            "plain": r.plain,
            "smoothed": r.smoothed,
            "difference": (r.plain - r.smoothed).abs(),
        }),
        error_budget: json!({ "kernel_bound": r.kernel_bound }),
        table: None,
    })
}
