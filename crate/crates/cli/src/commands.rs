use std::io::Write;

use sigvol::fmt::num;
use sigvol::hedging::{depth_scan, run_hedge, HedgeBasis, Payoff, StaticStrikes};
use sigvol::models::{preset, PRESET_NAMES};
use sigvol::riccati::{build_generator, integrate_flow, write_transform_csv, Extension, FlowConfig, FlowOutcome};
use sigvol::sde::{check_h1, estimate_h3, martingale_check, simulate_one, simulate_price, write_price_csv, SigVolParams};
use sigvol::signature::simulate_brownian_grid;
use sigvol::stats::Moments;
use sigvol::tensor::{GradedTensor, Weight, Word};

use crate::config::{Command, RunConfig, Strikes};
use crate::selftest::identity_suite;
use crate::{CliError, Report};

/// Largest level accepted when parsing inline tensors.
const PARSE_TRUNC: usize = 64;

pub fn run(cmd: &Command, cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    match cmd {
        Command::Selftest(_) => selftest(cfg, report),
        Command::Simulate(_) => simulate(cfg, report),
        Command::Hypotheses(_) => hypotheses(cfg, report),
        Command::Transform(_) => transform(cfg, report),
        Command::Hedge(_) => hedge(cfg, report),
        Command::DepthReport(_) => depth_report(cfg, report),
    }
}

fn parse_weight(spec: &str) -> Result<Weight, CliError> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let value = || arg.parse::<f64>().map_err(|_| CliError::Invalid(format!("weight {spec}: bad parameter")));
    match kind {
        "geometric" => Ok(Weight::geometric(value()?)),
        "polynomial" => Ok(Weight::polynomial(value()?)),
        "constant" if arg.is_empty() => Ok(Weight::constant()),
        _ => Err(CliError::Invalid(format!("unknown weight {spec}"))),
    }
}

fn parse_tensor(d: usize, text: &str) -> Result<GradedTensor, CliError> {
    let t = GradedTensor::from_text(d, PARSE_TRUNC, &text.replace(';', "\n"))?;
    Ok(t.with_trunc(t.degree().unwrap_or(0))?)
}

fn model(cfg: &RunConfig, default_steps: usize) -> Result<SigVolParams, CliError> {
    let steps = cfg.steps.unwrap_or(default_steps);
    let p = preset(&cfg.model)?;
    if let Some(w) = p.warning {
        eprintln!("warning: {}: {w}", p.name);
    }
    let weight = cfg.weight.as_deref().map(parse_weight).transpose()?.unwrap_or(p.weight.clone());
    let (ell, eta) = match (&cfg.ell, cfg.sigma) {
        (Some(_), Some(_)) => return Err(CliError::Invalid("give either an inline ℓ or --sigma, not both".into())),
        (Some(text), None) => {
            let eta = cfg.eta.clone().ok_or_else(|| CliError::Invalid("an inline ℓ needs eta".into()))?;
            (parse_tensor(eta.len(), text)?, eta)
        }
        (None, Some(sigma)) => {
            if p.name != "black_scholes" {
                return Err(CliError::Invalid("--sigma applies to the black_scholes preset only".into()));
            }
            (GradedTensor::from_terms(1, 0, [(Word::empty(), sigma)])?, vec![1.0])
        }
        (None, None) => {
            let ell = p.ell.clone().ok_or_else(|| CliError::Invalid(format!("{} is metadata only", p.name)))?;
            (ell, cfg.eta.clone().unwrap_or(p.eta.clone()))
        }
    };
    Ok(SigVolParams::new(ell, weight, cfg.s0, eta, cfg.horizon, steps)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn selftest(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let checks = identity_suite(cfg.seed, cfg.paths.unwrap_or(100));
    let out = &mut report.csv;
    writeln!(out, "check,cases,max_abs_error,tolerance,pass")?;
    for c in &checks {
        writeln!(out, "{},{},{},{},{}", c.name, c.cases, num(c.max_abs_error), num(c.tolerance), u8::from(c.pass()))?;
    }
    match checks.iter().find(|c| !c.pass()) {
        Some(c) => Err(CliError::Degenerate(format!("{} identity off by {}", c.name, c.max_abs_error))),
        None => Ok(()),
    }
}

fn simulate(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let params = model(cfg, 100)?;
    let paths = simulate_brownian_grid(params.d(), params.horizon, params.steps, cfg.paths.unwrap_or(100), cfg.seed)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let prices = simulate_price(&params, &paths)?;
    write_price_csv(&prices, &mut report.csv)?;
    if prices.len() >= 2 {
        let m = martingale_check(&prices)?;
        report.summary.push(format!("mean_terminal={}", num(m.mean_st)));
        report.summary.push(format!("mean_terminal_se={}", num(m.se)));
        report.summary.push(format!("martingale_z={}", num(m.z_score)));
    }
    Ok(())
}

fn hypotheses(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let params = model(cfg, 100)?;
    let n = cfg.paths.unwrap_or(10_000);
    let h1 = check_h1(&params.ell, &params.weight);
    let h3 = estimate_h3(&params, cfg.lambda, n, cfg.seed)?;
    let terminal: Vec<f64> =
        (0..n as u64).map(|i| simulate_one(&params, cfg.seed, i, 0).map(|r| r.2.terminal())).collect::<Result<_, _>>()?;
    let m = sigvol::sde::MartingaleReport::from_terminal(params.s0, &terminal);
    let out = &mut report.csv;
    writeln!(out, "check,key,value")?;
    writeln!(out, "h1,weight,{}", csv_field(&params.weight.name()))?;
    for (k, s) in h1.partial_sums.iter().enumerate() {
        writeln!(out, "h1,partial_sum_{k},{}", num(*s))?;
    }
    writeln!(out, "h1,value,{}", num(h1.value))?;
    writeln!(out, "h1,divergent,{}", u8::from(h1.divergent))?;
    writeln!(out, "h3,lambda,{}", num(cfg.lambda))?;
    writeln!(out, "h3,mean,{}", num(h3.mean))?;
    writeln!(out, "h3,se,{}", num(h3.se))?;
    writeln!(out, "h3,ci_halfwidth,{}", num(h3.ci_halfwidth))?;
    writeln!(out, "h3,suspicious_heavy_tail,{}", u8::from(h3.suspicious_heavy_tail))?;
    writeln!(out, "martingale,mean_terminal,{}", num(m.mean_st))?;
    writeln!(out, "martingale,se,{}", num(m.se))?;
    writeln!(out, "martingale,z,{}", num(m.z_score))?;
    writeln!(out, "run,paths,{n}")?;
    report.summary.push(format!("note={}", h3.note));
    if h1.divergent {
        return Err(CliError::Invalid("H1 sum diverges".into()));
    }
    Ok(())
}

fn transform(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let params = model(cfg, 100)?;
    let d = params.d();
    let u = match &cfg.u {
        Some(text) => parse_tensor(d, text)?,
        None => GradedTensor::zero(d, 0),
    };
    let deg_u = u.degree().unwrap_or(0);
    let trunc = cfg.trunc.unwrap_or(2 * deg_u + params.ell_degree());
    let table = build_generator(trunc, d, Some(Extension { ell: params.ell.clone(), eta: params.eta.clone() }))?;
    table.check_window(deg_u)?;
    let state = table.state(&u, cfg.u_x)?;
    let flow_cfg = FlowConfig { record: true, weight: params.weight.clone(), ..FlowConfig::default() };
    let outcome = integrate_flow(&state, params.horizon, &table, &flow_cfg)?;
    let x0 = params.s0.ln();
    write_transform_csv(&outcome, &table, x0, &mut report.csv)?;
    if let FlowOutcome::Exploded { t_star, norm, .. } = outcome {
        return Err(CliError::Degenerate(format!("flow exploded at tau = {t_star} (norm {norm})")));
    }
    if cfg.mc_paths > 0 {
        let mut mom = Moments::default();
        for i in 0..cfg.mc_paths as u64 {
            let (_, sig, price) = simulate_one(&params, cfg.seed, i, deg_u)?;
            let y = sig.terminal();
            mom.push((u.pair(&y)? + cfg.u_x * price.terminal().ln()).exp());
        }
        report.summary.push(format!("mc_lambda0={}", num(mom.mean())));
        report.summary.push(format!("mc_se={}", num(mom.se())));
        report.summary.push(format!("mc_paths={}", cfg.mc_paths));
    }
    Ok(())
}

fn strikes(cfg: &RunConfig, default: StaticStrikes) -> Result<StaticStrikes, CliError> {
    Ok(match &cfg.strikes {
        None => default,
        Some(Strikes::List(k)) => StaticStrikes::List(k.clone()),
        Some(Strikes::Named(s)) => match s.as_str() {
            "auto" => StaticStrikes::Auto,
            "none" => StaticStrikes::None,
            list => StaticStrikes::List(
                list.split(',')
                    .map(|k| k.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("bad strike list {list}"))))
                    .collect::<Result<_, _>>()?,
            ),
        },
    })
}

fn payoff(cfg: &RunConfig) -> Result<Payoff, CliError> {
    Ok(Payoff::parse(cfg.payoff.as_deref().unwrap_or("call:K=1"))?)
}

fn hedge(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let params = model(cfg, 100)?;
    let payoff = payoff(cfg)?;
    let defaults = HedgeBasis::default();
    let basis = HedgeBasis {
        integrand_depth: cfg.depth.unwrap_or(defaults.integrand_depth),
        residual_window: cfg.window,
        static_strikes: strikes(cfg, StaticStrikes::Auto)?,
        ridge: cfg.ridge,
        weight: params.weight.clone(),
        ..defaults
    };
    let n = cfg.paths.unwrap_or(20_000);
    let res = run_hedge(&params, &payoff, &basis, n, cfg.seed)?;
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    let out = &mut report.csv;
    writeln!(out, "section,key,value")?;
    writeln!(out, "price,price,{}", num(res.price))?;
    writeln!(out, "price,cash,{}", num(res.cash))?;
    for (w, c) in &res.dynamic_coeffs {
        writeln!(out, "dynamic,{},{}", csv_field(&w.to_text()), num(*c))?;
    }
    for (k, c) in &res.static_coeffs {
        writeln!(out, "static,{},{}", csv_field(k), num(*c))?;
    }
    for (w, c) in &res.residual_coeffs {
        writeln!(out, "residual,{},{}", csv_field(&w.to_text()), num(*c))?;
    }
    for k in &res.dropped {
        writeln!(out, "dropped,{},0", csv_field(k))?;
    }
    for (key, v) in [
        ("residual_norm", res.residual_norm),
        ("residual_se", res.residual_se),
        ("eps_norm", res.eps_norm),
        ("eps_se", res.eps_se),
        ("payoff_norm", res.payoff_norm),
        ("kappa_bound", res.kappa_bound),
        ("kappa_times_norm", res.kappa_times_norm()),
        ("gram_min_eigenvalue", res.gram_min_eigenvalue),
        ("ridge", res.ridge),
    ] {
        writeln!(out, "diagnostics,{key},{}", num(v))?;
    }
    writeln!(out, "diagnostics,n_paths,{}", res.n_paths)?;
    if !(res.gram_min_eigenvalue > 0.0) {
        return Err(CliError::Degenerate(format!("Gram minimum eigenvalue {}", res.gram_min_eigenvalue)));
    }
    Ok(())
}

fn depth_report(cfg: &RunConfig, report: &mut Report) -> Result<(), CliError> {
    let out = &mut report.csv;
    writeln!(out, "section,key,field,value")?;
    for name in PRESET_NAMES {
        let p = preset(name)?;
        writeln!(out, "table,{name},model,{}", csv_field(p.table_name))?;
        writeln!(out, "table,{name},ns_star,{}", csv_field(&p.depth_meta.0.to_string()))?;
        writeln!(out, "table,{name},k,{}", csv_field(&p.depth_meta.1.to_string()))?;
        writeln!(out, "table,{name},riccati_structure,{}", csv_field(p.riccati_structure))?;
        writeln!(out, "table,{name},simulable,{}", u8::from(!p.is_metadata_only()))?;
        writeln!(out, "table,{name},notes,{}", csv_field(p.notes))?;
    }
    let params = model(cfg, 100)?;
    let depths = cfg.depths.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let rows = depth_scan(&params, &payoff(cfg)?, &depths, &strikes(cfg, StaticStrikes::None)?, cfg.paths.unwrap_or(20_000), cfg.seed)?;
    for r in &rows {
        let depth = r.depth;
        for (field, v) in [
            ("residual_norm", r.residual_norm),
            ("se", r.se),
            ("decrease", r.decrease),
            ("decrease_se", r.decrease_se),
            ("gram_min_eigenvalue", r.gram_min_eigenvalue),
        ] {
            writeln!(out, "scan,{depth},{field},{}", num(v))?;
        }
    }
    if let Some(r) = rows.iter().find(|r| !(r.gram_min_eigenvalue > 0.0)) {
        return Err(CliError::Degenerate(format!("Gram minimum eigenvalue {} at depth {}", r.gram_min_eigenvalue, r.depth)));
    }
    Ok(())
}
