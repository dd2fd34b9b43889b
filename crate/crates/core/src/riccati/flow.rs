//! Adaptive Dormand–Prince integration with explosion detection, and transform values.

use std::io::Write;

use super::generator::{GeneratorTable, RiccatiState};
use super::RiccatiError;
use crate::fmt::num;
use crate::tensor::{GradedTensor, Weight};

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub tol: f64,
    pub explosion_threshold: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub weight: Weight,
    /// Keep every accepted step.
    pub record: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            tol: 1e-10,
            explosion_threshold: 1e6,
            min_step: 1e-12,
            max_steps: 1_000_000,
            weight: Weight::geometric(2.0),
            record: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExplosionReason {
    Threshold,
    StepUnderflow,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowOutcome {
    Solved { u: Vec<f64>, steps: usize, trajectory: Vec<(f64, Vec<f64>)> },
    Exploded { t_star: f64, norm: f64, reason: ExplosionReason, trajectory: Vec<(f64, Vec<f64>)> },
}

impl FlowOutcome {
    pub fn trajectory(&self) -> &[(f64, Vec<f64>)] {
        match self {
            FlowOutcome::Solved { trajectory, .. } | FlowOutcome::Exploded { trajectory, .. } => trajectory,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous ODE `y' = f(y)` on `[0, horizon]`.
///
/// A step is accepted when the embedded error, scaled by `1 + |y|` componentwise, is at
/// most `tol`; otherwise the step is halved. Explosion is declared when `norm(y)` exceeds
/// the threshold before `horizon`, or when the step falls below `min_step`.
pub fn integrate_ode(
    y0: &[f64],
    horizon: f64,
    f: impl Fn(&[f64], &mut [f64]),
    norm: impl Fn(&[f64]) -> f64,
    cfg: &FlowConfig,
) -> Result<FlowOutcome, RiccatiError> {
    if !(cfg.tol > 0.0) {
        return Err(RiccatiError::InvalidArgument("tol must be positive".into()));
    }
    if !(horizon >= 0.0) {
        return Err(RiccatiError::InvalidArgument("horizon must be non-negative".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = (horizon / 16.0).max(cfg.min_step).min(horizon.max(cfg.min_step));
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut steps = 0usize;
    let mut trajectory = Vec::new();
    if cfg.record {
        trajectory.push((0.0, y.clone()));
    }
    let mut attempts = 0usize;
    while t < horizon {
        attempts += 1;
        if attempts > cfg.max_steps {
            let nrm = norm(&y);
            return Ok(FlowOutcome::Exploded { t_star: t, norm: nrm, reason: ExplosionReason::StepLimit, trajectory });
        }
        let h_eff = h.min(horizon - t);
        f(&y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, a) in A[s].iter().enumerate().take(s) {
                    acc += h_eff * a * k[r][i];
                }
                tmp[i] = acc;
            }
            let (done, rest) = k.split_at_mut(s);
            let _ = done;
            f(&tmp, &mut rest[0]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut hi = y[i];
            let mut e = 0.0;
            for s in 0..7 {
                hi += h_eff * B5[s] * k[s][i];
                e += h_eff * (B5[s] - B4[s]) * k[s][i];
            }
            y5[i] = hi;
            let scale = 1.0 + y[i].abs().max(hi.abs());
            let r = e.abs() / scale;
            err = if r.is_finite() && err.is_finite() { err.max(r) } else { f64::INFINITY };
        }
        if err <= cfg.tol {
            t = if h_eff >= horizon - t { horizon } else { t + h_eff };
            std::mem::swap(&mut y, &mut y5);
            steps += 1;
            if cfg.record {
                trajectory.push((t, y.clone()));
            }
            let nrm = norm(&y);
            if t < horizon && !(nrm <= cfg.explosion_threshold) {
                return Ok(FlowOutcome::Exploded { t_star: t, norm: nrm, reason: ExplosionReason::Threshold, trajectory });
            }
            let grow = if err == 0.0 { 2.0 } else { (0.9 * (cfg.tol / err).powf(0.2)).clamp(1.0, 2.0) };
            h = h_eff * grow;
        } else {
            h = h_eff * 0.5;
            if h < cfg.min_step {
                let nrm = norm(&y);
                return Ok(FlowOutcome::Exploded { t_star: t, norm: nrm, reason: ExplosionReason::StepUnderflow, trajectory });
            }
        }
    }
    Ok(FlowOutcome::Solved { u: y, steps, trajectory })
}

/// Flows `∂τψ = R(ψ)` from `u0` for time `horizon`.
pub fn integrate_flow(
    u0: &RiccatiState,
    horizon: f64,
    table: &GeneratorTable,
    cfg: &FlowConfig,
) -> Result<FlowOutcome, RiccatiError> {
    if u0.u.len() != table.n_coords() {
        return Err(RiccatiError::Dimension(format!(
            "state has {} coordinates, table {}",
            u0.u.len(),
            table.n_coords()
        )));
    }
    let w = cfg.weight.clone();
    integrate_ode(&u0.u, horizon, |u, out| table.rhs(u, out), |u| table.weighted_norm(u, &w), cfg)
}

/// `R(u)` with dimension checking.
pub fn riccati_rhs(u: &RiccatiState, table: &GeneratorTable) -> Result<Vec<f64>, RiccatiError> {
    if u.u.len() != table.n_coords() {
        return Err(RiccatiError::Dimension(format!(
            "state has {} coordinates, table {}",
            u.u.len(),
            table.n_coords()
        )));
    }
    let mut out = vec![0.0; table.n_coords()];
    table.rhs(&u.u, &mut out);
    Ok(out)
}

/// `Λ₀ = exp(ψ_∅(T) + u_X·x0)`; the window `N >= 2 deg u (+ deg ℓ)` is checked first.
pub fn transform_value(
    u0: &RiccatiState,
    horizon: f64,
    table: &GeneratorTable,
    x0: f64,
    cfg: &FlowConfig,
) -> Result<f64, RiccatiError> {
    table.check_window(table.degree_of(&u0.u))?;
    match integrate_flow(u0, horizon, table, cfg)? {
        FlowOutcome::Solved { u, .. } => {
            let ux = table.log_price_index().map(|i| u[i]).unwrap_or(0.0);
            Ok((u[0] + ux * x0).exp())
        }
        FlowOutcome::Exploded { t_star, norm, .. } => Err(RiccatiError::Exploded { t_star, norm }),
    }
}

/// `π_M R_N(u) == R_M(π_M u)` coordinatewise, for `u` supported in levels `<= M`.
pub fn projection_compatibility(
    u: &GradedTensor,
    u_x: f64,
    table_n: &GeneratorTable,
    table_m: &GeneratorTable,
) -> Result<bool, RiccatiError> {
    let (n, m) = (table_n.trunc(), table_m.trunc());
    if m > n || table_n.dim() != table_m.dim() || table_n.extension() != table_m.extension() {
        return Err(RiccatiError::InvalidArgument("tables must share d and extension, with M <= N".into()));
    }
    let deg = u.degree().unwrap_or(0);
    if deg > m {
        return Err(RiccatiError::Window { need: deg, have: m });
    }
    table_m.check_window(deg)?;
    let rn = riccati_rhs(&table_n.state(u, u_x)?, table_n)?;
    let rm = riccati_rhs(&table_m.state(u, u_x)?, table_m)?;
    for (i, v) in rm.iter().enumerate() {
        let j = table_n.coord_index(&table_m.coord(i)).expect("M-words are N-words");
        if rn[j] != *v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Comparison deadline `2/(a·y0)` for `ẏ >= a y²`.
pub fn scalar_explosion_bound(a: f64, y0: f64) -> f64 {
    2.0 / (a * y0)
}

/// `tau,component_word,psi_value` rows for every accepted step, then `lambda0=` or `exploded_at=`.
pub fn write_transform_csv(
    outcome: &FlowOutcome,
    table: &GeneratorTable,
    x0: f64,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(out, "tau,component_word,psi_value")?;
    for (tau, u) in outcome.trajectory() {
        for (i, v) in u.iter().enumerate() {
            if *v != 0.0 {
                writeln!(out, "{},{},{}", num(*tau), table.coord(i).label(), num(*v))?;
            }
        }
    }
    match outcome {
        FlowOutcome::Solved { u, .. } => {
            let ux = table.log_price_index().map(|i| u[i]).unwrap_or(0.0);
            writeln!(out, "lambda0={}", num((u[0] + ux * x0).exp()))
        }
        FlowOutcome::Exploded { t_star, .. } => writeln!(out, "exploded_at={}", num(*t_star)),
    }
}
