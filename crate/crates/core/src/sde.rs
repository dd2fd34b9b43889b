//! Signature SDE `dS = S⟨ℓ,Ŵ⟩dB` simulated as the stochastic exponential `s0·E(M)`,
//! plus H1/H3 and martingale diagnostics.

use std::io::Write;

use rayon::prelude::*;

use crate::fmt::num;
use crate::signature::{brownian_path, signature_piecewise_linear, PathGrid, SignatureError, SignatureStream};
use crate::stats::Moments;
use crate::tensor::{DualElement, TensorError, Weight};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("signature truncation {have} is below the degree {need} of ℓ")]
    Truncation { need: usize, have: usize },
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Clone, Debug)]
pub struct SigVolParams {
    pub ell: DualElement,
    pub weight: Weight,
    pub s0: f64,
    pub eta: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
}

impl SigVolParams {
    pub fn new(
        ell: DualElement,
        weight: Weight,
        s0: f64,
        eta: Vec<f64>,
        horizon: f64,
        steps: usize,
    ) -> Result<Self, SdeError> {
        if eta.is_empty() || ell.dim() != eta.len() {
            return Err(SdeError::InvalidParams(format!(
                "ℓ has dimension {} but η has length {}",
                ell.dim(),
                eta.len()
            )));
        }
        let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(SdeError::InvalidParams(format!("|η| = {norm} is not 1")));
        }
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(SdeError::InvalidParams(format!("s0 = {s0} must be positive")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(SdeError::InvalidParams("horizon and steps must be positive".into()));
        }
        Ok(SigVolParams { ell, weight, s0, eta, horizon, steps })
    }

    /// Number of Brownian coordinates.
    pub fn d(&self) -> usize {
        self.eta.len()
    }

    pub fn ell_degree(&self) -> usize {
        self.ell.degree().unwrap_or(0)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// Grids of `ξ`, `B`, `M`, `⟨M⟩` and `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct PricePath {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub b: Vec<f64>,
    pub m: Vec<f64>,
    pub qv: Vec<f64>,
    pub s: Vec<f64>,
}

impl PricePath {
    pub fn terminal(&self) -> f64 {
        *self.s.last().expect("non-empty path")
    }
}

/// Integrand evaluation on each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Evaluation {
    #[default]
    LeftPoint,
    Midpoint,
}

/// `ξ_{t_k} = ⟨ℓ, Ŵ_{0,t_k}⟩` along the stream.
pub fn volatility_path(params: &SigVolParams, sig: &SignatureStream) -> Result<Vec<f64>, SdeError> {
    let need = params.ell_degree();
    if sig.trunc() < need {
        return Err(SdeError::Truncation { need, have: sig.trunc() });
    }
    if sig.layout().dim() != params.d() {
        return Err(SdeError::InvalidParams("signature dimension differs from ℓ".into()));
    }
    let ell = sig.layout().sparse_functional(&params.ell).expect("degree checked");
    Ok((0..sig.len())
        .map(|k| {
            let v = sig.dense(k);
            ell.iter().map(|(i, c)| c * v[*i]).sum()
        })
        .collect())
}

/// Price path on one driver path with a precomputed signature stream.
pub fn price_from_stream(
    params: &SigVolParams,
    path: &PathGrid,
    sig: &SignatureStream,
    eval: Evaluation,
) -> Result<PricePath, SdeError> {
    if path.dim() != params.d() {
        return Err(SdeError::InvalidParams("path dimension differs from η".into()));
    }
    let xi = volatility_path(params, sig)?;
    let m_steps = path.steps();
    let mut out = PricePath {
        times: path.times().to_vec(),
        xi: xi.clone(),
        b: Vec::with_capacity(m_steps + 1),
        m: Vec::with_capacity(m_steps + 1),
        qv: Vec::with_capacity(m_steps + 1),
        s: Vec::with_capacity(m_steps + 1),
    };
    let (mut b, mut m, mut qv) = (0.0, 0.0, 0.0);
    out.b.push(b);
    out.m.push(m);
    out.qv.push(qv);
    out.s.push(params.s0);
    let vals = path.values();
    for k in 0..m_steps {
        let dt = vals[k + 1][0] - vals[k][0];
        let db: f64 = params
            .eta
            .iter()
            .enumerate()
            .map(|(j, e)| e * (vals[k + 1][j + 1] - vals[k][j + 1]))
            .sum();
        let x = match eval {
            Evaluation::LeftPoint => xi[k],
            Evaluation::Midpoint => 0.5 * (xi[k] + xi[k + 1]),
        };
        b += db;
        m += x * db;
        qv += x * x * dt;
        out.b.push(b);
        out.m.push(m);
        out.qv.push(qv);
        out.s.push(params.s0 * (m - 0.5 * qv).exp());
    }
    Ok(out)
}

/// Simulated path `i`: driver grid, signature stream (truncation `trunc` or `deg ℓ`) and price.
pub fn simulate_one(
    params: &SigVolParams,
    seed: u64,
    path_index: u64,
    trunc: usize,
) -> Result<(PathGrid, SignatureStream, PricePath), SdeError> {
    let path = brownian_path(params.d(), params.horizon, params.steps, seed, path_index);
    let sig = signature_piecewise_linear(&path, trunc.max(params.ell_degree()));
    let price = price_from_stream(params, &path, &sig, Evaluation::LeftPoint)?;
    Ok((path, sig, price))
}

pub fn simulate_price(params: &SigVolParams, paths: &[PathGrid]) -> Result<Vec<PricePath>, SdeError> {
    simulate_price_with(params, paths, Evaluation::LeftPoint)
}

pub fn simulate_price_with(
    params: &SigVolParams,
    paths: &[PathGrid],
    eval: Evaluation,
) -> Result<Vec<PricePath>, SdeError> {
    let n = params.ell_degree();
    paths
        .par_iter()
        .map(|p| price_from_stream(params, p, &signature_piecewise_linear(p, n), eval))
        .collect()
}

/// Terminal prices of `n_paths` simulated paths (memory-lean).
pub fn simulate_terminal(params: &SigVolParams, n_paths: usize, seed: u64) -> Result<Vec<f64>, SdeError> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_one(params, seed, i, 0).map(|(_, _, p)| p.terminal()))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct H1Report {
    pub value: f64,
    pub divergent: bool,
    pub partial_sums: Vec<f64>,
}

/// `Σ w(n)|ℓ_n|²` for a finitely supported `ℓ` (exact).
pub fn check_h1(ell: &DualElement, w: &Weight) -> H1Report {
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for (n, a) in ell.level_norms().into_iter().enumerate() {
        acc += w.eval(n) * a * a;
        partial_sums.push(acc);
    }
    if partial_sums.is_empty() {
        partial_sums.push(0.0);
    }
    H1Report { value: acc, divergent: !acc.is_finite(), partial_sums }
}

/// Relative size of the last-half increment below which partial sums count as a plateau.
pub const H1_PLATEAU_TOL: f64 = 1e-3;

/// Partial sums of `Σ w(n) a(n)²` for a level-norm rule `a(n) = |ℓ_n|`, `n = 0..=tail_terms`.
/// Divergent when the second half of the partial sums still moves by more than
/// [`H1_PLATEAU_TOL`] relative to the total.
pub fn check_h1_rule(level_norm: impl Fn(usize) -> f64, w: &Weight, tail_terms: usize) -> H1Report {
    let tail_terms = tail_terms.max(2);
    let mut partial_sums = Vec::with_capacity(tail_terms + 1);
    let mut acc = 0.0;
    for n in 0..=tail_terms {
        let a2 = level_norm(n).powi(2);
        if a2 != 0.0 {
            acc += w.eval(n) * a2;
        }
        partial_sums.push(acc);
    }
    let half = partial_sums[tail_terms / 2];
    let moved = acc - half;
    let divergent = !acc.is_finite() || moved > H1_PLATEAU_TOL * acc.abs().max(f64::MIN_POSITIVE);
    H1Report { value: acc, divergent, partial_sums }
}

#[derive(Clone, Debug, PartialEq)]
pub struct H3Report {
    pub mean: f64,
    pub se: f64,
    pub ci_halfwidth: f64,
    pub suspicious_heavy_tail: bool,
    pub note: &'static str,
}

/// Monte Carlo estimate of `E exp(λ ∫ξ² ds)`; a report, never a proof of finiteness.
pub fn estimate_h3(params: &SigVolParams, lambda: f64, n_paths: usize, seed: u64) -> Result<H3Report, SdeError> {
    if !(lambda > 0.0) || n_paths == 0 {
        return Err(SdeError::InvalidParams("λ and n_paths must be positive".into()));
    }
    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_one(params, seed, i, 0).map(|(_, _, p)| (lambda * p.qv.last().unwrap()).exp()))
        .collect::<Result<_, _>>()?;
    Ok(h3_from_samples(&samples))
}

pub fn h3_from_samples(samples: &[f64]) -> H3Report {
    let mom = samples.iter().fold(Moments::default(), |mut m, x| {
        m.push(*x);
        m
    });
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = (samples.len() as f64 * 0.001).ceil().max(1.0) as usize;
    let top_sum: f64 = sorted[..top].iter().sum();
    let suspicious = !mom.sum.is_finite() || (samples.len() > top && top_sum > 0.5 * mom.sum);
    H3Report {
        mean: mom.mean(),
        se: mom.se(),
        ci_halfwidth: 1.96 * mom.se(),
        suspicious_heavy_tail: suspicious,
        note: "Monte Carlo cannot certify finiteness of an exponential moment",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    pub n: usize,
    pub mean_st: f64,
    pub se: f64,
    pub z_score: f64,
}

impl MartingaleReport {
    pub fn from_terminal(s0: f64, terminal: &[f64]) -> MartingaleReport {
        let mom = Moments::from_slice(terminal);
        let mean = mom.mean();
        let se = mom.se();
        let z = if se > 0.0 {
            (mean - s0) / se
        } else if mean == s0 {
            0.0
        } else {
            (mean - s0).signum() * f64::INFINITY
        };
        MartingaleReport { n: terminal.len(), mean_st: mean, se, z_score: z }
    }
}

/// `z = (mean S_T − s0)/se`.
pub fn martingale_check(prices: &[PricePath]) -> Result<MartingaleReport, SdeError> {
    if prices.len() < 2 {
        return Err(SdeError::InvalidParams("martingale check needs at least two paths".into()));
    }
    let s0 = prices[0].s[0];
    let terminal: Vec<f64> = prices.iter().map(PricePath::terminal).collect();
    Ok(MartingaleReport::from_terminal(s0, &terminal))
}

/// CSV with columns `path_id,t,xi,B,M,qv,S`.
pub fn write_price_csv(prices: &[PricePath], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "path_id,t,xi,B,M,qv,S")?;
    for (i, p) in prices.iter().enumerate() {
        for k in 0..p.times.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                i,
                num(p.times[k]),
                num(p.xi[k]),
                num(p.b[k]),
                num(p.m[k]),
                num(p.qv[k]),
                num(p.s[k])
            )?;
        }
    }
    Ok(())
}
