//! Simulated hedging experiments, completeness-depth scans and the Gram shuffle check.

use rayon::prelude::*;

use super::design::{assemble_design, path_features, HedgeBasis, PathFeatures, StaticStrikes};
use super::gkw::{gkw_project, gkw_project_with_remainder, GKWResult};
use super::payoff::Payoff;
use super::HedgeError;
use crate::sde::{simulate_one, SigVolParams};
use crate::stats::mean_se;
use crate::tensor::{GradedTensor, Word};

/// Per-path features and payoff samples, computed without keeping the signature streams.
pub fn simulate_features(
    params: &SigVolParams,
    payoff: &Payoff,
    basis: &HedgeBasis,
    n_paths: usize,
    seed: u64,
) -> Result<(Vec<PathFeatures>, Vec<f64>), HedgeError> {
    basis.validate()?;
    if n_paths == 0 {
        return Err(HedgeError::EmptyDataset);
    }
    let d = params.d();
    let dynamic = basis.dynamic_words(d);
    let residual = basis.residual_words(d);
    let trunc = basis.required_trunc();
    let rows: Vec<(PathFeatures, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (_, sig, price) = simulate_one(params, seed, i, trunc)?;
            let f = path_features(&price, &sig, &dynamic, &residual)?;
            Ok((f, payoff.value(&price)))
        })
        .collect::<Result<_, HedgeError>>()?;
    Ok(rows.into_iter().unzip())
}

/// Simulates `n_paths` paths and projects the payoff.
pub fn run_hedge(
    params: &SigVolParams,
    payoff: &Payoff,
    basis: &HedgeBasis,
    n_paths: usize,
    seed: u64,
) -> Result<GKWResult, HedgeError> {
    let (rows, x) = simulate_features(params, payoff, basis, n_paths, seed)?;
    let design = assemble_design(&rows, basis, params.d())?;
    gkw_project(&x, &design, basis)
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub depth: usize,
    pub residual_norm: f64,
    pub se: f64,
    /// `‖ε‖_{previous depth} − ‖ε‖_{depth}` on the same paths.
    pub decrease: f64,
    /// Paired SE of `decrease`.
    pub decrease_se: f64,
    pub gram_min_eigenvalue: f64,
}

/// Residual norm of the hedge at each integrand depth, on one shared set of paths; `strikes`
/// fixes the static strip (`StaticStrikes::None` for the dynamic hedge alone).
pub fn depth_scan(
    params: &SigVolParams,
    payoff: &Payoff,
    depths: &[usize],
    strikes: &StaticStrikes,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ScanRow>, HedgeError> {
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HedgeError::InvalidBasis("depths must be non-empty and increasing".into()));
    }
    let max = *depths.last().expect("non-empty");
    let full = HedgeBasis { integrand_depth: max, static_strikes: strikes.clone(), ..Default::default() };
    let (rows, x) = simulate_features(params, payoff, &full, n_paths, seed)?;
    let mut out: Vec<ScanRow> = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &depth in depths {
        let basis = HedgeBasis { integrand_depth: depth, static_strikes: strikes.clone(), ..Default::default() };
        // Canonical order lists shorter words first, so depth `k` columns are a prefix.
        let k = basis.dynamic_words(params.d()).len();
        let sub: Vec<PathFeatures> = rows
            .iter()
            .map(|r| PathFeatures { dynamic: r.dynamic[..k].to_vec(), residual: Vec::new(), s_t: r.s_t })
            .collect();
        let design = assemble_design(&sub, &basis, params.d())?;
        let (res, rem) = gkw_project_with_remainder(&x, &design, &basis)?;
        let (decrease, decrease_se) = match &prev {
            None => (0.0, 0.0),
            Some(p) => {
                let diff: Vec<f64> = p.iter().zip(&rem).map(|(a, b)| a * a - b * b).collect();
                let (m, se) = mean_se(&diff);
                let denom = out.last().expect("previous row").residual_norm + res.residual_norm;
                if denom > 0.0 {
                    (m / denom, se / denom)
                } else {
                    (0.0, 0.0)
                }
            }
        };
        out.push(ScanRow {
            depth,
            residual_norm: res.residual_norm,
            se: res.residual_se,
            decrease,
            decrease_se,
            gram_min_eigenvalue: res.gram_min_eigenvalue,
        });
        prev = Some(rem);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ShuffleGramEntry {
    pub left: Word,
    pub right: Word,
    /// Sample `E[Y_I Y_J]`.
    pub product: f64,
    /// Sample `E[⟨e_I ⧢ e_J, Ŵ_T⟩]`.
    pub shuffle: f64,
    /// SE of the paired difference.
    pub se: f64,
}

impl ShuffleGramEntry {
    pub fn within(&self, k_se: f64) -> bool {
        (self.product - self.shuffle).abs() <= k_se * self.se + 1e-12 * (1.0 + self.product.abs())
    }
}

/// Compares the sample Gram of terminal words with shuffle-coordinate expectations.
pub fn shuffle_gram_check(
    params: &SigVolParams,
    words: &[Word],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ShuffleGramEntry>, HedgeError> {
    let d = params.d();
    let trunc = words.iter().map(Word::len).max().unwrap_or(0) * 2;
    let mut pairs = Vec::new();
    for (a, u) in words.iter().enumerate() {
        for v in &words[a..] {
            let eu = GradedTensor::basis(d, trunc, u.clone())?;
            let ev = GradedTensor::basis(d, trunc, v.clone())?;
            pairs.push((u.clone(), v.clone(), eu.shuffle(&ev, trunc)?));
        }
    }
    let samples: Vec<Vec<(f64, f64)>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (_, sig, _) = simulate_one(params, seed, i, trunc)?;
            let lay = sig.layout();
            let last = sig.dense(sig.len() - 1);
            let y = |w: &Word| last[lay.index(w).expect("word within truncation")];
            Ok(pairs
                .iter()
                .map(|(u, v, sh)| {
                    let s: f64 = sh.iter().map(|(w, c)| c * y(w)).sum();
                    (y(u) * y(v), s)
                })
                .collect())
        })
        .collect::<Result<_, HedgeError>>()?;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(p, (u, v, _))| {
            let prod: Vec<f64> = samples.iter().map(|s| s[p].0).collect();
            let shuf: Vec<f64> = samples.iter().map(|s| s[p].1).collect();
            let diff: Vec<f64> = prod.iter().zip(&shuf).map(|(a, b)| a - b).collect();
            ShuffleGramEntry {
                left: u.clone(),
                right: v.clone(),
                product: mean_se(&prod).0,
                shuffle: mean_se(&shuf).0,
                se: mean_se(&diff).1,
            }
        })
        .collect())
}
