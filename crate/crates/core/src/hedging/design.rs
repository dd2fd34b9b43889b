//! Per-path regression columns: dynamic gains, static option strip, terminal signature words.

use rayon::prelude::*;

use super::HedgeError;
use crate::sde::PricePath;
use crate::signature::SignatureStream;
use crate::tensor::{Weight, Word};

#[derive(Clone, Debug, PartialEq)]
pub enum StaticStrikes {
    None,
    /// Seven equally spaced quantiles of the simulated `S_T`.
    Auto,
    List(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct HedgeBasis {
    /// Dynamic integrand features `⟨e_K, Ŵ_t⟩` for `|K| <= integrand_depth`.
    pub integrand_depth: usize,
    /// Terminal words `N_low < |I| <= M`.
    pub residual_window: Option<(usize, usize)>,
    pub static_strikes: StaticStrikes,
    /// `None` selects `1e-8 · trace(G)/dim` on the standardized Gram matrix.
    pub ridge: Option<f64>,
    pub drop_tol: f64,
    /// Weight used for the reported `κ(w, N_low)`.
    pub weight: Weight,
}

impl Default for HedgeBasis {
    fn default() -> Self {
        HedgeBasis {
            integrand_depth: 2,
            residual_window: None,
            static_strikes: StaticStrikes::Auto,
            ridge: None,
            drop_tol: 1e-6,
            weight: Weight::geometric(2.0),
        }
    }
}

impl HedgeBasis {
    pub fn validate(&self) -> Result<(), HedgeError> {
        if let Some((lo, hi)) = self.residual_window {
            if lo >= hi {
                return Err(HedgeError::InvalidBasis(format!("residual window needs N_low < M, got ({lo}, {hi})")));
            }
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0) {
                return Err(HedgeError::InvalidBasis("ridge must be non-negative".into()));
            }
        }
        if !(self.drop_tol > 0.0) {
            return Err(HedgeError::InvalidBasis("drop tolerance must be positive".into()));
        }
        if let StaticStrikes::List(k) = &self.static_strikes {
            if k.iter().any(|x| !x.is_finite()) {
                return Err(HedgeError::InvalidBasis("strikes must be finite".into()));
            }
        }
        Ok(())
    }

    /// Signature truncation needed to evaluate every column.
    pub fn required_trunc(&self) -> usize {
        self.integrand_depth.max(self.residual_window.map(|w| w.1).unwrap_or(0))
    }

    pub fn dynamic_words(&self, d: usize) -> Vec<Word> {
        Word::all_up_to(d, self.integrand_depth)
    }

    pub fn residual_words(&self, d: usize) -> Vec<Word> {
        match self.residual_window {
            Some((lo, hi)) => Word::all_up_to(d, hi).into_iter().filter(|w| w.len() > lo).collect(),
            None => Vec::new(),
        }
    }
}

/// Raw per-path features before the static strip is fixed.
#[derive(Clone, Debug)]
pub struct PathFeatures {
    pub dynamic: Vec<f64>,
    pub residual: Vec<f64>,
    pub s_t: f64,
}

/// `G_K = Σ_k ⟨e_K,Ŵ_{t_k}⟩ ΔS_k` and `Y_I = ⟨e_I,Ŵ_T⟩`.
pub fn path_features(
    price: &PricePath,
    sig: &SignatureStream,
    dynamic: &[Word],
    residual: &[Word],
) -> Result<PathFeatures, HedgeError> {
    let lay = sig.layout();
    let idx = |ws: &[Word]| -> Result<Vec<usize>, HedgeError> {
        ws.iter()
            .map(|w| lay.index(w).ok_or(HedgeError::Truncation { need: w.len(), have: lay.trunc() }))
            .collect()
    };
    let di = idx(dynamic)?;
    let ri = idx(residual)?;
    let mut g = vec![0.0; di.len()];
    for k in 0..price.s.len() - 1 {
        let ds = price.s[k + 1] - price.s[k];
        let v = sig.dense(k);
        for (slot, &i) in g.iter_mut().zip(&di) {
            *slot += v[i] * ds;
        }
    }
    let last = sig.dense(sig.len() - 1);
    Ok(PathFeatures { dynamic: g, residual: ri.iter().map(|&i| last[i]).collect(), s_t: price.terminal() })
}

/// Column-major design.
#[derive(Clone, Debug)]
pub struct Design {
    pub n: usize,
    pub dynamic_words: Vec<Word>,
    pub dynamic: Vec<Vec<f64>>,
    pub static_labels: Vec<String>,
    pub static_cols: Vec<Vec<f64>>,
    pub residual_words: Vec<Word>,
    pub residual: Vec<Vec<f64>>,
}

impl Design {
    pub fn n_columns(&self) -> usize {
        1 + self.dynamic.len() + self.static_cols.len() + self.residual.len()
    }
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Stacks per-path features and appends the static strip.
pub fn assemble_design(rows: &[PathFeatures], basis: &HedgeBasis, d: usize) -> Result<Design, HedgeError> {
    if rows.is_empty() {
        return Err(HedgeError::EmptyDataset);
    }
    let n = rows.len();
    let dynamic_words = basis.dynamic_words(d);
    let residual_words = basis.residual_words(d);
    let column = |f: &dyn Fn(&PathFeatures) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let dynamic = (0..dynamic_words.len()).map(|j| column(&|r| r.dynamic[j])).collect();
    let residual = (0..residual_words.len()).map(|j| column(&|r| r.residual[j])).collect();
    let st = column(&|r| r.s_t);

    let strikes = match &basis.static_strikes {
        StaticStrikes::None => Vec::new(),
        StaticStrikes::List(k) => k.clone(),
        StaticStrikes::Auto => {
            let mut s = st.clone();
            s.sort_by(f64::total_cmp);
            (1..=7).map(|k| quantile(&s, k as f64 / 8.0)).collect()
        }
    };
    let mut static_labels = Vec::new();
    let mut static_cols = Vec::new();
    for k in &strikes {
        static_labels.push(format!("call:K={}", crate::fmt::num(*k)));
        static_cols.push(st.iter().map(|s| (s - k).max(0.0)).collect());
    }
    // S_T = s0 + G_∅ already lies in the span when the constant integrand is present.
    if !strikes.is_empty() && dynamic_words.is_empty() {
        static_labels.push("S_T".into());
        static_cols.push(st);
    }
    Ok(Design { n, dynamic_words, dynamic, static_labels, static_cols, residual_words, residual })
}

/// Design from materialized `(price, signature)` pairs.
pub fn build_design(dataset: &[(PricePath, SignatureStream)], basis: &HedgeBasis) -> Result<Design, HedgeError> {
    basis.validate()?;
    if dataset.is_empty() {
        return Err(HedgeError::EmptyDataset);
    }
    let d = dataset[0].1.layout().dim();
    let dynamic = basis.dynamic_words(d);
    let residual = basis.residual_words(d);
    let rows: Vec<PathFeatures> = dataset
        .par_iter()
        .map(|(p, s)| path_features(p, s, &dynamic, &residual))
        .collect::<Result<_, _>>()?;
    assemble_design(&rows, basis, d)
}
