//! Truncated elements of the weighted tensor algebra, stored sparsely.

use std::collections::BTreeMap;

use super::weight::Weight;
use super::word::{shuffle_words, Word};
use super::TensorError;

/// Sparse truncated tensor over the alphabet `{0..=dim}`.
///
/// Only exact zeros are pruned; no stored word is longer than `trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedTensor {
    dim: usize,
    trunc: usize,
    coeffs: BTreeMap<Word, f64>,
}

/// Linear functionals are stored in the same shape.
pub type DualElement = GradedTensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorms {
    /// `Σ w(n)|a_n|`
    pub norm_w: f64,
    /// `(Σ w(n)|a_n|²)^{1/2}`
    pub norm_2w: f64,
    /// `(Σ |a_n|²/w(n))^{1/2}`
    pub norm_2winv: f64,
}

impl GradedTensor {
    pub fn zero(dim: usize, trunc: usize) -> Self {
        GradedTensor { dim, trunc, coeffs: BTreeMap::new() }
    }

    pub fn unit(dim: usize, trunc: usize) -> Self {
        let mut t = Self::zero(dim, trunc);
        t.coeffs.insert(Word::empty(), 1.0);
        t
    }

    pub fn basis(dim: usize, trunc: usize, word: Word) -> Result<Self, TensorError> {
        Self::from_terms(dim, trunc, [(word, 1.0)])
    }

    /// Builds a tensor from `(word, coeff)` terms; repeated words are summed.
    pub fn from_terms(
        dim: usize,
        trunc: usize,
        terms: impl IntoIterator<Item = (Word, f64)>,
    ) -> Result<Self, TensorError> {
        let mut t = Self::zero(dim, trunc);
        for (w, c) in terms {
            t.check_word(&w)?;
            if !c.is_finite() {
                return Err(TensorError::NonFinite(w.to_text()));
            }
            *t.coeffs.entry(w).or_insert(0.0) += c;
        }
        t.prune();
        Ok(t)
    }

    fn check_word(&self, w: &Word) -> Result<(), TensorError> {
        if let Some(l) = w.max_letter() {
            if l as usize > self.dim {
                return Err(TensorError::LetterOutOfRange { word: w.to_text(), dim: self.dim });
            }
        }
        if w.len() > self.trunc {
            return Err(TensorError::WordTooLong { word: w.to_text(), trunc: self.trunc });
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| *c != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coeff(&self, w: &Word) -> f64 {
        self.coeffs.get(w).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.coeffs.iter().map(|(w, c)| (w, *c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Longest word carrying a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|w| w.len()).max()
    }

    /// Same coefficients, relabelled with a different truncation level.
    pub fn with_trunc(&self, trunc: usize) -> Result<Self, TensorError> {
        if let Some(deg) = self.degree() {
            if deg > trunc {
                return Err(TensorError::WordTooLong { word: format!("degree {deg}"), trunc });
            }
        }
        Ok(GradedTensor { dim: self.dim, trunc, coeffs: self.coeffs.clone() })
    }

    fn same_dim(&self, other: &Self) -> Result<(), TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.same_dim(other)?;
        let mut out = self.clone();
        out.trunc = self.trunc.max(other.trunc);
        for (w, c) in &other.coeffs {
            *out.coeffs.entry(w.clone()).or_insert(0.0) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    /// Concatenation product truncated at level `n`.
    pub fn concat(&self, other: &Self, n: usize) -> Result<Self, TensorError> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim, n);
        for (u, a) in &self.coeffs {
            if u.len() > n {
                break;
            }
            for (v, b) in &other.coeffs {
                if u.len() + v.len() > n {
                    break;
                }
                *out.coeffs.entry(u.concat(v)).or_insert(0.0) += a * b;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Shuffle product truncated at level `n`.
    pub fn shuffle(&self, other: &Self, n: usize) -> Result<Self, TensorError> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim, n);
        for (u, a) in &self.coeffs {
            if u.len() > n {
                break;
            }
            for (v, b) in &other.coeffs {
                if u.len() + v.len() > n {
                    break;
                }
                for (w, m) in shuffle_words(u.letters(), v.letters()) {
                    *out.coeffs.entry(Word::new(w)).or_insert(0.0) += a * b * m as f64;
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// `A(e_{i1…in}) = (-1)^n e_{in…i1}`.
    pub fn antipode(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, c)| {
                let s = if w.len() % 2 == 0 { *c } else { -*c };
                (w.reversed(), s)
            })
            .collect();
        GradedTensor { dim: self.dim, trunc: self.trunc, coeffs }
    }

    /// `π_{≤n}`.
    pub fn project(&self, n: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(w, _)| w.len() <= n)
            .map(|(w, c)| (w.clone(), *c))
            .collect();
        GradedTensor { dim: self.dim, trunc: self.trunc.min(n), coeffs }
    }

    /// Euclidean norm of the level-`n` coefficient vector.
    pub fn level_norm(&self, n: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(w, _)| w.len() == n)
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn level_norms(&self) -> Vec<f64> {
        let top = self.degree().unwrap_or(0);
        let mut sq = vec![0.0; top + 1];
        for (w, c) in &self.coeffs {
            sq[w.len()] += c * c;
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    pub fn norms(&self, w: &Weight) -> WeightedNorms {
        let mut out = WeightedNorms { norm_w: 0.0, norm_2w: 0.0, norm_2winv: 0.0 };
        for (n, a) in self.level_norms().into_iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let wn = w.eval(n);
            out.norm_w += wn * a;
            out.norm_2w += wn * a * a;
            out.norm_2winv += a * a / wn;
        }
        out.norm_2w = out.norm_2w.sqrt();
        out.norm_2winv = out.norm_2winv.sqrt();
        out
    }

    /// `⟨self, a⟩`, summed over the common support.
    pub fn pair(&self, a: &GradedTensor) -> Result<f64, TensorError> {
        self.same_dim(a)?;
        let (small, big) = if self.coeffs.len() <= a.coeffs.len() { (self, a) } else { (a, self) };
        Ok(small
            .coeffs
            .iter()
            .filter_map(|(w, c)| big.coeffs.get(w).map(|d| c * d))
            .sum())
    }

    /// One line per word: `word=i1.i2 coeff=<decimal>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (w, c) in &self.coeffs {
            s.push_str(&format!("word={} coeff={:.16e}\n", w.to_text(), c));
        }
        s
    }

    pub fn from_text(dim: usize, trunc: usize, text: &str) -> Result<Self, TensorError> {
        let mut terms = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| TensorError::Parse { line: k + 1, msg: msg.to_string() };
            let mut word = None;
            let mut coeff = None;
            for tok in line.split_whitespace() {
                if let Some(v) = tok.strip_prefix("word=") {
                    word = Some(Word::parse(v).ok_or_else(|| bad("bad word"))?);
                } else if let Some(v) = tok.strip_prefix("coeff=") {
                    coeff = Some(v.parse::<f64>().map_err(|_| bad("bad coefficient"))?);
                } else {
                    return Err(bad("unexpected token"));
                }
            }
            match (word, coeff) {
                (Some(w), Some(c)) => terms.push((w, c)),
                _ => return Err(bad("expected word=… coeff=…")),
            }
        }
        Self::from_terms(dim, trunc, terms)
    }
}
