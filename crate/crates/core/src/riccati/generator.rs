//! Drift and carré-du-champ constants of the truncated prolonged signature,
//! optionally extended by the log-price `X = log S`.

use std::collections::HashMap;

use super::RiccatiError;
use crate::tensor::{shuffle_words, DualElement, GradedTensor, Word};

/// A coordinate of the (possibly price-extended) state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Sig(Word),
    LogPrice,
}

impl Coord {
    pub fn label(&self) -> String {
        match self {
            Coord::Sig(w) => w.to_text(),
            Coord::LogPrice => "X".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub ell: DualElement,
    pub eta: Vec<f64>,
}

/// Sparse generator data, indexed by output coordinate:
/// `R(u)_I = Σ_J b^I_J u_J + ½ Σ_{J,K} Γ^I_{J,K} u_J u_K`,
/// where `A Y_J = Σ_I b^I_J Y_I` and `Γ(Y_J, Y_K) = Σ_I Γ^I_{J,K} Y_I`.
#[derive(Clone, Debug)]
pub struct GeneratorTable {
    trunc: usize,
    dim: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    extension: Option<Extension>,
    /// `drift[I] = [(J, b^I_J)]`, sorted by `J`.
    drift: Vec<Vec<(usize, f64)>>,
    /// `gamma[I] = [(J, K, Γ^I_{J,K})]` with `J <= K`, sorted.
    gamma: Vec<Vec<(usize, usize, f64)>>,
}

/// Builds the table at truncation `n` over `d` Brownian letters.
pub fn build_generator(n: usize, d: usize, extended: Option<Extension>) -> Result<GeneratorTable, RiccatiError> {
    if d == 0 {
        return Err(RiccatiError::InvalidArgument("need at least one Brownian letter".into()));
    }
    let words = Word::all_up_to(d, n);
    let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let n_coords = words.len() + usize::from(extended.is_some());
    let mut drift: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_coords];
    let mut gamma: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_coords];

    for (j_idx, w) in words.iter().enumerate() {
        let l = w.letters();
        match l.last() {
            Some(0) => drift[index[&w.prefix()]].push((j_idx, 1.0)),
            Some(&a) if l.len() >= 2 && l[l.len() - 2] == a => {
                let pre = Word::new(l[..l.len() - 2].to_vec());
                drift[index[&pre]].push((j_idx, 0.5));
            }
            _ => {}
        }
    }

    for letter in 1..=d as u8 {
        let ending: Vec<(usize, &Word)> =
            words.iter().enumerate().filter(|(_, w)| w.last() == Some(letter)).collect();
        for (a, &(ja, wa)) in ending.iter().enumerate() {
            for &(jb, wb) in &ending[a..] {
                if wa.len() + wb.len() > n + 2 {
                    continue;
                }
                let (pa, pb) = (wa.prefix(), wb.prefix());
                for (out, mult) in shuffle_words(pa.letters(), pb.letters()) {
                    gamma[index[&Word::new(out)]].push((ja, jb, mult as f64));
                }
            }
        }
    }

    if let Some(ext) = &extended {
        if ext.ell.dim() != d || ext.eta.len() != d {
            return Err(RiccatiError::Dimension(format!(
                "ℓ has dimension {}, η has length {}, table has d = {d}",
                ext.ell.dim(),
                ext.eta.len()
            )));
        }
        let deg = ext.ell.degree().unwrap_or(0);
        if n < 2 * deg {
            return Err(RiccatiError::Window { need: 2 * deg, have: n });
        }
        let x = words.len();
        let ell = ext.ell.with_trunc(n)?;
        let sq = ell.shuffle(&ell, n)?;
        for (w, c) in sq.iter() {
            drift[index[w]].push((x, -0.5 * c));
            gamma[index[w]].push((x, x, c));
        }
        for (j_idx, w) in words.iter().enumerate() {
            let letter = match w.last() {
                Some(l) if l > 0 => l,
                _ => continue,
            };
            let eta = ext.eta[letter as usize - 1];
            if eta == 0.0 {
                continue;
            }
            let e_i = GradedTensor::basis(d, n, w.prefix())?;
            for (out, c) in ell.shuffle(&e_i, n)?.iter() {
                gamma[index[out]].push((j_idx, x, eta * c));
            }
        }
    }

    for list in &mut drift {
        list.sort_by_key(|e| e.0);
    }
    for list in &mut gamma {
        list.sort_by_key(|e| (e.0, e.1));
    }
    Ok(GeneratorTable { trunc: n, dim: d, words, index, extension: extended, drift, gamma })
}

impl GeneratorTable {
    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    pub fn is_extended(&self) -> bool {
        self.extension.is_some()
    }

    pub fn n_coords(&self) -> usize {
        self.drift.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn log_price_index(&self) -> Option<usize> {
        self.extension.as_ref().map(|_| self.words.len())
    }

    pub fn coord_index(&self, c: &Coord) -> Option<usize> {
        match c {
            Coord::Sig(w) => self.index.get(w).copied(),
            Coord::LogPrice => self.log_price_index(),
        }
    }

    pub fn coord(&self, i: usize) -> Coord {
        if i < self.words.len() {
            Coord::Sig(self.words[i].clone())
        } else {
            Coord::LogPrice
        }
    }

    /// Level of coordinate `i` (the log-price counts as level 0).
    pub fn level(&self, i: usize) -> usize {
        self.words.get(i).map(Word::len).unwrap_or(0)
    }

    pub fn ell_degree(&self) -> usize {
        self.extension.as_ref().and_then(|e| e.ell.degree()).unwrap_or(0)
    }

    /// `b^I_J`.
    pub fn b(&self, i: &Coord, j: &Coord) -> f64 {
        match (self.coord_index(i), self.coord_index(j)) {
            (Some(i), Some(j)) => self.drift[i].iter().find(|e| e.0 == j).map(|e| e.1).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// `Γ^I_{J,K}` (symmetric in `J, K`).
    pub fn gamma(&self, i: &Coord, j: &Coord, k: &Coord) -> f64 {
        match (self.coord_index(i), self.coord_index(j), self.coord_index(k)) {
            (Some(i), Some(j), Some(k)) => {
                let (a, b) = (j.min(k), j.max(k));
                self.gamma[i].iter().find(|e| e.0 == a && e.1 == b).map(|e| e.2).unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }

    pub fn drift_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.drift.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |&(j, b)| (i, j, b)))
    }

    pub fn gamma_entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.gamma.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |&(j, k, g)| (i, j, k, g)))
    }

    /// Shuffle-degree window `N >= 2·deg(u) (+ deg ℓ when extended)`.
    pub fn check_window(&self, deg_u: usize) -> Result<(), RiccatiError> {
        let need = 2 * deg_u + self.ell_degree();
        if self.trunc < need {
            return Err(RiccatiError::Window { need, have: self.trunc });
        }
        Ok(())
    }

    /// Dense state vector from a sparse direction `u` and log-price weight `u_x`.
    pub fn state(&self, u: &GradedTensor, u_x: f64) -> Result<RiccatiState, RiccatiError> {
        if u.dim() != self.dim {
            return Err(RiccatiError::Dimension(format!("direction has dimension {}, table {}", u.dim(), self.dim)));
        }
        let mut v = vec![0.0; self.n_coords()];
        for (w, c) in u.iter() {
            let i = self.index.get(w).ok_or_else(|| RiccatiError::Window { need: w.len(), have: self.trunc })?;
            v[*i] = c;
        }
        if u_x != 0.0 {
            let x = self
                .log_price_index()
                .ok_or_else(|| RiccatiError::InvalidArgument("u_X needs a price-extended table".into()))?;
            v[x] = u_x;
        }
        Ok(RiccatiState { u: v, tau: 0.0 })
    }

    /// Highest level carrying a nonzero coefficient of `u`.
    pub fn degree_of(&self, u: &[f64]) -> usize {
        u.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, _)| self.level(i)).max().unwrap_or(0)
    }

    /// `R(u)`.
    pub fn rhs(&self, u: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(j, b) in &self.drift[i] {
                acc += b * u[j];
            }
            for &(j, k, g) in &self.gamma[i] {
                acc += if j == k { 0.5 * g * u[j] * u[j] } else { g * u[j] * u[k] };
            }
            *slot = acc;
        }
    }

    /// `Σ_n w(n)|u_n| + |u_X|` with Euclidean level norms.
    pub fn weighted_norm(&self, u: &[f64], w: &crate::tensor::Weight) -> f64 {
        let mut sq = vec![0.0; self.trunc + 1];
        for (i, c) in u.iter().enumerate().take(self.words.len()) {
            sq[self.words[i].len()] += c * c;
        }
        let x = self.log_price_index().map(|i| u[i].abs()).unwrap_or(0.0);
        sq.iter().enumerate().map(|(n, s)| w.eval(n) * s.sqrt()).sum::<f64>() + x
    }
}

/// Coefficient vector over the table's coordinates plus elapsed flow time.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiState {
    pub u: Vec<f64>,
    pub tau: f64,
}
