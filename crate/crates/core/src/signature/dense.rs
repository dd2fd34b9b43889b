//! Flat level-stacked storage used on the simulation hot path.

use crate::tensor::{GradedTensor, Word};

/// Index map between words of length `<= trunc` over `{0..=dim}` and a flat vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayout {
    dim: usize,
    alpha: usize,
    trunc: usize,
    offsets: Vec<usize>,
}

impl DenseLayout {
    pub fn new(dim: usize, trunc: usize) -> Self {
        let alpha = dim + 1;
        let mut offsets = Vec::with_capacity(trunc + 2);
        let mut acc = 0usize;
        let mut block = 1usize;
        for _ in 0..=trunc {
            offsets.push(acc);
            acc += block;
            block *= alpha;
        }
        offsets.push(acc);
        DenseLayout { dim, alpha, trunc, offsets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.offsets[self.trunc + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level_range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn index(&self, w: &Word) -> Option<usize> {
        if w.len() > self.trunc {
            return None;
        }
        let mut k = 0usize;
        for &l in w.letters() {
            if l as usize > self.dim {
                return None;
            }
            k = k * self.alpha + l as usize;
        }
        Some(self.offsets[w.len()] + k)
    }

    pub fn word(&self, idx: usize) -> Word {
        let n = (0..=self.trunc).find(|&n| idx < self.offsets[n + 1]).expect("index in range");
        let mut k = idx - self.offsets[n];
        let mut letters = vec![0u8; n];
        for slot in letters.iter_mut().rev() {
            *slot = (k % self.alpha) as u8;
            k /= self.alpha;
        }
        Word::new(letters)
    }

    pub fn unit(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[0] = 1.0;
        v
    }

    pub fn to_graded(&self, v: &[f64]) -> GradedTensor {
        let terms = v
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (self.word(i), *c));
        GradedTensor::from_terms(self.dim, self.trunc, terms).expect("layout words are valid")
    }

    /// Sparse `(index, coeff)` form of a functional; words beyond the layout are reported.
    pub fn sparse_functional(&self, ell: &GradedTensor) -> Result<Vec<(usize, f64)>, Word> {
        ell.iter()
            .map(|(w, c)| self.index(w).map(|i| (i, c)).ok_or_else(|| w.clone()))
            .collect()
    }

    /// In-place `sig ← sig ⊗ exp(dx)`, level by level from the top (Horner form).
    pub fn chen_update(&self, sig: &mut [f64], dx: &[f64], scratch: &mut Scratch) {
        debug_assert_eq!(dx.len(), self.alpha);
        let a = self.alpha;
        for n in (1..=self.trunc).rev() {
            let acc = &mut scratch.acc;
            let nxt = &mut scratch.next;
            acc.clear();
            acc.push(sig[0]);
            for k in 1..=n {
                let f = 1.0 / (n - k + 1) as f64;
                nxt.clear();
                nxt.resize(acc.len() * a, 0.0);
                for (i, &v) in acc.iter().enumerate() {
                    let vf = v * f;
                    let row = &mut nxt[i * a..(i + 1) * a];
                    for (slot, &x) in row.iter_mut().zip(dx) {
                        *slot = vf * x;
                    }
                }
                if k < n {
                    for (slot, &s) in nxt.iter_mut().zip(&sig[self.level_range(k)]) {
                        *slot += s;
                    }
                }
                std::mem::swap(acc, nxt);
            }
            for (s, &v) in sig[self.level_range(n)].iter_mut().zip(acc.iter()) {
                *s += v;
            }
        }
    }
}

#[derive(Default, Debug)]
pub struct Scratch {
    acc: Vec<f64>,
    next: Vec<f64>,
}
