//! Time-augmented paths and their piecewise-linear signatures.

use super::dense::{DenseLayout, Scratch};
use super::SignatureError;
use crate::tensor::{GradedTensor, Weight, Word};

/// Grid `t_0 < … < t_m` with values in `R^{d+1}`; coordinate 0 is time.
#[derive(Clone, Debug, PartialEq)]
pub struct PathGrid {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl PathGrid {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, SignatureError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(SignatureError::Grid("times and values must be non-empty and aligned".into()));
        }
        let width = values[0].len();
        if width == 0 {
            return Err(SignatureError::Grid("values need a time coordinate".into()));
        }
        for (k, (t, v)) in times.iter().zip(&values).enumerate() {
            if v.len() != width {
                return Err(SignatureError::Grid(format!("ragged value vector at step {k}")));
            }
            if v[0] != *t {
                return Err(SignatureError::Grid(format!("values[{k}][0] != times[{k}]")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SignatureError::Grid(format!("non-finite value at step {k}")));
            }
        }
        if times.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(SignatureError::Grid("grid must be strictly increasing".into()));
        }
        Ok(PathGrid { times, values })
    }

    /// Path starting at `(0, 0, …, 0)` with given time and space increments.
    pub fn from_increments(dt: &[f64], dw: &[f64], d: usize) -> Result<Self, SignatureError> {
        if dw.len() != dt.len() * d {
            return Err(SignatureError::Grid("increment length mismatch".into()));
        }
        let mut times = Vec::with_capacity(dt.len() + 1);
        let mut values = Vec::with_capacity(dt.len() + 1);
        let mut cur = vec![0.0; d + 1];
        times.push(0.0);
        values.push(cur.clone());
        for (k, h) in dt.iter().enumerate() {
            cur[0] += h;
            for j in 0..d {
                cur[j + 1] += dw[k * d + j];
            }
            times.push(cur[0]);
            values.push(cur.clone());
        }
        PathGrid::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Number of driving (non-time) coordinates.
    pub fn dim(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn increment(&self, k: usize) -> Vec<f64> {
        self.values[k + 1].iter().zip(&self.values[k]).map(|(a, b)| a - b).collect()
    }

    /// Every `stride`-th point (the end point must be on the coarse grid).
    pub fn subsample(&self, stride: usize) -> Result<Self, SignatureError> {
        if stride == 0 || self.steps() % stride != 0 {
            return Err(SignatureError::Grid(format!("stride {stride} does not divide {}", self.steps())));
        }
        let idx = (0..=self.steps()).step_by(stride);
        let times = idx.clone().map(|k| self.times[k]).collect();
        let values = idx.map(|k| self.values[k].clone()).collect();
        PathGrid::new(times, values)
    }
}

/// `exp(Δx)` truncated at level `n`: level-`k` coefficient of word `I` is `Π Δx_{i}/k!`.
pub fn segment_exponential(dx: &[f64], n: usize) -> GradedTensor {
    let dim = dx.len().saturating_sub(1);
    let mut terms: Vec<(Word, f64)> = vec![(Word::empty(), 1.0)];
    let mut level: Vec<(Vec<u8>, f64)> = vec![(Vec::new(), 1.0)];
    for k in 1..=n {
        let mut next = Vec::with_capacity(level.len() * dx.len());
        for (w, c) in &level {
            for (l, x) in dx.iter().enumerate() {
                let mut w2 = w.clone();
                w2.push(l as u8);
                next.push((w2, c * x / k as f64));
            }
        }
        terms.extend(next.iter().map(|(w, c)| (Word::new(w.clone()), *c)));
        level = next;
    }
    GradedTensor::from_terms(dim, n, terms).expect("letters are in range")
}

/// Signatures `Ŵ_{0,t_k}` for all grid times, stored densely.
#[derive(Clone, Debug)]
pub struct SignatureStream {
    layout: DenseLayout,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl SignatureStream {
    pub fn layout(&self) -> &DenseLayout {
        &self.layout
    }

    pub fn trunc(&self) -> usize {
        self.layout.trunc()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dense(&self, k: usize) -> &[f64] {
        let n = self.layout.len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn at(&self, k: usize) -> GradedTensor {
        self.layout.to_graded(self.dense(k))
    }

    pub fn terminal(&self) -> GradedTensor {
        self.at(self.len() - 1)
    }

    /// `⟨e_w, Ŵ_{0,t_k}⟩`; zero for words beyond the truncation.
    pub fn coord(&self, k: usize, w: &Word) -> f64 {
        self.layout.index(w).map(|i| self.dense(k)[i]).unwrap_or(0.0)
    }
}

/// Chen chaining of segment exponentials along a piecewise-linear path.
pub fn signature_piecewise_linear(path: &PathGrid, n: usize) -> SignatureStream {
    let layout = DenseLayout::new(path.dim(), n);
    let width = layout.len();
    let mut data = Vec::with_capacity(width * path.times().len());
    let mut cur = layout.unit();
    data.extend_from_slice(&cur);
    let mut scratch = Scratch::default();
    for k in 0..path.steps() {
        layout.chen_update(&mut cur, &path.increment(k), &mut scratch);
        data.extend_from_slice(&cur);
    }
    SignatureStream { layout, times: path.times().to_vec(), data }
}

/// Terminal signature only, without storing the stream.
pub fn terminal_signature(path: &PathGrid, n: usize) -> GradedTensor {
    let layout = DenseLayout::new(path.dim(), n);
    let mut cur = layout.unit();
    let mut scratch = Scratch::default();
    for k in 0..path.steps() {
        layout.chen_update(&mut cur, &path.increment(k), &mut scratch);
    }
    layout.to_graded(&cur)
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub signature: GradedTensor,
    pub steps: usize,
    pub converged: bool,
    pub last_diff: f64,
}

/// Wong–Zakai refinement: the path is given on a `2^K`-step grid; coarser grids are
/// subsamples. Stops at the first dyadic level whose signature differs from the previous
/// one by less than `tol` in `‖·‖_w`.
pub fn wong_zakai_signature(
    fine: &PathGrid,
    n: usize,
    w: &Weight,
    tol: f64,
) -> Result<Refinement, SignatureError> {
    let m = fine.steps();
    if !m.is_power_of_two() {
        return Err(SignatureError::Grid(format!("{m} steps is not a power of two")));
    }
    let mut stride = m;
    let mut prev = terminal_signature(&fine.subsample(stride)?, n);
    let mut last_diff = f64::INFINITY;
    while stride > 1 {
        stride /= 2;
        let cur = terminal_signature(&fine.subsample(stride)?, n);
        last_diff = cur.sub(&prev).expect("same dimension").norms(w).norm_w;
        prev = cur;
        if last_diff < tol {
            return Ok(Refinement { signature: prev, steps: m / stride, converged: true, last_diff });
        }
    }
    Ok(Refinement { signature: prev, steps: m, converged: last_diff < tol, last_diff })
}

/// `C_p · span^{p n / 2} / (n!)^{p/2}`, with `C_p = 2^p` unless given.
pub fn moment_bound(level: usize, span: f64, p: f64, c_p: Option<f64>) -> f64 {
    let c = c_p.unwrap_or_else(|| 2f64.powf(p));
    let log_fact: f64 = (1..=level).map(|k| (k as f64).ln()).sum();
    c * (p * level as f64 / 2.0 * span.ln() - p / 2.0 * log_fact).exp()
}
