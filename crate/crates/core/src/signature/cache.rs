//! Binary path-dataset cache.
//!
//! Layout (little-endian): `d: u64, T: f64, steps: u64, n_paths: u64, seed: u64`, then
//! `n_paths · steps · d` Brownian increments as `f64`, row-major (path, step, coordinate).

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::path::PathGrid;
use super::rng::{brownian_increments, path_from_increments, uniform_times, validate_grid_args};
use super::SignatureError;

const HEADER_BYTES: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct PathCache {
    pub d: usize,
    pub horizon: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub increments: Vec<f64>,
}

impl PathCache {
    pub fn generate(d: usize, horizon: f64, steps: usize, n_paths: usize, seed: u64) -> Result<Self, SignatureError> {
        validate_grid_args(horizon, steps)?;
        let rows: Vec<Vec<f64>> = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| brownian_increments(d, horizon, steps, seed, i))
            .collect();
        Ok(PathCache { d, horizon, steps, n_paths, seed, increments: rows.concat() })
    }

    pub fn path(&self, i: usize) -> PathGrid {
        let row = self.steps * self.d;
        path_from_increments(&uniform_times(self.horizon, self.steps), &self.increments[i * row..(i + 1) * row], self.d)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * self.increments.len());
        out.extend_from_slice(&(self.d as u64).to_le_bytes());
        out.extend_from_slice(&self.horizon.to_le_bytes());
        out.extend_from_slice(&(self.steps as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_paths as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for x in &self.increments {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, SignatureError> {
        if b.len() < HEADER_BYTES {
            return Err(SignatureError::Cache("truncated header".into()));
        }
        let word = |i: usize| <[u8; 8]>::try_from(&b[8 * i..8 * i + 8]).expect("8 bytes");
        let d = u64::from_le_bytes(word(0)) as usize;
        let horizon = f64::from_le_bytes(word(1));
        let steps = u64::from_le_bytes(word(2)) as usize;
        let n_paths = u64::from_le_bytes(word(3)) as usize;
        let seed = u64::from_le_bytes(word(4));
        let count = n_paths
            .checked_mul(steps)
            .and_then(|x| x.checked_mul(d))
            .ok_or_else(|| SignatureError::Cache("header sizes overflow".into()))?;
        if b.len() != HEADER_BYTES + 8 * count {
            return Err(SignatureError::Cache(format!(
                "expected {} payload bytes, found {}",
                8 * count,
                b.len() - HEADER_BYTES
            )));
        }
        let increments = b[HEADER_BYTES..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(PathCache { d, horizon, steps, n_paths, seed, increments })
    }

    pub fn save(&self, path: &Path) -> Result<(), SignatureError> {
        let mut f = std::fs::File::create(path).map_err(|e| SignatureError::Cache(e.to_string()))?;
        f.write_all(&self.to_bytes()).map_err(|e| SignatureError::Cache(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SignatureError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| SignatureError::Cache(e.to_string()))?;
        Self::from_bytes(&buf)
    }
}
