//! Counter-based Gaussian draws keyed by `(seed, path, step, coordinate)`.
//!
//! Each path owns a ChaCha stream; draw `c = step·d + coord` consumes exactly four
//! 32-bit words starting at word position `4c` (two uniforms, Box–Muller cosine branch),
//! so any draw can be recomputed in isolation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::path::PathGrid;
use super::SignatureError;

const TWO_PI: f64 = std::f64::consts::TAU;

#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    let u1 = open_unit(a);
    let u2 = open_unit(b);
    (-2.0 * u1.ln()).sqrt() * (TWO_PI * u2).cos()
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Standard normal number `(step, coord)` of path `path_index`.
pub fn normal_at(seed: u64, path_index: u64, step: usize, coord: usize, d: usize) -> f64 {
    let mut rng = path_rng(seed, path_index);
    rng.set_word_pos(4 * (step * d + coord) as u128);
    let a = rng.next_u64();
    let b = rng.next_u64();
    box_muller(a, b)
}

/// All `steps·d` standard normals of one path, step-major.
pub fn path_normals(seed: u64, path_index: u64, steps: usize, d: usize) -> Vec<f64> {
    let mut rng = path_rng(seed, path_index);
    (0..steps * d)
        .map(|_| {
            let a = rng.next_u64();
            let b = rng.next_u64();
            box_muller(a, b)
        })
        .collect()
}

/// Brownian increments `N(0, T/steps)` for one path, step-major.
pub fn brownian_increments(d: usize, horizon: f64, steps: usize, seed: u64, path_index: u64) -> Vec<f64> {
    let sd = (horizon / steps as f64).sqrt();
    let mut z = path_normals(seed, path_index, steps, d);
    for x in &mut z {
        *x *= sd;
    }
    z
}

pub fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect()
}

/// One time-augmented Brownian path on the uniform grid.
pub fn brownian_path(d: usize, horizon: f64, steps: usize, seed: u64, path_index: u64) -> PathGrid {
    let times = uniform_times(horizon, steps);
    let dw = brownian_increments(d, horizon, steps, seed, path_index);
    path_from_increments(&times, &dw, d)
}

pub(crate) fn path_from_increments(times: &[f64], dw: &[f64], d: usize) -> PathGrid {
    let mut values = Vec::with_capacity(times.len());
    let mut cur = vec![0.0; d + 1];
    values.push(cur.clone());
    for (k, t) in times.iter().enumerate().skip(1) {
        cur[0] = *t;
        for j in 0..d {
            cur[j + 1] += dw[(k - 1) * d + j];
        }
        values.push(cur.clone());
    }
    PathGrid::new(times.to_vec(), values).expect("uniform grid is valid")
}

pub fn validate_grid_args(horizon: f64, steps: usize) -> Result<(), SignatureError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SignatureError::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if steps == 0 {
        return Err(SignatureError::InvalidArgument("steps must be positive".into()));
    }
    Ok(())
}

/// `n_paths` independent paths; path `i` depends only on `(seed, i)`.
pub fn simulate_brownian_grid(
    d: usize,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathGrid>, SignatureError> {
    validate_grid_args(horizon, steps)?;
    if n_paths == 0 {
        return Err(SignatureError::InvalidArgument("n_paths must be positive".into()));
    }
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| brownian_path(d, horizon, steps, seed, i))
        .collect())
}
