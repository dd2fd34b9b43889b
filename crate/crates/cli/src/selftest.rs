//! Algebraic identity suite: shuffle and Chen identities on random piecewise-linear paths,
//! the shuffle normalisation and the antipode.

use sigvol::signature::{brownian_increments, normal_at, terminal_signature, PathGrid};
use sigvol::tensor::{GradedTensor, Word};

/// Highest signature level exercised.
pub const LEVELS: usize = 5;
pub const TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn pass(&self) -> bool {
        self.max_abs_error <= self.tolerance
    }
}

fn max_abs_diff(a: &GradedTensor, b: &GradedTensor) -> f64 {
    a.sub(b).expect("same shape").iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

/// Path `i`: `d = 1 + i mod 3` Brownian letters, `2 + i mod 7` segments of random length.
pub fn random_path(seed: u64, i: u64) -> PathGrid {
    let d = 1 + (i % 3) as usize;
    let m = 2 + (i % 7) as usize;
    let dt: Vec<f64> = (0..m).map(|k| 0.05 + 0.1 * normal_at(seed ^ 0x5eed, i, k, 0, 1).abs()).collect();
    let dw = brownian_increments(d, 1.0, m, seed, i);
    PathGrid::from_increments(&dt, &dw, d).expect("valid increments")
}

fn basis(d: usize, w: &Word) -> GradedTensor {
    GradedTensor::basis(d, LEVELS, w.clone()).expect("word fits")
}

/// Runs every identity on `n_paths` random paths.
pub fn identity_suite(seed: u64, n_paths: usize) -> Vec<IdentityCheck> {
    // e_u ⧢ e_v for |u| + |v| <= LEVELS, per alphabet size
    let shuffles: Vec<Vec<(Word, Word, GradedTensor)>> = (1..=3)
        .map(|d| {
            let words = Word::all_up_to(d, LEVELS);
            let mut out = Vec::new();
            for u in &words {
                for v in &words {
                    if u <= v && u.len() + v.len() <= LEVELS {
                        out.push((u.clone(), v.clone(), basis(d, u).shuffle(&basis(d, v), LEVELS).expect("shuffle")));
                    }
                }
            }
            out
        })
        .collect();

    let (mut shuffle_err, mut chen_err, mut inverse_err, mut involution_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n_paths as u64 {
        let p = random_path(seed, i);
        let d = p.dim();
        let sig = terminal_signature(&p, LEVELS);
        for (u, v, sh) in &shuffles[d - 1] {
            let lhs = sig.coeff(u) * sig.coeff(v);
            shuffle_err = shuffle_err.max((lhs - sh.pair(&sig).expect("pairing")).abs());
        }
        let m = p.steps();
        let dt: Vec<f64> = (0..m).map(|k| p.times()[k + 1] - p.times()[k]).collect();
        let dw: Vec<f64> = (0..m).flat_map(|k| p.increment(k)[1..].to_vec()).collect();
        for k in 1..m {
            let head = PathGrid::from_increments(&dt[..k], &dw[..k * d], d).expect("head");
            let tail = PathGrid::from_increments(&dt[k..], &dw[k * d..], d).expect("tail");
            let chained = terminal_signature(&head, LEVELS).concat(&terminal_signature(&tail, LEVELS), LEVELS).expect("concat");
            chen_err = chen_err.max(max_abs_diff(&chained, &sig));
        }
        let anti = sig.antipode();
        inverse_err = inverse_err.max(max_abs_diff(&sig.concat(&anti, LEVELS).expect("concat"), &GradedTensor::unit(d, LEVELS)));
        involution_err = involution_err.max(max_abs_diff(&anti.antipode(), &sig));
    }

    let one = basis(1, &Word::letter(1));
    let two_e11 = basis(1, &Word::new(vec![1, 1])).scale(2.0);
    let normalisation = max_abs_diff(&one.shuffle(&one, LEVELS).expect("shuffle"), &two_e11);

    vec![
        IdentityCheck { name: "shuffle", cases: n_paths, max_abs_error: shuffle_err, tolerance: TOL },
        IdentityCheck { name: "chen", cases: n_paths, max_abs_error: chen_err, tolerance: TOL },
        IdentityCheck { name: "antipode_inverse", cases: n_paths, max_abs_error: inverse_err, tolerance: TOL },
        IdentityCheck { name: "antipode_involution", cases: n_paths, max_abs_error: involution_err, tolerance: 0.0 },
        IdentityCheck { name: "shuffle_normalisation", cases: 1, max_abs_error: normalisation, tolerance: 0.0 },
    ]
}
