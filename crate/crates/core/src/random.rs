//! Seeded randomness.
//!
//! Every stochastic routine in the crate takes an explicit [`Seed`] and
//! derives independent streams from it, so results are reproducible and
//! independent of scheduling: parallel restarts each get their own stream
//! keyed by restart index.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Seed for a deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives an independent stream keyed by `tag` (splitmix64 finalizer,
    /// so nearby tags give uncorrelated streams).
    pub fn derive(self, tag: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(tag.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Dense matrix with independent standard normal entries.
pub fn random_gaussian(rows: usize, cols: usize, seed: Seed) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    let mut rng = seed.rng();
    Matrix::new(rows, cols, gaussian_vec(&mut rng, rows * cols))
}

/// Haar-distributed orthogonal matrix: Gaussian draw, modified Gram-Schmidt,
/// signs fixed so the implied triangular factor has a positive diagonal
/// (which is what makes the distribution rotation invariant).
pub fn random_orthogonal(n: usize, seed: Seed) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("orthogonal matrix needs positive dimension"));
    }
    let mut rng = seed.rng();
    loop {
        let cols: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(&mut rng, n)).collect();
        if let Some(q) = orthonormalize(cols) {
            let mut m = Matrix::zeros(n, n);
            for (j, col) in q.iter().enumerate() {
                for i in 0..n {
                    m[(i, j)] = col[i];
                }
            }
            return Ok(m);
        }
        // Degenerate draw (probability ~0): try the next block of the stream.
    }
}

fn orthonormalize(mut cols: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = cols.len();
    for j in 0..n {
        // Two passes of projection for numerical orthogonality.
        for _ in 0..2 {
            for i in 0..j {
                let proj: f64 = cols[j].iter().zip(&cols[i]).map(|(&a, &b)| a * b).sum();
                let prev = cols[i].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        // Sign fix: orient so the j-th coordinate (the would-be triangular
        // diagonal) is positive.
        let sign = if cols[j][j] < 0.0 { -1.0 } else { 1.0 };
        for x in cols[j].iter_mut() {
            *x *= sign / norm;
        }
    }
    Some(cols)
}

/// Random matrix with exact rank `r`: orthogonal factors on both sides and
/// `r` planted singular values drawn uniformly from [0.5, 2], sorted
/// nonincreasing. Requires `1 <= r <= min(rows, cols)`.
pub fn random_rank_r(rows: usize, cols: usize, r: usize, seed: Seed) -> Result<Matrix> {
    let d = rows.min(cols);
    if r == 0 || r > d {
        return Err(Error::invalid(format!(
            "rank {r} out of range for {rows}x{cols}"
        )));
    }
    let u = random_orthogonal(rows, seed.derive(1))?;
    let v = random_orthogonal(cols, seed.derive(2))?;
    let mut rng = seed.derive(3).rng();
    let mut values: Vec<f64> = (0..r).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let diag = Matrix::diag(rows, cols, &values)?;
    u.matmul(&diag)?.matmul(&v.transpose())
}

/// Planted singular values of a `random_rank_r` draw, for tests that need
/// the ground truth the matrix was built from.
pub fn planted_singular_values(r: usize, seed: Seed) -> Vec<f64> {
    let mut rng = seed.derive(3).rng();
    let mut values: Vec<f64> = (0..r).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}
