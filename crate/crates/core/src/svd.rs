//! Singular value decomposition via one-sided Jacobi rotations.
//!
//! Jacobi is chosen over bidiagonalization because the crate targets small
//! matrices (dimensions in the tens) where its simplicity and high relative
//! accuracy win; LAPACK-grade edge-case coverage is out of scope. The sweep
//! loop orthogonalizes pairs of columns until every pair is orthogonal to
//! relative precision `OFF_DIAGONAL_TOL`, capped at `100 * min(m, n)` sweeps.
//! Inputs are pre-scaled by an exact power of two and columns carrying less
//! than `DEFLATION_REL` of the total mass are zeroed, which keeps the sweep
//! arithmetic out of the subnormal range on rank-deficient inputs.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative off-diagonal mass below which a column pair counts as orthogonal.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Sweep cap multiplier: the iteration budget is `100 * min(m, n)` sweeps.
const SWEEP_CAP_PER_DIM: usize = 100;

/// Columns whose norm falls below this fraction of the total Frobenius mass
/// are treated as exactly zero. Rotations annihilate the dependent columns of
/// a rank-deficient input only geometrically, so without a floor their norms
/// decay into the subnormal range, where squared norms underflow and the
/// rotation threshold degenerates; 1e-150 is far below any meaningful
/// relative precision while keeping every live quantity normal.
const DEFLATION_REL: f64 = 1e-150;

/// Singular values in nonincreasing order.
///
/// The vector lives in the cone of nonnegative nonincreasing sequences.
/// (Some texts parameterize the same cone in nondecreasing order; everything
/// in this crate consistently uses largest-first.)
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValues {
    values: Vec<f64>,
}

impl SingularValues {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest singular value (0 for the zero matrix).
    pub fn leading(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full decomposition `m = u · diag(s) · vᵀ` with square orthogonal factors.
///
/// `u` is `rows × rows`, `v` is `cols × cols`, and `diag(s)` is the
/// rectangular diagonal matrix carrying `s` on its main diagonal.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub s: SingularValues,
    pub v: Matrix,
}

impl SvdFactors {
    /// Reassembles `u · diag(s) · vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let mut out = Matrix::zeros(m, n);
        for (k, &sv) in self.s.values().iter().enumerate() {
            if sv == 0.0 {
                continue;
            }
            for i in 0..m {
                let uik = self.u[(i, k)] * sv;
                if uik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += uik * self.v[(j, k)];
                }
            }
        }
        out
    }

    /// Checks the factor contract against the original matrix: orthogonality
    /// of `u` and `v` to 1e-10 (max absolute deviation), reconstruction to
    /// 1e-10 relative Frobenius error, and the ordering of `s`.
    pub fn validate(&self, original: &Matrix) -> Result<()> {
        let ortho_u = orthogonality_defect(&self.u);
        let ortho_v = orthogonality_defect(&self.v);
        if ortho_u > 1e-10 || ortho_v > 1e-10 {
            return Err(Error::numerical(format!(
                "orthogonality defect too large: u {ortho_u:.2e}, v {ortho_v:.2e}"
            )));
        }
        let recon = self.reconstruct();
        let diff = recon.sub(original)?.frobenius();
        let scale = original.frobenius().max(1e-300);
        if diff / scale > 1e-10 && diff > 1e-12 {
            return Err(Error::numerical(format!(
                "reconstruction error {:.2e} relative to {:.2e}",
                diff, scale
            )));
        }
        let s = self.s.values();
        if s.windows(2).any(|w| w[0] < w[1]) || s.iter().any(|&v| v < 0.0) {
            return Err(Error::numerical("singular values out of order"));
        }
        Ok(())
    }
}

fn orthogonality_defect(q: &Matrix) -> f64 {
    let n = q.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let mut dot = 0.0;
            for k in 0..n {
                dot += q[(k, i)] * q[(k, j)];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// One-sided Jacobi on the columns of `a` (which must have rows >= cols).
/// Returns the orthogonalized columns and, if requested, the accumulated
/// right rotations as columns of an orthogonal basis.
fn jacobi_columns(
    a: &Matrix,
    accumulate_v: bool,
) -> Result<(Vec<Vec<f64>>, Option<Vec<Vec<f64>>>)> {
    let n = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    if cols.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    let mut v: Option<Vec<Vec<f64>>> = if accumulate_v {
        Some(
            (0..n)
                .map(|j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    e
                })
                .collect(),
        )
    } else {
        None
    };

    // Exact power-of-two scaling so the largest entry lands in [1, 2); undone
    // before returning. Keeps squared norms and thresholds away from the
    // overflow and subnormal ranges regardless of the input's overall scale.
    let max_abs = cols.iter().flatten().fold(0.0f64, |m, &x| m.max(x.abs()));
    let exp = if max_abs > 0.0 {
        -(max_abs.log2().floor() as i32)
    } else {
        0
    };
    scale_by_exp2(&mut cols, exp);
    let fro2: f64 = cols.iter().flatten().map(|&x| x * x).sum();
    let floor2 = fro2 * (DEFLATION_REL * DEFLATION_REL);

    let cap = SWEEP_CAP_PER_DIM * a.min_dim().max(1);
    let mut converged = n < 2;
    for _sweep in 0..cap {
        if converged {
            break;
        }
        for col in cols.iter_mut() {
            if dot(col, col) <= floor2 {
                col.fill(0.0);
            }
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= OFF_DIAGONAL_TOL * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    // The quadratic formula's zeta^2 would overflow; at this
                    // magnitude the tangent is 1/(2 zeta) to full precision.
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate_pair(v, p, q, c, s);
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "jacobi sweep cap ({cap}) exceeded without convergence"
        )));
    }
    scale_by_exp2(&mut cols, -exp);
    Ok((cols, v))
}

/// Multiplies every entry by `2^exp`, stepping in chunks small enough that
/// each factor is itself representable. Power-of-two scaling is exact
/// wherever the result stays in range.
fn scale_by_exp2(cols: &mut [Vec<f64>], exp: i32) {
    let mut left = exp;
    while left != 0 {
        let step = left.clamp(-512, 512);
        let f = (2.0f64).powi(step);
        for col in cols.iter_mut() {
            for x in col.iter_mut() {
                *x *= f;
            }
        }
        left -= step;
    }
}

/// Applies the rotation `[c, s; -s, c]` to columns `p` and `q`.
fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let len = cols[p].len();
    for i in 0..len {
        let xp = cols[p][i];
        let xq = cols[q][i];
        cols[p][i] = c * xp - s * xq;
        cols[q][i] = s * xp + c * xq;
    }
}

/// Full SVD with square orthogonal factors.
pub fn svd(m: &Matrix) -> Result<SvdFactors> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let rows = m.rows();
    let cols = m.cols();
    let (w, v) = jacobi_columns(m, true)?;
    let v = v.expect("v accumulation requested");

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    // Left factor: normalized nonzero columns, then an orthonormal
    // completion for null directions and the extra row dimensions.
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for &j in &order {
        if norms[j] > 0.0 {
            u_cols.push(w[j].iter().map(|&x| x / norms[j]).collect());
        }
    }
    complete_basis(&mut u_cols, rows)?;

    let mut u = Matrix::zeros(rows, rows);
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..rows {
            u[(i, j)] = col[i];
        }
    }
    let mut v_m = Matrix::zeros(cols, cols);
    for (jj, &j) in order.iter().enumerate() {
        for i in 0..cols {
            v_m[(i, jj)] = v[j][i];
        }
    }

    Ok(SvdFactors {
        u,
        s: SingularValues { values },
        v: v_m,
    })
}

/// Extends a set of orthonormal columns to an orthonormal basis of R^dim,
/// picking at each step the standard basis vector with the largest residual.
fn complete_basis(cols: &mut Vec<Vec<f64>>, dim: usize) -> Result<()> {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..dim {
            let mut r = vec![0.0; dim];
            r[i] = 1.0;
            // Two Gram-Schmidt passes keep the completion orthogonal to
            // working precision even when the residual is small.
            for _ in 0..2 {
                for c in cols.iter() {
                    let proj = dot(&r, c);
                    for (rk, ck) in r.iter_mut().zip(c) {
                        *rk -= proj * ck;
                    }
                }
            }
            let norm = dot(&r, &r).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, mut r) = best.expect("dim > 0");
        if norm < 1e-6 {
            return Err(Error::numerical("failed to complete orthonormal basis"));
        }
        for x in r.iter_mut() {
            *x /= norm;
        }
        cols.push(r);
    }
    Ok(())
}

/// Singular values only. Skips accumulating the factors, which matters in
/// the estimator inner loops where this is called per candidate.
pub fn singular_values(m: &Matrix) -> Result<SingularValues> {
    let work;
    let a = if m.rows() < m.cols() {
        work = m.transpose();
        &work
    } else {
        m
    };
    let (w, _) = jacobi_columns(a, false)?;
    let mut values: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(SingularValues { values })
}

/// Number of singular values exceeding `tol` relative to the largest one:
/// `#{i : s_i > tol * s_1}`. The zero matrix has rank 0. Requires `tol > 0`.
pub fn numerical_rank(m: &Matrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    let s = singular_values(m)?;
    let lead = s.leading();
    if lead == 0.0 {
        return Ok(0);
    }
    Ok(s.values().iter().filter(|&&v| v > tol * lead).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_orthogonal, random_rank_r, Seed};
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let m = Matrix::diag(3, 3, &[3.0, 2.0, 1.0]).unwrap();
        let f = svd(&m).unwrap();
        assert_eq!(f.s.values(), &[3.0, 2.0, 1.0]);
        f.validate(&m).unwrap();
    }

    #[test]
    fn all_ones_two_by_two() {
        // Gram matrix [[2,2],[2,2]] has eigenvalues 4 and 0.
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = singular_values(&m).unwrap();
        assert_abs_diff_eq!(s.values()[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values()[1], 0.0, epsilon = 1e-12);
        svd(&m).unwrap().validate(&m).unwrap();
    }

    #[test]
    fn rectangular_shapes_validate() {
        for (rows, cols) in [(4, 2), (2, 4), (5, 3), (3, 5), (1, 4), (4, 1), (1, 1)] {
            let mut data = Vec::new();
            for k in 0..rows * cols {
                data.push(((k * 7 + 3) % 11) as f64 - 5.0);
            }
            let m = Matrix::new(rows, cols, data).unwrap();
            let f = svd(&m).unwrap();
            f.validate(&m).unwrap();
            assert_eq!(f.s.len(), rows.min(cols));
            assert_eq!(f.u.rows(), rows);
            assert_eq!(f.v.rows(), cols);
        }
    }

    #[test]
    fn rank_deficient_matrices_validate() {
        for (idx, (rows, cols, r)) in [(4, 4, 2), (5, 3, 1), (3, 5, 2), (4, 2, 1)]
            .into_iter()
            .enumerate()
        {
            let m = random_rank_r(rows, cols, r, Seed(900 + idx as u64)).unwrap();
            let f = svd(&m).unwrap();
            f.validate(&m).unwrap();
            assert_eq!(numerical_rank(&m, 1e-9).unwrap(), r);
        }
    }

    #[test]
    fn singular_values_are_unitarily_invariant() {
        let m = random_rank_r(4, 4, 3, Seed(17)).unwrap();
        let u = random_orthogonal(4, Seed(18)).unwrap();
        let v = random_orthogonal(4, Seed(19)).unwrap();
        let rotated = u.matmul(&m).unwrap().matmul(&v).unwrap();
        let s1 = singular_values(&m).unwrap();
        let s2 = singular_values(&rotated).unwrap();
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn rank_counts_strictly_above_relative_tolerance() {
        let m = Matrix::diag(3, 3, &[1.0, 1e-7, 1e-12]).unwrap();
        assert_eq!(numerical_rank(&m, 1e-9).unwrap(), 2);
        let z = Matrix::zeros(3, 3);
        assert_eq!(numerical_rank(&z, 1e-9).unwrap(), 0);
        assert!(numerical_rank(&m, 0.0).is_err());
        assert!(numerical_rank(&m, -1.0).is_err());
    }

    #[test]
    fn values_only_path_matches_full_svd() {
        let m = random_rank_r(5, 4, 4, Seed(33)).unwrap();
        let full = svd(&m).unwrap();
        let fast = singular_values(&m).unwrap();
        for (a, b) in full.s.values().iter().zip(fast.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
