//! Independent verifiers used by the property suites: support-function
//! estimation over the nonconvex sets the rank norms are built from,
//! exhaustive small-case enumeration, and sampled checks of the trace
//! inequality that underpins the singular value reductions.
//!
//! Everything here is deliberately different machinery from the closed
//! forms it is compared against: estimates come from feasible points only,
//! so they are certified lower bounds, and agreement with a closed form
//! checks both sides.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{trace_inner, Matrix};
use crate::matrix_norms::{dual_rrank_generic, SourceNorm};
use crate::par;
use crate::random::{random_orthogonal, Seed};
use crate::svd::svd;
use crate::vector_norms::{conjugate_exponent, dual_norm_oracle, lp_norm, SymmetricGauge};

/// A support-function instance `sup { ⟨direction, y⟩ : y ∈ set }`.
#[derive(Debug, Clone)]
pub struct SupportProblem {
    pub set: FeasibleSet,
    pub budget: usize,
    pub seed: Seed,
}

/// The feasible sets the estimator understands.
#[derive(Debug, Clone)]
pub enum FeasibleSet {
    /// Matrices on the source-norm unit sphere with rank at most `r`.
    RankSphere {
        source: SourceNorm,
        r: usize,
        direction: Matrix,
    },
    /// Vectors on the gauge unit sphere with at most `r` nonzero entries.
    GaugeSphereSparse {
        gauge: SymmetricGauge,
        r: usize,
        direction: Vec<f64>,
    },
    /// The gauge unit ball (support function = dual norm).
    NormBall {
        gauge: SymmetricGauge,
        direction: Vec<f64>,
    },
}

/// Lower estimate of the support function, monotone in `budget` and
/// deterministic given the seed.
///
/// The sparse-vector case enumerates all support patterns exhaustively for
/// `d <= 4`, solving each pattern exactly for ℓp gauges (the Hölder-extremal
/// point on the restricted coordinates) and by the dual-norm oracle on the
/// restricted gauge otherwise; larger dimensions sample patterns.
pub fn support_estimate(p: &SupportProblem) -> Result<f64> {
    if p.budget == 0 {
        return Err(Error::invalid("support estimate needs budget >= 1"));
    }
    match &p.set {
        FeasibleSet::RankSphere {
            source,
            r,
            direction,
        } => dual_rrank_generic(source, *r, direction, (p.budget / 40).max(1), p.seed),
        FeasibleSet::NormBall { gauge, direction } => {
            dual_norm_oracle(gauge, direction, p.budget, p.seed)
        }
        FeasibleSet::GaugeSphereSparse {
            gauge,
            r,
            direction,
        } => sparse_sphere_support(gauge, *r, direction, p.budget, p.seed),
    }
}

/// The gauge restricted to a coordinate subspace of dimension `dim` is the
/// same kind of gauge with its cardinality parameter capped.
fn restrict_gauge(gauge: &SymmetricGauge, dim: usize) -> Result<SymmetricGauge> {
    match *gauge {
        SymmetricGauge::Lp { p } => SymmetricGauge::lp(p),
        SymmetricGauge::Top { q, r } => SymmetricGauge::top(q, r.min(dim)),
        SymmetricGauge::KSupport2 { r } => SymmetricGauge::ksupport2(r.min(dim)),
    }
}

/// Best value achievable on one support pattern.
fn pattern_value(
    gauge: &SymmetricGauge,
    pattern: &[usize],
    x: &[f64],
    oracle_budget: usize,
    seed: Seed,
) -> Result<f64> {
    let restricted: Vec<f64> = pattern.iter().map(|&i| x[i]).collect();
    if let SymmetricGauge::Lp { p } = gauge {
        // Hölder equality case on the restricted coordinates.
        return lp_norm(&restricted, conjugate_exponent(*p));
    }
    let sub = restrict_gauge(gauge, pattern.len())?;
    dual_norm_oracle(&sub, &restricted, oracle_budget, seed)
}

fn sparse_sphere_support(
    gauge: &SymmetricGauge,
    r: usize,
    x: &[f64],
    budget: usize,
    seed: Seed,
) -> Result<f64> {
    let d = x.len();
    if d == 0 {
        return Err(Error::invalid("empty direction"));
    }
    if r == 0 || r > d {
        return Err(Error::invalid(format!(
            "sparsity level must satisfy 1 <= r <= {d}, got {r}"
        )));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    let mut patterns: Vec<Vec<usize>> = Vec::new();
    if d <= 4 {
        for mask in 1u32..(1 << d) {
            let picked: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            if picked.len() <= r {
                patterns.push(picked);
            }
        }
    } else {
        // The top-r magnitudes are the natural first guess; random patterns
        // follow, one per slice of budget, so results only improve with it.
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
        patterns.push(order[..r].to_vec());
        let extra = (budget / 8).max(1);
        for i in 0..extra {
            let mut rng = seed.derive(500_000 + i as u64).rng();
            let mut pool: Vec<usize> = (0..d).collect();
            let mut picked = Vec::with_capacity(r);
            for slot in 0..r {
                let j = slot + (rng.random::<u64>() as usize) % (d - slot);
                pool.swap(slot, j);
                picked.push(pool[slot]);
            }
            picked.sort_unstable();
            patterns.push(picked);
        }
    }
    let per_pattern = (budget / patterns.len().max(1)).max(4);
    let best = par::try_max_over(patterns.len(), |i| {
        pattern_value(gauge, &patterns[i], x, per_pattern, seed.derive(i as u64))
    })?;
    Ok(best.max(0.0))
}

/// Outcome of a sampled check of the trace inequality
/// `Tr(U M V Nᵀ) <= ⟨s(M), s(N)⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct VonNeumannCheck {
    /// Largest sampled `Tr(U M V Nᵀ)` over random orthogonal pairs.
    pub max_sampled: f64,
    /// The value at the aligning pair built from both SVDs; equals the
    /// inner product up to rounding.
    pub aligned_value: f64,
    /// `⟨s(M), s(N)⟩`, both sorted nonincreasing.
    pub inner_product: f64,
}

/// Samples orthogonal pairs `(U, V)` and compares `Tr(U M V Nᵀ)` against
/// the singular value inner product, which the aligning pair attains.
pub fn vonneumann_extremal_check(
    m: &Matrix,
    n: &Matrix,
    samples: usize,
    seed: Seed,
) -> Result<VonNeumannCheck> {
    if m.rows() != n.rows() || m.cols() != n.cols() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            m.rows(),
            m.cols(),
            n.rows(),
            n.cols()
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("need samples >= 1"));
    }
    let fm = svd(m)?;
    let fnn = svd(n)?;
    let inner_product: f64 =
        fm.s.values()
            .iter()
            .zip(fnn.s.values())
            .map(|(a, b)| a * b)
            .sum();

    // U = U_N U_Mᵀ maps M's left singular basis onto N's, V = V_M V_Nᵀ the
    // right ones; then U M V = U_N S_M V_Nᵀ and the trace collapses to
    // ⟨s(M), s(N)⟩.
    let u = fnn.u.matmul(&fm.u.transpose())?;
    let v = fm.v.matmul(&fnn.v.transpose())?;
    let aligned_value = trace_inner(&u.matmul(m)?.matmul(&v)?, n)?;

    let max_sampled = par::try_max_over(samples, |i| {
        let ui = random_orthogonal(m.rows(), seed.derive(2 * i as u64))?;
        let vi = random_orthogonal(m.cols(), seed.derive(2 * i as u64 + 1))?;
        trace_inner(&ui.matmul(m)?.matmul(&vi)?, n)
    })?;

    Ok(VonNeumannCheck {
        max_sampled,
        aligned_value,
        inner_product,
    })
}
