//! The verification sweep: every numerical property this library promises,
//! bundled as a deterministic battery with one report per suite.
//!
//! Each suite returns a short success summary or fails on the first violated
//! assertion with a message naming it. `run_all` wraps the suites with
//! wall-clock timing; the time budgets the suites are expected to meet on a
//! laptop in an optimized build ride along in the reports, so callers (the
//! `verify` command, the integration tests) can enforce them where that
//! makes sense.

use std::time::Instant;

use rand::Rng;

use crate::capra::{
    conjugate_sampled, frobenius_equality_report, rank_conjugate, variational_bound, PhiSpec,
    RANK_TOL,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::matrix_norms::{
    build_family, dual_coordinate_upper, dual_rrank_generic, dual_rrank_norm, rrank_norm,
    submatrix_top_l1, SourceNorm,
};
use crate::oracle::{support_estimate, vonneumann_extremal_check, FeasibleSet, SupportProblem};
use crate::par;
use crate::random::{gaussian_vec, random_gaussian, random_rank_r, Seed};
use crate::svd::numerical_rank;
use crate::vector_norms::{dual_norm_oracle, ksupport2_norm, SymmetricGauge};

/// Outcome of one verification suite.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub millis: u128,
    /// Wall-clock budget (milliseconds) the suite is expected to meet in an
    /// optimized build.
    pub budget_millis: u128,
    pub detail: String,
}

fn run_suite<F>(name: &'static str, budget_millis: u128, body: F) -> CheckReport
where
    F: FnOnce() -> Result<String>,
{
    let start = Instant::now();
    let outcome = body();
    let millis = start.elapsed().as_millis();
    match outcome {
        Ok(detail) => CheckReport {
            name,
            passed: true,
            millis,
            budget_millis,
            detail,
        },
        Err(e) => CheckReport {
            name,
            passed: false,
            millis,
            budget_millis,
            detail: e.to_string(),
        },
    }
}

fn ensure<F: FnOnce() -> String>(cond: bool, msg: F) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::numerical(msg()))
    }
}

/// Runs the whole battery. Deterministic given the seed; suites fan their
/// instances out in parallel but reduce order-independently.
pub fn run_all(seed: Seed) -> Vec<CheckReport> {
    vec![
        run_suite("rank-1 submatrix counterexample", 1, counterexample_suite),
        run_suite("norm axioms", 5_000, || norm_axiom_suite(seed.derive(2))),
        run_suite("chain monotonicity and endpoints", 5_000, || {
            chain_suite(seed.derive(3))
        }),
        run_suite("trace alignment extremality", 10_000, || {
            vonneumann_suite(seed.derive(4))
        }),
        run_suite("ascent estimator vs closed duals", 60_000, || {
            estimator_suite(seed.derive(5))
        }),
        run_suite("closed-form table cross-checks", 30_000, || {
            table_suite(seed.derive(6))
        }),
        run_suite("sampled conjugate domination", 30_000, || {
            conjugate_suite(seed.derive(7))
        }),
        run_suite("rank bound safety", 60_000, || {
            bound_safety_suite(seed.derive(8))
        }),
        run_suite("frobenius ray convergence", 60_000, || {
            ray_convergence_suite(seed.derive(9))
        }),
        run_suite("dual chain case split", 5_000, || {
            case_split_suite(seed.derive(10))
        }),
        run_suite("2-support norm vs oracle", 30_000, || {
            ksupport_oracle_suite(seed.derive(11))
        }),
    ]
}

// ── 1: the motivating counterexample ────────────────────────────────────

/// The support-restricted functional is not a norm: on ones = id + antidiag
/// it evaluates to 4 while each summand evaluates to 1. Exact arithmetic on
/// 0/1 entries, so the comparison is bit-exact.
fn counterexample_suite() -> Result<String> {
    let ones = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])?;
    let id = Matrix::identity(2);
    let anti = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let whole = submatrix_top_l1(&ones, 1)?;
    let first = submatrix_top_l1(&id, 1)?;
    let second = submatrix_top_l1(&anti, 1)?;
    ensure(whole == 4.0, || {
        format!("whole matrix: expected exactly 4, got {whole}")
    })?;
    ensure(first == 1.0, || {
        format!("identity piece: expected exactly 1, got {first}")
    })?;
    ensure(second == 1.0, || {
        format!("antidiagonal piece: expected exactly 1, got {second}")
    })?;
    ensure(whole > first + second, || {
        format!("{whole} should exceed {first} + {second}")
    })?;
    Ok("4 > 1 + 1 on ones = id + antidiag".to_string())
}

// ── 2: norm axioms ──────────────────────────────────────────────────────

const HOMOGENEITY_REL: f64 = 1e-12;
const TRIANGLE_ABS: f64 = 1e-9;
const DEFINITENESS_ABS: f64 = 1e-14;

fn axioms_for<F>(label: &str, norm: F, a: &[f64], b: &[f64], alpha: f64) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let na = norm(a)?;
    let nb = norm(b)?;
    ensure(na > DEFINITENESS_ABS, || {
        format!("{label}: vanishing value {na} on a nonzero input")
    })?;
    let zero = vec![0.0; a.len()];
    let nz = norm(&zero)?;
    ensure(nz.abs() <= DEFINITENESS_ABS, || {
        format!("{label}: nonzero value {nz} at the origin")
    })?;
    let scaled: Vec<f64> = a.iter().map(|v| alpha * v).collect();
    let ns = norm(&scaled)?;
    let expected = alpha.abs() * na;
    ensure((ns - expected).abs() <= HOMOGENEITY_REL * expected, || {
        format!("{label}: homogeneity off, |{ns} - {expected}| at alpha {alpha}")
    })?;
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let nsum = norm(&sum)?;
    ensure(nsum <= na + nb + TRIANGLE_ABS, || {
        format!("{label}: triangle violated, {nsum} > {na} + {nb}")
    })?;
    Ok(())
}

fn matrix_axioms_for<F>(label: &str, norm: F, a: &Matrix, b: &Matrix, alpha: f64) -> Result<()>
where
    F: Fn(&Matrix) -> Result<f64>,
{
    let na = norm(a)?;
    let nb = norm(b)?;
    ensure(na > DEFINITENESS_ABS, || {
        format!("{label}: vanishing value {na} on a nonzero input")
    })?;
    let nz = norm(&Matrix::zeros(a.rows(), a.cols()))?;
    ensure(nz.abs() <= DEFINITENESS_ABS, || {
        format!("{label}: nonzero value {nz} at the origin")
    })?;
    let ns = norm(&a.scaled(alpha))?;
    let expected = alpha.abs() * na;
    ensure((ns - expected).abs() <= HOMOGENEITY_REL * expected, || {
        format!("{label}: homogeneity off, |{ns} - {expected}| at alpha {alpha}")
    })?;
    let nsum = norm(&a.add(b)?)?;
    ensure(nsum <= na + nb + TRIANGLE_ABS, || {
        format!("{label}: triangle violated, {nsum} > {na} + {nb}")
    })?;
    Ok(())
}

fn norm_axiom_suite(seed: Seed) -> Result<String> {
    const INPUTS: usize = 500;
    let counts = par::try_collect(INPUTS, |i| {
        let mut rng = seed.derive(i as u64).rng();
        let mut norms_checked = 0usize;
        let alpha = {
            let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
            sign * (0.25 + 2.75 * rng.random::<f64>())
        };

        // Vector gauges at dimension d.
        let d = 2 + i % 4;
        let x = gaussian_vec(&mut rng, d);
        let y = gaussian_vec(&mut rng, d);
        let mut gauges = vec![
            SymmetricGauge::lp(1.0)?,
            SymmetricGauge::lp(1.5)?,
            SymmetricGauge::lp(2.0)?,
            SymmetricGauge::lp(3.0)?,
            SymmetricGauge::lp(f64::INFINITY)?,
        ];
        for r in 1..=d.min(3) {
            gauges.push(SymmetricGauge::top(1.0, r)?);
            gauges.push(SymmetricGauge::top(2.0, r)?);
            gauges.push(SymmetricGauge::ksupport2(r)?);
        }
        for g in &gauges {
            axioms_for(&g.to_string(), |v| g.eval(v), &x, &y, alpha)?;
            norms_checked += 1;
        }

        // Source norms at mixed shapes.
        let rows = 2 + i % 4;
        let cols = 2 + (i / 4) % 4;
        let dm = rows.min(cols);
        let a = random_gaussian(rows, cols, seed.derive(90_000 + i as u64))?;
        let b = random_gaussian(rows, cols, seed.derive(190_000 + i as u64))?;
        let sources = vec![
            SourceNorm::schatten(1.0)?,
            SourceNorm::frobenius(),
            SourceNorm::schatten(3.0)?,
            SourceNorm::schatten(f64::INFINITY)?,
            SourceNorm::kyfan(1)?,
            SourceNorm::kyfan(2.min(dm))?,
        ];
        for s in &sources {
            matrix_axioms_for(&s.to_string(), |m| s.eval(m), &a, &b, alpha)?;
            norms_checked += 1;
        }

        // Every closed member of the rank-norm families is a norm too.
        for s in [
            SourceNorm::schatten(1.0)?,
            SourceNorm::frobenius(),
            SourceNorm::schatten(f64::INFINITY)?,
            SourceNorm::kyfan(2.min(dm))?,
        ] {
            let fam = build_family(s, dm)?;
            for entry in fam.describe() {
                if !entry.closed_form {
                    continue;
                }
                let label = format!("{} {} r={}", entry.source, entry.side, entry.r);
                if entry.side == "dual" {
                    matrix_axioms_for(&label, |m| fam.dual(entry.r, m), &a, &b, alpha)?;
                } else {
                    matrix_axioms_for(&label, |m| fam.primal(entry.r, m), &a, &b, alpha)?;
                }
                norms_checked += 1;
            }
        }
        Ok(norms_checked)
    })?;
    let total: usize = counts.iter().sum();
    Ok(format!(
        "{total} norm instances across {INPUTS} random inputs"
    ))
}

// ── 3: chain monotonicity ───────────────────────────────────────────────

fn chain_suite(seed: Seed) -> Result<String> {
    let sources = [
        SourceNorm::schatten(1.0)?,
        SourceNorm::frobenius(),
        SourceNorm::schatten(f64::INFINITY)?,
        SourceNorm::kyfan(2)?,
    ];
    for (si, source) in sources.iter().enumerate() {
        let fam = build_family(source.clone(), 3)?;
        par::try_collect(200, |i| {
            let tag = (si * 10_000 + i) as u64;
            let m = if i % 2 == 0 {
                random_gaussian(3, 3, seed.derive(tag))?
            } else {
                random_rank_r(3, 3, 1 + i % 3, seed.derive(tag))?
            };
            let mut duals = Vec::new();
            let mut primals = Vec::new();
            for r in 1..=3 {
                duals.push(fam.dual(r, &m)?);
                primals.push(fam.primal(r, &m)?);
            }
            for w in duals.windows(2) {
                ensure(w[0] <= w[1] + 1e-12 * w[0].abs().max(1.0), || {
                    format!("{source}: dual chain decreased, {:?}", duals)
                })?;
            }
            for w in primals.windows(2) {
                ensure(w[0] >= w[1] - 1e-12 * w[0].abs().max(1.0), || {
                    format!("{source}: primal chain increased, {:?}", primals)
                })?;
            }
            let dual_end = source.dual_eval(&m)?;
            ensure((duals[2] - dual_end).abs() <= 1e-9, || {
                format!(
                    "{source}: dual endpoint {} vs source dual {dual_end}",
                    duals[2]
                )
            })?;
            let primal_end = source.eval(&m)?;
            ensure((primals[2] - primal_end).abs() <= 1e-9, || {
                format!(
                    "{source}: primal endpoint {} vs source {primal_end}",
                    primals[2]
                )
            })?;
            Ok(())
        })?;
    }
    Ok("4 sources x 200 matrices, chains ordered with matching endpoints".to_string())
}

// ── 4: trace inequality and its extremal alignment ──────────────────────

fn vonneumann_suite(seed: Seed) -> Result<String> {
    par::try_collect(200, |i| {
        let m = random_gaussian(4, 4, seed.derive(2 * i as u64))?;
        let n = random_gaussian(4, 4, seed.derive(2 * i as u64 + 1))?;
        let chk = vonneumann_extremal_check(&m, &n, 100, seed.derive(40_000 + i as u64))?;
        ensure(chk.max_sampled <= chk.inner_product + 1e-9, || {
            format!(
                "sampled rotation beat the singular value inner product: {} > {}",
                chk.max_sampled, chk.inner_product
            )
        })?;
        ensure(
            (chk.aligned_value - chk.inner_product).abs() <= 1e-9,
            || {
                format!(
                    "aligned bases missed the bound: {} vs {}",
                    chk.aligned_value, chk.inner_product
                )
            },
        )?;
        Ok(())
    })?;
    Ok("200 pairs x 100 rotations: bounded and attained".to_string())
}

// ── 5: the ascent estimator against closed duals ────────────────────────

fn estimator_suite(seed: Seed) -> Result<String> {
    par::try_collect(20, |i| {
        let m = random_gaussian(3, 3, seed.derive(i as u64))?;
        for (pi, p) in [1.0, 2.0, f64::INFINITY].into_iter().enumerate() {
            let src = SourceNorm::schatten(p)?;
            for r in 1..=3 {
                let closed = dual_rrank_norm(&src, r, &m)?;
                let est = dual_rrank_generic(
                    &src,
                    r,
                    &m,
                    50,
                    seed.derive(10_000 + (i * 9 + pi * 3 + r) as u64),
                )?;
                ensure(est <= closed + 1e-9, || {
                    format!("{src} r={r}: estimate {est} above closed value {closed}")
                })?;
                ensure(closed - est <= 1e-3 * closed.max(1e-9), || {
                    format!("{src} r={r}: estimate {est} too far below {closed}")
                })?;
            }
        }
        Ok(())
    })?;
    Ok("3 exponents x 3 ranks x 20 matrices within 1e-3 relative".to_string())
}

// ── 6: the closed-form table ────────────────────────────────────────────

fn assert_close(label: &str, got: f64, want: f64, tol: f64) -> Result<()> {
    ensure((got - want).abs() <= tol * want.abs().max(1.0), || {
        format!("{label}: {got} vs expected {want}")
    })
}

fn table_frozen_values() -> Result<()> {
    let m = Matrix::diag(3, 3, &[3.0, 2.0, 1.0])?;
    let tol = 1e-6;
    let s1 = SourceNorm::schatten(1.0)?;
    let s2 = SourceNorm::frobenius();
    let sinf = SourceNorm::schatten(f64::INFINITY)?;
    let kf = SourceNorm::kyfan(2)?;

    for r in 1..=3 {
        assert_close("nuclear dual row", dual_rrank_norm(&s1, r, &m)?, 3.0, tol)?;
        assert_close("nuclear primal row", rrank_norm(&s1, r, &m)?, 6.0, tol)?;
    }
    let dual2 = [3.0, 13.0f64.sqrt(), 14.0f64.sqrt()];
    let primal2 = [6.0, 18.0f64.sqrt(), 14.0f64.sqrt()];
    let dualinf = [3.0, 5.0, 6.0];
    let primalinf = [6.0, 3.0, 3.0];
    let dualkf = [3.0, 3.0, 3.0];
    let primalkf = [6.0, 6.0, 5.0];
    for r in 1..=3 {
        assert_close(
            "frobenius dual row",
            dual_rrank_norm(&s2, r, &m)?,
            dual2[r - 1],
            tol,
        )?;
        assert_close(
            "frobenius primal row",
            rrank_norm(&s2, r, &m)?,
            primal2[r - 1],
            tol,
        )?;
        assert_close(
            "spectral dual row",
            dual_rrank_norm(&sinf, r, &m)?,
            dualinf[r - 1],
            tol,
        )?;
        assert_close(
            "spectral primal row",
            rrank_norm(&sinf, r, &m)?,
            primalinf[r - 1],
            tol,
        )?;
        assert_close(
            "ky fan dual row",
            dual_rrank_norm(&kf, r, &m)?,
            dualkf[r - 1],
            tol,
        )?;
        assert_close(
            "ky fan primal row",
            rrank_norm(&kf, r, &m)?,
            primalkf[r - 1],
            tol,
        )?;
    }
    Ok(())
}

fn table_cross_checks(m: &Matrix, seed: Seed) -> Result<()> {
    let s = crate::svd::singular_values(m)?;
    let sv = s.values().to_vec();

    // Dual rows for p-sources: the sparse-pattern support is solved exactly
    // per pattern at this dimension, so agreement is at closed-form level.
    for p in [1.0, 2.0, 3.0, f64::INFINITY] {
        let src = SourceNorm::schatten(p)?;
        for r in 1..=3 {
            let closed = dual_rrank_norm(&src, r, m)?;
            let prob = SupportProblem {
                set: FeasibleSet::GaugeSphereSparse {
                    gauge: SymmetricGauge::lp(p)?,
                    r,
                    direction: sv.clone(),
                },
                budget: 64,
                seed: seed.derive(r as u64),
            };
            let independent = support_estimate(&prob)?;
            assert_close(&format!("dual row {src} r={r}"), independent, closed, 1e-6)?;
        }
    }

    // Ky Fan dual rows: the per-pattern solves are ascent-based.
    let kf = SourceNorm::kyfan(2)?;
    for r in 1..=3 {
        let closed = dual_rrank_norm(&kf, r, m)?;
        let prob = SupportProblem {
            set: FeasibleSet::GaugeSphereSparse {
                gauge: SymmetricGauge::top(1.0, 2)?,
                r,
                direction: sv.clone(),
            },
            budget: 400,
            seed: seed.derive(100 + r as u64),
        };
        let independent = support_estimate(&prob)?;
        assert_close(&format!("dual row {kf} r={r}"), independent, closed, 1e-3)?;
    }

    // Primal rows: the dual oracle against the dual-coordinate norm, which
    // re-derives each closed form from the other side of the duality.
    let pairs = [
        (SourceNorm::schatten(1.0)?, SymmetricGauge::lp(1.0)?),
        (SourceNorm::frobenius(), SymmetricGauge::lp(2.0)?),
        (
            SourceNorm::schatten(f64::INFINITY)?,
            SymmetricGauge::lp(f64::INFINITY)?,
        ),
        (SourceNorm::kyfan(2)?, SymmetricGauge::top(1.0, 2)?),
    ];
    for (idx, (source, gauge)) in pairs.iter().enumerate() {
        for r in 1..=3 {
            let closed = rrank_norm(source, r, m)?;
            let g = gauge.clone();
            // Errors only on out-of-range r, which this loop never produces.
            let dual_coord =
                move |x: &[f64]| dual_coordinate_upper(&g, r, x).unwrap_or(f64::INFINITY);
            let est = dual_norm_oracle(
                &dual_coord,
                &sv,
                400,
                seed.derive(200 + (idx * 4 + r) as u64),
            )?;
            ensure(est <= closed + 1e-9, || {
                format!("primal row {source} r={r}: oracle {est} above closed {closed}")
            })?;
            assert_close(&format!("primal row {source} r={r}"), est, closed, 1e-3)?;
        }
    }
    Ok(())
}

fn table_suite(seed: Seed) -> Result<String> {
    table_frozen_values()?;
    par::try_collect(20, |i| {
        let m = random_gaussian(3, 3, seed.derive(1_000 + i as u64))?;
        table_cross_checks(&m, seed.derive(2_000 + i as u64))
    })?;
    Ok("frozen diagonal values and 20 random cross-checks per row".to_string())
}

// ── 7: sampled conjugate against the closed form ────────────────────────

fn conjugate_suite(seed: Seed) -> Result<String> {
    let src = SourceNorm::frobenius();
    let phi = PhiSpec::identity(2);
    let mut instances = vec![
        Matrix::diag(2, 2, &[10.0, 0.0])?,
        Matrix::diag(2, 2, &[3.0, 1.0])?,
        Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])?,
    ];
    for t in 0..3 {
        instances.push(random_gaussian(2, 2, seed.derive(t))?);
    }
    for (idx, n) in instances.iter().enumerate() {
        let exact = rank_conjugate(&src, &phi, n)?;
        let mut previous = f64::NEG_INFINITY;
        for budget in [40usize, 400, 5_000] {
            let sampled = conjugate_sampled(&src, &phi, n, budget, seed.derive(50 + idx as u64))?;
            ensure(sampled <= exact + 1e-9, || {
                format!("instance {idx}: sampled {sampled} above closed {exact} at budget {budget}")
            })?;
            ensure(sampled >= previous - 1e-12, || {
                format!("instance {idx}: sampled value fell from {previous} to {sampled}")
            })?;
            previous = sampled;
            if budget == 5_000 {
                ensure(exact - sampled <= 1e-2, || {
                    format!("instance {idx}: gap {} at budget 5000", exact - sampled)
                })?;
            }
        }
    }
    Ok(format!(
        "{} instances, gap <= 1e-2 at budget 5000",
        instances.len()
    ))
}

// ── 8: the rank bound never overshoots ──────────────────────────────────

fn bound_safety_suite(seed: Seed) -> Result<String> {
    par::try_collect(200, |i| {
        let rows = 2 + i % 4;
        let cols = 2 + (i / 4) % 4;
        let d = rows.min(cols);
        let m = if i % 3 == 0 {
            random_gaussian(rows, cols, seed.derive(i as u64))?
        } else {
            random_rank_r(rows, cols, 1 + i % d, seed.derive(i as u64))?
        };
        let rank = numerical_rank(&m, 1e-9)? as f64;
        for (si, source) in [
            SourceNorm::schatten(1.0)?,
            SourceNorm::frobenius(),
            SourceNorm::schatten(f64::INFINITY)?,
            SourceNorm::kyfan(2.min(d))?,
        ]
        .into_iter()
        .enumerate()
        {
            let out = variational_bound(&source, &m, 300, seed.derive(700 + (4 * i + si) as u64))?;
            ensure(out.lower <= rank + 1e-9, || {
                format!("{source}: lower bound {} above rank {rank}", out.lower)
            })?;
            ensure(out.lower <= out.upper + 1e-12, || {
                format!("{source}: bracket inverted, {} > {}", out.lower, out.upper)
            })?;
        }
        Ok(())
    })?;
    Ok("200 matrices x 4 sources: lower <= rank".to_string())
}

// ── 9: the frobenius ray reaches the rank ───────────────────────────────

fn ray_convergence_suite(seed: Seed) -> Result<String> {
    let mut combos = Vec::new();
    for rows in 2..=5usize {
        for cols in 2..=5usize {
            for r in 1..=rows.min(cols) {
                for rep in 0..3usize {
                    combos.push((rows, cols, r, rep));
                }
            }
        }
    }
    let total = combos.len();
    par::try_collect(total, |i| {
        let (rows, cols, r, rep) = combos[i];
        let m = random_rank_r(rows, cols, r, seed.derive((i * 7 + rep) as u64))?;
        let report = frobenius_equality_report(&m, 8, RANK_TOL)?;
        ensure(report.rank == r, || {
            format!(
                "{rows}x{cols}: measured rank {} vs planted {r}",
                report.rank
            )
        })?;
        let last = *report.ray_values.last().unwrap();
        ensure((last - r as f64).abs() <= 1e-3, || {
            format!("{rows}x{cols} rank {r}: ray stopped at {last}")
        })?;
        ensure(report.converged, || {
            format!("{rows}x{cols} rank {r}: not converged")
        })?;
        let bound = variational_bound(
            &SourceNorm::frobenius(),
            &m,
            300,
            seed.derive(5_000 + i as u64),
        )?;
        ensure(bound.upper >= r as f64 - 1e-3, || {
            format!(
                "{rows}x{cols} rank {r}: upper bound {} fell short",
                bound.upper
            )
        })?;
        Ok(())
    })?;
    Ok(format!(
        "{total} planted instances converge at lambda = 1e8"
    ))
}

// ── 10: the dual chain splits exactly at the rank ───────────────────────

fn case_split_suite(seed: Seed) -> Result<String> {
    let src = SourceNorm::frobenius();
    par::try_collect(50, |i| {
        let rows = 2 + i % 4;
        let cols = 2 + (i / 2) % 4;
        let d = rows.min(cols);
        let r = 1 + i % d;
        let m = random_rank_r(rows, cols, r, seed.derive(i as u64))?;
        let nrm = src.eval(&m)?;
        for l in 1..=d {
            let v = dual_rrank_norm(&src, l, &m)?;
            if l >= r {
                ensure((v - nrm).abs() <= 1e-9, || {
                    format!("rank {r}, level {l}: {v} should equal {nrm}")
                })?;
            } else {
                ensure(v <= nrm - 1e-6, || {
                    format!("rank {r}, level {l}: {v} not separated from {nrm}")
                })?;
            }
        }
        Ok(())
    })?;
    Ok("50 planted instances: equality at l >= rank, separation below".to_string())
}

// ── 11: the 2-support closed form against its oracle ────────────────────

fn ksupport_oracle_suite(seed: Seed) -> Result<String> {
    par::try_collect(200, |i| {
        let d = 2 + i % 4;
        let mut rng = seed.derive(i as u64).rng();
        let x = gaussian_vec(&mut rng, d);
        for r in 1..=d {
            let closed = ksupport2_norm(&x, r)?;
            let gauge = SymmetricGauge::top(2.0, r)?;
            let est = dual_norm_oracle(&gauge, &x, 400, seed.derive(1_000 + (i * 8 + r) as u64))?;
            ensure(est <= closed + 1e-9, || {
                format!("d={d} r={r}: oracle {est} above closed {closed}")
            })?;
            ensure(closed - est <= 1e-3 * closed.max(1.0), || {
                format!("d={d} r={r}: oracle {est} too far below {closed}")
            })?;
        }
        Ok(())
    })?;
    Ok("200 vectors, every sparsity level within 1e-3".to_string())
}
