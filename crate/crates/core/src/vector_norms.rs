//! Symmetric gauges on coordinate vectors.
//!
//! A symmetric gauge is a norm invariant under permutations and sign flips
//! of the coordinates. Three families are implemented: the ℓp norms, the
//! top-(q, r) norms (ℓq norm of the r largest magnitudes), and the
//! 2-support norms (dual to top-(2, r)). These are exactly the building
//! blocks the matrix layer composes with singular values.
//!
//! [`dual_norm_oracle`] is the reference estimator: a seeded multi-start
//! maximization of `⟨x, y⟩ / ‖y‖` that lower-bounds the dual norm of any
//! black-box norm. Closed forms elsewhere in the crate are gated against it
//! in tests.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::par;
use crate::random::{gaussian_vec, Seed};

/// Conjugate exponent: `1/p + 1/q = 1` with the usual `1 ↔ ∞` convention.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("exponent must be >= 1, got {p}")));
    }
    Ok(())
}

pub(crate) fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// ℓp norm for `p ∈ [1, ∞]`.
pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(x.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(x.iter().map(|v| v.abs()).sum());
    }
    if p == 2.0 {
        return Ok(l2(x));
    }
    // General exponent: scale by the max to keep powers in range.
    let m = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    Ok(m * sum.powf(1.0 / p))
}

/// Number of entries with `|x_i| > tol`.
pub fn l0(x: &[f64], tol: f64) -> Result<usize> {
    if tol < 0.0 || tol.is_nan() {
        return Err(Error::invalid(format!(
            "support tolerance must be nonnegative, got {tol}"
        )));
    }
    Ok(x.iter().filter(|v| v.abs() > tol).count())
}

fn sorted_magnitudes(x: &[f64]) -> Vec<f64> {
    let mut z: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    z.sort_by(|a, b| b.partial_cmp(a).unwrap());
    z
}

/// Top-(q, r) norm: ℓq norm of the `r` largest magnitudes.
/// For `q = ∞` this is the plain max, independent of `r`.
pub fn top_norm(x: &[f64], q: f64, r: usize) -> Result<f64> {
    check_exponent(q)?;
    if r == 0 || r > x.len() {
        return Err(Error::invalid(format!(
            "top norm needs 1 <= r <= {}, got {r}",
            x.len()
        )));
    }
    if q.is_infinite() {
        return Ok(x.iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    let z = sorted_magnitudes(x);
    lp_norm(&z[..r], q)
}

/// 2-support norm with parameter `r`: the dual of top-(2, r).
///
/// Computed by the sorted-thresholding closed form. Writing `z` for the
/// sorted magnitudes, the maximizer of `⟨z, y⟩` over the top-(2, r) unit
/// ball ties the trailing coordinates of `y` at the r-th level. With
/// `ℓ + 1` tied positions the value is
/// `sqrt(Σ_{j < r-ℓ-1} z_j² + (Σ_{j >= r-ℓ-1} z_j)² / (ℓ+1))`,
/// and the correct tie width is the first `ℓ` (scanning upward) whose block
/// average drops below the entry just above the block. Such an `ℓ` always
/// exists: the scan only moves past `ℓ` when `z_{r-ℓ-1}` is at most the
/// block average, which makes the next block's ordering condition hold, and
/// at `ℓ = r-1` there is no entry above the block.
pub fn ksupport2_norm(x: &[f64], r: usize) -> Result<f64> {
    if r == 0 || r > x.len() {
        return Err(Error::invalid(format!(
            "support parameter needs 1 <= r <= {}, got {r}",
            x.len()
        )));
    }
    let z = sorted_magnitudes(x);
    let d = z.len();
    // tail[j] = z[j] + ... + z[d-1]
    let mut tail = vec![0.0; d + 1];
    for j in (0..d).rev() {
        tail[j] = tail[j + 1] + z[j];
    }
    for ell in 0..r {
        let start = r - ell - 1;
        let mean = tail[start] / (ell as f64 + 1.0);
        let left_ok = start == 0 || z[start - 1] > mean;
        if left_ok {
            let head: f64 = z[..start].iter().map(|v| v * v).sum();
            let block = tail[start];
            return Ok((head + block * block / (ell as f64 + 1.0)).sqrt());
        }
    }
    // Unreachable: ell = r-1 has start = 0 and left_ok = true.
    let block = tail[0];
    Ok((block * block / r as f64).sqrt())
}

/// A permutation- and sign-invariant norm on coordinate vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetricGauge {
    /// ℓp norm, `p ∈ [1, ∞]`.
    Lp { p: f64 },
    /// ℓq norm of the r largest magnitudes.
    Top { q: f64, r: usize },
    /// 2-support norm, dual of top-(2, r).
    KSupport2 { r: usize },
}

impl SymmetricGauge {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(SymmetricGauge::Lp { p })
    }

    pub fn top(q: f64, r: usize) -> Result<Self> {
        check_exponent(q)?;
        if r == 0 {
            return Err(Error::invalid("top norm needs r >= 1"));
        }
        Ok(SymmetricGauge::Top { q, r })
    }

    pub fn ksupport2(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("support norm needs r >= 1"));
        }
        Ok(SymmetricGauge::KSupport2 { r })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match *self {
            SymmetricGauge::Lp { p } => lp_norm(x, p),
            SymmetricGauge::Top { q, r } => top_norm(x, q, r),
            SymmetricGauge::KSupport2 { r } => ksupport2_norm(x, r),
        }
    }

    /// Closed-form dual norm value, where one exists:
    ///
    /// * dual of ℓp is ℓq with conjugate exponent;
    /// * dual of top-(1, r) is `max(ℓ∞, ℓ1 / r)`;
    /// * dual of top-(2, r) is the 2-support norm, and vice versa;
    /// * top-(∞, r) equals ℓ∞, so its dual is ℓ1.
    ///
    /// Top-(q, r) for other finite `q ∉ {1, 2}` has no closed dual here.
    pub fn dual_eval(&self, x: &[f64]) -> Result<f64> {
        match *self {
            SymmetricGauge::Lp { p } => lp_norm(x, conjugate_exponent(p)),
            SymmetricGauge::Top { q, r } if q == 1.0 => {
                if r > x.len() {
                    return Err(Error::invalid("top norm parameter exceeds dimension"));
                }
                let linf = lp_norm(x, f64::INFINITY)?;
                let l1 = lp_norm(x, 1.0)?;
                Ok(linf.max(l1 / r as f64))
            }
            SymmetricGauge::Top { q, r } if q == 2.0 => ksupport2_norm(x, r),
            SymmetricGauge::Top { q, .. } if q.is_infinite() => lp_norm(x, 1.0),
            SymmetricGauge::Top { q, .. } => Err(Error::no_closed_form(format!(
                "dual of top norm with exponent {q}"
            ))),
            SymmetricGauge::KSupport2 { r } => top_norm(x, 2.0, r),
        }
    }
}

impl fmt::Display for SymmetricGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SymmetricGauge::Lp { p } => write!(f, "lp:{}", format_exponent(p)),
            SymmetricGauge::Top { q, r } => write!(f, "top:q={},r={r}", format_exponent(q)),
            SymmetricGauge::KSupport2 { r } => write!(f, "ksup2:r={r}"),
        }
    }
}

fn format_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

pub(crate) fn parse_exponent(s: &str) -> Result<f64> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    let p: f64 = s
        .parse()
        .map_err(|_| Error::parse(format!("bad exponent '{s}'")))?;
    check_exponent(p)?;
    Ok(p)
}

impl FromStr for SymmetricGauge {
    type Err = Error;

    /// Parses descriptors like `lp:2`, `lp:inf`, `top:q=2,r=3`, `ksup2:r=3`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("gauge descriptor '{s}' needs a ':'")))?;
        match kind {
            "lp" => SymmetricGauge::lp(parse_exponent(rest)?),
            "top" => {
                let mut q = None;
                let mut r = None;
                for part in rest.split(',') {
                    match part.split_once('=') {
                        Some(("q", v)) => q = Some(parse_exponent(v)?),
                        Some(("r", v)) => {
                            r =
                                Some(v.parse::<usize>().map_err(|_| {
                                    Error::parse(format!("bad top norm count '{v}'"))
                                })?)
                        }
                        _ => return Err(Error::parse(format!("bad top norm field '{part}'"))),
                    }
                }
                let q = q.ok_or_else(|| Error::parse("top norm needs q="))?;
                let r = r.ok_or_else(|| Error::parse("top norm needs r="))?;
                SymmetricGauge::top(q, r)
            }
            "ksup2" => {
                let r = rest
                    .strip_prefix("r=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(format!("bad support descriptor '{s}'")))?;
                SymmetricGauge::ksupport2(r)
            }
            _ => Err(Error::parse(format!("unknown gauge kind '{kind}'"))),
        }
    }
}

/// Dual-coordinate-r norm of a gauge: the support function of the
/// intersection of the gauge's unit sphere with the set of vectors with at
/// most `r` nonzeros. For ℓp gauges this is the top-(q, r) norm with the
/// conjugate exponent; other gauge kinds have no closed form here (use
/// [`crate::oracle::support_estimate`]).
pub fn dual_coordinate_norm(gauge: &SymmetricGauge, r: usize, x: &[f64]) -> Result<f64> {
    match *gauge {
        SymmetricGauge::Lp { p } => top_norm(x, conjugate_exponent(p), r),
        _ => Err(Error::no_closed_form(format!(
            "dual coordinate norm of gauge {gauge}"
        ))),
    }
}

/// An evaluable vector norm, the input to [`dual_norm_oracle`].
pub trait VectorNorm: Sync {
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

impl VectorNorm for SymmetricGauge {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        SymmetricGauge::eval(self, x)
    }
}

impl<F> VectorNorm for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

/// Scale-invariant score `⟨x, y⟩ / ‖y‖`: a certified lower bound on the
/// dual norm of `x` for any feasible `y`.
fn dual_score<N: VectorNorm + ?Sized>(norm: &N, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    let ly = l2(y);
    if ly < 1e-300 {
        return Ok(None);
    }
    let n = norm.eval(y)?;
    if !n.is_finite() {
        return Err(Error::numerical("norm evaluated to a non-finite value"));
    }
    if n <= 1e-12 * ly {
        return Err(Error::invalid(
            "norm vanishes on a nonzero input; not a norm",
        ));
    }
    Ok(Some(dot(x, y) / n))
}

/// Coordinate ascent on the normalized score, with a shrinking step.
fn coordinate_ascent<N: VectorNorm + ?Sized>(
    norm: &N,
    x: &[f64],
    start: &[f64],
    max_passes: usize,
) -> Result<f64> {
    let mut y = start.to_vec();
    let mut best = match dual_score(norm, x, &y)? {
        Some(s) => s,
        None => return Ok(f64::NEG_INFINITY),
    };
    let scale = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-12);
    let mut step = 0.5 * scale;
    for _ in 0..max_passes {
        let mut improved = false;
        for j in 0..y.len() {
            for dir in [1.0, -1.0] {
                let old = y[j];
                y[j] = old + dir * step;
                match dual_score(norm, x, &y)? {
                    Some(s) if s > best => {
                        best = s;
                        improved = true;
                    }
                    _ => y[j] = old,
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-10 * scale {
                break;
            }
        }
    }
    Ok(best)
}

const ORACLE_ASCENT_PASSES: usize = 48;

/// Estimates the dual norm `sup { ⟨x, y⟩ : norm(y) <= 1 }` from below.
///
/// Deterministic starts (sign pattern, the point itself, every coordinate
/// direction) are always included; `budget` additional Gaussian starts are
/// drawn from streams derived per index, and every start is refined by
/// normalized coordinate ascent. Consequences of that shape:
///
/// * the estimate never exceeds the true dual norm (every evaluation is a
///   feasible normalized candidate, so error stays at rounding level);
/// * it is nondecreasing in `budget` for a fixed seed, because a larger
///   budget evaluates a superset of starts;
/// * it is deterministic given `(x, budget, seed)` and independent of the
///   parallel schedule.
pub fn dual_norm_oracle<N: VectorNorm + ?Sized>(
    norm: &N,
    x: &[f64],
    budget: usize,
    seed: Seed,
) -> Result<f64> {
    let d = x.len();
    if d == 0 {
        return Err(Error::invalid("empty vector"));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let deterministic = 2 + d;
    let total = deterministic + budget;
    par::try_max_over(total, |i| {
        let start: Vec<f64> = if i == 0 {
            x.iter().map(|&v| v.signum()).collect()
        } else if i == 1 {
            let s = l2(x);
            x.iter().map(|&v| v / s).collect()
        } else if i < deterministic {
            let mut e = vec![0.0; d];
            e[i - 2] = 1.0;
            e
        } else {
            let mut rng = seed.derive(i as u64).rng();
            gaussian_vec(&mut rng, d)
        };
        coordinate_ascent(norm, x, &start, ORACLE_ASCENT_PASSES)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lp_hand_values() {
        assert_abs_diff_eq!(lp_norm(&[3.0, -4.0], 2.0).unwrap(), 5.0);
        assert_abs_diff_eq!(lp_norm(&[1.0, -2.0, 3.0], 1.0).unwrap(), 6.0);
        assert_abs_diff_eq!(lp_norm(&[1.0, -2.0, 3.0], f64::INFINITY).unwrap(), 3.0);
        let p3 = lp_norm(&[1.0, 2.0], 3.0).unwrap();
        assert_abs_diff_eq!(p3, 9.0f64.powf(1.0 / 3.0), epsilon = 1e-12);
        assert!(lp_norm(&[1.0], 0.5).is_err());
        assert!(lp_norm(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn l0_counts_strictly_above_tolerance() {
        assert_eq!(l0(&[1e-15, 1.0], 1e-12).unwrap(), 1);
        assert_eq!(l0(&[0.0, 0.0], 1e-12).unwrap(), 0);
        assert_eq!(l0(&[1.0, -2.0, 0.0], 0.0).unwrap(), 2);
        assert!(l0(&[1.0], -1.0).is_err());
    }

    #[test]
    fn top_norm_hand_values() {
        assert_abs_diff_eq!(top_norm(&[3.0, 2.0, 1.0], 1.0, 2).unwrap(), 5.0);
        assert_abs_diff_eq!(
            top_norm(&[3.0, 2.0, 1.0], 2.0, 2).unwrap(),
            13.0f64.sqrt(),
            epsilon = 1e-12
        );
        // q = ∞ ignores r.
        for r in 1..=3 {
            assert_abs_diff_eq!(top_norm(&[3.0, -5.0, 1.0], f64::INFINITY, r).unwrap(), 5.0);
        }
        // r = d recovers the plain ℓq norm.
        assert_abs_diff_eq!(
            top_norm(&[1.0, -2.0, 2.0], 2.0, 3).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert!(top_norm(&[1.0], 2.0, 0).is_err());
        assert!(top_norm(&[1.0], 2.0, 2).is_err());
    }

    #[test]
    fn ksupport_limits_and_hand_values() {
        // r = 1 is the ℓ1 norm, r = d the ℓ2 norm.
        assert_abs_diff_eq!(
            ksupport2_norm(&[1.0, 1.0], 1).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ksupport2_norm(&[1.0, 1.0], 2).unwrap(),
            2.0f64.sqrt(),
            epsilon = 1e-12
        );
        // Spread inputs with few nonzeros collapse to ℓ2.
        assert_abs_diff_eq!(ksupport2_norm(&[5.0, 0.0, 0.0], 2).unwrap(), 5.0);
        // (3,2,1) with r = 2 ties all coordinates: sqrt(36/2).
        assert_abs_diff_eq!(
            ksupport2_norm(&[3.0, 2.0, 1.0], 2).unwrap(),
            18.0f64.sqrt(),
            epsilon = 1e-12
        );
        // (10,1,1) with r = 2 keeps the big coordinate out of the tie.
        assert_abs_diff_eq!(
            ksupport2_norm(&[10.0, 1.0, 1.0], 2).unwrap(),
            104.0f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(ksupport2_norm(&[1.0], 2).is_err());
    }

    #[test]
    fn dual_coordinate_norm_closed_forms() {
        let g2 = SymmetricGauge::lp(2.0).unwrap();
        assert_abs_diff_eq!(
            dual_coordinate_norm(&g2, 2, &[3.0, 2.0, 1.0]).unwrap(),
            13.0f64.sqrt(),
            epsilon = 1e-12
        );
        let g1 = SymmetricGauge::lp(1.0).unwrap();
        for r in 1..=3 {
            assert_abs_diff_eq!(dual_coordinate_norm(&g1, r, &[3.0, 2.0, 1.0]).unwrap(), 3.0);
        }
        let top = SymmetricGauge::top(2.0, 2).unwrap();
        assert!(matches!(
            dual_coordinate_norm(&top, 1, &[1.0, 2.0]),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn descriptors_roundtrip() {
        for s in [
            "lp:2",
            "lp:inf",
            "top:q=2,r=3",
            "top:q=inf,r=1",
            "ksup2:r=3",
        ] {
            let g: SymmetricGauge = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        let g: SymmetricGauge = "lp:1.5".parse().unwrap();
        assert_eq!(g, SymmetricGauge::Lp { p: 1.5 });
        assert!("lp:0.5".parse::<SymmetricGauge>().is_err());
        assert!("top:q=2".parse::<SymmetricGauge>().is_err());
        assert!("nope:1".parse::<SymmetricGauge>().is_err());
    }

    #[test]
    fn oracle_returns_zero_for_zero_and_rejects_degenerate_norms() {
        let g = SymmetricGauge::lp(2.0).unwrap();
        assert_eq!(dual_norm_oracle(&g, &[0.0, 0.0], 10, Seed(1)).unwrap(), 0.0);
        let broken = |y: &[f64]| y[0] * 0.0;
        assert!(dual_norm_oracle(&broken, &[1.0, 1.0], 10, Seed(1)).is_err());
    }

    #[test]
    fn oracle_matches_closed_duals_and_stays_below() {
        let vectors: Vec<Vec<f64>> = vec![
            vec![1.0, -2.0, 0.5],
            vec![3.0, 2.0, 1.0],
            vec![-1.0, 4.0, 0.0],
            vec![0.3, -0.3, 0.9],
        ];
        let gauges: Vec<SymmetricGauge> = vec![
            SymmetricGauge::lp(1.0).unwrap(),
            SymmetricGauge::lp(2.0).unwrap(),
            SymmetricGauge::lp(3.0).unwrap(),
            SymmetricGauge::lp(f64::INFINITY).unwrap(),
            SymmetricGauge::top(2.0, 2).unwrap(),
            SymmetricGauge::top(1.0, 2).unwrap(),
            SymmetricGauge::ksupport2(2).unwrap(),
        ];
        for (vi, x) in vectors.iter().enumerate() {
            for (gi, g) in gauges.iter().enumerate() {
                let closed = g.dual_eval(x).unwrap();
                let est = dual_norm_oracle(g, x, 120, Seed(100 + (vi * 10 + gi) as u64)).unwrap();
                assert!(
                    est <= closed + 1e-9,
                    "estimate {est} exceeds closed dual {closed} for {g}"
                );
                assert!(
                    (closed - est).abs() <= 1e-3 * closed.max(1.0),
                    "estimate {est} too far from closed dual {closed} for {g} on {x:?}"
                );
            }
        }
    }

    #[test]
    fn oracle_is_monotone_in_budget() {
        let g = SymmetricGauge::top(2.0, 2).unwrap();
        let x = [1.0, -2.0, 3.0, 0.5];
        let mut prev = f64::NEG_INFINITY;
        for budget in [0, 3, 20, 80] {
            let est = dual_norm_oracle(&g, &x, budget, Seed(7)).unwrap();
            assert!(est >= prev);
            prev = est;
        }
    }

    proptest! {
        #[test]
        fn gauges_are_symmetric_and_homogeneous(
            xs in proptest::collection::vec(-10.0f64..10.0, 2..6),
            scale in -4.0f64..4.0,
            kind in 0usize..3,
        ) {
            let d = xs.len();
            let gauge = match kind {
                0 => SymmetricGauge::lp(1.5).unwrap(),
                1 => SymmetricGauge::top(2.0, 1 + d / 2).unwrap(),
                _ => SymmetricGauge::ksupport2(1 + d / 2).unwrap(),
            };
            let base = gauge.eval(&xs).unwrap();
            // Sign flips and reversal leave the value unchanged.
            let flipped: Vec<f64> = xs.iter().rev().map(|v| -v).collect();
            let flipped_val = gauge.eval(&flipped).unwrap();
            prop_assert!((base - flipped_val).abs() <= 1e-12 * base.max(1.0));
            // Absolute homogeneity.
            let scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
            let scaled_val = gauge.eval(&scaled).unwrap();
            prop_assert!((scaled_val - scale.abs() * base).abs() <= 1e-9 * base.max(1.0));
        }

        #[test]
        fn ksupport_interpolates_and_is_subadditive(
            xs in proptest::collection::vec(-5.0f64..5.0, 3..6),
            ys in proptest::collection::vec(-5.0f64..5.0, 3..6),
            r in 1usize..4,
        ) {
            let d = xs.len().min(ys.len());
            let r = r.min(d);
            let x = &xs[..d];
            let y = &ys[..d];
            let kx = ksupport2_norm(x, r).unwrap();
            prop_assert!(kx + 1e-12 >= lp_norm(x, 2.0).unwrap() - 1e-9);
            prop_assert!(kx <= lp_norm(x, 1.0).unwrap() + 1e-9);
            let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            let ks = ksupport2_norm(&sum, r).unwrap();
            let ky = ksupport2_norm(y, r).unwrap();
            prop_assert!(ks <= kx + ky + 1e-9);
        }

        #[test]
        fn top_norm_monotone_in_r(
            xs in proptest::collection::vec(-5.0f64..5.0, 2..6),
        ) {
            let d = xs.len();
            let mut prev = 0.0;
            for r in 1..=d {
                let t = top_norm(&xs, 2.0, r).unwrap();
                prop_assert!(t + 1e-12 >= prev);
                prev = t;
            }
            let full = lp_norm(&xs, 2.0).unwrap();
            prop_assert!((prev - full).abs() <= 1e-9 * full.max(1.0));
        }
    }
}
