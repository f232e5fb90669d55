//! Nonclassicality criteria evaluated on a finite probability vector: the
//! Klyshko two-sided neighbor test, its three-index generalization, the
//! tail-summed criterion that uses all of `(P_0, ..., P_N)`, and an
//! aggregate certifier collecting every applicable test.

use std::collections::HashSet;

use serde::Serialize;

use crate::dist::FockDistribution;
use crate::error::{Error, Result};
use crate::majorization::{enumerate_pairs, evaluate_pair};
use crate::numeric::exp_tail_ratio;

/// Shared strict-violation tolerance: a margin counts as a violation only
/// beyond `tol * max(1, scale)`, because classical states (coherent ones)
/// saturate these inequalities exactly.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Largest `Q_N / Q_{N-1}` ratio fed to the exponential before switching to
/// a log-domain surrogate (`e^x` overflows near 709).
const EXP_RATIO_GUARD: f64 = 700.0;

/// `margin > VIOLATION_TOL * max(1, |scale|)`.
pub fn strict_violation(margin: f64, scale: f64) -> bool {
    violation_with_tol(margin, scale, VIOLATION_TOL)
}

/// Violation decision under a caller-chosen tolerance.
pub fn violation_with_tol(margin: f64, scale: f64, tol: f64) -> bool {
    margin > tol * scale.abs().max(1.0)
}

/// Outcome of one criterion: positive margin means the classical bound is
/// exceeded. `diverged` marks analytically controlled infinite margins
/// (reported as `+inf`, or as a finite log-domain surrogate where the
/// exponential would overflow).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub id: String,
    pub margin: f64,
    pub violated: bool,
    pub diverged: bool,
}

/// Aggregate result over all evaluated criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub nonclassical: bool,
    pub witnesses: Vec<String>,
    pub verdicts: Vec<CriterionVerdict>,
}

/// Iterated product `base^e` with the same multiplication order as an
/// explicit factor list, so index-tuple products reduce to it bit-for-bit.
fn pow_posint(base: f64, e: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= base;
    }
    acc
}

fn check_index(p: &FockDistribution, k: usize) -> Result<()> {
    if k >= p.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: p.len(),
        });
    }
    Ok(())
}

/// [`triple`] under a caller-chosen violation tolerance.
pub fn triple_with_tol(
    p: &FockDistribution,
    n: usize,
    m: usize,
    k: usize,
    tol: f64,
) -> Result<CriterionVerdict> {
    if !(n <= m && m <= k) {
        return Err(Error::Precondition(format!(
            "triple indices must satisfy n <= m <= k, got ({n}, {m}, {k})"
        )));
    }
    check_index(p, k)?;
    let q = p.factorial_weights();
    let lhs = pow_posint(q.get(m)?, k - n);
    let rhs = pow_posint(q.get(n)?, k - m) * pow_posint(q.get(k)?, m - n);
    let margin = lhs - rhs;
    Ok(CriterionVerdict {
        id: format!("triple:{n},{m},{k}"),
        margin,
        violated: violation_with_tol(margin, rhs, tol),
        diverged: false,
    })
}

/// Three-index criterion `Q_m^{k-n} <= Q_n^{k-m} Q_k^{m-n}` for
/// `0 <= n <= m <= k`; the margin is the left side minus the right side.
pub fn triple(p: &FockDistribution, n: usize, m: usize, k: usize) -> Result<CriterionVerdict> {
    triple_with_tol(p, n, m, k, VIOLATION_TOL)
}

fn klyshko_id(k: usize) -> String {
    if k == 1 {
        "K1".to_string()
    } else {
        format!("Kk:{k}")
    }
}

/// [`klyshko`] under a caller-chosen violation tolerance.
pub fn klyshko_with_tol(p: &FockDistribution, k: usize, tol: f64) -> Result<CriterionVerdict> {
    if k < 1 {
        return Err(Error::Precondition("Klyshko index k must be >= 1".into()));
    }
    check_index(p, k + 1)?;
    let mut verdict = triple_with_tol(p, k - 1, k, k + 1, tol)?;
    verdict.id = klyshko_id(k);
    Ok(verdict)
}

/// Klyshko neighbor criterion: margin `Q_k^2 - Q_{k-1} Q_{k+1}`, evaluated
/// as the `(k-1, k, k+1)` instance of [`triple`].
pub fn klyshko(p: &FockDistribution, k: usize) -> Result<CriterionVerdict> {
    klyshko_with_tol(p, k, VIOLATION_TOL)
}

/// [`k_infinity`] under a caller-chosen violation tolerance.
pub fn k_infinity_with_tol(p: &FockDistribution, n: usize, tol: f64) -> Result<CriterionVerdict> {
    if n < 2 {
        return Err(Error::Precondition(
            "tail criterion needs N >= 2 probabilities beyond P_0".into(),
        ));
    }
    check_index(p, n)?;
    let id = format!("Kinf:{n}");
    let q = p.factorial_weights();
    let q_last = q.get(n)?;
    let q_prev = q.get(n - 1)?;
    let head: f64 = p.probs()[..=n - 2].iter().sum();

    if q_prev == 0.0 {
        if q_last > 0.0 {
            // The bound's tail weight blows up in this limit.
            return Ok(CriterionVerdict {
                id,
                margin: f64::INFINITY,
                violated: true,
                diverged: true,
            });
        }
        // Both vanish: the tail term drops out entirely.
        let margin = head - 1.0;
        return Ok(CriterionVerdict {
            id,
            margin,
            violated: violation_with_tol(margin, 1.0, tol),
            diverged: false,
        });
    }

    let x = q_last / q_prev;
    if x > EXP_RATIO_GUARD {
        // log of Q_{N-1} e^x / x^{N-1}, the dominant term of the left side.
        let surrogate = q_prev.ln() + x - (n - 1) as f64 * x.ln();
        return Ok(CriterionVerdict {
            id,
            margin: surrogate,
            violated: true,
            diverged: true,
        });
    }

    // Q_{N-1}^N / Q_N^{N-1} * sum_{k >= N-1} x^k / k!  ==  Q_{N-1} * ratio,
    // with ratio = sum_{j >= 0} x^j / (j+N-1)!; the shifted series is stable
    // for x -> 0 (where the limit is P_{N-1}) and has no cancellation.
    let lhs = head + q_prev * exp_tail_ratio(x, n - 1);
    let margin = lhs - 1.0;
    Ok(CriterionVerdict {
        id,
        margin,
        violated: violation_with_tol(margin, lhs, tol),
        diverged: false,
    })
}

/// Tail-summed criterion using all of `(P_0, ..., P_N)`: classical states
/// satisfy `sum_{k<=N-2} P_k + Q_{N-1}^N/Q_N^{N-1} [e^{Q_N/Q_{N-1}} -
/// sum_{k<=N-2} (Q_N/Q_{N-1})^k/k!] <= 1`; the margin is that left side
/// minus 1.
pub fn k_infinity(p: &FockDistribution, n: usize) -> Result<CriterionVerdict> {
    k_infinity_with_tol(p, n, VIOLATION_TOL)
}

/// Configuration for [`certify`].
#[derive(Debug, Clone)]
pub struct CertifyOptions {
    /// Longest index tuple used for product criteria (`s` from 2 up to this).
    pub max_tuple_len: usize,
    /// Largest entry in product-criterion tuples; capped at the vector's
    /// top index, which is also the default.
    pub majorization_n_max: Option<usize>,
    /// Violation tolerance shared by every criterion.
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            max_tuple_len: 4,
            majorization_n_max: None,
            tol: VIOLATION_TOL,
        }
    }
}

/// Evaluate every applicable criterion on `p`: Klyshko for each interior
/// index, the tail criterion for every truncation `2..=N`, all strict
/// three-index triples, and the product criteria up to the configured
/// tuple length (zero-padded duplicates merged).
pub fn certify(p: &FockDistribution, options: &CertifyOptions) -> Result<CertificationReport> {
    let top = p.max_index();
    let mut verdicts = Vec::new();

    if top >= 2 {
        for k in 1..=top - 1 {
            verdicts.push(klyshko_with_tol(p, k, options.tol)?);
        }
        for m in 2..=top {
            verdicts.push(k_infinity_with_tol(p, m, options.tol)?);
        }
        for k in 2..=top {
            for m in 1..k {
                for n in 0..m {
                    verdicts.push(triple_with_tol(p, n, m, k, options.tol)?);
                }
            }
        }
    }

    let pair_n_max = options.majorization_n_max.unwrap_or(top).min(top);
    if pair_n_max >= 1 && options.max_tuple_len >= 2 {
        let q = p.factorial_weights();
        let mut seen: HashSet<String> = HashSet::new();
        for s in 2..=options.max_tuple_len {
            for item in enumerate_pairs(pair_n_max, s)?.iter() {
                let id = item.pair.id();
                if seen.insert(id) {
                    let mut v = evaluate_pair(&q, &item.pair)?;
                    v.violated = violation_with_tol(
                        v.margin,
                        crate::majorization::product(&q, &item.pair.upper)?,
                        options.tol,
                    );
                    verdicts.push(v);
                }
            }
        }
    }

    let witnesses: Vec<String> = verdicts
        .iter()
        .filter(|v| v.violated)
        .map(|v| v.id.clone())
        .collect();
    Ok(CertificationReport {
        nonclassical: !witnesses.is_empty(),
        witnesses,
        verdicts,
    })
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}
