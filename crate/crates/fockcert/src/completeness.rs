//! Exact classical/nonclassical decision on a `(P_0, P_1, P_2)` triple.
//!
//! Two inequalities decide membership in the projection of the classical
//! set onto the first three probabilities:
//!
//! - `k1 = P_1^2 - 2 P_0 P_2 <= 0`, and
//! - `kinf2 = P_0 + (P_1^2 / 2P_2) [e^{2P_2/P_1} - 1] <= 1`.
//!
//! Together they are complete: every triple passing both is realized by a
//! mixture of coherent states, and [`decompose`] constructs one explicitly
//! as origin + vacuum + a single coherent point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{exp_tail_ratio, solve_expanding_upward};

/// Decision tolerance: boundary points (coherent states) saturate both
/// inequalities exactly, so equality must count as classical.
pub const DECISION_TOL: f64 = 1e-10;

/// Outcome of [`decide`] on a probability triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleVerdict {
    /// `P_1^2 - 2 P_0 P_2`; positive certifies nonclassicality.
    pub k1: f64,
    /// Left side of the tail inequality; above 1 certifies nonclassicality.
    /// `+inf` in the divergent `P_1 = 0 < P_2` limit.
    pub kinf2: f64,
    pub classical: bool,
}

/// Constructive classical decomposition: `P = w_vacuum (1,0,0) +
/// w_coherent (e^-mu, mu e^-mu, mu^2 e^-mu / 2)`, with `w_origin` carrying
/// the deficit mass on the zero vector (the infinite-energy coherent limit).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalDecomposition {
    pub w_origin: f64,
    pub w_vacuum: f64,
    pub w_coherent: f64,
    pub mu: f64,
}

impl ClassicalDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serialization cannot fail")
    }

    /// The triple this decomposition reconstructs.
    pub fn reconstruct(&self) -> [f64; 3] {
        let e = (-self.mu).exp();
        [
            self.w_vacuum + self.w_coherent * e,
            self.w_coherent * e * self.mu,
            self.w_coherent * e * self.mu * self.mu / 2.0,
        ]
    }
}

fn validate_triple(p0: f64, p1: f64, p2: f64) -> Result<()> {
    for (name, v) in [("P0", p0), ("P1", p1), ("P2", p2)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::ParameterDomain {
                name: match name {
                    "P0" => "P0",
                    "P1" => "P1",
                    _ => "P2",
                },
                value: v,
                requirement: "finite and >= 0",
            });
        }
    }
    let sum = p0 + p1 + p2;
    if sum > 1.0 + 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "triple sums to {sum} > 1"
        )));
    }
    Ok(())
}

/// Left side of the tail inequality, with analytic limits at `P_1 = 0`
/// (divergent if `P_2 > 0`, else `P_0`) and `P_2 = 0` (`P_0 + P_1`).
fn kinf2_value(p0: f64, p1: f64, p2: f64) -> f64 {
    if p1 == 0.0 {
        return if p2 > 0.0 { f64::INFINITY } else { p0 };
    }
    if p2 == 0.0 {
        return p0 + p1;
    }
    let x = 2.0 * p2 / p1;
    if x > 700.0 {
        return f64::INFINITY;
    }
    // P_1^2/(2 P_2) (e^x - 1) = P_1 (e^x - 1)/x, summed as a stable series.
    p0 + p1 * exp_tail_ratio(x, 1)
}

/// Complete classical/nonclassical decision on `(P_0, P_1, P_2)`.
pub fn decide(p0: f64, p1: f64, p2: f64) -> Result<TripleVerdict> {
    validate_triple(p0, p1, p2)?;
    let k1 = p1 * p1 - 2.0 * p0 * p2;
    let kinf2 = kinf2_value(p0, p1, p2);
    let classical = k1 <= DECISION_TOL && kinf2 <= 1.0 + DECISION_TOL;
    Ok(TripleVerdict { k1, kinf2, classical })
}

/// Construct an explicit classical decomposition of a classical triple.
///
/// Following the completeness proof: scale by `eps >= 1` until the tail
/// inequality saturates, peel off vacuum weight until the scaled point
/// also saturates `k1 = 0`, and read the remaining point off as a single
/// coherent state with `mu = -ln P_0''`.
pub fn decompose(p0: f64, p1: f64, p2: f64) -> Result<ClassicalDecomposition> {
    let verdict = decide(p0, p1, p2)?;
    if !verdict.classical {
        return Err(Error::Precondition(format!(
            "decomposition needs a classical triple; got k1 = {}, kinf2 = {}",
            verdict.k1, verdict.kinf2
        )));
    }

    if p0 == 0.0 && p1 == 0.0 && p2 == 0.0 {
        // The zero vector is the infinite-energy coherent limit itself.
        return Ok(ClassicalDecomposition {
            w_origin: 1.0,
            w_vacuum: 0.0,
            w_coherent: 0.0,
            mu: 0.0,
        });
    }

    if p1 == 0.0 {
        // Classical with P_1 = 0 forces P_2 = 0 (else kinf2 diverges), so
        // the triple is vacuum mass alone.
        return Ok(ClassicalDecomposition {
            w_origin: 1.0 - p0,
            w_vacuum: p0,
            w_coherent: 0.0,
            mu: 0.0,
        });
    }
    if p2 == 0.0 {
        // P_1 > 0 with P_2 = 0 makes k1 = P_1^2 > 0: unreachable here.
        return Err(Error::Precondition(
            "classical triple with P2 = 0 must have P1 = 0".into(),
        ));
    }

    // Step 1: eps >= 1 with kinf2(eps P) = 1. The left side is linear in
    // eps (the exponent 2P_2/P_1 is scale-invariant), so the bracketed
    // root always exists and the solver is safe.
    let eps = if verdict.kinf2 >= 1.0 {
        1.0
    } else {
        solve_expanding_upward(
            |e| kinf2_value(e * p0, e * p1, e * p2) - 1.0,
            1.0,
            2.0,
            1e-13,
        )?
    };
    let (s0, s1, s2) = (eps * p0, eps * p1, eps * p2);

    // Step 2: mix toward vacuum until k1 saturates; the proof's weight is
    // p = (2P_2'/P_1'^2) e^{-2P_2'/P_1'} >= 1 once kinf2(P') = 1.
    let x = 2.0 * s2 / s1;
    let p = (2.0 * s2 / (s1 * s1)) * (-x).exp();
    if p < 1.0 - 1e-9 {
        return Err(Error::Precondition(format!(
            "vacuum-mixing weight {p} fell below 1; triple not on the expected boundary"
        )));
    }
    let p = p.max(1.0);

    // Step 3: the residual point sits on both boundaries at once, which
    // pins it to a single coherent state.
    let p0dd = (p * s0 - (p - 1.0)).clamp(f64::MIN_POSITIVE, 1.0);
    let mu = -p0dd.ln();

    Ok(ClassicalDecomposition {
        w_origin: 1.0 - 1.0 / eps,
        w_vacuum: (p - 1.0) / (eps * p),
        w_coherent: 1.0 / (eps * p),
        mu,
    })
}

/// Outcome of [`cross_validate`]: the exact decision next to the
/// direction-sampled geometric membership test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub classical: bool,
    pub membership: bool,
    /// True when the triple sits within `1e-6` of either decision
    /// boundary, where finite direction sampling is not expected to
    /// reproduce the exact decision.
    pub within_band: bool,
    pub agree: bool,
}

/// Check the exact decision against the support-function membership test
/// of the `(P_0, P_1, P_2)` slice with `n_dirs` sampled directions. The
/// two must agree for every triple outside a narrow boundary band.
pub fn cross_validate(p0: f64, p1: f64, p2: f64, n_dirs: usize) -> Result<CrossCheck> {
    let verdict = decide(p0, p1, p2)?;
    let slice = crate::geometry::Slice::new(&[0, 1, 2])?;
    let membership = crate::geometry::membership(&[p0, p1, p2], &slice, n_dirs)?;
    let band = 1e-6;
    let within_band = verdict.k1.abs() <= band
        || (verdict.kinf2.is_finite() && (verdict.kinf2 - 1.0).abs() <= band);
    Ok(CrossCheck {
        classical: verdict.classical,
        membership,
        within_band,
        agree: within_band || membership == verdict.classical,
    })
}

/// Best fit of a triple by a discretized mixture of coherent states (plus
/// origin slack), solved as nonnegative least squares with total weight at
/// most 1. Returns the Euclidean residual and the fitted triple.
///
/// This is an independent check on [`decide`]/[`decompose`]: classical
/// triples away from the boundary fit with negligible residual, while
/// nonclassical ones cannot be approximated.
pub fn fit_coherent_mixture(p0: f64, p1: f64, p2: f64, grid: usize) -> Result<(f64, [f64; 3])> {
    validate_triple(p0, p1, p2)?;
    let grid = grid.max(8);
    // Columns: coherent triples on a mu grid (denser near 0 via quadratic
    // spacing), plus an explicit vacuum column (mu = 0 is included).
    let mu_max = 45.0;
    let mut cols: Vec<[f64; 3]> = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        let mu = mu_max * t * t;
        let e = (-mu).exp();
        cols.push([e, mu * e, 0.5 * mu * mu * e]);
    }
    let target = [p0, p1, p2];

    // Enforce sum(w) <= 1 through a penalty row with a slack column; the
    // slack absorbs 1 - sum(w) so the equality row is loss-free for any
    // feasible weight vector.
    const RHO: f64 = 1e4;
    let n = cols.len() + 1; // + slack
    let rows = 4;
    let a = |r: usize, c: usize| -> f64 {
        if c + 1 == n {
            if r == 3 { RHO } else { 0.0 }
        } else if r == 3 {
            RHO
        } else {
            cols[c][r]
        }
    };
    let b = [target[0], target[1], target[2], RHO];

    // Lawson-Hanson active-set nonnegative least squares.
    let mut active: Vec<usize> = Vec::new();
    let mut w = vec![0.0f64; n];
    let residual_vec = |w: &[f64]| -> [f64; 4] {
        let mut r = b;
        for (c, &wc) in w.iter().enumerate() {
            if wc != 0.0 {
                for (ri, item) in r.iter_mut().enumerate() {
                    *item -= a(ri, c) * wc;
                }
            }
        }
        r
    };
    for _outer in 0..200 {
        // Most negative gradient among inactive columns.
        let r = residual_vec(&w);
        let mut best: Option<(usize, f64)> = None;
        for c in 0..n {
            if active.contains(&c) {
                continue;
            }
            let g: f64 = (0..rows).map(|ri| a(ri, c) * r[ri]).sum();
            if g > best.map_or(1e-13, |(_, bg)| bg) {
                best = Some((c, g));
            }
        }
        let Some((enter, _)) = best else { break };
        active.push(enter);

        // Inner loop: least squares on the active set, stepping back when
        // coefficients go negative.
        for _inner in 0..200 {
            let k = active.len();
            // Normal equations G z = h on active columns.
            let mut g = vec![0.0f64; k * k];
            let mut h = vec![0.0f64; k];
            for (i, &ci) in active.iter().enumerate() {
                for (j, &cj) in active.iter().enumerate() {
                    g[i * k + j] = (0..rows).map(|r| a(r, ci) * a(r, cj)).sum();
                }
                h[i] = (0..rows).map(|r| a(r, ci) * b[r]).sum();
            }
            let z = solve_dense(k, &mut g, &mut h);
            if z.iter().all(|&v| v > 0.0) {
                for wc in w.iter_mut() {
                    *wc = 0.0;
                }
                for (i, &ci) in active.iter().enumerate() {
                    w[ci] = z[i];
                }
                break;
            }
            // Step toward z until the first coefficient hits zero.
            let mut alpha = 1.0f64;
            for (i, &ci) in active.iter().enumerate() {
                if z[i] <= 0.0 {
                    let wi = w[ci];
                    if wi - z[i] > 0.0 {
                        alpha = alpha.min(wi / (wi - z[i]));
                    }
                }
            }
            for (i, &ci) in active.iter().enumerate() {
                w[ci] += alpha * (z[i] - w[ci]);
            }
            let drop: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&ci| w[ci] <= 1e-14)
                .collect();
            for ci in drop {
                w[ci] = 0.0;
                active.retain(|&c| c != ci);
            }
        }
    }

    let mut fit = [0.0f64; 3];
    for (c, &wc) in w.iter().enumerate() {
        if wc != 0.0 && c + 1 < n {
            for (ri, item) in fit.iter_mut().enumerate() {
                *item += cols[c][ri] * wc;
            }
        }
    }
    let residual = (0..3)
        .map(|i| (fit[i] - target[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((residual, fit))
}

/// Gaussian elimination with partial pivoting on a small dense system;
/// consumes its inputs.
fn solve_dense(nn: usize, g: &mut [f64], h: &mut [f64]) -> Vec<f64> {
    for col in 0..nn {
        let mut pivot = col;
        for r in col + 1..nn {
            if g[r * nn + col].abs() > g[pivot * nn + col].abs() {
                pivot = r;
            }
        }
        if pivot != col {
            for c in 0..nn {
                g.swap(col * nn + c, pivot * nn + c);
            }
            h.swap(col, pivot);
        }
        let d = g[col * nn + col];
        if d == 0.0 {
            continue;
        }
        for r in col + 1..nn {
            let f = g[r * nn + col] / d;
            if f != 0.0 {
                for c in col..nn {
                    g[r * nn + c] -= f * g[col * nn + c];
                }
                h[r] -= f * h[col];
            }
        }
    }
    let mut z = vec![0.0f64; nn];
    for col in (0..nn).rev() {
        let mut acc = h[col];
        for c in col + 1..nn {
            acc -= g[col * nn + c] * z[c];
        }
        let d = g[col * nn + col];
        z[col] = if d != 0.0 { acc / d } else { 0.0 };
    }
    z
}
