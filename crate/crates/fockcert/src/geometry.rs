//! Support-function geometry of classicality regions in 2D and 3D
//! probability slices.
//!
//! A slice collects two or three Fock probabilities `(P_n, P_m, ...)`.
//! The classical region in a slice is the convex hull of the coherent
//! curve `lambda -> (e^-lambda lambda^i / i!)_i` together with the origin
//! (its infinite-energy limit), so it is exactly the intersection of the
//! half-planes `<n, P> <= F_max(n)` over all unit directions `n`, where
//! `F_max` is the support function of the curve. This module provides the
//! curve, closed-form and numerical support values, convex-closure
//! descriptions of the `(P_0, P_k)` slices, and direction-sampled
//! membership tests.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{factorial, golden_max, solve_bracketed};

/// Additive slack when comparing `<n, P>` against the support value.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Candidates within this distance of the maximum are reported as
/// maximizers; boundary directions are defined by such ties.
pub const TIE_TOL: f64 = 1e-10;

/// A 2- or 3-dimensional probability slice, named by the Fock indices it
/// projects onto.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slice {
    indices: Vec<usize>,
}

impl Slice {
    pub fn new(indices: &[usize]) -> Result<Self> {
        if indices.len() < 2 || indices.len() > 3 {
            return Err(Error::Precondition(format!(
                "slice needs 2 or 3 indices, got {}",
                indices.len()
            )));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!(
                "slice indices must be strictly increasing, got {indices:?}"
            )));
        }
        Ok(Slice {
            indices: indices.to_vec(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// A unit direction in a slice, parameterized by `theta` (2D) or by the
/// spherical pair `(theta, phi)` with components `a = cos(theta)`,
/// `b = sin(theta)cos(phi)`, `c = sin(theta)sin(phi)` (3D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Direction {
    Planar { theta: f64 },
    Spatial { theta: f64, phi: f64 },
}

impl Direction {
    pub fn components(&self) -> Vec<f64> {
        match *self {
            Direction::Planar { theta } => vec![theta.cos(), theta.sin()],
            Direction::Spatial { theta, phi } => vec![
                theta.cos(),
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
            ],
        }
    }
}

/// A support-function value: the maximum of `<n, C(lambda)>` over the
/// coherent curve (with the origin as the `lambda = inf` limit), together
/// with every `lambda` achieving it. `f64::INFINITY` encodes the
/// infinite-energy endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportValue {
    pub f_max: f64,
    pub maximizers: Vec<f64>,
    /// Landscape classification of the direction; only populated by the
    /// closed-form 3D analysis.
    pub region: Option<LandscapeRegion>,
}

/// Shape of the curve functional `f(lambda) = e^-lambda (a + b lambda +
/// c lambda^2/2)` along a 3D direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LandscapeRegion {
    /// The stationarity quadratic has no real root.
    NoRealStationary,
    /// Real stationary points exist but none with `lambda >= 0`.
    StationaryNegative,
    /// A nonnegative stationary point exists but the vacuum endpoint
    /// `lambda = 0` still attains the maximum.
    VacuumDominates,
    /// A nonnegative stationary point attains the maximum.
    StationaryDominates,
}

/// One coordinate `e^-lambda lambda^i / i!` of the coherent curve.
fn curve_component(i: usize, lambda: f64) -> f64 {
    if lambda.is_infinite() {
        return 0.0;
    }
    if lambda == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if lambda > 746.0 {
        // e^-lambda underflows to zero before the polynomial overflows.
        return 0.0;
    }
    let mut p = (-lambda).exp();
    for _ in 0..i {
        p *= lambda;
    }
    p / factorial(i)
}

/// Point of the coherent curve in a slice; `lambda = inf` gives the zero
/// vector (the origin of the slice).
pub fn coherent_curve(slice: &Slice, lambda: f64) -> Result<Vec<f64>> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::ParameterDomain {
            name: "lambda",
            value: lambda,
            requirement: ">= 0 (inf allowed)",
        });
    }
    Ok(slice
        .indices
        .iter()
        .map(|&i| curve_component(i, lambda))
        .collect())
}

/// Curve functional `<n, C(lambda)>` for a coefficient vector aligned
/// with the slice coordinates.
fn slice_functional(slice: &Slice, coeffs: &[f64], lambda: f64) -> f64 {
    slice
        .indices
        .iter()
        .zip(coeffs)
        .map(|(&i, &c)| c * curve_component(i, lambda))
        .sum()
}

/// Residual of the two-index boundary relation
/// `Q_n^{m/(m-n)} = e^{-(Q_m/Q_n)^{1/(m-n)}} Q_m^{n/(m-n)}`
/// in factorial weights `Q_i = i! P_i`; zero exactly on the coherent
/// curve. For `(P_0, P_k)` it reduces to `Q_k = Q_0 [ln(1/Q_0)]^k`.
pub fn boundary_relation_2d(slice: &Slice, point: &[f64]) -> Result<f64> {
    if slice.dim() != 2 {
        return Err(Error::Precondition(
            "boundary relation is defined on 2D slices".into(),
        ));
    }
    if point.len() != 2 {
        return Err(Error::Precondition(format!(
            "expected 2 coordinates, got {}",
            point.len()
        )));
    }
    if point.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::ZeroCoordinate);
    }
    let (n, m) = (slice.indices[0], slice.indices[1]);
    let qn = factorial(n) * point[0];
    let qm = factorial(m) * point[1];
    let d = (m - n) as f64;
    let lam = (qm / qn).powf(1.0 / d);
    Ok(qn.powf(m as f64 / d) - (-lam).exp() * qm.powf(n as f64 / d))
}

/// Coherent-curve bound of the `(P_0, P_k)` slice: `P_k` as a function of
/// `P_0`, namely `P_0 (-ln P_0)^k / k!`.
pub fn p0k_curve(k: usize, p0: f64) -> f64 {
    if p0 <= 0.0 {
        return 0.0;
    }
    let u = -p0.ln();
    p0 * u.powi(k as i32) / factorial(k)
}

/// Slope of [`p0k_curve`] in `P_0`: `u^{k-1}(u - k)/k!` with `u = -ln P_0`.
pub fn p0k_curve_slope(k: usize, p0: f64) -> f64 {
    let u = -p0.ln();
    u.powi(k as i32 - 1) * (u - k as f64) / factorial(k)
}

/// Inflection point of the `(P_0, P_k)` curve bound, at `P_0 = e^{1-k}`.
/// The `k = 1` curve is convex everywhere and has none.
pub fn inflection_p0k(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::NoInflection);
    }
    Ok((1.0 - k as f64).exp())
}

/// Piecewise description of the convex closure of the `(P_0, P_k)`
/// region: the curve bound up to `p0_tangent`, then the chord to the
/// vacuum point `(1, 0)` whose slope matches the curve slope there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureP0k {
    pub k: usize,
    pub p0_tangent: f64,
    pub chord_slope: f64,
}

impl ClosureP0k {
    /// Upper bound on `P_k` at the given `P_0` under the closure.
    pub fn bound(&self, p0: f64) -> f64 {
        if p0 <= self.p0_tangent {
            p0k_curve(self.k, p0)
        } else {
            self.chord_slope * (p0 - 1.0)
        }
    }
}

/// Close the non-convex `(P_0, P_k)` curve region: root-find the tangency
/// point `P_0t` where the curve's tangent line passes through `(1, 0)`,
/// i.e. `f'(P_0t) = -f(P_0t)/(1 - P_0t)`.
pub fn convex_closure_p0k(k: usize) -> Result<ClosureP0k> {
    if k < 2 {
        // The k = 1 curve is convex; the region needs no chord.
        return Err(Error::NoChordNeeded);
    }
    let g = |p0: f64| p0k_curve_slope(k, p0) * (1.0 - p0) + p0k_curve(k, p0);
    let hi = (1.0 - k as f64).exp();
    let p0t = solve_bracketed(g, 1e-12, hi, 1e-15)?;
    let chord_slope = -p0k_curve(k, p0t) / (1.0 - p0t);
    Ok(ClosureP0k {
        k,
        p0_tangent: p0t,
        chord_slope,
    })
}

/// Larger stationary point of the `(P_0, P_2)` functional at polar angle
/// `theta`, when real: `1 + sqrt(1 - 2 cot(theta))`.
#[cfg(test)]
fn lambda_plus_02(theta: f64) -> Option<f64> {
    let cot = theta.cos() / theta.sin();
    let disc = 1.0 - 2.0 * cot;
    if disc < 0.0 {
        None
    } else {
        Some(1.0 + disc.sqrt())
    }
}

/// Angle at which the `(P_0, P_2)` support switches between the vacuum
/// endpoint and the interior stationary point, i.e. where
/// `e^{-lambda_+} lambda_+ = cot(theta)`. Computed once and cached.
pub fn theta0() -> f64 {
    static THETA0: OnceLock<f64> = OnceLock::new();
    *THETA0.get_or_init(|| {
        let f = |theta: f64| {
            // Clamp the discriminant: it is exactly zero at the lower
            // bracket endpoint and rounding can push it barely negative.
            let cot = theta.cos() / theta.sin();
            let lam = 1.0 + (1.0 - 2.0 * cot).max(0.0).sqrt();
            (-lam).exp() * lam - cot
        };
        solve_bracketed(f, 2.0f64.atan(), std::f64::consts::FRAC_PI_2, 1e-13)
            .expect("support switch angle is bracketed by construction")
    })
}

/// Collect the support value from a candidate list: the maximum of the
/// functional over `{0, inf, stationary candidates}` with all ties.
fn support_from_candidates(
    eval: impl Fn(f64) -> f64,
    stationary: &[f64],
    region: Option<LandscapeRegion>,
) -> SupportValue {
    let mut candidates: Vec<f64> = vec![0.0, f64::INFINITY];
    for &s in stationary {
        if s.is_finite() && s >= 0.0 {
            candidates.push(s);
        }
    }
    let value = |l: f64| if l.is_infinite() { 0.0 } else { eval(l) };
    let f_max = candidates
        .iter()
        .map(|&l| value(l))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers: Vec<f64> = Vec::new();
    for &l in &candidates {
        if value(l) >= f_max - TIE_TOL {
            let dup = maximizers
                .iter()
                .any(|&m| (m - l).abs() <= 1e-12 * (1.0 + l.abs()) || (m.is_infinite() && l.is_infinite()));
            if !dup {
                maximizers.push(l);
            }
        }
    }
    maximizers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SupportValue {
        f_max,
        maximizers,
        region,
    }
}

/// Numerical support maximization for slices without a closed form:
/// scan `log(1 + lambda)` over `[0, 40]`, refine each interior local
/// maximum by golden section, and keep the endpoint candidates.
fn numeric_support(eval: impl Fn(f64) -> f64) -> SupportValue {
    const GRID: usize = 512;
    const T_MAX: f64 = 40.0;
    let to_lambda = |t: f64| t.exp() - 1.0;
    let g = |t: f64| eval(to_lambda(t));
    let values: Vec<f64> = (0..=GRID)
        .map(|i| g(T_MAX * i as f64 / GRID as f64))
        .collect();
    let mut stationary = Vec::new();
    for i in 1..GRID {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] {
            let a = T_MAX * (i - 1) as f64 / GRID as f64;
            let b = T_MAX * (i + 1) as f64 / GRID as f64;
            let (t, _) = golden_max(&g, a, b, 1e-13);
            stationary.push(to_lambda(t));
        }
    }
    support_from_candidates(eval, &stationary, None)
}

/// Support function of a 2D slice at polar angle `theta`, with
/// closed-form stationary points for `(P_0, P_1)` and `(P_0, P_2)` and a
/// guarded numerical fallback otherwise.
pub fn f_max_2d(slice: &Slice, theta: f64) -> Result<SupportValue> {
    if slice.dim() != 2 {
        return Err(Error::Precondition(
            "f_max_2d is defined on 2D slices".into(),
        ));
    }
    let coeffs = [theta.cos(), theta.sin()];
    let eval = |l: f64| slice_functional(slice, &coeffs, l);
    let (n, m) = (slice.indices[0], slice.indices[1]);
    let sin = theta.sin();
    match (n, m) {
        (0, 1) => {
            let mut st = Vec::new();
            if sin != 0.0 {
                st.push(1.0 - theta.cos() / sin);
            }
            Ok(support_from_candidates(eval, &st, None))
        }
        (0, 2) => {
            let mut st = Vec::new();
            if sin != 0.0 {
                let cot = theta.cos() / sin;
                let disc = 1.0 - 2.0 * cot;
                if disc >= 0.0 {
                    st.push(1.0 - disc.sqrt());
                    st.push(1.0 + disc.sqrt());
                }
            }
            Ok(support_from_candidates(eval, &st, None))
        }
        _ => Ok(numeric_support(eval)),
    }
}

/// Support function of the `(P_0, P_1, P_2)` slice along the spherical
/// direction `(theta, phi)`: candidates are the endpoints and the real
/// nonnegative roots of the stationarity quadratic
/// `c lambda^2/2 + (b - c) lambda + (a - b) = 0`.
pub fn f_max_3d(theta: f64, phi: f64) -> SupportValue {
    let dir = Direction::Spatial { theta, phi };
    let v = dir.components();
    let (a, b, c) = (v[0], v[1], v[2]);
    let eval = |l: f64| {
        if l > 746.0 {
            0.0
        } else {
            (-l).exp() * (a + b * l + c * l * l / 2.0)
        }
    };

    let mut roots: Vec<f64> = Vec::new();
    let mut any_real = false;
    if c != 0.0 {
        let disc = c * c + b * b - 2.0 * a * c;
        if disc >= 0.0 {
            any_real = true;
            let s = disc.sqrt();
            roots.push(((c - b) + s) / c);
            roots.push(((c - b) - s) / c);
        }
    } else if b != 0.0 {
        any_real = true;
        roots.push((b - a) / b);
    }

    let nonneg: Vec<f64> = roots.iter().copied().filter(|&r| r >= 0.0).collect();
    let region = if !any_real {
        LandscapeRegion::NoRealStationary
    } else if nonneg.is_empty() {
        LandscapeRegion::StationaryNegative
    } else {
        let best = nonneg.iter().map(|&r| eval(r)).fold(f64::NEG_INFINITY, f64::max);
        if eval(0.0) > best {
            LandscapeRegion::VacuumDominates
        } else {
            LandscapeRegion::StationaryDominates
        }
    };
    support_from_candidates(eval, &roots, Some(region))
}

/// Unit normal of the plane through the origin tangent to the coherent
/// curve at `lambda`, with its support value (always zero). These planes
/// sweep out the quadratic-criterion part of the classical boundary.
fn origin_tangent_normal(lambda: f64) -> ([f64; 3], f64) {
    let norm = lambda * lambda / 2.0 + 1.0;
    (
        [
            -lambda * lambda / 2.0 / norm,
            lambda / norm,
            -1.0 / norm,
        ],
        0.0,
    )
}

/// Unit normal of the plane through the vacuum point tangent to the
/// coherent curve at `lambda`, with its support value
/// `e^-lambda lambda^2 / 2` (before normalization). These planes sweep
/// out the tail-criterion part of the classical boundary; their
/// `lambda -> 0` limit is the normalization facet `(1,1,1)/sqrt(3)`.
fn vacuum_tangent_normal(lambda: f64) -> ([f64; 3], f64) {
    let e = (-lambda).exp();
    let a = e * lambda * lambda / 2.0;
    let b = lambda - lambda * lambda / 2.0 - lambda * e;
    let c = e - 1.0 + lambda;
    let norm = (a * a + b * b + c * c).sqrt();
    if norm == 0.0 {
        // lambda = 0 limit.
        let s = 3.0f64.sqrt().recip();
        return ([s, s, s], s);
    }
    ([a / norm, b / norm, c / norm], a / norm)
}

/// Precomputed direction/support table for fast repeated membership
/// queries in a slice.
#[derive(Debug, Clone)]
pub struct SupportTable {
    dim: usize,
    entries: Vec<(Vec<f64>, f64)>,
}

impl SupportTable {
    /// Build a table of `n_dirs` directions for the slice.
    ///
    /// 2D slices use uniform angles. The `(P_0, P_1, P_2)` slice uses a
    /// composite deterministic family: a Fibonacci-sphere background plus
    /// the two analytic tangent-plane normal families that actually
    /// support the curved parts of the boundary, sampled on a log-spaced
    /// `lambda` grid. Ruled boundary sheets subtend a vanishing solid
    /// angle of normal directions, so background sampling alone cannot
    /// reach tight agreement with the exact decision; the sheet normals
    /// restore it. Other 3D slices fall back to Fibonacci directions with
    /// numerical support maximization.
    pub fn new(slice: &Slice, n_dirs: usize) -> Result<Self> {
        if n_dirs == 0 {
            return Err(Error::ParameterDomain {
                name: "n_dirs",
                value: 0.0,
                requirement: ">= 1",
            });
        }
        let mut entries = Vec::with_capacity(n_dirs);
        match slice.dim() {
            2 => {
                for j in 0..n_dirs {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / n_dirs as f64;
                    let sv = f_max_2d(slice, theta)?;
                    entries.push((Direction::Planar { theta }.components(), sv.f_max));
                }
            }
            3 if slice.indices == [0, 1, 2] => {
                let n_fib = n_dirs / 5;
                let n_origin = 2 * n_dirs / 5;
                let n_vacuum = n_dirs - n_fib - n_origin;
                for (dir, sv) in fibonacci_directions(n_fib) {
                    entries.push((dir.components(), sv.f_max));
                }
                for j in 0..n_origin {
                    let lam = log_grid_lambda(j, n_origin);
                    let (n, f) = origin_tangent_normal(lam);
                    entries.push((n.to_vec(), f));
                }
                for j in 0..n_vacuum {
                    let lam = log_grid_lambda(j, n_vacuum);
                    let (n, f) = vacuum_tangent_normal(lam);
                    entries.push((n.to_vec(), f));
                }
            }
            _ => {
                for j in 0..n_dirs {
                    let (theta, phi) = fibonacci_angles(j, n_dirs);
                    let dir = Direction::Spatial { theta, phi };
                    let coeffs = dir.components();
                    let sv = numeric_support(|l| slice_functional(slice, &coeffs, l));
                    entries.push((coeffs, sv.f_max));
                }
            }
        }
        Ok(SupportTable {
            dim: slice.dim(),
            entries,
        })
    }

    /// True iff the point passes `<n, P> <= F_max(n) + slack` for every
    /// tabulated direction.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        if point.len() != self.dim {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, table expects {}",
                point.len(),
                self.dim
            )));
        }
        Ok(self.entries.iter().all(|(n, fmax)| {
            let dot: f64 = n.iter().zip(point).map(|(a, p)| a * p).sum();
            dot <= fmax + MEMBERSHIP_SLACK
        }))
    }
}

/// Log-spaced `lambda` grid over `[1e-4, 1e8]` used for the tangent-plane
/// normal families; covers the tangency parameters of every point in the
/// probability simplex that is resolvable in double precision.
fn log_grid_lambda(j: usize, count: usize) -> f64 {
    let lo: f64 = 1e-4;
    let hi: f64 = 1e8;
    let t = (j as f64 + 0.5) / count as f64;
    lo * (hi / lo).powf(t)
}

/// Spherical angles of the `j`-th of `n` Fibonacci-sphere points.
fn fibonacci_angles(j: usize, n: usize) -> (f64, f64) {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let z = 1.0 - (2.0 * j as f64 + 1.0) / n as f64;
    (z.acos(), golden_angle * j as f64)
}

fn fibonacci_directions(n: usize) -> impl Iterator<Item = (Direction, SupportValue)> {
    (0..n).map(move |j| {
        let (theta, phi) = fibonacci_angles(j, n);
        (Direction::Spatial { theta, phi }, f_max_3d(theta, phi))
    })
}

/// Membership of a point in the classical region of a slice, tested
/// against `n_dirs` sampled supporting half-spaces.
pub fn membership(point: &[f64], slice: &Slice, n_dirs: usize) -> Result<bool> {
    for &p in point {
        if !p.is_finite() || p < -1e-12 {
            return Err(Error::ParameterDomain {
                name: "point",
                value: p,
                requirement: "finite and >= 0",
            });
        }
    }
    if point.iter().sum::<f64>() > 1.0 + 1e-9 {
        return Err(Error::InvalidDistribution(
            "point lies outside the probability simplex".into(),
        ));
    }
    SupportTable::new(slice, n_dirs)?.contains(point)
}

/// Generic 2D half-plane intersection test against an arbitrary support
/// function `theta -> F_max(theta)`: reconstructs the convex hull that
/// the support function describes.
pub fn membership_with_support(
    point: &[f64; 2],
    n_dirs: usize,
    support: impl Fn(f64) -> f64,
) -> bool {
    (0..n_dirs).all(|j| {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_dirs as f64;
        let dot = point[0] * theta.cos() + point[1] * theta.sin();
        dot <= support(theta) + MEMBERSHIP_SLACK
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completeness::decide;
    use rand::{Rng, SeedableRng};

    const E_INV: f64 = 0.36787944117144233;

    fn slice(idx: &[usize]) -> Slice {
        Slice::new(idx).unwrap()
    }

    #[test]
    fn slice_validation() {
        assert!(Slice::new(&[0]).is_err());
        assert!(Slice::new(&[0, 1, 2, 3]).is_err());
        assert!(Slice::new(&[1, 1]).is_err());
        assert!(Slice::new(&[2, 0]).is_err());
        assert!(Slice::new(&[0, 3]).is_ok());
    }

    #[test]
    fn directions_have_unit_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            for d in [
                Direction::Planar { theta },
                Direction::Spatial { theta, phi },
            ] {
                let n: f64 = d.components().iter().map(|c| c * c).sum();
                assert!((n.sqrt() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coherent_curve_reference_points() {
        assert_eq!(coherent_curve(&slice(&[0, 1]), 0.0).unwrap(), vec![1.0, 0.0]);
        let p = coherent_curve(&slice(&[0, 2]), 2.0).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((p[0] - e2).abs() < 1e-16);
        assert!((p[1] - 2.0 * e2).abs() < 1e-15);
        let p = coherent_curve(&slice(&[0, 1, 2]), 1.0).unwrap();
        assert!((p[0] - E_INV).abs() < 1e-16);
        assert!((p[1] - E_INV).abs() < 1e-16);
        assert!((p[2] - E_INV / 2.0).abs() < 1e-16);
        assert_eq!(
            coherent_curve(&slice(&[0, 1, 2]), f64::INFINITY).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert!(coherent_curve(&slice(&[0, 1]), -1.0).is_err());
    }

    #[test]
    fn boundary_relation_vanishes_on_curve() {
        let s01 = slice(&[0, 1]);
        let p = coherent_curve(&s01, 1.0).unwrap();
        assert!(boundary_relation_2d(&s01, &p).unwrap().abs() < 1e-10);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let n = rng.gen_range(0..4usize);
            let m = rng.gen_range(n + 1..n + 4);
            let s = slice(&[n, m]);
            let mu = rng.gen_range(0.05..5.0);
            let p = coherent_curve(&s, mu).unwrap();
            let r = boundary_relation_2d(&s, &p).unwrap();
            assert!(r.abs() < 1e-10, "slice ({n},{m}), mu={mu}: residual {r}");
        }
    }

    #[test]
    fn boundary_relation_equivalent_forms() {
        // On the (P0,P1) curve the relation is P0 e^{P1/P0} = 1.
        for &mu in &[0.2, 1.0, 3.0] {
            let p = coherent_curve(&slice(&[0, 1]), mu).unwrap();
            assert!((p[0] * (p[1] / p[0]).exp() - 1.0).abs() < 1e-12);
        }
        // On the (P0,Pk) curve, Q_k = Q_0 [ln(1/Q_0)]^k.
        for &k in &[2usize, 3, 5] {
            let s = slice(&[0, k]);
            let p = coherent_curve(&s, 1.7).unwrap();
            let q0 = p[0];
            let qk = factorial(k) * p[1];
            assert!((qk - q0 * (1.0 / q0).ln().powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_relation_off_curve_matches_recomputation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(78);
        for _ in 0..100 {
            let n = rng.gen_range(0..3usize);
            let m = rng.gen_range(n + 1..n + 3);
            let s = slice(&[n, m]);
            let p = [rng.gen_range(0.01..0.8), rng.gen_range(0.01..0.5)];
            let r = boundary_relation_2d(&s, &p).unwrap();
            // Independent recomputation in log form.
            let d = (m - n) as f64;
            let qn = factorial(n) * p[0];
            let qm = factorial(m) * p[1];
            let lam = ((qm.ln() - qn.ln()) / d).exp();
            let r2 = (m as f64 / d * qn.ln()).exp() - (-lam + n as f64 / d * qm.ln()).exp();
            assert!(
                (r - r2).abs() <= 1e-12 * (1.0 + r.abs()),
                "({n},{m}) at {p:?}: {r} vs {r2}"
            );
        }
        // Typical off-curve points are seen as such.
        let r = boundary_relation_2d(&slice(&[0, 1]), &[0.5, 0.1]).unwrap();
        assert!(r.abs() > 1e-3);
        assert!(matches!(
            boundary_relation_2d(&slice(&[0, 1]), &[0.5, 0.0]),
            Err(Error::ZeroCoordinate)
        ));
    }

    #[test]
    fn inflection_values_and_degenerate_case() {
        assert!((inflection_p0k(2).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert!((inflection_p0k(3).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!(matches!(inflection_p0k(1), Err(Error::NoInflection)));
    }

    #[test]
    fn inflection_matches_numerical_second_derivative() {
        for k in 2..=6usize {
            let analytic = inflection_p0k(k).unwrap();
            // Fourth-order central second difference of the curve bound,
            // stepped relative to the inflection location.
            let h = 5e-3 * analytic;
            let f = |p: f64| p0k_curve(k, p);
            let d2 = |p: f64| {
                (-f(p - 2.0 * h) + 16.0 * f(p - h) - 30.0 * f(p) + 16.0 * f(p + h)
                    - f(p + 2.0 * h))
                    / (12.0 * h * h)
            };
            assert!(d2(analytic * 0.9) < 0.0, "k={k}: concave side");
            assert!(d2(analytic * 1.1) > 0.0, "k={k}: convex side");
            let root = solve_bracketed(d2, analytic * 0.5, analytic * 1.5, 1e-12).unwrap();
            assert!(
                (root - analytic).abs() < 1e-8,
                "k={k}: numeric {root} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn convex_closure_tangency() {
        for k in 2..=12usize {
            let c = convex_closure_p0k(k).unwrap();
            let inf = inflection_p0k(k).unwrap();
            assert!(
                c.p0_tangent > 0.0 && c.p0_tangent < inf,
                "k={k}: tangent point {} outside (0, {inf})",
                c.p0_tangent
            );
            let slope = p0k_curve_slope(k, c.p0_tangent);
            assert!(
                (c.chord_slope - slope).abs() < 1e-10,
                "k={k}: chord slope {} vs curve slope {slope}",
                c.chord_slope
            );
        }
        assert!(matches!(convex_closure_p0k(1), Err(Error::NoChordNeeded)));
    }

    #[test]
    fn closure_k2_midpoint_classification() {
        let c = convex_closure_p0k(2).unwrap();
        // The k = 2 tangency point satisfies u = 2(1 - e^-u).
        let u = -c.p0_tangent.ln();
        assert!((u - 2.0 * (1.0 - (-u).exp())).abs() < 1e-10);

        let mid = (c.p0_tangent + 1.0) / 2.0;
        let on_chord = c.bound(mid);
        // The closure's chord bridges the non-convex dent of the raw
        // curve bound, so it passes strictly above the curve here.
        assert!(
            on_chord > p0k_curve(2, mid) + 1e-6,
            "chord {on_chord} does not close over the curve {}",
            p0k_curve(2, mid)
        );
        // A point on the chord is classical under the closure; the same
        // P0 with P2 nudged above the chord is not.
        let classical = |p0: f64, p2: f64| p2 <= c.bound(p0) + 1e-12;
        assert!(classical(mid, on_chord));
        assert!(!classical(mid, on_chord + 1e-4));
        // The closure also admits points between curve and chord that the
        // raw curve bound would reject.
        let between = (on_chord + p0k_curve(2, mid)) / 2.0;
        assert!(classical(mid, between));
        assert!(between > p0k_curve(2, mid));
    }

    #[test]
    fn f_max_2d_reference_values() {
        let s01 = slice(&[0, 1]);
        let sv = f_max_2d(&s01, 0.0).unwrap();
        assert!((sv.f_max - 1.0).abs() < 1e-14);
        assert_eq!(sv.maximizers, vec![0.0]);

        let sv = f_max_2d(&s01, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((sv.f_max - E_INV).abs() < 1e-14);
        assert_eq!(sv.maximizers.len(), 1);
        assert!((sv.maximizers[0] - 1.0).abs() < 1e-12);

        // At the switching angle the vacuum endpoint ties with the
        // interior stationary point.
        let t0 = theta0();
        assert!(t0 > 1.25 && t0 < 1.27, "theta0 = {t0}");
        let sv = f_max_2d(&slice(&[0, 2]), t0).unwrap();
        assert_eq!(sv.maximizers.len(), 2, "{:?}", sv.maximizers);
        assert_eq!(sv.maximizers[0], 0.0);
        let lam = lambda_plus_02(t0).unwrap();
        assert!((sv.maximizers[1] - lam).abs() < 1e-10);

        // Just past atan(2) the stationary points are real but the
        // vacuum endpoint still dominates.
        let sv = f_max_2d(&slice(&[0, 2]), 1.2).unwrap();
        assert!((sv.f_max - 1.2f64.cos()).abs() < 1e-14);
        assert_eq!(sv.maximizers, vec![0.0]);
    }

    #[test]
    fn duality_between_closure_and_support_switch() {
        // The support switch angle and the convex-closure tangency point
        // of the (P0,P2) slice describe the same boundary feature.
        let c = convex_closure_p0k(2).unwrap();
        let lam = lambda_plus_02(theta0()).unwrap();
        assert!(
            (lam + c.p0_tangent.ln()).abs() < 1e-8,
            "lambda+ {lam} vs -ln P0t {}",
            -c.p0_tangent.ln()
        );
    }

    #[test]
    fn f_max_2d_closed_form_matches_numeric_fallback() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
        for &idx in &[[0usize, 1], [0, 2]] {
            let s = slice(&idx);
            for _ in 0..60 {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let closed = f_max_2d(&s, theta).unwrap();
                let coeffs = [theta.cos(), theta.sin()];
                let numeric = numeric_support(|l| slice_functional(&s, &coeffs, l));
                assert!(
                    (closed.f_max - numeric.f_max).abs() < 1e-9,
                    "slice {idx:?}, theta={theta}: {} vs {}",
                    closed.f_max,
                    numeric.f_max
                );
            }
        }
    }

    #[test]
    fn f_max_3d_reference_values() {
        // No real stationary points: support sits at the vacuum.
        let sv = f_max_3d(0.1, 0.4);
        assert_eq!(sv.region, Some(LandscapeRegion::NoRealStationary));
        assert!((sv.f_max - 0.1f64.cos()).abs() < 1e-14);
        assert_eq!(sv.maximizers, vec![0.0]);

        // Pure P2 direction: stationary point at lambda = 2.
        let sv = f_max_3d(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        assert_eq!(sv.region, Some(LandscapeRegion::StationaryDominates));
        assert!((sv.f_max - 2.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(sv.maximizers.len(), 1);
        assert!((sv.maximizers[0] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn origin_tangent_directions_have_zero_support_and_double_touch() {
        for &lam in &[0.5, 1.0, 2.0, 5.0] {
            let ([a, b, c], fmax) = origin_tangent_normal(lam);
            assert_eq!(fmax, 0.0);
            let theta = a.acos();
            let phi = c.atan2(b);
            let sv = f_max_3d(theta, phi);
            assert!(sv.f_max.abs() < 1e-12, "lambda={lam}: f_max {}", sv.f_max);
            // Touching set: the tangency parameter and the origin.
            assert!(
                sv.maximizers.iter().any(|&m| (m - lam).abs() < 1e-5),
                "lambda={lam}: maximizers {:?}",
                sv.maximizers
            );
            assert!(sv.maximizers.iter().any(|m| m.is_infinite()));
        }
    }

    #[test]
    fn origin_tangent_family_recovers_quadratic_criterion() {
        // max over the family of <n(lambda), P> is positive exactly when
        // P1^2 - 2 P0 P2 > 0 (for P0 > 0 the maximum sits at P1/P0).
        for &(p0, p1, p2) in &[(0.4, 0.3, 0.05), (0.2, 0.6, 0.1), (0.5, 0.1, 0.2)] {
            let k1 = p1 * p1 - 2.0 * p0 * p2;
            let best = (0..20000)
                .map(|j| {
                    let lam = 20.0 * j as f64 / 20000.0;
                    let ([a, b, c], _) = origin_tangent_normal(lam);
                    a * p0 + b * p1 + c * p2
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(best > 1e-9, k1 > 0.0, "({p0},{p1},{p2}): best {best}, k1 {k1}");
        }
    }

    #[test]
    fn vacuum_tangent_directions_touch_vacuum_and_curve() {
        for &lam in &[0.3, 1.0, 2.5, 6.0] {
            let ([a, b, c], fmax) = vacuum_tangent_normal(lam);
            assert!(((a * a + b * b + c * c).sqrt() - 1.0).abs() < 1e-13);
            // The plane supports both the vacuum and the lambda point.
            let at_vac = a;
            let p = [
                curve_component(0, lam),
                curve_component(1, lam),
                curve_component(2, lam),
            ];
            let at_lam = a * p[0] + b * p[1] + c * p[2];
            assert!((at_vac - fmax).abs() < 1e-14);
            assert!((at_lam - fmax).abs() < 1e-13, "lambda={lam}");
            // And nothing on the curve exceeds it.
            let theta = a.acos();
            let phi = c.atan2(b);
            let sv = f_max_3d(theta, phi);
            assert!((sv.f_max - fmax).abs() < 1e-12, "lambda={lam}");
        }
    }

    #[test]
    fn support_dominates_curve_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let s3 = slice(&[0, 1, 2]);
        for _ in 0..1000 {
            let lam = rng.gen_range(0.0f64..8.0).powi(2);
            let point3 = coherent_curve(&s3, lam).unwrap();
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let sv = f_max_3d(theta, phi);
            let d = Direction::Spatial { theta, phi }.components();
            let dot: f64 = d.iter().zip(&point3).map(|(a, p)| a * p).sum();
            assert!(sv.f_max >= dot - 1e-12, "3D: {dot} > {}", sv.f_max);
            // Equality at each reported finite maximizer.
            for &m in &sv.maximizers {
                let val = if m.is_infinite() {
                    0.0
                } else {
                    let p = coherent_curve(&s3, m).unwrap();
                    d.iter().zip(&p).map(|(a, q)| a * q).sum()
                };
                assert!((val - sv.f_max).abs() <= 1e-10);
            }

            let s2 = slice(&[0, 2]);
            let sv = f_max_2d(&s2, theta).unwrap();
            let p2 = coherent_curve(&s2, lam).unwrap();
            let dot = theta.cos() * p2[0] + theta.sin() * p2[1];
            assert!(sv.f_max >= dot - 1e-12, "2D: {dot} > {}", sv.f_max);
        }
    }

    /// Two-sided derivative jump of F_max in theta, via a small step.
    fn support_kink(s: &Slice, theta: f64, h: f64) -> f64 {
        let f = |t: f64| f_max_2d(s, t).unwrap().f_max;
        ((f(theta + h) + f(theta - h) - 2.0 * f(theta)) / h).abs()
    }

    #[test]
    fn support_smoothness_distinguishes_convexity() {
        let h = 1e-7;
        let s01 = slice(&[0, 1]);
        let s02 = slice(&[0, 2]);
        let t0 = theta0();
        for i in 0..1500 {
            let theta = 0.05 + 1.5 * i as f64 / 1500.0;
            // (P0,P1): continuously differentiable everywhere.
            assert!(
                support_kink(&s01, theta, h) < 1e-6,
                "unexpected (P0,P1) kink at theta={theta}"
            );
            // (P0,P2): differentiable except at the switch angle.
            if (theta - t0).abs() > 1e-3 {
                assert!(
                    support_kink(&s02, theta, h) < 1e-6,
                    "unexpected (P0,P2) kink at theta={theta}"
                );
            }
        }
        assert!(
            support_kink(&s02, t0, h) > 1e-4,
            "missing derivative jump at the switch angle"
        );
    }

    #[test]
    fn membership_reference_points() {
        let s01 = slice(&[0, 1]);
        assert!(membership(&[1.0, 0.0], &s01, 720).unwrap());
        assert!(!membership(&[0.0, 1.0], &s01, 720).unwrap());
        // Fock |1> projected on (P0,P1,P2) is outside as well.
        let s = slice(&[0, 1, 2]);
        assert!(!membership(&[0.0, 1.0, 0.0], &s, 2000).unwrap());
        // Thermal point is comfortably inside.
        let mu = 1.0f64;
        let t = [
            1.0 / (1.0 + mu),
            mu / (1.0 + mu) / (1.0 + mu),
            mu * mu / (1.0 + mu) / (1.0 + mu) / (1.0 + mu),
        ];
        assert!(membership(&t, &s, 2000).unwrap());
    }

    #[test]
    fn membership_agrees_with_exact_decision() {
        let table = SupportTable::new(&slice(&[0, 1, 2]), 5000).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xd1a1);
        let mut outside_band = 0;
        let mut tried = 0;
        while outside_band < 1000 && tried < 100_000 {
            tried += 1;
            let p0 = rng.gen_range(0.0..1.0);
            let p1 = rng.gen_range(0.0..1.0);
            let p2 = rng.gen_range(0.0..1.0);
            if p0 + p1 + p2 > 1.0 {
                continue;
            }
            let v = decide(p0, p1, p2).unwrap();
            // Skip the boundary band where direction sampling cannot be
            // expected to match the exact decision.
            if v.k1.abs() <= 1e-6 || (v.kinf2 - 1.0).abs() <= 1e-6 {
                continue;
            }
            outside_band += 1;
            let inside = table.contains(&[p0, p1, p2]).unwrap();
            assert_eq!(
                inside, v.classical,
                "({p0},{p1},{p2}): membership {inside}, decision {:?}",
                v
            );
        }
        assert_eq!(outside_band, 1000, "not enough samples outside the band");
    }

    #[test]
    fn segment_union_support_reconstructs_triangle() {
        // Support function of {(t,0)} u {(0,t)}, t in [0,1]: its convex
        // hull is the triangle (0,0),(1,0),(0,1).
        let support = |theta: f64| theta.cos().max(theta.sin()).max(0.0);
        let inside_triangle =
            |x: f64, y: f64| x >= -1e-12 && y >= -1e-12 && x + y <= 1.0 + 1e-12;
        for i in 0..=40 {
            for j in 0..=40 {
                let x = -0.2 + 1.4 * i as f64 / 40.0;
                let y = -0.2 + 1.4 * j as f64 / 40.0;
                // Stay clear of the triangle edges where finite direction
                // sampling rounds the corners.
                let edge_dist = [
                    x.abs(),
                    y.abs(),
                    (x + y - 1.0).abs() / 2.0f64.sqrt(),
                ]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
                if edge_dist < 1e-3 {
                    continue;
                }
                let got = membership_with_support(&[x, y], 1440, &support);
                assert_eq!(
                    got,
                    inside_triangle(x, y),
                    "({x},{y}): membership {got}"
                );
            }
        }
    }
}
