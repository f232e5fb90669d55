//! Wigner-function and regularized P-function baselines, used to
//! contrast phase-space negativity with the Fock-probability criteria.
//!
//! Conventions: a phase-space point is `z = x + i p`; the Fock Wigner
//! functions are `W_k(z) = ((-1)^k / pi) e^{-|z|^2} L_k(2 |z|^2)` and a
//! coherent state sits at `z = sqrt(2) alpha`. The regularized
//! P-functions follow the `d^2 alpha / pi` convention of their source
//! formulas (they integrate to `pi`).

use num_complex::Complex64;
use serde::Serialize;

use crate::dist::FockDistribution;
use crate::error::{Error, Result};
use crate::numeric::golden_min;

/// Minima below `-NEGATIVITY_TOL` count as genuine negativity.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Phase-average quadrature refinement target.
pub const PHASE_AVERAGE_TOL: f64 = 1e-9;

/// Documented numerical floor for the thermal regularization strength;
/// below it the phase-averaged P-function loses precision.
pub const P_FUNCTION_NBAR_FLOOR: f64 = 1e-3;

const PI: f64 = std::f64::consts::PI;

/// A point of phase space, `z = x + i p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("p", p)] {
            if !v.is_finite() {
                return Err(Error::ParameterDomain {
                    name: if name == "x" { "x" } else { "p" },
                    value: v,
                    requirement: "finite",
                });
            }
        }
        Ok(PhasePoint { x, p })
    }

    pub const ORIGIN: PhasePoint = PhasePoint { x: 0.0, p: 0.0 };

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.p)
    }

    pub fn abs2(self) -> f64 {
        self.x * self.x + self.p * self.p
    }
}

/// All Laguerre values `L_0(t) ... L_n(t)` by the three-term recurrence
/// `L_{k+1} = ((2k + 1 - t) L_k - k L_{k-1}) / (k + 1)`.
fn laguerre_all(n: usize, t: f64) -> Vec<f64> {
    let mut l = Vec::with_capacity(n + 1);
    l.push(1.0);
    if n == 0 {
        return l;
    }
    l.push(1.0 - t);
    for k in 1..n {
        let next = ((2.0 * k as f64 + 1.0 - t) * l[k] - k as f64 * l[k - 1]) / (k as f64 + 1.0);
        l.push(next);
    }
    l
}

/// Wigner function of the Fock state `|k>` at `z`.
pub fn wigner_fock(k: usize, z: PhasePoint) -> f64 {
    let t = 2.0 * z.abs2();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign / PI * (-z.abs2()).exp() * laguerre_all(k, t)[k]
}

/// Wigner function of the coherent state `|alpha>` at `z`: a Gaussian of
/// height `1/pi` centered at `sqrt(2) alpha`.
pub fn wigner_coherent(alpha: Complex64, z: PhasePoint) -> f64 {
    let d = z.to_complex() - std::f64::consts::SQRT_2 * alpha;
    (-d.norm_sqr()).exp() / PI
}

/// Truncated diagonal Wigner sum with its remainder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerValue {
    pub value: f64,
    /// Rigorous bound on the truncation remainder: `tail mass / pi`,
    /// since every `|W_k| <= 1/pi`.
    pub error_bound: f64,
    /// Set when the distribution's truncated tail exceeds `1e-12` and the
    /// value should not be trusted to tight tolerances.
    pub accuracy_warning: bool,
}

/// Wigner function of a Fock-diagonal state: `sum_k P_k W_k(z)`.
pub fn wigner_diagonal(dist: &FockDistribution, z: PhasePoint) -> WignerValue {
    let t = 2.0 * z.abs2();
    let gauss = (-z.abs2()).exp() / PI;
    let probs = dist.probs();
    let lag = laguerre_all(probs.len().saturating_sub(1), t);
    let mut value = 0.0;
    for (k, (&p, &l)) in probs.iter().zip(&lag).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        value += p * sign * l;
    }
    let tail = dist.tail_mass();
    WignerValue {
        value: value * gauss,
        error_bound: tail / PI,
        accuracy_warning: tail >= 1e-12,
    }
}

/// Wigner function of the single-photon-added coherent state at `z`:
/// `(2 |z - alpha/sqrt(2)|^2 - 1) / (pi (1 + |alpha|^2)) e^{-|z - sqrt(2) alpha|^2}`.
/// Its zero set is the circle `|z - alpha/sqrt(2)| = 1/sqrt(2)`.
pub fn wigner_boson_added_coherent(alpha: Complex64, z: PhasePoint) -> f64 {
    let zc = z.to_complex();
    let near = zc - alpha / std::f64::consts::SQRT_2;
    let far = zc - std::f64::consts::SQRT_2 * alpha;
    (2.0 * near.norm_sqr() - 1.0) / (PI * (1.0 + alpha.norm_sqr())) * (-far.norm_sqr()).exp()
}

/// A state whose Wigner function this module can evaluate pointwise.
#[derive(Debug, Clone)]
pub enum WignerState {
    /// Fock-diagonal state (rotationally symmetric Wigner function).
    Diagonal(FockDistribution),
    Coherent(Complex64),
    BosonAddedCoherent(Complex64),
    /// `p`-weighted photon-added coherent state mixed with the bare
    /// coherent state of the same amplitude.
    MixedBosonAddedCoherent { alpha: Complex64, p: f64 },
}

impl WignerState {
    pub fn evaluate(&self, z: PhasePoint) -> f64 {
        match self {
            WignerState::Diagonal(d) => wigner_diagonal(d, z).value,
            WignerState::Coherent(a) => wigner_coherent(*a, z),
            WignerState::BosonAddedCoherent(a) => wigner_boson_added_coherent(*a, z),
            WignerState::MixedBosonAddedCoherent { alpha, p } => {
                p * wigner_boson_added_coherent(*alpha, z)
                    + (1.0 - p) * wigner_coherent(*alpha, z)
            }
        }
    }

    /// Rotationally symmetric states reduce the minimum search to a
    /// radial scan.
    pub fn is_radial(&self) -> bool {
        match self {
            WignerState::Diagonal(_) => true,
            WignerState::Coherent(a) | WignerState::BosonAddedCoherent(a) => a.norm_sqr() == 0.0,
            WignerState::MixedBosonAddedCoherent { alpha, .. } => alpha.norm_sqr() == 0.0,
        }
    }
}

/// Outcome of a Wigner minimum search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityReport {
    pub min_value: f64,
    pub argmin: PhasePoint,
    pub negative: bool,
}

impl NegativityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("negativity report serialization cannot fail")
    }
}

/// Minimum of the Wigner function over a disc of the given radius:
/// a radial scan for rotationally symmetric states, otherwise a square
/// grid, refined from the best cell by local 1D/2D minimization.
pub fn min_wigner(state: &WignerState, radius: f64, grid_n: usize) -> Result<NegativityReport> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::ParameterDomain {
            name: "radius",
            value: radius,
            requirement: "> 0 and finite",
        });
    }
    if grid_n < 3 {
        return Err(Error::ParameterDomain {
            name: "grid_n",
            value: grid_n as f64,
            requirement: ">= 3",
        });
    }

    let (min_value, argmin) = if state.is_radial() {
        let f = |r: f64| state.evaluate(PhasePoint { x: r, p: 0.0 });
        let mut best = (f(0.0), 0usize);
        let values: Vec<f64> = (0..grid_n)
            .map(|i| f(radius * i as f64 / (grid_n - 1) as f64))
            .collect();
        for (i, &v) in values.iter().enumerate() {
            if v < best.0 {
                best = (v, i);
            }
        }
        let lo = radius * best.1.saturating_sub(1) as f64 / (grid_n - 1) as f64;
        let hi = radius * (best.1 + 1).min(grid_n - 1) as f64 / (grid_n - 1) as f64;
        let (r, v) = golden_min(f, lo, hi, 1e-12);
        if v < best.0 {
            (v, PhasePoint { x: r, p: 0.0 })
        } else {
            (
                best.0,
                PhasePoint {
                    x: radius * best.1 as f64 / (grid_n - 1) as f64,
                    p: 0.0,
                },
            )
        }
    } else {
        let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (grid_n - 1) as f64;
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for i in 0..grid_n {
            for j in 0..grid_n {
                let v = state.evaluate(PhasePoint {
                    x: coord(i),
                    p: coord(j),
                });
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        // Coordinate-descent refinement around the best cell, kept inside
        // the requested search box.
        let cell = 2.0 * radius / (grid_n - 1) as f64;
        let (mut x, mut p) = (coord(best.1), coord(best.2));
        let mut v = best.0;
        for _ in 0..4 {
            let (nx, vx) = golden_min(
                |t| state.evaluate(PhasePoint { x: t, p }),
                (x - cell).max(-radius),
                (x + cell).min(radius),
                1e-12,
            );
            if vx < v {
                v = vx;
                x = nx;
            }
            let (np, vp) = golden_min(
                |t| state.evaluate(PhasePoint { x, p: t }),
                (p - cell).max(-radius),
                (p + cell).min(radius),
                1e-12,
            );
            if vp < v {
                v = vp;
                p = np;
            }
        }
        (v, PhasePoint { x, p })
    };

    Ok(NegativityReport {
        min_value,
        argmin,
        negative: min_value < -NEGATIVITY_TOL,
    })
}

/// Regularized P-function of the single-photon-added thermal state:
/// `(1/nbar^3) (|alpha|^2 (1 + nbar) - nbar) e^{-|alpha|^2 / nbar}`.
/// Negative exactly on `|alpha|^2 < nbar / (1 + nbar)`.
pub fn p_function_boson_added_thermal(nbar: f64, alpha: Complex64) -> Result<f64> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(Error::ParameterDomain {
            name: "nbar",
            value: nbar,
            requirement: "> 0 (thermal regularization)",
        });
    }
    let a2 = alpha.norm_sqr();
    Ok((a2 * (1.0 + nbar) - nbar) / (nbar * nbar * nbar) * (-a2 / nbar).exp())
}

/// Thermal P-function companion kernel in the same normalization
/// (integrates to `pi`).
fn p_function_thermal(nbar: f64, alpha: Complex64) -> f64 {
    (-alpha.norm_sqr() / nbar).exp() / nbar
}

/// Phase-averaged P-function value with quadrature metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseAveraged {
    pub value: f64,
    /// Difference between the last two quadrature refinements.
    pub error_estimate: f64,
    /// Set when `nbar` sits below the documented precision floor.
    pub precision_warning: bool,
}

/// Phase average of the displaced mixture kernel
/// `p * P_added(alpha - sqrt(mu) e^{i phi}) + (1-p) * P_thermal(...)`
/// over `phi`, by trapezoid rule with doubled node counts until two
/// refinements agree to the requested tolerance (the integrand is smooth
/// and periodic, so the rule converges spectrally).
pub fn p_function_phase_averaged(
    nbar: f64,
    mu: f64,
    p: f64,
    alpha: Complex64,
) -> Result<PhaseAveraged> {
    p_function_phase_averaged_with(nbar, mu, p, alpha, PHASE_AVERAGE_TOL, 1 << 20)
}

/// [`p_function_phase_averaged`] with explicit quadrature controls.
pub fn p_function_phase_averaged_with(
    nbar: f64,
    mu: f64,
    p: f64,
    alpha: Complex64,
    tol: f64,
    max_nodes: usize,
) -> Result<PhaseAveraged> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(Error::ParameterDomain {
            name: "nbar",
            value: nbar,
            requirement: "> 0 (thermal regularization)",
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterDomain {
            name: "p",
            value: p,
            requirement: "in [0, 1]",
        });
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::ParameterDomain {
            name: "mu",
            value: mu,
            requirement: ">= 0 and finite",
        });
    }

    let kernel = |beta: Complex64| -> f64 {
        let added = (beta.norm_sqr() * (1.0 + nbar) - nbar) / (nbar * nbar * nbar)
            * (-beta.norm_sqr() / nbar).exp();
        p * added + (1.0 - p) * p_function_thermal(nbar, beta)
    };
    let displacement = mu.sqrt();
    let average = |n: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            let phi = std::f64::consts::TAU * j as f64 / n as f64;
            let beta = alpha - displacement * Complex64::new(phi.cos(), phi.sin());
            acc += kernel(beta);
        }
        acc / n as f64
    };

    if mu == 0.0 {
        // The integrand is constant in phi.
        return Ok(PhaseAveraged {
            value: kernel(alpha),
            error_estimate: 0.0,
            precision_warning: nbar < P_FUNCTION_NBAR_FLOOR,
        });
    }

    let mut n = 16usize;
    let mut prev = average(n);
    let mut diff = f64::INFINITY;
    while n * 2 <= max_nodes {
        n *= 2;
        let next = average(n);
        diff = (next - prev).abs();
        prev = next;
        if diff < tol {
            break;
        }
    }
    Ok(PhaseAveraged {
        value: prev,
        error_estimate: if diff.is_finite() { diff } else { 0.0 },
        precision_warning: nbar < P_FUNCTION_NBAR_FLOOR,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{fock_dist, mix, noisy_fock_dist, thermal_dist};
    use rand::{Rng, SeedableRng};

    fn zp(x: f64, p: f64) -> PhasePoint {
        PhasePoint { x, p }
    }

    #[test]
    fn fock_wigner_reference_values() {
        assert!((wigner_fock(0, PhasePoint::ORIGIN) - 1.0 / PI).abs() < 1e-16);
        assert!((wigner_fock(1, PhasePoint::ORIGIN) + 1.0 / PI).abs() < 1e-16);
        // Degree-5 Laguerre polynomial written out, evaluated by Horner.
        let z = zp(1.3, 0.0);
        let t = 2.0 * z.abs2();
        let l5 = 1.0
            + t * (-5.0 + t * (5.0 + t * (-5.0 / 3.0 + t * (5.0 / 24.0 + t * (-1.0 / 120.0)))));
        let direct = -1.0 / PI * (-z.abs2()).exp() * l5;
        assert!((wigner_fock(5, z) - direct).abs() < 1e-12);
    }

    #[test]
    fn coherent_wigner_is_a_positive_gaussian() {
        assert!((wigner_coherent(Complex64::new(0.0, 0.0), PhasePoint::ORIGIN) - 1.0 / PI).abs() < 1e-16);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let alpha = Complex64::new(0.7, -0.4);
        for _ in 0..300 {
            let z = zp(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            assert!(wigner_coherent(alpha, z) >= 0.0);
        }
        // Peak value 1/pi at z = sqrt(2) alpha.
        let peak = zp(std::f64::consts::SQRT_2 * 0.7, std::f64::consts::SQRT_2 * -0.4);
        assert!((wigner_coherent(alpha, peak) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn diagonal_wigner_reference_values() {
        // Half vacuum, half single photon: exact zero at the origin.
        let m = mix(&[
            (0.5, fock_dist(0, 4).unwrap()),
            (0.5, fock_dist(1, 4).unwrap()),
        ])
        .unwrap();
        let w = wigner_diagonal(&m, PhasePoint::ORIGIN);
        assert!(w.value.abs() < 1e-16);
        assert!(!w.accuracy_warning);

        // Noisy single photon at unit noise: alternating sum 3 e^-2 / pi.
        let d = noisy_fock_dist(1, 1.0, 45).unwrap();
        let w = wigner_diagonal(&d, PhasePoint::ORIGIN);
        let expected = 3.0 * (-2.0f64).exp() / PI;
        assert!(
            (w.value - expected).abs() < 1e-12 + w.error_bound,
            "{} vs {expected}",
            w.value
        );
        assert!(!w.accuracy_warning, "tail too heavy: {}", w.error_bound);
    }

    #[test]
    fn diagonal_wigner_truncation_metadata() {
        // A deliberately short thermal truncation carries a warning and
        // an honest remainder bound.
        let coarse = thermal_dist(1.0, 8).unwrap();
        let fine = thermal_dist(1.0, 60).unwrap();
        let z = zp(0.4, -0.2);
        let wc = wigner_diagonal(&coarse, z);
        let wf = wigner_diagonal(&fine, z);
        assert!(wc.accuracy_warning);
        assert!(!wf.accuracy_warning);
        assert!(
            (wc.value - wf.value).abs() <= wc.error_bound,
            "refinement moved more than the bound: {} vs {}",
            (wc.value - wf.value).abs(),
            wc.error_bound
        );
    }

    #[test]
    fn thermal_wigner_is_positive() {
        let d = thermal_dist(1.0, 60).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let z = zp(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let w = wigner_diagonal(&d, z);
            assert!(w.value >= -w.error_bound, "thermal negative at {z:?}");
        }
    }

    #[test]
    fn added_coherent_wigner_closed_form() {
        // alpha = 0 is the single-photon Wigner function.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..1000 {
            let z = zp(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let a = wigner_boson_added_coherent(Complex64::new(0.0, 0.0), z);
            let b = wigner_fock(1, z);
            assert!((a - b).abs() < 1e-14, "at {z:?}: {a} vs {b}");
        }
        // Zero circle |z - alpha/sqrt2| = 1/sqrt2.
        let alpha = Complex64::new(0.9, 0.3);
        for k in 0..12 {
            let phi = std::f64::consts::TAU * k as f64 / 12.0;
            let c = alpha / std::f64::consts::SQRT_2
                + Complex64::new(phi.cos(), phi.sin()) / std::f64::consts::SQRT_2;
            let w = wigner_boson_added_coherent(alpha, zp(c.re, c.im));
            assert!(w.abs() < 1e-15, "nonzero on the zero circle: {w}");
        }
        // Direct substitution at alpha = 1, z = sqrt2.
        let w = wigner_boson_added_coherent(
            Complex64::new(1.0, 0.0),
            zp(std::f64::consts::SQRT_2, 0.0),
        );
        assert!(w.abs() < 1e-15);
    }

    /// Trapezoid integral of a Wigner evaluator over a centered square.
    fn grid_integral(eval: impl Fn(PhasePoint) -> f64, radius: f64, n: usize) -> f64 {
        let h = 2.0 * radius / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                let wp = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                acc += wx
                    * wp
                    * eval(zp(-radius + h * i as f64, -radius + h * j as f64));
            }
        }
        acc * h * h
    }

    #[test]
    fn wigner_functions_are_normalized() {
        let states: Vec<(WignerState, f64)> = vec![
            (WignerState::Diagonal(fock_dist(0, 3).unwrap()), 6.0),
            (WignerState::Diagonal(fock_dist(1, 3).unwrap()), 6.0),
            (WignerState::Diagonal(fock_dist(3, 5).unwrap()), 7.0),
            (WignerState::Coherent(Complex64::new(0.8, 0.3)), 8.0),
            (WignerState::BosonAddedCoherent(Complex64::new(1.0, 0.0)), 8.0),
        ];
        for (state, radius) in states {
            // Radius large enough that the boundary values are < 1e-10.
            for k in 0..40 {
                let phi = std::f64::consts::TAU * k as f64 / 40.0;
                let b = state.evaluate(zp(radius * phi.cos(), radius * phi.sin()));
                assert!(b.abs() < 1e-10, "boundary not negligible: {b}");
            }
            let total = grid_integral(|z| state.evaluate(z), radius, 601);
            assert!(
                (total - 1.0).abs() < 1e-6,
                "normalization {total} for {state:?}"
            );
        }
    }

    #[test]
    fn min_wigner_reference_cases() {
        let fock1 = WignerState::Diagonal(fock_dist(1, 3).unwrap());
        let r = min_wigner(&fock1, 6.0, 2001).unwrap();
        assert!((r.min_value + 1.0 / PI).abs() < 1e-12);
        assert!(r.argmin.abs2() < 1e-10);
        assert!(r.negative);

        let coh = WignerState::Coherent(Complex64::new(0.5, 0.0));
        let r = min_wigner(&coh, 6.0, 201).unwrap();
        assert!(!r.negative, "coherent state has no negativity: {r:?}");

        assert!(min_wigner(&coh, 0.0, 201).is_err());
        assert!(min_wigner(&coh, 6.0, 2).is_err());
    }

    #[test]
    fn mixed_added_coherent_negativity_threshold() {
        // Even mixing shows no negativity for any tested displacement...
        for &mu in &[0.5f64, 1.0, 2.0] {
            let state = WignerState::MixedBosonAddedCoherent {
                alpha: Complex64::new(mu.sqrt(), 0.0),
                p: 0.5,
            };
            let r = min_wigner(&state, 6.0, 201).unwrap();
            assert!(!r.negative, "mu={mu}: unexpected negativity {r:?}");
        }
        // ...while heavily weighting the added component does.
        let state = WignerState::MixedBosonAddedCoherent {
            alpha: Complex64::new(0.5f64.sqrt(), 0.0),
            p: 0.95,
        };
        let r = min_wigner(&state, 6.0, 201).unwrap();
        assert!(r.negative, "p=0.95 should be negative: {r:?}");
        // Origin value known in closed form: (p (mu-1)/(1+mu) + 1 - p) e^{-2mu}/pi.
        let mu = 0.5f64;
        let w0 = (0.95 * (mu - 1.0) / (1.0 + mu) + 0.05) * (-2.0 * mu).exp() / PI;
        assert!(r.min_value <= w0 + 1e-12);
        assert!(w0 < 0.0);
    }

    #[test]
    fn added_thermal_p_function_sign_structure() {
        assert!(p_function_boson_added_thermal(0.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(p_function_boson_added_thermal(-1.0, Complex64::new(0.0, 0.0)).is_err());
        for &nbar in &[0.05, 0.3, 1.0, 4.0] {
            let at0 = p_function_boson_added_thermal(nbar, Complex64::new(0.0, 0.0)).unwrap();
            assert!(
                (at0 + 1.0 / (nbar * nbar)).abs() < 1e-12 * (1.0 / (nbar * nbar)),
                "origin value {at0}"
            );
            // Zero of the linear factor.
            let r = (nbar / (1.0 + nbar)).sqrt();
            let v = p_function_boson_added_thermal(nbar, Complex64::new(r, 0.0)).unwrap();
            assert!(v.abs() < 1e-12 / (nbar * nbar));
            // Positive outside.
            let v = p_function_boson_added_thermal(nbar, Complex64::new(2.0 * r + 0.1, 0.0)).unwrap();
            assert!(v > 0.0);
        }
        // Direct substitution check.
        let nbar = 0.1f64;
        let direct = (1.0 * (1.0 + nbar) - nbar) / nbar.powi(3) * (-1.0 / nbar).exp();
        let got = p_function_boson_added_thermal(nbar, Complex64::new(1.0, 0.0)).unwrap();
        assert!(direct > 0.0);
        assert!((got - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn phase_average_reduces_to_kernel_at_zero_displacement() {
        let alpha = Complex64::new(0.6, 0.2);
        let nbar = 0.2;
        for &p in &[0.0, 0.4, 1.0] {
            let avg = p_function_phase_averaged(nbar, 0.0, p, alpha).unwrap();
            let direct = p * p_function_boson_added_thermal(nbar, alpha).unwrap()
                + (1.0 - p) * (-alpha.norm_sqr() / nbar).exp() / nbar;
            assert!((avg.value - direct).abs() < 1e-14);
            assert_eq!(avg.error_estimate, 0.0);
            assert!(!avg.precision_warning);
        }
    }

    #[test]
    fn phase_average_quadrature_converges() {
        let alpha = Complex64::new(0.9, 0.0);
        let coarse =
            p_function_phase_averaged_with(0.05, 1.0, 0.3, alpha, 1e-9, 1 << 20).unwrap();
        let fine =
            p_function_phase_averaged_with(0.05, 1.0, 0.3, alpha, 1e-12, 1 << 22).unwrap();
        assert!(
            (coarse.value - fine.value).abs() < 1e-8,
            "{} vs {}",
            coarse.value,
            fine.value
        );
        assert!(coarse.error_estimate < 1e-9);
    }

    #[test]
    fn phase_averaged_negativity_examples() {
        // Light admixture of the added component stays negative
        // somewhere on the radial scan.
        let scan_min = |nbar: f64, mu: f64, p: f64| -> f64 {
            let mut m = f64::INFINITY;
            for i in 0..=400 {
                let r = 4.0 * i as f64 / 400.0;
                let v = p_function_phase_averaged(nbar, mu, p, Complex64::new(r, 0.0))
                    .unwrap()
                    .value;
                m = m.min(v);
            }
            m
        };
        let m = scan_min(0.01, 1.0, 0.05);
        assert!(m < -1e-6, "p=0.05, mu=1: min {m}");

        // Pure added component: negativity arises near |alpha|^2 = mu as
        // the regularization weakens.
        let mu = 0.5;
        let v = p_function_phase_averaged(0.005, mu, 1.0, Complex64::new(mu.sqrt(), 0.0))
            .unwrap();
        assert!(v.value < 0.0, "p=1, mu=0.5: value {}", v.value);

        // Below the documented floor the result carries a warning.
        let v = p_function_phase_averaged(5e-4, 0.5, 0.5, Complex64::new(0.5, 0.0)).unwrap();
        assert!(v.precision_warning);
    }

    #[test]
    fn negativity_report_serialization() {
        let fock1 = WignerState::Diagonal(fock_dist(1, 3).unwrap());
        let r = min_wigner(&fock1, 6.0, 801).unwrap();
        let text = r.to_json();
        assert!(text.starts_with("{\"min_value\":"));
        assert!(text.contains("\"argmin\":{\"x\":"));
        assert!(text.contains("\"negative\":true"));
    }
}
