//! Fock-basis photon-number distributions: the reduced probability vectors
//! `(P_0, ..., P_N)` that every criterion in this crate consumes, plus
//! generators for the state families used throughout.

use crate::error::{Error, Result};
use crate::numeric::{binomial, expm, factorial, falling};

/// Tail mass below which a generated vector is considered complete.
const TAIL_NEGLIGIBLE: f64 = 1e-15;
/// Slack allowed above exact normalization (accumulated rounding).
const SUM_SLACK: f64 = 1e-12;
/// A non-truncated vector must be normalized to this accuracy.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Probabilities `P_k` of detecting `k` photons, `k = 0..=N`.
///
/// `truncated` records whether mass beyond the last entry was cut off; it
/// gates normalization checks and tail-error bookkeeping downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    probs: Vec<f64>,
    truncated: bool,
}

impl FockDistribution {
    /// Validate and wrap a probability vector.
    pub fn new(probs: Vec<f64>, truncated: bool) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        let mut sum = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "entry {k} = {p} is not a finite nonnegative number"
                )));
            }
            sum += p;
        }
        if sum > 1.0 + SUM_SLACK {
            return Err(Error::InvalidDistribution(format!(
                "total probability {sum} exceeds 1"
            )));
        }
        if !truncated && (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "vector marked complete but sums to {sum}"
            )));
        }
        Ok(Self { probs, truncated })
    }

    /// Wrap a generated vector, deciding `truncated` from the missing mass.
    fn from_generated(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        Self::new(probs, 1.0 - sum >= TAIL_NEGLIGIBLE)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest photon number carried by the vector.
    pub fn max_index(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Probability mass not represented by the stored entries.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.probs.iter().sum::<f64>()).max(0.0)
    }

    /// Factorial weights `Q_k = k! P_k`.
    pub fn factorial_weights(&self) -> FactorialWeights {
        FactorialWeights::from_distribution(self)
    }

    /// Serialize with deterministic field order and 17 significant digits.
    pub fn to_json(&self) -> String {
        self.to_json_with_family(None, &[])
    }

    /// Serialization carrying optional provenance of the generating family.
    pub fn to_json_with_family(&self, family: Option<&str>, params: &[(&str, f64)]) -> String {
        use std::fmt::Write;
        let mut out = String::with_capacity(32 * self.probs.len() + 64);
        out.push_str("{\"probs\":[");
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{p:.16e}").unwrap();
        }
        write!(out, "],\"truncated\":{}", self.truncated).unwrap();
        if let Some(name) = family {
            write!(out, ",\"family\":\"{name}\"").unwrap();
            out.push_str(",\"params\":{");
            for (i, (key, value)) in params.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "\"{key}\":{value:.16e}").unwrap();
            }
            out.push('}');
        }
        out.push('}');
        out
    }

    /// Parse the JSON emitted by [`to_json`]; unknown fields are ignored.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Record {
            probs: Vec<f64>,
            truncated: bool,
        }
        let record: Record =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(record.probs, record.truncated)
    }
}

/// Factorial weights `Q_k = k! P_k`; products of these are what the
/// multiplicative criteria compare.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialWeights {
    q: Vec<f64>,
}

impl FactorialWeights {
    pub fn from_distribution(dist: &FockDistribution) -> Self {
        let q = dist
            .probs()
            .iter()
            .enumerate()
            .map(|(k, &p)| if p == 0.0 { 0.0 } else { factorial(k) * p })
            .collect();
        Self { q }
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `Q_k`, with an index check suitable for criterion evaluation.
    pub fn get(&self, k: usize) -> Result<f64> {
        self.q
            .get(k)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: k,
                len: self.q.len(),
            })
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            requirement: "finite and >= 0",
        })
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            requirement: "within [0, 1]",
        })
    }
}

/// `e^{-mu} mu^k / k!` for `k = 0..=n_max`, by upward recurrence.
fn poisson_probs(mu: f64, n_max: usize) -> Vec<f64> {
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = (-mu).exp();
    for k in 0..=n_max {
        probs.push(p);
        p *= mu / (k + 1) as f64;
    }
    probs
}

/// Coherent state with mean photon number `mu`: `P_k = e^{-mu} mu^k / k!`.
pub fn coherent_dist(mu: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    FockDistribution::from_generated(poisson_probs(mu, n_max))
}

/// Number state `|n>`.
pub fn fock_dist(n: usize, n_max: usize) -> Result<FockDistribution> {
    if n > n_max {
        return Err(Error::ParameterDomain {
            name: "n",
            value: n as f64,
            requirement: "n <= n_max",
        });
    }
    let mut probs = vec![0.0; n_max + 1];
    probs[n] = 1.0;
    FockDistribution::new(probs, false)
}

/// Thermal state with mean photon number `mu`: `P_k = mu^k / (1+mu)^{k+1}`.
pub fn thermal_dist(mu: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    let ratio = mu / (1.0 + mu);
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut p = 1.0 / (1.0 + mu);
    for _ in 0..=n_max {
        probs.push(p);
        p *= ratio;
    }
    FockDistribution::from_generated(probs)
}

/// Matrix element sum for a displaced number state: with `K = max(j,k)` and
/// `N = min(j,k)`, returns `sum_i (-mu)^i fall(K, N-i) C(N, i)`.
fn displaced_number_poly(big: usize, small: usize, mu: f64) -> f64 {
    let mut c = 0.0;
    let mut mu_pow = 1.0;
    for i in 0..=small {
        c += mu_pow * falling(big, small - i) * binomial(small, i);
        mu_pow *= -mu;
    }
    c
}

/// Number state `|k>` displaced by `sqrt(mu)`: Poissonian noise on top of a
/// Fock state. `P_j = e^{-mu} mu^{|j-k|} c_{j,k}^2 / (j! k!)` with the
/// polynomial `c` above; the `mu = 0` limit is the bare number state.
pub fn noisy_fock_dist(k: usize, mu: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    if mu == 0.0 {
        return fock_dist(k, n_max);
    }
    let top = n_max.max(k);
    let pois = poisson_probs(mu, top);
    let mut probs = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        let (big, small) = if j >= k { (j, k) } else { (k, j) };
        let c = displaced_number_poly(big, small, mu);
        probs.push(pois[big] * c * c / (mu.powi(small as i32) * factorial(small)));
    }
    FockDistribution::from_generated(probs)
}

/// Coherent state with `ell` additional photons:
/// `P_k ∝ e^{-mu} mu^{k-ell} k! / ((k-ell)!)^2`, normalized analytically.
pub fn boson_added_coherent_dist(mu: f64, ell: usize, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    if ell == 0 {
        return Err(Error::ParameterDomain {
            name: "ell",
            value: 0.0,
            requirement: ">= 1",
        });
    }
    if mu == 0.0 {
        return fock_dist(ell, n_max);
    }
    // Normalization: sum_n Pois(n; mu) (n+ell)!/n! = sum_i (ell!)^2 mu^i / ((ell-i)! (i!)^2).
    let mut norm = 0.0;
    let mut mu_pow = 1.0;
    for i in 0..=ell {
        norm += factorial(ell) * factorial(ell) / (factorial(ell - i) * factorial(i) * factorial(i))
            * mu_pow;
        mu_pow *= mu;
    }
    let pois = poisson_probs(mu, n_max);
    let mut probs = vec![0.0; n_max + 1];
    for k in ell..=n_max {
        probs[k] = pois[k - ell] * falling(k, ell) / norm;
    }
    FockDistribution::from_generated(probs)
}

/// Poissonian state with one photon added with probability `p`:
/// `P_k = Pois(k; mu) [p k^2 / (mu (mu+1)) + (1-p)]`.
pub fn prob_boson_added_coherent_dist(mu: f64, p: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    check_unit_interval("p", p)?;
    if mu == 0.0 {
        // Limit: the added branch becomes a single photon.
        let mut probs = vec![0.0; n_max.max(1) + 1];
        probs[0] = 1.0 - p;
        probs[1] = p;
        probs.truncate(n_max + 1);
        return FockDistribution::new(probs, p > 0.0 && n_max == 0);
    }
    let pois = poisson_probs(mu, n_max);
    let weight = p / (mu * (mu + 1.0));
    let probs = pois
        .iter()
        .enumerate()
        .map(|(k, &q)| q * ((k * k) as f64 * weight + (1.0 - p)))
        .collect();
    FockDistribution::from_generated(probs)
}

/// Thermal state with one added photon: `P_k = k mu^{k-1} / (1+mu)^{k+1}`.
pub fn boson_added_thermal_dist(mu: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    if mu == 0.0 {
        return fock_dist(1, n_max.max(1)).and_then(|d| {
            FockDistribution::new(d.probs()[..=n_max.min(d.max_index())].to_vec(), n_max == 0)
        });
    }
    let mut probs = Vec::with_capacity(n_max + 1);
    probs.push(0.0);
    // t_k = mu^{k-1} / (1+mu)^{k+1}
    let mut t = 1.0 / ((1.0 + mu) * (1.0 + mu));
    for k in 1..=n_max {
        probs.push(k as f64 * t);
        t *= mu / (1.0 + mu);
    }
    FockDistribution::from_generated(probs)
}

/// Mixture of a photon-added thermal state (weight `1 - p`) and the bare
/// thermal state (weight `p`): `P_k = [(1-p) k / mu + p] mu^k/(1+mu)^{k+1}`.
/// `p = 1` is the bare thermal state, `p = 0` pure addition.
pub fn mixed_boson_added_thermal_dist(mu: f64, p: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    check_unit_interval("p", p)?;
    if mu == 0.0 {
        let mut probs = vec![0.0; n_max.max(1) + 1];
        probs[0] = p;
        probs[1] = 1.0 - p;
        probs.truncate(n_max + 1);
        return FockDistribution::new(probs, p < 1.0 && n_max == 0);
    }
    let thermal = thermal_dist(mu, n_max)?;
    let probs = thermal
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &t)| ((1.0 - p) * k as f64 / mu + p) * t)
        .collect();
    FockDistribution::from_generated(probs)
}

/// Single-photon state averaged over thermal displacement noise:
/// `P_k = (1 + 1/mu)^{-k} (k + mu^2) / (mu (1+mu)^2)`.
pub fn thermally_averaged_fock1_dist(mu: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    if mu == 0.0 {
        return fock_dist(1, n_max.max(1)).and_then(|d| {
            FockDistribution::new(d.probs()[..=n_max.min(d.max_index())].to_vec(), n_max == 0)
        });
    }
    let ratio = mu / (1.0 + mu);
    let scale = 1.0 / (mu * (1.0 + mu) * (1.0 + mu));
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut r = 1.0;
    for k in 0..=n_max {
        probs.push(r * (k as f64 + mu * mu) * scale);
        r *= ratio;
    }
    FockDistribution::from_generated(probs)
}

/// Hard ceiling for the truncated squeezing-operator dimension.
const SQUEEZE_DIM_MAX: usize = 2048;
/// Tail probability allowed to leak past the working dimension.
const SQUEEZE_TAIL_LIMIT: f64 = 1e-8;
/// Required agreement between a run and its doubled-dimension reference.
const SQUEEZE_ACCURACY: f64 = 1e-10;

/// Diagonal of `S ρ_th S†` in a truncated Fock space of dimension `dim`,
/// with `S = exp[(xi/2)(a†² - a²)]` real orthogonal.
fn squeezed_thermal_run(mu: f64, xi: f64, dim: usize) -> Vec<f64> {
    let mut gen = vec![0.0; dim * dim];
    for n in 0..dim.saturating_sub(2) {
        let w = 0.5 * xi * (((n + 1) * (n + 2)) as f64).sqrt();
        gen[(n + 2) * dim + n] = w;
        gen[n * dim + n + 2] = -w;
    }
    let s = expm(dim, &gen);
    // Thermal weights, cut once the remaining mass is negligible.
    let ratio = mu / (1.0 + mu);
    let mut weights = Vec::with_capacity(dim);
    let mut t = 1.0 / (1.0 + mu);
    for _ in 0..dim {
        weights.push(t);
        t *= ratio;
        if t < 1e-24 {
            break;
        }
    }
    let mut probs = vec![0.0; dim];
    for (n, &w) in weights.iter().enumerate() {
        for k in 0..dim {
            let amp = s[k * dim + n];
            probs[k] += w * amp * amp;
        }
    }
    probs
}

/// Squeezed thermal state, evaluated with a truncated squeezing operator.
///
/// The working dimension starts at `max(64, 8 (1+mu) e^{2|xi|})` and doubles
/// until two consecutive runs agree to 1e-10 on the requested entries.
pub fn squeezed_thermal_dist(mu: f64, xi: f64, n_max: usize) -> Result<FockDistribution> {
    check_nonneg("mu", mu)?;
    if !xi.is_finite() {
        return Err(Error::ParameterDomain {
            name: "xi",
            value: xi,
            requirement: "finite",
        });
    }
    let mut dim = (8.0 * (1.0 + mu) * (2.0 * xi.abs()).exp()).ceil() as usize;
    dim = dim.max(64).max(n_max + 1);
    if dim > SQUEEZE_DIM_MAX {
        return Err(Error::ParameterDomain {
            name: "xi",
            value: xi,
            requirement: "small enough for truncated-operator evaluation",
        });
    }
    let mut coarse = squeezed_thermal_run(mu, xi, dim);
    loop {
        let fine = squeezed_thermal_run(mu, xi, 2 * dim);
        let within_dim: f64 = fine[..dim].iter().sum();
        let tail = 1.0 - within_dim;
        if tail > SQUEEZE_TAIL_LIMIT {
            return Err(Error::TruncationInsufficient {
                tail,
                limit: SQUEEZE_TAIL_LIMIT,
            });
        }
        let err = coarse
            .iter()
            .zip(fine.iter())
            .take(n_max + 1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err <= SQUEEZE_ACCURACY {
            let mut probs: Vec<f64> = fine[..=n_max.min(2 * dim - 1)].to_vec();
            probs.resize(n_max + 1, 0.0);
            return FockDistribution::from_generated(probs);
        }
        dim *= 2;
        if 2 * dim > 2 * SQUEEZE_DIM_MAX {
            return Err(Error::TruncationInsufficient {
                tail: err,
                limit: SQUEEZE_ACCURACY,
            });
        }
        coarse = fine;
    }
}

/// Entrywise convex mixture of distributions over a common length.
pub fn mix(components: &[(f64, FockDistribution)]) -> Result<FockDistribution> {
    if components.is_empty() {
        return Err(Error::InvalidDistribution("empty mixture".into()));
    }
    let len = components[0].1.len();
    let mut total_weight = 0.0;
    for (w, d) in components {
        if !(*w >= 0.0) || !w.is_finite() {
            return Err(Error::ParameterDomain {
                name: "weight",
                value: *w,
                requirement: "finite and >= 0",
            });
        }
        if d.len() != len {
            return Err(Error::InvalidDistribution(
                "mixture components have different lengths".into(),
            ));
        }
        total_weight += w;
    }
    if (total_weight - 1.0).abs() > 1e-9 {
        return Err(Error::ParameterDomain {
            name: "weight sum",
            value: total_weight,
            requirement: "sums to 1",
        });
    }
    let mut probs = vec![0.0; len];
    for (w, d) in components {
        for (acc, &p) in probs.iter_mut().zip(d.probs()) {
            *acc += w * p;
        }
    }
    let truncated = components.iter().any(|(_, d)| d.is_truncated());
    let sum: f64 = probs.iter().sum();
    FockDistribution::new(probs, truncated || 1.0 - sum >= TAIL_NEGLIGIBLE)
}

/// Parametric state families producing Fock distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    Coherent { mu: f64 },
    Fock { n: usize },
    Thermal { mu: f64 },
    NoisyFock { k: usize, mu: f64 },
    BosonAddedCoherent { mu: f64, ell: usize },
    ProbBosonAddedCoherent { mu: f64, p: f64 },
    BosonAddedThermal { mu: f64 },
    MixedBosonAddedThermal { mu: f64, p: f64 },
    ThermallyAveragedFock1 { mu: f64 },
    SqueezedThermal { mu: f64, xi: f64 },
    Mixture(Vec<(f64, StateFamily)>),
}

impl StateFamily {
    /// Photon-number distribution on `0..=n_max`.
    pub fn distribution(&self, n_max: usize) -> Result<FockDistribution> {
        match self {
            Self::Coherent { mu } => coherent_dist(*mu, n_max),
            Self::Fock { n } => fock_dist(*n, n_max),
            Self::Thermal { mu } => thermal_dist(*mu, n_max),
            Self::NoisyFock { k, mu } => noisy_fock_dist(*k, *mu, n_max),
            Self::BosonAddedCoherent { mu, ell } => boson_added_coherent_dist(*mu, *ell, n_max),
            Self::ProbBosonAddedCoherent { mu, p } => {
                prob_boson_added_coherent_dist(*mu, *p, n_max)
            }
            Self::BosonAddedThermal { mu } => boson_added_thermal_dist(*mu, n_max),
            Self::MixedBosonAddedThermal { mu, p } => {
                mixed_boson_added_thermal_dist(*mu, *p, n_max)
            }
            Self::ThermallyAveragedFock1 { mu } => thermally_averaged_fock1_dist(*mu, n_max),
            Self::SqueezedThermal { mu, xi } => squeezed_thermal_dist(*mu, *xi, n_max),
            Self::Mixture(parts) => {
                let mut components = Vec::with_capacity(parts.len());
                for (w, family) in parts {
                    components.push((*w, family.distribution(n_max)?));
                }
                mix(&components)
            }
        }
    }

    /// Stable kebab-case name used in serialized metadata and the CLI.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Coherent { .. } => "coherent",
            Self::Fock { .. } => "fock",
            Self::Thermal { .. } => "thermal",
            Self::NoisyFock { .. } => "noisy-fock",
            Self::BosonAddedCoherent { .. } => "boson-added-coherent",
            Self::ProbBosonAddedCoherent { .. } => "prob-boson-added-coherent",
            Self::BosonAddedThermal { .. } => "boson-added-thermal",
            Self::MixedBosonAddedThermal { .. } => "mixed-boson-added-thermal",
            Self::ThermallyAveragedFock1 { .. } => "thermally-averaged-fock",
            Self::SqueezedThermal { .. } => "squeezed-thermal",
            Self::Mixture(_) => "mixture",
        }
    }

    /// Scalar parameters in serialization order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Self::Coherent { mu }
            | Self::Thermal { mu }
            | Self::BosonAddedThermal { mu }
            | Self::ThermallyAveragedFock1 { mu } => vec![("mu", *mu)],
            Self::Fock { n } => vec![("n", *n as f64)],
            Self::NoisyFock { k, mu } => vec![("k", *k as f64), ("mu", *mu)],
            Self::BosonAddedCoherent { mu, ell } => vec![("mu", *mu), ("ell", *ell as f64)],
            Self::ProbBosonAddedCoherent { mu, p } | Self::MixedBosonAddedThermal { mu, p } => {
                vec![("mu", *mu), ("p", *p)]
            }
            Self::SqueezedThermal { mu, xi } => vec![("mu", *mu), ("xi", *xi)],
            Self::Mixture(_) => vec![],
        }
    }
}
